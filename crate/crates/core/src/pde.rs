//! Finite-difference solvers and residual checkers for the PDE faces of the
//! problem: the Feynman-Kac Cauchy problem for the bridge functional, the
//! killed heat equation in boundary-fixed coordinates, and the residual /
//! ratio identities connecting the Schrodinger-type fields.

use crate::boundary::Boundary;
use crate::curve::{DensityCurve, Method};
use crate::error::{Error, Result};
use crate::kernels::{gauss_kernel, level_density_unchecked};
use crate::montecarlo::density_prefactor;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    V,
    W,
    U,
    Omega,
    Kappa,
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FieldKind::V => "v_field",
            FieldKind::W => "w_field",
            FieldKind::U => "u_field",
            FieldKind::Omega => "omega_field",
            FieldKind::Kappa => "kappa_field",
        };
        f.write_str(s)
    }
}

/// A 2-D array of PDE solution values over (time, space).
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// Row-major, `values[it * x_grid.len() + ix]`.
    values: Vec<f64>,
    pub kind: FieldKind,
}

impl FieldGrid {
    pub fn new(t_grid: Vec<f64>, x_grid: Vec<f64>, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        if values.len() != t_grid.len() * x_grid.len() {
            return Err(Error::InvalidArgument(
                "field values must have t_grid.len() * x_grid.len() entries".into(),
            ));
        }
        if t_grid.windows(2).any(|w| w[1] <= w[0]) || x_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "field grids must be strictly increasing".into(),
            ));
        }
        Ok(FieldGrid {
            t_grid,
            x_grid,
            values,
            kind,
        })
    }

    /// Assemble a field by evaluating `f(t, x)` at every node.
    pub fn from_fn(
        t_grid: Vec<f64>,
        x_grid: Vec<f64>,
        kind: FieldKind,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(t_grid.len() * x_grid.len());
        for &t in &t_grid {
            for &x in &x_grid {
                values.push(f(t, x));
            }
        }
        Self::new(t_grid, x_grid, values, kind)
    }

    #[inline]
    pub fn get(&self, it: usize, ix: usize) -> f64 {
        self.values[it * self.x_grid.len() + ix]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_t(&self) -> usize {
        self.t_grid.len()
    }

    pub fn n_x(&self) -> usize {
        self.x_grid.len()
    }

    /// CSV dump with header `t,x,value`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,x,value")?;
        for (it, &t) in self.t_grid.iter().enumerate() {
            for (ix, &x) in self.x_grid.iter().enumerate() {
                writeln!(out, "{:.8e},{:.8e},{:.8e}", t, x, self.get(it, ix))?;
            }
        }
        Ok(())
    }
}

/// Thomas solve of a tridiagonal system, with an optional extra entry in the
/// first row at column 2 (the one-sided row next to the `x = 0` singularity).
/// Diagonals are `lo[j] x[j-1] + di[j] x[j] + up[j] x[j+1] = rhs[j]`.
fn solve_almost_tridiagonal(
    lo: &[f64],
    di: &[f64],
    up: &[f64],
    first_extra: f64,
    rhs: &mut [f64],
) -> Result<()> {
    let n = rhs.len();
    if n < 3 {
        return Err(Error::GridTooCoarse("tridiagonal system needs >= 3 rows".into()));
    }
    let mut d0 = di[0];
    let mut u0 = up[0];
    let mut r0 = rhs[0];
    if first_extra != 0.0 {
        // Eliminate the (0, 2) entry against row 1.
        if up[1].abs() < 1e-300 {
            return Err(Error::NonConvergence("zero pivot in first-row elimination".into()));
        }
        let m = first_extra / up[1];
        d0 -= m * lo[1];
        u0 -= m * di[1];
        r0 -= m * rhs[1];
    }
    // Forward sweep.
    let mut c_star = vec![0.0; n];
    let mut d_star = vec![0.0; n];
    if d0.abs() < 1e-300 {
        return Err(Error::NonConvergence("zero pivot in tridiagonal sweep".into()));
    }
    c_star[0] = u0 / d0;
    d_star[0] = r0 / d0;
    for j in 1..n {
        let denom = di[j] - lo[j] * c_star[j - 1];
        if denom.abs() < 1e-300 {
            return Err(Error::NonConvergence("zero pivot in tridiagonal sweep".into()));
        }
        c_star[j] = if j + 1 < n { up[j] / denom } else { 0.0 };
        d_star[j] = (rhs[j] - lo[j] * d_star[j - 1]) / denom;
    }
    rhs[n - 1] = d_star[n - 1];
    for j in (0..n - 1).rev() {
        rhs[j] = d_star[j] - c_star[j] * rhs[j + 1];
    }
    Ok(())
}

/// Spatial operator coefficients for one interior row:
/// `L w = lo w_{j-1} + di w_j + up w_{j+1}`.
#[inline]
fn advection_diffusion_row(alpha: f64, b: f64, dx: f64, c: f64) -> (f64, f64, f64) {
    let (mut lo, mut di, mut up) = (alpha, -2.0 * alpha, alpha);
    if b.abs() * dx <= 1.0 {
        lo -= b / (2.0 * dx);
        up += b / (2.0 * dx);
    } else if b > 0.0 {
        di -= b / dx;
        up += b / dx;
    } else {
        di += b / dx;
        lo -= b / dx;
    }
    di -= c;
    (lo, di, up)
}

fn check_grid(label: &str, n_t: usize, n_x: usize, x_max: f64, scale: f64) -> Result<()> {
    if n_x < 200 {
        return Err(Error::GridTooCoarse(format!(
            "{label}: need at least 200 space intervals, got {n_x}"
        )));
    }
    if n_t < 50 {
        return Err(Error::GridTooCoarse(format!(
            "{label}: need at least 50 time steps, got {n_t}"
        )));
    }
    if x_max < 5.0 * scale {
        return Err(Error::GridTooCoarse(format!(
            "{label}: domain cutoff {x_max} below 5 * max(a, sqrt(horizon)) = {}",
            5.0 * scale
        )));
    }
    Ok(())
}

/// Truncation value at the far edge: for large `x` the bridge is close to the
/// straight line into the pinning point, giving
/// `v(t, x_max) = exp(-x_max [ (f(s) - f(t))/(s - t) - f'(t) ])`.
fn far_edge_value(boundary: &Boundary, s: f64, t: f64, x_max: f64, dt: f64) -> Result<f64> {
    let gap = (s - t).max(0.5 * dt);
    let psi = (boundary.f(s)? - boundary.f(t)?) / gap - boundary.df(t)?;
    Ok((-x_max * psi.max(0.0)).exp())
}

/// Backward Crank-Nicolson solve of the Feynman-Kac Cauchy problem
///
/// `-v_t + f''(t) x v = 1/2 v_xx + (1/x - x/(s-t)) v_x`,  `v(s, .) = 1`,
///
/// marching in time-to-pin with the drift upwinded where the cell Peclet
/// number demands it and two implicit-Euler startup steps to damp the
/// terminal coefficient singularity. The first interior row is discretized
/// one-sided (away from `x = 0`) and no boundary condition is imposed at
/// `x = 0`; the far edge carries the large-`x` asymptotic value.
///
/// `v(0, a)` is the expectation of the bridge exponential functional.
pub fn solve_fk_cauchy(
    boundary: &Boundary,
    s: f64,
    n_t: usize,
    n_x: usize,
    x_max: f64,
) -> Result<FieldGrid> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("s must be positive, got {s}")));
    }
    check_grid("solve_fk_cauchy", n_t, n_x, x_max, boundary.gap().max(s.sqrt()))?;

    let dt = s / n_t as f64;
    let dx = x_max / n_x as f64;
    let alpha = 0.5 / (dx * dx);
    let n_inner = n_x - 1; // unknowns at j = 1..n_x-1

    let mut field = vec![0.0f64; (n_t + 1) * (n_x + 1)];
    let mut w = vec![1.0f64; n_x + 1]; // tau = 0 (t = s): terminal data
    field[n_t * (n_x + 1)..].copy_from_slice(&w);

    let mut lo = vec![0.0f64; n_inner];
    let mut di = vec![0.0f64; n_inner];
    let mut up = vec![0.0f64; n_inner];
    let mut rhs = vec![0.0f64; n_inner];

    for step in 0..n_t {
        // Coefficients at the midpoint of [tau, tau + dt].
        let tau_mid = (step as f64 + 0.5) * dt;
        let t_mid = s - tau_mid;
        let theta: f64 = if step < 2 { 1.0 } else { 0.5 };
        let ddf_mid = boundary.ddf(t_mid)?;

        let t_new = s - (step + 1) as f64 * dt;
        let bc_new = far_edge_value(boundary, s, t_new.max(0.0), x_max, dt)?;

        for j in 1..=n_inner {
            let x = j as f64 * dx;
            let b = 1.0 / x - x / tau_mid;
            let c = ddf_mid * x;
            let (l, d, u) = if j == 1 {
                // One-sided row: v_x = (-3w1 + 4w2 - w3)/(2dx),
                // v_xx = (w1 - 2w2 + w3)/dx^2.
                let d = alpha - 1.5 * b / dx - c;
                let u = -2.0 * alpha + 2.0 * b / dx;
                let e = alpha - 0.5 * b / dx;
                (e, d, u) // (extra, diag, upper) -- extra handled below
            } else {
                advection_diffusion_row(alpha, b, dx, c)
            };
            let i = j - 1;
            if j == 1 {
                // row stores: di = diag, up = coupling to w2; `l` is the
                // extra coupling to w3, kept aside.
                di[i] = 1.0 - theta * dt * d;
                up[i] = -theta * dt * u;
                lo[i] = 0.0;
                let explicit = if theta < 1.0 {
                    d * w[1] + u * w[2] + l * w[3]
                } else {
                    0.0
                };
                rhs[i] = w[1] + (1.0 - theta) * dt * explicit;
                // The extra entry is -theta dt * l at column j = 3.
            } else {
                di[i] = 1.0 - theta * dt * d;
                lo[i] = -theta * dt * l;
                up[i] = -theta * dt * u;
                let explicit = if theta < 1.0 {
                    l * w[j - 1] + d * w[j] + u * w[j + 1]
                } else {
                    0.0
                };
                rhs[i] = w[j] + (1.0 - theta) * dt * explicit;
            }
        }
        // First-row extra coupling to column 3 (index 2 of the inner system).
        let x1 = dx;
        let b1 = 1.0 / x1 - x1 / tau_mid;
        let e1 = alpha - 0.5 * b1 / dx;
        let first_extra = -theta * dt * e1;
        // Dirichlet far edge folds into the last row.
        let j_last = n_inner;
        let x_last = j_last as f64 * dx;
        let b_last = 1.0 / x_last - x_last / tau_mid;
        let c_last = ddf_mid * x_last;
        let (_, _, u_last) = advection_diffusion_row(alpha, b_last, dx, c_last);
        rhs[n_inner - 1] += theta * dt * u_last * bc_new;
        // (the explicit side above already used the old edge value via w[n_x])

        solve_almost_tridiagonal(&lo, &di, &up, first_extra, &mut rhs)?;
        w[1..n_x].copy_from_slice(&rhs);
        w[n_x] = bc_new;
        // x = 0 column: quadratic extrapolation of the interior limit.
        w[0] = (3.0 * w[1] - 3.0 * w[2] + w[3]).clamp(0.0, 1.0);

        let row = n_t - (step + 1);
        field[row * (n_x + 1)..(row + 1) * (n_x + 1)].copy_from_slice(&w);
    }

    let t_grid: Vec<f64> = (0..=n_t).map(|i| i as f64 * dt).collect();
    let x_grid: Vec<f64> = (0..=n_x).map(|j| j as f64 * dx).collect();
    FieldGrid::new(t_grid, x_grid, field, FieldKind::V)
}

/// Quadratic interpolation of a grid row at `x`.
fn interp_quadratic(x_grid: &[f64], row: impl Fn(usize) -> f64, x: f64) -> f64 {
    let n = x_grid.len();
    let dx = x_grid[1] - x_grid[0];
    let j = ((x - x_grid[0]) / dx).round() as isize;
    let j = j.clamp(1, n as isize - 2) as usize;
    let (x0, x1, x2) = (x_grid[j - 1], x_grid[j], x_grid[j + 1]);
    let (y0, y1, y2) = (row(j - 1), row(j), row(j + 1));
    let l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
    y0 * l0 + y1 * l1 + y2 * l2
}

/// Value of the solved functional expectation at the start point, `v(0, a)`.
pub fn functional_from_v(vfield: &FieldGrid, a: f64) -> f64 {
    interp_quadratic(&vfield.x_grid, |j| vfield.get(0, j), a)
}

/// First-passage density at `s` assembled from a solved `v` field:
/// `exp(-a f'(0) - 1/2 int (f')^2) h(s, a) v(0, a)`.
pub fn density_from_v(vfield: &FieldGrid, boundary: &Boundary, s: f64) -> Result<f64> {
    Ok(density_prefactor(boundary, s)? * functional_from_v(vfield, boundary.gap()))
}

/// Killed-heat-equation solve in boundary-fixed coordinates `y = f(t) - x`:
///
/// `q_t = 1/2 q_yy - f'(t) q_y`,  `q(t, 0) = 0`,  `q(0, .) = delta_a`
///
/// (the drift sign follows from the coordinate change; the distance to the
/// boundary gains drift `+f'`, so the density is advected by `-f' d/dy`).
/// The delta is approximated by one exact heat step `k(dt, y - a)`, and the
/// density is read off as the absorbing-edge flux `phi(t) = 1/2 dq/dy|_0+`
/// with a one-sided second-order difference.
pub fn solve_killed_heat(
    boundary: &Boundary,
    t_max: f64,
    n_t: usize,
    n_y: usize,
    y_max: f64,
) -> Result<DensityCurve> {
    Ok(solve_killed_heat_report(boundary, t_max, n_t, n_y, y_max)?.curve)
}

/// Curve plus the worst probability-balance defect over the march.
pub struct HeatSolveReport {
    pub curve: DensityCurve,
    pub max_mass_defect: f64,
}

pub fn solve_killed_heat_report(
    boundary: &Boundary,
    t_max: f64,
    n_t: usize,
    n_y: usize,
    y_max: f64,
) -> Result<HeatSolveReport> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let a = boundary.gap();
    check_grid("solve_killed_heat", n_t, n_y, y_max, a.max(t_max.sqrt()))?;

    let dt = t_max / n_t as f64;
    let dy = y_max / n_y as f64;
    let alpha = 0.5 / (dy * dy);

    // One exact heat step of the point mass at a.
    let mut q: Vec<f64> = (0..=n_y)
        .map(|j| gauss_kernel(dt, j as f64 * dy - a))
        .collect();
    q[0] = 0.0;
    q[n_y] = 0.0;
    let mass0 = trapezoid(&q, dy);
    if (mass0 - 1.0).abs() > 1e-3 {
        return Err(Error::DeltaApproximationError((mass0 - 1.0).abs()));
    }

    let flux = |q: &[f64]| (4.0 * q[1] - q[2]) / (4.0 * dy);

    let mut phi = vec![0.0f64; n_t + 1];
    phi[1] = flux(&q);
    let mut absorbed = 0.0;
    let mut prev_phi = phi[1];
    let mut max_defect = (mass0 - 1.0).abs();

    let n_inner = n_y - 1;
    let mut lo = vec![0.0f64; n_inner];
    let mut di = vec![0.0f64; n_inner];
    let mut up = vec![0.0f64; n_inner];
    let mut rhs = vec![0.0f64; n_inner];

    for step in 1..n_t {
        let t_mid = (step as f64 + 0.5) * dt;
        let b = -boundary.df(t_mid)?;
        for j in 1..=n_inner {
            let (l, d, u) = advection_diffusion_row(alpha, b, dy, 0.0);
            let i = j - 1;
            di[i] = 1.0 - 0.5 * dt * d;
            lo[i] = -0.5 * dt * l;
            up[i] = -0.5 * dt * u;
            let qm = if j > 1 { q[j - 1] } else { 0.0 };
            let qp = if j < n_inner { q[j + 1] } else { 0.0 };
            rhs[i] = q[j] + 0.5 * dt * (l * qm + d * q[j] + u * qp);
        }
        solve_almost_tridiagonal(&lo, &di, &up, 0.0, &mut rhs)?;
        q[1..n_y].copy_from_slice(&rhs);

        let f = flux(&q);
        phi[step + 1] = f;
        absorbed += 0.5 * (prev_phi + f) * dt;
        prev_phi = f;
        let defect = (trapezoid(&q, dy) + absorbed - 1.0).abs();
        max_defect = max_defect.max(defect);
    }

    let s_grid: Vec<f64> = (1..=n_t).map(|i| i as f64 * dt).collect();
    let curve = DensityCurve::new(
        s_grid,
        phi[1..].iter().map(|&p| p.max(0.0)).collect(),
        None,
        None,
        Method::HeatPde,
        boundary.digest(),
    )?;
    Ok(HeatSolveReport {
        curve,
        max_mass_defect: max_defect,
    })
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ends = 0.5 * (values[0] + values[values.len() - 1]);
    (values[1..values.len() - 1].iter().sum::<f64>() + ends) * h
}

/// Max interior residual of the linear-potential equation
/// `-w_t + f''(t) x w - 1/2 w_xx = 0` by centered differences.
pub fn residual_w(wfield: &FieldGrid, boundary: &Boundary) -> Result<f64> {
    let (nt, nx) = (wfield.n_t(), wfield.n_x());
    if nt < 3 || nx < 3 {
        return Err(Error::GridTooCoarse(
            "residual check needs at least a 3x3 field".into(),
        ));
    }
    let mut worst = 0.0f64;
    for it in 1..nt - 1 {
        let t = wfield.t_grid[it];
        let ddf = boundary.ddf(t)?;
        let dt2 = wfield.t_grid[it + 1] - wfield.t_grid[it - 1];
        for ix in 1..nx - 1 {
            let x = wfield.x_grid[ix];
            let dx = wfield.x_grid[ix + 1] - wfield.x_grid[ix];
            let w_t = (wfield.get(it + 1, ix) - wfield.get(it - 1, ix)) / dt2;
            let w_xx = (wfield.get(it, ix + 1) - 2.0 * wfield.get(it, ix)
                + wfield.get(it, ix - 1))
                / (dx * dx);
            let r = -w_t + ddf * x * wfield.get(it, ix) - 0.5 * w_xx;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Max interior residual of the second Schrodinger-type equation
/// `-u_t + [-1/(s-t) + f''(t) x] u - 1/2 u_xx - (1/x) u_x = 0`.
pub fn residual_u(ufield: &FieldGrid, boundary: &Boundary, s: f64) -> Result<f64> {
    let (nt, nx) = (ufield.n_t(), ufield.n_x());
    if nt < 3 || nx < 3 {
        return Err(Error::GridTooCoarse(
            "residual check needs at least a 3x3 field".into(),
        ));
    }
    let mut worst = 0.0f64;
    for it in 1..nt - 1 {
        let t = ufield.t_grid[it];
        if s - t <= 0.0 {
            return Err(Error::DomainError(format!(
                "field grid reaches t = {t} >= s = {s}"
            )));
        }
        let ddf = boundary.ddf(t)?;
        let dt2 = ufield.t_grid[it + 1] - ufield.t_grid[it - 1];
        for ix in 1..nx - 1 {
            let x = ufield.x_grid[ix];
            if x <= 0.0 {
                continue;
            }
            let dx = ufield.x_grid[ix + 1] - ufield.x_grid[ix];
            let u = ufield.get(it, ix);
            let u_t = (ufield.get(it + 1, ix) - ufield.get(it - 1, ix)) / dt2;
            let u_x = (ufield.get(it, ix + 1) - ufield.get(it, ix - 1)) / (2.0 * dx);
            let u_xx =
                (ufield.get(it, ix + 1) - 2.0 * u + ufield.get(it, ix - 1)) / (dx * dx);
            let r = -u_t + (-1.0 / (s - t) + ddf * x) * u - 0.5 * u_xx - u_x / x;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Forms `v = w / h(s - t, x)` on interior nodes and returns its max residual
/// in the Feynman-Kac equation; also verifies the pointwise gauge relation
/// `1/x - x/(s-t) = h_x/h` to 1e-10 as a sub-check.
pub fn ratio_identity_check(wfield: &FieldGrid, boundary: &Boundary, s: f64) -> Result<f64> {
    let (nt, nx) = (wfield.n_t(), wfield.n_x());
    if nt < 3 || nx < 3 {
        return Err(Error::GridTooCoarse(
            "ratio check needs at least a 3x3 field".into(),
        ));
    }
    // v on the full grid.
    let mut v = vec![0.0f64; nt * nx];
    for it in 0..nt {
        let sigma = s - wfield.t_grid[it];
        if sigma <= 0.0 {
            return Err(Error::DomainError(format!(
                "field grid reaches t = {} >= s = {s}",
                wfield.t_grid[it]
            )));
        }
        for ix in 0..nx {
            let x = wfield.x_grid[ix];
            if x <= 0.0 {
                return Err(Error::DomainError("ratio check needs x > 0 nodes".into()));
            }
            v[it * nx + ix] = wfield.get(it, ix) / level_density_unchecked(sigma, x);
        }
    }

    let mut worst = 0.0f64;
    for it in 1..nt - 1 {
        let t = wfield.t_grid[it];
        let sigma = s - t;
        let ddf = boundary.ddf(t)?;
        let dt2 = wfield.t_grid[it + 1] - wfield.t_grid[it - 1];
        for ix in 1..nx - 1 {
            let x = wfield.x_grid[ix];
            let drift = 1.0 / x - x / sigma;
            // h_x / h from the differentiated closed form.
            let gauge = (1.0 - x * x / sigma) / x;
            if (drift - gauge).abs() > 1e-10 {
                return Err(Error::IdentityCheckFailed(format!(
                    "gauge relation off by {} at (t = {t}, x = {x})",
                    (drift - gauge).abs()
                )));
            }
            let dx = wfield.x_grid[ix + 1] - wfield.x_grid[ix];
            let vc = v[it * nx + ix];
            let v_t = (v[(it + 1) * nx + ix] - v[(it - 1) * nx + ix]) / dt2;
            let v_x = (v[it * nx + ix + 1] - v[it * nx + ix - 1]) / (2.0 * dx);
            let v_xx = (v[it * nx + ix + 1] - 2.0 * vc + v[it * nx + ix - 1]) / (dx * dx);
            let r = -v_t + ddf * x * vc - 0.5 * v_xx - drift * v_x;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::level_hitting_density;
    use approx::assert_relative_eq;

    fn linear() -> Boundary {
        Boundary::linear(1.0, 1.0, 4.0).unwrap()
    }

    fn quadratic() -> Boundary {
        Boundary::quadratic(1.0, 0.0, 0.5, 4.0).unwrap()
    }

    #[test]
    fn fk_solver_is_identity_for_linear_boundaries() {
        let v = solve_fk_cauchy(&linear(), 1.0, 100, 200, 6.0).unwrap();
        for it in 0..v.n_t() {
            for ix in 1..v.n_x() {
                assert!(
                    (v.get(it, ix) - 1.0).abs() < 1e-10,
                    "v({it},{ix}) = {}",
                    v.get(it, ix)
                );
            }
        }
    }

    #[test]
    fn fk_solver_rejects_coarse_grids() {
        assert!(matches!(
            solve_fk_cauchy(&linear(), 1.0, 100, 100, 6.0),
            Err(Error::GridTooCoarse(_))
        ));
        assert!(matches!(
            solve_fk_cauchy(&linear(), 1.0, 100, 300, 2.0),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn fk_quadratic_matches_independent_reference() {
        // v(0,1) = 0.4452 from two independent routes (fine-grid PDE and a
        // 2e5-path Monte Carlo of the functional).
        let v = solve_fk_cauchy(&quadratic(), 1.0, 800, 800, 6.0).unwrap();
        let v0a = functional_from_v(&v, 1.0);
        assert_relative_eq!(v0a, 0.4452, max_relative = 5e-3);
        assert!(v0a > 0.0 && v0a < 1.0);
    }

    #[test]
    fn fk_solution_respects_growth_bounds() {
        let v = solve_fk_cauchy(&quadratic(), 1.0, 400, 400, 6.0).unwrap();
        for (i, &val) in v.values().iter().enumerate() {
            assert!(
                (-1e-9..=1.0 + 1e-9).contains(&val),
                "node {i}: v = {val}"
            );
        }
    }

    #[test]
    fn fk_comparison_principle_in_the_potential() {
        let low = solve_fk_cauchy(&Boundary::quadratic(1.0, 0.0, 0.25, 4.0).unwrap(), 1.0, 300, 300, 6.0)
            .unwrap();
        let high = solve_fk_cauchy(&quadratic(), 1.0, 300, 300, 6.0).unwrap();
        for i in 0..low.values().len() {
            assert!(high.values()[i] <= low.values()[i] + 1e-9);
        }
    }

    #[test]
    fn fk_second_order_convergence_witness() {
        let vals: Vec<f64> = [(200usize, 200usize), (400, 400), (800, 800)]
            .iter()
            .map(|&(nt, nx)| {
                functional_from_v(&solve_fk_cauchy(&quadratic(), 1.0, nt, nx, 6.0).unwrap(), 1.0)
            })
            .collect();
        let d1 = (vals[0] - vals[1]).abs();
        let d2 = (vals[1] - vals[2]).abs();
        assert!(
            d1 < 4.3 * d2,
            "halving changes: {d1} then {d2} (ratio {})",
            d1 / d2
        );
    }

    #[test]
    fn density_from_v_linear_closed_form() {
        let v = solve_fk_cauchy(&linear(), 1.0, 200, 400, 6.0).unwrap();
        assert_relative_eq!(
            density_from_v(&v, &linear(), 1.0).unwrap(),
            0.05399096651318806,
            max_relative = 1e-9
        );
    }

    #[test]
    fn density_from_v_constant_boundary_gives_level_density() {
        let level = Boundary::constant(1.0, 2.0).unwrap();
        let v = solve_fk_cauchy(&level, 1.0, 200, 400, 6.0).unwrap();
        assert_relative_eq!(
            density_from_v(&v, &level, 1.0).unwrap(),
            level_hitting_density(1.0, 1.0).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn heat_solver_linear_boundary_density() {
        let report = solve_killed_heat_report(&linear(), 1.0, 1000, 1000, 8.0).unwrap();
        let phi_end = *report.curve.phi.last().unwrap();
        assert_relative_eq!(phi_end, 0.05399096651318806, max_relative = 1e-2);
        assert!(report.max_mass_defect < 1e-3);
    }

    #[test]
    fn heat_solver_constant_boundary_matches_level_density() {
        let level = Boundary::constant(1.0, 2.0).unwrap();
        let curve = solve_killed_heat(&level, 1.0, 1000, 1000, 8.0).unwrap();
        for (i, &s) in curve.s_grid.iter().enumerate() {
            if s >= 0.2 {
                let expect = level_hitting_density(s, 1.0).unwrap();
                assert_relative_eq!(curve.phi[i], expect, max_relative = 1e-2);
            }
        }
    }

    #[test]
    fn heat_solver_rejects_unresolved_delta() {
        // Coarse space grid cannot resolve the one-step heat profile.
        let err = solve_killed_heat(&linear(), 1.0, 100, 200, 40.0).unwrap_err();
        assert!(matches!(err, Error::DeltaApproximationError(_)), "{err:?}");
    }

    #[test]
    fn residual_w_zero_field() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.01).collect();
        let x: Vec<f64> = (0..20).map(|j| 0.5 + j as f64 * 0.01).collect();
        let w = FieldGrid::from_fn(t, x, FieldKind::W, |_, _| 0.0).unwrap();
        assert_eq!(residual_w(&w, &quadratic()).unwrap(), 0.0);
    }

    #[test]
    fn residual_w_heat_kernel_solution() {
        // w = k(s - t, x) solves the equation for f'' = 0; centered
        // differences leave an O(h^2) residual.
        let s = 1.0;
        let h = 1e-3;
        let t: Vec<f64> = (0..=300).map(|i| i as f64 * h).collect();
        let x: Vec<f64> = (0..=600).map(|j| 0.5 + j as f64 * h).collect();
        let w = FieldGrid::from_fn(t, x, FieldKind::W, |t, x| gauss_kernel(s - t, x)).unwrap();
        let r = residual_w(&w, &linear()).unwrap();
        assert!(r < 1e-5, "residual {r}");
    }

    #[test]
    fn residual_u_heat_kernel_solution() {
        // For f'' = 0 and v = 1, u = k(s - t, x): the -u/(s-t) and -(1/x)u_x
        // terms cancel the kernel's time derivative.
        let s = 1.0;
        let h = 1e-3;
        let t: Vec<f64> = (0..=300).map(|i| i as f64 * h).collect();
        let x: Vec<f64> = (0..=600).map(|j| 0.5 + j as f64 * h).collect();
        let u = FieldGrid::from_fn(t, x, FieldKind::U, |t, x| gauss_kernel(s - t, x)).unwrap();
        let r = residual_u(&u, &linear(), s).unwrap();
        assert!(r < 1e-5, "residual {r}");
    }

    #[test]
    fn residual_u_zero_field() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 * 0.01).collect();
        let x: Vec<f64> = (0..10).map(|j| 0.5 + j as f64 * 0.1).collect();
        let u = FieldGrid::from_fn(t, x, FieldKind::U, |_, _| 0.0).unwrap();
        assert_eq!(residual_u(&u, &linear(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn ratio_check_on_exact_level_density_solution() {
        // w = h(s - t, x) solves the f'' = 0 equation and v = w/h = 1
        // solves the potential-free Feynman-Kac equation exactly.
        let s = 1.0;
        let t: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
        let x: Vec<f64> = (0..=50).map(|j| 0.3 + j as f64 * 0.02).collect();
        let w = FieldGrid::from_fn(t, x, FieldKind::W, |t, x| {
            level_density_unchecked(s - t, x)
        })
        .unwrap();
        let r = ratio_identity_check(&w, &linear(), s).unwrap();
        assert!(r < 1e-11, "residual {r}");
    }

    #[test]
    fn tridiagonal_solver_reproduces_dense_solution() {
        // Random-ish diagonally dominant system against direct elimination.
        let n = 6;
        let lo = [0.0, 1.5, 3.0, 4.5, 6.0, 7.5];
        let di = [4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let up = [-0.5, -1.0, -1.5, -2.0, -2.5, 0.0];
        let b: Vec<f64> = (1..=n).map(|x| x as f64).collect();
        let mut rhs = b.clone();
        solve_almost_tridiagonal(&lo, &di, &up, 0.0, &mut rhs).unwrap();
        for i in 0..n {
            let mut acc = di[i] * rhs[i];
            if i > 0 {
                acc += lo[i] * rhs[i - 1];
            }
            if i + 1 < n {
                acc += up[i] * rhs[i + 1];
            }
            assert_relative_eq!(acc, b[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn tridiagonal_solver_with_first_row_extra() {
        let n = 5;
        let lo = [0.0, 1.0, 2.0, 1.0, 2.0];
        let di = [5.0, 6.0, 7.0, 6.0, 5.0];
        let up = [-1.0, -2.0, -1.0, -2.0, 0.0];
        let extra = 0.7; // entry (0, 2)
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let mut rhs = b.to_vec();
        solve_almost_tridiagonal(&lo, &di, &up, extra, &mut rhs).unwrap();
        for i in 0..n {
            let mut acc = di[i] * rhs[i];
            if i > 0 {
                acc += lo[i] * rhs[i - 1];
            }
            if i + 1 < n {
                acc += up[i] * rhs[i + 1];
            }
            if i == 0 {
                acc += extra * rhs[2];
            }
            assert_relative_eq!(acc, b[i], epsilon = 1e-10);
        }
    }
}

//! Fourier solution family for the linear-potential equation, heat-equation
//! synthesis, and the Burgers-transformation check.

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::pde::FieldGrid;
use crate::quad::{adaptive_simpson, composite_gl4};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Gaussian,
    Unit,
    Table,
}

/// The arbitrary spectral weight `Pi(y)` of the Fourier solution family.
/// Profiles are even in `y`; tabulated profiles are linearly interpolated on
/// `|y|` and vanish beyond their last knot.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    kind: ProfileKind,
    params: Vec<f64>,
}

impl SpectralProfile {
    /// `Pi(y) = exp(-scale * y^2 / 2)`.
    pub fn gaussian(scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gaussian profile scale must be positive, got {scale}"
            )));
        }
        Ok(SpectralProfile {
            kind: ProfileKind::Gaussian,
            params: vec![scale],
        })
    }

    /// `Pi == 1`.
    pub fn unit() -> Self {
        SpectralProfile {
            kind: ProfileKind::Unit,
            params: Vec::new(),
        }
    }

    /// Even profile from `(y, value)` pairs with `y >= 0` strictly increasing.
    pub fn table(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated profile needs at least 2 points".into(),
            ));
        }
        if points[0].0 < 0.0 || points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument(
                "tabulated profile needs strictly increasing y >= 0".into(),
            ));
        }
        let mut params = Vec::with_capacity(points.len() * 2);
        for &(y, v) in points {
            params.push(y);
            params.push(v);
        }
        Ok(SpectralProfile {
            kind: ProfileKind::Table,
            params,
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn eval(&self, y: f64) -> f64 {
        let y = y.abs();
        match self.kind {
            ProfileKind::Unit => 1.0,
            ProfileKind::Gaussian => (-0.5 * self.params[0] * y * y).exp(),
            ProfileKind::Table => {
                let pts = &self.params;
                let n = pts.len() / 2;
                if y <= pts[0] {
                    return pts[1];
                }
                for i in 1..n {
                    if y <= pts[2 * i] {
                        let (y0, v0) = (pts[2 * (i - 1)], pts[2 * (i - 1) + 1]);
                        let (y1, v1) = (pts[2 * i], pts[2 * i + 1]);
                        let w = (y - y0) / (y1 - y0);
                        return v0 * (1.0 - w) + v1 * w;
                    }
                }
                0.0
            }
        }
    }
}

/// Truncation radius: beyond it the Gaussian damping factor is below 1e-16.
fn truncation_radius(tau: f64) -> f64 {
    (74.0 / tau).sqrt()
}

/// Heat-equation solution synthesized from the profile:
/// `omega(tau, xi) = (1/2pi) int Pi(y) exp(-y^2 tau / 2 + i y xi) dy`,
/// evaluated as a real cosine transform (profiles are even).
pub fn omega_from_profile(profile: &SpectralProfile, tau: f64, xi: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "omega needs tau > 0, got {tau}"
        )));
    }
    let r = truncation_radius(tau);
    let integral = adaptive_simpson(
        |y| profile.eval(y) * (-0.5 * y * y * tau).exp() * (y * xi).cos(),
        0.0,
        r,
        1e-13,
    )?;
    Ok(integral / std::f64::consts::PI)
}

/// Solution of the linear-potential equation from the Fourier family:
///
/// `w(t, x) = exp(1/2 int_t^s (f')^2 + x f'(t)) * omega(s - t, x + int_t^s f')`.
///
/// The spectral integral is evaluated here with a composite Gauss rule sized
/// to the oscillation, independently of [`omega_from_profile`]'s adaptive
/// route, so the two sides of the identity can be compared in tests.
pub fn fourier_w(
    profile: &SpectralProfile,
    boundary: &Boundary,
    s: f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    if !(0.0 <= t && t < s) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= t < s, got t = {t}, s = {s}"
        )));
    }
    let tau = s - t;
    let shift = x + boundary.integral_df(t, s)?;
    let energy = boundary.integral_df_sq(s)? - boundary.integral_df_sq(t)?;
    let prefactor = (0.5 * energy + x * boundary.df(t)?).exp();

    let r = truncation_radius(tau);
    let cycles = shift.abs() * r / (2.0 * std::f64::consts::PI);
    let panels = ((cycles * 6.0).ceil() as usize).max(64);
    let integral = composite_gl4(
        |y| profile.eval(y) * (-0.5 * y * y * tau).exp() * (y * shift).cos(),
        0.0,
        r,
        panels,
    ) / std::f64::consts::PI;
    Ok(prefactor * integral)
}

/// Max interior residual of the non-homogeneous Burgers equation satisfied by
/// `kappa = -d/dx log w`:
///
/// `kappa kappa_x - kappa_t - 1/2 kappa_xx = f''(t)`.
///
/// The field must be strictly positive wherever the logarithm is taken.
pub fn burgers_residual(wfield: &FieldGrid, boundary: &Boundary) -> Result<f64> {
    let (nt, nx) = (wfield.n_t(), wfield.n_x());
    if nt < 3 || nx < 5 {
        return Err(Error::GridTooCoarse(
            "burgers check needs at least a 3x5 field".into(),
        ));
    }
    for it in 0..nt {
        for ix in 0..nx {
            let v = wfield.get(it, ix);
            if !(v > 0.0) {
                return Err(Error::NonPositiveField(v));
            }
        }
    }
    // kappa on the x-interior.
    let kx_count = nx - 2;
    let mut kappa = vec![0.0f64; nt * kx_count];
    for it in 0..nt {
        for ix in 1..nx - 1 {
            let dx2 = wfield.x_grid[ix + 1] - wfield.x_grid[ix - 1];
            kappa[it * kx_count + ix - 1] =
                -(wfield.get(it, ix + 1).ln() - wfield.get(it, ix - 1).ln()) / dx2;
        }
    }
    let mut worst = 0.0f64;
    for it in 1..nt - 1 {
        let ddf = boundary.ddf(wfield.t_grid[it])?;
        let dt2 = wfield.t_grid[it + 1] - wfield.t_grid[it - 1];
        for k in 1..kx_count - 1 {
            let dx = wfield.x_grid[k + 2] - wfield.x_grid[k + 1];
            let kc = kappa[it * kx_count + k];
            let k_t = (kappa[(it + 1) * kx_count + k] - kappa[(it - 1) * kx_count + k]) / dt2;
            let k_x = (kappa[it * kx_count + k + 1] - kappa[it * kx_count + k - 1]) / (2.0 * dx);
            let k_xx = (kappa[it * kx_count + k + 1] - 2.0 * kc + kappa[it * kx_count + k - 1])
                / (dx * dx);
            let r = kc * k_x - k_t - 0.5 * k_xx - ddf;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

//! Pointwise density bounds from Jensen's inequality, the absorbing-edge flux
//! bounds in the small-gap limit, and the fractional-integral utility.

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::kernels::{bridge_mean, BridgeSpec};
use crate::montecarlo::density_prefactor;
use crate::quad::adaptive_simpson;
use statrs::function::gamma::gamma;
use std::io::Write;

/// Pointwise lower/upper bounds on the first-passage density.
#[derive(Debug, Clone)]
pub struct BoundsEnvelope {
    pub s_grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundsEnvelope {
    /// CSV rows `s,lower,upper`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "s,lower,upper")?;
        for i in 0..self.s_grid.len() {
            writeln!(
                out,
                "{:.8e},{:.8e},{:.8e}",
                self.s_grid[i], self.lower[i], self.upper[i]
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Whether `phi` lies inside the envelope at index `i`, inflated by the
    /// caller's method tolerance (relative) and slack (absolute).
    pub fn contains(&self, i: usize, phi: f64, rel_margin: f64, abs_margin: f64) -> bool {
        let lo = self.lower[i] * (1.0 - rel_margin) - abs_margin;
        let hi = self.upper[i] * (1.0 + rel_margin) + abs_margin;
        phi >= lo && phi <= hi
    }
}

/// Jensen envelope for the density:
///
/// `upper(s) = h(s, a) exp(-a f'(0) - 1/2 int_0^s (f')^2)`,
/// `lower(s) = upper(s) exp(-int_0^s f''(u) E[X_u] du)`
///
/// with `E[X_u]` the bridge-marginal mean started at `a`. The gap collapses
/// exactly (bit-for-bit `lower == upper`) for curvature-free boundaries.
pub fn theorem_envelope(boundary: &Boundary, s_grid: &[f64]) -> Result<BoundsEnvelope> {
    if s_grid.is_empty() || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "s grid must be nonempty and strictly increasing".into(),
        ));
    }
    if s_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument("s grid must be positive".into()));
    }
    let mut lower = Vec::with_capacity(s_grid.len());
    let mut upper = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let up = density_prefactor(boundary, s)?;
        let lo = if boundary.curvature_is_zero() {
            up
        } else {
            up * (-curvature_weighted_mean_integral(boundary, s)?).exp()
        };
        lower.push(lo);
        upper.push(up);
    }
    Ok(BoundsEnvelope {
        s_grid: s_grid.to_vec(),
        lower,
        upper,
    })
}

/// `int_0^s f''(u) E[X_u] du` for the bridge started at the boundary gap.
fn curvature_weighted_mean_integral(boundary: &Boundary, s: f64) -> Result<f64> {
    let spec = BridgeSpec::new(boundary.gap(), s)?;
    // The integrand is continuous up to both ends (E[X] -> a at 0, -> 0 at s);
    // clip the endpoints where the transition density degenerates.
    let eps = 1e-9 * s;
    adaptive_simpson(
        |u| {
            let m = bridge_mean(spec, u).unwrap_or(0.0);
            boundary.ddf(u).unwrap_or(0.0) * m
        },
        eps,
        s - eps,
        1e-9,
    )
}

/// Flux bounds at the absorbing edge in the small-gap limit:
///
/// `upper = exp(-1/2 int_0^s (f')^2) / sqrt(2 pi s^3)`,
/// `lower = upper exp(-2 sqrt(2/pi) int_0^s f''(u) sqrt(s-u) sqrt(u/s) du)`.
pub fn corollary_flux_bounds(boundary: &Boundary, s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "s must be positive, got {s}"
        )));
    }
    let up = (-0.5 * boundary.integral_df_sq(s)?).exp()
        / (2.0 * std::f64::consts::PI * s.powi(3)).sqrt();
    if boundary.curvature_is_zero() {
        return Ok((up, up));
    }
    // Substitute u = s sin^2(theta) to remove the square-root endpoints:
    // int_0^s g(u) sqrt(s-u) sqrt(u/s) du
    //   = 2 s^{3/2} int_0^{pi/2} g(s sin^2) sin^2 cos^2 dtheta / sqrt(s) ...
    // worked through: du = 2 s sin cos dtheta, sqrt(s-u) = sqrt(s) cos,
    // sqrt(u/s) = sin, so the integrand becomes 2 s^{3/2} g sin^2 cos^2.
    let weighted = adaptive_simpson(
        |theta| {
            let sin = theta.sin();
            let cos = theta.cos();
            let u = s * sin * sin;
            boundary.ddf(u).unwrap_or(0.0) * sin * sin * cos * cos
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-12,
    )? * 2.0
        * s.powf(1.5);
    let factor = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    Ok((up * (-factor * weighted).exp(), up))
}

/// Riemann-Liouville fractional integral
/// `J^alpha g(x) = (1/Gamma(alpha)) int_0^x (x - y)^{alpha-1} g(y) dy`.
///
/// For `alpha < 1` the endpoint singularity is removed by substituting
/// `z = (x - y)^alpha`.
pub fn fractional_integral<G: Fn(f64) -> f64>(g: G, alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "x must be nonnegative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let value = if alpha < 1.0 {
        // int_0^x (x-y)^{a-1} g(y) dy = (1/a) int_0^{x^a} g(x - z^{1/a}) dz
        adaptive_simpson(
            |z| g(x - z.powf(1.0 / alpha)),
            0.0,
            x.powf(alpha),
            1e-12,
        )? / alpha
    } else {
        adaptive_simpson(|y| (x - y).powf(alpha - 1.0) * g(y), 0.0, x, 1e-12)?
    };
    Ok(value / gamma(alpha))
}

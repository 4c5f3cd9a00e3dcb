//! Closed-form densities: the level-hitting density `h`, the heat kernel `k`,
//! the absorbed-Brownian-motion density, and the 3-dimensional Bessel-bridge
//! transition density `G` with its mean.

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Below this scale a kernel time argument is treated as degenerate; see the
/// caller-side limit handling in the PDE and bridge modules.
const SIGMA_FLOOR: f64 = 1e-14;

const SQRT_2PI: f64 = 2.5066282746310002;

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Heat kernel `k(sigma, kappa) = exp(-kappa^2 / 2 sigma) / sqrt(2 pi sigma)`.
pub fn heat_kernel(sigma: f64, kappa: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::DomainError(format!(
            "heat kernel needs sigma > 0, got {sigma}"
        )));
    }
    if sigma < SIGMA_FLOOR {
        if kappa.abs() > 1e-7 {
            return Ok(0.0);
        }
        return Err(Error::DomainError(format!(
            "heat kernel is singular at sigma = {sigma}, kappa = {kappa}"
        )));
    }
    Ok(gauss_kernel(sigma, kappa))
}

/// Unchecked heat kernel for validated hot loops.
#[inline]
pub(crate) fn gauss_kernel(sigma: f64, kappa: f64) -> f64 {
    (-kappa * kappa / (2.0 * sigma)).exp() / (SQRT_2PI * sigma.sqrt())
}

/// Density of the first time Brownian motion hits the fixed level `a`:
/// `h(s, a) = |a| / sqrt(2 pi s^3) * exp(-a^2 / 2 s)`.
pub fn level_hitting_density(s: f64, a: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::DomainError(format!(
            "hitting density needs s > 0, got {s}"
        )));
    }
    if a == 0.0 {
        return Err(Error::DomainError("hitting density needs a != 0".into()));
    }
    if s < SIGMA_FLOOR {
        return Ok(0.0);
    }
    Ok(level_density_unchecked(s, a))
}

#[inline]
pub(crate) fn level_density_unchecked(s: f64, a: f64) -> f64 {
    a.abs() / (SQRT_2PI * s * s.sqrt()) * (-a * a / (2.0 * s)).exp()
}

/// `P(T_a <= t) = 2 (1 - Phi(a / sqrt(t)))` for a level at distance `a`.
pub fn level_hitting_cdf(t: f64, a: f64) -> Result<f64> {
    if !(t > 0.0) || !(a > 0.0) {
        return Err(Error::DomainError(format!(
            "hitting cdf needs t > 0 and a > 0, got t = {t}, a = {a}"
        )));
    }
    Ok(2.0 * (1.0 - std_normal_cdf(a / t.sqrt())))
}

/// Sub-probability density of Brownian motion started at `x`, absorbed at the
/// level `a`, observed at `y` after elapsed time `t`:
/// `k(t, y - x) - k(t, 2a - y - x)`.
pub fn absorbed_density(t: f64, x: f64, y: f64, a: f64) -> Result<f64> {
    if x >= a || y >= a {
        return Err(Error::DomainError(format!(
            "absorbed density needs x < a and y < a, got x = {x}, y = {y}, a = {a}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::DomainError(format!(
            "absorbed density needs t > 0, got {t}"
        )));
    }
    Ok(gauss_kernel(t, y - x) - gauss_kernel(t, 2.0 * a - y - x))
}

/// Start value and pinning time of a 3-dimensional Bessel bridge: the process
/// starts at `a >= 0`, stays strictly positive, and is pinned at zero at `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeSpec {
    pub a: f64,
    pub s: f64,
}

impl BridgeSpec {
    pub fn new(a: f64, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::DomainError(format!(
                "bridge pinning time must be positive, got {s}"
            )));
        }
        if !(a >= 0.0) {
            return Err(Error::DomainError(format!(
                "bridge start must be nonnegative, got {a}"
            )));
        }
        Ok(BridgeSpec { a, s })
    }
}

/// Transition density `G(t, x; tau, y)` of the 3-d Bessel bridge pinned at
/// `spec.s`:
///
/// `G = (y/x) ((s-t)/(s-tau)) (k(s-tau, y)/k(s-t, x)) [k(tau-t, y-x) - k(tau-t, x+y)]`.
///
/// The bracket is evaluated as `k(tau-t, y-x) * (1 - exp(-2xy/(tau-t)))` to
/// avoid cancellation for small `x y`.
pub fn bridge_transition(spec: BridgeSpec, t: f64, x: f64, tau: f64, y: f64) -> Result<f64> {
    let s = spec.s;
    if !(0.0 <= t && t < tau && tau < s) {
        return Err(Error::DomainError(format!(
            "need 0 <= t < tau < s, got t = {t}, tau = {tau}, s = {s}"
        )));
    }
    if !(x > 0.0) || !(y >= 0.0) {
        return Err(Error::DomainError(format!(
            "need x > 0 and y >= 0, got x = {x}, y = {y}"
        )));
    }
    Ok(bridge_transition_unchecked(s, t, x, tau, y))
}

#[inline]
pub(crate) fn bridge_transition_unchecked(s: f64, t: f64, x: f64, tau: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let d = tau - t;
    let bracket = gauss_kernel(d, y - x) * (-(-2.0 * x * y / d).exp_m1());
    (y / x) * ((s - t) / (s - tau)) * (gauss_kernel(s - tau, y) / gauss_kernel(s - t, x)) * bracket
}

/// Mean of the bridge marginal at time `u`: closed form
/// `2 sqrt(2/pi) sqrt(u (s - u) / s)` for `a = 0`, quadrature over the
/// transition density otherwise.
pub fn bridge_mean(spec: BridgeSpec, u: f64) -> Result<f64> {
    let BridgeSpec { a, s } = spec;
    if !(u > 0.0 && u < s) {
        return Err(Error::DomainError(format!(
            "bridge mean needs 0 < u < s, got u = {u}, s = {s}"
        )));
    }
    if a == 0.0 {
        return Ok(bridge_mean_zero_start(s, u));
    }
    // The marginal concentrates around the deterministic interpolation of
    // (a, 0) with width sqrt(u (s-u)/s); integrate piecewise so the adaptive
    // rule cannot step over the peak when u is near 0 or s.
    let y_hi = a + 10.0 * s.sqrt();
    let center = a * (s - u) / s;
    let width = (u * (s - u) / s).sqrt();
    let mut knots = vec![0.0, y_hi];
    for m in [-12.0, -4.0, 0.0, 4.0, 12.0] {
        let p = center + m * width;
        if p > 0.0 && p < y_hi {
            knots.push(p);
        }
    }
    knots.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += adaptive_simpson(
            |y| y * bridge_transition_unchecked(s, 0.0, a, u, y),
            w[0],
            w[1],
            1e-12,
        )?;
    }
    Ok(total)
}

#[inline]
pub(crate) fn bridge_mean_zero_start(s: f64, u: f64) -> f64 {
    2.0 * (2.0 / std::f64::consts::PI).sqrt() * (u * (s - u) / s).sqrt()
}

/// Marginal CDF of the bridge at time `u`, `P(X_u <= y)`, by quadrature.
pub fn bridge_marginal_cdf(spec: BridgeSpec, u: f64, y: f64) -> Result<f64> {
    if !(u > 0.0 && u < spec.s) {
        return Err(Error::DomainError(format!(
            "bridge marginal needs 0 < u < s, got u = {u}, s = {}",
            spec.s
        )));
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    let start = if spec.a > 0.0 { spec.a } else { 1e-12 };
    adaptive_simpson(
        |z| bridge_transition_unchecked(spec.s, 0.0, start, u, z),
        0.0,
        y,
        1e-11,
    )
    .map(|v| v.clamp(0.0, 1.0))
}

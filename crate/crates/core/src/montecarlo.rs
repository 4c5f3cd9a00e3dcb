//! Monte Carlo estimators for the first-passage law: direct simulation with a
//! Brownian-bridge crossing correction, the Bessel-bridge density estimator,
//! and the exponential-martingale diagnostic.

use crate::boundary::Boundary;
use crate::bridge::{self, chunk_rng, Scheme, CHUNK_PATHS};
use crate::curve::{DensityCurve, Method};
use crate::error::{Error, Result};
use crate::kernels::{level_density_unchecked, BridgeSpec};
use crate::stats::EstimateCI;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Default number of histogram bins for the direct estimator.
pub const HISTOGRAM_BINS: usize = 50;

/// Direct simulation of the first passage of Brownian motion to `boundary`.
///
/// Between grid points the probability of an undetected crossing of the
/// locally linearized boundary is `exp(-2 d0 d1 / dt)` where `d0`, `d1` are
/// the start and end distances to the boundary; a uniform draw against it
/// removes the leading grid bias. Returns the empirical CDF at `t_max` and a
/// histogram density with per-bin binomial 3-sigma bands.
pub fn fpt_direct_mc(
    boundary: &Boundary,
    t_max: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<(EstimateCI, DensityCurve)> {
    if boundary.gap() <= 0.0 {
        return Err(Error::DegenerateBoundary(boundary.gap()));
    }
    if n_steps < 100 {
        return Err(Error::InvalidArgument(format!(
            "n_steps must be at least 100, got {n_steps}"
        )));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be positive".into()));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let dt = t_max / n_steps as f64;
    let f_grid: Vec<f64> = (0..=n_steps)
        .map(|k| boundary.f(k as f64 * dt))
        .collect::<Result<_>>()?;

    let n_chunks = n_paths.div_ceil(CHUNK_PATHS);
    let bin_width = t_max / HISTOGRAM_BINS as f64;
    let partials: Vec<(u64, Vec<u64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = chunk_rng(seed, ci as u64);
            let count = CHUNK_PATHS.min(n_paths - ci * CHUNK_PATHS);
            let mut crossed: u64 = 0;
            let mut bins = vec![0u64; HISTOGRAM_BINS];
            let sqrt_dt = dt.sqrt();
            for _ in 0..count {
                let mut b = 0.0f64;
                let mut d0 = f_grid[0];
                let mut hit: Option<f64> = None;
                for k in 1..=n_steps {
                    let z: f64 = rng.sample(StandardNormal);
                    b += sqrt_dt * z;
                    let d1 = f_grid[k] - b;
                    if d1 <= 0.0 {
                        // crossing detected at the grid; place it by linear
                        // interpolation of the distance to the boundary
                        let frac = if d0 - d1 > 0.0 { d0 / (d0 - d1) } else { 1.0 };
                        hit = Some(((k - 1) as f64 + frac) * dt);
                        break;
                    }
                    // undetected excursion across the linearized boundary
                    let p = (-2.0 * d0 * d1 / dt).exp();
                    let u: f64 = rng.gen();
                    if u < p {
                        hit = Some(((k - 1) as f64 + 0.5) * dt);
                        break;
                    }
                    d0 = d1;
                }
                if let Some(tau) = hit {
                    crossed += 1;
                    let bin = ((tau / bin_width) as usize).min(HISTOGRAM_BINS - 1);
                    bins[bin] += 1;
                }
            }
            (crossed, bins)
        })
        .collect();

    let mut crossed: u64 = 0;
    let mut bins = vec![0u64; HISTOGRAM_BINS];
    for (c, bs) in partials {
        crossed += c;
        for (acc, b) in bins.iter_mut().zip(bs) {
            *acc += b;
        }
    }

    let n = n_paths as f64;
    let p_hat = crossed as f64 / n;
    let cdf = EstimateCI {
        mean: p_hat,
        std_error: (p_hat * (1.0 - p_hat) / n).sqrt(),
        n: n_paths,
    };

    let mut s_grid = Vec::with_capacity(HISTOGRAM_BINS);
    let mut phi = Vec::with_capacity(HISTOGRAM_BINS);
    let mut lo = Vec::with_capacity(HISTOGRAM_BINS);
    let mut hi = Vec::with_capacity(HISTOGRAM_BINS);
    for (i, &count) in bins.iter().enumerate() {
        let p_bin = count as f64 / n;
        let se = (p_bin * (1.0 - p_bin) / n).sqrt() / bin_width;
        let dens = p_bin / bin_width;
        s_grid.push((i as f64 + 0.5) * bin_width);
        phi.push(dens);
        lo.push((dens - 3.0 * se).max(0.0));
        hi.push(dens + 3.0 * se);
    }
    let curve = DensityCurve::new(
        s_grid,
        phi,
        Some(lo),
        Some(hi),
        Method::DirectMc,
        boundary.digest(),
    )?;
    Ok((cdf, curve))
}

/// Density prefactor `exp(-a f'(0) - 1/2 int_0^s (f')^2) h(s, a)` shared by
/// the bridge estimator, the Feynman-Kac assembly and the envelope bounds.
pub fn density_prefactor(boundary: &Boundary, s: f64) -> Result<f64> {
    let a = boundary.gap();
    let exponent = -a * boundary.df(0.0)? - 0.5 * boundary.integral_df_sq(s)?;
    Ok(exponent.exp() * level_density_unchecked(s, a))
}

/// First-passage density at `s` via the Bessel-bridge representation:
/// prefactor times the mean exponential functional over a bridge batch
/// pinned at `s`. The confidence interval comes from the functional mean
/// alone; the prefactor is deterministic.
pub fn fpt_density_girsanov(
    boundary: &Boundary,
    s: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
) -> Result<EstimateCI> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "density time must be positive, got {s}"
        )));
    }
    let spec = BridgeSpec::new(boundary.gap(), s)?;
    let functional = bridge::functional_mean(spec, boundary, scheme, n_steps, n_paths, seed)?;
    Ok(functional.scaled(density_prefactor(boundary, s)?))
}

/// Closed-form density for curvature-free boundaries, where the functional
/// is identically one.
pub fn closed_form_density(boundary: &Boundary, s: f64) -> Result<f64> {
    if !boundary.curvature_is_zero() {
        return Err(Error::InvalidArgument(
            "closed form requires a linear boundary (f'' == 0)".into(),
        ));
    }
    density_prefactor(boundary, s)
}

/// Sample mean of the exponential martingale
/// `Z_t = exp(int_0^t f' dB - 1/2 int_0^t (f')^2 du)` along Euler paths;
/// must equal one within Monte Carlo error whenever the Novikov condition
/// holds, which it does for every valid boundary on a bounded horizon.
pub fn martingale_check(
    boundary: &Boundary,
    t: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<EstimateCI> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time must be positive, got {t}"
        )));
    }
    if n_steps == 0 || n_paths == 0 {
        return Err(Error::InvalidArgument(
            "n_steps and n_paths must be positive".into(),
        ));
    }
    let dt = t / n_steps as f64;
    let df_grid: Vec<f64> = (0..n_steps)
        .map(|k| boundary.df(k as f64 * dt))
        .collect::<Result<_>>()?;
    let half_energy = 0.5 * boundary.integral_df_sq(t)?;

    let n_chunks = n_paths.div_ceil(CHUNK_PATHS);
    let partials: Vec<(f64, f64, usize)> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = chunk_rng(seed, ci as u64);
            let count = CHUNK_PATHS.min(n_paths - ci * CHUNK_PATHS);
            let sqrt_dt = dt.sqrt();
            let (mut sum, mut sumsq) = (0.0, 0.0);
            for _ in 0..count {
                let mut ito = 0.0;
                for &df in &df_grid {
                    let z: f64 = rng.sample(StandardNormal);
                    ito += df * sqrt_dt * z;
                }
                let v = (ito - half_energy).exp();
                sum += v;
                sumsq += v * v;
            }
            (sum, sumsq, count)
        })
        .collect();
    let (mut sum, mut sumsq, mut n) = (0.0, 0.0, 0usize);
    for (s_, q, c) in partials {
        sum += s_;
        sumsq += q;
        n += c;
    }
    Ok(EstimateCI::from_moments(sum, sumsq, n))
}

/// Linear-boundary closed-form CDF
/// `P(T <= t) = Phi(-(a + b t)/sqrt(t)) + exp(-2 a b) Phi((b t - a)/sqrt(t))`,
/// used as the oracle for the direct estimator.
pub fn linear_boundary_cdf(a: f64, b: f64, t: f64) -> Result<f64> {
    if !(a > 0.0 && t > 0.0) {
        return Err(Error::DomainError(format!(
            "need a > 0 and t > 0, got a = {a}, t = {t}"
        )));
    }
    let sq = t.sqrt();
    let phi = crate::kernels::std_normal_cdf;
    Ok(phi(-(a + b * t) / sq) + (-2.0 * a * b).exp() * phi((b * t - a) / sq))
}

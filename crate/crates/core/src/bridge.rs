//! Sampling of 3-dimensional Bessel-bridge paths by two independent schemes,
//! plus the pathwise exponential functional they feed.
//!
//! Paths are generated in fixed-size chunks, each chunk drawing from its own
//! counter-derived RNG stream, so batches are bit-for-bit reproducible for a
//! given seed no matter how many worker threads run the chunks.

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::kernels::{bridge_transition_unchecked, BridgeSpec};
use crate::stats::EstimateCI;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::io::Write;

/// Paths per RNG chunk. Part of the reproducibility contract: changing it
/// changes which stream a path draws from.
pub const CHUNK_PATHS: usize = 256;

/// Clip applied to the state before evaluating the singular `1/X` drift.
const DRIFT_CLIP: f64 = 1e-10;

pub(crate) fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk.wrapping_add(1));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Euler-Maruyama discretization of the bridge SDE with a
    /// reflection-at-zero guard.
    SdeEuler,
    /// Modulus of three scalar Brownian bridges; exact in distribution at the
    /// grid points.
    ThreeBridge,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::SdeEuler => f.write_str("sde_euler"),
            Scheme::ThreeBridge => f.write_str("three_bridge"),
        }
    }
}

/// A seeded batch of discretized bridge paths on a uniform grid.
///
/// `values[p][0] = a` and `values[p][n_steps] = 0` exactly for every path.
#[derive(Debug, Clone)]
pub struct PathBatch {
    pub spec: BridgeSpec,
    pub n_steps: usize,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
    values: Vec<f64>,
}

impl PathBatch {
    pub fn sample(
        spec: BridgeSpec,
        scheme: Scheme,
        n_steps: usize,
        n_paths: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_steps < 10 {
            return Err(Error::InvalidArgument(format!(
                "n_steps must be at least 10, got {n_steps}"
            )));
        }
        if n_paths == 0 {
            return Err(Error::InvalidArgument("n_paths must be positive".into()));
        }
        let dt = spec.s / n_steps as f64;
        let width = n_steps + 1;
        let mut values = vec![0.0f64; n_paths * width];
        values
            .par_chunks_mut(CHUNK_PATHS * width)
            .enumerate()
            .for_each(|(ci, chunk)| {
                let mut rng = chunk_rng(seed, ci as u64);
                let mut scratch = vec![0.0f64; width];
                for path in chunk.chunks_mut(width) {
                    match scheme {
                        Scheme::SdeEuler => fill_sde(&mut rng, spec, dt, path),
                        Scheme::ThreeBridge => {
                            fill_three_bridge(&mut rng, spec, path, &mut scratch)
                        }
                    }
                }
            });
        Ok(PathBatch {
            spec,
            n_steps,
            n_paths,
            dt,
            seed,
            scheme,
            values,
        })
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let w = self.n_steps + 1;
        &self.values[i * w..(i + 1) * w]
    }

    pub fn time_grid(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.dt).collect()
    }

    /// All path values at grid step `k`.
    pub fn marginal_at_step(&self, k: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.path(p)[k]).collect()
    }

    /// Number of paths whose interior touches zero (almost surely none for
    /// the three-bridge scheme).
    pub fn paths_touching_zero(&self) -> usize {
        (0..self.n_paths)
            .filter(|&p| self.path(p)[1..self.n_steps].iter().any(|&x| x == 0.0))
            .count()
    }

    /// CSV dump with header `path_id,t,x`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "path_id,t,x")?;
        for p in 0..self.n_paths {
            for (k, &x) in self.path(p).iter().enumerate() {
                writeln!(out, "{},{:.8e},{:.8e}", p, k as f64 * self.dt, x)?;
            }
        }
        Ok(())
    }
}

/// Euler-Maruyama discretization of
/// `dX = [1/X - X/(s - t)] dt + dW`,
/// with `X` clipped before the drift evaluation, reflection after each step,
/// the pinning denominator floored at `dt/2`, and the final value forced to
/// zero. Accurate for starts `a` with `dt` well below `a^2`; the three-bridge
/// scheme is the exact reference.
pub fn sample_sde(
    spec: BridgeSpec,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    PathBatch::sample(spec, Scheme::SdeEuler, n_steps, n_paths, seed)
}

/// `X_t = ||(b1_t, b2_t, b3_t)||` with `b1` a scalar Brownian bridge from `a`
/// to 0 on `[0, s]` and `b2`, `b3` bridges from 0 to 0; exact in distribution
/// at the grid points.
pub fn sample_three_bridge(
    spec: BridgeSpec,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    PathBatch::sample(spec, Scheme::ThreeBridge, n_steps, n_paths, seed)
}

fn fill_sde(rng: &mut ChaCha8Rng, spec: BridgeSpec, dt: f64, out: &mut [f64]) {
    let n = out.len() - 1;
    let s = spec.s;
    let sqrt_dt = dt.sqrt();
    out[0] = spec.a;
    let mut x = spec.a;
    for (k, slot) in out.iter_mut().enumerate().take(n).skip(1) {
        let t = (k - 1) as f64 * dt;
        let denom = (s - t).max(0.5 * dt);
        let xc = x.max(DRIFT_CLIP);
        let z: f64 = rng.sample(StandardNormal);
        x = (x + (1.0 / xc - xc / denom) * dt + sqrt_dt * z).abs();
        *slot = x;
    }
    out[n] = 0.0;
}

fn fill_three_bridge(rng: &mut ChaCha8Rng, spec: BridgeSpec, out: &mut [f64], scratch: &mut [f64]) {
    let n = out.len() - 1;
    let dt = spec.s / n as f64;
    let sqrt_dt = dt.sqrt();
    out.fill(0.0);
    for component in 0..3 {
        scratch[0] = 0.0;
        let mut cum = 0.0;
        for slot in scratch.iter_mut().take(n + 1).skip(1) {
            let z: f64 = rng.sample(StandardNormal);
            cum += sqrt_dt * z;
            *slot = cum;
        }
        let w_end = scratch[n];
        for k in 0..=n {
            let frac = k as f64 / n as f64;
            let mut b = scratch[k] - frac * w_end;
            if component == 0 {
                b += spec.a * (1.0 - frac);
            }
            out[k] += b * b;
        }
    }
    for v in out.iter_mut() {
        *v = v.sqrt();
    }
    out[0] = spec.a;
    out[n] = 0.0;
}

/// Curvature values `f''(t_k)` on the batch grid.
fn curvature_grid(boundary: &Boundary, n_steps: usize, dt: f64) -> Result<Vec<f64>> {
    (0..=n_steps)
        .map(|k| boundary.ddf(k as f64 * dt))
        .collect()
}

#[inline]
fn exp_functional(path: &[f64], ddf: &[f64], dt: f64) -> f64 {
    let n = path.len() - 1;
    let mut acc = 0.5 * (ddf[0] * path[0] + ddf[n] * path[n]);
    for k in 1..n {
        acc += ddf[k] * path[k];
    }
    (-acc * dt).exp()
}

/// Per-path values of `exp(-int_0^s f''(u) X_u du)` by trapezoidal quadrature
/// along each path. Every value lies in `(0, 1]` since `f'' >= 0` and
/// `X >= 0`.
pub fn functional_values(batch: &PathBatch, boundary: &Boundary) -> Result<Vec<f64>> {
    let ddf = curvature_grid(boundary, batch.n_steps, batch.dt)?;
    Ok((0..batch.n_paths)
        .map(|p| exp_functional(batch.path(p), &ddf, batch.dt))
        .collect())
}

/// Mean and standard error of the exponential functional, computed without
/// materializing the paths. Chunk partials are reduced in chunk order, so the
/// result does not depend on the number of worker threads.
pub fn functional_mean(
    spec: BridgeSpec,
    boundary: &Boundary,
    scheme: Scheme,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<EstimateCI> {
    if n_steps < 10 {
        return Err(Error::InvalidArgument(format!(
            "n_steps must be at least 10, got {n_steps}"
        )));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be positive".into()));
    }
    let dt = spec.s / n_steps as f64;
    let ddf = curvature_grid(boundary, n_steps, dt)?;
    // Linear boundaries make the functional identically one; skip sampling so
    // the zero-variance case is exact.
    if ddf.iter().all(|&c| c == 0.0) {
        return Ok(EstimateCI {
            mean: 1.0,
            std_error: 0.0,
            n: n_paths,
        });
    }
    let n_chunks = n_paths.div_ceil(CHUNK_PATHS);
    let partials: Vec<(f64, f64, usize)> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = chunk_rng(seed, ci as u64);
            let count = CHUNK_PATHS.min(n_paths - ci * CHUNK_PATHS);
            let width = n_steps + 1;
            let mut path = vec![0.0f64; width];
            let mut scratch = vec![0.0f64; width];
            let (mut sum, mut sumsq) = (0.0, 0.0);
            for _ in 0..count {
                match scheme {
                    Scheme::SdeEuler => fill_sde(&mut rng, spec, dt, &mut path),
                    Scheme::ThreeBridge => {
                        fill_three_bridge(&mut rng, spec, &mut path, &mut scratch)
                    }
                }
                let v = exp_functional(&path, &ddf, dt);
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

/// Tabulated marginal CDF of the bridge at time `u`, for KS tests against the
/// closed-form transition density.
#[derive(Debug, Clone)]
pub struct MarginalCdf {
    y: Vec<f64>,
    c: Vec<f64>,
}

impl MarginalCdf {
    pub fn build(spec: BridgeSpec, u: f64, n_grid: usize) -> Result<Self> {
        if !(u > 0.0 && u < spec.s) {
            return Err(Error::DomainError(format!(
                "marginal time must satisfy 0 < u < s, got u = {u}"
            )));
        }
        let start = if spec.a > 0.0 { spec.a } else { 1e-12 };
        let y_max = spec.a + 8.0 * spec.s.sqrt();
        let n = n_grid.max(64);
        let y: Vec<f64> = (0..=n).map(|i| y_max * i as f64 / n as f64).collect();
        let dens: Vec<f64> = y
            .iter()
            .map(|&yy| bridge_transition_unchecked(spec.s, 0.0, start, u, yy))
            .collect();
        let mut c = vec![0.0; n + 1];
        for i in 1..=n {
            c[i] = c[i - 1] + 0.5 * (dens[i - 1] + dens[i]) * (y[i] - y[i - 1]);
        }
        let total = c[n];
        if !(total > 0.9) {
            return Err(Error::QuadratureFailure {
                a: 0.0,
                b: y_max,
                tol: 1e-6,
            });
        }
        for v in c.iter_mut() {
            *v /= total;
        }
        Ok(MarginalCdf { y, c })
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let n = self.y.len() - 1;
        if y >= self.y[n] {
            return 1.0;
        }
        let dy = self.y[1] - self.y[0];
        let i = ((y / dy) as usize).min(n - 1);
        let w = (y - self.y[i]) / dy;
        self.c[i] * (1.0 - w) + self.c[i + 1] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::bridge_mean_zero_start;
    use crate::stats::{ks_one_sample, ks_two_sample};
    use approx::assert_relative_eq;

    fn spec(a: f64, s: f64) -> BridgeSpec {
        BridgeSpec::new(a, s).unwrap()
    }

    #[test]
    fn endpoints_are_exact() {
        for scheme in [Scheme::SdeEuler, Scheme::ThreeBridge] {
            let batch = PathBatch::sample(spec(1.0, 1.0), scheme, 200, 16, 42).unwrap();
            for p in 0..batch.n_paths {
                assert_eq!(batch.path(p)[0], 1.0);
                assert_eq!(batch.path(p)[200], 0.0);
                assert!(batch.path(p).iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn pinning_collapses_paths_near_s() {
        // The exact marginal mean at u = 0.999 is 0.0504; the Euler scheme
        // overshoots the pinning layer by O(sqrt(dt)) on top of that.
        let sde = sample_sde(spec(1.0, 1.0), 1000, 512, 42).unwrap();
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let sde_end = mean(&sde.marginal_at_step(999));
        assert!(sde_end < 0.1, "sde mean at u = 0.999 was {sde_end}");
        assert!(sde_end < 0.2 * mean(&sde.marginal_at_step(500)));

        let exact = sample_three_bridge(spec(1.0, 1.0), 1000, 512, 42).unwrap();
        let exact_end = mean(&exact.marginal_at_step(999));
        assert!(exact_end < 0.06, "exact mean at u = 0.999 was {exact_end}");
    }

    #[test]
    fn three_bridge_interiors_stay_positive() {
        let batch = sample_three_bridge(spec(1.0, 1.0), 500, 200, 7).unwrap();
        assert_eq!(batch.paths_touching_zero(), 0);
    }

    #[test]
    fn three_bridge_mean_matches_closed_form() {
        let batch = sample_three_bridge(spec(0.0, 1.0), 64, 4096, 11).unwrap();
        let xs = batch.marginal_at_step(32);
        let est = EstimateCI::from_samples(&xs);
        assert!(
            est.covers(bridge_mean_zero_start(1.0, 0.5), 3.0),
            "mean {} +- {}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn sde_small_start_mean_matches_zero_start_limit() {
        // Euler needs dt well below a^2 near a singular start; 1e5 steps keeps
        // the first-step overshoot negligible at a = 1e-3.
        let batch = sample_sde(spec(0.001, 1.0), 100_000, 384, 42).unwrap();
        let xs = batch.marginal_at_step(50_000);
        let est = EstimateCI::from_samples(&xs);
        let target = bridge_mean_zero_start(1.0, 0.5);
        assert!(
            (est.mean - target).abs() <= 3.0 * est.std_error + 0.005,
            "mean {} +- {} vs {}",
            est.mean,
            est.std_error,
            target
        );
    }

    #[test]
    fn schemes_agree_in_distribution() {
        let n_paths = 4000;
        let sde = sample_sde(spec(1.0, 1.0), 1000, n_paths, 3).unwrap();
        let exact = sample_three_bridge(spec(1.0, 1.0), 1000, n_paths, 4).unwrap();
        for step in [250, 500, 750] {
            let r = ks_two_sample(&sde.marginal_at_step(step), &exact.marginal_at_step(step));
            assert!(
                r.p_value > 0.01,
                "two-sample KS at step {step}: D = {}, p = {}",
                r.statistic,
                r.p_value
            );
        }
    }

    #[test]
    fn three_bridge_marginal_matches_transition_density() {
        let sp = spec(1.0, 1.0);
        let batch = sample_three_bridge(sp, 200, 10_000, 5).unwrap();
        let cdf = MarginalCdf::build(sp, 0.5, 8192).unwrap();
        let r = ks_one_sample(&batch.marginal_at_step(100), |y| cdf.eval(y));
        assert!(
            r.p_value > 0.01,
            "one-sample KS: D = {}, p = {}",
            r.statistic,
            r.p_value
        );
    }

    #[test]
    fn functional_is_one_for_linear_boundaries() {
        let boundary = Boundary::linear(1.0, 2.0, 2.0).unwrap();
        let batch = sample_three_bridge(spec(1.0, 1.0), 100, 64, 9).unwrap();
        let vals = functional_values(&batch, &boundary).unwrap();
        assert!(vals.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn functional_values_lie_in_unit_interval() {
        let boundary = Boundary::quadratic(1.0, 0.0, 0.5, 2.0).unwrap();
        let batch = sample_sde(spec(1.0, 1.0), 200, 256, 13).unwrap();
        let vals = functional_values(&batch, &boundary).unwrap();
        assert!(vals.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn functional_golden_value_for_unit_curvature() {
        // f'' = 1, a = 0, s = 1: E[int X du] = 2 sqrt(2/pi) * pi/8 and the
        // exponential-functional mean 0.5404 was frozen from a 2e5-path run
        // of an independent implementation.
        let boundary = Boundary::quadratic(1.0, 0.0, 0.5, 2.0).unwrap();
        let sp = spec(0.0, 1.0);
        let batch = sample_three_bridge(sp, 1000, 10_000, 21).unwrap();
        let t = batch.time_grid();
        let ints: Vec<f64> = (0..batch.n_paths)
            .map(|p| {
                let path = batch.path(p);
                (1..t.len())
                    .map(|k| 0.5 * (path[k - 1] + path[k]) * (t[k] - t[k - 1]))
                    .sum()
            })
            .collect();
        let int_est = EstimateCI::from_samples(&ints);
        assert!(
            (int_est.mean - 0.6266570686577501).abs() <= 3.0 * int_est.std_error + 0.001,
            "E[int X] = {} +- {}",
            int_est.mean,
            int_est.std_error
        );

        let est = EstimateCI::from_samples(&functional_values(&batch, &boundary).unwrap());
        assert!(
            (est.mean - 0.5404).abs() <= 3.0 * est.std_error + 0.002,
            "functional mean {} +- {}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn functional_mean_streams_match_batch_values() {
        let boundary = Boundary::quadratic(1.0, 0.0, 0.5, 2.0).unwrap();
        let sp = spec(1.0, 1.0);
        let batch = sample_three_bridge(sp, 100, 1000, 77).unwrap();
        let batch_est = EstimateCI::from_samples(&functional_values(&batch, &boundary).unwrap());
        let stream_est =
            functional_mean(sp, &boundary, Scheme::ThreeBridge, 100, 1000, 77).unwrap();
        assert_relative_eq!(batch_est.mean, stream_est.mean, epsilon = 1e-12);
        assert_relative_eq!(batch_est.std_error, stream_est.std_error, epsilon = 1e-12);
    }

    #[test]
    fn batches_reproduce_bit_for_bit() {
        for scheme in [Scheme::SdeEuler, Scheme::ThreeBridge] {
            let a = PathBatch::sample(spec(1.0, 1.0), scheme, 128, 700, 99).unwrap();
            let b = PathBatch::sample(spec(1.0, 1.0), scheme, 128, 700, 99).unwrap();
            assert_eq!(a.values, b.values);
            let c = PathBatch::sample(spec(1.0, 1.0), scheme, 128, 700, 100).unwrap();
            assert_ne!(a.values, c.values);
        }
    }

    #[test]
    fn marginal_cdf_is_monotone_distribution() {
        let cdf = MarginalCdf::build(spec(1.0, 1.0), 0.5, 2048).unwrap();
        assert_eq!(cdf.eval(-1.0), 0.0);
        assert_eq!(cdf.eval(100.0), 1.0);
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = cdf.eval(i as f64 * 0.05);
            assert!(v >= prev);
            prev = v;
        }
    }
}

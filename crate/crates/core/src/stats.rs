//! Sample statistics and Kolmogorov-Smirnov tests used to validate the
//! path samplers against the closed-form transition density.

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateCI {
    pub mean: f64,
    /// Sample standard deviation divided by sqrt(n).
    pub std_error: f64,
    pub n: usize,
}

impl EstimateCI {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n > 0, "estimate needs at least one sample");
        let sum: f64 = samples.iter().sum();
        let sumsq: f64 = samples.iter().map(|x| x * x).sum();
        Self::from_moments(sum, sumsq, n)
    }

    /// Build from pre-accumulated first and second moments.
    pub fn from_moments(sum: f64, sumsq: f64, n: usize) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        EstimateCI {
            mean,
            std_error: (var / nf).sqrt(),
            n,
        }
    }

    /// Scale the estimate by a deterministic factor.
    pub fn scaled(self, factor: f64) -> Self {
        EstimateCI {
            mean: self.mean * factor,
            std_error: self.std_error * factor.abs(),
            n: self.n,
        }
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Result of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl KsResult {
    fn from_stat(stat: f64, n_eff: f64) -> Self {
        // Effective-size correction and asymptotic tail from Press et al.
        let sqrt_n = n_eff.sqrt();
        let z = (sqrt_n + 0.12 + 0.11 / sqrt_n) * stat;
        KsResult {
            statistic: stat,
            p_value: ks_tail(z),
        }
    }
}

/// Complement of the Kolmogorov distribution function, `Q(z) = 1 - K(z)`.
fn ks_tail(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < 1.18 {
        let factor = (2.0 * std::f64::consts::PI).sqrt() / z;
        let term = (-std::f64::consts::PI.powi(2) / (8.0 * z * z)).exp();
        (1.0 - factor * (term + term.powi(9) + term.powi(25) + term.powi(49))).max(0.0)
    } else {
        let term = (-2.0 * z * z).exp();
        (2.0 * (term - term.powi(4) + term.powi(9))).clamp(0.0, 1.0)
    }
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    xs
}

/// One-sample KS test of `samples` against the distribution function `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsResult {
    let xs = sorted(samples.to_vec());
    let n = xs.len() as f64;
    let mut stat: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        let hi = (i as f64 + 1.0) / n - c;
        let lo = c - i as f64 / n;
        stat = stat.max(hi.max(lo));
    }
    KsResult::from_stat(stat, n)
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let xs = sorted(a.to_vec());
    let ys = sorted(b.to_vec());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let mut stat: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        let (fx, fy) = (xs[i], ys[j]);
        if fx <= fy {
            i += 1;
        }
        if fy <= fx {
            j += 1;
        }
        stat = stat.max((i as f64 / n - j as f64 / m).abs());
    }
    KsResult::from_stat(stat, n * m / (n + m))
}

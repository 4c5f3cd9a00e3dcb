//! The moving boundary `f` and all calculus on it.
//!
//! A boundary is the curve `f(t) = a + \int_0^t f'(u) du` with `a > 0` and
//! `f''(t) >= 0`. Every estimator and solver in the crate consumes boundaries
//! through this module: values and derivatives via [`Boundary::eval`], the
//! drift integral `\int f'` via [`Boundary::integral_df`], and the energy
//! integral `\int (f')^2` via [`Boundary::integral_df_sq`].

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, gauss_legendre_4};
use serde::{Deserialize, Serialize};

/// Number of grid points used for the construction-time convexity check.
pub const CONVEXITY_CHECK_POINTS: usize = 10_000;

/// Tolerance below which a slightly negative interpolated curvature is
/// treated as rounding noise rather than a convexity violation.
const CONVEXITY_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Linear,
    Quadratic,
    Polynomial,
    Tabulated,
}

impl std::fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BoundaryKind::Linear => "linear",
            BoundaryKind::Quadratic => "quadratic",
            BoundaryKind::Polynomial => "polynomial",
            BoundaryKind::Tabulated => "tabulated",
        };
        f.write_str(s)
    }
}

/// JSON wire format for boundaries:
/// `{"kind": "quadratic", "a": 1.0, "coefficients": [0.0, 0.5]}` or
/// `{"kind": "tabulated", "a": 1.0, "knots": [[t, f], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub kind: BoundaryKind,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone)]
enum Form {
    /// Full polynomial coefficients of `f`, index = power (`coeffs[0] = a`).
    Poly(Vec<f64>),
    Tab(Tabulated),
}

/// A validated convex moving boundary. Immutable after construction; all
/// evaluation methods are pure, so values can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct Boundary {
    kind: BoundaryKind,
    a: f64,
    form: Form,
    /// Horizon on which convexity was verified (also the tabulated range).
    t_max: f64,
    curvature_free: bool,
}

impl Boundary {
    /// `f(t) = a + coefficients[0] t + coefficients[1] t^2 + ...`
    ///
    /// Convexity of the implied `f''` is checked on a
    /// [`CONVEXITY_CHECK_POINTS`]-point grid over `[0, t_max]`; construction
    /// fails rather than producing a non-convex boundary.
    pub fn new(kind: BoundaryKind, a: f64, coefficients: &[f64], t_max: f64) -> Result<Self> {
        if a <= 0.0 || !a.is_finite() {
            return Err(Error::NonPositiveGap(a));
        }
        if !(t_max > 0.0) {
            return Err(Error::InvalidBoundarySpec(format!(
                "check horizon t_max must be positive, got {t_max}"
            )));
        }
        match kind {
            BoundaryKind::Linear if coefficients.len() > 1 => {
                return Err(Error::InvalidBoundarySpec(
                    "linear boundary takes at most one coefficient".into(),
                ))
            }
            BoundaryKind::Quadratic if coefficients.len() > 2 => {
                return Err(Error::InvalidBoundarySpec(
                    "quadratic boundary takes at most two coefficients".into(),
                ))
            }
            BoundaryKind::Tabulated => {
                return Err(Error::InvalidBoundarySpec(
                    "tabulated boundaries are built with Boundary::tabulated".into(),
                ))
            }
            _ => {}
        }
        let mut coeffs = Vec::with_capacity(coefficients.len() + 1);
        coeffs.push(a);
        coeffs.extend_from_slice(coefficients);
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let b = Boundary {
            kind,
            a,
            curvature_free: coeffs.len() <= 2,
            form: Form::Poly(coeffs),
            t_max,
        };
        b.check_convexity()?;
        Ok(b)
    }

    pub fn linear(a: f64, slope: f64, t_max: f64) -> Result<Self> {
        Self::new(BoundaryKind::Linear, a, &[slope], t_max)
    }

    pub fn constant(a: f64, t_max: f64) -> Result<Self> {
        Self::new(BoundaryKind::Linear, a, &[], t_max)
    }

    pub fn quadratic(a: f64, b: f64, c: f64, t_max: f64) -> Result<Self> {
        Self::new(BoundaryKind::Quadratic, a, &[b, c], t_max)
    }

    pub fn polynomial(a: f64, higher: &[f64], t_max: f64) -> Result<Self> {
        Self::new(BoundaryKind::Polynomial, a, higher, t_max)
    }

    /// Boundary from sampled `(t, f(t))` pairs starting at `t = 0`.
    ///
    /// The knots are turned into derivative estimates and `f'` is rebuilt with
    /// a monotone (convexity-preserving) cubic Hermite interpolant; `f` is then
    /// the exact integral of that interpolant and `f''` its exact derivative.
    /// Knot ordinates are therefore reproduced only up to the derivative
    /// estimation error, while `f(t) = a + \int_0^t f'` holds by construction.
    pub fn tabulated(a: f64, knots: &[(f64, f64)]) -> Result<Self> {
        if a <= 0.0 || !a.is_finite() {
            return Err(Error::NonPositiveGap(a));
        }
        let tab = Tabulated::build(a, knots)?;
        let t_max = *tab.t.last().unwrap();
        let b = Boundary {
            kind: BoundaryKind::Tabulated,
            a,
            curvature_free: tab.dslope.iter().all(|&c| c == 0.0)
                && tab.dval.windows(2).all(|w| w[0] == w[1]),
            form: Form::Tab(tab),
            t_max,
        };
        b.check_convexity()?;
        Ok(b)
    }

    pub fn from_spec(spec: &BoundarySpec, t_max: f64) -> Result<Self> {
        match spec.kind {
            BoundaryKind::Tabulated => {
                let knots = spec.knots.as_ref().ok_or_else(|| {
                    Error::InvalidBoundarySpec("tabulated boundary requires \"knots\"".into())
                })?;
                let pairs: Vec<(f64, f64)> = knots.iter().map(|k| (k[0], k[1])).collect();
                Self::tabulated(spec.a, &pairs)
            }
            kind => {
                let coeffs = spec.coefficients.clone().unwrap_or_default();
                Self::new(kind, spec.a, &coeffs, t_max)
            }
        }
    }

    pub fn from_json(json: &str, t_max: f64) -> Result<Self> {
        let spec: BoundarySpec = serde_json::from_str(json)
            .map_err(|e| Error::InvalidBoundarySpec(e.to_string()))?;
        Self::from_spec(&spec, t_max)
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    /// The starting gap `a = f(0)`.
    pub fn gap(&self) -> f64 {
        self.a
    }

    /// Horizon on which convexity was verified; the valid range for
    /// tabulated boundaries.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// True when `f'' == 0` identically (linear boundaries): the Girsanov
    /// functional degenerates to 1 and several bounds collapse exactly.
    pub fn curvature_is_zero(&self) -> bool {
        self.curvature_free
    }

    /// `f(t)`, `f'(t)` or `f''(t)` for `order` 0, 1, 2.
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::DomainError(format!("t must be nonnegative, got {t}")));
        }
        if order > 2 {
            return Err(Error::DomainError(format!(
                "derivative order must be 0, 1 or 2, got {order}"
            )));
        }
        match &self.form {
            Form::Poly(c) => Ok(poly_eval(c, t, order)),
            Form::Tab(tab) => {
                if t > self.t_max * (1.0 + 1e-12) {
                    return Err(Error::OutOfTabulatedRange(t, self.t_max));
                }
                Ok(tab.eval(self.a, t.min(self.t_max), order))
            }
        }
    }

    pub fn f(&self, t: f64) -> Result<f64> {
        self.eval(t, 0)
    }

    pub fn df(&self, t: f64) -> Result<f64> {
        self.eval(t, 1)
    }

    pub fn ddf(&self, t: f64) -> Result<f64> {
        self.eval(t, 2)
    }

    /// `\int_{t0}^{t1} f'(u) du = f(t1) - f(t0)`.
    pub fn integral_df(&self, t0: f64, t1: f64) -> Result<f64> {
        if !(0.0 <= t0 && t0 <= t1) {
            return Err(Error::DomainError(format!(
                "need 0 <= t0 <= t1, got t0 = {t0}, t1 = {t1}"
            )));
        }
        Ok(self.f(t1)? - self.f(t0)?)
    }

    /// `\int_0^t (f'(u))^2 du`, in closed form for polynomial kinds and by
    /// exact per-interval Gauss quadrature for tabulated ones.
    pub fn integral_df_sq(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::DomainError(format!("t must be nonnegative, got {t}")));
        }
        match &self.form {
            Form::Poly(c) => {
                let dc = poly_derivative(c);
                let sq = poly_mul(&dc, &dc);
                Ok(poly_integral_at(&sq, t))
            }
            Form::Tab(tab) => {
                if t > self.t_max * (1.0 + 1e-12) {
                    return Err(Error::OutOfTabulatedRange(t, self.t_max));
                }
                Ok(tab.integral_df_sq(t.min(self.t_max)))
            }
        }
    }

    /// Canonical text form, used to tag output curves with their boundary.
    pub fn digest(&self) -> String {
        match &self.form {
            Form::Poly(c) => {
                let coeffs: Vec<String> = c[1..].iter().map(|x| format!("{x:e}")).collect();
                format!("{}:a={:e}:[{}]", self.kind, self.a, coeffs.join(","))
            }
            Form::Tab(tab) => format!(
                "tabulated:a={:e}:n={}:t_max={:e}",
                self.a,
                tab.t.len(),
                self.t_max
            ),
        }
    }

    fn check_convexity(&self) -> Result<()> {
        let n = CONVEXITY_CHECK_POINTS;
        for i in 0..=n {
            let t = self.t_max * i as f64 / n as f64;
            let ddf = match &self.form {
                Form::Poly(c) => poly_eval(c, t, 2),
                Form::Tab(tab) => tab.eval(self.a, t, 2),
            };
            if ddf < -CONVEXITY_EPS || !ddf.is_finite() {
                return Err(Error::NonConvexBoundary { t, value: ddf });
            }
        }
        // The energy integral must be finite on the working horizon.
        let e = self.integral_df_sq(self.t_max)?;
        if !e.is_finite() {
            return Err(Error::InvalidBoundarySpec(format!(
                "integral of (f')^2 is not finite on [0, {}]",
                self.t_max
            )));
        }
        Ok(())
    }

    /// Quadrature route for `\int_0^t (f')^2`, kept separate from the closed
    /// forms so the two can be cross-checked.
    pub fn integral_df_sq_quadrature(&self, t: f64, tol: f64) -> Result<f64> {
        adaptive_simpson(
            |u| {
                let d = self.df(u).unwrap_or(f64::NAN);
                d * d
            },
            0.0,
            t,
            tol,
        )
    }
}

fn poly_eval(coeffs: &[f64], t: f64, order: u8) -> f64 {
    match order {
        0 => horner(coeffs, t),
        1 => horner(&poly_derivative(coeffs), t),
        _ => horner(&poly_derivative(&poly_derivative(coeffs)), t),
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs[1..]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (i + 1) as f64)
        .collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_integral_at(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &c) in coeffs.iter().enumerate().rev() {
        acc = acc * t + c / (i + 1) as f64;
    }
    acc * t
}

/// Monotone cubic Hermite representation of `f'` built from `(t, f)` knots.
#[derive(Debug, Clone)]
struct Tabulated {
    t: Vec<f64>,
    /// `f'` at the knots (nondecreasing for convex data).
    dval: Vec<f64>,
    /// Knot derivatives of `f'` (i.e. `f''`), Fritsch-Carlson limited.
    dslope: Vec<f64>,
    /// `\int_0^{t_j} f'` for each knot.
    cum_int: Vec<f64>,
    /// `\int_0^{t_j} (f')^2` for each knot.
    cum_int_sq: Vec<f64>,
}

impl Tabulated {
    fn build(a: f64, knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 3 {
            return Err(Error::InvalidBoundarySpec(
                "tabulated boundary needs at least 3 knots".into(),
            ));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::InvalidBoundarySpec(format!(
                "first knot must be at t = 0, got t = {}",
                knots[0].0
            )));
        }
        if (knots[0].1 - a).abs() > 1e-9 * a.abs().max(1.0) {
            return Err(Error::InvalidBoundarySpec(format!(
                "first knot value {} disagrees with a = {}",
                knots[0].1, a
            )));
        }
        let n = knots.len();
        let t: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let fv: Vec<f64> = knots.iter().map(|k| k.1).collect();
        for w in t.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidBoundarySpec(
                    "knot times must be strictly increasing".into(),
                ));
            }
        }
        if t.iter().chain(fv.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidBoundarySpec("knots must be finite".into()));
        }

        // Interval slopes of f; for convex data these are nondecreasing.
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = fv
            .windows(2)
            .zip(h.iter())
            .map(|(w, hi)| (w[1] - w[0]) / hi)
            .collect();

        // Knot values of f': interior ones are interval-weighted averages of
        // adjacent slopes (which stay inside [d_{j-1}, d_j]), the end values
        // one-sided extrapolations kept on the convex side.
        let mut dval = vec![0.0; n];
        for j in 1..n - 1 {
            dval[j] = (h[j] * d[j - 1] + h[j - 1] * d[j]) / (h[j - 1] + h[j]);
        }
        dval[0] = 2.0 * d[0] - dval[1];
        dval[n - 1] = 2.0 * d[n - 2] - dval[n - 2];

        // Fritsch-Carlson limited derivatives of f' (the interpolated f'').
        let m: Vec<f64> = dval
            .windows(2)
            .zip(h.iter())
            .map(|(w, hi)| (w[1] - w[0]) / hi)
            .collect();
        let mut dslope = vec![0.0; n];
        for j in 1..n - 1 {
            if m[j - 1] * m[j] <= 0.0 {
                dslope[j] = 0.0;
            } else {
                let w1 = 2.0 * h[j] + h[j - 1];
                let w2 = h[j] + 2.0 * h[j - 1];
                dslope[j] = (w1 + w2) / (w1 / m[j - 1] + w2 / m[j]);
            }
        }
        dslope[0] = edge_slope(h[0], h[1], m[0], m[1]);
        dslope[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);

        let mut tab = Tabulated {
            t,
            dval,
            dslope,
            cum_int: vec![0.0; n],
            cum_int_sq: vec![0.0; n],
        };
        for j in 1..n {
            tab.cum_int[j] = tab.cum_int[j - 1] + tab.interval_int(j - 1, tab.t[j]);
            tab.cum_int_sq[j] = tab.cum_int_sq[j - 1] + tab.interval_int_sq(j - 1, tab.t[j]);
        }
        Ok(tab)
    }

    fn segment(&self, t: f64) -> usize {
        match self
            .t
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(j) => j.min(self.t.len() - 2),
            Err(j) => j.saturating_sub(1).min(self.t.len() - 2),
        }
    }

    /// Hermite cubic data for segment `j` evaluated at local coordinate.
    fn hermite(&self, j: usize, t: f64, order: u8) -> f64 {
        let h = self.t[j + 1] - self.t[j];
        let u = (t - self.t[j]) / h;
        let (p0, p1) = (self.dval[j], self.dval[j + 1]);
        let (c0, c1) = (self.dslope[j], self.dslope[j + 1]);
        match order {
            // f'(t): the cubic itself
            0 => {
                let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
                let h10 = u * (1.0 - u) * (1.0 - u);
                let h01 = u * u * (3.0 - 2.0 * u);
                let h11 = u * u * (u - 1.0);
                p0 * h00 + c0 * h * h10 + p1 * h01 + c1 * h * h11
            }
            // f''(t): derivative of the cubic
            _ => {
                let dh00 = 6.0 * u * (u - 1.0);
                let dh10 = (1.0 - u) * (1.0 - 3.0 * u);
                let dh01 = 6.0 * u * (1.0 - u);
                let dh11 = u * (3.0 * u - 2.0);
                (p0 * dh00 + p1 * dh01) / h + c0 * dh10 + c1 * dh11
            }
        }
    }

    /// `\int_{t_j}^{x} f'` within segment `j` (closed form for the cubic).
    fn interval_int(&self, j: usize, x: f64) -> f64 {
        let h = self.t[j + 1] - self.t[j];
        let u = (x - self.t[j]) / h;
        let (p0, p1) = (self.dval[j], self.dval[j + 1]);
        let (c0, c1) = (self.dslope[j], self.dslope[j + 1]);
        // Antiderivatives of the Hermite basis on [0, 1], scaled by h.
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u2 * u2;
        let ih00 = u - u3 + 0.5 * u4;
        let ih10 = 0.5 * u2 - (2.0 / 3.0) * u3 + 0.25 * u4;
        let ih01 = u3 - 0.5 * u4;
        let ih11 = 0.25 * u4 - u3 / 3.0;
        h * (p0 * ih00 + c0 * h * ih10 + p1 * ih01 + c1 * h * ih11)
    }

    /// `\int_{t_j}^{x} (f')^2` within segment `j`; the integrand is a sextic,
    /// so a 4-point Gauss rule is exact.
    fn interval_int_sq(&self, j: usize, x: f64) -> f64 {
        gauss_legendre_4(
            |t| {
                let d = self.hermite(j, t, 0);
                d * d
            },
            self.t[j],
            x,
        )
    }

    fn eval(&self, a: f64, t: f64, order: u8) -> f64 {
        let j = self.segment(t);
        match order {
            0 => a + self.cum_int[j] + self.interval_int(j, t),
            1 => self.hermite(j, t, 0),
            _ => self.hermite(j, t, 1),
        }
    }

    fn integral_df_sq(&self, t: f64) -> f64 {
        let j = self.segment(t);
        self.cum_int_sq[j] + self.interval_int_sq(j, t)
    }
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    // Shape-preserving three-point estimate at an edge knot.
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d * m0 <= 0.0 {
        0.0
    } else if m0 * m1 <= 0.0 && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

//! First-passage density curves and their serialized forms.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Which face of the engine produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GirsanovMc,
    DirectMc,
    FkPde,
    HeatPde,
    ClosedForm,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "girsanov_mc" => Ok(Method::GirsanovMc),
            "direct_mc" => Ok(Method::DirectMc),
            "fk_pde" => Ok(Method::FkPde),
            "heat_pde" => Ok(Method::HeatPde),
            "closed_form" => Ok(Method::ClosedForm),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::GirsanovMc => "girsanov_mc",
            Method::DirectMc => "direct_mc",
            Method::FkPde => "fk_pde",
            Method::HeatPde => "heat_pde",
            Method::ClosedForm => "closed_form",
        };
        f.write_str(s)
    }
}

/// An estimated or solved first-passage density on a time grid, with optional
/// 3-sigma confidence bands for the Monte Carlo methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityCurve {
    pub s_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub ci_low: Option<Vec<f64>>,
    pub ci_high: Option<Vec<f64>>,
    pub method: Method,
    pub boundary_digest: String,
}

impl DensityCurve {
    pub fn new(
        s_grid: Vec<f64>,
        phi: Vec<f64>,
        ci_low: Option<Vec<f64>>,
        ci_high: Option<Vec<f64>>,
        method: Method,
        boundary_digest: String,
    ) -> Result<Self> {
        if s_grid.len() != phi.len() {
            return Err(Error::InvalidArgument(
                "s grid and phi must have the same length".into(),
            ));
        }
        for lens in [&ci_low, &ci_high] {
            if let Some(v) = lens {
                if v.len() != phi.len() {
                    return Err(Error::InvalidArgument(
                        "confidence bands must match the grid length".into(),
                    ));
                }
            }
        }
        if s_grid.windows(2).any(|w| w[1] <= w[0]) || s_grid.first().is_some_and(|&s| s <= 0.0) {
            return Err(Error::InvalidArgument(
                "s grid must be strictly increasing and positive".into(),
            ));
        }
        if phi.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "density values must be finite and nonnegative".into(),
            ));
        }
        Ok(DensityCurve {
            s_grid,
            phi,
            ci_low,
            ci_high,
            method,
            boundary_digest,
        })
    }

    /// Trapezoidal integral of the curve over its grid, extended by zero at
    /// `s = 0`.
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        let mut prev_s = 0.0;
        let mut prev_phi = 0.0;
        for (&s, &p) in self.s_grid.iter().zip(self.phi.iter()) {
            acc += 0.5 * (prev_phi + p) * (s - prev_s);
            prev_s = s;
            prev_phi = p;
        }
        acc
    }

    /// CSV rows `s,phi,ci_low,ci_high,method`; the band columns stay empty
    /// for methods without one.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "s,phi,ci_low,ci_high,method")?;
        for i in 0..self.s_grid.len() {
            let lo = self
                .ci_low
                .as_ref()
                .map_or(String::new(), |v| format!("{:.8e}", v[i]));
            let hi = self
                .ci_high
                .as_ref()
                .map_or(String::new(), |v| format!("{:.8e}", v[i]));
            writeln!(
                out,
                "{:.8e},{:.8e},{},{},{}",
                self.s_grid[i], self.phi[i], lo, hi, self.method
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

//! A cross-validating engine for the first-passage-time density of standard
//! Brownian motion to a convex moving boundary.
//!
//! The same density is computed along four independent routes so each one
//! checks the others:
//!
//! - direct Monte Carlo simulation of the passage time with a
//!   Brownian-bridge crossing correction ([`montecarlo::fpt_direct_mc`]),
//! - the change-of-measure representation through an exponential functional
//!   of a 3-dimensional Bessel bridge ([`montecarlo::fpt_density_girsanov`]),
//! - a Feynman-Kac Cauchy problem solved by finite differences
//!   ([`pde::solve_fk_cauchy`] + [`pde::density_from_v`]),
//! - a killed heat equation in boundary-fixed coordinates
//!   ([`pde::solve_killed_heat`]),
//!
//! together with pointwise analytic bounds ([`bounds::theorem_envelope`])
//! that every curve must respect.

pub mod boundary;
pub mod bounds;
pub mod bridge;
pub mod cli;
pub mod curve;
pub mod error;
pub mod pde;
pub mod kernels;
pub mod montecarlo;
pub mod quad;
pub mod spectral;
pub mod stats;

pub use boundary::{Boundary, BoundaryKind, BoundarySpec};
pub use bounds::BoundsEnvelope;
pub use bridge::{PathBatch, Scheme};
pub use curve::{DensityCurve, Method};
pub use error::{Error, Result};
pub use kernels::BridgeSpec;
pub use pde::{FieldGrid, FieldKind};
pub use spectral::SpectralProfile;
pub use stats::EstimateCI;

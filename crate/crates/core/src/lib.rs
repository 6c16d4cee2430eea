//! Orthogonal polynomials on planar domains with cut-off exponential
//! weights, the associated 2×2 matrix ∂̄-problem, equilibrium domains
//! bounded by polynomial curves, and the g-function undressing transforms.

pub mod cpair;
pub mod dbar;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod gfunction;
pub mod mat2;
pub mod orthopoly;
pub mod potential;
pub mod quadrature;

pub use error::{Error, Result};
pub use equilibrium::{EquilibriumDomain, HarmonicMoments};
pub use geometry::{AreaMode, Domain, PolynomialCurve, QuadratureRule, StarFibration};
pub use gfunction::{GFunction, GVersion};
pub use mat2::Mat2;
pub use orthopoly::{MomentMatrix, OrthoPolySet};
pub use potential::{EFPotential, Weight};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

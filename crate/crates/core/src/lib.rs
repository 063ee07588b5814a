//! Truncated expansions of iterated Ito and Stratonovich stochastic integrals
//! (multiplicity 1 to 4) built from multiple Fourier series over Legendre and
//! trigonometric bases, the competing Karhunen-Loeve (Milstein) expansion,
//! exact and closed-form mean-square approximation errors, and a brute-force
//! fine-grid Monte Carlo oracle for validation.

pub mod basis;
pub mod catalog;
pub mod error;
pub mod expansion;
pub mod gaussian;
pub mod kahan;
pub mod kernel;
pub mod milstein;
pub mod mse;
pub mod oracle;
pub mod quad;

pub use basis::{BasisKind, Interval};
pub use catalog::{CatalogId, CatalogName, Tails};
pub use error::{Error, Result};
pub use expansion::{ComponentIndices, IntegralKind, TruncatedIntegral};
pub use gaussian::{GaussianDraw, TailWeights};
pub use kernel::{CoefficientTable, WeightedKernel};
pub use mse::{ClosedForm, ErrorReport, SeriesIdentity};
pub use oracle::{ApproxTarget, McEstimate, WienerPath};

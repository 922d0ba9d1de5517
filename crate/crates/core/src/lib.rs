//! Few-mode quantum matter-wave optics.
//!
//! - [`fock`]: exact dynamics of bosonic modes on charge-conserving Fock sectors.
//! - [`spinor`]: four-wave mixing in a spin-1 condensate and its correlation functions.
//! - [`paramp`]: three-mode parametric amplification of Gaussian states, with a truncated
//!   Fock cross-check.
//! - [`holography`]: writing a density hologram into a condensate and reading it with an
//!   atomic beam.
//!
//! Every numeric type is generic over [`Real`]; the aliases below fix `f64`,
//! and the `*32` variants fix `f32`.

// Range checks are written `!(a < b)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod error;
pub mod fock;
pub mod holography;
pub mod paramp;
pub mod scalar;
pub mod spinor;

pub use error::{Error, Result};
pub use scalar::Real;

pub type StateVector = fock::StateVector<f64>;
pub type SparseMatrix = fock::SparseMatrix<f64>;
pub type OperatorExpression = fock::OperatorExpression<f64>;
pub type CorrelationSnapshot = correlation::CorrelationSnapshot<f64>;
pub type FwmScenario = spinor::FwmScenario<f64>;
pub type PopulationSeries = spinor::PopulationSeries<f64>;
pub type CorrelationReport = spinor::CorrelationReport<f64>;
pub type ThreeModeParams = paramp::ThreeModeParams<f64>;
pub type GaussianState = paramp::GaussianState<f64>;
pub type Grid = holography::Grid<f64>;
pub type ScalarField = holography::ScalarField<f64>;
pub type PotentialMap = holography::PotentialMap<f64>;
pub type TFProfile = holography::TFProfile<f64>;

pub type StateVector32 = fock::StateVector<f32>;
pub type FwmScenario32 = spinor::FwmScenario<f32>;
pub type ThreeModeParams32 = paramp::ThreeModeParams<f32>;
pub type GaussianState32 = paramp::GaussianState<f32>;
pub type Grid32 = holography::Grid<f32>;
pub type ScalarField32 = holography::ScalarField<f32>;

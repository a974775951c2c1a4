//! Certified lower bounds on two-qubit quantum discord subject to a fixed
//! fraction of a Bell expression's quantum bound.
//!
//! The crate is organized bottom-up: [`linalg`] holds the dense complex
//! matrix kernel, [`state`] the 15-parameter two-qubit state family,
//! [`bell`] the expression registry with classical and see-saw bounds,
//! [`discord`] the certified discord evaluator, [`optimize`] the
//! constrained basin-hopping stack, and [`sweep`]/[`report`] the experiment
//! harness and its file formats.

pub mod bell;
pub mod discord;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod report;
pub mod state;
pub mod sweep;

pub use bell::{BellExpression, BoundSource, MeasurementConfig, SeesawOutcome};
pub use discord::DiscordResult;
pub use error::{Error, Result};
pub use optimize::{ConstraintSet, OptResult, OptimizationProblem};
pub use linalg::{Complex64, ComplexMatrix, Spectrum};
pub use state::{EntangledBasis, StateParams};
pub use sweep::{Aggregate, AggregateRow, RunRecord, Strategy, SweepConfig};

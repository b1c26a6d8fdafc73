//! Optimal sparse risk scores over continuous predictors with jointly
//! learned thresholds.
//!
//! [`model`] builds the mixed-integer formulation, [`relax`] solves its
//! continuous relaxation, [`heuristic`] rounds it, [`exact`] certifies
//! results at desk scale, [`datagen`] draws synthetic instances and
//! [`report`] handles files, score cards and benchmark tables.

pub mod datagen;
pub mod error;
pub mod exact;
pub mod heuristic;
pub mod loss;
pub mod model;
pub mod relax;
pub mod report;

pub use error::{Error, Result};
pub use model::{Dataset, Hyperparams, RiskScoreSolution};

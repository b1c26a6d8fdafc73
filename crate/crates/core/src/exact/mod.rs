//! Exact references: a threshold-discretized brute force (ground truth at
//! desk scale) and a best-first branch-and-bound over the relaxation.

mod bnb;
mod brute;

use serde::Serialize;

use crate::model::RiskScoreSolution;

pub use bnb::branch_and_bound;
pub use brute::{brute_force, candidate_thresholds, BRUTE_MAX_K, BRUTE_MAX_N, BRUTE_MAX_P};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactStatus {
    Optimal,
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub best: RiskScoreSolution,
    pub objective: f64,
    pub lower_bound: f64,
    /// `(objective - lower_bound) / max(1, |objective|)`.
    pub proven_gap: f64,
    /// Search nodes (branch-and-bound) or subset/threshold combinations (brute force).
    pub nodes_or_candidates: usize,
    pub wall_time_s: f64,
    /// Seconds until the returned solution was first found.
    pub time_to_best: f64,
    pub status: ExactStatus,
}

pub(crate) fn relative_gap(objective: f64, lower_bound: f64) -> f64 {
    ((objective - lower_bound) / objective.abs().max(1.0)).max(0.0)
}

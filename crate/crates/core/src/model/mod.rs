//! Domain types and the mixed-integer formulations.
//!
//! [`Dataset`], [`Hyperparams`] and [`RiskScoreSolution`] are the user-facing
//! types; [`formulation`] turns a dataset into an explicit [`MinloModel`].

pub mod formulation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{self, MarginVector};

pub use formulation::{
    build_binary_model, build_final_model, ConstraintFamily, ConstraintGroup, Layout, LinExpr, MinloModel,
    ModelWarning, Row, VarId, VarKind, Variable,
};

/// Continuous features with ±1 labels and per-feature bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    /// Row-major `n × p`.
    features: Vec<f64>,
    labels: Vec<i8>,
    names: Vec<String>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset with explicit bounds, checking every invariant.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<i8>, names: Vec<String>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let p = names.len();
        let n = rows.len();
        if labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} rows but {} labels",
                labels.len()
            )));
        }
        if lo.len() != p || hi.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{p} features but {} lower / {} upper bounds",
                lo.len(),
                hi.len()
            )));
        }
        let mut features = Vec::with_capacity(n * p);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} values, expected {p}",
                    row.len()
                )));
            }
            features.extend(row);
        }
        Self::from_parts(n, p, features, labels, names, lo, hi)
    }

    /// Builds a dataset whose bounds are the per-column minimum and maximum.
    pub fn with_data_bounds(rows: Vec<Vec<f64>>, labels: Vec<i8>, names: Vec<String>) -> Result<Self> {
        let p = names.len();
        let mut lo = vec![f64::INFINITY; p];
        let mut hi = vec![f64::NEG_INFINITY; p];
        for row in &rows {
            for (j, &v) in row.iter().enumerate().take(p) {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        for j in 0..p {
            if rows.is_empty() {
                lo[j] = 0.0;
                hi[j] = 1.0;
            }
        }
        Self::new(rows, labels, names, lo, hi)
    }

    pub(crate) fn from_parts(
        n: usize,
        p: usize,
        features: Vec<f64>,
        labels: Vec<i8>,
        names: Vec<String>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Self> {
        debug_assert_eq!(features.len(), n * p);
        if let Some(i) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::InvalidDataset(format!(
                "label {} in row {i} is not ±1",
                labels[i]
            )));
        }
        for j in 0..p {
            if !(lo[j].is_finite() && hi[j].is_finite()) || lo[j] > hi[j] {
                return Err(Error::InvalidDataset(format!(
                    "feature `{}` has invalid bounds [{}, {}]",
                    names[j], lo[j], hi[j]
                )));
            }
        }
        for i in 0..n {
            for j in 0..p {
                let v = features[i * p + j];
                if !v.is_finite() || v < lo[j] || v > hi[j] {
                    return Err(Error::InvalidDataset(format!(
                        "value {v} of feature `{}` in row {i} lies outside [{}, {}]",
                        names[j], lo[j], hi[j]
                    )));
                }
            }
        }
        Ok(Self {
            n,
            p,
            features,
            labels,
            names,
            lo,
            hi,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.p + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i, j)).collect()
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// A feature whose bound interval is a single point.
    pub fn is_degenerate(&self, j: usize) -> bool {
        self.lo[j] == self.hi[j]
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&1) && self.labels.contains(&-1)
    }

    /// Keeps the features listed in `keep`, in that order.
    pub fn select_features(&self, keep: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(self.n * keep.len());
        for i in 0..self.n {
            features.extend(keep.iter().map(|&j| self.value(i, j)));
        }
        Dataset {
            n: self.n,
            p: keep.len(),
            features,
            labels: self.labels.clone(),
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            lo: keep.iter().map(|&j| self.lo[j]).collect(),
            hi: keep.iter().map(|&j| self.hi[j]).collect(),
        }
    }
}

/// Sparsity budget, coefficient boxes, tolerances and search budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub k: usize,
    pub wmax: i64,
    /// Intercept box used by the exact solvers; the model itself leaves `w0` free.
    pub w0max: i64,
    pub tol_feas: f64,
    pub tol_opt: f64,
    pub time_budget_s: f64,
    pub node_budget: usize,
}

impl Hyperparams {
    pub const DEFAULT_TIME_BUDGET_S: f64 = 1000.0;

    pub fn new(k: usize) -> Self {
        Self {
            k,
            wmax: 5,
            w0max: 10,
            tol_feas: 1e-6,
            tol_opt: 1e-6,
            time_budget_s: Self::DEFAULT_TIME_BUDGET_S,
            node_budget: 100_000,
        }
    }

    pub fn with_time_budget(mut self, seconds: f64) -> Self {
        self.time_budget_s = seconds;
        self
    }

    pub fn with_node_budget(mut self, nodes: usize) -> Self {
        self.node_budget = nodes;
        self
    }

    /// Checks the hyperparameters against a problem with `p` features.
    pub fn check(&self, p: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidHyperparams("k must be positive".into()));
        }
        if self.k > p {
            return Err(Error::BudgetInfeasible { k: self.k, p });
        }
        if self.wmax < 1 {
            return Err(Error::InvalidHyperparams("wmax must be at least 1".into()));
        }
        if self.w0max < self.wmax {
            return Err(Error::InvalidHyperparams("w0max must be at least wmax".into()));
        }
        if !(self.tol_feas > 0.0 && self.tol_opt > 0.0) {
            return Err(Error::InvalidHyperparams("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// A deployable risk score: integer intercept plus, per feature, a selection
/// flag, a threshold and the two integer point values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskScoreSolution {
    pub w0: i64,
    pub alpha: Vec<bool>,
    pub t: Vec<f64>,
    pub w_le: Vec<i64>,
    pub w_ge: Vec<i64>,
}

impl RiskScoreSolution {
    /// The intercept-only model with thresholds at the bound midpoints.
    pub fn empty(w0: i64, lo: &[f64], hi: &[f64]) -> Self {
        let p = lo.len();
        Self {
            w0,
            alpha: vec![false; p],
            t: lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            w_le: vec![0; p],
            w_ge: vec![0; p],
        }
    }

    pub fn p(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_selected(&self) -> usize {
        self.alpha.iter().filter(|&&a| a).count()
    }

    /// Integer score of one point. `x[j] == t[j]` takes the `≤` branch.
    pub fn score(&self, x: &[f64]) -> i64 {
        let mut s = self.w0;
        for (j, &xj) in x.iter().enumerate().take(self.alpha.len()) {
            if self.alpha[j] {
                s += if xj <= self.t[j] { self.w_le[j] } else { self.w_ge[j] };
            }
        }
        s
    }

    /// `σ(score(x))`, the probability of the positive class.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        loss::sigmoid(self.score(x) as f64)
    }

    pub fn scores(&self, d: &Dataset) -> Vec<f64> {
        d.rows().map(|x| self.score(x) as f64).collect()
    }

    /// Training logistic loss on `d`.
    pub fn objective(&self, d: &Dataset) -> f64 {
        let scores = self.scores(d);
        loss::logistic_loss(MarginVector::new(&scores, d.labels()).expect("dataset labels are ±1"))
    }

    /// Training AUC on `d`; fails when `d` has a single class.
    pub fn auc(&self, d: &Dataset) -> Result<f64> {
        loss::auc(&self.scores(d), d.labels())
    }

    /// Lists every violated constraint; an empty report means the solution
    /// is feasible for the final formulation once `b` and `β` are completed
    /// from the thresholds.
    pub fn validate(&self, d: &Dataset, h: &Hyperparams) -> ValidationReport {
        let mut violations = Vec::new();
        let p = d.p();
        if self.alpha.len() != p || self.t.len() != p || self.w_le.len() != p || self.w_ge.len() != p {
            violations.push(Violation::Dimension {
                expected: p,
                alpha: self.alpha.len(),
                t: self.t.len(),
                w_le: self.w_le.len(),
                w_ge: self.w_ge.len(),
            });
            return ValidationReport { violations };
        }
        let selected = self.n_selected();
        if selected > h.k {
            violations.push(Violation::Budget { selected, k: h.k });
        }
        for j in 0..p {
            for (side, w) in [(Side::Le, self.w_le[j]), (Side::Ge, self.w_ge[j])] {
                if w.abs() > h.wmax {
                    violations.push(Violation::CoefficientBox {
                        feature: j,
                        side,
                        value: w,
                        wmax: h.wmax,
                    });
                }
                if !self.alpha[j] && w != 0 {
                    violations.push(Violation::Linkage {
                        feature: j,
                        side,
                        value: w,
                    });
                }
            }
            let t = self.t[j];
            if !(t >= d.lo()[j] && t <= d.hi()[j]) {
                violations.push(Violation::ThresholdRange {
                    feature: j,
                    t,
                    lo: d.lo()[j],
                    hi: d.hi()[j],
                });
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension {
        expected: usize,
        alpha: usize,
        t: usize,
        w_le: usize,
        w_ge: usize,
    },
    Budget {
        selected: usize,
        k: usize,
    },
    CoefficientBox {
        feature: usize,
        side: Side,
        value: i64,
        wmax: i64,
    },
    Linkage {
        feature: usize,
        side: Side,
        value: i64,
    },
    ThresholdRange {
        feature: usize,
        t: f64,
        lo: f64,
        hi: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Dimension { expected, .. } => {
                write!(f, "solution vectors do not all have length {expected}")
            }
            Violation::Budget { selected, k } => {
                write!(f, "{selected} features selected, budget is {k}")
            }
            Violation::CoefficientBox {
                feature,
                side,
                value,
                wmax,
            } => write!(
                f,
                "feature {feature} {side:?} coefficient {value} outside [-{wmax}, {wmax}]"
            ),
            Violation::Linkage { feature, side, value } => write!(
                f,
                "feature {feature} is unselected but its {side:?} coefficient is {value}"
            ),
            Violation::ThresholdRange { feature, t, lo, hi } => {
                write!(f, "feature {feature} threshold {t} outside [{lo}, {hi}]")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

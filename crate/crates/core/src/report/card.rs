use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::loss::sigmoid;
use crate::model::RiskScoreSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct CardRow {
    pub condition: String,
    pub points: i64,
}

/// A printable risk-score card: point rows, intercept, and the risk
/// `σ(score / m)` of every achievable total score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCard {
    pub rows: Vec<CardRow>,
    pub intercept: i64,
    pub m: f64,
    /// `(score, risk in [0, 1])`, increasing in score. Scores include the intercept.
    pub table: Vec<(i64, f64)>,
}

impl ScoreCard {
    /// `names` defaults to `X1..Xp`.
    pub fn new(s: &RiskScoreSolution, names: Option<&[String]>, m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidHyperparams(format!(
                "scaling m must be positive, got {m}"
            )));
        }
        let name = |j: usize| {
            names
                .and_then(|n| n.get(j).cloned())
                .unwrap_or_else(|| format!("X{}", j + 1))
        };
        let mut rows = Vec::new();
        let mut scores = BTreeSet::from([s.w0]);
        for j in (0..s.p()).filter(|&j| s.alpha[j]) {
            rows.push(CardRow {
                condition: format!("{} ≤ {}", name(j), s.t[j]),
                points: s.w_le[j],
            });
            rows.push(CardRow {
                condition: format!("{} ≥ {}", name(j), s.t[j]),
                points: s.w_ge[j],
            });
            scores = scores.iter().flat_map(|&a| [a + s.w_le[j], a + s.w_ge[j]]).collect();
        }
        let table = scores.into_iter().map(|sc| (sc, sigmoid(sc as f64 / m))).collect();
        Ok(Self {
            rows,
            intercept: s.w0,
            m,
            table,
        })
    }

    /// Risk assigned to a total score (intercept included).
    pub fn risk(&self, score: i64) -> f64 {
        sigmoid(score as f64 / self.m)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self
            .rows
            .iter()
            .map(|r| r.condition.chars().count())
            .max()
            .unwrap_or(0)
            .max(9);
        let _ = writeln!(out, "RISK SCORE CARD (m = {})", self.m);
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(out, "{:>2}. {:<width$}  {:>+3} points", i + 1, r.condition, r.points);
        }
        let _ = writeln!(out, "    {:<width$}  {:>+3} points", "intercept", self.intercept);
        if !self.rows.is_empty() {
            let _ = writeln!(out, "    (a value equal to its threshold takes the ≤ row)");
        }
        let _ = writeln!(out, "SCORE → RISK");
        for &(score, risk) in &self.table {
            let _ = writeln!(out, "{score:>5} → {:.1}%", 100.0 * risk);
        }
        out
    }
}

/// Renders a card with default feature names.
pub fn render_card(s: &RiskScoreSolution, m: f64) -> Result<String> {
    Ok(ScoreCard::new(s, None, m)?.render())
}

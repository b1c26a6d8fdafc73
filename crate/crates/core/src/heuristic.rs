//! Round-and-fix matheuristic: solve the relaxation, keep the `k` largest
//! `ᾱ`, round the intercept and point values, keep the thresholds.

use std::time::Instant;

use crate::error::Result;
use crate::model::{build_final_model, Dataset, Hyperparams, Layout, RiskScoreSolution};
use crate::relax::{extremal_optimum, solve_relaxation, RelaxationSolution};

/// Nearest integer; exact halves round away from zero.
pub fn round_half(x: f64) -> i64 {
    x.round() as i64
}

/// Marks the (at most) `k` largest entries, ties to the lower index, and
/// stops early at the first exact zero in sorted order.
pub fn select_topk(alpha_bar: &[f64], k: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..alpha_bar.len()).collect();
    order.sort_by(|&a, &b| alpha_bar[b].total_cmp(&alpha_bar[a]).then(a.cmp(&b)));
    let mut chosen = vec![false; alpha_bar.len()];
    for &j in order.iter().take(k) {
        if alpha_bar[j] == 0.0 {
            break;
        }
        chosen[j] = true;
    }
    chosen
}

/// Rounds a relaxation of the final formulation of `(d, h)`.
pub fn algorithm1(r: &RelaxationSolution, d: &Dataset, h: &Hyperparams) -> RiskScoreSolution {
    let layout = Layout::Final { n: d.n(), p: d.p() };
    let p = d.p();
    let alpha_bar: Vec<f64> = (0..p).map(|j| r.value(layout.alpha(j)).clamp(0.0, 1.0)).collect();
    let alpha = select_topk(&alpha_bar, h.k);
    let clamp_w = |v: f64| round_half(v).clamp(-h.wmax, h.wmax);
    let (mut w_le, mut w_ge, mut t) = (vec![0; p], vec![0; p], vec![0.0; p]);
    for j in 0..p {
        t[j] = r.value(layout.t(j)).clamp(d.lo()[j], d.hi()[j]);
        if alpha[j] {
            w_le[j] = clamp_w(r.value(layout.w_le(j)));
            w_ge[j] = clamp_w(r.value(layout.w_ge(j)));
        }
    }
    RiskScoreSolution {
        w0: round_half(r.value(layout.w0())),
        alpha,
        t,
        w_le,
        w_ge,
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicOutcome {
    pub solution: RiskScoreSolution,
    pub objective: f64,
    pub relaxation: RelaxationSolution,
    pub wall_time_s: f64,
}

/// Builds the final model, solves its relaxation and rounds it. Both the
/// interior optimum and its [`extremal_optimum`] are rounded; the lower-loss
/// score is returned.
pub fn solve_heuristic(d: &Dataset, h: &Hyperparams) -> Result<HeuristicOutcome> {
    let start = Instant::now();
    let m = build_final_model(d, h)?;
    let relaxation = solve_relaxation(&m, h);
    // round both the central optimum and the extremal one; keep the better
    let central = algorithm1(&relaxation, d, h);
    let pushed = algorithm1(&extremal_optimum(&m, h, &relaxation), d, h);
    let (objective, solution) = [central, pushed]
        .into_iter()
        .map(|s| (s.objective(d), s))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("two candidates");
    Ok(HeuristicOutcome {
        objective,
        solution,
        relaxation,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

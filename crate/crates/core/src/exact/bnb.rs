use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{relative_gap, ExactResult, ExactStatus};
use crate::error::Result;
use crate::heuristic::algorithm1;
use crate::model::{build_final_model, Dataset, Hyperparams, Layout, RiskScoreSolution, VarId};
use crate::relax::{RelaxStatus, Relaxation, RelaxationSolution};

const INT_TOL: f64 = 1e-6;

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    /// Bound changes relative to the root: `(var, lower, upper)`.
    changes: Vec<(usize, f64, f64)>,
}

// Max-heap order: smallest bound first, then deepest, then oldest.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

fn fractionality(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// Most fractional variable among `vars`, if any exceeds the integrality tolerance.
fn most_fractional(r: &RelaxationSolution, vars: impl Iterator<Item = VarId>) -> Option<VarId> {
    let mut best: Option<(f64, VarId)> = None;
    for v in vars {
        let f = fractionality(r.value(v));
        if f > INT_TOL && best.is_none_or(|(bf, _)| f > bf) {
            best = Some((f, v));
        }
    }
    best.map(|(_, v)| v)
}

fn branching_variable(r: &RelaxationSolution, layout: Layout) -> Option<VarId> {
    let (n, p) = (layout.n(), layout.p());
    most_fractional(r, (0..p).map(|j| layout.alpha(j)))
        .or_else(|| most_fractional(r, (0..n).flat_map(|i| (0..p).map(move |j| layout.b(i, j)))))
        .or_else(|| {
            let ints = std::iter::once(layout.w0()).chain((0..p).flat_map(|j| [layout.w_le(j), layout.w_ge(j)]));
            most_fractional(r, ints)
        })
}

/// Best-first branch-and-bound on the final formulation with the intercept
/// boxed to `[-w0max, w0max]`. Node bounds come from the relaxation's dual
/// bound; every node's relaxation is rounded for an incumbent (the root's
/// extremal optimum as well).
pub fn branch_and_bound(d: &Dataset, h: &Hyperparams) -> Result<ExactResult> {
    let start = Instant::now();
    let m = build_final_model(d, h)?;
    let layout = m.layout;
    let mut root_lo: Vec<f64> = m.variables.iter().map(|v| v.lower).collect();
    let mut root_up: Vec<f64> = m.variables.iter().map(|v| v.upper).collect();
    root_lo[layout.w0().0] = -h.w0max as f64;
    root_up[layout.w0().0] = h.w0max as f64;

    let mut incumbent: Option<(f64, RiskScoreSolution)> = None;
    let mut time_to_best = 0.0;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        seq,
        changes: Vec::new(),
    });
    let mut nodes = 0;
    let mut exhausted = false;
    let prune_tol = |inc: f64| 0.1 * h.tol_opt * inc.abs().max(1.0);

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.bound >= inc - prune_tol(*inc) {
                continue;
            }
        }
        let remaining = h.time_budget_s - start.elapsed().as_secs_f64();
        if nodes >= h.node_budget || remaining <= 0.0 {
            heap.push(node);
            exhausted = true;
            break;
        }
        nodes += 1;

        let (mut lo, mut up) = (root_lo.clone(), root_up.clone());
        for &(v, l, u) in &node.changes {
            lo[v] = l;
            up[v] = u;
        }
        let r = Relaxation::new(&m, h)
            .with_bounds(&lo, &up)
            .with_time_budget(remaining)
            .solve();
        if r.status == RelaxStatus::Infeasible {
            continue;
        }
        let bound = if r.is_optimal() {
            r.lower_bound.max(node.bound)
        } else {
            node.bound
        };

        let mut candidates = vec![algorithm1(&r, d, h)];
        if node.depth == 0 {
            let face = Relaxation::new(&m, h).with_bounds(&lo, &up).extremal(&r);
            candidates.push(algorithm1(&face, d, h));
        }
        for candidate in candidates {
            let value = candidate.objective(d);
            if incumbent.as_ref().is_none_or(|(inc, _)| value < *inc) {
                incumbent = Some((value, candidate));
                time_to_best = start.elapsed().as_secs_f64();
            }
        }
        let inc = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
        if bound >= inc - prune_tol(inc) {
            continue;
        }
        let Some(var) = branching_variable(&r, layout) else {
            // integral relaxation: its rounding is the node optimum
            continue;
        };
        let x = r.value(var);
        let v = var.0;
        for (l, u) in [(lo[v], x.floor()), (x.ceil(), up[v])] {
            if l > u {
                continue;
            }
            seq += 1;
            let mut changes = node.changes.clone();
            changes.retain(|c| c.0 != v);
            changes.push((v, l, u));
            heap.push(Node {
                bound,
                depth: node.depth + 1,
                seq,
                changes,
            });
        }
    }

    let (objective, best) = incumbent.unwrap_or_else(|| {
        let s = RiskScoreSolution::empty(0, d.lo(), d.hi());
        (s.objective(d), s)
    });
    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let lower_bound = open_bound.min(objective);
    let proven_gap = relative_gap(objective, lower_bound);
    let status = if !exhausted || proven_gap <= h.tol_opt {
        ExactStatus::Optimal
    } else {
        ExactStatus::BudgetExhausted
    };
    Ok(ExactResult {
        best,
        objective,
        lower_bound,
        proven_gap: if status == ExactStatus::Optimal && !exhausted {
            0.0
        } else {
            proven_gap
        },
        nodes_or_candidates: nodes,
        wall_time_s: start.elapsed().as_secs_f64(),
        time_to_best,
        status,
    })
}

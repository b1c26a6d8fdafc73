//! Continuous relaxation of a [`MinloModel`]: integrality dropped, binaries
//! relaxed to `[0, 1]`.
//!
//! Solved by a primal-dual interior-point method with Mehrotra's
//! predictor-corrector. Each finite side of a row or bound becomes an
//! inequality `eᵀx - h ≥ 0` with its own slack and multiplier. Newton systems
//! are block-arrow (per-sample blocks around a handful of shared variables)
//! and are factored through their Schur complement, so the cost per iteration
//! is linear in the number of samples.
//!
//! Before iterating, fixed variables are substituted and single-variable rows
//! become bounds. Remaining rows and bounds are loosened by `1e-9·(1+|rhs|)`
//! so implied equalities keep an interior; the clipped result is reported
//! against the original rows.

mod kkt;

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::loss::{log1p_exp_neg, sigmoid};
use crate::model::{Hyperparams, Layout, MinloModel, Row, VarId};
use kkt::BlockArrow;

const RELAX_EPS: f64 = 1e-9;
const STEP_TO_BOUNDARY: f64 = 0.995;
const KKT_REG: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxStatus {
    Optimal,
    /// Iteration or time budget ran out; the point carries its residuals.
    BudgetExceeded,
    /// Bounds and rows contradict each other (only reachable with bound overrides).
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct RelaxationSolution {
    /// One value per model variable, in model order.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Dual bound `f - sᵀz - |zᵀr_p|` on the relaxation optimum.
    pub lower_bound: f64,
    pub max_constraint_violation: f64,
    /// Infinity norm of the Lagrangian gradient.
    pub stationarity_residual: f64,
    /// `sᵀz` at the returned point.
    pub complementarity: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub status: RelaxStatus,
}

impl RelaxationSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == RelaxStatus::Optimal
    }
}

/// Solves the relaxation with the default starting point and no bound overrides.
pub fn solve_relaxation(m: &MinloModel, h: &Hyperparams) -> RelaxationSolution {
    Relaxation::new(m, h).solve()
}

/// Another optimum of the same relaxation, pushed along its own weights.
///
/// The loss is strictly convex in the margins, so every relaxation optimum
/// shares the margins of `r`; the optimal set is the polyhedron of feasible
/// points with those margins. Interior-point solutions sit at its centre,
/// where the weights of a split can shrink towards zero while the
/// fractional `b` carries the margin. This solves the linear program
/// `max Σ w̄·w` over that polyhedron (margins held to within `1e-6·(1+|u|)`)
/// so rounding sees the weights at full strength. Falls back to `r` when it
/// has no weight signal or the second solve does not converge.
pub fn extremal_optimum(m: &MinloModel, h: &Hyperparams, r: &RelaxationSolution) -> RelaxationSolution {
    Relaxation::new(m, h).extremal(r)
}

/// Configurable relaxation solve (bound overrides, budgets, iteration log).
pub struct Relaxation<'a> {
    model: &'a MinloModel,
    lower: Vec<f64>,
    upper: Vec<f64>,
    k: usize,
    tol_feas: f64,
    tol_opt: f64,
    time_budget_s: f64,
    max_iter: usize,
    log: Option<&'a mut dyn Write>,
    /// Replaces the loss by a linear objective (per model variable).
    linear: Option<Vec<f64>>,
    extra_rows: Vec<Row>,
}

impl<'a> Relaxation<'a> {
    pub fn new(model: &'a MinloModel, h: &Hyperparams) -> Self {
        Self {
            model,
            lower: model.variables.iter().map(|v| v.lower).collect(),
            upper: model.variables.iter().map(|v| v.upper).collect(),
            k: h.k,
            tol_feas: h.tol_feas,
            tol_opt: h.tol_opt,
            time_budget_s: h.time_budget_s,
            max_iter: 300,
            log: None,
            linear: None,
            extra_rows: Vec::new(),
        }
    }

    /// Replaces all variable bounds; both slices have one entry per variable.
    pub fn with_bounds(mut self, lower: &[f64], upper: &[f64]) -> Self {
        assert_eq!(lower.len(), self.model.n_vars());
        assert_eq!(upper.len(), self.model.n_vars());
        self.lower = lower.to_vec();
        self.upper = upper.to_vec();
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn with_time_budget(mut self, seconds: f64) -> Self {
        self.time_budget_s = seconds;
        self
    }

    /// Streams one tab-separated line per iteration:
    /// `iter objective violation residual mu`.
    pub fn with_log(mut self, sink: &'a mut dyn Write) -> Self {
        self.log = Some(sink);
        self
    }

    /// [`extremal_optimum`] of `r`, which must be this configuration's own
    /// optimum (same bounds).
    pub fn extremal(mut self, r: &RelaxationSolution) -> RelaxationSolution {
        let m = self.model;
        let layout = m.layout;
        let weights: Vec<VarId> = match layout {
            Layout::Final { .. } => (0..layout.p()).flat_map(|j| [layout.w_le(j), layout.w_ge(j)]).collect(),
            Layout::Binary { .. } => (0..layout.p()).map(|j| layout.w(j)).collect(),
        };
        let scale = weights.iter().map(|&v| r.value(v).abs()).fold(0.0, f64::max);
        if !r.is_optimal() || scale < 1e-9 {
            return r.clone();
        }
        let mut linear = vec![0.0; m.n_vars()];
        for &v in &weights {
            linear[v.0] = -r.value(v) / scale;
        }
        let extra_rows = m
            .margins
            .iter()
            .map(|e| {
                let u = e.eval(&r.values) - e.constant;
                let band = 1e-6 * (1.0 + u.abs());
                Row {
                    group: usize::MAX,
                    terms: e.terms.clone(),
                    lower: u - band,
                    upper: u + band,
                }
            })
            .collect();
        let tol_feas = self.tol_feas;
        self.linear = Some(linear);
        self.extra_rows = extra_rows;
        let mut out = self.solve();
        if !out.is_optimal() || out.max_constraint_violation > tol_feas {
            return r.clone();
        }
        out.lower_bound = r.lower_bound;
        out.iterations += r.iterations;
        out.wall_time_s += r.wall_time_s;
        out
    }

    pub fn solve(mut self) -> RelaxationSolution {
        let start = Instant::now();
        let m = self.model;
        let x_init = initial_point(m, self.k, &self.lower, &self.upper);

        let rows: Vec<&Row> = m.rows.iter().chain(&self.extra_rows).collect();
        let Some(red) = presolve(m, &rows, &self.lower, &self.upper, self.linear.as_deref()) else {
            return RelaxationSolution {
                values: x_init,
                objective: f64::INFINITY,
                lower_bound: f64::INFINITY,
                max_constraint_violation: f64::INFINITY,
                stationarity_residual: 0.0,
                complementarity: 0.0,
                iterations: 0,
                wall_time_s: start.elapsed().as_secs_f64(),
                status: RelaxStatus::Infeasible,
            };
        };

        let x0: Vec<f64> = red
            .free
            .iter()
            .enumerate()
            .map(|(r, &v)| {
                let (l, u) = (red.lower[r], red.upper[r]);
                let inset = (0.25 * (u - l)).min(1e-2);
                x_init[v].clamp(l + inset, u - inset)
            })
            .collect();

        let ipm = Ipm::new(&red, m);
        let ptol = (1e-2 * self.tol_feas).min(1e-8);
        let out = ipm.run(
            x0,
            ptol,
            self.tol_opt,
            self.max_iter,
            self.time_budget_s,
            start,
            self.log.take(),
        );

        let mut values = vec![0.0; m.n_vars()];
        for (v, f) in red.fixed.iter().enumerate() {
            if let Some(f) = f {
                values[v] = *f;
            }
        }
        for (r, &v) in red.free.iter().enumerate() {
            values[v] = out.x[r];
        }
        for (v, x) in values.iter_mut().enumerate() {
            *x = x.clamp(self.lower[v], self.upper[v]);
        }

        let objective = m.objective_at(&values);
        let lower_bound = if self.linear.is_some() {
            f64::NEG_INFINITY
        } else {
            out.lower_bound.min(objective)
        };
        let row_viol = rows.iter().map(|r| r.violation(&values)).fold(0.0, f64::max);
        let status = if out.converged {
            RelaxStatus::Optimal
        } else {
            RelaxStatus::BudgetExceeded
        };
        RelaxationSolution {
            values,
            objective,
            lower_bound,
            max_constraint_violation: row_viol,
            stationarity_residual: out.dual_inf,
            complementarity: out.gap,
            iterations: out.iterations,
            wall_time_s: start.elapsed().as_secs_f64(),
            status,
        }
    }
}

/// Symmetric starting point: `w0 = w = β = 0`, `α = k/p`, thresholds at
/// mid-range, `b = 1/2`, projected onto the given bounds.
fn initial_point(m: &MinloModel, k: usize, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; m.n_vars()];
    let layout = m.layout;
    let (n, p) = (layout.n(), layout.p());
    let frac = if p == 0 { 0.0 } else { k as f64 / p as f64 };
    for j in 0..p {
        x[layout.alpha(j).0] = frac;
    }
    if let Layout::Final { .. } = layout {
        for j in 0..p {
            let t = layout.t(j).0;
            let var = &m.variables[t];
            x[t] = 0.5 * (var.lower + var.upper);
            for i in 0..n {
                x[layout.b(i, j).0] = 0.5;
            }
        }
    }
    for (v, xv) in x.iter_mut().enumerate() {
        *xv = xv.clamp(lower[v], upper[v]);
    }
    x
}

type Terms = Vec<(usize, f64)>;

/// Problem after substituting fixed variables, indexed by free variable.
struct Reduced {
    free: Vec<usize>,
    fixed: Vec<Option<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<(Terms, f64, f64)>,
    margins: Vec<(f64, Terms)>,
    block: Vec<Option<usize>>,
    linear: Vec<f64>,
}

fn loosen(v: f64, dir: f64) -> f64 {
    if v.is_finite() {
        v + dir * RELAX_EPS * (1.0 + v.abs())
    } else {
        v
    }
}

/// Returns `None` when the bounds and rows are contradictory.
fn presolve(m: &MinloModel, rows: &[&Row], lower: &[f64], upper: &[f64], linear: Option<&[f64]>) -> Option<Reduced> {
    let nv = m.n_vars();
    let mut l = lower.to_vec();
    let mut u = upper.to_vec();
    let mut fixed: Vec<Option<f64>> = vec![None; nv];
    let mut active = vec![true; rows.len()];
    let conflict = |a: f64, b: f64| a > b + RELAX_EPS * (1.0 + a.abs().max(b.abs()));

    loop {
        let mut changed = false;
        for v in 0..nv {
            if fixed[v].is_some() {
                continue;
            }
            if conflict(l[v], u[v]) {
                return None;
            }
            if l[v].is_finite() && u[v] - l[v] <= 1e-12 * (1.0 + l[v].abs()) {
                fixed[v] = Some(0.5 * (l[v] + u[v]));
                changed = true;
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if !active[r] {
                continue;
            }
            let mut constant = 0.0;
            let mut free = None;
            let mut n_free = 0;
            for &(v, c) in &row.terms {
                match fixed[v.0] {
                    Some(f) => constant += c * f,
                    None => {
                        n_free += 1;
                        free = Some((v.0, c));
                    }
                }
            }
            match (n_free, free) {
                (0, _) => {
                    if conflict(row.lower, constant) || conflict(constant, row.upper) {
                        return None;
                    }
                }
                (1, Some((v, c))) => {
                    let (a, b) = ((row.lower - constant) / c, (row.upper - constant) / c);
                    let (lo, hi) = if c > 0.0 { (a, b) } else { (b, a) };
                    l[v] = l[v].max(lo);
                    u[v] = u[v].min(hi);
                }
                _ => continue,
            }
            active[r] = false;
            changed = true;
        }
        if !changed {
            break;
        }
    }

    let mut index = vec![usize::MAX; nv];
    let free: Vec<usize> = (0..nv).filter(|&v| fixed[v].is_none()).collect();
    for (r, &v) in free.iter().enumerate() {
        index[v] = r;
    }
    let reduce = |terms: &[(VarId, f64)]| -> (f64, Terms) {
        let mut constant = 0.0;
        let mut out = Vec::with_capacity(terms.len());
        for &(v, c) in terms {
            match fixed[v.0] {
                Some(f) => constant += c * f,
                None => out.push((index[v.0], c)),
            }
        }
        (constant, out)
    };

    let rows = rows
        .iter()
        .zip(&active)
        .filter(|(_, &a)| a)
        .map(|(row, _)| {
            let (c, terms) = reduce(&row.terms);
            (terms, loosen(row.lower - c, -1.0), loosen(row.upper - c, 1.0))
        })
        .collect();
    let margins = match linear {
        Some(_) => Vec::new(),
        None => m
            .margins
            .iter()
            .map(|e| {
                let (c, terms) = reduce(&e.terms);
                (e.constant + c, terms)
            })
            .collect(),
    };
    Some(Reduced {
        lower: free.iter().map(|&v| loosen(l[v], -1.0)).collect(),
        upper: free.iter().map(|&v| loosen(u[v], 1.0)).collect(),
        block: free.iter().map(|&v| m.variables[v].block).collect(),
        linear: free.iter().map(|&v| linear.map_or(0.0, |c| c[v])).collect(),
        free,
        fixed,
        rows,
        margins,
    })
}

/// `eᵀx - h ≥ 0`.
struct Ineq {
    e: Terms,
    h: f64,
}

struct Ipm<'r> {
    nx: usize,
    ineqs: Vec<Ineq>,
    margins: &'r [(f64, Terms)],
    labels: &'r [i8],
    block: &'r [Option<usize>],
    linear: &'r [f64],
}

struct IpmOutcome {
    x: Vec<f64>,
    converged: bool,
    lower_bound: f64,
    dual_inf: f64,
    gap: f64,
    iterations: usize,
}

fn dot(e: &[(usize, f64)], x: &[f64]) -> f64 {
    e.iter().map(|&(v, c)| c * x[v]).sum()
}

fn dot_dense(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

fn max_step(s: &[f64], ds: &[f64]) -> f64 {
    s.iter()
        .zip(ds)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&s, &d)| -s / d)
        .fold(1.0, f64::min)
}

impl<'r> Ipm<'r> {
    fn new(red: &'r Reduced, m: &'r MinloModel) -> Self {
        let mut ineqs = Vec::new();
        for v in 0..red.free.len() {
            if red.lower[v].is_finite() {
                ineqs.push(Ineq {
                    e: vec![(v, 1.0)],
                    h: red.lower[v],
                });
            }
            if red.upper[v].is_finite() {
                ineqs.push(Ineq {
                    e: vec![(v, -1.0)],
                    h: -red.upper[v],
                });
            }
        }
        for (terms, lo, up) in &red.rows {
            if lo.is_finite() {
                ineqs.push(Ineq {
                    e: terms.clone(),
                    h: *lo,
                });
            }
            if up.is_finite() {
                ineqs.push(Ineq {
                    e: terms.iter().map(|&(v, c)| (v, -c)).collect(),
                    h: -up,
                });
            }
        }
        Self {
            nx: red.free.len(),
            ineqs,
            margins: &red.margins,
            labels: &m.labels,
            block: &red.block,
            linear: &red.linear,
        }
    }

    /// Objective, gradient and per-sample curvature `σ(u)σ(-u)`.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let mut f = dot_dense(self.linear, x);
        let mut grad = self.linear.to_vec();
        let mut curv = Vec::with_capacity(self.margins.len());
        for ((c, d), &y) in self.margins.iter().zip(self.labels) {
            let y = f64::from(y);
            let u = y * (c + dot(d, x));
            f += log1p_exp_neg(u);
            let g = -y * sigmoid(-u);
            for &(v, a) in d {
                grad[v] += g * a;
            }
            curv.push(sigmoid(u) * sigmoid(-u));
        }
        (f, grad, curv)
    }

    #[allow(clippy::too_many_arguments)]
    fn run(
        &self,
        mut x: Vec<f64>,
        ptol: f64,
        tol_opt: f64,
        max_iter: usize,
        time_budget_s: f64,
        start: Instant,
        mut log: Option<&mut dyn Write>,
    ) -> IpmOutcome {
        let ni = self.ineqs.len();
        let mut s: Vec<f64> = self.ineqs.iter().map(|q| (dot(&q.e, &x) - q.h).max(1.0)).collect();
        let mut z: Vec<f64> = s.iter().map(|s| 1.0 / s).collect();
        let mut kkt = BlockArrow::new(self.block);
        if let Some(w) = log.as_deref_mut() {
            let _ = writeln!(w, "iter\tobjective\tviolation\tresidual\tmu");
        }

        let mut iter = 0;
        let mut stalled = false;
        loop {
            let (f, grad, curv) = self.eval(&x);
            let mut r_d = grad;
            for (q, &zc) in self.ineqs.iter().zip(&z) {
                for &(v, c) in &q.e {
                    r_d[v] -= zc * c;
                }
            }
            let r_p: Vec<f64> = self
                .ineqs
                .iter()
                .zip(&s)
                .map(|(q, &s)| dot(&q.e, &x) - q.h - s)
                .collect();
            let pinf = r_p.iter().fold(0.0f64, |a, r| a.max(r.abs()));
            let dinf = r_d.iter().fold(0.0f64, |a, r| a.max(r.abs()));
            let gap: f64 = s.iter().zip(&z).map(|(s, z)| s * z).sum();
            let mu = if ni == 0 { 0.0 } else { gap / ni as f64 };
            let lower_bound = f - gap - z.iter().zip(&r_p).map(|(z, r)| z * r).sum::<f64>().abs();
            if let Some(w) = log.as_deref_mut() {
                let _ = writeln!(w, "{iter}\t{f:.12e}\t{pinf:.3e}\t{dinf:.3e}\t{mu:.3e}");
            }

            let converged = pinf <= ptol && dinf <= 0.1 * tol_opt && gap <= 0.1 * tol_opt * f.abs().max(1.0);
            let out_of_budget = iter >= max_iter || start.elapsed().as_secs_f64() > time_budget_s;
            if converged || out_of_budget || stalled || self.nx == 0 {
                return IpmOutcome {
                    x,
                    converged: converged || self.nx == 0,
                    lower_bound,
                    dual_inf: dinf,
                    gap,
                    iterations: iter,
                };
            }

            kkt.clear();
            for ((_, d), &h) in self.margins.iter().zip(&curv) {
                kkt.add_outer(d, h);
            }
            for ((q, &sc), &zc) in self.ineqs.iter().zip(&s).zip(&z) {
                kkt.add_outer(&q.e, zc / sc);
            }
            if kkt.factor(KKT_REG).is_none() {
                stalled = true;
                continue;
            }

            let direction = |r_c: &[f64]| {
                let mut rhs: Vec<f64> = r_d.iter().map(|r| -r).collect();
                for (c, q) in self.ineqs.iter().enumerate() {
                    let w = (r_c[c] + z[c] * r_p[c]) / s[c];
                    for &(v, a) in &q.e {
                        rhs[v] -= a * w;
                    }
                }
                let dx = kkt.solve(&rhs);
                let ds: Vec<f64> = self.ineqs.iter().zip(&r_p).map(|(q, r)| dot(&q.e, &dx) + r).collect();
                let dz: Vec<f64> = (0..ni).map(|c| -(r_c[c] + z[c] * ds[c]) / s[c]).collect();
                (dx, ds, dz)
            };

            // Predictor
            let r_c: Vec<f64> = s.iter().zip(&z).map(|(s, z)| s * z).collect();
            let (_, ds_a, dz_a) = direction(&r_c);
            let ap = max_step(&s, &ds_a);
            let ad = max_step(&z, &dz_a);
            let mu_aff = if ni == 0 {
                0.0
            } else {
                (0..ni)
                    .map(|c| (s[c] + ap * ds_a[c]) * (z[c] + ad * dz_a[c]))
                    .sum::<f64>()
                    / ni as f64
            };
            let sigma = if mu > 0.0 { (mu_aff / mu).powi(3).min(1.0) } else { 0.0 };

            // Corrector
            let r_c: Vec<f64> = (0..ni).map(|c| s[c] * z[c] + ds_a[c] * dz_a[c] - sigma * mu).collect();
            let (dx, ds, dz) = direction(&r_c);
            let ap = (STEP_TO_BOUNDARY * max_step(&s, &ds)).min(1.0);
            let ad = (STEP_TO_BOUNDARY * max_step(&z, &dz)).min(1.0);
            for (xv, d) in x.iter_mut().zip(&dx) {
                *xv += ap * d;
            }
            for (sv, d) in s.iter_mut().zip(&ds) {
                *sv += ap * d;
            }
            for (zv, d) in z.iter_mut().zip(&dz) {
                *zv += ad * d;
            }
            iter += 1;
        }
    }
}

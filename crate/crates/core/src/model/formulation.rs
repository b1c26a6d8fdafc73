//! Explicit constraint systems for the binary-input and the final
//! (threshold + Fortet) formulations.
//!
//! Box constraints live on the variables, not in the row list, so the row
//! groups counted by [`MinloModel::n_linear_constraints`] are exactly the
//! linear constraints of the formulation. A group may expand to two
//! inequality rows when its two sides have different left-hand sides
//! (`-wmax α_j ≤ w_j ≤ wmax α_j`).

use crate::error::Result;
use crate::loss::{self, MarginVector};
use crate::model::{Dataset, Hyperparams};

type Terms = Vec<(VarId, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    /// Sample index for per-sample variables; `None` for variables shared by
    /// all samples. Every row and margin touches at most one block.
    pub block: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    Budget,
    Linking,
    Threshold,
    Fortet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintGroup {
    pub name: String,
    pub family: ConstraintFamily,
}

/// `lower ≤ Σ coef·x ≤ upper`; either side may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub group: usize,
    pub terms: Vec<(VarId, f64)>,
    pub lower: f64,
    pub upper: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        (self.lower - a).max(a - self.upper).max(0.0)
    }
}

/// Affine expression `constant + Σ coef·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(VarId, f64)>,
}

impl LinExpr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * x[v.0]).sum::<f64>()
    }
}

/// Where each named variable family lives in the variable vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Globals `w0, (α_j, w≤_j, w≥_j, t_j)_j`, then `(b_ij, β≤_ij, β≥_ij)` per sample.
    Final { n: usize, p: usize },
    /// `w0, (w_j, α_j)_j`.
    Binary { n: usize, p: usize },
}

impl Layout {
    pub fn n(&self) -> usize {
        match *self {
            Layout::Final { n, .. } | Layout::Binary { n, .. } => n,
        }
    }

    pub fn p(&self) -> usize {
        match *self {
            Layout::Final { p, .. } | Layout::Binary { p, .. } => p,
        }
    }

    pub fn w0(&self) -> VarId {
        VarId(0)
    }

    pub fn alpha(&self, j: usize) -> VarId {
        match self {
            Layout::Final { .. } => VarId(1 + 4 * j),
            Layout::Binary { .. } => VarId(2 + 2 * j),
        }
    }

    /// Binary layout only.
    pub fn w(&self, j: usize) -> VarId {
        debug_assert!(matches!(self, Layout::Binary { .. }));
        VarId(1 + 2 * j)
    }

    pub fn w_le(&self, j: usize) -> VarId {
        VarId(2 + 4 * j)
    }

    pub fn w_ge(&self, j: usize) -> VarId {
        VarId(3 + 4 * j)
    }

    pub fn t(&self, j: usize) -> VarId {
        VarId(4 + 4 * j)
    }

    fn n_globals(&self) -> usize {
        match *self {
            Layout::Final { p, .. } => 1 + 4 * p,
            Layout::Binary { p, .. } => 1 + 2 * p,
        }
    }

    fn sample_base(&self, i: usize, j: usize) -> usize {
        self.n_globals() + 3 * (i * self.p() + j)
    }

    pub fn b(&self, i: usize, j: usize) -> VarId {
        VarId(self.sample_base(i, j))
    }

    pub fn beta_le(&self, i: usize, j: usize) -> VarId {
        VarId(self.sample_base(i, j) + 1)
    }

    pub fn beta_ge(&self, i: usize, j: usize) -> VarId {
        VarId(self.sample_base(i, j) + 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelWarning {
    /// The feature's bound interval is a point; its threshold is fixed and
    /// both branches coincide.
    DegenerateFeature { feature: usize, name: String },
}

/// Variables, linear rows and the logistic objective of one formulation.
#[derive(Debug, Clone)]
pub struct MinloModel {
    pub variables: Vec<Variable>,
    pub groups: Vec<ConstraintGroup>,
    pub rows: Vec<Row>,
    /// Margin expression of every sample; the objective is
    /// `Σ_i log(1 + exp(-labels[i] · margins[i]))`.
    pub margins: Vec<LinExpr>,
    pub labels: Vec<i8>,
    pub layout: Layout,
    pub warnings: Vec<ModelWarning>,
}

impl MinloModel {
    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_linear_constraints(&self) -> usize {
        self.groups.len()
    }

    fn count_kind(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    pub fn n_binary(&self) -> usize {
        self.count_kind(VarKind::Binary)
    }

    pub fn n_integer(&self) -> usize {
        self.count_kind(VarKind::Integer)
    }

    pub fn n_continuous(&self) -> usize {
        self.count_kind(VarKind::Continuous)
    }

    pub fn n_family(&self, family: ConstraintFamily) -> usize {
        self.groups.iter().filter(|g| g.family == family).count()
    }

    pub fn margins_at(&self, x: &[f64]) -> Vec<f64> {
        self.margins.iter().map(|m| m.eval(x)).collect()
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        let m = self.margins_at(x);
        loss::logistic_loss(MarginVector::new(&m, &self.labels).expect("model labels are ±1"))
    }

    /// Largest violation of any row or variable bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    fn add_group(&mut self, name: String, family: ConstraintFamily) -> usize {
        self.groups.push(ConstraintGroup { name, family });
        self.groups.len() - 1
    }

    fn add_row(&mut self, group: usize, terms: Vec<(VarId, f64)>, lower: f64, upper: f64) {
        let terms = terms.into_iter().filter(|&(_, c)| c != 0.0).collect();
        self.rows.push(Row {
            group,
            terms,
            lower,
            upper,
        });
    }

    fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64, block: Option<usize>) -> VarId {
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
            block,
        });
        VarId(self.variables.len() - 1)
    }

    fn empty(layout: Layout, labels: Vec<i8>) -> Self {
        Self {
            variables: Vec::new(),
            groups: Vec::new(),
            rows: Vec::new(),
            margins: Vec::new(),
            labels,
            layout,
            warnings: Vec::new(),
        }
    }
}

/// Builds the final formulation: logistic loss over `β`-margins, the
/// sparsity budget, coefficient linking, threshold rows and the eight
/// Fortet rows of every `(i, j)`.
pub fn build_final_model(d: &Dataset, h: &Hyperparams) -> Result<MinloModel> {
    h.check(d.p())?;
    let (n, p) = (d.n(), d.p());
    let wmax = h.wmax as f64;
    let layout = Layout::Final { n, p };
    let mut m = MinloModel::empty(layout, d.labels().to_vec());

    m.add_var("w0".into(), VarKind::Integer, f64::NEG_INFINITY, f64::INFINITY, None);
    for j in 0..p {
        let f = j + 1;
        m.add_var(format!("alpha_{f}"), VarKind::Binary, 0.0, 1.0, None);
        m.add_var(format!("wle_{f}"), VarKind::Integer, -wmax, wmax, None);
        m.add_var(format!("wge_{f}"), VarKind::Integer, -wmax, wmax, None);
        m.add_var(format!("t_{f}"), VarKind::Continuous, d.lo()[j], d.hi()[j], None);
        if d.is_degenerate(j) {
            m.warnings.push(ModelWarning::DegenerateFeature {
                feature: j,
                name: d.names()[j].clone(),
            });
        }
    }
    for i in 0..n {
        for j in 0..p {
            let (r, f) = (i + 1, j + 1);
            m.add_var(format!("b_{r}_{f}"), VarKind::Binary, 0.0, 1.0, Some(i));
            m.add_var(format!("ble_{r}_{f}"), VarKind::Integer, -wmax, wmax, Some(i));
            m.add_var(format!("bge_{r}_{f}"), VarKind::Integer, -wmax, wmax, Some(i));
        }
    }
    debug_assert_eq!(m.n_vars(), 1 + 4 * p + 3 * n * p);

    let g = m.add_group("budget".into(), ConstraintFamily::Budget);
    let terms = (0..p).map(|j| (layout.alpha(j), 1.0)).collect();
    m.add_row(g, terms, f64::NEG_INFINITY, h.k as f64);

    for j in 0..p {
        let f = j + 1;
        for (tag, w) in [("le", layout.w_le(j)), ("ge", layout.w_ge(j))] {
            let g = m.add_group(format!("link_{tag}_{f}"), ConstraintFamily::Linking);
            m.add_row(g, vec![(w, 1.0), (layout.alpha(j), -wmax)], f64::NEG_INFINITY, 0.0);
            m.add_row(g, vec![(w, 1.0), (layout.alpha(j), wmax)], 0.0, f64::INFINITY);
        }
    }

    let inf = f64::INFINITY;
    for i in 0..n {
        for j in 0..p {
            let (r, f) = (i + 1, j + 1);
            let x = d.value(i, j);
            let span = d.hi()[j] - d.lo()[j];
            let (b, ble, bge) = (layout.b(i, j), layout.beta_le(i, j), layout.beta_ge(i, j));
            let (wle, wge) = (layout.w_le(j), layout.w_ge(j));

            // b=1 ⟹ x ≤ t and b=0 ⟹ x ≥ t, as x - span ≤ t - span·b ≤ x.
            let g = m.add_group(format!("thr_{r}_{f}"), ConstraintFamily::Threshold);
            m.add_row(g, vec![(layout.t(j), 1.0), (b, -span)], x - span, x);

            let fortet: [(&str, Terms, f64, f64); 8] = [
                ("fle1", vec![(ble, 1.0), (b, -wmax)], -inf, 0.0),
                ("fle2", vec![(ble, 1.0), (wle, -1.0), (b, wmax)], -inf, wmax),
                ("fle3", vec![(ble, 1.0), (b, wmax)], 0.0, inf),
                ("fle4", vec![(ble, 1.0), (wle, -1.0), (b, -wmax)], -wmax, inf),
                ("fge1", vec![(bge, 1.0), (b, wmax)], -inf, wmax),
                ("fge2", vec![(bge, 1.0), (wge, -1.0), (b, -wmax)], -inf, 0.0),
                ("fge3", vec![(bge, 1.0), (b, -wmax)], -wmax, inf),
                ("fge4", vec![(bge, 1.0), (wge, -1.0), (b, wmax)], 0.0, inf),
            ];
            for (tag, terms, lo, up) in fortet {
                let g = m.add_group(format!("{tag}_{r}_{f}"), ConstraintFamily::Fortet);
                m.add_row(g, terms, lo, up);
            }
        }
    }

    for i in 0..n {
        let mut terms = vec![(layout.w0(), 1.0)];
        for j in 0..p {
            terms.push((layout.beta_le(i, j), 1.0));
            terms.push((layout.beta_ge(i, j), 1.0));
        }
        m.margins.push(LinExpr { constant: 0.0, terms });
    }
    Ok(m)
}

/// Builds the binary-input formulation with margins `w0 + x_iᵀw`, the
/// sparsity budget and `-wmax α_j ≤ w_j ≤ wmax α_j`.
pub fn build_binary_model(d: &Dataset, h: &Hyperparams) -> Result<MinloModel> {
    h.check(d.p())?;
    for i in 0..d.n() {
        for j in 0..d.p() {
            let v = d.value(i, j);
            if v != 0.0 && v != 1.0 {
                return Err(crate::Error::NonBinaryFeature {
                    feature: d.names()[j].clone(),
                    row: i,
                    value: v,
                });
            }
        }
    }
    let (n, p) = (d.n(), d.p());
    let wmax = h.wmax as f64;
    let layout = Layout::Binary { n, p };
    let mut m = MinloModel::empty(layout, d.labels().to_vec());

    m.add_var("w0".into(), VarKind::Integer, f64::NEG_INFINITY, f64::INFINITY, None);
    for j in 0..p {
        m.add_var(format!("w_{}", j + 1), VarKind::Integer, -wmax, wmax, None);
        m.add_var(format!("alpha_{}", j + 1), VarKind::Binary, 0.0, 1.0, None);
    }

    let g = m.add_group("budget".into(), ConstraintFamily::Budget);
    let terms = (0..p).map(|j| (layout.alpha(j), 1.0)).collect();
    m.add_row(g, terms, f64::NEG_INFINITY, h.k as f64);
    for j in 0..p {
        let f = j + 1;
        let g = m.add_group(format!("link_up_{f}"), ConstraintFamily::Linking);
        m.add_row(
            g,
            vec![(layout.w(j), 1.0), (layout.alpha(j), -wmax)],
            f64::NEG_INFINITY,
            0.0,
        );
        let g = m.add_group(format!("link_lo_{f}"), ConstraintFamily::Linking);
        m.add_row(g, vec![(layout.w(j), 1.0), (layout.alpha(j), wmax)], 0.0, f64::INFINITY);
    }

    for i in 0..n {
        let mut terms = vec![(layout.w0(), 1.0)];
        terms.extend((0..p).filter(|&j| d.value(i, j) == 1.0).map(|j| (layout.w(j), 1.0)));
        m.margins.push(LinExpr { constant: 0.0, terms });
    }
    Ok(m)
}

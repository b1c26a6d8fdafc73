//! Symmetric positive-definite systems with block-arrow sparsity.
//!
//! Variables split into a small dense global part and many independent
//! blocks (one per sample). Every rank-one contribution touches the globals
//! and at most one block, so the matrix is
//!
//! ```text
//! [ B_1           C_1 ]
//! [      ...      ... ]
//! [          B_n  C_n ]
//! [ C_1ᵀ ... C_nᵀ  G  ]
//! ```
//!
//! and is solved through the Schur complement `G - Σ C_iᵀ B_i⁻¹ C_i`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

#[derive(Debug, Clone, Copy)]
enum Pos {
    Global(usize),
    Block(usize, usize),
}

pub(crate) struct BlockArrow {
    pos: Vec<Pos>,
    n_global: usize,
    block_vars: Vec<Vec<usize>>,
    g: DMatrix<f64>,
    b: Vec<DMatrix<f64>>,
    c: Vec<DMatrix<f64>>,
    b_chol: Vec<Cholesky<f64, Dyn>>,
    s_chol: Option<Cholesky<f64, Dyn>>,
}

impl BlockArrow {
    /// `block_of[v]` is the block id of variable `v` (`None` = global).
    /// Block ids need not be contiguous.
    pub fn new(block_of: &[Option<usize>]) -> Self {
        let mut remap = std::collections::BTreeMap::new();
        for b in block_of.iter().flatten() {
            let next = remap.len();
            remap.entry(*b).or_insert(next);
        }
        let mut block_vars = vec![Vec::new(); remap.len()];
        let mut n_global = 0;
        let pos = block_of
            .iter()
            .enumerate()
            .map(|(v, b)| match b {
                None => {
                    n_global += 1;
                    Pos::Global(n_global - 1)
                }
                Some(b) => {
                    let k = remap[b];
                    block_vars[k].push(v);
                    Pos::Block(k, block_vars[k].len() - 1)
                }
            })
            .collect();
        let b = block_vars.iter().map(|vs| DMatrix::zeros(vs.len(), vs.len())).collect();
        let c = block_vars.iter().map(|vs| DMatrix::zeros(vs.len(), n_global)).collect();
        Self {
            pos,
            n_global,
            block_vars,
            g: DMatrix::zeros(n_global, n_global),
            b,
            c,
            b_chol: Vec::new(),
            s_chol: None,
        }
    }

    pub fn clear(&mut self) {
        self.g.fill(0.0);
        self.b.iter_mut().for_each(|m| m.fill(0.0));
        self.c.iter_mut().for_each(|m| m.fill(0.0));
        self.b_chol.clear();
        self.s_chol = None;
    }

    /// Adds `w · e eᵀ` for the sparse vector `e`.
    pub fn add_outer(&mut self, e: &[(usize, f64)], w: f64) {
        for &(va, ca) in e {
            for &(vb, cb) in e {
                let x = w * ca * cb;
                match (self.pos[va], self.pos[vb]) {
                    (Pos::Global(a), Pos::Global(b)) => self.g[(a, b)] += x,
                    (Pos::Block(k, a), Pos::Block(l, b)) => {
                        debug_assert_eq!(k, l, "term couples two blocks");
                        self.b[k][(a, b)] += x;
                    }
                    (Pos::Block(k, a), Pos::Global(b)) => self.c[k][(a, b)] += x,
                    (Pos::Global(_), Pos::Block(..)) => {}
                }
            }
        }
    }

    /// Factors the matrix plus `reg·I`, growing `reg` until every pivot is
    /// positive. Returns the regularization used.
    /// `None` when no finite regularization works (non-finite entries).
    pub fn factor(&mut self, mut reg: f64) -> Option<f64> {
        while reg < 1e12 {
            if let Some(()) = self.try_factor(reg) {
                return Some(reg);
            }
            reg = if reg == 0.0 { 1e-12 } else { reg * 100.0 };
        }
        None
    }

    fn try_factor(&mut self, reg: f64) -> Option<()> {
        self.b_chol.clear();
        let mut s = self.g.clone();
        for i in 0..self.n_global {
            s[(i, i)] += reg;
        }
        for (b, c) in self.b.iter().zip(&self.c) {
            let mut b = b.clone();
            for i in 0..b.nrows() {
                b[(i, i)] += reg;
            }
            let chol = Cholesky::new(b)?;
            if self.n_global > 0 {
                let x = chol.solve(c);
                s -= c.transpose() * x;
            }
            self.b_chol.push(chol);
        }
        self.s_chol = Some(Cholesky::new(s)?);
        Some(())
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let s_chol = self.s_chol.as_ref().expect("factor before solve");
        let mut rg = DVector::from_iterator(
            self.n_global,
            self.pos
                .iter()
                .zip(rhs)
                .filter_map(|(p, &r)| matches!(p, Pos::Global(_)).then_some(r)),
        );
        let local: Vec<DVector<f64>> = self
            .block_vars
            .iter()
            .zip(&self.b_chol)
            .map(|(vs, chol)| chol.solve(&DVector::from_iterator(vs.len(), vs.iter().map(|&v| rhs[v]))))
            .collect();
        for (c, y) in self.c.iter().zip(&local) {
            rg -= c.tr_mul(y);
        }
        let xg = s_chol.solve(&rg);

        let mut out = vec![0.0; rhs.len()];
        for (v, p) in self.pos.iter().enumerate() {
            if let Pos::Global(a) = p {
                out[v] = xg[*a];
            }
        }
        for (k, vs) in self.block_vars.iter().enumerate() {
            let mut r = DVector::from_iterator(vs.len(), vs.iter().map(|&v| rhs[v]));
            r -= &self.c[k] * &xg;
            let xb = self.b_chol[k].solve(&r);
            for (a, &v) in vs.iter().enumerate() {
                out[v] = xb[a];
            }
        }
        out
    }
}

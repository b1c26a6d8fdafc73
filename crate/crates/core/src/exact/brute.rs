use std::time::Instant;

use super::{ExactResult, ExactStatus};
use crate::error::{Error, Result};
use crate::loss::log1p_exp_neg;
use crate::model::{Dataset, Hyperparams, RiskScoreSolution};

pub const BRUTE_MAX_N: usize = 500;
pub const BRUTE_MAX_P: usize = 2;
pub const BRUTE_MAX_K: usize = 2;

/// Largest memo table (entries) used for the decoupled last feature.
const MEMO_LIMIT: usize = 1 << 22;

/// `lo`, the midpoints between consecutive distinct values, and `hi`,
/// sorted and deduplicated.
pub fn candidate_thresholds(column: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut v = column.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut c = Vec::with_capacity(v.len() + 1);
    c.push(lo);
    c.extend(v.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    c.push(hi);
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// Exhaustive search over feature subsets of size `min(k, p)`, candidate
/// thresholds, integer point values in `[-wmax, wmax]` and intercepts in
/// `[-w0max, w0max]`. Refuses instances above the desk-scale limits unless
/// `force` is set.
pub fn brute_force(d: &Dataset, h: &Hyperparams, force: bool) -> Result<ExactResult> {
    let start = Instant::now();
    h.check(d.p())?;
    let (n, p) = (d.n(), d.p());
    if !force && (n > BRUTE_MAX_N || p > BRUTE_MAX_P || h.k > BRUTE_MAX_K) {
        return Err(Error::SizeRefused {
            n,
            p,
            k: h.k,
            max_n: BRUTE_MAX_N,
            max_p: BRUTE_MAX_P,
            max_k: BRUTE_MAX_K,
        });
    }
    let kk = h.k.min(p);

    // Candidate thresholds per feature, with duplicate sample partitions removed.
    let cands: Vec<Vec<(f64, Vec<bool>)>> = (0..p)
        .map(|j| {
            let col = d.column(j);
            let mut out: Vec<(f64, Vec<bool>)> = Vec::new();
            for t in candidate_thresholds(&col, d.lo()[j], d.hi()[j]) {
                let pattern: Vec<bool> = col.iter().map(|&x| x <= t).collect();
                if !out.iter().any(|(_, q)| *q == pattern) {
                    out.push((t, pattern));
                }
            }
            out
        })
        .collect();

    let mut search = CellSearch::new(kk, h);
    let mut best: Option<(f64, RiskScoreSolution)> = None;
    let mut time_to_best = 0.0;
    let mut evaluated = 0usize;
    let n_cells = 1usize << kk;

    for subset in combinations(p, kk) {
        let mut choice = vec![0usize; kk];
        loop {
            let mut pos = vec![0.0; n_cells];
            let mut neg = vec![0.0; n_cells];
            for i in 0..n {
                let cell = (0..kk).fold(0, |c, r| c | (usize::from(cands[subset[r]][choice[r]].1[i]) << r));
                if d.labels()[i] == 1 {
                    pos[cell] += 1.0;
                } else {
                    neg[cell] += 1.0;
                }
            }
            evaluated += 1;
            let (val, w0, w_le, w_ge) = search.minimize(&pos, &neg);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                let mut s = RiskScoreSolution::empty(w0, d.lo(), d.hi());
                for (r, &j) in subset.iter().enumerate() {
                    if w_le[r] != 0 || w_ge[r] != 0 {
                        s.alpha[j] = true;
                        s.t[j] = cands[j][choice[r]].0;
                        s.w_le[j] = w_le[r];
                        s.w_ge[j] = w_ge[r];
                    }
                }
                best = Some((val, s));
                time_to_best = start.elapsed().as_secs_f64();
            }
            // odometer over threshold tuples
            let mut r = 0;
            while r < kk {
                choice[r] += 1;
                if choice[r] < cands[subset[r]].len() {
                    break;
                }
                choice[r] = 0;
                r += 1;
            }
            if r == kk {
                break;
            }
        }
    }

    let (cell_value, best) = best.expect("at least one subset and threshold");
    let objective = best.objective(d);
    debug_assert!((objective - cell_value).abs() <= 1e-9 * (1.0 + objective));
    Ok(ExactResult {
        best,
        objective,
        lower_bound: objective,
        proven_gap: 0.0,
        nodes_or_candidates: evaluated,
        wall_time_s: start.elapsed().as_secs_f64(),
        time_to_best,
        status: ExactStatus::Optimal,
    })
}

/// Subsets of `{0..p}` of size `k` in lexicographic order.
fn combinations(p: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > p {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < p - k + i) else {
            return out;
        };
        cur[i] += 1;
        for l in i + 1..k {
            cur[l] = cur[l - 1] + 1;
        }
    }
}

/// Minimizes the cell-grouped loss over integer weights for fixed cell
/// counts. Cell `c` has bit `r` set when the sample lies on the `≤` side of
/// the `r`-th selected feature. The last feature's two weights touch
/// disjoint cells, so each is minimized on its own (memoized by the vector
/// of prefix scores).
struct CellSearch {
    kk: usize,
    wmax: i64,
    w0max: i64,
    /// `log(1 + e^{-s})` for `s` in `[-smax, smax]`.
    table: Vec<f64>,
    smax: i64,
    prefix_max: i64,
    memo: Option<Memo>,
}

struct Memo {
    radix: usize,
    stamp: Vec<u32>,
    le: Vec<(f64, i64)>,
    ge: Vec<(f64, i64)>,
    generation: u32,
}

impl CellSearch {
    fn new(kk: usize, h: &Hyperparams) -> Self {
        let smax = h.w0max + kk as i64 * h.wmax;
        let table = (-smax..=smax).map(|s| log1p_exp_neg(s as f64)).collect();
        let prefix_max = h.w0max + (kk as i64 - 1).max(0) * h.wmax;
        let radix = (2 * prefix_max + 1) as usize;
        let prefix_cells = 1u32 << kk.saturating_sub(1);
        let memo = radix
            .checked_pow(prefix_cells)
            .filter(|&size| size <= MEMO_LIMIT)
            .map(|size| Memo {
                radix,
                stamp: vec![0; size],
                le: vec![(0.0, 0); size],
                ge: vec![(0.0, 0); size],
                generation: 0,
            });
        Self {
            kk,
            wmax: h.wmax,
            w0max: h.w0max,
            table,
            smax,
            prefix_max,
            memo,
        }
    }

    fn loss(&self, s: i64) -> f64 {
        self.table[(s + self.smax) as usize]
    }

    /// Best weight for one side of the last feature: cells `q | side_bit`.
    fn best_last(&self, pos: &[f64], neg: &[f64], base: &[i64], side_bit: usize) -> (f64, i64) {
        let mut best = (f64::INFINITY, 0);
        for w in -self.wmax..=self.wmax {
            let mut v = 0.0;
            for (q, &b) in base.iter().enumerate() {
                let c = q | side_bit;
                if pos[c] > 0.0 {
                    v += pos[c] * self.loss(b + w);
                }
                if neg[c] > 0.0 {
                    v += neg[c] * self.loss(-(b + w));
                }
            }
            if v < best.0 {
                best = (v, w);
            }
        }
        best
    }

    /// Returns `(objective, w0, w_le, w_ge)` with weights per selected feature.
    fn minimize(&mut self, pos: &[f64], neg: &[f64]) -> (f64, i64, Vec<i64>, Vec<i64>) {
        let kk = self.kk;
        let last_bit = 1usize << (kk - 1);
        let n_prefix = last_bit;
        let n_free = 2 * (kk - 1);
        if let Some(m) = self.memo.as_mut() {
            m.generation = m.generation.wrapping_add(1);
            if m.generation == 0 {
                m.stamp.fill(0);
                m.generation = 1;
            }
        }

        let mut best = (f64::INFINITY, 0, vec![0; kk], vec![0; kk]);
        let mut free = vec![-self.wmax; n_free];
        let mut base = vec![0i64; n_prefix];
        for w0 in -self.w0max..=self.w0max {
            free.iter_mut().for_each(|w| *w = -self.wmax);
            loop {
                // prefix scores: weights are [le_0, ge_0, le_1, ge_1, ...]
                for (q, b) in base.iter_mut().enumerate() {
                    *b = w0
                        + (0..kk - 1)
                            .map(|r| if q >> r & 1 == 1 { free[2 * r] } else { free[2 * r + 1] })
                            .sum::<i64>();
                }
                let ((vle, wle), (vge, wge)) = self.last_feature(pos, neg, &base, last_bit);
                let v = vle + vge;
                if v < best.0 {
                    let mut le: Vec<i64> = (0..kk - 1).map(|r| free[2 * r]).collect();
                    let mut ge: Vec<i64> = (0..kk - 1).map(|r| free[2 * r + 1]).collect();
                    le.push(wle);
                    ge.push(wge);
                    best = (v, w0, le, ge);
                }
                let mut r = 0;
                while r < n_free {
                    free[r] += 1;
                    if free[r] <= self.wmax {
                        break;
                    }
                    free[r] = -self.wmax;
                    r += 1;
                }
                if r == n_free {
                    break;
                }
            }
        }
        best
    }

    fn last_feature(&mut self, pos: &[f64], neg: &[f64], base: &[i64], last_bit: usize) -> ((f64, i64), (f64, i64)) {
        let Some(m) = self.memo.as_ref() else {
            return (
                self.best_last(pos, neg, base, last_bit),
                self.best_last(pos, neg, base, 0),
            );
        };
        let idx = base
            .iter()
            .rev()
            .fold(0usize, |acc, &b| acc * m.radix + (b + self.prefix_max) as usize);
        if m.stamp[idx] != m.generation {
            let le = self.best_last(pos, neg, base, last_bit);
            let ge = self.best_last(pos, neg, base, 0);
            let m = self.memo.as_mut().expect("memo present");
            m.stamp[idx] = m.generation;
            m.le[idx] = le;
            m.ge[idx] = ge;
        }
        let m = self.memo.as_ref().expect("memo present");
        (m.le[idx], m.ge[idx])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn candidate_examples() {
        assert_eq!(candidate_thresholds(&[0.2, 0.8], 0.0, 1.0), vec![0.0, 0.5, 1.0]);
        assert_eq!(candidate_thresholds(&[0.4, 0.4, 0.4], 0.4, 0.4), vec![0.4]);
        let col = [0.9, 0.1, 0.5, 0.3, 0.7];
        let c = candidate_thresholds(&col, 0.0, 1.0);
        assert_eq!(c.len(), 6);
        let patterns: Vec<Vec<bool>> = c.iter().map(|&t| col.iter().map(|&x| x <= t).collect()).collect();
        for a in 0..patterns.len() {
            for b in a + 1..patterns.len() {
                assert_ne!(patterns[a], patterns[b]);
            }
        }
    }

    #[test]
    fn combinations_in_order() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 2), vec![vec![0, 1]]);
        assert_eq!(combinations(3, 1).len(), 3);
    }

    #[test]
    fn single_sample_saturates() {
        let d = Dataset::new(vec![vec![0.3]], vec![1], vec!["x".into()], vec![0.0], vec![1.0]).unwrap();
        let r = brute_force(&d, &Hyperparams::new(1), false).unwrap();
        // log(1+e^{-15}) at 40 digits
        assert!((r.objective - 3.059_022_737_137_205e-7).abs() < 1e-15);
        assert_eq!(r.best.w0, 10);
        assert_eq!(r.status, ExactStatus::Optimal);
    }

    #[test]
    fn all_positive_labels_saturate_the_margin() {
        // Every sample shares the label, so the optimum pushes the margin to
        // w0max + k·wmax; intercept-only models are strictly worse.
        let d = Dataset::new(
            vec![vec![0.1], vec![0.5], vec![0.9]],
            vec![1, 1, 1],
            vec!["x".into()],
            vec![0.0],
            vec![1.0],
        )
        .unwrap();
        let h = Hyperparams::new(1);
        let r = brute_force(&d, &h, false).unwrap();
        assert_eq!(r.best.w0, h.w0max);
        for x in d.rows() {
            assert_eq!(r.best.score(x), h.w0max + h.wmax);
        }
        let intercept_only = RiskScoreSolution::empty(h.w0max, d.lo(), d.hi());
        assert!(r.objective < intercept_only.objective(&d));
    }

    #[test]
    fn refuses_large_instances_unless_forced() {
        let g = generate(20, 3, 1).unwrap();
        let h = Hyperparams::new(1);
        assert!(matches!(
            brute_force(&g.dataset, &h, false),
            Err(Error::SizeRefused { p: 3, .. })
        ));
        assert!(brute_force(&g.dataset, &h, true).is_ok());
    }

    #[test]
    fn cell_grouping_matches_direct_loss_and_beats_random_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..4 {
            let g = generate(30, 2, seed).unwrap();
            let d = &g.dataset;
            let h = Hyperparams::new(2);
            let r = brute_force(d, &h, false).unwrap();
            assert!(r.best.validate(d, &h).is_feasible());
            assert!(r.objective <= g.reference_objective + 1e-12);
            for _ in 0..200 {
                let mut s = RiskScoreSolution::empty(rng.gen_range(-10..=10), d.lo(), d.hi());
                for j in 0..2 {
                    let c = candidate_thresholds(&d.column(j), 0.0, 1.0);
                    s.alpha[j] = true;
                    s.t[j] = c[rng.gen_range(0..c.len())];
                    s.w_le[j] = rng.gen_range(-5..=5);
                    s.w_ge[j] = rng.gen_range(-5..=5);
                }
                assert!(r.objective <= s.objective(d) + 1e-12);
            }
        }
    }

    #[test]
    fn monotone_in_k() {
        let g = generate(40, 2, 5).unwrap();
        let a = brute_force(&g.dataset, &Hyperparams::new(1), false).unwrap();
        let b = brute_force(&g.dataset, &Hyperparams::new(2), false).unwrap();
        assert!(b.objective <= a.objective + 1e-12);
    }
}

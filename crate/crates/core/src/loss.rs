//! Logistic loss, its margin gradient, the sigmoid, and the training AUC.
//!
//! All functions are pure and branch on the sign of their argument so that
//! margins of a few hundred (the largest a score with `p` features and box
//! `wmax` can reach is `w0max + 2 p wmax`) never overflow `exp`.

use crate::error::{Error, Result};

/// `1 / (1 + exp(-z))`, evaluated without overflow for any finite `z`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(-u))` in the stable form `max(0, -u) + log1p(exp(-|u|))`.
pub fn log1p_exp_neg(u: f64) -> f64 {
    (-u).max(0.0) + (-u.abs()).exp().ln_1p()
}

/// Per-sample margins paired with their ±1 labels.
#[derive(Debug, Clone, Copy)]
pub struct MarginVector<'a> {
    margins: &'a [f64],
    labels: &'a [i8],
}

impl<'a> MarginVector<'a> {
    pub fn new(margins: &'a [f64], labels: &'a [i8]) -> Result<Self> {
        if margins.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} margins but {} labels",
                margins.len(),
                labels.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::InvalidDataset(format!(
                "label {} at position {i} is not ±1",
                labels[i]
            )));
        }
        Ok(Self { margins, labels })
    }

    pub fn len(&self) -> usize {
        self.margins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.margins.is_empty()
    }

    pub fn margins(&self) -> &'a [f64] {
        self.margins
    }

    pub fn labels(&self) -> &'a [i8] {
        self.labels
    }
}

/// `Σ_i log(1 + exp(-y_i m_i))`.
pub fn logistic_loss(mv: MarginVector<'_>) -> f64 {
    mv.margins
        .iter()
        .zip(mv.labels)
        .map(|(&m, &y)| log1p_exp_neg(f64::from(y) * m))
        .sum()
}

/// Gradient of [`logistic_loss`] with respect to each margin: `-y_i σ(-y_i m_i)`.
pub fn loss_gradient(mv: MarginVector<'_>) -> Vec<f64> {
    mv.margins
        .iter()
        .zip(mv.labels)
        .map(|(&m, &y)| {
            let y = f64::from(y);
            -y * sigmoid(-y * m)
        })
        .collect()
}

/// Area under the ROC curve via the Mann–Whitney rank-sum statistic.
///
/// Tied scores receive their average rank, so a tied positive/negative pair
/// counts one half. The computation is carried in doubled integer ranks and
/// is exact for any `N` below 2^26.
pub fn auc(scores: &[f64], labels: &[i8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidDataset("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum over positives of twice their (1-based, tie-averaged) rank.
    let mut twice_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share the average (start+1+end)/2
        let twice_avg = (start + 1 + end) as u64;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i] == 1).count() as u64;
        twice_rank_sum += twice_avg * pos_in_group;
        start = end;
    }
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pairwise_auc(scores: &[f64], labels: &[i8]) -> f64 {
        let mut twice = 0u64;
        let (mut np, mut nn) = (0u64, 0u64);
        for (i, &yi) in labels.iter().enumerate() {
            if yi == 1 {
                np += 1;
            } else {
                nn += 1;
            }
            if yi != 1 {
                continue;
            }
            for (j, &yj) in labels.iter().enumerate() {
                if yj == -1 {
                    if scores[i] > scores[j] {
                        twice += 2;
                    } else if scores[i] == scores[j] {
                        twice += 1;
                    }
                }
            }
        }
        twice as f64 / (2 * np * nn) as f64
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        let tiny = sigmoid(-745.0);
        assert!((0.0..1e-300).contains(&tiny));
        let big = sigmoid(1000.0);
        assert_eq!(big, 1.0);
        // 1/(1+e^-3) evaluated at 40 digits
        assert_relative_eq!(sigmoid(3.0), 0.952_574_126_822_433_2, epsilon = 1e-15);
    }

    #[test]
    fn loss_examples() {
        let zeros = vec![0.0; 200];
        let labels: Vec<i8> = (0..200).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let l = logistic_loss(MarginVector::new(&zeros, &labels).unwrap());
        assert_relative_eq!(l, 200.0 * std::f64::consts::LN_2, epsilon = 1e-10);
        assert!((l - 138.629436).abs() < 1e-6);

        let big = [1e6];
        let l = logistic_loss(MarginVector::new(&big, &[1]).unwrap());
        assert_eq!(l, 0.0);

        // log(1+e^-1) + log(1+e) + log 2, summed at 40 digits
        let l = logistic_loss(MarginVector::new(&[1.0, -1.0, 0.0], &[1, 1, -1]).unwrap());
        assert_relative_eq!(l, 2.319_670_555_596_391, epsilon = 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let g = loss_gradient(MarginVector::new(&[0.0, 0.0], &[1, -1]).unwrap());
        assert_eq!(g, vec![-0.5, 0.5]);
        let g = loss_gradient(MarginVector::new(&[800.0], &[1]).unwrap());
        assert!(g[0].abs() < 1e-300);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(MarginVector::new(&[0.0], &[]).is_err());
        assert!(MarginVector::new(&[0.0], &[0]).is_err());
        assert!(auc(&[0.0], &[1, -1]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[-1, -1, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 6], &[-1, 1, -1, 1, 1, -1]).unwrap(), 0.5);
        assert!(matches!(auc(&[0.1, 0.2], &[1, 1]), Err(Error::SingleClass)));
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise(raw in proptest::collection::vec((0u8..6, any::<bool>()), 2..40)) {
            let scores: Vec<f64> = raw.iter().map(|(s, _)| f64::from(*s) * 0.5).collect();
            let mut labels: Vec<i8> = raw.iter().map(|(_, y)| if *y { 1 } else { -1 }).collect();
            labels[0] = 1;
            labels[1] = -1;
            prop_assert_eq!(auc(&scores, &labels).unwrap(), pairwise_auc(&scores, &labels));
        }

        #[test]
        fn auc_invariant_under_positive_scaling(
            raw in proptest::collection::vec((-20i32..20, any::<bool>()), 2..30),
            scale in 0.01f64..100.0,
        ) {
            let scores: Vec<f64> = raw.iter().map(|(s, _)| f64::from(*s)).collect();
            let mut labels: Vec<i8> = raw.iter().map(|(_, y)| if *y { 1 } else { -1 }).collect();
            labels[0] = 1;
            labels[1] = -1;
            let scaled: Vec<f64> = scores.iter().map(|s| s * scale).collect();
            prop_assert_eq!(auc(&scores, &labels).unwrap(), auc(&scaled, &labels).unwrap());
        }

        #[test]
        fn sigmoid_symmetry(z in -700.0f64..700.0) {
            prop_assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn loss_is_convex_and_nonnegative(
            a in proptest::collection::vec(-30.0f64..30.0, 5),
            b in proptest::collection::vec(-30.0f64..30.0, 5),
            lambda in 0.0f64..1.0,
        ) {
            let labels = [1i8, -1, 1, 1, -1];
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
            let la = logistic_loss(MarginVector::new(&a, &labels).unwrap());
            let lb = logistic_loss(MarginVector::new(&b, &labels).unwrap());
            let lm = logistic_loss(MarginVector::new(&mix, &labels).unwrap());
            prop_assert!(la >= 0.0 && lb >= 0.0);
            prop_assert!(lm <= lambda * la + (1.0 - lambda) * lb + 1e-9);
        }

        #[test]
        fn gradient_matches_finite_differences(m in proptest::collection::vec(-8.0f64..8.0, 5)) {
            let labels = [1i8, -1, -1, 1, 1];
            let g = loss_gradient(MarginVector::new(&m, &labels).unwrap());
            let h = 1e-5;
            for i in 0..m.len() {
                let mut up = m.clone();
                let mut dn = m.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (logistic_loss(MarginVector::new(&up, &labels).unwrap())
                    - logistic_loss(MarginVector::new(&dn, &labels).unwrap())) / (2.0 * h);
                prop_assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1e-3));
            }
        }
    }
}

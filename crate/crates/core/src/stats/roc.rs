//! ROC curves, Mann–Whitney AUC and DeLong's paired AUC comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::dist::normal_tails;
use crate::stats::Tail;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores ≥ threshold are called positive; the first point uses +∞.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// `fpr,tpr,threshold` CSV for plotting tools.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr,threshold\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.fpr, p.tpr, p.threshold));
        }
        out
    }
}

fn class_counts(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if let Some(v) = scores.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("score {v}")));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidInput("labels must be 0 or 1".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// ROC curve by threshold sweep plus the Mann–Whitney AUC (ties count ½).
///
/// Higher scores must indicate the positive class.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<(RocCurve, f64)> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    // twice the Mann–Whitney U, kept integral so the AUC is exact
    let mut u2: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut dtp, mut dfp) = (0usize, 0usize);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                dtp += 1;
            } else {
                dfp += 1;
            }
            i += 1;
        }
        // positives in this block beat the negatives not yet passed and tie with dfp
        u2 += (dtp * (2 * (neg - fp - dfp) + dfp)) as u64;
        tp += dtp;
        fp += dfp;
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: s,
        });
    }
    let auc = u2 as f64 / (2 * pos * neg) as f64;
    Ok((RocCurve { points }, auc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeLongResult {
    pub auc_a: f64,
    pub auc_b: f64,
    /// Variance of `auc_a − auc_b`.
    pub variance: f64,
    pub z: f64,
    pub p_value: f64,
    pub tail: Tail,
}

/// Structural components: for each positive, the share of negatives it
/// outranks (ties ½), and for each negative, the share of positives that
/// outrank it. Also returns the AUC from the exact pair count.
fn placements(scores: &[f64], labels: &[u8]) -> (Vec<f64>, Vec<f64>, f64) {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l == 1).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l == 0).map(|(s, _)| *s).collect();
    let (m, n) = (pos.len(), neg.len());
    let mut v10 = vec![0u64; m];
    let mut v01 = vec![0u64; n];
    for (i, &x) in pos.iter().enumerate() {
        for (j, &y) in neg.iter().enumerate() {
            let w = if x > y {
                2
            } else if x == y {
                1
            } else {
                0
            };
            v10[i] += w;
            v01[j] += w;
        }
    }
    let total: u64 = v10.iter().sum();
    let auc = total as f64 / (2 * m * n) as f64;
    (
        v10.iter().map(|&c| c as f64 / (2 * n) as f64).collect(),
        v01.iter().map(|&c| c as f64 / (2 * m) as f64).collect(),
        auc,
    )
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len();
    if k < 2 {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / k as f64;
    let mb = b.iter().sum::<f64>() / k as f64;
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (k - 1) as f64
}

/// Paired DeLong test of `AUC(a) − AUC(b)` on the same subjects.
///
/// `tail` gives the alternative: [`Tail::OneSidedGreater`] tests whether
/// score `a` has the larger AUC.
pub fn delong_compare(scores_a: &[f64], scores_b: &[f64], labels: &[u8], tail: Tail) -> Result<DeLongResult> {
    let (m, n) = class_counts(scores_a, labels)?;
    class_counts(scores_b, labels)?;
    let (a10, a01, auc_a) = placements(scores_a, labels);
    let (b10, b01, auc_b) = placements(scores_b, labels);

    let d10: Vec<f64> = a10.iter().zip(&b10).map(|(x, y)| x - y).collect();
    let d01: Vec<f64> = a01.iter().zip(&b01).map(|(x, y)| x - y).collect();
    let variance = (covariance(&d10, &d10) / m as f64 + covariance(&d01, &d01) / n as f64).max(0.0);
    let diff = auc_a - auc_b;

    let z = if variance == 0.0 {
        if diff != 0.0 {
            return Err(Error::Degenerate(format!(
                "AUC difference {diff} with zero variance"
            )));
        }
        0.0
    } else {
        diff / variance.sqrt()
    };
    let (lower, upper) = normal_tails(z);
    Ok(DeLongResult {
        auc_a,
        auc_b,
        variance,
        z,
        p_value: tail.p_value(upper, lower),
        tail,
    })
}

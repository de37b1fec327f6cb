//! Student's t-tests: pooled two-sample, from summaries, Welch, and paired.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::dist::t_tails;
use crate::stats::Tail;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub tail: Tail,
}

fn finish(diff: f64, se: f64, df: f64, tail: Tail) -> TTestResult {
    // zero spread: equal means give t = 0, unequal means an infinite t
    let t = if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    } else {
        diff / se
    };
    let (lower, upper) = t_tails(t, df);
    TTestResult {
        t,
        df,
        p_value: tail.p_value(upper, lower),
        tail,
    }
}

fn summarize(x: &[f64]) -> Result<(usize, f64, f64)> {
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "t-test sample needs at least 2 values, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("t-test sample".into()));
    }
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((n, mean, var.sqrt()))
}

fn pooled(n1: usize, m1: f64, sd1: f64, n2: usize, m2: f64, sd2: f64, tail: Tail) -> TTestResult {
    let df = (n1 + n2 - 2) as f64;
    let sp2 = ((n1 - 1) as f64 * sd1 * sd1 + (n2 - 1) as f64 * sd2 * sd2) / df;
    let se = (sp2 * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    finish(m1 - m2, se, df, tail)
}

/// Pooled-variance Student's t-test of `mean(a) − mean(b)`, df = n_a + n_b − 2.
pub fn two_sample_ttest(a: &[f64], b: &[f64], tail: Tail) -> Result<TTestResult> {
    let (n1, m1, s1) = summarize(a)?;
    let (n2, m2, s2) = summarize(b)?;
    Ok(pooled(n1, m1, s1, n2, m2, s2, tail))
}

/// The pooled test computed from group sizes, means and SDs only.
pub fn ttest_from_summary(
    n1: usize,
    mean1: f64,
    sd1: f64,
    n2: usize,
    mean2: f64,
    sd2: f64,
    tail: Tail,
) -> Result<TTestResult> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::InvalidInput(format!("group sizes must be >= 2, got {n1} and {n2}")));
    }
    if !(sd1 > 0.0) || !(sd2 > 0.0) || !mean1.is_finite() || !mean2.is_finite() {
        return Err(Error::InvalidInput("SDs must be positive and means finite".into()));
    }
    Ok(pooled(n1, mean1, sd1, n2, mean2, sd2, tail))
}

/// Welch's unequal-variance test, for sensitivity checks against the pooled test.
pub fn welch_ttest(a: &[f64], b: &[f64], tail: Tail) -> Result<TTestResult> {
    let (n1, m1, s1) = summarize(a)?;
    let (n2, m2, s2) = summarize(b)?;
    let v1 = s1 * s1 / n1 as f64;
    let v2 = s2 * s2 / n2 as f64;
    let se = (v1 + v2).sqrt();
    let df = if se == 0.0 {
        (n1 + n2 - 2) as f64
    } else {
        (v1 + v2).powi(2) / (v1 * v1 / (n1 - 1) as f64 + v2 * v2 / (n2 - 1) as f64)
    };
    Ok(finish(m1 - m2, se, df, tail))
}

/// Paired t-test on `a[i] − b[i]` with df = n − 1.
///
/// Constant differences have zero spread: a zero mean gives t = 0 and a
/// nonzero mean an infinite t.
pub fn paired_one_sided_ttest(a: &[f64], b: &[f64], tail: Tail) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (n, mean, sd) = summarize(&d)?;
    Ok(finish(mean, sd / (n as f64).sqrt(), (n - 1) as f64, tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = two_sample_ttest(&a, &a, Tail::TwoSided).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = ttest_from_summary(10, 5.0, 2.0, 12, 5.0, 2.0, Tail::TwoSided).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn shifted_tight_samples() {
        let a: Vec<f64> = (0..200).map(|i| 10.0 + 1e-3 * (i % 7) as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| v - 1.0).collect();
        let r = two_sample_ttest(&a, &b, Tail::OneSidedGreater).unwrap();
        assert!(r.p_value < 1e-12);
    }

    #[test]
    fn zero_variance_conventions() {
        let r = two_sample_ttest(&[2.0, 2.0], &[2.0, 2.0], Tail::TwoSided).unwrap();
        assert_eq!((r.t, r.p_value), (0.0, 1.0));
        let r = two_sample_ttest(&[3.0, 3.0], &[2.0, 2.0], Tail::OneSidedGreater).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(ttest_from_summary(1, 0.0, 1.0, 5, 0.0, 1.0, Tail::TwoSided).is_err());
        assert!(ttest_from_summary(5, 0.0, 0.0, 5, 0.0, 1.0, Tail::TwoSided).is_err());
    }

    #[test]
    fn two_sided_is_twice_smaller_tail() {
        let a = [1.0, 2.5, 3.1, 4.4, 2.2];
        let b = [0.5, 1.9, 2.0, 1.1];
        let g = two_sample_ttest(&a, &b, Tail::OneSidedGreater).unwrap().p_value;
        let t = two_sample_ttest(&a, &b, Tail::TwoSided).unwrap().p_value;
        assert!((t - 2.0 * g.min(1.0 - g)).abs() < 1e-14);
        let w = welch_ttest(&a, &b, Tail::TwoSided).unwrap();
        assert!(w.df < 7.0 && w.p_value > 0.0);
    }

    #[test]
    fn paired_examples() {
        let a = [0.7, 0.72, 0.69, 0.75];
        let r = paired_one_sided_ttest(&a, &a, Tail::OneSidedGreater).unwrap();
        assert_eq!(r.p_value, 0.5);
        let b: Vec<f64> = a.iter().map(|v| v - 0.01).collect();
        let r = paired_one_sided_ttest(&a, &b, Tail::OneSidedGreater).unwrap();
        assert!(r.p_value < 1e-10);
        assert!(paired_one_sided_ttest(&a, &b[..3], Tail::OneSidedGreater).is_err());
    }
}

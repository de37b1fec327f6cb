//! Distribution functions: Student's t and chi-squared from `statrs`, the
//! normal from `libm::erfc` (statrs' normal CDF drifts by ~1e-12 near the 5% tails).

use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

/// P(T ≤ t) and P(T ≥ t) for Student's t with `df` degrees of freedom.
pub fn t_tails(t: f64, df: f64) -> (f64, f64) {
    if t.is_infinite() {
        return if t > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (dist.cdf(t), dist.sf(t))
}

/// P(Z ≤ z) and P(Z ≥ z) for the standard normal.
pub fn normal_tails(z: f64) -> (f64, f64) {
    if z.is_infinite() {
        return if z > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    let lower = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    let upper = 0.5 * libm::erfc(z / std::f64::consts::SQRT_2);
    (lower, upper)
}

/// Two-sided Wald p-value for a z statistic.
pub fn wald_p(z: f64) -> f64 {
    if z.is_nan() {
        return 1.0;
    }
    (2.0 * normal_tails(-z.abs()).0).min(1.0)
}

/// Upper-tail probability of a chi-squared statistic.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("df > 0").sf(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tails_sum_to_one() {
        for &t in &[-3.0, -0.5, 0.0, 1.2, 4.0] {
            let (lo, hi) = t_tails(t, 12.0);
            assert!((lo + hi - 1.0).abs() < 1e-12);
        }
        assert_eq!(t_tails(0.0, 5.0).0, 0.5);
        // Φ(1.959963984540054) = 0.975
        assert!((normal_tails(1.959963984540054).0 - 0.975).abs() < 1e-12);
        assert!((wald_p(1.959963984540054) - 0.05).abs() < 1e-12);
        // chi2(1) upper tail at 3.841458820694124 = 0.05
        assert!((chi2_sf(3.841458820694124, 1.0) - 0.05).abs() < 1e-10);
    }
}

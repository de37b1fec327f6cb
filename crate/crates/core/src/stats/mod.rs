//! Statistical engine: regression, PCA risk index, logistic fits, t-tests and ROC analysis.

pub mod dist;
pub mod linear;
pub mod logistic;
pub mod pca;
pub mod roc;
pub mod ttest;

use serde::{Deserialize, Serialize};

pub use linear::{fit_linear_model, screen_and_select, LinearModelFit, ScreeningData, Term};
pub use logistic::{fit_logistic, LogisticFit};
pub use pca::{fit_pca, select_significant_pcs, PcSignificance, PcaModel};
pub use roc::{delong_compare, roc_auc, DeLongResult, RocCurve, RocPoint};
pub use ttest::{paired_one_sided_ttest, ttest_from_summary, two_sample_ttest, welch_ttest, TTestResult};

/// Alternative hypothesis for a test on `a − b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    TwoSided,
    /// H1: a > b.
    OneSidedGreater,
    /// H1: a < b.
    OneSidedLess,
}

impl Tail {
    /// p-value for a statistic whose upper-tail probability is `upper`
    /// and lower-tail probability is `lower`.
    pub(crate) fn p_value(self, upper: f64, lower: f64) -> f64 {
        let p = match self {
            Tail::OneSidedGreater => upper,
            Tail::OneSidedLess => lower,
            Tail::TwoSided => 2.0 * upper.min(lower),
        };
        p.clamp(0.0, 1.0)
    }
}

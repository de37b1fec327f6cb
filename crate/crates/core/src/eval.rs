//! Evaluation protocols: stratified splits, repeated leave-group-out CV,
//! paired resampling comparisons and the FRAX benchmark.
//!
//! All randomness flows through [`crate::seed::stream`] keyed by repeat and
//! attempt index, so results do not depend on thread count or scheduling.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierKind, ClassifierSpec, TrainedModel};
use crate::datamodel::{build_feature_matrix, Cohort, FeParam, FeatureSet, Stratum};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::pca::{fit_fe9_pca, PcaModel};
use crate::stats::{delong_compare, paired_one_sided_ttest, roc_auc, DeLongResult, RocCurve, Tail};

/// Stream coordinate reserved for the top-level train/test split.
const SPLIT_STREAM: u64 = u64::MAX;
/// Stream coordinate used to derive the resampling seed from the base seed.
const RESAMPLE_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub train_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.75,
            repeats: 25,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidInput("repeats must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResampleConfig {
    pub resamples: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        Self {
            resamples: 1000,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

impl ResampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resamples < 2 {
            return Err(Error::InvalidInput(format!("resamples must be >= 2, got {}", self.resamples)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Where the PC1 projection is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaMode {
    /// Refit on the training part of every split.
    #[default]
    FoldInternal,
    /// Fit once on the whole stratum and reuse in every split. Held-out rows
    /// leak into the projection.
    WholeSample,
}

fn class_indices(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        out[usize::from(l == 1)].push(i);
    }
    out
}

/// Stratified split of row indices. Each class contributes
/// `round(fraction * n_class)` training rows, kept within `1..n_class`.
/// Both index lists are returned in ascending order.
pub fn split_indices(labels: &[u8], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    let mut rng = seed::stream(seed, 0, 0);
    split_with(labels, fraction, &mut rng)
}

fn split_with(labels: &[u8], fraction: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (class, mut members) in class_indices(labels).into_iter().enumerate() {
        let n = members.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "class {class} has {n} members, a stratified split needs at least 2"
            )));
        }
        let k = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
        members.shuffle(rng);
        train_idx.extend_from_slice(&members[..k]);
        test_idx.extend_from_slice(&members[k..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((train_idx, test_idx))
}

/// Stratified train/test split of a cohort, preserving file order.
pub fn stratified_split(cohort: &Cohort, fraction: f64, seed: u64) -> Result<(Cohort, Cohort)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    let mut rng = seed::stream(seed, SPLIT_STREAM, 0);
    let (a, b) = split_with(&cohort.labels(), fraction, &mut rng)?;
    Ok((cohort.subset(&a), cohort.subset(&b)))
}

fn both_classes(labels: &[u8]) -> bool {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    pos > 0 && pos < labels.len()
}

/// Split for repeat `r`: attempt 0, then one redraw if either side is single-class.
fn repeat_split(labels: &[u8], fraction: f64, base: u64, r: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    for attempt in 0..2u64 {
        let mut rng = seed::stream(base, r as u64, attempt);
        let (a, b) = split_with(labels, fraction, &mut rng)?;
        let ya: Vec<u8> = a.iter().map(|&i| labels[i]).collect();
        let yb: Vec<u8> = b.iter().map(|&i| labels[i]).collect();
        if both_classes(&ya) && both_classes(&yb) {
            return Ok((a, b));
        }
    }
    Err(Error::Degenerate(format!("repeat {r} produced a single-class split twice")))
}

fn require_class_sizes(labels: &[u8], min: usize) -> Result<()> {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos < min || neg < min {
        return Err(Error::InvalidInput(format!(
            "each class needs at least {min} members, got {pos} cases and {neg} controls"
        )));
    }
    Ok(())
}

/// A fitted feature pipeline: optional PC1 projection plus a classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub feature_set: FeatureSet,
    pub stratum: Stratum,
    pub pca: Option<PcaModel>,
    pub model: TrainedModel,
}

/// PLS components are capped at the feature count.
fn effective_spec(spec: &ClassifierSpec, features: usize) -> ClassifierSpec {
    let mut s = *spec;
    if s.kind == ClassifierKind::Pls {
        s.components = s.components.min(features);
    }
    s
}

/// Fits `feature_set` with `spec` on `train`. With `fixed_pca` the projection
/// is reused instead of refitted.
pub fn fit_pipeline(
    train_cohort: &Cohort,
    feature_set: FeatureSet,
    stratum: Stratum,
    spec: &ClassifierSpec,
    fixed_pca: Option<&PcaModel>,
) -> Result<Pipeline> {
    let sub = train_cohort.stratum(stratum);
    let pca = if feature_set.needs_pca() {
        Some(match fixed_pca {
            Some(p) => p.clone(),
            None => fit_fe9_pca(&sub)?,
        })
    } else {
        None
    };
    let fm = build_feature_matrix(&sub, feature_set, stratum, pca.as_ref())?;
    let spec = effective_spec(spec, fm.x.ncols());
    let model = train(&spec, &fm.x, &fm.labels, &fm.columns)?;
    Ok(Pipeline {
        feature_set,
        stratum,
        pca,
        model,
    })
}

impl Pipeline {
    /// Fracture scores for the members of `cohort` in this pipeline's stratum.
    pub fn score(&self, cohort: &Cohort) -> Result<Vec<f64>> {
        let fm = build_feature_matrix(cohort, self.feature_set, self.stratum, self.pca.as_ref())?;
        self.model.predict_scores(&fm.x)
    }

    pub fn auc(&self, cohort: &Cohort) -> Result<f64> {
        let scores = self.score(cohort)?;
        Ok(roc_auc(&scores, &cohort.stratum(self.stratum).labels())?.1)
    }
}

/// Repeated stratified leave-group-out CV on `train_cohort`, one AUC per repeat.
pub fn run_lgocv(
    train_cohort: &Cohort,
    feature_set: FeatureSet,
    stratum: Stratum,
    spec: &ClassifierSpec,
    cv: &CvConfig,
    fixed_pca: Option<&PcaModel>,
) -> Result<Vec<f64>> {
    cv.validate()?;
    let sub = train_cohort.stratum(stratum);
    let labels = sub.labels();
    require_class_sizes(&labels, 4)?;
    (0..cv.repeats)
        .into_par_iter()
        .map(|r| {
            let (fit_idx, held_idx) = repeat_split(&labels, cv.train_fraction, cv.seed, r)?;
            let p = fit_pipeline(&sub.subset(&fit_idx), feature_set, stratum, spec, fixed_pca)?;
            p.auc(&sub.subset(&held_idx))
        })
        .collect()
}

/// One feature set and classifier evaluated together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub feature_set: FeatureSet,
    pub classifier: ClassifierSpec,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}/{}", self.feature_set, self.classifier.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub a: usize,
    pub b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `None` when the differences are constant and nonzero.
    pub t: Option<f64>,
    pub df: f64,
    /// One-sided, alternative `mean_a > mean_b`.
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResampleOutcome {
    /// `aucs[cell][resample]`.
    pub aucs: Vec<Vec<f64>>,
    pub comparisons: Vec<PairedComparison>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

pub fn paired_comparison(aucs: &[Vec<f64>], a: usize, b: usize) -> Result<PairedComparison> {
    let n = aucs.len();
    if a >= n || b >= n {
        return Err(Error::InvalidInput(format!("comparison ({a}, {b}) references a missing cell")));
    }
    let t = paired_one_sided_ttest(&aucs[a], &aucs[b], Tail::OneSidedGreater)?;
    Ok(PairedComparison {
        a,
        b,
        mean_a: mean_sd(&aucs[a]).0,
        mean_b: mean_sd(&aucs[b]).0,
        t: t.t.is_finite().then_some(t.t),
        df: t.df,
        p_value: t.p_value,
    })
}

/// Stratified resampling shared by every cell, then paired one-sided t-tests
/// for each `(a, b)` in `comparisons`.
pub fn run_resample_comparison(
    cohort: &Cohort,
    cells: &[Cell],
    stratum: Stratum,
    config: &ResampleConfig,
    fixed_pca: Option<&PcaModel>,
    comparisons: &[(usize, usize)],
) -> Result<ResampleOutcome> {
    config.validate()?;
    if cells.is_empty() {
        return Err(Error::InvalidInput("no cells to evaluate".into()));
    }
    let sub = cohort.stratum(stratum);
    let labels = sub.labels();
    require_class_sizes(&labels, 4)?;
    let needs_pca = cells.iter().any(|c| c.feature_set.needs_pca());
    let per_resample: Vec<Vec<f64>> = (0..config.resamples)
        .into_par_iter()
        .map(|r| {
            let (fit_idx, held_idx) = repeat_split(&labels, config.train_fraction, config.seed, r)?;
            let fit = sub.subset(&fit_idx);
            let held = sub.subset(&held_idx);
            let fold_pca = match (needs_pca, fixed_pca) {
                (true, None) => Some(fit_fe9_pca(&fit)?),
                (_, Some(p)) => Some(p.clone()),
                (false, None) => None,
            };
            cells
                .iter()
                .map(|c| fit_pipeline(&fit, c.feature_set, stratum, &c.classifier, fold_pca.as_ref())?.auc(&held))
                .collect()
        })
        .collect::<Result<_>>()?;
    let aucs: Vec<Vec<f64>> = (0..cells.len())
        .map(|c| per_resample.iter().map(|row| row[c]).collect())
        .collect();
    let comparisons = comparisons
        .iter()
        .map(|&(a, b)| paired_comparison(&aucs, a, b))
        .collect::<Result<_>>()?;
    Ok(ResampleOutcome { aucs, comparisons })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FraxComparison {
    pub n: usize,
    pub model_auc: f64,
    pub frax_auc: f64,
    pub delong: DeLongResult,
    #[serde(skip)]
    pub model_roc: Option<RocCurve>,
    #[serde(skip)]
    pub frax_roc: Option<RocCurve>,
}

/// DeLong comparison of `scores` against the cohort's `frax_prob` column on
/// the same subjects. `tail` is the alternative for `AUC(model) − AUC(FRAX)`.
pub fn compare_with_frax(cohort: &Cohort, scores: &[f64], tail: Tail) -> Result<FraxComparison> {
    if scores.len() != cohort.len() {
        return Err(Error::DimensionMismatch {
            expected: cohort.len(),
            got: scores.len(),
        });
    }
    let frax: Vec<f64> = cohort
        .records
        .iter()
        .map(|r| r.frax_prob.ok_or_else(|| Error::MissingColumn("frax_prob".into())))
        .collect::<Result<_>>()?;
    let labels = cohort.labels();
    let (model_roc, model_auc) = roc_auc(scores, &labels)?;
    let (frax_roc, frax_auc) = roc_auc(&frax, &labels)?;
    let delong = delong_compare(scores, &frax, &labels, tail)?;
    Ok(FraxComparison {
        n: cohort.len(),
        model_auc,
        frax_auc,
        delong,
        model_roc: Some(model_roc),
        frax_roc: Some(frax_roc),
    })
}

/// The default feature-set panel: aBMD with covariates, the PC1 index, all
/// nine FE parameters, and each FE parameter alone.
pub fn default_feature_sets() -> Vec<FeatureSet> {
    let mut v = vec![FeatureSet::AbmdCov, FeatureSet::Pc1AbmdCov, FeatureSet::Fe9AbmdCov];
    v.extend(FeParam::fe9().into_iter().map(FeatureSet::SingleFeAbmdCov));
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub seed: u64,
    pub strata: Vec<Stratum>,
    pub feature_sets: Vec<FeatureSet>,
    pub classifiers: Vec<ClassifierSpec>,
    /// Training share of the top-level train/test split.
    pub split_fraction: f64,
    pub cv: CvConfig,
    pub resample: ResampleConfig,
    pub pca_mode: PcaMode,
}

impl EvalConfig {
    /// Full protocol with sub-seeds derived from `seed`.
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            strata: Stratum::ALL.to_vec(),
            feature_sets: default_feature_sets(),
            classifiers: ClassifierKind::ALL.map(ClassifierSpec::new).to_vec(),
            split_fraction: 0.8,
            cv: CvConfig { seed, ..CvConfig::default() },
            resample: ResampleConfig {
                seed: seed::mix(seed, RESAMPLE_STREAM, 0),
                ..ResampleConfig::default()
            },
            pca_mode: PcaMode::FoldInternal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cv.validate()?;
        self.resample.validate()?;
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "split fraction must lie in (0, 1), got {}",
                self.split_fraction
            )));
        }
        if self.strata.is_empty() || self.feature_sets.is_empty() || self.classifiers.is_empty() {
            return Err(Error::InvalidInput("strata, feature sets and classifiers must be non-empty".into()));
        }
        for c in &self.classifiers {
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucSummary {
    pub mean: f64,
    pub sd: f64,
    pub aucs: Vec<f64>,
}

impl AucSummary {
    fn new(aucs: Vec<f64>) -> Self {
        let (mean, sd) = mean_sd(&aucs);
        Self { mean, sd, aucs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub stratum: Stratum,
    pub feature_set: FeatureSet,
    pub classifier: ClassifierKind,
    /// Repeated CV on the training split.
    pub lgocv: AucSummary,
    /// Model fitted on the training split, scored on the test split.
    pub test_auc: f64,
    /// Paired resampling on the whole stratum.
    pub resample: AucSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub stratum: Stratum,
    pub classifier: ClassifierKind,
    pub a: FeatureSet,
    pub b: FeatureSet,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: Option<f64>,
    pub df: f64,
    /// One-sided, alternative `mean_a > mean_b`.
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub cells: Vec<CellReport>,
    pub comparisons: Vec<ComparisonReport>,
    /// Test-split ROC curves keyed by `stratum/feature_set/classifier`.
    #[serde(skip)]
    pub roc_curves: BTreeMap<String, RocCurve>,
}

/// Rounds to six significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// Assembles a report with every float rounded to six significant digits.
pub fn build_report(
    config: EvalConfig,
    mut cells: Vec<CellReport>,
    mut comparisons: Vec<ComparisonReport>,
    roc_curves: BTreeMap<String, RocCurve>,
) -> EvalReport {
    let round_summary = |s: &mut AucSummary| {
        s.mean = sig6(s.mean);
        s.sd = sig6(s.sd);
        s.aucs.iter_mut().for_each(|a| *a = sig6(*a));
    };
    for c in &mut cells {
        round_summary(&mut c.lgocv);
        round_summary(&mut c.resample);
        c.test_auc = sig6(c.test_auc);
    }
    for c in &mut comparisons {
        c.mean_a = sig6(c.mean_a);
        c.mean_b = sig6(c.mean_b);
        c.t = c.t.map(sig6);
        c.df = sig6(c.df);
        c.p_value = sig6(c.p_value);
    }
    EvalReport {
        config,
        cells,
        comparisons,
        roc_curves,
    }
}

impl EvalReport {
    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn cell(&self, stratum: Stratum, feature_set: FeatureSet, classifier: ClassifierKind) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.stratum == stratum && c.feature_set == feature_set && c.classifier == classifier)
    }

    /// Resampled mean AUC (SD) per feature set and stratum, one column per classifier.
    pub fn format_table(&self) -> String {
        let kinds: Vec<ClassifierKind> = self.config.classifiers.iter().map(|c| c.kind).collect();
        let mode = match self.config.pca_mode {
            PcaMode::FoldInternal => "fold-internal PCA",
            PcaMode::WholeSample => "whole-sample PCA (paper mode)",
        };
        let mut out = format!(
            "Mean AUC (SD) over {} resamples; {mode}\n",
            self.config.resample.resamples
        );
        let width = 16;
        out.push_str(&format!("{:<28}{:<8}", "feature set", "stratum"));
        for k in &kinds {
            out.push_str(&format!("{:>width$}", k.name()));
        }
        out.push('\n');
        for fs in &self.config.feature_sets {
            for stratum in &self.config.strata {
                out.push_str(&format!("{:<28}{:<8}", fs.name(), stratum.name()));
                for &k in &kinds {
                    let text = self
                        .cell(*stratum, *fs, k)
                        .map(|c| format!("{:.3} ({:.3})", c.resample.mean, c.resample.sd))
                        .unwrap_or_else(|| "-".into());
                    out.push_str(&format!("{text:>width$}"));
                }
                out.push('\n');
            }
        }
        if !self.comparisons.is_empty() {
            out.push_str("\nOne-sided paired t-tests (H1: first > second)\n");
            for c in &self.comparisons {
                out.push_str(&format!(
                    "{:<8}{:<10}{} vs {}: {:.3} vs {:.3}, p = {:.3e}\n",
                    c.stratum.name(),
                    c.classifier.name(),
                    c.a,
                    c.b,
                    c.mean_a,
                    c.mean_b,
                    c.p_value
                ));
            }
        }
        out
    }
}

/// Runs `f` on a pool of `threads` workers, or the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidInput("threads must be >= 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// The full protocol for every configured stratum: a stratified train/test
/// split, repeated CV on the training part, a test-split AUC and ROC curve,
/// then paired resampling on the whole stratum. When PC1 is among the
/// feature sets it is compared against every other set, per classifier.
pub fn evaluate(cohort: &Cohort, config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let mut cells_out = Vec::new();
    let mut comparisons_out = Vec::new();
    let mut rocs = BTreeMap::new();
    let cells: Vec<Cell> = config
        .feature_sets
        .iter()
        .flat_map(|&fs| config.classifiers.iter().map(move |&c| Cell { feature_set: fs, classifier: c }))
        .collect();

    for &stratum in &config.strata {
        let sub = cohort.stratum(stratum);
        if sub.is_empty() {
            return Err(Error::EmptyCohort);
        }
        let whole_pca = match config.pca_mode {
            PcaMode::WholeSample if cells.iter().any(|c| c.feature_set.needs_pca()) => Some(fit_fe9_pca(&sub)?),
            _ => None,
        };
        let (train_part, test_part) = stratified_split(&sub, config.split_fraction, config.seed)?;

        let per_cell: Vec<(Vec<f64>, f64, RocCurve)> = cells
            .par_iter()
            .map(|cell| {
                let lgocv = run_lgocv(
                    &train_part,
                    cell.feature_set,
                    stratum,
                    &cell.classifier,
                    &config.cv,
                    whole_pca.as_ref(),
                )?;
                let p = fit_pipeline(&train_part, cell.feature_set, stratum, &cell.classifier, whole_pca.as_ref())?;
                let scores = p.score(&test_part)?;
                let (roc, auc) = roc_auc(&scores, &test_part.labels())?;
                Ok((lgocv, auc, roc))
            })
            .collect::<Result<_>>()?;

        let mut pairs = Vec::new();
        for (ci, clf) in config.classifiers.iter().enumerate() {
            let index = |fi: usize| fi * config.classifiers.len() + ci;
            if let Some(pc1) = config.feature_sets.iter().position(|f| *f == FeatureSet::Pc1AbmdCov) {
                for fi in 0..config.feature_sets.len() {
                    if fi != pc1 {
                        pairs.push((index(pc1), index(fi), clf.kind));
                    }
                }
            }
        }
        let index_pairs: Vec<(usize, usize)> = pairs.iter().map(|&(a, b, _)| (a, b)).collect();
        let outcome = run_resample_comparison(&sub, &cells, stratum, &config.resample, whole_pca.as_ref(), &index_pairs)?;

        for (i, (cell, (lgocv, test_auc, roc))) in cells.iter().zip(per_cell).enumerate() {
            rocs.insert(format!("{}/{}/{}", stratum, cell.feature_set, cell.classifier.kind), roc);
            cells_out.push(CellReport {
                stratum,
                feature_set: cell.feature_set,
                classifier: cell.classifier.kind,
                lgocv: AucSummary::new(lgocv),
                test_auc,
                resample: AucSummary::new(outcome.aucs[i].clone()),
            });
        }
        for (cmp, &(_, _, kind)) in outcome.comparisons.iter().zip(&pairs) {
            comparisons_out.push(ComparisonReport {
                stratum,
                classifier: kind,
                a: cells[cmp.a].feature_set,
                b: cells[cmp.b].feature_set,
                mean_a: cmp.mean_a,
                mean_b: cmp.mean_b,
                t: cmp.t,
                df: cmp.df,
                p_value: cmp.p_value,
            });
        }
    }
    Ok(build_report(config.clone(), cells_out, comparisons_out, rocs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_counts_round_per_class() {
        let mut labels = vec![1u8; 110];
        labels.extend(vec![0u8; 235]);
        let (a, b) = split_indices(&labels, 0.8, 3).unwrap();
        let cases = a.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!((cases, a.len() - cases), (88, 188));
        assert_eq!(a.len() + b.len(), 345);
        let (a, b) = split_indices(&[1, 1, 0, 0], 0.5, 9).unwrap();
        assert_eq!((a.len(), b.len()), (2, 2));
        assert!(split_indices(&[1, 0, 0], 0.5, 1).is_err());
    }

    #[test]
    fn extreme_fraction_keeps_one_per_side() {
        let labels = [1, 1, 1, 0, 0, 0];
        let (a, b) = split_indices(&labels, 0.01, 2).unwrap();
        assert_eq!((a.len(), b.len()), (2, 4));
        let (a, b) = split_indices(&labels, 0.99, 2).unwrap();
        assert_eq!((a.len(), b.len()), (4, 2));
    }

    #[test]
    fn sig6_examples() {
        assert_eq!(sig6(0.123456789), 0.123457);
        assert_eq!(sig6(1234567.0), 1234570.0);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(sig6(-2.5e-9), -2.5e-9);
    }

    #[test]
    fn self_comparison_has_half_p() {
        let aucs = vec![vec![0.6, 0.7, 0.65], vec![0.6, 0.7, 0.65]];
        let c = paired_comparison(&aucs, 0, 1).unwrap();
        assert_eq!(c.p_value, 0.5);
        assert!(paired_comparison(&aucs, 0, 2).is_err());
    }
}

use std::collections::BTreeMap;

use hipfrac::classifiers::{ClassifierKind, ClassifierSpec};
use hipfrac::datamodel::{Cohort, FeParam, FeatureSet, Stratum};
use hipfrac::eval::{
    build_report, compare_with_frax, evaluate, fit_pipeline, run_lgocv, run_resample_comparison, stratified_split,
    with_threads, Cell, CvConfig, EvalConfig, EvalReport, PcaMode, ResampleConfig,
};
use hipfrac::stats::Tail;
use hipfrac::synth::{generate_cohort, CohortSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn calibrated(seed: u64) -> Cohort {
    generate_cohort(&CohortSpec::table1_default(), seed).unwrap()
}

fn logistic() -> ClassifierSpec {
    ClassifierSpec::new(ClassifierKind::Logistic)
}

fn small_config(seed: u64) -> EvalConfig {
    EvalConfig {
        strata: vec![Stratum::Male],
        feature_sets: vec![FeatureSet::AbmdCov, FeatureSet::Pc1AbmdCov],
        classifiers: vec![logistic(), ClassifierSpec::new(ClassifierKind::Pls)],
        cv: CvConfig {
            repeats: 4,
            ..EvalConfig::new(seed).cv
        },
        resample: ResampleConfig {
            resamples: 20,
            ..EvalConfig::new(seed).resample
        },
        ..EvalConfig::new(seed)
    }
}

#[test]
fn published_counts_split_exactly() {
    let c = calibrated(1);
    let (train, test) = stratified_split(&c, 0.8, 5).unwrap();
    assert_eq!((train.case_count(), train.len() - train.case_count()), (88, 188));
    assert_eq!(train.len() + test.len(), 345);
    let mut ids: Vec<&str> = train.records.iter().chain(&test.records).map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), 345);
}

#[test]
fn split_depends_only_on_seed() {
    let c = calibrated(1);
    let ids = |seed| {
        let (t, _) = stratified_split(&c, 0.8, seed).unwrap();
        t.records.iter().map(|r| r.id.clone()).collect::<Vec<_>>()
    };
    assert_eq!(ids(3), ids(3));
    let base = ids(0);
    let distinct = (1..=100).filter(|&s| ids(s) != base).count();
    assert_eq!(distinct, 100);
}

#[test]
fn separable_cohort_scores_perfectly() {
    let mut c = calibrated(2);
    for r in &mut c.records {
        r.abmd_ct = if r.fx == 1 { 0.3 } else { 0.7 };
    }
    let cv = CvConfig { seed: 4, ..CvConfig::default() };
    let aucs = run_lgocv(&c, FeatureSet::AbmdCov, Stratum::All, &logistic(), &cv, None).unwrap();
    assert_eq!(aucs.len(), 25);
    assert!(aucs.iter().all(|&a| a == 1.0), "{aucs:?}");
}

#[test]
fn shuffled_labels_give_chance_auc() {
    let mut c = calibrated(3);
    let mut labels = c.labels();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(8));
    for (r, y) in c.records.iter_mut().zip(labels) {
        r.fx = y;
    }
    let cv = CvConfig { seed: 5, ..CvConfig::default() };
    let aucs = run_lgocv(&c, FeatureSet::Pc1AbmdCov, Stratum::All, &logistic(), &cv, None).unwrap();
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    assert!((0.4..=0.6).contains(&mean), "{mean}");
}

#[test]
fn too_few_cases_is_an_error() {
    let c = calibrated(3);
    let mut keep: Vec<usize> = (0..c.len()).filter(|&i| c.records[i].fx == 0).collect();
    keep.extend((0..c.len()).filter(|&i| c.records[i].fx == 1).take(3));
    let small = c.subset(&keep);
    assert!(run_lgocv(&small, FeatureSet::AbmdCov, Stratum::All, &logistic(), &CvConfig::default(), None).is_err());
}

#[test]
fn pc1_beats_abmd_in_men() {
    let c = calibrated(7);
    let cv = CvConfig { seed: 7, ..CvConfig::default() };
    let mean = |fs| {
        let a = run_lgocv(&c, fs, Stratum::Male, &logistic(), &cv, None).unwrap();
        a.iter().sum::<f64>() / a.len() as f64
    };
    assert!(mean(FeatureSet::Pc1AbmdCov) > mean(FeatureSet::AbmdCov));
}

#[test]
fn identical_cells_compare_at_half() {
    let c = calibrated(4);
    let cell = Cell {
        feature_set: FeatureSet::AbmdCov,
        classifier: logistic(),
    };
    let cfg = ResampleConfig {
        resamples: 30,
        seed: 1,
        ..ResampleConfig::default()
    };
    let out = run_resample_comparison(&c, &[cell, cell], Stratum::All, &cfg, None, &[(0, 1)]).unwrap();
    assert_eq!(out.aucs[0], out.aucs[1]);
    assert_eq!(out.comparisons[0].p_value, 0.5);
}

#[test]
fn planted_signal_beats_noise() {
    let mut c = calibrated(5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for r in &mut c.records {
        r.frax_prob = Some(rng.random());
    }
    let cells = [
        Cell {
            feature_set: FeatureSet::AbmdCov,
            classifier: logistic(),
        },
        Cell {
            feature_set: FeatureSet::FraxOnly,
            classifier: logistic(),
        },
    ];
    let cfg = ResampleConfig {
        resamples: 100,
        seed: 2,
        ..ResampleConfig::default()
    };
    let out = run_resample_comparison(&c, &cells, Stratum::All, &cfg, None, &[(0, 1)]).unwrap();
    assert!(out.comparisons[0].p_value < 0.001, "{:?}", out.comparisons[0]);
}

#[test]
fn pc1_beats_most_single_parameters_in_men() {
    let c = calibrated(7);
    let mut cells = vec![Cell {
        feature_set: FeatureSet::Pc1AbmdCov,
        classifier: logistic(),
    }];
    cells.extend(FeParam::fe9().into_iter().map(|p| Cell {
        feature_set: FeatureSet::SingleFeAbmdCov(p),
        classifier: logistic(),
    }));
    let pairs: Vec<(usize, usize)> = (1..cells.len()).map(|b| (0, b)).collect();
    let cfg = ResampleConfig {
        resamples: 200,
        seed: 11,
        ..ResampleConfig::default()
    };
    let out = run_resample_comparison(&c, &cells, Stratum::Male, &cfg, None, &pairs).unwrap();
    let wins = out.comparisons.iter().filter(|c| c.mean_a > c.mean_b).count();
    assert!(wins >= 5, "{wins} of 9");
}

#[test]
fn frax_identity_and_complement() {
    let mut c = calibrated(6);
    let scores: Vec<f64> = c.records.iter().map(|r| r.frax_prob.unwrap()).collect();
    let same = compare_with_frax(&c, &scores, Tail::OneSidedGreater).unwrap();
    assert_eq!(same.model_auc, same.frax_auc);
    assert_eq!(same.delong.p_value, 0.5);
    for (r, s) in c.records.iter_mut().zip(&scores) {
        r.frax_prob = Some(1.0 - s);
    }
    let rev = compare_with_frax(&c, &scores, Tail::OneSidedGreater).unwrap();
    assert!((rev.frax_auc - (1.0 - rev.model_auc)).abs() < 1e-12);
    c.records[0].frax_prob = None;
    assert!(compare_with_frax(&c, &scores, Tail::OneSidedGreater).is_err());
}

#[test]
fn model_beats_simulated_frax() {
    let c = calibrated(7);
    let p = fit_pipeline(&c, FeatureSet::Pc1AbmdCov, Stratum::All, &logistic(), None).unwrap();
    let scores = p.score(&c).unwrap();
    let cmp = compare_with_frax(&c, &scores, Tail::OneSidedGreater).unwrap();
    assert!(cmp.model_auc > cmp.frax_auc);
    assert!(cmp.delong.p_value < 0.05, "{:?}", cmp.delong);
}

#[test]
fn held_out_rows_do_not_touch_cv_results() {
    let c = calibrated(8);
    let cfg = small_config(3);
    let base = evaluate(&c, &cfg).unwrap();
    let (_, test) = stratified_split(&c.stratum(Stratum::Male), cfg.split_fraction, cfg.seed).unwrap();
    let mut mutated = c.clone();
    for r in &mut mutated.records {
        if test.records.iter().any(|t| t.id == r.id) {
            r.abmd_ct *= 3.0;
            r.fe = hipfrac::datamodel::FeParameterSet::from_array(r.fe.to_array().map(|v| v * 2.0));
        }
    }
    let other = evaluate(&mutated, &cfg).unwrap();
    for (a, b) in base.cells.iter().zip(&other.cells) {
        assert_eq!(a.lgocv, b.lgocv);
    }
}

#[test]
fn report_is_reproducible_and_round_trips() {
    let c = calibrated(9);
    let cfg = small_config(12);
    let a = evaluate(&c, &cfg).unwrap();
    let b = evaluate(&c, &cfg).unwrap();
    let json = a.to_json().unwrap();
    assert_eq!(json, b.to_json().unwrap());
    let back = EvalReport::from_json(&json).unwrap();
    assert_eq!(back.to_json().unwrap(), json);
    let replay = evaluate(&c, &back.config).unwrap();
    assert_eq!(replay.to_json().unwrap(), json);
    assert_eq!(a.comparisons.len(), 2);
    for cell in &a.cells {
        assert!(cell.resample.aucs.iter().all(|v| (0.0..=1.0).contains(v)));
    }
    assert_eq!(a.roc_curves.len(), 4);
    assert!(a.format_table().contains("PC1_ABMD_COV"));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let c = calibrated(10);
    let cfg = small_config(5);
    let one = with_threads(Some(1), || evaluate(&c, &cfg)).unwrap().unwrap();
    let many = with_threads(Some(6), || evaluate(&c, &cfg)).unwrap().unwrap();
    assert_eq!(one.to_json().unwrap(), many.to_json().unwrap());
}

#[test]
fn paper_mode_reuses_one_projection() {
    let c = calibrated(11);
    let cfg = EvalConfig {
        pca_mode: PcaMode::WholeSample,
        ..small_config(2)
    };
    let r = evaluate(&c, &cfg).unwrap();
    assert!(r.to_json().unwrap().contains("whole_sample"));
}

#[test]
fn empty_comparisons_serialize() {
    let r = build_report(EvalConfig::new(1), vec![], vec![], BTreeMap::new());
    let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    assert_eq!(v["comparisons"], serde_json::json!([]));
}

use hipfrac::datamodel::{Cohort, Sex, Stratum};
use hipfrac::stats::pca::fit_fe9_pca;
use hipfrac::stats::roc_auc;
use hipfrac::stats::select_significant_pcs;
use hipfrac::synth::{calibration_check, generate_cohort, CohortSpec};

fn group_counts(c: &Cohort) -> [usize; 4] {
    let mut n = [0; 4];
    for r in &c.records {
        let i = match (r.sex, r.fx) {
            (Sex::Male, 0) => 0,
            (Sex::Male, _) => 1,
            (Sex::Female, 0) => 2,
            (Sex::Female, _) => 3,
        };
        n[i] += 1;
    }
    n
}

#[test]
fn default_spec_gives_published_group_sizes() {
    let c = generate_cohort(&CohortSpec::table1_default(), 7).unwrap();
    assert_eq!(c.len(), 345);
    assert_eq!(c.case_count(), 110);
    assert_eq!(group_counts(&c), [92, 42, 143, 68]);
}

#[test]
fn large_groups_match_targets() {
    let spec = CohortSpec::table1_default().with_group_size(10_000);
    let c = generate_cohort(&spec, 11).unwrap();
    let report = calibration_check(&c, &spec).unwrap();
    assert_eq!(report.cells.len(), 4 * 15);
    for cell in &report.cells {
        let mean_err = (cell.mean - cell.target_mean).abs() / cell.target_mean;
        let sd_err = (cell.sd - cell.target_sd).abs() / cell.target_sd;
        assert!(mean_err < 0.03, "{} {}: mean {mean_err}", cell.group, cell.variable);
        assert!(sd_err < 0.06, "{} {}: sd {sd_err}", cell.group, cell.variable);
    }
    assert!(report.flagged().is_empty(), "{:?}", report.flagged());
}

#[test]
fn same_seed_same_bytes() {
    let spec = CohortSpec::table1_default();
    let a = generate_cohort(&spec, 42).unwrap().to_csv();
    let b = generate_cohort(&spec, 42).unwrap().to_csv();
    let c = generate_cohort(&spec, 43).unwrap().to_csv();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn subjects_do_not_depend_on_group_size() {
    let spec = CohortSpec::table1_default();
    let small = generate_cohort(&spec.with_group_size(5), 3).unwrap();
    let large = generate_cohort(&spec.with_group_size(9), 3).unwrap();
    for r in &small.records {
        let twin = large.records.iter().find(|s| s.id == r.id).unwrap();
        assert_eq!(r, twin);
    }
}

#[test]
fn records_respect_fe_invariants() {
    let c = generate_cohort(&CohortSpec::table1_default().with_group_size(2000), 5).unwrap();
    for r in &c.records {
        assert!(r.fe.validate().is_ok(), "{}", r.id);
        assert!(r.fe.to_array().iter().all(|v| *v > 0.0));
        let p = r.frax_prob.unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn pc1_dominates_and_is_retained() {
    for seed in [1, 2, 3, 7] {
        let c = generate_cohort(&CohortSpec::table1_default(), seed).unwrap();
        let pca = fit_fe9_pca(&c).unwrap();
        let share = pca.variance_shares[0];
        assert!((0.73..=0.93).contains(&share), "seed {seed}: {share}");
        let scores = pca.scores(&hipfrac::datamodel::fe9_matrix(&c)).unwrap();
        let sig = select_significant_pcs(&scores, &c.labels()).unwrap();
        assert!(sig[0].retained, "seed {seed}: {:?}", sig[0]);
    }
}

#[test]
fn fracture_groups_have_lower_abmd() {
    let c = generate_cohort(&CohortSpec::table1_default().with_group_size(3000), 9).unwrap();
    for stratum in [Stratum::Male, Stratum::Female] {
        let s = c.stratum(stratum);
        let mean = |fx: u8| {
            let v: Vec<f64> = s.records.iter().filter(|r| r.fx == fx).map(|r| r.abmd_ct).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(1) < mean(0));
    }
}

#[test]
fn simulated_frax_is_moderately_informative() {
    let c = generate_cohort(&CohortSpec::table1_default().with_group_size(5000), 13).unwrap();
    let scores: Vec<f64> = c.records.iter().map(|r| r.frax_prob.unwrap()).collect();
    let (_, auc) = roc_auc(&scores, &c.labels()).unwrap();
    assert!((0.6..0.7).contains(&auc), "{auc}");
}

#[test]
fn planted_shift_is_flagged() {
    let spec = CohortSpec::table1_default().with_group_size(500);
    let mut c = generate_cohort(&spec, 21).unwrap();
    let sd = spec.group(Sex::Female, 1).unwrap().variables["WEIGHT"].sd;
    for r in c.records.iter_mut().filter(|r| r.sex == Sex::Female && r.fx == 1) {
        r.weight += 10.0 * sd;
    }
    let report = calibration_check(&c, &spec).unwrap();
    let flagged = report.flagged();
    assert_eq!(flagged.len(), 1);
    assert_eq!((flagged[0].group.as_str(), flagged[0].variable.as_str()), ("female_fx", "WEIGHT"));
}

#[test]
fn empty_group_is_an_error() {
    let spec = CohortSpec::table1_default();
    let mut c = generate_cohort(&spec, 1).unwrap();
    c.records.retain(|r| !(r.sex == Sex::Male && r.fx == 1));
    assert!(calibration_check(&c, &spec).is_err());
}

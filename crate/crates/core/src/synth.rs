//! Seeded synthetic cohorts matched to published group summaries.
//!
//! Each subject draws a latent strength factor `F ~ N(0, 1)`. Every
//! summarized variable is `mean + sd * (loading * F + sqrt(1 - loading^2) * e)`
//! so group moments match their targets. Fracture status shifts the factor
//! seen by aBMD and the simulated FRAX score by `fx_shift`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::datamodel::{Cohort, FeParam, FeParameterSet, LoadCondition, Measure, Sex, SubjectRecord};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::logistic::sigmoid;

const DEFAULT_SPEC: &str = include_str!("../data/table1_default.json");

pub const DEMOGRAPHICS: [&str; 3] = ["AGE", "HEIGHT", "WEIGHT"];

/// Floor as a fraction of the group mean.
pub const FLOOR_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableTarget {
    pub mean: f64,
    pub sd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub sex: Sex,
    pub fx: u8,
    pub n: usize,
    pub variables: BTreeMap<String, VariableTarget>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbmdModel {
    pub male_mean: f64,
    pub female_mean: f64,
    pub sd: f64,
    pub loading: f64,
}

/// `frax = sigmoid(intercept - strength_slope * S + age_slope * (age - 80) / 5 + noise_sd * e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FraxModel {
    pub intercept: f64,
    pub strength_slope: f64,
    pub age_slope: f64,
    pub noise_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSpec {
    pub groups: Vec<GroupSpec>,
    /// Published two-sided p-values per sex and variable, kept for reference.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reported_p_values: BTreeMap<String, BTreeMap<String, String>>,
    /// Factor loading per variable; FE loadings lie in (0, 1), demographic
    /// loadings in (-1, 1).
    pub loadings: BTreeMap<String, f64>,
    pub fx_shift: f64,
    pub healstat_probs: [f64; 5],
    pub bmdmed_p: f64,
    pub abmd_ct: AbmdModel,
    #[serde(default)]
    pub frax: Option<FraxModel>,
}

fn group_name(sex: Sex, fx: u8) -> String {
    let s = match sex {
        Sex::Male => "male",
        Sex::Female => "female",
    };
    let f = if fx == 1 { "fx" } else { "control" };
    format!("{s}_{f}")
}

fn variable_names() -> Vec<String> {
    DEMOGRAPHICS
        .iter()
        .map(|s| s.to_string())
        .chain(FeParam::all().iter().map(|p| p.name()))
        .collect()
}

impl CohortSpec {
    /// The built-in spec carrying the published group summaries.
    pub fn table1_default() -> Self {
        serde_json::from_str(DEFAULT_SPEC).expect("embedded spec parses")
    }

    pub fn default_json() -> &'static str {
        DEFAULT_SPEC
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: CohortSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Copy with every group resized to `n`.
    pub fn with_group_size(&self, n: usize) -> Self {
        let mut spec = self.clone();
        for g in &mut spec.groups {
            g.n = n;
        }
        spec
    }

    pub fn group(&self, sex: Sex, fx: u8) -> Option<&GroupSpec> {
        self.groups.iter().find(|g| g.sex == sex && g.fx == fx)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.groups.len() != 4 {
            return bad(format!("spec needs 4 groups, got {}", self.groups.len()));
        }
        for sex in [Sex::Male, Sex::Female] {
            for fx in [0, 1] {
                let name = group_name(sex, fx);
                let matching: Vec<_> = self.groups.iter().filter(|g| g.name == name).collect();
                if matching.len() != 1 || matching[0].sex != sex || matching[0].fx != fx {
                    return bad(format!("spec needs exactly one `{name}` group with matching sex and fx"));
                }
            }
        }
        let names = variable_names();
        for g in &self.groups {
            if g.n < 2 {
                return bad(format!("group `{}` needs n >= 2, got {}", g.name, g.n));
            }
            for v in &names {
                let t = g
                    .variables
                    .get(v)
                    .ok_or_else(|| Error::InvalidInput(format!("group `{}` lacks variable `{v}`", g.name)))?;
                if !t.mean.is_finite() || !(t.sd.is_finite() && t.sd > 0.0) {
                    return bad(format!("group `{}` variable `{v}` needs finite mean and sd > 0", g.name));
                }
            }
        }
        for v in &names {
            let l = *self
                .loadings
                .get(v)
                .ok_or_else(|| Error::InvalidInput(format!("missing loading for `{v}`")))?;
            let ok = if DEMOGRAPHICS.contains(&v.as_str()) {
                l > -1.0 && l < 1.0
            } else {
                l > 0.0 && l < 1.0
            };
            if !ok {
                return bad(format!("loading for `{v}` out of range: {l}"));
            }
        }
        let p_sum: f64 = self.healstat_probs.iter().sum();
        if self.healstat_probs.iter().any(|p| !(0.0..=1.0).contains(p)) || (p_sum - 1.0).abs() > 1e-9 {
            return bad("healstat_probs must be a probability vector".into());
        }
        if !(0.0..=1.0).contains(&self.bmdmed_p) {
            return bad(format!("bmdmed_p must be in [0, 1], got {}", self.bmdmed_p));
        }
        let a = &self.abmd_ct;
        if !(a.male_mean > 0.0 && a.female_mean > 0.0 && a.sd > 0.0 && a.loading.abs() < 1.0) {
            return bad("abmd_ct needs positive means and sd and |loading| < 1".into());
        }
        if !self.fx_shift.is_finite() {
            return bad("fx_shift must be finite".into());
        }
        if let Some(f) = &self.frax {
            if !(f.noise_sd >= 0.0) || ![f.intercept, f.strength_slope, f.age_slope].iter().all(|v| v.is_finite()) {
                return bad("frax parameters must be finite with noise_sd >= 0".into());
            }
        }
        Ok(())
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// One factor-driven draw, clamped at the floor.
fn draw(target: &VariableTarget, loading: f64, factor: f64, rng: &mut ChaCha8Rng) -> f64 {
    let e = normal(rng);
    let v = target.mean + target.sd * (loading * factor + (1.0 - loading * loading).sqrt() * e);
    v.max(FLOOR_FRACTION * target.mean)
}

fn check_floors(spec: &CohortSpec) -> Result<()> {
    for g in &spec.groups {
        for (name, t) in &g.variables {
            if FLOOR_FRACTION * t.mean > t.mean + 4.0 * t.sd || t.mean <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "infeasible truncation for `{name}` in group `{}`: floor {} vs mean {} sd {}",
                    g.name,
                    FLOOR_FRACTION * t.mean,
                    t.mean,
                    t.sd
                )));
            }
        }
    }
    let a = &spec.abmd_ct;
    for m in [a.male_mean, a.female_mean] {
        if FLOOR_FRACTION * m > m + 4.0 * a.sd {
            return Err(Error::InvalidInput("infeasible truncation for abmd_ct".into()));
        }
    }
    Ok(())
}

fn subject(spec: &CohortSpec, group: &GroupSpec, index: usize, rng: &mut ChaCha8Rng) -> SubjectRecord {
    let factor = normal(rng);
    let strength = factor + spec.fx_shift * f64::from(group.fx);

    let value = |name: &str, rng: &mut ChaCha8Rng| draw(&group.variables[name], spec.loadings[name], factor, rng);
    let age = value("AGE", rng);
    let height = value("HEIGHT", rng);
    let weight = value("WEIGHT", rng);

    let mut fe = FeParameterSet::from_array([0.0; 12]);
    for p in FeParam::all() {
        let name = p.name();
        fe.set(p, value(&name, rng));
    }
    for condition in LoadCondition::ALL {
        let y = FeParam::new(condition, Measure::Yield);
        let u = FeParam::new(condition, Measure::Ultimate);
        let (vy, vu) = (fe.get(y), fe.get(u));
        if vy > vu {
            fe.set(y, vu);
            fe.set(u, vy);
        }
    }

    let a = &spec.abmd_ct;
    let sex_mean = match group.sex {
        Sex::Male => a.male_mean,
        Sex::Female => a.female_mean,
    };
    let e = normal(rng);
    let abmd_ct = (sex_mean + a.sd * (a.loading * strength + (1.0 - a.loading * a.loading).sqrt() * e))
        .max(FLOOR_FRACTION * sex_mean);

    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut healstat = 5;
    for (k, p) in spec.healstat_probs.iter().enumerate() {
        acc += p;
        if u < acc {
            healstat = k as u8 + 1;
            break;
        }
    }
    let bmdmed = u8::from(rng.random::<f64>() < spec.bmdmed_p);

    let frax_prob = spec.frax.map(|f| {
        let eta = f.intercept - f.strength_slope * strength + f.age_slope * (age - 80.0) / 5.0 + f.noise_sd * normal(rng);
        sigmoid(eta)
    });

    SubjectRecord {
        id: format!("{}_{:05}", group.name, index + 1),
        sex: group.sex,
        age,
        height,
        weight,
        healstat,
        bmdmed,
        abmd_ct,
        fx: group.fx,
        fe,
        frax_prob,
    }
}

/// Draws a cohort, groups in spec order. Each subject has its own stream,
/// so records do not depend on generation order.
pub fn generate_cohort(spec: &CohortSpec, seed: u64) -> Result<Cohort> {
    spec.validate()?;
    check_floors(spec)?;
    let mut records = Vec::with_capacity(spec.groups.iter().map(|g| g.n).sum());
    for (gi, group) in spec.groups.iter().enumerate() {
        for i in 0..group.n {
            let mut rng = seed::stream(seed, gi as u64, i as u64);
            records.push(subject(spec, group, i, &mut rng));
        }
    }
    Ok(Cohort::new(records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCell {
    pub group: String,
    pub variable: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub target_mean: f64,
    pub target_sd: f64,
    pub z: f64,
    pub sd_ratio: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub cells: Vec<CalibrationCell>,
}

impl CalibrationReport {
    pub fn flagged(&self) -> Vec<&CalibrationCell> {
        self.cells.iter().filter(|c| c.flagged).collect()
    }

    pub fn cell(&self, group: &str, variable: &str) -> Option<&CalibrationCell> {
        self.cells.iter().find(|c| c.group == group && c.variable == variable)
    }
}

pub const Z_LIMIT: f64 = 4.0;
pub const SD_RATIO_RANGE: (f64, f64) = (0.7, 1.4);

fn variable_value(r: &SubjectRecord, name: &str) -> f64 {
    match name {
        "AGE" => r.age,
        "HEIGHT" => r.height,
        "WEIGHT" => r.weight,
        other => r.fe.get(other.parse().expect("FE parameter name")),
    }
}

/// Per-group z-scores of sample means and SD ratios against the spec.
pub fn calibration_check(cohort: &Cohort, spec: &CohortSpec) -> Result<CalibrationReport> {
    spec.validate()?;
    let mut cells = Vec::new();
    for group in &spec.groups {
        let members: Vec<&SubjectRecord> = cohort
            .records
            .iter()
            .filter(|r| r.sex == group.sex && r.fx == group.fx)
            .collect();
        if members.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "group `{}` has {} subjects, need at least 2",
                group.name,
                members.len()
            )));
        }
        let n = members.len() as f64;
        for name in variable_names() {
            let t = &group.variables[&name];
            let values: Vec<f64> = members.iter().map(|r| variable_value(r, &name)).collect();
            let mean = values.iter().sum::<f64>() / n;
            let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let z = (mean - t.mean) / (t.sd / n.sqrt());
            let sd_ratio = sd / t.sd;
            let flagged = z.abs() > Z_LIMIT || !(SD_RATIO_RANGE.0..=SD_RATIO_RANGE.1).contains(&sd_ratio);
            cells.push(CalibrationCell {
                group: group.name.clone(),
                variable: name,
                n: members.len(),
                mean,
                sd,
                target_mean: t.mean,
                target_sd: t.sd,
                z,
                sd_ratio,
                flagged,
            });
        }
    }
    Ok(CalibrationReport { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_valid_and_has_published_sizes() {
        let spec = CohortSpec::table1_default();
        spec.validate().unwrap();
        let sizes: Vec<(String, usize)> = spec.groups.iter().map(|g| (g.name.clone(), g.n)).collect();
        assert_eq!(
            sizes,
            [("male_control", 92), ("male_fx", 42), ("female_control", 143), ("female_fx", 68)]
                .map(|(a, b)| (a.to_string(), b))
        );
        let su = &spec.group(Sex::Male, 1).unwrap().variables["Su"];
        assert_eq!((su.mean, su.sd), (7980.2, 2017.2));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = CohortSpec::table1_default();
        let mut s = base.clone();
        s.loadings.insert("Su".into(), 1.0);
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.groups[0].n = 1;
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.groups[1].name = "male_control".into();
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.groups[2].variables.get_mut("Lu").unwrap().sd = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn negative_mean_is_infeasible() {
        let mut s = CohortSpec::table1_default();
        s.groups[0].variables.get_mut("Py").unwrap().mean = -5000.0;
        assert!(generate_cohort(&s, 1).is_err());
    }

    #[test]
    fn records_are_valid() {
        let cohort = generate_cohort(&CohortSpec::table1_default(), 3).unwrap();
        for r in &cohort.records {
            r.validate().unwrap();
        }
    }
}

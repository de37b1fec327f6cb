//! Cohort records, CSV ingestion, standardization and feature-matrix assembly.
//!
//! The cohort CSV header is fixed:
//!
//! ```text
//! id,sex,age,height_cm,weight_kg,healstat,bmdmed,abmd_ct,fx,Sy,Su,Senergy,Py,Pu,Penergy,PLy,PLu,PLenergy,Ly,Lu,Lenergy,frax_prob
//! ```
//!
//! `sex` is `M` or `F`; `frax_prob` is left blank when absent.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::pca::PcaModel;

pub const COHORT_HEADER: [&str; 22] = [
    "id", "sex", "age", "height_cm", "weight_kg", "healstat", "bmdmed", "abmd_ct", "fx", "Sy", "Su",
    "Senergy", "Py", "Pu", "Penergy", "PLy", "PLu", "PLenergy", "Ly", "Lu", "Lenergy", "frax_prob",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    /// Numeric encoding used in design matrices: female = 0, male = 1.
    pub fn code(self) -> f64 {
        match self {
            Sex::Female => 0.0,
            Sex::Male => 1.0,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
        }
    }
}

/// The four loading conditions, in the order their parameters are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadCondition {
    Stance,
    Posterior,
    Posterolateral,
    Lateral,
}

impl LoadCondition {
    pub const ALL: [LoadCondition; 4] = [
        LoadCondition::Stance,
        LoadCondition::Posterior,
        LoadCondition::Posterolateral,
        LoadCondition::Lateral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LoadCondition::Stance => "stance",
            LoadCondition::Posterior => "posterior",
            LoadCondition::Posterolateral => "posterolateral",
            LoadCondition::Lateral => "lateral",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            LoadCondition::Stance => "S",
            LoadCondition::Posterior => "P",
            LoadCondition::Posterolateral => "PL",
            LoadCondition::Lateral => "L",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Yield,
    Ultimate,
    Energy,
}

/// One of the twelve FE parameters: a (load condition, measure) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeParam {
    pub condition: LoadCondition,
    pub measure: Measure,
}

impl FeParam {
    pub const fn new(condition: LoadCondition, measure: Measure) -> Self {
        Self { condition, measure }
    }

    /// Parameters in CSV column order.
    pub fn all() -> [FeParam; 12] {
        use LoadCondition::*;
        use Measure::*;
        [
            FeParam::new(Stance, Yield),
            FeParam::new(Stance, Ultimate),
            FeParam::new(Stance, Energy),
            FeParam::new(Posterior, Yield),
            FeParam::new(Posterior, Ultimate),
            FeParam::new(Posterior, Energy),
            FeParam::new(Posterolateral, Yield),
            FeParam::new(Posterolateral, Ultimate),
            FeParam::new(Posterolateral, Energy),
            FeParam::new(Lateral, Yield),
            FeParam::new(Lateral, Ultimate),
            FeParam::new(Lateral, Energy),
        ]
    }

    /// The nine fracture-associated parameters that feed the risk index:
    /// Sy, Su, Senergy, Py, Pu, PLy, PLu, Ly, Lu.
    pub fn fe9() -> [FeParam; 9] {
        use LoadCondition::*;
        use Measure::*;
        [
            FeParam::new(Stance, Yield),
            FeParam::new(Stance, Ultimate),
            FeParam::new(Stance, Energy),
            FeParam::new(Posterior, Yield),
            FeParam::new(Posterior, Ultimate),
            FeParam::new(Posterolateral, Yield),
            FeParam::new(Posterolateral, Ultimate),
            FeParam::new(Lateral, Yield),
            FeParam::new(Lateral, Ultimate),
        ]
    }

    pub fn name(self) -> String {
        let suffix = match self.measure {
            Measure::Yield => "y",
            Measure::Ultimate => "u",
            Measure::Energy => "energy",
        };
        format!("{}{}", self.condition.prefix(), suffix)
    }

    fn index(self) -> usize {
        let c = self.condition as usize;
        let m = self.measure as usize;
        c * 3 + m
    }
}

impl FromStr for FeParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeParam::all()
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown FE parameter `{s}`")))
    }
}

impl fmt::Display for FeParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Yield load, ultimate load (N) and energy-to-failure (N·mm) for each of
/// the four loading conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct FeParameterSet {
    pub Sy: f64,
    pub Su: f64,
    pub Senergy: f64,
    pub Py: f64,
    pub Pu: f64,
    pub Penergy: f64,
    pub PLy: f64,
    pub PLu: f64,
    pub PLenergy: f64,
    pub Ly: f64,
    pub Lu: f64,
    pub Lenergy: f64,
}

impl FeParameterSet {
    /// Builds a set from values in CSV column order.
    pub fn from_array(v: [f64; 12]) -> Self {
        Self {
            Sy: v[0],
            Su: v[1],
            Senergy: v[2],
            Py: v[3],
            Pu: v[4],
            Penergy: v[5],
            PLy: v[6],
            PLu: v[7],
            PLenergy: v[8],
            Ly: v[9],
            Lu: v[10],
            Lenergy: v[11],
        }
    }

    pub fn to_array(&self) -> [f64; 12] {
        [
            self.Sy,
            self.Su,
            self.Senergy,
            self.Py,
            self.Pu,
            self.Penergy,
            self.PLy,
            self.PLu,
            self.PLenergy,
            self.Ly,
            self.Lu,
            self.Lenergy,
        ]
    }

    pub fn get(&self, param: FeParam) -> f64 {
        self.to_array()[param.index()]
    }

    pub fn set(&mut self, param: FeParam, value: f64) {
        let mut v = self.to_array();
        v[param.index()] = value;
        *self = Self::from_array(v);
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        for p in FeParam::all() {
            let v = self.get(p);
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("FE parameter {p} must be finite and positive, got {v}"));
            }
        }
        for c in LoadCondition::ALL {
            let y = self.get(FeParam::new(c, Measure::Yield));
            let u = self.get(FeParam::new(c, Measure::Ultimate));
            if y > u {
                return Err(format!("{} yield load {y} exceeds ultimate load {u}", c.name()));
            }
        }
        Ok(())
    }
}

/// One study participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub id: String,
    pub sex: Sex,
    pub age: f64,
    pub height: f64,
    pub weight: f64,
    /// 1 = excellent ... 5 = poor.
    pub healstat: u8,
    pub bmdmed: u8,
    pub abmd_ct: f64,
    pub fx: u8,
    pub fe: FeParameterSet,
    pub frax_prob: Option<f64>,
}

impl SubjectRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let positive = [
            ("age", self.age),
            ("height_cm", self.height),
            ("weight_kg", self.weight),
            ("abmd_ct", self.abmd_ct),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(1..=5).contains(&self.healstat) {
            return Err(format!("healstat must be in 1..5, got {}", self.healstat));
        }
        if self.bmdmed > 1 {
            return Err(format!("bmdmed must be 0 or 1, got {}", self.bmdmed));
        }
        if self.fx > 1 {
            return Err(format!("fx must be 0 or 1, got {}", self.fx));
        }
        if let Some(p) = self.frax_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("frax_prob must be in [0, 1], got {p}"));
            }
        }
        self.fe.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadPolicy {
    Strict,
    DropInvalid,
}

/// A validated cohort, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cohort {
    pub records: Vec<SubjectRecord>,
    /// Rows skipped under [`LoadPolicy::DropInvalid`].
    pub dropped_count: usize,
}

impl Cohort {
    pub fn new(records: Vec<SubjectRecord>) -> Self {
        Self {
            records,
            dropped_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn case_count(&self) -> usize {
        self.records.iter().filter(|r| r.fx == 1).count()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.fx).collect()
    }

    /// Records belonging to `stratum`, preserving order.
    pub fn stratum(&self, stratum: Stratum) -> Cohort {
        Cohort::new(
            self.records
                .iter()
                .filter(|r| stratum.contains(r.sex))
                .cloned()
                .collect(),
        )
    }

    pub fn subset(&self, indices: &[usize]) -> Cohort {
        Cohort::new(indices.iter().map(|&i| self.records[i].clone()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = COHORT_HEADER.join(",");
        out.push('\n');
        for r in &self.records {
            let fe = r.fe.to_array();
            let mut fields = vec![
                r.id.clone(),
                r.sex.letter().to_string(),
                r.age.to_string(),
                r.height.to_string(),
                r.weight.to_string(),
                r.healstat.to_string(),
                r.bmdmed.to_string(),
                r.abmd_ct.to_string(),
                r.fx.to_string(),
            ];
            fields.extend(fe.iter().map(|v| v.to_string()));
            fields.push(r.frax_prob.map(|p| p.to_string()).unwrap_or_default());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn load_cohort(path: impl AsRef<Path>, policy: LoadPolicy) -> Result<Cohort> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cohort(&text, policy)
}

pub fn parse_cohort(text: &str, policy: LoadPolicy) -> Result<Cohort> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("missing header row".into()))?;
    let header: Vec<&str> = header.split(',').map(str::trim).collect();
    let mut col = [0usize; 22];
    for (slot, name) in col.iter_mut().zip(COHORT_HEADER) {
        *slot = header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let mut records = Vec::new();
    let mut dropped = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match parse_row(&fields, &col, line_no) {
            Ok(rec) => match rec.validate() {
                Ok(()) => records.push(rec),
                Err(reason) => match policy {
                    LoadPolicy::Strict => {
                        return Err(Error::InvalidRecord {
                            line: line_no,
                            reason,
                        })
                    }
                    LoadPolicy::DropInvalid => dropped += 1,
                },
            },
            // malformed rows are skipped like invariant violations when dropping
            Err(e @ (Error::NonNumeric { .. } | Error::InvalidRecord { .. }))
                if policy == LoadPolicy::DropInvalid =>
            {
                let _ = e;
                dropped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyCohort);
    }
    Ok(Cohort {
        records,
        dropped_count: dropped,
    })
}

fn parse_row(fields: &[&str], col: &[usize; 22], line: usize) -> Result<SubjectRecord> {
    let get = |k: usize| -> Result<&str> {
        fields.get(col[k]).copied().ok_or_else(|| Error::InvalidRecord {
            line,
            reason: format!("missing field `{}`", COHORT_HEADER[k]),
        })
    };
    let num = |k: usize| -> Result<f64> {
        let raw = get(k)?;
        raw.parse::<f64>().map_err(|_| Error::NonNumeric {
            line,
            field: COHORT_HEADER[k].to_string(),
            value: raw.to_string(),
        })
    };
    let int = |k: usize| -> Result<u8> {
        let v = num(k)?;
        if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
            return Err(Error::InvalidRecord {
                line,
                reason: format!("`{}` must be a small integer, got {v}", COHORT_HEADER[k]),
            });
        }
        Ok(v as u8)
    };
    let sex = match get(1)? {
        "M" | "m" => Sex::Male,
        "F" | "f" => Sex::Female,
        other => {
            return Err(Error::InvalidRecord {
                line,
                reason: format!("sex must be M or F, got `{other}`"),
            })
        }
    };
    let mut fe = [0.0; 12];
    for (i, v) in fe.iter_mut().enumerate() {
        *v = num(9 + i)?;
    }
    let frax_raw = fields.get(col[21]).copied().unwrap_or("");
    let frax_prob = if frax_raw.is_empty() {
        None
    } else {
        Some(num(21)?)
    };
    Ok(SubjectRecord {
        id: get(0)?.to_string(),
        sex,
        age: num(2)?,
        height: num(3)?,
        weight: num(4)?,
        healstat: int(5)?,
        bmdmed: int(6)?,
        abmd_ct: num(7)?,
        fx: int(8)?,
        fe: FeParameterSet::from_array(fe),
        frax_prob,
    })
}

/// Per-column mean and sample SD (n − 1 denominator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl StandardizationParams {
    pub fn fit(values: &DMatrix<f64>) -> Result<Self> {
        Self::fit_named(values, None)
    }

    pub fn fit_named(values: &DMatrix<f64>, names: Option<&[String]>) -> Result<Self> {
        let n = values.nrows();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "standardization needs at least 2 rows, got {n}"
            )));
        }
        let mut means = Vec::with_capacity(values.ncols());
        let mut sds = Vec::with_capacity(values.ncols());
        for (j, column) in values.column_iter().enumerate() {
            if column.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("column {j}")));
            }
            let mean = column.iter().sum::<f64>() / n as f64;
            let ss: f64 = column.iter().map(|v| (v - mean).powi(2)).sum();
            let sd = (ss / (n - 1) as f64).sqrt();
            if sd <= f64::EPSILON * mean.abs().max(1.0) {
                let name = names
                    .and_then(|ns| ns.get(j).cloned())
                    .unwrap_or_else(|| j.to_string());
                return Err(Error::ConstantColumn(name));
            }
            means.push(mean);
            sds.push(sd);
        }
        Ok(Self { means, sds })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn apply(&self, values: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_cols(values.ncols())?;
        Ok(DMatrix::from_fn(values.nrows(), values.ncols(), |i, j| {
            (values[(i, j)] - self.means[j]) / self.sds[j]
        }))
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_cols(row.len())?;
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn invert(&self, values: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_cols(values.ncols())?;
        Ok(DMatrix::from_fn(values.nrows(), values.ncols(), |i, j| {
            values[(i, j)] * self.sds[j] + self.means[j]
        }))
    }

    fn check_cols(&self, got: usize) -> Result<()> {
        if got != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got,
            });
        }
        Ok(())
    }
}

/// DXA-equivalent total femur aBMD from the CT-derived value (both g/cm²).
pub fn derive_dxa_abmd(abmd_ct: f64) -> Result<f64> {
    if !(abmd_ct >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "aBMD_CT must be non-negative, got {abmd_ct}"
        )));
    }
    Ok(0.924 * abmd_ct + 0.137)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    All,
    Male,
    Female,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::All, Stratum::Male, Stratum::Female];

    pub fn contains(self, sex: Sex) -> bool {
        match self {
            Stratum::All => true,
            Stratum::Male => sex == Sex::Male,
            Stratum::Female => sex == Sex::Female,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stratum::All => "all",
            Stratum::Male => "male",
            Stratum::Female => "female",
        }
    }
}

impl FromStr for Stratum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Stratum::All),
            "male" => Ok(Stratum::Male),
            "female" => Ok(Stratum::Female),
            other => Err(Error::InvalidInput(format!("unknown stratum `{other}`"))),
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FeatureSet {
    AbmdCov,
    Pc1AbmdCov,
    Fe9AbmdCov,
    SingleFeAbmdCov(FeParam),
    FraxOnly,
}

impl FeatureSet {
    pub fn name(&self) -> String {
        match self {
            FeatureSet::AbmdCov => "ABMD_COV".into(),
            FeatureSet::Pc1AbmdCov => "PC1_ABMD_COV".into(),
            FeatureSet::Fe9AbmdCov => "FE9_ABMD_COV".into(),
            FeatureSet::SingleFeAbmdCov(p) => format!("SINGLE_FE_ABMD_COV({p})"),
            FeatureSet::FraxOnly => "FRAX_ONLY".into(),
        }
    }

    pub fn needs_pca(&self) -> bool {
        matches!(self, FeatureSet::Pc1AbmdCov)
    }

    /// Column names in matrix order.
    ///
    /// Covariate block order is `abmd_ct, age, sex, height, weight, healstat,
    /// bmdmed`; `sex` is dropped for the single-sex strata. Leading columns
    /// are `pc1`, the nine FE parameters, or the single FE parameter,
    /// depending on the set.
    pub fn columns(&self, stratum: Stratum) -> Vec<String> {
        let mut cols: Vec<String> = match self {
            FeatureSet::FraxOnly => return vec!["frax_prob".into()],
            FeatureSet::AbmdCov => vec![],
            FeatureSet::Pc1AbmdCov => vec!["pc1".into()],
            FeatureSet::Fe9AbmdCov => FeParam::fe9().iter().map(|p| p.name()).collect(),
            FeatureSet::SingleFeAbmdCov(p) => vec![p.name()],
        };
        cols.push("abmd_ct".into());
        cols.push("age".into());
        if stratum == Stratum::All {
            cols.push("sex".into());
        }
        cols.extend(["height", "weight", "healstat", "bmdmed"].map(String::from));
        cols
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        match upper.as_str() {
            "ABMD_COV" => Ok(FeatureSet::AbmdCov),
            "PC1_ABMD_COV" => Ok(FeatureSet::Pc1AbmdCov),
            "FE9_ABMD_COV" => Ok(FeatureSet::Fe9AbmdCov),
            "FRAX_ONLY" => Ok(FeatureSet::FraxOnly),
            _ => {
                let inner = upper
                    .strip_prefix("SINGLE_FE_ABMD_COV(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::InvalidInput(format!("unknown feature set `{s}`")))?;
                Ok(FeatureSet::SingleFeAbmdCov(inner.parse()?))
            }
        }
    }
}

impl From<FeatureSet> for String {
    fn from(f: FeatureSet) -> String {
        f.name()
    }
}

impl TryFrom<String> for FeatureSet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub x: DMatrix<f64>,
    pub labels: Vec<u8>,
    pub columns: Vec<String>,
}

/// The nine-parameter FE block of every record, one row per subject.
pub fn fe9_matrix(cohort: &Cohort) -> DMatrix<f64> {
    let params = FeParam::fe9();
    DMatrix::from_fn(cohort.len(), params.len(), |i, j| {
        cohort.records[i].fe.get(params[j])
    })
}

/// Assembles the design matrix for `feature_set` over the subjects in `stratum`.
///
/// `pca` supplies the PC1 projection and is required for
/// [`FeatureSet::Pc1AbmdCov`]; it is ignored otherwise.
pub fn build_feature_matrix(
    cohort: &Cohort,
    feature_set: FeatureSet,
    stratum: Stratum,
    pca: Option<&PcaModel>,
) -> Result<FeatureMatrix> {
    let sub = cohort.stratum(stratum);
    if sub.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let columns = feature_set.columns(stratum);
    let labels = sub.labels();

    if feature_set == FeatureSet::FraxOnly {
        let mut x = DMatrix::zeros(sub.len(), 1);
        for (i, r) in sub.records.iter().enumerate() {
            x[(i, 0)] = r.frax_prob.ok_or_else(|| {
                Error::InvalidInput(format!("frax_prob missing for subject `{}`", r.id))
            })?;
        }
        return Ok(FeatureMatrix { x, labels, columns });
    }

    let pc1 = match (feature_set, pca) {
        (FeatureSet::Pc1AbmdCov, Some(model)) => Some(model.risk_index_matrix(&fe9_matrix(&sub))?),
        (FeatureSet::Pc1AbmdCov, None) => {
            return Err(Error::InvalidInput(
                "PC1 feature set requires a fitted PCA model".into(),
            ))
        }
        _ => None,
    };

    let mut rows = Vec::with_capacity(sub.len() * columns.len());
    for (i, r) in sub.records.iter().enumerate() {
        match feature_set {
            FeatureSet::Pc1AbmdCov => rows.push(pc1.as_ref().expect("pc1 computed")[i]),
            FeatureSet::Fe9AbmdCov => rows.extend(FeParam::fe9().iter().map(|&p| r.fe.get(p))),
            FeatureSet::SingleFeAbmdCov(p) => rows.push(r.fe.get(p)),
            FeatureSet::AbmdCov | FeatureSet::FraxOnly => {}
        }
        rows.push(r.abmd_ct);
        rows.push(r.age);
        if stratum == Stratum::All {
            rows.push(r.sex.code());
        }
        rows.push(r.height);
        rows.push(r.weight);
        rows.push(f64::from(r.healstat));
        rows.push(f64::from(r.bmdmed));
    }
    let x = DMatrix::from_row_slice(sub.len(), columns.len(), &rows);
    Ok(FeatureMatrix { x, labels, columns })
}

//! Trainable binary classifiers behind one train/score contract.
//!
//! Every kind standardizes its inputs with statistics from the training
//! rows only; scores are probability-like and larger means "fracture".

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::logistic::{fit_logistic, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Logistic,
    Lda,
    Qda,
    Pls,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Logistic,
        ClassifierKind::Lda,
        ClassifierKind::Qda,
        ClassifierKind::Pls,
        ClassifierKind::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Lda => "lda",
            ClassifierKind::Qda => "qda",
            ClassifierKind::Pls => "pls",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidInput(format!("unknown classifier `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Ridge strength for logistic regression.
    pub ridge: f64,
    /// Covariance shrinkage toward the diagonal for LDA/QDA.
    pub shrinkage: f64,
    /// Latent components for PLS.
    pub components: usize,
    /// Neighbours for KNN.
    pub neighbors: usize,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            ridge: 1e-4,
            shrinkage: 0.1,
            components: 3,
            neighbors: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(Error::InvalidInput(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        if !(0.0..=1.0).contains(&self.shrinkage) {
            return Err(Error::InvalidInput(format!(
                "shrinkage must lie in [0, 1], got {}",
                self.shrinkage
            )));
        }
        if self.components == 0 || self.neighbors == 0 {
            return Err(Error::InvalidInput("components and neighbors must be >= 1".into()));
        }
        Ok(())
    }
}

/// Column centering and scaling; a constant column keeps unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Scaler {
    fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut means = Vec::with_capacity(x.ncols());
        let mut sds = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            means.push(mean);
            sds.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Self { means, sds }
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.means[j]) / self.sds[j])
    }
}

/// Gaussian class model: mean, precision matrix and log-determinant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianClass {
    pub mean: Vec<f64>,
    pub precision: Vec<Vec<f64>>,
    pub log_det: f64,
    pub log_prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedParams {
    Logistic {
        intercept: f64,
        coefficients: Vec<f64>,
    },
    /// Linear discriminant: log-odds = `weights · x + bias`.
    Lda {
        weights: Vec<f64>,
        bias: f64,
    },
    Qda {
        negative: GaussianClass,
        positive: GaussianClass,
    },
    /// Decision value `offset + x · coefficients`, mapped through
    /// `sigmoid(link_intercept + link_slope · decision)`.
    Pls {
        rotation: Vec<Vec<f64>>,
        y_loadings: Vec<f64>,
        offset: f64,
        link_intercept: f64,
        link_slope: f64,
    },
    Knn {
        points: Vec<Vec<f64>>,
        labels: Vec<u8>,
        k: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub feature_names: Vec<String>,
    pub scaler: Scaler,
    pub params: FittedParams,
}

fn check_training(x: &DMatrix<f64>, y: &[u8], names: &[String]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if names.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: names.len(),
        });
    }
    if x.ncols() == 0 {
        return Err(Error::InvalidInput("no features".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training features".into()));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidInput("labels must be 0 or 1".into()));
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass);
    }
    if y.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 training rows".into()));
    }
    Ok(())
}

fn class_rows(x: &DMatrix<f64>, y: &[u8], class: u8) -> Vec<usize> {
    (0..x.nrows()).filter(|&i| y[i] == class).collect()
}

fn mean_of(x: &DMatrix<f64>, rows: &[usize]) -> DVector<f64> {
    let mut m = DVector::zeros(x.ncols());
    for &i in rows {
        m += x.row(i).transpose();
    }
    m / rows.len() as f64
}

fn scatter(x: &DMatrix<f64>, rows: &[usize], mean: &DVector<f64>) -> DMatrix<f64> {
    let p = x.ncols();
    let mut s = DMatrix::zeros(p, p);
    for &i in rows {
        let d = x.row(i).transpose() - mean;
        s += &d * d.transpose();
    }
    s
}

fn shrink(mut s: DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    let p = s.nrows();
    for i in 0..p {
        for j in 0..p {
            if i != j {
                s[(i, j)] *= 1.0 - gamma;
            }
        }
    }
    s
}

fn invert_spd(s: DMatrix<f64>, what: &str) -> Result<(DMatrix<f64>, f64)> {
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Singular(format!("{what} covariance after shrinkage")))?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    if !log_det.is_finite() {
        return Err(Error::Singular(format!("{what} covariance after shrinkage")));
    }
    Ok((chol.inverse(), log_det))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Fits a classifier on raw features `x` (rows = subjects) and 0/1 labels.
pub fn train(spec: &ClassifierSpec, x: &DMatrix<f64>, y: &[u8], names: &[String]) -> Result<TrainedModel> {
    spec.validate()?;
    check_training(x, y, names)?;
    let scaler = Scaler::fit(x);
    let z = scaler.apply(x);
    let params = match spec.kind {
        ClassifierKind::Logistic => {
            let fit = fit_logistic(y, &z, spec.ridge)?;
            FittedParams::Logistic {
                intercept: fit.intercept,
                coefficients: fit.coefficients,
            }
        }
        ClassifierKind::Lda => train_lda(&z, y, spec.shrinkage)?,
        ClassifierKind::Qda => train_qda(&z, y, spec.shrinkage)?,
        ClassifierKind::Pls => train_pls(&z, y, spec.components)?,
        ClassifierKind::Knn => {
            if spec.neighbors > z.nrows() {
                return Err(Error::InvalidInput(format!(
                    "k = {} exceeds the {} training rows",
                    spec.neighbors,
                    z.nrows()
                )));
            }
            FittedParams::Knn {
                points: to_rows(&z),
                labels: y.to_vec(),
                k: spec.neighbors,
            }
        }
    };
    Ok(TrainedModel {
        spec: *spec,
        feature_names: names.to_vec(),
        scaler,
        params,
    })
}

fn train_lda(z: &DMatrix<f64>, y: &[u8], gamma: f64) -> Result<FittedParams> {
    let neg = class_rows(z, y, 0);
    let pos = class_rows(z, y, 1);
    let (m0, m1) = (mean_of(z, &neg), mean_of(z, &pos));
    let df = (z.nrows() - 2).max(1) as f64;
    let pooled = (scatter(z, &neg, &m0) + scatter(z, &pos, &m1)) / df;
    let (inv, _) = invert_spd(shrink(pooled, gamma), "pooled")?;
    let w = &inv * (&m1 - &m0);
    let prior = (pos.len() as f64 / neg.len() as f64).ln();
    let bias = -0.5 * (m1.dot(&(&inv * &m1)) - m0.dot(&(&inv * &m0))) + prior;
    Ok(FittedParams::Lda {
        weights: w.iter().copied().collect(),
        bias,
    })
}

fn gaussian_class(z: &DMatrix<f64>, rows: &[usize], gamma: f64, n: usize) -> Result<GaussianClass> {
    let mean = mean_of(z, rows);
    let df = (rows.len() - 1).max(1) as f64;
    let cov = shrink(scatter(z, rows, &mean) / df, gamma);
    let (precision, log_det) = invert_spd(cov, "class")?;
    Ok(GaussianClass {
        mean: mean.iter().copied().collect(),
        precision: to_rows(&precision),
        log_det,
        log_prior: (rows.len() as f64 / n as f64).ln(),
    })
}

fn train_qda(z: &DMatrix<f64>, y: &[u8], gamma: f64) -> Result<FittedParams> {
    let neg = class_rows(z, y, 0);
    let pos = class_rows(z, y, 1);
    if neg.len() < 2 || pos.len() < 2 {
        return Err(Error::InvalidInput("qda needs at least 2 rows per class".into()));
    }
    Ok(FittedParams::Qda {
        negative: gaussian_class(z, &neg, gamma, z.nrows())?,
        positive: gaussian_class(z, &pos, gamma, z.nrows())?,
    })
}

/// PLS1 by NIPALS on the ±1-coded label.
fn pls_components(z: &DMatrix<f64>, y: &[u8], c: usize) -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
    let (n, p) = (z.nrows(), z.ncols());
    if c > p.min(n - 1) {
        return Err(Error::InvalidInput(format!(
            "{c} PLS components exceed the data rank bound {}",
            p.min(n - 1)
        )));
    }
    let coded: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
    let offset = coded.iter().sum::<f64>() / n as f64;
    let mut yr = DVector::from_iterator(n, coded.iter().map(|v| v - offset));
    let mut xr = z.clone();
    let scale = z.norm();
    let mut w_mat = DMatrix::zeros(p, c);
    let mut p_mat = DMatrix::zeros(p, c);
    let mut q = DVector::zeros(c);
    for a in 0..c {
        if xr.norm() <= 1e-10 * scale {
            return Err(Error::InvalidInput(format!("{c} PLS components exceed the data rank")));
        }
        let mut w = xr.transpose() * &yr;
        let wn = w.norm();
        if wn <= 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "PLS component {} has no covariance with the label",
                a + 1
            )));
        }
        w /= wn;
        let t = &xr * &w;
        let tt = t.dot(&t);
        let pl = xr.transpose() * &t / tt;
        let qa = yr.dot(&t) / tt;
        xr -= &t * pl.transpose();
        yr -= &t * qa;
        w_mat.set_column(a, &w);
        p_mat.set_column(a, &pl);
        q[a] = qa;
    }
    let ptw = p_mat.transpose() * &w_mat;
    let inv = ptw
        .try_inverse()
        .ok_or_else(|| Error::Singular("PLS loading-weight product".into()))?;
    let rotation = w_mat * inv;
    Ok((rotation, q, offset))
}

fn train_pls(z: &DMatrix<f64>, y: &[u8], c: usize) -> Result<FittedParams> {
    let (rotation, q, offset) = pls_components(z, y, c)?;
    let beta = &rotation * &q;
    let decision = DMatrix::from_iterator(z.nrows(), 1, (z * &beta).iter().map(|v| v + offset));
    let link = fit_logistic(y, &decision, 0.0)?;
    Ok(FittedParams::Pls {
        rotation: to_rows(&rotation),
        y_loadings: q.iter().copied().collect(),
        offset,
        link_intercept: link.intercept,
        link_slope: link.coefficients[0],
    })
}

impl TrainedModel {
    fn standardized(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                got: x.ncols(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features to score".into()));
        }
        Ok(self.scaler.apply(x))
    }

    /// Unlinked decision values: log-odds for logistic/LDA/QDA, the PLS
    /// regression prediction of the ±1 label, and the neighbour fraction for KNN.
    pub fn decision_values(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let z = self.standardized(x)?;
        let rows = z.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>());
        Ok(match &self.params {
            FittedParams::Logistic {
                intercept,
                coefficients,
            } => rows.map(|r| intercept + dot(coefficients, &r)).collect(),
            FittedParams::Lda { weights, bias } => rows.map(|r| bias + dot(weights, &r)).collect(),
            FittedParams::Qda { negative, positive } => rows
                .map(|r| gaussian_log_density(positive, &r) - gaussian_log_density(negative, &r))
                .collect(),
            FittedParams::Pls {
                rotation,
                y_loadings,
                offset,
                ..
            } => {
                let beta = from_rows(rotation) * DVector::from_column_slice(y_loadings);
                rows.map(|r| offset + dot(beta.as_slice(), &r)).collect()
            }
            FittedParams::Knn { points, labels, k } => rows.map(|r| knn_fraction(points, labels, *k, &r)).collect(),
        })
    }

    /// Scores in [0, 1]; larger means more likely fracture.
    pub fn predict_scores(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let d = self.decision_values(x)?;
        Ok(match &self.params {
            FittedParams::Knn { .. } => d,
            FittedParams::Pls {
                link_intercept,
                link_slope,
                ..
            } => d.iter().map(|v| sigmoid(link_intercept + link_slope * v)).collect(),
            _ => d.into_iter().map(sigmoid).collect(),
        })
    }
}

pub fn predict_scores(model: &TrainedModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    model.predict_scores(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gaussian_log_density(class: &GaussianClass, x: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(&class.mean).map(|(a, b)| a - b).collect();
    let quad: f64 = class.precision.iter().zip(&d).map(|(row, di)| di * dot(row, &d)).sum();
    class.log_prior - 0.5 * class.log_det - 0.5 * quad
}

/// Share of positives among the k nearest points, counting every point tied
/// with the k-th distance.
fn knn_fraction(points: &[Vec<f64>], labels: &[u8], k: usize, x: &[f64]) -> f64 {
    let mut dist: Vec<(f64, u8)> = points
        .iter()
        .zip(labels)
        .map(|(p, &l)| (p.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), l))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cutoff = dist[k - 1].0;
    let slack = 1e-12 * cutoff.max(1e-300);
    let (mut pos, mut total) = (0usize, 0usize);
    for &(d, l) in &dist {
        if d > cutoff + slack {
            break;
        }
        total += 1;
        pos += usize::from(l);
    }
    pos as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn knn_counts_tied_neighbours() {
        let x = DMatrix::from_row_slice(5, 1, &[0.0, 1.0, -1.0, 5.0, 6.0]);
        let y = [1, 1, 0, 0, 0];
        let spec = ClassifierSpec {
            neighbors: 3,
            ..ClassifierSpec::new(ClassifierKind::Knn)
        };
        let m = train(&spec, &x, &y, &names(1)).unwrap();
        let s = m.predict_scores(&DMatrix::from_row_slice(1, 1, &[0.0])).unwrap();
        assert!((s[0] - 2.0 / 3.0).abs() < 1e-15);
        // a query at 0.5 has 0 and 1 tied at the first distance
        let spec = ClassifierSpec {
            neighbors: 1,
            ..spec
        };
        let m = train(&spec, &x, &y, &names(1)).unwrap();
        assert_eq!(m.predict_scores(&DMatrix::from_row_slice(1, 1, &[0.5])).unwrap()[0], 1.0);
    }

    #[test]
    fn knn_with_all_neighbours_returns_prevalence() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let y = [1, 0, 0, 0];
        let spec = ClassifierSpec {
            neighbors: 4,
            ..ClassifierSpec::new(ClassifierKind::Knn)
        };
        let m = train(&spec, &x, &y, &names(1)).unwrap();
        let s = m.predict_scores(&DMatrix::from_row_slice(2, 1, &[-9.0, 40.0])).unwrap();
        assert_eq!(s, vec![0.25, 0.25]);
        let too_many = ClassifierSpec { neighbors: 5, ..spec };
        assert!(train(&too_many, &x, &y, &names(1)).is_err());
    }

    #[test]
    fn lda_full_shrinkage_uses_diagonal_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let x = DMatrix::from_fn(n, 3, |i, j| {
            let e: f64 = StandardNormal.sample(&mut rng);
            e + if i % 2 == 0 { 0.5 * j as f64 } else { 0.0 }
        });
        let y: Vec<u8> = (0..n).map(|i| (i % 2 == 0) as u8).collect();
        let spec = ClassifierSpec {
            shrinkage: 1.0,
            ..ClassifierSpec::new(ClassifierKind::Lda)
        };
        let m = train(&spec, &x, &y, &names(3)).unwrap();
        let z = m.scaler.apply(&x);
        let neg = class_rows(&z, &y, 0);
        let pos = class_rows(&z, &y, 1);
        let (m0, m1) = (mean_of(&z, &neg), mean_of(&z, &pos));
        let pooled = (scatter(&z, &neg, &m0) + scatter(&z, &pos, &m1)) / (n - 2) as f64;
        let FittedParams::Lda { weights, .. } = &m.params else {
            panic!("expected lda")
        };
        for j in 0..3 {
            let naive = (m1[j] - m0[j]) / pooled[(j, j)];
            assert!((weights[j] - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn lda_midpoint_scores_one_half() {
        let x = DMatrix::from_row_slice(6, 2, &[-2.0, 0.1, -2.2, -0.1, -1.8, 0.0, 2.0, 0.1, 2.2, -0.1, 1.8, 0.0]);
        let y = [0, 0, 0, 1, 1, 1];
        let m = train(&ClassifierSpec::new(ClassifierKind::Lda), &x, &y, &names(2)).unwrap();
        let s = m.predict_scores(&DMatrix::from_row_slice(1, 2, &[0.0, 0.0])).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn pls_at_full_rank_matches_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 40;
        let x = DMatrix::from_fn(n, 3, |_, _| StandardNormal.sample(&mut rng));
        let y: Vec<u8> = (0..n).map(|i| u8::from(x[(i, 0)] + 0.5 * x[(i, 2)] > 0.0 || i % 7 == 0)).collect();
        let spec = ClassifierSpec {
            components: 3,
            ..ClassifierSpec::new(ClassifierKind::Pls)
        };
        let m = train(&spec, &x, &y, &names(3)).unwrap();
        let fitted = m.decision_values(&x).unwrap();

        // OLS of the ±1 label on [1, x]
        let mut design = DMatrix::from_element(n, 4, 1.0);
        design.view_mut((0, 1), (n, 3)).copy_from(&x);
        let coded = DVector::from_iterator(n, y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }));
        let beta = (design.transpose() * &design).try_inverse().unwrap() * design.transpose() * coded;
        let ols = &design * beta;
        for i in 0..n {
            assert!((fitted[i] - ols[i]).abs() < 1e-8);
        }
        let too_many = ClassifierSpec { components: 4, ..spec };
        assert!(train(&too_many, &x, &y, &names(3)).is_err());
    }

    #[test]
    fn lda_posterior_is_monotone_in_discriminant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(50, 2, |_, _| StandardNormal.sample(&mut rng));
        let y: Vec<u8> = (0..50).map(|i| u8::from(x[(i, 0)] > 0.2)).collect();
        let m = train(&ClassifierSpec::new(ClassifierKind::Lda), &x, &y, &names(2)).unwrap();
        let d = m.decision_values(&x).unwrap();
        let s = m.predict_scores(&x).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                if d[i] < d[j] {
                    assert!(s[i] <= s[j]);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            train(&ClassifierSpec::new(ClassifierKind::Lda), &x, &[1, 1, 1, 1], &names(1)),
            Err(Error::SingleClass)
        ));
        let m = train(&ClassifierSpec::new(ClassifierKind::Logistic), &x, &[0, 1, 0, 1], &names(1)).unwrap();
        assert!(m.predict_scores(&DMatrix::from_row_slice(1, 2, &[0.0, 1.0])).is_err());
        assert!(m.predict_scores(&DMatrix::from_row_slice(1, 1, &[f64::NAN])).is_err());
        let bad = ClassifierSpec {
            shrinkage: 1.5,
            ..ClassifierSpec::new(ClassifierKind::Qda)
        };
        assert!(train(&bad, &x, &[0, 1, 0, 1], &names(1)).is_err());
        assert!("svm".parse::<ClassifierKind>().is_err());
        assert_eq!("PLS".parse::<ClassifierKind>().unwrap(), ClassifierKind::Pls);
    }
}

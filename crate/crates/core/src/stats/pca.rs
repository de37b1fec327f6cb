//! Correlation-matrix PCA and the PC1 risk index.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::datamodel::{fe9_matrix, Cohort, FeParam, StandardizationParams};
use crate::error::{Error, Result};
use crate::stats::logistic::fit_logistic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub column_names: Vec<String>,
    pub standardization: StandardizationParams,
    /// `loadings[j]` is the unit loading vector of component j.
    pub loadings: Vec<Vec<f64>>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub variance_shares: Vec<f64>,
}

/// Fits PCA on the standardized columns of `x`.
///
/// Components are ordered by decreasing eigenvalue. PC1's sign makes the
/// loading on `sign_reference` positive (or, without a reference, makes the
/// loadings sum positive); every other component has its largest-magnitude
/// entry positive.
pub fn fit_pca(x: &DMatrix<f64>, names: &[String], sign_reference: Option<usize>) -> Result<PcaModel> {
    let (n, p) = x.shape();
    if names.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: names.len() });
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("PCA needs at least 2 rows, got {n}")));
    }
    if let Some(r) = sign_reference {
        if r >= p {
            return Err(Error::InvalidInput(format!("sign reference column {r} out of range")));
        }
    }
    let standardization = StandardizationParams::fit_named(x, Some(names))?;
    let z = standardization.apply(x)?;
    let mut corr = z.transpose() * &z / (n - 1) as f64;
    // exact symmetry and unit diagonal
    for i in 0..p {
        corr[(i, i)] = 1.0;
        for j in 0..i {
            let v = 0.5 * (corr[(i, j)] + corr[(j, i)]);
            corr[(i, j)] = v;
            corr[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::new(corr);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });

    let mut loadings = Vec::with_capacity(p);
    let mut eigenvalues = Vec::with_capacity(p);
    for (rank, &k) in order.iter().enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let flip = if rank == 0 {
            match sign_reference {
                Some(r) => v[r] < 0.0,
                None => v.iter().sum::<f64>() < 0.0,
            }
        } else {
            let (imax, _) = v
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
            v[imax] < 0.0
        };
        if flip {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        loadings.push(v);
        eigenvalues.push(eig.eigenvalues[k].max(0.0));
    }
    let total: f64 = eigenvalues.iter().sum();
    let variance_shares = eigenvalues.iter().map(|l| l / total).collect();

    Ok(PcaModel {
        column_names: names.to_vec(),
        standardization,
        loadings,
        eigenvalues,
        variance_shares,
    })
}

/// PCA on the nine fracture-associated FE parameters, sign-fixed on Su.
pub fn fit_fe9_pca(cohort: &Cohort) -> Result<PcaModel> {
    let names: Vec<String> = FeParam::fe9().iter().map(|p| p.name()).collect();
    let su = names.iter().position(|n| n == "Su");
    fit_pca(&fe9_matrix(cohort), &names, su)
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.loadings.len()
    }

    /// Component scores, one row per input row.
    pub fn scores(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let z = self.standardization.apply(x)?;
        let p = self.n_components();
        let w = DMatrix::from_fn(p, p, |i, j| self.loadings[j][i]);
        Ok(z * w)
    }

    /// PC1 score of one subject's raw feature values (higher = stronger).
    pub fn risk_index(&self, features: &[f64]) -> Result<f64> {
        let z = self.standardization.apply_row(features)?;
        Ok(z.iter().zip(&self.loadings[0]).map(|(a, b)| a * b).sum())
    }

    pub fn risk_index_matrix(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let z = self.standardization.apply(x)?;
        Ok(z.row_iter()
            .map(|row| row.iter().zip(&self.loadings[0]).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Standardized data rebuilt from all component scores.
    pub fn reconstruct_standardized(&self, scores: &DMatrix<f64>) -> DMatrix<f64> {
        let p = self.n_components();
        let w = DMatrix::from_fn(p, p, |i, j| self.loadings[j][i]);
        scores * w.transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcSignificance {
    pub component: usize,
    pub coefficient: f64,
    pub p_value: f64,
    /// Likelihood-ratio p-value replaces the Wald value when the fit separated.
    pub penalized: bool,
    pub retained: bool,
}

pub const PC_RETAIN_ALPHA: f64 = 0.05;

/// Univariate logistic test of each component against fracture status.
///
/// A component is retained when its p-value is below 0.05. Under separation
/// the Wald test is uninformative, so the likelihood-ratio p-value is used.
pub fn select_significant_pcs(scores: &DMatrix<f64>, labels: &[u8]) -> Result<Vec<PcSignificance>> {
    if scores.nrows() != labels.len() {
        return Err(Error::DimensionMismatch { expected: scores.nrows(), got: labels.len() });
    }
    let positives = labels.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    (0..scores.ncols())
        .map(|j| {
            let col = DMatrix::from_column_slice(scores.nrows(), 1, scores.column(j).as_slice());
            let fit = fit_logistic(labels, &col, 0.0)?;
            let p_value = if fit.penalized { fit.lrt_p_value(labels) } else { fit.p_values[1] };
            Ok(PcSignificance {
                component: j + 1,
                coefficient: fit.coefficients[0],
                p_value,
                penalized: fit.penalized,
                retained: p_value < PC_RETAIN_ALPHA,
            })
        })
        .collect()
}

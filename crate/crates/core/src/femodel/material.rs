//! Density-dependent elastoplastic material and J2 radial return.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ash density (g/cm³) from calibrated QCT density (g/cm³).
pub fn ash_density(rho_cha: f64) -> Result<f64> {
    if !(rho_cha >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "calibrated density must be non-negative, got {rho_cha}"
        )));
    }
    Ok(0.0633 + 0.887 * rho_cha)
}

/// Power laws E = c_E·ρ_ash^p_E and σ_y = c_S·ρ_ash^p_S (MPa) plus the
/// post-yield description shared by all elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialModel {
    #[serde(rename = "c_E")]
    pub modulus_coeff: f64,
    #[serde(rename = "p_E")]
    pub modulus_exponent: f64,
    #[serde(rename = "c_S")]
    pub yield_coeff: f64,
    #[serde(rename = "p_S")]
    pub yield_exponent: f64,
    /// Plateau flow stress as a fraction of the yield stress.
    #[serde(rename = "f_plateau")]
    pub plateau_fraction: f64,
    /// Softening slope after the plateau, as a fraction of E (≤ 0).
    #[serde(rename = "f_soft")]
    pub softening_fraction: f64,
    #[serde(rename = "nu")]
    pub poisson_ratio: f64,
    #[serde(rename = "E_min")]
    pub min_modulus: f64,
    /// Equivalent plastic strain held on the plateau before softening starts.
    pub plateau_strain: f64,
    /// Softening stops at this fraction of the yield stress.
    pub residual_fraction: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self {
            modulus_coeff: 14900.0,
            modulus_exponent: 1.86,
            yield_coeff: 102.0,
            yield_exponent: 1.8,
            plateau_fraction: 1.0,
            softening_fraction: -0.05,
            poisson_ratio: 0.3,
            min_modulus: 0.01,
            plateau_strain: 0.01,
            residual_fraction: 0.1,
        }
    }
}

impl MaterialModel {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_E", self.modulus_coeff),
            ("p_E", self.modulus_exponent),
            ("c_S", self.yield_coeff),
            ("p_S", self.yield_exponent),
            ("E_min", self.min_modulus),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5) {
            return Err(Error::InvalidInput(format!(
                "nu must lie in (0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        if !(self.plateau_fraction > 0.0 && self.plateau_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "f_plateau must lie in (0, 1], got {}",
                self.plateau_fraction
            )));
        }
        if !(self.softening_fraction <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "f_soft must be <= 0, got {}",
                self.softening_fraction
            )));
        }
        // softening steeper than 3G would make the local return ill-posed
        let three_g = 1.5 / (1.0 + self.poisson_ratio);
        if -self.softening_fraction >= three_g {
            return Err(Error::InvalidInput("f_soft too steep for a stable return map".into()));
        }
        if !(self.plateau_strain >= 0.0) || !(0.0..=1.0).contains(&self.residual_fraction) {
            return Err(Error::InvalidInput(
                "plateau_strain must be >= 0 and residual_fraction in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Elastic modulus (MPa) of one voxel from its calibrated density.
    pub fn voxel_modulus(&self, rho_cha: f64) -> Result<f64> {
        Ok(self.modulus_coeff * ash_density(rho_cha)?.powf(self.modulus_exponent))
    }

    /// Yield stress (MPa) of one voxel from its calibrated density.
    pub fn voxel_yield_stress(&self, rho_cha: f64) -> Result<f64> {
        Ok(self.yield_coeff * ash_density(rho_cha)?.powf(self.yield_exponent))
    }
}

/// Equivalent stress as a function of equivalent plastic strain κ:
/// σ_y at first yield, a plateau at `plateau_stress` up to `plateau_strain`,
/// then linear softening with slope `softening_modulus` down to `residual_stress`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostYieldCurve {
    pub yield_stress: f64,
    pub plateau_stress: f64,
    pub plateau_strain: f64,
    pub softening_modulus: f64,
    pub residual_stress: f64,
}

impl PostYieldCurve {
    /// Flow stress once plastic flow has started (κ > 0).
    pub fn flow_stress(&self, kappa: f64) -> f64 {
        if kappa <= self.plateau_strain {
            return self.plateau_stress;
        }
        (self.plateau_stress + self.softening_modulus * (kappa - self.plateau_strain))
            .max(self.residual_stress)
    }

    /// Current yield surface radius for a point with history κ.
    pub fn current_yield(&self, kappa: f64) -> f64 {
        if kappa > 0.0 {
            self.flow_stress(kappa)
        } else {
            self.yield_stress
        }
    }

    /// Solves q_trial − 3G·Δκ = flow_stress(κ + Δκ) for Δκ > 0.
    /// Returns Δκ and the hardening slope of the active segment.
    fn solve_increment(&self, q_trial: f64, three_g: f64, kappa: f64) -> (f64, f64) {
        // breakpoints where the slope changes
        let soft_end = if self.softening_modulus < 0.0 {
            self.plateau_strain + (self.plateau_stress - self.residual_stress).max(0.0) / -self.softening_modulus
        } else {
            f64::INFINITY
        };
        // flow stress on each segment is offset + slope·κ'
        let segments = [
            (self.plateau_strain, self.plateau_stress, 0.0),
            (
                soft_end,
                self.plateau_stress - self.softening_modulus * self.plateau_strain,
                self.softening_modulus,
            ),
            (f64::INFINITY, self.residual_stress, 0.0),
        ];
        for (end, offset, slope) in segments {
            if kappa >= end {
                continue;
            }
            let next = (q_trial + three_g * kappa - offset) / (three_g + slope);
            if next <= end {
                return ((next - kappa).max(0.0), slope);
            }
        }
        unreachable!("last segment is unbounded")
    }
}

/// Mechanical properties of one element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementProperties {
    pub modulus: f64,
    pub yield_stress: f64,
    pub poisson_ratio: f64,
    pub post_yield: PostYieldCurve,
}

impl ElementProperties {
    /// Builds element properties from volume-averaged E and σ_y.
    pub fn from_averages(material: &MaterialModel, modulus: f64, yield_stress: f64) -> Self {
        let modulus = modulus.max(material.min_modulus);
        let plateau = material.plateau_fraction * yield_stress;
        Self {
            modulus,
            yield_stress,
            poisson_ratio: material.poisson_ratio,
            post_yield: PostYieldCurve {
                yield_stress,
                plateau_stress: plateau,
                plateau_strain: material.plateau_strain,
                softening_modulus: material.softening_fraction * modulus,
                residual_stress: (material.residual_fraction * yield_stress).min(plateau),
            },
        }
    }

    pub fn shear_modulus(&self) -> f64 {
        self.modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    pub fn bulk_modulus(&self) -> f64 {
        self.modulus / (3.0 * (1.0 - 2.0 * self.poisson_ratio))
    }
}

/// Voigt vectors: stress `[σxx, σyy, σzz, τxy, τyz, τzx]`, strain with
/// engineering shears `[εxx, εyy, εzz, γxy, γyz, γzx]`.
pub type Voigt = [f64; 6];
pub type Tangent = [[f64; 6]; 6];

/// Committed history at one quadrature point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointState {
    pub plastic_strain: Voigt,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ReturnResult {
    pub stress: Voigt,
    pub tangent: Tangent,
    pub state: PointState,
    pub plastic: bool,
}

/// Isotropic elasticity matrix for engineering-shear Voigt strains.
pub fn elastic_tangent(modulus: f64, nu: f64) -> Tangent {
    let lambda = modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let g = modulus / (2.0 * (1.0 + nu));
    let mut d = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            d[i][j] = lambda;
        }
        d[i][i] = lambda + 2.0 * g;
        d[i + 3][i + 3] = g;
    }
    d
}

/// Radial return for von Mises plasticity with isotropic hardening/softening.
///
/// `strain` is the total strain; the return starts from the committed `state`
/// and never mutates it.
pub fn radial_return(props: &ElementProperties, state: &PointState, strain: &Voigt) -> ReturnResult {
    let g = props.shear_modulus();
    let k = props.bulk_modulus();
    let mut elastic = [0.0; 6];
    for i in 0..6 {
        elastic[i] = strain[i] - state.plastic_strain[i];
    }
    let vol = elastic[0] + elastic[1] + elastic[2];
    let mean = k * vol;
    // deviatoric trial stress, tensor shear components
    let mut s = [0.0; 6];
    for i in 0..3 {
        s[i] = 2.0 * g * (elastic[i] - vol / 3.0);
    }
    for i in 3..6 {
        s[i] = g * elastic[i];
    }
    let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2] + 2.0 * (s[3] * s[3] + s[4] * s[4] + s[5] * s[5])).sqrt();
    let q_trial = (1.5f64).sqrt() * norm;
    let yield_now = props.post_yield.current_yield(state.kappa);

    if q_trial <= yield_now || norm == 0.0 {
        let mut stress = s;
        for v in stress.iter_mut().take(3) {
            *v += mean;
        }
        return ReturnResult {
            stress,
            tangent: elastic_tangent(props.modulus, props.poisson_ratio),
            state: *state,
            plastic: false,
        };
    }

    let three_g = 3.0 * g;
    let (dk, slope) = props.post_yield.solve_increment(q_trial, three_g, state.kappa);
    let theta = 1.0 - three_g * dk / q_trial;
    let n: Voigt = s.map(|v| v / norm);

    let mut stress = [0.0; 6];
    for i in 0..6 {
        stress[i] = theta * s[i];
    }
    for v in stress.iter_mut().take(3) {
        *v += mean;
    }

    // plastic strain increment Δκ·(3/2)·s/q along n, engineering shears doubled
    let factor = dk * (1.5f64).sqrt();
    let mut new_state = *state;
    for i in 0..3 {
        new_state.plastic_strain[i] += factor * n[i];
    }
    for i in 3..6 {
        new_state.plastic_strain[i] += 2.0 * factor * n[i];
    }
    new_state.kappa += dk;

    let theta_bar = 1.0 / (1.0 + slope / three_g) - (1.0 - theta);
    let mut c = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = k - 2.0 * g * theta / 3.0;
        }
        c[i][i] = k + 4.0 * g * theta / 3.0;
        c[i + 3][i + 3] = g * theta;
    }
    for i in 0..6 {
        for j in 0..6 {
            c[i][j] -= 2.0 * g * theta_bar * n[i] * n[j];
        }
    }

    ReturnResult {
        stress,
        tangent: c,
        state: new_state,
        plastic: true,
    }
}

/// von Mises equivalent stress of a Voigt stress vector.
pub fn von_mises(stress: &Voigt) -> f64 {
    let [sx, sy, sz, txy, tyz, tzx] = *stress;
    (0.5 * ((sx - sy).powi(2) + (sy - sz).powi(2) + (sz - sx).powi(2)) + 3.0 * (txy * txy + tyz * tyz + tzx * tzx))
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props(f_soft: f64) -> ElementProperties {
        let m = MaterialModel {
            softening_fraction: f_soft,
            ..MaterialModel::default()
        };
        ElementProperties::from_averages(&m, 1000.0, 10.0)
    }

    #[test]
    fn ash_density_formula() {
        assert_eq!(ash_density(0.0).unwrap(), 0.0633);
        assert!((ash_density(1.0).unwrap() - 0.9503).abs() < 1e-12);
        assert!((ash_density(0.5).unwrap() - 0.5068).abs() < 1e-12);
        assert!(ash_density(-0.01).is_err());
    }

    #[test]
    fn elastic_below_yield() {
        let p = props(-0.05);
        let r = radial_return(&p, &PointState::default(), &[0.001, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(!r.plastic);
        assert!(von_mises(&r.stress) < 10.0);
    }

    #[test]
    fn return_lands_on_flow_surface() {
        for f_soft in [0.0, -0.05] {
            let p = props(f_soft);
            let mut state = PointState::default();
            for step in 1..=40 {
                let e = 0.002 * step as f64;
                let strain = [e, -0.3 * e, -0.3 * e, 0.2 * e, 0.0, 0.0];
                let r = radial_return(&p, &state, &strain);
                if r.plastic {
                    let target = p.post_yield.flow_stress(r.state.kappa);
                    assert!((von_mises(&r.stress) - target).abs() < 1e-9 * target.max(1.0));
                }
                state = r.state;
            }
            assert!(state.kappa > p.post_yield.plateau_strain);
        }
    }

    #[test]
    fn consistent_tangent_matches_finite_difference() {
        let p = props(-0.05);
        let state = PointState {
            plastic_strain: [0.004, -0.002, -0.002, 0.0, 0.0, 0.0],
            kappa: 0.013,
        };
        let strain = [0.03, -0.004, -0.006, 0.002, 0.001, -0.001];
        let base = radial_return(&p, &state, &strain);
        assert!(base.plastic);
        let h = 1e-7;
        for j in 0..6 {
            let mut e = strain;
            e[j] += h;
            let plus = radial_return(&p, &state, &e);
            e[j] -= 2.0 * h;
            let minus = radial_return(&p, &state, &e);
            for i in 0..6 {
                let fd = (plus.stress[i] - minus.stress[i]) / (2.0 * h);
                assert!((fd - base.tangent[i][j]).abs() < 1e-3 * 1000.0, "C[{i}][{j}] {fd} vs {}", base.tangent[i][j]);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_constants() {
        assert!(MaterialModel::default().validate().is_ok());
        let bad = MaterialModel {
            poisson_ratio: 0.5,
            ..MaterialModel::default()
        };
        assert!(bad.validate().is_err());
        let bad = MaterialModel {
            softening_fraction: 0.1,
            ..MaterialModel::default()
        };
        assert!(bad.validate().is_err());
    }
}

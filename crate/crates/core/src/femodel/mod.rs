//! Nonlinear voxel finite-element surrogate.
//!
//! A density phantom is meshed with 8-node bricks, loaded by incremental
//! face displacement under four load cases, and reduced to yield load,
//! ultimate load and energy-to-failure per case.

pub mod grid;
pub mod hex8;
pub mod material;
pub mod solver;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::{FeParam, FeParameterSet, LoadCondition, Measure};
use crate::error::{Error, Result};

pub use grid::{element_properties, Mesh, VoxelGrid};
pub use material::{ash_density, ElementProperties, MaterialModel, PostYieldCurve};
pub use solver::{
    largest_cluster, solve_load_case, CurveSample, End, Face, FaceConstraint, ForceDisplacementCurve, LoadCase,
    NoYieldPolicy, PinConstraint, SolveControl,
};

/// Material and solve settings read from one JSON document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeConfig {
    pub material: MaterialModel,
    pub control: SolveControl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldPoint {
    pub force: f64,
    pub increment: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UltimatePoint {
    pub force: f64,
    pub increment: usize,
    /// The maximum is the last sample, so no post-peak drop was observed.
    pub peak_at_end: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeResult {
    pub yield_load: f64,
    pub ultimate_load: f64,
    pub energy: f64,
    pub converged: bool,
    pub increments: usize,
    pub yield_detected: bool,
    pub peak_at_end: bool,
}

/// Force at the first increment whose largest yielded cluster reaches
/// `cluster_size`; `None` when it never does.
pub fn detect_yield_load(curve: &ForceDisplacementCurve, cluster_size: usize) -> Option<YieldPoint> {
    curve
        .samples
        .iter()
        .enumerate()
        .find(|(_, s)| s.largest_cluster >= cluster_size)
        .map(|(increment, s)| YieldPoint {
            force: s.force,
            increment,
        })
}

/// Largest recorded force; ties go to the earliest increment.
pub fn ultimate_load(curve: &ForceDisplacementCurve) -> Result<UltimatePoint> {
    if curve.samples.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "curve needs at least 2 samples, got {}",
            curve.samples.len()
        )));
    }
    let mut best = 0;
    for (i, s) in curve.samples.iter().enumerate() {
        if s.force > curve.samples[best].force {
            best = i;
        }
    }
    Ok(UltimatePoint {
        force: curve.samples[best].force,
        increment: best,
        peak_at_end: best + 1 == curve.samples.len(),
    })
}

/// Trapezoidal area under the curve from the origin to the ultimate sample.
pub fn energy_to_failure(curve: &ForceDisplacementCurve) -> Result<f64> {
    let peak = ultimate_load(curve)?;
    Ok(curve.samples[..=peak.increment]
        .windows(2)
        .map(|w| 0.5 * (w[0].force + w[1].force) * (w[1].displacement - w[0].displacement))
        .sum())
}

pub fn analyze_curve(curve: &ForceDisplacementCurve, control: &SolveControl) -> Result<FeResult> {
    let ultimate = ultimate_load(curve)?;
    let energy = energy_to_failure(curve)?;
    let yield_point = detect_yield_load(curve, control.yield_cluster);
    let yield_load = match (yield_point, control.no_yield) {
        (Some(y), _) => y.force,
        (None, NoYieldPolicy::UseUltimate) => ultimate.force,
        (None, NoYieldPolicy::Error) => {
            return Err(Error::Degenerate("no yield detected".into()));
        }
    };
    Ok(FeResult {
        yield_load,
        ultimate_load: ultimate.force,
        energy: energy.max(0.0),
        converged: curve.converged,
        increments: curve.increments(),
        yield_detected: yield_point.is_some(),
        peak_at_end: ultimate.peak_at_end,
    })
}

pub fn run_load_case(
    grid: &VoxelGrid,
    material: &MaterialModel,
    condition: LoadCondition,
    control: &SolveControl,
) -> Result<(ForceDisplacementCurve, FeResult)> {
    let case = LoadCase::standard(condition);
    let curve = solve_load_case(grid, material, &case, control)?;
    let result = analyze_curve(&curve, control)?;
    Ok((curve, result))
}

/// Results for all four load cases, in stance/posterior/posterolateral/lateral order.
pub fn run_all_cases(
    grid: &VoxelGrid,
    material: &MaterialModel,
    control: &SolveControl,
) -> Result<Vec<(LoadCondition, FeResult)>> {
    LoadCondition::ALL
        .par_iter()
        .map(|&condition| {
            run_load_case(grid, material, condition, control)
                .map(|(_, r)| (condition, r))
                .map_err(|e| Error::LoadCase {
                    case: condition.name().to_string(),
                    source: Box::new(e),
                })
        })
        .collect()
}

/// All twelve FE parameters for one phantom.
pub fn compute_fe_parameters(grid: &VoxelGrid, material: &MaterialModel, control: &SolveControl) -> Result<FeParameterSet> {
    let results = run_all_cases(grid, material, control)?;
    let mut set = FeParameterSet::from_array([0.0; 12]);
    for (condition, r) in results {
        set.set(FeParam { condition, measure: Measure::Yield }, r.yield_load);
        set.set(FeParam { condition, measure: Measure::Ultimate }, r.ultimate_load);
        set.set(FeParam { condition, measure: Measure::Energy }, r.energy);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yield_is_first_cluster_crossing() {
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0), (0.1, 100.0), (0.2, 180.0), (0.3, 200.0)], &[0, 4, 14, 15]);
        assert_eq!(detect_yield_load(&c, 15).unwrap().force, 200.0);
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0), (0.1, 500.0)], &[0, 20]);
        assert_eq!(detect_yield_load(&c, 15).unwrap().force, 500.0);
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0), (0.1, 50.0)], &[0, 0]);
        assert!(detect_yield_load(&c, 15).is_none());
    }

    #[test]
    fn ultimate_examples() {
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0), (1.0, 10.0), (2.0, 20.0), (3.0, 15.0)], &[]);
        let u = ultimate_load(&c).unwrap();
        assert_eq!((u.force, u.peak_at_end), (20.0, false));
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0), (1.0, 5.0), (2.0, 9.0)], &[]);
        let u = ultimate_load(&c).unwrap();
        assert_eq!((u.force, u.peak_at_end), (9.0, true));
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0), (1.0, 20.0), (2.0, 20.0), (3.0, 10.0)], &[]);
        assert_eq!(ultimate_load(&c).unwrap().increment, 1);
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0)], &[]);
        assert!(ultimate_load(&c).is_err());
    }

    #[test]
    fn energy_examples() {
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0), (1.0, 10.0), (2.0, 20.0), (3.0, 5.0)], &[]);
        assert_eq!(energy_to_failure(&c).unwrap(), 20.0);
        let pts: Vec<(f64, f64)> = (0..=10).map(|i| (0.3 * i as f64, 7.0 * 0.3 * i as f64)).collect();
        let c = ForceDisplacementCurve::from_points(&pts, &[]);
        assert!((energy_to_failure(&c).unwrap() - 0.5 * 21.0 * 3.0).abs() < 1e-9);
    }

    #[test]
    fn missing_yield_policy() {
        let c = ForceDisplacementCurve::from_points(&[(0.0, 0.0), (1.0, 10.0)], &[0, 0]);
        let r = analyze_curve(&c, &SolveControl::default()).unwrap();
        assert!(!r.yield_detected);
        assert_eq!(r.yield_load, r.ultimate_load);
        let strict = SolveControl {
            no_yield: NoYieldPolicy::Error,
            ..SolveControl::default()
        };
        assert!(analyze_curve(&c, &strict).is_err());
    }

    #[test]
    fn config_json_uses_short_names() {
        let cfg: FeConfig = serde_json::from_str(r#"{"material": {"c_E": 10000, "nu": 0.25}, "control": {"increment": 0.05}}"#).unwrap();
        assert_eq!(cfg.material.modulus_coeff, 10000.0);
        assert_eq!(cfg.material.yield_coeff, 102.0);
        assert_eq!(cfg.control.increment, 0.05);
        assert_eq!(cfg.control.max_increments, 200);
        assert!(serde_json::from_str::<FeConfig>(r#"{"material": {"bogus": 1}}"#).is_err());
    }
}

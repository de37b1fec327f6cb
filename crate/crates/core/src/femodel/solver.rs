//! Displacement-controlled incremental solve with Newton iterations and a
//! Jacobi-preconditioned conjugate-gradient linear solver.

use serde::{Deserialize, Serialize};

use crate::datamodel::LoadCondition;
use crate::error::{Error, Result};
use crate::femodel::grid::{Mesh, VoxelGrid, LOCAL_CORNERS};
use crate::femodel::hex8::{add_btdb, Hex8};
use crate::femodel::material::{radial_return, ElementProperties, MaterialModel, PointState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    fn axis_and_end(self) -> (usize, End) {
        match self {
            Face::XMin => (0, End::Min),
            Face::XMax => (0, End::Max),
            Face::YMin => (1, End::Min),
            Face::YMax => (1, End::Max),
            Face::ZMin => (2, End::Min),
            Face::ZMax => (2, End::Max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Min,
    Max,
}

/// Fixes the flagged displacement components of every node on a face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceConstraint {
    pub face: Face,
    pub fixed: [bool; 3],
}

/// Fixes the flagged components of a single corner node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinConstraint {
    pub corner: [End; 3],
    pub fixed: [bool; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub name: String,
    pub loaded_face: Face,
    /// Unit direction of the imposed face displacement. Only its nonzero
    /// components are prescribed, so transverse motion stays free.
    pub direction: [f64; 3],
    pub constraints: Vec<FaceConstraint>,
    pub pins: Vec<PinConstraint>,
    /// Rotation of the phantom about z (degrees) before meshing.
    pub rotation_deg: f64,
}

impl LoadCase {
    /// The four standard cases. Stance fixes the bottom face fully; the fall
    /// cases fix the bottom only along z, pin one corner, and stop rotation
    /// about z at the neighbouring corner. Falls differ by phantom rotation.
    pub fn standard(condition: LoadCondition) -> Self {
        let down = [0.0, 0.0, -1.0];
        match condition {
            LoadCondition::Stance => Self {
                name: condition.name().to_string(),
                loaded_face: Face::ZMax,
                direction: down,
                constraints: vec![FaceConstraint {
                    face: Face::ZMin,
                    fixed: [true; 3],
                }],
                pins: Vec::new(),
                rotation_deg: 0.0,
            },
            _ => {
                let rotation_deg = match condition {
                    LoadCondition::Posterior => 0.0,
                    LoadCondition::Posterolateral => 45.0,
                    _ => 90.0,
                };
                Self {
                    name: condition.name().to_string(),
                    rotation_deg,
                    ..Self::fall(down)
                }
            }
        }
    }

    /// Fall-type supports with an arbitrary loading direction on the top face.
    pub fn fall(direction: [f64; 3]) -> Self {
        Self {
            name: "fall".into(),
            loaded_face: Face::ZMax,
            direction,
            constraints: vec![FaceConstraint {
                face: Face::ZMin,
                fixed: [false, false, true],
            }],
            pins: vec![
                PinConstraint {
                    corner: [End::Min, End::Min, End::Min],
                    fixed: [true; 3],
                },
                PinConstraint {
                    corner: [End::Max, End::Min, End::Min],
                    fixed: [false, true, false],
                },
            ],
            rotation_deg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() < 1e-9) {
            return Err(Error::InvalidInput(format!(
                "load direction must be unit length, got |d| = {norm}"
            )));
        }
        if self.constraints.is_empty() {
            return Err(Error::InvalidInput("load case needs at least one constrained face".into()));
        }
        if self.constraints.iter().any(|c| c.face == self.loaded_face) {
            return Err(Error::InvalidInput("the loaded face cannot also be constrained".into()));
        }
        if !self.rotation_deg.is_finite() {
            return Err(Error::InvalidInput("rotation must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoYieldPolicy {
    /// Use the ultimate load as the yield load and flag it.
    UseUltimate,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveControl {
    /// Displacement step per increment (mm).
    pub increment: f64,
    pub max_increments: usize,
    /// Relative residual tolerance of the linear solver.
    pub tolerance: f64,
    /// Stop once force falls below this fraction of the running peak.
    pub stop_fraction: f64,
    /// Equilibrium tolerance relative to the reaction force norm.
    pub equilibrium_tolerance: f64,
    pub max_newton_iterations: usize,
    /// Element edge (mm); defaults to the voxel spacing.
    pub element_size: Option<f64>,
    /// Yielded-cluster size that defines the yield load.
    pub yield_cluster: usize,
    pub no_yield: NoYieldPolicy,
}

impl Default for SolveControl {
    fn default() -> Self {
        Self {
            increment: 0.1,
            max_increments: 200,
            tolerance: 1e-8,
            stop_fraction: 0.8,
            equilibrium_tolerance: 1e-6,
            max_newton_iterations: 60,
            element_size: None,
            yield_cluster: 15,
            no_yield: NoYieldPolicy::UseUltimate,
        }
    }
}

impl SolveControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.increment > 0.0) || !self.increment.is_finite() {
            return Err(Error::InvalidInput(format!("increment must be positive, got {}", self.increment)));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) || !(self.equilibrium_tolerance > 0.0) {
            return Err(Error::InvalidInput("tolerances must lie in (0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.stop_fraction) {
            return Err(Error::InvalidInput(format!(
                "stop_fraction must lie in [0, 1), got {}",
                self.stop_fraction
            )));
        }
        if self.max_newton_iterations == 0 || self.yield_cluster == 0 {
            return Err(Error::InvalidInput("iteration and cluster limits must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub displacement: f64,
    pub force: f64,
    pub yielded_elements: usize,
    pub largest_cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceDisplacementCurve {
    pub samples: Vec<CurveSample>,
    /// False when equilibrium failed after yielding and the run was cut short.
    pub converged: bool,
}

impl ForceDisplacementCurve {
    pub fn from_points(points: &[(f64, f64)], clusters: &[usize]) -> Self {
        Self {
            samples: points
                .iter()
                .zip(clusters.iter().chain(std::iter::repeat(&0)))
                .map(|(&(d, f), &c)| CurveSample {
                    displacement: d,
                    force: f,
                    yielded_elements: c,
                    largest_cluster: c,
                })
                .collect(),
            converged: true,
        }
    }

    pub fn increments(&self) -> usize {
        self.samples.len().saturating_sub(1)
    }
}

/// Nodal 3×3 blocks for each of the 27 neighbour slots of every node.
struct BlockMatrix {
    blocks: Vec<[f64; 9]>,
    neighbours: Vec<[u32; 27]>,
}

const NO_NODE: u32 = u32::MAX;

impl BlockMatrix {
    fn new(mesh: &Mesh) -> Self {
        let (nx, ny, nz) = mesh.node_dims();
        let count = mesh.node_count();
        let mut neighbours = vec![[NO_NODE; 27]; count];
        for (n, slots) in neighbours.iter_mut().enumerate() {
            let (i, j, k) = mesh.node_coords(n);
            for (s, slot) in slots.iter_mut().enumerate() {
                let (di, dj, dk) = (s % 3, (s / 3) % 3, s / 9);
                let (a, b, c) = (i + di, j + dj, k + dk);
                if a >= 1 && b >= 1 && c >= 1 && a <= nx && b <= ny && c <= nz {
                    *slot = mesh.node_index(a - 1, b - 1, c - 1) as u32;
                }
            }
        }
        Self {
            blocks: vec![[0.0; 9]; count * 27],
            neighbours,
        }
    }

    fn clear(&mut self) {
        self.blocks.iter_mut().for_each(|b| *b = [0.0; 9]);
    }

    fn add_element(&mut self, nodes: &[usize; 8], ke: &[[f64; 24]], scale: f64) {
        for a in 0..8 {
            for b in 0..8 {
                let s = slot(a, b);
                let block = &mut self.blocks[nodes[a] * 27 + s];
                for r in 0..3 {
                    for c in 0..3 {
                        block[3 * r + c] += scale * ke[3 * a + r][3 * b + c];
                    }
                }
            }
        }
    }

    /// y = K x on free dofs; fixed rows are zeroed and x is zero there.
    fn apply(&self, x: &[f64], fixed: &[bool], y: &mut [f64]) {
        for (n, slots) in self.neighbours.iter().enumerate() {
            let mut acc = [0.0; 3];
            for (s, &m) in slots.iter().enumerate() {
                if m == NO_NODE {
                    continue;
                }
                let m = m as usize;
                let block = &self.blocks[n * 27 + s];
                for r in 0..3 {
                    acc[r] += block[3 * r] * x[3 * m] + block[3 * r + 1] * x[3 * m + 1] + block[3 * r + 2] * x[3 * m + 2];
                }
            }
            for r in 0..3 {
                y[3 * n + r] = if fixed[3 * n + r] { 0.0 } else { acc[r] };
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.neighbours.len() * 3];
        for n in 0..self.neighbours.len() {
            let block = &self.blocks[n * 27 + 13];
            for r in 0..3 {
                d[3 * n + r] = block[4 * r];
            }
        }
        d
    }
}

fn slot(a: usize, b: usize) -> usize {
    let (ax, ay, az) = LOCAL_CORNERS[a];
    let (bx, by, bz) = LOCAL_CORNERS[b];
    (bx + 1 - ax) + 3 * (by + 1 - ay) + 9 * (bz + 1 - az)
}

enum CgOutcome {
    Converged(Vec<f64>),
    Indefinite,
    Stalled,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn pcg(k: &BlockMatrix, fixed: &[bool], rhs: &[f64], tol: f64) -> CgOutcome {
    let n = rhs.len();
    let diag = k.diagonal();
    let inv: Vec<f64> = diag
        .iter()
        .zip(fixed)
        .map(|(&d, &f)| if f || d <= 0.0 { 0.0 } else { 1.0 / d })
        .collect();
    let mut x = vec![0.0; n];
    let mut r: Vec<f64> = rhs.iter().zip(fixed).map(|(&v, &f)| if f { 0.0 } else { v }).collect();
    let target = tol * dot(&r, &r).sqrt();
    if target == 0.0 {
        return CgOutcome::Converged(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut kp = vec![0.0; n];
    for _ in 0..(10 * n).max(100) {
        k.apply(&p, fixed, &mut kp);
        let curvature = dot(&p, &kp);
        if !(curvature > 0.0) {
            return CgOutcome::Indefinite;
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * kp[i];
        }
        if dot(&r, &r).sqrt() <= target {
            return CgOutcome::Converged(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome::Stalled
}

/// Everything about a mesh and its supports that stays fixed during a run.
struct Model {
    mesh: Mesh,
    element: Hex8,
    props: Vec<ElementProperties>,
    /// Prescribed displacement per dof as a multiple of the imposed magnitude.
    prescribed: Vec<Option<f64>>,
    fixed: Vec<bool>,
    /// (dof, direction component) on the loaded face.
    loaded: Vec<(usize, f64)>,
    order: Vec<usize>,
}

impl Model {
    fn build(grid: &VoxelGrid, material: &MaterialModel, case: &LoadCase, control: &SolveControl) -> Result<Self> {
        let grid = grid.rotated_about_z(case.rotation_deg);
        let mesh = Mesh::new(&grid, control.element_size)?;
        let props = (0..mesh.element_count())
            .map(|e| mesh.element_properties(&grid, e, material))
            .collect::<Result<Vec<_>>>()?;
        let element = Hex8::new(mesh.size, material.poisson_ratio);

        let (nx, ny, nz) = mesh.node_dims();
        let last = [nx - 1, ny - 1, nz - 1];
        let at_end = |coord: usize, axis: usize, end: End| match end {
            End::Min => coord == 0,
            End::Max => coord == last[axis],
        };
        let ndof = 3 * mesh.node_count();
        let mut prescribed = vec![None; ndof];
        for n in 0..mesh.node_count() {
            let (i, j, k) = mesh.node_coords(n);
            let c = [i, j, k];
            for fc in &case.constraints {
                let (axis, end) = fc.face.axis_and_end();
                if at_end(c[axis], axis, end) {
                    for d in 0..3 {
                        if fc.fixed[d] {
                            prescribed[3 * n + d] = Some(0.0);
                        }
                    }
                }
            }
            for pin in &case.pins {
                if (0..3).all(|a| at_end(c[a], a, pin.corner[a])) {
                    for d in 0..3 {
                        if pin.fixed[d] {
                            prescribed[3 * n + d] = Some(0.0);
                        }
                    }
                }
            }
        }
        let mut loaded = Vec::new();
        let (axis, end) = case.loaded_face.axis_and_end();
        for n in 0..mesh.node_count() {
            let (i, j, k) = mesh.node_coords(n);
            if at_end([i, j, k][axis], axis, end) {
                for d in 0..3 {
                    if case.direction[d] != 0.0 {
                        prescribed[3 * n + d] = Some(case.direction[d]);
                        loaded.push((3 * n + d, case.direction[d]));
                    }
                }
            }
        }
        let fixed = prescribed.iter().map(Option::is_some).collect();
        let order = (0..mesh.element_count()).collect();
        Ok(Self {
            mesh,
            element,
            props,
            prescribed,
            fixed,
            loaded,
            order,
        })
    }

    fn gather(&self, e: usize, u: &[f64]) -> ([usize; 8], [f64; 24]) {
        let nodes = self.mesh.element_nodes(e);
        let mut ue = [0.0; 24];
        for (a, &n) in nodes.iter().enumerate() {
            ue[3 * a..3 * a + 3].copy_from_slice(&u[3 * n..3 * n + 3]);
        }
        (nodes, ue)
    }

    fn assemble_elastic(&self, k: &mut BlockMatrix) {
        k.clear();
        for &e in &self.order {
            k.add_element(&self.mesh.element_nodes(e), &self.element.unit_stiffness, self.props[e].modulus);
        }
    }

    /// Internal forces and trial states from the committed history. When
    /// `tangent` is given, the consistent tangent is assembled into it.
    fn evaluate(
        &self,
        u: &[f64],
        committed: &[PointState],
        trial: &mut [PointState],
        mut tangent: Option<&mut BlockMatrix>,
    ) -> Vec<f64> {
        let mut f = vec![0.0; u.len()];
        if let Some(k) = tangent.as_deref_mut() {
            k.clear();
        }
        let mut ke = vec![[0.0; 24]; 24];
        for &e in &self.order {
            let (nodes, ue) = self.gather(e, u);
            let props = &self.props[e];
            let mut fe = [0.0; 24];
            let mut results = Vec::with_capacity(8);
            for q in 0..8 {
                let strain = self.element.strain(q, &ue);
                let r = radial_return(props, &committed[8 * e + q], &strain);
                self.element.add_internal_force(q, &r.stress, &mut fe);
                trial[8 * e + q] = r.state;
                results.push(r);
            }
            for (a, &n) in nodes.iter().enumerate() {
                for d in 0..3 {
                    f[3 * n + d] += fe[3 * a + d];
                }
            }
            if let Some(k) = tangent.as_deref_mut() {
                if results.iter().all(|r| !r.plastic) {
                    k.add_element(&nodes, &self.element.unit_stiffness, props.modulus);
                } else {
                    ke.iter_mut().for_each(|row| *row = [0.0; 24]);
                    for (q, r) in results.iter().enumerate() {
                        add_btdb(&mut ke, &self.element.b[q], &r.tangent, self.element.weight);
                    }
                    k.add_element(&nodes, &ke, 1.0);
                }
            }
        }
        f
    }

    fn reaction(&self, f: &[f64]) -> f64 {
        self.loaded.iter().map(|&(dof, c)| f[dof] * c).sum()
    }

    fn yielded(&self, states: &[PointState]) -> Vec<bool> {
        (0..self.mesh.element_count())
            .map(|e| states[8 * e..8 * e + 8].iter().any(|s| s.kappa > 0.0))
            .collect()
    }
}

/// Size of the largest face-connected group of flagged elements.
pub fn largest_cluster(flags: &[bool], dims: (usize, usize, usize)) -> usize {
    let (ex, ey, ez) = dims;
    let mut seen = vec![false; flags.len()];
    let mut best = 0;
    let mut stack = Vec::new();
    for start in 0..flags.len() {
        if !flags[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(e) = stack.pop() {
            size += 1;
            let (i, j, k) = (e % ex, (e / ex) % ey, e / (ex * ey));
            let mut visit = |n: usize| {
                if flags[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(e - 1);
            }
            if i + 1 < ex {
                visit(e + 1);
            }
            if j > 0 {
                visit(e - ex);
            }
            if j + 1 < ey {
                visit(e + ex);
            }
            if k > 0 {
                visit(e - ex * ey);
            }
            if k + 1 < ez {
                visit(e + ex * ey);
            }
        }
        best = best.max(size);
    }
    best
}

/// Runs one load case to completion and records the force–displacement curve.
pub fn solve_load_case(
    grid: &VoxelGrid,
    material: &MaterialModel,
    case: &LoadCase,
    control: &SolveControl,
) -> Result<ForceDisplacementCurve> {
    let model = build_model(grid, material, case, control)?;
    run(&model, control)
}

fn build_model(grid: &VoxelGrid, material: &MaterialModel, case: &LoadCase, control: &SolveControl) -> Result<Model> {
    grid.validate()?;
    material.validate()?;
    case.validate()?;
    control.validate()?;
    Model::build(grid, material, case, control)
}

fn run(model: &Model, control: &SolveControl) -> Result<ForceDisplacementCurve> {
    let ndof = model.fixed.len();
    let npts = 8 * model.mesh.element_count();
    let mut committed = vec![PointState::default(); npts];
    let mut trial = committed.clone();
    let mut u = vec![0.0; ndof];
    let mut elastic = BlockMatrix::new(&model.mesh);
    model.assemble_elastic(&mut elastic);
    let mut tangent = BlockMatrix::new(&model.mesh);

    let mut curve = ForceDisplacementCurve {
        samples: vec![CurveSample {
            displacement: 0.0,
            force: 0.0,
            yielded_elements: 0,
            largest_cluster: 0,
        }],
        converged: true,
    };
    let mut peak = 0.0f64;
    let dims = (model.mesh.ex, model.mesh.ey, model.mesh.ez);

    let residual_of = |f: &[f64]| -> (Vec<f64>, f64, f64) {
        let mut reaction = 0.0;
        let mut residual = vec![0.0; f.len()];
        for (i, (&v, &fx)) in f.iter().zip(&model.fixed).enumerate() {
            if fx {
                reaction += v * v;
            } else {
                residual[i] = -v;
            }
        }
        let norm = dot(&residual, &residual).sqrt();
        (residual, norm, reaction.sqrt())
    };

    for step in 1..=control.max_increments {
        let d = step as f64 * control.increment;
        // elastic predictor: spread the prescribed jump through the body
        let mut jump = vec![0.0; ndof];
        for (dof, p) in model.prescribed.iter().enumerate() {
            if let Some(c) = p {
                jump[dof] = c * d - u[dof];
            }
        }
        let mut load = vec![0.0; ndof];
        elastic.apply(&jump, &model.fixed, &mut load);
        load.iter_mut().for_each(|v| *v = -*v);
        let predictor = match pcg(&elastic, &model.fixed, &load, control.tolerance) {
            CgOutcome::Converged(x) => x,
            _ => return Err(Error::NoConvergence(format!("linear solve failed at increment {step}"))),
        };
        let mut trial_u: Vec<f64> = u.iter().zip(&jump).zip(&predictor).map(|((a, b), c)| a + b + c).collect();

        let mut converged_force = None;
        for _ in 0..control.max_newton_iterations {
            let f = model.evaluate(&trial_u, &committed, &mut trial, Some(&mut tangent));
            let (residual, res_norm, reaction_norm) = residual_of(&f);
            if !res_norm.is_finite() {
                return Err(Error::NonFinite(format!("residual at increment {step}")));
            }
            if res_norm <= control.equilibrium_tolerance * reaction_norm.max(1e-12) {
                converged_force = Some(f);
                break;
            }
            let du = match pcg(&tangent, &model.fixed, &residual, control.tolerance) {
                CgOutcome::Converged(du) => du,
                // softening makes the tangent indefinite; fall back to the elastic operator
                CgOutcome::Indefinite | CgOutcome::Stalled => match pcg(&elastic, &model.fixed, &residual, control.tolerance) {
                    CgOutcome::Converged(du) => du,
                    _ => {
                        return Err(Error::NoConvergence(format!(
                            "linear solve failed at increment {step}"
                        )))
                    }
                },
            };
            // backtrack while the full step makes the residual worse
            let mut alpha = 1.0;
            let mut candidate = trial_u.clone();
            for _ in 0..6 {
                for ((c, x), dx) in candidate.iter_mut().zip(&trial_u).zip(&du) {
                    *c = x + alpha * dx;
                }
                let f = model.evaluate(&candidate, &committed, &mut trial, None);
                if residual_of(&f).1 < res_norm {
                    break;
                }
                alpha *= 0.5;
            }
            trial_u = candidate;
        }
        let Some(f) = converged_force else {
            if curve.samples.iter().any(|s| s.yielded_elements > 0) || trial.iter().any(|s| s.kappa > 0.0) {
                curve.converged = false;
                break;
            }
            return Err(Error::NoConvergence(format!(
                "equilibrium not reached at increment {step}"
            )));
        };
        committed.copy_from_slice(&trial);
        u = trial_u;
        let force = model.reaction(&f);
        if !force.is_finite() {
            return Err(Error::NonFinite(format!("reaction force at increment {step}")));
        }
        let flags = model.yielded(&committed);
        curve.samples.push(CurveSample {
            displacement: d,
            force,
            yielded_elements: flags.iter().filter(|&&y| y).count(),
            largest_cluster: largest_cluster(&flags, dims),
        });
        peak = peak.max(force);
        if peak > 0.0 && force < control.stop_fraction * peak {
            break;
        }
    }
    Ok(curve)
}

/// Initial elastic stiffness for a case, used by tests and diagnostics.
pub fn elastic_stiffness(grid: &VoxelGrid, material: &MaterialModel, case: &LoadCase, control: &SolveControl) -> Result<f64> {
    let elastic_only = MaterialModel {
        yield_coeff: material.yield_coeff * 1e12,
        ..*material
    };
    let control = SolveControl {
        max_increments: 1,
        ..*control
    };
    let curve = solve_load_case(grid, &elastic_only, case, &control)?;
    Ok(curve.samples[1].force / curve.samples[1].displacement)
}

#[cfg(test)]
pub(crate) fn solve_reversed(
    grid: &VoxelGrid,
    material: &MaterialModel,
    case: &LoadCase,
    control: &SolveControl,
) -> Result<ForceDisplacementCurve> {
    let mut model = build_model(grid, material, case, control)?;
    model.order.reverse();
    run(&model, control)
}

//! Voxel density grids and the hexahedral mesh laid over them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::femodel::material::{ElementProperties, MaterialModel};

/// Calibrated density on a regular grid. Index order is x fastest, z slowest:
/// `i + nx·(j + ny·k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelGrid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Voxel edge length in mm.
    pub spacing: f64,
    pub rho_cha: Vec<f64>,
}

impl VoxelGrid {
    pub fn new(dims: (usize, usize, usize), spacing: f64, rho_cha: Vec<f64>) -> Result<Self> {
        let grid = Self {
            nx: dims.0,
            ny: dims.1,
            nz: dims.2,
            spacing,
            rho_cha,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn uniform(dims: (usize, usize, usize), spacing: f64, rho: f64) -> Result<Self> {
        Self::new(dims, spacing, vec![rho; dims.0 * dims.1 * dims.2])
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::InvalidInput(format!(
                "grid dims must be >= 1, got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::InvalidInput(format!("spacing must be positive, got {}", self.spacing)));
        }
        if self.rho_cha.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: self.rho_cha.len(),
            });
        }
        if let Some(v) = self.rho_cha.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("density must be finite and >= 0, got {v}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.rho_cha[self.index(i, j, k)]
    }

    /// Parses `nx ny nz spacing_mm` followed by nx·ny·nz densities.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut dim = |name: &str| -> Result<usize> {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::InvalidInput(format!("grid header is missing {name}")))?;
            tok.parse()
                .map_err(|_| Error::InvalidInput(format!("grid header {name} is not an integer: `{tok}`")))
        };
        let dims = (dim("nx")?, dim("ny")?, dim("nz")?);
        let tok = tokens
            .next()
            .ok_or_else(|| Error::InvalidInput("grid header is missing spacing".into()))?;
        let spacing: f64 = tok
            .parse()
            .map_err(|_| Error::InvalidInput(format!("grid spacing is not numeric: `{tok}`")))?;
        let rho = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("grid density is not numeric: `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, spacing, rho)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(format!("grid file not found: {}", path.display())),
            _ => Error::io(path, e),
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.nx, self.ny, self.nz, self.spacing);
        for k in 0..self.nz {
            for j in 0..self.ny {
                let row: Vec<String> = (0..self.nx).map(|i| self.at(i, j, k).to_string()).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    /// A neck-like test phantom: denser shell, a weaker band at mid-height,
    /// and a density gradient along x so the load cases see an asymmetric
    /// section. Scales with `density`.
    pub fn phantom(dims: (usize, usize, usize), spacing: f64, density: f64) -> Result<Self> {
        let (nx, ny, nz) = dims;
        let mut rho = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            let z = (k as f64 + 0.5) / nz as f64;
            let band = 1.0 - 0.35 * (-((z - 0.5) / 0.12).powi(2)).exp();
            for j in 0..ny {
                for i in 0..nx {
                    let shell = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
                    let x = if nx > 1 { i as f64 / (nx - 1) as f64 } else { 0.5 };
                    let grad = 0.8 + 0.4 * x;
                    rho.push(density * band * grad * if shell { 1.3 } else { 1.0 });
                }
            }
        }
        Self::new(dims, spacing, rho)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            (self.nx, self.ny, self.nz),
            self.spacing,
            self.rho_cha.iter().map(|v| v * factor).collect(),
        )
    }

    /// Rotates the phantom about the long (z) axis.
    ///
    /// Multiples of 90° permute voxels exactly. Other angles resample the
    /// slice bilinearly on the same dims, clamping to the edge so no void is
    /// introduced at the corners.
    pub fn rotated_about_z(&self, degrees: f64) -> Self {
        let quarter = degrees / 90.0;
        if (quarter - quarter.round()).abs() < 1e-12 {
            let mut grid = self.clone();
            for _ in 0..(quarter.round() as i64).rem_euclid(4) {
                grid = grid.quarter_turn();
            }
            return grid;
        }
        let (c, s) = (degrees.to_radians().cos(), degrees.to_radians().sin());
        let cx = (self.nx as f64 - 1.0) / 2.0;
        let cy = (self.ny as f64 - 1.0) / 2.0;
        let mut rho = vec![0.0; self.len()];
        for k in 0..self.nz {
            for j in 0..self.ny {
                for i in 0..self.nx {
                    // inverse map from the rotated slice back to the source
                    let (x, y) = (i as f64 - cx, j as f64 - cy);
                    let sx = (c * x + s * y + cx).clamp(0.0, (self.nx - 1) as f64);
                    let sy = (-s * x + c * y + cy).clamp(0.0, (self.ny - 1) as f64);
                    rho[self.index(i, j, k)] = self.bilinear(sx, sy, k);
                }
            }
        }
        Self {
            rho_cha: rho,
            ..self.clone()
        }
    }

    fn bilinear(&self, x: f64, y: f64, k: usize) -> f64 {
        let i0 = x.floor() as usize;
        let j0 = y.floor() as usize;
        let i1 = (i0 + 1).min(self.nx - 1);
        let j1 = (j0 + 1).min(self.ny - 1);
        let (fx, fy) = (x - i0 as f64, y - j0 as f64);
        let a = self.at(i0, j0, k) * (1.0 - fx) + self.at(i1, j0, k) * fx;
        let b = self.at(i0, j1, k) * (1.0 - fx) + self.at(i1, j1, k) * fx;
        a * (1.0 - fy) + b * fy
    }

    /// Quarter turn: new (i, j) takes old (j, ny − 1 − i).
    fn quarter_turn(&self) -> Self {
        let (nx, ny) = (self.ny, self.nx);
        let mut rho = vec![0.0; self.len()];
        for k in 0..self.nz {
            for j in 0..ny {
                for i in 0..nx {
                    rho[i + nx * (j + ny * k)] = self.at(j, self.ny - 1 - i, k);
                }
            }
        }
        Self {
            nx,
            ny,
            nz: self.nz,
            spacing: self.spacing,
            rho_cha: rho,
        }
    }
}

/// Box elements laid over a grid. By default one element per voxel; a
/// coarser or finer `element_size` averages voxel properties by overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub ex: usize,
    pub ey: usize,
    pub ez: usize,
    /// Element edge lengths (mm) along x, y, z.
    pub size: [f64; 3],
    /// For each element: overlapping voxels with their volume fractions.
    pub(crate) overlaps: Vec<Vec<(usize, f64)>>,
}

impl Mesh {
    pub fn new(grid: &VoxelGrid, element_size: Option<f64>) -> Result<Self> {
        grid.validate()?;
        let h = element_size.unwrap_or(grid.spacing);
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidInput(format!("element size must be positive, got {h}")));
        }
        let split = |n: usize| -> (usize, f64) {
            let extent = n as f64 * grid.spacing;
            let count = ((extent / h).round() as usize).max(1);
            (count, extent / count as f64)
        };
        let (ex, hx) = split(grid.nx);
        let (ey, hy) = split(grid.ny);
        let (ez, hz) = split(grid.nz);
        let wx = axis_weights(ex, hx, grid.nx, grid.spacing);
        let wy = axis_weights(ey, hy, grid.ny, grid.spacing);
        let wz = axis_weights(ez, hz, grid.nz, grid.spacing);
        let mut overlaps = Vec::with_capacity(ex * ey * ez);
        for c in 0..ez {
            for b in 0..ey {
                for a in 0..ex {
                    let mut list = Vec::new();
                    for &(k, fz) in &wz[c] {
                        for &(j, fy) in &wy[b] {
                            for &(i, fx) in &wx[a] {
                                list.push((grid.index(i, j, k), fx * fy * fz));
                            }
                        }
                    }
                    overlaps.push(list);
                }
            }
        }
        Ok(Self {
            ex,
            ey,
            ez,
            size: [hx, hy, hz],
            overlaps,
        })
    }

    pub fn element_count(&self) -> usize {
        self.ex * self.ey * self.ez
    }

    pub fn node_dims(&self) -> (usize, usize, usize) {
        (self.ex + 1, self.ey + 1, self.ez + 1)
    }

    pub fn node_count(&self) -> usize {
        (self.ex + 1) * (self.ey + 1) * (self.ez + 1)
    }

    pub fn element_coords(&self, e: usize) -> (usize, usize, usize) {
        (e % self.ex, (e / self.ex) % self.ey, e / (self.ex * self.ey))
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + (self.ex + 1) * (j + (self.ey + 1) * k)
    }

    pub fn node_coords(&self, n: usize) -> (usize, usize, usize) {
        let (nx, ny, _) = self.node_dims();
        (n % nx, (n / nx) % ny, n / (nx * ny))
    }

    /// Global node ids of an element in the standard hex8 local order.
    pub fn element_nodes(&self, e: usize) -> [usize; 8] {
        let (i, j, k) = self.element_coords(e);
        let mut nodes = [0; 8];
        for (a, (dx, dy, dz)) in LOCAL_CORNERS.iter().enumerate() {
            nodes[a] = self.node_index(i + dx, j + dy, k + dz);
        }
        nodes
    }

    /// Volume-weighted element properties; E is floored at `E_min`.
    pub fn element_properties(
        &self,
        grid: &VoxelGrid,
        element: usize,
        material: &MaterialModel,
    ) -> Result<ElementProperties> {
        let list = self.overlaps.get(element).ok_or_else(|| {
            Error::InvalidInput(format!("element index {element} out of range (0..{})", self.element_count()))
        })?;
        let (mut modulus, mut strength) = (0.0, 0.0);
        for &(v, w) in list {
            let rho = grid.rho_cha[v];
            modulus += w * material.voxel_modulus(rho)?;
            strength += w * material.voxel_yield_stress(rho)?;
        }
        Ok(ElementProperties::from_averages(material, modulus, strength))
    }
}

/// Element properties for one element of the default (or given) mesh.
pub fn element_properties(
    grid: &VoxelGrid,
    element_size: Option<f64>,
    element: usize,
    material: &MaterialModel,
) -> Result<ElementProperties> {
    Mesh::new(grid, element_size)?.element_properties(grid, element, material)
}

pub(crate) const LOCAL_CORNERS: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (1, 0, 0),
    (1, 1, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 0, 1),
    (1, 1, 1),
    (0, 1, 1),
];

/// Per element along one axis: (voxel, fraction of the element's length).
fn axis_weights(count: usize, h: f64, voxels: usize, spacing: f64) -> Vec<Vec<(usize, f64)>> {
    (0..count)
        .map(|e| {
            let (lo, hi) = (e as f64 * h, (e + 1) as f64 * h);
            let first = ((lo / spacing).floor() as usize).min(voxels - 1);
            let mut out = Vec::new();
            for v in first..voxels {
                let (vlo, vhi) = (v as f64 * spacing, (v + 1) as f64 * spacing);
                if vlo >= hi {
                    break;
                }
                let overlap = hi.min(vhi) - lo.max(vlo);
                if overlap > 1e-12 * h {
                    out.push((v, overlap / h));
                }
            }
            out
        })
        .collect()
}

//! Trilinear 8-node box element with 2×2×2 Gauss quadrature.

use crate::femodel::grid::LOCAL_CORNERS;
use crate::femodel::material::{elastic_tangent, Tangent, Voigt};

pub type BMatrix = [[f64; 24]; 6];

/// Strain-displacement matrices and weights for one box element shape.
/// Every element of a mesh shares the same geometry, so this is built once.
#[derive(Debug, Clone)]
pub struct Hex8 {
    pub b: [BMatrix; 8],
    /// Quadrature weight times Jacobian determinant.
    pub weight: f64,
    /// Stiffness for E = 1 and the given Poisson ratio.
    pub unit_stiffness: Vec<[f64; 24]>,
}

impl Hex8 {
    pub fn new(size: [f64; 3], nu: f64) -> Self {
        let g = 1.0 / 3f64.sqrt();
        let mut b = [[[0.0; 24]; 6]; 8];
        for (q, bq) in b.iter_mut().enumerate() {
            let (qx, qy, qz) = LOCAL_CORNERS[q];
            let pt = [sign(qx) * g, sign(qy) * g, sign(qz) * g];
            for (a, &(cx, cy, cz)) in LOCAL_CORNERS.iter().enumerate() {
                let s = [sign(cx), sign(cy), sign(cz)];
                let f = [1.0 + s[0] * pt[0], 1.0 + s[1] * pt[1], 1.0 + s[2] * pt[2]];
                let dx = 0.125 * s[0] * f[1] * f[2] * 2.0 / size[0];
                let dy = 0.125 * s[1] * f[0] * f[2] * 2.0 / size[1];
                let dz = 0.125 * s[2] * f[0] * f[1] * 2.0 / size[2];
                let c = 3 * a;
                bq[0][c] = dx;
                bq[1][c + 1] = dy;
                bq[2][c + 2] = dz;
                bq[3][c] = dy;
                bq[3][c + 1] = dx;
                bq[4][c + 1] = dz;
                bq[4][c + 2] = dy;
                bq[5][c] = dz;
                bq[5][c + 2] = dx;
            }
        }
        let weight = size[0] * size[1] * size[2] / 8.0;
        let d = elastic_tangent(1.0, nu);
        let mut unit = vec![[0.0; 24]; 24];
        for bq in &b {
            add_btdb(&mut unit, bq, &d, weight);
        }
        Self {
            b,
            weight,
            unit_stiffness: unit,
        }
    }

    pub fn strain(&self, q: usize, u: &[f64; 24]) -> Voigt {
        let mut e = [0.0; 6];
        for (i, row) in self.b[q].iter().enumerate() {
            e[i] = row.iter().zip(u).map(|(b, u)| b * u).sum();
        }
        e
    }

    /// Adds Bᵀσ·w for quadrature point `q` into `f`.
    pub fn add_internal_force(&self, q: usize, stress: &Voigt, f: &mut [f64; 24]) {
        for (i, row) in self.b[q].iter().enumerate() {
            let s = stress[i] * self.weight;
            if s != 0.0 {
                for (fc, bc) in f.iter_mut().zip(row) {
                    *fc += bc * s;
                }
            }
        }
    }
}

fn sign(c: usize) -> f64 {
    if c == 0 {
        -1.0
    } else {
        1.0
    }
}

/// k += Bᵀ D B · w
pub fn add_btdb(k: &mut [[f64; 24]], b: &BMatrix, d: &Tangent, w: f64) {
    let mut db = [[0.0; 24]; 6];
    for i in 0..6 {
        for m in 0..6 {
            let dim = d[i][m];
            if dim != 0.0 {
                for c in 0..24 {
                    db[i][c] += dim * b[m][c];
                }
            }
        }
    }
    for r in 0..24 {
        for i in 0..6 {
            let bir = b[i][r];
            if bir != 0.0 {
                let s = bir * w;
                for c in 0..24 {
                    k[r][c] += s * db[i][c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_translation_is_strain_free() {
        let el = Hex8::new([3.0, 2.0, 4.0], 0.3);
        let mut u = [0.0; 24];
        for a in 0..8 {
            u[3 * a] = 0.7;
            u[3 * a + 1] = -0.2;
            u[3 * a + 2] = 1.1;
        }
        for q in 0..8 {
            assert!(el.strain(q, &u).iter().all(|e| e.abs() < 1e-14));
        }
    }

    #[test]
    fn linear_field_gives_constant_strain() {
        let size = [3.0, 3.0, 3.0];
        let el = Hex8::new(size, 0.3);
        let mut u = [0.0; 24];
        for (a, &(cx, cy, cz)) in LOCAL_CORNERS.iter().enumerate() {
            let (x, y, z) = (cx as f64 * 3.0, cy as f64 * 3.0, cz as f64 * 3.0);
            u[3 * a] = 0.01 * x + 0.002 * y;
            u[3 * a + 2] = -0.003 * z;
        }
        for q in 0..8 {
            let e = el.strain(q, &u);
            assert!((e[0] - 0.01).abs() < 1e-14);
            assert!((e[2] + 0.003).abs() < 1e-14);
            assert!((e[3] - 0.002).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_stiffness_is_symmetric() {
        let el = Hex8::new([3.0, 3.0, 3.0], 0.3);
        for r in 0..24 {
            for c in 0..24 {
                assert!((el.unit_stiffness[r][c] - el.unit_stiffness[c][r]).abs() < 1e-12);
            }
        }
    }
}

//! The zero-momentum potential energy surface and its derivatives.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pair or nucleus distance below which a configuration counts as singular.
pub const SINGULAR_DISTANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_electrons: usize,
    pub nuclear_charge: f64,
    /// Field strength in scaled units.
    pub field: f64,
}

impl ModelParams {
    /// Neutral atom (`Z = N`) in unit field.
    pub fn neutral(n_electrons: usize) -> Self {
        ModelParams {
            n_electrons,
            nuclear_charge: n_electrons as f64,
            field: 1.0,
        }
    }

    pub fn new(n_electrons: usize, nuclear_charge: f64, field: f64) -> Result<Self> {
        let p = ModelParams {
            n_electrons,
            nuclear_charge,
            field,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_electrons < 1 {
            return Err(Error::InvalidParams("at least one electron required".into()));
        }
        if !(self.nuclear_charge > 0.0 && self.nuclear_charge.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "nuclear charge must be positive, got {}",
                self.nuclear_charge
            )));
        }
        if !(self.field > 0.0 && self.field.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "field must be positive, got {}",
                self.field
            )));
        }
        Ok(())
    }
}

/// Electron positions; the flat coordinate order is `x_0, y_0, z_0, x_1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<[f64; 3]>,
}

impl Configuration {
    pub fn new(positions: Vec<[f64; 3]>) -> Self {
        Configuration { positions }
    }

    pub fn from_flat(coords: &[f64]) -> Self {
        assert!(coords.len() % 3 == 0, "flat coordinate length must be 3N");
        Configuration {
            positions: coords.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        }
    }

    pub fn to_flat(&self) -> DVector<f64> {
        DVector::from_iterator(
            3 * self.positions.len(),
            self.positions.iter().flat_map(|p| p.iter().copied()),
        )
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Cylinder radius of electron `i`.
    pub fn rho(&self, i: usize) -> f64 {
        let [x, y, _] = self.positions[i];
        x.hypot(y)
    }

    pub fn z_range(&self) -> (f64, f64) {
        self.positions
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[2]), hi.max(p[2]))
            })
    }

    /// True when every electron sits strictly downfield of the nucleus.
    pub fn is_downfield(&self) -> bool {
        self.positions.iter().all(|p| p[2] > 0.0)
    }

    /// Checks finiteness and the singularity guard.
    pub fn check(&self) -> Result<()> {
        for (i, p) in self.positions.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Singular(format!("electron {i} has non-finite coordinates")));
            }
            if norm(p) < SINGULAR_DISTANCE {
                return Err(Error::Singular(format!("electron {i} sits on the nucleus")));
            }
        }
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if norm(&sub(&self.positions[i], &self.positions[j])) < SINGULAR_DISTANCE {
                    return Err(Error::Singular(format!("electrons {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    /// Rotation by `angle` about the field axis.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Configuration {
            positions: self
                .positions
                .iter()
                .map(|&[x, y, z]| [c * x - s * y, s * x + c * y, z])
                .collect(),
        }
    }

    /// Reflection through the axial plane at azimuth `angle`.
    pub fn reflected(&self, angle: f64) -> Self {
        let (s, c) = (2.0 * angle).sin_cos();
        Configuration {
            positions: self
                .positions
                .iter()
                .map(|&[x, y, z]| [c * x + s * y, s * x - c * y, z])
                .collect(),
        }
    }

    /// Relabels electrons: electron `k` of the result is electron `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len());
        Configuration {
            positions: perm.iter().map(|&k| self.positions[k]).collect(),
        }
    }

    /// The same configuration expressed for field `to_field` instead of
    /// `from_field`; lengths scale as `(to/from)^(-1/2)`.
    pub fn rescaled(&self, from_field: f64, to_field: f64) -> Result<Self> {
        let f = FieldScaling::new(from_field, to_field)?;
        Ok(Configuration {
            positions: self
                .positions
                .iter()
                .map(|p| p.map(|c| c * f.length))
                .collect(),
        })
    }
}

/// Multipliers relating quantities at two field strengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldScaling {
    pub length: f64,
    pub energy: f64,
    /// Applies to Lyapunov exponents and frequencies.
    pub rate: f64,
}

impl FieldScaling {
    pub fn new(from_field: f64, to_field: f64) -> Result<Self> {
        if !(from_field > 0.0 && to_field > 0.0) || !from_field.is_finite() || !to_field.is_finite() {
            return Err(Error::InvalidParams(format!(
                "fields must be positive, got {from_field} -> {to_field}"
            )));
        }
        let s = to_field / from_field;
        Ok(FieldScaling {
            length: s.powf(-0.5),
            energy: s.sqrt(),
            rate: s.powf(0.75),
        })
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn check_len(config: &Configuration, params: &ModelParams) -> Result<()> {
    if config.len() != params.n_electrons {
        return Err(Error::InvalidParams(format!(
            "configuration has {} electrons, model expects {}",
            config.len(),
            params.n_electrons
        )));
    }
    config.check()
}

pub fn potential_energy(config: &Configuration, params: &ModelParams) -> Result<f64> {
    check_len(config, params)?;
    let pos = &config.positions;
    let mut nuclear = 0.0;
    let mut field = 0.0;
    let mut repulsion = 0.0;
    for (i, p) in pos.iter().enumerate() {
        nuclear -= params.nuclear_charge / norm(p);
        field -= params.field * p[2];
        for q in &pos[i + 1..] {
            repulsion += 1.0 / norm(&sub(p, q));
        }
    }
    Ok(nuclear + repulsion + field)
}

pub fn gradient(config: &Configuration, params: &ModelParams) -> Result<DVector<f64>> {
    check_len(config, params)?;
    let pos = &config.positions;
    let n = pos.len();
    let mut g = DVector::zeros(3 * n);
    for (i, p) in pos.iter().enumerate() {
        let r = norm(p);
        let c = params.nuclear_charge / (r * r * r);
        for a in 0..3 {
            g[3 * i + a] += c * p[a];
        }
        g[3 * i + 2] -= params.field;
        for j in i + 1..n {
            let d = sub(p, &pos[j]);
            let r = norm(&d);
            let c = 1.0 / (r * r * r);
            for a in 0..3 {
                g[3 * i + a] -= c * d[a];
                g[3 * j + a] += c * d[a];
            }
        }
    }
    Ok(g)
}

/// `(3 d dᵀ - |d|² I) / |d|⁵`, the Hessian of `-1/|d|`.
fn dipole_block(d: &[f64; 3]) -> Matrix3<f64> {
    let v = Vector3::new(d[0], d[1], d[2]);
    let r2 = v.norm_squared();
    let r5 = r2 * r2 * r2.sqrt();
    let mut m = 3.0 * v * v.transpose();
    for a in 0..3 {
        m[(a, a)] -= r2;
    }
    m / r5
}

/// Analytic Hessian; the lower triangle is a copy of the upper one, so the
/// result is exactly symmetric.
pub fn hessian(config: &Configuration, params: &ModelParams) -> Result<DMatrix<f64>> {
    check_len(config, params)?;
    let pos = &config.positions;
    let n = pos.len();
    let mut h = DMatrix::zeros(3 * n, 3 * n);
    for (i, p) in pos.iter().enumerate() {
        let b = -params.nuclear_charge * dipole_block(p);
        add_block(&mut h, i, i, &b, 1.0);
        for j in i + 1..n {
            let b = dipole_block(&sub(p, &pos[j]));
            add_block(&mut h, i, i, &b, 1.0);
            add_block(&mut h, j, j, &b, 1.0);
            add_block(&mut h, i, j, &b, -1.0);
        }
    }
    for r in 0..3 * n {
        for c in 0..r {
            h[(r, c)] = h[(c, r)];
        }
    }
    Ok(h)
}

fn add_block(h: &mut DMatrix<f64>, i: usize, j: usize, b: &Matrix3<f64>, sign: f64) {
    for a in 0..3 {
        for c in 0..3 {
            h[(3 * i + a, 3 * j + c)] += sign * b[(a, c)];
        }
    }
}

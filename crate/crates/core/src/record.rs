//! Persisted saddle records and run manifests.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::finder::{ConvergenceCounts, SearchParams};
use crate::model::{self, Configuration, FieldScaling, ModelParams};
use crate::stability::{self, ModeKind};
use crate::symmetry::{self, SymmetryLabel};

/// Coarse description of a saddle geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `C_Nv` ring perpendicular to the field.
    Ring,
    /// One electron on the axis, the rest on a `C_(N-1)v` ring.
    RingPlusCenter,
    /// All electrons in one plane through the field axis.
    Line,
    /// `C2v` pair of electrons close to the axis, the rest around them.
    TwoInCenter,
    Other,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Ring => "all on a ring",
            Family::RingPlusCenter => "ring plus center",
            Family::Line => "all on a line",
            Family::TwoInCenter => "two in the center",
            Family::Other => "---",
        })
    }
}

impl Family {
    pub fn of(config: &Configuration, tol: f64) -> Family {
        let n = config.len();
        let label = symmetry::classify(config, tol);
        let mut rho: Vec<f64> = (0..n).map(|i| config.rho(i)).collect();
        rho.sort_by(f64::total_cmp);
        let on_axis = rho.iter().filter(|&&r| r <= tol).count();
        if label.has_mirror && label.rotation_order == n && on_axis == 0 {
            return Family::Ring;
        }
        if n >= 4 && on_axis == 1 && label.has_mirror && label.rotation_order == n - 1 {
            return Family::RingPlusCenter;
        }
        if n >= 3 && in_axial_plane(config, tol) {
            return Family::Line;
        }
        let two_fold = label.has_mirror && label.rotation_order == 2;
        if n >= 4 && two_fold && on_axis == 0 && rho[1] < 0.5 * rho[2] {
            return Family::TwoInCenter;
        }
        Family::Other
    }
}

/// Whether all electrons lie in a single plane containing the field axis.
fn in_axial_plane(config: &Configuration, tol: f64) -> bool {
    let Some(anchor) = config
        .positions
        .iter()
        .max_by(|a, b| a[0].hypot(a[1]).total_cmp(&b[0].hypot(b[1])))
    else {
        return true;
    };
    let r = anchor[0].hypot(anchor[1]);
    if r <= tol {
        return true;
    }
    let (ux, uy) = (anchor[0] / r, anchor[1] / r);
    config
        .positions
        .iter()
        .all(|p| (p[0] * uy - p[1] * ux).abs() <= tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleRecord {
    pub n: usize,
    /// 1-based rank by ascending energy.
    pub nu: usize,
    pub energy: f64,
    pub n_u: usize,
    pub lambda_r: f64,
    pub mu: f64,
    pub symmetry: SymmetryLabel,
    pub family: Family,
    pub zero_modes: usize,
    /// Every transverse unstable exponent `λ_i`, ascending.
    pub lyapunov: Vec<f64>,
    pub reaction_same_sign: bool,
    pub positions: Configuration,
    /// How many starts converged here.
    pub hits: usize,
    pub seed: u64,
}

impl SaddleRecord {
    /// Stability analysis and symmetry label for a stationary point. `nu`
    /// is left at zero until [`SaddleRecord::rank`].
    pub fn characterize(
        config: &Configuration,
        model: &ModelParams,
        params: &SearchParams,
        hits: usize,
    ) -> Result<SaddleRecord> {
        let spectrum = stability::analyze(config, model, params.zero_tol)?;
        let exps = spectrum.exponents();
        let canonical = symmetry::canonicalize(config, params.symmetry_tol);
        let mut lyapunov = spectrum.transverse_lyapunov();
        lyapunov.sort_by(f64::total_cmp);
        Ok(SaddleRecord {
            n: config.len(),
            nu: 0,
            energy: model::potential_energy(config, model)?,
            n_u: exps.n_u,
            lambda_r: exps.lambda_r,
            mu: exps.mu,
            symmetry: symmetry::classify(config, params.symmetry_tol),
            family: Family::of(config, params.symmetry_tol),
            zero_modes: spectrum.count(ModeKind::Zero),
            lyapunov,
            reaction_same_sign: spectrum.reaction.same_sign,
            positions: canonical.oriented,
            hits,
            seed: params.rng_seed,
        })
    }

    /// Sorts by energy, breaking ties with the rounded invariant key, and
    /// numbers the records from 1.
    pub fn rank(records: &mut [SaddleRecord], dedup_tol: f64) {
        let precision = dedup_tol / 10.0;
        records.sort_by(|a, b| {
            a.energy.total_cmp(&b.energy).then_with(|| {
                let ka = symmetry::canonicalize(&a.positions, precision).rounded_key(precision);
                let kb = symmetry::canonicalize(&b.positions, precision).rounded_key(precision);
                ka.cmp(&kb)
            })
        });
        for (i, r) in records.iter_mut().enumerate() {
            r.nu = i + 1;
        }
    }

    pub fn z_range(&self) -> (f64, f64) {
        self.positions.z_range()
    }

    /// The record as it would appear at field `to_field` if it was computed
    /// at `from_field`. Counts and `μ` are unchanged.
    pub fn rescaled(&self, from_field: f64, to_field: f64) -> Result<SaddleRecord> {
        let s = FieldScaling::new(from_field, to_field)?;
        Ok(SaddleRecord {
            energy: self.energy * s.energy,
            lambda_r: self.lambda_r * s.rate,
            lyapunov: self.lyapunov.iter().map(|l| l * s.rate).collect(),
            positions: self.positions.rescaled(from_field, to_field)?,
            ..self.clone()
        })
    }
}

/// Everything needed to rerun a search bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub model: ModelParams,
    pub search: SearchParams,
    pub workers: usize,
    pub wall_seconds: f64,
    pub counts: ConvergenceCounts,
    pub distinct_saddles: usize,
    pub rejected: usize,
}

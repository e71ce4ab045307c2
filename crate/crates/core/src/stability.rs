//! Linear stability of stationary configurations.
//!
//! At a stationary point of `H = Σ p²/2 + V` every Hessian eigenvalue `h < 0`
//! gives a Lyapunov pair `±√(-h)` and every `h > 0` an oscillation with
//! frequency `√h`. One unstable direction moves all electrons downfield
//! together (the reaction coordinate, exponent `λ_r`); the others
//! enter the threshold exponent `μ = Σ λ_i / λ_r`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, Configuration, ModelParams};

pub const DEFAULT_ZERO_TOL: f64 = 1e-6;
/// Gradient norm above which `analyze` refuses a configuration.
pub const STATIONARY_TOL: f64 = 1e-8;
const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Unstable,
    Zero,
    Stable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    pub zero_tol: f64,
    pub kinds: Vec<ModeKind>,
    /// `(eigenvalue index, √(-h))` for every unstable direction.
    pub lyapunov: Vec<(usize, f64)>,
    pub reaction: ReactionCoordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionCoordinate {
    pub index: usize,
    /// `|u·t|` with `t` the normalized uniform-z displacement.
    pub overlap: f64,
    /// False when the chosen eigenvector does not move every electron in the
    /// same sense along the field axis.
    pub same_sign: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub lambda_r: f64,
    pub n_u: usize,
    pub mu: f64,
}

impl StabilitySpectrum {
    pub fn count(&self, kind: ModeKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }

    pub fn unstable_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.lyapunov.iter().map(|&(i, _)| i)
    }

    /// Lyapunov exponents of the unstable directions other than the
    /// reaction coordinate.
    pub fn transverse_lyapunov(&self) -> Vec<f64> {
        self.lyapunov
            .iter()
            .filter(|&&(i, _)| i != self.reaction.index)
            .map(|&(_, l)| l)
            .collect()
    }

    pub fn exponents(&self) -> ExponentReport {
        exponents(self)
    }

    /// Overlap `|u·t|` of every unstable direction with the uniform-z vector.
    pub fn uniform_z_overlaps(&self) -> Vec<(usize, f64)> {
        self.unstable_indices()
            .map(|i| (i, uniform_z_overlap(&self.eigenvectors, i)))
            .collect()
    }
}

fn uniform_z_overlap(vectors: &DMatrix<f64>, col: usize) -> f64 {
    let n = vectors.nrows() / 3;
    let u = vectors.column(col);
    let dot: f64 = (0..n).map(|i| u[3 * i + 2]).sum();
    dot.abs() / ((n as f64).sqrt() * u.norm())
}

fn classify(h: f64, zero_tol: f64) -> ModeKind {
    if h < -zero_tol {
        ModeKind::Unstable
    } else if h > zero_tol {
        ModeKind::Stable
    } else {
        ModeKind::Zero
    }
}

/// Full eigendecomposition of the Hessian at a stationary configuration.
pub fn analyze(
    config: &Configuration,
    params: &ModelParams,
    zero_tol: f64,
) -> Result<StabilitySpectrum> {
    if !(zero_tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "zero tolerance must be positive, got {zero_tol}"
        )));
    }
    let residual = model::gradient(config, params)?.norm();
    if !(residual < STATIONARY_TOL) {
        return Err(Error::NotStationary { residual });
    }
    let h = model::hessian(config, params)?;
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);

    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let v = eigenvectors.column(k);
        let r = (&h * v - v * lambda).norm();
        if r > EIGEN_RESIDUAL_TOL {
            return Err(Error::Eigen(format!("eigenpair {k} residual {r:.3e}")));
        }
    }

    let kinds: Vec<ModeKind> = eigenvalues.iter().map(|&h| classify(h, zero_tol)).collect();
    let lyapunov: Vec<(usize, f64)> = eigenvalues
        .iter()
        .enumerate()
        .filter(|&(k, _)| kinds[k] == ModeKind::Unstable)
        .map(|(k, &h)| (k, (-h).sqrt()))
        .collect();
    let reaction = reaction_coordinate_of(&eigenvectors, &lyapunov)?;
    Ok(StabilitySpectrum {
        eigenvalues,
        eigenvectors,
        zero_tol,
        kinds,
        lyapunov,
        reaction,
    })
}

fn reaction_coordinate_of(
    vectors: &DMatrix<f64>,
    lyapunov: &[(usize, f64)],
) -> Result<ReactionCoordinate> {
    let (index, overlap) = lyapunov
        .iter()
        .map(|&(i, _)| (i, uniform_z_overlap(vectors, i)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::NoUnstableDirection)?;
    let n = vectors.nrows() / 3;
    let u = vectors.column(index);
    let same_sign = (0..n).all(|i| u[3 * i + 2] > 0.0) || (0..n).all(|i| u[3 * i + 2] < 0.0);
    Ok(ReactionCoordinate {
        index,
        overlap,
        same_sign,
    })
}

/// Picks the unstable direction with the largest uniform-z overlap.
pub fn reaction_coordinate(spectrum: &StabilitySpectrum) -> Result<ReactionCoordinate> {
    reaction_coordinate_of(&spectrum.eigenvectors, &spectrum.lyapunov)
}

pub fn exponents(spectrum: &StabilitySpectrum) -> ExponentReport {
    let lambda_r = spectrum
        .lyapunov
        .iter()
        .find(|&&(i, _)| i == spectrum.reaction.index)
        .map(|&(_, l)| l)
        .expect("reaction coordinate is an unstable direction");
    let others = spectrum.transverse_lyapunov();
    ExponentReport {
        lambda_r,
        n_u: others.len(),
        mu: others.iter().sum::<f64>() / lambda_r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring;

    fn ring_spectrum(n: usize) -> StabilitySpectrum {
        let c = ring::ring_saddle(n).unwrap().unwrap().configuration();
        analyze(&c, &ModelParams::neutral(n), DEFAULT_ZERO_TOL).unwrap()
    }

    #[test]
    fn two_electron_ring_spectrum() {
        let s = ring_spectrum(2);
        assert_eq!(s.count(ModeKind::Unstable), 2);
        assert_eq!(s.count(ModeKind::Zero), 1);
        assert_eq!(s.count(ModeKind::Stable), 3);
        let e = s.exponents();
        assert_eq!(e.n_u, 1);
        assert!((e.lambda_r - 1.2139).abs() < 1e-3, "{e:?}");
        assert!((e.mu - 1.2918).abs() < 1e-3, "{e:?}");
        assert!(s.reaction.same_sign);
        let transverse = s.transverse_lyapunov();
        assert!((transverse[0] - 1.2918 * 1.2139).abs() < 2e-3);
    }

    #[test]
    fn mu_is_the_ratio_of_stored_exponents() {
        for n in 2..=8 {
            let s = ring_spectrum(n);
            let e = s.exponents();
            let sum: f64 = s.transverse_lyapunov().iter().sum();
            assert!((sum / e.lambda_r - e.mu).abs() <= 1e-12 * e.mu);
        }
    }

    #[test]
    fn eigenpairs_have_small_residuals() {
        let c = ring::ring_saddle(5).unwrap().unwrap().configuration();
        let p = ModelParams::neutral(5);
        let s = analyze(&c, &p, DEFAULT_ZERO_TOL).unwrap();
        let h = model::hessian(&c, &p).unwrap();
        for (k, &lambda) in s.eigenvalues.iter().enumerate() {
            let v = s.eigenvectors.column(k);
            assert!((&h * v - v * lambda).norm() < 1e-9);
        }
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_stationary_input() {
        let c = Configuration::new(vec![[1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]);
        let r = analyze(&c, &ModelParams::neutral(2), DEFAULT_ZERO_TOL);
        assert!(matches!(r, Err(Error::NotStationary { .. })));
    }

    #[test]
    fn rejects_bad_zero_tol() {
        let c = ring::ring_saddle(2).unwrap().unwrap().configuration();
        assert!(analyze(&c, &ModelParams::neutral(2), 0.0).is_err());
    }

    #[test]
    fn reaction_coordinate_is_recomputable() {
        let s = ring_spectrum(4);
        assert_eq!(reaction_coordinate(&s).unwrap(), s.reaction);
        for (i, o) in s.uniform_z_overlaps() {
            if i != s.reaction.index {
                assert!(o < s.reaction.overlap);
            }
        }
    }
}

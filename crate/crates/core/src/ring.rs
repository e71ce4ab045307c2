//! Saddles with `C_Nv` ring symmetry.
//!
//! With all electrons on a ring of radius `ρ` at height `z` the potential
//! reduces to `-N²/√(ρ²+z²) + W/(2ρ) - N z` (neutral atom, unit field), where
//! `W` is the ring repulsion sum. Its stationary point is known in closed
//! form. The family with one extra electron on the field axis has no closed
//! form and is solved by Newton iteration in the three symmetric coordinates
//! `(z_c, ρ, z)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, Configuration, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSaddle {
    pub n: usize,
    pub w: f64,
    pub rho: f64,
    pub z: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingPlusCenterSaddle {
    pub n: usize,
    /// Height of the electron on the field axis.
    pub z_c: f64,
    /// Radius of the ring of `n - 1` electrons.
    pub rho: f64,
    /// Height of the ring.
    pub z: f64,
    pub energy: f64,
}

/// `W(N) = Σ_{k=1}^{N-1} (N-k) / sin(πk/N)`.
pub fn repulsion_sum(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("ring needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok((1..n)
        .map(|k| (nf - k as f64) / (PI * k as f64 / nf).sin())
        .sum())
}

/// Whether the ring saddle exists, i.e. `2N² > W`.
pub fn ring_exists(n: usize) -> Result<bool> {
    let w = repulsion_sum(n)?;
    Ok(2.0 * (n * n) as f64 > w)
}

pub fn ring_saddle(n: usize) -> Result<Option<RingSaddle>> {
    let w = repulsion_sum(n)?;
    let nf = n as f64;
    let ratio = 2.0 * nf * nf / w;
    if ratio <= 1.0 {
        return Ok(None);
    }
    let a = ratio.powf(2.0 / 3.0) - 1.0;
    let scale = (w / (2.0 * nf)).sqrt();
    let rho = scale * a.powf(0.25);
    let z = scale * a.powf(0.75);
    let energy = -(2.0 * nf * nf * (2.0 / (nf * w)).powf(1.0 / 6.0) - (2.0 * nf * w).sqrt())
        * a.powf(-0.25);
    Ok(Some(RingSaddle {
        n,
        w,
        rho,
        z,
        energy,
    }))
}

/// Largest electron count for which the ring saddle exists.
pub fn max_ring_n() -> usize {
    let mut n = 2;
    while ring_exists(n + 1).expect("n >= 2") {
        n += 1;
    }
    n
}

/// Empirical large-`N` fit `(0.3N² + 0.3N - 3.1) ln N` of the repulsion sum.
/// Diagnostic only; it is poor at small `N`.
pub fn w_fit(n: usize) -> f64 {
    let nf = n as f64;
    (0.3 * nf * nf + 0.3 * nf - 3.1) * nf.ln()
}

fn ring_positions(count: usize, rho: f64, z: f64) -> impl Iterator<Item = [f64; 3]> {
    (0..count).map(move |i| {
        let phi = 2.0 * PI * i as f64 / count as f64;
        [rho * phi.cos(), rho * phi.sin(), z]
    })
}

impl RingSaddle {
    /// Electrons at azimuths `2πi/N`.
    pub fn configuration(&self) -> Configuration {
        Configuration::new(ring_positions(self.n, self.rho, self.z).collect())
    }
}

impl RingPlusCenterSaddle {
    /// Axial electron first, then the ring at azimuths `2πi/(N-1)`.
    pub fn configuration(&self) -> Configuration {
        embed_center(self.n, self.z_c, self.rho, self.z)
    }
}

fn embed_center(n: usize, z_c: f64, rho: f64, z: f64) -> Configuration {
    let mut positions = vec![[0.0, 0.0, z_c]];
    positions.extend(ring_positions(n - 1, rho, z));
    Configuration::new(positions)
}

/// Columns are the derivatives of the embedding with respect to
/// `(z_c, ρ, z)`; the embedding is linear so this is exact everywhere.
fn center_jacobian(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(3 * n, 3);
    j[(2, 0)] = 1.0;
    for i in 1..n {
        let phi = 2.0 * PI * (i - 1) as f64 / (n - 1) as f64;
        j[(3 * i, 1)] = phi.cos();
        j[(3 * i + 1, 1)] = phi.sin();
        j[(3 * i + 2, 2)] = 1.0;
    }
    j
}

const REDUCED_TOL: f64 = 1e-12;
const REDUCED_MAX_ITERS: usize = 100;

/// Solves the ring-plus-center family by Newton iteration on the
/// symmetry-restricted gradient of the full potential.
pub fn ring_plus_center_saddle(n: usize) -> Result<RingPlusCenterSaddle> {
    if n < 3 {
        return Err(Error::InvalidParams(format!(
            "ring plus center needs n >= 3, got {n}"
        )));
    }
    let seed = ring_saddle(n - 1)?.ok_or_else(|| {
        Error::InvalidParams(format!("no ring saddle for {} electrons", n - 1))
    })?;
    let params = ModelParams::neutral(n);
    let jac = center_jacobian(n);
    let mut x = Vector3::new(seed.z + 0.5, seed.rho, seed.z);
    let mut residual = f64::INFINITY;
    for _ in 0..REDUCED_MAX_ITERS {
        let config = embed_center(n, x[0], x[1], x[2]);
        let g = model::gradient(&config, &params)?;
        let reduced_g: Vector3<f64> = Vector3::from_iterator((jac.transpose() * &g).iter().copied());
        residual = g.norm();
        if residual < REDUCED_TOL {
            let energy = model::potential_energy(&config, &params)?;
            return Ok(RingPlusCenterSaddle {
                n,
                z_c: x[0],
                rho: x[1],
                z: x[2],
                energy,
            });
        }
        let h = model::hessian(&config, &params)?;
        let reduced_h = jac.transpose() * h * &jac;
        let reduced_h = Matrix3::from_iterator(reduced_h.iter().copied());
        let step = reduced_h
            .lu()
            .solve(&reduced_g)
            .ok_or(Error::NoConvergence { residual })?;
        let largest = step.amax();
        let scale = if largest > 0.5 { 0.5 / largest } else { 1.0 };
        x -= step * scale;
        if x[1] <= 0.0 {
            return Err(Error::NoConvergence { residual });
        }
    }
    Err(Error::NoConvergence { residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn repulsion_sum_small_n() {
        assert_relative_eq!(repulsion_sum(2).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(repulsion_sum(3).unwrap(), 2.0 * 3f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(
            repulsion_sum(4).unwrap(),
            2.0 + 4.0 * 2f64.sqrt(),
            epsilon = 1e-14
        );
        assert!(repulsion_sum(1).is_err());
    }

    #[test]
    fn repulsion_sum_monotone_and_bounded_below() {
        let mut prev = 0.0;
        for n in 2..300 {
            let w = repulsion_sum(n).unwrap();
            assert!(w > prev);
            assert!(w >= (n * (n - 1)) as f64 / 2.0);
            prev = w;
        }
    }

    #[test]
    fn two_electron_closed_form() {
        let s = ring_saddle(2).unwrap().unwrap();
        assert_relative_eq!(s.rho, 3f64.powf(0.25) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.z, 3f64.powf(0.75) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.energy, -6.0 * 3f64.powf(-0.25), epsilon = 1e-13);
    }

    #[test]
    fn eight_electron_ring() {
        let s = ring_saddle(8).unwrap().unwrap();
        assert!((s.rho - 1.6794).abs() < 1e-4);
        assert!((s.z - 1.6888).abs() < 1e-4);
        assert!((s.energy + 27.0208).abs() < 1e-4);
    }

    #[test]
    fn existence_cutoff() {
        assert_eq!(max_ring_n(), 472);
        let margin = |n: usize| 2.0 * (n * n) as f64 - repulsion_sum(n).unwrap();
        assert!(margin(472) > 0.0);
        assert!(margin(473) <= 0.0);
        assert!(ring_saddle(473).unwrap().is_none());
    }

    #[test]
    fn fit_is_evaluated_verbatim() {
        assert_relative_eq!(w_fit(2), -1.3 * 2f64.ln(), epsilon = 1e-14);
        assert!((w_fit(2) + 0.9011).abs() < 1e-4);
        assert!((w_fit(100) - 3026.9 * 100f64.ln()).abs() < 1e-9);
        assert!((w_fit(100) - 13939.4).abs() < 0.05);
    }

    #[test]
    fn ring_embeddings_are_stationary() {
        for n in 2..=100 {
            let Some(s) = ring_saddle(n).unwrap() else { continue };
            let c = s.configuration();
            let p = ModelParams::neutral(n);
            let g = model::gradient(&c, &p).unwrap();
            assert!(g.norm() < 1e-8, "n={n} |g|={}", g.norm());
            let e = model::potential_energy(&c, &p).unwrap();
            assert_relative_eq!(e, s.energy, max_relative = 1e-9);
        }
    }

    #[test]
    fn ring_plus_center_six() {
        let s = ring_plus_center_saddle(6).unwrap();
        assert!((s.z_c - 1.9690).abs() < 1e-4, "{s:?}");
        assert!((s.rho - 1.5583).abs() < 1e-4);
        assert!((s.z - 1.4960).abs() < 1e-4);
        assert!((s.energy + 18.8975).abs() < 1e-4);
        assert!(s.z_c > s.z);
    }

    #[test]
    fn ring_plus_center_four() {
        let s = ring_plus_center_saddle(4).unwrap();
        assert!((s.energy + 10.9398).abs() < 1e-4, "{s:?}");
        assert!((s.z_c - 1.6543).abs() < 1e-4);
        let g = model::gradient(&s.configuration(), &ModelParams::neutral(4)).unwrap();
        assert!(g.norm() < 1e-8);
    }

    #[test]
    fn ring_plus_center_rejects_small_n() {
        assert!(ring_plus_center_saddle(2).is_err());
    }
}

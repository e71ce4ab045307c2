//! Multistart Newton–Raphson enumeration of stationary points.
//!
//! Every start draws its own random configuration from an independent
//! ChaCha stream (`stream = start index`), so the outcome of a run depends
//! only on the seed and the number of starts, never on how starts are
//! distributed over workers. Refinements run in parallel in fixed-size
//! chunks; deduplication walks the converged points in start order.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, Configuration, ModelParams};
use crate::record::SaddleRecord;
use crate::stability;
use crate::symmetry;

/// Coordinates beyond this magnitude mark a diverging iteration.
pub const DIVERGENCE_BOUND: f64 = 1e3;
const SAMPLE_ATTEMPTS: usize = 100;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    pub n_starts: usize,
    pub rng_seed: u64,
    pub sample_rho_max: f64,
    pub sample_z_min: f64,
    pub sample_z_max: f64,
    /// Gradient-norm convergence threshold.
    pub newton_tol: f64,
    pub max_iters: usize,
    /// Largest change of any single coordinate in one Newton step.
    pub step_clamp: f64,
    pub dedup_tol: f64,
    /// Discard stationary points with any electron at `z <= 0`.
    pub downfield_only: bool,
    pub zero_tol: f64,
    /// Position tolerance for symmetry labels.
    pub symmetry_tol: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            n_starts: 100_000,
            rng_seed: 0,
            sample_rho_max: 4.0,
            sample_z_min: 0.05,
            sample_z_max: 4.0,
            newton_tol: 1e-10,
            max_iters: 200,
            step_clamp: 0.5,
            dedup_tol: 1e-5,
            downfield_only: true,
            zero_tol: stability::DEFAULT_ZERO_TOL,
            symmetry_tol: 1e-4,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        if self.n_starts < 1 {
            return bad("n_starts must be at least 1");
        }
        if self.max_iters < 1 {
            return bad("max_iters must be at least 1");
        }
        for (name, v) in [
            ("sample_rho_max", self.sample_rho_max),
            ("newton_tol", self.newton_tol),
            ("step_clamp", self.step_clamp),
            ("dedup_tol", self.dedup_tol),
            ("zero_tol", self.zero_tol),
            ("symmetry_tol", self.symmetry_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.sample_z_min < self.sample_z_max)
            || !self.sample_z_min.is_finite()
            || !self.sample_z_max.is_finite()
        {
            return Err(Error::InvalidParams(format!(
                "empty z sampling range [{}, {}]",
                self.sample_z_min, self.sample_z_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonStatus {
    Converged,
    Diverged,
    Singular,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub status: NewtonStatus,
    /// Final iterate; a stationary point only when `status` is `Converged`.
    pub config: Configuration,
    pub iterations: usize,
    pub residual: f64,
}

impl NewtonResult {
    pub fn converged(&self) -> Option<&Configuration> {
        (self.status == NewtonStatus::Converged).then_some(&self.config)
    }
}

/// The RNG for start number `index` of a run seeded with `seed`.
pub fn start_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform height, area-weighted cylinder radius and uniform azimuth for
/// each electron; singular draws are redrawn.
pub fn random_configuration<R: Rng + ?Sized>(
    n: usize,
    params: &SearchParams,
    rng: &mut R,
) -> Result<Configuration> {
    for _ in 0..SAMPLE_ATTEMPTS {
        let positions = (0..n)
            .map(|_| {
                let z = rng.random_range(params.sample_z_min..params.sample_z_max);
                let rho = params.sample_rho_max * rng.random::<f64>().sqrt();
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                [rho * phi.cos(), rho * phi.sin(), z]
            })
            .collect();
        let c = Configuration::new(positions);
        if c.check().is_ok() {
            return Ok(c);
        }
    }
    Err(Error::Sampling(SAMPLE_ATTEMPTS))
}

/// Plain Newton iteration `x <- x - H⁻¹ g`, with the step scaled down so
/// that no coordinate moves by more than `step_clamp`.
pub fn newton_refine(
    start: &Configuration,
    model: &ModelParams,
    params: &SearchParams,
) -> NewtonResult {
    let mut x = start.to_flat();
    let finish = |status, x: &DVector<f64>, iterations, residual| NewtonResult {
        status,
        config: Configuration::from_flat(x.as_slice()),
        iterations,
        residual,
    };
    let mut residual = f64::INFINITY;
    for iter in 0..=params.max_iters {
        let config = Configuration::from_flat(x.as_slice());
        let g = match model::gradient(&config, model) {
            Ok(g) => g,
            Err(_) => return finish(NewtonStatus::Singular, &x, iter, residual),
        };
        residual = g.norm();
        if residual < params.newton_tol {
            return finish(NewtonStatus::Converged, &x, iter, residual);
        }
        if iter == params.max_iters {
            break;
        }
        let h = match model::hessian(&config, model) {
            Ok(h) => h,
            Err(_) => return finish(NewtonStatus::Singular, &x, iter, residual),
        };
        let Some(step) = h.lu().solve(&g) else {
            return finish(NewtonStatus::Singular, &x, iter, residual);
        };
        let largest = step.amax();
        if !largest.is_finite() {
            return finish(NewtonStatus::Singular, &x, iter, residual);
        }
        if largest > params.step_clamp {
            x.axpy(-params.step_clamp / largest, &step, 1.0);
        } else {
            x -= &step;
        }
        if x.amax() > DIVERGENCE_BOUND {
            return finish(NewtonStatus::Diverged, &x, iter + 1, residual);
        }
        if Configuration::from_flat(x.as_slice()).check().is_err() {
            return finish(NewtonStatus::Singular, &x, iter + 1, residual);
        }
    }
    finish(NewtonStatus::MaxIters, &x, params.max_iters, residual)
}

/// Per-status tallies over all starts of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceCounts {
    pub converged: usize,
    /// Converged, but some electron sat at `z <= 0`.
    pub upfield: usize,
    pub diverged: usize,
    pub singular: usize,
    pub max_iters: usize,
    pub sampling_failures: usize,
}

impl ConvergenceCounts {
    fn add(&mut self, status: NewtonStatus) {
        match status {
            NewtonStatus::Converged => self.converged += 1,
            NewtonStatus::Diverged => self.diverged += 1,
            NewtonStatus::Singular => self.singular += 1,
            NewtonStatus::MaxIters => self.max_iters += 1,
        }
    }
}

/// A distinct stationary point that could not be characterized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejected {
    pub energy: f64,
    pub positions: Configuration,
    pub hits: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Ascending in energy; ties broken by the rounded invariant key.
    pub records: Vec<SaddleRecord>,
    pub rejected: Vec<Rejected>,
    pub counts: ConvergenceCounts,
}

struct Unique {
    key: Vec<f64>,
    config: Configuration,
    hits: usize,
}

fn refine_start(
    index: usize,
    model: &ModelParams,
    params: &SearchParams,
) -> std::result::Result<NewtonResult, Error> {
    let mut rng = start_rng(params.rng_seed, index as u64);
    let start = random_configuration(model.n_electrons, params, &mut rng)?;
    Ok(newton_refine(&start, model, params))
}

/// Runs `params.n_starts` refinements on `workers` threads and returns the
/// distinct downfield stationary points with their stability data.
pub fn search(model: &ModelParams, params: &SearchParams, workers: usize) -> Result<SearchOutcome> {
    model.validate()?;
    params.validate()?;
    if model.n_electrons < 2 {
        return Err(Error::InvalidParams("search needs at least two electrons".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;

    let mut counts = ConvergenceCounts::default();
    let mut uniques: Vec<Unique> = Vec::new();
    let mut start = 0;
    while start < params.n_starts {
        let end = (start + CHUNK).min(params.n_starts);
        let results: Vec<_> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| refine_start(i, model, params))
                .collect()
        });
        for r in results {
            let Ok(r) = r else {
                counts.sampling_failures += 1;
                continue;
            };
            counts.add(r.status);
            let Some(config) = r.converged() else { continue };
            if params.downfield_only && !config.is_downfield() {
                counts.upfield += 1;
                continue;
            }
            merge(&mut uniques, config, params.dedup_tol);
        }
        start = end;
    }

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for u in uniques {
        match SaddleRecord::characterize(&u.config, model, params, u.hits) {
            Ok(r) => records.push(r),
            Err(e) => rejected.push(Rejected {
                energy: model::potential_energy(&u.config, model)?,
                positions: u.config,
                hits: u.hits,
                reason: e.to_string(),
            }),
        }
    }
    SaddleRecord::rank(&mut records, params.dedup_tol);
    Ok(SearchOutcome {
        records,
        rejected,
        counts,
    })
}

fn merge(uniques: &mut Vec<Unique>, config: &Configuration, tol: f64) {
    let key = symmetry::invariant_key(config);
    for u in uniques.iter_mut() {
        let d = u
            .key
            .iter()
            .zip(&key)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if d <= tol && symmetry::aligned(&u.config, config, 10.0 * tol) {
            u.hits += 1;
            return;
        }
    }
    uniques.push(Unique {
        key,
        config: config.clone(),
        hits: 1,
    });
}

//! Commands behind the `fieldsaddle` binary.
//!
//! Each command is a plain function returning data plus its rendered
//! output, so the same code path serves the binary and headless callers.

pub mod params;
pub mod report;
pub mod store;

use std::path::{Path, PathBuf};
use std::time::Instant;

use fieldsaddle::finder::{self, SearchParams};
use fieldsaddle::record::RunManifest;
use fieldsaddle::stability::{self, ModeKind, StabilitySpectrum};
use fieldsaddle::{ring, ModelParams, SaddleRecord};
use serde::Serialize;
use thiserror::Error;

pub use report::{cmd_report, ReportOptions, ReportOutput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("search budget exhausted: {0}")]
    Convergence(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing data: {0}")]
    Missing(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Io { .. } | CliError::Missing(_) => 4,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<fieldsaddle::Error> for CliError {
    fn from(e: fieldsaddle::Error) -> Self {
        match e {
            fieldsaddle::Error::NoConvergence { .. } => CliError::Convergence(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// One row of the ring-family table; `None` fields mark a nonexistent ring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingRow {
    pub n: usize,
    pub energy: Option<f64>,
    pub n_u: Option<usize>,
    pub lambda_r: Option<f64>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub z: Option<f64>,
}

pub const RING_HEADER: &str = "N,E_N,n_u,lambda_r,mu,rho_N,z_N";

impl RingRow {
    pub fn csv(&self) -> String {
        match (self.energy, self.n_u, self.lambda_r, self.mu, self.rho, self.z) {
            (Some(e), Some(nu), Some(l), Some(m), Some(r), Some(z)) => {
                format!("{},{e:.4},{nu},{l:.4},{m:.4},{r:.4},{z:.4}", self.n)
            }
            _ => format!("{},no configuration,,,,,", self.n),
        }
    }
}

/// Closed-form ring saddles with their stability exponents.
pub fn cmd_ring(n_min: usize, n_max: usize) -> CliResult<Vec<RingRow>> {
    if n_min < 2 || n_max < n_min {
        return Err(CliError::Validation(format!(
            "need 2 <= n-min <= n-max, got {n_min}..{n_max}"
        )));
    }
    (n_min..=n_max)
        .map(|n| {
            let Some(s) = ring::ring_saddle(n)? else {
                return Ok(RingRow {
                    n,
                    energy: None,
                    n_u: None,
                    lambda_r: None,
                    mu: None,
                    rho: None,
                    z: None,
                });
            };
            let spectrum = stability::analyze(
                &s.configuration(),
                &ModelParams::neutral(n),
                stability::DEFAULT_ZERO_TOL,
            );
            // The stationarity check is absolute; very large rings carry
            // rounding above it, so their exponents are left blank.
            let exps = spectrum.ok().map(|sp| sp.exponents());
            Ok(RingRow {
                n,
                energy: Some(s.energy),
                n_u: exps.map(|e| e.n_u),
                lambda_r: exps.map(|e| e.lambda_r),
                mu: exps.map(|e| e.mu),
                rho: Some(s.rho),
                z: Some(s.z),
            })
        })
        .collect()
}

pub fn render_ring(rows: &[RingRow]) -> String {
    let mut out = String::from(RING_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct SearchArgs {
    pub n: usize,
    pub starts: Option<usize>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub params_file: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct SearchOutput {
    pub store: PathBuf,
    pub manifest_path: PathBuf,
    pub records: Vec<SaddleRecord>,
    pub manifest: RunManifest,
}

pub fn store_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("saddles_n{n}.jsonl"))
}

pub fn manifest_path(store: &Path) -> PathBuf {
    store.with_extension("manifest.json")
}

/// Multistart search for `n` electrons; writes the JSONL store and the
/// manifest sidecar into `out_dir`.
pub fn cmd_search(args: &SearchArgs) -> CliResult<SearchOutput> {
    if args.n < 2 {
        return Err(CliError::Validation(format!("need n >= 2, got {}", args.n)));
    }
    let (mut model, mut search) = match &args.params_file {
        Some(path) => params::load(path, args.n)?,
        None => (ModelParams::neutral(args.n), SearchParams::default()),
    };
    model.n_electrons = args.n;
    if let Some(s) = args.starts {
        search.n_starts = s;
    }
    if let Some(s) = args.seed {
        search.rng_seed = s;
    }
    model.validate()?;
    search.validate()?;

    let t0 = Instant::now();
    let outcome = finder::search(&model, &search, args.workers)?;
    let wall_seconds = t0.elapsed().as_secs_f64();
    if outcome.records.is_empty() {
        return Err(CliError::Convergence(format!(
            "no stationary point found in {} starts",
            search.n_starts
        )));
    }

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        model,
        search,
        workers: args.workers,
        wall_seconds,
        counts: outcome.counts,
        distinct_saddles: outcome.records.len(),
        rejected: outcome.rejected.len(),
    };
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::io(format!("creating {}", args.out_dir.display()), e))?;
    let store = store_path(&args.out_dir, args.n);
    store::write_records(&store, &outcome.records)?;
    let manifest_path = manifest_path(&store);
    store::write_manifest(&manifest_path, &manifest)?;
    Ok(SearchOutput {
        store,
        manifest_path,
        records: outcome.records,
        manifest,
    })
}

/// Re-derived spectrum of one stored record.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub n: usize,
    pub nu: usize,
    pub energy: f64,
    pub spectrum: StabilitySpectrum,
    pub lambda_r: f64,
    pub n_u: usize,
    pub mu: f64,
    pub zero_modes: usize,
    /// `(eigenvalue index, uniform-z overlap)` per unstable direction.
    pub overlaps: Vec<(usize, f64)>,
}

pub fn cmd_analyze(store: &Path, nu: usize) -> CliResult<AnalyzeReport> {
    let records = store::read_records(store)?;
    let rec = records
        .iter()
        .find(|r| r.nu == nu)
        .ok_or_else(|| CliError::Missing(format!("no record nu={nu} in {}", store.display())))?;
    let model = match store::read_manifest(&manifest_path(store)) {
        Ok(m) => m.model,
        Err(_) => ModelParams::neutral(rec.n),
    };
    let spectrum = stability::analyze(&rec.positions, &model, stability::DEFAULT_ZERO_TOL)?;
    let exps = spectrum.exponents();
    Ok(AnalyzeReport {
        n: rec.n,
        nu,
        energy: rec.energy,
        lambda_r: exps.lambda_r,
        n_u: exps.n_u,
        mu: exps.mu,
        zero_modes: spectrum.count(ModeKind::Zero),
        overlaps: spectrum.uniform_z_overlaps(),
        spectrum,
    })
}

pub fn render_analyze(r: &AnalyzeReport) -> String {
    let mut out = format!(
        "N={} nu={} E={:.6}\nlambda_r={:.6} n_u={} mu={:.6} zero_modes={}\nreaction: index={} overlap={:.6} same_sign={}\n",
        r.n,
        r.nu,
        r.energy,
        r.lambda_r,
        r.n_u,
        r.mu,
        r.zero_modes,
        r.spectrum.reaction.index,
        r.spectrum.reaction.overlap,
        r.spectrum.reaction.same_sign,
    );
    out.push_str("index,eigenvalue,kind,rate,uniform_z_overlap\n");
    for (k, (&h, kind)) in r.spectrum.eigenvalues.iter().zip(&r.spectrum.kinds).enumerate() {
        let (kind, rate) = match kind {
            ModeKind::Unstable => ("unstable", (-h).sqrt()),
            ModeKind::Zero => ("zero", 0.0),
            ModeKind::Stable => ("stable", h.sqrt()),
        };
        let overlap = r
            .overlaps
            .iter()
            .find(|&&(i, _)| i == k)
            .map(|&(_, o)| format!("{o:.6}"))
            .unwrap_or_default();
        out.push_str(&format!("{k},{h:.10},{kind},{rate:.6},{overlap}\n"));
    }
    out
}

//! CSV tables and figure coordinate files built from saddle stores.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fieldsaddle::record::Family;
use fieldsaddle::stability::{self, DEFAULT_ZERO_TOL};
use fieldsaddle::{ring, Configuration, ModelParams, SaddleRecord};
use serde::Serialize;

use crate::{cmd_ring, render_ring, store, store_path, CliError, CliResult};

/// Energy gap below which the two lowest saddles are flagged as competing.
pub const MARGINAL_GAP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub stores_dir: PathBuf,
    pub out_dir: PathBuf,
    pub n_min: usize,
    pub n_max: usize,
    pub tables: bool,
    pub figures: bool,
    pub plot_script: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub energy: f64,
    pub mu: f64,
    pub count: usize,
    pub comment: String,
    /// Set when the two lowest saddles lie within [`MARGINAL_GAP`].
    pub marginal_gap: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportOutput {
    pub files: Vec<PathBuf>,
    pub summary: Vec<SummaryRow>,
    pub notes: Vec<String>,
}

pub fn load_stores(dir: &Path, n_min: usize, n_max: usize) -> CliResult<BTreeMap<usize, Vec<SaddleRecord>>> {
    let mut missing = Vec::new();
    let mut stores = BTreeMap::new();
    for n in n_min..=n_max {
        let path = store_path(dir, n);
        if !path.exists() {
            missing.push(path.display().to_string());
            continue;
        }
        stores.insert(n, store::read_records(&path)?);
    }
    if !missing.is_empty() {
        return Err(CliError::Missing(format!("stores not found: {}", missing.join(", "))));
    }
    Ok(stores)
}

pub fn summary(stores: &BTreeMap<usize, Vec<SaddleRecord>>) -> Vec<SummaryRow> {
    stores
        .iter()
        .filter_map(|(&n, records)| {
            let lowest = records.iter().min_by(|a, b| a.energy.total_cmp(&b.energy))?;
            let second = records
                .iter()
                .filter(|r| r.nu != lowest.nu)
                .map(|r| r.energy)
                .min_by(f64::total_cmp);
            let marginal_gap = second
                .map(|e| e - lowest.energy)
                .filter(|gap| *gap < MARGINAL_GAP);
            Some(SummaryRow {
                n,
                energy: lowest.energy,
                mu: lowest.mu,
                count: records.len(),
                comment: lowest.family.to_string(),
                marginal_gap,
            })
        })
        .collect()
}

pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut out = String::from("N,E_N,mu,nu_N,comment,note\n");
    for r in rows {
        let note = r
            .marginal_gap
            .map(|g| format!("marginal: next saddle {g:.1e} higher"))
            .unwrap_or_default();
        let _ = writeln!(out, "{},{:.4},{:.4},{},{},{}", r.n, r.energy, r.mu, r.count, r.comment, note);
    }
    out
}

pub fn render_enumeration(records: &[SaddleRecord]) -> String {
    let mut out = String::from("nu,E_nu,n_u,lambda_r,mu,symmetry,comment,hits\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{:.4},{},{:.4},{:.4},{},{},{}",
            r.nu, r.energy, r.n_u, r.lambda_r, r.mu, r.symmetry, r.family, r.hits
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterRow {
    pub n: usize,
    pub energy: f64,
    pub n_u: usize,
    pub lambda_r: f64,
    pub mu: f64,
    pub z_c: f64,
    pub rho: f64,
    pub z: f64,
}

/// The ring-plus-center family from the reduced Newton solver.
pub fn ring_plus_center_rows(n_min: usize, n_max: usize) -> CliResult<Vec<CenterRow>> {
    (n_min.max(4)..=n_max)
        .map(|n| {
            let s = ring::ring_plus_center_saddle(n)?;
            let e = stability::analyze(&s.configuration(), &ModelParams::neutral(n), DEFAULT_ZERO_TOL)?
                .exponents();
            Ok(CenterRow {
                n,
                energy: s.energy,
                n_u: e.n_u,
                lambda_r: e.lambda_r,
                mu: e.mu,
                z_c: s.z_c,
                rho: s.rho,
                z: s.z,
            })
        })
        .collect()
}

pub fn render_center(rows: &[CenterRow]) -> String {
    let mut out = String::from("N,E_N,n_u,lambda_r,mu,z_c,rho_N-1,z_N-1\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.4},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.n, r.energy, r.n_u, r.lambda_r, r.mu, r.z_c, r.rho, r.z
        );
    }
    out
}

/// The planar family, taken from the stores.
pub fn render_line(stores: &BTreeMap<usize, Vec<SaddleRecord>>) -> String {
    let mut out = String::from("N,E_N,n_u,lambda_r,mu,z_min,z_max\n");
    for (n, records) in stores {
        for r in records.iter().filter(|r| r.family == Family::Line) {
            let (lo, hi) = r.z_range();
            let _ = writeln!(
                out,
                "{n},{:.4},{},{:.4},{:.4},{lo:.4},{hi:.4}",
                r.energy, r.n_u, r.lambda_r, r.mu
            );
        }
    }
    out
}

/// `E/N` of the ring, ring-plus-center and planar families.
pub fn render_energy_per_electron(
    n_min: usize,
    n_max: usize,
    stores: &BTreeMap<usize, Vec<SaddleRecord>>,
) -> CliResult<String> {
    let mut out = String::from("N,ring,ring_plus_center,line\n");
    for n in n_min..=n_max {
        let nf = n as f64;
        let ring = ring::ring_saddle(n)?.map(|s| format!("{:.4}", s.energy / nf));
        let center = if n >= 4 {
            Some(format!("{:.4}", ring::ring_plus_center_saddle(n)?.energy / nf))
        } else {
            None
        };
        let line = stores
            .get(&n)
            .and_then(|rs| rs.iter().find(|r| r.family == Family::Line))
            .map(|r| format!("{:.4}", r.energy / nf));
        let _ = writeln!(
            out,
            "{n},{},{},{}",
            ring.unwrap_or_default(),
            center.unwrap_or_default(),
            line.unwrap_or_default()
        );
    }
    Ok(out)
}

pub fn projection(config: &Configuration, plane: Projection) -> String {
    let (a, b, header) = match plane {
        Projection::Xz => (0, 2, "electron,x,z"),
        Projection::Xy => (0, 1, "electron,x,y"),
    };
    let mut out = format!("{header}\n");
    for (i, p) in config.positions.iter().enumerate() {
        let _ = writeln!(out, "{i},{:.6},{:.6}", p[a], p[b]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Xz,
    Xy,
}

impl Projection {
    fn suffix(self) -> &'static str {
        match self {
            Projection::Xz => "xz",
            Projection::Xy => "xy",
        }
    }
}

fn write(out: &mut ReportOutput, path: PathBuf, text: &str) -> CliResult<()> {
    std::fs::write(&path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    out.files.push(path);
    Ok(())
}

fn plot_script(panels: &[PathBuf]) -> String {
    let mut s = String::from("# gnuplot: one page per coordinate file\nset datafile separator ','\nset size ratio -1\n");
    for p in panels {
        let name = p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(
            s,
            "set title '{name}'; plot '{name}' using 2:3 skip 1 with points pt 7 notitle; pause -1"
        );
    }
    s
}

pub fn cmd_report(opts: &ReportOptions) -> CliResult<ReportOutput> {
    if opts.n_min < 2 || opts.n_max < opts.n_min {
        return Err(CliError::Validation(format!(
            "need 2 <= n-min <= n-max, got {}..{}",
            opts.n_min, opts.n_max
        )));
    }
    let stores = load_stores(&opts.stores_dir, opts.n_min, opts.n_max)?;
    std::fs::create_dir_all(&opts.out_dir)
        .map_err(|e| CliError::io(format!("creating {}", opts.out_dir.display()), e))?;
    let mut out = ReportOutput {
        summary: summary(&stores),
        ..Default::default()
    };
    for row in &out.summary {
        if let Some(gap) = row.marginal_gap {
            out.notes.push(format!(
                "N={} is marginal: the two lowest saddles differ by {gap:.1e} in energy",
                row.n
            ));
        }
    }

    if opts.tables {
        let dir = &opts.out_dir;
        let rings = cmd_ring(opts.n_min, opts.n_max)?;
        write(&mut out, dir.join("table_ring.csv"), &render_ring(&rings))?;
        let centers = ring_plus_center_rows(opts.n_min, opts.n_max)?;
        write(&mut out, dir.join("table_ring_plus_center.csv"), &render_center(&centers))?;
        write(&mut out, dir.join("table_line.csv"), &render_line(&stores))?;
        for (n, records) in &stores {
            write(&mut out, dir.join(format!("table_n{n}.csv")), &render_enumeration(records))?;
        }
        let text = render_summary(&out.summary);
        write(&mut out, dir.join("table_summary.csv"), &text)?;
    }

    if opts.figures {
        let dir = opts.out_dir.join("figures");
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        write(
            &mut out,
            dir.join("energy_per_electron.csv"),
            &render_energy_per_electron(opts.n_min, opts.n_max, &stores)?,
        )?;
        let mut panels = Vec::new();
        let mut panel = |out: &mut ReportOutput, stem: String, c: &Configuration, planes: &[Projection]| {
            for &plane in planes {
                let path = dir.join(format!("{stem}_{}.csv", plane.suffix()));
                write(out, path.clone(), &projection(c, plane))?;
                panels.push(path);
            }
            Ok::<_, CliError>(())
        };
        for n in opts.n_min.max(3)..=opts.n_max {
            if let Some(s) = ring::ring_saddle(n)? {
                panel(&mut out, format!("ring_n{n}"), &s.configuration(), &[Projection::Xy])?;
            }
            if n >= 4 {
                let s = ring::ring_plus_center_saddle(n)?;
                panel(&mut out, format!("ring_plus_center_n{n}"), &s.configuration(), &[Projection::Xz, Projection::Xy])?;
            }
        }
        for (n, records) in &stores {
            for r in records {
                panel(&mut out, format!("n{n}_nu{}", r.nu), &r.positions, &[Projection::Xz, Projection::Xy])?;
            }
        }
        if opts.plot_script {
            let script = plot_script(&panels);
            write(&mut out, dir.join("plot.gp"), &script)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_energy_per_electron_at_eight() {
        let text = render_energy_per_electron(8, 8, &BTreeMap::new()).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("8,-3.3776,"), "{row}");
    }

    #[test]
    fn projections_have_one_row_per_electron() {
        let c = ring::ring_saddle(5).unwrap().unwrap().configuration();
        let xy = projection(&c, Projection::Xy);
        assert_eq!(xy.lines().count(), 6);
        assert!(xy.starts_with("electron,x,y\n0,1.267"));
    }
}

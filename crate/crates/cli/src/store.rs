//! JSONL saddle stores and JSON manifests.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use fieldsaddle::{RunManifest, SaddleRecord};

use crate::{CliError, CliResult};

pub fn write_records(path: &Path, records: &[SaddleRecord]) -> CliResult<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| CliError::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(w, "{line}").map_err(|e| CliError::io(ctx(), e))?;
    }
    w.flush().map_err(|e| CliError::io(ctx(), e))
}

pub fn read_records(path: &Path) -> CliResult<Vec<SaddleRecord>> {
    let file = File::open(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line.map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            serde_json::from_str(&line).map_err(|e| {
                CliError::Validation(format!("{}:{}: {e}", path.display(), i + 1))
            })
        })
        .collect()
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> CliResult<()> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn read_manifest(path: &Path) -> CliResult<RunManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

//! Flat `key = value` parameter files (TOML syntax).
//!
//! Every [`SearchParams`] field may appear, plus the model keys
//! `n_electrons`, `nuclear_charge` and `field`. Missing keys take their
//! defaults; unknown keys are rejected.

use std::path::Path;

use fieldsaddle::{ModelParams, SearchParams};

use crate::{CliError, CliResult};

pub fn parse(text: &str, n: usize) -> CliResult<(ModelParams, SearchParams)> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Validation(format!("params file: {e}")))?;
    let mut model = ModelParams::neutral(n);
    if let Some(v) = table.remove("n_electrons") {
        let file_n = v
            .as_integer()
            .ok_or_else(|| CliError::Validation("n_electrons must be an integer".into()))?;
        if file_n != n as i64 {
            return Err(CliError::Validation(format!(
                "params file is for {file_n} electrons, run requested {n}"
            )));
        }
    }
    let mut real = |key: &str| -> CliResult<Option<f64>> {
        table
            .remove(key)
            .map(|v| match v {
                toml::Value::Float(f) => Ok(f),
                toml::Value::Integer(i) => Ok(i as f64),
                _ => Err(CliError::Validation(format!("{key} must be a number"))),
            })
            .transpose()
    };
    if let Some(z) = real("nuclear_charge")? {
        model.nuclear_charge = z;
    }
    if let Some(f) = real("field")? {
        model.field = f;
    }
    // integer-valued reals (e.g. `sample_rho_max = 4`) are accepted
    let float_keys = [
        "sample_rho_max",
        "sample_z_min",
        "sample_z_max",
        "newton_tol",
        "step_clamp",
        "dedup_tol",
        "zero_tol",
        "symmetry_tol",
    ];
    for key in float_keys {
        if let Some(toml::Value::Integer(i)) = table.get(key) {
            let f = *i as f64;
            table.insert(key.to_string(), toml::Value::Float(f));
        }
    }
    let search: SearchParams = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Validation(format!("params file: {e}")))?;
    model.validate()?;
    search.validate()?;
    Ok((model, search))
}

pub fn load(path: &Path, n: usize) -> CliResult<(ModelParams, SearchParams)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse(&text, n)
}

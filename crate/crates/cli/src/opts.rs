use std::fs;
use std::io::Read;
use std::path::Path;

use gsod_core::SolverOptions;

use crate::commands::Failure;
use crate::Common;

/// Reads a file, or stdin for "-".
pub fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Input(format!("reading stdin: {e}")))?;
        return Ok(text);
    }
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("reading {path}: {e}")))
}

fn parse_config(path: &str, text: &str) -> Result<SolverOptions, Failure> {
    let ext = Path::new(path).extension().and_then(|e| e.to_str()).unwrap_or("");
    let json = || serde_json::from_str::<SolverOptions>(text).map_err(|e| e.to_string());
    let toml = || toml::from_str::<SolverOptions>(text).map_err(|e| e.to_string());
    let parsed = match ext {
        "json" => json(),
        "toml" => toml(),
        _ => json().or_else(|_| toml()),
    };
    parsed.map_err(|e| Failure::Input(format!("config {path}: {e}")))
}

/// Config file first, then flags on top.
pub fn solver_options(common: &Common) -> Result<SolverOptions, Failure> {
    let mut opts = match &common.config {
        Some(path) => parse_config(path, &read_input(path)?)?,
        None => SolverOptions::default(),
    };
    if let Some(seed) = common.seed {
        opts.seed = seed;
    }
    if let Some(restarts) = common.restarts {
        opts.restarts = restarts;
    }
    if let Some(tol) = common.tol_orth {
        opts.tol_orth = tol;
    }
    if let Some(cutoff) = common.sigma_cutoff {
        opts.sigma_cutoff = cutoff;
    }
    opts.validate().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(opts)
}

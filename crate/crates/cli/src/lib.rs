//! Scenario-driven front end for the `lieevolve` solver: loads a scenario,
//! integrates it, runs the requested checks and writes CSV tables together
//! with a `report.json`.

pub mod catalog;
pub mod run;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use run::{run_scenario, Report, RunError, RunOptions};
pub use scenario::{Scenario, SchemaError};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "LIEEVOLVE_OUT";

/// Loads a scenario from a file, or from the catalog when `arg` is a bundled
/// id (with or without `.json`) that is not an existing file.
pub fn load_scenario(arg: &str) -> Result<Scenario, RunError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SchemaError::new("", format!("{arg}: {e}")))?;
        return Ok(Scenario::from_json(&text)?);
    }
    let id = path
        .file_name()
        .and_then(|n| n.to_str())
        .map(|n| n.trim_end_matches(".json"))
        .unwrap_or(arg);
    match catalog::source(id) {
        Some(text) => Ok(Scenario::from_json(text)?),
        None => {
            Err(SchemaError::new("", format!("{arg}: no such file or bundled scenario")).into())
        }
    }
}

/// Output directory of a scenario: `out/<id>` below `--out` when several
/// scenarios share it, `--out` itself for a single one, otherwise below
/// `$LIEEVOLVE_OUT` or `./out`.
pub fn output_dir(out: Option<&Path>, env: Option<&str>, id: &str, batch: bool) -> PathBuf {
    match out {
        Some(dir) if batch => dir.join(id),
        Some(dir) => dir.to_path_buf(),
        None => PathBuf::from(env.filter(|s| !s.is_empty()).unwrap_or("out")).join(id),
    }
}

/// Exit code of a batch: the largest code of its runs (0 pass, 1 failed
/// check, 2 schema, 3 numerical).
pub fn exit_code(results: &[Result<Report, RunError>]) -> i32 {
    results
        .iter()
        .map(|r| match r {
            Ok(rep) if rep.passed => 0,
            Ok(_) => 1,
            Err(e) => e.exit_code(),
        })
        .max()
        .unwrap_or(0)
}

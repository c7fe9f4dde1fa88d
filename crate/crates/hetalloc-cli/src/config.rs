//! Scenario ingestion: built-in presets and JSON config files.
//!
//! A config file is a single JSON document mirroring the library's
//! scenario type:
//!
//! ```json
//! {
//!   "area_budget": 1.0,
//!   "units": [{"name": "cpu", "alpha": -0.5, "beta": 0.875, "efficiency": 1.0}],
//!   "workload": [1.0],
//!   "system_power": {"mode": "fraction", "value": 0.4},
//!   "w": 1.0
//! }
//! ```

use std::path::{Path, PathBuf};

use hetalloc::{preset_hpc, preset_multi_accelerator, validate, Scenario};

use crate::AppError;

/// Names accepted by `--preset`.
pub const PRESETS: [&str; 2] = ["hpc", "multi-accel"];

/// Resolve the scenario source: a preset name or a JSON file. Exactly one
/// must be given; the result is always validated.
pub fn load_scenario(preset: Option<&str>, config: Option<&Path>) -> Result<Scenario, AppError> {
    let scenario = match (preset, config) {
        (Some(name), None) => preset_by_name(name)?,
        (None, Some(path)) => from_file(path)?,
        _ => {
            return Err(AppError::Config(
                "exactly one of --preset or --config is required".into(),
            ))
        }
    };
    let violations = validate(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        let mut message = String::from("scenario failed validation:");
        for v in &violations {
            message.push_str("\n  - ");
            message.push_str(&v.to_string());
        }
        Err(AppError::Config(message))
    }
}

fn preset_by_name(name: &str) -> Result<Scenario, AppError> {
    match name {
        "hpc" => preset_hpc(0.5).map_err(|e| AppError::Config(e.to_string())),
        "multi-accel" => Ok(preset_multi_accelerator()),
        other => Err(AppError::Config(format!(
            "unknown preset '{other}'; available: {}",
            PRESETS.join(", ")
        ))),
    }
}

fn from_file(path: &Path) -> Result<Scenario, AppError> {
    let text = std::fs::read_to_string(path).map_err(|source| AppError::Io {
        context: format!("reading config {}", path.display()),
        source,
    })?;
    // serde_json reports line and column in its message.
    serde_json::from_str(&text)
        .map_err(|e| AppError::Config(format!("config {}: {e}", path.display())))
}

/// Serialize a scenario in the config-file schema (pretty JSON); a
/// scenario written this way reloads equal field-for-field.
pub fn dump_scenario(scenario: &Scenario) -> String {
    let mut text =
        serde_json::to_string_pretty(scenario).expect("scenario serialization is infallible");
    text.push('\n');
    text
}

/// Write the scenario to `dir/scenario.json`, so every output directory
/// records exactly which (normalized) scenario produced its tables.
pub fn dump_to(dir: &Path, scenario: &Scenario) -> Result<PathBuf, AppError> {
    std::fs::create_dir_all(dir).map_err(|source| AppError::Io {
        context: format!("creating output directory {}", dir.display()),
        source,
    })?;
    let path = dir.join("scenario.json");
    std::fs::write(&path, dump_scenario(scenario)).map_err(|source| AppError::Io {
        context: format!("writing {}", path.display()),
        source,
    })?;
    Ok(path)
}

//! Output files. Every file carries the build id and the resolved config:
//! JSON files inside an envelope, CSV files as leading `#` comment lines.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub fn build_id() -> String {
    format!("msbm {} ({})", env!("CARGO_PKG_VERSION"), env!("MSBM_GIT_COMMIT"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub build: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub result: T,
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, command: &str, config: &ExperimentConfig, result: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let env = Envelope {
        build: build_id(),
        command: command.to_string(),
        config: config.clone(),
        result,
    };
    let text = serde_json::to_string_pretty(&env)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Envelope<T>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Comment lines naming the build, the command and the resolved config.
pub fn provenance(command: &str, config: &ExperimentConfig) -> Result<Vec<String>> {
    Ok(vec![
        format!("build: {}", build_id()),
        format!("command: {command}"),
        format!("config: {}", serde_json::to_string(config)?),
    ])
}

pub fn write_csv(
    path: &Path,
    command: &str,
    config: &ExperimentConfig,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let mut file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    for line in provenance(command, config)? {
        writeln!(file, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    log::info!("wrote {}", path.display());
    Ok(())
}

//! Sweep configuration files: TOML sections mirroring the SweepSpec fields.

use super::{MsaaSweepSettings, SweepSpec};
use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::valuation::ValuationParams;
use serde::Deserialize;
use std::path::Path;

/// Parsed configuration: the sweep spec plus requested figure tables.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub spec: SweepSpec,
    pub figures: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    master_seed: u64,
    replications: usize,
    grid: GridSection,
    valuation: ValuationSection,
    #[serde(default)]
    msaa: MsaaSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    k_values: Vec<usize>,
    n_values: Vec<usize>,
    zeta_values: Vec<f64>,
    mechanisms: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValuationSection {
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
    sigma: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct MsaaSection {
    #[serde(default)]
    reservation: f64,
    epsilon: Option<f64>,
    max_iterations: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default)]
    figures: Vec<String>,
}

/// Parse a configuration document. `seed_override` substitutes the master
/// seed when the caller passes `--seed`.
pub fn parse_sweep_config(text: &str, seed_override: Option<u64>) -> Result<SweepConfig> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("bad sweep config: {e}")))?;
    let mechanisms: Vec<Mechanism> = file
        .grid
        .mechanisms
        .iter()
        .map(|m| m.parse())
        .collect::<Result<_>>()?;
    let valuation = ValuationParams::new(
        file.valuation.alpha,
        file.valuation.beta,
        file.valuation.a,
        file.valuation.b,
        file.valuation.sigma,
    )?;
    let spec = SweepSpec {
        k_values: file.grid.k_values,
        n_values: file.grid.n_values,
        zeta_values: file.grid.zeta_values,
        mechanisms,
        replications: file.replications,
        valuation,
        msaa: MsaaSweepSettings {
            reservation: file.msaa.reservation,
            epsilon: file.msaa.epsilon,
            max_iterations: file.msaa.max_iterations,
        },
        master_seed: seed_override.unwrap_or(file.master_seed),
    };
    spec.validate()?;
    for figure in &file.output.figures {
        if !super::FIGURES.contains(&figure.as_str()) {
            return Err(Error::Config(format!(
                "unknown figure {figure:?}; expected one of {:?}",
                super::FIGURES
            )));
        }
    }
    Ok(SweepConfig { spec, figures: file.output.figures })
}

/// Load a configuration file from disk.
pub fn load_sweep_config(path: &Path, seed_override: Option<u64>) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    parse_sweep_config(&text, seed_override)
}

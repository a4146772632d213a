//! Configs shipped with the binary.

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::run::parse_config;

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub file: &'static str,
    pub experiment: &'static str,
    pub description: String,
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, concat!($name, ".json"), include_str!(concat!("../configs/", $name, ".json")))),*]
    };
}

/// (name, file, contents), in catalog order.
pub const BUNDLED: &[(&str, &str, &str)] = bundled![
    "sigma_z_truthtable",
    "sigma_phi_truthtable",
    "cirac_zoller_cnot",
    "fast_kick_gate",
    "ramsey_phase_sweep",
    "fast_scaling",
    "clock_states",
    "comb_spectrum",
    "trajectory",
];

pub fn list_experiments() -> Vec<CatalogEntry> {
    BUNDLED
        .iter()
        .map(|&(name, file, text)| {
            let cfg = parse_config(text).expect("bundled config parses");
            CatalogEntry {
                name,
                file,
                experiment: cfg.experiment.name(),
                description: cfg.description.unwrap_or_default(),
            }
        })
        .collect()
}

/// Looks a bundled config up by name or file name.
pub fn bundled_config(name: &str) -> Option<Result<ExperimentConfig, RunError>> {
    BUNDLED.iter().find(|(n, f, _)| *n == name || *f == name).map(|(_, _, text)| parse_config(text))
}

//! Run settings merged from an optional JSON config file and command-line flags.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use sectorlab::linalg::{Settings, Tolerances};

use crate::io::{read_json, CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub rank: Option<f64>,
    pub gap: Option<f64>,
    pub state: Option<f64>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: ToleranceOverrides,
    pub format: Option<Format>,
    pub dim_cap: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        RunConfig {
            seed: over.seed.or(self.seed),
            tol: ToleranceOverrides {
                rank: over.tol.rank.or(self.tol.rank),
                gap: over.tol.gap.or(self.tol.gap),
                state: over.tol.state.or(self.tol.state),
            },
            format: over.format.or(self.format),
            dim_cap: over.dim_cap.or(self.dim_cap),
        }
    }

    pub fn settings(&self) -> CliResult<Settings> {
        let defaults = Settings::default();
        let pick = |name: &str, v: Option<f64>, d: f64| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Usage(format!("tolerance {name} must be positive, got {x}"))),
            Some(x) => Ok(x),
            None => Ok(d),
        };
        let dim_cap = self.dim_cap.unwrap_or(defaults.dim_cap);
        if dim_cap == 0 {
            return Err(CliError::Usage("dim_cap must be positive".into()));
        }
        Ok(Settings {
            tol: Tolerances {
                rank: pick("rank", self.tol.rank, defaults.tol.rank)?,
                gap: pick("gap", self.tol.gap, defaults.tol.gap)?,
                state: pick("state", self.tol.state, defaults.tol.state)?,
            },
            seed: self.seed.unwrap_or(defaults.seed),
            dim_cap,
        })
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

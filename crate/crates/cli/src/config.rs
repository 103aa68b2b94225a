use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use phaselab::experiment::RunPlan;
use phaselab::{Error, Result};

/// Environment variable replacing every run's `base_seed`.
pub const SEED_ENV: &str = "PHASELAB_SEED";

/// A `run` invocation as a self-describing JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Directory receiving one trials CSV per run.
    pub output_dir: PathBuf,
    /// Keep wall-clock times in `runtime_ms`; `false` writes zeros so that
    /// repeated runs produce identical files.
    pub record_timing: bool,
    pub runs: Vec<RunPlan>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(Error::InvalidInput("config lists no runs".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for run in &self.runs {
            run.validate()?;
            if !seen.insert(self.trials_path(run)) {
                return Err(Error::InvalidInput(format!(
                    "two runs would write {}",
                    self.trials_path(run).display()
                )));
            }
        }
        Ok(())
    }

    pub fn trials_path(&self, run: &RunPlan) -> PathBuf {
        self.output_dir.join(format!("{}_N{}.csv", run.label, run.grid.signal_len))
    }

    /// Applies `PHASELAB_SEED` if set.
    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Some(seed) = seed_from_env()? {
            for run in &mut self.runs {
                run.grid.base_seed = seed;
            }
        }
        Ok(())
    }
}

pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidInput(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

use serde::{Deserialize, Serialize};

use crate::ensembles::{dimensions, EnsembleSpec};
use crate::error::{invalid, Result};
use crate::rng::trial_seed;
use crate::theory::real_transition;

/// Number of ρ points per δ in the standard grid.
pub const STANDARD_RHO_POINTS: i32 = 41;

/// The 33 sampling ratios 0.02, 0.05, …, 0.98.
pub fn standard_deltas() -> Vec<f64> {
    (0..33).map(|i| (2 + 3 * i) as f64 / 100.0).collect()
}

/// `ρ^R(δ) + 0.01(i − 21)` for `i` in `steps`, dropping values outside
/// `(0, 1]`. Values below `1/n` survive and become `k = 1` after the ceiling.
pub fn centered_rhos(delta: f64, steps: std::ops::RangeInclusive<i32>) -> Result<Vec<f64>> {
    let center = real_transition(delta)?;
    Ok(steps
        .map(|i| center + 0.01 * f64::from(i - 21))
        .filter(|&rho| rho > 0.0 && rho <= 1.0)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub ensemble: EnsembleSpec,
    #[serde(rename = "N")]
    pub signal_len: usize,
    /// Trials per cell.
    pub trials: usize,
    pub base_seed: u64,
    pub deltas: Vec<f64>,
    /// One strictly increasing ρ list per δ.
    pub rho_lists: Vec<Vec<f64>>,
}

/// One (δ, ρ) cell with its grid indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub delta_index: usize,
    pub rho_index: usize,
    pub delta: f64,
    pub rho: f64,
}

impl PhaseGrid {
    pub fn new(
        ensemble: EnsembleSpec,
        signal_len: usize,
        trials: usize,
        base_seed: u64,
        deltas: Vec<f64>,
        rho_lists: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let grid = Self { ensemble, signal_len, trials, base_seed, deltas, rho_lists };
        grid.validate()?;
        Ok(grid)
    }

    /// Rows centered on the real transition, one ρ per step in `steps`
    /// (the standard grid uses `1..=41`).
    pub fn centered(
        ensemble: EnsembleSpec,
        signal_len: usize,
        trials: usize,
        base_seed: u64,
        deltas: Vec<f64>,
        steps: std::ops::RangeInclusive<i32>,
    ) -> Result<Self> {
        let rho_lists = deltas
            .iter()
            .map(|&d| {
                let rhos = centered_rhos(d, steps.clone())?;
                let dropped = steps.clone().count() - rhos.len();
                if dropped > 0 {
                    log::info!("delta {d}: {dropped} rho values outside (0, 1] skipped");
                }
                Ok(rhos)
            })
            .collect::<Result<_>>()?;
        Self::new(ensemble, signal_len, trials, base_seed, deltas, rho_lists)
    }

    /// The full 33 × 41 grid.
    pub fn standard(ensemble: EnsembleSpec, signal_len: usize, trials: usize, base_seed: u64) -> Result<Self> {
        Self::centered(ensemble, signal_len, trials, base_seed, standard_deltas(), 1..=STANDARD_RHO_POINTS)
    }

    pub fn validate(&self) -> Result<()> {
        if self.signal_len == 0 {
            return Err(invalid("grid signal length must be positive"));
        }
        if self.trials == 0 {
            return Err(invalid("grid needs at least one trial per cell"));
        }
        if self.deltas.is_empty() {
            return Err(invalid("grid has no deltas"));
        }
        if self.deltas.len() != self.rho_lists.len() {
            return Err(invalid(format!(
                "{} deltas but {} rho lists",
                self.deltas.len(),
                self.rho_lists.len()
            )));
        }
        if self.deltas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid deltas must be strictly increasing"));
        }
        for (&delta, rhos) in self.deltas.iter().zip(&self.rho_lists) {
            if rhos.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid(format!("rhos for delta {delta} must be strictly increasing")));
            }
            for &rho in rhos {
                dimensions(self.signal_len, delta, rho)?;
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.deltas.iter().zip(&self.rho_lists).enumerate().flat_map(|(di, (&delta, rhos))| {
            rhos.iter().enumerate().map(move |(ri, &rho)| Cell {
                delta_index: di,
                rho_index: ri,
                delta,
                rho,
            })
        })
    }

    pub fn cell_count(&self) -> usize {
        self.rho_lists.iter().map(Vec::len).sum()
    }

    pub fn trial_count(&self) -> usize {
        self.cell_count() * self.trials
    }

    pub fn seed(&self, cell: &Cell, trial: usize) -> u64 {
        trial_seed(self.base_seed, cell.delta_index, cell.rho_index, trial)
    }
}

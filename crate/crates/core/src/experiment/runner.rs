use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{assess, TrialStatus};
use super::grid::{Cell, PhaseGrid};
use super::records::{key_set, RecordSink, TrialRecord};
use crate::ensembles::{dimensions, make_instance};
use crate::error::{invalid, Error, Result};
use crate::solver::{solve, solve_indirect, SolverConfig};

/// Which problem a run solves on each instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    /// Complex ℓ1 minimization.
    #[default]
    Complex,
    /// Real ℓ1 minimization of the stacked real system.
    Indirect,
}

#[derive(Clone, Debug)]
pub struct RunSpec {
    /// Value of the `ensemble` column.
    pub label: String,
    pub mode: SolveMode,
    pub solver: SolverConfig,
}

impl RunSpec {
    /// Labels the run by [`super::presets::run_label`].
    pub fn new(grid: &PhaseGrid, mode: SolveMode, solver: SolverConfig) -> Self {
        let label = super::presets::run_label(grid.ensemble, mode, solver.variant);
        Self { label, mode, solver }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub workers: usize,
    /// Log a progress line every this many completed trials (0 disables).
    pub progress_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: 1, progress_every: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub executed: usize,
    pub skipped: usize,
    /// Status counts over every record in the sink after the run.
    pub counts: BTreeMap<TrialStatus, usize>,
}

impl RunSummary {
    pub fn count(&self, status: TrialStatus) -> usize {
        self.counts.get(&status).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} trials run, {} already present;", self.executed, self.skipped)?;
        for status in TrialStatus::ALL {
            write!(f, " {status}={}", self.count(status))?;
        }
        Ok(())
    }
}

/// Solves one trial of one cell.
pub fn run_trial(grid: &PhaseGrid, spec: &RunSpec, cell: &Cell, trial: usize) -> Result<TrialRecord> {
    let seed = grid.seed(cell, trial);
    let (n, k) = dimensions(grid.signal_len, cell.delta, cell.rho)?;
    let start = Instant::now();
    let instance = make_instance(grid.ensemble, grid.signal_len, cell.delta, cell.rho, seed)?;
    let outcome = match spec.mode {
        SolveMode::Complex => solve(&instance, &spec.solver),
        SolveMode::Indirect => solve_indirect(&instance, &spec.solver),
    };
    let (status, rrmse, l1_ratio, outer_iters) = match outcome {
        Ok(result) => {
            let a = assess(&result, &instance.x_true)?;
            (a.status, a.rrmse, a.l1_ratio, result.outer_iters)
        }
        Err(Error::NumericalFailure { iteration }) => {
            log::warn!("seed {seed}: solver diverged at iteration {iteration}");
            (TrialStatus::SolverFailure, f64::NAN, f64::NAN, iteration)
        }
        Err(e) => return Err(e),
    };
    Ok(TrialRecord {
        ensemble: spec.label.clone(),
        signal_len: grid.signal_len,
        delta: cell.delta,
        rho: cell.rho,
        n,
        k,
        trial,
        seed,
        status,
        rrmse,
        l1_ratio,
        outer_iters,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every trial of the grid missing from `sink`, on a pool of
/// `opts.workers` threads. Records are appended as they finish; on a sink
/// error the run stops and rows already written are kept.
pub fn run_grid(grid: &PhaseGrid, spec: &RunSpec, sink: &mut dyn RecordSink, opts: &RunOptions) -> Result<RunSummary> {
    grid.validate()?;
    spec.solver.validate()?;
    if opts.workers == 0 {
        return Err(invalid("workers must be at least 1"));
    }
    let done = key_set(sink.existing());
    let mut pending = Vec::new();
    let mut skipped = 0;
    for cell in grid.cells() {
        for trial in 0..grid.trials {
            let key = super::records::TrialKey {
                ensemble: spec.label.clone(),
                signal_len: grid.signal_len,
                delta_bits: cell.delta.to_bits(),
                rho_bits: cell.rho.to_bits(),
                trial,
            };
            if done.contains(&key) {
                skipped += 1;
            } else {
                pending.push((cell, trial));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let total = pending.len();
    let completed = std::sync::atomic::AtomicUsize::new(0);
    let shared = Mutex::new(&mut *sink);
    pool.install(|| {
        pending.par_iter().try_for_each(|(cell, trial)| -> Result<()> {
            let record = run_trial(grid, spec, cell, *trial)?;
            shared.lock().expect("sink lock poisoned").append(record)?;
            let finished = completed.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            if opts.progress_every > 0 && (finished % opts.progress_every == 0 || finished == total) {
                log::info!("{}: {finished}/{total} trials", spec.label);
            }
            Ok(())
        })
    })?;
    sink.finish()?;

    let mut counts = BTreeMap::new();
    for r in sink.records() {
        *counts.entry(r.status).or_insert(0) += 1;
    }
    let summary = RunSummary { executed: total, skipped, counts };
    if summary.count(TrialStatus::SolverFailure) > 0 {
        log::warn!(
            "{}: {} solver failures among {} trials",
            spec.label,
            summary.count(TrialStatus::SolverFailure),
            summary.total()
        );
    }
    Ok(summary)
}

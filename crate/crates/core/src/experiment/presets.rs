//! Sweeps behind the published figures, at a chosen scale.

use serde::{Deserialize, Serialize};

use super::grid::{standard_deltas, PhaseGrid, STANDARD_RHO_POINTS};
use super::runner::{RunSpec, SolveMode};
use crate::ensembles::{EnsembleKind, EnsembleSpec, SignalModel};
use crate::error::{invalid, Result};
use crate::solver::{SolverConfig, Variant};

/// A fully specified sweep: what to solve, how, and on which grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPlan {
    pub label: String,
    pub mode: SolveMode,
    pub solver: SolverConfig,
    pub grid: PhaseGrid,
}

impl RunPlan {
    pub fn new(grid: PhaseGrid, mode: SolveMode, solver: SolverConfig) -> Self {
        let label = RunSpec::new(&grid, mode, solver.clone()).label;
        Self { label, mode, solver, grid }
    }

    pub fn spec(&self) -> RunSpec {
        RunSpec { label: self.label.clone(), mode: self.mode, solver: self.solver.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() || self.label.contains([',', '"', '\n']) {
            return Err(invalid(format!("run label {:?} must be non-empty CSV-safe text", self.label)));
        }
        self.grid.validate()?;
        self.solver.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Partial Fourier at N = 1024 (exact and relaxed), 2048, 4096, 8192.
    Fig1,
    /// Partial Fourier at N = 8192 and Gaussian, Bernoulli, ternary at N = 1000.
    Fig2,
    /// Complex against indirect (real ℓ1) solves on the same Fourier instances.
    Fig3,
    /// Real Gaussian sensing of complex signals next to complex Gaussian sensing.
    Mmv,
    /// As `Mmv` with equal real and imaginary parts in the signal.
    MmvWorst,
}

/// Overrides applied on top of a preset's published sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetScale {
    /// Replaces every run's signal length.
    pub signal_len: Option<usize>,
    /// Replaces the 33 standard deltas.
    pub deltas: Option<Vec<f64>>,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for PresetScale {
    fn default() -> Self {
        Self { signal_len: None, deltas: None, trials: 20, base_seed: 1 }
    }
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Mmv, Preset::MmvWorst];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Mmv => "mmv",
            Preset::MmvWorst => "mmv-worst",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Preset::Fig1 => "partial Fourier at four signal lengths, both variants at N=1024",
            Preset::Fig2 => "ensemble universality: Fourier, Gaussian, Bernoulli, ternary",
            Preset::Fig3 => "complex vs indirect real l1 on identical Fourier instances",
            Preset::Mmv => "real vs complex Gaussian sensing (jointly sparse case)",
            Preset::MmvWorst => "jointly sparse case with equal real and imaginary parts",
        }
    }

    pub fn plans(self, scale: &PresetScale) -> Result<Vec<RunPlan>> {
        use EnsembleKind::*;
        let relaxed = SolverConfig::relaxed;
        let spec = EnsembleSpec::new;
        let runs: Vec<(EnsembleSpec, usize, SolveMode, SolverConfig)> = match self {
            Preset::Fig1 => vec![
                (spec(PartialFourier), 1024, SolveMode::Complex, SolverConfig::exact()),
                (spec(PartialFourier), 1024, SolveMode::Complex, relaxed()),
                (spec(PartialFourier), 2048, SolveMode::Complex, relaxed()),
                (spec(PartialFourier), 4096, SolveMode::Complex, relaxed()),
                (spec(PartialFourier), 8192, SolveMode::Complex, relaxed()),
            ],
            Preset::Fig2 => vec![
                (spec(PartialFourier), 8192, SolveMode::Complex, relaxed()),
                (spec(ComplexGaussian), 1000, SolveMode::Complex, relaxed()),
                (spec(ComplexBernoulli), 1000, SolveMode::Complex, relaxed()),
                (spec(ComplexTernary), 1000, SolveMode::Complex, relaxed()),
            ],
            Preset::Fig3 => vec![
                (spec(PartialFourier), 1024, SolveMode::Complex, relaxed()),
                (spec(PartialFourier), 1024, SolveMode::Indirect, relaxed()),
            ],
            Preset::Mmv => vec![
                (spec(ComplexGaussian), 1000, SolveMode::Complex, relaxed()),
                (spec(RealGaussian), 1000, SolveMode::Complex, relaxed()),
            ],
            Preset::MmvWorst => {
                let worst = |k| spec(k).with_signal(SignalModel::EqualRealImag);
                vec![
                    (worst(ComplexGaussian), 1000, SolveMode::Complex, relaxed()),
                    (worst(RealGaussian), 1000, SolveMode::Complex, relaxed()),
                ]
            }
        };
        let deltas = scale.deltas.clone().unwrap_or_else(standard_deltas);
        let mut plans: Vec<RunPlan> = Vec::new();
        for (ensemble, len, mode, solver) in runs {
            let len = scale.signal_len.unwrap_or(len);
            let grid = PhaseGrid::centered(ensemble, len, scale.trials, scale.base_seed, deltas.clone(), 1..=STANDARD_RHO_POINTS)?;
            let plan = RunPlan::new(grid, mode, solver);
            // A size override can collapse distinct runs onto one.
            if !plans.iter().any(|p| p.label == plan.label && p.grid.signal_len == len) {
                plans.push(plan);
            }
        }
        Ok(plans)
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| invalid(format!("unknown preset {s:?}")))
    }
}

/// Label used for the `ensemble` column: ensemble name, then any
/// non-default signal model, `indirect`, and `exact`, joined by `-`.
pub fn run_label(ensemble: EnsembleSpec, mode: SolveMode, variant: Variant) -> String {
    let mut label = ensemble.kind.name().to_string();
    if ensemble.signal_model != SignalModel::default() {
        label.push('-');
        label.push_str(ensemble.signal_model.name());
    }
    if mode == SolveMode::Indirect {
        label.push_str("-indirect");
    }
    if variant == Variant::Exact {
        label.push_str("-exact");
    }
    label
}

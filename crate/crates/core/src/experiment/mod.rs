//! Phase-plane sweeps: grids, trial execution and classification,
//! persistence, and logistic estimation of finite-N transitions.

pub mod classify;
pub mod glm;
pub mod grid;
pub mod presets;
pub mod records;
pub mod runner;

pub use classify::{assess, classify, Assessment, TrialStatus};
pub use glm::{fit_all, fit_transition, transition_width, FailureMode, TransitionEstimate, TransitionRow};
pub use grid::{Cell, PhaseGrid};
pub use presets::{Preset, PresetScale, RunPlan};
pub use records::{CsvSink, MemorySink, RecordSink, TrialRecord, TrialsHeader};
pub use runner::{run_grid, run_trial, RunOptions, RunSpec, RunSummary, SolveMode};

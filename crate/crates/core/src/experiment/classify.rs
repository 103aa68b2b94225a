use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::solver::SolverResult;
use crate::vector::relative_error;

/// RRMSE below which a trial counts as recovered.
pub const SUCCESS_RRMSE: f64 = 1e-4;
/// ℓ1 ratio at or above which an unrecovered run is blamed on the solver.
pub const SOLVER_FAILURE_RATIO: f64 = 1.0 + 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Success,
    /// The solver reached a feasible point no worse in ℓ1 than `x°`, so
    /// basis pursuit itself does not return `x°`.
    RecoveryFailure,
    /// The solver stopped at a point with larger ℓ1 norm than `x°`.
    SolverFailure,
    /// A run that did not converge and meets none of the criteria above.
    Indeterminate,
}

impl TrialStatus {
    pub const ALL: [TrialStatus; 4] = [
        TrialStatus::Success,
        TrialStatus::RecoveryFailure,
        TrialStatus::SolverFailure,
        TrialStatus::Indeterminate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrialStatus::Success => "success",
            TrialStatus::RecoveryFailure => "recovery-failure",
            TrialStatus::SolverFailure => "solver-failure",
            TrialStatus::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assessment {
    pub status: TrialStatus,
    pub rrmse: f64,
    /// `‖x̂‖/‖x°‖` in the norm the solver minimized.
    pub l1_ratio: f64,
}

/// Status from raw measurements.
pub fn status_of(rrmse: f64, l1_ratio: f64, converged: bool) -> TrialStatus {
    if rrmse < SUCCESS_RRMSE {
        TrialStatus::Success
    } else if l1_ratio >= SOLVER_FAILURE_RATIO {
        TrialStatus::SolverFailure
    } else if converged {
        TrialStatus::RecoveryFailure
    } else {
        TrialStatus::Indeterminate
    }
}

pub fn assess(result: &SolverResult, x_true: &[num_complex::Complex64]) -> Result<Assessment> {
    let reference = result.objective.evaluate(x_true);
    if reference == 0.0 {
        return Err(invalid("cannot classify against a zero signal"));
    }
    let rrmse = relative_error(&result.x_hat, x_true);
    let l1_ratio = result.l1_value / reference;
    Ok(Assessment {
        status: status_of(rrmse, l1_ratio, result.converged),
        rrmse,
        l1_ratio,
    })
}

pub fn classify(result: &SolverResult, x_true: &[num_complex::Complex64]) -> Result<TrialStatus> {
    assess(result, x_true).map(|a| a.status)
}

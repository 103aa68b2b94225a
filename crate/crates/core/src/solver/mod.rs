//! Complex basis pursuit by the exact (eONE-L1) and relaxed (rONE-L1)
//! orthonormal-expansion iterations.

pub mod alm;
pub mod expanded;
pub mod threshold;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use alm::{Alm, AlmOutcome, AlmParams, LinearMap, Scalar, StepInfo};
pub use threshold::{block_soft_threshold, soft_threshold, Componentwise, Modulus, PairedBlocks, Shrinkage};

use crate::bridge;
use crate::error::{invalid, Result};
use crate::instance::SparseInstance;
use crate::vector::ComplexVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Inner loop run to `inner_tol` (eONE-L1).
    Exact,
    /// A single inner update per outer iteration (rONE-L1).
    Relaxed,
}

impl Variant {
    /// Default penalty growth: `1 + δ` (exact) and
    /// `min(1 + 0.04δ, 1.02)` (relaxed).
    pub fn default_growth(self, delta: f64) -> f64 {
        match self {
            Variant::Exact => 1.0 + delta,
            Variant::Relaxed => (1.0 + 0.04 * delta).min(1.02),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// Complex modulus shrinkage, the prox of `‖x‖₁` on `C^N`.
    ComplexScalar,
    /// Real and imaginary parts shrunk separately, the prox of `‖x_r‖₁`.
    RealScalar,
    /// 2-block shrinkage on the real reformulation; same map as
    /// `ComplexScalar` under the block identification.
    Block2,
}

/// Either a fixed value or the rule-based default, serialized as a number or
/// the string `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Setting {
    Auto(AutoTag),
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

impl Setting {
    pub const AUTO: Setting = Setting::Auto(AutoTag::Auto);

    pub fn value(self) -> Option<f64> {
        match self {
            Setting::Auto(_) => None,
            Setting::Value(v) => Some(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Penalty growth factor; `auto` follows [`Variant::default_growth`].
    pub r: Setting,
    /// Initial penalty; `auto` sets `1/μ₀ = 0.9·max|A^H b|`.
    pub mu0: Setting,
    pub outer_max: usize,
    pub inner_max: usize,
    pub inner_tol: f64,
    pub stop_tol: f64,
    pub threshold_rule: ThresholdRule,
}

impl SolverConfig {
    pub fn exact() -> Self {
        Self {
            variant: Variant::Exact,
            ..Self::relaxed()
        }
    }

    pub fn relaxed() -> Self {
        Self {
            variant: Variant::Relaxed,
            r: Setting::AUTO,
            mu0: Setting::AUTO,
            outer_max: 5000,
            inner_max: 100,
            inner_tol: 1e-6,
            stop_tol: 1e-8,
            threshold_rule: ThresholdRule::ComplexScalar,
        }
    }

    pub fn for_variant(variant: Variant) -> Self {
        match variant {
            Variant::Exact => Self::exact(),
            Variant::Relaxed => Self::relaxed(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.r.value() {
            if !(r > 1.0 && r.is_finite()) {
                return Err(invalid(format!("growth factor r must exceed 1, got {r}")));
            }
        }
        if let Some(mu) = self.mu0.value() {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(invalid(format!("mu0 must be positive, got {mu}")));
            }
        }
        if self.outer_max < 1 {
            return Err(invalid("outer_max must be at least 1"));
        }
        if self.inner_max < 1 {
            return Err(invalid("inner_max must be at least 1"));
        }
        if !(self.inner_tol > 0.0 && self.stop_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        Ok(())
    }

    /// Resolves `auto` entries for sampling ratio `delta`.
    pub fn params(&self, delta: f64) -> AlmParams {
        AlmParams {
            variant: self.variant,
            growth: self
                .r
                .value()
                .unwrap_or_else(|| self.variant.default_growth(delta)),
            mu0: self.mu0.value(),
            inner_max: self.inner_max,
            inner_tol: self.inner_tol,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::relaxed()
    }
}

/// Norm minimized by a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `Σ |x_j|` on complex entries (equivalently the ℓ2,1 norm of `x_r`).
    ComplexL1,
    /// `Σ |Re x_j| + |Im x_j|`, the plain ℓ1 norm of `x_r`.
    RealL1,
}

impl Objective {
    pub fn evaluate(self, x: &[Complex64]) -> f64 {
        match self {
            Objective::ComplexL1 => Modulus.objective(x),
            Objective::RealL1 => Componentwise.objective(x),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    pub x_hat: ComplexVector,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    /// `‖A x̂ − b‖₂ / ‖b‖₂`.
    pub feasibility_residual: f64,
    /// Value of [`SolverResult::objective`] at `x̂`.
    pub l1_value: f64,
    pub objective: Objective,
    pub converged: bool,
}

impl SolverResult {
    fn from_complex(out: AlmOutcome<Complex64>, objective: Objective) -> Result<Self> {
        Ok(Self {
            x_hat: ComplexVector::new(out.x)?,
            outer_iters: out.outer_iters,
            total_inner_iters: out.inner_iters,
            feasibility_residual: out.feasibility_residual,
            l1_value: out.objective,
            objective,
            converged: out.converged,
        })
    }
}

/// Solves `min ‖x‖₁ s.t. Ax = b` for the instance.
///
/// `threshold_rule = RealScalar` turns this into the split-part problem
/// solved by [`solve_indirect`], but without leaving complex arithmetic.
pub fn solve(instance: &SparseInstance, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let op = instance.operator.as_ref();
    let params = cfg.params(op.sampling_ratio());
    let b = instance.b.as_slice();
    match cfg.threshold_rule {
        ThresholdRule::ComplexScalar | ThresholdRule::Block2 => {
            let out = Alm::new(op, b, &Modulus, params).run(cfg.stop_tol, cfg.outer_max)?;
            SolverResult::from_complex(out, Objective::ComplexL1)
        }
        ThresholdRule::RealScalar => {
            let out = Alm::new(op, b, &Componentwise, params).run(cfg.stop_tol, cfg.outer_max)?;
            SolverResult::from_complex(out, Objective::RealL1)
        }
    }
}

/// Minimizes `‖x_r‖₁` subject to `A_r x_r = b_r` on the real 2n × 2N
/// reformulation, ignoring the pairing of real and imaginary parts.
pub fn solve_indirect(instance: &SparseInstance, cfg: &SolverConfig) -> Result<SolverResult> {
    let mut cfg = cfg.clone();
    cfg.threshold_rule = ThresholdRule::RealScalar;
    solve_real_system(instance, &cfg)
}

/// Runs the iteration on the real reformulation with `cfg.threshold_rule`
/// applied to real coordinates: `RealScalar` per coordinate, `Block2` (and
/// `ComplexScalar`) on the (Re xⱼ, Im xⱼ) pairs given by the block
/// permutation.
pub fn solve_real_system(instance: &SparseInstance, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let system = bridge::to_real_system(instance);
    let params = cfg.params(system.operator.sampling_ratio());
    let b = system.b_r.as_slice();
    let (out, objective) = match cfg.threshold_rule {
        ThresholdRule::RealScalar => (
            Alm::new(&system.operator, b, &Componentwise, params).run(cfg.stop_tol, cfg.outer_max)?,
            Objective::RealL1,
        ),
        ThresholdRule::Block2 | ThresholdRule::ComplexScalar => {
            let pairs = system.block_pairs();
            let rule = PairedBlocks::new(&pairs);
            (
                Alm::new(&system.operator, b, &rule, params).run(cfg.stop_tol, cfg.outer_max)?,
                Objective::ComplexL1,
            )
        }
    };
    Ok(SolverResult {
        x_hat: bridge::complexify(&out.x)?,
        outer_iters: out.outer_iters,
        total_inner_iters: out.inner_iters,
        feasibility_residual: out.feasibility_residual,
        l1_value: out.objective,
        objective,
        converged: out.converged,
    })
}

use std::sync::Arc;

use crate::ensembles::EnsembleSpec;
use crate::error::Result;
use crate::operator::SensingOperator;
use crate::vector::ComplexVector;

/// One random basis-pursuit problem `A x = b` with a k-sparse ground truth.
#[derive(Clone, Debug)]
pub struct SparseInstance {
    pub ensemble: EnsembleSpec,
    pub operator: Arc<SensingOperator>,
    pub x_true: ComplexVector,
    pub b: ComplexVector,
    /// Signal length N.
    pub signal_len: usize,
    /// Number of measurements n.
    pub measurements: usize,
    /// Number of nonzeros k.
    pub sparsity: usize,
    seed: u64,
}

impl SparseInstance {
    pub(crate) fn new(
        ensemble: EnsembleSpec,
        operator: SensingOperator,
        x_true: ComplexVector,
        b: ComplexVector,
        sparsity: usize,
        seed: u64,
    ) -> Self {
        Self {
            ensemble,
            signal_len: operator.cols(),
            measurements: operator.rows(),
            operator: Arc::new(operator),
            x_true,
            b,
            sparsity,
            seed,
        }
    }

    /// Builds `b = A x` for a caller-chosen operator and signal.
    pub fn from_signal(ensemble: EnsembleSpec, operator: SensingOperator, x_true: ComplexVector, seed: u64) -> Result<Self> {
        let b = operator.apply_forward(&x_true)?;
        let sparsity = x_true.support_size();
        Ok(Self::new(ensemble, operator, x_true, b, sparsity, seed))
    }

    /// `δ = n/N`.
    pub fn delta(&self) -> f64 {
        self.measurements as f64 / self.signal_len as f64
    }

    /// `ρ = k/n`.
    pub fn rho(&self) -> f64 {
        self.sparsity as f64 / self.measurements as f64
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

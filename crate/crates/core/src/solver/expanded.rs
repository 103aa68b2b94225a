//! The same iteration written literally on `(x, d, y)` with the explicit
//! completion `Φ`. Costs an N-point transform (or an N × N product) per
//! half-step; kept as a reference for the signal-coordinate form in
//! [`super::alm`].

use num_complex::Complex64;

use super::alm::AlmParams;
use super::threshold::{Modulus, Shrinkage};
use super::{Objective, SolverConfig, SolverResult, Variant};
use crate::error::{invalid, Error, Result};
use crate::instance::SparseInstance;
use crate::operator::SensingOperator;
use crate::vector::{norm2, relative_error, ComplexVector};

pub struct ExpandedAlm<'a> {
    op: &'a SensingOperator,
    b: &'a [Complex64],
    x: Vec<Complex64>,
    d: Vec<Complex64>,
    y: Vec<Complex64>,
    mu: f64,
    params: AlmParams,
    outer: usize,
    inner_total: usize,
}

impl<'a> ExpandedAlm<'a> {
    /// `op` must carry a unitary completion.
    pub fn new(op: &'a SensingOperator, b: &'a [Complex64], params: AlmParams) -> Result<Self> {
        if op.completion().is_none() {
            return Err(invalid("expanded iteration needs a unitary completion"));
        }
        let len = op.cols();
        let mut d = vec![Complex64::new(0.0, 0.0); len];
        d[..b.len()].copy_from_slice(b);
        let mu = match params.mu0 {
            Some(mu) => mu,
            None => {
                let atb = op.apply_completion_adjoint(&d)?;
                1.0 / (0.9 * Modulus.peak(&atb))
            }
        };
        Ok(Self {
            op,
            b,
            x: vec![Complex64::new(0.0, 0.0); len],
            d,
            y: vec![Complex64::new(0.0, 0.0); len],
            mu,
            params,
            outer: 0,
            inner_total: 0,
        })
    }

    pub fn x(&self) -> &[Complex64] {
        &self.x
    }

    /// `Φ^H y`, comparable with [`super::Alm::multiplier`].
    pub fn multiplier(&self) -> Result<Vec<Complex64>> {
        self.op.apply_completion_adjoint(&self.y)
    }

    fn d_step(&mut self) -> Result<()> {
        let phi_x = self.op.apply_completion(&self.x)?;
        let n = self.b.len();
        for (i, (d, (px, y))) in self.d.iter_mut().zip(phi_x.iter().zip(&self.y)).enumerate() {
            *d = if i < n { self.b[i] } else { px - y / self.mu };
        }
        Ok(())
    }

    fn x_step(&mut self) -> Result<()> {
        let target: Vec<Complex64> = self
            .d
            .iter()
            .zip(&self.y)
            .map(|(d, y)| d + y / self.mu)
            .collect();
        self.x = self.op.apply_completion_adjoint(&target)?;
        Modulus.shrink(&mut self.x, 1.0 / self.mu);
        Ok(())
    }

    /// One outer iteration; returns the relative change of `x`.
    pub fn step(&mut self) -> Result<f64> {
        self.outer += 1;
        let prev = self.x.clone();
        let cap = match self.params.variant {
            Variant::Relaxed => 1,
            Variant::Exact => self.params.inner_max.max(1),
        };
        let mut inner = 0;
        while inner < cap {
            let before = self.x.clone();
            self.d_step()?;
            self.x_step()?;
            inner += 1;
            if cap > 1 && change(&self.x, &before) <= self.params.inner_tol {
                break;
            }
        }
        self.inner_total += inner;
        let phi_x = self.op.apply_completion(&self.x)?;
        for (y, (d, px)) in self.y.iter_mut().zip(self.d.iter().zip(&phi_x)) {
            *y += (d - px) * self.mu;
        }
        self.mu *= self.params.growth;
        if !self.mu.is_finite() || self.x.iter().any(|z| !z.is_finite()) {
            return Err(Error::NumericalFailure {
                iteration: self.outer,
            });
        }
        Ok(change(&self.x, &prev))
    }

    fn residual(&self) -> Result<f64> {
        let ax = self.op.apply_forward(&ComplexVector::new(self.x.clone())?)?;
        Ok(relative_error(&ax, self.b))
    }
}

fn change(x: &[Complex64], prev: &[Complex64]) -> f64 {
    let diff: f64 = x.iter().zip(prev).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    if diff == 0.0 {
        0.0
    } else {
        diff / norm2(x)
    }
}

/// [`super::solve`] through the explicit completion (complex shrinkage only).
pub fn solve_with_completion(instance: &SparseInstance, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let op = instance.operator.as_ref();
    let mut alm = ExpandedAlm::new(op, &instance.b, cfg.params(op.sampling_ratio()))?;
    let mut converged = false;
    let mut residual = f64::NAN;
    while !converged && alm.outer < cfg.outer_max {
        if alm.step()? < cfg.stop_tol {
            residual = alm.residual()?;
            converged = residual < cfg.stop_tol;
        }
    }
    if !converged || residual.is_nan() {
        residual = alm.residual()?;
    }
    let l1 = Modulus.objective(&alm.x);
    Ok(SolverResult {
        x_hat: ComplexVector::new(alm.x)?,
        outer_iters: alm.outer,
        total_inner_iters: alm.inner_total,
        feasibility_residual: residual,
        l1_value: l1,
        objective: Objective::ComplexL1,
        converged,
    })
}

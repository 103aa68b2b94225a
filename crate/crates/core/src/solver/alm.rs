//! The ONE-L1 augmented-Lagrangian iteration.
//!
//! The expanded problem is `min ‖x‖₁ s.t. Φx = d, Γ(d) = b` with `Φ` unitary
//! and `Γ` keeping the first n coordinates. Because `Φ` is unitary, the
//! iteration can be carried out entirely in signal coordinates by tracking
//! `u = Φ^H d` and `w = Φ^H y` instead of `d` and `y`:
//!
//! ```text
//! d-step   u ← A^H b + (I − A^H A)(x − w/μ)
//! x-step   x ← S_{1/μ}(u + w/μ)
//! dual     w ← w + μ(u − x)
//! penalty  μ ← r·μ
//! ```
//!
//! The completion rows never appear: `C^H C = I − A^H A` for the rows `C` of
//! `Φ` below `A`. The relaxed variant performs one d/x pair per outer
//! iteration; the exact variant alternates until the x-iterate settles.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use num_complex::Complex64;

use super::threshold::Shrinkage;
use super::Variant;
use crate::error::{Error, Result};
use crate::operator::SensingOperator;

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const ZERO: Self;
    fn abs2(self) -> f64;
    fn finite(self) -> bool;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;

    fn abs2(self) -> f64 {
        self * self
    }

    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);

    fn abs2(self) -> f64 {
        self.norm_sqr()
    }

    fn finite(self) -> bool {
        self.is_finite()
    }
}

/// A linear map with rows orthonormal (`A A^H = I`), given matrix-free.
pub trait LinearMap<T> {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn forward(&self, x: &[T], out: &mut [T]);
    fn adjoint(&self, v: &[T], out: &mut [T]);
}

impl LinearMap<Complex64> for SensingOperator {
    fn rows(&self) -> usize {
        SensingOperator::rows(self)
    }

    fn cols(&self) -> usize {
        SensingOperator::cols(self)
    }

    fn forward(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.forward_into(x, out)
    }

    fn adjoint(&self, v: &[Complex64], out: &mut [Complex64]) {
        self.adjoint_into(v, out)
    }
}

pub(crate) fn norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|z| z.abs2()).sum::<f64>().sqrt()
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (*p - *q).abs2())
        .sum::<f64>()
        .sqrt()
}

/// Ratio of a change to a reference norm; 0/0 counts as no change.
fn relative(change: f64, reference: f64) -> f64 {
    if change == 0.0 {
        0.0
    } else {
        change / reference
    }
}

/// Resolved iteration parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlmParams {
    pub variant: Variant,
    /// Penalty growth factor `r > 1`.
    pub growth: f64,
    /// Initial penalty; `None` picks `1/μ₀ = 0.9·peak(A^H b)`.
    pub mu0: Option<f64>,
    pub inner_max: usize,
    pub inner_tol: f64,
}

/// What one outer iteration did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub outer: usize,
    pub inner_iters: usize,
    /// `‖x_t − x_{t−1}‖ / ‖x_t‖`.
    pub relative_change: f64,
}

/// Iteration state; [`Alm::step`] runs one outer iteration.
pub struct Alm<'a, T: Scalar, L: LinearMap<T>, S: Shrinkage<T>> {
    op: &'a L,
    shrink: &'a S,
    b: &'a [T],
    x: Vec<T>,
    u: Vec<T>,
    w: Vec<T>,
    prev: Vec<T>,
    inner_prev: Vec<T>,
    scratch_n: Vec<T>,
    scratch_big: Vec<T>,
    mu: f64,
    params: AlmParams,
    outer: usize,
    inner_total: usize,
}

impl<'a, T: Scalar, L: LinearMap<T>, S: Shrinkage<T>> Alm<'a, T, L, S> {
    /// Starts from `x⁰ = 0`, `y⁰ = 0`, `d⁰ = (b, 0, …, 0)`.
    pub fn new(op: &'a L, b: &'a [T], shrink: &'a S, params: AlmParams) -> Self {
        let (n, len) = (op.rows(), op.cols());
        assert_eq!(b.len(), n, "measurement length must equal operator rows");
        let mut atb = vec![T::ZERO; len];
        op.adjoint(b, &mut atb);
        let mu = match params.mu0 {
            Some(mu) => mu,
            None => {
                let peak = shrink.peak(&atb);
                if peak > 0.0 {
                    1.0 / (0.9 * peak)
                } else {
                    1.0
                }
            }
        };
        Self {
            op,
            shrink,
            b,
            u: atb,
            x: vec![T::ZERO; len],
            w: vec![T::ZERO; len],
            prev: vec![T::ZERO; len],
            inner_prev: vec![T::ZERO; len],
            scratch_n: vec![T::ZERO; n],
            scratch_big: vec![T::ZERO; len],
            mu,
            params,
            outer: 0,
            inner_total: 0,
        }
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    /// `Φ^H y`.
    pub fn multiplier(&self) -> &[T] {
        &self.w
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn outer_iters(&self) -> usize {
        self.outer
    }

    pub fn inner_iters(&self) -> usize {
        self.inner_total
    }

    /// `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
    pub fn feasibility_residual(&mut self) -> f64 {
        self.op.forward(&self.x, &mut self.scratch_n);
        let diff = distance(&self.scratch_n, self.b);
        let nb = norm(self.b);
        if nb > 0.0 {
            diff / nb
        } else {
            diff
        }
    }

    fn d_step(&mut self) {
        let inv_mu = 1.0 / self.mu;
        // v = x − w/μ
        for ((v, x), w) in self.scratch_big.iter_mut().zip(&self.x).zip(&self.w) {
            *v = *x - *w * inv_mu;
        }
        // u = A^H b + v − A^H A v = v + A^H (b − A v)
        self.op.forward(&self.scratch_big, &mut self.scratch_n);
        for (r, b) in self.scratch_n.iter_mut().zip(self.b) {
            *r = *b - *r;
        }
        self.op.adjoint(&self.scratch_n, &mut self.u);
        for (u, v) in self.u.iter_mut().zip(&self.scratch_big) {
            *u += *v;
        }
    }

    fn x_step(&mut self) {
        let inv_mu = 1.0 / self.mu;
        for ((x, u), w) in self.x.iter_mut().zip(&self.u).zip(&self.w) {
            *x = *u + *w * inv_mu;
        }
        self.shrink.shrink(&mut self.x, inv_mu);
    }

    pub fn step(&mut self) -> Result<StepInfo> {
        self.outer += 1;
        self.prev.copy_from_slice(&self.x);
        let inner_cap = match self.params.variant {
            Variant::Relaxed => 1,
            Variant::Exact => self.params.inner_max.max(1),
        };
        let mut inner = 0;
        while inner < inner_cap {
            if inner_cap > 1 {
                self.inner_prev.copy_from_slice(&self.x);
            }
            self.d_step();
            self.x_step();
            inner += 1;
            if inner_cap > 1 {
                let change = relative(distance(&self.x, &self.inner_prev), norm(&self.x));
                if change <= self.params.inner_tol {
                    break;
                }
            }
        }
        self.inner_total += inner;
        for ((w, u), x) in self.w.iter_mut().zip(&self.u).zip(&self.x) {
            *w += (*u - *x) * self.mu;
        }
        self.mu *= self.params.growth;
        if !self.mu.is_finite() || self.x.iter().chain(&self.w).any(|z| !z.finite()) {
            return Err(Error::NumericalFailure {
                iteration: self.outer,
            });
        }
        Ok(StepInfo {
            outer: self.outer,
            inner_iters: inner,
            relative_change: relative(distance(&self.x, &self.prev), norm(&self.x)),
        })
    }

    /// Iterates until both the relative change and the feasibility residual
    /// drop below `stop_tol`, or `outer_max` iterations have run.
    pub fn run(mut self, stop_tol: f64, outer_max: usize) -> Result<AlmOutcome<T>> {
        let mut converged = false;
        let mut residual = f64::NAN;
        if norm(self.b) == 0.0 {
            converged = true;
            residual = 0.0;
        }
        while !converged && self.outer < outer_max {
            let info = self.step()?;
            if info.relative_change < stop_tol {
                residual = self.feasibility_residual();
                converged = residual < stop_tol;
            }
        }
        if !converged || residual.is_nan() {
            residual = self.feasibility_residual();
        }
        let objective = self.shrink.objective(&self.x);
        Ok(AlmOutcome {
            x: self.x,
            outer_iters: self.outer,
            inner_iters: self.inner_total,
            feasibility_residual: residual,
            objective,
            converged,
        })
    }
}

#[derive(Clone, Debug)]
pub struct AlmOutcome<T> {
    pub x: Vec<T>,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub feasibility_residual: f64,
    pub objective: f64,
    pub converged: bool,
}

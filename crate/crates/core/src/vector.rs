use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// A non-empty vector of complex amplitudes with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("complex vector must have positive length"));
        }
        if let Some(i) = entries.iter().position(|z| !z.is_finite()) {
            return Err(invalid(format!("entry {i} is not finite")));
        }
        Ok(Self(entries))
    }

    /// The all-zero vector of length `len` (`len` must be positive).
    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm1(&self) -> f64 {
        norm1(&self.0)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|z| z.norm_sqr() > 0.0).count()
    }

    pub(crate) fn expect_len(&self, expected: usize) -> Result<()> {
        if self.0.len() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.0.len(),
            })
        }
    }
}

impl Deref for ComplexVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl TryFrom<Vec<Complex64>> for ComplexVector {
    type Error = Error;

    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        Self::new(v)
    }
}

/// `u^H v`, conjugate-linear in the first argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Relative 2-norm distance `‖a − b‖ / ‖b‖`.
pub fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    diff / norm2(b)
}

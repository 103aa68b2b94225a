//! Partially orthonormal sensing operators and their unitary completions.
//!
//! An operator `A` (n × N) satisfies `AA^H = I`. Its completion `Φ` is an
//! N × N unitary whose first n rows are the rows of `A`.

use std::fmt;
use std::sync::Arc;

use faer::linalg::matmul::matmul;
use faer::{Accum, ColMut, ColRef, Mat, Par};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::vector::ComplexVector;

/// Tolerance on `‖AA^H − I‖_max` accepted as partially orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row subset of the N-point unitary DFT, `F[j, k] = exp(−2πi jk/N)/√N`.
#[derive(Clone)]
pub struct SubsampledDft {
    len: usize,
    rows: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SubsampledDft {
    pub fn new(len: usize, rows: Vec<usize>) -> Result<Self> {
        if len == 0 {
            return Err(invalid("transform length must be positive"));
        }
        if rows.is_empty() || rows.len() > len {
            return Err(invalid(format!(
                "need 1..={len} selected rows, got {}",
                rows.len()
            )));
        }
        let mut seen = vec![false; len];
        for &r in &rows {
            if r >= len || seen[r] {
                return Err(invalid(format!("row index {r} out of range or repeated")));
            }
            seen[r] = true;
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            rows,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    fn scale(&self) -> f64 {
        1.0 / (self.len as f64).sqrt()
    }

    /// Full unitary transform of `x`.
    fn transform(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        let s = self.scale();
        buf.iter_mut().for_each(|z| *z *= s);
        buf
    }

    /// Inverse unitary transform, in place.
    fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let s = self.scale();
        buf.iter_mut().for_each(|z| *z *= s);
    }

    /// Entry `(row, col)` of the selected-row matrix, computed directly.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let j = self.rows[row] as u128;
        // reduce jk mod N first so the phase stays accurate for large N
        let phase = ((j * col as u128) % self.len as u128) as f64 / self.len as f64;
        Complex64::from_polar(self.scale(), -2.0 * std::f64::consts::PI * phase)
    }
}

impl fmt::Debug for SubsampledDft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubsampledDft")
            .field("len", &self.len)
            .field("rows", &self.rows)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Representation {
    Dense(Mat<Complex64>),
    SubsampledUnitary(SubsampledDft),
}

/// Unitary N × N extension of an operator.
#[derive(Clone, Debug)]
pub enum Completion {
    /// Explicit unitary matrix.
    Dense(Mat<Complex64>),
    /// The full DFT with rows reordered; `order[i]` is the DFT row placed at
    /// position `i`. The first n entries are the selected rows.
    RowPermuted { order: Vec<usize> },
}

/// A partially orthonormal complex measurement map.
#[derive(Clone, Debug)]
pub struct SensingOperator {
    repr: Representation,
    completion: Option<Completion>,
}

impl SensingOperator {
    /// Wraps a dense matrix. Partial orthonormality is not checked here; see
    /// [`SensingOperator::orthonormality_defect`].
    pub fn dense(matrix: Mat<Complex64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() > matrix.ncols() {
            return Err(invalid(format!(
                "operator shape {}x{} needs 1 <= n <= N",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            repr: Representation::Dense(matrix),
            completion: None,
        })
    }

    /// Rows `rows` of the `len`-point unitary DFT.
    pub fn partial_dft(len: usize, rows: Vec<usize>) -> Result<Self> {
        Ok(Self {
            repr: Representation::SubsampledUnitary(SubsampledDft::new(len, rows)?),
            completion: None,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::dense(Mat::identity(n, n))
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn rows(&self) -> usize {
        match &self.repr {
            Representation::Dense(m) => m.nrows(),
            Representation::SubsampledUnitary(f) => f.rows.len(),
        }
    }

    pub fn cols(&self) -> usize {
        match &self.repr {
            Representation::Dense(m) => m.ncols(),
            Representation::SubsampledUnitary(f) => f.len,
        }
    }

    /// `δ = n/N`.
    pub fn sampling_ratio(&self) -> f64 {
        self.rows() as f64 / self.cols() as f64
    }

    pub fn apply_forward(&self, x: &ComplexVector) -> Result<ComplexVector> {
        x.expect_len(self.cols())?;
        let mut out = vec![ZERO; self.rows()];
        self.forward_into(x, &mut out);
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    pub fn apply_adjoint(&self, v: &ComplexVector) -> Result<ComplexVector> {
        v.expect_len(self.rows())?;
        let mut out = vec![ZERO; self.cols()];
        self.adjoint_into(v, &mut out);
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    /// `out = A x`. Panics on length mismatch.
    pub fn forward_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.cols());
        assert_eq!(out.len(), self.rows());
        match &self.repr {
            Representation::Dense(a) => matmul(
                ColMut::from_slice_mut(out).as_mat_mut(),
                Accum::Replace,
                a.as_ref(),
                ColRef::from_slice(x).as_mat(),
                ONE,
                Par::Seq,
            ),
            Representation::SubsampledUnitary(f) => {
                let full = f.transform(x);
                for (o, &r) in out.iter_mut().zip(&f.rows) {
                    *o = full[r];
                }
            }
        }
    }

    /// `out = A^H v`. Panics on length mismatch.
    pub fn adjoint_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.rows());
        assert_eq!(out.len(), self.cols());
        match &self.repr {
            Representation::Dense(a) => matmul(
                ColMut::from_slice_mut(out).as_mat_mut(),
                Accum::Replace,
                a.adjoint(),
                ColRef::from_slice(v).as_mat(),
                ONE,
                Par::Seq,
            ),
            Representation::SubsampledUnitary(f) => {
                out.fill(ZERO);
                for (&val, &r) in v.iter().zip(&f.rows) {
                    out[r] = val;
                }
                f.inverse_in_place(out);
            }
        }
    }

    /// Dense n × N matrix. For the subsampled DFT the entries are evaluated
    /// directly from the transform definition, not through the FFT.
    pub fn to_dense(&self) -> Mat<Complex64> {
        match &self.repr {
            Representation::Dense(a) => a.clone(),
            Representation::SubsampledUnitary(f) => {
                Mat::from_fn(f.rows.len(), f.len, |i, j| f.entry(i, j))
            }
        }
    }

    /// `‖AA^H − I‖_max`, evaluated on the dense matrix.
    pub fn orthonormality_defect(&self) -> f64 {
        let a = self.to_dense();
        gram_defect(&a)
    }

    pub fn completion(&self) -> Option<&Completion> {
        self.completion.as_ref()
    }

    /// Returns this operator together with a unitary completion `Φ`.
    ///
    /// For the subsampled DFT, `Φ` is the full DFT with the selected rows
    /// moved to the front. For dense operators, `Φ` is `A` stacked over an
    /// orthonormal basis of the orthogonal complement of its row space,
    /// taken from a full QR factorization of `A^H`.
    pub fn complete_to_unitary(mut self) -> Result<Self> {
        if self.completion.is_some() {
            return Ok(self);
        }
        let completion = match &self.repr {
            Representation::SubsampledUnitary(f) => {
                let mut selected = vec![false; f.len];
                f.rows.iter().for_each(|&r| selected[r] = true);
                let mut order = f.rows.clone();
                order.extend((0..f.len).filter(|&r| !selected[r]));
                Completion::RowPermuted { order }
            }
            Representation::Dense(a) => {
                let deviation = gram_defect(a);
                if deviation > ORTHONORMAL_TOL {
                    return Err(Error::NotOrthonormal { deviation });
                }
                let (n, len) = (a.nrows(), a.ncols());
                let q = a.adjoint().qr().compute_Q();
                let phi = Mat::from_fn(len, len, |i, j| {
                    if i < n {
                        a[(i, j)]
                    } else {
                        q[(j, i)].conj()
                    }
                });
                Completion::Dense(phi)
            }
        };
        self.completion = Some(completion);
        Ok(self)
    }

    fn require_completion(&self) -> Result<&Completion> {
        self.completion
            .as_ref()
            .ok_or_else(|| invalid("operator has no unitary completion"))
    }

    /// `Φ x`.
    pub fn apply_completion(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: x.len(),
            });
        }
        Ok(match (self.require_completion()?, &self.repr) {
            (Completion::Dense(phi), _) => dense_apply(phi.as_ref(), x),
            (Completion::RowPermuted { order }, Representation::SubsampledUnitary(f)) => {
                let full = f.transform(x);
                order.iter().map(|&r| full[r]).collect()
            }
            (Completion::RowPermuted { .. }, Representation::Dense(_)) => {
                unreachable!("row-permuted completion only exists for transforms")
            }
        })
    }

    /// `Φ^H d`.
    pub fn apply_completion_adjoint(&self, d: &[Complex64]) -> Result<Vec<Complex64>> {
        if d.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: d.len(),
            });
        }
        Ok(match (self.require_completion()?, &self.repr) {
            (Completion::Dense(phi), _) => dense_apply(phi.adjoint(), d),
            (Completion::RowPermuted { order }, Representation::SubsampledUnitary(f)) => {
                let mut buf = vec![ZERO; f.len];
                for (&val, &r) in d.iter().zip(order) {
                    buf[r] = val;
                }
                f.inverse_in_place(&mut buf);
                buf
            }
            (Completion::RowPermuted { .. }, Representation::Dense(_)) => {
                unreachable!("row-permuted completion only exists for transforms")
            }
        })
    }

    /// Dense N × N completion matrix, if a completion is present.
    pub fn completion_dense(&self) -> Option<Mat<Complex64>> {
        match (self.completion.as_ref()?, &self.repr) {
            (Completion::Dense(phi), _) => Some(phi.clone()),
            (Completion::RowPermuted { order }, Representation::SubsampledUnitary(f)) => {
                let full = SubsampledDft::new(f.len, order.clone()).ok()?;
                Some(Mat::from_fn(f.len, f.len, |i, j| full.entry(i, j)))
            }
            _ => None,
        }
    }
}

fn dense_apply<C: faer::traits::Conjugate<Canonical = Complex64>>(m: faer::MatRef<'_, C>, x: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; m.nrows()];
    matmul(
        ColMut::from_slice_mut(&mut out).as_mat_mut(),
        Accum::Replace,
        m,
        ColRef::from_slice(x).as_mat(),
        ONE,
        Par::Seq,
    );
    out
}

/// `‖M M^H − I‖_max` for a dense matrix `M`.
pub fn gram_defect(m: &Mat<Complex64>) -> f64 {
    let g = m * m.adjoint();
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

//! Real and block-sparse views of the complex system.
//!
//! `A x = b` is rewritten as `A_r x_r = b_r` with
//!
//! ```text
//! A_r = [Re A  −Im A]    x_r = [Re x]    b_r = [Re b]
//!       [Im A   Re A]          [Im x]          [Im b]
//! ```
//!
//! Interleaving `(Re xⱼ, Im xⱼ)` makes `x_r` block-sparse with block size 2,
//! and its ℓ2,1 norm is the complex ℓ1 norm of `x`.

use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::instance::SparseInstance;
use crate::operator::SensingOperator;
use crate::solver::LinearMap;
use crate::vector::ComplexVector;

/// `A_r` applied matrix-free through the complex operator.
#[derive(Clone, Debug)]
pub struct RealSystem {
    complex: Arc<SensingOperator>,
}

impl RealSystem {
    pub fn new(complex: Arc<SensingOperator>) -> Self {
        Self { complex }
    }

    pub fn complex_operator(&self) -> &SensingOperator {
        &self.complex
    }

    pub fn sampling_ratio(&self) -> f64 {
        self.complex.sampling_ratio()
    }

    /// The explicit 2n × 2N block matrix.
    pub fn to_dense(&self) -> Mat<f64> {
        real_block_matrix(&self.complex.to_dense())
    }
}

/// `[[Re A, −Im A], [Im A, Re A]]` for a dense complex `A`.
pub fn real_block_matrix(a: &Mat<Complex64>) -> Mat<f64> {
    let (n, len) = (a.nrows(), a.ncols());
    Mat::from_fn(2 * n, 2 * len, |i, j| {
        let z = a[(i % n, j % len)];
        match (i < n, j < len) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

impl LinearMap<f64> for RealSystem {
    fn rows(&self) -> usize {
        2 * self.complex.rows()
    }

    fn cols(&self) -> usize {
        2 * self.complex.cols()
    }

    fn forward(&self, x: &[f64], out: &mut [f64]) {
        let xc = stack_to_complex(x);
        let mut yc = vec![Complex64::new(0.0, 0.0); self.complex.rows()];
        self.complex.forward_into(&xc, &mut yc);
        complex_to_stack(&yc, out);
    }

    fn adjoint(&self, v: &[f64], out: &mut [f64]) {
        let vc = stack_to_complex(v);
        let mut yc = vec![Complex64::new(0.0, 0.0); self.complex.cols()];
        self.complex.adjoint_into(&vc, &mut yc);
        complex_to_stack(&yc, out);
    }
}

fn stack_to_complex(x: &[f64]) -> Vec<Complex64> {
    let half = x.len() / 2;
    x[..half]
        .iter()
        .zip(&x[half..])
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect()
}

fn complex_to_stack(z: &[Complex64], out: &mut [f64]) {
    let half = z.len();
    for (j, v) in z.iter().enumerate() {
        out[j] = v.re;
        out[half + j] = v.im;
    }
}

/// `Re x` stacked over `Im x`.
pub fn realify(x: &[Complex64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * x.len()];
    complex_to_stack(x, &mut out);
    out
}

/// Inverse of [`realify`].
pub fn complexify(x_r: &[f64]) -> Result<ComplexVector> {
    if x_r.len() % 2 != 0 {
        return Err(invalid(format!("stacked vector has odd length {}", x_r.len())));
    }
    ComplexVector::new(stack_to_complex(x_r))
}

/// Permutation `p` with `blocked[i] = x_r[p[i]]`, so that blocked entries
/// `2j, 2j+1` hold `(Re xⱼ, Im xⱼ)`.
pub fn block_permutation(len: usize) -> Vec<usize> {
    (0..len).flat_map(|j| [j, len + j]).collect()
}

#[derive(Clone, Debug)]
pub struct RealReformulation {
    pub operator: RealSystem,
    pub x_r: Vec<f64>,
    pub b_r: Vec<f64>,
    pub block_permutation: Vec<usize>,
}

impl RealReformulation {
    /// Index pairs `(Re xⱼ, Im xⱼ)` in stacked coordinates.
    pub fn block_pairs(&self) -> Vec<(usize, usize)> {
        self.block_permutation
            .chunks_exact(2)
            .map(|c| (c[0], c[1]))
            .collect()
    }
}

pub fn to_real_system(instance: &SparseInstance) -> RealReformulation {
    RealReformulation {
        operator: RealSystem::new(Arc::clone(&instance.operator)),
        x_r: realify(&instance.x_true),
        b_r: realify(&instance.b),
        block_permutation: block_permutation(instance.signal_len),
    }
}

/// `Σⱼ ‖(x_r[p[2j]], x_r[p[2j+1]])‖₂`.
pub fn l21_norm(x_r: &[f64], block_permutation: &[usize]) -> Result<f64> {
    if x_r.len() % 2 != 0 {
        return Err(invalid(format!("ℓ2,1 norm needs even length, got {}", x_r.len())));
    }
    if block_permutation.len() != x_r.len() {
        return Err(invalid("block permutation length differs from vector length"));
    }
    Ok(block_permutation
        .chunks_exact(2)
        .map(|c| x_r[c[0]].hypot(x_r[c[1]]))
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullSpaceReport {
    pub trials: usize,
    /// Set when `n = N`: the null space is trivial and nothing was tested.
    pub vacuous: bool,
    /// Largest `‖A h‖` over sampled unit null vectors `h = w + iv`.
    pub max_complex_residual: f64,
    /// Largest `‖A_r [w; v]‖`.
    pub max_direct_residual: f64,
    /// Largest `‖A_r [−v; w]‖`.
    pub max_rotated_residual: f64,
}

impl NullSpaceReport {
    pub fn max_residual(&self) -> f64 {
        self.max_complex_residual
            .max(self.max_direct_residual)
            .max(self.max_rotated_residual)
    }
}

fn dense_real_apply(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `(‖A_r [w; v]‖, ‖A_r [−v; w]‖)` for `h = w + iv`.
pub fn pairing_residuals(a_r: &Mat<f64>, h: &[Complex64]) -> (f64, f64) {
    let direct = realify(h);
    let rotated: Vec<Complex64> = h.iter().map(|z| z * Complex64::new(0.0, 1.0)).collect();
    let rotated = realify(&rotated);
    (
        euclid(&dense_real_apply(a_r, &direct)),
        euclid(&dense_real_apply(a_r, &rotated)),
    )
}

/// Samples unit vectors `h = (I − A^H A) g` from the null space of a
/// partially orthonormal `A` and checks that both `[w; v]` and its rotation
/// `[−v; w]` are annihilated by the explicit `A_r`.
pub fn null_space_structure_check(op: &SensingOperator, trials: usize, seed: u64) -> NullSpaceReport {
    let mut report = NullSpaceReport {
        trials,
        vacuous: op.rows() == op.cols(),
        max_complex_residual: 0.0,
        max_direct_residual: 0.0,
        max_rotated_residual: 0.0,
    };
    if report.vacuous {
        return report;
    }
    let a = op.to_dense();
    let a_r = real_block_matrix(&a);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (n, len) = (op.rows(), op.cols());
    for _ in 0..trials {
        let g: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let ag: Vec<Complex64> = (0..n)
            .map(|i| (0..len).map(|j| a[(i, j)] * g[j]).sum())
            .collect();
        let mut h: Vec<Complex64> = (0..len)
            .map(|j| g[j] - (0..n).map(|i| a[(i, j)].conj() * ag[i]).sum::<Complex64>())
            .collect();
        let scale = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        h.iter_mut().for_each(|z| *z /= scale);
        let ah: f64 = (0..n)
            .map(|i| (0..len).map(|j| a[(i, j)] * h[j]).sum::<Complex64>().norm_sqr())
            .sum::<f64>()
            .sqrt();
        let (direct, rotated) = pairing_residuals(&a_r, &h);
        report.max_complex_residual = report.max_complex_residual.max(ah);
        report.max_direct_residual = report.max_direct_residual.max(direct);
        report.max_rotated_residual = report.max_rotated_residual.max(rotated);
    }
    report
}

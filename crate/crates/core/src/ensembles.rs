//! Random sensing ensembles, row orthonormalization and instance generation.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::SparseInstance;
use crate::operator::SensingOperator;
use crate::rng::{generator, redraw_seed, splitmix64};
use crate::vector::ComplexVector;

/// Smallest accepted `|R_ii| / max |R_jj|` before a draw counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Redraw budget for degenerate matrices inside [`make_instance`].
pub const MAX_REDRAWS: u32 = 16;

const SIGNAL_STREAM: u64 = 0x5349_474E_414C_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EnsembleKind {
    #[serde(rename = "fourier")]
    PartialFourier,
    #[serde(rename = "gaussian")]
    ComplexGaussian,
    #[serde(rename = "bernoulli")]
    ComplexBernoulli,
    #[serde(rename = "ternary")]
    ComplexTernary,
    /// Real Gaussian matrix with complex signals (jointly sparse / MMV case).
    #[serde(rename = "real-gaussian")]
    RealGaussian,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 5] = [
        EnsembleKind::PartialFourier,
        EnsembleKind::ComplexGaussian,
        EnsembleKind::ComplexBernoulli,
        EnsembleKind::ComplexTernary,
        EnsembleKind::RealGaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::PartialFourier => "fourier",
            EnsembleKind::ComplexGaussian => "gaussian",
            EnsembleKind::ComplexBernoulli => "bernoulli",
            EnsembleKind::ComplexTernary => "ternary",
            EnsembleKind::RealGaussian => "real-gaussian",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown ensemble '{s}'")))
    }
}

/// Distribution of the nonzero signal coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalModel {
    /// Standard circular complex Gaussian, `E|x_j|² = 1`.
    #[default]
    CircularGaussian,
    /// `|x_j| = 1` with uniform phase.
    UnitModulus,
    /// Real part standard Gaussian, imaginary part equal to it.
    EqualRealImag,
}

impl SignalModel {
    pub const ALL: [SignalModel; 3] = [
        SignalModel::CircularGaussian,
        SignalModel::UnitModulus,
        SignalModel::EqualRealImag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SignalModel::CircularGaussian => "circular-gaussian",
            SignalModel::UnitModulus => "unit-modulus",
            SignalModel::EqualRealImag => "equal-real-imag",
        }
    }
}

impl FromStr for SignalModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown signal model '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub signal_model: SignalModel,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind) -> Self {
        Self {
            kind,
            signal_model: SignalModel::default(),
        }
    }

    pub fn with_signal(mut self, signal_model: SignalModel) -> Self {
        self.signal_model = signal_model;
        self
    }
}

/// A freshly drawn measurement matrix, before orthonormalization.
#[derive(Clone, Debug)]
pub enum RawMatrix {
    Dense(Mat<Complex64>),
    /// Already partially orthonormal (subsampled unitary transform).
    Orthonormal(SensingOperator),
}

/// Draws an n × N matrix from `kind`.
pub fn draw_matrix(kind: EnsembleKind, n: usize, len: usize, seed: u64) -> Result<RawMatrix> {
    if n == 0 || n > len {
        return Err(invalid(format!("need 1 <= n <= N, got n={n}, N={len}")));
    }
    let mut rng = generator(seed);
    if kind == EnsembleKind::PartialFourier {
        let mut rows = index::sample(&mut rng, len, n).into_vec();
        rows.sort_unstable();
        return Ok(RawMatrix::Orthonormal(SensingOperator::partial_dft(len, rows)?));
    }
    let part = |rng: &mut rand_chacha::ChaCha20Rng| -> f64 {
        match kind {
            EnsembleKind::ComplexGaussian | EnsembleKind::RealGaussian => {
                rng.sample(StandardNormal)
            }
            EnsembleKind::ComplexBernoulli => f64::from(rng.random_range(0..2u8)),
            EnsembleKind::ComplexTernary => f64::from(rng.random_range(0..3u8)) - 1.0,
            EnsembleKind::PartialFourier => unreachable!(),
        }
    };
    let mut a = Mat::<Complex64>::zeros(n, len);
    for i in 0..n {
        for j in 0..len {
            let re = part(&mut rng);
            let im = if kind == EnsembleKind::RealGaussian {
                0.0
            } else {
                part(&mut rng)
            };
            a[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(RawMatrix::Dense(a))
}

/// Factors `A^H = Q R` with `R` carrying a positive real diagonal and returns
/// `(Q, R)`. Fails when `A` is numerically rank deficient.
fn row_space_factor(a: &Mat<Complex64>) -> Result<(Mat<Complex64>, Mat<Complex64>)> {
    let n = a.nrows();
    let qr = a.adjoint().qr();
    let mut q = qr.compute_thin_Q();
    let r_ref = qr.thin_R();
    let mut r = Mat::from_fn(n, n, |i, j| r_ref[(i, j)]);
    let largest = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    let smallest = (0..n).map(|i| r[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if largest == 0.0 || smallest < RANK_TOL * largest {
        return Err(Error::DegenerateEnsemble(format!(
            "row space is rank deficient (min/max diagonal ratio {:e})",
            if largest == 0.0 { 0.0 } else { smallest / largest }
        )));
    }
    for i in 0..n {
        let phase = r[(i, i)] / r[(i, i)].norm();
        for row in 0..q.nrows() {
            q[(row, i)] *= phase;
        }
        let conj = phase.conj();
        for col in i..n {
            r[(i, col)] *= conj;
        }
    }
    Ok((q, r))
}

/// Left-multiplies `A x = b` by the invertible `R^{-H}` from `A^H = QR`,
/// giving `Ã = Q^H` with orthonormal rows and `b̃ = R^{-H} b`.
pub fn orthonormalize(a: &Mat<Complex64>, b: &ComplexVector) -> Result<(SensingOperator, ComplexVector)> {
    b.expect_len(a.nrows())?;
    let (q, r) = row_space_factor(a)?;
    let n = a.nrows();
    // forward substitution with the lower-triangular R^H
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = b[i];
        for (j, yj) in y.iter().enumerate().take(i) {
            acc -= r[(j, i)].conj() * yj;
        }
        y[i] = acc / r[(i, i)].conj();
    }
    let op = SensingOperator::dense(q.adjoint().to_owned())?;
    Ok((op, ComplexVector::new(y)?))
}

/// Draws a k-sparse length-N signal with a uniformly random support.
pub fn draw_signal(model: SignalModel, len: usize, k: usize, seed: u64) -> Result<ComplexVector> {
    if k < 1 || k > len {
        return Err(invalid(format!("need 1 <= k <= N, got k={k}, N={len}")));
    }
    let mut rng = generator(seed);
    let support = index::sample(&mut rng, len, k).into_vec();
    let mut x = vec![Complex64::new(0.0, 0.0); len];
    for j in support {
        x[j] = loop {
            let z = match model {
                SignalModel::CircularGaussian => {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                }
                SignalModel::UnitModulus => {
                    let theta = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(1.0, theta)
                }
                SignalModel::EqualRealImag => {
                    let re: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, re)
                }
            };
            // an exact zero would shrink the support
            if z.norm_sqr() > 0.0 {
                break z;
            }
        };
    }
    ComplexVector::new(x)
}

/// `⌈x⌉`, ignoring floating-point excess below `1e-9` relative
/// (so that `0.3 · 1000` gives 300, not 301).
fn ceil_ratio(x: f64) -> usize {
    (x - 1e-9 * x.abs().max(1.0)).ceil().max(0.0) as usize
}

/// `(n, k) = (⌈δN⌉, ⌈ρn⌉)`.
pub fn dimensions(len: usize, delta: f64, rho: f64) -> Result<(usize, usize)> {
    if len == 0 {
        return Err(invalid("signal length must be positive"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    let n = ceil_ratio(delta * len as f64).clamp(1, len);
    let k = ceil_ratio(rho * n as f64).clamp(1, n);
    Ok((n, k))
}

/// Draws a complete instance; a pure function of its arguments.
pub fn make_instance(
    spec: EnsembleSpec,
    len: usize,
    delta: f64,
    rho: f64,
    seed: u64,
) -> Result<SparseInstance> {
    let (n, k) = dimensions(len, delta, rho)?;
    let x_true = draw_signal(spec.signal_model, len, k, splitmix64(seed ^ SIGNAL_STREAM))?;
    let mut attempt = 0;
    let operator = loop {
        let raw = draw_matrix(spec.kind, n, len, redraw_seed(seed, attempt))?;
        let drawn = match raw {
            RawMatrix::Orthonormal(op) => Ok(op),
            RawMatrix::Dense(a) => row_space_factor(&a)
                .and_then(|(q, _)| SensingOperator::dense(q.adjoint().to_owned())),
        };
        match drawn {
            Ok(op) => break op,
            Err(Error::DegenerateEnsemble(reason)) if attempt + 1 < MAX_REDRAWS => {
                log::warn!("seed {seed}: redrawing {} matrix ({reason})", spec.kind);
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let b = operator.apply_forward(&x_true)?;
    Ok(SparseInstance::new(spec, operator, x_true, b, k, seed))
}

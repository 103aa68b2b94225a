use num_complex::Complex64;

/// Complex soft thresholding `sgn(w)·(|w| − ε)^+`, the minimizer of
/// `ε|v| + ½|w − v|²` over complex `v`.
#[inline]
pub fn soft_threshold(w: Complex64, eps: f64) -> Complex64 {
    let m = w.norm();
    if m <= eps {
        Complex64::new(0.0, 0.0)
    } else {
        w * ((m - eps) / m)
    }
}

/// Real soft thresholding.
#[inline]
pub fn soft_threshold_real(w: f64, eps: f64) -> f64 {
    let m = w.abs();
    if m <= eps {
        0.0
    } else {
        w * ((m - eps) / m)
    }
}

/// Group shrinkage of a 2-block, `u·(1 − ε/‖u‖₂)^+`.
///
/// Bit-for-bit equal to [`soft_threshold`] under `(re, im) ↔ re + i·im`.
#[inline]
pub fn block_soft_threshold(u: [f64; 2], eps: f64) -> [f64; 2] {
    let m = u[0].hypot(u[1]);
    if m <= eps {
        [0.0, 0.0]
    } else {
        let s = (m - eps) / m;
        [u[0] * s, u[1] * s]
    }
}

/// A separable proximal map used for the x-update.
pub trait Shrinkage<T> {
    fn shrink(&self, v: &mut [T], eps: f64);
    /// Largest magnitude seen by the rule (modulus, component or block norm).
    fn peak(&self, v: &[T]) -> f64;
    /// The norm this rule is the proximal map of.
    fn objective(&self, v: &[T]) -> f64;
}

/// Shrinks each complex entry by its modulus; prox of `‖x‖₁` on `C^N`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Modulus;

impl Shrinkage<Complex64> for Modulus {
    fn shrink(&self, v: &mut [Complex64], eps: f64) {
        v.iter_mut().for_each(|z| *z = soft_threshold(*z, eps));
    }

    fn peak(&self, v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn objective(&self, v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm()).sum()
    }
}

/// Shrinks every real coordinate independently. On complex vectors it acts on
/// real and imaginary parts separately, i.e. it is the prox of `‖x_r‖₁`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Componentwise;

impl Shrinkage<f64> for Componentwise {
    fn shrink(&self, v: &mut [f64], eps: f64) {
        v.iter_mut().for_each(|z| *z = soft_threshold_real(*z, eps));
    }

    fn peak(&self, v: &[f64]) -> f64 {
        v.iter().map(|z| z.abs()).fold(0.0, f64::max)
    }

    fn objective(&self, v: &[f64]) -> f64 {
        v.iter().map(|z| z.abs()).sum()
    }
}

impl Shrinkage<Complex64> for Componentwise {
    fn shrink(&self, v: &mut [Complex64], eps: f64) {
        v.iter_mut().for_each(|z| {
            *z = Complex64::new(soft_threshold_real(z.re, eps), soft_threshold_real(z.im, eps))
        });
    }

    fn peak(&self, v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max)
    }

    fn objective(&self, v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.re.abs() + z.im.abs()).sum()
    }
}

/// Group shrinkage over disjoint index pairs of a real vector; prox of the
/// ℓ2,1 norm with block size 2.
#[derive(Clone, Copy, Debug)]
pub struct PairedBlocks<'a> {
    pairs: &'a [(usize, usize)],
}

impl<'a> PairedBlocks<'a> {
    pub fn new(pairs: &'a [(usize, usize)]) -> Self {
        Self { pairs }
    }
}

impl Shrinkage<f64> for PairedBlocks<'_> {
    fn shrink(&self, v: &mut [f64], eps: f64) {
        for &(p, q) in self.pairs {
            let [a, b] = block_soft_threshold([v[p], v[q]], eps);
            v[p] = a;
            v[q] = b;
        }
    }

    fn peak(&self, v: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|&(p, q)| v[p].hypot(v[q]))
            .fold(0.0, f64::max)
    }

    fn objective(&self, v: &[f64]) -> f64 {
        self.pairs.iter().map(|&(p, q)| v[p].hypot(v[q])).sum()
    }
}

//! Asymptotic ℓ1 phase transitions from the state-evolution minimax formula
//!
//! ```text
//! ρ(δ) = max_{z ≥ 0} [1 − ψ(z)/δ] / [1 + z² − ψ(z)],   ψ(z) = E[(|g| − z)⁺]²
//! ```
//!
//! with `g` a standard real Gaussian for the real curve and a standard
//! circular complex Gaussian (`E|g|² = 1`) for the complex curve.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    RealL1,
    ComplexL1,
}

impl CurveKind {
    pub const ALL: [CurveKind; 2] = [CurveKind::RealL1, CurveKind::ComplexL1];

    pub fn name(self) -> &'static str {
        match self {
            CurveKind::RealL1 => "real-l1",
            CurveKind::ComplexL1 => "complex-l1",
        }
    }

    pub fn psi(self, z: f64) -> f64 {
        match self {
            CurveKind::RealL1 => psi_real(z),
            CurveKind::ComplexL1 => psi_complex(z),
        }
    }

    /// Evaluates the curve at `delta` (a fresh maximization, not the table).
    pub fn transition(self, delta: f64) -> Result<f64> {
        check_delta(delta)?;
        Ok(maximize(delta, |z| self.psi(z)))
    }
}

impl std::fmt::Display for CurveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CurveKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        CurveKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown curve kind {s:?} (expected real-l1 or complex-l1)")))
    }
}

/// `E[(|G| − z)⁺]²` for `G ~ N(0, 1)`: `2[(1 + z²)Φ(−z) − zφ(z)]`.
pub fn psi_real(z: f64) -> f64 {
    let tail = 0.5 * erfc(z / SQRT_2);
    let density = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    2.0 * ((1.0 + z * z) * tail - z * density)
}

/// `E[(|g| − z)⁺]²` for a circular complex Gaussian, integrating against the
/// modulus density `2r·e^{−r²}` on `[z, z + 12]`. Beyond the cutoff the
/// integrand is below `e^{−144}`. The range is split into 48 panels before
/// adapting so the mass near `z` is never skipped.
pub fn psi_complex(z: f64) -> f64 {
    const PANELS: usize = 48;
    let f = |r: f64| (r - z) * (r - z) * 2.0 * r * (-r * r).exp();
    let h = 12.0 / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let a = z + i as f64 * h;
            adaptive_simpson(f, a, a + h, 1e-12 / PANELS as f64)
        })
        .sum()
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("delta must lie in (0, 1), got {delta}")))
    }
}

fn ratio(delta: f64, z: f64, psi: f64) -> f64 {
    (1.0 - psi / delta) / (1.0 + z * z - psi)
}

/// Coarse scan of `z ∈ (0, 8]` in steps of 0.01, then golden-section
/// refinement on the bracketing cell pair. `z = 0` is excluded: both
/// numerator and denominator vanish there for the complex ψ.
fn maximize(delta: f64, psi: impl Fn(f64) -> f64) -> f64 {
    const STEP: f64 = 0.01;
    let objective = |z: f64| ratio(delta, z, psi(z));
    let mut best = (1usize, objective(STEP));
    for i in 2..=800 {
        let v = objective(i as f64 * STEP);
        if v > best.1 {
            best = (i, v);
        }
    }
    let lo = (best.0 - 1) as f64 * STEP;
    let hi = (best.0 + 1) as f64 * STEP;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(d);
        }
    }
    objective(0.5 * (a + b)).max(best.1)
}

/// Asymptotic transition of real ℓ1 minimization.
pub fn real_transition(delta: f64) -> Result<f64> {
    CurveKind::RealL1.transition(delta)
}

/// Asymptotic transition of complex ℓ1 minimization (block size two).
pub fn complex_transition(delta: f64) -> Result<f64> {
    CurveKind::ComplexL1.transition(delta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionCurve {
    pub kind: CurveKind,
    /// `(delta, rho)` with strictly increasing `delta`.
    pub samples: Vec<(f64, f64)>,
}

impl TransitionCurve {
    pub fn sample(kind: CurveKind, deltas: &[f64]) -> Result<Self> {
        if deltas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("curve deltas must be strictly increasing"));
        }
        let samples = deltas
            .iter()
            .map(|&d| kind.transition(d).map(|r| (d, r)))
            .collect::<Result<_>>()?;
        Ok(Self { kind, samples })
    }

    /// The shared table at 0.01 δ-resolution, computed on first use.
    pub fn cached(kind: CurveKind) -> &'static TransitionCurve {
        static REAL: OnceLock<TransitionCurve> = OnceLock::new();
        static COMPLEX: OnceLock<TransitionCurve> = OnceLock::new();
        let cell = match kind {
            CurveKind::RealL1 => &REAL,
            CurveKind::ComplexL1 => &COMPLEX,
        };
        cell.get_or_init(|| {
            let deltas: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
            TransitionCurve::sample(kind, &deltas).expect("table deltas lie in (0, 1)")
        })
    }

    /// Linear interpolation between samples; clamps outside the sampled range.
    pub fn interpolate(&self, delta: f64) -> f64 {
        let s = &self.samples;
        match s.iter().position(|&(d, _)| d >= delta) {
            None => s.last().map_or(f64::NAN, |p| p.1),
            Some(0) => s[0].1,
            Some(i) => {
                let ((d0, r0), (d1, r1)) = (s[i - 1], s[i]);
                r0 + (r1 - r0) * (delta - d0) / (d1 - d0)
            }
        }
    }
}

/// Writes curves as CSV with columns `delta,rho,kind`.
pub fn write_curves_csv<W: Write>(out: W, curves: &[TransitionCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta", "rho", "kind"])?;
    for curve in curves {
        for &(d, r) in &curve.samples {
            w.write_record([format!("{d}"), format!("{r}"), curve.kind.name().to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

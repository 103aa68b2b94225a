//! Logistic fits of success probability against ρ over the cells of one δ.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::classify::TrialStatus;
use super::records::TrialRecord;
use crate::error::{Error, Result};

const MAX_ITERS: usize = 100;
const COEF_TOL: f64 = 1e-8;

/// What to do with runs that did not yield an answer about BP itself
/// (solver failures and indeterminate runs).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureMode {
    #[default]
    CountAsFailure,
    Exclude,
}

/// Successes out of trials at one ρ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinomialCell {
    pub rho: f64,
    pub successes: usize,
    pub trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_se: f64,
    pub slope_se: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionEstimate {
    pub delta: f64,
    pub rho50: f64,
    /// `−∞` when separated.
    pub slope: f64,
    /// `+∞` when separated.
    pub intercept: f64,
    pub n_cells: usize,
    pub separated: bool,
}

impl TransitionEstimate {
    /// `ρ₁₀ − ρ₉₀ = 2 ln 9 / |slope|`; zero for separated data.
    pub fn width(&self) -> f64 {
        if self.separated {
            0.0
        } else {
            2.0 * 9f64.ln() / self.slope.abs()
        }
    }
}

fn estimation(msg: impl Into<String>) -> Error {
    Error::Estimation(msg.into())
}

/// Collapses the records of one δ into per-ρ counts, sorted by ρ.
pub fn cells_from_records(records: &[TrialRecord], mode: FailureMode) -> Result<(f64, Vec<BinomialCell>)> {
    let delta = records.first().ok_or_else(|| estimation("no records"))?.delta;
    if records.iter().any(|r| r.delta != delta) {
        return Err(estimation("records span more than one delta"));
    }
    let mut cells: Vec<BinomialCell> = Vec::new();
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    for r in sorted {
        let counted = match r.status {
            TrialStatus::Success | TrialStatus::RecoveryFailure => true,
            TrialStatus::SolverFailure | TrialStatus::Indeterminate => mode == FailureMode::CountAsFailure,
        };
        if !counted {
            continue;
        }
        let success = usize::from(r.status == TrialStatus::Success);
        match cells.last_mut() {
            Some(c) if c.rho == r.rho => {
                c.trials += 1;
                c.successes += success;
            }
            _ => cells.push(BinomialCell { rho: r.rho, successes: success, trials: 1 }),
        }
    }
    Ok((delta, cells))
}

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. ρ is centered internally for conditioning.
pub fn fit_logistic(cells: &[BinomialCell]) -> Result<LogisticFit> {
    let total: f64 = cells.iter().map(|c| c.trials as f64).sum();
    let center = cells.iter().map(|c| c.rho * c.trials as f64).sum::<f64>() / total;
    // Start from the least-squares line through the smoothed empirical logits.
    let (mut b0, mut b1) = {
        let pts: Vec<(f64, f64, f64)> = cells
            .iter()
            .map(|c| {
                let s = c.successes as f64 + 0.5;
                let f = (c.trials - c.successes) as f64 + 0.5;
                (c.rho - center, (s / f).ln(), c.trials as f64)
            })
            .collect();
        weighted_line(&pts).ok_or_else(|| estimation("need at least two distinct rho values"))?
    };
    for iter in 1..=MAX_ITERS {
        let (mut s00, mut s01, mut s11, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for c in cells {
            let x = c.rho - center;
            let p = logistic(b0 + b1 * x);
            let m = c.trials as f64;
            let w = m * p * (1.0 - p);
            let resid = c.successes as f64 - m * p;
            s00 += w;
            s01 += w * x;
            s11 += w * x * x;
            g0 += resid;
            g1 += resid * x;
        }
        let det = s00 * s11 - s01 * s01;
        if !(det > 0.0) || !det.is_finite() {
            return Err(estimation("information matrix is singular"));
        }
        let d0 = (s11 * g0 - s01 * g1) / det;
        let d1 = (s00 * g1 - s01 * g0) / det;
        b0 += d0;
        b1 += d1;
        if !b0.is_finite() || !b1.is_finite() {
            return Err(estimation("logistic fit diverged"));
        }
        if d0.abs().max(d1.abs()) <= COEF_TOL * (1.0 + b0.abs().max(b1.abs())) {
            // Undo the centering: intercept = b0 − b1·center.
            let [v00, v01, v11] = inverse_information(cells, center, b0, b1)?;
            let intercept_var = v00 - 2.0 * center * v01 + center * center * v11;
            return Ok(LogisticFit {
                intercept: b0 - b1 * center,
                slope: b1,
                intercept_se: intercept_var.max(0.0).sqrt(),
                slope_se: v11.sqrt(),
                iterations: iter,
            });
        }
    }
    Err(estimation(format!("logistic fit did not converge in {MAX_ITERS} iterations")))
}

fn inverse_information(cells: &[BinomialCell], center: f64, b0: f64, b1: f64) -> Result<[f64; 3]> {
    let (mut s00, mut s01, mut s11) = (0.0, 0.0, 0.0);
    for c in cells {
        let x = c.rho - center;
        let p = logistic(b0 + b1 * x);
        let w = c.trials as f64 * p * (1.0 - p);
        s00 += w;
        s01 += w * x;
        s11 += w * x * x;
    }
    let det = s00 * s11 - s01 * s01;
    if !(det > 0.0) {
        return Err(estimation("information matrix is singular"));
    }
    Ok([s11 / det, -s01 / det, s00 / det])
}

fn weighted_line(pts: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let w: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / w;
    let my = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / w;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// If successes are all-or-nothing on either side of a cut (allowing one
/// mixed cell at the cut), returns the separating ρ: the midpoint of the
/// bracketing pair, or the mixed cell's ρ.
fn separation_point(cells: &[BinomialCell]) -> Option<f64> {
    let full = |c: &BinomialCell| c.successes == c.trials;
    let none = |c: &BinomialCell| c.successes == 0;
    let lead = cells.iter().take_while(|c| full(c)).count();
    let rest = &cells[lead..];
    let (mixed, tail) = match rest.first() {
        Some(c) if !full(c) && !none(c) => (Some(c.rho), &rest[1..]),
        _ => (None, rest),
    };
    if !tail.iter().all(none) {
        return None;
    }
    match mixed {
        Some(rho) => Some(rho),
        None => Some(0.5 * (cells[lead - 1].rho + cells[lead].rho)),
    }
}

/// Fits per-ρ counts; `delta` is carried into the estimate.
pub fn fit_cells(delta: f64, cells: &[BinomialCell]) -> Result<TransitionEstimate> {
    let distinct = cells.len();
    if distinct < 2 {
        return Err(estimation("need at least two distinct rho values"));
    }
    let successes: usize = cells.iter().map(|c| c.successes).sum();
    let trials: usize = cells.iter().map(|c| c.trials).sum();
    if successes == 0 {
        return Err(estimation("every trial failed; widen the rho grid downward"));
    }
    if successes == trials {
        return Err(estimation("every trial succeeded; widen the rho grid upward"));
    }
    if let Some(rho50) = separation_point(cells) {
        return Ok(TransitionEstimate {
            delta,
            rho50,
            slope: f64::NEG_INFINITY,
            intercept: f64::INFINITY,
            n_cells: distinct,
            separated: true,
        });
    }
    let fit = fit_logistic(cells)?;
    if !(fit.slope < 0.0) {
        return Err(estimation("success rate does not decrease with rho (no transition crossing)"));
    }
    let rho50 = -fit.intercept / fit.slope;
    let (lo, hi) = (cells[0].rho, cells[distinct - 1].rho);
    if rho50 < lo - 0.05 || rho50 > hi + 0.05 {
        return Err(estimation(format!(
            "fitted transition {rho50} lies outside the sampled range [{lo}, {hi}]"
        )));
    }
    Ok(TransitionEstimate {
        delta,
        rho50,
        slope: fit.slope,
        intercept: fit.intercept,
        n_cells: distinct,
        separated: false,
    })
}

/// Logistic transition estimate from the records of one δ.
pub fn fit_transition(records: &[TrialRecord], mode: FailureMode) -> Result<TransitionEstimate> {
    let (delta, cells) = cells_from_records(records, mode)?;
    fit_cells(delta, &cells)
}

/// `ρ₁₀ − ρ₉₀` of the fitted logistic.
pub fn transition_width(records: &[TrialRecord], mode: FailureMode) -> Result<f64> {
    fit_transition(records, mode).map(|e| e.width())
}

/// One row of the transitions CSV; `reason` is set (and the fit fields left
/// blank) when a group could not be fitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub ensemble: String,
    #[serde(rename = "N")]
    pub signal_len: usize,
    pub delta: f64,
    pub rho50: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub separated: Option<bool>,
    pub n_cells: usize,
    #[serde(default)]
    pub reason: String,
}

pub const TRANSITION_COLUMNS: [&str; 9] =
    ["ensemble", "N", "delta", "rho50", "slope", "intercept", "separated", "n_cells", "reason"];

/// Groups records by (ensemble, N, δ) in canonical order and fits each.
pub fn fit_all(records: &[TrialRecord], mode: FailureMode) -> Vec<TransitionRow> {
    let mut sorted = records.to_vec();
    super::records::sort_canonical(&mut sorted);
    let mut rows = Vec::new();
    for group in sorted.chunk_by(|a, b| a.ensemble == b.ensemble && a.signal_len == b.signal_len && a.delta == b.delta) {
        let head = &group[0];
        let n_cells = {
            let mut rhos: Vec<u64> = group.iter().map(|r| r.rho.to_bits()).collect();
            rhos.dedup();
            rhos.len()
        };
        let row = match fit_transition(group, mode) {
            Ok(e) => TransitionRow {
                ensemble: head.ensemble.clone(),
                signal_len: head.signal_len,
                delta: head.delta,
                rho50: Some(e.rho50),
                slope: Some(e.slope),
                intercept: Some(e.intercept),
                separated: Some(e.separated),
                n_cells: e.n_cells,
                reason: String::new(),
            },
            Err(err) => TransitionRow {
                ensemble: head.ensemble.clone(),
                signal_len: head.signal_len,
                delta: head.delta,
                rho50: None,
                slope: None,
                intercept: None,
                separated: None,
                n_cells,
                reason: err.to_string(),
            },
        };
        rows.push(row);
    }
    rows
}

pub fn write_transitions<W: Write>(out: W, rows: &[TransitionRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRANSITION_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a transitions CSV (the `reason` column may be absent).
pub fn read_transitions<R: std::io::Read>(input: R) -> Result<Vec<TransitionRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                return Err(Error::Malformed { row: line, reason: e.to_string() });
            }
        }
    }
    Ok(rows)
}

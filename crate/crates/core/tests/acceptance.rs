//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p phaselab --test acceptance`. Set
//! `PHASELAB_ACCEPT=1,3,7` to run a subset. The process exits non-zero only
//! when a criterion panics; a FAIL line is a measured outcome, not a crash.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use phaselab::bridge::{block_permutation, l21_norm, null_space_structure_check, realify, RealSystem};
use phaselab::experiment::glm::{fit_cells, BinomialCell};
use phaselab::experiment::{
    classify, fit_transition, run_grid, CsvSink, FailureMode, MemorySink, PhaseGrid, Preset, PresetScale, RunOptions,
    RunSpec, SolveMode, TrialRecord, TrialStatus, TrialsHeader,
};
use phaselab::solver::threshold::soft_threshold;
use phaselab::{
    complex_transition, make_instance, real_transition, solve, solve_indirect, EnsembleKind, EnsembleSpec,
    SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within_budget(elapsed: Duration, budget_s: u64) -> bool {
    elapsed <= Duration::from_secs(budget_s)
}

fn cgauss(rng: &mut ChaCha20Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

// 1. The complex soft threshold minimizes eps·|v| + ½|w − v|².
fn prox_oracle() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(0xA11CE);
    let objective = |w: Complex64, eps: f64, v: Complex64| eps * v.norm() + 0.5 * (w - v).norm_sqr();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_phase = 0.0f64;
    for _ in 0..10_000 {
        let w = cgauss(&mut rng) * rng.random_range(0.01..10.0);
        let eps = rng.random_range(0.0..5.0);
        let s = soft_threshold(w, eps);
        let best = objective(w, eps, s);
        for j in 0..1000 {
            let scale = 10f64.powi(-(j % 8));
            let v = s + cgauss(&mut rng) * scale;
            worst_gap = worst_gap.max(best - objective(w, eps, v));
        }
        let rot = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let dev = (soft_threshold(rot * w, eps) - rot * s).norm();
        worst_phase = worst_phase.max(dev / w.norm().max(1.0));
    }
    // Rounding in the objective itself is ~1e-15 of its magnitude.
    let pass = worst_gap <= 1e-12 && worst_phase <= 1e-12;
    outcome(pass, format!("max(objective(S) - objective(candidate)) = {worst_gap:.2e}, phase deviation = {worst_phase:.2e}"))
}

/// Complex BP as a second-order cone program over (Re x, Im x, t).
fn socp_l1(a: &faer::Mat<Complex64>, b: &[Complex64]) -> Option<f64> {
    let (n, len) = (a.nrows(), a.ncols());
    let vars = 3 * len;
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    let mut rhs = Vec::new();
    for i in 0..n {
        for j in 0..len {
            let z = a[(i, j)];
            // Re(Ax)_i = Σ Re a·Re x − Im a·Im x ; Im(Ax)_i = Σ Im a·Re x + Re a·Im x
            for (r, re_coef, im_coef) in [(i, z.re, -z.im), (n + i, z.im, z.re)] {
                rows.extend([r, r]);
                cols.extend([j, len + j]);
                vals.extend([re_coef, im_coef]);
            }
        }
    }
    rhs.extend(b.iter().map(|z| z.re));
    rhs.extend(b.iter().map(|z| z.im));
    let mut cones = vec![SupportedConeT::ZeroConeT(2 * n)];
    for j in 0..len {
        let base = 2 * n + 3 * j;
        for (off, var) in [(0, 2 * len + j), (1, j), (2, len + j)] {
            rows.push(base + off);
            cols.push(var);
            vals.push(-1.0);
        }
        rhs.extend([0.0; 3]);
        cones.push(SupportedConeT::SecondOrderConeT(3));
    }
    let a_mat = CscMatrix::new_from_triplets(2 * n + 3 * len, vars, rows, cols, vals);
    let p = CscMatrix::zeros((vars, vars));
    let mut q = vec![0.0; vars];
    q[2 * len..].iter_mut().for_each(|c| *c = 1.0);
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-12)
        .tol_gap_rel(1e-12)
        .tol_feas(1e-12)
        .max_iter(500)
        .build()
        .ok()?;
    let mut solver = DefaultSolver::new(&p, &q, &a_mat, &rhs, &cones, settings).ok()?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => Some(solver.solution.obj_val),
        _ => None,
    }
}

// 2. The exact iteration reaches the convex optimum.
fn convex_oracle() -> Outcome {
    let kinds = [EnsembleKind::ComplexGaussian, EnsembleKind::PartialFourier, EnsembleKind::ComplexBernoulli];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..25u64 {
        let kind = kinds[i as usize % kinds.len()];
        let len = [8, 12, 16][i as usize % 3];
        let rho = [0.2, 0.5, 0.8][(i as usize / 3) % 3];
        let inst = make_instance(EnsembleSpec::new(kind), len, 0.5, rho, 500 + i).unwrap();
        let ours = solve(&inst, &SolverConfig::exact()).unwrap().l1_value;
        match socp_l1(&inst.operator.to_dense(), &inst.b) {
            Some(reference) => {
                let rel = (ours - reference).abs() / reference;
                worst = worst.max(rel);
                if rel > 1e-6 {
                    failures.push(format!("#{i} {kind} N={len} rel={rel:.1e}"));
                }
            }
            None => failures.push(format!("#{i}: oracle did not solve")),
        }
    }
    outcome(failures.is_empty(), format!("max relative l1 gap {worst:.2e} over 25 instances {failures:?}"))
}

// 3. Deep success phase.
fn deep_phase() -> Outcome {
    let mut report = Vec::new();
    let mut pass = true;
    for cfg in [SolverConfig::exact(), SolverConfig::relaxed()] {
        let mut ok = 0;
        let mut worst = 0.0f64;
        for seed in 0..20 {
            let inst = make_instance(EnsembleSpec::new(EnsembleKind::PartialFourier), 256, 0.5, 0.2, seed).unwrap();
            let r = solve(&inst, &cfg).unwrap();
            worst = worst.max(phaselab::vector::relative_error(&r.x_hat, &inst.x_true));
            ok += usize::from(classify(&r, &inst.x_true).unwrap() == TrialStatus::Success);
        }
        pass &= ok == 20;
        report.push(format!("{:?}: {ok}/20 (max RRMSE {worst:.1e})", cfg.variant));
    }
    outcome(pass, report.join(", "))
}

// 4. Complex vs indirect on identical instances just below the complex curve.
fn ordering() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for cfg in [SolverConfig::relaxed(), SolverConfig::exact()] {
        let (mut direct, mut indirect) = (0, 0);
        for seed in 0..20 {
            let inst = make_instance(EnsembleSpec::new(EnsembleKind::PartialFourier), 1024, 0.5, 0.45, 4000 + seed).unwrap();
            let a = solve(&inst, &cfg).unwrap();
            let b = solve_indirect(&inst, &cfg).unwrap();
            direct += usize::from(classify(&a, &inst.x_true).unwrap() == TrialStatus::Success);
            indirect += usize::from(classify(&b, &inst.x_true).unwrap() == TrialStatus::Success);
        }
        let (p, q) = (direct as f64 / 20.0, indirect as f64 / 20.0);
        pass &= p >= 0.8 && q <= 0.2;
        detail.push(format!("{:?}: complex {p:.2}, indirect {q:.2}", cfg.variant));
    }
    outcome(pass, format!("{} (need complex >= 0.80, indirect <= 0.20)", detail.join("; ")))
}

fn sweep(kind: EnsembleKind, len: usize, deltas: Vec<f64>, steps: std::ops::RangeInclusive<i32>) -> Vec<TrialRecord> {
    let grid = PhaseGrid::centered(EnsembleSpec::new(kind), len, 20, 77, deltas, steps).unwrap();
    let spec = RunSpec::new(&grid, SolveMode::Complex, SolverConfig::relaxed());
    let mut sink = MemorySink::new();
    run_grid(&grid, &spec, &mut sink, &RunOptions { workers: 1, progress_every: 0 }).unwrap();
    sink.into_records()
}

// 5. Sharper transitions at larger N.
fn sharpening() -> Outcome {
    let mut widths = Vec::new();
    for len in [256, 1024] {
        let recs = sweep(EnsembleKind::PartialFourier, len, vec![0.5], 1..=41);
        match fit_transition(&recs, FailureMode::CountAsFailure) {
            Ok(e) => widths.push((len, e.width(), e.rho50)),
            Err(e) => return outcome(false, format!("N={len}: {e}")),
        }
    }
    let pass = widths[1].1 < widths[0].1;
    let text: Vec<_> = widths.iter().map(|(n, w, r)| format!("N={n}: width {w:.4} (rho50 {r:.4})")).collect();
    outcome(pass, text.join(", "))
}

type Estimates = BTreeMap<(&'static str, u64), f64>;

/// ρ̂₅₀ for Gaussian N=1000 and Fourier N=1024 at δ ∈ {0.3, 0.5, 0.7}, on
/// the standard grid steps 21..=35 (ρ^R(δ) to ρ^R(δ) + 0.14), which brackets
/// the complex curve.
fn universality_estimates() -> &'static Result<Estimates, String> {
    static CELL: OnceLock<Result<Estimates, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut out = BTreeMap::new();
        for (name, kind, len) in [("fourier", EnsembleKind::PartialFourier, 1024), ("gaussian", EnsembleKind::ComplexGaussian, 1000)] {
            let recs = sweep(kind, len, vec![0.3, 0.5, 0.7], 21..=35);
            for delta in [0.3, 0.5, 0.7] {
                let group: Vec<_> = recs.iter().filter(|r| r.delta == delta).cloned().collect();
                let e = fit_transition(&group, FailureMode::CountAsFailure).map_err(|e| format!("{name} {delta}: {e}"))?;
                out.insert((name, (delta * 10.0).round() as u64), e.rho50);
            }
        }
        Ok(out)
    })
}

// 6. Gaussian and Fourier share the transition.
fn universality() -> Outcome {
    match universality_estimates() {
        Err(e) => outcome(false, e.clone()),
        Ok(est) => {
            let mut worst = 0.0f64;
            let mut text = Vec::new();
            for d in [3u64, 5, 7] {
                let (f, g) = (est[&("fourier", d)], est[&("gaussian", d)]);
                worst = worst.max((f - g).abs());
                text.push(format!("delta=0.{d}: fourier {f:.4} gaussian {g:.4}"));
            }
            outcome(worst <= 0.03, format!("{}; max |diff| {worst:.4}", text.join(", ")))
        }
    }
}

/// Independent evaluation of the real curve: ψ by midpoint quadrature of
/// the half-normal tail, maximized over a fine z-grid.
fn fine_grid_real(delta: f64) -> f64 {
    let psi = |z: f64| -> f64 {
        let h = 2e-4;
        (0..60_000)
            .map(|i| {
                let g = z + (i as f64 + 0.5) * h;
                (g - z).powi(2) * (-0.5 * g * g).exp()
            })
            .sum::<f64>()
            * h
            * 2.0
            / (2.0 * std::f64::consts::PI).sqrt()
    };
    (1..=3000)
        .map(|i| {
            let z = i as f64 * 1e-3;
            let p = psi(z);
            (1.0 - p / delta) / (1.0 + z * z - p)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

// 7. Theory curves and their agreement with the empirical transition.
fn theory() -> Outcome {
    let grid: Vec<f64> = (1..50).map(|i| i as f64 * 0.02).collect();
    let real: Vec<f64> = grid.iter().map(|&d| real_transition(d).unwrap()).collect();
    let cplx: Vec<f64> = grid.iter().map(|&d| complex_transition(d).unwrap()).collect();
    let monotone = real.windows(2).all(|w| w[1] > w[0]) && cplx.windows(2).all(|w| w[1] > w[0]);
    let ordered = real.iter().zip(&cplx).all(|(r, c)| c > r);
    let r05 = real_transition(0.5).unwrap();
    let oracle = fine_grid_real(0.5);
    let real_ok = (r05 - oracle).abs() <= 1e-4 && (r05 - 0.386).abs() <= 0.005;
    let c05 = complex_transition(0.5).unwrap();
    let (empirical_ok, empirical) = match universality_estimates() {
        Ok(est) => {
            let e = est[&("fourier", 5)];
            ((c05 - e).abs() <= 0.03, format!("{e:.4}"))
        }
        Err(e) => (false, e.clone()),
    };
    outcome(
        monotone && ordered && real_ok && empirical_ok,
        format!(
            "monotone={monotone} complex>real={ordered} real(0.5)={r05:.5} (fine grid {oracle:.5}) complex(0.5)={c05:.5} vs empirical {empirical}"
        ),
    )
}

// 8. Real-reformulation identities.
fn bridge() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut norm_gap = 0.0f64;
    for _ in 0..100 {
        let len = rng.random_range(1..64);
        let x: Vec<Complex64> = (0..len).map(|_| cgauss(&mut rng)).collect();
        let l1: f64 = x.iter().map(|z| z.norm()).sum();
        let l21 = l21_norm(&realify(&x), &block_permutation(len)).unwrap();
        norm_gap = norm_gap.max((l1 - l21).abs() / l1);
    }
    let kinds = [EnsembleKind::ComplexGaussian, EnsembleKind::PartialFourier, EnsembleKind::ComplexTernary, EnsembleKind::RealGaussian];
    let mut gram_gap = 0.0f64;
    let mut pairing = 0.0f64;
    for s in 0..50u64 {
        let kind = kinds[s as usize % kinds.len()];
        let inst = make_instance(EnsembleSpec::new(kind), 24, 0.5, 0.2, 900 + s).unwrap();
        let a_r = RealSystem::new(inst.operator.clone()).to_dense();
        let gram = &a_r * a_r.transpose();
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                gram_gap = gram_gap.max((gram[(i, j)] - target).abs());
            }
        }
        let report = null_space_structure_check(&inst.operator, 1, 1900 + s);
        pairing = pairing.max(report.max_residual());
    }
    outcome(
        norm_gap <= 1e-12 && gram_gap <= 1e-10 && pairing <= 1e-8,
        format!("l21/l1 gap {norm_gap:.1e}, |A_r A_r^T - I| {gram_gap:.1e}, pairing residual {pairing:.1e} (50 samples)"),
    )
}

// 9. Logistic estimator on synthetic data.
fn glm() -> Outcome {
    let rhos: Vec<f64> = (1..=41).map(|i| 0.4 + 0.01 * f64::from(i - 21)).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut total = 0.0;
    for _ in 0..50 {
        let cells: Vec<_> = rhos
            .iter()
            .map(|&rho| {
                let p = 1.0 / (1.0 + (-20.0 * (0.4 - rho)).exp());
                let s = Binomial::new(20, p).unwrap().sample(&mut rng) as usize;
                BinomialCell { rho, successes: s, trials: 20 }
            })
            .collect();
        match fit_cells(0.5, &cells) {
            Ok(e) => total += (e.rho50 - 0.4).abs(),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let mae = total / 50.0;
    outcome(mae <= 0.005, format!("mean |rho50 - 0.4| = {mae:.5} over 50 repetitions"))
}

// 10. Worker count does not change the output.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let scale = PresetScale { signal_len: Some(128), deltas: Some(vec![0.3, 0.5, 0.7]), trials: 3, base_seed: 10 };
    let mut mismatches = Vec::new();
    let mut rows = 0;
    for preset in [Preset::Fig1, Preset::Fig3] {
        for plan in preset.plans(&scale).unwrap() {
            let mut bytes = Vec::new();
            for workers in [1, 8] {
                let path = dir.path().join(format!("{}-{}-{workers}.csv", preset, plan.label));
                let header = TrialsHeader::new(plan.mode, plan.solver.clone());
                let mut sink = CsvSink::create(&path, header).unwrap().without_timing();
                run_grid(&plan.grid, &plan.spec(), &mut sink, &RunOptions { workers, progress_every: 0 }).unwrap();
                bytes.push(std::fs::read(&path).unwrap());
            }
            rows += bytes[0].iter().filter(|&&c| c == b'\n').count() - 2;
            if bytes[0] != bytes[1] {
                mismatches.push(format!("{preset}/{}", plan.label));
            }
        }
    }
    outcome(mismatches.is_empty(), format!("{rows} rows compared, mismatches: {mismatches:?}"))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 10] = [
        (1, "prox oracle", 10, prox_oracle),
        (2, "convex-oracle equivalence", 60, convex_oracle),
        (3, "deep-phase recovery", 60, deep_phase),
        (4, "complex above indirect at rho=0.45", 600, ordering),
        (5, "sharpening with N", 1800, sharpening),
        (6, "ensemble universality", 2700, universality),
        (7, "theory curves", 60, theory),
        (8, "bridge identities", 60, bridge),
        (9, "GLM estimator", 10, glm),
        (10, "worker-count determinism", 600, determinism),
    ];
    let selected: Option<Vec<u32>> = std::env::var("PHASELAB_ACCEPT")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&id)) {
            continue;
        }
        // Criterion 7 reuses the sweeps of criterion 6; its own budget
        // excludes them.
        if id == 7 {
            let _ = universality_estimates();
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let on_time = within_budget(elapsed, budget);
        let pass = result.pass && on_time;
        failed += usize::from(!pass);
        println!(
            "[{}] criterion {id:>2} {name}: {} ({:.1}s{})",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            if on_time { String::new() } else { format!(", over {budget}s budget") }
        );
    }
    println!("acceptance: {failed} criteria failing");
}

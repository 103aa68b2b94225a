use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use phaselab::bridge::complexify;
use phaselab::solver::{solve_real_system, Setting, ThresholdRule};
use phaselab::vector::relative_error;
use phaselab::{
    make_instance, solve, solve_indirect, Complex64, ComplexVector, EnsembleKind, EnsembleSpec, SolverConfig,
    SparseInstance,
};

// slow penalty growth so the iterate reaches the optimum before μ freezes it
fn tight(mut cfg: SolverConfig) -> SolverConfig {
    cfg.r = Setting::Value(1.05);
    cfg.stop_tol = 1e-12;
    cfg.inner_tol = 1e-12;
    cfg.inner_max = 500;
    cfg
}

#[test]
fn block_shrinkage_on_real_system_tracks_complex_iteration() {
    let kinds = [EnsembleKind::ComplexGaussian, EnsembleKind::PartialFourier, EnsembleKind::ComplexTernary];
    for (i, kind) in kinds.into_iter().enumerate() {
        let inst = make_instance(EnsembleSpec::new(kind), 64, 0.5, 0.45, 90 + i as u64).unwrap();
        for cfg in [SolverConfig::exact(), SolverConfig::relaxed()] {
            let complex = solve(&inst, &cfg).unwrap();
            let mut block = cfg.clone();
            block.threshold_rule = ThresholdRule::Block2;
            let real = solve_real_system(&inst, &block).unwrap();
            assert_eq!(complex.outer_iters, real.outer_iters, "{kind}");
            let diff = relative_error(real.x_hat.as_slice(), complex.x_hat.as_slice());
            assert!(diff < 1e-10, "{kind} {:?}: {diff:e}", cfg.variant);
            assert!((complex.l1_value - real.l1_value).abs() <= 1e-10 * complex.l1_value);
        }
    }
}

#[test]
fn indirect_solve_on_square_operator_returns_the_unique_solution() {
    for kind in [EnsembleKind::ComplexGaussian, EnsembleKind::PartialFourier] {
        let inst = make_instance(EnsembleSpec::new(kind), 32, 1.0, 0.7, 3).unwrap();
        assert_eq!(inst.measurements, 32);
        let out = solve_indirect(&inst, &SolverConfig::exact()).unwrap();
        let err = relative_error(out.x_hat.as_slice(), inst.x_true.as_slice());
        assert!(err < 1e-7, "{kind}: {err:e}");
    }
}

/// `min ‖x‖₁ s.t. A x = b` over real x, as an LP in (x, t) with `|x| ≤ t`.
fn real_lp(a: &faer::Mat<Complex64>, b: &[Complex64]) -> Vec<f64> {
    let (n, len) = (a.nrows(), a.ncols());
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    let mut rhs: Vec<f64> = b.iter().map(|z| z.re).collect();
    for i in 0..n {
        for j in 0..len {
            rows.push(i);
            cols.push(j);
            vals.push(a[(i, j)].re);
        }
    }
    for j in 0..len {
        // x − t ≤ 0 and −x − t ≤ 0
        for (r, sign) in [(n + 2 * j, 1.0), (n + 2 * j + 1, -1.0)] {
            rows.extend([r, r]);
            cols.extend([j, len + j]);
            vals.extend([sign, -1.0]);
            rhs.push(0.0);
        }
    }
    let a_mat = CscMatrix::new_from_triplets(n + 2 * len, 2 * len, rows, cols, vals);
    let p = CscMatrix::zeros((2 * len, 2 * len));
    let q: Vec<f64> = (0..2 * len).map(|v| if v < len { 0.0 } else { 1.0 }).collect();
    let cones = [SupportedConeT::ZeroConeT(n), SupportedConeT::NonnegativeConeT(2 * len)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-12)
        .tol_gap_rel(1e-12)
        .tol_feas(1e-12)
        .build()
        .unwrap();
    let mut solver = DefaultSolver::new(&p, &q, &a_mat, &rhs, &cones, settings).unwrap();
    solver.solve();
    assert!(matches!(solver.solution.status, SolverStatus::Solved | SolverStatus::AlmostSolved));
    solver.solution.x[..len].to_vec()
}

#[test]
fn indirect_matches_real_basis_pursuit_for_real_data() {
    for seed in 0..8u64 {
        let drawn = make_instance(EnsembleSpec::new(EnsembleKind::RealGaussian), 48, 0.5, 0.4, 700 + seed).unwrap();
        let dense = drawn.operator.to_dense();
        assert!((0..dense.nrows()).all(|i| (0..dense.ncols()).all(|j| dense[(i, j)].im.abs() < 1e-12)));
        let x: Vec<Complex64> = drawn.x_true.as_slice().iter().map(|z| Complex64::new(z.re + z.im, 0.0)).collect();
        let inst = SparseInstance::from_signal(
            drawn.ensemble,
            (*drawn.operator).clone(),
            ComplexVector::new(x).unwrap(),
            seed,
        )
        .unwrap();

        let indirect = solve_indirect(&inst, &tight(SolverConfig::exact())).unwrap();
        let complex = solve(&inst, &tight(SolverConfig::exact())).unwrap();
        let lp: Vec<Complex64> = real_lp(&dense, inst.b.as_slice()).into_iter().map(|v| Complex64::new(v, 0.0)).collect();

        let max_imag = indirect.x_hat.as_slice().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(max_imag < 1e-9, "seed {seed}: imaginary part {max_imag:e}");
        let d = relative_error(indirect.x_hat.as_slice(), complex.x_hat.as_slice());
        assert!(d < 1e-8, "seed {seed}: indirect vs complex {d:e}");
        let d = relative_error(indirect.x_hat.as_slice(), &lp);
        assert!(d < 1e-6, "seed {seed}: indirect vs LP {d:e}");
    }
}

#[test]
fn complexify_inverts_the_stacking() {
    let inst = make_instance(EnsembleSpec::new(EnsembleKind::ComplexBernoulli), 20, 0.5, 0.3, 1).unwrap();
    let system = phaselab::bridge::to_real_system(&inst);
    let back = complexify(&system.x_r).unwrap();
    assert_eq!(back.as_slice(), inst.x_true.as_slice());
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn phaselab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaselab"))
        .args(args)
        .env_remove("PHASELAB_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_owned)
        .collect()
}

fn csvs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn solve_easy_point_recovers() {
    let out = phaselab(&["solve", "--ensemble", "fourier", "--N", "256", "--delta", "0.5", "--rho", "0.2", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("status: success"));
}

#[test]
fn solve_square_operator_is_trivial() {
    let out = phaselab(&["solve", "--N", "16", "--delta", "1.0", "--rho", "0.5", "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_rejects_bad_delta() {
    let out = phaselab(&["solve", "--N", "64", "--delta", "1.5", "--rho", "0.2"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));
}

#[test]
fn solve_hard_point_reports_recovery_failure() {
    let out = phaselab(&["solve", "--N", "256", "--delta", "0.3", "--rho", "0.9", "--seed", "3", "--variant", "relaxed"]);
    assert_eq!(code(&out), 2, "{}", stdout(&out));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&phaselab(&["solve", "--delta", "0.5"])), 1);
    assert_eq!(code(&phaselab(&["frobnicate"])), 1);
    assert_eq!(code(&phaselab(&["--help"])), 0);
}

#[test]
fn preset_run_writes_every_trial_and_resume_adds_none() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let args = [
        "run", "--preset", "fig1", "--N", "256", "--deltas", "0.3,0.5,0.7", "--trials", "10", "--out", out_dir,
    ];
    let out = phaselab(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let files = csvs(dir.path());
    // exact and relaxed collapse to one file each at a single N
    assert_eq!(files.len(), 2, "{files:?}");
    for f in &files {
        assert_eq!(data_rows(f).len(), 3 * 41 * 10, "{}", f.display());
    }
    let before: Vec<_> = files.iter().map(|f| data_rows(f).len()).collect();

    let mut resumed = args.to_vec();
    resumed.push("--resume");
    let out = phaselab(&resumed);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains(" 0 trials run"), "{}", stdout(&out));
    let after: Vec<_> = files.iter().map(|f| data_rows(f).len()).collect();
    assert_eq!(before, after);
}

#[test]
fn worker_count_does_not_change_output() {
    let run = |workers: &str| {
        let dir = tempfile::tempdir().unwrap();
        let args = [
            "run", "--preset", "fig3", "--N", "128", "--deltas", "0.3,0.5,0.7", "--trials", "3", "--no-timing",
            "--workers", workers, "--out", dir.path().to_str().unwrap(),
        ];
        assert_eq!(code(&phaselab(&args)), 0);
        csvs(dir.path()).iter().map(|f| fs::read(f).unwrap()).collect::<Vec<_>>()
    };
    let one = run("1");
    assert_eq!(one.len(), 2);
    assert_eq!(one, run("8"));
}

#[test]
fn seed_env_overrides_base_seed() {
    let dry = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_phaselab"));
        cmd.args(["run", "--preset", "fig3", "--N", "64", "--seed", "5", "--dry-run"]).env_remove("PHASELAB_SEED");
        if let Some(s) = env {
            cmd.env("PHASELAB_SEED", s);
        }
        let out = cmd.output().unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let cfg: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        cfg["runs"].as_array().unwrap().iter().map(|r| r["grid"]["base_seed"].as_u64().unwrap()).collect::<Vec<_>>()
    };
    assert!(dry(None).iter().all(|&s| s == 5));
    assert!(dry(Some("424242")).iter().all(|&s| s == 424242));

    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phaselab"));
    cmd.args(["run", "--preset", "fig3", "--dry-run"]).env("PHASELAB_SEED", "not-a-number");
    assert_eq!(code(&cmd.output().unwrap()), 1);
}

#[test]
fn fit_then_plot_draws_one_polyline_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = phaselab(&[
        "run", "--preset", "fig2", "--N", "64", "--deltas", "0.3,0.5,0.7", "--trials", "4", "--out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trials = csvs(d);
    assert_eq!(trials.len(), 4);

    let fourier = d.join("fourier.transitions");
    let fourier_trials = trials.iter().find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("fourier")).unwrap();
    let out = phaselab(&["fit", fourier_trials.to_str().unwrap(), "--out", fourier.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let svg = d.join("one.svg");
    let out = phaselab(&[
        "plot", "--transitions", fourier.to_str().unwrap(), "--theory", "real-l1", "--out", svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 2);

    let all = d.join("all.transitions");
    let mut fit_args = vec!["fit".to_owned()];
    fit_args.extend(trials.iter().map(|p| p.to_str().unwrap().to_owned()));
    fit_args.extend(["--out".to_owned(), all.to_str().unwrap().to_owned()]);
    let fit_args: Vec<&str> = fit_args.iter().map(String::as_str).collect();
    assert_eq!(code(&phaselab(&fit_args)), 0);

    let curves = d.join("curves.csv");
    assert_eq!(code(&phaselab(&["curve", "--out", curves.to_str().unwrap()])), 0);
    let out = phaselab(&[
        "plot", "--transitions", all.to_str().unwrap(), "--curves", curves.to_str().unwrap(), "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 4 + 2);
    assert!(text.contains("theory complex-l1"));
}

#[test]
fn plot_rejects_empty_and_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("x.svg");
    assert_eq!(code(&phaselab(&["plot", "--out", svg.to_str().unwrap()])), 1);

    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "ensemble,N,delta,rho50,slope,intercept,separated,n_cells,reason\n\
         fourier,256,0.5,0.45,-80,36,false,41,\n\
         fourier,256,zero-point-seven,0.5,-80,36,false,41,\n",
    )
    .unwrap();
    let out = phaselab(&["plot", "--transitions", bad.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 3"), "{err}");
    assert!(!svg.exists());
}

#[test]
fn curve_exports_both_kinds() {
    let out = phaselab(&["curve", "--step", "0.1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("delta,rho,kind"));
    assert_eq!(text.lines().filter(|l| l.ends_with("real-l1")).count(), 9);
    assert_eq!(text.lines().filter(|l| l.ends_with("complex-l1")).count(), 9);
}

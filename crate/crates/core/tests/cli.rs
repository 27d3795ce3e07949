use std::path::Path;
use std::process::Command;

use wgstokes::cli::{exit_code, run_convergence, run_solver_study, CommonArgs, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK};
use wgstokes::config::ExperimentConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wgstokes"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn solver_study_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let (code, stdout, _) = run(&["solver-study", "--levels", "4,8", "--mu", "1,1e-4", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("iterations.csv"));
    let csv = read(&out, "iterations.csv");
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().skip(1).all(|l| l.contains(",minres,block_diag,") && l.contains(",true,false,")));
    let md = read(&out, "iterations.md");
    assert!(md.contains("| 32 | 128 |") || md.contains("32") && md.contains("128"));
    let hist = read(&out, "history_mu1e0_n4.csv");
    assert!(hist.starts_with("iteration,relres\n0,1.000000e+00"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let (code, _, _) = run(&["convergence", "--levels", "4,8", "--mu", "1", "--out", d.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
    }
    for name in ["convergence_mu1e0.csv", "convergence.md"] {
        assert_eq!(read(&a, name), read(&b, name));
    }
}

#[test]
fn convergence_csv_uses_fixed_scientific_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        levels: Some(vec![4, 8]),
        mu: vec![1.0],
        out: dir.path().to_path_buf(),
        ..Default::default()
    };
    let outcome = run_convergence(&cfg).unwrap();
    assert!(outcome.all_converged);
    let csv = read(dir.path(), "convergence_mu1e0.csv");
    let row = csv.lines().nth(1).unwrap();
    let h = row.split(',').nth(1).unwrap();
    assert!(h.contains('e') && h.split('e').next().unwrap().len() == 8 && h.len() == 12, "{h}");
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.json");
    std::fs::write(&cfg_path, r#"{"mu": [1.0], "levels": [4], "method": "gmres"}"#).unwrap();
    let args = CommonArgs {
        config: Some(cfg_path),
        out: Some(dir.path().join("o")),
        levels: Some(vec![8]),
        ..Default::default()
    };
    let cfg = args.resolve().unwrap();
    assert_eq!(cfg.levels, Some(vec![8]));
    let outcome = run_solver_study(&cfg).unwrap();
    assert_eq!(exit_code(&Ok(outcome)), EXIT_OK);
    let csv = read(&dir.path().join("o"), "iterations.csv");
    assert!(csv.contains(",gmres,block_lower_tri,"));
}

#[test]
fn empty_level_list_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.json");
    std::fs::write(&cfg_path, r#"{"levels": []}"#).unwrap();
    let out = dir.path().join("never");
    let (code, _, stderr) = run(&["solver-study", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(stderr.contains("error"));
    assert!(!out.exists());
}

#[test]
fn invalid_arguments_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = out.to_str().unwrap();
    for args in [
        vec!["solver-study", "--method", "minres", "--precond", "block_lower_tri", "--levels", "4", "--out", o],
        vec!["solver-study", "--tol", "0", "--levels", "4", "--out", o],
        vec!["solver-study", "--mu", "-1", "--levels", "4", "--out", o],
        vec!["solver-study", "--problem", "nope", "--levels", "4", "--out", o],
        vec!["solver-study", "--method", "cg"],
        vec!["convergence", "--mesh", "/nonexistent/mesh.msh", "--out", o],
        vec!["spectral", "--levels", "20", "--out", o],
    ] {
        let (code, _, _) = run(&args);
        assert_eq!(code, EXIT_CONFIG, "{args:?}");
    }
    assert!(!out.exists());
}

#[test]
fn non_convergence_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n");
    let (code, _, stderr) = run(&[
        "solver-study", "--levels", "8", "--mu", "1", "--maxit", "5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NOT_CONVERGED);
    assert!(stderr.contains("did not converge"));
    assert!(read(&out, "iterations.md").contains("5*"));
}

#[test]
fn spectral_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sp");
    let (code, _, _) = run(&["spectral", "--levels", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let csv = read(&out, "spectral.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "n2");
    assert_eq!(row[1], "8");
    // unit eigenvalue count equals its expected multiplicity
    assert_eq!(row[8], row[9]);
    assert_eq!(row[11], "0");
    assert_eq!(read(&out, "gammas_n2.csv").lines().count(), 1 + 8);
}

#[test]
fn inconsistency_reports_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i");
    let (code, stdout, _) = run(&["inconsistency", "--levels", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("n8: alpha_h = "));
    assert!(out.join("history_raw_n8.csv").exists());
}

#[test]
fn export_system_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let (code, _, _) = run(&["export-system", "--levels", "2", "--mu", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let a = read(&out, "A_n2_mu1e0.mtx");
    assert!(a.starts_with("%%MatrixMarket matrix coordinate real"));
    let k = read(&out, "K_n2_mu1e0.mtx");
    let size: Vec<usize> = k
        .lines()
        .find(|l| !l.starts_with('%'))
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    // 8 interior + 8 interior facets, 2 components, plus 8 pressures
    assert_eq!(size[0], 2 * (8 + 8) + 8);
    assert_eq!(size[0], size[1]);
}

#[test]
fn three_dimensional_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let (code, _, _) = run(&[
        "solver-study", "--problem", "stokes3d_trig", "--levels", "2", "--mu", "1", "--method", "gmres",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(read(&out, "iterations.csv").contains(",gmres,block_lower_tri,"));
}

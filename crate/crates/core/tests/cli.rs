use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ppflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppflow"))
        .args(args)
        .env_remove("PPFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn stationary_run_converges_immediately_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = config_path("stationary.toml");
    let out = ppflow(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["diagnostics.csv", "report.json", "phi_tilde_initial.bin", "phi_tilde_final.bin", "phi_t_final.bin"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let csv = std::fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t,residual_sup,osc_phi_t,mean_phi_t,min_cone_margin,sup_grad,dt");
    assert_eq!(rows.len(), 2);
    let residual: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!(residual <= 1e-12);

    let text = dir.path().join("report.txt");
    let out = ppflow(&["report", out_dir.join("report.json").to_str().unwrap(), "--out", text.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rendered = std::fs::read_to_string(&text).unwrap();
    assert!(rendered.contains("verdict: converged"), "{rendered}");
    assert!(dir.path().join("report.txt.deltas.csv").exists());
}

#[test]
fn lemma_suite_exits_zero() {
    let out = ppflow(&["check-lemmas", "--n", "3", "--p", "2", "--samples", "10000", "--seed", "7"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{stdout}");
    assert!(stdout.lines().count() > 10);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("n = 3\np = 2\nfamily = \"sigma_k_root\"\nk = 3\n", "k"),
        ("n = 3\np = 3\nfamily = \"sigma_k_root\"\nk = 1\n", "p"),
        ("n = 3\np = 2\nfamily = \"sigma_k_root\"\nk = 2\nspeed = 2\n", "speed"),
        (
            "n = 3\np = 2\nfamily = \"sigma_k_root\"\nk = 2\n[phi0]\ntype = \"fourier_modes\"\n\
             modes = [{ wave = [1, 0, 0, 0, 0, 0], amplitude = 5.0 }]\n",
            "phi0",
        ),
    ];
    for (text, field) in cases {
        let cfg = write_config(dir.path(), text);
        let out = ppflow(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().join("o").to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(code(&out), 2, "{text}: {stderr}");
        assert!(stderr.contains(field), "{field} not named in {stderr}");
    }
    let missing = ppflow(&["run", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(code(&missing), 2);
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_ppflow"))
        .args(["run", "--config", config_path("stationary.toml").to_str().unwrap(), "--out-dir", dir.path().join("t").to_str().unwrap()])
        .env("PPFLOW_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad_threads), 2);
}

#[test]
fn non_convergence_exits_three_after_writing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "n = 3\np = 2\nfamily = \"sigma_k_root\"\nk = 2\nt_max = 0.1\n\
         [psi]\nconstant = 3.4641016151377544\n\
         modes = [{ wave = [1, 0, 0, 0, 0, 0], amplitude = 0.1 }]\n",
    );
    let out_dir = dir.path().join("out");
    let out = ppflow(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    let report = ppflow(&["report", out_dir.join("report.json").to_str().unwrap()]);
    assert_eq!(code(&report), 0);
    assert!(String::from_utf8_lossy(&report.stdout).contains("verdict: not_converged"));
}

#[test]
fn seed_and_threads_flags_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("stationary.toml");
    let out = ppflow(&[
        "run", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(),
        "--threads", "2", "--seed", "11",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"seed\": 11"));
}

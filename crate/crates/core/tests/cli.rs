use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hermite-mdm"))
}

#[test]
fn study_writes_all_formats_to_the_override_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("int.toml");
    std::fs::write(
        &config,
        "problem = \"INT_1D\"\nscheme = \"pg(2)\"\nsweep = [8, 16, 32]\n[output]\nname = \"int\"\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin().args(["study", "--config"]).arg(&config).env("HERMITE_OUT_DIR", &out).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(out.join("int.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("sweep_value,err_exact,err_tail,err_bound,cost_exact,cost_bound,d_eps,runtime_ms\n"));
    assert!(out.join("int.jsonl").exists());
    assert!(out.join("int.dat").exists());
    let summary: serde_json::Value = serde_json::from_slice(&status.stdout).unwrap();
    assert_eq!(summary["target_rate"], 2.0);
}

#[test]
fn aborted_study_exits_nonzero_and_marks_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "problem = \"INT_1D\"\nscheme = \"pg(2)\"\nsweep = [8, 16]\ntol = 1e-30\n").unwrap();
    let status = bin().args(["study", "--config"]).arg(&config).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert!(csv.lines().last().unwrap().starts_with("# aborted:"));
}

#[test]
fn invalid_configuration_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "problem = \"INT_1D\"\nscheme = \"pg(2)\"\nsweep = [16, 8, 32]\n").unwrap();
    let status = bin().args(["study", "--config"]).arg(&config).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&status.stderr).contains("monotone"));
}

#[test]
fn kernel_and_quad_commands() {
    let k = bin().args(["kernel", "--scheme", "pg(2)", "--x", "0", "--y", "0"]).output().unwrap();
    assert!(k.status.success());
    let text = String::from_utf8(k.stdout).unwrap();
    let value: f64 = text.lines().next().unwrap().strip_prefix("value ").unwrap().parse().unwrap();
    // k(0,0) = 1 + Σ_{ν even ≥ 2} (ν−1)!!²/ν! · (ν+1)^{−2}.
    assert!((value - 1.0887930451518).abs() < 1e-12);
    let q = bin().args(["quad", "--n", "16"]).output().unwrap();
    assert!(q.status.success());
    assert!(String::from_utf8(q.stdout).unwrap().starts_with("nodes "));
}

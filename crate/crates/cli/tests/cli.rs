use std::path::Path;
use std::process::{Command, Output};

fn psmlik(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psmlik"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const MGF: &str = "BEGIN IONS\nTITLE=q1\nCHARGE=2+\nPEPMASS=400.7\n147.11 10\n147.9 5\n262.14 30\n363.19 12\n476.27 8\n591.3 20\n690.37 3\nEND IONS\n";

#[test]
fn help_for_every_command() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["preprocess", "train", "score", "simulate", "evaluate"] {
        let out = psmlik(dir.path(), &[cmd, "--help"]);
        assert!(out.status.success(), "{cmd}");
    }
}

#[test]
fn preprocess_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("in.mgf"), MGF).unwrap();
    let ok = psmlik(dir.path(), &["preprocess", "--in", "in.mgf", "--out", "out.mgf"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let cleaned = std::fs::read_to_string(dir.path().join("out.mgf")).unwrap();
    // 147.11 and 147.9 pool into one peak
    assert_eq!(cleaned.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 6);

    let missing = psmlik(dir.path(), &["preprocess", "--in", "absent.mgf", "--out", "x.mgf"]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = MGF.replace("363.19 12", "363.19 twelve");
    std::fs::write(dir.path().join("bad.mgf"), bad).unwrap();
    let out = psmlik(dir.path(), &["preprocess", "--in", "bad.mgf", "--out", "x.mgf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("q1"), "{}", stderr(&out));
    assert!(!dir.path().join("x.mgf").exists());
}

fn simulated_training_set(dir: &Path) {
    let out = psmlik(dir, &["simulate", "--charge", "2", "--count", "12", "--seed", "4", "--out", "train.mgf"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let truth = std::fs::read_to_string(dir.join("train.truth.tsv")).unwrap();
    let manifest: String = truth
        .lines()
        .skip(1)
        .map(|l| format!("train.mgf\ttrain.theoretical/{}.tsv\n", l.split('\t').nth(1).unwrap()))
        .collect();
    std::fs::write(dir.join("pairs.tsv"), manifest).unwrap();
}

#[test]
fn train_score_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulated_training_set(d);
    let out = psmlik(d, &["train", "--pairs", "pairs.tsv", "--charge", "2", "--out", "params.json", "--skip-preprocess"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("params.report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    let trace: Vec<f64> = report["loglik_trace"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(trace.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(std::fs::read_to_string(d.join("params.mu.tsv")).unwrap().lines().count(), 13);

    // one spectrum, three candidates
    std::fs::write(
        d.join("cands.tsv"),
        "synthetic-0000\ttrain.theoretical/synthetic-0000.tsv\nsynthetic-0000\ttrain.theoretical/synthetic-0001.tsv\nsynthetic-0000\ttrain.theoretical/synthetic-0002.tsv\n",
    )
    .unwrap();
    let out = psmlik(d, &["score", "--observed", "train.mgf", "--candidates", "cands.tsv", "--params", "params.json", "--out", "scores.tsv", "--skip-preprocess"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let scores = std::fs::read_to_string(d.join("scores.tsv")).unwrap();
    let rows: Vec<Vec<&str>> = scores.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 3);
    let total: f64 = rows.iter().map(|r| r[6].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-7);
    assert_eq!(rows[0][1], "synthetic-0000");

    let out = psmlik(d, &["score", "--observed", "train.mgf", "--candidates", "cands.tsv", "--method", "similarity", "--out", "sim.tsv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = psmlik(d, &["score", "--observed", "train.mgf", "--candidates", "cands.tsv", "--method", "nope", "--out", "x.tsv"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(d.join("truth.tsv"), "synthetic-0000\tsynthetic-0000\n").unwrap();
    for mode in ["fdr", "calibration"] {
        let out = psmlik(d, &["evaluate", "--results", "scores.tsv", "--truth", "truth.tsv", "--mode", mode, "--out", "eval.tsv"]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
}

#[test]
fn train_rejects_mixed_charges() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulated_training_set(d);
    let mut manifest = std::fs::read_to_string(d.join("pairs.tsv")).unwrap();
    std::fs::write(d.join("other.tsv"), "# id=other\n# charge=1\n300.0\t1.0\n400.0\t0.5\n").unwrap();
    std::fs::write(d.join("other.mgf"), "BEGIN IONS\nTITLE=other\nCHARGE=1+\n300.1 1.0\n401 0.5\nEND IONS\n").unwrap();
    manifest.push_str("other.mgf\tother.tsv\n");
    std::fs::write(d.join("pairs.tsv"), manifest).unwrap();
    let out = psmlik(d, &["train", "--pairs", "pairs.tsv", "--charge", "2", "--out", "params.json", "--skip-preprocess"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("charge"), "{}", stderr(&out));
}

#[test]
fn score_refuses_wrong_charge_params() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulated_training_set(d);
    let out = psmlik(d, &["train", "--pairs", "pairs.tsv", "--charge", "2", "--out", "params.json", "--skip-preprocess"]);
    assert!(out.status.success());
    std::fs::write(d.join("q.mgf"), "BEGIN IONS\nTITLE=q\nCHARGE=1+\n300.1 1.0\n401 0.5\nEND IONS\n").unwrap();
    std::fs::write(d.join("c.tsv"), "q\tnaive:PEPTIDE\n").unwrap();
    let out = psmlik(d, &["score", "--observed", "q.mgf", "--candidates", "c.tsv", "--params", "params.json", "--out", "s.tsv"]);
    assert_eq!(out.status.code(), Some(1));
}

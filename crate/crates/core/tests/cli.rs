//! The `mvpred` binary: stage chaining and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn mvpred(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvpred"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = mvpred(dir, args);
    assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn two_sequences(dir: &Path) {
    ok(dir, &["synth", "--kind", "pan", "--seed", "1", "--frames", "4", "--out", "a.y4m"]);
    ok(dir, &["synth", "--kind", "multi-object", "--objects", "6", "--seed", "2", "--frames", "4", "--out", "b.y4m"]);
}

#[test]
fn stages_chain_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    two_sequences(d);
    ok(d, &["estimate", "--input", "a.y4m", "--input", "b.y4m", "--block-size", "16", "--out-dir", "est"]);
    assert!(d.join("est/a.csv").is_file() && d.join("est/b.csv").is_file());
    ok(d, &["extract", "--fields", "est/a.csv", "est/b.csv", "--block-size", "16", "--seed", "1", "--out-dir", "ex"]);
    for f in ["samples.csv", "train.csv", "test.csv", "mv_stats.json"] {
        assert!(d.join("ex").join(f).is_file(), "{f}");
    }
    ok(d, &["train", "--train", "ex/train.csv", "--seed", "1", "--max-epochs", "3", "--out-dir", "tr"]);
    for f in ["classifier_x.json", "classifier_y.json", "regressor_x.json", "regressor_y.json"] {
        assert!(d.join("tr/models").join(f).is_file(), "{f}");
    }
    ok(d, &["evaluate", "--test", "ex/test.csv", "--models", "tr", "--out-dir", "ev"]);
    ok(d, &["report", "--predictions", "ev/predictions.csv", "--out-dir", "rp"]);
    let report = std::fs::read_to_string(d.join("rp/report.csv")).unwrap();
    for scheme in ["median", "best", "classifier", "regressor"] {
        assert!(report.contains(&format!("cat3,{scheme},x,")), "{scheme} row missing:\n{report}");
    }
}

#[test]
fn seed_is_required_for_extract_and_train() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = mvpred(d, &["extract", "--fields", "f.csv", "--out-dir", "x"]);
    assert_eq!(code(&out), 2);
    let out = mvpred(d, &["train", "--train", "t.csv", "--out-dir", "x"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn configuration_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("bad.json"), r#"{"block_size": 16, "no_such_key": 1}"#).unwrap();
    std::fs::write(d.join("deep.json"), r#"{"regressor": {"hidden_layers": 9, "width": 8}}"#).unwrap();
    for args in [
        &["run", "--config", "missing.json", "--out-dir", "o"][..],
        &["run", "--config", "bad.json", "--out-dir", "o"],
        &["run", "--config", "deep.json", "--out-dir", "o"],
        &["run", "--schemes", "median,nonsense", "--out-dir", "o"],
        &["no-such-subcommand"],
    ] {
        let out = mvpred(d, args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn data_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--kind", "pan", "--seed", "1", "--frames", "3", "--out", "a.y4m"]);
    let bytes = std::fs::read(d.join("a.y4m")).unwrap();
    std::fs::write(d.join("cut.y4m"), &bytes[..bytes.len() - 100]).unwrap();
    let out = mvpred(d, &["estimate", "--input", "cut.y4m", "--out-dir", "e"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(d.join("garbage.csv"), "not,a,sample\n1,2\n").unwrap();
    let out = mvpred(d, &["train", "--train", "garbage.csv", "--seed", "1", "--out-dir", "t"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    // a single static sequence has no motion-compensated neighbors at all
    ok(d, &["synth", "--kind", "pan", "--pan", "0,0", "--seed", "1", "--frames", "3", "--out", "still.y4m"]);
    std::fs::write(
        d.join("still.json"),
        r#"{"inputs": [{"type": "y4m", "path": "still.y4m"}], "block_size": 16}"#,
    )
    .unwrap();
    let out = mvpred(d, &["run", "--config", "still.json", "--out-dir", "r"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_writes_a_replayable_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    two_sequences(d);
    std::fs::write(
        d.join("exp.json"),
        r#"{"inputs": [{"type": "y4m", "path": "a.y4m"}, {"type": "y4m", "path": "b.y4m"}],
            "block_size": 16, "schemes": ["median", "best"]}"#,
    )
    .unwrap();
    ok(d, &["run", "--config", "exp.json", "--seed", "4", "--out-dir", "r1"]);
    ok(d, &["run", "--config", "r1/manifest.json", "--out-dir", "r2"]);
    for f in ["report.csv", "report.md", "test.csv", "manifest.json"] {
        assert_eq!(std::fs::read(d.join("r1").join(f)).unwrap(), std::fs::read(d.join("r2").join(f)).unwrap(), "{f}");
    }
}

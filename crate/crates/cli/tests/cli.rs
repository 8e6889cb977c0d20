use std::path::Path;
use std::process::{Command, Output};

fn ratlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TINY_PLAN: &str = r#"{
  "name": "tiny",
  "domain": "tort",
  "train_specs": [{"kind": "regular", "size": 200}],
  "test_specs": [{"kind": "unique"}, {"kind": "imputability"}],
  "architectures": [[12]],
  "train_config": {"learning_rate": 0.01, "batch_size": 50, "iterations": 300, "iteration_unit": "steps"},
  "repetitions": 2,
  "master_seed": 7
}"#;

#[test]
fn gen_writes_enumerated_set() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("unique.csv");
    let out = ratlab(&[
        "gen",
        "--domain",
        "tort",
        "--kind",
        "unique",
        "--out",
        path(&file),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&file).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1024);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",1")).count(), 112);
}

#[test]
fn verify_flags_a_flipped_label() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("imp.csv");
    let out = ratlab(&[
        "gen",
        "--domain",
        "tort",
        "--kind",
        "imputability",
        "--out",
        path(&file),
    ]);
    assert_eq!(code(&out), 0);
    let ok = ratlab(&["verify", "--in", path(&file), "--domain", "tort"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));

    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = &mut lines[1];
    let flipped = if row.ends_with('1') { '0' } else { '1' };
    row.pop();
    row.push(flipped);
    std::fs::write(&file, lines.join("\n") + "\n").unwrap();
    let bad = ratlab(&["verify", "--in", path(&file), "--domain", "tort"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&ratlab(&["frobnicate"])), 2);
    assert_eq!(code(&ratlab(&["gen", "--domain", "tort"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("x.csv");
    let sized = ratlab(&[
        "gen",
        "--domain",
        "tort",
        "--kind",
        "unique",
        "--size",
        "10",
        "--out",
        path(&file),
    ]);
    assert_eq!(code(&sized), 2);
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("u.csv");
    assert_eq!(
        code(&ratlab(&[
            "gen",
            "--domain",
            "tort",
            "--kind",
            "unique",
            "--out",
            path(&file)
        ])),
        0
    );
    let out = ratlab(&["verify", "--in", path(&file), "--domain", "welfare"]);
    assert_eq!(code(&out), 3);
    let missing = ratlab(&[
        "verify",
        "--in",
        path(&dir.path().join("nope.csv")),
        "--domain",
        "tort",
    ]);
    assert_eq!(code(&missing), 3);
}

#[test]
fn train_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("reg.csv");
    let model = dir.path().join("m.bin");
    let gen = ratlab(&[
        "gen",
        "--domain",
        "tort",
        "--kind",
        "regular",
        "--size",
        "300",
        "--seed",
        "3",
        "--out",
        path(&data),
    ]);
    assert_eq!(code(&gen), 0);
    let train = ratlab(&[
        "train",
        "--data",
        path(&data),
        "--domain",
        "tort",
        "--iterations",
        "200",
        "--learning-rate",
        "0.01",
        "--out",
        path(&model),
    ]);
    assert_eq!(
        code(&train),
        0,
        "{}",
        String::from_utf8_lossy(&train.stderr)
    );
    assert!(model.exists());
    let eval = ratlab(&["eval", "--model", path(&model), "--data", path(&data)]);
    assert_eq!(code(&eval), 0, "{}", String::from_utf8_lossy(&eval.stderr));
    assert!(String::from_utf8_lossy(&eval.stdout).contains("accuracy"));
}

#[test]
fn experiment_is_reproducible_and_manifest_replays() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(&plan, TINY_PLAN).unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let replay = dir.path().join("replay");
    for (p, out) in [(&plan, &first), (&plan, &second)] {
        let run = ratlab(&["experiment", "--plan", path(p), "--out-dir", path(out)]);
        assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    }
    let manifest = first.join("manifest.json");
    let run = ratlab(&[
        "experiment",
        "--plan",
        path(&manifest),
        "--out-dir",
        path(&replay),
        "--parallelism",
        "2",
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));

    let summary = |d: &Path| std::fs::read(d.join("summary.json")).unwrap();
    assert_eq!(summary(&first), summary(&second));
    assert_eq!(summary(&first), summary(&replay));
    assert!(first.join("accuracy.csv").exists());

    let report = ratlab(&["report", "--dir", path(&first)]);
    assert_eq!(code(&report), 0);
    assert!(String::from_utf8_lossy(&report.stdout).contains("imputability"));
}

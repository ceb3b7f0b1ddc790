use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scnv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scnv")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, n: &str, seed: &str) -> PathBuf {
    let o = scnv(&["synth", "--n-per-class", n, "--seed", seed, "--out", s(dir)]);
    assert_eq!(code(&o), 0, "{o:?}");
    dir.join("manifest.csv")
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(files(&path));
        } else {
            out.push((path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn synth_counts_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let a = synth(&tmp.path().join("a"), "325", "42");
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 650);
    assert_eq!(text.lines().filter(|l| l.ends_with(",1")).count(), 325);
    assert_eq!(fs::read_dir(tmp.path().join("a/images")).unwrap().count(), 650);

    let o = scnv(&["synth", "--n-per-class", "325", "--seed", "42", "--out", s(&tmp.path().join("b"))]);
    assert!(stdout(&o).contains("class 0: 325\nclass 1: 325"));
    assert_eq!(files(&tmp.path().join("a")), files(&tmp.path().join("b")));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = s(tmp.path());
    for args in [
        vec!["synth", "--n-per-class", "0", "--out", out],
        vec!["train", "--manifest", "m.csv", "--out", out, "--optimizer", "sgd"],
        vec!["train", "--manifest", "m.csv", "--out", out, "--first-activation", "tanh"],
        vec!["train", "--manifest", "m.csv", "--out", out, "--zoom", "1.5"],
        vec!["train", "--manifest", "m.csv", "--out", out, "--lr", "-1"],
        vec!["train", "--manifest", "m.csv", "--out", out, "--epochs", "0"],
        vec!["train", "--manifest", "m.csv", "--out", out, "--train-fraction", "1"],
        vec!["train", "--manifest", "m.csv", "--out", out, "--first-activation", "leaky-relu", "--leaky-slope", "2"],
        vec!["experiment", "--manifest", "m.csv", "--out", out, "--threshold", "1"],
        vec!["predict", "--checkpoint", "x.ckpt"],
        vec!["gradcheck", "--seeds", "0"],
        vec!["frobnicate"],
    ] {
        let o = scnv(&args);
        assert_eq!(code(&o), 2, "{args:?}: {o:?}");
    }
    // runtime failures are 1
    let o = scnv(&["train", "--manifest", s(&tmp.path().join("none.csv")), "--out", out]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("none.csv"));
}

#[test]
fn train_eval_predict() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), "30", "1");
    let run = tmp.path().join("run");
    let o = scnv(&[
        "train", "--manifest", s(&manifest), "--out", s(&run), "--epochs", "4", "--batch-size", "4",
        "--seed", "4", "--train-fraction", "0.8",
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).starts_with("epoch 4: train_loss"));
    let metrics = fs::read_to_string(run.join("metrics.csv")).unwrap();
    let rows: Vec<&str> = metrics.lines().collect();
    assert_eq!(rows[0], "epoch,train_loss,train_accuracy,val_loss,val_accuracy");
    assert_eq!(rows.len(), 5);
    assert!(rows[4].starts_with("4,"));
    let ckpt = run.join("model.ckpt");

    // the training manifest is easy enough to fit exactly
    let o = scnv(&["eval", "--checkpoint", s(&ckpt), "--manifest", s(&manifest), "--out", s(&run)]);
    assert_eq!(code(&o), 0, "{o:?}");
    let printed = stdout(&o);
    assert!(printed.contains("accuracy: 1\n") && printed.contains("total: 60\n"), "{printed}");
    assert_eq!(fs::read_to_string(run.join("confusion.csv")).unwrap(), "tp,fp,tn,fn\n30,0,30,0\n");

    // unseen positives
    let fresh = synth(&tmp.path().join("fresh"), "10", "77");
    let positives: Vec<PathBuf> = fs::read_to_string(&fresh)
        .unwrap()
        .lines()
        .filter(|l| l.ends_with(",1"))
        .map(|l| tmp.path().join("fresh").join(l.split(',').next().unwrap()))
        .collect();
    let mut args = vec!["predict", "--checkpoint", s(&ckpt)];
    args.extend(positives.iter().map(|p| s(p)));
    let o = scnv(&args);
    assert_eq!(code(&o), 0, "{o:?}");
    let lines = stdout(&o);
    let labels: Vec<&str> = lines.lines().map(|l| l.rsplit(", ").next().unwrap()).collect();
    assert_eq!(labels.len(), 10);
    assert!(labels.iter().filter(|&&l| l == "1").count() > 5, "{lines}");
    let first = lines.lines().next().unwrap();
    let prob = first.split(", ").nth(1).unwrap();
    assert_eq!(prob.split('.').nth(1).unwrap().len(), 6, "{first}");

    args.insert(3, "--threshold");
    args.insert(4, "0.999999");
    let o = scnv(&args);
    let strict = stdout(&o);
    let ones = |text: &str| text.lines().filter(|l| l.ends_with(", 1")).count();
    assert!(ones(&strict) < ones(&lines), "{strict}");
    for line in strict.lines() {
        let p: f64 = line.split(", ").nth(1).unwrap().parse().unwrap();
        if line.ends_with(", 1") {
            assert!(p >= 0.999999 - 5e-7, "{line}");
        } else {
            assert!(p <= 0.999999 + 5e-7, "{line}");
        }
    }

    // one missing file among three
    let missing = tmp.path().join("missing.pgm");
    let o = scnv(&["predict", "--checkpoint", s(&ckpt), s(&positives[0]), s(&missing), s(&positives[1])]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.pgm"));
}

#[test]
fn experiment_structure_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), "8", "2");
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = scnv(&[
            "experiment", "--manifest", s(&manifest), "--out", s(&out), "--epochs", "2", "--batch-size", "4",
            "--seed", "11",
        ]);
        assert_eq!(code(&o), 0, "{o:?}");
        out
    };
    let a = run("a");
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "model,train_acc,val_acc,train_loss,val_loss,notes");
    assert_eq!(lines.len(), 5);
    for (i, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("Model{},", i + 1)), "{line}");
    }
    assert!(lines[1].ends_with("rmsprop; relu"));
    assert!(lines[4].contains("zoom range 0.2"));
    for i in 1..=4 {
        let csv = fs::read_to_string(a.join(format!("Model{i}.metrics.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(a.join(format!("Model{i}.ckpt")).exists());
    }
    let b = run("b");
    assert_eq!(files(&a), files(&b));
}

#[test]
fn gradcheck_pass_and_injected_failure() {
    let o = scnv(&["gradcheck", "--seed", "0"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("seed ")).count(), 10);
    for name in ["conv0.kernel", "conv3.kernel", "dense7.weights", "dense9.bias"] {
        assert!(text.contains(name), "{text}");
    }
    assert!(text.trim_end().ends_with("PASS"));

    let o = scnv(&["gradcheck", "--first-activation", "leaky-relu"]);
    assert_eq!(code(&o), 0, "{o:?}");

    let o = scnv(&["gradcheck", "--inject-bug"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).trim_end().ends_with("FAIL"));
}

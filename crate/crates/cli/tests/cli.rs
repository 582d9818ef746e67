use std::path::Path;
use std::process::{Command, Output};

fn mpbandit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpbandit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    mpbandit(&args)
}

#[test]
fn u1_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u1.csv");
    let res = run_to(&out, &["--matrix", "u1", "--algo", "metc-elim", "--c", "1", "--horizons", "1e4", "--reps", "3"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "algo,c,mode,matrix,dist,seed,rep,t,regret,pseudo_regret");
    // 3 reps x (floor(lg 1e4) + 2) checkpoints.
    assert_eq!(lines.len() - 1, 45);
    assert!(lines[1].starts_with("metc-elim,1,enhanced,u1,bernoulli,0,0,1,"));
    assert!(lines.last().unwrap().starts_with("metc-elim,1,enhanced,u1,bernoulli,0,2,10000,"));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 10);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--matrix", "u2", "--algo", "selfish-ucb", "--ucb-ties", "random", "--horizons", "100,2e3", "--reps", "4", "--seed", "17"];
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(run_to(&a, &args).status.success());
    assert!(run_to(&b, &args).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let csv = std::fs::read_to_string(&a).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("selfish-ucb,0,random-ties,u2,bernoulli,17,0,"));
}

#[test]
fn gaussian_and_doubling_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let res = run_to(
        &out,
        &["--doubling", "--mode", "faithful", "--dist", "gaussian", "--sigma2", "0.25", "--horizons", "500", "--reps", "1"],
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("metc-elim-doubling,1,faithful,u1,gaussian,0,0,1,"));
}

#[test]
fn bad_matrix_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 2\n0.1 0.2\n0.3 7\nbernoulli\n").unwrap();
    let out = dir.path().join("out.csv");
    let res = run_to(&out, &["--matrix", bad.to_str().unwrap(), "--horizons", "100", "--reps", "1"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));
    assert!(!out.exists());
    // Nothing else was left behind either.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn invalid_settings_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    for args in [
        &["--horizons", "1e4,1e3"][..],
        &["--horizons", "1.5"],
        &["--horizons", "100", "--reps", "0"],
        &["--horizons", "100", "--c", "0"],
        &["--horizons", "100", "--dist", "gaussian"],
        &["--horizons", "100", "--mode", "greedy"],
    ] {
        let res = run_to(&out, args);
        assert!(!res.status.success(), "{args:?} accepted");
        assert!(!out.exists());
    }
}

#[test]
fn gaps_lists_optima() {
    let res = mpbandit(&["gaps", "--matrix", "u1"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("U* = 1.55"));
    assert!(text.contains("(3,2,1)"));

    let res = mpbandit(&["gaps", "--matrix", "u2"]);
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("optimal matchings (3)"));
}

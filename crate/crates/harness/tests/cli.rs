use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mlufl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlufl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generated_instance_validates() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("inst.json");
    let o = mlufl(&[
        "generate",
        "--family",
        "euclidean",
        "--n",
        "4",
        "--m",
        "5",
        "--seed",
        "2",
        "--out",
        p(&file),
    ]);
    assert_eq!(code(&o), 0);
    let o = mlufl(&["validate", "--instance", p(&file)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("valid"));
}

#[test]
fn bench_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "algo = \"general\"\nn = 5\nm = 5\ninstances = 2\ntrials = 4\nseed = 11\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = mlufl(&["bench", "--config", p(&cfg), "--out", p(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["trials.csv", "summary.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let trials = fs::read_to_string(a.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 4);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "n = 4\nm = 4\ntrials = 4\n").unwrap();
    let o = mlufl(&["bench", "--config", p(&cfg), "--trials", "2"]);
    assert_eq!(code(&o), 0);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert_eq!(row.split(',').nth(5), Some("2"));
}

#[test]
fn zero_trials_give_an_empty_report() {
    let o = mlufl(&["bench", "--n", "3", "--m", "3", "--trials", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn related_suite_has_no_violations() {
    let o = mlufl(&[
        "bench",
        "--algo",
        "related",
        "--family",
        "related",
        "--factor",
        "2",
        "--n",
        "6",
        "--m",
        "6",
        "--instances",
        "3",
        "--trials",
        "1",
        "--eps",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).trim_end().ends_with(",0"));
}

#[test]
fn injected_violation_exits_one() {
    let o = mlufl(&["bench", "--n", "3", "--m", "3", "--trials", "2", "--inject-violation"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&mlufl(&["bench", "--no-such-flag"])), 2);
    assert_eq!(code(&mlufl(&["bench", "--algo", "related", "--n", "3", "--m", "3"])), 2);
    assert_eq!(code(&mlufl(&["bench", "--alpha", "1.5"])), 2);
    assert_eq!(code(&mlufl(&["solve", "--instance", "/nonexistent.json"])), 2);
}

#[test]
fn round_writes_a_valid_solution() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("inst.json");
    assert_eq!(
        code(&mlufl(&[
            "generate",
            "--n",
            "4",
            "--m",
            "4",
            "--seed",
            "5",
            "--out",
            p(&file)
        ])),
        0
    );
    let out = dir.path().join("run");
    let o = mlufl(&[
        "round",
        "--instance",
        p(&file),
        "--seed",
        "1",
        "--out",
        p(&out),
        "--format",
        "md",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("| algo |"));
    let sol = out.join("solution-general.json");
    let o = mlufl(&["validate", "--instance", p(&file), "--solution", p(&sol)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("total"));
}

#[test]
fn invalid_metric_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    fs::write(
        &file,
        r#"{"n": 2, "m": 1, "f": [1, 1], "c": [[1], [1]], "d": [[0, 1, 9], [1, 0, 1], [9, 1, 0]]}"#,
    )
    .unwrap();
    assert_eq!(code(&mlufl(&["validate", "--instance", p(&file)])), 1);
}

#[test]
fn exact_matches_the_small_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("desk.json");
    fs::write(
        &file,
        r#"{"n": 2, "m": 2, "f": [5, 0], "c": [[0, 10], [10, 0]], "d": [[0, 1, 1], [1, 0, 2], [1, 2, 0]]}"#,
    )
    .unwrap();
    let o = mlufl(&["exact", "--instance", p(&file)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "problem,value,order\nmlufl,8,0 1\n");
}

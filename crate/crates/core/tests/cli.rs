use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reachset::audit::read_per_point_verdicts;
use reachset::verify::Verdict;

fn spec_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs/reapplicant.txt")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_audit")).args(args).output().unwrap()
}

fn fixture(dir: &Path) -> (String, String) {
    let data = dir.join("data.csv");
    std::fs::write(&data, "reapplicant,age_geq_60,y\n0,0,1\n0,1,0\n1,0,1\n1,1,0\n").unwrap();
    let model = dir.join("model.txt");
    std::fs::write(&model, "b=-1\nw=-2,2\n").unwrap();
    (data.display().to_string(), model.display().to_string())
}

fn without_timestamp(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("generated_at");
    v
}

#[test]
fn audit_writes_reports_and_reuses_saved_sets() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = fixture(dir.path());
    let spec = spec_path().display().to_string();
    let rdb = dir.path().join("sets.rdb").display().to_string();
    let out1 = dir.path().join("out1").display().to_string();
    let out2 = dir.path().join("out2").display().to_string();

    let first = run(&["--spec", &spec, "--data", &data, "--model-linear", &model, "--save-rdb", &rdb, "--out", &out1]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let stdout = String::from_utf8_lossy(&first.stdout);
    assert!(stdout.contains("denied=3"), "{stdout}");

    let second = run(&["--spec", &spec, "--data", &data, "--model-linear", &model, "--rdb", &rdb, "--out", &out2, "--workers", "2"]);
    assert!(second.status.success());
    assert!(String::from_utf8_lossy(&second.stdout).contains("solver_calls=0"));

    for f in ["per_point.csv", "rset_sizes.csv"] {
        let a = std::fs::read_to_string(Path::new(&out1).join(f)).unwrap();
        let b = std::fs::read_to_string(Path::new(&out2).join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let s1 = std::fs::read_to_string(Path::new(&out1).join("summary.json")).unwrap();
    let s2 = std::fs::read_to_string(Path::new(&out2).join("summary.json")).unwrap();
    let (mut v1, mut v2) = (without_timestamp(&s1), without_timestamp(&s2));
    // Solver and load counters legitimately differ between a fresh and a reused database.
    v1.as_object_mut().unwrap().remove("stats");
    v2.as_object_mut().unwrap().remove("stats");
    assert_eq!(v1, v2);

    let per_point = std::fs::read_to_string(Path::new(&out1).join("per_point.csv")).unwrap();
    let verdicts = read_per_point_verdicts(&per_point).unwrap();
    assert_eq!(verdicts, vec![(0, Verdict::Yes), (2, Verdict::No), (3, Verdict::No)]);

    let sizes = std::fs::read_to_string(Path::new(&out1).join("rset_sizes.csv")).unwrap();
    let size_col: Vec<u64> = csv::Reader::from_reader(sizes.as_bytes())
        .records()
        .map(|r| r.unwrap()[2].parse().unwrap())
        .collect();
    assert_eq!(size_col.len(), 3);
    assert!(size_col.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn usage_and_parse_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = fixture(dir.path());
    let spec = spec_path().display().to_string();

    assert_eq!(run(&["--spec", &spec, "--data", &data]).status.code(), Some(1));
    let both = run(&["--spec", &spec, "--data", &data, "--model-linear", &model, "--model-cmd", "cat"]);
    assert_eq!(both.status.code(), Some(1));
    assert_eq!(run(&["--spec", &spec, "--data", &data, "--model-linear", &model, "--max-time", "-1"]).status.code(), Some(1));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "reapplicant,age_geq_60\n0,7\n").unwrap();
    let out = run(&["--spec", &spec, "--data", bad.to_str().unwrap(), "--model-linear", &model]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = fixture(dir.path());
    let spec = spec_path().display().to_string();

    let crashed = run(&["--spec", &spec, "--data", &data, "--model-cmd", "exit 3"]);
    assert_eq!(crashed.status.code(), Some(2));

    // A database saved under a different spec is rejected.
    let other_spec = dir.path().join("other.txt");
    let text = std::fs::read_to_string(spec_path()).unwrap().replace("age_geq_60", "age_at_least_60");
    std::fs::write(&other_spec, text).unwrap();
    let rdb = dir.path().join("other.rdb");
    let other_data = dir.path().join("other.csv");
    std::fs::write(&other_data, "reapplicant,age_at_least_60\n0,0\n").unwrap();
    let saved = run(&[
        "--spec",
        other_spec.to_str().unwrap(),
        "--data",
        other_data.to_str().unwrap(),
        "--model-linear",
        &model,
        "--save-rdb",
        rdb.to_str().unwrap(),
    ]);
    assert!(saved.status.success(), "{}", String::from_utf8_lossy(&saved.stderr));
    let mismatch = run(&["--spec", &spec, "--data", &data, "--model-linear", &model, "--rdb", rdb.to_str().unwrap()]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("built for spec"));
}

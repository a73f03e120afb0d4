use std::fs;
use std::path::Path;
use std::process::Command;

fn llp(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_llp"))
        .current_dir(dir)
        .args(args)
        .env("LLP_WORKERS", "2")
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn config(variant: &str, predictor: &str, path: &str) -> String {
    format!(
        r#"{{"scenario":{{"kind":"alternating_linear","horizon":300,"seed":3}},
            "learner":{{"variant":"{variant}","beta":0.5}},
            "predictor":{{"kind":"{predictor}"}},
            "output":{{"path":"{path}","record_every":7}}}}"#
    )
}

#[test]
fn run_writes_trace_summary_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), config("llp", "none", "out/t.csv")).unwrap();
    let (code, stdout, stderr) = llp(dir.path(), &["run", "c.json", "--plot", "out/t.svg"]);
    assert_eq!(code, 0, "{stderr}");
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(summary["regret_within_bound"], true);
    let trace = fs::read_to_string(dir.path().join("out/t.csv")).unwrap();
    let mut lines = trace.lines();
    assert!(lines.next().unwrap().starts_with("t,f_value,cum_cost,regret,"));
    let rounds: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(rounds.first(), Some(&7));
    assert_eq!(rounds.last(), Some(&300));
    assert!(dir.path().join("out/t.summary.json").exists());
    assert!(fs::read_to_string(dir.path().join("out/t.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_key = config("llp", "none", "t.csv").replace("\"seed\":3", "\"seed\":3,\"colour\":1");
    let cases = [
        ("unknown_key.json", unknown_key),
        ("bad_kind.json", config("llp", "psychic", "t.csv")),
        ("bad_variant.json", config("llp9", "none", "t.csv")),
        ("not_json.json", "{".to_string()),
    ];
    for (name, text) in &cases {
        fs::write(dir.path().join(name), text).unwrap();
        let (code, _, stderr) = llp(dir.path(), &["run", name]);
        assert_eq!(code, 2, "{name}: {stderr}");
        assert!(stderr.contains("error"), "{name}: {stderr}");
    }
    assert_eq!(llp(dir.path(), &["run", "absent.json"]).0, 2);
    assert_eq!(llp(dir.path(), &["launch"]).0, 2);
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    fs::write(dir.path().join("c.json"), config("llp", "none", "blocker/t.csv")).unwrap();
    let (code, _, stderr) = llp(dir.path(), &["run", "c.json"]);
    assert_eq!(code, 3, "{stderr}");
}

#[test]
fn bench_prints_the_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), config("llp", "none", "t.csv")).unwrap();
    let (code, stdout, _) = llp(dir.path(), &["bench", "c.json"]);
    assert_eq!(code, 0);
    let b: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(b["feasible"], true);
    assert_eq!(b["x_star"].as_array().unwrap().len(), 1);
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn compare_writes_aligned_table() {
    let dir = tempfile::tempdir().unwrap();
    for (name, v, p) in [
        ("a", "llp", "none"),
        ("b", "llp", "perfect"),
        ("c", "greedy_baseline", "none"),
    ] {
        fs::write(
            dir.path().join(format!("{name}.json")),
            config(v, p, &format!("out/{name}.csv")),
        )
        .unwrap();
    }
    let (code, _, stderr) = llp(dir.path(), &["compare", "a.json", "b.json", "c.json"]);
    assert_eq!(code, 0, "{stderr}");
    let table = fs::read_to_string(dir.path().join("out/compare.csv")).unwrap();
    let header = table.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 7);
    assert!(header.contains("llp+perfect_avg_regret"));
    assert!(header.contains("greedy_baseline+none_violation"));
}

#[test]
fn compare_rejects_mismatched_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.json"), config("llp", "none", "a.csv")).unwrap();
    fs::write(
        dir.path().join("b.json"),
        config("llp", "none", "b.csv").replace("\"seed\":3", "\"seed\":4"),
    )
    .unwrap();
    let (code, _, stderr) = llp(dir.path(), &["compare", "a.json", "b.json"]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn sweep_rejects_empty_horizons() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = format!(
        r#"{{"base":{},"horizons":[],"betas":[0.5]}}"#,
        config("llp", "none", "s.csv")
    );
    fs::write(dir.path().join("s.json"), sweep).unwrap();
    let (code, _, stderr) = llp(dir.path(), &["sweep", "s.json"]);
    assert_eq!(code, 2, "{stderr}");
}

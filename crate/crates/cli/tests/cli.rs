use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../bench/fixtures")
        .join(name)
}

fn fpv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpv"))
        .args(args)
        .output()
        .unwrap()
}

fn instance_args(dir: &Path) -> Vec<String> {
    vec![
        "--domain".into(),
        dir.join("domain.pddl").display().to_string(),
        "--template".into(),
        dir.join("template.pddl").display().to_string(),
        "--hyps".into(),
        dir.join("hyps.dat").display().to_string(),
    ]
}

fn run(cmd: &str, dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd.to_string()];
    args.extend(instance_args(dir));
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    fpv(&refs)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn estimate_writes_one_table_per_goal() {
    let out = tempfile::tempdir().unwrap();
    let o = run(
        "estimate",
        &fixture("grid"),
        &["--output", out.path().to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for g in 0..2 {
        let text = fs::read_to_string(out.path().join(format!("goal_{g}.csv"))).unwrap();
        assert!(text.contains("\nfact_name,p_observed,p_not_observed\n"));
        assert_eq!(data_rows(&text).len(), 25);
        assert!(text.contains("# aggregation: empirical-union\n"));
    }
    let g1 = fs::read_to_string(out.path().join("goal_0.csv")).unwrap();
    assert!(g1.contains("(is-at c22),0.5,0.5\n"));
    assert!(g1.contains("(is-at c25),0,1\n"));
}

#[test]
fn aggregation_is_recorded() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().to_str().unwrap();
    let o = run(
        "estimate",
        &fixture("chain"),
        &["--aggregation", "noisy-or", "--output", dir],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.path().join("goal_0.csv")).unwrap();
    assert!(text.contains("# aggregation: noisy-or\n"));
}

#[test]
fn broken_domain_names_file_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let src = fixture("grid");
    for f in ["template.pddl", "hyps.dat"] {
        fs::copy(src.join(f), tmp.path().join(f)).unwrap();
    }
    let domain = fs::read_to_string(src.join("domain.pddl")).unwrap();
    fs::write(tmp.path().join("domain.pddl"), format!("{domain}\n\n)")).unwrap();
    let o = run("estimate", tmp.path(), &["--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("domain.pddl"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(fpv(&["estimate", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        run("estimate", &fixture("grid"), &["--n-samples", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(fpv(&["--help"]).status.code(), Some(0));
}

fn recognize_json(extra: &[&str]) -> serde_json::Value {
    let dir = fixture("grid");
    let mut args = vec![
        "--obs".to_string(),
        dir.join("obs.dat").display().to_string(),
        "--real".to_string(),
        dir.join("real_hyp.dat").display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = run("recognize", &dir, &refs);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn recognize_picks_the_true_goal() {
    let v = recognize_json(&[]);
    assert_eq!(v["true_goal"], 0);
    let steps = v["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 2);
    assert_eq!(steps[1]["recognized"], serde_json::json!([0]));
    assert!(steps[0].get("elapsed_ns").is_none());
}

#[test]
fn zero_fraction_keeps_every_goal() {
    let v = recognize_json(&["--at-lambda", "0"]);
    let steps = v["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0]["t"], 0);
    assert_eq!(steps[0]["recognized"], serde_json::json!([0, 1]));
}

#[test]
fn same_seed_same_bytes() {
    let dir = fixture("logistics");
    let obs = dir.join("obs.dat").display().to_string();
    let a = run("recognize", &dir, &["--obs", &obs, "--seed", "7"]);
    let b = run(
        "recognize",
        &dir,
        &["--obs", &obs, "--seed", "7", "--threads", "1"],
    );
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_writes_exact_tables_and_respects_the_cap() {
    let out = tempfile::tempdir().unwrap();
    let o = run(
        "oracle",
        &fixture("grid"),
        &["--output", out.path().to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.path().join("goal_1.csv")).unwrap();
    assert!(text.contains("# method: exact-optimal-plans\n"));
    assert!(text.contains("(is-at c10),0.5,0.5\n"));
    assert!(text.contains("(is-at c5),1,0\n"));

    let o = run(
        "oracle",
        &fixture("grid"),
        &["--max-states", "3", "--format", "json"],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bench_writes_report_and_precision_table() {
    let out = tempfile::tempdir().unwrap();
    let root = fixture("");
    let o = fpv(&[
        "bench",
        "--dataset",
        root.to_str().unwrap(),
        "--output",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.path().join("precision.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 12);
    assert_eq!(header[0], "approach");
    assert_eq!(header[11], "S");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["instances_total"], 3);
}

#[test]
fn generated_grid_can_be_recognized() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().join("g");
    let d = dir.to_str().unwrap();
    let o = fpv(&[
        "gen-grid", "--width", "6", "--height", "5", "--goals", "3", "--seed", "4", "--output", d,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let obs = dir.join("obs.dat").display().to_string();
    let o = run("recognize", &dir, &["--obs", &obs, "--format", "text"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("recognized="));
}

#[test]
fn single_plan_oracle_is_zero_or_one() {
    let out = tempfile::tempdir().unwrap();
    let o = run(
        "oracle",
        &fixture("chain"),
        &["--output", out.path().to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.path().join("goal_0.csv")).unwrap();
    for row in data_rows(&text) {
        let p = row.rsplit(',').nth(1).unwrap();
        assert!(p == "0" || p == "1", "{row}");
    }
}

#[test]
fn lambdas_outside_the_unit_interval_are_rejected() {
    let out = tempfile::tempdir().unwrap();
    let root = fixture("");
    let o = fpv(&[
        "bench",
        "--dataset",
        root.to_str().unwrap(),
        "--lambdas",
        "0.5,1.5",
        "--output",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

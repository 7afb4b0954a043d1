use std::io::Write;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_qcausal");

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("QCAUSAL_")) {
        cmd.env_remove(k);
    }
    let mut child = cmd.spawn().unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn identify(json: &str, extra: &[&str]) -> (i32, serde_json::Value) {
    let mut args = vec!["identify", "-"];
    args.extend_from_slice(extra);
    let out = run(&args, Some(json));
    let value = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap(), value)
}

fn parse_csv(text: &str) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    (headers, reader.records().map(Result::unwrap).collect())
}

#[test]
fn identify_exit_codes() {
    let (code, v) = identify(r#"{"dc": {"axis": [0, 0, 1], "angle": 0.785398}}"#, &[]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "DC");

    let (code, v) = identify(r#"{"cc_bell_diagonal": [1, 0, 0, 0]}"#, &[]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "CC");
    assert_eq!(v["rounds_used"], 2);

    let (code, v) = identify(r#"{"dc": {"axis": [0, 0, 1], "angle": 0}}"#, &[]);
    assert_eq!(code, 0);
    assert_eq!(v["criterion_value"], 0.0);

    let (code, _) = identify(r#"{"dc": {"axis": [0, 0, 1]}}"#, &[]);
    assert_eq!(code, 2);
    let (code, _) = identify("not json", &[]);
    assert_eq!(code, 2);
    let (code, _) = identify(r#"{"cc_bell_diagonal": [1, 1, 0, 0]}"#, &[]);
    assert_eq!(code, 2);
}

#[test]
fn identify_reads_files_and_reports_trail() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, r#"{"cc_bell_diagonal": [0, 0.5, 0.25, 0.25]}"#).unwrap();
    let out = run(&["identify", path.to_str().unwrap(), "--mode", "shots=5000", "--seed", "4"], None);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let trail = v["trail"].as_array().unwrap();
    assert_eq!(trail.len() as u64, v["query_count"].as_u64().unwrap());
    assert!(trail[0]["counts"].is_array());

    let missing = run(&["identify", dir.path().join("nope.json").to_str().unwrap()], None);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
}

#[test]
fn config_overrides_flags_and_env() {
    // The a = 0.5 edge state has criterion 2/3; a cutoff of 0.7 lets it pass as a channel.
    let json = r#"{"cc_bell_diagonal": [0, 0.5, 0.25, 0.25]}"#;
    assert_eq!(identify(json, &[]).0, 1);
    assert_eq!(identify(json, &["--epsilon", "0.7"]).0, 0);

    let mut cmd = Command::new(BIN);
    cmd.args(["identify", "-"]).env("QCAUSAL_EPSILON", "0.7").stdin(Stdio::piped()).stdout(Stdio::null());
    let mut child = cmd.spawn().unwrap();
    child.stdin.take().unwrap().write_all(json.as_bytes()).unwrap();
    assert_eq!(child.wait().unwrap().code(), Some(0));

    assert_eq!(identify(json, &["--epsilon", "-1"]).0, 2);
    assert_eq!(identify(json, &["--mode", "shots=0"]).0, 2);
    assert_eq!(identify(json, &["--mode", "lots"]).0, 2);
}

#[test]
fn sweep_writes_deterministic_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(
            &["sweep", "--points", "11", "--mode", "shots=2000", "--seed", "9", "--resamples", "100", "--out", p.to_str().unwrap()],
            None,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    assert!(text.lines().next().unwrap().starts_with("# qcausal sweep schema v"));
    let (headers, rows) = parse_csv(&text);
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["family", "param", "mechanism", "C11", "C22", "C33", "round", "criterion", "distance", "verdict", "N", "std_criterion", "std_distance"]
    );
    assert_eq!(rows.len(), 22);
    for r in &rows {
        assert_eq!(&r[10], "2000");
        assert!(!r[11].is_empty());
        assert_eq!(r[8].is_empty(), r[12].is_empty());
        assert_eq!(r[8].is_empty(), &r[6] == "1");
    }

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["points"], 11);
    assert_eq!(summary["direct_cause"]["rows"], 11);
}

#[test]
fn exact_sweep_matches_closed_forms() {
    let out = run(&["sweep", "--family", "edge"], None);
    assert!(out.status.success());
    let (_, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 202);
    let find = |param: &str, mech: &str| rows.iter().find(|r| &r[1] == param && &r[2] == mech).unwrap().clone();

    let dc = find("0.5", "DC");
    assert!(dc[7].parse::<f64>().unwrap() < 1e-9);
    assert_eq!(&dc[9], "DC");
    assert!(dc[11].is_empty() && &dc[10] == "0");

    let dc = find("0.03", "DC");
    let cc = find("0.03", "CC");
    assert_eq!((&dc[6], &cc[6]), ("2", "2"));
    assert!(dc[8].parse::<f64>().unwrap() < 1e-9);
    assert!(cc[8].parse::<f64>().unwrap() > 1.0 / 3f64.sqrt());
    assert_eq!(&cc[9], "CC");
}

#[test]
fn plane_sweep_json() {
    let out = run(&["sweep", "--family", "plane", "--denominator", "4", "--format", "json"], None);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["points"], 15);
    assert_eq!(v["summary"]["common_cause"]["correct"], 15);
    let records = v["records"].as_array().unwrap();
    assert!(records.iter().all(|r| r["verdict"] == r["mechanism"]));
}

#[test]
fn random_bench_and_tetra_check() {
    let a = run(&["random-bench", "--n", "40", "--seed", "3"], None);
    let b = run(&["random-bench", "--n", "40", "--seed", "3"], None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let m = &v["matrix"];
    let total: u64 = ["dc_as_dc", "dc_as_cc", "cc_as_dc", "cc_as_cc", "excluded"].iter().map(|k| m[k].as_u64().unwrap()).sum();
    assert_eq!(total, 40);
    assert_eq!(m["dc_as_cc"], 0);
    assert_eq!(m["cc_as_dc"], 0);

    let csv = run(&["random-bench", "--n", "10", "--format", "csv"], None);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().count(), 2);

    let t = run(&["tetra-check", "--samples", "500", "--seed", "1"], None);
    assert_eq!(t.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&t.stdout).unwrap();
    assert_eq!(v["direct_cause"]["violations"], 0);
    assert_eq!(v["common_cause"]["violations"], 0);
    assert_eq!(v["vertices_ok"], true);

    assert_eq!(run(&["tetra-check", "--samples", "0"], None).status.code(), Some(2));
    assert_eq!(run(&["tetra-check", "--format", "csv"], None).status.code(), Some(2));
    assert_eq!(run(&["bogus"], None).status.code(), Some(2));
}

use std::process::{Command, Output};

fn morava(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morava"))
        .args(args)
        .env_remove("MORAVA_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn congruence_at_two_passes() {
    let o = morava(&["pseries", "--p", "2", "--n", "1", "--k", "1", "--check-congruence"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("congruence: PASS"));
}

#[test]
fn zero_power_is_the_identity_series() {
    let o = morava(&["pseries", "--k", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let terms: Vec<&str> = s.lines().filter(|l| l.starts_with("y^")).collect();
    assert_eq!(terms, ["y^1: 1"]);
}

#[test]
fn height_two_leading_term() {
    let o = morava(&["pseries", "--p", "2", "--n", "2", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("leading reduced term: u^3*y^4 mod (2, v1, y^5)"));
}

#[test]
fn golden_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.txt");
    let o = morava(&["pseries", "--p", "3", "--k", "1", "--golden", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    let s = morava_core::golden::parse_yseries(&text).unwrap();
    assert_eq!(s.params().p, 3);
}

#[test]
fn usage_errors_exit_two() {
    let o = morava(&["verify", "prop-3.2", "--p", "2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("prop-3.2-n1"));
    assert_eq!(morava(&["verify", "lemma-2.4", "--group", "6"]).status.code(), Some(2));
    assert_eq!(morava(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(morava(&["pseries", "--p", "4"]).status.code(), Some(2));
}

#[test]
fn subgroup_restrictions_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = morava(&["verify", "lemma-2.6", "--group", "2,2", "--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["schema"], "report_v1");
    let rec = v["checks"].as_array().unwrap().iter().find(|c| c["check_id"] == "restriction-vanishing").unwrap();
    assert_eq!(rec["verdict"], "PASS");
    let checks = rec["witness"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["total_vanishes"] == true && c["reduced_vanishes"] == true));
}

#[test]
fn reports_repeat_with_cache_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |name: &str, jobs: &str| {
        let path = dir.path().join(name);
        let o = morava(&[
            "verify", "lemma-2.4", "--p", "3", "--n", "1", "--jobs", jobs,
            "--cache", cache.to_str().unwrap(), "--report", path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        std::fs::read(path).unwrap()
    };
    let a = run("a.json", "1");
    assert!(std::fs::read_dir(&cache).unwrap().count() > 0);
    let b = run("b.json", "2");
    assert_eq!(a, b);
}

#[test]
fn low_ydeg_warns() {
    let o = morava(&["euler", "--group", "4", "--ydeg", "3", "--total"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!(stdout(&o).contains("y1^1"));
}

#[test]
fn evidence_does_not_fail_the_run() {
    let o = morava(&["verify", "prop-3.3", "--p", "2", "--r", "1", "--n", "1", "--t", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("EVIDENCE"));
}

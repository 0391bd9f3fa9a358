use std::path::Path;
use std::process::{Command, Output};

fn taut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taut")).args(args).env_remove("TAUT_CACHE").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn structured(args: &[&str]) -> serde_json::Value {
    let mut a = vec!["--format", "structured"];
    a.extend_from_slice(args);
    let o = taut(&a);
    serde_json::from_slice(&o.stdout).expect("structured output is json")
}

#[test]
fn verify_two_point_genus_zero() {
    let o = taut(&["verify", "--g", "0", "--n", "2", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("negative part identically zero"));
    let doc = structured(&["verify", "--g", "0", "--n", "2", "--m", "1"]);
    let r = &doc["result"]["reports"][0];
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["pairings_checked"], 0);
}

#[test]
fn verify_genus_one() {
    let o = taut(&["verify", "--g", "1", "--n", "1", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = structured(&["verify", "--g", "1", "--n", "1", "--m", "1"]);
    assert_eq!(doc["ok"], true);
    assert_eq!(doc["result"]["reports"][0]["nonzero_pairings"], 0);
}

#[test]
fn verify_over_budget_is_refused_with_estimate() {
    let o = taut(&["verify", "--g", "0", "--n", "6", "--m", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("trees") && e.contains("grid points"), "{e}");
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(taut(&["verify", "--g", "0"]).status.code(), Some(2));
    assert_eq!(taut(&["psi", "--g", "1", "--d", "1,0"]).status.code(), Some(2));
    assert_eq!(taut(&["dr", "--g", "0", "--parts", "1,1"]).status.code(), Some(2));
    assert_eq!(taut(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn enumerate_counts() {
    for (g, n, m, count) in [("0", "3", "1", 5), ("1", "1", "1", 2), ("0", "2", "1", 2)] {
        let doc = structured(&["enumerate", "--g", g, "--n", n, "--m", m]);
        assert_eq!(doc["result"]["count"], count, "({g},{n},{m})");
        assert_eq!(doc["ok"], true);
    }
}

#[test]
fn small_queries() {
    assert_eq!(stdout(&taut(&["psi", "--g", "0", "--d", "0,0,0"])), "1\n");
    assert_eq!(stdout(&taut(&["psi", "--g", "1", "--d", "1"])), "1/24\n");
    assert_eq!(stdout(&taut(&["dr", "--g", "0", "--parts", "2,-1,-1"])), "1·[fundamental]\n");
}

#[test]
fn audit_and_identities_pass() {
    let o = taut(&["audit", "--g", "1", "--n", "2", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = taut(&["identities", "--seed", "7", "--cases", "40"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = taut(&["mumford", "--dim-budget", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

fn run_with_cache(cache: &Path, out: &Path) -> Output {
    taut(&[
        "--cache",
        cache.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "structured",
        "verify",
        "--g",
        "1",
        "--n",
        "2",
        "--m",
        "1",
    ])
}

#[test]
fn structured_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("psi.cache");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let first = run_with_cache(&cache, &a);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let before = std::fs::read_to_string(&cache).unwrap();
    let second = run_with_cache(&cache, &b);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(&a).unwrap(), first.stdout);
    // a warm cache keeps every earlier entry
    let after = std::fs::read_to_string(&cache).unwrap();
    for line in before.lines() {
        assert!(after.lines().any(|l| l == line), "lost {line}");
    }
}

#[test]
fn corrupted_cache_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("psi.cache");
    let c = cache.to_str().unwrap();
    assert_eq!(taut(&["--cache", c, "psi", "--g", "1", "--d", "2,1,0"]).status.code(), Some(0));
    let text = std::fs::read_to_string(&cache).unwrap();
    std::fs::write(&cache, text.replacen("1/24", "1/25", 1)).unwrap();
    let o = taut(&["--cache", c, "verify", "--g", "0", "--n", "2", "--m", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cache schema error at line 2"), "{}", stderr(&o));

    std::fs::write(&cache, "psi-cache v0\n").unwrap();
    let o = taut(&["--cache", c, "psi", "--g", "0", "--d", "0,0,0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("header"));
}

#[test]
fn env_mirrors_flags() {
    let o = Command::new(env!("CARGO_BIN_EXE_taut"))
        .args(["psi", "--d", "1"])
        .env("TAUT_G", "1")
        .env("TAUT_FORMAT", "structured")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["result"]["value"], "1/24");
}

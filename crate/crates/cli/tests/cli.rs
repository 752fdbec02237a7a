use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_specforge");

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/assets")
}

/// A writable copy of the A/B fixture.
fn ab_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(assets().join("ab")).unwrap() {
        let path = entry.unwrap().path();
        fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SPECFORGE_WORKERS").output().unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap_or_else(|e| {
        panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_input_is_a_parse_error() {
    let dir = ab_copy();
    let config = dir.path().join("run.toml");
    let out = run(&["compute", "--config", s(&config), "--pubs", "/no/such/file.jsonl", "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "ParseError");
    assert_eq!(err["module"], "corpus");
    assert!(err["message"].as_str().unwrap().contains("/no/such/file.jsonl"));
}

#[test]
fn validate_reports_violations() {
    let dir = ab_copy();
    let config = dir.path().join("run.toml");
    let clean = run(&["validate", "--config", s(&config)]);
    assert_eq!(clean.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&clean.stdout).unwrap();
    assert_eq!(summary["total_publications"], 20);

    let pubs = dir.path().join("publications.jsonl");
    let text = fs::read_to_string(&pubs).unwrap().replace("\"UA\"", "\"UZ\"");
    fs::write(&pubs, text).unwrap();
    let dirty = run(&["validate", "--config", s(&config)]);
    assert_eq!(dirty.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_slice(&dirty.stdout).unwrap();
    assert_eq!(summary["violations"]["unknown_org_id"], 10);
    assert_eq!(stderr_json(&dirty)["error"], "ValidationError");

    let compute = run(&["compute", "--config", s(&config), "--out", s(&dir.path().join("o"))]);
    assert_eq!(compute.status.code(), Some(1));
    assert_eq!(stderr_json(&compute)["error"], "ReferentialError");
}

#[test]
fn usage_errors_and_help() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "UsageError");

    let out = run(&["compute", "--aii-mode", "sideways"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("synth"));

    let dir = ab_copy();
    let out = run(&["compute", "--config", s(&dir.path().join("run.toml"))]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "UsageError");
}

#[test]
fn bad_config_values_exit_two() {
    let dir = ab_copy();
    let config = dir.path().join("run.toml");
    let out = run(&["all", "--config", s(&config), "--high-cut", "-60", "--low-cut", "50", "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "ConfigError");
}

#[test]
fn all_matches_golden_tables() {
    let dir = ab_copy();
    let out_dir = dir.path().join("out");
    let out = run(&["all", "--config", s(&dir.path().join("run.toml")), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("radar")));
    for entry in fs::read_dir(assets().join("golden")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap();
        assert_eq!(
            fs::read_to_string(out_dir.join("tables").join(name)).unwrap(),
            fs::read_to_string(&path).unwrap(),
            "{}",
            name.to_string_lossy()
        );
    }
    assert_eq!(
        fs::read_to_string(out_dir.join("maps/region/X.csv")).unwrap(),
        "territory_code,ss,ss_per_inhabitant,ssi\nA,8,0.00002,43.82022471910113\nB,2,0.000008,-72.41379310344827\n"
    );
    assert!(out_dir.join("run_manifest.json").is_file());
}

#[test]
fn subcommands_compose_like_all() {
    let dir = ab_copy();
    let config = dir.path().join("run.toml");
    let whole = dir.path().join("whole");
    let staged = dir.path().join("staged");
    assert!(run(&["all", "--config", s(&config), "--out", s(&whole)]).status.success());
    for cmd in ["compute", "rank", "extremes", "map"] {
        let out = run(&[cmd, "--config", s(&config), "--out", s(&staged)]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let radar = run(&["radar", "--config", s(&config), "--out", s(&staged)]);
    assert!(radar.status.success());

    let a = tree(&whole);
    let b = tree(&staged);
    let staged_files: Vec<_> = b.keys().collect();
    // the region summary table needs the full corpus, so only `all` writes it
    let mut expected: Vec<_> = a
        .keys()
        .filter(|p| !p.ends_with("run_manifest.json") && !p.ends_with("table1_regions.csv"))
        .collect();
    expected.sort();
    assert_eq!(staged_files, expected);
    for (path, bytes) in &b {
        assert!(bytes == &a[path], "{} differs", path.display());
    }
}

#[test]
fn manifest_config_replays() {
    let dir = ab_copy();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert!(run(&["all", "--config", s(&dir.path().join("run.toml")), "--top-k", "2", "--out", s(&first)]).status.success());
    let out = run(&["all", "--config", s(&first.join("run_manifest.json")), "--out", s(&second)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(tree(&first), tree(&second));
    let table = fs::read_to_string(second.join("tables/table2_region_top_scs.csv")).unwrap();
    assert!(table.starts_with("region,sc_1,ssi_1,sc_2,ssi_2\n"));
}

#[test]
fn workers_env_is_honoured() {
    let dir = ab_copy();
    let config = dir.path().join("run.toml");
    let bad = Command::new(BIN)
        .args(["compute", "--config", s(&config), "--out", s(&dir.path().join("o"))])
        .env("SPECFORGE_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let good = Command::new(BIN)
        .args(["compute", "--config", s(&config), "--out", s(&dir.path().join("o"))])
        .env("SPECFORGE_WORKERS", "3")
        .output()
        .unwrap();
    assert!(good.status.success());
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "n_publications = 500\nn_territories = 10\nn_scs = 8\n").unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        let r = run(&["synth", "--synth-spec", s(&spec), "--seed", seed, "--out", s(out)]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(tree(&a), tree(&b));
    assert_ne!(tree(&a), tree(&c));
    let truth: serde_json::Value = serde_json::from_slice(&fs::read(a.join("ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["spec"]["seed"], 5);

    fs::write(&spec, "n_publications = 3\nn_territories = 10\n").unwrap();
    let r = run(&["synth", "--synth-spec", s(&spec), "--out", s(&dir.path().join("d"))]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(stderr_json(&r)["error"], "SpecError");
}

use std::fs;
use std::path::{Path, PathBuf};

use towerlab_core::lab::{
    complex_to_json, exit_code, load_complex, load_tower, parse_complex, run, tower_to_json, Diagnostics, RunConfig,
    EXIT_INPUT, EXIT_OK, EXIT_VIOLATION,
};
use towerlab_core::{builtin_complex, BuiltinComplex};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn config(json: &str, dir: &Path) -> RunConfig {
    RunConfig::from_json_str(json, dir, &mut Diagnostics::strict()).unwrap()
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn torus_file_matches_builtin() {
    let c = load_complex(&fixture("torus2.json"), &mut Diagnostics::strict()).unwrap();
    let b = builtin_complex(BuiltinComplex::Torus { n: 2 }).unwrap();
    assert_eq!(c.ranks(), b.ranks());
    assert_eq!(c.boundaries(), b.boundaries());

    let text = serde_json::to_string(&complex_to_json(&b)).unwrap();
    let back = parse_complex(&text, &mut Diagnostics::strict()).unwrap();
    assert_eq!(back.boundaries(), b.boundaries());
}

#[test]
fn tower_file_round_trip() {
    let t = load_tower(&fixture("square_tower.json"), &mut Diagnostics::strict()).unwrap();
    assert_eq!(t.orders(), vec![4, 16, 64]);
    let again = tower_to_json(&t);
    assert_eq!(tower_to_json(&towerlab_core::lab::parse_tower(&again.to_string(), &mut Diagnostics::strict()).unwrap()), again);
}

#[test]
fn corrupted_complex_is_a_violation() {
    let c = load_complex(&fixture("torus2_corrupted.json"), &mut Diagnostics::strict()).unwrap();
    assert_eq!(c.validate().unwrap().unwrap().degree, 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        &format!(
            r#"{{"complex": {{"file": {:?}}}, "tower": {{"file": {:?}}}, "analyses": ["betti"]}}"#,
            fixture("torus2_corrupted.json"),
            fixture("square_tower.json")
        ),
        dir.path(),
    );
    let out = run(&cfg, &mut Diagnostics::strict(), Some(&dir.path().join("out")));
    assert_eq!(exit_code(&out), EXIT_VIOLATION);
    let out = out.unwrap();
    assert!(out.violations[0].contains("chain condition"), "{:?}", out.violations);
    assert!(dir.path().join("out/report.json").exists());
    assert!(!dir.path().join("out/betti.csv").exists());
}

#[test]
fn malformed_entry_is_named() {
    let err = load_complex(&fixture("torus2_malformed.json"), &mut Diagnostics::lax()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("boundaries.1[1][0][0]"), "{msg}");
    assert!(msg.contains("torus2_malformed.json"), "{msg}");
}

#[test]
fn irregular_level_is_named() {
    let err = load_tower(&fixture("irregular_tower.json"), &mut Diagnostics::lax()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("levels[1]"), "{msg}");
    assert!(msg.contains("transitive"), "{msg}");
}

#[test]
fn unknown_keys_strict_and_lax() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"complex": {"builtin": "circle", "colour": 1}, "analyses": ["betti"], "extra": true}"#;
    assert!(RunConfig::from_json_str(text, dir.path(), &mut Diagnostics::strict()).is_err());
    let mut lax = Diagnostics::lax();
    RunConfig::from_json_str(text, dir.path(), &mut lax).unwrap();
    assert_eq!(lax.warnings.len(), 2, "{:?}", lax.warnings);

    let complex = fs::read_to_string(fixture("torus2.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&complex).unwrap();
    v["note"] = "hand written".into();
    assert!(parse_complex(&v.to_string(), &mut Diagnostics::strict()).is_err());
    parse_complex(&v.to_string(), &mut Diagnostics::lax()).unwrap();

    v["format"] = 2.into();
    assert!(parse_complex(&v.to_string(), &mut Diagnostics::lax()).is_err());
}

#[test]
fn bad_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(r#"{"complex": {"builtin": "torus:2"}, "degrees": [7], "analyses": ["betti"]}"#, dir.path());
    assert_eq!(exit_code(&run(&cfg, &mut Diagnostics::strict(), Some(dir.path()))), EXIT_INPUT);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        r#"{"complex": {"builtin": "torus:2"}, "tower": {"family": "reduction", "p": 2, "depth": 3},
            "primes": [2, 3], "analyses": ["betti", "spectrum", "converge", "fkdet", "modp", "padic"], "kmax": 3}"#,
        dir.path(),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = run(&cfg, &mut Diagnostics::strict(), Some(&a)).unwrap();
    let rb = run(&cfg, &mut Diagnostics::strict(), Some(&b)).unwrap();
    assert_eq!(ra.exit_code(), EXIT_OK, "{:?}", ra.violations);
    assert_eq!(ra.files.len(), rb.files.len());
    let (fa, fb) = (read_dir(&a), read_dir(&b));
    assert!(fa.iter().any(|(n, _)| n == "spectrum.csv"));
    assert!(fa.iter().all(|(n, _)| !n.ends_with(".tmp")));
    assert_eq!(fa, fb);
}

#[test]
fn relative_paths_follow_the_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("torus2.json"), dir.path().join("t.json")).unwrap();
    fs::copy(fixture("square_tower.json"), dir.path().join("s.json")).unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(
        &path,
        r#"{"complex": {"file": "t.json"}, "tower": {"file": "s.json"}, "analyses": ["betti"], "out": "res"}"#,
    )
    .unwrap();
    let cfg = RunConfig::from_path(&path, &mut Diagnostics::strict()).unwrap();
    let out = run(&cfg, &mut Diagnostics::strict(), None).unwrap();
    assert_eq!(out.exit_code(), EXIT_OK);
    let betti = fs::read_to_string(dir.path().join("res/betti.csv")).unwrap();
    assert!(betti.lines().count() > 1);
}

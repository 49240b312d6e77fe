use std::path::Path;
use std::process::{Command, Output};

use statedesign::registers::{basis_state, ghz_state, max_entangled_state, Partition, QuditRegister, Region};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_statedesign"));
    cmd.env_remove("STATEDESIGN_JOBS");
    cmd
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn malformed_json_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"id\": \"x\",\n  \"t\": [2,\n}").unwrap();
    let out = run(&["run", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn unknown_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"id": "x", "t": [2], "seed": 1, "method": {"kind": "exact"}, "colour": "red",
        "ensemble": {"variant": "CohOrbit", "state": {"basis": {"index": 0}}, "register": [2, 2]}}"#;
    std::fs::write(dir.path().join("c.json"), config).unwrap();
    let out = run(&["run", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));
}

#[test]
fn size_cap_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"id": "big", "t": [2], "seed": 1, "method": {"kind": "exact"},
        "ensemble": {"variant": "GhzOrbit", "register": [2, 2, 2, 2, 2, 2, 2], "partition": [[0, 1], [2, 3], [4, 5, 6]], "level": 2}}"#;
    std::fs::write(dir.path().join("cfg.json"), config).unwrap();
    let out = run(&["run", "cfg.json", "-o", "big.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!dir.path().join("big.csv").exists());
    assert!(!dir.path().join("big.json").exists());
}

#[test]
fn preset_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["mc-convergence", "markov-gluing", "coherence-orbit"] {
        let a = run(&["run", "--preset", preset, "-o", "a.csv", "--jobs", "1"], dir.path());
        let b = run(&["run", "--preset", preset, "-o", "b.csv", "--jobs", "4"], dir.path());
        assert!(a.status.success() && b.status.success(), "{}", stderr(&a));
        let a = std::fs::read(dir.path().join("a.csv")).unwrap();
        let b = std::fs::read(dir.path().join("b.csv")).unwrap();
        assert_eq!(a, b, "{preset}");
        assert!(!a.contains(&b'\r'));
    }
    let c = run(&["run", "--preset", "mc-convergence", "-o", "c.csv", "--seed", "8"], dir.path());
    assert!(c.status.success());
    assert_ne!(std::fs::read(dir.path().join("a.csv")).unwrap(), std::fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn csv_header_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "--preset", "coherence-orbit", "-o", "coh.csv"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("coh.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment_id,variant,n_sites,t,sweep_param,sweep_value,error,method,samples,dispersion,N2_nats,C2_nats,\
         bound_thm1,bound_thm2,bound_thm3,bound_lem4,residual_scale,seed"
    );
    let sweep: Vec<&str> = lines.map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(sweep, ["1", "2", "4", "8"]);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("coh.json")).unwrap()).unwrap();
    assert_eq!(sidecar["points"].as_array().unwrap().len(), 4);
    assert!(sidecar["points"][0]["report"]["seconds"].is_number());
    assert!(sidecar["version"].is_string());
}

#[test]
fn presets_are_listed() {
    let out = run(&["presets"], Path::new("."));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["bipartite-tightness", "ghz-scaling", "markov-gluing", "coherence-orbit", "ec-orbit", "mc-convergence"] {
        assert!(text.contains(name), "{name}");
    }
    assert_eq!(run(&["presets", "nope"], Path::new(".")).status.code(), Some(1));
}

fn entropy_rows(state: &statedesign::registers::PureState, args: &[&str]) -> Vec<(String, String, f64)> {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), state.to_json().unwrap()).unwrap();
    let mut full = vec!["entropy", "s.json"];
    full.extend_from_slice(args);
    let out = run(&full, dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn entropy_report_examples() {
    let ln2 = 2f64.ln();
    let two = QuditRegister::qubits(2).unwrap();
    let (a, b) = (Region::new(vec![0]).unwrap(), Region::new(vec![1]).unwrap());
    let bell = max_entangled_state(&two, (&a, &b), 2).unwrap();
    let rows = entropy_rows(&bell, &["--cut", "0"]);
    assert_eq!(rows[0].0, "N2");
    assert!((rows[0].2 - ln2).abs() < 1e-12);
    assert!(rows.iter().any(|r| r.0 == "M2"));

    let zero = basis_state(&two, 0).unwrap();
    let rows = entropy_rows(&zero, &["--cut", "0", "--cut", "1"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.2 == 0.0));

    let three = QuditRegister::qubits(3).unwrap();
    let p = Partition::from_sites(vec![vec![0], vec![1], vec![2]], &three).unwrap();
    let ghz = ghz_state(&three, &p, 2).unwrap();
    let rows = entropy_rows(&ghz, &["--cut", "0", "--magic", "off"]);
    assert!((rows[0].2 - ln2).abs() < 1e-12);
    assert!(!rows.iter().any(|r| r.0 == "M2"));
}

#[test]
fn entropy_rejects_magic_on_qutrits() {
    let dir = tempfile::tempdir().unwrap();
    let state = basis_state(&QuditRegister::new(vec![3]).unwrap(), 0).unwrap();
    std::fs::write(dir.path().join("q.json"), state.to_json().unwrap()).unwrap();
    assert_eq!(run(&["entropy", "q.json", "--magic", "on"], dir.path()).status.code(), Some(1));
    assert!(run(&["entropy", "q.json"], dir.path()).status.success());
    assert_eq!(run(&["entropy", "missing.json"], dir.path()).status.code(), Some(1));
}

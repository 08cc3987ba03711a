use std::path::PathBuf;

use petz_core::harness::*;
use serde_json::Value;

fn shipped(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn base(patch: &str) -> String {
    let mut v: Value = serde_json::from_str(
        r#"{"trials": 10, "dims": [2], "specs": ["pinching"], "functions": ["neg-log"],
            "alpha_grid": [0.5], "beta_grid": [0.5], "seed": 3}"#,
    )
    .unwrap();
    let p: Value = serde_json::from_str(patch).unwrap();
    for (k, x) in p.as_object().unwrap() {
        v[k] = x.clone();
    }
    v.to_string()
}

#[test]
fn smoke_config_passes() {
    let out = run_verify(&shipped("smoke.json")).unwrap();
    assert_eq!(out.exit_code, EXIT_PASS, "{}", out.summary);
    let report: Value = serde_json::from_slice(&out.output).unwrap();
    assert_eq!(report["format"], REPORT_FORMAT);
    let trials = report["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 10);
    for (i, t) in trials.iter().enumerate() {
        assert_eq!(t["trial_index"], i);
        assert_eq!(t["config_hash"], report["config_hash"]);
        assert!(t.get("wall_time").is_none());
        assert!(t["passed"].as_bool().unwrap());
    }
}

#[test]
fn invalid_configs_are_rejected() {
    for patch in [
        r#"{"beta_grid": [1.5]}"#,
        r#"{"beta_grid": [0.0]}"#,
        r#"{"alpha_grid": [1.0]}"#,
        r#"{"trials": 0}"#,
        r#"{"dims": [0]}"#,
        r#"{"functions": ["neg-cosh"]}"#,
        r#"{"specs": ["diagonal-ish"]}"#,
        r#"{"tolerance": -1.0}"#,
        r#"{"unexpected": 1}"#,
    ] {
        assert!(ExperimentConfig::from_json(&base(patch)).is_err(), "{patch} accepted");
    }
    assert!(ExperimentConfig::from_json(r#"{"trials": 3}"#).is_err());
    assert!(ExperimentConfig::from_json(&base("{}")).is_ok());
}

#[test]
fn seed_changes_samples_but_not_layout() {
    let a = ExperimentConfig::from_json(&base(r#"{"seed": 1}"#)).unwrap();
    let b = ExperimentConfig::from_json(&base(r#"{"seed": 2}"#)).unwrap();
    assert_ne!(a.hash(), b.hash());
    let (ra, rb) = (run_verify(&a).unwrap(), run_verify(&b).unwrap());
    assert_ne!(ra.output, rb.output);
    assert_eq!(ra.output, run_verify(&a).unwrap().output);
    // the output path is not part of the identity of a run
    let c = ExperimentConfig::from_json(&base(r#"{"seed": 1, "output_path": "x.json"}"#)).unwrap();
    assert_eq!(a.hash(), c.hash());
}

#[test]
fn sweep_config_shrinks_to_exact() {
    let out = run_sweep(&shipped("sweep.json")).unwrap();
    assert_eq!(out.exit_code, EXIT_PASS, "{}", out.summary);
    let text = String::from_utf8(out.output).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SWEEP_HEADER));
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect::<Vec<f64>>()).collect();
    assert_eq!(rows.len(), 7 * 3);
    // per trial: ε descending, the last row exact, the gap shrinking with ε
    for trial in rows.chunks(7) {
        let exact = &trial[6];
        assert!(exact[0].abs() < EXACT_GAP_TOL && exact[1] < EXACT_DISC_TOL);
        assert!(trial[0][0] > trial[4][0]);
    }
    assert!(run_sweep(&ExperimentConfig::from_json(&base("{}")).unwrap()).is_err());
}

#[test]
fn reconstruct_marks_affine_parts_unsupported() {
    let out = run_reconstruct(&shipped("reconstruct.json")).unwrap();
    assert_eq!(out.exit_code, EXIT_PASS, "{}", out.summary);
    let report: Value = serde_json::from_slice(&out.output).unwrap();
    assert_eq!(report["summary"]["unsupported"], 5);
    assert!(report["summary"]["max_error"].as_f64().unwrap() <= RECONSTRUCT_TOL);
}

#[test]
fn explicit_spec_applies_to_matching_dims() {
    let c = ExperimentConfig::from_json(&base(
        r#"{"dims": [3, 4], "specs": [{"dim": 4, "blocks": [[2, 1], [1, 2]], "basis": "identity"}], "trials": 4}"#,
    ))
    .unwrap();
    assert!(c.cases().unwrap().iter().all(|case| case.dim == 4));
    assert_eq!(run_verify(&c).unwrap().exit_code, EXIT_PASS);
}

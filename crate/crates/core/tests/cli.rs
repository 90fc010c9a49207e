use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn verify(path: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify"))
        .arg("--scenario")
        .arg(path)
        .args(args)
        .output()
        .unwrap()
}

fn machine(path: &Path, args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--format", "machine"];
    full.extend_from_slice(args);
    let out = verify(path, &full);
    let json = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (json, out.status.code().unwrap())
}

fn outcome<'a>(report: &'a Value, check: &str, equation: &str) -> &'a Value {
    report["suites"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["checks"].as_array().unwrap())
        .filter(|c| c["check"] == check)
        .flat_map(|c| c["results"].as_array().unwrap())
        .find(|r| r["equation"] == equation)
        .unwrap_or_else(|| panic!("no {check}/{equation} in {report:#}"))
}

fn write_scenario(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("s.scn");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn bundled_volume_scenario_passes_every_suite() {
    let out = verify(&scenario("r3_volume.scn"), &["--suite", "all", "--samples", "10"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    for suite in ["exterior-laws", "observables-axioms", "crossed-module", "prequant-morphism", "quasi-iso"] {
        assert!(text.contains(&format!("[{suite}] pass")), "{text}");
    }
    assert!(text.ends_with("overall: pass\n"));
}

#[test]
fn machine_report_echoes_settings() {
    let (r, code) = machine(
        &scenario("r3_volume.scn"),
        &["--suite", "observables-axioms", "--samples", "7", "--seed", "3", "--degree-bound", "2"],
    );
    assert_eq!(code, 0);
    assert_eq!(r["scenario"], "r3-volume");
    assert_eq!(r["seed"], 3);
    assert_eq!(r["samples"], 7);
    assert_eq!(r["degree_bound"], 2);
    assert_eq!(r["status"], "pass");
    assert_eq!(outcome(&r, "observables", "jacobiator")["tuples"], 7);
}

#[test]
fn dropping_the_pairing_from_phi2_breaks_the_bracket_equations() {
    let (r, code) = machine(
        &scenario("r3_volume.scn"),
        &["--suite", "prequant-morphism", "--perturb", "phi2-drop-pairing", "--samples", "10"],
    );
    assert_eq!(code, 1);
    assert_eq!(r["perturbation"], "phi2-drop-pairing");
    let high = outcome(&r, "lie2-morphism", "bracket-high");
    assert_eq!(high["status"], "fail");
    assert_eq!(high["witness"].as_array().unwrap().len(), 2);
    assert_eq!(outcome(&r, "lie2-morphism", "coherence")["status"], "pass");
}

#[test]
fn dropping_chi_from_phi2_breaks_coherence() {
    let (r, code) = machine(
        &scenario("r3_volume.scn"),
        &["--suite", "prequant-morphism", "--perturb", "phi2-drop-chi", "--samples", "10"],
    );
    assert_eq!(code, 1);
    let coherence = outcome(&r, "lie2-morphism", "coherence");
    assert_eq!(coherence["status"], "fail");
    assert!(!coherence["witness"].as_array().unwrap().is_empty());
}

#[test]
fn zero_phi2_breaks_bracket_high() {
    let (r, code) = machine(
        &scenario("r3_volume.scn"),
        &["--suite", "prequant-morphism", "--perturb", "phi2-zero", "--samples", "10"],
    );
    assert_eq!(code, 1);
    assert_eq!(outcome(&r, "lie2-morphism", "bracket-high")["status"], "fail");
    assert_eq!(outcome(&r, "lie2-morphism", "chain-map")["status"], "pass");
}

#[test]
fn doubled_l3_breaks_only_the_jacobiator() {
    let (r, code) = machine(
        &scenario("r3_volume.scn"),
        &["--suite", "observables-axioms", "--perturb", "l3-double", "--samples", "10"],
    );
    assert_eq!(code, 1);
    assert_eq!(outcome(&r, "observables", "jacobiator")["status"], "fail");
    assert_eq!(outcome(&r, "observables", "l3-coherence")["status"], "pass");
}

#[test]
fn theta_perturbations_on_the_gerbe_scenarios() {
    let (r, code) = machine(
        &scenario("r3_line_gerbe.scn"),
        &["--suite", "crossed-module", "--perturb", "drop-theta-action", "--samples", "10"],
    );
    assert_eq!(code, 1);
    assert_eq!(outcome(&r, "crossed-module", "A2")["status"], "fail");

    let (r, code) = machine(
        &scenario("r3_plane_gerbe.scn"),
        &["--suite", "crossed-module", "--perturb", "drop-theta-sections", "--samples", "10"],
    );
    assert_eq!(code, 1);
    assert_eq!(outcome(&r, "crossed-module", "A1")["status"], "fail");
}

#[test]
fn surrogate_mode_without_chi_is_inconclusive_for_prequant_suites() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        &dir,
        "name = \"sections-only\"\nbase_vars = [\"x\", \"y\", \"z\"]\nfiber_vars = [\"u\"]\n\
         omega = \"dx^dy^dz\"\ntheta = \"x*dy^dz + du^dx\"\ndegree_bound = 1\nsamples = 5\n",
    );
    let (r, code) = machine(&path, &["--suite", "crossed-module"]);
    assert_eq!(code, 0, "{r:#}");
    let (r, code) = machine(&path, &["--suite", "quasi-iso"]);
    assert_eq!(code, 3);
    assert_eq!(r["status"], "inconclusive");
    assert_eq!(outcome(&r, "quasi-iso", "all")["reason"], "scenario has no chi");
}

#[test]
fn zero_samples_is_inconclusive() {
    let out = verify(&scenario("r3_volume.scn"), &["--suite", "observables-axioms", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("inconclusive"));
}

#[test]
fn inconsistent_scenario_exits_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        &dir,
        "name = \"bad\"\nbase_vars = [\"x\", \"y\", \"z\"]\nomega = \"dx^dy^dz\"\nchi = \"y*dx^dz + x*dy^dz\"\n",
    );
    let out = verify(&path, &["--suite", "all"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("d chi != omega"), "{err}");
    assert!(err.contains("residual"), "{err}");
}

#[test]
fn syntax_errors_report_positions() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(&dir, "name = \"bad\"\nbase_vars = [\"x\", \"y\", \"z\"]\nomega = \"dx^dy^dz +\"\n");
    let out = verify(&path, &["--suite", "all"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");

    let path = write_scenario(&dir, "name = \"bad\"\nbase_vars = [\"x\"]\nunknown_key = 1\n");
    let err = String::from_utf8(verify(&path, &["--suite", "all"]).stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    let out = verify(&scenario("r3_volume.scn"), &["--suite", "everything"]);
    assert_eq!(out.status.code(), Some(2));
    let out = verify(Path::new("/nonexistent/scenario.scn"), &["--suite", "all"]);
    assert_eq!(out.status.code(), Some(2));
    let out = verify(&scenario("r3_volume.scn"), &["--suite", "all", "--perturb", "nothing"]);
    assert_eq!(out.status.code(), Some(2));
}

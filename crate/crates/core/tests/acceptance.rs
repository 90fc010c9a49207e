//! Exit criteria. Every check is exact; each test prints one status line.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use plectic_core::exterior::{ext_d, interior, Chart, DifferentialForm, VectorField};
use plectic_core::gerbe_sections::{build_section_crossed_module, SectionPerturbation, SectionSampler, SurrogateBundle};
use plectic_core::laws::{check_exterior_laws, EXTERIOR_LAWS};
use plectic_core::lie2::{
    check_crossed_module, check_lie2_axioms, check_morphism, GradedElement, ScaledL3, EQ_A1, EQ_A2,
    EQ_ETA_VALIDITY, EQ_JACOBIATOR, EQ_JACOBI_G, EQ_JACOBI_H, EQ_KERNEL_CLOSED, EQ_KERNEL_INJECTIVE,
    EQ_KERNEL_SURJECTIVE, LIE2_AXIOMS, MORPHISM_EQUATIONS,
};
use plectic_core::observables::{build_observables, ham_element, ObservableSampler};
use plectic_core::plectic::{solve_hamiltonian, PlecticStructure};
use plectic_core::polyring::{int, Polynomial};
use plectic_core::prequant::{
    build_prequant_morphism, check_round_trip, phi1, phi2, probe_quasi_isomorphism, ExactScenario, EQ_ROUND_TRIP,
};
use plectic_core::random::{numbered_chart, random_form, rng_from_seed, MAX_DEGREE};
use plectic_core::report::{CheckReport, Outcome};
use plectic_core::syntax::{parse_form, parse_polynomial, parse_vector_field};

const TUPLES: usize = 50;
const LAW_SAMPLES: usize = 1000;
const LAW_TIME_LIMIT: Duration = Duration::from_secs(30);

fn report_line(n: u8, title: &str, ok: bool, detail: &str) {
    println!("criterion {n} [{}] {title}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn failures(r: &CheckReport, eqs: &[&str]) -> Vec<String> {
    eqs.iter()
        .filter(|eq| !r.passed(eq))
        .map(|eq| format!("{eq}: {:?}", r.outcome(eq)))
        .collect()
}

fn r3() -> (Chart, PlecticStructure) {
    let c = Chart::new(&["x", "y", "z"]).unwrap();
    let omega = parse_form("dx^dy^dz", &c, None).unwrap();
    let ps = PlecticStructure::new(omega, &[vec![int(0); 3]]).unwrap();
    (c, ps)
}

#[test]
fn criterion_1_exterior_laws() {
    let charts: Vec<Chart> = (1..=5).map(numbered_chart).collect();
    let start = Instant::now();
    let r = check_exterior_laws(&charts, LAW_SAMPLES, 1);
    let elapsed = start.elapsed();
    let bad = failures(&r, &EXTERIOR_LAWS);
    let ok = bad.is_empty() && r.evaluated >= LAW_SAMPLES && elapsed < LAW_TIME_LIMIT;
    report_line(
        1,
        "exterior calculus laws",
        ok,
        &format!("{} tuples on dims 1..=5 in {:.2} s, failures {bad:?}", r.evaluated, elapsed.as_secs_f64()),
    );
    assert!(ok);
}

#[test]
fn criterion_2_observables_lie2_algebra() {
    let (_, ps) = r3();
    let obs = build_observables(ps.clone());
    let mut sampler = ObservableSampler::new(&ps, 3).unwrap();
    let r = check_lie2_axioms(&obs, &mut sampler, TUPLES, 2);
    let bad = failures(&r, &LIE2_AXIOMS);
    let doubled = ScaledL3 {
        inner: &obs,
        factor: int(2),
    };
    let perturbed = check_lie2_axioms(&doubled, &mut sampler, TUPLES, 2);
    let caught = perturbed.failed(EQ_JACOBIATOR);
    let ok = bad.is_empty() && r.evaluated >= TUPLES && caught;
    report_line(
        2,
        "observables form a Lie 2-algebra",
        ok,
        &format!("{} tuples, failures {bad:?}, doubled l3 breaks jacobiator: {caught}", r.evaluated),
    );
    assert!(ok);
}

/// `d alpha = iota_X (dx^dy^dz)` read off directly: the `dy^dz`, `dz^dx`
/// and `dx^dy` coefficients of `d alpha` are the components of `X`.
fn volume_field_oracle(c: &Chart, alpha: &DifferentialForm) -> VectorField {
    let da = ext_d(alpha);
    let comps = vec![da.component(&[1, 2]), -da.component(&[0, 2]), da.component(&[0, 1])];
    VectorField::new(c, comps).unwrap()
}

#[test]
fn criterion_3_hamiltonian_solver() {
    let (c, ps) = r3();
    let field = |s: &str| parse_vector_field(s, &c).unwrap();
    let fixtures = [("x*dy", field("d/dz")), ("x^2*dy", field("2*x*d/dz")), ("dx", VectorField::zero(&c))];
    let mut ok = true;
    let mut notes = Vec::new();
    for (alpha, expected) in &fixtures {
        let sol = solve_hamiltonian(&ps, &parse_form(alpha, &c, Some(1)).unwrap(), 3).unwrap();
        if sol.pair.field() != expected || !sol.unique {
            ok = false;
            notes.push(format!("{alpha} -> {}", sol.pair.field()));
        }
    }
    let mut rng = rng_from_seed(3);
    let random = 200;
    for _ in 0..random {
        let alpha = random_form(&mut rng, &c, 1, MAX_DEGREE);
        let sol = solve_hamiltonian(&ps, &alpha, MAX_DEGREE).unwrap();
        let x = sol.pair.field();
        let recheck = ext_d(&alpha).try_sub(&interior(x, ps.omega()).unwrap()).unwrap();
        if !recheck.is_zero() || *x != volume_field_oracle(&c, &alpha) {
            ok = false;
            notes.push(format!("{alpha} -> {x}"));
        }
    }
    report_line(
        3,
        "Hamiltonian solver",
        ok,
        &format!("3 fixtures and {random} random forms re-verified, mismatches {notes:?}"),
    );
    assert!(ok);
}

fn line_bundle(fiber: &[&str], theta: &str) -> SurrogateBundle {
    let (base, ps) = r3();
    let total = SurrogateBundle::total_chart(&base, fiber).unwrap();
    let theta = parse_form(theta, &total, None).unwrap();
    SurrogateBundle::new(&base, &total, ps.omega().clone(), theta).unwrap()
}

#[test]
fn criterion_4_section_crossed_module() {
    let sb = line_bundle(&["u"], "x*dy^dz + du^dx");
    let cm = build_section_crossed_module(sb.clone());
    let r = check_crossed_module(&cm, &mut SectionSampler::new(&sb, 2).unwrap(), TUPLES, 4);
    let bad = failures(&r, &[EQ_A1, EQ_A2, EQ_JACOBI_H, EQ_JACOBI_G, EQ_ETA_VALIDITY]);

    let broken = build_section_crossed_module(sb.clone()).perturbed(SectionPerturbation::DropThetaSections);
    let perturbed = check_crossed_module(&broken, &mut SectionSampler::new(&sb, 2).unwrap(), TUPLES, 4);
    let caught = match perturbed.outcome(EQ_A1) {
        Some(Outcome::Fail { witness, .. }) => !witness.is_empty(),
        _ => false,
    };

    // Same perturbation where theta does not vanish on pairs of vertical fields.
    let plane = line_bundle(&["u", "v"], "x*dy^dz + du^dx + u*du^dv");
    let broken_plane = build_section_crossed_module(plane.clone()).perturbed(SectionPerturbation::DropThetaSections);
    let plane_caught = check_crossed_module(&broken_plane, &mut SectionSampler::new(&plane, 1).unwrap(), TUPLES, 4)
        .failed(EQ_A1);

    let ok = bad.is_empty() && r.evaluated >= TUPLES && caught;
    report_line(
        4,
        "gerbe section crossed module",
        ok,
        &format!(
            "{} tuples, failures {bad:?}, dropping theta(Z,Z') breaks A1 on the one-dimensional fiber: {caught} \
             (theta(Z,Z') vanishes identically for vertical fields there); on a two-dimensional fiber: {plane_caught}",
            r.evaluated
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_prequantisation_morphism() {
    let (c, ps) = r3();
    let es = ExactScenario::new(ps.clone(), parse_form("x*dy^dz", &c, None).unwrap()).unwrap();
    let m = build_prequant_morphism(&es);
    let mut sampler = ObservableSampler::new(&ps, 3).unwrap();
    let r = check_morphism(&m, &mut sampler, TUPLES, 5);
    let bad = failures(&r, &MORPHISM_EQUATIONS);

    let ham = |s: &str| ham_element(&ps, &parse_form(s, &c, Some(1)).unwrap(), 3).unwrap();
    let image = phi1(&es, &ham("x*dy")).unwrap().into_high().unwrap();
    let phi1_ok = *image.x() == parse_vector_field("d/dz", &c).unwrap() && image.g().is_zero() && image.b().is_zero();
    let value = phi2(&es, &ham("x*dy"), &ham("y*dz")).unwrap();
    let phi2_ok = match &value {
        GradedElement::Low(s) => s.z().is_zero() && *s.h() == parse_polynomial("-y", &c).unwrap(),
        GradedElement::High(_) => false,
    };
    let ok = bad.is_empty() && r.evaluated >= TUPLES && phi1_ok && phi2_ok;
    report_line(
        5,
        "prequantisation morphism",
        ok,
        &format!("{} tuples, failures {bad:?}, Phi1(x dy) = {image}, Phi2(x dy, y dz) = {value}", r.evaluated),
    );
    assert!(ok);
}

#[test]
fn criterion_6_quasi_isomorphism() {
    let (c, ps) = r3();
    let es = ExactScenario::new(ps.clone(), parse_form("x*dy^dz", &c, None).unwrap()).unwrap();
    let mut sampler = ObservableSampler::new(&ps, 3).unwrap();
    let trip = check_round_trip(&es, &mut sampler, TUPLES, 6);
    let trip_ok = trip.passed(EQ_ROUND_TRIP) && trip.evaluated >= TUPLES;
    let probe = probe_quasi_isomorphism(&build_prequant_morphism(&es), 3).unwrap();
    let bad = failures(&probe, &[EQ_KERNEL_CLOSED, EQ_KERNEL_INJECTIVE, EQ_KERNEL_SURJECTIVE]);
    let ok = trip_ok && bad.is_empty();
    report_line(
        6,
        "quasi-isomorphism desk check",
        ok,
        &format!(
            "{} round trips ({}), kernel probe at degree cap 3 failures {bad:?}, overall probe {}",
            trip.evaluated,
            trip.status(),
            probe.status()
        ),
    );
    assert!(ok);
}

fn bundled_scenarios() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "scn"))
        .collect();
    out.sort();
    out
}

fn machine_report(scenario: &PathBuf) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(["--suite", "all", "--seed", "42", "--format", "machine", "--scenario"])
        .arg(scenario)
        .output()
        .unwrap();
    (out.stdout, out.status.code())
}

#[test]
fn criterion_7_deterministic_reports() {
    let scenarios = bundled_scenarios();
    let mut ok = !scenarios.is_empty();
    let mut notes = Vec::new();
    for s in &scenarios {
        let (first, code) = machine_report(s);
        let (second, _) = machine_report(s);
        let same = !first.is_empty() && first == second;
        ok &= same;
        notes.push(format!(
            "{}: identical {same}, exit {code:?}",
            s.file_name().unwrap().to_string_lossy()
        ));
    }
    report_line(7, "deterministic machine reports", ok, &notes.join("; "));
    assert!(ok);
}

#[test]
fn polynomial_oracle_sanity() {
    // the field oracle above agrees with a hand computation
    let (c, _) = r3();
    let alpha = parse_form("x*y*dz", &c, None).unwrap();
    let x = volume_field_oracle(&c, &alpha);
    assert_eq!(x.component(0), &parse_polynomial("x", &c).unwrap());
    assert_eq!(x.component(1), &parse_polynomial("-y", &c).unwrap());
    assert_eq!(x.component(2), &Polynomial::zero(3));
}

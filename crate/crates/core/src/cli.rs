//! Scenario files, suite orchestration and reports for the `verify` binary.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "r3-volume"
//! base_vars = ["x", "y", "z"]
//! omega = "dx^dy^dz"
//! chi = "x*dy^dz"
//! hamiltonian_forms = ["x*dy", "y*dz"]
//! degree_bound = 3
//! samples = 50
//! seed = 42
//! nondeg_points = [["0", "0", "0"], ["1/2", "-1", "3"]]
//!
//! [fixtures.shear]
//! form = "x*dy"
//! field = "d/dz"
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::exterior::{Chart, DifferentialForm};
use crate::gerbe_sections::{build_section_crossed_module, SectionPerturbation, SectionSampler, SurrogateBundle};
use crate::laws::check_exterior_laws;
use crate::lie2::{
    check_crossed_module, check_lie2_axioms_named, check_morphism, crossed_to_lie2, GradedElement, ScaledL3,
    StrictSampler,
};
use crate::observables::{build_observables, ObservableElement, ObservableSampler};
use crate::plectic::{hamiltonian_basis, solve_hamiltonian, HamiltonianPair, PlecticStructure};
use crate::polyring::{int, parse_rational, Rational};
use crate::prequant::{
    build_prequant_morphism, check_basis_decomposition, check_round_trip, probe_quasi_isomorphism, ExactScenario,
    Phi2Perturbation,
};
use crate::report::{CheckReport, EquationResult, Outcome, Status};
use crate::syntax::{parse_form, parse_vector_field};

const DEFAULT_DEGREE_BOUND: u32 = 3;
const DEFAULT_SAMPLES: usize = 50;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixture {
    form: Spanned<String>,
    field: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    base_vars: Spanned<Vec<String>>,
    #[serde(default)]
    fiber_vars: Option<Spanned<Vec<String>>>,
    omega: Spanned<String>,
    chi: Option<Spanned<String>>,
    theta: Option<Spanned<String>>,
    #[serde(default)]
    hamiltonian_forms: Vec<Spanned<String>>,
    #[serde(default)]
    fixtures: BTreeMap<String, RawFixture>,
    degree_bound: Option<u32>,
    samples: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    nondeg_points: Vec<Vec<Spanned<String>>>,
}

/// A loaded scenario, with every consistency relation already checked.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub plectic: PlecticStructure,
    pub exact: Option<ExactScenario>,
    /// Present when the scenario supplies `theta`.
    pub bundle: Option<SurrogateBundle>,
    pub hamiltonians: Vec<HamiltonianPair>,
    pub fixtures: BTreeMap<String, ObservableElement>,
    pub degree_bound: u32,
    pub samples: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn base(&self) -> &Chart {
        self.plectic.chart()
    }
}

fn line_column(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn located(src: &str, span: Range<usize>, message: impl Into<String>) -> Error {
    let (line, column) = line_column(src, span.start);
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Moves an error from parsing a string value to the file position of that
/// value. Columns inside the string assume it is a single-line basic string.
fn relocate(src: &str, span: Range<usize>, key: &str, e: Error) -> Error {
    match e {
        Error::Parse { line: 1, column, message } => {
            let (line, start) = line_column(src, span.start);
            Error::Parse {
                line,
                column: start + column,
                message: format!("in `{key}`: {message}"),
            }
        }
        Error::Parse { message, .. } | Error::InvalidInput(message) => {
            located(src, span, format!("in `{key}`: {message}"))
        }
        other => other,
    }
}

fn form_at(src: &str, key: &str, text: &Spanned<String>, chart: &Chart, degree: Option<usize>) -> Result<DifferentialForm> {
    parse_form(text.get_ref(), chart, degree).map_err(|e| relocate(src, text.span(), key, e))
}

fn chart_at(src: &str, key: &str, names: &Spanned<Vec<String>>) -> Result<Chart> {
    Chart::new(names.get_ref()).map_err(|e| relocate(src, names.span(), key, e))
}

/// Parses and validates scenario text.
pub fn parse_scenario_str(src: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(src).map_err(|e| match e.span() {
        Some(span) => located(src, span, e.message()),
        None => Error::Parse {
            line: 1,
            column: 1,
            message: e.message().to_string(),
        },
    })?;

    let base = chart_at(src, "base_vars", &raw.base_vars)?;
    let omega = form_at(src, "omega", &raw.omega, &base, Some(3))?;

    let mut points = Vec::with_capacity(raw.nondeg_points.len());
    for point in &raw.nondeg_points {
        if point.len() != base.dim() {
            let span = point.first().map_or(raw.omega.span(), |p| p.span());
            return Err(located(
                src,
                span,
                format!("nondeg point has {} coordinates, chart has {}", point.len(), base.dim()),
            ));
        }
        let coords = point
            .iter()
            .map(|c| parse_rational(c.get_ref()).map_err(|e| relocate(src, c.span(), "nondeg_points", e)))
            .collect::<Result<Vec<Rational>>>()?;
        points.push(coords);
    }
    if points.is_empty() {
        points.push(vec![int(0); base.dim()]);
    }
    let plectic = PlecticStructure::new(omega, &points)?;

    let exact = match &raw.chi {
        Some(chi) => Some(ExactScenario::new(plectic.clone(), form_at(src, "chi", chi, &base, Some(2))?)?),
        None => None,
    };

    let fiber_names = raw.fiber_vars.as_ref().map(|f| f.get_ref().clone()).unwrap_or_default();
    let bundle = match &raw.theta {
        Some(theta) => {
            let total = SurrogateBundle::total_chart(&base, &fiber_names).map_err(|e| match &raw.fiber_vars {
                Some(f) => relocate(src, f.span(), "fiber_vars", e),
                None => e,
            })?;
            let theta = form_at(src, "theta", theta, &total, Some(2))?;
            Some(SurrogateBundle::new(&base, &total, plectic.omega().clone(), theta)?)
        }
        None if !fiber_names.is_empty() => {
            let span = raw.fiber_vars.as_ref().map(|f| f.span()).unwrap_or(0..0);
            return Err(located(src, span, "fiber_vars given without theta"));
        }
        None => None,
    };

    let degree_bound = raw.degree_bound.unwrap_or(DEFAULT_DEGREE_BOUND);
    let hamiltonians = raw
        .hamiltonian_forms
        .iter()
        .map(|text| {
            let alpha = form_at(src, "hamiltonian_forms", text, &base, Some(1))?;
            Ok(solve_hamiltonian(&plectic, &alpha, degree_bound)?.pair)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut fixtures = BTreeMap::new();
    for (name, fixture) in &raw.fixtures {
        let key = format!("fixtures.{name}.form");
        let form = parse_form(fixture.form.get_ref(), &base, None).map_err(|e| relocate(src, fixture.form.span(), &key, e))?;
        let element = match form.degree() {
            0 => GradedElement::Low(form),
            1 => {
                let pair = match &fixture.field {
                    Some(field) => {
                        let x = parse_vector_field(field.get_ref(), &base)
                            .map_err(|e| relocate(src, field.span(), &format!("fixtures.{name}.field"), e))?;
                        plectic.verify_pair(form, x)?
                    }
                    None => solve_hamiltonian(&plectic, &form, degree_bound)?.pair,
                };
                GradedElement::High(pair)
            }
            k => {
                return Err(located(
                    src,
                    fixture.form.span(),
                    format!("fixture `{name}` has degree {k}; expected a function or a 1-form"),
                ))
            }
        };
        fixtures.insert(name.clone(), element);
    }

    Ok(Scenario {
        name: raw.name,
        plectic,
        exact,
        bundle,
        hamiltonians,
        fixtures,
        degree_bound,
        samples: raw.samples.unwrap_or(DEFAULT_SAMPLES),
        seed: raw.seed.unwrap_or(0),
    })
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario_str(&src)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Suite {
    ExteriorLaws,
    ObservablesAxioms,
    CrossedModule,
    PrequantMorphism,
    QuasiIso,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [
        Suite::ExteriorLaws,
        Suite::ObservablesAxioms,
        Suite::CrossedModule,
        Suite::PrequantMorphism,
        Suite::QuasiIso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ExteriorLaws => "exterior-laws",
            Suite::ObservablesAxioms => "observables-axioms",
            Suite::CrossedModule => "crossed-module",
            Suite::PrequantMorphism => "prequant-morphism",
            Suite::QuasiIso => "quasi-iso",
            Suite::All => "all",
        }
    }
}

/// Deliberately broken formulas, each affecting one suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Perturbation {
    /// `l3` of the observables scaled by 2.
    L3Double,
    /// `theta(Z, Z')` dropped from the section bracket.
    DropThetaSections,
    /// `theta(X, Z)` dropped from the action on sections.
    DropThetaAction,
    /// `Phi2 = 0`.
    Phi2Zero,
    /// `a(X_b) - b(X_a)` dropped from `Phi2`.
    Phi2DropPairing,
    /// `chi(X_a, X_b)` dropped from `Phi2`.
    Phi2DropChi,
}

impl Perturbation {
    pub fn name(self) -> &'static str {
        match self {
            Perturbation::L3Double => "l3-double",
            Perturbation::DropThetaSections => "drop-theta-sections",
            Perturbation::DropThetaAction => "drop-theta-action",
            Perturbation::Phi2Zero => "phi2-zero",
            Perturbation::Phi2DropPairing => "phi2-drop-pairing",
            Perturbation::Phi2DropChi => "phi2-drop-chi",
        }
    }

    fn sections(self) -> SectionPerturbation {
        match self {
            Perturbation::DropThetaSections => SectionPerturbation::DropThetaSections,
            Perturbation::DropThetaAction => SectionPerturbation::DropThetaAction,
            _ => SectionPerturbation::None,
        }
    }

    fn phi2(self) -> Phi2Perturbation {
        match self {
            Perturbation::Phi2Zero => Phi2Perturbation::Zero,
            Perturbation::Phi2DropPairing => Phi2Perturbation::DropPairing,
            Perturbation::Phi2DropChi => Phi2Perturbation::DropChi,
            _ => Phi2Perturbation::None,
        }
    }
}

/// Command-line overrides of the scenario settings.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub degree_bound: Option<u32>,
    pub perturbation: Option<Perturbation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub status: Status,
    pub checks: Vec<CheckReport>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub samples: usize,
    pub degree_bound: u32,
    pub perturbation: Option<String>,
    pub status: Status,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    /// 0 when everything passes, 1 on any failure, 3 when nothing failed but
    /// something was inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }

    /// Pretty JSON without timing; identical across runs with equal inputs.
    pub fn to_machine(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "scenario {}  seed {}  samples {}  degree bound {}",
            self.scenario, self.seed, self.samples, self.degree_bound
        );
        if let Some(p) = &self.perturbation {
            let _ = write!(out, "  perturbation {p}");
        }
        out.push('\n');
        for suite in &self.suites {
            let _ = writeln!(
                out,
                "[{}] {} ({:.2} s)",
                suite.suite,
                suite.status,
                suite.elapsed.as_secs_f64()
            );
            for check in &suite.checks {
                let _ = write!(out, "  {}: {}/{} tuples", check.check, check.evaluated, check.requested);
                if check.incomplete {
                    out.push_str(" (sampler exhausted)");
                }
                out.push('\n');
                for r in &check.results {
                    write_result(&mut out, r);
                }
            }
        }
        let _ = writeln!(out, "overall: {}", self.status);
        out
    }
}

fn write_result(out: &mut String, r: &EquationResult) {
    match &r.outcome {
        Outcome::Pass { tuples } => {
            let _ = writeln!(out, "    pass          {} ({tuples} tuples)", r.equation);
        }
        Outcome::Inconclusive { reason } => {
            let _ = writeln!(out, "    inconclusive  {}: {reason}", r.equation);
        }
        Outcome::Fail { tuple, witness, residual } => {
            let _ = writeln!(out, "    FAIL          {} at tuple {tuple}: residual {residual}", r.equation);
            for w in witness {
                let _ = writeln!(out, "        {} = {}", w.name, w.value);
            }
        }
    }
}

/// A check that could not be evaluated because of an internal error.
fn errored(check: &str, equation: &str, e: &Error) -> CheckReport {
    CheckReport {
        check: check.to_string(),
        requested: 0,
        evaluated: 0,
        incomplete: false,
        results: vec![EquationResult {
            equation: equation.to_string(),
            outcome: Outcome::Fail {
                tuple: 0,
                witness: Vec::new(),
                residual: format!("evaluation error: {e}"),
            },
        }],
    }
}

struct Settings {
    samples: usize,
    seed: u64,
    degree_bound: u32,
    perturbation: Option<Perturbation>,
}

impl Settings {
    fn sections(&self) -> SectionPerturbation {
        self.perturbation.map_or(SectionPerturbation::None, Perturbation::sections)
    }

    fn phi2(&self) -> Phi2Perturbation {
        self.perturbation.map_or(Phi2Perturbation::None, Perturbation::phi2)
    }
}

/// Hamiltonian basis up to the degree bound, plus the scenario's own forms
/// and fixtures.
fn observable_sampler(s: &Scenario, set: &Settings) -> Result<ObservableSampler> {
    let mut pairs = hamiltonian_basis(&s.plectic, set.degree_bound)?;
    pairs.extend(s.hamiltonians.iter().cloned());
    pairs.extend(s.fixtures.values().filter_map(|e| e.clone().into_high().ok()));
    Ok(ObservableSampler::from_pairs(&s.plectic, pairs))
}

fn exterior_laws(s: &Scenario, set: &Settings) -> Vec<CheckReport> {
    let mut charts = vec![s.base().clone()];
    if let Some(sb) = &s.bundle {
        if sb.total() != s.base() {
            charts.push(sb.total().clone());
        }
    }
    vec![check_exterior_laws(&charts, set.samples, set.seed)]
}

fn observables_axioms(s: &Scenario, set: &Settings) -> Vec<CheckReport> {
    const CHECK: &str = "observables";
    let mut sampler = match observable_sampler(s, set) {
        Ok(sampler) => sampler,
        Err(e) => return vec![errored(CHECK, "sampler", &e)],
    };
    let obs = build_observables(s.plectic.clone());
    let report = if set.perturbation == Some(Perturbation::L3Double) {
        let doubled = ScaledL3 {
            inner: &obs,
            factor: int(2),
        };
        check_lie2_axioms_named(CHECK, &doubled, &mut sampler, set.samples, set.seed)
    } else {
        check_lie2_axioms_named(CHECK, &obs, &mut sampler, set.samples, set.seed)
    };
    vec![report]
}

fn crossed_module(s: &Scenario, set: &Settings) -> Vec<CheckReport> {
    const CHECK: &str = "crossed-module";
    let Some(sb) = s.bundle.as_ref().or(s.exact.as_ref().map(ExactScenario::bundle)) else {
        return vec![CheckReport::inconclusive(CHECK, "all", "scenario provides neither theta nor chi")];
    };
    let sampler = |check| SectionSampler::new(sb, set.degree_bound).map_err(|e| errored(check, "sampler", &e));
    let cm = build_section_crossed_module(sb.clone()).perturbed(set.sections());
    let crossed = match sampler(CHECK) {
        Ok(mut smp) => check_crossed_module(&cm, &mut smp, set.samples, set.seed),
        Err(r) => r,
    };
    let strict = match sampler("strict-lie2") {
        Ok(smp) => check_lie2_axioms_named("strict-lie2", &crossed_to_lie2(cm), &mut StrictSampler(smp), set.samples, set.seed),
        Err(r) => r,
    };
    vec![crossed, strict]
}

fn prequant_morphism(s: &Scenario, set: &Settings) -> Vec<CheckReport> {
    const CHECK: &str = "lie2-morphism";
    let Some(es) = &s.exact else {
        return vec![CheckReport::inconclusive(CHECK, "all", "scenario has no chi")];
    };
    let mut sampler = match observable_sampler(s, set) {
        Ok(sampler) => sampler,
        Err(e) => return vec![errored(CHECK, "sampler", &e)],
    };
    let m = build_prequant_morphism(es).perturbed(set.phi2());
    vec![check_morphism(&m, &mut sampler, set.samples, set.seed)]
}

fn quasi_iso(s: &Scenario, set: &Settings) -> Vec<CheckReport> {
    let Some(es) = &s.exact else {
        return vec![CheckReport::inconclusive("quasi-iso", "all", "scenario has no chi")];
    };
    let round_trip = match observable_sampler(s, set) {
        Ok(mut sampler) => check_round_trip(es, &mut sampler, set.samples, set.seed),
        Err(e) => errored("quasi-iso-round-trip", "sampler", &e),
    };
    let basis = check_basis_decomposition(es, set.degree_bound)
        .unwrap_or_else(|e| errored("quasi-iso-surjectivity", "basis", &e));
    let m = build_prequant_morphism(es).perturbed(set.phi2());
    let probe = probe_quasi_isomorphism(&m, set.degree_bound)
        .unwrap_or_else(|e| errored("kernel-cokernel-probe", "probe", &e));
    vec![round_trip, basis, probe]
}

/// Runs one suite, or all of them in a fixed order.
pub fn run_suite(s: &Scenario, suite: Suite, opts: &RunOptions) -> Report {
    let set = Settings {
        samples: opts.samples.unwrap_or(s.samples),
        seed: opts.seed.unwrap_or(s.seed),
        degree_bound: opts.degree_bound.unwrap_or(s.degree_bound),
        perturbation: opts.perturbation,
    };
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let reports: Vec<SuiteReport> = suites
        .into_iter()
        .map(|suite| {
            let start = Instant::now();
            let checks = match suite {
                Suite::ExteriorLaws => exterior_laws(s, &set),
                Suite::ObservablesAxioms => observables_axioms(s, &set),
                Suite::CrossedModule => crossed_module(s, &set),
                Suite::PrequantMorphism => prequant_morphism(s, &set),
                Suite::QuasiIso => quasi_iso(s, &set),
                Suite::All => unreachable!("expanded above"),
            };
            SuiteReport {
                suite: suite.name().to_string(),
                status: checks.iter().map(CheckReport::status).max().unwrap_or(Status::Inconclusive),
                checks,
                elapsed: start.elapsed(),
            }
        })
        .collect();
    Report {
        scenario: s.name.clone(),
        seed: set.seed,
        samples: set.samples,
        degree_bound: set.degree_bound,
        perturbation: set.perturbation.map(|p| p.name().to_string()),
        status: reports.iter().map(|r| r.status).max().unwrap_or(Status::Inconclusive),
        suites: reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const R3: &str = r#"
name = "r3"
base_vars = ["x", "y", "z"]
omega = "dx^dy^dz"
chi = "x*dy^dz"
hamiltonian_forms = ["x*dy"]
degree_bound = 1
samples = 4
seed = 9

[fixtures.shear]
form = "x*dy"
field = "d/dz"

[fixtures.height]
form = "z"
"#;

    #[test]
    fn parses_the_example_scenario() {
        let s = parse_scenario_str(R3).unwrap();
        assert_eq!(s.name, "r3");
        assert_eq!(s.base().names(), ["x", "y", "z"]);
        assert!(s.exact.is_some());
        assert!(s.bundle.is_none());
        assert_eq!(s.hamiltonians.len(), 1);
        assert_eq!(s.fixtures["height"].degree(), -1);
        assert_eq!(s.fixtures["shear"].degree(), 0);
        assert_eq!((s.degree_bound, s.samples, s.seed), (1, 4, 9));
    }

    #[test]
    fn syntax_errors_carry_file_positions() {
        let e = parse_scenario_str("name = \"a\"\nbase_vars = [\"x\"\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");

        let src = "name = \"a\"\nbase_vars = [\"x\", \"y\", \"z\"]\nomega = \"dx^dy^^dz\"\n";
        match parse_scenario_str(src).unwrap_err() {
            Error::Parse { line, column, message } => {
                assert_eq!(line, 3);
                assert_eq!(column, 16, "{message}");
                assert!(message.contains("omega"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_potential_is_rejected() {
        let src = R3.replace("chi = \"x*dy^dz\"", "chi = \"y*dx^dz\"");
        let e = parse_scenario_str(&src).unwrap_err();
        assert!(e.to_string().contains("d chi != omega"), "{e}");
    }

    #[test]
    fn wrong_fixture_field_is_rejected() {
        let src = R3.replace("field = \"d/dz\"", "field = \"d/dx\"");
        assert!(matches!(parse_scenario_str(&src), Err(Error::Consistency { .. })));
    }

    #[test]
    fn missing_data_is_inconclusive() {
        let src = R3.replace("chi = \"x*dy^dz\"\n", "");
        let s = parse_scenario_str(&src).unwrap();
        let r = run_suite(&s, Suite::PrequantMorphism, &RunOptions::default());
        assert_eq!(r.status, Status::Inconclusive);
        assert_eq!(r.exit_code(), 3);
    }

    #[test]
    fn all_suites_pass_and_timing_stays_out_of_machine_output() {
        let s = parse_scenario_str(R3).unwrap();
        let r = run_suite(&s, Suite::All, &RunOptions::default());
        assert_eq!(r.status, Status::Pass, "{}", r.to_text());
        assert_eq!(r.suites.len(), 5);
        assert!(!r.to_machine().contains("elapsed"));
        assert!(r.to_text().contains(" s)"));
    }
}

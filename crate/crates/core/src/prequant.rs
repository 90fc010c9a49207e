//! Prequantisation in the exact case `omega = d chi`: the Lie 2-algebra
//! morphism from observables to weak symmetries of the trivial gerbe with
//! curving `chi`, and the decomposition behind its quasi-isomorphism.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exterior::{eval_on_fields, ext_d, interior, lie_derivative, DifferentialForm, VectorField};
use crate::gerbe_sections::{
    build_section_crossed_module, eta_map, MultVFData, SectionCrossedModule, SectionElement, SurrogateBundle,
    WeakSymmetryTriple,
};
use crate::lie2::{
    kernel_cokernel_probe, GradedElement, Lie2Morphism, Lie2Sampler, StrictLie2, Truncation,
};
use crate::linalg::Matrix;
use crate::observables::{build_observables, function_truncation, ObservableElement, ObservableSampler, Observables};
use crate::plectic::{hamiltonian_basis, HamiltonianPair, PlecticStructure};
use crate::polyring::{Monomial, Polynomial, Rational};
use crate::random::{random_nonzero_polynomial, rng_from_seed, MAX_DEGREE};
use crate::report::{run_equations, CheckReport, Equation, Tuple, Verdict};

pub type ReducedWSymAlgebra = StrictLie2<SectionCrossedModule>;
pub type ReducedElement = GradedElement<SectionElement, WeakSymmetryTriple>;

/// A 2-plectic structure with a global potential `chi`, `d chi = omega`.
#[derive(Debug, Clone)]
pub struct ExactScenario {
    ps: PlecticStructure,
    chi: DifferentialForm,
    bundle: SurrogateBundle,
}

impl ExactScenario {
    pub fn new(ps: PlecticStructure, chi: DifferentialForm) -> Result<Self> {
        if chi.degree() != 2 {
            return Err(Error::invalid(format!("chi must be a 2-form, got degree {}", chi.degree())));
        }
        let residual = ext_d(&chi).try_sub(ps.omega())?;
        if !residual.is_zero() {
            return Err(Error::Consistency {
                identity: "d chi = omega".into(),
                residual: residual.to_text(),
            });
        }
        let bundle = SurrogateBundle::new(ps.chart(), ps.chart(), ps.omega().clone(), chi.clone())?;
        Ok(ExactScenario { ps, chi, bundle })
    }

    pub fn plectic(&self) -> &PlecticStructure {
        &self.ps
    }

    pub fn chi(&self) -> &DifferentialForm {
        &self.chi
    }

    /// The point-fiber bundle with curving `chi`.
    pub fn bundle(&self) -> &SurrogateBundle {
        &self.bundle
    }

    /// Largest coefficient degree of `chi`.
    fn chi_degree(&self) -> u32 {
        self.chi
            .components()
            .filter_map(|(_, p)| p.degree())
            .max()
            .unwrap_or(0)
    }
}

/// Fiber-dimension-0 weak symmetries with curving `chi`, as a strict Lie
/// 2-algebra.
pub fn reduced_wsym_algebra(es: &ExactScenario) -> ReducedWSymAlgebra {
    StrictLie2 {
        cm: build_section_crossed_module(es.bundle.clone()),
    }
}

fn phi1_function(es: &ExactScenario, f: &DifferentialForm) -> Result<SectionElement> {
    if f.degree() != 0 || f.chart() != es.ps.chart() {
        return Err(Error::invalid(format!("{f} is not a function on the plectic chart")));
    }
    SectionElement::new(&es.bundle, VectorField::zero(es.ps.chart()), f.component(&[]))
}

fn phi1_pair(es: &ExactScenario, pair: &HamiltonianPair) -> Result<WeakSymmetryTriple> {
    let pair = es.ps.verify_pair(pair.alpha().clone(), pair.field().clone())?;
    let x = pair.field().clone();
    let b = interior(&x, &es.chi)?.try_add(pair.alpha())?;
    let data = MultVFData::new(&es.bundle, x, Polynomial::zero(es.ps.chart().dim()))?;
    WeakSymmetryTriple::new(&es.bundle, data, b)
        .map_err(|e| Error::Internal(format!("image of {pair} is not a weak symmetry: {e}")))
}

/// `f -> (0, f)` and `(alpha, X) -> (X, 0, iota_X chi + alpha)`.
pub fn phi1(es: &ExactScenario, e: &ObservableElement) -> Result<ReducedElement> {
    Ok(match e {
        GradedElement::Low(f) => GradedElement::Low(phi1_function(es, f)?),
        GradedElement::High(p) => GradedElement::High(phi1_pair(es, p)?),
    })
}

/// Deliberate breakage of `Phi2`, to demonstrate checker sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Phi2Perturbation {
    #[default]
    None,
    /// Keep only `chi(X_a, X_b)`.
    DropPairing,
    /// Keep only `a(X_b) - b(X_a)`.
    DropChi,
    /// `Phi2 = 0`.
    Zero,
}

fn phi2_value(es: &ExactScenario, a: &HamiltonianPair, b: &HamiltonianPair, perturbation: Phi2Perturbation) -> Result<Polynomial> {
    let dim = es.ps.chart().dim();
    if perturbation == Phi2Perturbation::Zero {
        return Ok(Polynomial::zero(dim));
    }
    let (xa, xb) = (a.field(), b.field());
    let mut h = if perturbation == Phi2Perturbation::DropChi {
        Polynomial::zero(dim)
    } else {
        eval_on_fields(&es.chi, &[xa.clone(), xb.clone()])?
    };
    if perturbation != Phi2Perturbation::DropPairing {
        let pairing = eval_on_fields(a.alpha(), &[xb.clone()])?.try_sub(&eval_on_fields(b.alpha(), &[xa.clone()])?)?;
        h = h.try_add(&pairing)?;
    }
    Ok(h)
}

/// `(0, chi(X_a, X_b) + a(X_b) - b(X_a))`; both arguments must have degree 0.
pub fn phi2(es: &ExactScenario, a: &ObservableElement, b: &ObservableElement) -> Result<ReducedElement> {
    let (GradedElement::High(a), GradedElement::High(b)) = (a, b) else {
        return Err(Error::invalid("phi2 takes two elements of degree 0"));
    };
    es.ps.verify_pair(a.alpha().clone(), a.field().clone())?;
    es.ps.verify_pair(b.alpha().clone(), b.field().clone())?;
    let h = phi2_value(es, a, b, Phi2Perturbation::None)?;
    Ok(GradedElement::Low(SectionElement::new(&es.bundle, VectorField::zero(es.ps.chart()), h)?))
}

/// The prequantisation morphism from observables to reduced weak symmetries.
pub struct PrequantMorphism {
    es: ExactScenario,
    source: Observables,
    target: ReducedWSymAlgebra,
    perturbation: Phi2Perturbation,
}

pub fn build_prequant_morphism(es: &ExactScenario) -> PrequantMorphism {
    PrequantMorphism {
        es: es.clone(),
        source: build_observables(es.ps.clone()),
        target: reduced_wsym_algebra(es),
        perturbation: Phi2Perturbation::None,
    }
}

impl PrequantMorphism {
    pub fn perturbed(mut self, perturbation: Phi2Perturbation) -> Self {
        self.perturbation = perturbation;
        self
    }

    pub fn scenario(&self) -> &ExactScenario {
        &self.es
    }
}

impl Lie2Morphism for PrequantMorphism {
    type Source = Observables;
    type Target = ReducedWSymAlgebra;

    fn source(&self) -> &Observables {
        &self.source
    }

    fn target(&self) -> &ReducedWSymAlgebra {
        &self.target
    }

    fn phi1_low(&self, u: &DifferentialForm) -> Result<SectionElement> {
        phi1_function(&self.es, u)
    }

    fn phi1_high(&self, x: &HamiltonianPair) -> Result<WeakSymmetryTriple> {
        phi1_pair(&self.es, x)
    }

    fn phi2(&self, x: &HamiltonianPair, y: &HamiltonianPair) -> Result<SectionElement> {
        let h = phi2_value(&self.es, x, y, self.perturbation)?;
        SectionElement::new(&self.es.bundle, VectorField::zero(self.es.ps.chart()), h)
    }
}

/// Splits a weak symmetry `(X, g, B)` as `Phi1(alpha) + eta(0, h)` with
/// `alpha = B - iota_X chi - dg` and `h = g`.
pub fn decompose_weak_symmetry(es: &ExactScenario, t: &WeakSymmetryTriple) -> Result<(DifferentialForm, Polynomial)> {
    let chart = es.ps.chart();
    if t.x().chart() != chart || t.b().chart() != chart {
        return Err(Error::ChartMismatch {
            left: chart.names().join(","),
            right: t.x().chart().names().join(","),
        });
    }
    let dg = ext_d(&DifferentialForm::function(chart, t.g().clone())?);
    let alpha = t.b().try_sub(&interior(t.x(), &es.chi)?)?.try_sub(&dg)?;
    let residual = ext_d(&alpha).try_sub(&interior(t.x(), es.ps.omega())?)?;
    if !residual.is_zero() {
        return Err(Error::NotAWeakSymmetry(format!(
            "d alpha - iota_X omega = {residual} for alpha = {alpha}"
        )));
    }
    Ok((alpha, t.g().clone()))
}

/// `Phi1(alpha) + eta(0, h)`.
pub fn recompose(es: &ExactScenario, alpha: &DifferentialForm, field: &VectorField, h: &Polynomial) -> Result<WeakSymmetryTriple> {
    let pair = es.ps.verify_pair(alpha.clone(), field.clone())?;
    let section = SectionElement::new(&es.bundle, VectorField::zero(es.ps.chart()), h.clone())?;
    phi1_pair(es, &pair)?.try_add(&eta_map(&es.bundle, &section)?)
}

/// Exact componentwise equality, with no quotient on `g`.
fn identical(a: &WeakSymmetryTriple, b: &WeakSymmetryTriple) -> bool {
    a.x() == b.x() && a.g() == b.g() && a.b() == b.b()
}

fn round_trip(es: &ExactScenario, t: &WeakSymmetryTriple) -> Result<Verdict> {
    let (alpha, h) = decompose_weak_symmetry(es, t)?;
    let back = recompose(es, &alpha, t.x(), &h)?;
    Ok(Verdict::from_residual(identical(&back, t), || {
        format!("recomposed to {back}")
    }))
}

struct RoundTripTuple {
    pair: HamiltonianPair,
    h: DifferentialForm,
}

impl Tuple for RoundTripTuple {
    fn entry(&self, name: &str) -> Option<String> {
        match name {
            "alpha" => Some(self.pair.to_string()),
            "h" => Some(self.h.to_string()),
            _ => None,
        }
    }
}

pub const EQ_ROUND_TRIP: &str = "decompose-round-trip";
pub const EQ_BASIS_ROUND_TRIP: &str = "basis-round-trip";

/// Builds `t = Phi1(alpha) + eta(0, h)` from random `(alpha, h)` and checks
/// that decomposition returns exactly `(alpha, h)`.
pub fn check_round_trip(es: &ExactScenario, sampler: &mut ObservableSampler, count: usize, seed: u64) -> CheckReport {
    let mut rng = rng_from_seed(seed);
    let dim = es.ps.chart().dim();
    let mut tuples = Vec::with_capacity(count);
    for _ in 0..count {
        let Some(pair) = sampler.high(&mut rng) else {
            break;
        };
        let h = random_nonzero_polynomial(&mut rng, dim, MAX_DEGREE, 3);
        let h = DifferentialForm::function(es.ps.chart(), h).expect("same chart");
        tuples.push(RoundTripTuple { pair, h });
    }
    let equations = [Equation::new(EQ_ROUND_TRIP, &["alpha", "h"], |t: &RoundTripTuple| {
        let h = t.h.component(&[]);
        let composed = recompose(es, t.pair.alpha(), t.pair.field(), &h)?;
        let (alpha, h_back) = decompose_weak_symmetry(es, &composed)?;
        Ok(Verdict::from_residual(&alpha == t.pair.alpha() && h_back == h, || {
            format!("decomposed to ({alpha}, {})", h_back.to_text(es.ps.chart().names()))
        }))
    })];
    run_equations("quasi-iso-round-trip", count, &tuples, &equations)
}

/// Basis of weak symmetries `(X, 0, B)` with `X` of coefficient degree at
/// most `cap`, from the linear system `dB = L_X chi`.
pub fn wsym_truncation(es: &ExactScenario, cap: u32) -> Result<Vec<WeakSymmetryTriple>> {
    let chart = es.ps.chart();
    let dim = chart.dim();
    let b_cap = cap + es.chi_degree();
    let mut columns = Vec::new();
    let mut unknowns: Vec<(bool, usize, Monomial)> = Vec::new();
    for i in 0..dim {
        for m in Monomial::all_up_to(dim, cap) {
            let x = VectorField::coordinate(chart, i, Polynomial::monomial(m.clone(), Rational::one()))?;
            columns.push(lie_derivative(&x, &es.chi)?.scale(&-Rational::one()).coordinates());
            unknowns.push((true, i, m));
        }
    }
    for j in 0..dim {
        for m in Monomial::all_up_to(dim, b_cap) {
            let b = DifferentialForm::basis(chart, &[j], Polynomial::monomial(m.clone(), Rational::one()))?;
            columns.push(ext_d(&b).coordinates());
            unknowns.push((false, j, m));
        }
    }
    let (mat, _) = Matrix::from_sparse_columns(&columns);
    mat.kernel()
        .into_iter()
        .map(|v| {
            let mut xs = vec![Polynomial::zero(dim); dim];
            let mut bs = vec![Polynomial::zero(dim); dim];
            for (c, (is_field, i, m)) in v.into_iter().zip(&unknowns) {
                if c.is_zero() {
                    continue;
                }
                let target = if *is_field { &mut xs[*i] } else { &mut bs[*i] };
                *target = &*target + &Polynomial::monomial(m.clone(), c);
            }
            let b = DifferentialForm::from_components(chart, 1, bs.into_iter().enumerate().map(|(j, p)| (vec![j], p)))?;
            let data = MultVFData::new(&es.bundle, VectorField::new(chart, xs)?, Polynomial::zero(dim))?;
            WeakSymmetryTriple::new(&es.bundle, data, b)
        })
        .collect()
}

struct BasisTuple(WeakSymmetryTriple);

impl Tuple for BasisTuple {
    fn entry(&self, name: &str) -> Option<String> {
        (name == "t").then(|| self.0.to_string())
    }
}

/// Decomposes every element of the truncated weak-symmetry basis and checks
/// that `Phi1(alpha) + eta(0, h)` reproduces it.
pub fn check_basis_decomposition(es: &ExactScenario, cap: u32) -> Result<CheckReport> {
    let basis: Vec<BasisTuple> = wsym_truncation(es, cap)?.into_iter().map(BasisTuple).collect();
    let equations = [Equation::new(EQ_BASIS_ROUND_TRIP, &["t"], |t: &BasisTuple| round_trip(es, &t.0))];
    Ok(run_equations("quasi-iso-surjectivity", basis.len(), &basis, &equations))
}

/// Kernel bijection and cokernel surjectivity of `Phi1` on truncations with
/// polynomial degree cap `cap`.
pub fn probe_quasi_isomorphism(m: &PrequantMorphism, cap: u32) -> Result<CheckReport> {
    let es = &m.es;
    let extra = es.chi_degree();
    let source = Truncation {
        low: function_truncation(&es.ps, cap + extra),
        high: hamiltonian_basis(&es.ps, cap + extra)?,
    };
    let chart = es.ps.chart();
    let target_low = Monomial::all_up_to(chart.dim(), cap + extra)
        .into_iter()
        .map(|mono| {
            SectionElement::new(&es.bundle, VectorField::zero(chart), Polynomial::monomial(mono, Rational::one()))
        })
        .collect::<Result<Vec<_>>>()?;
    let target = Truncation {
        low: target_low,
        high: wsym_truncation(es, cap)?,
    };
    kernel_cokernel_probe(m, &source, &target)
}

/// Coefficients of `Phi2(a, b)`, for fixtures.
pub fn phi2_coefficients(es: &ExactScenario, a: &HamiltonianPair, b: &HamiltonianPair) -> Result<BTreeMap<Monomial, Rational>> {
    Ok(phi2_value(es, a, b, Phi2Perturbation::None)?
        .terms()
        .map(|(m, c)| (m.clone(), c.clone()))
        .collect())
}

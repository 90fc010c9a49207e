//! A finite-dimensional surrogate for the crossed module of gerbe sections
//! and weak symmetries.
//!
//! The total space is a product `Y = M x F` of a base chart and a Euclidean
//! fiber chart. A multiplicative vector field is represented by its reduced
//! data `(X, g)`: a projectable field on `Y` and a function on `Y` that is
//! only defined up to adding pullbacks of functions on `M`.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{
    descend_to_base, eval_on_fields, ext_d, interior, lie_derivative, pullback_projection, vf_bracket, Chart,
    DifferentialForm, VectorField,
};
use crate::lie2::{CoordKey, CrossedModule, CrossedSampler, LinearCoordinates, StrictLie2};
use crate::plectic::{check_closed, hamiltonian_kernel};
use crate::polyring::{Polynomial, Rational};
use crate::random::{random_nonzero_polynomial, random_polynomial, random_rational, SampleRng, MAX_DEGREE};

/// Base chart, fiber variables, the 3-form `omega` on the base and a curving
/// `theta` on the total space with `d theta = pr^* omega`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurrogateBundle {
    base: Chart,
    total: Chart,
    base_vars: Vec<usize>,
    fiber_vars: Vec<usize>,
    omega: DifferentialForm,
    theta: DifferentialForm,
}

impl SurrogateBundle {
    /// `base` followed by `fiber`; the base itself when there are no fiber
    /// variables.
    pub fn total_chart<S: AsRef<str>>(base: &Chart, fiber: &[S]) -> Result<Chart> {
        if fiber.is_empty() {
            Ok(base.clone())
        } else {
            base.product(&Chart::new(fiber)?)
        }
    }

    pub fn new(base: &Chart, total: &Chart, omega: DifferentialForm, theta: DifferentialForm) -> Result<Self> {
        let m = base.dim();
        if total.dim() < m || total.names()[..m] != *base.names() {
            return Err(Error::invalid("total chart must start with the base variables"));
        }
        if omega.chart() != base {
            return Err(Error::ChartMismatch {
                left: base.names().join(","),
                right: omega.chart().names().join(","),
            });
        }
        if theta.chart() != total {
            return Err(Error::ChartMismatch {
                left: total.names().join(","),
                right: theta.chart().names().join(","),
            });
        }
        if !check_closed(&omega)? {
            return Err(Error::Consistency {
                identity: "d omega = 0".into(),
                residual: ext_d(&omega).to_text(),
            });
        }
        if theta.degree() != 2 {
            return Err(Error::invalid(format!("theta must be a 2-form, got degree {}", theta.degree())));
        }
        let base_vars: Vec<usize> = (0..m).collect();
        let pulled = pullback_projection(&omega, total, &base_vars)?;
        let residual = ext_d(&theta).try_sub(&pulled)?;
        if !residual.is_zero() {
            return Err(Error::Consistency {
                identity: "d theta = pr^* omega".into(),
                residual: residual.to_text(),
            });
        }
        Ok(SurrogateBundle {
            base: base.clone(),
            total: total.clone(),
            base_vars,
            fiber_vars: (m..total.dim()).collect(),
            omega,
            theta,
        })
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn total(&self) -> &Chart {
        &self.total
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_vars.len()
    }

    pub fn base_vars(&self) -> &[usize] {
        &self.base_vars
    }

    pub fn fiber_vars(&self) -> &[usize] {
        &self.fiber_vars
    }

    pub fn omega(&self) -> &DifferentialForm {
        &self.omega
    }

    pub fn theta(&self) -> &DifferentialForm {
        &self.theta
    }

    /// Same bundle with a different curving, re-validated.
    pub fn with_theta(&self, theta: DifferentialForm) -> Result<Self> {
        SurrogateBundle::new(&self.base, &self.total, self.omega.clone(), theta)
    }

    pub fn pull_back(&self, a: &DifferentialForm) -> Result<DifferentialForm> {
        pullback_projection(a, &self.total, &self.base_vars)
    }

    pub fn pull_back_function(&self, f: &Polynomial) -> Result<Polynomial> {
        f.embed(self.total.dim(), &self.base_vars)
    }

    pub fn is_vertical(&self, z: &VectorField) -> bool {
        self.base_vars.iter().all(|&i| z.component(i).is_zero())
    }

    pub fn is_projectable(&self, x: &VectorField) -> bool {
        self.project(x).is_some()
    }

    /// Pushforward of a projectable field to the base.
    pub fn project(&self, x: &VectorField) -> Option<VectorField> {
        let comps = self
            .base_vars
            .iter()
            .map(|&i| x.component(i).restrict(&self.base_vars))
            .collect::<Option<Vec<_>>>()?;
        VectorField::new(&self.base, comps).ok()
    }

    /// Horizontal lift of a base field.
    pub fn lift(&self, x: &VectorField) -> Result<VectorField> {
        if x.chart() != &self.base {
            return Err(Error::ChartMismatch {
                left: self.base.names().join(","),
                right: x.chart().names().join(","),
            });
        }
        let n = self.total.dim();
        let mut comps = vec![Polynomial::zero(n); n];
        for (k, &i) in self.base_vars.iter().enumerate() {
            comps[i] = x.component(k).embed(n, &self.base_vars)?;
        }
        VectorField::new(&self.total, comps)
    }

    /// Whether `g` is the pullback of a function on the base.
    pub fn is_basic(&self, g: &Polynomial) -> bool {
        g.restrict(&self.base_vars).is_some()
    }

    fn ensure_total(&self, chart: &Chart) -> Result<()> {
        if chart == &self.total {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                left: self.total.names().join(","),
                right: chart.names().join(","),
            })
        }
    }

    fn theta_on(&self, a: &VectorField, b: &VectorField) -> Result<Polynomial> {
        eval_on_fields(&self.theta, &[a.clone(), b.clone()])
    }

    fn text(&self, p: &Polynomial) -> String {
        p.to_text(self.total.names())
    }
}

/// A section `(Z, h)`: a vertical field and a function on the total space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionElement {
    z: VectorField,
    h: Polynomial,
}

impl SectionElement {
    pub fn new(sb: &SurrogateBundle, z: VectorField, h: Polynomial) -> Result<Self> {
        sb.ensure_total(z.chart())?;
        if h.dim() != sb.total.dim() {
            return Err(Error::DimensionMismatch {
                left: sb.total.dim(),
                right: h.dim(),
            });
        }
        if !sb.is_vertical(&z) {
            return Err(Error::invalid(format!("{z} is not vertical")));
        }
        Ok(SectionElement { z, h })
    }

    pub fn zero(sb: &SurrogateBundle) -> Self {
        SectionElement {
            z: VectorField::zero(&sb.total),
            h: Polynomial::zero(sb.total.dim()),
        }
    }

    pub fn z(&self) -> &VectorField {
        &self.z
    }

    pub fn h(&self) -> &Polynomial {
        &self.h
    }

    pub fn is_zero(&self) -> bool {
        self.z.is_zero() && self.h.is_zero()
    }

    pub fn try_add(&self, other: &SectionElement) -> Result<SectionElement> {
        Ok(SectionElement {
            z: self.z.try_add(&other.z)?,
            h: self.h.try_add(&other.h)?,
        })
    }

    pub fn scale(&self, c: &Rational) -> SectionElement {
        SectionElement {
            z: self.z.scale(c),
            h: self.h.scale(c),
        }
    }
}

impl fmt::Display for SectionElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.z, self.h.to_text(self.z.chart().names()))
    }
}

/// Reduced data `(X, g)` of a multiplicative vector field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultVFData {
    x: VectorField,
    g: Polynomial,
}

impl MultVFData {
    pub fn new(sb: &SurrogateBundle, x: VectorField, g: Polynomial) -> Result<Self> {
        sb.ensure_total(x.chart())?;
        if g.dim() != sb.total.dim() {
            return Err(Error::DimensionMismatch {
                left: sb.total.dim(),
                right: g.dim(),
            });
        }
        if !sb.is_projectable(&x) {
            return Err(Error::invalid(format!("{x} is not projectable")));
        }
        Ok(MultVFData { x, g })
    }

    pub fn x(&self) -> &VectorField {
        &self.x
    }

    pub fn g(&self) -> &Polynomial {
        &self.g
    }

    pub fn try_add(&self, other: &MultVFData) -> Result<MultVFData> {
        Ok(MultVFData {
            x: self.x.try_add(&other.x)?,
            g: self.g.try_add(&other.g)?,
        })
    }

    pub fn scale(&self, c: &Rational) -> MultVFData {
        MultVFData {
            x: self.x.scale(c),
            g: self.g.scale(c),
        }
    }
}

/// `(X, g, B)` with `L_X theta = dB`, together with the base 1-form
/// `alpha = B - iota_X theta - dg` it determines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakSymmetryTriple {
    data: MultVFData,
    b: DifferentialForm,
    alpha: DifferentialForm,
}

impl WeakSymmetryTriple {
    /// Validates the defining equations and extracts `alpha`.
    pub fn new(sb: &SurrogateBundle, data: MultVFData, b: DifferentialForm) -> Result<Self> {
        sb.ensure_total(data.x.chart())?;
        sb.ensure_total(b.chart())?;
        if b.degree() != 1 {
            return Err(Error::invalid("B must be a 1-form"));
        }
        let alpha = is_weak_symmetry(sb, &data, &b)?.ok_or_else(|| {
            Error::NotAWeakSymmetry(format!(
                "({}, {}, {}) does not satisfy B = iota_X theta + dg + pr^* alpha with d alpha = iota_X omega",
                data.x,
                sb.text(&data.g),
                b
            ))
        })?;
        let residual = lie_derivative(&data.x, &sb.theta)?.try_sub(&ext_d(&b))?;
        if !residual.is_zero() {
            return Err(Error::Consistency {
                identity: "L_X theta = dB".into(),
                residual: residual.to_text(),
            });
        }
        Ok(WeakSymmetryTriple { data, b, alpha })
    }

    pub fn zero(sb: &SurrogateBundle) -> Self {
        WeakSymmetryTriple {
            data: MultVFData {
                x: VectorField::zero(&sb.total),
                g: Polynomial::zero(sb.total.dim()),
            },
            b: DifferentialForm::zero(&sb.total, 1),
            alpha: DifferentialForm::zero(&sb.base, 1),
        }
    }

    pub fn data(&self) -> &MultVFData {
        &self.data
    }

    pub fn x(&self) -> &VectorField {
        &self.data.x
    }

    pub fn g(&self) -> &Polynomial {
        &self.data.g
    }

    pub fn b(&self) -> &DifferentialForm {
        &self.b
    }

    /// The base 1-form with `B = iota_X theta + dg + pr^* alpha`.
    pub fn alpha(&self) -> &DifferentialForm {
        &self.alpha
    }

    pub fn try_add(&self, other: &WeakSymmetryTriple) -> Result<WeakSymmetryTriple> {
        Ok(WeakSymmetryTriple {
            data: self.data.try_add(&other.data)?,
            b: self.b.try_add(&other.b)?,
            alpha: self.alpha.try_add(&other.alpha)?,
        })
    }

    pub fn scale(&self, c: &Rational) -> WeakSymmetryTriple {
        WeakSymmetryTriple {
            data: self.data.scale(c),
            b: self.b.scale(c),
            alpha: self.alpha.scale(c),
        }
    }
}

impl fmt::Display for WeakSymmetryTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.data.x,
            self.data.g.to_text(self.data.x.chart().names()),
            self.b
        )
    }
}

/// Equality of weak symmetries: `g` only matters up to pullbacks from the
/// base.
pub fn triples_equal(sb: &SurrogateBundle, p: &WeakSymmetryTriple, q: &WeakSymmetryTriple) -> bool {
    p.data.x == q.data.x && p.b == q.b && sb.is_basic(&(&p.data.g - &q.data.g))
}

/// `[(Z, h), (Z', h')] = ([Z, Z'], Z(h') - Z'(h) - theta(Z, Z'))`.
pub fn section_bracket(sb: &SurrogateBundle, a: &SectionElement, b: &SectionElement) -> Result<SectionElement> {
    section_bracket_with(sb, a, b, true)
}

fn section_bracket_with(
    sb: &SurrogateBundle,
    a: &SectionElement,
    b: &SectionElement,
    with_theta: bool,
) -> Result<SectionElement> {
    sb.ensure_total(a.z.chart())?;
    sb.ensure_total(b.z.chart())?;
    let z = vf_bracket(&a.z, &b.z)?;
    let mut h = a.z.apply(&b.h)?.try_sub(&b.z.apply(&a.h)?)?;
    if with_theta {
        h = h.try_sub(&sb.theta_on(&a.z, &b.z)?)?;
    }
    SectionElement::new(sb, z, h)
}

/// `eta(Z, h) = ((Z, h), iota_Z theta + dh)`.
pub fn eta_map(sb: &SurrogateBundle, a: &SectionElement) -> Result<WeakSymmetryTriple> {
    sb.ensure_total(a.z.chart())?;
    let dh = ext_d(&DifferentialForm::function(&sb.total, a.h.clone())?);
    let b = interior(&a.z, &sb.theta)?.try_add(&dh)?;
    let data = MultVFData::new(sb, a.z.clone(), a.h.clone())?;
    WeakSymmetryTriple::new(sb, data, b)
        .map_err(|e| Error::Internal(format!("eta image of {a} is not a weak symmetry: {e}")))
}

/// `(X, g) . (Z, h) = ([X, Z], X(h) - Z(g) - theta(X, Z))`.
pub fn mult_action(sb: &SurrogateBundle, m: &MultVFData, a: &SectionElement) -> Result<SectionElement> {
    mult_action_with(sb, m, a, true)
}

fn mult_action_with(sb: &SurrogateBundle, m: &MultVFData, a: &SectionElement, with_theta: bool) -> Result<SectionElement> {
    sb.ensure_total(m.x.chart())?;
    sb.ensure_total(a.z.chart())?;
    if !sb.is_projectable(&m.x) {
        return Err(Error::invalid(format!("{} is not projectable", m.x)));
    }
    let z = vf_bracket(&m.x, &a.z)?;
    if !sb.is_vertical(&z) {
        return Err(Error::Internal(format!("[{}, {}] is not vertical", m.x, a.z)));
    }
    let mut h = m.x.apply(&a.h)?.try_sub(&a.z.apply(&m.g)?)?;
    if with_theta {
        h = h.try_sub(&sb.theta_on(&m.x, &a.z)?)?;
    }
    Ok(SectionElement { z, h })
}

/// `([X, X'], X(g') - X'(g) - theta(X, X'), L_X B' - L_X' B)`, re-validated.
pub fn wsym_bracket(sb: &SurrogateBundle, p: &WeakSymmetryTriple, q: &WeakSymmetryTriple) -> Result<WeakSymmetryTriple> {
    let (x, xp) = (&p.data.x, &q.data.x);
    sb.ensure_total(x.chart())?;
    sb.ensure_total(xp.chart())?;
    let bracket = vf_bracket(x, xp)?;
    let g = x
        .apply(&q.data.g)?
        .try_sub(&xp.apply(&p.data.g)?)?
        .try_sub(&sb.theta_on(x, xp)?)?;
    let b = lie_derivative(x, &q.b)?.try_sub(&lie_derivative(xp, &p.b)?)?;
    let data = MultVFData::new(sb, bracket, g)?;
    WeakSymmetryTriple::new(sb, data, b).map_err(|e| Error::Consistency {
        identity: "bracket of weak symmetries is a weak symmetry".into(),
        residual: format!("[{p}, {q}]: {e}"),
    })
}

/// Returns `alpha = B - iota_X theta - dg` when it is the pullback of a base
/// 1-form with `d alpha = iota_{pr_* X} omega`.
pub fn is_weak_symmetry(sb: &SurrogateBundle, m: &MultVFData, b: &DifferentialForm) -> Result<Option<DifferentialForm>> {
    sb.ensure_total(m.x.chart())?;
    let Some(projected) = sb.project(&m.x) else {
        return Err(Error::invalid(format!("{} is not projectable", m.x)));
    };
    let dg = ext_d(&DifferentialForm::function(&sb.total, m.g.clone())?);
    let candidate = b.try_sub(&interior(&m.x, &sb.theta)?)?.try_sub(&dg)?;
    let Some(alpha) = descend_to_base(&candidate, &sb.base, &sb.base_vars)? else {
        return Ok(None);
    };
    if ext_d(&alpha) == interior(&projected, &sb.omega)? {
        Ok(Some(alpha))
    } else {
        Ok(None)
    }
}

/// Deliberate breakage of one term, to demonstrate checker sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SectionPerturbation {
    #[default]
    None,
    /// Drop `theta(Z, Z')` from the section bracket.
    DropThetaSections,
    /// Drop `theta(X, Z)` from the action.
    DropThetaAction,
}

/// Sections acted on by weak symmetries through their `(X, g)` data.
#[derive(Debug, Clone)]
pub struct SectionCrossedModule {
    sb: SurrogateBundle,
    perturbation: SectionPerturbation,
}

pub fn build_section_crossed_module(sb: SurrogateBundle) -> SectionCrossedModule {
    SectionCrossedModule {
        sb,
        perturbation: SectionPerturbation::None,
    }
}

impl SectionCrossedModule {
    pub fn perturbed(mut self, perturbation: SectionPerturbation) -> Self {
        self.perturbation = perturbation;
        self
    }

    pub fn bundle(&self) -> &SurrogateBundle {
        &self.sb
    }
}

impl CrossedModule for SectionCrossedModule {
    type H = SectionElement;
    type G = WeakSymmetryTriple;

    fn bracket_h(&self, a: &SectionElement, b: &SectionElement) -> Result<SectionElement> {
        section_bracket_with(&self.sb, a, b, self.perturbation != SectionPerturbation::DropThetaSections)
    }

    fn bracket_g(&self, a: &WeakSymmetryTriple, b: &WeakSymmetryTriple) -> Result<WeakSymmetryTriple> {
        wsym_bracket(&self.sb, a, b)
    }

    fn eta(&self, v: &SectionElement) -> Result<WeakSymmetryTriple> {
        eta_map(&self.sb, v)
    }

    fn act(&self, x: &WeakSymmetryTriple, v: &SectionElement) -> Result<SectionElement> {
        mult_action_with(&self.sb, &x.data, v, self.perturbation != SectionPerturbation::DropThetaAction)
    }

    fn h_eq(&self, a: &SectionElement, b: &SectionElement) -> bool {
        a == b
    }

    fn g_eq(&self, a: &WeakSymmetryTriple, b: &WeakSymmetryTriple) -> bool {
        triples_equal(&self.sb, a, b)
    }

    fn h_add(&self, a: &SectionElement, b: &SectionElement) -> Result<SectionElement> {
        a.try_add(b)
    }

    fn g_add(&self, a: &WeakSymmetryTriple, b: &WeakSymmetryTriple) -> Result<WeakSymmetryTriple> {
        a.try_add(b)
    }

    fn h_scale(&self, c: &Rational, a: &SectionElement) -> SectionElement {
        a.scale(c)
    }

    fn g_scale(&self, c: &Rational, a: &WeakSymmetryTriple) -> WeakSymmetryTriple {
        a.scale(c)
    }

    fn h_zero(&self) -> SectionElement {
        SectionElement::zero(&self.sb)
    }

    fn g_zero(&self) -> WeakSymmetryTriple {
        WeakSymmetryTriple::zero(&self.sb)
    }

    fn validate_g(&self, x: &WeakSymmetryTriple) -> Result<()> {
        WeakSymmetryTriple::new(&self.sb, x.data.clone(), x.b.clone()).map(|_| ())
    }
}

impl LinearCoordinates for StrictLie2<SectionCrossedModule> {
    fn low_coordinates(&self, u: &SectionElement) -> BTreeMap<CoordKey, Rational> {
        let z = u.z.coordinates().into_iter().map(|((i, m), c)| ((0, vec![i], m), c));
        let h = u.h.terms().map(|(m, c)| ((1, vec![], m.clone()), c.clone()));
        z.chain(h).collect()
    }

    /// `g` contributes only through monomials involving a fiber variable.
    fn high_coordinates(&self, x: &WeakSymmetryTriple) -> BTreeMap<CoordKey, Rational> {
        let fiber = self.cm.sb.fiber_vars();
        let xs = x.data.x.coordinates().into_iter().map(|((i, m), c)| ((0, vec![i], m), c));
        let g = x
            .data
            .g
            .terms()
            .filter(|(m, _)| fiber.iter().any(|&i| m.exponents()[i] > 0))
            .map(|(m, c)| ((1, vec![], m.clone()), c.clone()));
        let b = x.b.coordinates().into_iter().map(|((idx, m), c)| ((2, idx, m), c));
        xs.chain(g).chain(b).collect()
    }
}

/// Random sections and weak symmetries. Weak symmetries are built as
/// `X = lift(X_alpha) + V`, `B = iota_X theta + dg + pr^* alpha` from a basis
/// of Hamiltonian pairs `(alpha, X_alpha)` on the base.
pub struct SectionSampler {
    sb: SurrogateBundle,
    hamiltonians: Vec<(DifferentialForm, VectorField)>,
}

impl SectionSampler {
    pub fn new(sb: &SurrogateBundle, degree_bound: u32) -> Result<Self> {
        Ok(SectionSampler {
            sb: sb.clone(),
            hamiltonians: hamiltonian_kernel(&sb.omega, degree_bound)?,
        })
    }

    fn random_vertical(&self, rng: &mut SampleRng) -> VectorField {
        let n = self.sb.total.dim();
        let mut comps = vec![Polynomial::zero(n); n];
        for &i in &self.sb.fiber_vars {
            comps[i] = random_nonzero_polynomial(rng, n, MAX_DEGREE, 2);
        }
        VectorField::new(&self.sb.total, comps).expect("component count matches chart")
    }
}

impl CrossedSampler<SectionElement, WeakSymmetryTriple> for SectionSampler {
    fn h(&mut self, rng: &mut SampleRng) -> Option<SectionElement> {
        let z = self.random_vertical(rng);
        let h = random_nonzero_polynomial(rng, self.sb.total.dim(), MAX_DEGREE, 3);
        SectionElement::new(&self.sb, z, h).ok()
    }

    fn g(&mut self, rng: &mut SampleRng) -> Option<WeakSymmetryTriple> {
        if self.hamiltonians.is_empty() {
            return None;
        }
        let sb = &self.sb;
        let mut alpha = DifferentialForm::zero(&sb.base, 1);
        let mut xbar = VectorField::zero(&sb.base);
        for _ in 0..rng.gen_range(1..=3) {
            let (a, x) = &self.hamiltonians[rng.gen_range(0..self.hamiltonians.len())];
            let c = random_rational(rng);
            alpha = alpha.try_add(&a.scale(&c)).ok()?;
            xbar = xbar.try_add(&x.scale(&c)).ok()?;
        }
        let x = sb.lift(&xbar).ok()?.try_add(&self.random_vertical(rng)).ok()?;
        let g = random_polynomial(rng, sb.total.dim(), MAX_DEGREE, 2);
        let dg = ext_d(&DifferentialForm::function(&sb.total, g.clone()).ok()?);
        let b = interior(&x, &sb.theta)
            .ok()?
            .try_add(&dg)
            .ok()?
            .try_add(&sb.pull_back(&alpha).ok()?)
            .ok()?;
        WeakSymmetryTriple::new(sb, MultVFData::new(sb, x, g).ok()?, b).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie2::{check_crossed_module, check_lie2_axioms, crossed_to_lie2, StrictSampler, EQ_A1, EQ_A2};
    use crate::random::rng_from_seed;
    use crate::report::Status;
    use crate::syntax::{parse_form, parse_polynomial, parse_vector_field};

    fn bundle(theta: &str) -> SurrogateBundle {
        let base = Chart::new(&["x", "y", "z"]).unwrap();
        let total = SurrogateBundle::total_chart(&base, &["u"]).unwrap();
        let omega = parse_form("dx^dy^dz", &base, None).unwrap();
        SurrogateBundle::new(&base, &total, omega, parse_form(theta, &total, None).unwrap()).unwrap()
    }

    fn fixture() -> SurrogateBundle {
        bundle("x*dy^dz + du^dx")
    }

    fn vf(sb: &SurrogateBundle, s: &str) -> VectorField {
        parse_vector_field(s, sb.total()).unwrap()
    }

    fn poly(sb: &SurrogateBundle, s: &str) -> Polynomial {
        parse_polynomial(s, sb.total()).unwrap()
    }

    fn form(sb: &SurrogateBundle, s: &str) -> DifferentialForm {
        parse_form(s, sb.total(), None).unwrap()
    }

    fn one_form(sb: &SurrogateBundle, s: &str) -> DifferentialForm {
        parse_form(s, sb.total(), Some(1)).unwrap()
    }

    fn sec(sb: &SurrogateBundle, z: &str, h: &str) -> SectionElement {
        SectionElement::new(sb, vf(sb, z), poly(sb, h)).unwrap()
    }

    fn data(sb: &SurrogateBundle, x: &str, g: &str) -> MultVFData {
        MultVFData::new(sb, vf(sb, x), poly(sb, g)).unwrap()
    }

    #[test]
    fn bundle_validation() {
        let base = Chart::new(&["x", "y", "z"]).unwrap();
        let total = SurrogateBundle::total_chart(&base, &["u"]).unwrap();
        let omega = parse_form("dx^dy^dz", &base, None).unwrap();
        let bad = parse_form("y*dy^dz", &total, None).unwrap();
        let err = SurrogateBundle::new(&base, &total, omega, bad).unwrap_err();
        assert!(matches!(err, Error::Consistency { .. }));
    }

    #[test]
    fn section_bracket_fixtures() {
        let sb = fixture();
        let a = sec(&sb, "d/du", "0");
        assert_eq!(section_bracket(&sb, &a, &sec(&sb, "u*d/du", "0")).unwrap(), sec(&sb, "d/du", "0"));
        assert_eq!(section_bracket(&sb, &a, &sec(&sb, "0", "x*u")).unwrap(), sec(&sb, "0", "x"));
        assert!(section_bracket(&sb, &a, &a).unwrap().is_zero());
        assert!(SectionElement::new(&sb, vf(&sb, "d/dx"), poly(&sb, "0")).is_err());
    }

    #[test]
    fn eta_fixtures() {
        let sb = fixture();
        let t = eta_map(&sb, &sec(&sb, "d/du", "0")).unwrap();
        assert_eq!(t.b(), &form(&sb, "dx"));
        let t = eta_map(&sb, &sec(&sb, "0", "x*u^2")).unwrap();
        assert!(t.x().is_zero());
        assert_eq!(t.g(), &poly(&sb, "x*u^2"));
        assert_eq!(t.b(), &form(&sb, "u^2*dx + 2*x*u*du"));
    }

    #[test]
    fn eta_lands_in_weak_symmetries() {
        let sb = fixture();
        let mut s = SectionSampler::new(&sb, 1).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let a = s.h(&mut rng).unwrap();
            let t = eta_map(&sb, &a).unwrap();
            let lhs = lie_derivative(t.x(), sb.theta()).unwrap();
            assert_eq!(lhs, ext_d(t.b()));
            assert!(t.alpha().is_zero());
        }
    }

    #[test]
    fn action_fixtures() {
        let sb = fixture();
        let a = sec(&sb, "d/du", "0");
        assert!(mult_action(&sb, &data(&sb, "d/dz", "0"), &a).unwrap().is_zero());
        assert_eq!(mult_action(&sb, &data(&sb, "d/dx", "0"), &a).unwrap(), sec(&sb, "0", "1"));
        assert!(mult_action(&sb, &data(&sb, "y*d/dx + d/du", "x*u"), &sec(&sb, "0", "1"))
            .unwrap()
            .is_zero());
        let non_projectable = MultVFData {
            x: vf(&sb, "u*d/dx"),
            g: poly(&sb, "0"),
        };
        assert!(mult_action(&sb, &non_projectable, &a).is_err());
    }

    #[test]
    fn action_ignores_basic_shift_of_g() {
        let sb = fixture();
        let mut s = SectionSampler::new(&sb, 1).unwrap();
        let mut rng = rng_from_seed(11);
        for _ in 0..10 {
            let t = s.g(&mut rng).unwrap();
            let a = s.h(&mut rng).unwrap();
            let f = sb.pull_back_function(&random_polynomial(&mut rng, 3, 3, 3)).unwrap();
            let shifted = MultVFData::new(&sb, t.x().clone(), t.g() + &f).unwrap();
            assert_eq!(mult_action(&sb, t.data(), &a).unwrap(), mult_action(&sb, &shifted, &a).unwrap());
        }
    }

    #[test]
    fn wsym_bracket_fixture() {
        let sb = fixture();
        let p = WeakSymmetryTriple::new(&sb, data(&sb, "d/dz", "0"), one_form(&sb, "0")).unwrap();
        let b2 = interior(&vf(&sb, "d/dx"), sb.theta()).unwrap().try_add(&form(&sb, "y*dz")).unwrap();
        assert_eq!(b2, form(&sb, "-du + y*dz"));
        let q = WeakSymmetryTriple::new(&sb, data(&sb, "d/dx", "0"), b2).unwrap();
        let r = wsym_bracket(&sb, &p, &q).unwrap();
        assert!(r.x().is_zero() && r.g().is_zero() && r.b().is_zero());
        let pp = wsym_bracket(&sb, &p, &p).unwrap();
        assert!(triples_equal(&sb, &pp, &WeakSymmetryTriple::zero(&sb)));
    }

    #[test]
    fn weak_symmetry_recognition() {
        let sb = fixture();
        let b = interior(&vf(&sb, "d/dz"), sb.theta()).unwrap().try_add(&form(&sb, "x*dy")).unwrap();
        assert!(b.is_zero());
        let alpha = is_weak_symmetry(&sb, &data(&sb, "d/dz", "0"), &b).unwrap().unwrap();
        assert_eq!(alpha, parse_form("x*dy", sb.base(), None).unwrap());

        let d = data(&sb, "u*d/du", "x*u");
        let b = interior(d.x(), sb.theta()).unwrap().try_add(&form(&sb, "u*dx + x*du")).unwrap();
        assert!(is_weak_symmetry(&sb, &d, &b).unwrap().unwrap().is_zero());

        let bare = bundle("x*dy^dz");
        let alpha = is_weak_symmetry(&bare, &data(&bare, "d/dz", "0"), &one_form(&bare, "0")).unwrap().unwrap();
        assert_eq!(alpha, parse_form("x*dy", bare.base(), None).unwrap());

        assert!(is_weak_symmetry(&sb, &data(&sb, "d/dz", "0"), &form(&sb, "y*dx")).unwrap().is_none());
        assert!(is_weak_symmetry(&sb, &data(&sb, "d/dz", "0"), &form(&sb, "u*dx")).unwrap().is_none());
    }

    #[test]
    fn crossed_module_passes_and_strict_algebra_follows() {
        let sb = fixture();
        let cm = build_section_crossed_module(sb.clone());
        let r = check_crossed_module(&cm, &mut SectionSampler::new(&sb, 1).unwrap(), 8, 7);
        assert_eq!(r.status(), Status::Pass, "{r:#?}");
        let strict = crossed_to_lie2(cm);
        let r = check_lie2_axioms(&strict, &mut StrictSampler(SectionSampler::new(&sb, 1).unwrap()), 6, 7);
        assert_eq!(r.status(), Status::Pass, "{r:#?}");
    }

    #[test]
    fn dropping_theta_from_the_action_breaks_a2() {
        let sb = fixture();
        let cm = build_section_crossed_module(sb.clone()).perturbed(SectionPerturbation::DropThetaAction);
        let r = check_crossed_module(&cm, &mut SectionSampler::new(&sb, 1).unwrap(), 8, 7);
        assert!(r.failed(EQ_A2), "{r:#?}");
    }

    #[test]
    fn two_dimensional_fiber_sees_theta_on_verticals() {
        let base = Chart::new(&["x", "y", "z"]).unwrap();
        let total = SurrogateBundle::total_chart(&base, &["u", "v"]).unwrap();
        let omega = parse_form("dx^dy^dz", &base, None).unwrap();
        let theta = parse_form("x*dy^dz + du^dx + u*du^dv", &total, None).unwrap();
        let sb = SurrogateBundle::new(&base, &total, omega, theta).unwrap();
        let cm = build_section_crossed_module(sb.clone());
        let r = check_crossed_module(&cm, &mut SectionSampler::new(&sb, 1).unwrap(), 6, 2);
        assert_eq!(r.status(), Status::Pass, "{r:#?}");
        let broken = cm.perturbed(SectionPerturbation::DropThetaSections);
        let r = check_crossed_module(&broken, &mut SectionSampler::new(&sb, 1).unwrap(), 6, 2);
        assert!(r.failed(EQ_A1), "{r:#?}");
    }

    #[test]
    fn closed_shift_of_theta_leaves_vertical_brackets() {
        let sb = fixture();
        let shifted = sb.with_theta(sb.theta().try_add(&form(&sb, "x*dx^dy + dy^dz")).unwrap()).unwrap();
        let mut s = SectionSampler::new(&sb, 1).unwrap();
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let a = s.h(&mut rng).unwrap();
            let b = s.h(&mut rng).unwrap();
            assert_eq!(section_bracket(&sb, &a, &b).unwrap(), section_bracket(&shifted, &a, &b).unwrap());
        }
    }

    #[test]
    fn point_fiber_has_abelian_sections() {
        let base = Chart::new(&["x", "y", "z"]).unwrap();
        let omega = parse_form("dx^dy^dz", &base, None).unwrap();
        let chi = parse_form("x*dy^dz", &base, None).unwrap();
        let sb = SurrogateBundle::new(&base, &base, omega, chi).unwrap();
        assert_eq!(sb.fiber_dim(), 0);
        let a = SectionElement::new(&sb, VectorField::zero(&base), parse_polynomial("x*y", &base).unwrap()).unwrap();
        let b = SectionElement::new(&sb, VectorField::zero(&base), parse_polynomial("z", &base).unwrap()).unwrap();
        assert!(section_bracket(&sb, &a, &b).unwrap().is_zero());
        let t = eta_map(&sb, &a).unwrap();
        assert!(triples_equal(&sb, &t, &WeakSymmetryTriple::new(&sb, t.data().clone(), t.b().clone()).unwrap()));
    }
}

//! The Lie 2-algebra of Hamiltonian observables of a 2-plectic structure:
//! functions in degree -1, Hamiltonian pairs in degree 0.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exterior::DifferentialForm;
use crate::lie2::{CoordKey, GradedElement, Lie2Algebra, Lie2Sampler, LinearCoordinates};
use crate::plectic::{hamiltonian_basis, l2_unchecked, l3_unchecked, solve_hamiltonian, HamiltonianPair, PlecticStructure};
use crate::polyring::{Monomial, Polynomial, Rational};
use crate::random::{random_polynomial, random_rational, SampleRng, MAX_DEGREE};

pub type ObservableElement = GradedElement<DifferentialForm, HamiltonianPair>;

/// `l1 = d`, `l2` and `l3` from the plectic brackets, `l2(x, f) = 0`.
#[derive(Debug, Clone)]
pub struct Observables {
    ps: PlecticStructure,
}

pub fn build_observables(ps: PlecticStructure) -> Observables {
    Observables { ps }
}

impl Observables {
    pub fn plectic(&self) -> &PlecticStructure {
        &self.ps
    }

    /// Wraps a polynomial as a degree -1 element.
    pub fn function(&self, f: Polynomial) -> Result<DifferentialForm> {
        DifferentialForm::function(self.ps.chart(), f)
    }

    fn ensure_function(&self, f: &DifferentialForm) -> Result<()> {
        if f.degree() != 0 || f.chart() != self.ps.chart() {
            return Err(Error::invalid(format!("{f} is not a function on the plectic chart")));
        }
        Ok(())
    }
}

/// Degree 0 element for a Hamiltonian 1-form, carrying its solved field.
pub fn ham_element(ps: &PlecticStructure, alpha: &DifferentialForm, degree_bound: u32) -> Result<ObservableElement> {
    Ok(GradedElement::High(solve_hamiltonian(ps, alpha, degree_bound)?.pair))
}

impl Lie2Algebra for Observables {
    type Low = DifferentialForm;
    type High = HamiltonianPair;

    fn l1(&self, f: &DifferentialForm) -> Result<HamiltonianPair> {
        self.ensure_function(f)?;
        HamiltonianPair::exact(self.ps.chart(), &f.component(&[]))
    }

    fn l2(&self, x: &HamiltonianPair, y: &HamiltonianPair) -> Result<HamiltonianPair> {
        l2_unchecked(&self.ps, x, y)
    }

    fn l2_mixed(&self, _: &HamiltonianPair, u: &DifferentialForm) -> Result<DifferentialForm> {
        self.ensure_function(u)?;
        Ok(DifferentialForm::zero(self.ps.chart(), 0))
    }

    fn l3(&self, x: &HamiltonianPair, y: &HamiltonianPair, z: &HamiltonianPair) -> Result<DifferentialForm> {
        DifferentialForm::function(self.ps.chart(), l3_unchecked(&self.ps, x, y, z)?)
    }

    fn low_eq(&self, a: &DifferentialForm, b: &DifferentialForm) -> bool {
        a == b
    }

    fn high_eq(&self, a: &HamiltonianPair, b: &HamiltonianPair) -> bool {
        a == b
    }

    fn low_add(&self, a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
        a.try_add(b)
    }

    fn high_add(&self, a: &HamiltonianPair, b: &HamiltonianPair) -> Result<HamiltonianPair> {
        a.try_add(b)
    }

    fn low_scale(&self, c: &Rational, a: &DifferentialForm) -> DifferentialForm {
        a.scale(c)
    }

    fn high_scale(&self, c: &Rational, a: &HamiltonianPair) -> HamiltonianPair {
        a.scale(c)
    }

    fn low_zero(&self) -> DifferentialForm {
        DifferentialForm::zero(self.ps.chart(), 0)
    }

    fn high_zero(&self) -> HamiltonianPair {
        HamiltonianPair::zero(self.ps.chart())
    }
}

impl LinearCoordinates for Observables {
    fn low_coordinates(&self, u: &DifferentialForm) -> BTreeMap<CoordKey, Rational> {
        u.coordinates().into_iter().map(|((b, m), c)| ((0, b, m), c)).collect()
    }

    fn high_coordinates(&self, x: &HamiltonianPair) -> BTreeMap<CoordKey, Rational> {
        let alpha = x.alpha().coordinates().into_iter().map(|((b, m), c)| ((0, b, m), c));
        let field = x.field().coordinates().into_iter().map(|((i, m), c)| ((1, vec![i], m), c));
        alpha.chain(field).collect()
    }
}

/// Random observables: functions of degree at most [`MAX_DEGREE`], and
/// sparse rational combinations of a Hamiltonian basis. Each combination
/// takes one to three basis pairs with a nonzero field and, half of the
/// time, one exact pair.
pub struct ObservableSampler {
    ps: PlecticStructure,
    with_field: Vec<HamiltonianPair>,
    exact: Vec<HamiltonianPair>,
}

impl ObservableSampler {
    /// Uses all Hamiltonian pairs whose coefficients have degree at most
    /// `degree_bound`.
    pub fn new(ps: &PlecticStructure, degree_bound: u32) -> Result<Self> {
        Ok(Self::from_pairs(ps, hamiltonian_basis(ps, degree_bound)?))
    }

    /// Samples combinations of the given pairs instead of a computed basis.
    pub fn from_pairs(ps: &PlecticStructure, pairs: Vec<HamiltonianPair>) -> Self {
        let (with_field, exact) = pairs.into_iter().partition(|p| !p.field().is_zero());
        ObservableSampler {
            ps: ps.clone(),
            with_field,
            exact,
        }
    }

    pub fn basis_len(&self) -> usize {
        self.with_field.len() + self.exact.len()
    }
}

impl Lie2Sampler<DifferentialForm, HamiltonianPair> for ObservableSampler {
    fn low(&mut self, rng: &mut SampleRng) -> Option<DifferentialForm> {
        let dim = self.ps.chart().dim();
        DifferentialForm::function(self.ps.chart(), random_polynomial(rng, dim, MAX_DEGREE, 3)).ok()
    }

    fn high(&mut self, rng: &mut SampleRng) -> Option<HamiltonianPair> {
        use rand::Rng;
        let pick = |pool: &[HamiltonianPair], rng: &mut SampleRng| {
            pool[rng.gen_range(0..pool.len())].scale(&random_rational(rng))
        };
        let mut out = HamiltonianPair::zero(self.ps.chart());
        if !self.with_field.is_empty() {
            for _ in 0..rng.gen_range(1..=3) {
                out = out.try_add(&pick(&self.with_field, rng)).ok()?;
            }
        }
        if !self.exact.is_empty() && (self.with_field.is_empty() || rng.gen_bool(0.5)) {
            out = out.try_add(&pick(&self.exact, rng)).ok()?;
        }
        (self.basis_len() > 0).then_some(out)
    }
}

/// Functions on the plectic chart with monomials of degree at most `cap`.
pub fn function_truncation(ps: &PlecticStructure, cap: u32) -> Vec<DifferentialForm> {
    let dim = ps.chart().dim();
    Monomial::all_up_to(dim, cap)
        .into_iter()
        .map(|m| {
            DifferentialForm::function(ps.chart(), Polynomial::monomial(m, Rational::from_integer(1.into())))
                .expect("same chart")
        })
        .collect()
}

/// `l1` kernel on a truncation must consist of constants.
pub fn is_constant(f: &DifferentialForm) -> bool {
    f.degree() == 0 && f.component(&[]).terms().all(|(m, c)| m.total_degree() == 0 || c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{Chart, VectorField};
    use crate::lie2::{check_lie2_axioms, ScaledL3, EQ_JACOBIATOR, LIE2_AXIOMS};
    use crate::polyring::int;
    use crate::report::Status;
    use crate::syntax::{parse_form, parse_polynomial, parse_vector_field};

    fn r3() -> PlecticStructure {
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        PlecticStructure::new(parse_form("dx^dy^dz", &c, None).unwrap(), &[vec![int(0); 3]]).unwrap()
    }

    fn field(ps: &PlecticStructure, s: &str) -> VectorField {
        parse_vector_field(s, ps.chart()).unwrap()
    }

    fn ham(ps: &PlecticStructure, s: &str) -> HamiltonianPair {
        ham_element(ps, &parse_form(s, ps.chart(), Some(1)).unwrap(), 3)
            .unwrap()
            .into_high()
            .unwrap()
    }

    #[test]
    fn ham_element_fixtures() {
        let ps = r3();
        assert_eq!(ham(&ps, "x*dy").field(), &field(&ps, "d/dz"));
        assert!(ham(&ps, "dx").field().is_zero());
        assert_eq!(ham(&ps, "y*dz").field(), &field(&ps, "d/dx"));
        let e = ham_element(&ps, &parse_form("x*dy", ps.chart(), None).unwrap(), 3).unwrap();
        assert_eq!(e.degree(), 0);
    }

    #[test]
    fn l1_and_brackets_of_exact_pairs() {
        let ps = r3();
        let obs = build_observables(ps.clone());
        let x = obs.function(parse_polynomial("x", ps.chart()).unwrap()).unwrap();
        let p = obs.l1(&x).unwrap();
        assert_eq!(p.alpha(), &parse_form("dx", ps.chart(), None).unwrap());
        assert!(p.field().is_zero());
        let g = obs.function(parse_polynomial("y^2*z - 3*x", ps.chart()).unwrap()).unwrap();
        assert!(obs.l2(&p, &obs.l1(&g).unwrap()).unwrap().is_zero());
        assert!(obs.l2_mixed(&ham(&ps, "x*dy"), &g).unwrap().is_zero());
    }

    #[test]
    fn axioms_hold_and_doubled_l3_breaks_the_jacobiator() {
        let ps = r3();
        let obs = build_observables(ps.clone());
        let mut sampler = ObservableSampler::new(&ps, 2).unwrap();
        let r = check_lie2_axioms(&obs, &mut sampler, 12, 5);
        assert_eq!(r.status(), Status::Pass, "{r:#?}");
        for eq in LIE2_AXIOMS {
            assert!(r.passed(eq));
        }
        let doubled = ScaledL3 {
            inner: &obs,
            factor: int(2),
        };
        let r = check_lie2_axioms(&doubled, &mut sampler, 12, 5);
        assert!(r.failed(EQ_JACOBIATOR), "{r:#?}");
        assert_eq!(
            r.results.iter().filter(|e| e.outcome.status() == Status::Fail).count(),
            1,
            "{r:#?}"
        );
    }

    #[test]
    fn truncated_kernel_is_constants() {
        let ps = r3();
        let obs = build_observables(ps.clone());
        let fs = function_truncation(&ps, 2);
        assert_eq!(fs.len(), 10);
        for f in &fs {
            let image_is_zero = obs.l1(f).unwrap().is_zero();
            assert_eq!(image_is_zero, is_constant(f));
        }
    }
}

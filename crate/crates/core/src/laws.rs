//! Randomized check of the Cartan calculus identities.

use rand::Rng;

use crate::error::Result;
use crate::exterior::{ext_d, interior, lie_derivative, vf_bracket, wedge, Chart, DifferentialForm, VectorField};
use crate::polyring::{int, Rational};
use crate::random::{random_form, random_vector_field, rng_from_seed, MAX_DEGREE};
use crate::report::{run_equations, CheckReport, Equation, Tuple, Verdict};

pub const EQ_D_SQUARED: &str = "d-squared";
pub const EQ_GRADED_COMMUTATIVITY: &str = "graded-commutativity";
pub const EQ_GRADED_LEIBNIZ: &str = "graded-leibniz";
pub const EQ_CARTAN: &str = "cartan-formula";
pub const EQ_LIE_COMMUTES_WITH_D: &str = "lie-commutes-with-d";
pub const EQ_INTERIOR_DERIVATION: &str = "interior-derivation";
pub const EQ_INTERIOR_NILPOTENT: &str = "interior-nilpotent";
pub const EQ_LIE_OF_BRACKET: &str = "lie-of-bracket";
pub const EQ_INTERIOR_OF_BRACKET: &str = "interior-of-bracket";
pub const EQ_FIELD_JACOBI: &str = "field-jacobi";

pub const EXTERIOR_LAWS: [&str; 10] = [
    EQ_D_SQUARED,
    EQ_GRADED_COMMUTATIVITY,
    EQ_GRADED_LEIBNIZ,
    EQ_CARTAN,
    EQ_LIE_COMMUTES_WITH_D,
    EQ_INTERIOR_DERIVATION,
    EQ_INTERIOR_NILPOTENT,
    EQ_LIE_OF_BRACKET,
    EQ_INTERIOR_OF_BRACKET,
    EQ_FIELD_JACOBI,
];

/// `a` has any degree, `b` has degree at least 1.
pub struct LawTuple {
    pub a: DifferentialForm,
    pub b: DifferentialForm,
    pub x: VectorField,
    pub y: VectorField,
    pub z: VectorField,
}

impl Tuple for LawTuple {
    fn entry(&self, name: &str) -> Option<String> {
        Some(match name {
            "a" => self.a.to_string(),
            "b" => self.b.to_string(),
            "X" => self.x.to_string(),
            "Y" => self.y.to_string(),
            "Z" => self.z.to_string(),
            _ => return None,
        })
    }
}

fn sign(k: usize) -> Rational {
    int(if k % 2 == 0 { 1 } else { -1 })
}

fn same(lhs: &DifferentialForm, rhs: &DifferentialForm) -> Result<Verdict> {
    let residual = lhs.try_sub(rhs)?;
    Ok(Verdict::from_residual(residual.is_zero(), || residual.to_text()))
}

/// `iota_X a`, with the 0-form case read as zero.
fn iota(x: &VectorField, a: &DifferentialForm) -> Result<Option<DifferentialForm>> {
    if a.degree() == 0 {
        return Ok(None);
    }
    interior(x, a).map(Some)
}

fn sample(rng: &mut impl Rng, chart: &Chart) -> LawTuple {
    let dim = chart.dim();
    let ka = rng.gen_range(0..=dim);
    let kb = rng.gen_range(1..=dim);
    LawTuple {
        a: random_form(rng, chart, ka, MAX_DEGREE),
        b: random_form(rng, chart, kb, MAX_DEGREE),
        x: random_vector_field(rng, chart, MAX_DEGREE),
        y: random_vector_field(rng, chart, MAX_DEGREE),
        z: random_vector_field(rng, chart, MAX_DEGREE),
    }
}

fn equations<'a>() -> Vec<Equation<'a, LawTuple>> {
    vec![
        Equation::new(EQ_D_SQUARED, &["a"], |t: &LawTuple| {
            let dd = ext_d(&ext_d(&t.a));
            Ok(Verdict::from_residual(dd.is_zero(), || dd.to_text()))
        }),
        Equation::new(EQ_GRADED_COMMUTATIVITY, &["a", "b"], |t: &LawTuple| {
            let s = sign(t.a.degree() * t.b.degree());
            same(&wedge(&t.a, &t.b)?, &wedge(&t.b, &t.a)?.scale(&s))
        }),
        Equation::new(EQ_GRADED_LEIBNIZ, &["a", "b"], |t: &LawTuple| {
            let lhs = ext_d(&wedge(&t.a, &t.b)?);
            let rhs = wedge(&ext_d(&t.a), &t.b)?.try_add(&wedge(&t.a, &ext_d(&t.b))?.scale(&sign(t.a.degree())))?;
            same(&lhs, &rhs)
        }),
        Equation::new(EQ_CARTAN, &["X", "b"], |t: &LawTuple| {
            let rhs = ext_d(&interior(&t.x, &t.b)?).try_add(&interior(&t.x, &ext_d(&t.b))?)?;
            same(&lie_derivative(&t.x, &t.b)?, &rhs)
        }),
        Equation::new(EQ_LIE_COMMUTES_WITH_D, &["X", "a"], |t: &LawTuple| {
            same(&ext_d(&lie_derivative(&t.x, &t.a)?), &lie_derivative(&t.x, &ext_d(&t.a))?)
        }),
        Equation::new(EQ_INTERIOR_DERIVATION, &["X", "a", "b"], |t: &LawTuple| {
            let lhs = interior(&t.x, &wedge(&t.a, &t.b)?)?;
            let second = wedge(&t.a, &interior(&t.x, &t.b)?)?.scale(&sign(t.a.degree()));
            let rhs = match iota(&t.x, &t.a)? {
                Some(ia) => wedge(&ia, &t.b)?.try_add(&second)?,
                None => second,
            };
            same(&lhs, &rhs)
        }),
        Equation::new(EQ_INTERIOR_NILPOTENT, &["X", "b"], |t: &LawTuple| {
            let once = interior(&t.x, &t.b)?;
            match iota(&t.x, &once)? {
                Some(twice) => Ok(Verdict::from_residual(twice.is_zero(), || twice.to_text())),
                None => Ok(Verdict::Holds),
            }
        }),
        Equation::new(EQ_LIE_OF_BRACKET, &["X", "Y", "a"], |t: &LawTuple| {
            let lhs = lie_derivative(&vf_bracket(&t.x, &t.y)?, &t.a)?;
            let xy = lie_derivative(&t.x, &lie_derivative(&t.y, &t.a)?)?;
            let yx = lie_derivative(&t.y, &lie_derivative(&t.x, &t.a)?)?;
            same(&lhs, &xy.try_sub(&yx)?)
        }),
        Equation::new(EQ_INTERIOR_OF_BRACKET, &["X", "Y", "b"], |t: &LawTuple| {
            let lhs = interior(&vf_bracket(&t.x, &t.y)?, &t.b)?;
            let rhs = lie_derivative(&t.x, &interior(&t.y, &t.b)?)?
                .try_sub(&interior(&t.y, &lie_derivative(&t.x, &t.b)?)?)?;
            same(&lhs, &rhs)
        }),
        Equation::new(EQ_FIELD_JACOBI, &["X", "Y", "Z"], |t: &LawTuple| {
            let cyc = |p: &VectorField, q: &VectorField, r: &VectorField| vf_bracket(p, &vf_bracket(q, r)?);
            let sum = cyc(&t.x, &t.y, &t.z)?
                .try_add(&cyc(&t.y, &t.z, &t.x)?)?
                .try_add(&cyc(&t.z, &t.x, &t.y)?)?;
            Ok(Verdict::from_residual(sum.is_zero(), || sum.to_text()))
        }),
    ]
}

/// Draws `count` tuples, cycling through `charts`, and evaluates every
/// identity in [`EXTERIOR_LAWS`] exactly.
pub fn check_exterior_laws(charts: &[Chart], count: usize, seed: u64) -> CheckReport {
    let mut rng = rng_from_seed(seed);
    let tuples: Vec<LawTuple> = if charts.is_empty() {
        Vec::new()
    } else {
        (0..count).map(|i| sample(&mut rng, &charts[i % charts.len()])).collect()
    };
    run_equations("exterior-laws", count, &tuples, &equations())
}

/// Like [`check_exterior_laws`] on caller-supplied tuples.
pub fn check_exterior_laws_on(tuples: &[LawTuple]) -> CheckReport {
    run_equations("exterior-laws", tuples.len(), tuples, &equations())
}

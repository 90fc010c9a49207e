//! Two-term L-infinity algebras, crossed modules and their morphisms, with
//! sample-based checkers for the defining identities.
//!
//! Elements of degree 0 are called `High`, elements of degree -1 `Low`. The
//! bracket `l2` is stored only on the nonzero degree combinations: `l2(x, y)`
//! on `High x High` and `l2(x, u)` on `High x Low`. Graded antisymmetry fixes
//! the rest: `l2(u, x) = -l2(x, u)` and `l2(u, v) = 0`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::polyring::{format_rational, Monomial, Rational};
use crate::random::{random_small, rng_from_seed, SampleRng};
use crate::report::{run_equations, CheckReport, Equation, EquationResult, Outcome, Tuple, Verdict, Witness};

/// An element of a two-term complex, tagged with its degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GradedElement<L, H> {
    /// Degree -1.
    Low(L),
    /// Degree 0.
    High(H),
}

impl<L, H> GradedElement<L, H> {
    pub fn degree(&self) -> i32 {
        match self {
            GradedElement::Low(_) => -1,
            GradedElement::High(_) => 0,
        }
    }

    pub fn into_low(self) -> Result<L> {
        match self {
            GradedElement::Low(l) => Ok(l),
            GradedElement::High(_) => Err(Error::invalid("expected an element of degree -1")),
        }
    }

    pub fn into_high(self) -> Result<H> {
        match self {
            GradedElement::High(h) => Ok(h),
            GradedElement::Low(_) => Err(Error::invalid("expected an element of degree 0")),
        }
    }
}

impl<L: fmt::Display, H: fmt::Display> fmt::Display for GradedElement<L, H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradedElement::Low(l) => l.fmt(f),
            GradedElement::High(h) => h.fmt(f),
        }
    }
}

pub trait Lie2Algebra: Sync {
    type Low: Clone + Send + Sync + fmt::Display;
    type High: Clone + Send + Sync + fmt::Display;

    fn l1(&self, u: &Self::Low) -> Result<Self::High>;
    fn l2(&self, x: &Self::High, y: &Self::High) -> Result<Self::High>;
    /// `l2(x, u)` with `x` of degree 0 and `u` of degree -1.
    fn l2_mixed(&self, x: &Self::High, u: &Self::Low) -> Result<Self::Low>;
    fn l3(&self, x: &Self::High, y: &Self::High, z: &Self::High) -> Result<Self::Low>;

    fn low_eq(&self, a: &Self::Low, b: &Self::Low) -> bool;
    fn high_eq(&self, a: &Self::High, b: &Self::High) -> bool;
    fn low_add(&self, a: &Self::Low, b: &Self::Low) -> Result<Self::Low>;
    fn high_add(&self, a: &Self::High, b: &Self::High) -> Result<Self::High>;
    fn low_scale(&self, c: &Rational, a: &Self::Low) -> Self::Low;
    fn high_scale(&self, c: &Rational, a: &Self::High) -> Self::High;
    fn low_zero(&self) -> Self::Low;
    fn high_zero(&self) -> Self::High;
}

/// Linear combination `sum c_i a_i` of degree -1 elements.
pub fn low_combination<A: Lie2Algebra + ?Sized>(alg: &A, terms: &[(Rational, &A::Low)]) -> Result<A::Low> {
    terms
        .iter()
        .try_fold(alg.low_zero(), |acc, (c, a)| alg.low_add(&acc, &alg.low_scale(c, a)))
}

/// Linear combination `sum c_i x_i` of degree 0 elements.
pub fn high_combination<A: Lie2Algebra + ?Sized>(alg: &A, terms: &[(Rational, &A::High)]) -> Result<A::High> {
    terms
        .iter()
        .try_fold(alg.high_zero(), |acc, (c, a)| alg.high_add(&acc, &alg.high_scale(c, a)))
}

fn signed(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn compare_low<A: Lie2Algebra + ?Sized>(alg: &A, lhs: &A::Low, rhs: &A::Low) -> Result<Verdict> {
    if alg.low_eq(lhs, rhs) {
        return Ok(Verdict::Holds);
    }
    let diff = alg.low_add(lhs, &alg.low_scale(&signed(-1), rhs))?;
    Ok(Verdict::Violated(diff.to_string()))
}

fn compare_high<A: Lie2Algebra + ?Sized>(alg: &A, lhs: &A::High, rhs: &A::High) -> Result<Verdict> {
    if alg.high_eq(lhs, rhs) {
        return Ok(Verdict::Holds);
    }
    let diff = alg.high_add(lhs, &alg.high_scale(&signed(-1), rhs))?;
    Ok(Verdict::Violated(diff.to_string()))
}

fn both(a: Verdict, b: Verdict) -> Verdict {
    match a {
        Verdict::Holds => b,
        v => v,
    }
}

/// Draws random elements of each degree. Returning `None` means the source
/// is exhausted.
pub trait Lie2Sampler<L, H> {
    fn low(&mut self, rng: &mut SampleRng) -> Option<L>;
    fn high(&mut self, rng: &mut SampleRng) -> Option<H>;
}

/// Cycles through fixed lists, then reports exhaustion after `limit` draws
/// of each degree.
pub struct FixtureSampler<L, H> {
    lows: Vec<L>,
    highs: Vec<H>,
    limit: usize,
    drawn_low: usize,
    drawn_high: usize,
}

impl<L, H> FixtureSampler<L, H> {
    pub fn new(lows: Vec<L>, highs: Vec<H>, limit: usize) -> Self {
        FixtureSampler {
            lows,
            highs,
            limit,
            drawn_low: 0,
            drawn_high: 0,
        }
    }
}

impl<L: Clone, H: Clone> Lie2Sampler<L, H> for FixtureSampler<L, H> {
    fn low(&mut self, _: &mut SampleRng) -> Option<L> {
        if self.lows.is_empty() || self.drawn_low >= self.limit {
            return None;
        }
        let v = self.lows[self.drawn_low % self.lows.len()].clone();
        self.drawn_low += 1;
        Some(v)
    }

    fn high(&mut self, _: &mut SampleRng) -> Option<H> {
        if self.highs.is_empty() || self.drawn_high >= self.limit {
            return None;
        }
        let v = self.highs[self.drawn_high % self.highs.len()].clone();
        self.drawn_high += 1;
        Some(v)
    }
}

pub struct Lie2Tuple<L, H> {
    pub x: H,
    pub y: H,
    pub z: H,
    pub t: H,
    pub u: L,
    pub v: L,
    pub c: Rational,
}

impl<L: fmt::Display + Sync, H: fmt::Display + Sync> Tuple for Lie2Tuple<L, H> {
    fn entry(&self, name: &str) -> Option<String> {
        Some(match name {
            "x" => self.x.to_string(),
            "y" => self.y.to_string(),
            "z" => self.z.to_string(),
            "t" => self.t.to_string(),
            "u" => self.u.to_string(),
            "v" => self.v.to_string(),
            "c" => format_rational(&self.c),
            _ => return None,
        })
    }
}

fn draw_lie2_tuples<L, H, S>(sampler: &mut S, count: usize, seed: u64) -> Vec<Lie2Tuple<L, H>>
where
    S: Lie2Sampler<L, H> + ?Sized,
{
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let tuple = (|| {
            Some(Lie2Tuple {
                x: sampler.high(&mut rng)?,
                y: sampler.high(&mut rng)?,
                z: sampler.high(&mut rng)?,
                t: sampler.high(&mut rng)?,
                u: sampler.low(&mut rng)?,
                v: sampler.low(&mut rng)?,
                c: random_small(&mut rng),
            })
        })();
        match tuple {
            Some(t) => out.push(t),
            None => break,
        }
    }
    out
}

pub const EQ_L1_EQUIVARIANCE: &str = "l1-equivariance";
pub const EQ_L1_SYMMETRY: &str = "l1-symmetry";
pub const EQ_JACOBIATOR: &str = "jacobiator";
pub const EQ_MIXED_JACOBIATOR: &str = "mixed-jacobiator";
pub const EQ_L3_COHERENCE: &str = "l3-coherence";
pub const EQ_L2_ANTISYMMETRY: &str = "l2-antisymmetry";
pub const EQ_L3_ANTISYMMETRY: &str = "l3-antisymmetry";
pub const EQ_MULTILINEARITY: &str = "multilinearity";

/// The five homotopy-Jacobi identities, in order.
pub const LIE2_AXIOMS: [&str; 5] = [
    EQ_L1_EQUIVARIANCE,
    EQ_L1_SYMMETRY,
    EQ_JACOBIATOR,
    EQ_MIXED_JACOBIATOR,
    EQ_L3_COHERENCE,
];

/// Evaluates the five Lie 2-algebra identities, plus graded antisymmetry and
/// multilinearity spot checks, on `count` sampled tuples.
pub fn check_lie2_axioms<A, S>(alg: &A, sampler: &mut S, count: usize, seed: u64) -> CheckReport
where
    A: Lie2Algebra + ?Sized,
    S: Lie2Sampler<A::Low, A::High> + ?Sized,
{
    check_lie2_axioms_named("lie2-axioms", alg, sampler, count, seed)
}

pub fn check_lie2_axioms_named<A, S>(name: &str, alg: &A, sampler: &mut S, count: usize, seed: u64) -> CheckReport
where
    A: Lie2Algebra + ?Sized,
    S: Lie2Sampler<A::Low, A::High> + ?Sized,
{
    let tuples = draw_lie2_tuples(sampler, count, seed);
    let one = Rational::one();
    let neg = -Rational::one();
    let equations: Vec<Equation<'_, Lie2Tuple<A::Low, A::High>>> = vec![
        Equation::new(EQ_L1_EQUIVARIANCE, &["x", "u"], |t: &Lie2Tuple<A::Low, A::High>| {
            // l1(l2(x, u)) = l2(x, l1(u))
            let lhs = alg.l1(&alg.l2_mixed(&t.x, &t.u)?)?;
            let rhs = alg.l2(&t.x, &alg.l1(&t.u)?)?;
            compare_high(alg, &lhs, &rhs)
        }),
        Equation::new(EQ_L1_SYMMETRY, &["u", "v"], |t: &Lie2Tuple<A::Low, A::High>| {
            // l2(l1(u), v) = l2(u, l1(v)) = -l2(l1(v), u)
            let lhs = alg.l2_mixed(&alg.l1(&t.u)?, &t.v)?;
            let rhs = alg.low_scale(&neg, &alg.l2_mixed(&alg.l1(&t.v)?, &t.u)?);
            compare_low(alg, &lhs, &rhs)
        }),
        Equation::new(EQ_JACOBIATOR, &["x", "y", "z"], |t: &Lie2Tuple<A::Low, A::High>| {
            let l3 = alg.l1(&alg.l3(&t.x, &t.y, &t.z)?)?;
            let a = alg.l2(&alg.l2(&t.x, &t.y)?, &t.z)?;
            let b = alg.l2(&alg.l2(&t.x, &t.z)?, &t.y)?;
            let c = alg.l2(&alg.l2(&t.y, &t.z)?, &t.x)?;
            let lhs = high_combination(alg, &[(one.clone(), &l3), (one.clone(), &a), (neg.clone(), &b), (one.clone(), &c)])?;
            compare_high(alg, &lhs, &alg.high_zero())
        }),
        Equation::new(EQ_MIXED_JACOBIATOR, &["u", "x", "y"], |t: &Lie2Tuple<A::Low, A::High>| {
            // l3(l1 u, x, y) + l2(l2(x,y), u) - l2(l2(x,u), y) + l2(l2(y,u), x) = 0
            let a = alg.l3(&alg.l1(&t.u)?, &t.x, &t.y)?;
            let b = alg.l2_mixed(&alg.l2(&t.x, &t.y)?, &t.u)?;
            let c = alg.l2_mixed(&t.y, &alg.l2_mixed(&t.x, &t.u)?)?;
            let d = alg.l2_mixed(&t.x, &alg.l2_mixed(&t.y, &t.u)?)?;
            // l2(w, y) = -l2(y, w) for w of degree -1
            let lhs = low_combination(alg, &[(one.clone(), &a), (one.clone(), &b), (one.clone(), &c), (neg.clone(), &d)])?;
            compare_low(alg, &lhs, &alg.low_zero())
        }),
        Equation::new(EQ_L3_COHERENCE, &["x", "y", "z", "t"], |t: &Lie2Tuple<A::Low, A::High>| {
            let (x, y, z, w) = (&t.x, &t.y, &t.z, &t.t);
            let l3 = |a: &A::High, b: &A::High, c: &A::High| alg.l3(a, b, c);
            let l2 = |a: &A::High, b: &A::High| alg.l2(a, b);
            let left = [
                (one.clone(), l3(&l2(x, y)?, z, w)?),
                (neg.clone(), l3(&l2(x, z)?, y, w)?),
                (one.clone(), l3(&l2(x, w)?, y, z)?),
                (one.clone(), l3(&l2(y, z)?, x, w)?),
                (neg.clone(), l3(&l2(y, w)?, x, z)?),
                (one.clone(), l3(&l2(z, w)?, x, y)?),
            ];
            // l2(l3(...), s) = -l2(s, l3(...))
            let right = [
                (neg.clone(), alg.l2_mixed(w, &l3(x, y, z)?)?),
                (one.clone(), alg.l2_mixed(z, &l3(x, y, w)?)?),
                (neg.clone(), alg.l2_mixed(y, &l3(x, z, w)?)?),
                (one.clone(), alg.l2_mixed(x, &l3(y, z, w)?)?),
            ];
            let lhs = low_combination(alg, &left.iter().map(|(c, e)| (c.clone(), e)).collect::<Vec<_>>())?;
            let rhs = low_combination(alg, &right.iter().map(|(c, e)| (c.clone(), e)).collect::<Vec<_>>())?;
            compare_low(alg, &lhs, &rhs)
        }),
        Equation::new(EQ_L2_ANTISYMMETRY, &["x", "y"], |t: &Lie2Tuple<A::Low, A::High>| {
            let lhs = alg.l2(&t.x, &t.y)?;
            let rhs = alg.high_scale(&neg, &alg.l2(&t.y, &t.x)?);
            compare_high(alg, &lhs, &rhs)
        }),
        Equation::new(EQ_L3_ANTISYMMETRY, &["x", "y", "z"], |t: &Lie2Tuple<A::Low, A::High>| {
            let base = alg.l3(&t.x, &t.y, &t.z)?;
            let swapped = alg.low_scale(&neg, &alg.l3(&t.y, &t.x, &t.z)?);
            let rotated = alg.l3(&t.y, &t.z, &t.x)?;
            Ok(both(compare_low(alg, &base, &swapped)?, compare_low(alg, &base, &rotated)?))
        }),
        Equation::new(EQ_MULTILINEARITY, &["x", "y", "z", "u", "v", "c"], |t: &Lie2Tuple<A::Low, A::High>| {
            let c = &t.c;
            let xy = alg.high_add(&t.x, &alg.high_scale(c, &t.y))?;
            let uv = alg.low_add(&t.u, &alg.low_scale(c, &t.v))?;
            let l1 = compare_high(
                alg,
                &alg.l1(&uv)?,
                &high_combination(alg, &[(one.clone(), &alg.l1(&t.u)?), (c.clone(), &alg.l1(&t.v)?)])?,
            )?;
            let l2 = compare_high(
                alg,
                &alg.l2(&xy, &t.z)?,
                &high_combination(alg, &[(one.clone(), &alg.l2(&t.x, &t.z)?), (c.clone(), &alg.l2(&t.y, &t.z)?)])?,
            )?;
            let mixed_high = compare_low(
                alg,
                &alg.l2_mixed(&xy, &t.u)?,
                &low_combination(
                    alg,
                    &[(one.clone(), &alg.l2_mixed(&t.x, &t.u)?), (c.clone(), &alg.l2_mixed(&t.y, &t.u)?)],
                )?,
            )?;
            let mixed_low = compare_low(
                alg,
                &alg.l2_mixed(&t.z, &uv)?,
                &low_combination(
                    alg,
                    &[(one.clone(), &alg.l2_mixed(&t.z, &t.u)?), (c.clone(), &alg.l2_mixed(&t.z, &t.v)?)],
                )?,
            )?;
            let l3 = compare_low(
                alg,
                &alg.l3(&xy, &t.z, &t.t)?,
                &low_combination(
                    alg,
                    &[(one.clone(), &alg.l3(&t.x, &t.z, &t.t)?), (c.clone(), &alg.l3(&t.y, &t.z, &t.t)?)],
                )?,
            )?;
            Ok(both(both(both(l1, l2), both(mixed_high, mixed_low)), l3))
        }),
    ];
    run_equations(name, count, &tuples, &equations)
}

/// `alg` with `l3` multiplied by a constant.
pub struct ScaledL3<'a, A: ?Sized> {
    pub inner: &'a A,
    pub factor: Rational,
}

impl<A: Lie2Algebra + ?Sized> Lie2Algebra for ScaledL3<'_, A> {
    type Low = A::Low;
    type High = A::High;

    fn l1(&self, u: &A::Low) -> Result<A::High> {
        self.inner.l1(u)
    }
    fn l2(&self, x: &A::High, y: &A::High) -> Result<A::High> {
        self.inner.l2(x, y)
    }
    fn l2_mixed(&self, x: &A::High, u: &A::Low) -> Result<A::Low> {
        self.inner.l2_mixed(x, u)
    }
    fn l3(&self, x: &A::High, y: &A::High, z: &A::High) -> Result<A::Low> {
        Ok(self.inner.low_scale(&self.factor, &self.inner.l3(x, y, z)?))
    }
    fn low_eq(&self, a: &A::Low, b: &A::Low) -> bool {
        self.inner.low_eq(a, b)
    }
    fn high_eq(&self, a: &A::High, b: &A::High) -> bool {
        self.inner.high_eq(a, b)
    }
    fn low_add(&self, a: &A::Low, b: &A::Low) -> Result<A::Low> {
        self.inner.low_add(a, b)
    }
    fn high_add(&self, a: &A::High, b: &A::High) -> Result<A::High> {
        self.inner.high_add(a, b)
    }
    fn low_scale(&self, c: &Rational, a: &A::Low) -> A::Low {
        self.inner.low_scale(c, a)
    }
    fn high_scale(&self, c: &Rational, a: &A::High) -> A::High {
        self.inner.high_scale(c, a)
    }
    fn low_zero(&self) -> A::Low {
        self.inner.low_zero()
    }
    fn high_zero(&self) -> A::High {
        self.inner.high_zero()
    }
}

pub trait CrossedModule: Sync {
    /// The algebra mapped by `eta`.
    type H: Clone + Send + Sync + fmt::Display;
    /// The algebra acting on `H`.
    type G: Clone + Send + Sync + fmt::Display;

    fn bracket_h(&self, a: &Self::H, b: &Self::H) -> Result<Self::H>;
    fn bracket_g(&self, a: &Self::G, b: &Self::G) -> Result<Self::G>;
    fn eta(&self, v: &Self::H) -> Result<Self::G>;
    fn act(&self, x: &Self::G, v: &Self::H) -> Result<Self::H>;

    fn h_eq(&self, a: &Self::H, b: &Self::H) -> bool;
    fn g_eq(&self, a: &Self::G, b: &Self::G) -> bool;
    fn h_add(&self, a: &Self::H, b: &Self::H) -> Result<Self::H>;
    fn g_add(&self, a: &Self::G, b: &Self::G) -> Result<Self::G>;
    fn h_scale(&self, c: &Rational, a: &Self::H) -> Self::H;
    fn g_scale(&self, c: &Rational, a: &Self::G) -> Self::G;
    fn h_zero(&self) -> Self::H;
    fn g_zero(&self) -> Self::G;

    /// Checks membership of a `G` value in the algebra (e.g. defining
    /// equations that the type does not enforce).
    fn validate_g(&self, _x: &Self::G) -> Result<()> {
        Ok(())
    }
}

pub trait CrossedSampler<H, G> {
    fn h(&mut self, rng: &mut SampleRng) -> Option<H>;
    fn g(&mut self, rng: &mut SampleRng) -> Option<G>;
}

pub struct CrossedTuple<H, G> {
    pub x: G,
    pub y: G,
    pub z: G,
    pub u: H,
    pub v: H,
    pub w: H,
    pub c: Rational,
}

impl<H: fmt::Display + Sync, G: fmt::Display + Sync> Tuple for CrossedTuple<H, G> {
    fn entry(&self, name: &str) -> Option<String> {
        Some(match name {
            "x" => self.x.to_string(),
            "y" => self.y.to_string(),
            "z" => self.z.to_string(),
            "u" => self.u.to_string(),
            "v" => self.v.to_string(),
            "w" => self.w.to_string(),
            "c" => format_rational(&self.c),
            _ => return None,
        })
    }
}

pub const EQ_A1: &str = "A1";
pub const EQ_A2: &str = "A2";
pub const EQ_ACTION_DERIVATION: &str = "action-by-derivations";
pub const EQ_ACTION_REPRESENTATION: &str = "action-representation";
pub const EQ_ETA_MORPHISM: &str = "eta-morphism";
pub const EQ_ETA_VALIDITY: &str = "eta-validity";
pub const EQ_JACOBI_H: &str = "jacobi-h";
pub const EQ_JACOBI_G: &str = "jacobi-g";
pub const EQ_ANTISYMMETRY_H: &str = "antisymmetry-h";
pub const EQ_ANTISYMMETRY_G: &str = "antisymmetry-g";
pub const EQ_LINEARITY: &str = "linearity";

fn compare_with<T: fmt::Display>(
    eq: impl Fn(&T, &T) -> bool,
    diff: impl Fn(&T, &T) -> Result<T>,
    lhs: &T,
    rhs: &T,
) -> Result<Verdict> {
    if eq(lhs, rhs) {
        Ok(Verdict::Holds)
    } else {
        Ok(Verdict::Violated(diff(lhs, rhs)?.to_string()))
    }
}

/// Evaluates the crossed-module axioms together with the Lie algebra laws of
/// both algebras, `eta` being a morphism and the action being a
/// representation by derivations.
pub fn check_crossed_module<C, S>(cm: &C, sampler: &mut S, count: usize, seed: u64) -> CheckReport
where
    C: CrossedModule + ?Sized,
    S: CrossedSampler<C::H, C::G> + ?Sized,
{
    let mut rng = rng_from_seed(seed);
    let mut tuples = Vec::with_capacity(count);
    for _ in 0..count {
        let t = (|| {
            Some(CrossedTuple {
                x: sampler.g(&mut rng)?,
                y: sampler.g(&mut rng)?,
                z: sampler.g(&mut rng)?,
                u: sampler.h(&mut rng)?,
                v: sampler.h(&mut rng)?,
                w: sampler.h(&mut rng)?,
                c: random_small(&mut rng),
            })
        })();
        match t {
            Some(t) => tuples.push(t),
            None => break,
        }
    }
    let neg = -Rational::one();
    let h_cmp = |l: &C::H, r: &C::H| {
        compare_with(|a, b| cm.h_eq(a, b), |a, b| cm.h_add(a, &cm.h_scale(&neg, b)), l, r)
    };
    let g_cmp = |l: &C::G, r: &C::G| {
        compare_with(|a, b| cm.g_eq(a, b), |a, b| cm.g_add(a, &cm.g_scale(&neg, b)), l, r)
    };
    let equations: Vec<Equation<'_, CrossedTuple<C::H, C::G>>> = vec![
        Equation::new(EQ_A1, &["u", "v"], |t: &CrossedTuple<C::H, C::G>| {
            h_cmp(&cm.act(&cm.eta(&t.u)?, &t.v)?, &cm.bracket_h(&t.u, &t.v)?)
        }),
        Equation::new(EQ_A2, &["x", "v"], |t: &CrossedTuple<C::H, C::G>| {
            g_cmp(&cm.eta(&cm.act(&t.x, &t.v)?)?, &cm.bracket_g(&t.x, &cm.eta(&t.v)?)?)
        }),
        Equation::new(EQ_ACTION_DERIVATION, &["x", "u", "v"], |t: &CrossedTuple<C::H, C::G>| {
            let lhs = cm.act(&t.x, &cm.bracket_h(&t.u, &t.v)?)?;
            let rhs = cm.h_add(
                &cm.bracket_h(&cm.act(&t.x, &t.u)?, &t.v)?,
                &cm.bracket_h(&t.u, &cm.act(&t.x, &t.v)?)?,
            )?;
            h_cmp(&lhs, &rhs)
        }),
        Equation::new(EQ_ACTION_REPRESENTATION, &["x", "y", "u"], |t: &CrossedTuple<C::H, C::G>| {
            let lhs = cm.act(&cm.bracket_g(&t.x, &t.y)?, &t.u)?;
            let rhs = cm.h_add(
                &cm.act(&t.x, &cm.act(&t.y, &t.u)?)?,
                &cm.h_scale(&neg, &cm.act(&t.y, &cm.act(&t.x, &t.u)?)?),
            )?;
            h_cmp(&lhs, &rhs)
        }),
        Equation::new(EQ_ETA_MORPHISM, &["u", "v"], |t: &CrossedTuple<C::H, C::G>| {
            g_cmp(&cm.eta(&cm.bracket_h(&t.u, &t.v)?)?, &cm.bracket_g(&cm.eta(&t.u)?, &cm.eta(&t.v)?)?)
        }),
        Equation::new(EQ_ETA_VALIDITY, &["u"], |t: &CrossedTuple<C::H, C::G>| match cm.validate_g(&cm.eta(&t.u)?) {
            Ok(()) => Ok(Verdict::Holds),
            Err(e) => Ok(Verdict::Violated(e.to_string())),
        }),
        Equation::new(EQ_JACOBI_H, &["u", "v", "w"], |t: &CrossedTuple<C::H, C::G>| {
            let a = cm.bracket_h(&t.u, &cm.bracket_h(&t.v, &t.w)?)?;
            let b = cm.bracket_h(&t.v, &cm.bracket_h(&t.w, &t.u)?)?;
            let c = cm.bracket_h(&t.w, &cm.bracket_h(&t.u, &t.v)?)?;
            h_cmp(&cm.h_add(&cm.h_add(&a, &b)?, &c)?, &cm.h_zero())
        }),
        Equation::new(EQ_JACOBI_G, &["x", "y", "z"], |t: &CrossedTuple<C::H, C::G>| {
            let a = cm.bracket_g(&t.x, &cm.bracket_g(&t.y, &t.z)?)?;
            let b = cm.bracket_g(&t.y, &cm.bracket_g(&t.z, &t.x)?)?;
            let c = cm.bracket_g(&t.z, &cm.bracket_g(&t.x, &t.y)?)?;
            g_cmp(&cm.g_add(&cm.g_add(&a, &b)?, &c)?, &cm.g_zero())
        }),
        Equation::new(EQ_ANTISYMMETRY_H, &["u", "v"], |t: &CrossedTuple<C::H, C::G>| {
            h_cmp(&cm.bracket_h(&t.u, &t.v)?, &cm.h_scale(&neg, &cm.bracket_h(&t.v, &t.u)?))
        }),
        Equation::new(EQ_ANTISYMMETRY_G, &["x", "y"], |t: &CrossedTuple<C::H, C::G>| {
            g_cmp(&cm.bracket_g(&t.x, &t.y)?, &cm.g_scale(&neg, &cm.bracket_g(&t.y, &t.x)?))
        }),
        Equation::new(EQ_LINEARITY, &["x", "y", "u", "v", "c"], |t: &CrossedTuple<C::H, C::G>| {
            let uv = cm.h_add(&t.u, &cm.h_scale(&t.c, &t.v))?;
            let xy = cm.g_add(&t.x, &cm.g_scale(&t.c, &t.y))?;
            let eta = g_cmp(&cm.eta(&uv)?, &cm.g_add(&cm.eta(&t.u)?, &cm.g_scale(&t.c, &cm.eta(&t.v)?))?)?;
            let act_g = h_cmp(
                &cm.act(&xy, &t.u)?,
                &cm.h_add(&cm.act(&t.x, &t.u)?, &cm.h_scale(&t.c, &cm.act(&t.y, &t.u)?))?,
            )?;
            let act_h = h_cmp(
                &cm.act(&t.x, &uv)?,
                &cm.h_add(&cm.act(&t.x, &t.u)?, &cm.h_scale(&t.c, &cm.act(&t.x, &t.v)?))?,
            )?;
            Ok(both(eta, both(act_g, act_h)))
        }),
    ];
    run_equations("crossed-module", count, &tuples, &equations)
}

/// The strict Lie 2-algebra of a crossed module: `l1 = eta`, `l2` the
/// bracket on degree 0 and the action on mixed degree, `l3 = 0`.
pub struct StrictLie2<C> {
    pub cm: C,
}

pub fn crossed_to_lie2<C: CrossedModule>(cm: C) -> StrictLie2<C> {
    StrictLie2 { cm }
}

impl<C: CrossedModule> Lie2Algebra for StrictLie2<C> {
    type Low = C::H;
    type High = C::G;

    fn l1(&self, u: &C::H) -> Result<C::G> {
        self.cm.eta(u)
    }
    fn l2(&self, x: &C::G, y: &C::G) -> Result<C::G> {
        self.cm.bracket_g(x, y)
    }
    fn l2_mixed(&self, x: &C::G, u: &C::H) -> Result<C::H> {
        self.cm.act(x, u)
    }
    fn l3(&self, _: &C::G, _: &C::G, _: &C::G) -> Result<C::H> {
        Ok(self.cm.h_zero())
    }
    fn low_eq(&self, a: &C::H, b: &C::H) -> bool {
        self.cm.h_eq(a, b)
    }
    fn high_eq(&self, a: &C::G, b: &C::G) -> bool {
        self.cm.g_eq(a, b)
    }
    fn low_add(&self, a: &C::H, b: &C::H) -> Result<C::H> {
        self.cm.h_add(a, b)
    }
    fn high_add(&self, a: &C::G, b: &C::G) -> Result<C::G> {
        self.cm.g_add(a, b)
    }
    fn low_scale(&self, c: &Rational, a: &C::H) -> C::H {
        self.cm.h_scale(c, a)
    }
    fn high_scale(&self, c: &Rational, a: &C::G) -> C::G {
        self.cm.g_scale(c, a)
    }
    fn low_zero(&self) -> C::H {
        self.cm.h_zero()
    }
    fn high_zero(&self) -> C::G {
        self.cm.g_zero()
    }
}

/// Adapts a crossed-module sampler to the strict Lie 2-algebra.
pub struct StrictSampler<S>(pub S);

impl<H, G, S: CrossedSampler<H, G>> Lie2Sampler<H, G> for StrictSampler<S> {
    fn low(&mut self, rng: &mut SampleRng) -> Option<H> {
        self.0.h(rng)
    }
    fn high(&mut self, rng: &mut SampleRng) -> Option<G> {
        self.0.g(rng)
    }
}

pub trait Lie2Morphism: Sync {
    type Source: Lie2Algebra;
    type Target: Lie2Algebra;

    fn source(&self) -> &Self::Source;
    fn target(&self) -> &Self::Target;
    fn phi1_low(&self, u: &<Self::Source as Lie2Algebra>::Low) -> Result<<Self::Target as Lie2Algebra>::Low>;
    fn phi1_high(&self, x: &<Self::Source as Lie2Algebra>::High) -> Result<<Self::Target as Lie2Algebra>::High>;
    fn phi2(
        &self,
        x: &<Self::Source as Lie2Algebra>::High,
        y: &<Self::Source as Lie2Algebra>::High,
    ) -> Result<<Self::Target as Lie2Algebra>::Low>;
}

pub const EQ_CHAIN_MAP: &str = "chain-map";
pub const EQ_BRACKET_HIGH: &str = "bracket-high";
pub const EQ_BRACKET_MIXED: &str = "bracket-mixed";
pub const EQ_COHERENCE: &str = "coherence";
pub const EQ_PHI2_ANTISYMMETRY: &str = "phi2-antisymmetry";

/// The four morphism identities, in order.
pub const MORPHISM_EQUATIONS: [&str; 4] = [EQ_CHAIN_MAP, EQ_BRACKET_HIGH, EQ_BRACKET_MIXED, EQ_COHERENCE];

/// Evaluates the morphism identities on tuples drawn from the source algebra.
pub fn check_morphism<M, S>(m: &M, sampler: &mut S, count: usize, seed: u64) -> CheckReport
where
    M: Lie2Morphism + ?Sized,
    S: Lie2Sampler<<M::Source as Lie2Algebra>::Low, <M::Source as Lie2Algebra>::High> + ?Sized,
{
    let tuples = draw_lie2_tuples(sampler, count, seed);
    let src = m.source();
    let tgt = m.target();
    let one = Rational::one();
    let neg = -Rational::one();
    let equations: Vec<Equation<'_, Lie2Tuple<<M::Source as Lie2Algebra>::Low, <M::Source as Lie2Algebra>::High>>> = vec![
        Equation::new(EQ_CHAIN_MAP, &["u"], |t: &Lie2Tuple<<M::Source as Lie2Algebra>::Low, <M::Source as Lie2Algebra>::High>| {
            compare_high(tgt, &m.phi1_high(&src.l1(&t.u)?)?, &tgt.l1(&m.phi1_low(&t.u)?)?)
        }),
        Equation::new(EQ_BRACKET_HIGH, &["x", "y"], |t: &Lie2Tuple<<M::Source as Lie2Algebra>::Low, <M::Source as Lie2Algebra>::High>| {
            let lhs = m.phi1_high(&src.l2(&t.x, &t.y)?)?;
            let rhs = tgt.high_add(
                &tgt.l2(&m.phi1_high(&t.x)?, &m.phi1_high(&t.y)?)?,
                &tgt.l1(&m.phi2(&t.x, &t.y)?)?,
            )?;
            compare_high(tgt, &lhs, &rhs)
        }),
        Equation::new(EQ_BRACKET_MIXED, &["u", "x"], |t: &Lie2Tuple<<M::Source as Lie2Algebra>::Low, <M::Source as Lie2Algebra>::High>| {
            // phi1(l2(u, x)) = l2'(phi1 u, phi1 x) + phi2(l1 u, x)
            let lhs = tgt.low_scale(&neg, &m.phi1_low(&src.l2_mixed(&t.x, &t.u)?)?);
            let bracket = tgt.low_scale(&neg, &tgt.l2_mixed(&m.phi1_high(&t.x)?, &m.phi1_low(&t.u)?)?);
            let rhs = tgt.low_add(&bracket, &m.phi2(&src.l1(&t.u)?, &t.x)?)?;
            compare_low(tgt, &lhs, &rhs)
        }),
        Equation::new(EQ_COHERENCE, &["x", "y", "z"], |t: &Lie2Tuple<<M::Source as Lie2Algebra>::Low, <M::Source as Lie2Algebra>::High>| {
            let (x, y, z) = (&t.x, &t.y, &t.z);
            let left = [
                (one.clone(), m.phi2(&src.l2(x, y)?, z)?),
                (neg.clone(), m.phi2(&src.l2(x, z)?, y)?),
                (one.clone(), m.phi2(&src.l2(y, z)?, x)?),
                (one.clone(), m.phi1_low(&src.l3(x, y, z)?)?),
            ];
            let (px, py, pz) = (m.phi1_high(x)?, m.phi1_high(y)?, m.phi1_high(z)?);
            let right = [
                (one.clone(), tgt.l2_mixed(&px, &m.phi2(y, z)?)?),
                (neg.clone(), tgt.l2_mixed(&py, &m.phi2(x, z)?)?),
                (one.clone(), tgt.l2_mixed(&pz, &m.phi2(x, y)?)?),
                (one.clone(), tgt.l3(&px, &py, &pz)?),
            ];
            let lhs = low_combination(tgt, &left.iter().map(|(c, e)| (c.clone(), e)).collect::<Vec<_>>())?;
            let rhs = low_combination(tgt, &right.iter().map(|(c, e)| (c.clone(), e)).collect::<Vec<_>>())?;
            compare_low(tgt, &lhs, &rhs)
        }),
        Equation::new(EQ_PHI2_ANTISYMMETRY, &["x", "y"], |t: &Lie2Tuple<<M::Source as Lie2Algebra>::Low, <M::Source as Lie2Algebra>::High>| {
            let lhs = m.phi2(&t.x, &t.y)?;
            let rhs = tgt.low_scale(&neg, &m.phi2(&t.y, &t.x)?);
            compare_low(tgt, &lhs, &rhs)
        }),
    ];
    run_equations("lie2-morphism", count, &tuples, &equations)
}

/// `Phi1 = id`, `Phi2 = 0`.
pub struct IdentityMorphism<'a, A> {
    pub alg: &'a A,
}

impl<A: Lie2Algebra> Lie2Morphism for IdentityMorphism<'_, A> {
    type Source = A;
    type Target = A;

    fn source(&self) -> &A {
        self.alg
    }
    fn target(&self) -> &A {
        self.alg
    }
    fn phi1_low(&self, u: &A::Low) -> Result<A::Low> {
        Ok(u.clone())
    }
    fn phi1_high(&self, x: &A::High) -> Result<A::High> {
        Ok(x.clone())
    }
    fn phi2(&self, _: &A::High, _: &A::High) -> Result<A::Low> {
        Ok(self.alg.low_zero())
    }
}

/// Row labels for writing elements as coefficient vectors: a component tag,
/// an index tuple and a monomial.
pub type CoordKey = (u8, Vec<usize>, Monomial);

/// Identifies elements with coefficient vectors such that the algebra's
/// equality is equality of coordinates.
pub trait LinearCoordinates: Lie2Algebra {
    fn low_coordinates(&self, u: &Self::Low) -> BTreeMap<CoordKey, Rational>;
    fn high_coordinates(&self, x: &Self::High) -> BTreeMap<CoordKey, Rational>;
}

/// Finite spanning sets of each degree, e.g. all elements up to a polynomial
/// degree cap.
pub struct Truncation<L, H> {
    pub low: Vec<L>,
    pub high: Vec<H>,
}

pub const EQ_KERNEL_CLOSED: &str = "kernel-maps-to-kernel";
pub const EQ_KERNEL_INJECTIVE: &str = "kernel-injective";
pub const EQ_KERNEL_SURJECTIVE: &str = "kernel-surjective";
pub const EQ_COKERNEL_SURJECTIVE: &str = "cokernel-surjective";

fn kernel_elements<A: LinearCoordinates + ?Sized>(alg: &A, basis: &[A::Low]) -> Result<Vec<A::Low>> {
    let images = basis
        .iter()
        .map(|b| Ok(alg.high_coordinates(&alg.l1(b)?)))
        .collect::<Result<Vec<_>>>()?;
    let (m, _) = Matrix::from_sparse_columns(&images);
    m.kernel()
        .into_iter()
        .map(|v| {
            let terms: Vec<_> = v.into_iter().zip(basis).filter(|(c, _)| !c.is_zero()).collect();
            low_combination(alg, &terms.iter().map(|(c, b)| (c.clone(), *b)).collect::<Vec<_>>())
        })
        .collect()
}

fn span_rank(columns: &[BTreeMap<CoordKey, Rational>]) -> usize {
    Matrix::from_sparse_columns(columns).0.rank()
}

/// Compares `ker l1` and `ker l1'` through `Phi1` on finite truncations, and
/// tests whether every truncated degree-0 target element is a `Phi1` image up
/// to an `l1'` image. Misses that a larger truncation could repair are
/// reported as inconclusive.
pub fn kernel_cokernel_probe<M>(
    m: &M,
    source: &Truncation<<M::Source as Lie2Algebra>::Low, <M::Source as Lie2Algebra>::High>,
    target: &Truncation<<M::Target as Lie2Algebra>::Low, <M::Target as Lie2Algebra>::High>,
) -> Result<CheckReport>
where
    M: Lie2Morphism + ?Sized,
    M::Source: LinearCoordinates,
    M::Target: LinearCoordinates,
{
    let src = m.source();
    let tgt = m.target();
    let src_kernel = kernel_elements(src, &source.low)?;
    let tgt_kernel = kernel_elements(tgt, &target.low)?;
    let images = src_kernel
        .iter()
        .map(|k| m.phi1_low(k))
        .collect::<Result<Vec<_>>>()?;
    let mut results = Vec::new();

    let closed = images.iter().enumerate().find_map(|(i, img)| match tgt.l1(img) {
        Ok(v) if tgt.high_eq(&v, &tgt.high_zero()) => None,
        Ok(v) => Some((i, v.to_string())),
        Err(e) => Some((i, format!("evaluation error: {e}"))),
    });
    results.push(EquationResult {
        equation: EQ_KERNEL_CLOSED.into(),
        outcome: match closed {
            None if src_kernel.is_empty() => Outcome::Inconclusive {
                reason: "source kernel is trivial on the truncation".into(),
            },
            None => Outcome::Pass {
                tuples: src_kernel.len(),
            },
            Some((i, residual)) => Outcome::Fail {
                tuple: i,
                witness: vec![Witness {
                    name: "k".into(),
                    value: src_kernel[i].to_string(),
                }],
                residual,
            },
        },
    });

    let image_coords: Vec<_> = images.iter().map(|i| tgt.low_coordinates(i)).collect();
    let rank = span_rank(&image_coords);
    results.push(EquationResult {
        equation: EQ_KERNEL_INJECTIVE.into(),
        outcome: if src_kernel.is_empty() {
            Outcome::Inconclusive {
                reason: "source kernel is trivial on the truncation".into(),
            }
        } else if rank == src_kernel.len() {
            Outcome::Pass {
                tuples: src_kernel.len(),
            }
        } else {
            Outcome::Fail {
                tuple: 0,
                witness: src_kernel
                    .iter()
                    .enumerate()
                    .map(|(i, k)| Witness {
                        name: format!("k{i}"),
                        value: k.to_string(),
                    })
                    .collect(),
                residual: format!("image of a {}-dimensional kernel has rank {rank}", src_kernel.len()),
            }
        },
    });

    let missing = tgt_kernel.iter().enumerate().find(|(_, k)| {
        let mut cols = image_coords.clone();
        cols.push(tgt.low_coordinates(k));
        span_rank(&cols) > rank
    });
    results.push(EquationResult {
        equation: EQ_KERNEL_SURJECTIVE.into(),
        outcome: match missing {
            None if tgt_kernel.is_empty() => Outcome::Inconclusive {
                reason: "target kernel is trivial on the truncation".into(),
            },
            None => Outcome::Pass {
                tuples: tgt_kernel.len(),
            },
            Some((_, k)) => Outcome::Inconclusive {
                reason: format!("target kernel element {k} has no preimage in the source truncation"),
            },
        },
    });

    let mut spanning = source
        .high
        .iter()
        .map(|x| Ok(tgt.high_coordinates(&m.phi1_high(x)?)))
        .collect::<Result<Vec<_>>>()?;
    for u in &target.low {
        spanning.push(tgt.high_coordinates(&tgt.l1(u)?));
    }
    let base_rank = span_rank(&spanning);
    let uncovered = target.high.iter().find(|t| {
        let mut cols = spanning.clone();
        cols.push(tgt.high_coordinates(t));
        span_rank(&cols) > base_rank
    });
    results.push(EquationResult {
        equation: EQ_COKERNEL_SURJECTIVE.into(),
        outcome: match uncovered {
            None if target.high.is_empty() => Outcome::Inconclusive {
                reason: "target truncation has no degree-0 elements".into(),
            },
            None => Outcome::Pass {
                tuples: target.high.len(),
            },
            Some(t) => Outcome::Inconclusive {
                reason: format!("{t} is not reached within the truncation"),
            },
        },
    });

    let size = source.low.len() + source.high.len() + target.low.len() + target.high.len();
    Ok(CheckReport {
        check: "kernel-cokernel-probe".into(),
        requested: size,
        evaluated: size,
        incomplete: false,
        results,
    })
}

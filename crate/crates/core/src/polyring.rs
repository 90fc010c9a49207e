//! Exact multivariate polynomials over the rationals.
//!
//! A [`Polynomial`] is kept in canonical form at all times: no zero
//! coefficients are stored, so structural equality is mathematical equality.
//! Terms are ordered graded-lexicographically.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always reduced with positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `-p/q` or an integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::invalid(format!("malformed rational `{text}`"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::invalid(format!("zero denominator in `{text}`")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exponent vector of a monomial. Ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn var(dim: usize, index: usize) -> Self {
        let mut e = vec![0; dim];
        e[index] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All monomials in `dim` variables of total degree at most `max_degree`,
    /// in ascending graded-lex order.
    pub fn all_up_to(dim: usize, max_degree: u32) -> Vec<Monomial> {
        fn rec(prefix: &mut Vec<u32>, dim: usize, remaining: u32, out: &mut Vec<Monomial>) {
            if prefix.len() == dim {
                out.push(Monomial(prefix.clone()));
                return;
            }
            for e in 0..=remaining {
                prefix.push(e);
                rec(prefix, dim, remaining - e, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::with_capacity(dim), dim, max_degree, &mut out);
        out.sort();
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in `dim` variables with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        let mut p = Polynomial::zero(dim);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(dim), c);
        }
        p
    }

    pub fn one(dim: usize) -> Self {
        Polynomial::constant(dim, Rational::one())
    }

    pub fn var(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut p = Polynomial::zero(dim);
        p.terms.insert(Monomial::var(dim, index), Rational::one());
        Ok(p)
    }

    pub fn monomial(monomial: Monomial, c: Rational) -> Self {
        let mut p = Polynomial::zero(monomial.dim());
        if !c.is_zero() {
            p.terms.insert(monomial, c);
        }
        p
    }

    /// Builds a canonical polynomial, merging repeated monomials and dropping zeros.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Polynomial::zero(dim);
        for (m, c) in terms {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: m.dim(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::total_degree)
    }

    /// Returns the constant value if the polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.degree() {
            None => Some(Rational::zero()),
            Some(0) => Some(self.coefficient(&Monomial::one(self.dim))),
            _ => None,
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0.get(var).copied().unwrap_or(0) > 0)
    }

    fn check_dim(&self, other: &Polynomial) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other)?;
        let mut out = Polynomial::zero(self.dim);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, exponent: u32) -> Polynomial {
        let mut out = Polynomial::one(self.dim);
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Result<Polynomial> {
        if var >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: var,
                dim: self.dim,
            });
        }
        let mut out = Polynomial::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(BigInt::from(e)));
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: point.len(),
            });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Re-indexes onto a chart of dimension `new_dim`; variable `i` becomes
    /// variable `map[i]`. The map must be injective.
    pub fn embed(&self, new_dim: usize, map: &[usize]) -> Result<Polynomial> {
        if map.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: map.len(),
            });
        }
        check_injective(new_dim, map)?;
        let mut out = Polynomial::zero(new_dim);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_dim];
            for (i, &target) in map.iter().enumerate() {
                e[target] = m.0[i];
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Inverse of [`Polynomial::embed`]: `map[i]` names the variable of `self`
    /// that becomes variable `i` of the result. Returns `None` when `self`
    /// depends on a variable outside the image of `map`.
    pub fn restrict(&self, map: &[usize]) -> Option<Polynomial> {
        let mut out = Polynomial::zero(map.len());
        for (m, c) in &self.terms {
            let mut e = Vec::with_capacity(map.len());
            for &src in map {
                e.push(*m.0.get(src)?);
            }
            if e.iter().sum::<u32>() != m.total_degree() {
                return None;
            }
            out.add_term(Monomial(e), c.clone());
        }
        Some(out)
    }

    /// Formats with the given variable names, highest graded-lex term first.
    pub fn to_text(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            for (v, &e) in m.0.iter().enumerate() {
                let name = names
                    .get(v)
                    .cloned()
                    .unwrap_or_else(|| format!("x{v}"));
                match e {
                    0 => {}
                    1 => factors.push(name),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            if factors.is_empty() {
                s.push_str(&format_rational(&abs));
            } else {
                if !abs.is_one() {
                    s.push_str(&format_rational(&abs));
                    s.push('*');
                }
                s.push_str(&factors.join("*"));
            }
        }
        s
    }

    /// Largest numerator/denominator magnitude among the coefficients, for diagnostics.
    pub fn height(&self) -> f64 {
        self.terms
            .values()
            .map(|c| {
                c.numer()
                    .abs()
                    .max(c.denom().clone())
                    .to_f64()
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_injective(new_dim: usize, map: &[usize]) -> Result<()> {
    let mut seen = vec![false; new_dim];
    for &t in map {
        if t >= new_dim {
            return Err(Error::IndexOutOfRange {
                index: t,
                dim: new_dim,
            });
        }
        if seen[t] {
            return Err(Error::invalid(format!(
                "variable map is not injective (target {t} repeated)"
            )));
        }
        seen[t] = true;
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&[]))
    }
}

// Operator forms panic on dimension mismatch; use the `try_*` methods at API boundaries.

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("polynomial dimension mismatch")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

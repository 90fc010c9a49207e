//! Seeded generation of random polynomial data.
//!
//! Coefficients are rationals with numerator and denominator bounded by
//! [`COEFF_BOUND`]; polynomial degree defaults to at most 3.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exterior::{Chart, DifferentialForm, VectorField};
use crate::polyring::{int, rat, Monomial, Polynomial, Rational};

pub const COEFF_BOUND: i64 = 100;
pub const MAX_DEGREE: u32 = 3;

/// Generator used by every sampler; portable across platforms.
pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    let n = loop {
        let n = rng.gen_range(-COEFF_BOUND..=COEFF_BOUND);
        if n != 0 {
            break n;
        }
    };
    // small denominators are the common case
    let d = if rng.gen_bool(0.5) { 1 } else { rng.gen_range(1..=COEFF_BOUND) };
    rat(n, d)
}

/// Small nonzero integer, used for sparse linear combinations.
pub fn random_small<R: Rng>(rng: &mut R) -> Rational {
    let v = rng.gen_range(1..=5);
    int(if rng.gen_bool(0.5) { v } else { -v })
}

/// Random polynomial with at most `max_terms` terms of degree `<= max_degree`.
pub fn random_polynomial<R: Rng>(rng: &mut R, dim: usize, max_degree: u32, max_terms: usize) -> Polynomial {
    let n = rng.gen_range(0..=max_terms);
    let mut terms = std::collections::BTreeMap::new();
    for _ in 0..n {
        let deg = rng.gen_range(0..=max_degree);
        let mut e = vec![0u32; dim];
        for _ in 0..deg {
            e[rng.gen_range(0..dim)] += 1;
        }
        terms.insert(Monomial::from_exponents(e), random_rational(rng));
    }
    Polynomial::from_terms(dim, terms).expect("dimension is consistent")
}

pub fn random_nonzero_polynomial<R: Rng>(rng: &mut R, dim: usize, max_degree: u32, max_terms: usize) -> Polynomial {
    loop {
        let p = random_polynomial(rng, dim, max_degree, max_terms.max(1));
        if !p.is_zero() {
            return p;
        }
    }
}

/// Random polynomial in the variables listed in `vars` only.
pub fn random_polynomial_in<R: Rng>(
    rng: &mut R,
    dim: usize,
    vars: &[usize],
    max_degree: u32,
    max_terms: usize,
) -> Polynomial {
    if vars.is_empty() {
        return Polynomial::constant(dim, random_rational(rng));
    }
    let local = random_polynomial(rng, vars.len(), max_degree, max_terms);
    local.embed(dim, vars).expect("vars index the chart")
}

/// Random `degree`-form with a few nonzero components.
pub fn random_form<R: Rng>(rng: &mut R, chart: &Chart, degree: usize, max_degree: u32) -> DifferentialForm {
    let dim = chart.dim();
    let mut out = DifferentialForm::zero(chart, degree);
    if degree > dim {
        return out;
    }
    let n_comp = rng.gen_range(1..=3);
    for _ in 0..n_comp {
        let mut all: Vec<usize> = (0..dim).collect();
        all.shuffle(rng);
        let idx = &all[..degree];
        let coef = random_polynomial(rng, dim, max_degree, 2);
        let piece = DifferentialForm::basis(chart, idx, coef).expect("indices in range");
        out = out.try_add(&piece).expect("same chart and degree");
    }
    out
}

pub fn random_vector_field<R: Rng>(rng: &mut R, chart: &Chart, max_degree: u32) -> VectorField {
    let dim = chart.dim();
    let comps = (0..dim)
        .map(|_| {
            if rng.gen_bool(0.6) {
                random_polynomial(rng, dim, max_degree, 2)
            } else {
                Polynomial::zero(dim)
            }
        })
        .collect();
    VectorField::new(chart, comps).expect("component count matches chart")
}

/// Random chart `x0 .. x{dim-1}`.
pub fn numbered_chart(dim: usize) -> Chart {
    let names: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    Chart::new(&names).expect("distinct names")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_data() {
        let c = numbered_chart(3);
        let a = random_form(&mut rng_from_seed(7), &c, 2, MAX_DEGREE);
        let b = random_form(&mut rng_from_seed(7), &c, 2, MAX_DEGREE);
        assert_eq!(a, b);
    }

    #[test]
    fn bounds_respected() {
        let mut rng = rng_from_seed(1);
        for _ in 0..200 {
            let p = random_polynomial(&mut rng, 4, MAX_DEGREE, 3);
            assert!(p.degree().unwrap_or(0) <= MAX_DEGREE);
            assert!(p.height() <= COEFF_BOUND as f64);
        }
    }
}

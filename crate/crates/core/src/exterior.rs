//! Differential forms and vector fields with polynomial coefficients on a
//! single coordinate chart, with the Cartan calculus on top.
//!
//! Conventions, fixed throughout the crate:
//! - forms are antisymmetric multilinear maps with `(dx^dy)(d/dx, d/dy) = 1`;
//! - [`interior`] inserts the vector field into the *first* slot, so
//!   `interior(X, interior(Y, w))` is `w(Y, X, ..)`;
//! - a form of degree greater than the chart dimension is the zero form.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polyring::{check_injective, format_rational, Monomial, Polynomial, Rational};

/// Named coordinate chart. Cheap to clone.
#[derive(Debug, Clone, Eq)]
pub struct Chart(Arc<[String]>);

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::invalid("chart needs at least one variable"));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || !n.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::invalid(format!("bad variable name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::invalid(format!("duplicate variable name `{n}`")));
            }
        }
        Ok(Chart(names.into()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// Chart whose variables are `self` followed by `other`.
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let names: Vec<&String> = self.0.iter().chain(other.0.iter()).collect();
        Chart::new(&names)
    }

    fn ensure_same(&self, other: &Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                left: self.0.join(","),
                right: other.0.join(","),
            })
        }
    }
}

/// Strictly increasing index tuple labelling `dx_{i1} ^ ... ^ dx_{ik}`.
pub type Basis = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialForm {
    chart: Chart,
    degree: usize,
    components: BTreeMap<Basis, Polynomial>,
}

impl DifferentialForm {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        DifferentialForm {
            chart: chart.clone(),
            degree,
            components: BTreeMap::new(),
        }
    }

    pub fn function(chart: &Chart, f: Polynomial) -> Result<Self> {
        Self::from_components(chart, 0, [(Vec::new(), f)])
    }

    /// `c * dx_{i1} ^ ... ^ dx_{ik}` for an arbitrary (not necessarily sorted)
    /// index list; repeated indices give zero.
    pub fn basis(chart: &Chart, indices: &[usize], coefficient: Polynomial) -> Result<Self> {
        let mut out = DifferentialForm::zero(chart, indices.len());
        if let Some((sign, sorted)) = sort_with_sign(indices) {
            for &i in &sorted {
                if i >= chart.dim() {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        dim: chart.dim(),
                    });
                }
            }
            let c = if sign < 0 { -coefficient } else { coefficient };
            out.insert(sorted, c)?;
        }
        Ok(out)
    }

    pub fn from_components<I>(chart: &Chart, degree: usize, components: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Basis, Polynomial)>,
    {
        let mut out = DifferentialForm::zero(chart, degree);
        for (idx, p) in components {
            if idx.len() != degree {
                return Err(Error::invalid(format!(
                    "component {idx:?} does not have degree {degree}"
                )));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "component index {idx:?} is not strictly increasing"
                )));
            }
            if let Some(&i) = idx.iter().find(|&&i| i >= chart.dim()) {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    dim: chart.dim(),
                });
            }
            out.insert(idx, p)?;
        }
        Ok(out)
    }

    fn insert(&mut self, idx: Basis, p: Polynomial) -> Result<()> {
        if p.dim() != self.chart.dim() {
            return Err(Error::DimensionMismatch {
                left: self.chart.dim(),
                right: p.dim(),
            });
        }
        self.accumulate(idx, p);
        Ok(())
    }

    fn accumulate(&mut self, idx: Basis, p: Polynomial) {
        if p.is_zero() {
            return;
        }
        match self.components.entry(idx) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(p);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = &*o.get() + &p;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&Basis, &Polynomial)> {
        self.components.iter()
    }

    pub fn component(&self, idx: &[usize]) -> Polynomial {
        self.components
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.chart.dim()))
    }

    /// The coefficient of a 0-form.
    pub fn as_function(&self) -> Option<Polynomial> {
        (self.degree == 0).then(|| self.component(&[]))
    }

    fn ensure_compatible(&self, other: &DifferentialForm) -> Result<()> {
        self.chart.ensure_same(&other.chart)?;
        if self.degree != other.degree {
            return Err(Error::invalid(format!(
                "degree mismatch: {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (idx, p) in &other.components {
            out.accumulate(idx.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.try_add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> DifferentialForm {
        if c.is_zero() {
            return DifferentialForm::zero(&self.chart, self.degree);
        }
        DifferentialForm {
            chart: self.chart.clone(),
            degree: self.degree,
            components: self
                .components
                .iter()
                .map(|(k, p)| (k.clone(), p.scale(c)))
                .collect(),
        }
    }

    pub fn mul_function(&self, f: &Polynomial) -> Result<DifferentialForm> {
        let mut out = DifferentialForm::zero(&self.chart, self.degree);
        for (idx, p) in &self.components {
            out.insert(idx.clone(), p.try_mul(f)?)?;
        }
        Ok(out)
    }

    /// Flattened coefficients keyed by (basis, monomial), for linear algebra.
    pub fn coordinates(&self) -> BTreeMap<(Basis, Monomial), Rational> {
        self.components
            .iter()
            .flat_map(|(idx, p)| p.terms().map(move |(m, c)| ((idx.clone(), m.clone()), c.clone())))
            .collect()
    }

    pub fn to_text(&self) -> String {
        if self.components.is_empty() {
            return "0".to_string();
        }
        let names = self.chart.names();
        let mut s = String::new();
        for (n, (idx, p)) in self.components.iter().enumerate() {
            let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", names[i])).collect();
            let basis = basis.join("^");
            let (neg, coef) = signed_coefficient_text(p, names);
            if n == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            match (coef.as_deref(), basis.is_empty()) {
                (None, true) => s.push('1'),
                (None, false) => s.push_str(&basis),
                (Some(c), true) => s.push_str(c),
                (Some(c), false) => {
                    s.push_str(c);
                    s.push('*');
                    s.push_str(&basis);
                }
            }
        }
        s
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Splits a coefficient into (is_negative, text) for term-wise printing.
/// Returns `None` text for a unit coefficient.
fn signed_coefficient_text(p: &Polynomial, names: &[String]) -> (bool, Option<String>) {
    if p.num_terms() == 1 {
        let (m, c) = p.terms().next().expect("one term");
        let neg = c.is_negative();
        let single = Polynomial::monomial(m.clone(), c.abs());
        if m.total_degree() == 0 {
            if c.abs().is_one() {
                return (neg, None);
            }
            return (neg, Some(format_rational(&c.abs())));
        }
        return (neg, Some(single.to_text(names)));
    }
    (false, Some(format!("({})", p.to_text(names))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    chart: Chart,
    components: Vec<Polynomial>,
}

impl VectorField {
    pub fn zero(chart: &Chart) -> Self {
        VectorField {
            chart: chart.clone(),
            components: vec![Polynomial::zero(chart.dim()); chart.dim()],
        }
    }

    pub fn new(chart: &Chart, components: Vec<Polynomial>) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                left: chart.dim(),
                right: components.len(),
            });
        }
        if let Some(p) = components.iter().find(|p| p.dim() != chart.dim()) {
            return Err(Error::DimensionMismatch {
                left: chart.dim(),
                right: p.dim(),
            });
        }
        Ok(VectorField {
            chart: chart.clone(),
            components,
        })
    }

    /// `c * d/dx_i`.
    pub fn coordinate(chart: &Chart, index: usize, coefficient: Polynomial) -> Result<Self> {
        if index >= chart.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                dim: chart.dim(),
            });
        }
        let mut comps = vec![Polynomial::zero(chart.dim()); chart.dim()];
        comps[index] = coefficient;
        VectorField::new(chart, comps)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn try_add(&self, other: &VectorField) -> Result<VectorField> {
        self.chart.ensure_same(&other.chart)?;
        Ok(VectorField {
            chart: self.chart.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &VectorField) -> Result<VectorField> {
        self.try_add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn mul_function(&self, f: &Polynomial) -> Result<VectorField> {
        let comps = self
            .components
            .iter()
            .map(|p| p.try_mul(f))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(&self.chart, comps)
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &Polynomial) -> Result<Polynomial> {
        if f.dim() != self.chart.dim() {
            return Err(Error::DimensionMismatch {
                left: self.chart.dim(),
                right: f.dim(),
            });
        }
        let mut acc = Polynomial::zero(f.dim());
        for (j, xj) in self.components.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            let dj = f.diff(j)?;
            if !dj.is_zero() {
                acc = &acc + &(xj * &dj);
            }
        }
        Ok(acc)
    }

    /// Flattened coefficients keyed by (component, monomial).
    pub fn coordinates(&self) -> BTreeMap<(usize, Monomial), Rational> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.terms().map(move |(m, c)| ((i, m.clone()), c.clone())))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let names = self.chart.names();
        let mut s = String::new();
        let mut first = true;
        for (i, p) in self.components.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let (neg, coef) = signed_coefficient_text(p, names);
            if first {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            first = false;
            if let Some(c) = coef {
                s.push_str(&c);
                s.push('*');
            }
            s.push_str("d/d");
            s.push_str(&names[i]);
        }
        if first {
            s.push('0');
        }
        s
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Sorts an index list, returning the permutation sign, or `None` on a repeat.
fn sort_with_sign(indices: &[usize]) -> Option<(i32, Vec<usize>)> {
    let mut v = indices.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, v))
}

/// Merges two sorted disjoint index lists; the sign counts inversions.
fn merge_sign(a: &[usize], b: &[usize]) -> Option<(bool, Basis)> {
    let mut inversions = 0usize;
    for &x in a {
        for &y in b {
            match x.cmp(&y) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    let mut merged: Basis = a.iter().chain(b).copied().collect();
    merged.sort_unstable();
    Some((inversions % 2 == 1, merged))
}

pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    a.chart.ensure_same(&b.chart)?;
    let mut out = DifferentialForm::zero(&a.chart, a.degree + b.degree);
    if a.degree + b.degree > a.chart.dim() {
        return Ok(out);
    }
    for (ia, pa) in &a.components {
        for (ib, pb) in &b.components {
            if let Some((negative, idx)) = merge_sign(ia, ib) {
                let prod = pa * pb;
                out.accumulate(idx, if negative { -prod } else { prod });
            }
        }
    }
    Ok(out)
}

/// Exterior derivative.
pub fn ext_d(a: &DifferentialForm) -> DifferentialForm {
    let dim = a.chart.dim();
    let mut out = DifferentialForm::zero(&a.chart, a.degree + 1);
    for (idx, p) in &a.components {
        for j in 0..dim {
            if idx.contains(&j) {
                continue;
            }
            let dj = p.diff(j).expect("index within chart");
            if dj.is_zero() {
                continue;
            }
            // dx_j ^ dx_I: move dx_j past the entries of I smaller than j
            let pos = idx.iter().filter(|&&i| i < j).count();
            let mut new_idx = idx.clone();
            new_idx.insert(pos, j);
            out.accumulate(new_idx, if pos % 2 == 1 { -dj } else { dj });
        }
    }
    out
}

/// Contraction `iota_X a`, inserting `X` into the first slot.
pub fn interior(x: &VectorField, a: &DifferentialForm) -> Result<DifferentialForm> {
    x.chart.ensure_same(&a.chart)?;
    if a.degree == 0 {
        return Err(Error::invalid("interior product of a 0-form is undefined"));
    }
    let mut out = DifferentialForm::zero(&a.chart, a.degree - 1);
    for (idx, p) in &a.components {
        for (s, &i) in idx.iter().enumerate() {
            let xi = &x.components[i];
            if xi.is_zero() {
                continue;
            }
            let mut rest = idx.clone();
            rest.remove(s);
            let term = xi * p;
            out.accumulate(rest, if s % 2 == 1 { -term } else { term });
        }
    }
    Ok(out)
}

/// Lie derivative via Cartan's formula; `X(f)` on 0-forms.
pub fn lie_derivative(x: &VectorField, a: &DifferentialForm) -> Result<DifferentialForm> {
    x.chart.ensure_same(&a.chart)?;
    if a.degree == 0 {
        return DifferentialForm::function(&a.chart, x.apply(&a.component(&[]))?);
    }
    ext_d(&interior(x, a)?).try_add(&interior(x, &ext_d(a))?)
}

/// Lie bracket `[X, Y]^k = X^j d_j Y^k - Y^j d_j X^k`.
pub fn vf_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    x.chart.ensure_same(&y.chart)?;
    let comps = (0..x.chart.dim())
        .map(|k| Ok(&x.apply(&y.components[k])? - &y.apply(&x.components[k])?))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(&x.chart, comps)
}

/// Full evaluation `a(X_1, ..., X_k)`.
pub fn eval_on_fields(a: &DifferentialForm, fields: &[VectorField]) -> Result<Polynomial> {
    if fields.len() != a.degree {
        return Err(Error::invalid(format!(
            "a {}-form needs {} arguments, got {}",
            a.degree,
            a.degree,
            fields.len()
        )));
    }
    let mut current = a.clone();
    for x in fields {
        current = interior(x, &current)?;
    }
    Ok(current.component(&[]))
}

/// Pullback along the coordinate projection that sends base variable `i` to
/// total variable `base_vars[i]`.
pub fn pullback_projection(
    a: &DifferentialForm,
    total: &Chart,
    base_vars: &[usize],
) -> Result<DifferentialForm> {
    if base_vars.len() != a.chart.dim() {
        return Err(Error::DimensionMismatch {
            left: a.chart.dim(),
            right: base_vars.len(),
        });
    }
    check_injective(total.dim(), base_vars)?;
    let mut out = DifferentialForm::zero(total, a.degree);
    for (idx, p) in &a.components {
        let mapped: Vec<usize> = idx.iter().map(|&i| base_vars[i]).collect();
        let (sign, sorted) = sort_with_sign(&mapped).expect("injective map keeps indices distinct");
        let q = p.embed(total.dim(), base_vars)?;
        out.accumulate(sorted, if sign < 0 { -q } else { q });
    }
    Ok(out)
}

/// Inverse of [`pullback_projection`]: recovers the base form when `a` has
/// no legs along, and no dependence on, variables outside `base_vars`.
pub fn descend_to_base(
    a: &DifferentialForm,
    base: &Chart,
    base_vars: &[usize],
) -> Result<Option<DifferentialForm>> {
    if base_vars.len() != base.dim() {
        return Err(Error::DimensionMismatch {
            left: base.dim(),
            right: base_vars.len(),
        });
    }
    check_injective(a.chart.dim(), base_vars)?;
    let mut out = DifferentialForm::zero(base, a.degree);
    for (idx, p) in &a.components {
        let mut local = Vec::with_capacity(idx.len());
        for &i in idx {
            match base_vars.iter().position(|&b| b == i) {
                Some(k) => local.push(k),
                None => return Ok(None),
            }
        }
        let Some(q) = p.restrict(base_vars) else {
            return Ok(None);
        };
        let (sign, sorted) = sort_with_sign(&local).expect("distinct indices");
        out.accumulate(sorted, if sign < 0 { -q } else { q });
    }
    Ok(Some(out))
}

//! 2-plectic structures, Hamiltonian 1-forms and the observable brackets.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exterior::{
    eval_on_fields, ext_d, interior, vf_bracket, Chart, DifferentialForm, VectorField,
};
use crate::linalg::Matrix;
use crate::polyring::{format_rational, Monomial, Polynomial, Rational};

pub fn check_closed(omega: &DifferentialForm) -> Result<bool> {
    if omega.degree() != 3 {
        return Err(Error::invalid(format!(
            "expected a 3-form, got degree {}",
            omega.degree()
        )));
    }
    Ok(ext_d(omega).is_zero())
}

/// Outcome of the pointwise non-degeneracy test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nondegeneracy {
    /// `v -> iota_v omega` has full rank at every listed point.
    Certified { points: Vec<Vec<Rational>> },
    /// A nonzero `v` with `iota_v omega = 0` at `point`.
    Degenerate {
        point: Vec<Rational>,
        kernel: Vec<Rational>,
    },
}

impl Nondegeneracy {
    pub fn is_certified(&self) -> bool {
        matches!(self, Nondegeneracy::Certified { .. })
    }
}

/// Certifies non-degeneracy at the given rational sample points by exact rank.
pub fn check_nondegenerate(omega: &DifferentialForm, points: &[Vec<Rational>]) -> Result<Nondegeneracy> {
    if omega.degree() != 3 {
        return Err(Error::invalid(format!(
            "expected a 3-form, got degree {}",
            omega.degree()
        )));
    }
    if points.is_empty() {
        return Err(Error::invalid("non-degeneracy needs at least one sample point"));
    }
    let chart = omega.chart();
    let dim = chart.dim();
    // column i holds iota_{d/dx_i} omega, so the kernel is the degenerate directions
    let contractions = (0..dim)
        .map(|i| {
            let e = VectorField::coordinate(chart, i, Polynomial::one(dim))?;
            interior(&e, omega)
        })
        .collect::<Result<Vec<_>>>()?;
    for point in points {
        let columns = contractions
            .iter()
            .map(|f| {
                f.components()
                    .map(|(idx, p)| Ok((idx.clone(), p.eval(point)?)))
                    .filter(|r| r.as_ref().map_or(true, |(_, v)| !v.is_zero()))
                    .collect::<Result<BTreeMap<_, _>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let (m, _) = Matrix::from_sparse_columns(&columns);
        if let Some(kernel) = m.kernel().into_iter().next() {
            return Ok(Nondegeneracy::Degenerate {
                point: point.clone(),
                kernel,
            });
        }
    }
    Ok(Nondegeneracy::Certified {
        points: points.to_vec(),
    })
}

/// A closed 3-form certified non-degenerate at sample points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlecticStructure {
    omega: DifferentialForm,
    witness_points: Vec<Vec<Rational>>,
}

impl PlecticStructure {
    pub fn new(omega: DifferentialForm, sample_points: &[Vec<Rational>]) -> Result<Self> {
        if !check_closed(&omega)? {
            return Err(Error::Consistency {
                identity: "d omega = 0".into(),
                residual: ext_d(&omega).to_text(),
            });
        }
        match check_nondegenerate(&omega, sample_points)? {
            Nondegeneracy::Certified { points } => Ok(PlecticStructure {
                omega,
                witness_points: points,
            }),
            Nondegeneracy::Degenerate { point, kernel } => Err(Error::invalid(format!(
                "omega is degenerate at ({}) along ({})",
                join_rationals(&point),
                join_rationals(&kernel)
            ))),
        }
    }

    pub fn omega(&self) -> &DifferentialForm {
        &self.omega
    }

    pub fn chart(&self) -> &Chart {
        self.omega.chart()
    }

    /// Points at which non-degeneracy was certified.
    pub fn witness_points(&self) -> &[Vec<Rational>] {
        &self.witness_points
    }

    /// `d alpha - iota_X omega`; zero iff `(alpha, X)` is a Hamiltonian pair.
    pub fn hamiltonian_residual(&self, alpha: &DifferentialForm, field: &VectorField) -> Result<DifferentialForm> {
        if alpha.degree() != 1 {
            return Err(Error::invalid("a Hamiltonian form has degree 1"));
        }
        ext_d(alpha).try_sub(&interior(field, &self.omega)?)
    }

    /// Verifies a hand-supplied pair.
    pub fn verify_pair(&self, alpha: DifferentialForm, field: VectorField) -> Result<HamiltonianPair> {
        let residual = self.hamiltonian_residual(&alpha, &field)?;
        if !residual.is_zero() {
            return Err(Error::Consistency {
                identity: "d alpha = iota_X omega".into(),
                residual: residual.to_text(),
            });
        }
        Ok(HamiltonianPair { alpha, field })
    }

    fn ensure_pair(&self, pair: &HamiltonianPair) -> Result<()> {
        let residual = self.hamiltonian_residual(&pair.alpha, &pair.field)?;
        if residual.is_zero() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "pair ({}, {}) is not Hamiltonian for this omega",
                pair.alpha, pair.field
            )))
        }
    }
}

/// Columns of the linear map `X -> iota_X omega` on the ansatz space of
/// fields with components of total degree `<= degree_bound`.
fn field_columns(omega: &DifferentialForm, degree_bound: u32) -> Result<(Vec<(usize, Monomial)>, Vec<DifferentialForm>)> {
    let chart = omega.chart();
    let dim = chart.dim();
    let mut unknowns = Vec::new();
    let mut images = Vec::new();
    for i in 0..dim {
        for m in Monomial::all_up_to(dim, degree_bound) {
            let x = VectorField::coordinate(chart, i, Polynomial::monomial(m.clone(), Rational::one()))?;
            images.push(interior(&x, omega)?);
            unknowns.push((i, m));
        }
    }
    Ok((unknowns, images))
}

fn join_rationals(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(", ")
}

/// A 1-form together with its Hamiltonian vector field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamiltonianPair {
    alpha: DifferentialForm,
    field: VectorField,
}

impl HamiltonianPair {
    pub fn alpha(&self) -> &DifferentialForm {
        &self.alpha
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    /// `(df, 0)`: exact forms are Hamiltonian with vanishing field.
    pub fn exact(chart: &Chart, f: &Polynomial) -> Result<Self> {
        let alpha = ext_d(&DifferentialForm::function(chart, f.clone())?);
        Ok(HamiltonianPair {
            alpha,
            field: VectorField::zero(chart),
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        HamiltonianPair {
            alpha: DifferentialForm::zero(chart, 1),
            field: VectorField::zero(chart),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.is_zero() && self.field.is_zero()
    }

    pub fn try_add(&self, other: &HamiltonianPair) -> Result<HamiltonianPair> {
        Ok(HamiltonianPair {
            alpha: self.alpha.try_add(&other.alpha)?,
            field: self.field.try_add(&other.field)?,
        })
    }

    pub fn scale(&self, c: &Rational) -> HamiltonianPair {
        HamiltonianPair {
            alpha: self.alpha.scale(c),
            field: self.field.scale(c),
        }
    }
}

impl fmt::Display for HamiltonianPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.alpha, self.field)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamiltonianSolution {
    pub pair: HamiltonianPair,
    /// The homogeneous system `iota_X omega = 0` has only the trivial
    /// solution within the ansatz.
    pub unique: bool,
}

/// Solves `d alpha = iota_X omega` for `X` with components of total degree
/// at most `degree_bound`, by exact elimination on the monomial coefficients.
pub fn solve_hamiltonian(
    ps: &PlecticStructure,
    alpha: &DifferentialForm,
    degree_bound: u32,
) -> Result<HamiltonianSolution> {
    if alpha.degree() != 1 {
        return Err(Error::invalid("a Hamiltonian form has degree 1"));
    }
    if alpha.chart() != ps.chart() {
        return Err(Error::ChartMismatch {
            left: ps.chart().names().join(","),
            right: alpha.chart().names().join(","),
        });
    }
    let (unknowns, images) = field_columns(ps.omega(), degree_bound)?;
    let rhs = ext_d(alpha).coordinates();
    let mut columns: Vec<_> = images.iter().map(DifferentialForm::coordinates).collect();
    // the right-hand side rides along as an extra column so that its rows exist
    columns.push(rhs.clone());
    let (full, _) = Matrix::from_sparse_columns(&columns);
    let n = unknowns.len();
    let mut a = Matrix::zeros(full.rows(), n);
    let mut b = Vec::with_capacity(full.rows());
    for r in 0..full.rows() {
        for c in 0..n {
            a.set(r, c, full.get(r, c).clone());
        }
        b.push(full.get(r, n).clone());
    }
    let no_solution = || {
        Error::NoSolution(format!(
            "{} is not Hamiltonian, or its field needs degree above {degree_bound}",
            alpha
        ))
    };
    let solution = a.solve(&b).ok_or_else(no_solution)?;
    let chart = ps.chart();
    let dim = chart.dim();
    let mut comps = vec![Polynomial::zero(dim); dim];
    for ((i, m), c) in unknowns.into_iter().zip(solution) {
        if !c.is_zero() {
            comps[i] = &comps[i] + &Polynomial::monomial(m, c);
        }
    }
    let field = VectorField::new(chart, comps)?;
    let unique = a.kernel().is_empty();
    let pair = ps
        .verify_pair(alpha.clone(), field)
        .map_err(|e| Error::Internal(format!("solver produced an unverified pair: {e}")))?;
    Ok(HamiltonianSolution { pair, unique })
}

/// Basis of all Hamiltonian pairs `(alpha, X)` with coefficients of degree
/// at most `degree_bound`, from the kernel of `(alpha, X) -> d alpha - iota_X omega`.
pub fn hamiltonian_basis(ps: &PlecticStructure, degree_bound: u32) -> Result<Vec<HamiltonianPair>> {
    hamiltonian_kernel(ps.omega(), degree_bound)?
        .into_iter()
        .map(|(alpha, field)| ps.verify_pair(alpha, field))
        .collect()
}

/// Basis of solutions `(alpha, X)` of `d alpha = iota_X omega` with
/// coefficients of degree at most `degree_bound`, for any 3-form `omega`.
pub fn hamiltonian_kernel(omega: &DifferentialForm, degree_bound: u32) -> Result<Vec<(DifferentialForm, VectorField)>> {
    let chart = omega.chart();
    let dim = chart.dim();
    let monomials = Monomial::all_up_to(dim, degree_bound);
    let mut columns = Vec::new();
    let mut alpha_unknowns = Vec::new();
    for j in 0..dim {
        for m in &monomials {
            let a = DifferentialForm::basis(chart, &[j], Polynomial::monomial(m.clone(), Rational::one()))?;
            columns.push(ext_d(&a).coordinates());
            alpha_unknowns.push((j, m.clone()));
        }
    }
    let (field_unknowns, images) = field_columns(omega, degree_bound)?;
    for img in &images {
        columns.push(img.scale(&-Rational::one()).coordinates());
    }
    let (mat, _) = Matrix::from_sparse_columns(&columns);
    let na = alpha_unknowns.len();
    mat.kernel()
        .into_iter()
        .map(|v| {
            let mut alpha_comps = vec![Polynomial::zero(dim); dim];
            let mut field_comps = vec![Polynomial::zero(dim); dim];
            for (k, c) in v.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if k < na {
                    let (j, m) = &alpha_unknowns[k];
                    alpha_comps[*j] = &alpha_comps[*j] + &Polynomial::monomial(m.clone(), c);
                } else {
                    let (i, m) = &field_unknowns[k - na];
                    field_comps[*i] = &field_comps[*i] + &Polynomial::monomial(m.clone(), c);
                }
            }
            let alpha = DifferentialForm::from_components(
                chart,
                1,
                alpha_comps.into_iter().enumerate().map(|(j, p)| (vec![j], p)),
            )?;
            Ok((alpha, VectorField::new(chart, field_comps)?))
        })
        .collect()
}

/// `l2(a, b) = (iota_{X_a} iota_{X_b} omega, [X_a, X_b])`.
pub fn l2_bracket(ps: &PlecticStructure, a: &HamiltonianPair, b: &HamiltonianPair) -> Result<HamiltonianPair> {
    ps.ensure_pair(a)?;
    ps.ensure_pair(b)?;
    l2_unchecked(ps, a, b)
}

pub(crate) fn l2_unchecked(
    ps: &PlecticStructure,
    a: &HamiltonianPair,
    b: &HamiltonianPair,
) -> Result<HamiltonianPair> {
    let alpha = interior(&a.field, &interior(&b.field, ps.omega())?)?;
    let field = vf_bracket(&a.field, &b.field)?;
    let residual = ps.hamiltonian_residual(&alpha, &field)?;
    if !residual.is_zero() {
        return Err(Error::Internal(format!(
            "bracket of ({a}) and ({b}) is not Hamiltonian with the bracket field: residual {residual}"
        )));
    }
    Ok(HamiltonianPair { alpha, field })
}

/// `l3(a, b, c) = omega(X_a, X_b, X_c)`.
pub fn l3_triple(
    ps: &PlecticStructure,
    a: &HamiltonianPair,
    b: &HamiltonianPair,
    c: &HamiltonianPair,
) -> Result<Polynomial> {
    ps.ensure_pair(a)?;
    ps.ensure_pair(b)?;
    ps.ensure_pair(c)?;
    l3_unchecked(ps, a, b, c)
}

pub(crate) fn l3_unchecked(
    ps: &PlecticStructure,
    a: &HamiltonianPair,
    b: &HamiltonianPair,
    c: &HamiltonianPair,
) -> Result<Polynomial> {
    eval_on_fields(ps.omega(), &[a.field.clone(), b.field.clone(), c.field.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::int;
    use crate::syntax::{parse_form, parse_vector_field};

    fn r3() -> PlecticStructure {
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        let omega = parse_form("dx^dy^dz", &c, Some(3)).unwrap();
        PlecticStructure::new(omega, &[vec![int(0), int(0), int(0)]]).unwrap()
    }

    fn form(ps: &PlecticStructure, s: &str) -> DifferentialForm {
        parse_form(s, ps.chart(), Some(1)).unwrap()
    }

    fn field(ps: &PlecticStructure, s: &str) -> VectorField {
        parse_vector_field(s, ps.chart()).unwrap()
    }

    fn solve(ps: &PlecticStructure, s: &str) -> HamiltonianPair {
        solve_hamiltonian(ps, &form(ps, s), 3).unwrap().pair
    }

    #[test]
    fn closedness() {
        let c = Chart::new(&["x", "y", "z", "w"]).unwrap();
        assert!(check_closed(&parse_form("dx^dy^dz", &c, None).unwrap()).unwrap());
        // d(x dy^dz^dw) = dx^dy^dz^dw, so the x-coefficient breaks closedness
        let open = parse_form("x^2*dx^dy^dz + x*dy^dz^dw", &c, None).unwrap();
        assert!(!check_closed(&open).unwrap());
        assert!(check_closed(&parse_form("dx", &c, None).unwrap()).is_err());
    }

    #[test]
    fn nondegeneracy() {
        let r3 = Chart::new(&["x", "y", "z"]).unwrap();
        let vol = parse_form("dx^dy^dz", &r3, None).unwrap();
        let pts = vec![vec![int(1), int(2), int(3)], vec![int(0), int(0), int(0)]];
        assert!(check_nondegenerate(&vol, &pts).unwrap().is_certified());

        let r4 = Chart::new(&["x", "y", "z", "w"]).unwrap();
        let vol4 = parse_form("dx^dy^dz", &r4, None).unwrap();
        match check_nondegenerate(&vol4, &[vec![int(0); 4]]).unwrap() {
            Nondegeneracy::Degenerate { kernel, .. } => {
                assert_eq!(kernel, vec![int(0), int(0), int(0), int(1)]);
            }
            other => panic!("expected degenerate, got {other:?}"),
        }
        let zero = DifferentialForm::zero(&r3, 3);
        assert!(!check_nondegenerate(&zero, &[vec![int(0); 3]]).unwrap().is_certified());
        assert!(check_nondegenerate(&vol, &[]).is_err());
    }

    #[test]
    fn solver_fixtures() {
        let ps = r3();
        let sol = solve_hamiltonian(&ps, &form(&ps, "x*dy"), 3).unwrap();
        assert_eq!(sol.pair.field(), &field(&ps, "d/dz"));
        assert!(sol.unique);
        assert!(solve(&ps, "dx").field().is_zero());
        assert_eq!(solve(&ps, "x^2*dy").field(), &field(&ps, "2*x*d/dz"));
        assert_eq!(solve(&ps, "y*dz").field(), &field(&ps, "d/dx"));
    }

    #[test]
    fn solver_reports_insufficient_degree() {
        let ps = r3();
        // field is 2x d/dz, degree 1
        let err = solve_hamiltonian(&ps, &form(&ps, "x^2*dy"), 0).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)));
    }

    #[test]
    fn non_hamiltonian_form() {
        let c = Chart::new(&["a", "b", "c", "p", "q", "r"]).unwrap();
        let omega = parse_form("da^db^dc + dp^dq^dr", &c, None).unwrap();
        let ps = PlecticStructure::new(omega, &[vec![int(0); 6]]).unwrap();
        let alpha = parse_form("a*dp", &c, None).unwrap();
        assert!(matches!(solve_hamiltonian(&ps, &alpha, 2), Err(Error::NoSolution(_))));
        let sol = solve_hamiltonian(&ps, &parse_form("a*db", &c, None).unwrap(), 2).unwrap();
        assert_eq!(sol.pair.field(), &parse_vector_field("d/dc", &c).unwrap());
    }

    #[test]
    fn every_constant_three_form_on_r4_is_degenerate() {
        let c = Chart::new(&["x", "y", "z", "w"]).unwrap();
        let omega = parse_form("dx^dy^dz + dx^dy^dw + dx^dz^dw + dy^dz^dw", &c, None).unwrap();
        assert!(PlecticStructure::new(omega, &[vec![int(0); 4]]).is_err());
    }

    #[test]
    fn brackets() {
        let ps = r3();
        let a = solve(&ps, "x*dy");
        let b = solve(&ps, "y*dz");
        let c = solve(&ps, "z*dx");
        let ab = l2_bracket(&ps, &a, &b).unwrap();
        assert_eq!(ab.alpha(), &form(&ps, "-dy"));
        assert!(ab.field().is_zero());
        assert!(l2_bracket(&ps, &a, &a).unwrap().is_zero());
        let closed = solve(&ps, "dx");
        assert!(l2_bracket(&ps, &a, &closed).unwrap().alpha().is_zero());

        assert_eq!(l3_triple(&ps, &a, &b, &c).unwrap(), Polynomial::one(3));
        assert!(l3_triple(&ps, &a, &a, &c).unwrap().is_zero());
        assert!(l3_triple(&ps, &a, &b, &closed).unwrap().is_zero());
    }

    #[test]
    fn unverified_pairs_are_rejected() {
        let ps = r3();
        let bogus = HamiltonianPair {
            alpha: form(&ps, "x*dy"),
            field: field(&ps, "d/dx"),
        };
        let good = solve(&ps, "x*dy");
        assert!(l2_bracket(&ps, &bogus, &good).is_err());
        assert!(l3_triple(&ps, &good, &good, &bogus).is_err());
        assert!(ps.verify_pair(form(&ps, "x*dy"), field(&ps, "d/dx")).is_err());
    }

    #[test]
    fn basis_spans_known_pairs() {
        let ps = r3();
        let basis = hamiltonian_basis(&ps, 1).unwrap();
        assert!(!basis.is_empty());
        // every 1-form on R^3 with the volume form is Hamiltonian: alpha part spans all 3*4 coefficients
        let alphas: Vec<_> = basis.iter().map(|p| p.alpha().coordinates()).collect();
        let (m, _) = Matrix::from_sparse_columns(&alphas);
        assert_eq!(m.rank(), 12);
    }
}

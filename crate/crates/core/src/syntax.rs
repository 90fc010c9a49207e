//! Text grammars for polynomials, forms and vector fields.
//!
//! ```text
//! polynomial    3/2*x^2*y - z
//! form          x*dy^dz + du^dx      (x + y)*dz
//! vector field  2*x*d/dz - y*d/dx
//! ```
//!
//! `*` between forms is the wedge product, `^` is a power when the exponent
//! is an integer literal and a wedge otherwise. Division is only by constants.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exterior::{Basis, Chart, DifferentialForm, VectorField};
use crate::polyring::{Polynomial, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Partial(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn err(column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Num(s.parse().expect("digits")), col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            // `d/dname` is a coordinate vector field
            if s == "d" && chars.get(i) == Some(&'/') && chars.get(i + 1) == Some(&'d') {
                let mut j = i + 2;
                let name_start = j;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == name_start {
                    return Err(err(col, "expected a variable name after `d/d`"));
                }
                out.push((Tok::Partial(chars[name_start..j].iter().collect()), col));
                i = j;
                continue;
            }
            out.push((Tok::Ident(s), col));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(err(col, format!("unexpected character `{c}`"))),
        };
        out.push((tok, col));
        i += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Ast {
    Num(BigInt),
    Ident(String, usize),
    Partial(String, usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Pow(Box<Ast>, Box<Ast>, usize),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ast::Neg(Box::new(self.term()?))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                Some(Tok::Slash) => {
                    let col = self.col();
                    self.bump();
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.power()?), col);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Ast> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(&Tok::Caret) {
            let col = self.col();
            self.bump();
            lhs = Ast::Pow(Box::new(lhs), Box::new(self.atom()?), col);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Ast> {
        let col = self.col();
        match self.bump() {
            Some((Tok::Num(n), _)) => Ok(Ast::Num(n)),
            Some((Tok::Ident(s), c)) => Ok(Ast::Ident(s, c)),
            Some((Tok::Partial(s), c)) => Ok(Ast::Partial(s, c)),
            Some((Tok::Minus, _)) => Ok(Ast::Neg(Box::new(self.atom()?))),
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(err(col, "unbalanced parenthesis")),
                }
            }
            Some((t, c)) => Err(err(c, format!("unexpected token {t:?}"))),
            None => Err(err(col, "unexpected end of input")),
        }
    }
}

fn parse_ast(text: &str) -> Result<Ast> {
    let toks = tokenize(text)?;
    let end_col = text.chars().count() + 1;
    if toks.is_empty() {
        return Err(err(1, "empty expression"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end_col,
    };
    let ast = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(err(p.col(), "trailing input"));
    }
    Ok(ast)
}

/// Possibly inhomogeneous form used during evaluation.
type MixedForm = BTreeMap<Basis, Polynomial>;

fn mixed_add(mut a: MixedForm, b: MixedForm) -> MixedForm {
    for (k, v) in b {
        let sum = match a.remove(&k) {
            Some(old) => &old + &v,
            None => v,
        };
        if !sum.is_zero() {
            a.insert(k, sum);
        }
    }
    a
}

fn mixed_scale(a: MixedForm, c: &Rational) -> MixedForm {
    a.into_iter()
        .map(|(k, v)| (k, v.scale(c)))
        .filter(|(_, v)| !v.is_zero())
        .collect()
}

fn mixed_wedge(a: &MixedForm, b: &MixedForm) -> MixedForm {
    let mut out = MixedForm::new();
    for (ia, pa) in a {
        for (ib, pb) in b {
            if ia.iter().any(|i| ib.contains(i)) {
                continue;
            }
            let inversions: usize = ia.iter().map(|x| ib.iter().filter(|y| *y < x).count()).sum();
            let mut idx: Basis = ia.iter().chain(ib).copied().collect();
            idx.sort_unstable();
            let prod = pa * pb;
            let prod = if inversions % 2 == 1 { -prod } else { prod };
            out = mixed_add(out, [(idx, prod)].into_iter().collect());
        }
    }
    out
}

fn as_function(a: &MixedForm, dim: usize) -> Option<Polynomial> {
    if a.keys().all(Vec::is_empty) {
        Some(a.get(&Vec::new()).cloned().unwrap_or_else(|| Polynomial::zero(dim)))
    } else {
        None
    }
}

fn as_constant(a: &MixedForm, dim: usize) -> Option<Rational> {
    as_function(a, dim)?.as_constant()
}

fn literal_exponent(ast: &Ast) -> Option<&BigInt> {
    match ast {
        Ast::Num(n) => Some(n),
        _ => None,
    }
}

fn eval_form(ast: &Ast, chart: &Chart) -> Result<MixedForm> {
    let dim = chart.dim();
    let func = |p: Polynomial| -> MixedForm {
        if p.is_zero() {
            MixedForm::new()
        } else {
            [(Vec::new(), p)].into_iter().collect()
        }
    };
    Ok(match ast {
        Ast::Num(n) => func(Polynomial::constant(dim, Rational::from_integer(n.clone()))),
        Ast::Ident(name, col) => {
            if let Some(i) = chart.index_of(name) {
                func(Polynomial::var(dim, i)?)
            } else if let Some(i) = name.strip_prefix('d').and_then(|v| chart.index_of(v)) {
                [(vec![i], Polynomial::one(dim))].into_iter().collect()
            } else {
                return Err(err(*col, format!("unknown identifier `{name}`")));
            }
        }
        Ast::Partial(_, col) => return Err(err(*col, "vector field where a form was expected")),
        Ast::Neg(a) => mixed_scale(eval_form(a, chart)?, &-Rational::from_integer(1.into())),
        Ast::Add(a, b) => mixed_add(eval_form(a, chart)?, eval_form(b, chart)?),
        Ast::Sub(a, b) => mixed_add(
            eval_form(a, chart)?,
            mixed_scale(eval_form(b, chart)?, &-Rational::from_integer(1.into())),
        ),
        Ast::Mul(a, b) => mixed_wedge(&eval_form(a, chart)?, &eval_form(b, chart)?),
        Ast::Div(a, b, col) => {
            let d = as_constant(&eval_form(b, chart)?, dim)
                .ok_or_else(|| err(*col, "division by a non-constant"))?;
            if d.is_zero() {
                return Err(err(*col, "division by zero"));
            }
            mixed_scale(eval_form(a, chart)?, &(Rational::from_integer(1.into()) / d))
        }
        Ast::Pow(a, b, col) => {
            let base = eval_form(a, chart)?;
            match literal_exponent(b) {
                Some(e) => {
                    let p = as_function(&base, dim)
                        .ok_or_else(|| err(*col, "integer power of a form of positive degree"))?;
                    let e = e.to_u32().ok_or_else(|| err(*col, "exponent too large"))?;
                    func(p.pow(e))
                }
                None => mixed_wedge(&base, &eval_form(b, chart)?),
            }
        }
    })
}

pub fn parse_polynomial(text: &str, chart: &Chart) -> Result<Polynomial> {
    let m = eval_form(&parse_ast(text)?, chart)?;
    as_function(&m, chart.dim()).ok_or_else(|| err(1, "expected a function, found a form"))
}

/// Parses a homogeneous form; `degree` pins the expected degree (required
/// to give the zero form a degree other than 0).
pub fn parse_form(text: &str, chart: &Chart, degree: Option<usize>) -> Result<DifferentialForm> {
    let m = eval_form(&parse_ast(text)?, chart)?;
    let mut degrees = m.keys().map(Vec::len);
    let found = degrees.next();
    if degrees.any(|d| Some(d) != found) {
        return Err(err(1, "inhomogeneous form"));
    }
    let k = match (found, degree) {
        (Some(f), Some(d)) if f != d => {
            return Err(err(1, format!("expected a {d}-form, found a {f}-form")));
        }
        (Some(f), _) => f,
        (None, Some(d)) => d,
        (None, None) => 0,
    };
    DifferentialForm::from_components(chart, k, m)
}

enum FieldVal {
    Scalar(Polynomial),
    Field(VectorField),
}

fn eval_field(ast: &Ast, chart: &Chart) -> Result<FieldVal> {
    use FieldVal::*;
    let dim = chart.dim();
    let minus_one = -Rational::from_integer(1.into());
    let add = |a: FieldVal, b: FieldVal, col: usize| -> Result<FieldVal> {
        match (a, b) {
            (Scalar(p), Scalar(q)) => Ok(Scalar(&p + &q)),
            (Field(x), Field(y)) => Ok(Field(x.try_add(&y)?)),
            (Scalar(p), Field(x)) | (Field(x), Scalar(p)) if p.is_zero() => Ok(Field(x)),
            _ => Err(err(col, "cannot add a function to a vector field")),
        }
    };
    let scale = |a: FieldVal, c: &Rational| match a {
        Scalar(p) => Scalar(p.scale(c)),
        Field(x) => Field(x.scale(c)),
    };
    Ok(match ast {
        Ast::Num(n) => Scalar(Polynomial::constant(dim, Rational::from_integer(n.clone()))),
        Ast::Ident(name, col) => match chart.index_of(name) {
            Some(i) => Scalar(Polynomial::var(dim, i)?),
            None => return Err(err(*col, format!("unknown identifier `{name}`"))),
        },
        Ast::Partial(name, col) => match chart.index_of(name) {
            Some(i) => Field(VectorField::coordinate(chart, i, Polynomial::one(dim))?),
            None => return Err(err(*col, format!("unknown variable `{name}` in d/d{name}"))),
        },
        Ast::Neg(a) => scale(eval_field(a, chart)?, &minus_one),
        Ast::Add(a, b) => add(eval_field(a, chart)?, eval_field(b, chart)?, 1)?,
        Ast::Sub(a, b) => add(
            eval_field(a, chart)?,
            scale(eval_field(b, chart)?, &minus_one),
            1,
        )?,
        Ast::Mul(a, b) => match (eval_field(a, chart)?, eval_field(b, chart)?) {
            (Scalar(p), Scalar(q)) => Scalar(&p * &q),
            (Scalar(p), Field(x)) | (Field(x), Scalar(p)) => Field(x.mul_function(&p)?),
            (Field(_), Field(_)) => return Err(err(1, "product of two vector fields")),
        },
        Ast::Div(a, b, col) => {
            let d = match eval_field(b, chart)? {
                Scalar(p) => p.as_constant(),
                Field(_) => None,
            }
            .ok_or_else(|| err(*col, "division by a non-constant"))?;
            if d.is_zero() {
                return Err(err(*col, "division by zero"));
            }
            scale(eval_field(a, chart)?, &(Rational::from_integer(1.into()) / d))
        }
        Ast::Pow(a, b, col) => {
            let e = literal_exponent(b)
                .and_then(ToPrimitive::to_u32)
                .ok_or_else(|| err(*col, "exponent must be a small integer literal"))?;
            match eval_field(a, chart)? {
                Scalar(p) => Scalar(p.pow(e)),
                Field(_) => return Err(err(*col, "power of a vector field")),
            }
        }
    })
}

pub fn parse_vector_field(text: &str, chart: &Chart) -> Result<VectorField> {
    match eval_field(&parse_ast(text)?, chart)? {
        FieldVal::Field(x) => Ok(x),
        FieldVal::Scalar(p) if p.is_zero() => Ok(VectorField::zero(chart)),
        FieldVal::Scalar(_) => Err(err(1, "expected a vector field, found a function")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{int, rat};

    fn chart() -> Chart {
        Chart::new(&["x", "y", "z", "u"]).unwrap()
    }

    #[test]
    fn polynomial_round_trip() {
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        let p = parse_polynomial("3/2*x^2*y - z", &c).unwrap();
        assert_eq!(p.to_text(c.names()), "3/2*x^2*y - z");
        assert_eq!(parse_polynomial(&p.to_text(c.names()), &c).unwrap(), p);
        let q = parse_polynomial("(x+1)*(x-1)", &c).unwrap();
        assert_eq!(q.to_text(c.names()), "x^2 - 1");
        assert_eq!(
            parse_polynomial("x/2", &c).unwrap().eval(&[rat(1, 3), int(0), int(0)]).unwrap(),
            rat(1, 6)
        );
    }

    #[test]
    fn forms() {
        let c = chart();
        let w = parse_form("x * dy^dz + du^dx", &c, Some(2)).unwrap();
        assert_eq!(w.degree(), 2);
        assert_eq!(w.to_text(), "-dx^du + x*dy^dz");
        assert_eq!(parse_form(&w.to_text(), &c, None).unwrap(), w);
        let zero = parse_form("0", &c, Some(3)).unwrap();
        assert!(zero.is_zero());
        assert_eq!(zero.degree(), 3);
        assert!(parse_form("dx^dx", &c, Some(2)).unwrap().is_zero());
        assert_eq!(
            parse_form("(x + y)*dz", &c, None).unwrap().to_text(),
            "(x + y)*dz"
        );
    }

    #[test]
    fn form_errors() {
        let c = chart();
        assert!(parse_form("dx + dy^dz", &c, None).is_err());
        assert!(parse_form("dx", &c, Some(2)).is_err());
        assert!(parse_form("dx^2", &c, None).is_err());
        let e = parse_form("x * dq", &c, None).unwrap_err();
        assert!(matches!(e, Error::Parse { column: 5, .. }), "{e:?}");
        assert!(parse_form("x / y", &c, None).is_err());
        assert!(parse_form("(x + 1", &c, None).is_err());
    }

    #[test]
    fn vector_fields() {
        let c = chart();
        let v = parse_vector_field("2*x*d/dz - y*d/dx", &c).unwrap();
        assert_eq!(v.to_text(), "-y*d/dx + 2*x*d/dz");
        assert_eq!(parse_vector_field(&v.to_text(), &c).unwrap(), v);
        assert!(parse_vector_field("0", &c).unwrap().is_zero());
        assert!(parse_vector_field("x", &c).is_err());
        assert!(parse_vector_field("d/dx*d/dy", &c).is_err());
        assert!(parse_vector_field("d/dq", &c).is_err());
        assert_eq!(
            parse_vector_field("(x+y)*d/du", &c).unwrap().to_text(),
            "(x + y)*d/du"
        );
    }
}

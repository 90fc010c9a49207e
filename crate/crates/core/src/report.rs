//! Check reports and the sample-evaluation runner shared by every checker.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    Pass {
        tuples: usize,
    },
    Fail {
        tuple: usize,
        witness: Vec<Witness>,
        residual: String,
    },
    Inconclusive {
        reason: String,
    },
}

impl Outcome {
    pub fn status(&self) -> Status {
        match self {
            Outcome::Pass { .. } => Status::Pass,
            Outcome::Fail { .. } => Status::Fail,
            Outcome::Inconclusive { .. } => Status::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationResult {
    pub equation: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

/// Results of one checker run, one entry per equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub requested: usize,
    pub evaluated: usize,
    /// The sampler ran dry before `requested` tuples were drawn.
    pub incomplete: bool,
    pub results: Vec<EquationResult>,
}

impl CheckReport {
    pub fn status(&self) -> Status {
        self.results
            .iter()
            .map(|r| r.outcome.status())
            .max()
            .unwrap_or(Status::Inconclusive)
    }

    pub fn outcome(&self, equation: &str) -> Option<&Outcome> {
        self.results
            .iter()
            .find(|r| r.equation == equation)
            .map(|r| &r.outcome)
    }

    pub fn passed(&self, equation: &str) -> bool {
        matches!(self.outcome(equation), Some(Outcome::Pass { .. }))
    }

    pub fn failed(&self, equation: &str) -> bool {
        matches!(self.outcome(equation), Some(Outcome::Fail { .. }))
    }

    /// A report with a single inconclusive entry.
    pub fn inconclusive(check: impl Into<String>, equation: impl Into<String>, reason: impl Into<String>) -> Self {
        CheckReport {
            check: check.into(),
            requested: 0,
            evaluated: 0,
            incomplete: false,
            results: vec![EquationResult {
                equation: equation.into(),
                outcome: Outcome::Inconclusive {
                    reason: reason.into(),
                },
            }],
        }
    }
}

/// Result of evaluating one equation on one tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated(String),
}

impl Verdict {
    pub fn from_residual(is_zero: bool, residual: impl FnOnce() -> String) -> Self {
        if is_zero {
            Verdict::Holds
        } else {
            Verdict::Violated(residual())
        }
    }
}

/// A sample tuple whose named entries can be printed as a witness.
pub trait Tuple: Sync {
    fn entry(&self, name: &str) -> Option<String>;
}

type EvalFn<'a, T> = Box<dyn Fn(&T) -> Result<Verdict> + Sync + 'a>;

/// A named identity over tuples of type `T`.
pub struct Equation<'a, T> {
    pub name: &'static str,
    pub uses: &'static [&'static str],
    pub eval: EvalFn<'a, T>,
}

impl<'a, T> Equation<'a, T> {
    pub fn new(
        name: &'static str,
        uses: &'static [&'static str],
        eval: impl Fn(&T) -> Result<Verdict> + Sync + 'a,
    ) -> Self {
        Equation {
            name,
            uses,
            eval: Box::new(eval),
        }
    }
}

/// Evaluates every equation on every tuple in parallel. The reported witness
/// is the lowest-indexed failing tuple, so the result is independent of
/// scheduling.
pub fn run_equations<T: Tuple>(
    check: &str,
    requested: usize,
    tuples: &[T],
    equations: &[Equation<'_, T>],
) -> CheckReport {
    let results = equations
        .iter()
        .map(|eq| {
            let outcome = if tuples.is_empty() {
                Outcome::Inconclusive {
                    reason: "no sample tuples were evaluated".into(),
                }
            } else {
                let failure = tuples.par_iter().enumerate().find_map_first(|(i, t)| {
                    match (eq.eval)(t) {
                        Ok(Verdict::Holds) => None,
                        Ok(Verdict::Violated(residual)) => Some((i, residual)),
                        Err(e) => Some((i, format!("evaluation error: {e}"))),
                    }
                });
                match failure {
                    None => Outcome::Pass {
                        tuples: tuples.len(),
                    },
                    Some((i, residual)) => Outcome::Fail {
                        tuple: i,
                        witness: eq
                            .uses
                            .iter()
                            .filter_map(|&n| {
                                tuples[i].entry(n).map(|value| Witness {
                                    name: n.to_string(),
                                    value,
                                })
                            })
                            .collect(),
                        residual,
                    },
                }
            };
            EquationResult {
                equation: eq.name.to_string(),
                outcome,
            }
        })
        .collect();
    CheckReport {
        check: check.to_string(),
        requested,
        evaluated: tuples.len(),
        incomplete: tuples.len() < requested,
        results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct N(i64);

    impl Tuple for N {
        fn entry(&self, name: &str) -> Option<String> {
            (name == "n").then(|| self.0.to_string())
        }
    }

    #[test]
    fn lowest_failing_index_is_reported() {
        let tuples: Vec<N> = (0..100).map(N).collect();
        let eqs = [
            Equation::new("small", &["n"], |t: &N| {
                Ok(Verdict::from_residual(t.0 < 40 || t.0 % 7 != 0, || format!("{}", t.0)))
            }),
            Equation::new("always", &["n"], |_: &N| Ok(Verdict::Holds)),
        ];
        let r = run_equations("demo", 100, &tuples, &eqs);
        match r.outcome("small").unwrap() {
            Outcome::Fail { tuple, witness, .. } => {
                assert_eq!(*tuple, 42);
                assert_eq!(witness[0].value, "42");
            }
            other => panic!("{other:?}"),
        }
        assert!(r.passed("always"));
        assert_eq!(r.status(), Status::Fail);
        assert!(!r.incomplete);
    }

    #[test]
    fn empty_input_is_inconclusive() {
        let eqs = [Equation::new("e", &[], |_: &N| Ok(Verdict::Holds))];
        let r = run_equations("demo", 5, &[], &eqs);
        assert_eq!(r.status(), Status::Inconclusive);
        assert!(r.incomplete);
    }
}

//! Witness data model and trust-nothing verification.
//!
//! A witness certifies one of two claims about polynomials over a shared
//! variable list:
//!
//! - **Unsat**: the system {P_1 ≥ 0, …, P_n ≥ 0} has no solution, shown by
//!   sums of squares Q_j with Σ Q_j·T_j + 1 = 0, where each T_j is a
//!   square-free product of the P_i (usually a single P_i) or the constant 1.
//! - **Nonneg**: P ≥ 0 everywhere, shown as a quotient of sums of squares:
//!   P·Q_1 − Q_2 = 0 with Q_1 ≠ 0.
//!
//! Verification re-expands every multiplier from its square decomposition
//! and checks the defining identity with exact arithmetic. It never trusts
//! the producer: coefficients, shapes, product labels and the identity are
//! all re-checked from scratch, using only polynomial arithmetic.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::{Monomial, Polynomial, Rational};
use crate::psd::SosDecomposition;

/// A sum of squares presented over an explicit monomial basis:
/// Q = Σ c_i·(v_i · basis)² with all c_i > 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SosMultiplier {
    pub basis: Vec<Monomial>,
    pub decomposition: SosDecomposition,
}

impl SosMultiplier {
    /// Expands the multiplier into an ordinary polynomial.
    pub fn to_polynomial(&self, vars: &[String]) -> Polynomial {
        let mut q = Polynomial::zero(vars);
        for (c, v) in &self.decomposition.terms {
            let mut linear = Polynomial::zero(vars);
            for (coeff, mono) in v.iter().zip(&self.basis) {
                if !coeff.is_zero() {
                    linear.add_term(mono.clone(), coeff.clone());
                }
            }
            let square = linear.mul(&linear).expect("same variable list");
            q = q.add(&square.scale(c)).expect("same variable list");
        }
        q
    }

    /// True when the expanded polynomial is identically zero.
    pub fn is_zero(&self, vars: &[String]) -> bool {
        self.to_polynomial(vars).is_zero()
    }
}

/// Which multiplicand a witness part multiplies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartLabel {
    /// The constant-1 slot of an unsatisfiability witness.
    Const,
    /// A square-free product of the problem constraints; `subset[i]` marks
    /// whether constraint i participates.
    Product(Vec<bool>),
    /// The Q_1 of a nonnegativity witness (multiplies P).
    Denominator,
    /// The Q_2 of a nonnegativity witness (multiplies −1).
    Numerator,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessPart {
    pub label: PartLabel,
    /// The multiplicand this part's multiplier is paired with; verified
    /// against the problem statement, never trusted.
    pub polynomial: Polynomial,
    pub multiplier: SosMultiplier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    Unsat,
    Nonneg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsatzWitness {
    pub kind: WitnessKind,
    pub parts: Vec<WitnessPart>,
}

/// The claim a witness is checked against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemStatement {
    Unsat { constraints: Vec<Polynomial> },
    Nonneg { p: Polynomial },
}

impl ProblemStatement {
    pub fn vars(&self) -> &[String] {
        match self {
            ProblemStatement::Unsat { constraints } => constraints[0].vars(),
            ProblemStatement::Nonneg { p } => p.vars(),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Reject {
    #[error("witness kind does not match the problem")]
    KindMismatch,
    #[error("nonpositive square coefficient in part {part}")]
    NonpositiveCoefficient { part: usize },
    #[error("square vector length differs from basis length in part {part}")]
    VectorShape { part: usize },
    #[error("part {part} multiplicand does not match the problem")]
    MultiplicandMismatch { part: usize },
    #[error("product subset in part {part} has wrong length")]
    SubsetShape { part: usize },
    #[error("unsat witness may not use {0} parts")]
    ForeignLabel(&'static str),
    #[error("nonneg witness needs exactly one denominator and one numerator part")]
    NonnegShape,
    #[error("denominator multiplier is the zero polynomial")]
    ZeroDenominator,
    #[error("witness and problem use different variable lists")]
    VarMismatch,
    #[error("defining identity does not vanish (residual has {0} terms)")]
    IdentityNonzero(usize),
}

/// Square-free product of the selected constraints (empty subset → 1).
pub fn product_polynomial(constraints: &[Polynomial], subset: &[bool]) -> Polynomial {
    let vars = constraints[0].vars();
    let mut acc = Polynomial::constant(vars, Rational::one());
    for (take, p) in subset.iter().zip(constraints) {
        if *take {
            acc = acc.mul(p).expect("same variable list");
        }
    }
    acc
}

/// Exact, solver-independent witness check. Accepts iff every square
/// coefficient is positive, every part multiplies the multiplicand the
/// problem actually defines, and the defining identity expands to the zero
/// polynomial (with a nonzero denominator for nonnegativity claims).
pub fn verify_witness(witness: &PsatzWitness, problem: &ProblemStatement) -> Result<(), Reject> {
    let vars = problem.vars().to_vec();
    match (witness.kind, problem) {
        (WitnessKind::Unsat, ProblemStatement::Unsat { .. }) => {}
        (WitnessKind::Nonneg, ProblemStatement::Nonneg { .. }) => {}
        _ => return Err(Reject::KindMismatch),
    }

    for (i, part) in witness.parts.iter().enumerate() {
        if part.polynomial.vars() != vars.as_slice() {
            return Err(Reject::VarMismatch);
        }
        for (c, v) in &part.multiplier.decomposition.terms {
            if !c.is_positive() {
                return Err(Reject::NonpositiveCoefficient { part: i });
            }
            if v.len() != part.multiplier.basis.len() {
                return Err(Reject::VectorShape { part: i });
            }
        }
    }

    match problem {
        ProblemStatement::Unsat { constraints } => {
            for (i, part) in witness.parts.iter().enumerate() {
                let expected = match &part.label {
                    PartLabel::Const => Polynomial::constant(&vars, Rational::one()),
                    PartLabel::Product(subset) => {
                        if subset.len() != constraints.len() {
                            return Err(Reject::SubsetShape { part: i });
                        }
                        product_polynomial(constraints, subset)
                    }
                    PartLabel::Denominator | PartLabel::Numerator => {
                        return Err(Reject::ForeignLabel("denominator/numerator"))
                    }
                };
                if part.polynomial != expected {
                    return Err(Reject::MultiplicandMismatch { part: i });
                }
            }
        }
        ProblemStatement::Nonneg { p } => {
            let mut denominators = 0;
            let mut numerators = 0;
            for (i, part) in witness.parts.iter().enumerate() {
                let expected = match &part.label {
                    PartLabel::Denominator => {
                        denominators += 1;
                        p.clone()
                    }
                    PartLabel::Numerator => {
                        numerators += 1;
                        Polynomial::constant(&vars, -Rational::one())
                    }
                    PartLabel::Const | PartLabel::Product(_) => {
                        return Err(Reject::ForeignLabel("const/product"))
                    }
                };
                if part.polynomial != expected {
                    return Err(Reject::MultiplicandMismatch { part: i });
                }
            }
            if denominators != 1 || numerators != 1 {
                return Err(Reject::NonnegShape);
            }
            let denom = witness
                .parts
                .iter()
                .find(|p| p.label == PartLabel::Denominator)
                .expect("counted above");
            if denom.multiplier.is_zero(&vars) {
                return Err(Reject::ZeroDenominator);
            }
        }
    }

    let mut sum = Polynomial::zero(&vars);
    for part in &witness.parts {
        let q = part.multiplier.to_polynomial(&vars);
        let product = part.polynomial.mul(&q).map_err(|_| Reject::VarMismatch)?;
        sum = sum.add(&product).map_err(|_| Reject::VarMismatch)?;
    }
    if witness.kind == WitnessKind::Unsat {
        sum.add_term(Monomial::one(vars.len()), Rational::one());
    }
    if sum.is_zero() {
        Ok(())
    } else {
        Err(Reject::IdentityNonzero(sum.n_terms()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, rat, rat_int};

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn poly(text: &str, vs: &[&str]) -> Polynomial {
        parse_polynomial(text, &vars(vs)).unwrap()
    }

    fn multiplier(basis: Vec<Monomial>, terms: Vec<(Rational, Vec<Rational>)>) -> SosMultiplier {
        SosMultiplier {
            decomposition: SosDecomposition {
                n: basis.len(),
                terms,
            },
            basis,
        }
    }

    fn simple_system() -> ProblemStatement {
        ProblemStatement::Unsat {
            constraints: vec![poly("-2 + y^2", &["y"]), poly("1 - y^4", &["y"])],
        }
    }

    /// Known-good unsat witness: (2/3 + y²/3)(−2+y²) + (1/3)(1−y⁴) + 1 = 0.
    fn good_unsat_witness() -> PsatzWitness {
        PsatzWitness {
            kind: WitnessKind::Unsat,
            parts: vec![
                WitnessPart {
                    label: PartLabel::Product(vec![true, false]),
                    polynomial: poly("-2 + y^2", &["y"]),
                    multiplier: multiplier(
                        vec![Monomial(vec![0]), Monomial(vec![1])],
                        vec![
                            (rat(2, 3), vec![rat_int(1), rat_int(0)]),
                            (rat(1, 3), vec![rat_int(0), rat_int(1)]),
                        ],
                    ),
                },
                WitnessPart {
                    label: PartLabel::Product(vec![false, true]),
                    polynomial: poly("1 - y^4", &["y"]),
                    multiplier: multiplier(
                        vec![Monomial(vec![0])],
                        vec![(rat(1, 3), vec![rat_int(1)])],
                    ),
                },
            ],
        }
    }

    #[test]
    fn known_witness_is_accepted() {
        assert_eq!(
            verify_witness(&good_unsat_witness(), &simple_system()),
            Ok(())
        );
    }

    #[test]
    fn miscopied_witness_is_rejected_for_nonzero_identity() {
        // y²(−2+y²) + 1(1−y⁴) + 2y² + 1 expands to the constant 2, not 0.
        let w = PsatzWitness {
            kind: WitnessKind::Unsat,
            parts: vec![
                WitnessPart {
                    label: PartLabel::Product(vec![true, false]),
                    polynomial: poly("-2 + y^2", &["y"]),
                    multiplier: multiplier(
                        vec![Monomial(vec![1])],
                        vec![(rat_int(1), vec![rat_int(1)])],
                    ),
                },
                WitnessPart {
                    label: PartLabel::Product(vec![false, true]),
                    polynomial: poly("1 - y^4", &["y"]),
                    multiplier: multiplier(
                        vec![Monomial(vec![0])],
                        vec![(rat_int(1), vec![rat_int(1)])],
                    ),
                },
                WitnessPart {
                    label: PartLabel::Const,
                    polynomial: poly("1", &["y"]),
                    multiplier: multiplier(
                        vec![Monomial(vec![1])],
                        vec![(rat_int(2), vec![rat_int(1)])],
                    ),
                },
            ],
        };
        assert_eq!(
            verify_witness(&w, &simple_system()),
            Err(Reject::IdentityNonzero(1))
        );
    }

    #[test]
    fn negated_coefficient_is_rejected() {
        let mut w = good_unsat_witness();
        w.parts[0].multiplier.decomposition.terms[0].0 = rat(-2, 3);
        assert_eq!(
            verify_witness(&w, &simple_system()),
            Err(Reject::NonpositiveCoefficient { part: 0 })
        );
    }

    #[test]
    fn wrong_multiplicand_echo_is_rejected() {
        let mut w = good_unsat_witness();
        w.parts[1].polynomial = poly("1 - y^2", &["y"]);
        assert_eq!(
            verify_witness(&w, &simple_system()),
            Err(Reject::MultiplicandMismatch { part: 1 })
        );
    }

    #[test]
    fn linear_system_witness_is_accepted() {
        // {x ≥ 0, −x−1 ≥ 0}: 1·x + 1·(−x−1) + 1 = 0.
        let problem = ProblemStatement::Unsat {
            constraints: vec![poly("x", &["x"]), poly("-x - 1", &["x"])],
        };
        let unit = |subset: Vec<bool>, p: Polynomial| WitnessPart {
            label: PartLabel::Product(subset),
            polynomial: p,
            multiplier: multiplier(
                vec![Monomial(vec![0])],
                vec![(rat_int(1), vec![rat_int(1)])],
            ),
        };
        let w = PsatzWitness {
            kind: WitnessKind::Unsat,
            parts: vec![
                unit(vec![true, false], poly("x", &["x"])),
                unit(vec![false, true], poly("-x - 1", &["x"])),
            ],
        };
        assert_eq!(verify_witness(&w, &problem), Ok(()));
    }

    #[test]
    fn product_labels_are_recomputed_from_the_problem() {
        // Witness claims the product P1·P2 but supplies a different echo.
        let problem = ProblemStatement::Unsat {
            constraints: vec![poly("x", &["x"]), poly("1 - x", &["x"])],
        };
        let w = PsatzWitness {
            kind: WitnessKind::Unsat,
            parts: vec![WitnessPart {
                label: PartLabel::Product(vec![true, true]),
                polynomial: poly("x", &["x"]),
                multiplier: multiplier(
                    vec![Monomial(vec![0])],
                    vec![(rat_int(1), vec![rat_int(1)])],
                ),
            }],
        };
        assert_eq!(
            verify_witness(&w, &problem),
            Err(Reject::MultiplicandMismatch { part: 0 })
        );
    }

    fn square_nonneg_witness() -> (PsatzWitness, ProblemStatement) {
        // P = x²: Q1 = 1, Q2 = x².
        let problem = ProblemStatement::Nonneg {
            p: poly("x^2", &["x"]),
        };
        let w = PsatzWitness {
            kind: WitnessKind::Nonneg,
            parts: vec![
                WitnessPart {
                    label: PartLabel::Denominator,
                    polynomial: poly("x^2", &["x"]),
                    multiplier: multiplier(
                        vec![Monomial(vec![0])],
                        vec![(rat_int(1), vec![rat_int(1)])],
                    ),
                },
                WitnessPart {
                    label: PartLabel::Numerator,
                    polynomial: poly("-1", &["x"]),
                    multiplier: multiplier(
                        vec![Monomial(vec![1])],
                        vec![(rat_int(1), vec![rat_int(1)])],
                    ),
                },
            ],
        };
        (w, problem)
    }

    #[test]
    fn nonneg_square_witness_is_accepted() {
        let (w, problem) = square_nonneg_witness();
        assert_eq!(verify_witness(&w, &problem), Ok(()));
    }

    #[test]
    fn nonneg_zero_denominator_is_rejected() {
        let (mut w, problem) = square_nonneg_witness();
        w.parts[0].multiplier.decomposition.terms.clear();
        // Identity would also fail, but the zero denominator must be the
        // reported reason.
        assert_eq!(verify_witness(&w, &problem), Err(Reject::ZeroDenominator));
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let (w, _) = square_nonneg_witness();
        assert_eq!(
            verify_witness(&w, &simple_system()),
            Err(Reject::KindMismatch)
        );
    }

    #[test]
    fn vector_shape_is_checked() {
        let mut w = good_unsat_witness();
        w.parts[0].multiplier.decomposition.terms[0].1.pop();
        assert_eq!(
            verify_witness(&w, &simple_system()),
            Err(Reject::VectorShape { part: 0 })
        );
    }
}

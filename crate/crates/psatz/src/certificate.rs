//! Certificate files: a line-oriented, versioned text form of a witness,
//! self-contained enough to audit without the original problem file.
//!
//! ```text
//! psatz certificate v1
//! problem unsat                 (or: problem nonneg)
//! vars y
//! constraint -2 + y^2           (nonneg instead has one: target <poly>)
//! constraint 1 - y^4
//! part product 10               (const | product <bits> | denominator | numerator)
//! basis 1 y
//! square 2/3 1 0                (coefficient, then one entry per basis monomial)
//! square 1/3 0 1
//! part const
//! basis 1
//! square 1/3 1
//! end
//! ```
//!
//! All numbers are exact rationals (`num/den` or `num`). A `product`
//! bitstring has one digit per constraint, `1` marking membership. The
//! multiplicand each part is paired with is recomputed from the problem
//! block during parsing, never trusted from the file. Parsing and checking
//! use only the polynomial and witness layers — none of the search machinery.

use std::fmt::Write as _;
use std::str::FromStr;

use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::poly::{format_monomial, parse_polynomial, Monomial, Polynomial, Rational};
use crate::psd::SosDecomposition;
use crate::witness::{
    product_polynomial, PartLabel, ProblemStatement, PsatzWitness, SosMultiplier, WitnessKind,
    WitnessPart,
};

pub const FORMAT_HEADER: &str = "psatz certificate v1";

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("certificate is empty")]
    Empty,
    #[error("unsupported format header {found:?} (expected {FORMAT_HEADER:?})")]
    BadHeader { found: String },
}

fn syntax(line: usize, message: impl Into<String>) -> CertError {
    CertError::Syntax {
        line,
        message: message.into(),
    }
}

/// Exact rational from `num/den` or `num` text; rejects zero denominators.
fn parse_rational(token: &str, line: usize) -> Result<Rational, CertError> {
    let (n, d) = match token.split_once('/') {
        Some((n, d)) => (n, d),
        None => (token, "1"),
    };
    let numer = BigInt::from_str(n).map_err(|_| syntax(line, format!("bad rational {token:?}")))?;
    let denom = BigInt::from_str(d).map_err(|_| syntax(line, format!("bad rational {token:?}")))?;
    if denom.is_zero() {
        return Err(syntax(line, format!("zero denominator in {token:?}")));
    }
    Ok(Rational::new(numer, denom))
}

/// A basis token is a bare power product like `x^2*y` (or `1`): a
/// single-term polynomial with unit coefficient.
fn parse_basis_monomial(token: &str, vars: &[String], line: usize) -> Result<Monomial, CertError> {
    let p = parse_polynomial(token, vars)
        .map_err(|e| syntax(line, format!("bad monomial {token:?}: {e}")))?;
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (Some((m, c)), None) if c.is_one() => Ok(m.clone()),
        _ => Err(syntax(
            line,
            format!("bad monomial {token:?}: expected a bare power product"),
        )),
    }
}

pub fn write_certificate(problem: &ProblemStatement, witness: &PsatzWitness) -> String {
    let vars = problem.vars();
    let mut out = String::new();
    writeln!(out, "{FORMAT_HEADER}").unwrap();
    match problem {
        ProblemStatement::Unsat { constraints } => {
            writeln!(out, "problem unsat").unwrap();
            writeln!(out, "vars {}", vars.join(" ")).unwrap();
            for c in constraints {
                writeln!(out, "constraint {c}").unwrap();
            }
        }
        ProblemStatement::Nonneg { p } => {
            writeln!(out, "problem nonneg").unwrap();
            writeln!(out, "vars {}", vars.join(" ")).unwrap();
            writeln!(out, "target {p}").unwrap();
        }
    }
    for part in &witness.parts {
        match &part.label {
            PartLabel::Const => writeln!(out, "part const").unwrap(),
            PartLabel::Product(subset) => {
                let bits: String = subset.iter().map(|b| if *b { '1' } else { '0' }).collect();
                writeln!(out, "part product {bits}").unwrap();
            }
            PartLabel::Denominator => writeln!(out, "part denominator").unwrap(),
            PartLabel::Numerator => writeln!(out, "part numerator").unwrap(),
        }
        let basis: Vec<String> = part
            .multiplier
            .basis
            .iter()
            .map(|m| format_monomial(m, vars))
            .collect();
        writeln!(out, "basis {}", basis.join(" ")).unwrap();
        for (c, v) in &part.multiplier.decomposition.terms {
            write!(out, "square {c}").unwrap();
            for entry in v {
                write!(out, " {entry}").unwrap();
            }
            writeln!(out).unwrap();
        }
    }
    writeln!(out, "end").unwrap();
    out
}

/// The multiplicand a part must be paired with, derived from its label and
/// the problem statement.
fn multiplicand_for(
    label: &PartLabel,
    problem: &ProblemStatement,
    line: usize,
) -> Result<Polynomial, CertError> {
    let vars = problem.vars();
    match (label, problem) {
        (PartLabel::Const, ProblemStatement::Unsat { .. }) => {
            Ok(Polynomial::constant(vars, Rational::one()))
        }
        (PartLabel::Product(subset), ProblemStatement::Unsat { constraints }) => {
            if subset.len() != constraints.len() {
                return Err(syntax(
                    line,
                    format!(
                        "product bitstring has {} digits, problem has {} constraints",
                        subset.len(),
                        constraints.len()
                    ),
                ));
            }
            if !subset.iter().any(|b| *b) {
                return Err(syntax(line, "product bitstring selects no constraints"));
            }
            Ok(product_polynomial(constraints, subset))
        }
        (PartLabel::Denominator, ProblemStatement::Nonneg { p }) => Ok(p.clone()),
        (PartLabel::Numerator, ProblemStatement::Nonneg { .. }) => {
            Ok(Polynomial::constant(vars, -Rational::one()))
        }
        _ => Err(syntax(line, "part label does not fit the problem kind")),
    }
}

pub fn parse_certificate(text: &str) -> Result<(ProblemStatement, PsatzWitness), CertError> {
    // Strip comments and blanks but remember original line numbers.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| {
            let body = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            (i + 1, body.trim())
        })
        .filter(|(_, body)| !body.is_empty())
        .peekable();

    let (_, header) = lines.next().ok_or(CertError::Empty)?;
    if header != FORMAT_HEADER {
        return Err(CertError::BadHeader {
            found: header.to_string(),
        });
    }

    let (line, decl) = lines
        .next()
        .ok_or_else(|| syntax(0, "missing problem line"))?;
    let kind = match decl {
        "problem unsat" => WitnessKind::Unsat,
        "problem nonneg" => WitnessKind::Nonneg,
        other => return Err(syntax(line, format!("bad problem line {other:?}"))),
    };

    let (line, vars_line) = lines.next().ok_or_else(|| syntax(0, "missing vars line"))?;
    let vars: Vec<String> = match vars_line.strip_prefix("vars") {
        Some(rest) => rest.split_whitespace().map(str::to_string).collect(),
        None => return Err(syntax(line, "expected vars line")),
    };
    if vars.is_empty() {
        return Err(syntax(line, "vars line declares no variables"));
    }

    let problem = match kind {
        WitnessKind::Unsat => {
            let mut constraints = Vec::new();
            while let Some((line, body)) = lines.peek().copied() {
                let Some(rest) = body.strip_prefix("constraint ") else {
                    break;
                };
                constraints.push(
                    parse_polynomial(rest.trim(), &vars)
                        .map_err(|e| syntax(line, format!("bad constraint: {e}")))?,
                );
                lines.next();
            }
            if constraints.is_empty() {
                return Err(syntax(line, "unsat certificate needs constraint lines"));
            }
            ProblemStatement::Unsat { constraints }
        }
        WitnessKind::Nonneg => {
            let (line, body) = lines
                .next()
                .ok_or_else(|| syntax(0, "missing target line"))?;
            let Some(rest) = body.strip_prefix("target ") else {
                return Err(syntax(line, "expected target line"));
            };
            let p = parse_polynomial(rest.trim(), &vars)
                .map_err(|e| syntax(line, format!("bad target: {e}")))?;
            ProblemStatement::Nonneg { p }
        }
    };

    let mut parts: Vec<WitnessPart> = Vec::new();
    let mut saw_end = false;
    while let Some((line, body)) = lines.next() {
        if body == "end" {
            if let Some((line, extra)) = lines.next() {
                return Err(syntax(
                    line,
                    format!("unexpected content after end: {extra:?}"),
                ));
            }
            saw_end = true;
            break;
        }
        let Some(label_text) = body.strip_prefix("part ") else {
            return Err(syntax(
                line,
                format!("expected part or end, found {body:?}"),
            ));
        };
        let label = match label_text.trim() {
            "const" => PartLabel::Const,
            "denominator" => PartLabel::Denominator,
            "numerator" => PartLabel::Numerator,
            other => match other.strip_prefix("product ") {
                Some(bits) => {
                    let bits = bits.trim();
                    let mut subset = Vec::with_capacity(bits.len());
                    for ch in bits.chars() {
                        match ch {
                            '0' => subset.push(false),
                            '1' => subset.push(true),
                            _ => {
                                return Err(syntax(line, format!("bad product bitstring {bits:?}")))
                            }
                        }
                    }
                    PartLabel::Product(subset)
                }
                None => return Err(syntax(line, format!("unknown part label {other:?}"))),
            },
        };
        let polynomial = multiplicand_for(&label, &problem, line)?;

        let (line, basis_line) = lines
            .next()
            .ok_or_else(|| syntax(line, "part is missing its basis line"))?;
        let Some(rest) = basis_line.strip_prefix("basis") else {
            return Err(syntax(line, "expected basis line after part"));
        };
        let mut basis = Vec::new();
        for token in rest.split_whitespace() {
            basis.push(parse_basis_monomial(token, &vars, line)?);
        }
        if basis.is_empty() {
            return Err(syntax(line, "basis line lists no monomials"));
        }

        let mut terms = Vec::new();
        while let Some((line, body)) = lines.peek().copied() {
            let Some(rest) = body.strip_prefix("square ") else {
                break;
            };
            let mut tokens = rest.split_whitespace();
            let coeff_tok = tokens
                .next()
                .ok_or_else(|| syntax(line, "square line needs a coefficient"))?;
            let coeff = parse_rational(coeff_tok, line)?;
            let mut v = Vec::with_capacity(basis.len());
            for tok in tokens {
                v.push(parse_rational(tok, line)?);
            }
            if v.len() != basis.len() {
                return Err(syntax(
                    line,
                    format!(
                        "square line has {} entries, basis has {} monomials",
                        v.len(),
                        basis.len()
                    ),
                ));
            }
            terms.push((coeff, v));
            lines.next();
        }
        parts.push(WitnessPart {
            label,
            polynomial,
            multiplier: SosMultiplier {
                basis: basis.clone(),
                decomposition: SosDecomposition {
                    n: basis.len(),
                    terms,
                },
            },
        });
    }
    if !saw_end {
        return Err(syntax(0, "missing end line"));
    }
    Ok((problem, PsatzWitness { kind, parts }))
}

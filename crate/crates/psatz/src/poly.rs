//! Sparse multivariate polynomials over exact rationals.
//!
//! A polynomial carries its own ordered variable list; exponent vectors are
//! indexed by that list. Terms live in a `BTreeMap` keyed by monomial in
//! graded-lexicographic order (total degree first, then lexicographic by the
//! declared variable order), which makes iteration — and therefore printing
//! and certificate output — deterministic.
//!
//! Key operations:
//! - ring arithmetic (`add`, `sub`, `mul`, `neg`, `scale`) with explicit
//!   variable-context checks,
//! - exact evaluation at rational points,
//! - `newton_halved_monomials`: the candidate square basis for sums-of-squares
//!   work — monomials whose doubled exponent vector lies in the Newton
//!   polytope of the polynomial,
//! - a plain-text syntax shared by problem files and certificates
//!   (`parse_polynomial` / `Display`).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate. Values are always in
/// canonical form (reduced, positive denominator).
pub type Rational = BigRational;

/// Convenience constructor for an integer rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Convenience constructor for `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable context mismatch: {0:?} vs {1:?}")]
    VarMismatch(Vec<String>, Vec<String>),
    #[error("evaluation point has {got} coordinates, polynomial has {want} variables")]
    PointLength { want: usize, got: usize },
}

/// Error from the polynomial text parser, with a byte offset into the input.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("col {pos}: {msg}")]
pub struct PolyParseError {
    pub pos: usize,
    pub msg: String,
}

impl PolyParseError {
    /// The variable name, if this error reports an undeclared variable.
    /// Keep in sync with the message built in `parse_polynomial`.
    pub fn undeclared_name(&self) -> Option<&str> {
        self.msg
            .strip_prefix("unknown variable `")
            .and_then(|s| s.strip_suffix('`'))
    }
}

/// Exponent vector of a power product. The entry at index `i` is the exponent
/// of the `i`-th declared variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    /// The unit monomial (all exponents zero) over `n_vars` variables.
    pub fn one(n_vars: usize) -> Self {
        Monomial(vec![0; n_vars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Product of two power products over the same variable context.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.0.len(), other.0.len(), "monomial width mismatch");
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: compare total degree, then exponents
    /// lexicographically in declared-variable order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over [`Rational`] coefficients. Invariant: no stored
/// coefficient is zero, and every monomial has exactly one entry per variable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(vars: &[String]) -> Self {
        Polynomial {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[String], c: Rational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    /// Builds a polynomial from (monomial, coefficient) pairs, merging
    /// duplicates and dropping zeros. Panics if a monomial width disagrees
    /// with the variable count (internal misuse, not input error).
    pub fn from_terms<I>(vars: &[String], terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c * m` in place, keeping the no-zero-coefficients invariant.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        assert_eq!(m.0.len(), self.vars.len(), "monomial width mismatch");
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// `Some(d)` if the polynomial is nonzero and every term has total degree
    /// exactly `d`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let first = degs.next()?;
        if degs.all(|d| d == first) {
            Some(first)
        } else {
            None
        }
    }

    fn check_vars(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.vars != other.vars {
            return Err(PolyError::VarMismatch(
                self.vars.clone(),
                other.vars.clone(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_vars(other)?;
        let mut out = Self::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Exact evaluation at a rational point (one coordinate per variable).
    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::PointLength {
                want: self.vars.len(),
                got: point.len(),
            });
        }
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    v *= x;
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Monomials `m` such that `2 * exp(m)` lies in the Newton polytope (the
    /// convex hull of this polynomial's exponent vectors). Any square
    /// appearing in a sums-of-squares representation of this polynomial is
    /// supported on these monomials, so they form the canonical candidate
    /// basis. Returns an empty list for the zero polynomial; sorted in
    /// graded-lex order.
    pub fn newton_halved_monomials(&self) -> Vec<Monomial> {
        if self.is_zero() {
            return Vec::new();
        }
        let n = self.vars.len();
        let points: Vec<Vec<i64>> = self
            .terms
            .keys()
            .map(|m| m.0.iter().map(|&e| i64::from(e)).collect())
            .collect();
        // Candidates are limited per coordinate and in total degree by the
        // vertices of the hull.
        let mut coord_cap = vec![0u32; n];
        for m in self.terms.keys() {
            for (cap, &e) in coord_cap.iter_mut().zip(&m.0) {
                *cap = (*cap).max(e / 2);
            }
        }
        let total_cap = self.degree() / 2;

        let mut out = Vec::new();
        let mut current = vec![0u32; n];
        enumerate_boxed(&mut current, 0, &coord_cap, total_cap, &mut |m| {
            let doubled: Vec<i64> = m.iter().map(|&e| 2 * i64::from(e)).collect();
            if point_in_hull(&points, &doubled) {
                out.push(Monomial(m.to_vec()));
            }
        });
        out.sort();
        out
    }
}

/// Enumerates all exponent vectors within the per-coordinate caps and the
/// total-degree cap, invoking `f` on each.
fn enumerate_boxed(
    current: &mut Vec<u32>,
    idx: usize,
    coord_cap: &[u32],
    total_left: u32,
    f: &mut impl FnMut(&[u32]),
) {
    if idx == current.len() {
        f(current);
        return;
    }
    for e in 0..=coord_cap[idx].min(total_left) {
        current[idx] = e;
        enumerate_boxed(current, idx + 1, coord_cap, total_left - e, f);
    }
    current[idx] = 0;
}

/// Exact convex-hull membership: is `query` a convex combination of `points`?
///
/// Solved as a rational linear-programming feasibility problem — find
/// `lambda >= 0` with `sum lambda_i = 1` and `sum lambda_i p_i = query` —
/// using a phase-1 simplex with Bland's rule, which terminates on exact
/// arithmetic and handles lower-dimensional hulls without special cases.
fn point_in_hull(points: &[Vec<i64>], query: &[i64]) -> bool {
    let dim = query.len();
    let n = points.len();
    // Rows: one per coordinate, plus the convexity row (sum of lambda = 1).
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(dim + 1);
    let mut b: Vec<Rational> = Vec::with_capacity(dim + 1);
    for d in 0..dim {
        a.push(points.iter().map(|p| rat_int(p[d])).collect());
        b.push(rat_int(query[d]));
    }
    a.push(vec![Rational::one(); n]);
    b.push(Rational::one());
    lp_feasible(a, b)
}

/// Phase-1 simplex: does `A x = b` admit a solution with `x >= 0`?
fn lp_feasible(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> bool {
    let m = a.len();
    let n = if m > 0 { a[0].len() } else { 0 };
    // Normalize to b >= 0.
    for i in 0..m {
        if b[i].is_negative() {
            b[i] = -b[i].clone();
            for v in a[i].iter_mut() {
                *v = -v.clone();
            }
        }
    }
    // Tableau with one artificial variable per row; basis starts as the
    // artificials. Columns 0..n are original, n..n+m artificial, last is rhs.
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            row.extend(a[i].iter().cloned());
            for j in 0..m {
                row.push(if j == i {
                    Rational::one()
                } else {
                    Rational::zero()
                });
            }
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Reduced costs for minimizing the sum of artificial variables
        // (cost 1 on artificials, 0 elsewhere): r_j = c_j - sum over rows
        // with artificial basic variables.
        let mut entering = None;
        for j in 0..n + m {
            if basis.contains(&j) {
                continue;
            }
            let c_j = if j >= n {
                Rational::one()
            } else {
                Rational::zero()
            };
            let mut r = c_j;
            for (i, &bi) in basis.iter().enumerate() {
                if bi >= n {
                    r -= &t[i][j];
                }
            }
            if r.is_negative() {
                entering = Some(j); // Bland: first improving index
                break;
            }
        }
        let Some(j) = entering else {
            // Optimal: feasible iff no artificial variable remains positive.
            return basis
                .iter()
                .enumerate()
                .all(|(i, &bi)| bi < n || t[i][width - 1].is_zero());
        };
        // Ratio test with Bland's tie-break (lowest basis index).
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][j].is_positive() {
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let cur = &t[i][width - 1] / &t[i][j];
                        let best = &t[l][width - 1] / &t[l][j];
                        cur < best || (cur == best && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
        }
        let Some(p) = leave else {
            // Unbounded phase-1 objective cannot happen (it is >= 0); treat
            // defensively as infeasible.
            return false;
        };
        // Pivot on (p, j).
        let piv = t[p][j].clone();
        for v in t[p].iter_mut() {
            *v = &*v / &piv;
        }
        for i in 0..m {
            if i != p && !t[i][j].is_zero() {
                let f = t[i][j].clone();
                for k in 0..width {
                    let delta = &f * &t[p][k];
                    t[i][k] = &t[i][k] - &delta;
                }
            }
        }
        basis[p] = j;
    }
}

// ---------------------------------------------------------------------------
// Text syntax
// ---------------------------------------------------------------------------

/// Formats a rational as `n` or `n/d`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Formats a power product like `x^2*y` (or `1` for the unit monomial).
pub fn format_monomial(m: &Monomial, vars: &[String]) -> String {
    let mut parts = Vec::new();
    for (name, &e) in vars.iter().zip(&m.0) {
        match e {
            0 => {}
            1 => parts.push(name.clone()),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for Polynomial {
    /// Terms in descending graded-lex order; coefficients as `n` or `n/d`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono = format_monomial(m, &self.vars);
            if mono == "1" {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Int(BigInt),
    Ident(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>, PolyParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push((i, Token::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Token::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Token::Star));
                i += 1;
            }
            '^' => {
                out.push((i, Token::Caret));
                i += 1;
            }
            '/' => {
                out.push((i, Token::Slash));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                out.push((start, Token::Int(digits.parse().unwrap())));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(PolyParseError {
                    pos: i,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

/// Parses the shared polynomial syntax: terms joined by `+`/`-`, integer or
/// `num/den` coefficients, `^` powers, `*` optional between factors.
/// Variables must come from `vars`.
pub fn parse_polynomial(text: &str, vars: &[String]) -> Result<Polynomial, PolyParseError> {
    let tokens = lex(text)?;
    let mut pos = 0usize;
    let mut poly = Polynomial::zero(vars);
    let end_pos = text.len();

    if tokens.is_empty() {
        return Err(PolyParseError {
            pos: 0,
            msg: "empty polynomial".to_string(),
        });
    }

    while pos < tokens.len() {
        // Optional sign (required between terms, optional before the first).
        let mut sign = Rational::one();
        match tokens[pos].1 {
            Token::Plus => {
                if pos == 0 {
                    return Err(PolyParseError {
                        pos: tokens[pos].0,
                        msg: "leading `+` is not allowed".to_string(),
                    });
                }
                pos += 1;
            }
            Token::Minus => {
                sign = -sign;
                pos += 1;
            }
            _ if pos == 0 => {}
            _ => {
                return Err(PolyParseError {
                    pos: tokens[pos].0,
                    msg: "expected `+` or `-` between terms".to_string(),
                })
            }
        }
        // One term: a nonempty product of factors.
        let mut coeff = sign;
        let mut exps = vec![0u32; vars.len()];
        let mut saw_factor = false;
        loop {
            if pos >= tokens.len() {
                break;
            }
            match &tokens[pos].1 {
                Token::Plus | Token::Minus => break,
                Token::Star => {
                    if !saw_factor {
                        return Err(PolyParseError {
                            pos: tokens[pos].0,
                            msg: "`*` without a preceding factor".to_string(),
                        });
                    }
                    pos += 1;
                    if pos >= tokens.len() {
                        return Err(PolyParseError {
                            pos: end_pos,
                            msg: "dangling `*`".to_string(),
                        });
                    }
                }
                _ => {}
            }
            if pos >= tokens.len() {
                break;
            }
            match tokens[pos].1.clone() {
                Token::Int(n) => {
                    pos += 1;
                    let mut den = BigInt::one();
                    if pos < tokens.len() && tokens[pos].1 == Token::Slash {
                        pos += 1;
                        match tokens.get(pos).map(|t| t.1.clone()) {
                            Some(Token::Int(d)) => {
                                if d.is_zero() {
                                    return Err(PolyParseError {
                                        pos: tokens[pos].0,
                                        msg: "zero denominator".to_string(),
                                    });
                                }
                                den = d;
                                pos += 1;
                            }
                            _ => {
                                return Err(PolyParseError {
                                    pos: tokens.get(pos).map_or(end_pos, |t| t.0),
                                    msg: "expected denominator after `/`".to_string(),
                                })
                            }
                        }
                    }
                    coeff *= Rational::new(n, den);
                    saw_factor = true;
                }
                Token::Ident(name) => {
                    let tok_pos = tokens[pos].0;
                    let Some(var_idx) = vars.iter().position(|v| *v == name) else {
                        return Err(PolyParseError {
                            pos: tok_pos,
                            msg: format!("unknown variable `{name}`"),
                        });
                    };
                    pos += 1;
                    let mut exp: u32 = 1;
                    if pos < tokens.len() && tokens[pos].1 == Token::Caret {
                        pos += 1;
                        match tokens.get(pos).map(|t| t.1.clone()) {
                            Some(Token::Int(e)) => {
                                exp = e.to_string().parse().map_err(|_| PolyParseError {
                                    pos: tokens[pos].0,
                                    msg: "exponent too large".to_string(),
                                })?;
                                pos += 1;
                            }
                            _ => {
                                return Err(PolyParseError {
                                    pos: tokens.get(pos).map_or(end_pos, |t| t.0),
                                    msg: "expected integer exponent after `^`".to_string(),
                                })
                            }
                        }
                    }
                    exps[var_idx] += exp;
                    saw_factor = true;
                }
                other => {
                    return Err(PolyParseError {
                        pos: tokens[pos].0,
                        msg: format!("unexpected token {other:?} in term"),
                    })
                }
            }
        }
        if !saw_factor {
            return Err(PolyParseError {
                pos: tokens.get(pos).map_or(end_pos, |t| t.0),
                msg: "empty term".to_string(),
            });
        }
        poly.add_term(Monomial(exps), coeff);
    }
    Ok(poly)
}

/// Parses a power product like `x^2*y` or `1` (no coefficient allowed).
pub fn parse_monomial(text: &str, vars: &[String]) -> Result<Monomial, PolyParseError> {
    let p = parse_polynomial(text, vars)?;
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (Some((m, c)), None) if c.is_one() => Ok(m.clone()),
        _ => Err(PolyParseError {
            pos: 0,
            msg: format!("`{text}` is not a plain monomial"),
        }),
    }
}

//! Exact integer lattice reduction and its two uses in the pipeline.
//!
//! `lll_reduce` is a textbook Lenstra–Lenstra–Lovász reduction with exact
//! rational Gram–Schmidt data (no floating point anywhere in the reduction
//! itself), parameter `delta` supplied by the caller (the pipeline uses
//! 99/100 for high-quality bases).
//!
//! `find_kernel_vectors` hunts for small integer near-kernel combinations of
//! a numerically semidefinite matrix `G`: the rows `(e_i | round(alpha G_i))`
//! span a lattice whose short vectors have the form `(w | w M)`, and a short
//! such vector means `G w` is tiny while `w` itself is small — exactly the
//! kernel directions a degenerate feasible set hides. Accepted `w` are lifted
//! through the compression matrix `B` to exact rational constraints `v = wB`
//! on the original block.
//!
//! `simplify_solution` reuses the same lattice idea to look for a nearby
//! point of the affine family whose coordinates have small numerators and
//! denominators.

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg::QMatrix;
use crate::poly::Rational;

/// Dense integer matrix; rows are lattice basis vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let w = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == w), "ragged rows");
        IntMatrix { rows }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice basis rows are linearly dependent")]
    DependentRows,
    #[error("delta must satisfy 1/4 < delta < 1")]
    BadDelta,
}

/// Nearest integer, ties toward +infinity (conventional for size reduction).
fn round_nearest(q: &Rational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    (q + half).floor().to_integer()
}

/// Nearest integer, ties away from zero (used for scaling floats into
/// lattice entries, where symmetric behavior around 0 is wanted).
pub fn round_half_away(q: &Rational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if q.is_negative() {
        -((-q + half).floor().to_integer())
    } else {
        (q + half).floor().to_integer()
    }
}

/// Exact f64 -> integer rounding (ties away from zero). Returns `None` for
/// NaN/infinite inputs.
pub fn round_f64(x: f64) -> Option<BigInt> {
    BigRational::from_float(x).map(|q| round_half_away(&q))
}

/// Exact Gram–Schmidt data for the basis: `mu[i][j]` (j < i) and the squared
/// norms `b_norm[i]` of the orthogonalized vectors, via the Gram matrix only.
struct Gso {
    mu: Vec<Vec<Rational>>,
    b_norm: Vec<Rational>,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gso(rows: &[Vec<BigInt>]) -> Result<Gso, LatticeError> {
    let n = rows.len();
    let mut mu = vec![Vec::new(); n];
    let mut b_norm = vec![Rational::zero(); n];
    for i in 0..n {
        let mut mu_i = Vec::with_capacity(i);
        for j in 0..i {
            let g_ij = Rational::from_integer(dot(&rows[i], &rows[j]));
            let mut num = g_ij;
            for l in 0..j {
                num -= &mu[j][l] * &mu_i[l] * &b_norm[l];
            }
            mu_i.push(num / &b_norm[j]);
        }
        let g_ii = Rational::from_integer(dot(&rows[i], &rows[i]));
        let mut norm = g_ii;
        for l in 0..i {
            norm -= &mu_i[l] * &mu_i[l] * &b_norm[l];
        }
        if norm.is_zero() {
            return Err(LatticeError::DependentRows);
        }
        mu[i] = mu_i;
        b_norm[i] = norm;
    }
    Ok(Gso { mu, b_norm })
}

/// LLL reduction with exact arithmetic. The output basis spans the same
/// lattice, is size-reduced (`|mu_ij| <= 1/2`), and satisfies the Lovász
/// condition with the given `delta`.
pub fn lll_reduce(basis: &IntMatrix, delta: &Rational) -> Result<IntMatrix, LatticeError> {
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    if *delta <= quarter || *delta >= Rational::one() {
        return Err(LatticeError::BadDelta);
    }
    let mut b = basis.rows.clone();
    let n = b.len();
    if n <= 1 {
        // Still validate independence (a zero row is dependent).
        let _ = gso(&b)?;
        return Ok(IntMatrix { rows: b });
    }
    let Gso { mut mu, mut b_norm } = gso(&b)?;

    let mut k = 1;
    while k < n {
        // Size-reduce b_k against b_{k-1} .. b_0.
        for j in (0..k).rev() {
            let r = round_nearest(&mu[k][j]);
            if !r.is_zero() {
                let (bj, bk) = {
                    let (lo, hi) = b.split_at_mut(k);
                    (&lo[j], &mut hi[0])
                };
                for (x, y) in bk.iter_mut().zip(bj) {
                    *x -= &r * y;
                }
                let r_rat = Rational::from_integer(r);
                for l in 0..j {
                    let delta_mu = &r_rat * &mu[j][l];
                    mu[k][l] = &mu[k][l] - &delta_mu;
                }
                mu[k][j] = &mu[k][j] - &r_rat;
            }
        }
        // Lovász condition.
        let lhs = b_norm[k].clone();
        let rhs = (delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b_norm[k - 1];
        if lhs >= rhs {
            k += 1;
            continue;
        }
        // Swap b_{k-1} and b_k, updating the Gram–Schmidt data in place.
        b.swap(k - 1, k);
        let mu_old = mu[k][k - 1].clone();
        let b_old = b_norm[k - 1].clone();
        let b_new = &b_norm[k] + &mu_old * &mu_old * &b_old;
        let mu_new = &mu_old * &b_old / &b_new;
        b_norm[k] = &b_old * &b_norm[k] / &b_new;
        b_norm[k - 1] = b_new;
        for i in k + 1..n {
            let t = mu[i][k].clone();
            mu[i][k] = &mu[i][k - 1] - &mu_old * &t;
            mu[i][k - 1] = &t + &mu_new * &mu[i][k];
        }
        // Rows k-1 and k of mu swap their shared prefix (length k-1).
        for j in 0..k - 1 {
            let tmp = mu[k - 1][j].clone();
            mu[k - 1][j] = std::mem::replace(&mut mu[k][j], tmp);
        }
        mu[k][k - 1] = mu_new;
        k = k.max(2) - 1;
    }
    Ok(IntMatrix { rows: b })
}

/// Candidate kernel direction discovered by lattice reduction.
#[derive(Clone, Debug)]
pub struct KernelCandidate {
    /// Integer combination in compressed coordinates.
    pub w: Vec<BigInt>,
    /// Lifted exact constraint vector in original block coordinates (`w B`).
    pub v: Vec<Rational>,
    /// Diagnostics: l1 norm of `w` and l2 norm of `G w`.
    pub w_l1: f64,
    pub gw_l2: f64,
}

/// Tunables for [`find_kernel_vectors`]; defaults follow the pipeline's
/// standard settings.
#[derive(Clone, Copy, Debug)]
pub struct KernelParams {
    /// Target magnitude for the scaled integer image of `G` (the scale is
    /// `alpha0 / ||G||_F`).
    pub alpha0: f64,
    /// Acceptance slack on `||w||_1` relative to the first reduced vector.
    pub beta: f64,
    /// Acceptance slack on `||G w||_2` relative to the first reduced vector.
    pub gamma: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            alpha0: 1e15,
            beta: 10.0,
            gamma: 10.0,
        }
    }
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Finds small integer near-kernel vectors of the numeric symmetric matrix
/// `g` (compressed coordinates) and lifts them through the exact compressor
/// `b` (rows of `b` span the block's row space). The first LLL-reduced row is
/// always taken; later rows are taken while their `w` and `G w` norms stay
/// within the `beta`/`gamma` factors of the first.
pub fn find_kernel_vectors(
    g: &[Vec<f64>],
    b: &QMatrix,
    params: &KernelParams,
) -> Vec<KernelCandidate> {
    let r = g.len();
    assert!(g.iter().all(|row| row.len() == r), "g must be square");
    assert_eq!(b.n_rows(), r, "compressor rows must match g");
    if r == 0 {
        return Vec::new();
    }
    let fro: f64 = g
        .iter()
        .flat_map(|row| row.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let alpha = if fro > 0.0 {
        params.alpha0 / fro
    } else {
        params.alpha0
    };

    let mut rows = Vec::with_capacity(r);
    for i in 0..r {
        let mut row = Vec::with_capacity(2 * r);
        for j in 0..r {
            row.push(if i == j {
                BigInt::one()
            } else {
                BigInt::zero()
            });
        }
        for j in 0..r {
            row.push(round_f64(alpha * g[i][j]).unwrap_or_else(BigInt::zero));
        }
        rows.push(row);
    }
    let delta = Rational::new(BigInt::from(99), BigInt::from(100));
    let reduced = lll_reduce(&IntMatrix::from_rows(rows), &delta)
        .expect("rows (I | M) are always independent");

    let mut out: Vec<KernelCandidate> = Vec::new();
    let mut first: Option<(f64, f64)> = None;
    for row in reduced.rows() {
        let w: Vec<BigInt> = row[..r].to_vec();
        let w_f64: Vec<f64> = w.iter().map(bigint_to_f64).collect();
        let w_l1: f64 = w_f64.iter().map(|x| x.abs()).sum();
        let gw_l2: f64 = (0..r)
            .map(|i| {
                let s: f64 = (0..r).map(|j| g[i][j] * w_f64[j]).sum();
                s * s
            })
            .sum::<f64>()
            .sqrt();
        let accept = match first {
            None => true,
            Some((l1_0, gw_0)) => w_l1 <= params.beta * l1_0 && gw_l2 <= params.gamma * gw_0,
        };
        if first.is_none() {
            first = Some((w_l1, gw_l2));
        }
        if !accept {
            continue;
        }
        let mut v = vec![Rational::zero(); b.n_cols()];
        for (i, wi) in w.iter().enumerate() {
            if wi.sign() == Sign::NoSign {
                continue;
            }
            let wi_rat = Rational::from_integer(wi.clone());
            for (vj, bij) in v.iter_mut().zip(b.row(i)) {
                *vj += &wi_rat * bij;
            }
        }
        out.push(KernelCandidate { w, v, w_l1, gw_l2 });
    }
    out
}

/// Searches for a nearby point of the affine family `f0 + sum y_i f_i`
/// (entry vectors over some fixed flattening) whose coordinates are simple
/// rationals. `v_target` is the numeric point to stay close to; `mu` weighs
/// closeness against simplicity and `beta` is the overall integer scale.
/// Returns the new coordinates `y` or `None` when the reduction produces no
/// usable combination.
pub fn simplify_solution(
    f0: &[Rational],
    fs: &[Vec<Rational>],
    v_target: &[f64],
    mu: &BigInt,
    beta: &BigInt,
) -> Option<Vec<Rational>> {
    let e = f0.len();
    assert!(fs.iter().all(|f| f.len() == e));
    assert_eq!(v_target.len(), e);
    let n = fs.len();
    let v_exact: Option<Vec<Rational>> = v_target
        .iter()
        .map(|&x| BigRational::from_float(x))
        .collect();
    let v_exact = v_exact?;
    let beta_mu = Rational::from_integer(beta * mu);
    let beta_rat = Rational::from_integer(beta.clone());

    let width = 2 * e + n + 1;
    let mut rows = Vec::with_capacity(n + 1);
    let mut row0 = Vec::with_capacity(width);
    for j in 0..e {
        row0.push(round_half_away(&(&beta_mu * &(&f0[j] - &v_exact[j]))));
    }
    for j in 0..e {
        row0.push(round_half_away(&(&beta_rat * &f0[j])));
    }
    row0.push(BigInt::one());
    row0.extend(std::iter::repeat_n(BigInt::zero(), n));
    rows.push(row0);
    for (i, f) in fs.iter().enumerate() {
        let mut row = Vec::with_capacity(width);
        for j in 0..e {
            row.push(round_half_away(&(&beta_mu * &f[j])));
        }
        for j in 0..e {
            row.push(round_half_away(&(&beta_rat * &f[j])));
        }
        for t in 0..n + 1 {
            row.push(if t == i + 1 {
                BigInt::one()
            } else {
                BigInt::zero()
            });
        }
        rows.push(row);
    }
    let delta = Rational::new(BigInt::from(99), BigInt::from(100));
    let reduced = lll_reduce(&IntMatrix::from_rows(rows), &delta).ok()?;
    for row in reduced.rows() {
        let tail = &row[2 * e..];
        let y0 = &tail[0];
        if y0.sign() != Sign::NoSign {
            let y: Vec<Rational> = (1..=n)
                .map(|i| Rational::new(tail[i].clone(), y0.clone()))
                .collect();
            return Some(y);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn delta99() -> Rational {
        rat(99, 100)
    }

    fn norm2(v: &[BigInt]) -> BigInt {
        v.iter().map(|x| x * x).sum()
    }

    #[test]
    fn identity_is_already_reduced() {
        let m = IntMatrix::from_i64(&[&[1, 0], &[0, 1]]);
        let r = lll_reduce(&m, &delta99()).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn finds_short_vector_in_small_example() {
        let m = IntMatrix::from_i64(&[&[1, 1, 1], &[-1, 0, 2], &[3, 5, 6]]);
        let r = lll_reduce(&m, &delta99()).unwrap();
        let min = r.rows().iter().map(|v| norm2(v)).min().unwrap();
        assert_eq!(min, BigInt::from(1));
    }

    #[test]
    fn two_dim_example_norms() {
        let m = IntMatrix::from_i64(&[&[2, 0], &[1, 1]]);
        let r = lll_reduce(&m, &delta99()).unwrap();
        let mut norms: Vec<BigInt> = r.rows().iter().map(|v| norm2(v)).collect();
        norms.sort();
        assert_eq!(norms, vec![BigInt::from(2), BigInt::from(2)]);
    }

    #[test]
    fn dependent_rows_are_rejected() {
        let m = IntMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(
            lll_reduce(&m, &delta99()).unwrap_err(),
            LatticeError::DependentRows
        );
        let z = IntMatrix::from_i64(&[&[0, 0]]);
        assert_eq!(
            lll_reduce(&z, &delta99()).unwrap_err(),
            LatticeError::DependentRows
        );
    }

    #[test]
    fn bad_delta_is_rejected() {
        let m = IntMatrix::from_i64(&[&[1]]);
        assert_eq!(
            lll_reduce(&m, &rat(1, 4)).unwrap_err(),
            LatticeError::BadDelta
        );
        assert_eq!(
            lll_reduce(&m, &rat_int(1)).unwrap_err(),
            LatticeError::BadDelta
        );
    }

    /// Expresses each row of `target` as a rational combination of `basis`
    /// rows; used to check lattice equality via integrality both ways.
    fn integer_combinations(basis: &IntMatrix, target: &IntMatrix) -> bool {
        use crate::linalg::solve_affine;
        let rows = basis.n_rows();
        let cols = basis.rows()[0].len();
        let a = QMatrix::from_fn(cols, rows, |i, j| {
            Rational::from_integer(basis.rows()[j][i].clone())
        });
        target.rows().iter().all(|t| {
            let b: Vec<Rational> = t
                .iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect();
            match solve_affine(&a, &b) {
                Some(sol) => sol.offset.iter().all(|c| c.denom().is_one()),
                None => false,
            }
        })
    }

    #[test]
    fn reduction_preserves_the_lattice() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..40 {
            let n = rng.gen_range(2..=4);
            let m = IntMatrix::from_rows(
                (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| BigInt::from(rng.gen_range(-9i64..=9)))
                            .collect()
                    })
                    .collect(),
            );
            let Ok(r) = lll_reduce(&m, &delta99()) else {
                continue;
            };
            assert!(
                integer_combinations(&m, &r),
                "reduced not in original lattice"
            );
            assert!(
                integer_combinations(&r, &m),
                "original not in reduced lattice"
            );
        }
    }

    /// Brute-force shortest nonzero vector by enumerating small coefficient
    /// boxes (adequate for these entry ranges).
    fn brute_lambda1_sq(m: &IntMatrix, coeff_bound: i64) -> BigInt {
        let n = m.n_rows();
        let cols = m.rows()[0].len();
        let mut best: Option<BigInt> = None;
        let mut coeffs = vec![0i64; n];
        fn rec(
            m: &IntMatrix,
            coeffs: &mut Vec<i64>,
            idx: usize,
            bound: i64,
            cols: usize,
            best: &mut Option<BigInt>,
        ) {
            if idx == coeffs.len() {
                if coeffs.iter().all(|&c| c == 0) {
                    return;
                }
                let mut v = vec![BigInt::from(0); cols];
                for (c, row) in coeffs.iter().zip(m.rows()) {
                    if *c != 0 {
                        for (vi, ri) in v.iter_mut().zip(row) {
                            *vi += BigInt::from(*c) * ri;
                        }
                    }
                }
                let n2 = v.iter().map(|x| x * x).sum::<BigInt>();
                if best.as_ref().is_none_or(|b| n2 < *b) {
                    *best = Some(n2);
                }
                return;
            }
            for c in -bound..=bound {
                coeffs[idx] = c;
                rec(m, coeffs, idx + 1, bound, cols, best);
            }
        }
        rec(m, &mut coeffs, 0, coeff_bound, cols, &mut best);
        best.unwrap()
    }

    #[test]
    fn reduced_bases_meet_quality_bounds() {
        let mut rng = StdRng::seed_from_u64(37);
        let mut tested = 0;
        while tested < 50 {
            let n = if tested % 2 == 0 { 3 } else { 4 };
            let m = IntMatrix::from_rows(
                (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| BigInt::from(rng.gen_range(-9i64..=9)))
                            .collect()
                    })
                    .collect(),
            );
            let Ok(r) = lll_reduce(&m, &delta99()) else {
                continue; // singular draw
            };
            tested += 1;
            // Recompute Gram-Schmidt data from scratch as an oracle.
            let g = gso(r.rows()).expect("reduced basis is independent");
            let half = rat(1, 2);
            for i in 0..n {
                for j in 0..i {
                    assert!(
                        g.mu[i][j].abs() <= half,
                        "not size-reduced: mu[{i}][{j}] = {:?}",
                        g.mu[i][j]
                    );
                }
            }
            for k in 1..n {
                let lhs = g.b_norm[k].clone();
                let rhs = (delta99() - &g.mu[k][k - 1] * &g.mu[k][k - 1]) * &g.b_norm[k - 1];
                assert!(lhs >= rhs, "Lovász condition violated at {k}");
            }
            // First-vector quality against brute-force lambda_1.
            let lambda1 = brute_lambda1_sq(&m, if n == 3 { 8 } else { 5 });
            let b1 = norm2(&r.rows()[0]);
            let factor = BigInt::from(1) << (n - 1);
            assert!(
                b1 <= &factor * &lambda1,
                "first vector too long: {b1} vs 2^(n-1) * {lambda1}"
            );
        }
    }

    #[test]
    fn kernel_vectors_pick_the_tiny_eigendirection() {
        let g = vec![vec![1e-12, 0.0], vec![0.0, 1.0]];
        let b = QMatrix::identity(2);
        let cands = find_kernel_vectors(&g, &b, &KernelParams::default());
        assert_eq!(cands.len(), 1, "second direction must fail the gamma test");
        assert_eq!(cands[0].w, vec![BigInt::from(1), BigInt::from(0)]);
        assert_eq!(cands[0].v, vec![rat_int(1), rat_int(0)]);
    }

    #[test]
    fn zero_matrix_yields_all_directions() {
        let g = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let b = QMatrix::identity(2);
        let cands = find_kernel_vectors(&g, &b, &KernelParams::default());
        assert_eq!(cands.len(), 2);
    }

    #[test]
    fn kernel_vector_found_under_rotation() {
        // G = R diag(0, 2) R^T has kernel direction R e_1; the candidate list
        // must contain a w with G w essentially zero.
        let (c, s) = (0.6f64, 0.8f64);
        let g = vec![
            vec![2.0 * s * s + 1e-11, -2.0 * c * s],
            vec![-2.0 * c * s, 2.0 * c * c + 1e-11],
        ];
        let b = QMatrix::identity(2);
        let cands = find_kernel_vectors(&g, &b, &KernelParams::default());
        assert!(!cands.is_empty());
        // Kernel direction is (c, s) ~ (3, 4) after integer scaling.
        let best = &cands[0];
        assert_eq!(
            best.w.iter().map(|x| x.abs()).collect::<Vec<_>>(),
            vec![BigInt::from(3), BigInt::from(4)]
        );
    }

    #[test]
    fn simplify_recovers_one_third() {
        // Family: single entry, offset 0, one direction with entry 1. The
        // numeric value 0.333333333 should simplify to exactly 1/3.
        let f0 = vec![rat_int(0)];
        let fs = vec![vec![rat_int(1)]];
        let mu = BigInt::from(256);
        let beta = BigInt::from(10u64).pow(19);
        let y = simplify_solution(&f0, &fs, &[0.333333333f64], &mu, &beta).unwrap();
        assert_eq!(y, vec![rat(1, 3)]);
    }

    #[test]
    fn simplify_on_exact_offset_returns_zero_coordinates() {
        let f0 = vec![rat(2, 7), rat_int(1)];
        let fs = vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]];
        let target = [2.0 / 7.0, 1.0];
        let mu = BigInt::from(256);
        let beta = BigInt::from(10u64).pow(19);
        let y = simplify_solution(&f0, &fs, &target, &mu, &beta).unwrap();
        assert_eq!(y, vec![rat_int(0), rat_int(0)]);
    }
}

//! Reduction of "find sums of squares Q_j with Σ P_j Q_j = R" to a
//! block-structured semidefinite search space, and exact restriction of such
//! spaces by discovered kernel vectors.
//!
//! Each candidate Q_j is represented as M_j Q̂_j M_jᵀ for a chosen monomial
//! row vector M_j and an unknown symmetric matrix Q̂_j. Matching coefficients
//! of Σ M_j Q̂_j M_jᵀ · P_j − R against zero gives an affine linear system
//! over the Q̂_j entries; its solution set is an affine family of
//! block-diagonal symmetric matrices F(y) = F(0) + Σ y_i F_i. Finding PSD
//! members of that family is the semidefinite feasibility problem the rest of
//! the pipeline works on.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::{solve_affine, QMatrix};
use crate::poly::{Monomial, Polynomial, Rational};
use num::{One, Zero};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SosError {
    #[error("multiplicand {index} has an empty monomial basis (degree bound too small)")]
    EmptyBasis { index: usize },
    #[error("no symmetric matrices satisfy the coefficient equations (bases too small or identity impossible)")]
    Infeasible,
    #[error("all polynomials must share one variable list")]
    VarMismatch,
    #[error("kernel vector for block {block} has length {got}, expected {expected}")]
    KernelVectorSize {
        block: usize,
        got: usize,
        expected: usize,
    },
}

/// A "find SOS multipliers" instance: named multiplicands P_j, target R, and
/// per-multiplicand monomial bases M_j.
#[derive(Clone, Debug)]
pub struct SosProblem {
    pub multiplicands: Vec<(String, Polynomial)>,
    pub target: Polynomial,
    pub bases: Vec<Vec<Monomial>>,
    /// When set, the search space additionally requires trace(Q̂_b) = 1 for
    /// this block — a linear way to force that multiplier to be nonzero.
    pub unit_trace_block: Option<usize>,
}

impl SosProblem {
    pub fn new(
        multiplicands: Vec<(String, Polynomial)>,
        target: Polynomial,
        bases: Vec<Vec<Monomial>>,
    ) -> Result<Self, SosError> {
        assert!(!multiplicands.is_empty(), "need at least one multiplicand");
        assert_eq!(
            multiplicands.len(),
            bases.len(),
            "one basis per multiplicand"
        );
        if let Some(index) = bases.iter().position(Vec::is_empty) {
            return Err(SosError::EmptyBasis { index });
        }
        if multiplicands.iter().any(|(_, p)| p.vars() != target.vars()) {
            return Err(SosError::VarMismatch);
        }
        Ok(SosProblem {
            multiplicands,
            target,
            bases,
            unit_trace_block: None,
        })
    }

    pub fn with_unit_trace(mut self, block: usize) -> Self {
        assert!(block < self.multiplicands.len());
        self.unit_trace_block = Some(block);
        self
    }
}

/// Sizes and row offsets of the diagonal blocks of the unknown matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        BlockStructure { sizes, offsets }
    }

    pub fn n_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, block: usize) -> usize {
        self.sizes[block]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Affine family of block-diagonal symmetric matrices
/// F(y) = offset + Σ y_i basis_i, with the monomial bases that give each
/// block its polynomial meaning. Matrices are stored per block.
#[derive(Clone, Debug)]
pub struct SdpSearchSpace {
    pub blocks: BlockStructure,
    pub bases: Vec<Vec<Monomial>>,
    /// Block list of F(0).
    pub offset: Vec<QMatrix>,
    /// basis[i][b] is block b of the i-th direction matrix.
    pub basis: Vec<Vec<QMatrix>>,
}

impl SdpSearchSpace {
    /// Dimension of the family (number of free coordinates y_i).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Blocks of F(y) for exact rational y.
    pub fn evaluate(&self, y: &[Rational]) -> Vec<QMatrix> {
        assert_eq!(y.len(), self.dim());
        let mut out = self.offset.clone();
        for (yi, dirs) in y.iter().zip(&self.basis) {
            if yi.is_zero() {
                continue;
            }
            for (o, d) in out.iter_mut().zip(dirs) {
                *o = o.add(&d.scale(yi));
            }
        }
        out
    }
}

/// The polynomial M Q Mᵀ for a monomial row vector M and symmetric Q.
pub fn gram_polynomial(vars: &[String], monomials: &[Monomial], q: &QMatrix) -> Polynomial {
    assert_eq!(q.n_rows(), monomials.len());
    assert_eq!(q.n_cols(), monomials.len());
    let mut p = Polynomial::zero(vars);
    for r in 0..monomials.len() {
        for c in 0..monomials.len() {
            if !q[(r, c)].is_zero() {
                p.add_term(monomials[r].mul(&monomials[c]), q[(r, c)].clone());
            }
        }
    }
    p
}

/// All monomials over `n_vars` variables of total degree exactly `d`,
/// ascending graded-lex.
fn monomials_of_degree(n_vars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; n_vars];
    fn rec(exps: &mut Vec<u32>, idx: usize, left: u32, out: &mut Vec<Monomial>) {
        if idx + 1 == exps.len() {
            exps[idx] = left;
            out.push(Monomial(exps.clone()));
            return;
        }
        for e in 0..=left {
            exps[idx] = e;
            rec(exps, idx + 1, left - e, out);
        }
    }
    if n_vars == 0 {
        if d == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    rec(&mut exps, 0, d, &mut out);
    out.sort();
    out
}

/// All monomials of total degree at most `d`, ascending graded-lex.
fn monomials_up_to_degree(n_vars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for k in 0..=d {
        out.extend(monomials_of_degree(n_vars, k));
    }
    out
}

/// Chooses a monomial basis for each multiplicand under a total degree bound.
///
/// The single-SOS case (one multiplicand equal to the constant 1) uses the
/// Newton polytope of the target, halved — the smallest basis that can
/// possibly express the target as a pure sum of squares. Otherwise, when
/// `homogeneous` is set and every input is homogeneous, each basis is the
/// full set of monomials of the exact degree (bound − deg P_j)/2; in the
/// general case each basis holds the monomials m with
/// deg m ≤ ⌊bound/2⌋ and deg P_j + 2·deg m ≤ max(bound, deg R, max_j deg P_j).
pub fn select_bases(
    multiplicands: &[Polynomial],
    target: &Polynomial,
    bound: u32,
    homogeneous: bool,
) -> Result<Vec<Vec<Monomial>>, SosError> {
    assert!(!multiplicands.is_empty());
    let n_vars = target.vars().len();
    if multiplicands.len() == 1 {
        let p = &multiplicands[0];
        if p.degree() == 0 && p.coefficient(&Monomial::one(n_vars)).is_one() {
            let basis = target.newton_halved_monomials();
            if basis.is_empty() {
                return Err(SosError::EmptyBasis { index: 0 });
            }
            return Ok(vec![basis]);
        }
    }
    let all_homogeneous = homogeneous
        && multiplicands
            .iter()
            .all(|p| p.homogeneous_degree().is_some())
        && (target.is_zero() || target.homogeneous_degree().is_some());
    let max_deg_p = multiplicands
        .iter()
        .map(Polynomial::degree)
        .max()
        .unwrap_or(0);
    let cap = bound.max(target.degree()).max(max_deg_p);
    let mut out = Vec::with_capacity(multiplicands.len());
    for (index, p) in multiplicands.iter().enumerate() {
        let deg_p = p.degree();
        let basis = if all_homogeneous {
            if bound < deg_p || !(bound - deg_p).is_multiple_of(2) {
                return Err(SosError::EmptyBasis { index });
            }
            monomials_of_degree(n_vars, (bound - deg_p) / 2)
        } else {
            let mut limit = bound / 2;
            if deg_p <= cap {
                limit = limit.min((cap - deg_p) / 2);
            } else {
                return Err(SosError::EmptyBasis { index });
            }
            monomials_up_to_degree(n_vars, limit)
        };
        if basis.is_empty() {
            return Err(SosError::EmptyBasis { index });
        }
        out.push(basis);
    }
    Ok(out)
}

/// Index of unknown (r, c) with r ≤ c inside one block's upper triangle,
/// rows first.
fn triangle_index(size: usize, r: usize, c: usize) -> usize {
    debug_assert!(r <= c && c < size);
    r * size - r * (r + 1) / 2 + c
}

fn triangle_count(size: usize) -> usize {
    size * (size + 1) / 2
}

/// Reshapes a flat vector of upper-triangle unknowns into symmetric blocks.
fn unflatten(blocks: &BlockStructure, flat: &[Rational]) -> Vec<QMatrix> {
    let mut out = Vec::with_capacity(blocks.n_blocks());
    let mut base = 0;
    for b in 0..blocks.n_blocks() {
        let s = blocks.size(b);
        let mut m = QMatrix::zeros(s, s);
        for r in 0..s {
            for c in r..s {
                let v = flat[base + triangle_index(s, r, c)].clone();
                m[(r, c)] = v.clone();
                m[(c, r)] = v;
            }
        }
        base += triangle_count(s);
        out.push(m);
    }
    out
}

/// Builds the affine search space of all block-diagonal symmetric matrices
/// satisfying Σ M_j Q̂_j M_jᵀ · P_j = R coefficient-wise. `Err(Infeasible)`
/// means no symmetric matrices at all (PSD or not) fit these bases.
pub fn build_search_space(problem: &SosProblem) -> Result<SdpSearchSpace, SosError> {
    let blocks = BlockStructure::new(problem.bases.iter().map(Vec::len).collect());
    let n_unknowns: usize = blocks.sizes().iter().map(|&s| triangle_count(s)).sum();

    // Column index of each monomial equation, discovered in order.
    let mut eq_index: BTreeMap<Monomial, usize> = BTreeMap::new();
    // entries[(eq, unknown)] accumulated sparsely.
    let mut entries: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    let mut unknown_base = 0;
    for (j, (_, p)) in problem.multiplicands.iter().enumerate() {
        let basis = &problem.bases[j];
        let s = basis.len();
        for r in 0..s {
            for c in r..s {
                let unknown = unknown_base + triangle_index(s, r, c);
                let factor = if r == c {
                    Rational::one()
                } else {
                    Rational::from_integer(2.into())
                };
                let m_rc = basis[r].mul(&basis[c]);
                for (m_p, coeff) in p.terms() {
                    let mono = m_rc.mul(m_p);
                    let next = eq_index.len();
                    let eq = *eq_index.entry(mono).or_insert(next);
                    let add = &factor * coeff;
                    entries
                        .entry((eq, unknown))
                        .and_modify(|v| *v += &add)
                        .or_insert(add);
                }
            }
        }
        unknown_base += triangle_count(s);
    }
    for (mono, _) in problem.target.terms() {
        let next = eq_index.len();
        eq_index.entry(mono.clone()).or_insert(next);
    }

    let extra = usize::from(problem.unit_trace_block.is_some());
    let n_eqs = eq_index.len() + extra;
    let mut a = QMatrix::zeros(n_eqs, n_unknowns);
    for ((eq, unknown), v) in entries {
        a[(eq, unknown)] = v;
    }
    let mut rhs = vec![Rational::zero(); n_eqs];
    for (mono, coeff) in problem.target.terms() {
        rhs[eq_index[mono]] = coeff.clone();
    }
    if let Some(block) = problem.unit_trace_block {
        let row = n_eqs - 1;
        let s = blocks.size(block);
        let base: usize = blocks.sizes()[..block]
            .iter()
            .map(|&t| triangle_count(t))
            .sum();
        for r in 0..s {
            a[(row, base + triangle_index(s, r, r))] = Rational::one();
        }
        rhs[row] = Rational::one();
    }

    let solution = solve_affine(&a, &rhs).ok_or(SosError::Infeasible)?;
    Ok(SdpSearchSpace {
        offset: unflatten(&blocks, &solution.offset),
        basis: solution
            .basis
            .iter()
            .map(|v| unflatten(&blocks, v))
            .collect(),
        blocks,
        bases: problem.bases.clone(),
    })
}

/// Intersects the family with {F : (block b of F)·v = 0} for each supplied
/// kernel vector, exactly. The result is the same solution set seen through
/// fewer coordinates; `Err(Infeasible)` means the constraints wiped it out.
pub fn restrict_search_space(
    space: &SdpSearchSpace,
    kernel_vectors: &[(usize, Vec<Rational>)],
) -> Result<SdpSearchSpace, SosError> {
    for (block, v) in kernel_vectors {
        let expected = space.blocks.size(*block);
        if v.len() != expected {
            return Err(SosError::KernelVectorSize {
                block: *block,
                got: v.len(),
                expected,
            });
        }
    }
    let m = space.dim();
    let n_rows: usize = kernel_vectors
        .iter()
        .map(|(b, _)| space.blocks.size(*b))
        .sum();
    let mut a = QMatrix::zeros(n_rows, m);
    let mut rhs = Vec::with_capacity(n_rows);
    let mut row = 0;
    for (block, v) in kernel_vectors {
        let s = space.blocks.size(*block);
        for i in 0..m {
            let col = space.basis[i][*block].mul_vec(v);
            for (r, val) in col.into_iter().enumerate() {
                a[(row + r, i)] = val;
            }
        }
        let off = space.offset[*block].mul_vec(v);
        for val in off {
            rhs.push(-val);
        }
        row += s;
    }
    let solution = solve_affine(&a, &rhs).ok_or(SosError::Infeasible)?;

    // New offset is the old family at the particular solution; new
    // directions are old-basis combinations along the constraint kernel.
    let new_offset = space.evaluate(&solution.offset);
    let mut new_basis = Vec::with_capacity(solution.basis.len());
    for dir in &solution.basis {
        let mut blocks_i = Vec::with_capacity(space.offset.len());
        for b in 0..space.offset.len() {
            let mut acc = QMatrix::zeros(space.blocks.size(b), space.blocks.size(b));
            for (coeff, basis_dir) in dir.iter().zip(&space.basis) {
                if !coeff.is_zero() {
                    acc = acc.add(&basis_dir[b].scale(coeff));
                }
            }
            blocks_i.push(acc);
        }
        new_basis.push(blocks_i);
    }
    Ok(SdpSearchSpace {
        blocks: space.blocks.clone(),
        bases: space.bases.clone(),
        offset: new_offset,
        basis: new_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, rat, rat_int};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn poly(text: &str, vs: &[&str]) -> Polynomial {
        parse_polynomial(text, &vars(vs)).unwrap()
    }

    #[test]
    fn select_bases_single_sos_uses_newton_halving() {
        let target = poly("x^2 + 1", &["x"]);
        let one = poly("1", &["x"]);
        let bases = select_bases(&[one], &target, 2, false).unwrap();
        assert_eq!(bases, vec![vec![Monomial(vec![0]), Monomial(vec![1])]]);
    }

    #[test]
    fn select_bases_simple_system() {
        let p1 = poly("-2 + y^2", &["y"]);
        let p2 = poly("1 - y^4", &["y"]);
        let one = poly("1", &["y"]);
        let target = poly("-1", &["y"]);
        let bases = select_bases(&[p1, p2, one], &target, 2, false).unwrap();
        let m0 = Monomial(vec![0]);
        let m1 = Monomial(vec![1]);
        assert_eq!(
            bases,
            vec![
                vec![m0.clone(), m1.clone()],
                vec![m0.clone()],
                vec![m0.clone(), m1.clone()],
            ]
        );
    }

    #[test]
    fn select_bases_homogeneous_quotient_counts() {
        // Quotient setup for a degree-6 homogeneous form in three variables:
        // multiplier degrees 3 and 6 under overall bound 12.
        let vs = ["x", "y", "z"];
        let p = poly("x^4*y^2 + x^2*y^4 + z^6 - 3*x^2*y^2*z^2", &vs);
        let minus_one_times = poly("-1", &vs);
        // Force the homogeneous path with inputs of degree 6 and 0; the
        // target is 0 = P*Q1 - Q2.
        let target = Polynomial::zero(&vars(&vs));
        let bases = select_bases(&[p, minus_one_times], &target, 12, true).unwrap();
        assert_eq!(bases[0].len(), 10, "degree-3 monomials in 3 vars");
        assert_eq!(bases[1].len(), 28, "degree-6 monomials in 3 vars");
        assert!(bases[0].iter().all(|m| m.degree() == 3));
        assert!(bases[1].iter().all(|m| m.degree() == 6));
    }

    #[test]
    fn select_bases_rejects_too_small_bounds() {
        let vs = ["x", "y", "z"];
        let p = poly("x^4*y^2 + x^2*y^4 + z^6 - 3*x^2*y^2*z^2", &vs);
        let target = Polynomial::zero(&vars(&vs));
        // Odd gap: bound 7 with deg 6 cannot be split as 2*deg(m).
        assert_eq!(
            select_bases(&[p], &target, 7, true).unwrap_err(),
            SosError::EmptyBasis { index: 0 }
        );
    }

    #[test]
    fn build_zero_dimensional_square() {
        let one = poly("1", &["x"]);
        let target = poly("x^2", &["x"]);
        let problem = SosProblem::new(
            vec![("1".into(), one)],
            target,
            vec![vec![Monomial(vec![1])]],
        )
        .unwrap();
        let space = build_search_space(&problem).unwrap();
        assert_eq!(space.dim(), 0);
        assert_eq!(space.offset.len(), 1);
        assert_eq!(space.offset[0][(0, 0)], rat_int(1));
    }

    #[test]
    fn build_forces_cross_terms() {
        let one = poly("1", &["x"]);
        let target = poly("x^2", &["x"]);
        let problem = SosProblem::new(
            vec![("1".into(), one)],
            target,
            vec![vec![Monomial(vec![0]), Monomial(vec![1])]],
        )
        .unwrap();
        let space = build_search_space(&problem).unwrap();
        assert_eq!(space.dim(), 0);
        let q = &space.offset[0];
        assert_eq!(q[(0, 0)], rat_int(0));
        assert_eq!(q[(0, 1)], rat_int(0));
        assert_eq!(q[(1, 1)], rat_int(1));
    }

    #[test]
    fn unit_trace_pins_the_denominator_block() {
        // x²·Q1 − Q2 = 0 with bases {1} and {x}: one line of solutions
        // q = r; the trace constraint picks q = 1 exactly.
        let p = poly("x^2", &["x"]);
        let minus_one = poly("-1", &["x"]);
        let target = Polynomial::zero(&vars(&["x"]));
        let problem = SosProblem::new(
            vec![("p".into(), p), ("-1".into(), minus_one)],
            target,
            vec![vec![Monomial(vec![0])], vec![Monomial(vec![1])]],
        )
        .unwrap()
        .with_unit_trace(0);
        let space = build_search_space(&problem).unwrap();
        assert_eq!(space.dim(), 0);
        assert_eq!(space.offset[0][(0, 0)], rat_int(1));
        assert_eq!(space.offset[1][(0, 0)], rat_int(1));
    }

    fn simple_system_space() -> SdpSearchSpace {
        let p1 = poly("-2 + y^2", &["y"]);
        let p2 = poly("1 - y^4", &["y"]);
        let one = poly("1", &["y"]);
        let target = poly("-1", &["y"]);
        let bases =
            select_bases(&[p1.clone(), p2.clone(), one.clone()], &target, 2, false).unwrap();
        let problem = SosProblem::new(
            vec![("p1".into(), p1), ("p2".into(), p2), ("1".into(), one)],
            target,
            bases,
        )
        .unwrap();
        build_search_space(&problem).unwrap()
    }

    #[test]
    fn simple_system_space_contains_known_witness_point() {
        let space = simple_system_space();
        // Known solution: Q1 = 2/3 + y^2/3 (block diag(2/3, 1/3)),
        // Q2 = 1/3 (block [1/3]), constant block zero.
        let target_blocks = vec![
            QMatrix::from_rows(vec![
                vec![rat(2, 3), rat_int(0)],
                vec![rat_int(0), rat(1, 3)],
            ]),
            QMatrix::from_rows(vec![vec![rat(1, 3)]]),
            QMatrix::zeros(2, 2),
        ];
        // Solve offset + sum y_i basis_i = target for y.
        let m = space.dim();
        let flat = |mats: &[QMatrix]| -> Vec<Rational> {
            mats.iter()
                .flat_map(|q| {
                    (0..q.n_rows())
                        .flat_map(move |r| (0..q.n_cols()).map(move |c| q[(r, c)].clone()))
                })
                .collect()
        };
        let total: usize = space.offset.iter().map(|q| q.n_rows() * q.n_cols()).sum();
        let a = QMatrix::from_fn(total, m, |i, j| flat(&space.basis[j])[i].clone());
        let rhs: Vec<Rational> = flat(&target_blocks)
            .iter()
            .zip(flat(&space.offset))
            .map(|(t, o)| t - o)
            .collect();
        let sol = solve_affine(&a, &rhs);
        assert!(sol.is_some(), "witness point must lie in the space");
    }

    #[test]
    fn random_space_points_satisfy_the_polynomial_identity() {
        let space = simple_system_space();
        let p1 = poly("-2 + y^2", &["y"]);
        let p2 = poly("1 - y^4", &["y"]);
        let one = poly("1", &["y"]);
        let target = poly("-1", &["y"]);
        let polys = [&p1, &p2, &one];
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let y: Vec<Rational> = (0..space.dim())
                .map(|_| rat(rng.gen_range(-20i64..=20), rng.gen_range(1i64..=9)))
                .collect();
            let blocks = space.evaluate(&y);
            let mut sum = Polynomial::zero(&vars(&["y"]));
            for (b, q) in blocks.iter().enumerate() {
                let qj = gram_polynomial(&vars(&["y"]), &space.bases[b], q);
                sum = sum.add(&qj.mul(polys[b]).unwrap()).unwrap();
            }
            let diff = sum.sub(&target).unwrap();
            assert!(diff.is_zero(), "identity failed at y = {y:?}: {diff}");
        }
    }

    /// Hand-built family {diag(y1, y2)}.
    fn diag_family() -> SdpSearchSpace {
        SdpSearchSpace {
            blocks: BlockStructure::new(vec![2]),
            bases: vec![vec![Monomial(vec![0]), Monomial(vec![1])]],
            offset: vec![QMatrix::zeros(2, 2)],
            basis: vec![
                vec![QMatrix::from_rows(vec![
                    vec![rat_int(1), rat_int(0)],
                    vec![rat_int(0), rat_int(0)],
                ])],
                vec![QMatrix::from_rows(vec![
                    vec![rat_int(0), rat_int(0)],
                    vec![rat_int(0), rat_int(1)],
                ])],
            ],
        }
    }

    #[test]
    fn restrict_forces_coordinates_to_zero() {
        let space = diag_family();
        let restricted =
            restrict_search_space(&space, &[(0, vec![rat_int(0), rat_int(1)])]).unwrap();
        assert_eq!(restricted.dim(), 1);
        // All family members now have a zero (1,1) entry.
        let f = restricted.evaluate(&[rat(7, 3)]);
        assert_eq!(f[0][(1, 1)], rat_int(0));
        assert_eq!(f[0][(0, 0)], rat(7, 3));
    }

    #[test]
    fn restrict_with_kernel_vector_of_all_directions_changes_nothing() {
        // Family {[[y, 0], [0, 0]]}: v = (0, 1) kills nothing because v is
        // already in the kernel of offset and all directions.
        let space = SdpSearchSpace {
            blocks: BlockStructure::new(vec![2]),
            bases: vec![vec![Monomial(vec![0]), Monomial(vec![1])]],
            offset: vec![QMatrix::zeros(2, 2)],
            basis: vec![vec![QMatrix::from_rows(vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(0)],
            ])]],
        };
        let restricted =
            restrict_search_space(&space, &[(0, vec![rat_int(0), rat_int(1)])]).unwrap();
        assert_eq!(restricted.dim(), space.dim());
    }

    #[test]
    fn restrict_can_pin_the_whole_space() {
        // Family {[[y1, y2], [y2, 1]]}; v = (1, 0) forces y1 = y2 = 0.
        let space = SdpSearchSpace {
            blocks: BlockStructure::new(vec![2]),
            bases: vec![vec![Monomial(vec![0]), Monomial(vec![1])]],
            offset: vec![QMatrix::from_rows(vec![
                vec![rat_int(0), rat_int(0)],
                vec![rat_int(0), rat_int(1)],
            ])],
            basis: vec![
                vec![QMatrix::from_rows(vec![
                    vec![rat_int(1), rat_int(0)],
                    vec![rat_int(0), rat_int(0)],
                ])],
                vec![QMatrix::from_rows(vec![
                    vec![rat_int(0), rat_int(1)],
                    vec![rat_int(1), rat_int(0)],
                ])],
            ],
        };
        let restricted =
            restrict_search_space(&space, &[(0, vec![rat_int(1), rat_int(0)])]).unwrap();
        assert_eq!(restricted.dim(), 0);
        let f = &restricted.offset[0];
        assert_eq!(f[(0, 0)], rat_int(0));
        assert_eq!(f[(0, 1)], rat_int(0));
        assert_eq!(f[(1, 1)], rat_int(1));
    }

    #[test]
    fn restrict_infeasible_when_offset_cannot_be_cancelled() {
        // Family is the single matrix [[1]]; demanding kernel vector (1)
        // has no solution.
        let space = SdpSearchSpace {
            blocks: BlockStructure::new(vec![1]),
            bases: vec![vec![Monomial(vec![0])]],
            offset: vec![QMatrix::identity(1)],
            basis: vec![],
        };
        assert_eq!(
            restrict_search_space(&space, &[(0, vec![rat_int(1)])]).unwrap_err(),
            SosError::Infeasible
        );
    }

    #[test]
    fn restrict_preserves_solutions_that_annihilate_the_vectors() {
        // Two-block family; points annihilating v on block 0 must survive.
        let mut rng = StdRng::seed_from_u64(23);
        let space = SdpSearchSpace {
            blocks: BlockStructure::new(vec![2, 1]),
            bases: vec![
                vec![Monomial(vec![0]), Monomial(vec![1])],
                vec![Monomial(vec![0])],
            ],
            offset: vec![
                QMatrix::from_rows(vec![
                    vec![rat_int(1), rat_int(1)],
                    vec![rat_int(1), rat_int(1)],
                ]),
                QMatrix::from_rows(vec![vec![rat_int(2)]]),
            ],
            basis: vec![
                vec![
                    QMatrix::from_rows(vec![
                        vec![rat_int(1), rat_int(0)],
                        vec![rat_int(0), rat_int(-1)],
                    ]),
                    QMatrix::from_rows(vec![vec![rat_int(0)]]),
                ],
                vec![
                    QMatrix::from_rows(vec![
                        vec![rat_int(0), rat_int(1)],
                        vec![rat_int(1), rat_int(0)],
                    ]),
                    QMatrix::from_rows(vec![vec![rat_int(1)]]),
                ],
            ],
        };
        let v = vec![rat_int(1), rat_int(-1)];
        let restricted = restrict_search_space(&space, &[(0, v.clone())]).unwrap();
        assert!(restricted.dim() < space.dim());
        for _ in 0..10 {
            let y: Vec<Rational> = (0..restricted.dim())
                .map(|_| rat(rng.gen_range(-9i64..=9), rng.gen_range(1i64..=4)))
                .collect();
            let f = restricted.evaluate(&y);
            let image = f[0].mul_vec(&v);
            assert!(image.iter().all(Rational::is_zero));
            // And every restricted point must still be an old-space point:
            // solve for old coordinates.
            let m = space.dim();
            let flat = |mats: &[QMatrix]| -> Vec<Rational> {
                mats.iter()
                    .flat_map(|q| {
                        (0..q.n_rows())
                            .flat_map(move |r| (0..q.n_cols()).map(move |c| q[(r, c)].clone()))
                    })
                    .collect()
            };
            let total: usize = space.offset.iter().map(|q| q.n_rows() * q.n_cols()).sum();
            let a = QMatrix::from_fn(total, m, |i, j| flat(&space.basis[j])[i].clone());
            let rhs: Vec<Rational> = flat(&f)
                .iter()
                .zip(flat(&space.offset))
                .map(|(t, o)| t - o)
                .collect();
            assert!(solve_affine(&a, &rhs).is_some());
        }
    }
}

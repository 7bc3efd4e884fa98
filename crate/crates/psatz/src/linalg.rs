//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Everything here is fraction-free in spirit: no tolerances, no floats.
//! Provides dense rational matrices, reduced row echelon form, affine system
//! solving (offset + kernel basis), row-span bases for sets of matrices, and
//! characteristic polynomials via the Faddeev–LeVerrier recurrence.

use std::ops::{Index, IndexMut};

use num::{One, Zero};

use crate::poly::Rational;

/// Dense rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return false;
                }
            }
        }
        true
    }

    pub fn transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> QMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn matmul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)].clone()).sum()
    }

    /// Reduced row echelon form; returns (rref, pivot column indices).
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // Find a nonzero pivot in column c at or below row r.
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    let a = m[(p, j)].clone();
                    let b = m[(r, j)].clone();
                    m[(p, j)] = b;
                    m[(r, j)] = a;
                }
            }
            let inv = m[(r, c)].clone();
            for j in c..m.cols {
                let v = &m[(r, j)] / &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let delta = &f * &m[(r, j)];
                        m[(i, j)] = &m[(i, j)] - &delta;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Solution set of `A x = b`: all `offset + sum t_k basis_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolution {
    pub offset: Vec<Rational>,
    pub basis: Vec<Vec<Rational>>,
}

/// Exact solve of `A x = b`. Returns `None` when inconsistent; otherwise the
/// particular solution with all free variables zero plus a kernel basis (one
/// vector per free column, each with a `1` in its free coordinate).
pub fn solve_affine(a: &QMatrix, b: &[Rational]) -> Option<AffineSolution> {
    assert_eq!(a.n_rows(), b.len());
    let n = a.n_cols();
    let mut aug = QMatrix::zeros(a.n_rows(), n + 1);
    for i in 0..a.n_rows() {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n)] = b[i].clone();
    }
    let (r, pivots) = aug.rref();
    // Inconsistent iff some pivot lands in the augmented column.
    if pivots.contains(&n) {
        return None;
    }
    let pivot_rows: Vec<(usize, usize)> = pivots.iter().cloned().enumerate().collect();
    let mut offset = vec![Rational::zero(); n];
    for &(row, col) in &pivot_rows {
        offset[col] = r[(row, n)].clone();
    }
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; n];
        for &c in &pivots {
            v[c] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..n {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![Rational::zero(); n];
        v[free] = Rational::one();
        for &(row, col) in &pivot_rows {
            v[col] = -r[(row, free)].clone();
        }
        basis.push(v);
    }
    Some(AffineSolution { offset, basis })
}

/// Incrementally maintained reduced row echelon basis; used to accumulate
/// row spans without stacking everything up front.
pub struct RowEchelon {
    cols: usize,
    /// Rows in RREF, sorted by pivot column.
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl RowEchelon {
    pub fn new(cols: usize) -> Self {
        RowEchelon {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the current basis; if independent, inserts it
    /// (keeping full RREF) and returns true.
    pub fn insert(&mut self, mut row: Vec<Rational>) -> bool {
        assert_eq!(row.len(), self.cols);
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for j in p..self.cols {
                    let delta = &f * &r[j];
                    row[j] = &row[j] - &delta;
                }
            }
        }
        let Some(p) = row.iter().position(|v| !v.is_zero()) else {
            return false;
        };
        let inv = row[p].clone();
        for v in row.iter_mut().skip(p) {
            *v = &*v / &inv;
        }
        // Eliminate the new pivot from existing rows.
        for r in self.rows.iter_mut() {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for j in p..self.cols {
                    let delta = &f * &row[j];
                    r[j] = &r[j] - &delta;
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, row);
        true
    }

    pub fn into_matrix(self) -> QMatrix {
        QMatrix::from_rows(self.rows)
    }
}

/// Full-row-rank matrix `B` whose row space is the sum of the row spaces of
/// the given matrices (equivalently, the orthogonal complement of the
/// intersection of their kernels, for symmetric inputs). Zero input rows are
/// dropped; an all-zero family yields a matrix with zero rows.
pub fn row_span_basis<'a>(mats: impl IntoIterator<Item = &'a QMatrix>) -> QMatrix {
    let mut ech: Option<RowEchelon> = None;
    for m in mats {
        let e = ech.get_or_insert_with(|| RowEchelon::new(m.n_cols()));
        if e.rank() == m.n_cols() {
            break;
        }
        for i in 0..m.n_rows() {
            e.insert(m.row(i).to_vec());
        }
    }
    match ech {
        Some(e) => e.into_matrix(),
        None => QMatrix::zeros(0, 0),
    }
}

/// Characteristic polynomial `det(lambda I - A)` by the Faddeev–LeVerrier
/// recurrence. Coefficients ascending: `c[0] + c[1] lambda + ... + lambda^n`.
pub fn charpoly(a: &QMatrix) -> Vec<Rational> {
    assert_eq!(a.n_rows(), a.n_cols());
    let n = a.n_rows();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    if n == 0 {
        return coeffs;
    }
    let mut m = a.clone();
    let mut c = -m.trace();
    coeffs[n - 1] = c.clone();
    for k in 2..=n {
        // M <- A (M + c I)
        let mut shifted = m;
        for i in 0..n {
            shifted[(i, i)] += &c;
        }
        m = a.matmul(&shifted);
        c = -m.trace() / Rational::from_integer(k.into());
        coeffs[n - k] = c.clone();
    }
    coeffs
}

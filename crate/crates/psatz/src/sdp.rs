//! Floating-point semidefinite feasibility on a compressed search space.
//!
//! The exact affine family F(y) = offset + Σ y_i basis_i is converted to
//! dense floating blocks, optionally compressed block-wise through exact row
//! bases B (G_i = B F_i Bᵀ drops directions every family member kills), and
//! handed to a small interior-point solver that maximizes t subject to
//! F(y) ⪰ t·I on every block. Strictly feasible spaces come back with t > 0,
//! degenerate-but-feasible ones with t ≈ 0, infeasible ones with t < 0.
//!
//! An SDPA sparse-format exporter plus a solution-file reader let an external
//! solver stand in for the internal one.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::QMatrix;
use crate::psd::rational_to_f64;
use crate::sos::SdpSearchSpace;

/// Bound on |y_i| inside the solver; keeps the Newton system well posed even
/// for directions the eigenvalue objective cannot see.
const Y_BOUND: f64 = 1e8;
/// Backtracking line-search cap per Newton step.
const MAX_BACKTRACK: u32 = 60;
/// Inner Newton iterations per barrier weight.
const MAX_INNER: usize = 50;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("numeric solver hit the iteration cap ({iterations}) before converging")]
    NonConvergence {
        iterations: usize,
        best: NumericSolution,
    },
    #[error("solution file: {0}")]
    SolutionFile(String),
}

/// Floating copy of a search space, compressed block-wise. `compressors[b]`
/// is the exact matrix whose rows were used for block `b`; kernel vectors
/// found in compressed coordinates are lifted through it.
#[derive(Clone, Debug)]
pub struct FloatSpace {
    pub offset: Vec<DMatrix<f64>>,
    /// `basis[i][b]` is block `b` of direction `i`.
    pub basis: Vec<Vec<DMatrix<f64>>>,
    pub compressors: Vec<QMatrix>,
}

/// Output of the feasibility solver.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericSolution {
    pub y: Vec<f64>,
    /// Minimum eigenvalue estimate per block (empty blocks skipped as NaN-free
    /// +infinity contributions).
    pub block_min_eigs: Vec<f64>,
    pub iterations: usize,
    /// Best minimum eigenvalue seen after each Newton step; nondecreasing.
    pub best_t_history: Vec<f64>,
}

impl NumericSolution {
    /// Overall minimum eigenvalue estimate at `y` (+infinity when all blocks
    /// are empty).
    pub fn min_eig(&self) -> f64 {
        self.block_min_eigs
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn qmatrix_to_f64(q: &QMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(q.n_rows(), q.n_cols(), |i, j| rational_to_f64(&q[(i, j)]))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Compresses each block through its exact row basis: block `b` of every
/// family matrix becomes `B_b F B_bᵀ` (computed exactly, then floated).
pub fn compress(space: &SdpSearchSpace, compressors: &[QMatrix]) -> FloatSpace {
    assert_eq!(compressors.len(), space.offset.len());
    let squeeze = |f: &QMatrix, b: &QMatrix| -> DMatrix<f64> {
        let g = b.matmul(&f.matmul(&b.transpose()));
        symmetrize(&qmatrix_to_f64(&g))
    };
    let offset = space
        .offset
        .iter()
        .zip(compressors)
        .map(|(f, b)| squeeze(f, b))
        .collect();
    let basis = space
        .basis
        .iter()
        .map(|dirs| {
            dirs.iter()
                .zip(compressors)
                .map(|(f, b)| squeeze(f, b))
                .collect()
        })
        .collect();
    FloatSpace {
        offset,
        basis,
        compressors: compressors.to_vec(),
    }
}

impl FloatSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.offset.len()
    }

    /// Block `b` of F(y).
    pub fn evaluate_block(&self, b: usize, y: &[f64]) -> DMatrix<f64> {
        let mut m = self.offset[b].clone();
        for (yi, dirs) in y.iter().zip(&self.basis) {
            if *yi != 0.0 {
                m += &dirs[b] * *yi;
            }
        }
        m
    }

    /// Minimum eigenvalue estimate of each block of F(y) (+infinity for
    /// empty blocks).
    pub fn min_eigs(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n_blocks())
            .map(|b| {
                let m = self.evaluate_block(b, y);
                if m.nrows() == 0 {
                    f64::INFINITY
                } else {
                    m.symmetric_eigen()
                        .eigenvalues
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min)
                }
            })
            .collect()
    }
}

/// State shared by one barrier solve: blocks of F(y) − tI must stay positive
/// definite, |y_i| < Y_BOUND, t < t_cap.
struct Barrier<'a> {
    space: &'a FloatSpace,
    t_cap: f64,
}

impl Barrier<'_> {
    /// Cholesky factors of all nonempty blocks of F(y) − tI, or None when the
    /// point is outside the domain.
    fn factor(
        &self,
        y: &[f64],
        t: f64,
    ) -> Option<Vec<Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>>> {
        if t >= self.t_cap || y.iter().any(|v| v.abs() >= Y_BOUND) {
            return None;
        }
        let mut out = Vec::with_capacity(self.space.n_blocks());
        for b in 0..self.space.n_blocks() {
            let m = self.space.evaluate_block(b, y);
            if m.nrows() == 0 {
                out.push(None);
                continue;
            }
            let shifted = &m - DMatrix::identity(m.nrows(), m.nrows()) * t;
            out.push(Some(shifted.cholesky()?));
        }
        Some(out)
    }

    /// Barrier objective to minimize: −t − mu·(log-dets + scalar barriers).
    fn value(&self, y: &[f64], t: f64, mu: f64) -> Option<f64> {
        let chols = self.factor(y, t)?;
        let mut logdet = 0.0;
        for c in chols.iter().flatten() {
            for i in 0..c.l().nrows() {
                logdet += 2.0 * c.l()[(i, i)].ln();
            }
        }
        let mut scalars = (self.t_cap - t).ln();
        for &yi in y {
            scalars += (Y_BOUND - yi).ln() + (Y_BOUND + yi).ln();
        }
        Some(-t - mu * (logdet + scalars))
    }
}

/// Maximizes t with F(y) ⪰ t·I over all blocks, by a log-det barrier method
/// with Newton steps and backtracking. Deterministic: no randomness, fixed
/// schedules. `tol` controls how far the barrier weight is driven down.
pub fn solve_feasibility(
    space: &FloatSpace,
    warm_start: Option<&[f64]>,
    tol: f64,
) -> Result<NumericSolution, SdpError> {
    let m = space.dim();
    let mut y: Vec<f64> = match warm_start {
        Some(w) => {
            assert_eq!(w.len(), m, "warm start length");
            w.iter()
                .map(|v| v.clamp(-0.5 * Y_BOUND, 0.5 * Y_BOUND))
                .collect()
        }
        None => vec![0.0; m],
    };
    let eigs0 = space.min_eigs(&y);
    let lambda0 = eigs0.iter().copied().fold(f64::INFINITY, f64::min);
    if m == 0 || lambda0 == f64::INFINITY {
        // Nothing to optimize: the family is a point (or entirely empty).
        let eigs = space.min_eigs(&y);
        let t = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        return Ok(NumericSolution {
            y,
            block_min_eigs: eigs,
            iterations: 0,
            best_t_history: vec![t],
        });
    }

    let scale = 1.0 + lambda0.abs();
    let t_cap = 1.0 + 2.0 * lambda0.max(0.0);
    let mut t = lambda0 - scale;
    let barrier = Barrier { space, t_cap };

    let mut best_y = y.clone();
    let mut best_t = lambda0;
    let mut history = vec![best_t];
    let mut iterations = 0usize;
    let cap = 500usize;
    let mu_min = (tol * 1e-3).max(1e-12);
    let mut mu = scale;

    while mu > mu_min {
        for _ in 0..MAX_INNER {
            iterations += 1;
            if iterations > cap {
                let block_min_eigs = space.min_eigs(&best_y);
                return Err(SdpError::NonConvergence {
                    iterations: cap,
                    best: NumericSolution {
                        y: best_y,
                        block_min_eigs,
                        iterations: cap,
                        best_t_history: history,
                    },
                });
            }
            let chols = barrier
                .factor(&y, t)
                .expect("iterates stay strictly inside the barrier domain");

            // Assemble whitened direction matrices per block; variable order
            // is (y_1 .. y_m, t) and d/dt of F(y) − tI is −I.
            let flat_len: usize = chols
                .iter()
                .flatten()
                .map(|c| c.l().nrows() * c.l().nrows())
                .sum();
            let mut e = DMatrix::<f64>::zeros(m + 1, flat_len);
            let mut grad = DVector::<f64>::zeros(m + 1);
            let mut col0 = 0usize;
            for (b, chol) in chols.iter().enumerate() {
                let Some(chol) = chol else { continue };
                let s = chol.l().nrows();
                let l = chol.l();
                for a in 0..=m {
                    let dir: DMatrix<f64>;
                    let dref = if a < m {
                        &space.basis[a][b]
                    } else {
                        dir = DMatrix::identity(s, s) * -1.0;
                        &dir
                    };
                    let x = l
                        .solve_lower_triangular(dref)
                        .expect("cholesky factor is nonsingular");
                    let tilde = l
                        .solve_lower_triangular(&x.transpose())
                        .expect("cholesky factor is nonsingular")
                        .transpose();
                    grad[a] -= mu * tilde.trace();
                    for r in 0..s {
                        for c in 0..s {
                            e[(a, col0 + r * s + c)] = tilde[(r, c)];
                        }
                    }
                }
                col0 += s * s;
            }
            // Objective −t and scalar barrier pieces.
            grad[m] -= 1.0;
            grad[m] += mu / (t_cap - t);
            for i in 0..m {
                grad[i] += mu * (1.0 / (Y_BOUND - y[i]) - 1.0 / (Y_BOUND + y[i]));
            }
            let mut h = &e * e.transpose() * mu;
            h[(m, m)] += mu / ((t_cap - t) * (t_cap - t));
            for i in 0..m {
                h[(i, i)] += mu
                    * (1.0 / ((Y_BOUND - y[i]) * (Y_BOUND - y[i]))
                        + 1.0 / ((Y_BOUND + y[i]) * (Y_BOUND + y[i])));
            }

            // Newton direction, with a ridge fallback for near-singular H.
            let mut step: Option<DVector<f64>> = None;
            let mut ridge = 0.0f64;
            for _ in 0..8 {
                let mut hr = h.clone();
                if ridge > 0.0 {
                    for i in 0..=m {
                        hr[(i, i)] += ridge;
                    }
                }
                if let Some(ch) = hr.cholesky() {
                    step = Some(-ch.solve(&grad));
                    break;
                }
                ridge = if ridge == 0.0 {
                    1e-12 * mu
                } else {
                    ridge * 100.0
                };
            }
            let Some(step) = step else { break };

            let decrement = -(grad.dot(&step));
            let phi0 = barrier.value(&y, t, mu).expect("current point is interior");
            let mut alpha = 1.0f64;
            let mut moved = false;
            for _ in 0..MAX_BACKTRACK {
                let y_new: Vec<f64> = y
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v + alpha * step[i])
                    .collect();
                let t_new = t + alpha * step[m];
                if let Some(phi) = barrier.value(&y_new, t_new, mu) {
                    if phi <= phi0 - 1e-4 * alpha * decrement.max(0.0) {
                        y = y_new;
                        t = t_new;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            // Track best true minimum eigenvalue seen so far.
            let lam = space.min_eigs(&y).into_iter().fold(f64::INFINITY, f64::min);
            if lam > best_t {
                best_t = lam;
                best_y = y.clone();
            }
            history.push(best_t);
            if !moved || decrement.abs() < 1e-14 * (1.0 + mu) {
                break;
            }
        }
        mu *= 0.2;
    }

    let block_min_eigs = space.min_eigs(&best_y);
    Ok(NumericSolution {
        y: best_y,
        block_min_eigs,
        iterations,
        best_t_history: history,
    })
}

/// Least-squares projection of the old family's point at `prev_y` onto the
/// new family: returns y′ minimizing the Frobenius distance between
/// new(y′) and old(prev_y). Rank-deficient systems get the minimum-norm
/// solution.
pub fn warm_start_projection(
    prev_y: &[f64],
    old: &SdpSearchSpace,
    new: &SdpSearchSpace,
) -> Vec<f64> {
    assert_eq!(prev_y.len(), old.dim());
    assert_eq!(
        old.blocks.sizes(),
        new.blocks.sizes(),
        "spaces must share shape"
    );
    let m = new.dim();
    if m == 0 {
        return Vec::new();
    }
    let total: usize = new.blocks.sizes().iter().map(|s| s * s).sum();
    let flatten = |blocks: &[DMatrix<f64>]| -> DVector<f64> {
        let mut v = DVector::zeros(total);
        let mut at = 0;
        for b in blocks {
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    v[at] = b[(r, c)];
                    at += 1;
                }
            }
        }
        v
    };
    let float_blocks = |space: &SdpSearchSpace, idx: Option<usize>| -> Vec<DMatrix<f64>> {
        match idx {
            None => space.offset.iter().map(qmatrix_to_f64).collect(),
            Some(i) => space.basis[i].iter().map(qmatrix_to_f64).collect(),
        }
    };
    let mut target_blocks = float_blocks(old, None);
    for (i, &yi) in prev_y.iter().enumerate() {
        for (tb, dir) in target_blocks.iter_mut().zip(float_blocks(old, Some(i))) {
            *tb += dir * yi;
        }
    }
    let rhs = flatten(&target_blocks) - flatten(&float_blocks(new, None));
    let mut a = DMatrix::<f64>::zeros(total, m);
    for i in 0..m {
        a.set_column(i, &flatten(&float_blocks(new, Some(i))));
    }
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .expect("svd solve is unconditional here");
    sol.iter().copied().collect()
}

/// Sparse SDPA (.dat-s) rendering of the feasibility problem. The family is
/// written as −F0 + Σ y_i F_i ⪰ 0 with F0 = −offset; zero entries are
/// omitted, upper triangle only, 1-based indices, zero objective.
pub fn export_sdpa(space: &SdpSearchSpace) -> String {
    let m = space.dim();
    let n_blocks = space.blocks.n_blocks();
    assert!(
        space.blocks.sizes().iter().all(|&s| s > 0),
        "SDPA blocks must be nonempty"
    );
    let mut out = String::new();
    out.push_str(&format!("{}\n{}\n", m, n_blocks));
    let sizes: Vec<String> = space.blocks.sizes().iter().map(|s| s.to_string()).collect();
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let objective: Vec<String> = (0..m).map(|_| "0.0".to_string()).collect();
    out.push_str(&objective.join(" "));
    out.push('\n');
    let mut emit = |matno: usize, blocks: &[QMatrix], negate: bool| {
        for (b, q) in blocks.iter().enumerate() {
            for r in 0..q.n_rows() {
                for c in r..q.n_cols() {
                    let v = rational_to_f64(&q[(r, c)]);
                    let v = if negate { -v } else { v };
                    if v != 0.0 {
                        out.push_str(&format!(
                            "{} {} {} {} {:?}\n",
                            matno,
                            b + 1,
                            r + 1,
                            c + 1,
                            v
                        ));
                    }
                }
            }
        }
    };
    emit(0, &space.offset, true);
    for (i, dirs) in space.basis.iter().enumerate() {
        emit(i + 1, dirs, false);
    }
    out
}

/// Reads an external solver's y vector: whitespace-separated floats, one per
/// family coordinate.
pub fn read_solution_file(path: &Path, expected: usize) -> Result<Vec<f64>, SdpError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SdpError::SolutionFile(format!("{}: {e}", path.display())))?;
    let values: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse::<f64>).collect();
    let values = values.map_err(|e| SdpError::SolutionFile(format!("bad float: {e}")))?;
    if values.len() != expected {
        return Err(SdpError::SolutionFile(format!(
            "expected {expected} values, found {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SdpError::SolutionFile("non-finite value".into()));
    }
    Ok(values)
}

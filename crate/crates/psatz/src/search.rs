//! End-to-end proof search.
//!
//! `find_rational_psd_point` hunts for an exact rational PSD member of an
//! affine family of block matrices: compress each block through an exact row
//! basis, solve the floating feasibility problem (warm-started after the
//! first pass), round the numeric point to rationals, and confirm block-wise
//! with exact Gaussian decomposition. When the family is feasible but has no
//! interior — the case ordinary rounding cannot handle — the numeric point's
//! near-kernel is mined with lattice reduction for exact kernel constraints,
//! the family is restricted, and the loop repeats in lower dimension.
//!
//! `prove_unsat` and `prove_nonneg` wrap that loop with the two reductions:
//! Σ Q_j·P_j + 1 = 0 over sums of squares Q_j refutes {P_j ≥ 0}, and
//! P·Q_1 − Q_2 = 0 with Q_1 ≠ 0 certifies P ≥ 0 as a quotient Q_2/Q_1.
//! Every returned witness has already passed `verify_witness`; there is no
//! unverified output path.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::lattice::{find_kernel_vectors, simplify_solution, KernelParams};
use crate::linalg::{row_span_basis, QMatrix};
use crate::poly::{Polynomial, Rational};
use crate::psd::{gaussian_decompose, psd_precheck_numeric, rational_to_f64, SosDecomposition};
use crate::sdp::{
    compress, export_sdpa, read_solution_file, solve_feasibility, warm_start_projection,
    FloatSpace, NumericSolution, SdpError,
};
use crate::sos::{
    build_search_space, restrict_search_space, select_bases, SdpSearchSpace, SosError, SosProblem,
};
use crate::witness::{
    verify_witness, PartLabel, ProblemStatement, PsatzWitness, SosMultiplier, WitnessKind,
    WitnessPart,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    /// Built-in barrier solver.
    Internal,
    /// Write SDPA files and read `<path>.sol` back; no process is spawned.
    SdpaFile(PathBuf),
}

#[derive(Clone, Debug)]
pub struct Config {
    /// Cap on the total degree of any multiplier product in the search.
    pub max_degree: u32,
    /// Extend unsatisfiability multiplicands with square-free constraint
    /// products when plain constraints fail.
    pub use_products: bool,
    pub solver: SolverChoice,
    /// Run the lattice-based coefficient simplification pass on success.
    pub simplify: bool,
    /// Scale target for lattice kernel extraction.
    pub alpha0: f64,
    /// Kernel candidate acceptance slack on ‖w‖₁.
    pub beta: f64,
    /// Kernel candidate acceptance slack on ‖Gw‖₂.
    pub gamma: f64,
    /// Numeric solver tolerance.
    pub tol: f64,
    /// Wall-clock budget for one prove call.
    pub time_budget: Option<Duration>,
    /// Accepted for reproducibility bookkeeping; the pipeline itself is
    /// deterministic and draws no random numbers.
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_degree: 12,
            use_products: false,
            solver: SolverChoice::Internal,
            simplify: false,
            alpha0: 1e15,
            beta: 10.0,
            gamma: 10.0,
            tol: 1e-9,
            time_budget: None,
            seed: 0,
        }
    }
}

/// First denominator bound for rational rounding; doubles on failure.
const DENOMINATOR_BOUND: u64 = 1_000_000;
/// Rounding attempts per numeric solution.
const ROUNDING_ATTEMPTS: u32 = 3;
/// A converged numeric optimum below this is treated as proof the family has
/// no PSD member at all.
const INFEASIBILITY_THRESHOLD: f64 = -1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    /// No symmetric matrices satisfy the coefficient equations.
    SpaceInfeasible,
    /// The numeric optimum is clearly negative: no PSD member exists.
    NumericallyInfeasible,
    /// Kernel restriction emptied the family.
    RestrictionInfeasible,
    /// Kernel vectors stopped shrinking the family.
    DimensionStalled,
    /// Main loop iteration cap.
    IterationCap,
    /// Numeric solver failed and the exact fallback did not rescue it.
    SolverFailed,
    /// All degree bounds up to the cap were tried.
    DegreesExhausted,
    /// Wall-clock budget exceeded.
    TimeBudget,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let text = match self {
            FailureReason::SpaceInfeasible => "no matrices satisfy the coefficient equations",
            FailureReason::NumericallyInfeasible => "numeric optimum is clearly negative",
            FailureReason::RestrictionInfeasible => "kernel restriction emptied the search space",
            FailureReason::DimensionStalled => "search space dimension stopped decreasing",
            FailureReason::IterationCap => "main loop iteration cap reached",
            FailureReason::SolverFailed => "numeric solver did not converge",
            FailureReason::DegreesExhausted => "all degree bounds exhausted",
            FailureReason::TimeBudget => "time budget exceeded",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Error)]
#[error("search failed: {reason}")]
pub struct Failure {
    pub reason: FailureReason,
    pub diagnostics: Vec<String>,
}

impl Failure {
    fn new(reason: FailureReason, diagnostics: &[String]) -> Self {
        Failure {
            reason,
            diagnostics: diagnostics.to_vec(),
        }
    }
}

/// A successful proof, with the human-readable search log.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub witness: PsatzWitness,
    pub diagnostics: Vec<String>,
}

/// Exact rational PSD point of a search space, with its certification.
#[derive(Clone, Debug)]
pub struct PsdPoint {
    pub y: Vec<Rational>,
    pub blocks: Vec<QMatrix>,
    pub decompositions: Vec<SosDecomposition>,
}

/// Best rational approximation of each coordinate with denominator at most
/// `bound`, via continued-fraction convergents and semiconvergents.
/// Deterministic; non-finite floats round to 0.
pub fn round_to_rational(y: &[f64], bound: &BigInt) -> Vec<Rational> {
    assert!(*bound >= BigInt::one());
    y.iter().map(|&x| best_approximation(x, bound)).collect()
}

fn best_approximation(x: f64, bound: &BigInt) -> Rational {
    let Some(exact) = BigRational::from_float(x) else {
        return Rational::zero();
    };
    if exact.denom() <= bound {
        return exact;
    }
    if exact.is_negative() {
        return -best_approximation(-x, bound);
    }
    // Convergents p/q of the continued fraction of `exact`.
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let mut p = exact.floor().to_integer();
    let mut q = BigInt::one();
    let mut frac = &exact - BigRational::from_integer(p.clone());
    while !frac.is_zero() {
        let inv = frac.recip();
        let a = inv.floor().to_integer();
        frac = &inv - BigRational::from_integer(a.clone());
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        if &q_next > bound {
            // The best approximation is either the last convergent p/q or
            // the largest semiconvergent within the bound.
            let t = (bound - &q_prev) / &q;
            let semi = BigRational::new(&t * &p + &p_prev, &t * &q + &q_prev);
            let conv = BigRational::new(p.clone(), q.clone());
            let d_semi = (&semi - &exact).abs();
            let d_conv = (&conv - &exact).abs();
            return if d_semi < d_conv { semi } else { conv };
        }
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    BigRational::new(p, q)
}

fn check_deadline(deadline: Option<Instant>, log: &[String]) -> Result<(), Failure> {
    if let Some(d) = deadline {
        if Instant::now() >= d {
            return Err(Failure::new(FailureReason::TimeBudget, log));
        }
    }
    Ok(())
}

fn format_eigs(eigs: &[f64]) -> String {
    let inner: Vec<String> = eigs.iter().map(|e| format!("{e:.3e}")).collect();
    format!("[{}]", inner.join(", "))
}

/// One numeric feasibility solve, via the configured backend. Returns the
/// solution and whether the solver actually converged.
fn numeric_solve(
    space: &SdpSearchSpace,
    fspace: &FloatSpace,
    warm: Option<&[f64]>,
    config: &Config,
    exchange_counter: &mut usize,
    log: &mut Vec<String>,
) -> Result<(NumericSolution, bool), Failure> {
    match &config.solver {
        SolverChoice::Internal => match solve_feasibility(fspace, warm, config.tol) {
            Ok(sol) => Ok((sol, true)),
            Err(SdpError::NonConvergence { iterations, best }) => {
                log.push(format!(
                    "numeric solver stopped at iteration cap {iterations}; trying its best point"
                ));
                Ok((best, false))
            }
            Err(e) => {
                log.push(format!("numeric solver error: {e}"));
                Err(Failure::new(FailureReason::SolverFailed, log))
            }
        },
        SolverChoice::SdpaFile(path) => {
            let stage_path = if *exchange_counter == 0 {
                path.clone()
            } else {
                let mut name = path.as_os_str().to_owned();
                name.push(format!(".iter{exchange_counter}"));
                PathBuf::from(name)
            };
            *exchange_counter += 1;
            let text = export_sdpa(space);
            if let Err(e) = std::fs::write(&stage_path, text) {
                log.push(format!("cannot write {}: {e}", stage_path.display()));
                return Err(Failure::new(FailureReason::SolverFailed, log));
            }
            let mut sol_path = stage_path.clone().into_os_string();
            sol_path.push(".sol");
            let sol_path = PathBuf::from(sol_path);
            log.push(format!(
                "wrote {}; reading solution from {}",
                stage_path.display(),
                sol_path.display()
            ));
            match read_solution_file(&sol_path, space.dim()) {
                Ok(y) => {
                    let block_min_eigs = fspace.min_eigs(&y);
                    let t = block_min_eigs.iter().copied().fold(f64::INFINITY, f64::min);
                    Ok((
                        NumericSolution {
                            y,
                            block_min_eigs,
                            iterations: 0,
                            best_t_history: vec![t],
                        },
                        true,
                    ))
                }
                Err(e) => {
                    log.push(format!("external solution unavailable: {e}"));
                    Err(Failure::new(FailureReason::SolverFailed, log))
                }
            }
        }
    }
}

/// Attempts to certify `F(y_rat)` block-wise. On success returns the
/// decompositions; otherwise the indices of blocks that are not PSD.
fn certify_blocks(
    blocks: &[QMatrix],
    compressors: &[QMatrix],
    log: &mut Vec<String>,
) -> Result<Vec<SosDecomposition>, Vec<usize>> {
    let mut decompositions = Vec::with_capacity(blocks.len());
    let mut failing = Vec::new();
    for (b, q) in blocks.iter().enumerate() {
        let advisory = psd_precheck_numeric(q, &compressors[b]);
        match gaussian_decompose(q) {
            Ok(d) => {
                if !advisory {
                    log.push(format!(
                        "block {b}: numeric precheck disagreed with exact PSD (tiny pivots)"
                    ));
                }
                decompositions.push(d);
            }
            Err(_) => failing.push(b),
        }
    }
    if failing.is_empty() {
        Ok(decompositions)
    } else {
        Err(failing)
    }
}

/// Lattice-based post-pass: look for a family member with simpler
/// coordinates near the found point, keeping exact PSD-ness.
fn simplify_point(space: &SdpSearchSpace, point: &mut PsdPoint, log: &mut Vec<String>) {
    if space.dim() == 0 {
        return;
    }
    let flatten = |mats: &[QMatrix]| -> Vec<Rational> {
        mats.iter()
            .flat_map(|q| {
                (0..q.n_rows()).flat_map(move |r| (0..q.n_cols()).map(move |c| q[(r, c)].clone()))
            })
            .collect()
    };
    let f0 = flatten(&space.offset);
    let fs: Vec<Vec<Rational>> = space.basis.iter().map(|dirs| flatten(dirs)).collect();
    let v_target: Vec<f64> = flatten(&point.blocks).iter().map(rational_to_f64).collect();
    let beta = BigInt::from(10u32).pow(19);
    for k in 0..=12u32 {
        let mu = BigInt::from(256u32) * BigInt::from(4u32).pow(k);
        let Some(y) = simplify_solution(&f0, &fs, &v_target, &mu, &beta) else {
            continue;
        };
        let blocks = space.evaluate(&y);
        let mut decs = Vec::with_capacity(blocks.len());
        let mut ok = true;
        for q in &blocks {
            match gaussian_decompose(q) {
                Ok(d) => decs.push(d),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            log.push(format!("simplified coordinates at weight 256*4^{k}"));
            point.y = y;
            point.blocks = blocks;
            point.decompositions = decs;
            return;
        }
    }
    log.push("simplification pass found no simpler PSD point".into());
}

/// Finds an exact rational PSD member of the family, or explains why none
/// was found. See module docs for the loop structure.
pub fn find_rational_psd_point(
    space: &SdpSearchSpace,
    config: &Config,
) -> Result<PsdPoint, Failure> {
    let deadline = config.time_budget.map(|b| Instant::now() + b);
    let mut log = Vec::new();
    let mut counter = 0;
    let point = find_point_inner(space, config, deadline, &mut log, &mut counter)?;
    Ok(point)
}

fn find_point_inner(
    space0: &SdpSearchSpace,
    config: &Config,
    deadline: Option<Instant>,
    log: &mut Vec<String>,
    exchange_counter: &mut usize,
) -> Result<PsdPoint, Failure> {
    let mut space = space0.clone();
    let iteration_cap = space0.dim() + 5;
    let mut warm: Option<Vec<f64>> = None;
    for iteration in 0..=iteration_cap {
        check_deadline(deadline, log)?;
        let compressors: Vec<QMatrix> = (0..space.offset.len())
            .map(|b| {
                row_span_basis(
                    std::iter::once(&space.offset[b])
                        .chain(space.basis.iter().map(|dirs| &dirs[b])),
                )
            })
            .collect();
        let fspace = compress(&space, &compressors);
        let (numeric, converged) = numeric_solve(
            &space,
            &fspace,
            warm.as_deref(),
            config,
            exchange_counter,
            log,
        )?;
        let t = numeric.min_eig();
        log.push(format!(
            "iteration {iteration}: dimension {}, compressed sizes {:?}, numeric optimum {t:.3e}, block min eigs {}",
            space.dim(),
            fspace
                .offset
                .iter()
                .map(nalgebra::DMatrix::nrows)
                .collect::<Vec<_>>(),
            format_eigs(&numeric.block_min_eigs),
        ));
        if converged && t < INFEASIBILITY_THRESHOLD && t.is_finite() {
            return Err(Failure::new(FailureReason::NumericallyInfeasible, log));
        }

        let mut failing: Vec<usize> = Vec::new();
        let mut bound = BigInt::from(DENOMINATOR_BOUND);
        for attempt in 0..ROUNDING_ATTEMPTS {
            check_deadline(deadline, log)?;
            let y_rat = round_to_rational(&numeric.y, &bound);
            let blocks = space.evaluate(&y_rat);
            match certify_blocks(&blocks, &compressors, log) {
                Ok(decompositions) => {
                    log.push(format!(
                        "iteration {iteration}: exact PSD point at denominator bound 1e6*2^{attempt}"
                    ));
                    let mut point = PsdPoint {
                        y: y_rat,
                        blocks,
                        decompositions,
                    };
                    if config.simplify {
                        simplify_point(&space, &mut point, log);
                    }
                    return Ok(point);
                }
                Err(bad) => failing = bad,
            }
            bound *= 2;
        }
        log.push(format!(
            "iteration {iteration}: rounding failed on blocks {failing:?}"
        ));
        if !converged {
            return Err(Failure::new(FailureReason::SolverFailed, log));
        }

        // Mine the numeric point for exact kernel constraints.
        let params = KernelParams {
            alpha0: config.alpha0,
            beta: config.beta,
            gamma: config.gamma,
        };
        let mut kernel_vectors: Vec<(usize, Vec<Rational>)> = Vec::new();
        for &b in &failing {
            let gb = fspace.evaluate_block(b, &numeric.y);
            let g: Vec<Vec<f64>> = (0..gb.nrows())
                .map(|r| (0..gb.ncols()).map(|c| gb[(r, c)]).collect())
                .collect();
            let candidates = find_kernel_vectors(&g, &compressors[b], &params);
            log.push(format!(
                "iteration {iteration}: block {b} yields {} kernel candidate(s)",
                candidates.len()
            ));
            for cand in candidates {
                kernel_vectors.push((b, cand.v));
            }
        }
        if kernel_vectors.is_empty() {
            return Err(Failure::new(FailureReason::DimensionStalled, log));
        }
        let restricted = match restrict_search_space(&space, &kernel_vectors) {
            Ok(s) => s,
            Err(SosError::Infeasible) => {
                return Err(Failure::new(FailureReason::RestrictionInfeasible, log))
            }
            Err(e) => {
                log.push(format!("restriction error: {e}"));
                return Err(Failure::new(FailureReason::RestrictionInfeasible, log));
            }
        };
        if restricted.dim() >= space.dim() {
            return Err(Failure::new(FailureReason::DimensionStalled, log));
        }
        log.push(format!(
            "iteration {iteration}: dimension {} -> {}",
            space.dim(),
            restricted.dim()
        ));
        warm = Some(warm_start_projection(&numeric.y, &space, &restricted));
        space = restricted;
    }
    Err(Failure::new(FailureReason::IterationCap, log))
}

fn even_up(d: u32) -> u32 {
    d + (d & 1)
}

fn subset_name(subset: &[bool]) -> String {
    let names: Vec<String> = subset
        .iter()
        .enumerate()
        .filter(|(_, take)| **take)
        .map(|(i, _)| format!("P{}", i + 1))
        .collect();
    if names.is_empty() {
        "1".to_string()
    } else {
        names.join("*")
    }
}

/// Square-free subsets of {0..n-1} of size ≥ 2, ordered by size then
/// lexicographically by membership mask.
fn product_subsets(n: usize) -> Vec<Vec<bool>> {
    let mut subsets: Vec<Vec<bool>> = (0u32..(1 << n))
        .filter(|mask| mask.count_ones() >= 2)
        .map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect())
        .collect();
    subsets.sort_by_key(|s| {
        (
            s.iter().filter(|t| **t).count(),
            s.iter().map(|t| usize::from(!*t)).collect::<Vec<_>>(),
        )
    });
    subsets
}

/// Searches for sums of squares Q_j with Σ Q_j·T_j + 1 = 0 over the
/// constraint polynomials (and optionally their square-free products),
/// proving {P_i ≥ 0} unsatisfiable. The returned witness is verified.
pub fn prove_unsat(constraints: &[Polynomial], config: &Config) -> Result<Outcome, Failure> {
    assert!(!constraints.is_empty(), "need at least one constraint");
    let vars = constraints[0].vars().to_vec();
    assert!(
        constraints.iter().all(|p| p.vars() == vars),
        "constraints must share one variable list"
    );
    let deadline = config.time_budget.map(|b| Instant::now() + b);
    let mut log = Vec::new();
    let mut exchange_counter = 0;

    let mut labels: Vec<PartLabel> = Vec::new();
    let mut polys: Vec<Polynomial> = Vec::new();
    for i in 0..constraints.len() {
        let mut subset = vec![false; constraints.len()];
        subset[i] = true;
        labels.push(PartLabel::Product(subset));
        polys.push(constraints[i].clone());
    }
    labels.push(PartLabel::Const);
    polys.push(Polynomial::constant(&vars, Rational::one()));
    if config.use_products {
        for subset in product_subsets(constraints.len()) {
            polys.push(crate::witness::product_polynomial(constraints, &subset));
            labels.push(PartLabel::Product(subset));
        }
    }
    let names: Vec<String> = labels
        .iter()
        .map(|l| match l {
            PartLabel::Const => "1".to_string(),
            PartLabel::Product(s) => subset_name(s),
            _ => unreachable!(),
        })
        .collect();
    let target = Polynomial::constant(&vars, -Rational::one());

    let start = even_up(
        polys
            .iter()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(0)
            .max(2),
    );
    let last = start.max(even_up(config.max_degree));
    let mut bound = start;
    while bound <= last {
        check_deadline(deadline, &log)?;
        log.push(format!("degree bound {bound}"));
        match attempt_unsat(
            constraints,
            &labels,
            &names,
            &polys,
            &target,
            bound,
            config,
            deadline,
            &mut log,
            &mut exchange_counter,
        ) {
            Ok(Some(witness)) => {
                return Ok(Outcome {
                    witness,
                    diagnostics: log,
                })
            }
            Ok(None) => {}
            Err(f) => return Err(f),
        }
        bound += 2;
    }
    Err(Failure::new(FailureReason::DegreesExhausted, &log))
}

#[allow(clippy::too_many_arguments)]
fn attempt_unsat(
    constraints: &[Polynomial],
    labels: &[PartLabel],
    names: &[String],
    polys: &[Polynomial],
    target: &Polynomial,
    bound: u32,
    config: &Config,
    deadline: Option<Instant>,
    log: &mut Vec<String>,
    exchange_counter: &mut usize,
) -> Result<Option<PsatzWitness>, Failure> {
    let bases = match select_bases(polys, target, bound, false) {
        Ok(b) => b,
        Err(e) => {
            log.push(format!("bound {bound}: {e}"));
            return Ok(None);
        }
    };
    let problem = match SosProblem::new(
        names.iter().cloned().zip(polys.iter().cloned()).collect(),
        target.clone(),
        bases,
    ) {
        Ok(p) => p,
        Err(e) => {
            log.push(format!("bound {bound}: {e}"));
            return Ok(None);
        }
    };
    let space = match build_search_space(&problem) {
        Ok(s) => s,
        Err(SosError::Infeasible) => {
            log.push(format!("bound {bound}: coefficient system has no solution"));
            return Ok(None);
        }
        Err(e) => {
            log.push(format!("bound {bound}: {e}"));
            return Ok(None);
        }
    };
    match find_point_inner(&space, config, deadline, log, exchange_counter) {
        Ok(point) => {
            let parts: Vec<WitnessPart> = labels
                .iter()
                .zip(polys)
                .zip(space.bases.iter().zip(&point.decompositions))
                .filter(|(_, (_, dec))| !dec.terms.is_empty())
                .map(|((label, poly), (basis, dec))| WitnessPart {
                    label: label.clone(),
                    polynomial: poly.clone(),
                    multiplier: SosMultiplier {
                        basis: basis.clone(),
                        decomposition: dec.clone(),
                    },
                })
                .collect();
            let witness = PsatzWitness {
                kind: WitnessKind::Unsat,
                parts,
            };
            let statement = ProblemStatement::Unsat {
                constraints: constraints.to_vec(),
            };
            assert_eq!(
                verify_witness(&witness, &statement),
                Ok(()),
                "soundness gate: produced witness must verify"
            );
            Ok(Some(witness))
        }
        Err(f) if f.reason == FailureReason::TimeBudget => Err(f),
        Err(f) => {
            log.push(format!("bound {bound}: {}", f.reason));
            Ok(None)
        }
    }
}

/// Certifies P ≥ 0 as a quotient of sums of squares: first tries plain SOS
/// (Q_1 = 1), then escalates multiplier degrees. The returned witness is
/// verified.
pub fn prove_nonneg(p: &Polynomial, config: &Config) -> Result<Outcome, Failure> {
    assert!(!p.is_zero(), "the zero polynomial needs no certificate");
    let vars = p.vars().to_vec();
    let deadline = config.time_budget.map(|b| Instant::now() + b);
    let mut log = Vec::new();
    let mut exchange_counter = 0;
    let statement = ProblemStatement::Nonneg { p: p.clone() };
    let one = Polynomial::constant(&vars, Rational::one());
    let minus_one = Polynomial::constant(&vars, -Rational::one());

    // Plain sum of squares: 1·Q = P over the halved Newton polytope basis.
    log.push("trying plain sum of squares".into());
    'plain: {
        let bases = match select_bases(std::slice::from_ref(&one), p, even_up(p.degree()), false) {
            Ok(b) => b,
            Err(e) => {
                log.push(format!("plain SOS: {e}"));
                break 'plain;
            }
        };
        let problem = SosProblem::new(vec![("1".into(), one.clone())], p.clone(), bases)
            .expect("one multiplicand, nonempty basis");
        let space = match build_search_space(&problem) {
            Ok(s) => s,
            Err(e) => {
                log.push(format!("plain SOS: {e}"));
                break 'plain;
            }
        };
        match find_point_inner(&space, config, deadline, &mut log, &mut exchange_counter) {
            Ok(point) => {
                let witness = PsatzWitness {
                    kind: WitnessKind::Nonneg,
                    parts: vec![
                        WitnessPart {
                            label: PartLabel::Denominator,
                            polynomial: p.clone(),
                            multiplier: constant_one_multiplier(&vars),
                        },
                        WitnessPart {
                            label: PartLabel::Numerator,
                            polynomial: minus_one.clone(),
                            multiplier: SosMultiplier {
                                basis: space.bases[0].clone(),
                                decomposition: point.decompositions[0].clone(),
                            },
                        },
                    ],
                };
                assert_eq!(
                    verify_witness(&witness, &statement),
                    Ok(()),
                    "soundness gate: produced witness must verify"
                );
                return Ok(Outcome {
                    witness,
                    diagnostics: log,
                });
            }
            Err(f) if f.reason == FailureReason::TimeBudget => return Err(f),
            Err(f) => log.push(format!("plain SOS: {}", f.reason)),
        }
    }

    // Quotient escalation: P·Q1 − Q2 = 0 with trace-normalized Q1.
    let mut d1 = 1u32;
    loop {
        let bound = 2 * d1 + p.degree();
        if bound > config.max_degree.max(p.degree() + 2) {
            break;
        }
        check_deadline(deadline, &log)?;
        match quotient_attempt(p, d1, config, deadline, &mut log, &mut exchange_counter) {
            Ok(witness) => {
                return Ok(Outcome {
                    witness,
                    diagnostics: log,
                })
            }
            Err(f) if f.reason == FailureReason::TimeBudget => return Err(f),
            Err(f) => log.push(format!("degree {d1}: {}", f.reason)),
        }
        d1 += 1;
    }
    Err(Failure::new(FailureReason::DegreesExhausted, &log))
}

/// One quotient search at fixed multiplier basis degree `d1`: Q_1 over
/// monomials of degree ≤ d1 (exactly d1 if P is homogeneous), Q_2 matching,
/// P·Q_1 − Q_2 = 0 with trace-normalized Q_1.
pub fn prove_nonneg_quotient(p: &Polynomial, d1: u32, config: &Config) -> Result<Outcome, Failure> {
    let deadline = config.time_budget.map(|b| Instant::now() + b);
    let mut log = Vec::new();
    let mut exchange_counter = 0;
    let witness = quotient_attempt(p, d1, config, deadline, &mut log, &mut exchange_counter)?;
    Ok(Outcome {
        witness,
        diagnostics: log,
    })
}

fn quotient_attempt(
    p: &Polynomial,
    d1: u32,
    config: &Config,
    deadline: Option<Instant>,
    log: &mut Vec<String>,
    exchange_counter: &mut usize,
) -> Result<PsatzWitness, Failure> {
    let vars = p.vars().to_vec();
    let statement = ProblemStatement::Nonneg { p: p.clone() };
    let minus_one = Polynomial::constant(&vars, -Rational::one());
    let homogeneous = p.homogeneous_degree().is_some();
    let bound = 2 * d1 + p.degree();
    log.push(format!(
        "quotient attempt: multiplier degree {d1} (bound {bound})"
    ));
    let multiplicands = [p.clone(), minus_one.clone()];
    let bases = select_bases(&multiplicands, &Polynomial::zero(&vars), bound, homogeneous)
        .map_err(|e| {
            log.push(format!("degree {d1}: {e}"));
            Failure::new(FailureReason::SpaceInfeasible, log)
        })?;
    let problem = SosProblem::new(
        vec![("Q1".into(), p.clone()), ("Q2".into(), minus_one.clone())],
        Polynomial::zero(&vars),
        bases,
    )
    .expect("two multiplicands, nonempty bases")
    .with_unit_trace(0);
    let space = match build_search_space(&problem) {
        Ok(s) => s,
        Err(e) => {
            log.push(format!("degree {d1}: {e}"));
            return Err(Failure::new(FailureReason::SpaceInfeasible, log));
        }
    };
    let point = find_point_inner(&space, config, deadline, log, exchange_counter)?;
    let witness = PsatzWitness {
        kind: WitnessKind::Nonneg,
        parts: vec![
            WitnessPart {
                label: PartLabel::Denominator,
                polynomial: p.clone(),
                multiplier: SosMultiplier {
                    basis: space.bases[0].clone(),
                    decomposition: point.decompositions[0].clone(),
                },
            },
            WitnessPart {
                label: PartLabel::Numerator,
                polynomial: minus_one,
                multiplier: SosMultiplier {
                    basis: space.bases[1].clone(),
                    decomposition: point.decompositions[1].clone(),
                },
            },
        ],
    };
    assert_eq!(
        verify_witness(&witness, &statement),
        Ok(()),
        "soundness gate: produced witness must verify"
    );
    Ok(witness)
}

fn constant_one_multiplier(vars: &[String]) -> SosMultiplier {
    SosMultiplier {
        basis: vec![crate::poly::Monomial::one(vars.len())],
        decomposition: SosDecomposition {
            n: 1,
            terms: vec![(Rational::one(), vec![Rational::one()])],
        },
    }
}

//! Command-line front end: `psatz run` searches for a certificate and
//! writes it; `psatz check` verifies one using only the checker layers.
//!
//! Exit codes — run: 0 certificate found and verified, 1 search exhausted,
//! 2 input error. check: 0 accepted, 1 rejected, 2 unreadable certificate.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use psatz::certificate::{parse_certificate, write_certificate};
use psatz::problem::{parse_problem, Goal};
use psatz::search::{prove_nonneg, prove_unsat, Config, SolverChoice};
use psatz::witness::{verify_witness, WitnessKind};

#[derive(Parser)]
#[command(
    name = "psatz",
    version,
    about = "Exact rational sums-of-squares certificates for polynomial \
             nonnegativity and unsatisfiability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a certificate for a problem file and write it next to the
    /// input (or to --out).
    Run {
        /// Problem file (vars / assume / goal lines).
        file: PathBuf,
        /// Certificate output path; default is the input path + ".cert".
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap on the total degree of any multiplier product.
        #[arg(long, default_value_t = 12)]
        max_degree: u32,
        /// Also try square-free products of constraints as multiplicands.
        #[arg(long)]
        use_products: bool,
        /// `internal`, or `sdpa-file:<path>` to exchange SDPA problem/.sol
        /// files with an external solver instead of solving in-process.
        #[arg(long, default_value = "internal")]
        solver: String,
        /// Run the lattice-based coefficient simplification pass on success.
        #[arg(long)]
        simplify: bool,
        /// Scale target for lattice kernel extraction.
        #[arg(long, default_value_t = 1e15)]
        alpha0: f64,
        /// Acceptance slack on kernel candidate 1-norms.
        #[arg(long, default_value_t = 10.0)]
        beta: f64,
        /// Acceptance slack on kernel candidate residual norms.
        #[arg(long, default_value_t = 10.0)]
        gamma: f64,
        /// Recorded for reproducibility; the search is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Wall-clock budget in seconds for the whole search.
        #[arg(long)]
        time_budget: Option<f64>,
    },
    /// Verify a certificate file. Runs only the parser and the exact
    /// verifier — none of the search machinery.
    Check {
        /// Certificate file produced by run (or written by hand).
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            file,
            out,
            max_degree,
            use_products,
            solver,
            simplify,
            alpha0,
            beta,
            gamma,
            seed,
            time_budget,
        } => {
            let solver = match parse_solver(&solver) {
                Ok(s) => s,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            };
            let config = Config {
                max_degree,
                use_products,
                solver,
                simplify,
                alpha0,
                beta,
                gamma,
                time_budget: time_budget.map(Duration::from_secs_f64),
                seed,
                ..Config::default()
            };
            let out = out.unwrap_or_else(|| {
                let mut name = file.clone().into_os_string();
                name.push(".cert");
                PathBuf::from(name)
            });
            run(&file, &out, &config)
        }
        Command::Check { file } => check(&file),
    }
}

fn parse_solver(text: &str) -> Result<SolverChoice, String> {
    if text == "internal" {
        return Ok(SolverChoice::Internal);
    }
    if let Some(path) = text.strip_prefix("sdpa-file:") {
        if path.is_empty() {
            return Err("sdpa-file: needs a path".into());
        }
        return Ok(SolverChoice::SdpaFile(PathBuf::from(path)));
    }
    Err(format!(
        "unknown solver {text:?} (expected `internal` or `sdpa-file:<path>`)"
    ))
}

fn run(file: &PathBuf, out: &PathBuf, config: &Config) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    let problem = match parse_problem(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    let statement = match problem.statement() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    let result = match &problem.goal {
        Goal::Unsat => prove_unsat(&problem.constraints, config),
        Goal::Nonneg(p) => prove_nonneg(p, config),
    };
    match result {
        Ok(outcome) => {
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            // The searcher already asserted this; keep the explicit gate so
            // no future refactor can sneak an unverified witness to disk.
            if let Err(reject) = verify_witness(&outcome.witness, &statement) {
                eprintln!("internal error: produced witness failed verification: {reject}");
                return ExitCode::from(1);
            }
            let cert = write_certificate(&statement, &outcome.witness);
            if let Err(e) = std::fs::write(out, cert) {
                eprintln!("error: cannot write {}: {e}", out.display());
                return ExitCode::from(2);
            }
            println!("verified certificate written to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(failure) => {
            for line in &failure.diagnostics {
                eprintln!("{line}");
            }
            eprintln!("no certificate found: {}", failure.reason);
            ExitCode::from(1)
        }
    }
}

fn check(file: &PathBuf) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    let (problem, witness) = match parse_certificate(&text) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    match verify_witness(&witness, &problem) {
        Ok(()) => {
            let kind = match witness.kind {
                WitnessKind::Unsat => "unsatisfiability",
                WitnessKind::Nonneg => "nonnegativity",
            };
            println!("certificate accepted: exact {kind} witness");
            ExitCode::SUCCESS
        }
        Err(reject) => {
            eprintln!("certificate rejected: {reject}");
            ExitCode::from(1)
        }
    }
}

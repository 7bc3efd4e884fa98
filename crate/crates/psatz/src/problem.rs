//! Problem files: a line-oriented description of what to prove.
//!
//! ```text
//! # comments and blank lines are ignored
//! vars x y z
//! assume <polynomial> >= 0
//! goal unsat            (or: goal nonneg <polynomial>)
//! ```
//!
//! The `vars` line must precede every polynomial; exactly one `goal` line is
//! required. Errors carry 1-based line numbers.

use thiserror::Error;

use crate::poly::{parse_polynomial, Polynomial};
use crate::witness::ProblemStatement;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goal {
    Unsat,
    Nonneg(Polynomial),
}

/// Parsed problem file: declared variables, `assume` constraints (each the
/// polynomial P in P ≥ 0), and the goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub vars: Vec<String>,
    pub constraints: Vec<Polynomial>,
    pub goal: Goal,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undeclared variable {name}")]
    UndeclaredVariable { line: usize, name: String },
    #[error("no goal line (`goal unsat` or `goal nonneg <polynomial>`)")]
    MissingGoal,
    #[error("goal unsat needs at least one `assume` line")]
    NoConstraints,
}

fn syntax(line: usize, message: impl Into<String>) -> ProblemError {
    ProblemError::Syntax {
        line,
        message: message.into(),
    }
}

/// Distinguishes a malformed polynomial from one that is fine except for an
/// undeclared variable, so the error names the variable.
fn parse_poly_line(text: &str, vars: &[String], line: usize) -> Result<Polynomial, ProblemError> {
    match parse_polynomial(text, vars) {
        Ok(p) => Ok(p),
        Err(e) => {
            // Retry with the offending identifier declared: if that fixes
            // it, report an undeclared variable instead of a syntax error.
            if let Some(name) = e.undeclared_name() {
                return Err(ProblemError::UndeclaredVariable {
                    line,
                    name: name.to_string(),
                });
            }
            Err(syntax(line, format!("cannot parse polynomial: {e}")))
        }
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemError> {
    let mut vars: Option<Vec<String>> = None;
    let mut constraints = Vec::new();
    let mut goal: Option<Goal> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (keyword, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match keyword {
            "vars" => {
                if vars.is_some() {
                    return Err(syntax(line_no, "duplicate vars line"));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(syntax(line_no, "vars line declares no variables"));
                }
                for name in &names {
                    let mut chars = name.chars();
                    let head_ok = chars
                        .next()
                        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
                    if !head_ok || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        return Err(syntax(line_no, format!("bad variable name {name:?}")));
                    }
                }
                let mut sorted = names.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != names.len() {
                    return Err(syntax(line_no, "duplicate variable name"));
                }
                vars = Some(names);
            }
            "assume" => {
                let Some(vars) = vars.as_ref() else {
                    // Without declarations every variable is undeclared;
                    // parse against the empty list to name the first one.
                    let body = rest.trim_end_matches(">= 0").trim_end_matches(">=0").trim();
                    return match parse_poly_line(body, &[], line_no) {
                        Err(e) => Err(e),
                        Ok(_) => Err(syntax(line_no, "assume before vars line")),
                    };
                };
                let Some(body) = rest.strip_suffix("0").map(|s| s.trim_end()) else {
                    return Err(syntax(line_no, "assume line must end with `>= 0`"));
                };
                let Some(body) = body.strip_suffix(">=").map(str::trim) else {
                    return Err(syntax(line_no, "assume line must end with `>= 0`"));
                };
                if body.is_empty() {
                    return Err(syntax(line_no, "assume line has no polynomial"));
                }
                constraints.push(parse_poly_line(body, vars, line_no)?);
            }
            "goal" => {
                if goal.is_some() {
                    return Err(syntax(line_no, "duplicate goal line"));
                }
                if rest == "unsat" {
                    goal = Some(Goal::Unsat);
                } else if let Some(body) = rest.strip_prefix("nonneg") {
                    let body = body.trim();
                    if body.is_empty() {
                        return Err(syntax(line_no, "goal nonneg needs a polynomial"));
                    }
                    let vars = vars.as_deref().unwrap_or(&[]);
                    goal = Some(Goal::Nonneg(parse_poly_line(body, vars, line_no)?));
                } else {
                    return Err(syntax(
                        line_no,
                        "goal must be `unsat` or `nonneg <polynomial>`",
                    ));
                }
            }
            other => {
                return Err(syntax(
                    line_no,
                    format!("unknown directive {other:?} (expected vars, assume, or goal)"),
                ))
            }
        }
    }
    let goal = goal.ok_or(ProblemError::MissingGoal)?;
    if matches!(goal, Goal::Unsat) && constraints.is_empty() {
        return Err(ProblemError::NoConstraints);
    }
    Ok(ProblemFile {
        vars: vars.unwrap_or_default(),
        constraints,
        goal,
    })
}

impl ProblemFile {
    /// The statement the certificate layer verifies against. For a `nonneg`
    /// goal the `assume` lines are not used by the search and are rejected
    /// here to avoid silently ignoring them.
    pub fn statement(&self) -> Result<ProblemStatement, ProblemError> {
        match &self.goal {
            Goal::Unsat => Ok(ProblemStatement::Unsat {
                constraints: self.constraints.clone(),
            }),
            Goal::Nonneg(p) => {
                if self.constraints.is_empty() {
                    Ok(ProblemStatement::Nonneg { p: p.clone() })
                } else {
                    Err(ProblemError::Syntax {
                        line: 0,
                        message: "goal nonneg does not take assume lines".into(),
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_constraint_unsat_file() {
        let text = "vars y\nassume -2 + y^2 >= 0\nassume 1 - y^4 >= 0\ngoal unsat\n";
        let pf = parse_problem(text).unwrap();
        assert_eq!(pf.vars, vec!["y".to_string()]);
        assert_eq!(pf.constraints.len(), 2);
        assert_eq!(pf.goal, Goal::Unsat);
        assert!(matches!(
            pf.statement().unwrap(),
            ProblemStatement::Unsat { .. }
        ));
    }

    #[test]
    fn nonneg_goal_file() {
        let pf = parse_problem("vars x\ngoal nonneg x^2\n").unwrap();
        assert!(matches!(pf.goal, Goal::Nonneg(_)));
        assert!(matches!(
            pf.statement().unwrap(),
            ProblemStatement::Nonneg { .. }
        ));
    }

    #[test]
    fn assume_without_vars_names_the_variable() {
        let err = parse_problem("assume x >= 0\ngoal unsat\n").unwrap_err();
        assert_eq!(
            err,
            ProblemError::UndeclaredVariable {
                line: 1,
                name: "x".into()
            }
        );
        assert!(err.to_string().contains("undeclared variable x"));
    }

    #[test]
    fn undeclared_variable_carries_line_number() {
        let err = parse_problem("vars x\nassume x + w >= 0\ngoal unsat\n").unwrap_err();
        assert_eq!(
            err,
            ProblemError::UndeclaredVariable {
                line: 2,
                name: "w".into()
            }
        );
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# header\n\nvars x  # trailing comment\nassume x >= 0\n\ngoal unsat\n";
        let pf = parse_problem(text).unwrap();
        assert_eq!(pf.constraints.len(), 1);
    }

    #[test]
    fn relation_must_be_ge_zero() {
        let err = parse_problem("vars x\nassume x <= 0\ngoal unsat\n").unwrap_err();
        assert!(matches!(err, ProblemError::Syntax { line: 2, .. }));
    }

    #[test]
    fn missing_goal_rejected() {
        assert_eq!(
            parse_problem("vars x\nassume x >= 0\n").unwrap_err(),
            ProblemError::MissingGoal
        );
    }

    #[test]
    fn unsat_without_constraints_rejected() {
        assert_eq!(
            parse_problem("vars x\ngoal unsat\n").unwrap_err(),
            ProblemError::NoConstraints
        );
    }

    #[test]
    fn unknown_directive_positioned() {
        let err = parse_problem("vars x\nassert x >= 0\ngoal unsat\n").unwrap_err();
        assert!(matches!(err, ProblemError::Syntax { line: 2, .. }));
        assert!(err.to_string().starts_with("line 2:"));
    }

    #[test]
    fn duplicate_goal_and_vars_rejected() {
        assert!(matches!(
            parse_problem("vars x\nvars y\ngoal nonneg x\n").unwrap_err(),
            ProblemError::Syntax { line: 2, .. }
        ));
        assert!(matches!(
            parse_problem("vars x\ngoal nonneg x\ngoal unsat\n").unwrap_err(),
            ProblemError::Syntax { line: 3, .. }
        ));
    }

    #[test]
    fn nonneg_with_assume_lines_rejected_at_statement() {
        let pf = parse_problem("vars x\nassume x >= 0\ngoal nonneg x^2\n").unwrap();
        assert!(pf.statement().is_err());
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_problem("vars  x   y\nassume   x^2+ y >=   0\ngoal unsat\n").unwrap();
        let b = parse_problem("vars x y\nassume x^2 + y >= 0\ngoal unsat\n").unwrap();
        assert_eq!(a, b);
    }
}

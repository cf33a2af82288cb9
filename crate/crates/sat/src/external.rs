//! Escape hatch for running an out-of-process solver.
//!
//! The clause set plus the assumptions (as unit clauses) are written to a
//! DIMACS file whose path is appended to the configured command line. The
//! solver's standard output is parsed for a status line (`s SATISFIABLE`,
//! `s UNSATISFIABLE`, or bare `SAT` / `UNSAT`) and model lines (`v 1 -2 ... 0`,
//! or a bare line of literals after a bare `SAT`). External solvers report no
//! cores, so an unsatisfiable answer names every assumption; callers shrink it
//! with [`SatBackend::minimize_core`].

use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::{Budget, Lit, Model, SatBackend, SolveResult, Var};

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("failed to run external solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("external solver output has no status line")]
    MissingStatus,
    #[error("malformed model literal `{0}`")]
    BadLiteral(String),
}

/// Parsed answer of an external solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExternalAnswer {
    Sat(Vec<i32>),
    Unsat,
    Unknown,
}

/// Parses SAT-competition style or bare `SAT`/`UNSAT` output.
pub fn parse_output(text: &str) -> Result<ExternalAnswer, ExternalError> {
    let mut status = None;
    let mut lits = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match head {
            "s" => {
                status = Some(match rest.trim() {
                    "SATISFIABLE" => ExternalAnswer::Sat(Vec::new()),
                    "UNSATISFIABLE" => ExternalAnswer::Unsat,
                    _ => ExternalAnswer::Unknown,
                })
            }
            "SAT" | "SATISFIABLE" if status.is_none() => status = Some(ExternalAnswer::Sat(Vec::new())),
            "UNSAT" | "UNSATISFIABLE" if status.is_none() => status = Some(ExternalAnswer::Unsat),
            "v" => collect_lits(rest, &mut lits)?,
            "c" | "" => {}
            _ if matches!(status, Some(ExternalAnswer::Sat(_))) => collect_lits(line, &mut lits)?,
            _ => {}
        }
    }
    match status {
        Some(ExternalAnswer::Sat(_)) => Ok(ExternalAnswer::Sat(lits)),
        Some(other) => Ok(other),
        None => Err(ExternalError::MissingStatus),
    }
}

fn collect_lits(text: &str, out: &mut Vec<i32>) -> Result<(), ExternalError> {
    for tok in text.split_whitespace() {
        let v: i32 = tok.parse().map_err(|_| ExternalError::BadLiteral(tok.to_string()))?;
        if v != 0 {
            out.push(v);
        }
    }
    Ok(())
}

static FILE_COUNTER: AtomicU64 = AtomicU64::new(0);

/// A backend that shells out to a DIMACS-reading solver binary.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    program: PathBuf,
    args: Vec<String>,
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    last_error: Option<String>,
}

impl ExternalSolver {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>) -> ExternalSolver {
        ExternalSolver {
            program: program.into(),
            args,
            num_vars: 0,
            clauses: Vec::new(),
            last_error: None,
        }
    }

    /// Error message from the most recent failed run, if any.
    pub fn last_error(&self) -> Option<&str> {
        self.last_error.as_deref()
    }

    fn render(&self, assumptions: &[Lit]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len() + assumptions.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        }
        for a in assumptions {
            let _ = writeln!(out, "{} 0", a.to_dimacs());
        }
        out
    }

    fn run(&self, assumptions: &[Lit], budget: &Budget) -> Result<Option<ExternalAnswer>, ExternalError> {
        let n = FILE_COUNTER.fetch_add(1, Ordering::Relaxed);
        let path = std::env::temp_dir().join(format!("kfix-ext-{}-{n}.cnf", std::process::id()));
        std::fs::write(&path, self.render(assumptions))?;
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(&path)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = thread::spawn(move || {
            let mut buf = String::new();
            stdout.read_to_string(&mut buf).map(|_| buf)
        });
        let timed_out = loop {
            if child.try_wait()?.is_some() {
                break false;
            }
            if budget.deadline.is_some_and(|d| Instant::now() >= d) {
                let _ = child.kill();
                let _ = child.wait();
                break true;
            }
            thread::sleep(Duration::from_millis(2));
        };
        let text = reader.join().unwrap_or_else(|_| Ok(String::new()))?;
        let _ = std::fs::remove_file(&path);
        if timed_out {
            return Ok(None);
        }
        parse_output(&text).map(Some)
    }
}

impl SatBackend for ExternalSolver {
    fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var::new(self.num_vars as u32 - 1)
    }

    fn add_clause(&mut self, clause: &[Lit]) -> bool {
        if let Some(max) = clause.iter().map(|l| l.var().index() + 1).max() {
            self.num_vars = self.num_vars.max(max);
        }
        self.clauses.push(clause.to_vec());
        true
    }

    fn solve(&mut self, assumptions: &[Lit], budget: &Budget) -> SolveResult {
        if let Some(max) = assumptions.iter().map(|l| l.var().index() + 1).max() {
            self.num_vars = self.num_vars.max(max);
        }
        match self.run(assumptions, budget) {
            Ok(Some(ExternalAnswer::Sat(lits))) => {
                self.last_error = None;
                let mut values = vec![false; self.num_vars];
                for l in lits {
                    let idx = l.unsigned_abs() as usize - 1;
                    if idx < values.len() {
                        values[idx] = l > 0;
                    }
                }
                SolveResult::Sat(Model::new(values))
            }
            Ok(Some(ExternalAnswer::Unsat)) => {
                self.last_error = None;
                SolveResult::Unsat(assumptions.to_vec())
            }
            Ok(Some(ExternalAnswer::Unknown)) | Ok(None) => SolveResult::TimedOut,
            Err(e) => {
                self.last_error = Some(e.to_string());
                SolveResult::TimedOut
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_competition_output() {
        let out = "c comment\ns SATISFIABLE\nv 1 -2\nv 3 0\n";
        assert_eq!(parse_output(out).unwrap(), ExternalAnswer::Sat(vec![1, -2, 3]));
        assert_eq!(parse_output("s UNSATISFIABLE\n").unwrap(), ExternalAnswer::Unsat);
    }

    #[test]
    fn parses_bare_output() {
        assert_eq!(parse_output("SAT\n1 -2 0\n").unwrap(), ExternalAnswer::Sat(vec![1, -2]));
        assert_eq!(parse_output("UNSAT\n").unwrap(), ExternalAnswer::Unsat);
        assert!(parse_output("nothing here\n").is_err());
    }
}

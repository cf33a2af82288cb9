//! Incremental CDCL SAT solving with assumption literals.
//!
//! The solver answers queries of the form "is the clause database satisfiable
//! when these literals are additionally forced?". Unsatisfiable answers carry a
//! core: the subset of the supplied assumptions that took part in the final
//! conflict. Cores are not minimal on extraction; [`Solver::minimize_core`]
//! shrinks them by deletion.

mod heap;
mod solver;

pub mod external;

pub use solver::{Solver, SolverStats};

use std::fmt;
use std::ops::Not;
use std::time::{Duration, Instant};

/// A propositional variable. Indices start at 0; DIMACS ids start at 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    pub const fn new(index: u32) -> Var {
        Var(index)
    }

    /// Converts a positive DIMACS variable id.
    ///
    /// # Panics
    ///
    /// If `id` is not positive.
    pub fn from_dimacs(id: i32) -> Var {
        assert!(id > 0, "DIMACS variable ids are positive");
        Var(id as u32 - 1)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn to_dimacs(self) -> i32 {
        self.0 as i32 + 1
    }

    pub const fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    pub const fn neg(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }

    pub const fn lit(self, value: bool) -> Lit {
        if value {
            self.pos()
        } else {
            self.neg()
        }
    }
}

/// A literal: a variable or its negation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    /// Converts a non-zero DIMACS literal.
    ///
    /// # Panics
    ///
    /// If `lit == 0`.
    pub fn from_dimacs(lit: i32) -> Lit {
        assert!(lit != 0, "0 is not a DIMACS literal");
        let var = Var::from_dimacs(lit.abs());
        var.lit(lit > 0)
    }

    pub const fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub const fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub const fn to_dimacs(self) -> i32 {
        let v = self.var().to_dimacs();
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    pub(crate) const fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A total assignment returned with a satisfiable answer.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn new(values: Vec<bool>) -> Model {
        Model { values }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    /// Value of `var`; variables beyond the model default to false.
    pub fn value(&self, var: Var) -> bool {
        self.values.get(var.index()).copied().unwrap_or(false)
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        self.value(lit.var()) != lit.is_negated()
    }

    pub fn satisfies_clause(&self, clause: &[Lit]) -> bool {
        clause.iter().any(|&l| self.lit_value(l))
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.values
    }
}

/// Outcome of a single solve call.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SolveResult {
    Sat(Model),
    /// Subset of the assumptions that is jointly inconsistent with the clauses.
    Unsat(Vec<Lit>),
    TimedOut,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat(_))
    }
}

/// Resource limits for a solve call.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub conflicts: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn with_conflicts(conflicts: u64) -> Budget {
        Budget {
            conflicts: Some(conflicts),
            deadline: None,
        }
    }

    pub fn with_timeout(timeout: Duration) -> Budget {
        Budget {
            conflicts: None,
            deadline: Some(Instant::now() + timeout),
        }
    }

    pub fn until(deadline: Option<Instant>) -> Budget {
        Budget {
            conflicts: None,
            deadline,
        }
    }

    pub(crate) fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Anything that can answer assumption queries over a fixed clause set.
pub trait SatBackend {
    fn num_vars(&self) -> usize;

    fn new_var(&mut self) -> Var;

    /// Adds a permanent clause. Returns false once the database is known to
    /// be unsatisfiable.
    fn add_clause(&mut self, clause: &[Lit]) -> bool;

    fn solve(&mut self, assumptions: &[Lit], budget: &Budget) -> SolveResult;

    /// Deletion-based core minimization: drops each element in turn and keeps
    /// the drop whenever the rest stays unsatisfiable. At most `max_resolves`
    /// solve calls are spent; the best core found so far is returned when the
    /// cap or the budget runs out.
    fn minimize_core(&mut self, core: &[Lit], max_resolves: usize, budget: &Budget) -> Vec<Lit> {
        let mut current: Vec<Lit> = core.to_vec();
        let mut i = 0;
        let mut spent = 0;
        while i < current.len() && current.len() > 1 {
            if spent >= max_resolves || budget.expired() {
                break;
            }
            spent += 1;
            let trial: Vec<Lit> = current
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &l)| l)
                .collect();
            match self.solve(&trial, budget) {
                SolveResult::Unsat(sub) => {
                    // keep the original order, restricted to the new core
                    current = trial.into_iter().filter(|l| sub.contains(l)).collect();
                }
                SolveResult::Sat(_) => i += 1,
                SolveResult::TimedOut => break,
            }
        }
        current
    }
}

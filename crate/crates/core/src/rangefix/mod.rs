//! Conflict resolution: the current configuration becomes soft constraints,
//! desired values become hard units, and minimal diagnoses found by a
//! hitting-set search over unsat cores are turned into concrete fixes.

mod hstree;
pub mod symbolic;

use std::fmt;
use std::time::{Duration, Instant};

use kfix_sat::{Budget, Lit, Model, SatBackend, SolveResult, Solver};
use thiserror::Error;

pub use hstree::{find_diagnoses, Check, Oracle, SearchLimits, SearchOutcome};

use crate::cnf::{model_cnf, CnfFormula};
use crate::eval::{Configuration, SymbolValue};
use crate::kconfig::{LinkedModel, SymId};
use crate::logic::{build_formula_with, Abstraction, AbstractionError, AbstractionOptions};

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_diagnoses: usize,
    pub max_nodes: usize,
    pub timeout: Duration,
    pub max_core_resolves: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_diagnoses: 3,
            max_nodes: 64,
            timeout: Duration::from_secs(30),
            max_core_resolves: 200,
        }
    }
}

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error("desired value {value} is not valid for {symbol}")]
    InvalidTarget { symbol: String, value: String },
    #[error("{0} is listed more than once in the desired changes")]
    DuplicateTarget(String),
    #[error("the desired values cannot be reached by any configuration")]
    Impossible,
    #[error("no fix found within budget")]
    NoFixWithinBudget,
    #[error("{0}")]
    Symbolic(String),
}

/// Desired target values posed against a current configuration.
#[derive(Clone, Debug)]
pub struct Conflict {
    pub desired: Vec<(SymId, SymbolValue)>,
    pub base_config: Configuration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixValue {
    Value(SymbolValue),
    /// Admissible Int/Hex values as inclusive ranges, with the value a
    /// satisfying model picked.
    Range { witness: SymbolValue, ranges: Vec<(i64, i64)> },
}

impl FixValue {
    /// The concrete value written when the fix is applied.
    pub fn value(&self) -> &SymbolValue {
        match self {
            FixValue::Value(v) => v,
            FixValue::Range { witness, .. } => witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixEntry {
    pub symbol: SymId,
    pub name: String,
    pub value: FixValue,
}

impl fmt::Display for FixEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            FixValue::Value(v) => write!(f, "{} := {v}", self.name),
            FixValue::Range { witness, ranges } => {
                write!(f, "{}: {} ∈ {{", self.name, self.name)?;
                let hex = matches!(witness, SymbolValue::Hex(_));
                for (i, (lo, hi)) in ranges.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    let show = |n: i64| if hex { format!("0x{n:X}") } else { n.to_string() };
                    if lo == hi {
                        write!(f, "{}", show(*lo))?;
                    } else {
                        write!(f, "{}..{}", show(*lo), show(*hi))?;
                    }
                }
                write!(f, "}}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fix {
    /// Relaxed symbols, sorted by name.
    pub diagnosis: Vec<String>,
    /// Diagnosis symbols in dependency order, then the desired symbols.
    pub entries: Vec<FixEntry>,
}

impl fmt::Display for Fix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, Default)]
pub struct Resolution {
    pub fixes: Vec<Fix>,
    /// The desired values are reachable without changing anything else.
    pub directly_applicable: bool,
    pub timed_out: bool,
}

/// SAT oracle over soft constraints reified through selector literals.
pub struct SatOracle {
    pub solver: Solver,
    pub selectors: Vec<Lit>,
    pub budget: Budget,
    pub max_core_resolves: usize,
    pub last_model: Option<Model>,
}

impl Oracle for SatOracle {
    fn check(&mut self, active: &[usize]) -> Check {
        let assumptions: Vec<Lit> = active.iter().map(|&i| self.selectors[i]).collect();
        match self.solver.solve(&assumptions, &self.budget) {
            SolveResult::Sat(m) => {
                self.last_model = Some(m);
                Check::Sat
            }
            SolveResult::Unsat(core) => {
                let core = self.solver.minimize_core(&core, self.max_core_resolves, &self.budget);
                let mut idx: Vec<usize> = core.iter().filter_map(|l| self.selectors.iter().position(|s| s == l)).collect();
                idx.sort_unstable();
                Check::Unsat(idx)
            }
            SolveResult::TimedOut => Check::Timeout,
        }
    }
}

/// Selector clauses `[-s, l]` asserting the current value of every
/// non-desired symbol, and hard units for the desired targets. Returns the
/// softs as `(symbol, selector)` pairs in symbol order.
pub fn build_soft_constraints(
    model: &LinkedModel,
    abs: &Abstraction,
    cnf: &mut CnfFormula,
    cfg: &Configuration,
    desired: &[(SymId, SymbolValue)],
) -> Result<Vec<(SymId, i32)>, ResolveError> {
    for (id, v) in desired {
        let lits = abs.vars.value_literals(*id, v).ok_or_else(|| ResolveError::InvalidTarget {
            symbol: model.symbol(*id).name.clone(),
            value: v.to_string(),
        })?;
        for l in lits {
            cnf.add_clause(&[l]);
        }
    }
    let mut softs = Vec::new();
    for id in model.ids() {
        if desired.iter().any(|(d, _)| *d == id) {
            continue;
        }
        let Some(lits) = abs.vars.value_literals(id, cfg.value(id)) else {
            continue;
        };
        let s = cnf.new_aux();
        for l in lits {
            cnf.add_clause(&[-s, l]);
        }
        softs.push((id, s));
    }
    Ok(softs)
}

/// A model with its base abstraction, reused across conflicts whose values
/// all lie in the base value domains.
pub struct Resolver<'m> {
    model: &'m LinkedModel,
    base: (Abstraction, CnfFormula),
    topo: Vec<usize>,
}

impl<'m> Resolver<'m> {
    pub fn new(model: &'m LinkedModel) -> Result<Resolver<'m>, ResolveError> {
        let abs = build_formula_with(model, &AbstractionOptions::default())?;
        let cnf = model_cnf(model, &abs);
        Ok(Resolver {
            model,
            base: (abs, cnf),
            topo: model.topo_rank(),
        })
    }

    pub fn model(&self) -> &LinkedModel {
        self.model
    }

    pub fn abstraction(&self) -> &Abstraction {
        &self.base.0
    }

    /// Non-boolean values that fall outside the base value domains.
    fn missing_values(&self, cfg: &Configuration, desired: &[(SymId, SymbolValue)]) -> Vec<(SymId, SymbolValue)> {
        let abs = &self.base.0;
        let mut out: Vec<(SymId, SymbolValue)> = Vec::new();
        let cur = self.model.ids().map(|id| (id, cfg.value(id).clone()));
        for (id, v) in cur.chain(desired.iter().cloned()) {
            let ty = self.model.symbol(id).ty;
            if ty.is_boolish() || !v.fits(ty) {
                continue;
            }
            if !abs.vars.domain[id.index()].iter().any(|(d, _)| *d == v) && !out.contains(&(id, v.clone())) {
                out.push((id, v));
            }
        }
        out
    }

    pub fn resolve(&self, conflict: &Conflict, limits: &Limits) -> Result<Resolution, ResolveError> {
        self.resolve_conflict(&conflict.base_config, &conflict.desired, limits)
    }

    pub fn resolve_conflict(&self, cfg: &Configuration, desired: &[(SymId, SymbolValue)], limits: &Limits) -> Result<Resolution, ResolveError> {
        for (i, (id, _)) in desired.iter().enumerate() {
            if desired[..i].iter().any(|(d, _)| d == id) {
                return Err(ResolveError::DuplicateTarget(self.model.symbol(*id).name.clone()));
            }
        }
        let extra = self.missing_values(cfg, desired);
        let extended;
        let (abs, base_cnf) = if extra.is_empty() {
            (&self.base.0, &self.base.1)
        } else {
            let abs = build_formula_with(
                self.model,
                &AbstractionOptions {
                    extra_values: extra,
                    ..Default::default()
                },
            )?;
            let cnf = model_cnf(self.model, &abs);
            extended = (abs, cnf);
            (&extended.0, &extended.1)
        };
        let mut cnf = base_cnf.clone();
        let softs = build_soft_constraints(self.model, abs, &mut cnf, cfg, desired)?;
        let deadline = Instant::now() + limits.timeout;
        let mut oracle = SatOracle {
            solver: cnf.solver(),
            selectors: softs.iter().map(|(_, s)| Lit::from_dimacs(*s)).collect(),
            budget: Budget::until(Some(deadline)),
            max_core_resolves: limits.max_core_resolves,
            last_model: None,
        };
        let all: Vec<usize> = (0..softs.len()).collect();
        match oracle.check(&all) {
            Check::Sat => {
                return Ok(Resolution {
                    directly_applicable: true,
                    ..Default::default()
                })
            }
            Check::Timeout => {
                return Ok(Resolution {
                    timed_out: true,
                    ..Default::default()
                })
            }
            Check::Unsat(_) => {}
        }
        let out = find_diagnoses(
            &mut oracle,
            softs.len(),
            SearchLimits {
                max_diagnoses: limits.max_diagnoses,
                max_nodes: limits.max_nodes,
                deadline: Some(deadline),
            },
        );
        if out.impossible {
            return Err(ResolveError::Impossible);
        }
        let name = |i: usize| self.model.symbol(softs[i].0).name.as_str();
        let names = |d: &[usize]| {
            let mut n: Vec<String> = d.iter().map(|&i| name(i).to_string()).collect();
            n.sort_unstable();
            n
        };
        let mut diagnoses = out.diagnoses;
        diagnoses.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| names(a).cmp(&names(b))));
        let mut res = Resolution {
            timed_out: out.timed_out,
            ..Default::default()
        };
        for d in diagnoses {
            if res.fixes.len() >= limits.max_diagnoses {
                break;
            }
            let active: Vec<usize> = all.iter().copied().filter(|i| d.binary_search(i).is_err()).collect();
            if oracle.check(&active) != Check::Sat {
                continue;
            }
            let m = oracle.last_model.clone().expect("model of a satisfiable check");
            let values = abs.vars.decode(self.model, &|v| m.value(kfix_sat::Var::from_dimacs(v as i32)));
            let mut syms: Vec<SymId> = d.iter().map(|&i| softs[i].0).collect();
            syms.sort_by_key(|id| self.topo[id.index()]);
            let mut entries = Vec::new();
            for id in syms {
                let value = if self.model.symbol(id).ty.is_numeric() {
                    self.ranges(abs, &mut oracle, &active, id, &values[id.index()])
                } else {
                    FixValue::Value(values[id.index()].clone())
                };
                entries.push(FixEntry {
                    symbol: id,
                    name: self.model.symbol(id).name.clone(),
                    value,
                });
            }
            for (id, v) in desired {
                entries.push(FixEntry {
                    symbol: *id,
                    name: self.model.symbol(*id).name.clone(),
                    value: FixValue::Value(v.clone()),
                });
            }
            res.fixes.push(Fix { diagnosis: names(&d), entries });
        }
        Ok(res)
    }

    /// Domain values of a numeric diagnosis symbol that keep the remaining
    /// softs satisfiable, merged into runs of consecutive integers.
    fn ranges(&self, abs: &Abstraction, oracle: &mut SatOracle, active: &[usize], id: SymId, witness: &SymbolValue) -> FixValue {
        let base: Vec<Lit> = active.iter().map(|&i| oracle.selectors[i]).collect();
        let mut ok: Vec<i64> = Vec::new();
        for (v, lit) in &abs.vars.domain[id.index()] {
            let Some(n) = v.as_number() else { continue };
            let mut assumptions = base.clone();
            assumptions.push(Lit::from_dimacs(*lit as i32));
            if let SolveResult::Sat(_) = oracle.solver.solve(&assumptions, &oracle.budget) {
                ok.push(n);
            }
        }
        if ok.is_empty() || witness.as_number().is_none() {
            return FixValue::Value(witness.clone());
        }
        ok.sort_unstable();
        ok.dedup();
        let mut ranges: Vec<(i64, i64)> = Vec::new();
        for n in ok {
            match ranges.last_mut() {
                Some((_, hi)) if *hi + 1 == n => *hi = n,
                _ => ranges.push((n, n)),
            }
        }
        FixValue::Range {
            witness: witness.clone(),
            ranges,
        }
    }
}

/// Whether some configuration of the model takes every listed value.
pub fn satisfiable_with(model: &LinkedModel, values: &[(SymId, SymbolValue)]) -> Result<bool, ResolveError> {
    let extra_values = values.iter().filter(|(id, _)| !model.symbol(*id).ty.is_boolish()).cloned().collect();
    let abs = build_formula_with(model, &AbstractionOptions { extra_values, ..AbstractionOptions::default() })?;
    let mut cnf = model_cnf(model, &abs);
    for (id, v) in values {
        let lits = abs.vars.value_literals(*id, v).ok_or_else(|| ResolveError::InvalidTarget {
            symbol: model.symbol(*id).name.clone(),
            value: v.to_string(),
        })?;
        for l in lits {
            cnf.add_clause(&[l]);
        }
    }
    Ok(cnf.solver().solve(&[], &Budget::unlimited()).is_sat())
}

/// One-shot resolution without reusing the abstraction.
pub fn resolve_conflict(model: &LinkedModel, cfg: &Configuration, desired: &[(SymId, SymbolValue)], limits: &Limits) -> Result<Resolution, ResolveError> {
    Resolver::new(model)?.resolve_conflict(cfg, desired, limits)
}


use std::mem;

use crate::heap::VarHeap;
use crate::{Budget, Lit, Model, SatBackend, SolveResult, Var};

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_BASE: u64 = 100;

type CRef = usize;

#[derive(Clone, Debug)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy, Debug)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

/// Counters accumulated over the lifetime of a solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
}

enum SearchOutcome {
    Sat,
    Unsat(Vec<Lit>),
    Restart,
    Budget,
}

/// CDCL solver: two-watched-literal propagation, first-UIP learning, VSIDS
/// branching with a deterministic tie order, phase saving, Luby restarts and
/// MiniSat-style assumptions. No randomness is involved, so identical call
/// sequences give identical answers.
#[derive(Clone, Debug, Default)]
pub struct Solver {
    clauses: Vec<Clause>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    order: VarHeap,
    var_inc: f64,
    cla_inc: f64,
    max_learnts: f64,
    ok: bool,
    stats: SolverStats,
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            var_inc: 1.0,
            cla_inc: 1.0,
            ok: true,
            ..Solver::default()
        }
    }

    /// Builds a session over DIMACS-style clauses.
    pub fn from_dimacs(num_vars: usize, clauses: &[Vec<i32>]) -> Solver {
        let mut s = Solver::new();
        s.reserve_vars(num_vars);
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&l| Lit::from_dimacs(l)).collect();
            s.add_clause(&lits);
        }
        s
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// False once the clause database alone is known unsatisfiable.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| !c.learnt && !c.deleted).count()
    }

    /// Ensures variables `0..n` exist.
    pub fn reserve_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            self.push_var();
        }
    }

    fn push_var(&mut self) -> Var {
        let v = self.assigns.len() as u32;
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.polarity.push(false);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.insert(v, &self.activity);
        Var::new(v)
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let a = self.assigns[l.var().index()];
        if l.is_negated() {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<CRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l.is_negated() { FALSE } else { TRUE };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, cref: CRef) {
        let c = &self.clauses[cref].lits;
        let (a, b) = (c[0], c[1]);
        self.watches[(!a).code()].push(Watcher { cref, blocker: b });
        self.watches[(!b).code()].push(Watcher { cref, blocker: a });
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.polarity[v] = !l.is_negated();
            self.order.insert(v as u32, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = start;
    }

    /// Unit propagation; returns a conflicting clause if one is found.
    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.clauses[w.cref].deleted {
                    continue;
                }
                if self.lit_value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let kept = Watcher {
                    cref,
                    blocker: first,
                };
                if first != w.blocker && self.lit_value(first) == TRUE {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                let len = self.clauses[cref].lits.len();
                for k in 2..len {
                    let lk = self.clauses[cref].lits[k];
                    if self.lit_value(lk) != FALSE {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[(!lk).code()].push(kept);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = kept;
                j += 1;
                if self.lit_value(first) == FALSE {
                    conflict = Some(cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        self.clauses[cref].activity += self.cla_inc;
        if self.clauses[cref].activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit::from_dimacs(1)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level() as u32;
        loop {
            if self.clauses[confl].learnt {
                self.bump_clause(confl);
            }
            let start = usize::from(p.is_some());
            let lits = self.clauses[confl].lits.clone();
            for &q in &lits[start..] {
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = lit.var().index();
            self.seen[v] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[v].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("conflict analysis visits at least one literal");

        // drop literals implied by the rest of the clause
        let marked: Vec<Lit> = learnt[1..].to_vec();
        let mut kept = vec![learnt[0]];
        for &q in &marked {
            let v = q.var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r].lits[1..].iter().all(|&x| {
                    let xv = x.var().index();
                    self.seen[xv] || self.level[xv] == 0
                }),
            };
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &marked {
            self.seen[q.var().index()] = false;
        }
        let mut learnt = kept;

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        (learnt, backjump)
    }

    /// Collects the assumptions responsible for `failed` being false.
    fn analyze_final(&mut self, failed: Lit) -> Vec<Lit> {
        let mut core = vec![failed];
        if self.decision_level() == 0 {
            return core;
        }
        let fv = failed.var().index();
        self.seen[fv] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var().index();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    if lit != failed && !core.contains(&lit) {
                        core.push(lit);
                    }
                }
                Some(r) => {
                    for k in 1..self.clauses[r].lits.len() {
                        let q = self.clauses[r].lits[k].var().index();
                        if self.level[q] > 0 {
                            self.seen[q] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[fv] = false;
        core
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                return Some(Var::new(v).lit(self.polarity[v as usize]));
            }
        }
        None
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<CRef> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| !self.clauses[c].deleted)
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let half = candidates.len() / 2;
        for &c in &candidates[..half] {
            if self.clauses[c].lits.len() > 2 && !self.locked(c) {
                self.clauses[c].deleted = true;
                self.clauses[c].lits = Vec::new();
            }
        }
        self.learnts.retain(|&c| !self.clauses[c].deleted);
    }

    fn locked(&self, cref: CRef) -> bool {
        let first = self.clauses[cref].lits[0];
        self.reason[first.var().index()] == Some(cref) && self.lit_value(first) == TRUE
    }

    fn search(&mut self, max_conflicts: u64, assumptions: &[Lit], budget: &Budget, spent: &mut u64) -> SearchOutcome {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                *spent += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SearchOutcome::Unsat(Vec::new());
                }
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.clauses.len();
                    self.clauses.push(Clause {
                        lits: learnt.clone(),
                        learnt: true,
                        deleted: false,
                        activity: 0.0,
                    });
                    self.learnts.push(cref);
                    self.attach(cref);
                    self.bump_clause(cref);
                    self.enqueue(learnt[0], Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
                if budget.conflicts.is_some_and(|c| *spent >= c) || budget.expired() {
                    return SearchOutcome::Budget;
                }
            } else {
                if conflicts >= max_conflicts {
                    return SearchOutcome::Restart;
                }
                if self.stats.decisions.is_multiple_of(1024) && budget.expired() {
                    return SearchOutcome::Budget;
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let a = assumptions[self.decision_level()];
                    match self.lit_value(a) {
                        TRUE => self.new_decision_level(),
                        FALSE => return SearchOutcome::Unsat(self.analyze_final(a)),
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let lit = match next {
                    Some(l) => l,
                    None => match self.pick_branch() {
                        Some(l) => l,
                        None => return SearchOutcome::Sat,
                    },
                };
                self.stats.decisions += 1;
                self.new_decision_level();
                self.enqueue(lit, None);
            }
        }
    }

    fn extract_model(&self) -> Model {
        Model::new(self.assigns.iter().map(|&a| a == TRUE).collect())
    }

    /// Checks a model against every original clause.
    pub fn check_model(&self, model: &Model) -> bool {
        self.clauses
            .iter()
            .filter(|c| !c.learnt && !c.deleted)
            .all(|c| model.satisfies_clause(&c.lits))
    }
}

/// The Luby sequence 1 1 2 1 1 2 4 1 1 2 ... (0-indexed).
fn luby(mut x: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

impl SatBackend for Solver {
    fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    fn new_var(&mut self) -> Var {
        self.push_var()
    }

    fn add_clause(&mut self, clause: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        if let Some(max) = clause.iter().map(|l| l.var().index()).max() {
            self.reserve_vars(max + 1);
        }
        debug_assert_eq!(self.decision_level(), 0);
        let mut lits: Vec<Lit> = clause.to_vec();
        lits.sort();
        lits.dedup();
        let mut out = Vec::with_capacity(lits.len());
        for (i, &l) in lits.iter().enumerate() {
            if i + 1 < lits.len() && lits[i + 1] == !l {
                return true; // tautology
            }
            match self.lit_value(l) {
                TRUE => return true,
                FALSE => {}
                _ => out.push(l),
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(out[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                let cref = self.clauses.len();
                self.clauses.push(Clause {
                    lits: out,
                    learnt: false,
                    deleted: false,
                    activity: 0.0,
                });
                self.attach(cref);
                true
            }
        }
    }

    fn solve(&mut self, assumptions: &[Lit], budget: &Budget) -> SolveResult {
        self.stats.solves += 1;
        if !self.ok {
            return SolveResult::Unsat(Vec::new());
        }
        if let Some(max) = assumptions.iter().map(|l| l.var().index()).max() {
            self.reserve_vars(max + 1);
        }
        if self.propagate().is_some() {
            self.ok = false;
            return SolveResult::Unsat(Vec::new());
        }
        self.max_learnts = self.max_learnts.max(self.num_clauses() as f64 / 3.0).max(1000.0);
        let mut spent = 0u64;
        let mut restarts = 0u64;
        let result = loop {
            let limit = luby(restarts) * RESTART_BASE;
            match self.search(limit, assumptions, budget, &mut spent) {
                SearchOutcome::Sat => break SolveResult::Sat(self.extract_model()),
                SearchOutcome::Unsat(core) => break SolveResult::Unsat(core),
                SearchOutcome::Budget => break SolveResult::TimedOut,
                SearchOutcome::Restart => {
                    restarts += 1;
                    self.stats.restarts += 1;
                    self.max_learnts *= 1.05;
                    self.cancel_until(0);
                }
            }
        };
        self.cancel_until(0);
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(v: &[i32]) -> Vec<Lit> {
        v.iter().map(|&l| Lit::from_dimacs(l)).collect()
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn empty_database_is_sat() {
        let mut s = Solver::new();
        assert!(s.solve(&[], &Budget::unlimited()).is_sat());
    }

    #[test]
    fn contradictory_units_are_unsat() {
        let mut s = Solver::from_dimacs(1, &[vec![1], vec![-1]]);
        assert_eq!(s.solve(&[], &Budget::unlimited()), SolveResult::Unsat(vec![]));
    }

    #[test]
    fn assumption_forces_propagation() {
        let mut s = Solver::from_dimacs(2, &[vec![1, 2]]);
        match s.solve(&lits(&[-1]), &Budget::unlimited()) {
            SolveResult::Sat(m) => {
                assert!(!m.value(Var::new(0)));
                assert!(m.value(Var::new(1)));
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn failed_assumption_core() {
        let mut s = Solver::from_dimacs(2, &[vec![-1, 2], vec![-2]]);
        match s.solve(&lits(&[1]), &Budget::unlimited()) {
            SolveResult::Unsat(core) => assert_eq!(core, lits(&[1])),
            other => panic!("expected unsat, got {other:?}"),
        }
        // the database itself stays satisfiable
        assert!(s.solve(&[], &Budget::unlimited()).is_sat());
    }

    #[test]
    fn conflict_budget_times_out() {
        // pigeonhole 7 into 6 needs many conflicts
        let (n, clauses) = pigeonhole(7, 6);
        let mut s = Solver::from_dimacs(n, &clauses);
        assert_eq!(s.solve(&[], &Budget::with_conflicts(10)), SolveResult::TimedOut);
    }

    pub(crate) fn pigeonhole(pigeons: usize, holes: usize) -> (usize, Vec<Vec<i32>>) {
        let var = |p: usize, h: usize| (p * holes + h + 1) as i32;
        let mut clauses = Vec::new();
        for p in 0..pigeons {
            clauses.push((0..holes).map(|h| var(p, h)).collect());
        }
        for h in 0..holes {
            for p in 0..pigeons {
                for q in p + 1..pigeons {
                    clauses.push(vec![-var(p, h), -var(q, h)]);
                }
            }
        }
        (pigeons * holes, clauses)
    }
}

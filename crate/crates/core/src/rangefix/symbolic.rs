//! Range fixes over Bool and bounded Int variables with arbitrary constraints.
//!
//! Integers are order-encoded over a bounded window around the constants of
//! the problem, so diagnoses come from the same SAT-backed hitting-set search
//! as Kconfig conflicts. Fixes are built by substituting current values for
//! unchanged variables, folding, extracting Bool units, fixing remaining Bools
//! from a model, splitting by connected variables and merging intervals.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use kfix_sat::{Budget, Lit};

use super::hstree::{find_diagnoses, Check, Oracle, SearchLimits};
use super::{Limits, ResolveError, SatOracle};
use crate::cnf::tseitin;
use crate::kconfig::CmpOp;
use crate::logic::PropFormula;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(i64),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SExpr {
    Bool(bool),
    Var(String),
    Not(Box<SExpr>),
    And(Vec<SExpr>),
    Or(Vec<SExpr>),
    Implies(Box<SExpr>, Box<SExpr>),
    Cmp(CmpOp, Term, Term),
}

impl SExpr {
    pub fn var(v: &str) -> SExpr {
        SExpr::Var(v.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: SExpr) -> SExpr {
        SExpr::Not(Box::new(e))
    }

    pub fn implies(a: SExpr, b: SExpr) -> SExpr {
        SExpr::Implies(Box::new(a), Box::new(b))
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> SExpr {
        SExpr::Cmp(op, a, b)
    }

    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            SExpr::Bool(_) => {}
            SExpr::Var(v) => {
                out.insert(v.clone());
            }
            SExpr::Not(x) => x.vars(out),
            SExpr::And(xs) | SExpr::Or(xs) => xs.iter().for_each(|x| x.vars(out)),
            SExpr::Implies(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            SExpr::Cmp(_, a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            SExpr::Implies(..) => 1,
            SExpr::Or(_) => 2,
            SExpr::And(_) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |f: &mut fmt::Formatter<'_>, e: &SExpr, min: u8| {
            if e.prec() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            SExpr::Bool(b) => write!(f, "{}", if *b { "True" } else { "False" }),
            SExpr::Var(v) => write!(f, "{v}"),
            SExpr::Not(x) => {
                write!(f, "¬")?;
                sub(f, x, 4)
            }
            SExpr::And(xs) | SExpr::Or(xs) => {
                let (sep, p) = if matches!(self, SExpr::And(_)) { (" ∧ ", 3) } else { (" ∨ ", 2) };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    sub(f, x, p + 1)?;
                }
                Ok(())
            }
            SExpr::Implies(a, b) => {
                sub(f, a, 2)?;
                write!(f, " → ")?;
                sub(f, b, 1)
            }
            SExpr::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SValue {
    Bool(bool),
    Int(i64),
}

impl fmt::Display for SValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SValue::Bool(true) => write!(f, "True"),
            SValue::Bool(false) => write!(f, "False"),
            SValue::Int(n) => write!(f, "{n}"),
        }
    }
}

/// Variables with their current values, plus constraints over them.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub vars: Vec<(String, SValue)>,
    pub constraints: Vec<SExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolicEntry {
    Assign(String, SValue),
    /// Residual constraints over the listed variables.
    Constrain(Vec<String>, Vec<SExpr>),
}

impl fmt::Display for SymbolicEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicEntry::Assign(v, x) => write!(f, "{v}:= {x}"),
            SymbolicEntry::Constrain(vars, cs) => {
                if vars.len() == 1 {
                    write!(f, "{}: ", vars[0])?;
                } else {
                    write!(f, "({}): ", vars.join(","))?;
                }
                write!(f, "{}", SExpr::And(cs.clone()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicFix {
    pub diagnosis: Vec<String>,
    pub entries: Vec<SymbolicEntry>,
}

impl fmt::Display for SymbolicFix {
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

fn subst(e: &SExpr, val: &dyn Fn(&str) -> Option<SValue>) -> SExpr {
    let term = |t: &Term| match t {
        Term::Var(v) => match val(v) {
            Some(SValue::Int(n)) => Term::Const(n),
            _ => t.clone(),
        },
        c => c.clone(),
    };
    match e {
        SExpr::Var(v) => match val(v) {
            Some(SValue::Bool(b)) => SExpr::Bool(b),
            _ => e.clone(),
        },
        SExpr::Bool(_) => e.clone(),
        SExpr::Not(x) => SExpr::not(subst(x, val)),
        SExpr::And(xs) => SExpr::And(xs.iter().map(|x| subst(x, val)).collect()),
        SExpr::Or(xs) => SExpr::Or(xs.iter().map(|x| subst(x, val)).collect()),
        SExpr::Implies(a, b) => SExpr::implies(subst(a, val), subst(b, val)),
        SExpr::Cmp(op, a, b) => SExpr::Cmp(*op, term(a), term(b)),
    }
}

/// Constant folding.
pub fn fold(e: &SExpr) -> SExpr {
    match e {
        SExpr::Bool(_) | SExpr::Var(_) => e.clone(),
        SExpr::Not(x) => match fold(x) {
            SExpr::Bool(b) => SExpr::Bool(!b),
            SExpr::Not(y) => *y,
            y => SExpr::not(y),
        },
        SExpr::And(xs) | SExpr::Or(xs) => {
            let conj = matches!(e, SExpr::And(_));
            let mut out = Vec::new();
            for x in xs {
                match fold(x) {
                    SExpr::Bool(b) if b == conj => {}
                    SExpr::Bool(b) => return SExpr::Bool(b),
                    SExpr::And(ys) if conj => out.extend(ys),
                    SExpr::Or(ys) if !conj => out.extend(ys),
                    y => out.push(y),
                }
            }
            match out.len() {
                0 => SExpr::Bool(conj),
                1 => out.pop().unwrap(),
                _ if conj => SExpr::And(out),
                _ => SExpr::Or(out),
            }
        }
        SExpr::Implies(a, b) => match (fold(a), fold(b)) {
            (SExpr::Bool(false), _) | (_, SExpr::Bool(true)) => SExpr::Bool(true),
            (SExpr::Bool(true), y) => y,
            (x, SExpr::Bool(false)) => fold(&SExpr::not(x)),
            (x, y) => SExpr::implies(x, y),
        },
        SExpr::Cmp(op, Term::Const(a), Term::Const(b)) => SExpr::Bool(op.holds(a.cmp(b))),
        SExpr::Cmp(..) => e.clone(),
    }
}

fn conjuncts(e: SExpr, out: &mut Vec<SExpr>) {
    match e {
        SExpr::And(xs) => xs.into_iter().for_each(|x| conjuncts(x, out)),
        SExpr::Bool(true) => {}
        e => out.push(e),
    }
}

/// Order encoding of the problem into SAT.
struct Encoding {
    ints: Vec<Option<(i64, i64)>>,
    /// For Bool variables the variable id; for Int variables the id of `x >= lo + 1`.
    base: Vec<u32>,
    num_vars: u32,
}

impl Encoding {
    fn new(p: &Problem) -> Encoding {
        let mut consts = BTreeSet::new();
        for (_, v) in &p.vars {
            if let SValue::Int(n) = v {
                consts.insert(*n);
            }
        }
        for c in &p.constraints {
            collect_consts(c, &mut consts);
        }
        let nints = p.vars.iter().filter(|(_, v)| matches!(v, SValue::Int(_))).count() as i64;
        let margin = 2 * nints + 2;
        let lo = consts.first().copied().unwrap_or(0) - margin;
        let hi = consts.last().copied().unwrap_or(0) + margin;
        let mut next = 1;
        let mut ints = Vec::new();
        let mut base = Vec::new();
        for (_, v) in &p.vars {
            base.push(next);
            match v {
                SValue::Bool(_) => {
                    ints.push(None);
                    next += 1;
                }
                SValue::Int(_) => {
                    ints.push(Some((lo, hi)));
                    next += (hi - lo) as u32;
                }
            }
        }
        Encoding { ints, base, num_vars: next - 1 }
    }

    /// `x >= k` for Int variable `i`.
    fn ge(&self, i: usize, k: i64) -> PropFormula {
        let (lo, hi) = self.ints[i].unwrap();
        if k <= lo {
            PropFormula::True
        } else if k > hi {
            PropFormula::False
        } else {
            PropFormula::Var(self.base[i] + (k - lo - 1) as u32)
        }
    }

    fn eq(&self, i: usize, k: i64) -> PropFormula {
        PropFormula::and2(self.ge(i, k), PropFormula::not(self.ge(i, k + 1)))
    }

    fn chain(&self) -> Vec<PropFormula> {
        let mut out = Vec::new();
        for (i, r) in self.ints.iter().enumerate() {
            if let Some((lo, hi)) = r {
                for k in (lo + 2)..=*hi {
                    out.push(PropFormula::implies(self.ge(i, k), self.ge(i, k - 1)));
                }
            }
        }
        out
    }

    fn value(&self, i: usize, v: SValue) -> Vec<i32> {
        match v {
            SValue::Bool(b) => vec![if b { self.base[i] as i32 } else { -(self.base[i] as i32) }],
            SValue::Int(n) => {
                let (lo, hi) = self.ints[i].unwrap();
                let n = n.clamp(lo, hi);
                let mut out = Vec::new();
                if n > lo {
                    out.push(self.base[i] as i32 + (n - lo - 1) as i32);
                }
                if n < hi {
                    out.push(-(self.base[i] as i32 + (n - lo) as i32));
                }
                out
            }
        }
    }

    fn decode(&self, i: usize, model: &kfix_sat::Model) -> SValue {
        let var = |id: u32| model.value(kfix_sat::Var::from_dimacs(id as i32));
        match self.ints[i] {
            None => SValue::Bool(var(self.base[i])),
            Some((lo, hi)) => SValue::Int((lo + 1..=hi).take_while(|&k| var(self.base[i] + (k - lo - 1) as u32)).last().unwrap_or(lo)),
        }
    }
}

fn collect_consts(e: &SExpr, out: &mut BTreeSet<i64>) {
    match e {
        SExpr::Not(x) => collect_consts(x, out),
        SExpr::And(xs) | SExpr::Or(xs) => xs.iter().for_each(|x| collect_consts(x, out)),
        SExpr::Implies(a, b) => {
            collect_consts(a, out);
            collect_consts(b, out);
        }
        SExpr::Cmp(_, a, b) => {
            for t in [a, b] {
                if let Term::Const(c) = t {
                    out.insert(*c);
                }
            }
        }
        _ => {}
    }
}

impl Problem {
    fn index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|(v, _)| v == name)
    }

    fn encode(&self, enc: &Encoding, e: &SExpr) -> Result<PropFormula, ResolveError> {
        let unknown = |v: &str| ResolveError::Symbolic(format!("unknown variable `{v}`"));
        Ok(match e {
            SExpr::Bool(b) => PropFormula::constant(*b),
            SExpr::Var(v) => {
                let i = self.index(v).ok_or_else(|| unknown(v))?;
                if enc.ints[i].is_some() {
                    return Err(ResolveError::Symbolic(format!("`{v}` is an Int variable used as a Bool")));
                }
                PropFormula::Var(enc.base[i])
            }
            SExpr::Not(x) => PropFormula::not(self.encode(enc, x)?),
            SExpr::And(xs) => PropFormula::and(xs.iter().map(|x| self.encode(enc, x)).collect::<Result<Vec<_>, _>>()?),
            SExpr::Or(xs) => PropFormula::or(xs.iter().map(|x| self.encode(enc, x)).collect::<Result<Vec<_>, _>>()?),
            SExpr::Implies(a, b) => PropFormula::implies(self.encode(enc, a)?, self.encode(enc, b)?),
            SExpr::Cmp(op, a, b) => {
                let side = |t: &Term| -> Result<Result<usize, i64>, ResolveError> {
                    match t {
                        Term::Const(c) => Ok(Err(*c)),
                        Term::Var(v) => {
                            let i = self.index(v).ok_or_else(|| unknown(v))?;
                            if enc.ints[i].is_none() {
                                return Err(ResolveError::Symbolic(format!("`{v}` is a Bool variable used as an Int")));
                            }
                            Ok(Ok(i))
                        }
                    }
                };
                let values = |s: &Result<usize, i64>| -> Vec<(i64, PropFormula)> {
                    match s {
                        Err(c) => vec![(*c, PropFormula::True)],
                        Ok(i) => {
                            let (lo, hi) = enc.ints[*i].unwrap();
                            (lo..=hi).map(|k| (k, enc.eq(*i, k))).collect()
                        }
                    }
                };
                let (l, r) = (values(&side(a)?), values(&side(b)?));
                let mut terms = Vec::new();
                for (x, fx) in &l {
                    for (y, fy) in &r {
                        if op.holds(x.cmp(y)) {
                            terms.push(PropFormula::and2(fx.clone(), fy.clone()));
                        }
                    }
                }
                PropFormula::or(terms)
            }
        })
    }

    /// Values under which every constraint holds.
    pub fn holds(&self, values: &[SValue]) -> bool {
        let val = |v: &str| self.index(v).map(|i| values[i]);
        self.constraints.iter().all(|c| fold(&subst(c, &val)) == SExpr::Bool(true))
    }

    /// Diagnoses and fixes, at most `limits.max_diagnoses`, ordered by size then names.
    pub fn resolve(&self, limits: &Limits) -> Result<Vec<SymbolicFix>, ResolveError> {
        let enc = Encoding::new(self);
        let mut hard = enc.chain();
        for c in &self.constraints {
            hard.push(self.encode(&enc, c)?);
        }
        let mut cnf = tseitin(&PropFormula::and(hard), enc.num_vars as usize);
        let mut selectors = Vec::new();
        for (i, (_, v)) in self.vars.iter().enumerate() {
            let s = cnf.new_aux();
            for l in enc.value(i, *v) {
                cnf.add_clause(&[-s, l]);
            }
            selectors.push(Lit::from_dimacs(s));
        }
        let deadline = Instant::now() + limits.timeout;
        let mut oracle = SatOracle {
            solver: cnf.solver(),
            selectors,
            budget: Budget::until(Some(deadline)),
            max_core_resolves: limits.max_core_resolves,
            last_model: None,
        };
        let all: Vec<usize> = (0..self.vars.len()).collect();
        if oracle.check(&all) == Check::Sat {
            return Ok(Vec::new());
        }
        let out = find_diagnoses(
            &mut oracle,
            self.vars.len(),
            SearchLimits {
                max_diagnoses: limits.max_diagnoses,
                max_nodes: limits.max_nodes,
                deadline: Some(deadline),
            },
        );
        if out.impossible {
            return Err(ResolveError::Impossible);
        }
        let mut diagnoses: Vec<Vec<usize>> = out.diagnoses;
        let names = |d: &Vec<usize>| {
            let mut n: Vec<&str> = d.iter().map(|&i| self.vars[i].0.as_str()).collect();
            n.sort_unstable();
            n.into_iter().map(String::from).collect::<Vec<_>>()
        };
        diagnoses.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| names(a).cmp(&names(b))));
        diagnoses.truncate(limits.max_diagnoses);
        let mut fixes = Vec::new();
        for d in diagnoses {
            let active: Vec<usize> = all.iter().copied().filter(|i| !d.contains(i)).collect();
            if oracle.check(&active) != Check::Sat {
                continue;
            }
            let model = oracle.last_model.clone().expect("model of a satisfiable check");
            let witness: Vec<SValue> = (0..self.vars.len()).map(|i| enc.decode(i, &model)).collect();
            fixes.push(SymbolicFix {
                diagnosis: names(&d),
                entries: self.simplify_fix(&d, &witness),
            });
        }
        if fixes.is_empty() && out.timed_out {
            return Err(ResolveError::NoFixWithinBudget);
        }
        Ok(fixes)
    }

    /// Stages 2 and 3 for one diagnosis; `witness` is a satisfying assignment.
    fn simplify_fix(&self, d: &[usize], witness: &[SValue]) -> Vec<SymbolicEntry> {
        let mut fixed: Vec<Option<SValue>> = (0..self.vars.len()).map(|i| if d.contains(&i) { None } else { Some(self.vars[i].1) }).collect();
        let mut entries = Vec::new();
        let residual = |fixed: &Vec<Option<SValue>>| -> Vec<SExpr> {
            let val = |v: &str| self.index(v).and_then(|i| fixed[i]);
            let mut out = Vec::new();
            for c in &self.constraints {
                conjuncts(fold(&subst(c, &val)), &mut out);
            }
            out
        };
        // unit extraction, then remaining Bools from the witness
        let mut assigned: Vec<usize> = Vec::new();
        loop {
            let res = residual(&fixed);
            let unit = res.iter().find_map(|c| match c {
                SExpr::Var(v) => Some((v.clone(), true)),
                SExpr::Not(x) => match &**x {
                    SExpr::Var(v) => Some((v.clone(), false)),
                    _ => None,
                },
                _ => None,
            });
            match unit {
                Some((v, b)) => {
                    let i = self.index(&v).unwrap();
                    fixed[i] = Some(SValue::Bool(b));
                    assigned.push(i);
                }
                None => break,
            }
        }
        for &i in d {
            if fixed[i].is_none() && matches!(self.vars[i].1, SValue::Bool(_)) {
                fixed[i] = Some(witness[i]);
                assigned.push(i);
            }
        }
        assigned.sort_unstable();
        for i in assigned {
            entries.push(SymbolicEntry::Assign(self.vars[i].0.clone(), fixed[i].unwrap()));
        }
        // connected components over the remaining variables
        let res: Vec<SExpr> = residual(&fixed).into_iter().filter(|c| *c != SExpr::Bool(true)).collect();
        let var_sets: Vec<BTreeSet<String>> = res
            .iter()
            .map(|c| {
                let mut s = BTreeSet::new();
                c.vars(&mut s);
                s
            })
            .collect();
        let mut comp: Vec<usize> = (0..res.len()).collect();
        fn root(comp: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while comp[r] != r {
                r = comp[r];
            }
            comp[i] = r;
            r
        }
        for i in 0..res.len() {
            for j in (i + 1)..res.len() {
                if !var_sets[i].is_disjoint(&var_sets[j]) {
                    let (a, b) = (root(&mut comp, i), root(&mut comp, j));
                    comp[b.max(a)] = a.min(b);
                }
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in 0..res.len() {
            let r = root(&mut comp, i);
            match groups.iter_mut().find(|(g, _)| *g == r) {
                Some((_, v)) => v.push(i),
                None => groups.push((r, vec![i])),
            }
        }
        let mut covered = BTreeSet::new();
        let mut comps: Vec<(usize, SymbolicEntry)> = Vec::new();
        for (_, members) in groups {
            let mut vars = BTreeSet::new();
            for &m in &members {
                vars.extend(var_sets[m].iter().cloned());
            }
            covered.extend(vars.iter().cloned());
            let mut ordered: Vec<String> = vars.into_iter().collect();
            ordered.sort_by_key(|v| self.index(v));
            let first = self.index(&ordered[0]).unwrap_or(0);
            let cs = merge_intervals(members.iter().map(|&m| res[m].clone()).collect());
            comps.push((first, SymbolicEntry::Constrain(ordered, cs)));
        }
        comps.sort_by_key(|(k, _)| *k);
        entries.extend(comps.into_iter().map(|(_, e)| e));
        for &i in d {
            if fixed[i].is_none() && !covered.contains(&self.vars[i].0) {
                entries.push(SymbolicEntry::Assign(self.vars[i].0.clone(), witness[i]));
            }
        }
        entries
    }
}

/// Variable, tightest lower bound, tightest upper bound, first position.
type VarBounds = (String, Option<(i64, SExpr)>, Option<(i64, SExpr)>, usize);

/// Replaces several bounds on the same variable by the tightest lower and
/// upper bound, each kept at the position of the first bound on that variable.
fn merge_intervals(cs: Vec<SExpr>) -> Vec<SExpr> {
    // normalized unary bound: (var, inclusive lower, inclusive upper)
    let bound = |c: &SExpr| -> Option<(String, Option<i64>, Option<i64>)> {
        let SExpr::Cmp(op, a, b) = c else { return None };
        let (v, k, op) = match (a, b) {
            (Term::Var(v), Term::Const(k)) => (v.clone(), *k, *op),
            (Term::Const(k), Term::Var(v)) => (v.clone(), *k, flip(*op)),
            _ => return None,
        };
        match op {
            CmpOp::Gt => Some((v, Some(k + 1), None)),
            CmpOp::Geq => Some((v, Some(k), None)),
            CmpOp::Lt => Some((v, None, Some(k - 1))),
            CmpOp::Leq => Some((v, None, Some(k))),
            _ => None,
        }
    };
    let mut out: Vec<SExpr> = Vec::new();
    let mut best: Vec<VarBounds> = Vec::new();
    for c in cs {
        match bound(&c) {
            Some((v, lo, hi)) => {
                let idx = match best.iter().position(|(x, ..)| *x == v) {
                    Some(i) => i,
                    None => {
                        out.push(SExpr::Bool(true));
                        best.push((v, None, None, out.len() - 1));
                        best.len() - 1
                    }
                };
                if let Some(l) = lo {
                    if best[idx].1.as_ref().is_none_or(|(cur, _)| l > *cur) {
                        best[idx].1 = Some((l, c.clone()));
                    }
                }
                if let Some(h) = hi {
                    if best[idx].2.as_ref().is_none_or(|(cur, _)| h < *cur) {
                        best[idx].2 = Some((h, c.clone()));
                    }
                }
            }
            None => out.push(c),
        }
    }
    for (_, lo, hi, pos) in best {
        let parts: Vec<SExpr> = lo.into_iter().chain(hi).map(|(_, c)| c).collect();
        out[pos] = if parts.len() == 1 { parts.into_iter().next().unwrap() } else { SExpr::And(parts) };
    }
    let mut flat = Vec::new();
    for c in out {
        conjuncts(c, &mut flat);
    }
    flat
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Leq => CmpOp::Geq,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Geq => CmpOp::Leq,
        o => o,
    }
}

/// The three-variable instance `(m → a > 10) ∧ (¬m → b > 10) ∧ (a < b)` with
/// current values `m = True, a = 6, b = 5`.
pub fn mab_example() -> Problem {
    let v = |s: &str| Term::Var(s.into());
    Problem {
        vars: vec![("m".into(), SValue::Bool(true)), ("a".into(), SValue::Int(6)), ("b".into(), SValue::Int(5))],
        constraints: vec![
            SExpr::implies(SExpr::var("m"), SExpr::cmp(CmpOp::Gt, v("a"), Term::Const(10))),
            SExpr::implies(SExpr::not(SExpr::var("m")), SExpr::cmp(CmpOp::Gt, v("b"), Term::Const(10))),
            SExpr::cmp(CmpOp::Lt, v("a"), v("b")),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mab_fixes() {
        let fixes = mab_example().resolve(&Limits::default()).unwrap();
        let shown: Vec<String> = fixes.iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, vec!["[(a,b): a > 10 ∧ a < b]", "[m:= False, b: b > 10]"]);
        assert_eq!(fixes[0].diagnosis, vec!["a", "b"]);
        assert_eq!(fixes[1].diagnosis, vec!["b", "m"]);
    }

    #[test]
    fn satisfied_problem_needs_no_fix() {
        let mut p = mab_example();
        p.vars[1].1 = SValue::Int(11);
        p.vars[2].1 = SValue::Int(12);
        assert!(p.holds(&[SValue::Bool(true), SValue::Int(11), SValue::Int(12)]));
        assert!(p.resolve(&Limits::default()).unwrap().is_empty());
    }

    #[test]
    fn interval_merge_keeps_tightest_bound() {
        let v = || Term::Var("b".into());
        let merged = merge_intervals(vec![SExpr::cmp(CmpOp::Gt, v(), Term::Const(6)), SExpr::cmp(CmpOp::Gt, v(), Term::Const(10))]);
        assert_eq!(merged, vec![SExpr::cmp(CmpOp::Gt, v(), Term::Const(10))]);
    }
}

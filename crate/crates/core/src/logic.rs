//! Propositional abstraction of a linked model.
//!
//! Bool symbols get one variable `S_yes`; Tristate symbols get `S_yes` and
//! `S_mod`, never both true. Expressions lift to a pair `(ge_m, eq_y)` of
//! formulas. Non-Boolean symbols are abstracted over a finite domain of known
//! values with one indicator variable per value.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::eval::SymbolValue;
use crate::kconfig::{ChoiceId, CmpOp, LExpr, LinkedModel, SymId, SymbolType};
use crate::tristate::{Mod, No, Tristate, Yes};

/// 1-based propositional variable id.
pub type VarId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropFormula {
    True,
    False,
    Var(VarId),
    Not(Box<PropFormula>),
    And(Vec<PropFormula>),
    Or(Vec<PropFormula>),
    Implies(Box<PropFormula>, Box<PropFormula>),
    Iff(Box<PropFormula>, Box<PropFormula>),
}

use PropFormula as F;

impl PropFormula {
    pub fn constant(b: bool) -> F {
        if b {
            F::True
        } else {
            F::False
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: F) -> F {
        match f {
            F::True => F::False,
            F::False => F::True,
            F::Not(x) => *x,
            f => F::Not(Box::new(f)),
        }
    }

    pub fn and(items: impl IntoIterator<Item = F>) -> F {
        let mut out = Vec::new();
        for f in items {
            match f {
                F::True => {}
                F::False => return F::False,
                F::And(xs) => out.extend(xs),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => F::True,
            1 => out.pop().unwrap(),
            _ => F::And(out),
        }
    }

    pub fn or(items: impl IntoIterator<Item = F>) -> F {
        let mut out = Vec::new();
        for f in items {
            match f {
                F::False => {}
                F::True => return F::True,
                F::Or(xs) => out.extend(xs),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => F::False,
            1 => out.pop().unwrap(),
            _ => F::Or(out),
        }
    }

    pub fn and2(a: F, b: F) -> F {
        F::and([a, b])
    }

    pub fn or2(a: F, b: F) -> F {
        F::or([a, b])
    }

    pub fn implies(a: F, b: F) -> F {
        match (a, b) {
            (F::False, _) | (_, F::True) => F::True,
            (F::True, b) => b,
            (a, F::False) => F::not(a),
            (a, b) => F::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn iff(a: F, b: F) -> F {
        match (a, b) {
            (F::True, x) | (x, F::True) => x,
            (F::False, x) | (x, F::False) => F::not(x),
            (a, b) if a == b => F::True,
            (a, b) => F::Iff(Box::new(a), Box::new(b)),
        }
    }

    pub fn eval(&self, assign: &dyn Fn(VarId) -> bool) -> bool {
        match self {
            F::True => true,
            F::False => false,
            F::Var(v) => assign(*v),
            F::Not(x) => !x.eval(assign),
            F::And(xs) => xs.iter().all(|x| x.eval(assign)),
            F::Or(xs) => xs.iter().any(|x| x.eval(assign)),
            F::Implies(a, b) => !a.eval(assign) || b.eval(assign),
            F::Iff(a, b) => a.eval(assign) == b.eval(assign),
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            F::True | F::False => {}
            F::Var(v) => {
                out.insert(*v);
            }
            F::Not(x) => x.vars(out),
            F::And(xs) | F::Or(xs) => xs.iter().for_each(|x| x.vars(out)),
            F::Implies(a, b) | F::Iff(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            F::True | F::False | F::Var(_) => 1,
            F::Not(x) => 1 + x.size(),
            F::And(xs) | F::Or(xs) => 1 + xs.iter().map(F::size).sum::<usize>(),
            F::Implies(a, b) | F::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, xs: &[F], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            F::True => write!(f, "T"),
            F::False => write!(f, "F"),
            F::Var(v) => write!(f, "x{v}"),
            F::Not(x) => write!(f, "!{x}"),
            F::And(xs) => list(f, xs, "&"),
            F::Or(xs) => list(f, xs, "|"),
            F::Implies(a, b) => write!(f, "({a} -> {b})"),
            F::Iff(a, b) => write!(f, "({a} <-> {b})"),
        }
    }
}

/// What a propositional variable stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VarMeaning {
    SymYes(SymId),
    SymMod(SymId),
    SelectedYes(SymId),
    SelectedMod(SymId),
    NonBoolEquals(SymId, SymbolValue),
    Aux(String),
}

impl VarMeaning {
    /// DIMACS comment role, e.g. `SYM_Y` or `NB_EQ(4)`.
    pub fn role(&self) -> String {
        match self {
            VarMeaning::SymYes(_) => "SYM_Y".into(),
            VarMeaning::SymMod(_) => "SYM_M".into(),
            VarMeaning::SelectedYes(_) => "SEL_Y".into(),
            VarMeaning::SelectedMod(_) => "SEL_M".into(),
            VarMeaning::NonBoolEquals(_, v) => format!("NB_EQ({v})"),
            VarMeaning::Aux(_) => "AUX".into(),
        }
    }

    pub fn symbol(&self) -> Option<SymId> {
        match self {
            VarMeaning::SymYes(s)
            | VarMeaning::SymMod(s)
            | VarMeaning::SelectedYes(s)
            | VarMeaning::SelectedMod(s)
            | VarMeaning::NonBoolEquals(s, _) => Some(*s),
            VarMeaning::Aux(_) => None,
        }
    }
}

/// Variable allocation and the symbol-to-variable mapping.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarMap {
    /// Meaning of variable `i + 1`.
    pub meanings: Vec<VarMeaning>,
    pub yes: Vec<Option<VarId>>,
    pub module: Vec<Option<VarId>>,
    pub sel_yes: Vec<Option<VarId>>,
    pub sel_mod: Vec<Option<VarId>>,
    /// Indicator variables of non-Boolean symbols, in domain order.
    pub domain: Vec<Vec<(SymbolValue, VarId)>>,
}

impl VarMap {
    pub fn num_vars(&self) -> usize {
        self.meanings.len()
    }

    pub fn fresh(&mut self, meaning: VarMeaning) -> VarId {
        self.meanings.push(meaning);
        self.meanings.len() as VarId
    }

    pub fn meaning(&self, v: VarId) -> &VarMeaning {
        &self.meanings[v as usize - 1]
    }

    /// Literals (signed DIMACS style) that pin `id` to `value`, or `None` when
    /// the value lies outside the abstraction.
    pub fn value_literals(&self, id: SymId, value: &SymbolValue) -> Option<Vec<i32>> {
        let i = id.index();
        if let Some(y) = self.yes[i] {
            let t = match value {
                SymbolValue::Tri(t) => *t,
                _ => return None,
            };
            let mut out = vec![if t == Yes { y as i32 } else { -(y as i32) }];
            match self.module[i] {
                Some(m) => out.push(if t == Mod { m as i32 } else { -(m as i32) }),
                None if t == Mod => return None,
                None => {}
            }
            return Some(out);
        }
        self.domain[i].iter().find(|(d, _)| same_value(d, value)).map(|(_, v)| vec![*v as i32])
    }

    /// Reads symbol values back from an assignment of the variables.
    pub fn decode(&self, model: &LinkedModel, assign: &dyn Fn(VarId) -> bool) -> Vec<SymbolValue> {
        model
            .ids()
            .map(|id| {
                let i = id.index();
                if let Some(y) = self.yes[i] {
                    let t = if assign(y) {
                        Yes
                    } else if self.module[i].is_some_and(assign) {
                        Mod
                    } else {
                        No
                    };
                    SymbolValue::Tri(t)
                } else {
                    let ty = model.symbol(id).ty;
                    self.domain[i].iter().find(|(_, v)| assign(*v)).map(|(d, _)| d.clone()).unwrap_or_else(|| SymbolValue::empty(ty))
                }
            })
            .collect()
    }

    /// `(ge_m, eq_y)` of a Bool/Tristate symbol.
    pub fn pair(&self, id: SymId) -> (F, F) {
        let y = F::Var(self.yes[id.index()].expect("boolean symbol"));
        match self.module[id.index()] {
            Some(m) => (F::or2(y.clone(), F::Var(m)), y),
            None => (y.clone(), y),
        }
    }

    fn mod_var(&self, id: SymId) -> F {
        self.module[id.index()].map(F::Var).unwrap_or(F::False)
    }

    fn indicator(&self, id: SymId, value: &SymbolValue) -> F {
        self.domain[id.index()].iter().find(|(d, _)| same_value(d, value)).map(|(_, v)| F::Var(*v)).unwrap_or(F::False)
    }
}

fn same_value(a: &SymbolValue, b: &SymbolValue) -> bool {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AbstractionError {
    #[error("abstraction gap: {0}")]
    Gap(String),
}

/// How select statements are lowered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SelectEncoding {
    /// One implication per select statement plus a reverse closure.
    #[default]
    Split,
    /// One equivalence per selected symbol.
    Monolithic,
}

#[derive(Clone, Debug, Default)]
pub struct AbstractionOptions {
    pub selects: SelectEncoding,
    /// Additional domain values per symbol (e.g. values of a current
    /// configuration), appended after the known values.
    pub extra_values: Vec<(SymId, SymbolValue)>,
}

/// One hard constraint with the symbol it was generated for.
#[derive(Clone, Debug)]
pub struct HardConstraint {
    pub origin: Option<SymId>,
    pub formula: PropFormula,
}

#[derive(Clone, Debug)]
pub struct Abstraction {
    pub vars: VarMap,
    pub constraints: Vec<HardConstraint>,
    /// Statements that generate no clauses, disclosed in DIMACS comments.
    pub notes: Vec<String>,
}

impl Abstraction {
    pub fn formula(&self) -> PropFormula {
        F::and(self.constraints.iter().map(|c| c.formula.clone()))
    }
}

/// Every linked expression of the model, symbols first, then choices.
pub fn model_exprs(model: &LinkedModel) -> Vec<&LExpr> {
    let mut out = Vec::new();
    for s in &model.symbols {
        out.push(&s.dep);
        out.extend(s.prompts.iter().map(|p| &p.cond));
        for d in &s.defaults {
            out.push(&d.value);
            out.push(&d.cond);
        }
        out.extend(s.selects.iter().map(|(_, c)| c));
        out.extend(s.implies.iter().map(|(_, c)| c));
        for r in &s.ranges {
            out.push(&r.lo);
            out.push(&r.hi);
            out.push(&r.cond);
        }
    }
    for c in &model.choices {
        out.push(&c.dep);
        out.extend(c.prompts.iter().map(|p| &p.cond));
        out.extend(c.defaults.iter().map(|(_, e)| e));
    }
    out
}

fn constant(e: &LExpr, ty: SymbolType) -> Option<SymbolValue> {
    match (e, ty) {
        (LExpr::Num(n), SymbolType::Int | SymbolType::Hex) => Some(SymbolValue::number(ty, *n)),
        (LExpr::Lit(s), SymbolType::String) => Some(SymbolValue::Text(s.clone())),
        (LExpr::Undefined(_), _) => Some(SymbolValue::empty(ty)),
        _ => None,
    }
}

fn push_unique(out: &mut Vec<SymbolValue>, v: SymbolValue) {
    if !out.iter().any(|x| same_value(x, &v)) {
        out.push(v);
    }
}

fn scan_comparisons(e: &LExpr, target: SymId, ty: SymbolType, out: &mut Vec<SymbolValue>) {
    match e {
        LExpr::Not(a) => scan_comparisons(a, target, ty, out),
        LExpr::And(a, b) | LExpr::Or(a, b) => {
            scan_comparisons(a, target, ty, out);
            scan_comparisons(b, target, ty, out);
        }
        LExpr::Cmp(_, a, b) => match (&**a, &**b) {
            (LExpr::Sym(s), c) | (c, LExpr::Sym(s)) if *s == target => {
                if let Some(v) = constant(c, ty) {
                    push_unique(out, v);
                }
            }
            _ => {}
        },
        _ => {}
    }
}

/// Finite domain of a non-Boolean symbol: the type-empty value, then every
/// constant it is defaulted to, bounded by, or compared against.
pub fn known_values(model: &LinkedModel, id: SymId) -> Vec<SymbolValue> {
    let s = model.symbol(id);
    let ty = s.ty;
    let mut out = vec![SymbolValue::empty(ty)];
    for d in &s.defaults {
        if let Some(v) = constant(&d.value, ty) {
            push_unique(&mut out, v);
        }
    }
    for r in &s.ranges {
        for b in [&r.lo, &r.hi] {
            if let Some(v) = constant(b, ty) {
                push_unique(&mut out, v);
            }
        }
    }
    for e in model_exprs(model) {
        scan_comparisons(e, id, ty, &mut out);
    }
    out
}

fn value_cmp(a: &SymbolValue, b: &SymbolValue) -> Ordering {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => match (a, b) {
            (SymbolValue::Text(x), SymbolValue::Text(y)) => x.cmp(y),
            _ => a.to_string().cmp(&b.to_string()),
        },
    }
}

struct Builder<'m> {
    model: &'m LinkedModel,
    vars: VarMap,
    out: Vec<HardConstraint>,
    origin: Option<SymId>,
    opts: &'m AbstractionOptions,
}

type Pair = (F, F);

impl<'m> Builder<'m> {
    fn push(&mut self, f: F) {
        if f != F::True {
            self.out.push(HardConstraint {
                origin: self.origin,
                formula: f,
            });
        }
    }

    fn gap(&self, what: String) -> AbstractionError {
        AbstractionError::Gap(what)
    }

    fn is_tri(&self, e: &LExpr, v: Tristate) -> F {
        match e {
            LExpr::Tri(t) => F::constant(*t == v),
            LExpr::Sym(id) => {
                let (ge, ey) = self.vars.pair(*id);
                match v {
                    Yes => ey,
                    Mod => self.vars.mod_var(*id),
                    No => F::not(ge),
                }
            }
            _ => F::constant(v == No),
        }
    }

    fn is_nonbool(&self, id: SymId) -> bool {
        self.vars.yes[id.index()].is_none()
    }

    fn encode(&self, e: &LExpr) -> Result<Pair, AbstractionError> {
        Ok(match e {
            LExpr::Tri(t) => (F::constant(*t >= Mod), F::constant(*t == Yes)),
            LExpr::Sym(id) if !self.is_nonbool(*id) => self.vars.pair(*id),
            LExpr::Sym(_) | LExpr::Lit(_) | LExpr::Num(_) | LExpr::Undefined(_) => (F::False, F::False),
            LExpr::Not(a) => {
                let (ge, ey) = self.encode(a)?;
                (F::not(ey), F::not(ge))
            }
            LExpr::And(a, b) => {
                let (x, y) = (self.encode(a)?, self.encode(b)?);
                (F::and2(x.0, y.0), F::and2(x.1, y.1))
            }
            LExpr::Or(a, b) => {
                let (x, y) = (self.encode(a)?, self.encode(b)?);
                (F::or2(x.0, y.0), F::or2(x.1, y.1))
            }
            LExpr::Cmp(op, a, b) => {
                let f = self.compare(*op, a, b)?;
                (f.clone(), f)
            }
        })
    }

    fn compare(&self, op: CmpOp, a: &LExpr, b: &LExpr) -> Result<F, AbstractionError> {
        let nonbool = |e: &LExpr| matches!(e, LExpr::Sym(id) if self.is_nonbool(*id));
        if !nonbool(a) && !nonbool(b) {
            let mut terms = Vec::new();
            for x in Tristate::ALL {
                for y in Tristate::ALL {
                    if op.holds(x.cmp(&y)) {
                        terms.push(F::and2(self.is_tri(a, x), self.is_tri(b, y)));
                    }
                }
            }
            return Ok(F::or(terms));
        }
        match (a, b) {
            (LExpr::Sym(x), LExpr::Sym(y)) => {
                if !matches!(op, CmpOp::Eq | CmpOp::Neq) {
                    return Err(self.gap(format!(
                        "ordering comparison between symbols `{}` and `{}`",
                        self.model.symbol(*x).name,
                        self.model.symbol(*y).name
                    )));
                }
                let mut terms = Vec::new();
                for (d, v) in &self.vars.domain[x.index()] {
                    for (e, w) in &self.vars.domain[y.index()] {
                        if same_value(d, e) {
                            terms.push(F::and2(F::Var(*v), F::Var(*w)));
                        }
                    }
                }
                let eq = F::or(terms);
                Ok(if op == CmpOp::Eq { eq } else { F::not(eq) })
            }
            (LExpr::Sym(s), c) | (c, LExpr::Sym(s)) => {
                let ty = self.model.symbol(*s).ty;
                let c = constant(c, ty).ok_or_else(|| self.gap(format!("comparison of `{}` with an unsupported operand", self.model.symbol(*s).name)))?;
                let sym_left = matches!(a, LExpr::Sym(_));
                let terms = self.vars.domain[s.index()].iter().filter_map(|(d, v)| {
                    let ord = if sym_left { value_cmp(d, &c) } else { value_cmp(&c, d) };
                    op.holds(ord).then_some(F::Var(*v))
                });
                Ok(F::or(terms.collect::<Vec<_>>()))
            }
            _ => Err(self.gap("unsupported comparison".into())),
        }
    }

    fn visibility(&self, prompts: &[crate::kconfig::link::Prompt], dep: &Pair) -> Result<Pair, AbstractionError> {
        let mut ge = Vec::new();
        let mut ey = Vec::new();
        for p in prompts {
            let c = self.encode(&p.cond)?;
            ge.push(F::and2(c.0, dep.0.clone()));
            ey.push(F::and2(c.1, dep.1.clone()));
        }
        Ok((F::or(ge), F::or(ey)))
    }

    /// `ge_m` of each condition, and for position k the formula "condition k is
    /// the first one at least m".
    fn firsts(&self, conds: &[&LExpr]) -> Result<Vec<(F, Pair)>, AbstractionError> {
        let mut out = Vec::new();
        let mut earlier = Vec::new();
        for c in conds {
            let p = self.encode(c)?;
            let first = F::and(earlier.iter().cloned().chain([p.0.clone()]));
            earlier.push(F::not(p.0.clone()));
            out.push((first, p));
        }
        Ok(out)
    }

    fn rounds_up(&self, ty: SymbolType) -> F {
        match ty {
            SymbolType::Tristate => match self.model.modules {
                Some(m) => F::not(self.vars.pair(m).1),
                None => F::False,
            },
            _ => F::True,
        }
    }

    fn boolish(&mut self, id: SymId) -> Result<(), AbstractionError> {
        let s = self.model.symbol(id);
        let (ge, ey) = self.vars.pair(id);
        let modv = self.vars.mod_var(id);
        let ru = self.rounds_up(s.ty);
        self.push(F::not(F::and2(ey.clone(), modv.clone())));
        self.push(F::implies(ru.clone(), F::not(modv)));
        if s.choice.is_some() {
            return Ok(());
        }
        let dep = self.encode(&s.dep)?;
        let vis = self.visibility(&s.prompts, &dep)?;

        // select lower bound
        let (sm, sy) = match (self.vars.sel_mod[id.index()], self.vars.sel_yes[id.index()]) {
            (Some(m), Some(y)) => {
                let mut fire_m = Vec::new();
                let mut fire_y = Vec::new();
                for (t, c) in &s.selected_by {
                    let tp = self.vars.pair(*t);
                    let cp = self.encode(c)?;
                    fire_m.push(F::and2(tp.0, cp.0));
                    fire_y.push(F::and2(tp.1, cp.1));
                }
                let (m, y) = (F::Var(m), F::Var(y));
                match self.opts.selects {
                    SelectEncoding::Split => {
                        for (fm, fy) in fire_m.iter().zip(&fire_y) {
                            self.push(F::implies(fm.clone(), m.clone()));
                            self.push(F::implies(fy.clone(), y.clone()));
                        }
                        self.push(F::implies(m.clone(), F::or(fire_m)));
                        self.push(F::implies(y.clone(), F::or(fire_y)));
                    }
                    SelectEncoding::Monolithic => {
                        self.push(F::iff(m.clone(), F::or(fire_m)));
                        self.push(F::iff(y.clone(), F::or(fire_y)));
                    }
                }
                (m, y)
            }
            _ => (F::False, F::False),
        };

        // default contribution, clamped by the dependency
        let conds: Vec<&LExpr> = s.defaults.iter().map(|d| &d.cond).collect();
        let mut d_ge = Vec::new();
        let mut d_ey = Vec::new();
        for (k, (first, cp)) in self.firsts(&conds)?.into_iter().enumerate() {
            let vp = self.encode(&s.defaults[k].value)?;
            d_ge.push(F::and([first.clone(), vp.0, dep.0.clone()]));
            d_ey.push(F::and([first, vp.1, cp.1, dep.1.clone()]));
        }
        let (d_ge, d_ey) = (F::or(d_ge), F::or(d_ey));

        self.push(F::implies(sm.clone(), ge.clone()));
        self.push(F::implies(sy.clone(), ey.clone()));
        self.push(F::implies(F::and2(sm.clone(), ru.clone()), ey.clone()));
        self.push(F::implies(vis.0.clone(), F::implies(ey.clone(), F::or([vis.1, sy.clone(), ru.clone()]))));
        let hidden = F::not(vis.0);
        self.push(F::implies(hidden.clone(), F::iff(ge, F::or2(sm.clone(), d_ge.clone()))));
        self.push(F::implies(hidden, F::iff(ey, F::or([sy, d_ey, F::and2(ru, F::or2(sm, d_ge))]))));
        Ok(())
    }

    fn choice(&mut self, c: ChoiceId) -> Result<(), AbstractionError> {
        let ch = self.model.choice(c);
        let dep = self.encode(&ch.dep)?;
        let v = self.visibility(&ch.prompts, &dep)?;
        let ru = self.rounds_up(ch.ty);
        let mut mvis = Vec::new();
        for &m in &ch.members {
            let s = self.model.symbol(m);
            let d = self.encode(&s.dep)?;
            mvis.push(self.visibility(&s.prompts, &d)?);
        }
        let pairs: Vec<Pair> = ch.members.iter().map(|&m| self.vars.pair(m)).collect();
        let mods: Vec<F> = ch.members.iter().map(|&m| self.vars.mod_var(m)).collect();
        let n = ch.members.len();
        let active = F::and2(v.0.clone(), F::or(mvis.iter().map(|x| x.0.clone()).collect::<Vec<_>>()));
        let at_most_one_yes: Vec<F> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| F::not(F::and2(pairs[i].1.clone(), pairs[j].1.clone())))
            .collect();

        // pick-exactly-one mode
        let g = |f: F| F::implies(ru.clone(), f);
        self.push(g(F::implies(active, F::or(pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>()))));
        for f in &at_most_one_yes {
            self.push(g(f.clone()));
        }
        for i in 0..n {
            self.push(g(F::implies(pairs[i].1.clone(), F::and2(mvis[i].0.clone(), v.0.clone()))));
            self.push(g(F::not(mods[i].clone())));
        }

        // tristate mode
        let t = F::not(ru.clone());
        let g = |f: F| F::implies(t.clone(), f);
        for f in at_most_one_yes {
            self.push(g(f));
        }
        for i in 0..n {
            self.push(g(F::implies(pairs[i].1.clone(), F::and2(v.1.clone(), mvis[i].1.clone()))));
            self.push(g(F::implies(mods[i].clone(), F::and2(v.0.clone(), mvis[i].0.clone()))));
            for j in 0..n {
                if i != j {
                    self.push(g(F::implies(pairs[i].1.clone(), F::not(mods[j].clone()))));
                }
            }
        }
        let none_set = F::and(pairs.iter().map(|p| F::not(p.0.clone())).collect::<Vec<_>>());
        let none_visible = F::and(mvis.iter().map(|x| F::not(x.1.clone())).collect::<Vec<_>>());
        self.push(g(F::implies(F::and2(v.1, none_set), none_visible)));
        Ok(())
    }

    fn nonbool(&mut self, id: SymId) -> Result<(), AbstractionError> {
        let s = self.model.symbol(id);
        let name = &s.name;
        let dom: Vec<(SymbolValue, VarId)> = self.vars.domain[id.index()].clone();
        self.push(F::or(dom.iter().map(|(_, v)| F::Var(*v)).collect::<Vec<_>>()));
        for i in 0..dom.len() {
            for j in (i + 1)..dom.len() {
                self.push(F::not(F::and2(F::Var(dom[i].1), F::Var(dom[j].1))));
            }
        }
        let empty = SymbolValue::empty(s.ty);
        let dep = self.encode(&s.dep)?;
        let vis = self.visibility(&s.prompts, &dep)?;
        self.push(F::implies(F::not(dep.0.clone()), self.vars.indicator(id, &empty)));

        let mut ranges: Vec<Option<(i64, i64)>> = Vec::new();
        for r in &s.ranges {
            let bound = |e: &LExpr| match e {
                LExpr::Num(n) => Ok(*n),
                LExpr::Undefined(_) => Ok(0),
                _ => Err(AbstractionError::Gap(format!("range of `{name}` bounded by a symbol"))),
            };
            ranges.push(Some((bound(&r.lo)?, bound(&r.hi)?)));
        }
        let rconds: Vec<&LExpr> = s.ranges.iter().map(|r| &r.cond).collect();
        let mut rcases: Vec<(F, Option<(i64, i64)>)> = self.firsts(&rconds)?.into_iter().map(|(f, _)| f).zip(ranges).collect();
        let no_range = F::not(F::or(rcases.iter().map(|(f, _)| f.clone()).collect::<Vec<_>>()));
        rcases.push((no_range, None));

        // visible: the value lies in the active range
        for (rf, r) in &rcases {
            if let Some((lo, hi)) = r {
                for (d, v) in &dom {
                    if d.as_number().is_some_and(|n| n < *lo || n > *hi) {
                        self.push(F::implies(F::and([vis.0.clone(), rf.clone()]), F::not(F::Var(*v))));
                    }
                }
            }
        }

        // invisible: the first applicable default, clamped to the active range
        let mut values = Vec::new();
        for d in &s.defaults {
            let v = match &d.value {
                LExpr::Num(_) | LExpr::Lit(_) | LExpr::Undefined(_) => constant(&d.value, s.ty).unwrap_or_else(|| empty.clone()),
                _ => return Err(self.gap(format!("default of `{name}` refers to a symbol"))),
            };
            values.push(v);
        }
        let dconds: Vec<&LExpr> = s.defaults.iter().map(|d| &d.cond).collect();
        let mut dcases: Vec<(F, SymbolValue)> = self.firsts(&dconds)?.into_iter().map(|(f, _)| f).zip(values).collect();
        let none = F::not(F::or(dcases.iter().map(|(f, _)| f.clone()).collect::<Vec<_>>()));
        dcases.push((none, empty.clone()));
        let hidden = F::and2(dep.0, F::not(vis.0));
        for (df, val) in &dcases {
            for (rf, r) in &rcases {
                let clamped = match (val.as_number(), r) {
                    (Some(n), Some((lo, hi))) if n < *lo || n > *hi => SymbolValue::number(s.ty, n.clamp(*lo, (*hi).max(*lo))),
                    _ => val.clone(),
                };
                let target = self.vars.indicator(id, &clamped);
                self.push(F::implies(F::and([hidden.clone(), df.clone(), rf.clone()]), target));
            }
        }
        Ok(())
    }
}

/// Hard constraints whose models are exactly the valid configurations.
pub fn build_formula(model: &LinkedModel) -> Result<Abstraction, AbstractionError> {
    build_formula_with(model, &AbstractionOptions::default())
}

pub fn build_formula_with(model: &LinkedModel, opts: &AbstractionOptions) -> Result<Abstraction, AbstractionError> {
    let n = model.len();
    let mut vars = VarMap {
        meanings: Vec::new(),
        yes: vec![None; n],
        module: vec![None; n],
        sel_yes: vec![None; n],
        sel_mod: vec![None; n],
        domain: vec![Vec::new(); n],
    };
    for id in model.ids() {
        let s = model.symbol(id);
        match s.ty {
            SymbolType::Bool | SymbolType::Tristate => {
                vars.yes[id.index()] = Some(vars.fresh(VarMeaning::SymYes(id)));
                if s.ty == SymbolType::Tristate {
                    vars.module[id.index()] = Some(vars.fresh(VarMeaning::SymMod(id)));
                }
            }
            _ => {
                let mut dom = known_values(model, id);
                for (x, v) in &opts.extra_values {
                    if *x == id && v.fits(s.ty) {
                        push_unique(&mut dom, v.clone());
                    }
                }
                vars.domain[id.index()] = dom.into_iter().map(|d| (d.clone(), vars.fresh(VarMeaning::NonBoolEquals(id, d)))).collect::<Vec<_>>();
            }
        }
    }
    for id in model.ids() {
        if !model.symbol(id).selected_by.is_empty() {
            vars.sel_yes[id.index()] = Some(vars.fresh(VarMeaning::SelectedYes(id)));
            vars.sel_mod[id.index()] = Some(vars.fresh(VarMeaning::SelectedMod(id)));
        }
    }
    let mut b = Builder {
        model,
        vars,
        out: Vec::new(),
        origin: None,
        opts,
    };
    for id in model.ids() {
        b.origin = Some(id);
        if model.symbol(id).ty.is_boolish() {
            b.boolish(id)?;
        } else {
            b.nonbool(id)?;
        }
    }
    for c in 0..model.choices.len() {
        b.origin = model.choices[c].members.first().copied();
        b.choice(ChoiceId(c as u32))?;
    }
    let notes = model
        .symbols
        .iter()
        .flat_map(|s| s.implies.iter().map(move |(t, _)| format!("imply {} -> {} (no clauses)", s.name, model.symbol(*t).name)))
        .collect();
    Ok(Abstraction {
        vars: b.vars,
        constraints: b.out,
        notes,
    })
}

/// Lifts one linked expression to `(ge_m, eq_y)` over the variables of `abs`.
pub fn encode_expr(model: &LinkedModel, abs: &Abstraction, e: &LExpr) -> Result<(PropFormula, PropFormula), AbstractionError> {
    let opts = AbstractionOptions::default();
    let b = Builder {
        model,
        vars: abs.vars.clone(),
        out: Vec::new(),
        origin: None,
        opts: &opts,
    };
    b.encode(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_expr;
    use crate::kconfig::{link, parse};

    fn model(src: &str) -> LinkedModel {
        link(&parse(src, "t").unwrap()).unwrap()
    }

    #[test]
    fn folding_constructors() {
        assert_eq!(F::and([F::True, F::Var(1)]), F::Var(1));
        assert_eq!(F::or([F::Var(1), F::True]), F::True);
        assert_eq!(F::not(F::not(F::Var(2))), F::Var(2));
        assert_eq!(F::implies(F::Var(1), F::False), F::not(F::Var(1)));
    }

    #[test]
    fn encode_matches_kleene() {
        let m = model("config A\n\ttristate \"a\"\nconfig B\n\ttristate \"b\"\nconfig C\n\tbool\n\tdepends on !A || (A && B) || A = m || B != y\n");
        let abs = build_formula(&m).unwrap();
        let e = &m.symbol(SymId(2)).dep;
        let (ge, ey) = encode_expr(&m, &abs, e).unwrap();
        for a in Tristate::ALL {
            for b in Tristate::ALL {
                let vals = [a.into(), b.into(), No.into()];
                let t = eval_expr(&m, e, &vals);
                let lits: Vec<i32> = [(SymId(0), a), (SymId(1), b)]
                    .iter()
                    .flat_map(|(s, v)| abs.vars.value_literals(*s, &(*v).into()).unwrap())
                    .collect();
                let assign = |v: VarId| lits.contains(&(v as i32));
                assert_eq!(ge.eval(&assign), t >= Mod, "{a} {b}");
                assert_eq!(ey.eval(&assign), t == Yes, "{a} {b}");
            }
        }
    }

    #[test]
    fn known_values_scan() {
        let m = model("config A\n\tint \"a\"\n\tdefault 4\nconfig B\n\tbool\n\tdepends on A = 7\nconfig S\n\tstring \"s\"\nconfig H\n\thex \"h\"\n\trange 0x1 0x3\n");
        let n = |v: i64| SymbolValue::Number(v);
        assert_eq!(known_values(&m, SymId(0)), vec![n(0), n(4), n(7)]);
        assert_eq!(known_values(&m, SymId(2)), vec![SymbolValue::Text(String::new())]);
        assert_eq!(known_values(&m, SymId(3)), vec![SymbolValue::Hex(0), SymbolValue::Hex(1), SymbolValue::Hex(3)]);
    }

    #[test]
    fn ordering_between_symbols_is_a_gap() {
        let m = model("config A\n\tint \"a\"\nconfig B\n\tint \"b\"\nconfig C\n\tbool\n\tdepends on A < B\n");
        assert!(matches!(build_formula(&m), Err(AbstractionError::Gap(_))));
    }

    #[test]
    fn var_map_is_total() {
        let m = model("config A\n\ttristate \"a\"\n\tselect B\nconfig B\n\tbool\nconfig N\n\tint \"n\"\n");
        let abs = build_formula(&m).unwrap();
        assert!(abs.vars.yes[0].is_some() && abs.vars.module[0].is_some());
        assert!(abs.vars.module[1].is_none() && abs.vars.sel_yes[1].is_some());
        assert_eq!(abs.vars.domain[2].len(), 1);
        assert_eq!(abs.vars.num_vars(), 6);
    }
}

//! Kconfig value semantics: expression evaluation, visibility, select lower
//! bounds, default chains, choice groups, recalculation and validation.
//!
//! For Bool/Tristate symbols with visibility `vis`, select lower bound `sel`
//! and default contribution `D`:
//!
//! * visible with user value `u`: `round(max(min(u, vis), sel))`
//! * visible without user value: `round(max(min(max(D, imp), vis), sel))`,
//!   where `imp` is the `imply` contribution
//! * invisible: `round(max(sel, D))`
//!
//! `round` lifts `m` to `y` for Bool symbols, and for Tristate symbols while the
//! modules symbol exists and is `n`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kconfig::link::{Node, Symbol};
use crate::kconfig::{ChoiceId, CmpOp, LExpr, LinkedModel, SymId, SymbolType};
use crate::tristate::{tri_and, tri_or, Mod, No, Tristate, Yes};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolValue {
    Tri(Tristate),
    Text(String),
    Number(i64),
    Hex(u64),
}

impl SymbolValue {
    /// Value of a symbol with no user value and no applicable default.
    pub fn empty(ty: SymbolType) -> SymbolValue {
        match ty {
            SymbolType::Bool | SymbolType::Tristate => SymbolValue::Tri(No),
            SymbolType::String => SymbolValue::Text(String::new()),
            SymbolType::Int => SymbolValue::Number(0),
            SymbolType::Hex => SymbolValue::Hex(0),
        }
    }

    /// Tristate reading of the value; non-Boolean values read as `n`.
    pub fn tri(&self) -> Tristate {
        match self {
            SymbolValue::Tri(t) => *t,
            _ => No,
        }
    }

    pub fn as_number(&self) -> Option<i64> {
        match self {
            SymbolValue::Number(n) => Some(*n),
            SymbolValue::Hex(h) => Some(*h as i64),
            _ => None,
        }
    }

    /// Builds a numeric value of the given type.
    pub fn number(ty: SymbolType, n: i64) -> SymbolValue {
        match ty {
            SymbolType::Hex => SymbolValue::Hex(n.max(0) as u64),
            _ => SymbolValue::Number(n),
        }
    }

    pub fn fits(&self, ty: SymbolType) -> bool {
        matches!(
            (self, ty),
            (SymbolValue::Tri(No | Yes), SymbolType::Bool)
                | (SymbolValue::Tri(_), SymbolType::Tristate)
                | (SymbolValue::Text(_), SymbolType::String)
                | (SymbolValue::Number(_), SymbolType::Int)
                | (SymbolValue::Hex(_), SymbolType::Hex)
        )
    }

    /// Parses user input for a symbol of type `ty`. Hex accepts an optional
    /// `0x` prefix.
    pub fn parse(ty: SymbolType, text: &str) -> Result<SymbolValue, String> {
        let bad = || format!("`{text}` is not a valid {ty} value");
        match ty {
            SymbolType::Bool => match text.parse::<Tristate>() {
                Ok(Mod) => Err(bad()),
                Ok(t) => Ok(SymbolValue::Tri(t)),
                Err(_) => Err(bad()),
            },
            SymbolType::Tristate => text.parse().map(SymbolValue::Tri).map_err(|_| bad()),
            SymbolType::String => Ok(SymbolValue::Text(text.to_string())),
            SymbolType::Int => text.parse().map(SymbolValue::Number).map_err(|_| bad()),
            SymbolType::Hex => {
                let digits = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")).unwrap_or(text);
                u64::from_str_radix(digits, 16).map(SymbolValue::Hex).map_err(|_| bad())
            }
        }
    }
}

impl fmt::Display for SymbolValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolValue::Tri(t) => write!(f, "{t}"),
            SymbolValue::Text(s) => write!(f, "{s:?}"),
            SymbolValue::Number(n) => write!(f, "{n}"),
            SymbolValue::Hex(h) => write!(f, "0x{h:X}"),
        }
    }
}

impl From<Tristate> for SymbolValue {
    fn from(t: Tristate) -> SymbolValue {
        SymbolValue::Tri(t)
    }
}

/// User choices plus the recalculated value of every symbol, indexed by [`SymId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub user: Vec<Option<SymbolValue>>,
    pub effective: Vec<SymbolValue>,
}

impl Configuration {
    /// No user values; every effective value empty (not yet recalculated).
    pub fn blank(model: &LinkedModel) -> Configuration {
        Configuration {
            user: vec![None; model.len()],
            effective: model.symbols.iter().map(|s| SymbolValue::empty(s.ty)).collect(),
        }
    }

    pub fn value(&self, id: SymId) -> &SymbolValue {
        &self.effective[id.index()]
    }

    pub fn tri(&self, id: SymId) -> Tristate {
        self.effective[id.index()].tri()
    }

    pub fn user_value(&self, id: SymId) -> Option<&SymbolValue> {
        self.user[id.index()].as_ref()
    }

    pub fn set_user(&mut self, id: SymId, v: Option<SymbolValue>) {
        self.user[id.index()] = v;
    }

    /// Copies every effective value into the user values, as saving and
    /// reloading a `.config` does.
    pub fn freeze(&mut self) {
        self.user = self.effective.iter().cloned().map(Some).collect();
    }

    pub fn frozen(&self) -> Configuration {
        let mut c = self.clone();
        c.freeze();
        c
    }

    pub fn eval(&self, model: &LinkedModel, e: &LExpr) -> Tristate {
        eval_expr(model, e, &self.effective)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unstable model: values still changing after {0} rounds")]
    Unstable(usize),
}

enum CmpVal<'a> {
    Tri(Tristate),
    Num(i64),
    Text(&'a str),
}

fn operand<'a>(e: &'a LExpr, values: &'a [SymbolValue]) -> CmpVal<'a> {
    match e {
        LExpr::Sym(id) => match &values[id.index()] {
            SymbolValue::Tri(t) => CmpVal::Tri(*t),
            SymbolValue::Text(s) => CmpVal::Text(s),
            SymbolValue::Number(n) => CmpVal::Num(*n),
            SymbolValue::Hex(h) => CmpVal::Num(*h as i64),
        },
        LExpr::Tri(t) => CmpVal::Tri(*t),
        LExpr::Num(n) => CmpVal::Num(*n),
        LExpr::Lit(s) => CmpVal::Text(s),
        LExpr::Undefined(_) => CmpVal::Text(""),
        _ => unreachable!("comparison operands are leaves"),
    }
}

fn compare(a: &CmpVal, b: &CmpVal) -> Ordering {
    match (a, b) {
        (CmpVal::Tri(x), CmpVal::Tri(y)) => x.cmp(y),
        (CmpVal::Num(x), CmpVal::Num(y)) => x.cmp(y),
        (CmpVal::Text(x), CmpVal::Text(y)) => x.cmp(y),
        (x, y) => text_of(x).cmp(&text_of(y)),
    }
}

fn text_of(v: &CmpVal) -> String {
    match v {
        CmpVal::Tri(t) => t.to_string(),
        CmpVal::Num(n) => n.to_string(),
        CmpVal::Text(s) => s.to_string(),
    }
}

/// Kleene evaluation of a linked expression over effective values.
pub fn eval_expr(model: &LinkedModel, e: &LExpr, values: &[SymbolValue]) -> Tristate {
    match e {
        LExpr::Tri(t) => *t,
        LExpr::Sym(id) => values[id.index()].tri(),
        LExpr::Undefined(_) | LExpr::Lit(_) | LExpr::Num(_) => No,
        LExpr::Not(a) => !eval_expr(model, a, values),
        LExpr::And(a, b) => {
            let x = eval_expr(model, a, values);
            if x == No {
                No
            } else {
                tri_and(x, eval_expr(model, b, values))
            }
        }
        LExpr::Or(a, b) => {
            let x = eval_expr(model, a, values);
            if x == Yes {
                Yes
            } else {
                tri_or(x, eval_expr(model, b, values))
            }
        }
        LExpr::Cmp(op, a, b) => Tristate::from_bool(op.holds(compare(&operand(a, values), &operand(b, values)))),
    }
}

/// The quantities that decide a Bool/Tristate symbol's value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub dep: Tristate,
    pub vis: Tristate,
    pub sel: Tristate,
    pub imply: Tristate,
    /// Default contribution, already clamped by the dependency.
    pub default: Tristate,
    pub rounds_up: bool,
}

impl Bounds {
    pub fn round(&self, v: Tristate) -> Tristate {
        if self.rounds_up && v == Mod {
            Yes
        } else {
            v
        }
    }

    /// Value for a given user choice.
    pub fn value(&self, user: Option<Tristate>) -> Tristate {
        if self.vis == No {
            return self.round(self.sel.max(self.default));
        }
        let wanted = user.unwrap_or(self.default.max(self.imply));
        self.round(wanted.min(self.vis).max(self.sel))
    }

    /// Whether `v` is the value for some user choice.
    pub fn admits(&self, v: Tristate) -> bool {
        if self.vis == No {
            return v == self.value(None);
        }
        let (lo, hi) = (self.round(self.sel), self.round(self.vis.max(self.sel)));
        lo <= v && v <= hi && !(self.rounds_up && v == Mod)
    }
}

pub fn dependency(model: &LinkedModel, id: SymId, values: &[SymbolValue]) -> Tristate {
    eval_expr(model, &model.symbol(id).dep, values)
}

fn prompt_visibility(model: &LinkedModel, prompts: &[crate::kconfig::link::Prompt], dep: Tristate, values: &[SymbolValue]) -> Tristate {
    prompts.iter().map(|p| tri_and(eval_expr(model, &p.cond, values), dep)).max().unwrap_or(No)
}

/// Maximum over the prompts' conditions, each conjoined with the dependency.
pub fn visibility(model: &LinkedModel, id: SymId, values: &[SymbolValue]) -> Tristate {
    let s = model.symbol(id);
    prompt_visibility(model, &s.prompts, eval_expr(model, &s.dep, values), values)
}

pub fn choice_visibility(model: &LinkedModel, c: ChoiceId, values: &[SymbolValue]) -> Tristate {
    let ch = model.choice(c);
    prompt_visibility(model, &ch.prompts, eval_expr(model, &ch.dep, values), values)
}

fn reverse_bound(model: &LinkedModel, by: &[(SymId, LExpr)], values: &[SymbolValue]) -> Tristate {
    by.iter().map(|(t, c)| tri_and(values[t.index()].tri(), eval_expr(model, c, values))).max().unwrap_or(No)
}

/// Whether `m` is lifted to `y` for symbols of type `ty`.
pub fn rounds_up(model: &LinkedModel, ty: SymbolType, values: &[SymbolValue]) -> bool {
    match ty {
        SymbolType::Tristate => model.modules.is_some_and(|m| values[m.index()].tri() == No),
        _ => true,
    }
}

/// Index of the first default whose condition is at least `m`.
fn active_default(model: &LinkedModel, s: &Symbol, values: &[SymbolValue]) -> Option<usize> {
    s.defaults.iter().position(|d| eval_expr(model, &d.cond, values) >= Mod)
}

pub fn bounds(model: &LinkedModel, id: SymId, values: &[SymbolValue]) -> Bounds {
    let s = model.symbol(id);
    let dep = eval_expr(model, &s.dep, values);
    let default = match active_default(model, s, values) {
        Some(k) => {
            let d = &s.defaults[k];
            eval_expr(model, &d.value, values).min(eval_expr(model, &d.cond, values)).min(dep)
        }
        None => No,
    };
    Bounds {
        dep,
        vis: prompt_visibility(model, &s.prompts, dep, values),
        sel: reverse_bound(model, &s.selected_by, values),
        imply: reverse_bound(model, &s.implied_by, values),
        default,
        rounds_up: rounds_up(model, s.ty, values),
    }
}

fn numeric(model: &LinkedModel, e: &LExpr, ty: SymbolType, values: &[SymbolValue]) -> SymbolValue {
    let _ = model;
    match e {
        LExpr::Num(n) => SymbolValue::number(ty, *n),
        LExpr::Lit(s) if ty == SymbolType::String => SymbolValue::Text(s.clone()),
        LExpr::Sym(id) => match (&values[id.index()], ty) {
            (SymbolValue::Text(t), SymbolType::String) => SymbolValue::Text(t.clone()),
            (v, SymbolType::Int | SymbolType::Hex) => SymbolValue::number(ty, v.as_number().unwrap_or(0)),
            _ => SymbolValue::empty(ty),
        },
        _ => SymbolValue::empty(ty),
    }
}

/// The active `range` bounds of an Int/Hex symbol.
pub fn active_range(model: &LinkedModel, id: SymId, values: &[SymbolValue]) -> Option<(i64, i64)> {
    let s = model.symbol(id);
    let r = s.ranges.iter().find(|r| eval_expr(model, &r.cond, values) >= Mod)?;
    let lo = numeric(model, &r.lo, s.ty, values).as_number().unwrap_or(0);
    let hi = numeric(model, &r.hi, s.ty, values).as_number().unwrap_or(0);
    Some((lo, hi))
}

fn in_range(v: &SymbolValue, range: Option<(i64, i64)>) -> bool {
    match (v.as_number(), range) {
        (Some(n), Some((lo, hi))) => lo <= n && n <= hi,
        _ => true,
    }
}

/// Value an invisible non-Boolean symbol takes: its default, clamped to the range.
fn nonbool_default(model: &LinkedModel, id: SymId, values: &[SymbolValue]) -> SymbolValue {
    let s = model.symbol(id);
    let v = match active_default(model, s, values) {
        Some(k) => numeric(model, &s.defaults[k].value, s.ty, values),
        None => SymbolValue::empty(s.ty),
    };
    match (v.as_number(), active_range(model, id, values)) {
        (Some(n), Some((lo, hi))) if n < lo || n > hi => SymbolValue::number(s.ty, n.clamp(lo, hi.max(lo))),
        _ => v,
    }
}

/// Value rule for one symbol that is not a choice member.
pub fn compute_value(model: &LinkedModel, id: SymId, user: Option<&SymbolValue>, values: &[SymbolValue]) -> SymbolValue {
    let s = model.symbol(id);
    if s.ty.is_boolish() {
        let b = bounds(model, id, values);
        return SymbolValue::Tri(b.value(user.map(|u| u.tri())));
    }
    if dependency(model, id, values) == No {
        return SymbolValue::empty(s.ty);
    }
    if visibility(model, id, values) >= Mod {
        if let Some(u) = user.filter(|u| u.fits(s.ty)) {
            if in_range(u, active_range(model, id, values)) {
                return u.clone();
            }
        }
    }
    nonbool_default(model, id, values)
}

/// Whether a choice behaves as a pick-exactly-one group (Bool choices, and
/// Tristate choices while modules are off).
pub fn choice_is_boolean(model: &LinkedModel, c: ChoiceId, values: &[SymbolValue]) -> bool {
    rounds_up(model, model.choice(c).ty, values)
}

/// Member values of a choice group for the given user values.
pub fn compute_choice(model: &LinkedModel, c: ChoiceId, user: &[Option<SymbolValue>], values: &[SymbolValue]) -> Vec<(SymId, Tristate)> {
    let ch = model.choice(c);
    let v = choice_visibility(model, c, values);
    let mvis: Vec<Tristate> = ch.members.iter().map(|&m| visibility(model, m, values)).collect();
    let utri = |m: SymId| user[m.index()].as_ref().map(|u| u.tri());
    let mut out: Vec<(SymId, Tristate)> = ch.members.iter().map(|&m| (m, No)).collect();
    let pick = |min_vis: Tristate| -> Option<usize> {
        let by_user = (0..ch.members.len()).find(|&i| utri(ch.members[i]) == Some(Yes) && mvis[i] >= min_vis);
        let by_default = || {
            ch.defaults
                .iter()
                .find(|(_, cond)| eval_expr(model, cond, values) >= Mod)
                .and_then(|(m, _)| ch.members.iter().position(|x| x == m))
                .filter(|&i| mvis[i] >= min_vis)
        };
        by_user.or_else(by_default).or_else(|| mvis.iter().position(|&x| x >= min_vis))
    };
    if choice_is_boolean(model, c, values) {
        if v >= Mod {
            if let Some(i) = pick(Mod) {
                out[i].1 = Yes;
            }
        }
        return out;
    }
    let m_mode = |out: &mut Vec<(SymId, Tristate)>| {
        for (i, &m) in ch.members.iter().enumerate() {
            if matches!(utri(m), Some(Mod | Yes)) && mvis[i] >= Mod {
                out[i].1 = Mod;
            }
        }
    };
    match v {
        No => {}
        Mod => m_mode(&mut out),
        Yes => {
            let user_yes = (0..ch.members.len()).find(|&i| utri(ch.members[i]) == Some(Yes) && mvis[i] == Yes);
            let user_mod = (0..ch.members.len()).any(|i| utri(ch.members[i]) == Some(Mod) && mvis[i] >= Mod);
            if let Some(i) = user_yes {
                out[i].1 = Yes;
            } else if user_mod {
                for (i, &m) in ch.members.iter().enumerate() {
                    if utri(m) == Some(Mod) && mvis[i] >= Mod {
                        out[i].1 = Mod;
                    }
                }
            } else if let Some(i) = pick(Yes) {
                out[i].1 = Yes;
            }
        }
    }
    out
}

/// Whether the member values form a valid state of the choice group.
pub fn choice_admits(model: &LinkedModel, c: ChoiceId, values: &[SymbolValue]) -> bool {
    let ch = model.choice(c);
    let v = choice_visibility(model, c, values);
    let mvis: Vec<Tristate> = ch.members.iter().map(|&m| visibility(model, m, values)).collect();
    let vals: Vec<Tristate> = ch.members.iter().map(|&m| values[m.index()].tri()).collect();
    let ys = vals.iter().filter(|&&x| x == Yes).count();
    let any_m = vals.contains(&Mod);
    if choice_is_boolean(model, c, values) {
        let active = v >= Mod && mvis.iter().any(|&x| x >= Mod);
        if !active {
            return vals.iter().all(|&x| x == No);
        }
        return ys == 1 && !any_m && vals.iter().zip(&mvis).all(|(&x, &vis)| x == No || vis >= Mod);
    }
    match v {
        No => vals.iter().all(|&x| x == No),
        Mod => vals.iter().zip(&mvis).all(|(&x, &vis)| x <= vis.min(Mod)),
        Yes => {
            if ys == 1 {
                !any_m && vals.iter().zip(&mvis).all(|(&x, &vis)| x != Yes || vis == Yes)
            } else if ys == 0 && any_m {
                vals.iter().zip(&mvis).all(|(&x, &vis)| x != Mod || vis >= Mod)
            } else if ys == 0 {
                !mvis.contains(&Yes)
            } else {
                false
            }
        }
    }
}

/// Evaluates one dependency-order node into `values`. Returns whether anything changed.
fn step(model: &LinkedModel, node: Node, user: &[Option<SymbolValue>], values: &mut [SymbolValue]) -> bool {
    match node {
        Node::Symbol(id) => {
            if model.symbol(id).choice.is_some() {
                return false;
            }
            let v = compute_value(model, id, user[id.index()].as_ref(), values);
            if values[id.index()] != v {
                values[id.index()] = v;
                true
            } else {
                false
            }
        }
        Node::Choice(c) => {
            let mut changed = false;
            for (m, t) in compute_choice(model, c, user, values) {
                if values[m.index()] != SymbolValue::Tri(t) {
                    values[m.index()] = SymbolValue::Tri(t);
                    changed = true;
                }
            }
            changed
        }
    }
}

/// Fixpoint of the value rules for the given user values.
pub fn recalculate(model: &LinkedModel, user: &[Option<SymbolValue>]) -> Result<Configuration, EvalError> {
    let start: Vec<SymbolValue> = model.symbols.iter().map(|s| SymbolValue::empty(s.ty)).collect();
    recalculate_from(model, user, start)
}

/// Like [`recalculate`] but iterates from existing values.
pub fn recalculate_from(model: &LinkedModel, user: &[Option<SymbolValue>], mut values: Vec<SymbolValue>) -> Result<Configuration, EvalError> {
    let cap = (model.len() * 4).max(4);
    for _ in 0..cap {
        let mut changed = false;
        for &node in &model.order {
            changed |= step(model, node, user, &mut values);
        }
        if !changed {
            return Ok(Configuration {
                user: user.to_vec(),
                effective: values,
            });
        }
    }
    Err(EvalError::Unstable(cap))
}

impl Configuration {
    /// Recalculates effective values from the current user values.
    pub fn recalculate(&mut self, model: &LinkedModel) -> Result<(), EvalError> {
        let values = std::mem::take(&mut self.effective);
        *self = recalculate_from(model, &self.user, values)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// Value of the wrong type, or `m` where only `n`/`y` can occur.
    Type,
    /// Above what the dependencies allow.
    DependsOn,
    /// Above what the prompt conditions allow.
    Visibility,
    /// Below the select lower bound.
    Select,
    /// An invisible symbol differs from its default.
    Default,
    Range,
    Choice,
    /// Differs from the recalculation of the configuration's user values.
    NotFixpoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub symbol: String,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.symbol, self.kind, self.message)
    }
}

/// Checks each symbol's value against its bounds given the other values.
pub fn local_violations(model: &LinkedModel, values: &[SymbolValue]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |id: SymId, kind, message: String| {
        out.push(Violation {
            symbol: model.symbol(id).name.clone(),
            kind,
            message,
        })
    };
    for &node in &model.order {
        match node {
            Node::Choice(c) => {
                if !choice_admits(model, c, values) {
                    let first = model.choice(c).members.first().copied();
                    if let Some(m) = first {
                        let states: Vec<String> =
                            model.choice(c).members.iter().map(|&x| format!("{}={}", model.symbol(x).name, values[x.index()])).collect();
                        push(m, ViolationKind::Choice, format!("invalid choice state {}", states.join(", ")));
                    }
                }
            }
            Node::Symbol(id) => {
                let s = model.symbol(id);
                let v = &values[id.index()];
                if !v.fits(s.ty) {
                    push(id, ViolationKind::Type, format!("value {v} does not fit type {}", s.ty));
                    continue;
                }
                if s.choice.is_some() {
                    continue;
                }
                if s.ty.is_boolish() {
                    let b = bounds(model, id, values);
                    let t = v.tri();
                    if b.admits(t) {
                        continue;
                    }
                    let (kind, msg) = if t < b.round(b.sel) {
                        (ViolationKind::Select, format!("value {t} below select lower bound {}", b.round(b.sel)))
                    } else if b.rounds_up && t == Mod {
                        (ViolationKind::Type, "value m while modules are disabled".to_string())
                    } else if t > b.dep.max(b.sel) && t > b.round(b.dep.max(b.sel)) {
                        (ViolationKind::DependsOn, format!("value {t} exceeds dependency {}", b.dep))
                    } else if b.vis == No {
                        (ViolationKind::Default, format!("invisible symbol has {t}, default gives {}", b.value(None)))
                    } else {
                        (ViolationKind::Visibility, format!("value {t} exceeds visibility {}", b.vis))
                    };
                    push(id, kind, msg);
                } else if dependency(model, id, values) == No {
                    if *v != SymbolValue::empty(s.ty) {
                        push(id, ViolationKind::DependsOn, format!("dependency is n but value is {v}"));
                    }
                } else if visibility(model, id, values) >= Mod {
                    let range = active_range(model, id, values);
                    if !in_range(v, range) {
                        let (lo, hi) = range.unwrap();
                        push(id, ViolationKind::Range, format!("value {v} outside range {lo}..{hi}"));
                    }
                } else {
                    let expected = nonbool_default(model, id, values);
                    if *v != expected {
                        let kind = if in_range(v, active_range(model, id, values)) { ViolationKind::Default } else { ViolationKind::Range };
                        push(id, kind, format!("invisible symbol has {v}, default gives {expected}"));
                    }
                }
            }
        }
    }
    out
}

/// All violations of `cfg`: bound violations of each symbol, plus every symbol
/// whose effective value differs from recalculating the user values.
pub fn validate(model: &LinkedModel, cfg: &Configuration) -> Vec<Violation> {
    let mut out = local_violations(model, &cfg.effective);
    match recalculate(model, &cfg.user) {
        Ok(re) => {
            for id in model.ids() {
                if re.effective[id.index()] != cfg.effective[id.index()] && !out.iter().any(|v| v.symbol == model.symbol(id).name) {
                    out.push(Violation {
                        symbol: model.symbol(id).name.clone(),
                        kind: ViolationKind::NotFixpoint,
                        message: format!("recalculation gives {} instead of {}", re.effective[id.index()], cfg.effective[id.index()]),
                    });
                }
            }
        }
        Err(e) => out.push(Violation {
            symbol: String::new(),
            kind: ViolationKind::NotFixpoint,
            message: e.to_string(),
        }),
    }
    out
}

/// True when `cmp` between two tristates holds; used by tests and the abstraction.
pub fn tri_cmp(op: CmpOp, a: Tristate, b: Tristate) -> bool {
    op.holds(a.cmp(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kconfig::{link, parse};

    pub(crate) const ARCH: &str = "menu \"Architectures\"\n\
config EX\n\tbool \"Example\"\n\
menu \"Misc\"\n\
config X86\n\tbool \"X86 architecture\"\n\
config 64BIT\n\tbool \"64-bit kernel\"\n\tdepends on X86\n\
endmenu\n\
config ARM\n\tbool \"ARM architecture\"\n\
endmenu\n";

    fn model(src: &str) -> LinkedModel {
        link(&parse(src, "t").unwrap()).unwrap()
    }

    fn user(m: &LinkedModel, pairs: &[(&str, SymbolValue)]) -> Vec<Option<SymbolValue>> {
        let mut u = vec![None; m.len()];
        for (n, v) in pairs {
            u[m.lookup(n).unwrap().index()] = Some(v.clone());
        }
        u
    }

    #[test]
    fn arch_recalculation() {
        let m = model(ARCH);
        let cfg = recalculate(&m, &user(&m, &[("X86", Yes.into()), ("64BIT", Yes.into())])).unwrap();
        assert_eq!(cfg.tri(m.lookup("64BIT").unwrap()), Yes);
        let empty = recalculate(&m, &vec![None; m.len()]).unwrap();
        assert!(empty.effective.iter().all(|v| *v == SymbolValue::Tri(No)));
        assert!(validate(&m, &cfg).is_empty());
    }

    #[test]
    fn visibility_examples() {
        let m = model(ARCH);
        let vals = vec![SymbolValue::Tri(No); 4];
        assert_eq!(visibility(&m, m.lookup("64BIT").unwrap(), &vals), No);
        assert_eq!(visibility(&m, m.lookup("EX").unwrap(), &vals), Yes);
        let m2 = model("config A\n\ttristate \"a\"\nconfig B\n\ttristate \"b\" if A\n");
        assert_eq!(visibility(&m2, SymId(1), &[Mod.into(), No.into()]), Mod);
    }

    #[test]
    fn select_forces_target() {
        let m = model("config A\n\tbool \"a\"\n\tselect B\nconfig B\n\tbool\n");
        let cfg = recalculate(&m, &user(&m, &[("A", Yes.into())])).unwrap();
        assert_eq!(cfg.tri(SymId(1)), Yes);
    }

    #[test]
    fn bool_selected_at_m_rounds_up() {
        let m = model("config T\n\ttristate \"t\"\n\tselect B\nconfig B\n\tbool\n");
        let cfg = recalculate(&m, &user(&m, &[("T", Mod.into())])).unwrap();
        assert_eq!(cfg.tri(SymId(0)), Mod);
        assert_eq!(cfg.tri(SymId(1)), Yes);
    }

    #[test]
    fn compute_value_examples() {
        let m = model("config A\n\tbool\n\tdefault y\nconfig B\n\ttristate \"b\"\n");
        let cfg = recalculate(&m, &user(&m, &[("B", Mod.into())])).unwrap();
        assert_eq!(cfg.tri(SymId(0)), Yes);
        assert_eq!(cfg.tri(SymId(1)), Mod);
    }

    #[test]
    fn expression_examples() {
        let m = model("config X86\n\tbool \"x\"\nconfig ARM\n\tbool \"a\"\nconfig A\n\tstring \"a\"\nconfig B\n\tstring \"b\"\nconfig C\n\tbool\n\tdepends on X86 && !ARM && A = B && !FOO\n");
        let vals = vec![Yes.into(), No.into(), SymbolValue::Text("foo".into()), SymbolValue::Text("foo".into()), No.into()];
        assert_eq!(dependency(&m, SymId(4), &vals), Yes);
    }

    #[test]
    fn validate_reports_dependency_and_range() {
        let m = model(ARCH);
        let mut cfg = recalculate(&m, &vec![None; 4]).unwrap();
        cfg.effective[m.lookup("64BIT").unwrap().index()] = Yes.into();
        let v = validate(&m, &cfg);
        assert!(v.iter().any(|x| x.symbol == "64BIT" && x.kind == ViolationKind::DependsOn), "{v:?}");

        let m = model("config N\n\tint \"n\"\n\trange 10 20\n\tdefault 15\n");
        let mut cfg = recalculate(&m, &[None]).unwrap();
        assert_eq!(cfg.effective[0], SymbolValue::Number(15));
        cfg.effective[0] = SymbolValue::Number(5);
        assert!(validate(&m, &cfg).iter().any(|x| x.kind == ViolationKind::Range));
    }

    #[test]
    fn bool_choice_picks_exactly_one() {
        let m = model("choice\n\tprompt \"c\"\n\tdefault B\nconfig A\n\tbool \"a\"\nconfig B\n\tbool \"b\"\nendchoice\n");
        let cfg = recalculate(&m, &[None, None]).unwrap();
        assert_eq!((cfg.tri(SymId(0)), cfg.tri(SymId(1))), (No, Yes));
        let cfg = recalculate(&m, &[Some(Yes.into()), None]).unwrap();
        assert_eq!((cfg.tri(SymId(0)), cfg.tri(SymId(1))), (Yes, No));
        assert!(validate(&m, &cfg).is_empty());
    }
}

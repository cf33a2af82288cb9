//! Name resolution, context folding and static checks.
//!
//! Linking turns the syntax tree into a [`LinkedModel`]: symbols are indexed by
//! [`SymId`], enclosing `menu`/`if`/`choice` conditions are conjoined into each
//! declaration's dependency, menu `visible if` conditions into prompt
//! conditions, and comparisons are checked and normalized so that evaluation
//! never meets a type error. Models whose symbol values depend on each other
//! recursively are rejected.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use indexmap::IndexMap;

use super::ast::{self, CmpOp, Entry, Expr, KconfigModel, Loc, Property, SymbolType};
use super::Diagnostic;
use crate::tristate::Tristate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymId(pub u32);

impl SymId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChoiceId(pub u32);

impl ChoiceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Linked expression. Comparison operands are always `Sym`, `Tri`, `Lit` or
/// `Num`, and at least one of them is a `Sym`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LExpr {
    Tri(Tristate),
    Lit(String),
    Num(i64),
    Sym(SymId),
    /// Reference to a name with no declaration; evaluates as `n`.
    Undefined(String),
    Not(Box<LExpr>),
    And(Box<LExpr>, Box<LExpr>),
    Or(Box<LExpr>, Box<LExpr>),
    Cmp(CmpOp, Box<LExpr>, Box<LExpr>),
}

pub const YES: LExpr = LExpr::Tri(Tristate::Yes);

impl LExpr {
    pub fn and(a: LExpr, b: LExpr) -> LExpr {
        match (a, b) {
            (LExpr::Tri(Tristate::Yes), x) | (x, LExpr::Tri(Tristate::Yes)) => x,
            (LExpr::Tri(Tristate::No), _) | (_, LExpr::Tri(Tristate::No)) => LExpr::Tri(Tristate::No),
            (a, b) => LExpr::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: LExpr, b: LExpr) -> LExpr {
        match (a, b) {
            (LExpr::Tri(Tristate::No), x) | (x, LExpr::Tri(Tristate::No)) => x,
            (LExpr::Tri(Tristate::Yes), _) | (_, LExpr::Tri(Tristate::Yes)) => YES,
            (a, b) => LExpr::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn and_all(items: impl IntoIterator<Item = LExpr>) -> LExpr {
        items.into_iter().fold(YES, LExpr::and)
    }

    /// Symbols whose values this expression reads.
    pub fn symbols(&self, out: &mut Vec<SymId>) {
        match self {
            LExpr::Sym(s) => {
                if !out.contains(s) {
                    out.push(*s)
                }
            }
            LExpr::Tri(_) | LExpr::Lit(_) | LExpr::Num(_) | LExpr::Undefined(_) => {}
            LExpr::Not(a) => a.symbols(out),
            LExpr::And(a, b) | LExpr::Or(a, b) | LExpr::Cmp(_, a, b) => {
                a.symbols(out);
                b.symbols(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prompt {
    pub text: String,
    /// Prompt condition conjoined with menu visibility and the declaration's dependencies.
    pub cond: LExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Default {
    pub value: LExpr,
    pub cond: LExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Range {
    pub lo: LExpr,
    pub hi: LExpr,
    pub cond: LExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub ty: SymbolType,
    /// Source properties of all declarations, in document order.
    pub properties: Vec<Property>,
    pub prompts: Vec<Prompt>,
    pub defaults: Vec<Default>,
    pub dep: LExpr,
    /// `(target, cond)` for each `select` this symbol makes.
    pub selects: Vec<(SymId, LExpr)>,
    pub implies: Vec<(SymId, LExpr)>,
    /// `(selector, cond)` for each `select` targeting this symbol.
    pub selected_by: Vec<(SymId, LExpr)>,
    pub implied_by: Vec<(SymId, LExpr)>,
    pub ranges: Vec<Range>,
    pub choice: Option<ChoiceId>,
    pub help: Option<String>,
    pub loc: Loc,
}

impl Symbol {
    pub fn has_prompt(&self) -> bool {
        !self.prompts.is_empty()
    }

    pub fn prompt_text(&self) -> Option<&str> {
        self.prompts.first().map(|p| p.text.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Choice {
    pub name: Option<String>,
    pub ty: SymbolType,
    pub prompts: Vec<Prompt>,
    pub dep: LExpr,
    /// `(member, cond)` in document order.
    pub defaults: Vec<(SymId, LExpr)>,
    pub members: Vec<SymId>,
    pub help: Option<String>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MenuNode {
    Symbol {
        id: SymId,
        children: Vec<MenuNode>,
    },
    Menu {
        title: String,
        /// Menu dependencies conjoined with `visible if`.
        visible: LExpr,
        children: Vec<MenuNode>,
    },
    Choice {
        id: ChoiceId,
        children: Vec<MenuNode>,
    },
    Comment {
        text: String,
        visible: LExpr,
    },
}

/// Evaluation unit in dependency order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    Symbol(SymId),
    /// Computes all members of the group at once.
    Choice(ChoiceId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkedModel {
    pub source: KconfigModel,
    pub mainmenu: Option<String>,
    pub symbols: Vec<Symbol>,
    pub by_name: IndexMap<String, SymId>,
    pub choices: Vec<Choice>,
    pub tree: Vec<MenuNode>,
    pub modules: Option<SymId>,
    /// Symbols and choices ordered so that every node follows what it reads.
    pub order: Vec<Node>,
}

impl LinkedModel {
    pub fn symbol(&self, id: SymId) -> &Symbol {
        &self.symbols[id.index()]
    }

    pub fn choice(&self, id: ChoiceId) -> &Choice {
        &self.choices[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<SymId> {
        self.by_name.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = SymId> + '_ {
        (0..self.symbols.len() as u32).map(SymId)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Links the retained source again.
    pub fn relink(&self) -> Result<LinkedModel, Diagnostic> {
        link(&self.source)
    }

    /// Position of each symbol in [`LinkedModel::order`]; choice members share
    /// their group's position.
    pub fn topo_rank(&self) -> Vec<usize> {
        let mut rank = vec![0; self.symbols.len()];
        for (i, node) in self.order.iter().enumerate() {
            match *node {
                Node::Symbol(s) => rank[s.index()] = i,
                Node::Choice(c) => {
                    for &m in &self.choices[c.index()].members {
                        rank[m.index()] = i;
                    }
                }
            }
        }
        rank
    }
}

pub(crate) fn parse_num(s: &str) -> Option<i64> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let v = if let Some(hex) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        digits.parse::<i64>().ok()?
    };
    Some(if neg { -v } else { v })
}

struct Decl<'a> {
    entry: &'a ast::ConfigEntry,
    deps: Vec<&'a Expr>,
    vis: Vec<&'a Expr>,
    choice: Option<usize>,
}

struct ChoiceDecl<'a> {
    entry: &'a ast::ChoiceEntry,
    deps: Vec<&'a Expr>,
    vis: Vec<&'a Expr>,
    members: Vec<String>,
}

#[derive(Default)]
struct Collected<'a> {
    decls: Vec<Decl<'a>>,
    choices: Vec<ChoiceDecl<'a>>,
}

fn collect<'a>(entries: &'a [Entry], deps: &[&'a Expr], vis: &[&'a Expr], choice: Option<usize>, out: &mut Collected<'a>) {
    for e in entries {
        match e {
            Entry::Config(c) => {
                out.decls.push(Decl {
                    entry: c,
                    deps: deps.to_vec(),
                    vis: vis.to_vec(),
                    choice,
                });
                if let Some(ch) = choice {
                    if !out.choices[ch].members.contains(&c.name) {
                        out.choices[ch].members.push(c.name.clone());
                    }
                }
            }
            Entry::Menu(m) => {
                let mut d = deps.to_vec();
                d.extend(m.depends.iter());
                let mut v = vis.to_vec();
                v.extend(m.visible_if.iter());
                collect(&m.children, &d, &v, choice, out);
            }
            Entry::If { cond, children, .. } => {
                let mut d = deps.to_vec();
                d.push(cond);
                collect(children, &d, vis, choice, out);
            }
            Entry::Choice(c) => {
                let mut d = deps.to_vec();
                for p in &c.properties {
                    if let Property::DependsOn(e) = &p.prop {
                        d.push(e);
                    }
                }
                let id = out.choices.len();
                out.choices.push(ChoiceDecl {
                    entry: c,
                    deps: d.clone(),
                    vis: vis.to_vec(),
                    members: Vec::new(),
                });
                collect(&c.children, &d, vis, Some(id), out);
            }
            Entry::Source { entries, .. } => collect(entries, deps, vis, choice, out),
            Entry::Comment { .. } => {}
        }
    }
}

/// Comparison operand classification used by the type checker.
enum Operand {
    TriSym(SymId),
    StrSym(SymId),
    NumSym(SymId),
    TriConst(Tristate),
    Lit(String),
    Undef,
}

struct Linker<'a> {
    ids: &'a IndexMap<String, SymId>,
    types: &'a [SymbolType],
    loc: &'a Loc,
}

impl<'a> Linker<'a> {
    fn err(&self, msg: String) -> Diagnostic {
        Diagnostic::at(self.loc, msg)
    }

    fn at(&self, loc: &'a Loc) -> Linker<'a> {
        Linker {
            ids: self.ids,
            types: self.types,
            loc,
        }
    }

    fn lookup(&self, name: &str) -> Option<(SymId, SymbolType)> {
        self.ids.get(name).map(|&id| (id, self.types[id.index()]))
    }

    /// Resolves an expression used as a tristate condition.
    fn tri(&self, e: &Expr) -> Result<LExpr, Diagnostic> {
        Ok(match e {
            Expr::Symbol(name) => match self.lookup(name) {
                Some((id, ty)) if ty.is_boolish() => LExpr::Sym(id),
                Some(_) => LExpr::Tri(Tristate::No),
                None => LExpr::Undefined(name.clone()),
            },
            Expr::Tri(t) => LExpr::Tri(*t),
            Expr::Literal(s) => LExpr::Tri(s.parse().unwrap_or(Tristate::No)),
            Expr::Not(a) => match self.tri(a)? {
                LExpr::Tri(t) => LExpr::Tri(!t),
                x => LExpr::Not(Box::new(x)),
            },
            Expr::And(a, b) => LExpr::and(self.tri(a)?, self.tri(b)?),
            Expr::Or(a, b) => LExpr::or(self.tri(a)?, self.tri(b)?),
            Expr::Cmp(op, a, b) => self.cmp(*op, a, b)?,
        })
    }

    fn tri_opt(&self, e: &Option<Expr>) -> Result<LExpr, Diagnostic> {
        e.as_ref().map_or(Ok(super::link::YES), |e| self.tri(e))
    }

    fn operand(&self, e: &Expr) -> Operand {
        match e {
            Expr::Symbol(name) => match self.lookup(name) {
                Some((id, SymbolType::Bool | SymbolType::Tristate)) => Operand::TriSym(id),
                Some((id, SymbolType::String)) => Operand::StrSym(id),
                Some((id, _)) => Operand::NumSym(id),
                None => Operand::Undef,
            },
            Expr::Tri(t) => Operand::TriConst(*t),
            Expr::Literal(s) => Operand::Lit(s.clone()),
            _ => unreachable!("the parser only builds comparisons over leaves"),
        }
    }

    fn cmp(&self, op: CmpOp, a: &Expr, b: &Expr) -> Result<LExpr, Diagnostic> {
        use Operand::*;
        let (l, r) = (self.operand(a), self.operand(b));
        let fixed = |holds: bool| LExpr::Tri(Tristate::from_bool(holds));
        let ordering = !matches!(op, CmpOp::Eq | CmpOp::Neq);
        let mismatch = || self.err(format!("type mismatch in comparison `{}`", super::printer::print_expr(&Expr::cmp(op, a.clone(), b.clone()))));
        let tri_of = |o: &Operand| -> Option<Option<LExpr>> {
            match o {
                TriSym(id) => Some(Some(LExpr::Sym(*id))),
                TriConst(t) => Some(Some(LExpr::Tri(*t))),
                Undef => Some(Some(LExpr::Tri(Tristate::No))),
                Lit(s) => Some(s.parse::<Tristate>().ok().map(LExpr::Tri)),
                _ => None,
            }
        };
        let has_tri = matches!(l, TriSym(_) | TriConst(_)) || matches!(r, TriSym(_) | TriConst(_));
        if has_tri {
            let (Some(x), Some(y)) = (tri_of(&l), tri_of(&r)) else {
                return Err(mismatch());
            };
            return match (x, y) {
                (Some(LExpr::Tri(p)), Some(LExpr::Tri(q))) => Ok(fixed(op.holds(p.cmp(&q)))),
                (Some(x), Some(y)) => Ok(LExpr::Cmp(op, Box::new(x), Box::new(y))),
                // a tristate never equals a non-tristate literal
                _ if ordering => Err(mismatch()),
                _ => Ok(fixed(op == CmpOp::Neq)),
            };
        }
        let both = |x: SymId, y: SymId| Ok(LExpr::Cmp(op, Box::new(LExpr::Sym(x)), Box::new(LExpr::Sym(y))));
        match (&l, &r) {
            (NumSym(x), NumSym(y)) | (StrSym(x), StrSym(y)) => both(*x, *y),
            (NumSym(x), Lit(s)) | (Lit(s), NumSym(x)) => match parse_num(s) {
                Some(n) => {
                    let (p, q) = if matches!(l, NumSym(_)) { (LExpr::Sym(*x), LExpr::Num(n)) } else { (LExpr::Num(n), LExpr::Sym(*x)) };
                    Ok(LExpr::Cmp(op, Box::new(p), Box::new(q)))
                }
                None if ordering => Err(mismatch()),
                None => Ok(fixed(op == CmpOp::Neq)),
            },
            (NumSym(_), Undef) | (Undef, NumSym(_)) => Ok(fixed(op == CmpOp::Neq)),
            (StrSym(x), Lit(_) | Undef) | (Lit(_) | Undef, StrSym(x)) => {
                let text = |o: &Operand| match o {
                    Lit(s) => LExpr::Lit(s.clone()),
                    _ => LExpr::Lit(String::new()),
                };
                let (p, q) = if matches!(l, StrSym(_)) { (LExpr::Sym(*x), text(&r)) } else { (text(&l), LExpr::Sym(*x)) };
                Ok(LExpr::Cmp(op, Box::new(p), Box::new(q)))
            }
            (Lit(_) | Undef, Lit(_) | Undef) => {
                let s = |o: &Operand| match o {
                    Lit(s) => s.clone(),
                    _ => String::new(),
                };
                let (p, q) = (s(&l), s(&r));
                let ord = match (parse_num(&p), parse_num(&q)) {
                    (Some(x), Some(y)) => x.cmp(&y),
                    _ => p.cmp(&q),
                };
                Ok(fixed(op.holds(ord)))
            }
            _ => Err(mismatch()),
        }
    }

    /// Resolves a default value or range bound for a non-Boolean symbol.
    fn value(&self, e: &Expr, ty: SymbolType) -> Result<LExpr, Diagnostic> {
        match (e, ty) {
            (Expr::Literal(s), SymbolType::String) => Ok(LExpr::Lit(s.clone())),
            (Expr::Tri(t), SymbolType::String) => Ok(LExpr::Lit(t.letter().to_string())),
            (Expr::Literal(s), _) => match parse_num(s) {
                Some(n) if ty == SymbolType::Hex && n < 0 => Err(self.err(format!("negative hex value `{s}`"))),
                Some(n) => Ok(LExpr::Num(n)),
                None => Err(self.err(format!("`{s}` is not a valid {ty} value"))),
            },
            (Expr::Symbol(name), _) => match self.lookup(name) {
                Some((id, SymbolType::String)) if ty == SymbolType::String => Ok(LExpr::Sym(id)),
                Some((id, SymbolType::Int | SymbolType::Hex)) if ty != SymbolType::String => Ok(LExpr::Sym(id)),
                Some((_, other)) => Err(self.err(format!("{other} symbol `{name}` used as a {ty} value"))),
                None => Ok(LExpr::Undefined(name.clone())),
            },
            _ => Err(self.err(format!("{ty} values must be constants or symbol references"))),
        }
    }
}

/// Links a parsed model.
pub fn link(model: &KconfigModel) -> Result<LinkedModel, Diagnostic> {
    let mut col = Collected::default();
    collect(&model.entries, &[], &[], None, &mut col);

    // symbol table in order of first declaration
    let mut ids: IndexMap<String, SymId> = IndexMap::new();
    for d in &col.decls {
        let n = ids.len() as u32;
        ids.entry(d.entry.name.clone()).or_insert(SymId(n));
    }
    let n = ids.len();
    let mut declared: Vec<Option<SymbolType>> = vec![None; n];
    let mut first_loc: Vec<Option<&Loc>> = vec![None; n];
    let mut member_of: Vec<Option<usize>> = vec![None; n];
    for d in &col.decls {
        let id = ids[&d.entry.name];
        first_loc[id.index()].get_or_insert(&d.entry.loc);
        if let Some(t) = d.entry.ty {
            match declared[id.index()] {
                Some(old) if old != t => {
                    return Err(Diagnostic::at(&d.entry.loc, format!("`{}` redeclared as {t}, previously {old}", d.entry.name)))
                }
                _ => declared[id.index()] = Some(t),
            }
        }
        if d.choice.is_some() {
            member_of[id.index()] = d.choice;
        }
    }

    // choice types come from the choice or its first typed member
    let mut choice_types = Vec::with_capacity(col.choices.len());
    for c in &col.choices {
        let from_member = c.members.iter().find_map(|m| declared[ids[m].index()]);
        let ty = c.entry.ty.or(from_member).unwrap_or(SymbolType::Bool);
        if !ty.is_boolish() {
            return Err(Diagnostic::at(&c.entry.loc, format!("choice of type {ty} is not supported")));
        }
        for m in &c.members {
            let slot = &mut declared[ids[m].index()];
            match *slot {
                Some(t) if t != ty => {
                    return Err(Diagnostic::at(first_loc[ids[m].index()].unwrap(), format!("choice member `{m}` must have type {ty}")))
                }
                _ => *slot = Some(ty),
            }
        }
        choice_types.push(ty);
    }
    let mut types = Vec::with_capacity(n);
    for (name, id) in &ids {
        match declared[id.index()] {
            Some(t) => types.push(t),
            None => return Err(Diagnostic::at(first_loc[id.index()].unwrap(), format!("`{name}` has no type"))),
        }
    }

    let root_loc = Loc::default();
    let base = Linker {
        ids: &ids,
        types: &types,
        loc: &root_loc,
    };

    let mut symbols: Vec<Symbol> = ids
        .iter()
        .map(|(name, id)| Symbol {
            name: name.clone(),
            ty: types[id.index()],
            properties: Vec::new(),
            prompts: Vec::new(),
            defaults: Vec::new(),
            dep: LExpr::Tri(Tristate::No),
            selects: Vec::new(),
            implies: Vec::new(),
            selected_by: Vec::new(),
            implied_by: Vec::new(),
            ranges: Vec::new(),
            choice: member_of[id.index()].map(|c| ChoiceId(c as u32)),
            help: None,
            loc: first_loc[id.index()].unwrap().clone(),
        })
        .collect();
    let mut modules = None;

    for d in &col.decls {
        let id = ids[&d.entry.name];
        let ty = types[id.index()];
        let lk = base.at(&d.entry.loc);
        let mut conds = Vec::new();
        for e in &d.deps {
            conds.push(lk.tri(e)?);
        }
        for p in &d.entry.properties {
            if let Property::DependsOn(e) = &p.prop {
                conds.push(base.at(&p.loc).tri(e)?);
            }
        }
        let decl_dep = LExpr::and_all(conds);
        let mut vis = Vec::new();
        for e in &d.vis {
            vis.push(lk.tri(e)?);
        }
        let vis = LExpr::and_all(vis);
        if d.entry.modules {
            if ty != SymbolType::Bool {
                return Err(Diagnostic::at(&d.entry.loc, "the modules symbol must be bool".into()));
            }
            if modules.is_some_and(|m| m != id) {
                return Err(Diagnostic::at(&d.entry.loc, "more than one modules symbol".into()));
            }
            modules = Some(id);
        }
        for p in &d.entry.properties {
            let lk = base.at(&p.loc);
            let sym = &mut symbols[id.index()];
            sym.properties.push(p.prop.clone());
            match &p.prop {
                Property::Prompt { text, cond } => sym.prompts.push(Prompt {
                    text: text.clone(),
                    cond: LExpr::and_all([lk.tri_opt(cond)?, vis.clone(), decl_dep.clone()]),
                }),
                Property::Default { value, cond } => {
                    let value = if ty.is_boolish() { lk.tri(value)? } else { lk.value(value, ty)? };
                    sym.defaults.push(Default {
                        value,
                        cond: LExpr::and(lk.tri_opt(cond)?, decl_dep.clone()),
                    });
                }
                Property::DependsOn(_) => {}
                Property::Select { target, cond } | Property::Imply { target, cond } => {
                    let select = matches!(p.prop, Property::Select { .. });
                    let kw = if select { "select" } else { "imply" };
                    let Some((t, tty)) = lk.lookup(target) else {
                        return Err(lk.err(format!("{kw} of undeclared symbol `{target}`")));
                    };
                    if !tty.is_boolish() {
                        return Err(lk.err(format!("{kw} target `{target}` is {tty}, not bool or tristate")));
                    }
                    if select && member_of[t.index()].is_some() {
                        return Err(lk.err(format!("select target `{target}` is a choice member")));
                    }
                    let c = LExpr::and(lk.tri_opt(cond)?, decl_dep.clone());
                    if select {
                        sym.selects.push((t, c));
                    } else {
                        sym.implies.push((t, c));
                    }
                }
                Property::Range { lo, hi, cond } => {
                    if !matches!(ty, SymbolType::Int | SymbolType::Hex) {
                        return Err(lk.err(format!("range on {ty} symbol `{}`", d.entry.name)));
                    }
                    sym.ranges.push(Range {
                        lo: lk.value(lo, ty)?,
                        hi: lk.value(hi, ty)?,
                        cond: LExpr::and(lk.tri_opt(cond)?, decl_dep.clone()),
                    });
                }
            }
        }
        let sym = &mut symbols[id.index()];
        sym.dep = LExpr::or(std::mem::replace(&mut sym.dep, LExpr::Tri(Tristate::No)), decl_dep);
        if d.entry.help.is_some() {
            sym.help = d.entry.help.clone();
        }
        if !ty.is_boolish() && d.entry.properties.iter().any(|p| matches!(p.prop, Property::Select { .. } | Property::Imply { .. })) {
            return Err(Diagnostic::at(&d.entry.loc, format!("{ty} symbol `{}` cannot select or imply", d.entry.name)));
        }
    }
    for i in 0..symbols.len() {
        for (t, c) in symbols[i].selects.clone() {
            symbols[t.index()].selected_by.push((SymId(i as u32), c));
        }
        for (t, c) in symbols[i].implies.clone() {
            symbols[t.index()].implied_by.push((SymId(i as u32), c));
        }
    }

    let mut choices = Vec::with_capacity(col.choices.len());
    for (ci, c) in col.choices.iter().enumerate() {
        let lk = base.at(&c.entry.loc);
        let mut deps = Vec::new();
        for e in &c.deps {
            deps.push(lk.tri(e)?);
        }
        let dep = LExpr::and_all(deps);
        let mut vis = Vec::new();
        for e in &c.vis {
            vis.push(lk.tri(e)?);
        }
        let vis = LExpr::and_all(vis);
        let members: Vec<SymId> = c.members.iter().map(|m| ids[m]).collect();
        let mut prompts = Vec::new();
        let mut defaults = Vec::new();
        for p in &c.entry.properties {
            let lk = base.at(&p.loc);
            match &p.prop {
                Property::Prompt { text, cond } => prompts.push(Prompt {
                    text: text.clone(),
                    cond: LExpr::and_all([lk.tri_opt(cond)?, vis.clone(), dep.clone()]),
                }),
                Property::Default { value: Expr::Symbol(name), cond } => match lk.lookup(name) {
                    Some((m, _)) if members.contains(&m) => defaults.push((m, LExpr::and(lk.tri_opt(cond)?, dep.clone()))),
                    _ => return Err(lk.err(format!("choice default `{name}` is not a member of the choice"))),
                },
                Property::DependsOn(_) => {}
                _ => return Err(lk.err("unsupported property in choice".into())),
            }
        }
        choices.push(Choice {
            name: c.entry.name.clone(),
            ty: choice_types[ci],
            prompts,
            dep,
            defaults,
            members,
            help: c.entry.help.clone(),
            loc: c.entry.loc.clone(),
        });
    }

    let order = dependency_order(&symbols, &choices, modules)?;
    let tree = build_tree(&model.entries, &ids, &base, &mut 0)?;
    Ok(LinkedModel {
        source: model.clone(),
        mainmenu: model.mainmenu.clone(),
        symbols,
        by_name: ids,
        choices,
        tree,
        modules,
        order,
    })
}

/// What each node reads. Choice members read nothing themselves; their group
/// node reads everything that decides member values.
fn node_inputs(symbols: &[Symbol], choices: &[Choice], modules: Option<SymId>, node: Node) -> Vec<SymId> {
    let mut out = Vec::new();
    let with_range = |s: &Symbol, out: &mut Vec<SymId>| {
        s.dep.symbols(out);
        for p in &s.prompts {
            p.cond.symbols(out);
        }
    };
    match node {
        Node::Symbol(id) => {
            let s = &symbols[id.index()];
            if s.choice.is_some() {
                return out;
            }
            with_range(s, &mut out);
            for d in &s.defaults {
                d.value.symbols(&mut out);
                d.cond.symbols(&mut out);
            }
            for (t, c) in s.selected_by.iter().chain(&s.implied_by) {
                if !out.contains(t) {
                    out.push(*t);
                }
                c.symbols(&mut out);
            }
            for r in &s.ranges {
                r.lo.symbols(&mut out);
                r.hi.symbols(&mut out);
                r.cond.symbols(&mut out);
            }
            if s.ty == SymbolType::Tristate {
                out.extend(modules);
            }
        }
        Node::Choice(cid) => {
            let c = &choices[cid.index()];
            c.dep.symbols(&mut out);
            for p in &c.prompts {
                p.cond.symbols(&mut out);
            }
            for (_, cond) in &c.defaults {
                cond.symbols(&mut out);
            }
            for &m in &c.members {
                with_range(&symbols[m.index()], &mut out);
            }
            out.extend(modules);
        }
    }
    out
}

fn dependency_order(symbols: &[Symbol], choices: &[Choice], modules: Option<SymId>) -> Result<Vec<Node>, Diagnostic> {
    // node index: symbols first, then choices
    let ns = symbols.len();
    let total = ns + choices.len();
    let node_of = |i: usize| if i < ns { Node::Symbol(SymId(i as u32)) } else { Node::Choice(ChoiceId((i - ns) as u32)) };
    let provider = |s: SymId| match symbols[s.index()].choice {
        Some(c) => ns + c.index(),
        None => s.index(),
    };
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); total];
    let mut indeg = vec![0usize; total];
    for i in 0..total {
        let mut inputs: Vec<usize> = node_inputs(symbols, choices, modules, node_of(i)).into_iter().map(provider).collect();
        if let Node::Symbol(s) = node_of(i) {
            if let Some(c) = symbols[s.index()].choice {
                inputs.push(ns + c.index());
            }
        }
        inputs.sort_unstable();
        inputs.dedup();
        for p in inputs {
            if p == i {
                return Err(cycle_error(symbols, choices, &[i], ns));
            }
            succ[p].push(i);
            indeg[i] += 1;
        }
    }
    // document position: a choice sits just before its first member
    let key = |i: usize| -> (usize, usize) {
        if i < ns {
            (i, 1)
        } else {
            (choices[i - ns].members.first().map_or(ns, |m| m.index()), 0)
        }
    };
    let mut heap: BinaryHeap<Reverse<((usize, usize), usize)>> = (0..total).filter(|&i| indeg[i] == 0).map(|i| Reverse((key(i), i))).collect();
    let mut order = Vec::with_capacity(total);
    while let Some(Reverse((_, i))) = heap.pop() {
        order.push(node_of(i));
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                heap.push(Reverse((key(j), j)));
            }
        }
    }
    if order.len() < total {
        let stuck: Vec<usize> = (0..total).filter(|&i| indeg[i] > 0).collect();
        return Err(cycle_error(symbols, choices, &find_cycle(&succ, &stuck), ns));
    }
    Ok(order)
}

fn find_cycle(succ: &[Vec<usize>], stuck: &[usize]) -> Vec<usize> {
    let in_stuck: HashMap<usize, ()> = stuck.iter().map(|&i| (i, ())).collect();
    // walk successors inside the stuck set until a node repeats
    let mut path = vec![stuck[0]];
    loop {
        let cur = *path.last().unwrap();
        let next = succ[cur].iter().copied().find(|j| in_stuck.contains_key(j)).expect("stuck nodes lie on or behind a cycle");
        if let Some(pos) = path.iter().position(|&p| p == next) {
            return path[pos..].to_vec();
        }
        path.push(next);
    }
}

fn cycle_error(symbols: &[Symbol], choices: &[Choice], cycle: &[usize], ns: usize) -> Diagnostic {
    let name = |i: usize| {
        if i < ns {
            symbols[i].name.clone()
        } else {
            format!("<choice {}>", choices[i - ns].name.clone().unwrap_or_else(|| (i - ns).to_string()))
        }
    };
    let loc = if cycle[0] < ns { &symbols[cycle[0]].loc } else { &choices[cycle[0] - ns].loc };
    let names: Vec<String> = cycle.iter().chain(cycle.first()).map(|&i| name(i)).collect();
    Diagnostic::at(loc, format!("recursive dependency: {}", names.join(" -> ")))
}

fn build_tree(entries: &[Entry], ids: &IndexMap<String, SymId>, lk: &Linker, choice_counter: &mut usize) -> Result<Vec<MenuNode>, Diagnostic> {
    let mut out = Vec::new();
    for e in entries {
        match e {
            Entry::Config(c) => {
                let id = ids[&c.name];
                // later declarations of the same symbol are not repeated
                let seen = |nodes: &[MenuNode]| nodes.iter().any(|n| matches!(n, MenuNode::Symbol { id: x, .. } if *x == id));
                if !seen(&out) {
                    out.push(MenuNode::Symbol { id, children: Vec::new() });
                }
            }
            Entry::Menu(m) => {
                let l = lk.at(&m.loc);
                let mut conds = Vec::new();
                for d in m.depends.iter().chain(&m.visible_if) {
                    conds.push(l.tri(d)?);
                }
                out.push(MenuNode::Menu {
                    title: m.title.clone(),
                    visible: LExpr::and_all(conds),
                    children: build_tree(&m.children, ids, lk, choice_counter)?,
                });
            }
            Entry::Choice(c) => {
                let id = ChoiceId(*choice_counter as u32);
                *choice_counter += 1;
                out.push(MenuNode::Choice {
                    id,
                    children: build_tree(&c.children, ids, lk, choice_counter)?,
                });
            }
            Entry::If { children, .. } => out.extend(build_tree(children, ids, lk, choice_counter)?),
            Entry::Source { entries, .. } => out.extend(build_tree(entries, ids, lk, choice_counter)?),
            Entry::Comment { text, depends, loc } => {
                let l = lk.at(loc);
                let mut conds = Vec::new();
                for d in depends {
                    conds.push(l.tri(d)?);
                }
                out.push(MenuNode::Comment {
                    text: text.clone(),
                    visible: LExpr::and_all(conds),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kconfig::parse;

    fn linked(src: &str) -> Result<LinkedModel, Diagnostic> {
        link(&parse(src, "t").unwrap())
    }

    #[test]
    fn undefined_reference_is_marked() {
        let m = linked("config A\n\tbool \"a\"\n\tdepends on FOO\n").unwrap();
        assert_eq!(m.symbol(SymId(0)).dep, LExpr::Undefined("FOO".into()));
    }

    #[test]
    fn visible_if_reaches_prompt_only() {
        let m = linked("config C\n\tbool\nmenu \"m\"\n\tvisible if C\nconfig A\n\tbool \"a\"\nendmenu\n").unwrap();
        let a = m.symbol(m.lookup("A").unwrap());
        assert_eq!(a.prompts[0].cond, LExpr::Sym(m.lookup("C").unwrap()));
        assert_eq!(a.dep, YES);
    }

    #[test]
    fn static_errors() {
        let cases = [
            ("config A\n\tbool\n\trange 1 2\n", "range on bool"),
            ("config A\n\tbool\n\tselect S\nconfig S\n\tstring\n", "is string"),
            ("config A\n\tbool\nconfig A\n\ttristate\n", "redeclared"),
            ("config A\n\tint\nconfig B\n\tbool\n\tdepends on A < \"x\"\n", "type mismatch"),
            ("config A\n\tbool\n\tdepends on B\nconfig B\n\tbool\n\tdepends on A\n", "recursive dependency"),
        ];
        for (src, needle) in cases {
            let e = linked(src).unwrap_err();
            assert!(e.message.contains(needle), "{src:?}: {e}");
        }
    }

    #[test]
    fn order_respects_select_edges() {
        let m = linked("config B\n\tbool\nconfig A\n\tbool \"a\"\n\tselect B\n").unwrap();
        assert_eq!(m.order, vec![Node::Symbol(SymId(1)), Node::Symbol(SymId(0))]);
    }

    #[test]
    fn relink_is_identity() {
        let m = linked("menu \"x\"\n\tdepends on A\nconfig B\n\ttristate \"b\"\n\tdefault m\nendmenu\nconfig A\n\tbool \"a\"\n").unwrap();
        assert_eq!(m.relink().unwrap(), m);
    }
}

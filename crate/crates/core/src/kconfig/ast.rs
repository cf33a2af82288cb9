//! Unlinked syntax tree. Source locations are kept for diagnostics but do not
//! take part in structural equality.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tristate::Tristate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolType {
    Bool,
    Tristate,
    String,
    Int,
    Hex,
}

impl SymbolType {
    pub fn is_boolish(self) -> bool {
        matches!(self, SymbolType::Bool | SymbolType::Tristate)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, SymbolType::Int | SymbolType::Hex)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            SymbolType::Bool => "bool",
            SymbolType::Tristate => "tristate",
            SymbolType::String => "string",
            SymbolType::Int => "int",
            SymbolType::Hex => "hex",
        }
    }
}

impl fmt::Display for SymbolType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Leq,
    Gt,
    Geq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Neq => "!=",
            CmpOp::Lt => "<",
            CmpOp::Leq => "<=",
            CmpOp::Gt => ">",
            CmpOp::Geq => ">=",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Neq => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Leq => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Geq => ord != Less,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Symbol(String),
    Tri(Tristate),
    /// Quoted string or bare number.
    Literal(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    /// Operands are always leaves.
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn sym(name: &str) -> Expr {
        Expr::Symbol(name.to_string())
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Symbol(_) | Expr::Tri(_) | Expr::Literal(_))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Expr) -> Expr {
        Expr::Not(Box::new(a))
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    /// Names of all referenced symbols, in first-occurrence order.
    pub fn symbols(&self, out: &mut Vec<String>) {
        match self {
            Expr::Symbol(s) => {
                if !out.contains(s) {
                    out.push(s.clone())
                }
            }
            Expr::Tri(_) | Expr::Literal(_) => {}
            Expr::Not(a) => a.symbols(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Cmp(_, a, b) => {
                a.symbols(out);
                b.symbols(out);
            }
        }
    }
}

/// Location of a construct. Always compares equal.
#[derive(Clone, Debug, Default)]
pub struct Loc {
    pub file: String,
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

impl Eq for Loc {}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Property {
    Prompt { text: String, cond: Option<Expr> },
    Default { value: Expr, cond: Option<Expr> },
    DependsOn(Expr),
    Select { target: String, cond: Option<Expr> },
    Imply { target: String, cond: Option<Expr> },
    Range { lo: Expr, hi: Expr, cond: Option<Expr> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyAt {
    pub prop: Property,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigEntry {
    pub name: String,
    pub menuconfig: bool,
    pub ty: Option<SymbolType>,
    pub properties: Vec<PropertyAt>,
    pub modules: bool,
    pub help: Option<String>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MenuEntry {
    pub title: String,
    pub depends: Vec<Expr>,
    pub visible_if: Vec<Expr>,
    pub children: Vec<Entry>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceEntry {
    pub name: Option<String>,
    pub ty: Option<SymbolType>,
    /// Prompt, Default and DependsOn only.
    pub properties: Vec<PropertyAt>,
    pub help: Option<String>,
    pub children: Vec<Entry>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Config(ConfigEntry),
    Menu(MenuEntry),
    Choice(ChoiceEntry),
    If {
        cond: Expr,
        children: Vec<Entry>,
        loc: Loc,
    },
    Comment {
        text: String,
        depends: Vec<Expr>,
        loc: Loc,
    },
    /// `entries` is empty until the loader resolves the include.
    Source {
        path: String,
        entries: Vec<Entry>,
        loc: Loc,
    },
}

/// A parsed but unlinked model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KconfigModel {
    pub mainmenu: Option<String>,
    pub entries: Vec<Entry>,
}

impl KconfigModel {
    /// Visits every config entry in document order, descending into includes.
    pub fn configs(&self) -> Vec<&ConfigEntry> {
        fn walk<'a>(entries: &'a [Entry], out: &mut Vec<&'a ConfigEntry>) {
            for e in entries {
                match e {
                    Entry::Config(c) => out.push(c),
                    Entry::Menu(m) => walk(&m.children, out),
                    Entry::Choice(c) => walk(&c.children, out),
                    Entry::If { children, .. } => walk(children, out),
                    Entry::Source { entries, .. } => walk(entries, out),
                    Entry::Comment { .. } => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.entries, &mut out);
        out
    }
}

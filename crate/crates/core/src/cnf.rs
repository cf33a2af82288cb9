//! Constant folding, polarity-aware Tseitin transformation and DIMACS text.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::kconfig::LinkedModel;
use crate::logic::{Abstraction, PropFormula, VarId, VarMeaning};

use PropFormula as F;

/// Role and symbol name of a CNF variable, as written in DIMACS comments.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarLabel {
    pub role: String,
    pub symbol: String,
}

impl VarLabel {
    pub fn aux() -> VarLabel {
        VarLabel {
            role: "AUX".into(),
            symbol: String::new(),
        }
    }

    pub fn is_aux(&self) -> bool {
        self.role == "AUX"
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
    /// Label of variable `i + 1`.
    pub labels: Vec<VarLabel>,
    /// Extra comment lines written before the variable labels.
    pub notes: Vec<String>,
}

impl CnfFormula {
    /// Adds a clause after removing duplicate literals; tautologies are dropped.
    pub fn add_clause(&mut self, lits: &[i32]) {
        let mut c: Vec<i32> = Vec::with_capacity(lits.len());
        for &l in lits {
            if c.contains(&-l) {
                return;
            }
            if !c.contains(&l) {
                c.push(l);
            }
        }
        self.clauses.push(c);
    }

    pub fn new_aux(&mut self) -> i32 {
        self.num_vars += 1;
        self.labels.push(VarLabel::aux());
        self.num_vars as i32
    }

    pub fn solver(&self) -> kfix_sat::Solver {
        kfix_sat::Solver::from_dimacs(self.num_vars, &self.clauses)
    }

    pub fn satisfied_by(&self, assign: &dyn Fn(VarId) -> bool) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| assign(l.unsigned_abs()) == (l > 0)))
    }

    /// Variable id of the first variable with this role and symbol.
    pub fn find(&self, role: &str, symbol: &str) -> Option<VarId> {
        self.labels.iter().position(|l| l.role == role && l.symbol == symbol).map(|i| i as VarId + 1)
    }
}

/// Folds constants, removes double negation and flattens nested And/Or.
pub fn simplify(f: &PropFormula) -> PropFormula {
    match f {
        F::True | F::False | F::Var(_) => f.clone(),
        F::Not(x) => F::not(simplify(x)),
        F::And(xs) => F::and(xs.iter().map(simplify).collect::<Vec<_>>()),
        F::Or(xs) => F::or(xs.iter().map(simplify).collect::<Vec<_>>()),
        F::Implies(a, b) => F::implies(simplify(a), simplify(b)),
        F::Iff(a, b) => F::iff(simplify(a), simplify(b)),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Polarity {
    Pos,
    Neg,
    Both,
}

impl Polarity {
    fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
            Polarity::Both => Polarity::Both,
        }
    }

    fn pos(self) -> bool {
        self != Polarity::Neg
    }

    fn neg(self) -> bool {
        self != Polarity::Pos
    }
}

struct Tseitin<'a> {
    cnf: &'a mut CnfFormula,
    cache: HashMap<(PropFormula, Polarity), i32>,
}

impl Tseitin<'_> {
    /// A literal `l` with `l -> f` (positive polarity) and/or `f -> l`
    /// (negative polarity).
    fn lit(&mut self, f: &PropFormula, pol: Polarity) -> i32 {
        match f {
            F::Var(v) => return *v as i32,
            F::Not(x) => return -self.lit(x, pol.flip()),
            _ => {}
        }
        if let Some(&l) = self.cache.get(&(f.clone(), pol)) {
            return l;
        }
        let a = match f {
            F::True | F::False => {
                let a = self.cnf.new_aux();
                self.cnf.add_clause(&[if *f == F::True { a } else { -a }]);
                a
            }
            F::And(xs) => self.gate(xs, pol, true),
            F::Or(xs) => self.gate(xs, pol, false),
            F::Implies(x, y) => self.gate(&[F::not((**x).clone()), (**y).clone()], pol, false),
            F::Iff(x, y) => {
                let (l, r) = (self.lit(x, Polarity::Both), self.lit(y, Polarity::Both));
                let a = self.cnf.new_aux();
                if pol.pos() {
                    self.cnf.add_clause(&[-a, -l, r]);
                    self.cnf.add_clause(&[-a, l, -r]);
                }
                if pol.neg() {
                    self.cnf.add_clause(&[a, l, r]);
                    self.cnf.add_clause(&[a, -l, -r]);
                }
                a
            }
            F::Var(_) | F::Not(_) => unreachable!(),
        };
        self.cache.insert((f.clone(), pol), a);
        a
    }

    fn gate(&mut self, xs: &[PropFormula], pol: Polarity, conj: bool) -> i32 {
        let lits: Vec<i32> = xs.iter().map(|x| self.lit(x, pol)).collect();
        let a = self.cnf.new_aux();
        // for a disjunction, a -> (l1 | ... | ln) and each li -> a
        let (one_sided, per_child) = if conj { (pol.neg(), pol.pos()) } else { (pol.pos(), pol.neg()) };
        if per_child {
            for &l in &lits {
                if conj {
                    self.cnf.add_clause(&[-a, l]);
                } else {
                    self.cnf.add_clause(&[a, -l]);
                }
            }
        }
        if one_sided {
            let mut c: Vec<i32> = if conj { lits.iter().map(|l| -l).collect() } else { lits.clone() };
            c.push(if conj { a } else { -a });
            self.cnf.add_clause(&c);
        }
        a
    }

    /// Adds clauses requiring `f` to hold.
    fn assert(&mut self, f: &PropFormula) {
        match f {
            F::True => {}
            F::And(xs) => xs.iter().for_each(|x| self.assert(x)),
            F::Or(xs) => {
                let c: Vec<i32> = xs.iter().map(|x| self.lit(x, Polarity::Pos)).collect();
                self.cnf.add_clause(&c);
            }
            F::Implies(a, b) => {
                let c = [self.lit(a, Polarity::Neg), self.lit(b, Polarity::Pos)];
                self.cnf.add_clause(&[-c[0], c[1]]);
            }
            F::Not(x) if matches!(**x, F::Or(_)) => {
                let F::Or(xs) = &**x else { unreachable!() };
                for y in xs {
                    self.assert(&F::not(y.clone()));
                }
            }
            F::False => {
                let a = self.cnf.new_aux();
                self.cnf.add_clause(&[a]);
                self.cnf.add_clause(&[-a]);
            }
            _ => {
                let l = self.lit(f, Polarity::Pos);
                self.cnf.add_clause(&[l]);
            }
        }
    }
}

/// Equisatisfiable CNF of `f` over `num_vars` original variables; auxiliary
/// variables are numbered after them.
pub fn tseitin(f: &PropFormula, num_vars: usize) -> CnfFormula {
    let mut cnf = CnfFormula {
        num_vars,
        clauses: Vec::new(),
        labels: vec![VarLabel::aux(); num_vars],
        notes: Vec::new(),
    };
    tseitin_into(f, &mut cnf);
    cnf
}

/// Appends the clauses of `f` to an existing CNF.
pub fn tseitin_into(f: &PropFormula, cnf: &mut CnfFormula) {
    let mut t = Tseitin {
        cnf,
        cache: HashMap::new(),
    };
    t.assert(&simplify(f));
}

/// Labels for the abstraction's variables.
pub fn labels(model: &LinkedModel, abs: &Abstraction) -> Vec<VarLabel> {
    abs.vars
        .meanings
        .iter()
        .map(|m| match m {
            VarMeaning::Aux(_) => VarLabel::aux(),
            m => VarLabel {
                role: m.role(),
                symbol: model.symbol(m.symbol().expect("symbol variable")).name.clone(),
            },
        })
        .collect()
}

/// CNF of all hard constraints, with symbol labels on the original variables.
pub fn model_cnf(model: &LinkedModel, abs: &Abstraction) -> CnfFormula {
    let mut cnf = CnfFormula {
        num_vars: abs.vars.num_vars(),
        clauses: Vec::new(),
        labels: labels(model, abs),
        notes: abs.notes.clone(),
    };
    for c in &abs.constraints {
        tseitin_into(&c.formula, &mut cnf);
    }
    cnf
}

/// DIMACS text: comment lines, then the header, then one clause per line.
pub fn export_dimacs(cnf: &CnfFormula) -> String {
    let mut out = String::new();
    for n in &cnf.notes {
        let _ = writeln!(out, "c {n}");
    }
    for (i, l) in cnf.labels.iter().enumerate() {
        if !l.is_aux() {
            let _ = writeln!(out, "c {} {} {}", i + 1, l.role, l.symbol);
        }
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: malformed header, expected `p cnf <vars> <clauses>`")]
    Header(usize),
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: literal {lit} exceeds declared {num_vars} variables")]
    LiteralRange { line: usize, lit: i64, num_vars: usize },
    #[error("line {0}: malformed literal `{1}`")]
    Literal(usize, String),
    #[error("last clause is missing its terminating 0")]
    Unterminated,
    #[error("header declares {declared} clauses but {found} were found")]
    ClauseCount { declared: usize, found: usize },
}

pub fn import_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut labels: HashMap<usize, VarLabel> = HashMap::new();
    let mut notes = Vec::new();
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c').filter(|r| r.is_empty() || r.starts_with(char::is_whitespace)) {
            let rest = rest.trim();
            if let Some(label) = parse_label(rest) {
                labels.insert(label.0, label.1);
            } else if !rest.is_empty() {
                notes.push(rest.to_string());
            }
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] if header.is_none() => match (v.parse(), c.parse()) {
                    (Ok(v), Ok(c)) => header = Some((v, c)),
                    _ => return Err(DimacsError::Header(lineno)),
                },
                _ => return Err(DimacsError::Header(lineno)),
            }
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| DimacsError::Literal(lineno, tok.to_string()))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > num_vars {
                return Err(DimacsError::LiteralRange { line: lineno, lit, num_vars });
            } else {
                current.push(lit as i32);
            }
        }
    }
    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if declared != clauses.len() {
        return Err(DimacsError::ClauseCount { declared, found: clauses.len() });
    }
    Ok(CnfFormula {
        num_vars,
        clauses,
        labels: (1..=num_vars).map(|i| labels.remove(&i).unwrap_or_else(VarLabel::aux)).collect(),
        notes,
    })
}

fn parse_label(rest: &str) -> Option<(usize, VarLabel)> {
    let (id, tail) = rest.split_once(char::is_whitespace)?;
    let id: usize = id.parse().ok()?;
    let (role, symbol) = tail.trim().rsplit_once(char::is_whitespace)?;
    let role = role.trim();
    let known = matches!(role, "SYM_Y" | "SYM_M" | "SEL_Y" | "SEL_M") || (role.starts_with("NB_EQ(") && role.ends_with(')'));
    known.then(|| {
        (
            id,
            VarLabel {
                role: role.to_string(),
                symbol: symbol.to_string(),
            },
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_models(cnf: &CnfFormula, project: usize) -> usize {
        let mut seen = std::collections::HashSet::new();
        for bits in 0u64..(1 << cnf.num_vars) {
            let assign = |v: VarId| bits >> (v - 1) & 1 == 1;
            if cnf.satisfied_by(&assign) {
                seen.insert(bits & ((1 << project) - 1));
            }
        }
        seen.len()
    }

    #[test]
    fn simplify_examples() {
        assert_eq!(simplify(&F::And(vec![F::True, F::Var(1)])), F::Var(1));
        assert_eq!(simplify(&F::Not(Box::new(F::Not(Box::new(F::Var(1)))))), F::Var(1));
        assert_eq!(simplify(&F::Or(vec![F::Var(1), F::True])), F::True);
    }

    #[test]
    fn tseitin_examples() {
        let cnf = tseitin(&F::Var(1), 1);
        assert_eq!(cnf.clauses, vec![vec![1]]);
        let f = F::Or(vec![F::And(vec![F::Var(1), F::Var(2)]), F::Var(3)]);
        let cnf = tseitin(&f, 3);
        assert_eq!(cnf.num_vars, 4);
        assert_eq!(count_models(&cnf, 3), 5);
        let cnf = tseitin(&F::And(vec![F::Var(1), F::Not(Box::new(F::Var(1)))]), 1);
        assert_eq!(count_models(&cnf, 1), 0);
    }

    #[test]
    fn dimacs_format() {
        let cnf = CnfFormula {
            num_vars: 2,
            clauses: vec![vec![1, -2]],
            labels: vec![VarLabel::aux(); 2],
            notes: vec![],
        };
        assert_eq!(export_dimacs(&cnf), "p cnf 2 1\n1 -2 0\n");
        let empty = CnfFormula {
            num_vars: 3,
            labels: vec![VarLabel::aux(); 3],
            ..Default::default()
        };
        assert_eq!(export_dimacs(&empty), "p cnf 3 0\n");
        assert_eq!(import_dimacs(&export_dimacs(&cnf)).unwrap(), cnf);
    }

    #[test]
    fn import_errors() {
        assert!(matches!(import_dimacs("p cnf 1 1\n2 0\n"), Err(DimacsError::LiteralRange { .. })));
        assert!(matches!(import_dimacs("p cnf x 1\n"), Err(DimacsError::Header(1))));
        assert_eq!(import_dimacs("p cnf 2 1\n1 2\n"), Err(DimacsError::Unterminated));
        let spaced = import_dimacs("c hi\n  p  cnf 3  2 \n1\n -2 0 3\n\n0\n").unwrap();
        assert_eq!(spaced.clauses, vec![vec![1, -2], vec![3]]);
    }

    #[test]
    fn labels_round_trip() {
        let text = "c 1 SYM_Y X86\nc 2 NB_EQ(\"a b\") S\np cnf 3 1\n1 2 3 0\n";
        let cnf = import_dimacs(text).unwrap();
        assert_eq!(cnf.labels[1].role, "NB_EQ(\"a b\")");
        assert!(cnf.labels[2].is_aux());
        assert_eq!(export_dimacs(&cnf), text);
    }
}

#![allow(dead_code)]

use kfix_core::cnf::model_cnf;
use kfix_core::dotconfig::apply_fix;
use kfix_core::eval::{validate, Configuration, SymbolValue};
use kfix_core::kconfig::{link, parse, LinkedModel, SymId, SymbolType};
use kfix_core::rangefix::Resolution;
use kfix_core::logic::{build_formula_with, known_values, AbstractionOptions, SelectEncoding};
use kfix_core::tristate::Tristate;
use kfix_sat::{Budget, Lit, SatBackend, SolveResult};
use kfix_core::logic::PropFormula;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn model(src: &str) -> LinkedModel {
    link(&parse(src, "test").unwrap_or_else(|e| panic!("{e}\n{src}"))).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

/// Candidate values of every symbol: all tristate values the type admits, or
/// the known finite domain.
pub fn domains(m: &LinkedModel) -> Vec<Vec<SymbolValue>> {
    m.ids()
        .map(|id| match m.symbol(id).ty {
            SymbolType::Bool => vec![Tristate::No.into(), Tristate::Yes.into()],
            SymbolType::Tristate => Tristate::ALL.iter().map(|&t| t.into()).collect(),
            _ => known_values(m, id),
        })
        .collect()
}

/// Every assignment over the candidate domains.
pub fn assignments(m: &LinkedModel) -> Vec<Vec<SymbolValue>> {
    let doms = domains(m);
    let mut out = vec![Vec::new()];
    for d in &doms {
        out = out.into_iter().flat_map(|prefix| d.iter().map(move |v| [prefix.clone(), vec![v.clone()]].concat())).collect();
    }
    out
}

pub fn is_valid(m: &LinkedModel, values: &[SymbolValue]) -> bool {
    let cfg = Configuration {
        user: values.iter().cloned().map(Some).collect(),
        effective: values.to_vec(),
    };
    validate(m, &cfg).is_empty()
}

/// Compares the evaluator's valid set with the formula's projected model set
/// over all assignments. Returns the number of valid configurations.
pub fn dual_check(m: &LinkedModel, selects: SelectEncoding) -> Result<usize, String> {
    let abs = build_formula_with(m, &AbstractionOptions { selects, extra_values: vec![] }).map_err(|e| e.to_string())?;
    let cnf = model_cnf(m, &abs);
    let mut solver = cnf.solver();
    let mut valid = 0;
    for values in assignments(m) {
        let lits: Vec<Lit> = m
            .ids()
            .flat_map(|id| abs.vars.value_literals(id, &values[id.index()]).expect("domain value"))
            .map(Lit::from_dimacs)
            .collect();
        let sat = match solver.solve(&lits, &Budget::unlimited()) {
            SolveResult::Sat(_) => true,
            SolveResult::Unsat(_) => false,
            SolveResult::TimedOut => return Err("solver timed out".into()),
        };
        let ok = is_valid(m, &values);
        if sat != ok {
            let shown: Vec<String> = m.ids().map(|id| format!("{}={}", m.symbol(id).name, values[id.index()])).collect();
            return Err(format!("formula says {sat}, evaluator says {ok} for {}", shown.join(" ")));
        }
        valid += ok as usize;
    }
    Ok(valid)
}

/// The evaluator's valid configurations over the candidate domains.
pub fn valid_assignments(m: &LinkedModel) -> Vec<Vec<SymbolValue>> {
    assignments(m).into_iter().filter(|v| is_valid(m, v)).collect()
}

/// Whether some valid configuration keeps `kept` at their values in `cfg`
/// and meets every desired value.
pub fn reachable(valid: &[Vec<SymbolValue>], cfg: &Configuration, kept: &[SymId], desired: &[(SymId, SymbolValue)]) -> bool {
    valid.iter().any(|v| kept.iter().all(|id| v[id.index()] == cfg.effective[id.index()]) && desired.iter().all(|(id, d)| v[id.index()] == *d))
}

/// Checks a resolution against brute force: fix bound and ordering, exhaustive
/// minimality of each diagnosis, entry coverage and correctness of each fix.
pub fn check_resolution(
    m: &LinkedModel,
    valid: &[Vec<SymbolValue>],
    cfg: &Configuration,
    desired: &[(SymId, SymbolValue)],
    res: &Resolution,
) -> Result<(), String> {
    if res.fixes.len() > 3 {
        return Err(format!("{} fixes", res.fixes.len()));
    }
    if res.fixes.windows(2).any(|w| w[0].diagnosis.len() > w[1].diagnosis.len()) {
        return Err("fixes not ordered by diagnosis size".into());
    }
    let softs: Vec<SymId> = m.ids().filter(|id| !desired.iter().any(|(d, _)| d == id)).collect();
    if res.directly_applicable != reachable(valid, cfg, &softs, desired) {
        return Err(format!("directly applicable flag {} disagrees with brute force", res.directly_applicable));
    }
    for fix in &res.fixes {
        let diag: Vec<SymId> = fix.diagnosis.iter().map(|n| m.lookup(n).unwrap()).collect();
        for mask in 0..(1u32 << diag.len()) {
            let relaxed: Vec<SymId> = diag.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, id)| *id).collect();
            let kept: Vec<SymId> = softs.iter().copied().filter(|id| !relaxed.contains(id)).collect();
            let ok = reachable(valid, cfg, &kept, desired);
            let full = relaxed.len() == diag.len();
            if ok != full {
                return Err(format!("diagnosis {:?}: relaxing {relaxed:?} gives {ok}", fix.diagnosis));
            }
        }
        let mut covered: Vec<SymId> = fix.entries.iter().map(|e| e.symbol).collect();
        let mut expected: Vec<SymId> = diag.iter().copied().chain(desired.iter().map(|(d, _)| *d)).collect();
        covered.sort_unstable();
        expected.sort_unstable();
        if covered != expected {
            return Err(format!("fix {fix} does not cover diagnosis plus desired"));
        }
        let (after, _) = apply_fix(cfg, fix, m).map_err(|e| e.to_string())?;
        let violations = validate(m, &after);
        if !violations.is_empty() {
            return Err(format!("fix {fix} leaves violations {violations:?}"));
        }
        if let Some((id, v)) = desired.iter().find(|(id, v)| after.value(*id) != v) {
            return Err(format!("fix {fix} leaves {} at {} instead of {v}", m.symbol(*id).name, after.value(*id)));
        }
    }
    Ok(())
}

/// Random formula over variables `1..=vars`.
pub fn random_formula(rng: &mut ChaCha8Rng, vars: u32, depth: u32) -> PropFormula {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..12) {
            0 => PropFormula::True,
            1 => PropFormula::False,
            _ => PropFormula::Var(rng.random_range(1..=vars)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, vars, depth - 1);
    match rng.random_range(0..5) {
        0 => PropFormula::Not(Box::new(sub(rng))),
        1 => PropFormula::And((0..rng.random_range(2..4)).map(|_| sub(rng)).collect()),
        2 => PropFormula::Or((0..rng.random_range(2..4)).map(|_| sub(rng)).collect()),
        3 => PropFormula::Implies(Box::new(sub(rng)), Box::new(sub(rng))),
        _ => PropFormula::Iff(Box::new(sub(rng)), Box::new(sub(rng))),
    }
}

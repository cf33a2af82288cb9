//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{check_resolution, dual_check, model, random_formula, reachable, valid_assignments};
use kfix_core::cnf::{export_dimacs, import_dimacs, model_cnf, tseitin};
use kfix_core::dotconfig::apply_fix;
use kfix_core::eval::{bounds, recalculate, validate, visibility, SymbolValue};
use kfix_core::harness::{build_base_config, generate_conflict, run_evaluation, sample_config, EvalPlan, SampleParams};
use kfix_core::kconfig::{link, parse, SymId};
use kfix_core::logic::{build_formula, SelectEncoding};
use kfix_core::models::{load_bundled, BUNDLED};
use kfix_core::rangefix::symbolic::mab_example;
use kfix_core::rangefix::{resolve_conflict, Limits, ResolveError};
use kfix_core::synth::{large_model, small_model, SmallModelParams};
use kfix_core::tristate::{tri_and, tri_not, tri_or, Tristate};
use kfix_sat::{Budget, Lit, SatBackend, SolveResult};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn kleene() -> Result<String, String> {
    let start = Instant::now();
    let num = |t: Tristate| match t {
        Tristate::No => 0,
        Tristate::Mod => 1,
        Tristate::Yes => 2,
    };
    for a in Tristate::ALL {
        ensure(num(tri_not(a)) == 2 - num(a), || format!("!{a}"))?;
        for b in Tristate::ALL {
            ensure(num(tri_and(a, b)) == num(a).min(num(b)), || format!("{a} && {b}"))?;
            ensure(num(tri_or(a, b)) == num(a).max(num(b)), || format!("{a} || {b}"))?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok("9 and/or pairs, 3 negations".into())
}

fn dual_soundness() -> Result<String, String> {
    let start = Instant::now();
    let mut models = 0;
    for seed in 0..220u64 {
        let p = SmallModelParams {
            boolish: 3 + (seed % 6) as usize,
            ..Default::default()
        };
        let src = small_model(seed, &p);
        let m = model(&src);
        let boolish = m.ids().filter(|&id| m.symbol(id).ty.is_boolish()).count();
        ensure(boolish <= 8, || format!("seed {seed}: {boolish} symbols"))?;
        dual_check(&m, SelectEncoding::Split).map_err(|e| format!("seed {seed}: {e}"))?;
        models += 1;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("{models} models in {:.1}s", t.as_secs_f64()))
}

fn rangefix_golden() -> Result<String, String> {
    let fixes = mab_example().resolve(&Limits::default()).map_err(|e| e.to_string())?;
    let mut got: Vec<(Vec<String>, String)> = fixes.iter().map(|f| (f.diagnosis.clone(), f.to_string())).collect();
    got.sort();
    let want = vec![
        (vec!["a".to_string(), "b".to_string()], "[(a,b): a > 10 ∧ a < b]".to_string()),
        (vec!["b".to_string(), "m".to_string()], "[m:= False, b: b > 10]".to_string()),
    ];
    ensure(got == want, || format!("{got:?}"))?;
    Ok("diagnoses {a,b} and {m,b}".into())
}

fn fix_correctness() -> Result<String, String> {
    let mut conflicts = 0;
    let mut fixes = 0;
    for name in ["arch", "media", "tristate", "gen100", "gen300"] {
        let m = load_bundled(name).map_err(|e| e.to_string())?;
        let base = build_base_config(&m).map_err(|e| e.to_string())?;
        for (i, p_no) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
            let cfg = sample_config(&m, &SampleParams { p_no, seed: 100 + i as u64 }).map_err(|e| e.to_string())?;
            for size in 1..=10 {
                for k in 0..5u64 {
                    let Ok(conflict) = generate_conflict(&m, &cfg, &base, size, size as u64 * 31 + k) else { continue };
                    conflicts += 1;
                    let res = resolve_conflict(&m, &cfg, &conflict.desired, &Limits::default()).map_err(|e| format!("{name}: {e}"))?;
                    for f in &res.fixes {
                        fixes += 1;
                        let (after, _) = apply_fix(&cfg, f, &m).map_err(|e| e.to_string())?;
                        let hit = conflict.desired.iter().all(|(id, v)| after.value(*id) == v);
                        ensure(hit, || format!("{name}: {f} misses {:?}", conflict.desired))?;
                        let broken = validate(&m, &after);
                        ensure(broken.is_empty(), || format!("{name}: {f} leaves {broken:?}"))?;
                    }
                }
            }
        }
    }
    ensure(conflicts >= 500, || format!("only {conflicts} conflicts"))?;
    Ok(format!("{fixes} fixes over {conflicts} conflicts all resolve"))
}

fn minimality() -> Result<String, String> {
    let mut checked = 0;
    for seed in 0..200u64 {
        let p = SmallModelParams {
            boolish: 3 + (seed % 5) as usize,
            ..Default::default()
        };
        let m = model(&small_model(seed, &p));
        ensure(m.len() <= 10, || format!("seed {seed}: {} symbols", m.len()))?;
        let valid = valid_assignments(&m);
        let cfg = sample_config(&m, &SampleParams { p_no: 0.5, seed }).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let boolish: Vec<SymId> = m.ids().filter(|&id| m.symbol(id).ty.is_boolish()).collect();
        for _ in 0..3 {
            let k = rng.random_range(1..=3.min(boolish.len()));
            let mut chosen: Vec<SymId> = boolish.choose_multiple(&mut rng, k).copied().collect();
            chosen.sort_unstable();
            let desired: Vec<(SymId, SymbolValue)> = chosen
                .into_iter()
                .map(|id| {
                    let opts: Vec<Tristate> = Tristate::ALL
                        .into_iter()
                        .filter(|t| SymbolValue::Tri(*t).fits(m.symbol(id).ty) && *t != cfg.tri(id))
                        .collect();
                    (id, SymbolValue::Tri(*opts.choose(&mut rng).unwrap()))
                })
                .collect();
            match resolve_conflict(&m, &cfg, &desired, &Limits::default()) {
                Ok(res) => {
                    check_resolution(&m, &valid, &cfg, &desired, &res).map_err(|e| format!("seed {seed}: {e}"))?;
                    checked += 1;
                }
                Err(ResolveError::Impossible) => ensure(!reachable(&valid, &cfg, &[], &desired), || format!("seed {seed}: wrongly impossible"))?,
                Err(e) => return Err(format!("seed {seed}: {e}")),
            }
        }
    }
    Ok(format!("{checked} conflicts, every diagnosis minimal, at most 3 fixes"))
}

fn tseitin_check() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..1000 {
        let n = rng.random_range(1..=6u32);
        let f = random_formula(&mut rng, n, 4);
        let mut solver = tseitin(&f, n as usize).solver();
        for bits in 0u32..(1 << n) {
            let truth = f.eval(&|v| bits & (1 << (v - 1)) != 0);
            let lits: Vec<Lit> = (1..=n as i32).map(|v| Lit::from_dimacs(if bits & (1 << (v - 1)) != 0 { v } else { -v })).collect();
            let sat = matches!(solver.solve(&lits, &Budget::unlimited()), SolveResult::Sat(_));
            ensure(sat == truth, || format!("formula {i}: {f} under {bits:b}"))?;
        }
    }
    for name in BUNDLED {
        let m = load_bundled(name).map_err(|e| e.to_string())?;
        let text = export_dimacs(&model_cnf(&m, &build_formula(&m).map_err(|e| e.to_string())?));
        let again = export_dimacs(&import_dimacs(&text).map_err(|e| e.to_string())?);
        ensure(again == text, || format!("{name}: DIMACS round trip differs"))?;
    }
    Ok(format!("1000 formulas, {} DIMACS round trips", BUNDLED.len()))
}

fn harness_shape() -> Result<String, String> {
    let m = load_bundled("gen100").map_err(|e| e.to_string())?;
    let report = run_evaluation(&m, &EvalPlan::default()).map_err(|e| e.to_string())?;
    ensure(report.records.len() == 50, || format!("{} conflicts", report.records.len()))?;
    for size in 1..=10 {
        let n = report.records.iter().filter(|r| r.size == size).count();
        ensure(n == 5, || format!("size {size}: {n} conflicts"))?;
    }
    let text = report.to_text();
    let pct: f64 = text
        .lines()
        .filter_map(|l| l.trim_end().strip_suffix('%'))
        .map(|l| l.rsplit(' ').next().unwrap().parse::<f64>().unwrap())
        .sum();
    ensure((pct - 100.0).abs() <= 0.1, || format!("percentages sum to {pct}"))?;
    Ok(format!("50 conflicts, percentages sum to {pct:.1}"))
}

fn performance() -> Result<String, String> {
    let src = large_model(15_000, 7);
    let m = link(&parse(&src, "large").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(m.len() >= 15_000, || format!("{} symbols", m.len()))?;
    let start = Instant::now();
    let cnf = model_cnf(&m, &build_formula(&m).map_err(|e| e.to_string())?);
    let translate = start.elapsed();
    let start = Instant::now();
    let sat = cnf.solver().solve(&[], &Budget::unlimited()).is_sat();
    let solve = start.elapsed();
    ensure(sat, || "model unsatisfiable".into())?;
    let limit = Duration::from_secs(10);
    ensure(translate <= limit && solve <= limit, || format!("cnf {translate:?}, solve {solve:?}"))?;
    Ok(format!("{} symbols: cnf {:.2}s, solve {:.2}s", m.len(), translate.as_secs_f64(), solve.as_secs_f64()))
}

fn media_paths() -> Result<String, String> {
    let m = load_bundled("media").map_err(|e| e.to_string())?;
    let cfg = recalculate(&m, &vec![None; m.len()]).map_err(|e| e.to_string())?;
    let target = m.lookup("MEDIA_TUNER_SIMPLE").ok_or("no MEDIA_TUNER_SIMPLE")?;
    let res = resolve_conflict(&m, &cfg, &[(target, SymbolValue::Tri(Tristate::Yes))], &Limits::default()).map_err(|e| e.to_string())?;
    let (mut select, mut visible) = (0, 0);
    for f in &res.fixes {
        let (after, _) = apply_fix(&cfg, f, &m).map_err(|e| e.to_string())?;
        ensure(after.tri(target) == Tristate::Yes, || format!("{f} misses the target"))?;
        let b = bounds(&m, target, &after.effective);
        if visibility(&m, target, &after.effective) == Tristate::No && b.sel == Tristate::Yes {
            select += 1;
        } else if b.vis > Tristate::No && b.sel == Tristate::No {
            visible += 1;
        }
    }
    ensure(select >= 1 && visible >= 1, || format!("select {select}, visibility {visible}"))?;
    Ok(format!("{} fixes: {select} via select, {visible} via visibility", res.fixes.len()))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("kleene logic", kleene),
        ("dual brute-force soundness", dual_soundness),
        ("rangefix golden", rangefix_golden),
        ("fix correctness", fix_correctness),
        ("diagnosis minimality", minimality),
        ("tseitin equisatisfiability", tseitin_check),
        ("harness shape", harness_shape),
        ("performance proxy", performance),
        ("select vs visibility paths", media_paths),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

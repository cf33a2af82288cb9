mod common;

use common::{check_resolution, model, reachable, valid_assignments};
use kfix_core::cnf::model_cnf;
use kfix_core::dotconfig::apply_fix;
use kfix_core::eval::{bounds, recalculate, visibility, Configuration, SymbolValue};
use kfix_core::harness::{sample_config, SampleParams};
use kfix_core::kconfig::{LinkedModel, SymId};
use kfix_core::logic::build_formula;
use kfix_core::models::load_bundled;
use kfix_core::rangefix::symbolic::mab_example;
use kfix_core::rangefix::{build_soft_constraints, resolve_conflict, FixValue, Limits, ResolveError};
use kfix_core::synth::{small_model, SmallModelParams};
use kfix_core::tristate::Tristate::{self, Mod, No, Yes};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn defaults(m: &LinkedModel) -> Configuration {
    recalculate(m, &vec![None; m.len()]).unwrap()
}

fn tri(t: Tristate) -> SymbolValue {
    SymbolValue::Tri(t)
}

#[test]
fn mab_instance_yields_the_two_documented_fixes() {
    let fixes = mab_example().resolve(&Limits::default()).unwrap();
    let got: Vec<(Vec<String>, String)> = fixes.iter().map(|f| (f.diagnosis.clone(), f.to_string())).collect();
    assert_eq!(
        got,
        vec![
            (vec!["a".into(), "b".into()], "[(a,b): a > 10 ∧ a < b]".into()),
            (vec!["b".into(), "m".into()], "[m:= False, b: b > 10]".into()),
        ]
    );
}

#[test]
fn media_model_offers_select_and_visibility_paths() {
    let m = load_bundled("media").unwrap();
    let cfg = defaults(&m);
    let target = m.lookup("MEDIA_TUNER_SIMPLE").unwrap();
    let desired = vec![(target, tri(Yes))];
    let res = resolve_conflict(&m, &cfg, &desired, &Limits::default()).unwrap();
    assert!(!res.directly_applicable);
    assert!(res.fixes.len() >= 2);
    let mut via_select = 0;
    let mut via_visibility = 0;
    for f in &res.fixes {
        let (after, _) = apply_fix(&cfg, f, &m).unwrap();
        assert_eq!(after.tri(target), Yes, "{f}");
        let b = bounds(&m, target, &after.effective);
        if visibility(&m, target, &after.effective) == No && b.sel == Yes {
            via_select += 1;
        }
        if b.vis > No && b.sel == No {
            via_visibility += 1;
        }
    }
    assert!(via_select >= 1 && via_visibility >= 1, "{:?}", res.fixes.iter().map(|f| f.to_string()).collect::<Vec<_>>());
}

#[test]
fn directly_reachable_target_is_flagged() {
    let m = load_bundled("arch").unwrap();
    let cfg = defaults(&m);
    let res = resolve_conflict(&m, &cfg, &[(m.lookup("X86").unwrap(), tri(Yes))], &Limits::default()).unwrap();
    assert!(res.directly_applicable);
    assert!(res.fixes.is_empty());
}

#[test]
fn arch_blocked_64bit_needs_x86() {
    let m = load_bundled("arch").unwrap();
    let cfg = defaults(&m);
    let res = resolve_conflict(&m, &cfg, &[(m.lookup("64BIT").unwrap(), tri(Yes))], &Limits::default()).unwrap();
    let shown: Vec<String> = res.fixes.iter().map(|f| f.to_string()).collect();
    assert_eq!(shown, vec!["[X86 := y, 64BIT := y]"]);
}

#[test]
fn unreachable_target_is_impossible() {
    let m = model("config A\n\tbool \"a\"\n\tdepends on n\n");
    let err = resolve_conflict(&m, &defaults(&m), &[(SymId(0), tri(Yes))], &Limits::default()).unwrap_err();
    assert!(matches!(err, ResolveError::Impossible), "{err}");
}

#[test]
fn target_outside_the_type_is_rejected() {
    let m = model("config A\n\tbool \"a\"\n");
    let err = resolve_conflict(&m, &defaults(&m), &[(SymId(0), tri(Mod))], &Limits::default()).unwrap_err();
    assert!(matches!(err, ResolveError::InvalidTarget { .. }), "{err}");
}

#[test]
fn soft_constraints_cover_every_non_desired_symbol() {
    let m = model("config MODULES\n\tbool \"m\"\n\tmodules\n\tdefault y\nconfig A\n\ttristate \"a\"\n\tdefault m\nconfig B\n\tbool \"b\"\n");
    let cfg = defaults(&m);
    assert_eq!(cfg.tri(SymId(1)), Mod);
    let abs = build_formula(&m).unwrap();
    let mut cnf = model_cnf(&m, &abs);
    let softs = build_soft_constraints(&m, &abs, &mut cnf, &cfg, &[(SymId(2), tri(Yes))]).unwrap();
    assert_eq!(softs.iter().map(|(id, _)| *id).collect::<Vec<_>>(), vec![SymId(0), SymId(1)]);
    // the tristate at m: selector implies not-yes and module
    let s = softs[1].1;
    let y = abs.vars.yes[1].unwrap() as i32;
    let md = abs.vars.module[1].unwrap() as i32;
    assert!(cnf.clauses.contains(&vec![-s, -y]));
    assert!(cnf.clauses.contains(&vec![-s, md]));
    let mut all = model_cnf(&m, &abs);
    let desired: Vec<(SymId, SymbolValue)> = m.ids().map(|id| (id, cfg.value(id).clone())).collect();
    assert!(build_soft_constraints(&m, &abs, &mut all, &cfg, &desired).unwrap().is_empty());
}

#[test]
fn dependency_chain_diagnosis_is_minimal() {
    let src = "config A\n\tbool \"a\"\nconfig B\n\tbool \"b\"\n\tdepends on A\nconfig C\n\tbool \"c\"\n\tdepends on B\n";
    let m = model(src);
    let cfg = defaults(&m);
    let desired = vec![(SymId(2), tri(Yes))];
    let res = resolve_conflict(&m, &cfg, &desired, &Limits::default()).unwrap();
    assert_eq!(res.fixes.len(), 1);
    assert_eq!(res.fixes[0].diagnosis, vec!["A", "B"]);
    check_resolution(&m, &valid_assignments(&m), &cfg, &desired, &res).unwrap();
}

#[test]
fn tristate_diagnosis_gets_a_concrete_value() {
    let m = model("config MODULES\n\tbool \"m\"\n\tmodules\n\tdefault y\nconfig A\n\ttristate \"a\"\nconfig B\n\ttristate \"b\"\n\tdepends on A\n");
    let cfg = defaults(&m);
    let desired = vec![(SymId(2), tri(Mod))];
    let res = resolve_conflict(&m, &cfg, &desired, &Limits::default()).unwrap();
    assert_eq!(res.fixes.len(), 1);
    let e = &res.fixes[0].entries[0];
    assert_eq!(e.name, "A");
    assert!(matches!(e.value, FixValue::Value(SymbolValue::Tri(Mod | Yes))));
    check_resolution(&m, &valid_assignments(&m), &cfg, &desired, &res).unwrap();
}

#[test]
fn numeric_diagnosis_becomes_a_range() {
    let m = load_bundled("nonbool").unwrap();
    let mut cfg = defaults(&m);
    let smp = m.lookup("SMP").unwrap();
    let cpus = m.lookup("NR_CPUS").unwrap();
    cfg.set_user(smp, Some(tri(Yes)));
    cfg.set_user(cpus, Some(SymbolValue::Number(2)));
    cfg.recalculate(&m).unwrap();
    let numa = m.lookup("NUMA").unwrap();
    let res = resolve_conflict(&m, &cfg, &[(numa, tri(Yes))], &Limits::default()).unwrap();
    // NODES_SHIFT depends on NUMA and leaves its empty value with it
    let fix = res.fixes.iter().find(|f| f.diagnosis == ["NODES_SHIFT", "NR_CPUS"]).expect("fix changing NR_CPUS");
    assert_eq!(fix.to_string(), "[NR_CPUS: NR_CPUS ∈ {4, 8}, NODES_SHIFT: NODES_SHIFT ∈ {1..3}, NUMA := y]");
    let FixValue::Range { ranges, .. } = &fix.entries[0].value else { panic!("{fix}") };
    for (lo, _) in ranges {
        let mut c = cfg.clone();
        c.set_user(cpus, Some(SymbolValue::Number(*lo)));
        c.set_user(numa, Some(tri(Yes)));
        c.recalculate(&m).unwrap();
        assert_eq!(c.tri(numa), Yes);
    }
}

#[test]
fn out_of_domain_values_extend_the_abstraction() {
    let m = load_bundled("nonbool").unwrap();
    let mut cfg = defaults(&m);
    let shift = m.lookup("LOG_BUF_SHIFT").unwrap();
    cfg.set_user(shift, Some(SymbolValue::Number(13)));
    cfg.recalculate(&m).unwrap();
    assert_eq!(cfg.value(shift), &SymbolValue::Number(13));
    let pt = m.lookup("PRINTK_TIME").unwrap();
    let res = resolve_conflict(&m, &cfg, &[(pt, tri(Yes))], &Limits::default()).unwrap();
    assert!(!res.fixes.is_empty());
    for f in &res.fixes {
        let (after, _) = apply_fix(&cfg, f, &m).unwrap();
        assert_eq!(after.tri(pt), Yes, "{f}");
    }
}

/// Random conflicts on small generated models, checked exhaustively.
#[test]
fn small_model_resolutions_match_brute_force() {
    let mut checked = 0;
    for seed in 0..150u64 {
        let p = SmallModelParams {
            boolish: 3 + (seed % 5) as usize,
            ..Default::default()
        };
        let m = model(&small_model(seed, &p));
        assert!(m.len() <= 10);
        let valid = valid_assignments(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = sample_config(&m, &SampleParams { p_no: 0.5, seed }).unwrap();
        let boolish: Vec<SymId> = m.ids().filter(|&id| m.symbol(id).ty.is_boolish()).collect();
        for _ in 0..3 {
            let k = rng.random_range(1..=2.min(boolish.len()));
            let mut chosen: Vec<SymId> = boolish.choose_multiple(&mut rng, k).copied().collect();
            chosen.sort_unstable();
            let desired: Vec<(SymId, SymbolValue)> = chosen
                .into_iter()
                .map(|id| {
                    let opts: Vec<Tristate> = Tristate::ALL.into_iter().filter(|t| tri(*t).fits(m.symbol(id).ty) && *t != cfg.tri(id)).collect();
                    (id, tri(*opts.choose(&mut rng).unwrap()))
                })
                .collect();
            match resolve_conflict(&m, &cfg, &desired, &Limits::default()) {
                Ok(res) => {
                    if let Err(e) = check_resolution(&m, &valid, &cfg, &desired, &res) {
                        panic!("seed {seed} desired {desired:?}: {e}");
                    }
                    checked += 1;
                }
                Err(ResolveError::Impossible) => assert!(!reachable(&valid, &cfg, &[], &desired), "seed {seed}"),
                Err(e) => panic!("seed {seed}: {e}"),
            }
        }
    }
    assert!(checked > 200, "{checked}");
}

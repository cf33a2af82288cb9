mod common;

use kfix_core::eval::{bounds, validate, visibility};
use kfix_core::harness::*;
use kfix_core::models::{load_bundled, BUNDLED};
use kfix_core::tristate::Tristate::{No, Yes};

#[test]
fn samples_and_base_configurations_are_valid() {
    for name in BUNDLED {
        let m = load_bundled(name).unwrap();
        let base = build_base_config(&m).unwrap();
        assert!(validate(&m, &base).is_empty(), "{name} base");
        for seed in 0..4 {
            for p in [0.1, 0.5, 0.9] {
                let cfg = sample_config(&m, &SampleParams { p_no: p, seed }).unwrap();
                assert!(validate(&m, &cfg).is_empty(), "{name} seed {seed} p {p}");
            }
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    let m = load_bundled("gen100").unwrap();
    let p = SampleParams { p_no: 0.3, seed: 11 };
    assert_eq!(sample_config(&m, &p).unwrap(), sample_config(&m, &p).unwrap());
}

#[test]
fn p_no_of_one_turns_off_everything_settable() {
    let m = load_bundled("gen100").unwrap();
    let cfg = sample_config(&m, &SampleParams { p_no: 1.0, seed: 5 }).unwrap();
    for id in m.ids() {
        if let Some(v) = cfg.user_value(id) {
            assert!(v.tri() == No || bounds(&m, id, &cfg.effective).sel > No, "{}", m.symbol(id).name);
        }
    }
}

#[test]
fn lower_p_no_enables_more_symbols() {
    let m = load_bundled("gen100").unwrap();
    let enabled = |p: f64| -> usize {
        (0..30)
            .map(|seed| {
                let cfg = sample_config(&m, &SampleParams { p_no: p, seed }).unwrap();
                m.ids().filter(|&id| cfg.tri(id) != No).count()
            })
            .sum()
    };
    assert!(enabled(0.10) > enabled(0.90));
}

#[test]
fn base_configuration_maximizes() {
    let l1 = load_bundled("arch").unwrap();
    let base = build_base_config(&l1).unwrap();
    assert!(l1.ids().all(|id| base.tri(id) == Yes));
    let ch = load_bundled("choice").unwrap();
    let base = build_base_config(&ch).unwrap();
    for c in &ch.choices {
        if c.ty == kfix_core::kconfig::SymbolType::Bool {
            assert_eq!(c.members.iter().filter(|&&id| base.tri(id) == Yes).count(), 1);
        }
    }
}

#[test]
fn base_enables_every_select_forced_symbol() {
    for name in ["media", "tristate", "gen100"] {
        let m = load_bundled(name).unwrap();
        let base = build_base_config(&m).unwrap();
        for seed in 0..10 {
            let cfg = sample_config(&m, &SampleParams { p_no: 0.5, seed }).unwrap();
            for id in m.ids() {
                if bounds(&m, id, &cfg.effective).sel > No {
                    assert!(base.tri(id) != No, "{name} {}", m.symbol(id).name);
                }
            }
        }
    }
}

#[test]
fn arch_conflict_targets_64bit() {
    let m = load_bundled("arch").unwrap();
    let cfg = sample_config(&m, &SampleParams { p_no: 1.0, seed: 0 }).unwrap();
    let base = build_base_config(&m).unwrap();
    let bit = m.lookup("64BIT").unwrap();
    assert_eq!(visibility(&m, bit, &cfg.effective), No);
    assert_eq!(eligible_symbols(&m, &cfg, &base), vec![bit]);
    let c = generate_conflict(&m, &cfg, &base, 1, 3).unwrap();
    assert_eq!(c.desired, vec![(bit, Yes.into())]);
    assert!(matches!(generate_conflict(&m, &cfg, &base, 0, 3), Err(HarnessError::InvalidSize(0))));
    assert!(matches!(generate_conflict(&m, &cfg, &base, 2, 3), Err(HarnessError::Shortfall { wanted: 2, eligible: 1 })));
}

#[test]
fn conflict_generation_is_reproducible() {
    let m = load_bundled("gen300").unwrap();
    let cfg = sample_config(&m, &SampleParams { p_no: 0.5, seed: 1 }).unwrap();
    let base = build_base_config(&m).unwrap();
    let a = generate_conflict(&m, &cfg, &base, 6, 42).unwrap();
    let b = generate_conflict(&m, &cfg, &base, 6, 42).unwrap();
    assert_eq!(a.desired, b.desired);
    assert_eq!(a.desired.len(), 6);
    for (id, v) in &a.desired {
        assert!(*v == base.value(*id).clone() || v.tri() == No);
        assert_ne!(cfg.value(*id), v);
    }
}

#[test]
fn one_sample_gives_fifty_conflicts() {
    let m = load_bundled("gen100").unwrap();
    let report = run_evaluation(&m, &EvalPlan::default()).unwrap();
    assert_eq!(report.records.len(), 50);
    for size in 1..=10 {
        assert_eq!(report.records.iter().filter(|r| r.size == size).count(), 5);
    }
    let s = report.summary();
    assert_eq!(s.generated, 50);
    assert!(s.resolved <= s.with_fix && s.with_fix <= s.generated);
    assert_eq!(s.outcomes.iter().map(|(_, n)| n).sum::<usize>(), s.total_fixes);
    let csv = report.to_csv();
    assert!(csv.starts_with("sample,p_no,conflict,conflict_size,"));
    assert_eq!(csv.lines().count() - 1, report.records.iter().map(|r| r.fixes.len().max(1)).sum::<usize>());
    let text = report.to_text();
    let pct: f64 = text
        .lines()
        .filter(|l| l.trim_end().ends_with('%'))
        .map(|l| l.trim_end().trim_end_matches('%').rsplit(' ').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((pct - 100.0).abs() <= 0.1, "{text}");
}

#[test]
fn full_plan_shape_has_1350_conflicts() {
    let m = load_bundled("gen300").unwrap();
    let plan = EvalPlan {
        samples: 27,
        ..Default::default()
    };
    let report = run_evaluation(&m, &plan).unwrap();
    assert_eq!(report.records.len(), 1350);
    let errs: Vec<_> = report.records.iter().filter_map(|r| r.error.clone()).collect();
    assert!(errs.is_empty(), "{errs:?}");
}

#[test]
fn evaluation_is_reproducible() {
    let m = load_bundled("tristate").unwrap();
    let plan = EvalPlan { seed: 9, ..Default::default() };
    let strip = |r: &Report| r.records.iter().map(|x| (x.index, x.size, x.fixes.clone(), x.error.clone())).collect::<Vec<_>>();
    assert_eq!(strip(&run_evaluation(&m, &plan).unwrap()), strip(&run_evaluation(&m, &plan).unwrap()));
}

mod common;

use common::model;
use kfix_core::dotconfig::{apply_fix, load_dotconfig, save_dotconfig};
use kfix_core::eval::{validate, SymbolValue};
use kfix_core::harness::{classify_fix, sample_config, FixOutcome, SampleParams};
use kfix_core::kconfig::SymId;
use kfix_core::models::{load_bundled, BUNDLED};
use kfix_core::rangefix::{Conflict, Fix, FixEntry, FixValue};
use kfix_core::tristate::Tristate::{No, Yes};

fn entry(m: &kfix_core::kconfig::LinkedModel, name: &str, v: SymbolValue) -> FixEntry {
    FixEntry {
        symbol: m.lookup(name).unwrap(),
        name: name.into(),
        value: FixValue::Value(v),
    }
}

#[test]
fn arch_user_value_recalculates() {
    let m = load_bundled("arch").unwrap();
    let l = load_dotconfig("CONFIG_X86=y\n", &m).unwrap();
    let x86 = m.lookup("X86").unwrap();
    assert_eq!(l.config.user_value(x86), Some(&SymbolValue::Tri(Yes)));
    assert_eq!(l.config.tri(m.lookup("64BIT").unwrap()), No);
    assert!(l.warnings.is_empty());
}

#[test]
fn empty_file_gives_defaults() {
    let m = load_bundled("media").unwrap();
    let l = load_dotconfig("", &m).unwrap();
    assert!(l.config.user.iter().all(Option::is_none));
    assert_eq!(l.config.tri(m.lookup("I2C").unwrap()), Yes);
}

#[test]
fn arch_all_n_writes_four_not_set_lines() {
    let m = load_bundled("arch").unwrap();
    let l = load_dotconfig("", &m).unwrap();
    let text = save_dotconfig(&l.config, &m);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.starts_with("# CONFIG_") && l.ends_with(" is not set")), "{text}");
}

#[test]
fn save_load_save_is_byte_identical() {
    for name in BUNDLED {
        let m = load_bundled(name).unwrap();
        for seed in 0..5 {
            let cfg = sample_config(&m, &SampleParams { p_no: 0.4, seed }).unwrap();
            let text = save_dotconfig(&cfg, &m);
            let back = load_dotconfig(&text, &m).unwrap();
            assert_eq!(back.config.effective, cfg.effective, "{name} seed {seed}");
            assert_eq!(save_dotconfig(&back.config, &m), text, "{name} seed {seed}");
        }
    }
}

const SELECT_PATH: &str = "config A\n\tbool \"a\"\n\tselect T\nconfig T\n\tbool\n";

#[test]
fn invisible_entry_before_its_selector_is_not_applicable() {
    let m = model(SELECT_PATH);
    let cfg = load_dotconfig("", &m).unwrap().config;
    let fix = Fix {
        diagnosis: vec!["A".into()],
        entries: vec![entry(&m, "T", Yes.into()), entry(&m, "A", Yes.into())],
    };
    let (after, report) = apply_fix(&cfg, &fix, &m).unwrap();
    assert_eq!(after.tri(SymId(1)), Yes);
    assert_eq!(report.entries.iter().map(|e| e.applicable).collect::<Vec<_>>(), vec![false, true]);
    assert!(report.entries.iter().all(|e| e.reached));
    let conflict = Conflict {
        desired: vec![(SymId(1), Yes.into())],
        base_config: cfg.clone(),
    };
    assert_eq!(classify_fix(&m, &cfg, &conflict, &fix).unwrap(), FixOutcome::NotApplicableButResolves);
    // selector first: the invisible entry is reached through the select
    let ordered = Fix {
        diagnosis: fix.diagnosis.clone(),
        entries: vec![fix.entries[1].clone(), fix.entries[0].clone()],
    };
    assert_eq!(classify_fix(&m, &cfg, &conflict, &ordered).unwrap(), FixOutcome::ApplicableResolves);
}

#[test]
fn empty_fix_leaves_configuration_unchanged() {
    let m = load_bundled("arch").unwrap();
    let cfg = load_dotconfig("CONFIG_X86=y\n", &m).unwrap().config;
    let (after, report) = apply_fix(&cfg, &Fix { diagnosis: vec![], entries: vec![] }, &m).unwrap();
    assert_eq!(after.effective, cfg.effective);
    assert!(report.entries.is_empty());
    let conflict = Conflict {
        desired: vec![(m.lookup("64BIT").unwrap(), Yes.into())],
        base_config: cfg.clone(),
    };
    let empty = Fix { diagnosis: vec![], entries: vec![] };
    assert_eq!(classify_fix(&m, &cfg, &conflict, &empty).unwrap(), FixOutcome::ApplicableResolves);
}

#[test]
fn visible_fix_is_fully_applicable_and_valid() {
    let m = load_bundled("arch").unwrap();
    let cfg = load_dotconfig("", &m).unwrap().config;
    let fix = Fix {
        diagnosis: vec!["X86".into()],
        entries: vec![entry(&m, "X86", Yes.into()), entry(&m, "64BIT", Yes.into())],
    };
    let (after, report) = apply_fix(&cfg, &fix, &m).unwrap();
    assert!(report.fully_applicable());
    assert!(validate(&m, &after).is_empty());
}

#[test]
fn fix_for_another_architecture_does_not_resolve() {
    let a = model("config X86\n\tbool \"x86\"\nconfig 64BIT\n\tbool \"64-bit\"\n\tdepends on X86\nconfig ARCH_OK\n\tbool\n");
    let b = model("config X86\n\tbool \"x86\"\nconfig 64BIT\n\tbool \"64-bit\"\n\tdepends on X86 && ARCH_OK\nconfig ARCH_OK\n\tbool\n");
    let cfg_a = load_dotconfig("", &a).unwrap().config;
    let desired = vec![(SymId(1), SymbolValue::Tri(Yes))];
    let res = kfix_core::rangefix::resolve_conflict(&a, &cfg_a, &desired, &Default::default()).unwrap();
    let fix = &res.fixes[0];
    let cfg_b = load_dotconfig("", &b).unwrap().config;
    let conflict = Conflict { desired, base_config: cfg_b.clone() };
    assert_eq!(classify_fix(&a, &cfg_a, &Conflict { base_config: cfg_a.clone(), ..conflict.clone() }, fix).unwrap(), FixOutcome::ApplicableResolves);
    assert_eq!(classify_fix(&b, &cfg_b, &conflict, fix).unwrap(), FixOutcome::DoesNotResolve);
}

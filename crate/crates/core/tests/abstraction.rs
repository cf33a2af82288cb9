mod common;

use common::{dual_check, model};
use kfix_core::logic::SelectEncoding;
use kfix_core::synth::{small_model, SmallModelParams};

const ARCH: &str = include_str!("../models/arch/Kconfig");

#[test]
fn arch_has_twelve_valid_configurations() {
    assert_eq!(dual_check(&model(ARCH), SelectEncoding::Split), Ok(12));
}

#[test]
fn single_tristate_has_three_models() {
    assert_eq!(dual_check(&model("config A\n\ttristate \"a\"\n"), SelectEncoding::Split), Ok(3));
}

#[test]
fn select_forces_target_in_every_model() {
    let m = model("config A\n\tbool \"a\"\n\tselect B\nconfig B\n\tbool \"b\"\n");
    // A=y,B=y; A=n,B=n; A=n,B=y
    assert_eq!(dual_check(&m, SelectEncoding::Split), Ok(3));
}

#[test]
fn random_models_agree_with_evaluator() {
    for seed in 0..120 {
        let p = SmallModelParams {
            boolish: 3 + (seed % 5) as usize,
            ..Default::default()
        };
        let src = small_model(seed, &p);
        let m = model(&src);
        if let Err(e) = dual_check(&m, SelectEncoding::Split) {
            panic!("seed {seed}: {e}\n{src}");
        }
    }
}

#[test]
fn split_and_monolithic_selects_agree() {
    for seed in 500..560 {
        let src = small_model(seed, &SmallModelParams::default());
        let m = model(&src);
        assert_eq!(dual_check(&m, SelectEncoding::Split), dual_check(&m, SelectEncoding::Monolithic), "seed {seed}\n{src}");
    }
}

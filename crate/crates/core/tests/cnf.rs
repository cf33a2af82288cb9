mod common;

use kfix_core::cnf::{export_dimacs, import_dimacs, model_cnf, tseitin};
use common::random_formula;
use kfix_core::logic::build_formula;
use kfix_core::models::load_bundled;
use kfix_sat::{Budget, Lit, SatBackend, SolveResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn tseitin_preserves_projected_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000 {
        let n = rng.random_range(1..=6u32);
        let f = random_formula(&mut rng, n, 4);
        let cnf = tseitin(&f, n as usize);
        let mut solver = cnf.solver();
        for bits in 0u32..(1 << n) {
            let truth = f.eval(&|v| bits & (1 << (v - 1)) != 0);
            let assumptions: Vec<Lit> = (1..=n as i32).map(|v| Lit::from_dimacs(if bits & (1 << (v - 1)) != 0 { v } else { -v })).collect();
            let sat = matches!(solver.solve(&assumptions, &Budget::unlimited()), SolveResult::Sat(_));
            assert_eq!(sat, truth, "formula {i}: {f} under {bits:b}");
        }
    }
}

#[test]
fn dimacs_round_trip_is_byte_identical() {
    for name in ["arch", "media", "choice", "nonbool", "tristate"] {
        let m = load_bundled(name).unwrap();
        let cnf = model_cnf(&m, &build_formula(&m).unwrap());
        let text = export_dimacs(&cnf);
        let back = import_dimacs(&text).unwrap();
        assert_eq!(back.num_vars, cnf.num_vars);
        assert_eq!(back.clauses, cnf.clauses);
        assert_eq!(export_dimacs(&back), text, "{name}");
    }
}

#[test]
fn foreign_dimacs_canonicalizes() {
    let text = "c hand written\np cnf 3 2\n1   -2 0\n  3\n -1 0\n";
    let a = import_dimacs(text).unwrap();
    let canon = export_dimacs(&a);
    assert_eq!(export_dimacs(&import_dimacs(&canon).unwrap()), canon);
    assert_eq!(a.clauses, vec![vec![1, -2], vec![3, -1]]);
}

#[test]
fn dimacs_names_symbols_in_comments() {
    let m = load_bundled("arch").unwrap();
    let text = export_dimacs(&model_cnf(&m, &build_formula(&m).unwrap()));
    let header = text.lines().position(|l| l.starts_with("p cnf ")).unwrap();
    assert!(text.lines().take(header).any(|l| l.ends_with(" 64BIT")), "{text}");
}

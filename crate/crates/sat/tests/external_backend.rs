#![cfg(unix)]

use std::os::unix::fs::PermissionsExt;
use std::time::Duration;

use kfix_sat::external::ExternalSolver;
use kfix_sat::{Budget, Lit, SatBackend, SolveResult};

fn script(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
    let path = dir.path().join("solver.sh");
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

#[test]
fn reads_sat_answer_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = script(&dir, "grep -q '^p cnf 2 2' \"$1\" && echo 's SATISFIABLE' && echo 'v -1 2 0'");
    let mut s = ExternalSolver::new(path, vec![]);
    s.add_clause(&[Lit::from_dimacs(1), Lit::from_dimacs(2)]);
    match s.solve(&[Lit::from_dimacs(-1)], &Budget::unlimited()) {
        SolveResult::Sat(m) => assert_eq!(m.as_slice(), &[false, true]),
        other => panic!("expected sat, got {other:?} ({:?})", s.last_error()),
    }
}

#[test]
fn unsat_answer_reports_all_assumptions() {
    let dir = tempfile::tempdir().unwrap();
    let path = script(&dir, "echo UNSAT");
    let mut s = ExternalSolver::new(path, vec![]);
    s.add_clause(&[Lit::from_dimacs(1)]);
    let asm = [Lit::from_dimacs(-1), Lit::from_dimacs(2)];
    assert_eq!(s.solve(&asm, &Budget::unlimited()), SolveResult::Unsat(asm.to_vec()));
}

#[test]
fn deadline_kills_slow_solver() {
    let dir = tempfile::tempdir().unwrap();
    let path = script(&dir, "exec sleep 5");
    let mut s = ExternalSolver::new(path, vec![]);
    let started = std::time::Instant::now();
    let r = s.solve(&[], &Budget::with_timeout(Duration::from_millis(100)));
    assert_eq!(r, SolveResult::TimedOut);
    assert!(started.elapsed() < Duration::from_secs(3));
}

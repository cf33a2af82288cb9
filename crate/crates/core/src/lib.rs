//! Kconfig variability models: parsing, three-valued evaluation, propositional
//! abstraction, CNF and DIMACS, RangeFix-style conflict resolution, `.config`
//! files and the evaluation harness.

pub mod cnf;
pub mod dotconfig;
pub mod eval;
pub mod harness;
pub mod kconfig;
pub mod logic;
pub mod models;
pub mod rangefix;
pub mod synth;
pub mod tristate;

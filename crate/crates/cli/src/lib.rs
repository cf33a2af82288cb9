//! `kfix` command-line entry points and HTTP service.

pub mod api;
pub mod commands;
pub mod wire;

pub use commands::run;

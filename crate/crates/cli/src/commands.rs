//! Subcommand parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use kfix_core::cnf::{export_dimacs, model_cnf};
use kfix_core::dotconfig::load_dotconfig;
use kfix_core::eval::{recalculate, Configuration, SymbolValue};
use kfix_core::harness::{run_evaluation, EvalPlan};
use kfix_core::kconfig::{load_linked, print_model, resolve_model_path, LinkedModel, SymId};
use kfix_core::logic::build_formula;
use kfix_core::models::{load_bundled, BUNDLED};
use kfix_core::rangefix::{satisfiable_with, Limits, ResolveError, Resolver};
use thiserror::Error;

use crate::api::{app, ServerOptions};
use crate::wire::{lookup, parse_value, WireResolution};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or unreadable input. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The question has a negative answer (unsatisfiable, no fix). Exit code 1.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "kfix", version, about = "Kconfig conflict resolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ModelArg {
    /// Kconfig file, directory holding a `Kconfig`, or bundled model name.
    #[arg(long, short, env = "KFIX_MODEL_ROOT")]
    model: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and link a model, reporting diagnostics.
    Parse {
        #[command(flatten)]
        model: ModelArg,
        /// Print the normalized model.
        #[arg(long)]
        print: bool,
    },
    /// Export the model's CNF in DIMACS format.
    Dimacs {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check whether the model admits the values of a .config.
    Check {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, short)]
        config: Option<PathBuf>,
    },
    /// Compute fixes that reach the desired values.
    Fix {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Desired value, as SYM=VAL (a CONFIG_ prefix is accepted).
        #[arg(long = "set", required = true, value_name = "SYM=VAL")]
        set: Vec<String>,
        /// Print the fixes as JSON.
        #[arg(long)]
        json: bool,
        /// Resolution time limit in seconds.
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
    },
    /// Run the evaluation harness.
    Eval {
        #[command(flatten)]
        model: ModelArg,
        /// Sampled configurations per p_no value.
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Probabilities of setting a symbol to n, comma separated.
        #[arg(long = "p-no", value_delimiter = ',', default_value = "0.5")]
        p_no: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-fix rows as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory of static UI assets.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Allow more than one configuration session.
        #[arg(long)]
        multi: bool,
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
    },
}

pub fn load_model(spec: &str) -> Result<LinkedModel, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        let (root, file) = resolve_model_path(path);
        return load_linked(&root, &file).map_err(usage);
    }
    if BUNDLED.contains(&spec) {
        return load_bundled(spec).map_err(usage);
    }
    Err(usage(format!("no model at `{spec}`")))
}

fn load_config(model: &LinkedModel, path: Option<&Path>, err: &mut dyn Write) -> Result<Configuration, CliError> {
    let Some(path) = path else {
        return recalculate(model, &vec![None; model.len()]).map_err(usage);
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let loaded = load_dotconfig(&text, model).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "warning: {}: {w}", path.display());
    }
    Ok(loaded.config)
}

fn limits(timeout: f64) -> Result<Limits, CliError> {
    let t = Duration::try_from_secs_f64(timeout).map_err(|_| usage(format!("invalid timeout {timeout}")))?;
    Ok(Limits { timeout: t, ..Limits::default() })
}

fn parse_set(model: &LinkedModel, items: &[String]) -> Result<Vec<(SymId, SymbolValue)>, CliError> {
    items
        .iter()
        .map(|item| {
            let (name, val) = item.split_once('=').ok_or_else(|| usage(format!("expected SYM=VAL, got `{item}`")))?;
            let id = lookup(model, name).ok_or_else(|| usage(format!("unknown symbol {name}")))?;
            let v = parse_value(model, id, val).map_err(|m| usage(format!("{name}: {m}")))?;
            Ok((id, v))
        })
        .collect()
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(usage)
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Parse { model, print } => {
            let m = load_model(&model.model)?;
            if print {
                write_out(out, &print_model(&m.source))?;
            } else {
                write_out(out, &format!("ok: {} symbols, {} choices\n", m.len(), m.choices.len()))?;
            }
        }
        Command::Dimacs { model, out: path } => {
            let m = load_model(&model.model)?;
            let abs = build_formula(&m).map_err(usage)?;
            let text = export_dimacs(&model_cnf(&m, &abs));
            match path {
                Some(p) => std::fs::write(&p, text).map_err(|e| usage(format!("{}: {e}", p.display())))?,
                None => write_out(out, &text)?,
            }
        }
        Command::Check { model, config } => {
            let m = load_model(&model.model)?;
            let cfg = load_config(&m, config.as_deref(), err)?;
            let values: Vec<(SymId, SymbolValue)> = m.ids().filter_map(|id| cfg.user_value(id).map(|v| (id, v.clone()))).collect();
            match satisfiable_with(&m, &values) {
                Ok(true) => write_out(out, "satisfiable\n")?,
                Ok(false) => {
                    write_out(out, "unsatisfiable\n")?;
                    return Err(CliError::Domain("the configuration violates the model".into()));
                }
                Err(e) => return Err(usage(e)),
            }
        }
        Command::Fix { model, config, set, json, timeout } => {
            let m = load_model(&model.model)?;
            let cfg = load_config(&m, config.as_deref(), err)?;
            let desired = parse_set(&m, &set)?;
            let res = Resolver::new(&m).map_err(usage)?.resolve_conflict(&cfg, &desired, &limits(timeout)?).map_err(|e| match e {
                ResolveError::InvalidTarget { .. } | ResolveError::DuplicateTarget(_) | ResolveError::Abstraction(_) => usage(e),
                other => CliError::Domain(other.to_string()),
            })?;
            if json {
                let text = serde_json::to_string_pretty(&WireResolution::from(&res)).map_err(usage)?;
                write_out(out, &format!("{text}\n"))?;
            } else if res.directly_applicable {
                write_out(out, "directly applicable\n")?;
            } else {
                for (i, f) in res.fixes.iter().enumerate() {
                    write_out(out, &format!("fix {}: {f}\n", i + 1))?;
                }
            }
            if res.timed_out {
                let _ = writeln!(err, "warning: resolution time limit reached, results may be partial");
            }
            if !res.directly_applicable && res.fixes.is_empty() {
                return Err(CliError::Domain("no fix found".into()));
            }
        }
        Command::Eval { model, samples, p_no, seed, out: path, timeout } => {
            let m = load_model(&model.model)?;
            if p_no.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(usage("--p-no values must lie in [0, 1]"));
            }
            let plan = EvalPlan {
                samples,
                p_no,
                seed,
                limits: limits(timeout)?,
                ..EvalPlan::default()
            };
            let report = run_evaluation(&m, &plan).map_err(usage)?;
            if let Some(p) = path {
                std::fs::write(&p, report.to_csv()).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            }
            write_out(out, &report.to_text())?;
        }
        Command::Serve {
            model,
            config,
            listen,
            static_dir,
            multi,
            timeout,
        } => {
            let m = load_model(&model.model)?;
            let cfg = load_config(&m, config.as_deref(), err)?;
            let opts = ServerOptions {
                limits: limits(timeout)?,
                multi,
                static_dir,
            };
            let router = app(m, cfg, opts);
            let rt = tokio::runtime::Runtime::new().map_err(usage)?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(listen).await.map_err(|e| usage(format!("{listen}: {e}")))?;
                let _ = writeln!(err, "listening on http://{listen}");
                axum::serve(listener, router).await.map_err(usage)
            })?;
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

//! Evaluation harness: biased random sampling, resolvable conflict generation,
//! fix classification and report tables.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dotconfig::{apply_fix, apply_values};
use crate::eval::{bounds, recalculate, recalculate_from, visibility, Configuration, EvalError, SymbolValue};
use crate::kconfig::{LinkedModel, SymId};
use crate::rangefix::{Conflict, Fix, FixEntry, FixValue, Limits, ResolveError, Resolver};
use crate::tristate::{Mod, No, Tristate, Yes};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("conflict size must be between 1 and 10, got {0}")]
    InvalidSize(usize),
    #[error("only {eligible} eligible symbols for a conflict of size {wanted}")]
    Shortfall { wanted: usize, eligible: usize },
    #[error("no resolvable conflict of size {0} found")]
    NoWitness(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

#[derive(Clone, Copy, Debug)]
pub struct SampleParams {
    /// Probability that a visible Bool/Tristate symbol is set to `n`.
    pub p_no: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FixOutcome {
    ApplicableResolves,
    NotApplicableButResolves,
    DoesNotResolve,
}

impl FixOutcome {
    pub const ALL: [FixOutcome; 3] = [FixOutcome::ApplicableResolves, FixOutcome::NotApplicableButResolves, FixOutcome::DoesNotResolve];

    pub fn label(self) -> &'static str {
        match self {
            FixOutcome::ApplicableResolves => "applicable-resolves",
            FixOutcome::NotApplicableButResolves => "not-applicable-resolves",
            FixOutcome::DoesNotResolve => "does-not-resolve",
        }
    }
}

const TRI: [Tristate; 3] = [No, Mod, Yes];

fn admitted(model: &LinkedModel, id: SymId, values: &[SymbolValue]) -> Vec<Tristate> {
    let b = bounds(model, id, values);
    let ty = model.symbol(id).ty;
    TRI.into_iter().filter(|t| SymbolValue::Tri(*t).fits(ty) && b.admits(*t)).collect()
}

/// Document-order pass over visible Bool/Tristate symbols, picking a value
/// with `pick` and recalculating after each assignment.
fn assign_pass(model: &LinkedModel, mut pick: impl FnMut(&[Tristate]) -> Option<Tristate>) -> Result<Configuration, EvalError> {
    let mut cfg = recalculate(model, &vec![None; model.len()])?;
    for id in model.ids() {
        if !model.symbol(id).ty.is_boolish() || visibility(model, id, &cfg.effective) == No {
            continue;
        }
        let choices = admitted(model, id, &cfg.effective);
        let Some(v) = pick(&choices) else { continue };
        cfg.user[id.index()] = Some(SymbolValue::Tri(v));
        cfg = recalculate_from(model, &cfg.user, cfg.effective)?;
    }
    Ok(cfg)
}

/// Random configuration biased towards `n` by `p_no`.
pub fn sample_config(model: &LinkedModel, params: &SampleParams) -> Result<Configuration, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    assign_pass(model, |choices| {
        if choices.is_empty() {
            return None;
        }
        if rng.random_bool(params.p_no.clamp(0.0, 1.0)) && choices.contains(&No) {
            return Some(No);
        }
        let on: Vec<Tristate> = choices.iter().copied().filter(|t| *t != No).collect();
        on.choose(&mut rng).or(choices.first()).copied()
    })
}

/// Every visible Bool/Tristate symbol at its highest settable value.
pub fn build_base_config(model: &LinkedModel) -> Result<Configuration, EvalError> {
    assign_pass(model, |choices| choices.iter().copied().max())
}

/// Values a conflict may target for `id`: currently unsettable, and equal to
/// the base value or `n`.
fn blocked_targets(model: &LinkedModel, id: SymId, cfg: &Configuration, base: &Configuration) -> Vec<Tristate> {
    let s = model.symbol(id);
    if !s.has_prompt() || !s.ty.is_boolish() || s.choice.is_some() {
        return Vec::new();
    }
    let ok = admitted(model, id, &cfg.effective);
    let cur = cfg.tri(id);
    TRI.into_iter()
        .filter(|t| SymbolValue::Tri(*t).fits(s.ty) && *t != cur && !ok.contains(t))
        .filter(|t| *t == base.tri(id) || *t == No)
        .collect()
}

pub fn eligible_symbols(model: &LinkedModel, cfg: &Configuration, base: &Configuration) -> Vec<SymId> {
    model.ids().filter(|&id| !blocked_targets(model, id, cfg, base).is_empty()).collect()
}

/// Whether the targets are jointly reachable from the base configuration.
fn witnessed(model: &LinkedModel, base: &Configuration, desired: &[(SymId, SymbolValue)]) -> Result<bool, EvalError> {
    let w = apply_values(&base.frozen(), desired, model)?;
    Ok(desired.iter().all(|(id, v)| w.value(*id) == v))
}

/// `size` symbols that cannot currently take their target values, with
/// targets jointly reachable from the base configuration.
pub fn generate_conflict(model: &LinkedModel, cfg: &Configuration, base: &Configuration, size: usize, seed: u64) -> Result<Conflict, HarnessError> {
    if !(1..=10).contains(&size) {
        return Err(HarnessError::InvalidSize(size));
    }
    let mut pool = eligible_symbols(model, cfg, base);
    if pool.len() < size {
        return Err(HarnessError::Shortfall {
            wanted: size,
            eligible: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    // grow the target set one symbol at a time, keeping only witnessed extensions
    let mut desired: Vec<(SymId, SymbolValue)> = Vec::with_capacity(size);
    for id in pool {
        let mut targets = blocked_targets(model, id, cfg, base);
        targets.shuffle(&mut rng);
        for t in targets {
            desired.push((id, SymbolValue::Tri(t)));
            if witnessed(model, base, &desired)? {
                break;
            }
            desired.pop();
        }
        if desired.len() == size {
            desired.sort_unstable_by_key(|(id, _)| *id);
            return Ok(Conflict {
                desired,
                base_config: cfg.clone(),
            });
        }
    }
    Err(HarnessError::NoWitness(size))
}

/// The fix that sets the desired values directly.
pub fn direct_fix(model: &LinkedModel, conflict: &Conflict) -> Fix {
    Fix {
        diagnosis: Vec::new(),
        entries: conflict
            .desired
            .iter()
            .map(|(id, v)| FixEntry {
                symbol: *id,
                name: model.symbol(*id).name.clone(),
                value: FixValue::Value(v.clone()),
            })
            .collect(),
    }
}

/// Applies `fix` (the desired values when it is empty) and classifies the result.
pub fn classify_fix(model: &LinkedModel, cfg: &Configuration, conflict: &Conflict, fix: &Fix) -> Result<FixOutcome, EvalError> {
    let direct;
    let fix = if fix.entries.is_empty() {
        direct = direct_fix(model, conflict);
        &direct
    } else {
        fix
    };
    let (after, report) = apply_fix(cfg, fix, model)?;
    if !conflict.desired.iter().all(|(id, v)| after.value(*id) == v) {
        return Ok(FixOutcome::DoesNotResolve);
    }
    Ok(if report.fully_applicable() {
        FixOutcome::ApplicableResolves
    } else {
        FixOutcome::NotApplicableButResolves
    })
}

#[derive(Clone, Debug)]
pub struct EvalPlan {
    /// Samples per `p_no` value.
    pub samples: usize,
    pub p_no: Vec<f64>,
    pub seed: u64,
    pub sizes: std::ops::RangeInclusive<usize>,
    pub conflicts_per_size: usize,
    pub limits: Limits,
}

impl Default for EvalPlan {
    fn default() -> Self {
        EvalPlan {
            samples: 1,
            p_no: vec![0.5],
            seed: 0,
            sizes: 1..=10,
            conflicts_per_size: 5,
            limits: Limits::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConflictRecord {
    pub sample: usize,
    pub p_no: f64,
    pub index: usize,
    pub size: usize,
    pub directly_applicable: bool,
    pub timed_out: bool,
    /// Generation or resolution failure.
    pub error: Option<String>,
    /// `(entries, outcome)` per fix.
    pub fixes: Vec<(usize, FixOutcome)>,
    pub millis: u128,
}

impl ConflictRecord {
    pub fn resolved(&self) -> bool {
        self.fixes.iter().any(|(_, o)| *o != FixOutcome::DoesNotResolve)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub generated: usize,
    pub with_fix: usize,
    pub resolved: usize,
    pub total_fixes: usize,
    pub outcomes: Vec<(FixOutcome, usize)>,
    pub timed_out: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub records: Vec<ConflictRecord>,
}

fn sub_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &p in parts {
        rng = ChaCha8Rng::seed_from_u64(rng.random::<u64>() ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    rng.random()
}

struct Job {
    sample: usize,
    p_no: f64,
    index: usize,
    size: usize,
    seed: u64,
}

pub fn run_evaluation(model: &LinkedModel, plan: &EvalPlan) -> Result<Report, HarnessError> {
    let resolver = Resolver::new(model)?;
    let base = build_base_config(model)?;
    let mut samples = Vec::new();
    let mut jobs = Vec::new();
    for (pi, &p) in plan.p_no.iter().enumerate() {
        for s in 0..plan.samples {
            let sample = samples.len();
            let cfg = sample_config(
                model,
                &SampleParams {
                    p_no: p,
                    seed: sub_seed(plan.seed, &[pi as u64, s as u64]),
                },
            )?;
            samples.push(cfg);
            let mut index = 0;
            for size in plan.sizes.clone() {
                for k in 0..plan.conflicts_per_size {
                    jobs.push(Job {
                        sample,
                        p_no: p,
                        index,
                        size,
                        seed: sub_seed(plan.seed, &[pi as u64, s as u64, size as u64, k as u64]),
                    });
                    index += 1;
                }
            }
        }
    }
    let records = jobs
        .par_iter()
        .map(|job| {
            let start = Instant::now();
            let cfg = &samples[job.sample];
            let mut rec = ConflictRecord {
                sample: job.sample,
                p_no: job.p_no,
                index: job.index,
                size: job.size,
                directly_applicable: false,
                timed_out: false,
                error: None,
                fixes: Vec::new(),
                millis: 0,
            };
            let result = generate_conflict(model, cfg, &base, job.size, job.seed).map_err(|e| e.to_string()).and_then(|conflict| {
                let res = resolver.resolve(&conflict, &plan.limits).map_err(|e| e.to_string())?;
                rec.directly_applicable = res.directly_applicable;
                rec.timed_out = res.timed_out;
                let fixes = if res.directly_applicable { vec![direct_fix(model, &conflict)] } else { res.fixes };
                for f in &fixes {
                    let outcome = classify_fix(model, cfg, &conflict, f).map_err(|e| e.to_string())?;
                    rec.fixes.push((f.entries.len(), outcome));
                }
                Ok(())
            });
            rec.error = result.err();
            rec.millis = start.elapsed().as_millis();
            rec
        })
        .collect();
    Ok(Report { records })
}

impl Report {
    pub fn summary(&self) -> Summary {
        let mut s = Summary {
            outcomes: FixOutcome::ALL.iter().map(|o| (*o, 0)).collect(),
            ..Default::default()
        };
        for r in &self.records {
            if r.error.is_some() {
                s.failed += 1;
                continue;
            }
            s.generated += 1;
            s.timed_out += usize::from(r.timed_out);
            s.with_fix += usize::from(!r.fixes.is_empty());
            s.resolved += usize::from(r.resolved());
            s.total_fixes += r.fixes.len();
            for (_, o) in &r.fixes {
                s.outcomes.iter_mut().find(|(x, _)| x == o).unwrap().1 += 1;
            }
        }
        s
    }

    /// Number of fixes per fix size.
    pub fn fix_size_histogram(&self) -> Vec<(usize, usize)> {
        let mut h: std::collections::BTreeMap<usize, usize> = Default::default();
        for (n, _) in self.records.iter().flat_map(|r| &r.fixes) {
            *h.entry(*n).or_default() += 1;
        }
        h.into_iter().collect()
    }

    /// Mean fix size per conflict size.
    pub fn fix_size_by_conflict_size(&self) -> Vec<(usize, f64, usize)> {
        let mut m: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
        for r in &self.records {
            let e = m.entry(r.size).or_default();
            for (n, _) in &r.fixes {
                e.0 += n;
                e.1 += 1;
            }
        }
        m.into_iter().map(|(k, (sum, cnt))| (k, if cnt == 0 { 0.0 } else { sum as f64 / cnt as f64 }, cnt)).collect()
    }

    /// One row per fix, or one row with empty fix columns for a conflict without fixes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,p_no,conflict,conflict_size,directly_applicable,timed_out,error,fix,fix_size,outcome,millis\n");
        for r in &self.records {
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            let head = format!("{},{},{},{},{},{},{}", r.sample, r.p_no, r.index, r.size, r.directly_applicable, r.timed_out, err);
            if r.fixes.is_empty() {
                let _ = writeln!(out, "{head},,,,{}", r.millis);
            }
            for (i, (n, o)) in r.fixes.iter().enumerate() {
                let _ = writeln!(out, "{head},{i},{n},{},{}", o.label(), r.millis);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let s = self.summary();
        let pct = |n: usize| if s.total_fixes == 0 { 0.0 } else { 100.0 * n as f64 / s.total_fixes as f64 };
        let mut out = String::new();
        let _ = writeln!(out, "{:<34}{:>8}", "Conflicts generated", s.generated);
        let _ = writeln!(out, "{:<34}{:>8}", "Conflicts with at least one fix", s.with_fix);
        let _ = writeln!(out, "{:<34}{:>8}", "Resolved conflicts", s.resolved);
        let _ = writeln!(out, "{:<34}{:>8}", "Total fixes", s.total_fixes);
        for (o, n) in &s.outcomes {
            let _ = writeln!(out, "  {:<32}{:>8}{:>9.1}%", o.label(), n, pct(*n));
        }
        let _ = writeln!(out, "{:<34}{:>8}", "Timed out", s.timed_out);
        let _ = writeln!(out, "{:<34}{:>8}", "Not generated", s.failed);
        let _ = writeln!(out, "\nfix size histogram");
        for (k, n) in self.fix_size_histogram() {
            let _ = writeln!(out, "  {k:>3}: {n}");
        }
        let _ = writeln!(out, "\nmean fix size by conflict size");
        for (k, mean, cnt) in self.fix_size_by_conflict_size() {
            let _ = writeln!(out, "  {k:>3}: {mean:.2} ({cnt} fixes)");
        }
        out
    }
}

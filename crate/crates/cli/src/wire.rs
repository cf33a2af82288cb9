//! JSON shapes shared by the `fix` command and the HTTP API.

use kfix_core::eval::SymbolValue;
use kfix_core::dotconfig::ApplyReport;
use kfix_core::kconfig::{LinkedModel, SymId};
use kfix_core::rangefix::{Fix, FixValue, Resolution};
use serde::{Deserialize, Serialize};

/// Value as text: strings unquoted, hex with `0x`.
pub fn value_text(v: &SymbolValue) -> String {
    match v {
        SymbolValue::Text(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Parses a target value for `id`. A quoted string has its quotes removed.
pub fn parse_value(model: &LinkedModel, id: SymId, text: &str) -> Result<SymbolValue, String> {
    let ty = model.symbol(id).ty;
    let text = if ty == kfix_core::kconfig::SymbolType::String {
        text.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(text)
    } else {
        text
    };
    SymbolValue::parse(ty, text)
}

/// Looks up a symbol name, accepting a `CONFIG_` prefix.
pub fn lookup(model: &LinkedModel, name: &str) -> Option<SymId> {
    model.lookup(name).or_else(|| name.strip_prefix("CONFIG_").and_then(|n| model.lookup(n)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRange {
    pub witness: String,
    /// Inclusive `[lo, hi]` runs.
    pub ranges: Vec<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireEntry {
    pub symbol: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<WireRange>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFix {
    pub index: usize,
    pub diagnosis: Vec<String>,
    pub size: usize,
    pub text: String,
    pub entries: Vec<WireEntry>,
}

impl WireFix {
    pub fn new(index: usize, fix: &Fix) -> WireFix {
        let entries = fix
            .entries
            .iter()
            .map(|e| match &e.value {
                FixValue::Value(v) => WireEntry {
                    symbol: e.name.clone(),
                    value: Some(value_text(v)),
                    range: None,
                },
                FixValue::Range { witness, ranges } => WireEntry {
                    symbol: e.name.clone(),
                    value: None,
                    range: Some(WireRange {
                        witness: value_text(witness),
                        ranges: ranges.clone(),
                    }),
                },
            })
            .collect();
        WireFix {
            index,
            diagnosis: fix.diagnosis.clone(),
            size: fix.diagnosis.len(),
            text: fix.to_string(),
            entries,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireResolution {
    pub directly_applicable: bool,
    pub timed_out: bool,
    pub fixes: Vec<WireFix>,
}

impl From<&Resolution> for WireResolution {
    fn from(r: &Resolution) -> WireResolution {
        WireResolution {
            directly_applicable: r.directly_applicable,
            timed_out: r.timed_out,
            fixes: r.fixes.iter().enumerate().map(|(i, f)| WireFix::new(i, f)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireEntryReport {
    pub symbol: String,
    pub value: String,
    pub applicable: bool,
    pub reached: bool,
}

pub fn report_entries(report: &ApplyReport) -> Vec<WireEntryReport> {
    report
        .entries
        .iter()
        .map(|e| WireEntryReport {
            symbol: e.symbol.clone(),
            value: value_text(&e.value),
            applicable: e.applicable,
            reached: e.reached,
        })
        .collect()
}


//! `.config` reading and writing, and application of fixes to a configuration.

use std::fmt::Write as _;

use thiserror::Error;

use crate::eval::{bounds, recalculate, visibility, Configuration, EvalError, SymbolValue};
use crate::kconfig::{LinkedModel, SymId, SymbolType};
use crate::rangefix::Fix;
use crate::tristate::No;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DotConfigError {
    #[error("line {line}: malformed line `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: {message}")]
    Value { line: usize, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A loaded configuration with the lines that named unknown symbols.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: Configuration,
    pub warnings: Vec<String>,
}

fn unescape(s: &str, line: usize) -> Result<String, DotConfigError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(e @ ('"' | '\\')) => out.push(e),
                Some(e) => {
                    out.push('\\');
                    out.push(e);
                }
                None => {
                    return Err(DotConfigError::Value {
                        line,
                        message: "dangling escape at end of string".into(),
                    })
                }
            }
        } else if c == '"' {
            return Err(DotConfigError::Value {
                line,
                message: "unescaped quote inside string".into(),
            });
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Parses `.config` text into user values and recalculates.
pub fn load_dotconfig(text: &str, model: &LinkedModel) -> Result<Loaded, DotConfigError> {
    let mut cfg = Configuration::blank(model);
    let mut warnings = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        let malformed = || DotConfigError::Malformed { line, text: raw.to_string() };
        let (name, value) = if let Some(rest) = t.strip_prefix('#') {
            let rest = rest.trim();
            match rest.strip_prefix("CONFIG_").and_then(|r| r.strip_suffix(" is not set")) {
                Some(name) if !name.is_empty() && !name.contains(char::is_whitespace) => (name, None),
                _ => continue,
            }
        } else {
            let (lhs, rhs) = t.split_once('=').ok_or_else(malformed)?;
            let name = lhs.strip_prefix("CONFIG_").filter(|n| !n.is_empty()).ok_or_else(malformed)?;
            if name.contains(char::is_whitespace) {
                return Err(malformed());
            }
            (name, Some(rhs))
        };
        let Some(id) = model.lookup(name) else {
            warnings.push(format!("line {line}: unknown symbol {name}"));
            continue;
        };
        let ty = model.symbol(id).ty;
        let v = match value {
            None if ty.is_boolish() => SymbolValue::Tri(No),
            None => {
                warnings.push(format!("line {line}: {name} is {ty} and cannot be `not set`"));
                continue;
            }
            Some(rhs) if ty == SymbolType::String => {
                let inner = rhs.strip_prefix('"').and_then(|r| r.strip_suffix('"')).filter(|_| rhs.len() >= 2).ok_or_else(|| DotConfigError::Value {
                    line,
                    message: format!("string value for {name} must be quoted"),
                })?;
                SymbolValue::Text(unescape(inner, line)?)
            }
            Some(rhs) => SymbolValue::parse(ty, rhs).map_err(|message| DotConfigError::Value { line, message })?,
        };
        cfg.set_user(id, Some(v));
    }
    let user = cfg.user.clone();
    let config = recalculate(model, &user)?;
    Ok(Loaded { config, warnings })
}

fn line_for(model: &LinkedModel, id: SymId, v: &SymbolValue) -> String {
    let name = &model.symbol(id).name;
    match v {
        SymbolValue::Tri(t) if *t == No => format!("# CONFIG_{name} is not set"),
        SymbolValue::Tri(t) => format!("CONFIG_{name}={t}"),
        SymbolValue::Text(s) => format!("CONFIG_{name}=\"{}\"", escape(s)),
        SymbolValue::Number(n) => format!("CONFIG_{name}={n}"),
        SymbolValue::Hex(h) => format!("CONFIG_{name}=0x{h:X}"),
    }
}

/// One line per symbol in document order, from the effective values.
pub fn save_dotconfig(cfg: &Configuration, model: &LinkedModel) -> String {
    let mut out = String::new();
    for id in model.ids() {
        let _ = writeln!(out, "{}", line_for(model, id, cfg.value(id)));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryReport {
    pub symbol: String,
    pub value: SymbolValue,
    /// Visible when applied, or brought to its value by a select.
    pub applicable: bool,
    /// Holds the entry's value in the final configuration.
    pub reached: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApplyReport {
    pub entries: Vec<EntryReport>,
}

impl ApplyReport {
    pub fn fully_applicable(&self) -> bool {
        self.entries.iter().all(|e| e.applicable && e.reached)
    }
}

/// Applies fix entries in order as user values on top of the frozen
/// configuration, recalculating after each one.
pub fn apply_fix(cfg: &Configuration, fix: &Fix, model: &LinkedModel) -> Result<(Configuration, ApplyReport), EvalError> {
    let mut cur = cfg.frozen();
    let mut report = ApplyReport::default();
    for e in &fix.entries {
        let value = e.value.value().clone();
        let visible = visibility(model, e.symbol, &cur.effective) > No;
        cur.set_user(e.symbol, Some(value.clone()));
        cur.recalculate(model)?;
        let via_select = *cur.value(e.symbol) == value && value.tri() != No && bounds(model, e.symbol, &cur.effective).sel >= value.tri();
        let applicable = visible || via_select;
        report.entries.push(EntryReport {
            symbol: e.name.clone(),
            value,
            applicable,
            reached: false,
        });
    }
    for (r, e) in report.entries.iter_mut().zip(&fix.entries) {
        r.reached = cur.value(e.symbol) == e.value.value();
    }
    Ok((cur, report))
}

/// Sets each `(symbol, value)` as a user value and recalculates.
pub fn apply_values(cfg: &Configuration, values: &[(SymId, SymbolValue)], model: &LinkedModel) -> Result<Configuration, EvalError> {
    let mut cur = cfg.clone();
    for (id, v) in values {
        cur.set_user(*id, Some(v.clone()));
    }
    cur.recalculate(model)?;
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kconfig::{link, parse};

    fn model(src: &str) -> LinkedModel {
        link(&parse(src, "t").unwrap()).unwrap()
    }

    #[test]
    fn string_escapes_round_trip() {
        let m = model("config NAME\n\tstring \"n\"\n");
        let l = load_dotconfig("CONFIG_NAME=\"a\\\"b\"\n", &m).unwrap();
        assert_eq!(l.config.value(SymId(0)), &SymbolValue::Text("a\"b".into()));
        assert_eq!(save_dotconfig(&l.config, &m), "CONFIG_NAME=\"a\\\"b\"\n");
    }

    #[test]
    fn hex_is_uppercase() {
        let m = model("config H\n\thex \"h\"\n");
        let l = load_dotconfig("CONFIG_H=0x1f\n", &m).unwrap();
        assert_eq!(save_dotconfig(&l.config, &m), "CONFIG_H=0x1F\n");
    }

    #[test]
    fn malformed_and_unknown_lines() {
        let m = model("config A\n\tbool \"a\"\n");
        assert_eq!(
            load_dotconfig("CONFIG_A=y\nnonsense\n", &m).unwrap_err(),
            DotConfigError::Malformed {
                line: 2,
                text: "nonsense".into()
            }
        );
        assert!(matches!(load_dotconfig("CONFIG_A=m\n", &m), Err(DotConfigError::Value { line: 1, .. })));
        let l = load_dotconfig("# comment\nCONFIG_B=y\n", &m).unwrap();
        assert_eq!(l.warnings, vec!["line 2: unknown symbol B".to_string()]);
    }
}

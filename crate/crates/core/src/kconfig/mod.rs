//! Kconfig front end: tokenizer, parser, linker, printer and file loader.

pub mod ast;
pub mod lexer;
pub mod link;
pub mod parser;
pub mod printer;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use ast::{CmpOp, Expr, KconfigModel, Property, SymbolType};
pub use link::{link, Choice, ChoiceId, LExpr, LinkedModel, MenuNode, Symbol, SymId};
pub use parser::parse;
pub use printer::print_model;

/// A located diagnostic, printed as `file:line:col: message`.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{file}:{line}:{col}: {message}")]
pub struct Diagnostic {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

pub type ParseError = Diagnostic;

impl Diagnostic {
    pub fn new(file: &str, line: u32, col: u32, message: String) -> Diagnostic {
        Diagnostic {
            file: file.to_string(),
            line,
            col,
            message,
        }
    }

    pub fn at(loc: &ast::Loc, message: String) -> Diagnostic {
        Diagnostic::new(&loc.file, loc.line, loc.col, message)
    }
}

/// Parses `file` and every file it transitively `source`s. Include paths are
/// resolved relative to `root`. The file name recorded in diagnostics is the
/// path relative to `root` when possible.
pub fn load(root: &Path, file: &Path) -> Result<KconfigModel, Diagnostic> {
    let mut stack = Vec::new();
    let entries_model = load_file(root, file, &mut stack, None)?;
    parser::check_choice_membership(&entries_model)?;
    Ok(entries_model)
}

/// Loads and links in one step.
pub fn load_linked(root: &Path, file: &Path) -> Result<LinkedModel, Diagnostic> {
    link(&load(root, file)?)
}

/// Resolves a model location: a directory means `<dir>/Kconfig`.
pub fn resolve_model_path(path: &Path) -> (PathBuf, PathBuf) {
    if path.is_dir() {
        (path.to_path_buf(), path.join("Kconfig"))
    } else {
        let root = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        (root, path.to_path_buf())
    }
}

fn display_name(root: &Path, file: &Path) -> String {
    file.strip_prefix(root).unwrap_or(file).display().to_string()
}

fn load_file(root: &Path, file: &Path, stack: &mut Vec<PathBuf>, from: Option<&ast::Loc>) -> Result<KconfigModel, Diagnostic> {
    let name = display_name(root, file);
    let fail = |message: String| match from {
        Some(loc) => Diagnostic::at(loc, message),
        None => Diagnostic::new(&name, 0, 0, message),
    };
    let canonical = file.canonicalize().map_err(|e| fail(format!("cannot read `{name}`: {e}")))?;
    if stack.contains(&canonical) {
        return Err(fail(format!("include cycle through `{name}`")));
    }
    let text = std::fs::read_to_string(file).map_err(|e| fail(format!("cannot read `{name}`: {e}")))?;
    let mut model = parse(&text, &name)?;
    stack.push(canonical);
    resolve_sources(root, &mut model.entries, stack)?;
    stack.pop();
    Ok(model)
}

fn resolve_sources(root: &Path, entries: &mut [ast::Entry], stack: &mut Vec<PathBuf>) -> Result<(), Diagnostic> {
    for e in entries {
        match e {
            ast::Entry::Source { path, entries, loc } => {
                let sub = load_file(root, &root.join(path.as_str()), stack, Some(loc))?;
                *entries = sub.entries;
            }
            ast::Entry::Menu(m) => resolve_sources(root, &mut m.children, stack)?,
            ast::Entry::Choice(c) => resolve_sources(root, &mut c.children, stack)?,
            ast::Entry::If { children, .. } => resolve_sources(root, children, stack)?,
            ast::Entry::Config(_) | ast::Entry::Comment { .. } => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_resolve_relative_to_root() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("Kconfig"), "source \"sub/Kconfig\"\nconfig A\n\tbool\n").unwrap();
        std::fs::write(dir.path().join("sub/Kconfig"), "config B\n\tbool\n").unwrap();
        let m = load(dir.path(), &dir.path().join("Kconfig")).unwrap();
        let names: Vec<_> = m.configs().iter().map(|c| c.name.clone()).collect();
        assert_eq!(names, ["B", "A"]);
    }

    #[test]
    fn include_cycle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("Kconfig"), "source \"other\"\n").unwrap();
        std::fs::write(dir.path().join("other"), "source \"Kconfig\"\n").unwrap();
        let e = load(dir.path(), &dir.path().join("Kconfig")).unwrap_err();
        assert!(e.message.contains("include cycle"), "{e}");
        assert_eq!(e.file, "other");
    }
}

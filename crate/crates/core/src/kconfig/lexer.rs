//! Tokenizer for the supported Kconfig subset.

use std::fmt;

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    KwConfig,
    KwMenuconfig,
    KwMenu,
    KwEndmenu,
    KwChoice,
    KwEndchoice,
    KwIf,
    KwEndif,
    KwSource,
    KwComment,
    KwMainmenu,
    KwBool,
    KwTristate,
    KwString,
    KwInt,
    KwHex,
    KwPrompt,
    KwDefault,
    KwDefBool,
    KwDefTristate,
    KwDepends,
    KwOn,
    KwSelect,
    KwImply,
    KwVisible,
    KwRange,
    KwOption,
    KwModules,
    KwOptional,
    KwHelp,
    Ident(String),
    Str(String),
    /// Body of a `help` block with the common indentation removed.
    HelpText(String),
    OpAnd,
    OpOr,
    OpNot,
    OpEq,
    OpNeq,
    OpLt,
    OpLeq,
    OpGt,
    OpGeq,
    LParen,
    RParen,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    pub col: u32,
    /// Logical line: physical lines joined by a trailing backslash share one.
    pub stmt: u32,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TokenKind::*;
        let s = match self {
            Ident(s) => return write!(f, "identifier `{s}`"),
            Str(s) => return write!(f, "string {s:?}"),
            HelpText(_) => "help text",
            OpAnd => "`&&`",
            OpOr => "`||`",
            OpNot => "`!`",
            OpEq => "`=`",
            OpNeq => "`!=`",
            OpLt => "`<`",
            OpLeq => "`<=`",
            OpGt => "`>`",
            OpGeq => "`>=`",
            LParen => "`(`",
            RParen => "`)`",
            kw => return write!(f, "keyword `{}`", keyword_text(kw).unwrap_or("?")),
        };
        f.write_str(s)
    }
}

const KEYWORDS: &[(&str, TokenKind)] = &[
    ("config", TokenKind::KwConfig),
    ("menuconfig", TokenKind::KwMenuconfig),
    ("menu", TokenKind::KwMenu),
    ("endmenu", TokenKind::KwEndmenu),
    ("choice", TokenKind::KwChoice),
    ("endchoice", TokenKind::KwEndchoice),
    ("if", TokenKind::KwIf),
    ("endif", TokenKind::KwEndif),
    ("source", TokenKind::KwSource),
    ("comment", TokenKind::KwComment),
    ("mainmenu", TokenKind::KwMainmenu),
    ("bool", TokenKind::KwBool),
    ("boolean", TokenKind::KwBool),
    ("tristate", TokenKind::KwTristate),
    ("string", TokenKind::KwString),
    ("int", TokenKind::KwInt),
    ("hex", TokenKind::KwHex),
    ("prompt", TokenKind::KwPrompt),
    ("default", TokenKind::KwDefault),
    ("def_bool", TokenKind::KwDefBool),
    ("def_tristate", TokenKind::KwDefTristate),
    ("depends", TokenKind::KwDepends),
    ("on", TokenKind::KwOn),
    ("select", TokenKind::KwSelect),
    ("imply", TokenKind::KwImply),
    ("visible", TokenKind::KwVisible),
    ("range", TokenKind::KwRange),
    ("option", TokenKind::KwOption),
    ("modules", TokenKind::KwModules),
    ("optional", TokenKind::KwOptional),
    ("help", TokenKind::KwHelp),
    ("---help---", TokenKind::KwHelp),
];

pub(crate) fn keyword_text(kind: &TokenKind) -> Option<&'static str> {
    KEYWORDS.iter().find(|(_, k)| k == kind).map(|(s, _)| *s)
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Width of leading whitespace, with tabs advancing to the next multiple of 8.
fn indent_width(line: &str) -> Option<usize> {
    let mut w = 0;
    for c in line.chars() {
        match c {
            ' ' => w += 1,
            '\t' => w = (w / 8 + 1) * 8,
            _ => return Some(w),
        }
    }
    None
}

/// Tokenizes one Kconfig file. `file` is only used in error messages.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, ParseError> {
    let lines: Vec<&str> = source.lines().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut stmt = 0u32;
    let err = |line: usize, col: usize, msg: String| ParseError::new(file, line as u32 + 1, col as u32 + 1, msg);
    while i < lines.len() {
        let line = lines[i];
        let chars: Vec<char> = line.chars().collect();
        let mut c = 0;
        let mut continued = false;
        let mut help_at = None;
        while c < chars.len() {
            let ch = chars[c];
            let start = c;
            let mut push = |kind: TokenKind| {
                tokens.push(Token {
                    kind,
                    line: i as u32 + 1,
                    col: start as u32 + 1,
                    stmt,
                })
            };
            match ch {
                ' ' | '\t' | '\r' => c += 1,
                '#' => break,
                '\\' if chars[c + 1..].iter().all(|ch| ch.is_whitespace()) => {
                    continued = true;
                    break;
                }
                '"' | '\'' => {
                    let quote = ch;
                    let mut text = String::new();
                    c += 1;
                    loop {
                        match chars.get(c) {
                            None => return Err(err(i, start, "unterminated string literal".into())),
                            Some(&q) if q == quote => break,
                            Some('\\') => {
                                match chars.get(c + 1) {
                                    Some(&e) => text.push(e),
                                    None => return Err(err(i, start, "unterminated string literal".into())),
                                }
                                c += 2;
                            }
                            Some(&o) => {
                                text.push(o);
                                c += 1;
                            }
                        }
                    }
                    c += 1;
                    push(TokenKind::Str(text));
                }
                '&' if chars.get(c + 1) == Some(&'&') => {
                    c += 2;
                    push(TokenKind::OpAnd);
                }
                '|' if chars.get(c + 1) == Some(&'|') => {
                    c += 2;
                    push(TokenKind::OpOr);
                }
                '!' if chars.get(c + 1) == Some(&'=') => {
                    c += 2;
                    push(TokenKind::OpNeq);
                }
                '!' => {
                    c += 1;
                    push(TokenKind::OpNot);
                }
                '=' => {
                    c += 1;
                    push(TokenKind::OpEq);
                }
                '<' | '>' => {
                    let eq = chars.get(c + 1) == Some(&'=');
                    c += 1 + eq as usize;
                    push(match (ch, eq) {
                        ('<', false) => TokenKind::OpLt,
                        ('<', true) => TokenKind::OpLeq,
                        (_, false) => TokenKind::OpGt,
                        (_, true) => TokenKind::OpGeq,
                    });
                }
                '(' => {
                    c += 1;
                    push(TokenKind::LParen);
                }
                ')' => {
                    c += 1;
                    push(TokenKind::RParen);
                }
                _ if is_ident_char(ch) => {
                    while c < chars.len() && is_ident_char(chars[c]) {
                        c += 1;
                    }
                    let word: String = chars[start..c].iter().collect();
                    match KEYWORDS.iter().find(|(k, _)| *k == word) {
                        Some((_, TokenKind::KwHelp)) => {
                            push(TokenKind::KwHelp);
                            help_at = Some(start);
                            break;
                        }
                        Some((_, kind)) => push(kind.clone()),
                        None => push(TokenKind::Ident(word)),
                    }
                }
                _ => return Err(err(i, c, format!("illegal character `{ch}`"))),
            }
        }
        i += 1;
        if let Some(col) = help_at {
            let (text, next) = read_help(&lines, i);
            tokens.push(Token {
                kind: TokenKind::HelpText(text),
                line: i as u32 + 1,
                col: col as u32 + 1,
                stmt,
            });
            i = next;
        }
        if !continued {
            stmt += 1;
        }
    }
    Ok(tokens)
}

/// Reads a help block starting at line `start`; returns the text and the
/// index of the first line after it.
fn read_help(lines: &[&str], start: usize) -> (String, usize) {
    let mut i = start;
    while i < lines.len() && indent_width(lines[i]).is_none() {
        i += 1;
    }
    let Some(base) = lines.get(i).and_then(|l| indent_width(l)).filter(|&w| w > 0) else {
        return (String::new(), start);
    };
    let mut body = Vec::new();
    while i < lines.len() {
        match indent_width(lines[i]) {
            None => body.push(String::new()),
            Some(w) if w >= base => body.push(strip_indent(lines[i], base)),
            Some(_) => break,
        }
        i += 1;
    }
    while body.last().is_some_and(|l| l.is_empty()) {
        body.pop();
    }
    (body.join("\n"), i)
}

fn strip_indent(line: &str, width: usize) -> String {
    let mut w = 0;
    let mut cut = 0;
    for (idx, c) in line.char_indices() {
        if w >= width {
            cut = idx;
            break;
        }
        match c {
            ' ' => w += 1,
            '\t' => w = (w / 8 + 1) * 8,
            _ => {
                cut = idx;
                break;
            }
        }
        cut = idx + c.len_utf8();
    }
    let rest = &line[cut..];
    // a tab that overshoots the base indentation contributes spaces
    let extra = w.saturating_sub(width);
    format!("{}{}", " ".repeat(extra), rest.trim_end())
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src, "t").unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn config_with_prompt() {
        assert_eq!(
            kinds("config X86\n\tbool \"X86 architecture\""),
            vec![KwConfig, Ident("X86".into()), KwBool, Str("X86 architecture".into())]
        );
    }

    #[test]
    fn empty_input() {
        assert!(kinds("").is_empty());
    }

    #[test]
    fn dependency_expression() {
        assert_eq!(
            kinds("depends on X86 && !ARM"),
            vec![KwDepends, KwOn, Ident("X86".into()), OpAnd, OpNot, Ident("ARM".into())]
        );
    }

    #[test]
    fn help_block_is_one_token() {
        let toks = kinds("config A\n\tbool\n\thelp\n\t  Line one.\n\n\t  Line two.\nconfig B\n");
        assert_eq!(toks[4], HelpText("Line one.\n\nLine two.".into()));
        assert_eq!(toks[5], KwConfig);
    }

    #[test]
    fn escapes_and_errors() {
        assert_eq!(kinds(r#"prompt "a\"b""#), vec![KwPrompt, Str("a\"b".into())]);
        let e = tokenize("prompt \"open", "f").unwrap_err();
        assert_eq!(e.to_string(), "f:1:8: unterminated string literal");
        let e = tokenize("config A\n  bool $", "f").unwrap_err();
        assert_eq!(e.to_string(), "f:2:8: illegal character `$`");
    }

    #[test]
    fn continuation_shares_statement() {
        let toks = tokenize("depends on A && \\\n  B\nconfig C", "t").unwrap();
        assert_eq!(toks[2].stmt, toks[4].stmt);
        assert_ne!(toks[4].stmt, toks[5].stmt);
    }
}

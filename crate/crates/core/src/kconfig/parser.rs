//! Recursive-descent parser producing an unlinked [`KconfigModel`].

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;
use crate::tristate::Tristate;

/// Parses one file. `source` directives are kept unresolved.
pub fn parse(source: &str, file: &str) -> Result<KconfigModel, ParseError> {
    let tokens = tokenize(source, file)?;
    parse_tokens(&tokens, file)
}

pub fn parse_tokens(tokens: &[Token], file: &str) -> Result<KconfigModel, ParseError> {
    let mut p = Parser { tokens, pos: 0, file };
    let mut model = KconfigModel::default();
    let (entries, end) = p.entries(&mut model)?;
    if let Some(tok) = end {
        return Err(p.error_at(tok, format!("unexpected {}", tok.kind)));
    }
    model.entries = entries;
    check_choice_membership(&model)?;
    Ok(model)
}

/// Fails when one symbol is declared inside two different choice blocks.
pub fn check_choice_membership(model: &KconfigModel) -> Result<(), ParseError> {
    fn walk(entries: &[Entry], choice: Option<usize>, next: &mut usize, seen: &mut Vec<(String, usize)>) -> Result<(), ParseError> {
        for e in entries {
            match e {
                Entry::Config(c) => {
                    if let Some(id) = choice {
                        if let Some((_, other)) = seen.iter().find(|(n, _)| *n == c.name) {
                            if *other != id {
                                return Err(ParseError::at(&c.loc, format!("`{}` is a member of two choice groups", c.name)));
                            }
                        } else {
                            seen.push((c.name.clone(), id));
                        }
                    }
                }
                Entry::Choice(ch) => {
                    let id = *next;
                    *next += 1;
                    walk(&ch.children, Some(id), next, seen)?;
                }
                Entry::Menu(m) => walk(&m.children, choice, next, seen)?,
                Entry::If { children, .. } => walk(children, choice, next, seen)?,
                Entry::Source { entries, .. } => walk(entries, choice, next, seen)?,
                Entry::Comment { .. } => {}
            }
        }
        Ok(())
    }
    walk(&model.entries, None, &mut 0, &mut Vec::new())
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    file: &'a str,
}

fn is_number(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        return !hex.is_empty() && hex.chars().all(|c| c.is_ascii_hexdigit());
    }
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

pub(crate) fn leaf_for_word(word: &str) -> Expr {
    match word {
        "n" => Expr::Tri(Tristate::No),
        "m" => Expr::Tri(Tristate::Mod),
        "y" => Expr::Tri(Tristate::Yes),
        w if is_number(w) => Expr::Literal(w.to_string()),
        w => Expr::Symbol(w.to_string()),
    }
}

pub(crate) fn looks_numeric(s: &str) -> bool {
    is_number(s)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += t.is_some() as usize;
        t
    }

    fn loc(&self, tok: &Token) -> Loc {
        Loc {
            file: self.file.to_string(),
            line: tok.line,
            col: tok.col,
        }
    }

    fn error_at(&self, tok: &Token, msg: String) -> ParseError {
        ParseError::new(self.file, tok.line, tok.col, msg)
    }

    fn error_eof(&self, msg: &str) -> ParseError {
        let (line, col) = self.tokens.last().map_or((1, 1), |t| (t.line, t.col));
        ParseError::new(self.file, line, col, format!("unexpected end of file: {msg}"))
    }

    /// Next token if it continues the statement that `start` began.
    fn peek_same(&self, start: &Token) -> Option<&'a Token> {
        self.peek().filter(|t| t.stmt == start.stmt)
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<&'a Token, ParseError> {
        match self.next() {
            Some(t) if t.kind == kind => Ok(t),
            Some(t) => Err(self.error_at(t, format!("expected {what}, found {}", t.kind))),
            None => Err(self.error_eof(what)),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next() {
            Some(Token { kind: TokenKind::Str(s), .. }) => Ok(s.clone()),
            Some(t) => Err(self.error_at(t, format!("expected {what}, found {}", t.kind))),
            None => Err(self.error_eof(what)),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next() {
            Some(Token { kind: TokenKind::Ident(s), .. }) => Ok(s.clone()),
            Some(t) => Err(self.error_at(t, format!("expected {what}, found {}", t.kind))),
            None => Err(self.error_eof(what)),
        }
    }

    fn end_statement(&self, start: &Token) -> Result<(), ParseError> {
        match self.peek_same(start) {
            Some(t) => Err(self.error_at(t, format!("unexpected {}", t.kind))),
            None => Ok(()),
        }
    }

    /// Parses entries until EOF or a block terminator, which is returned unconsumed.
    fn entries(&mut self, model: &mut KconfigModel) -> Result<(Vec<Entry>, Option<&'a Token>), ParseError> {
        let mut out = Vec::new();
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::KwEndmenu | TokenKind::KwEndchoice | TokenKind::KwEndif => return Ok((out, Some(tok))),
                TokenKind::KwMainmenu => {
                    self.next();
                    model.mainmenu = Some(self.string("menu title")?);
                    self.end_statement(tok)?;
                }
                TokenKind::KwConfig | TokenKind::KwMenuconfig => out.push(Entry::Config(self.config()?)),
                TokenKind::KwMenu => out.push(self.menu(model)?),
                TokenKind::KwChoice => out.push(self.choice(model)?),
                TokenKind::KwIf => {
                    self.next();
                    let cond = self.expr(tok)?;
                    self.end_statement(tok)?;
                    let (children, end) = self.entries(model)?;
                    self.close(end, TokenKind::KwEndif, "endif", tok)?;
                    out.push(Entry::If {
                        cond,
                        children,
                        loc: self.loc(tok),
                    });
                }
                TokenKind::KwComment => {
                    self.next();
                    let text = self.string("comment text")?;
                    self.end_statement(tok)?;
                    let mut depends = Vec::new();
                    while let Some(t) = self.peek().filter(|t| t.kind == TokenKind::KwDepends) {
                        self.next();
                        self.expect(TokenKind::KwOn, "`on`")?;
                        depends.push(self.expr(t)?);
                        self.end_statement(t)?;
                    }
                    out.push(Entry::Comment {
                        text,
                        depends,
                        loc: self.loc(tok),
                    });
                }
                TokenKind::KwSource => {
                    self.next();
                    let path = self.string("file path")?;
                    self.end_statement(tok)?;
                    out.push(Entry::Source {
                        path,
                        entries: Vec::new(),
                        loc: self.loc(tok),
                    });
                }
                _ => return Err(self.error_at(tok, format!("unexpected {}", tok.kind))),
            }
        }
        Ok((out, None))
    }

    fn close(&mut self, end: Option<&'a Token>, kind: TokenKind, word: &str, open: &Token) -> Result<(), ParseError> {
        match end {
            Some(t) if t.kind == kind => {
                self.next();
                self.end_statement(t)
            }
            Some(t) => Err(self.error_at(t, format!("expected `{word}`, found {}", t.kind))),
            None => Err(self.error_at(open, format!("block is never closed by `{word}`"))),
        }
    }

    fn config(&mut self) -> Result<ConfigEntry, ParseError> {
        let start = self.next().expect("caller peeked");
        let name = self.ident("symbol name")?;
        self.end_statement(start)?;
        let mut entry = ConfigEntry {
            name,
            menuconfig: start.kind == TokenKind::KwMenuconfig,
            ty: None,
            properties: Vec::new(),
            modules: false,
            help: None,
            loc: self.loc(start),
        };
        while let Some(tok) = self.peek() {
            let handled = self.common_option(tok, &mut entry.ty, &mut entry.properties, &mut entry.help)?;
            if handled {
                continue;
            }
            match tok.kind {
                TokenKind::KwSelect | TokenKind::KwImply => {
                    self.next();
                    let target = self.ident("symbol name")?;
                    let cond = self.opt_if(tok)?;
                    let prop = if tok.kind == TokenKind::KwSelect {
                        Property::Select { target, cond }
                    } else {
                        Property::Imply { target, cond }
                    };
                    entry.properties.push(PropertyAt { prop, loc: self.loc(tok) });
                }
                TokenKind::KwRange => {
                    self.next();
                    let lo = self.leaf()?;
                    let hi = self.leaf()?;
                    let cond = self.opt_if(tok)?;
                    entry.properties.push(PropertyAt {
                        prop: Property::Range { lo, hi, cond },
                        loc: self.loc(tok),
                    });
                }
                TokenKind::KwOption => {
                    self.next();
                    self.expect(TokenKind::KwModules, "`modules`")?;
                    entry.modules = true;
                }
                TokenKind::KwModules => {
                    self.next();
                    entry.modules = true;
                }
                _ => break,
            }
            self.end_statement(tok)?;
        }
        Ok(entry)
    }

    /// Handles options shared by configs and choices. Returns false when the
    /// next token is not one of them.
    fn common_option(
        &mut self,
        tok: &'a Token,
        ty: &mut Option<SymbolType>,
        props: &mut Vec<PropertyAt>,
        help: &mut Option<String>,
    ) -> Result<bool, ParseError> {
        let type_kw = match tok.kind {
            TokenKind::KwBool | TokenKind::KwDefBool => Some(SymbolType::Bool),
            TokenKind::KwTristate | TokenKind::KwDefTristate => Some(SymbolType::Tristate),
            TokenKind::KwString => Some(SymbolType::String),
            TokenKind::KwInt => Some(SymbolType::Int),
            TokenKind::KwHex => Some(SymbolType::Hex),
            _ => None,
        };
        let loc = self.loc(tok);
        match tok.kind {
            _ if type_kw.is_some() => {
                self.next();
                let t = type_kw.unwrap();
                if ty.is_some_and(|old| old != t) {
                    return Err(self.error_at(tok, format!("conflicting type `{t}`")));
                }
                *ty = Some(t);
                if matches!(tok.kind, TokenKind::KwDefBool | TokenKind::KwDefTristate) {
                    let value = self.expr(tok)?;
                    let cond = self.opt_if(tok)?;
                    props.push(PropertyAt {
                        prop: Property::Default { value, cond },
                        loc,
                    });
                } else if let Some(Token { kind: TokenKind::Str(_), .. }) = self.peek_same(tok) {
                    let text = self.string("prompt")?;
                    let cond = self.opt_if(tok)?;
                    props.push(PropertyAt {
                        prop: Property::Prompt { text, cond },
                        loc,
                    });
                }
            }
            TokenKind::KwPrompt => {
                self.next();
                let text = self.string("prompt text")?;
                let cond = self.opt_if(tok)?;
                props.push(PropertyAt {
                    prop: Property::Prompt { text, cond },
                    loc,
                });
            }
            TokenKind::KwDefault => {
                self.next();
                let value = self.expr(tok)?;
                let cond = self.opt_if(tok)?;
                props.push(PropertyAt {
                    prop: Property::Default { value, cond },
                    loc,
                });
            }
            TokenKind::KwDepends => {
                self.next();
                self.expect(TokenKind::KwOn, "`on`")?;
                let e = self.expr(tok)?;
                props.push(PropertyAt {
                    prop: Property::DependsOn(e),
                    loc,
                });
            }
            TokenKind::KwHelp => {
                self.next();
                match self.next() {
                    Some(Token { kind: TokenKind::HelpText(text), .. }) => *help = Some(text.clone()),
                    _ => unreachable!("the lexer always follows `help` with help text"),
                }
                return Ok(true);
            }
            _ => return Ok(false),
        }
        self.end_statement(tok)?;
        Ok(true)
    }

    fn menu(&mut self, model: &mut KconfigModel) -> Result<Entry, ParseError> {
        let start = self.next().expect("caller peeked");
        let title = self.string("menu title")?;
        self.end_statement(start)?;
        let mut depends = Vec::new();
        let mut visible_if = Vec::new();
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::KwDepends => {
                    self.next();
                    self.expect(TokenKind::KwOn, "`on`")?;
                    depends.push(self.expr(tok)?);
                }
                TokenKind::KwVisible => {
                    self.next();
                    self.expect(TokenKind::KwIf, "`if`")?;
                    visible_if.push(self.expr(tok)?);
                }
                _ => break,
            }
            self.end_statement(tok)?;
        }
        let (children, end) = self.entries(model)?;
        self.close(end, TokenKind::KwEndmenu, "endmenu", start)?;
        Ok(Entry::Menu(MenuEntry {
            title,
            depends,
            visible_if,
            children,
            loc: self.loc(start),
        }))
    }

    fn choice(&mut self, model: &mut KconfigModel) -> Result<Entry, ParseError> {
        let start = self.next().expect("caller peeked");
        let name = match self.peek_same(start) {
            Some(Token { kind: TokenKind::Ident(n), .. }) => {
                self.next();
                Some(n.clone())
            }
            _ => None,
        };
        self.end_statement(start)?;
        let mut ty = None;
        let mut properties = Vec::new();
        let mut help = None;
        while let Some(tok) = self.peek() {
            if tok.kind == TokenKind::KwOptional {
                return Err(self.error_at(tok, "optional choices are not supported".into()));
            }
            if !self.common_option(tok, &mut ty, &mut properties, &mut help)? {
                break;
            }
        }
        if let Some(p) = properties.iter().find(|p| matches!(p.prop, Property::Default { cond: _, ref value } if !matches!(value, Expr::Symbol(_)))) {
            return Err(ParseError::at(&p.loc, "choice default must name a member".into()));
        }
        let (children, end) = self.entries(model)?;
        for c in &children {
            match c {
                Entry::Config(_) | Entry::Comment { .. } => {}
                Entry::Menu(MenuEntry { loc, .. })
                | Entry::Choice(ChoiceEntry { loc, .. })
                | Entry::If { loc, .. }
                | Entry::Source { loc, .. } => {
                    return Err(ParseError::at(loc, "only config entries may appear inside a choice".into()))
                }
            }
        }
        self.close(end, TokenKind::KwEndchoice, "endchoice", start)?;
        Ok(Entry::Choice(ChoiceEntry {
            name,
            ty,
            properties,
            help,
            children,
            loc: self.loc(start),
        }))
    }

    fn opt_if(&mut self, start: &Token) -> Result<Option<Expr>, ParseError> {
        match self.peek_same(start) {
            Some(t) if t.kind == TokenKind::KwIf => {
                self.next();
                Ok(Some(self.expr(start)?))
            }
            _ => Ok(None),
        }
    }

    fn expr(&mut self, start: &Token) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr(start)?;
        while self.peek_same(start).is_some_and(|t| t.kind == TokenKind::OpOr) {
            self.next();
            lhs = Expr::or(lhs, self.and_expr(start)?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, start: &Token) -> Result<Expr, ParseError> {
        let mut lhs = self.unary(start)?;
        while self.peek_same(start).is_some_and(|t| t.kind == TokenKind::OpAnd) {
            self.next();
            lhs = Expr::and(lhs, self.unary(start)?);
        }
        Ok(lhs)
    }

    fn unary(&mut self, start: &Token) -> Result<Expr, ParseError> {
        match self.peek_same(start) {
            Some(t) if t.kind == TokenKind::OpNot => {
                self.next();
                Ok(Expr::not(self.unary(start)?))
            }
            Some(t) if t.kind == TokenKind::LParen => {
                self.next();
                let e = self.expr(start)?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            Some(_) => {
                let lhs = self.leaf()?;
                let op = match self.peek_same(start).map(|t| &t.kind) {
                    Some(TokenKind::OpEq) => CmpOp::Eq,
                    Some(TokenKind::OpNeq) => CmpOp::Neq,
                    Some(TokenKind::OpLt) => CmpOp::Lt,
                    Some(TokenKind::OpLeq) => CmpOp::Leq,
                    Some(TokenKind::OpGt) => CmpOp::Gt,
                    Some(TokenKind::OpGeq) => CmpOp::Geq,
                    _ => return Ok(lhs),
                };
                self.next();
                let rhs = self.leaf()?;
                Ok(Expr::cmp(op, lhs, rhs))
            }
            None => match self.peek() {
                Some(t) => Err(self.error_at(t, "expected expression at end of line".into())),
                None => Err(self.error_eof("expression")),
            },
        }
    }

    fn leaf(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some(Token { kind: TokenKind::Ident(w), .. }) => Ok(leaf_for_word(w)),
            Some(Token { kind: TokenKind::Str(s), .. }) => Ok(Expr::Literal(s.clone())),
            Some(t) => Err(self.error_at(t, format!("expected symbol or constant, found {}", t.kind))),
            None => Err(self.error_eof("symbol or constant")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_keep_document_order() {
        let m = parse("config A\nbool\ndefault y if B\ndefault n", "t").unwrap();
        let props: Vec<_> = m.configs()[0].properties.iter().map(|p| p.prop.clone()).collect();
        assert_eq!(
            props,
            vec![
                Property::Default {
                    value: Expr::Tri(Tristate::Yes),
                    cond: Some(Expr::sym("B"))
                },
                Property::Default {
                    value: Expr::Tri(Tristate::No),
                    cond: None
                },
            ]
        );
    }

    #[test]
    fn empty_file() {
        assert!(parse("# nothing\n", "t").unwrap().configs().is_empty());
    }

    #[test]
    fn if_on_next_line_opens_block() {
        let m = parse("config A\n\tbool \"a\"\nif A\nconfig B\n\tbool\nendif\n", "t").unwrap();
        assert_eq!(m.entries.len(), 2);
        assert!(matches!(&m.entries[1], Entry::If { children, .. } if children.len() == 1));
        let Entry::Config(a) = &m.entries[0] else { panic!() };
        assert_eq!(a.properties.len(), 1);
    }

    #[test]
    fn unbalanced_blocks() {
        let e = parse("menu \"x\"\nconfig A\n\tbool\n", "f").unwrap_err();
        assert!(e.message.contains("endmenu"), "{e}");
        let e = parse("endmenu\n", "f").unwrap_err();
        assert_eq!(e.to_string(), "f:1:1: unexpected keyword `endmenu`");
    }

    #[test]
    fn comparisons_take_leaves() {
        let m = parse("config A\n\tbool\n\tdepends on !B = \"x\" && C != 3", "t").unwrap();
        let Property::DependsOn(e) = &m.configs()[0].properties[0].prop else { panic!() };
        assert_eq!(
            *e,
            Expr::and(
                Expr::not(Expr::cmp(CmpOp::Eq, Expr::sym("B"), Expr::Literal("x".into()))),
                Expr::cmp(CmpOp::Neq, Expr::sym("C"), Expr::Literal("3".into()))
            )
        );
    }

    #[test]
    fn duplicate_choice_membership_is_rejected() {
        let src = "choice\n\tprompt \"a\"\nconfig X\n\tbool \"x\"\nendchoice\nchoice\n\tprompt \"b\"\nconfig X\n\tbool \"x\"\nendchoice\n";
        let e = parse(src, "f").unwrap_err();
        assert!(e.message.contains("two choice groups"), "{e}");
    }
}

//! Pretty-printer whose output parses back to the same tree.

use std::fmt::Write;

use super::ast::*;
use super::parser::looks_numeric;

pub fn print_model(model: &KconfigModel) -> String {
    let mut out = String::new();
    if let Some(title) = &model.mainmenu {
        let _ = writeln!(out, "mainmenu {}", quote(title));
    }
    print_entries(&model.entries, &mut out);
    out
}

pub fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Or(..) => 0,
        Expr::And(..) => 1,
        _ => 2,
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_child(e: &Expr, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Symbol(s) => out.push_str(s),
        Expr::Tri(t) => out.push(t.letter()),
        Expr::Literal(l) if looks_numeric(l) => out.push_str(l),
        Expr::Literal(l) => out.push_str(&quote(l)),
        Expr::Not(a) => {
            out.push('!');
            write_child(a, prec(a) < 2, out);
        }
        Expr::And(a, b) | Expr::Or(a, b) => {
            let p = prec(e);
            write_child(a, prec(a) < p, out);
            out.push_str(if p == 1 { " && " } else { " || " });
            write_child(b, prec(b) <= p, out);
        }
        Expr::Cmp(op, a, b) => {
            write_expr(a, out);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(b, out);
        }
    }
}

fn cond_suffix(cond: &Option<Expr>) -> String {
    cond.as_ref().map(|c| format!(" if {}", print_expr(c))).unwrap_or_default()
}

fn print_property(p: &Property, out: &mut String) {
    let _ = match p {
        Property::Prompt { text, cond } => writeln!(out, "\tprompt {}{}", quote(text), cond_suffix(cond)),
        Property::Default { value, cond } => writeln!(out, "\tdefault {}{}", print_expr(value), cond_suffix(cond)),
        Property::DependsOn(e) => writeln!(out, "\tdepends on {}", print_expr(e)),
        Property::Select { target, cond } => writeln!(out, "\tselect {target}{}", cond_suffix(cond)),
        Property::Imply { target, cond } => writeln!(out, "\timply {target}{}", cond_suffix(cond)),
        Property::Range { lo, hi, cond } => {
            writeln!(out, "\trange {} {}{}", print_expr(lo), print_expr(hi), cond_suffix(cond))
        }
    };
}

fn print_help(help: &Option<String>, out: &mut String) {
    if let Some(h) = help {
        out.push_str("\thelp\n");
        for line in h.lines() {
            if line.is_empty() {
                out.push('\n');
            } else {
                let _ = writeln!(out, "\t  {line}");
            }
        }
    }
}

fn print_entries(entries: &[Entry], out: &mut String) {
    for e in entries {
        match e {
            Entry::Config(c) => {
                let kw = if c.menuconfig { "menuconfig" } else { "config" };
                let _ = writeln!(out, "{kw} {}", c.name);
                if let Some(t) = c.ty {
                    let _ = writeln!(out, "\t{t}");
                }
                for p in &c.properties {
                    print_property(&p.prop, out);
                }
                if c.modules {
                    out.push_str("\toption modules\n");
                }
                print_help(&c.help, out);
            }
            Entry::Menu(m) => {
                let _ = writeln!(out, "menu {}", quote(&m.title));
                for d in &m.depends {
                    let _ = writeln!(out, "\tdepends on {}", print_expr(d));
                }
                for v in &m.visible_if {
                    let _ = writeln!(out, "\tvisible if {}", print_expr(v));
                }
                print_entries(&m.children, out);
                out.push_str("endmenu\n");
            }
            Entry::Choice(c) => {
                match &c.name {
                    Some(n) => {
                        let _ = writeln!(out, "choice {n}");
                    }
                    None => out.push_str("choice\n"),
                }
                if let Some(t) = c.ty {
                    let _ = writeln!(out, "\t{t}");
                }
                for p in &c.properties {
                    print_property(&p.prop, out);
                }
                print_help(&c.help, out);
                print_entries(&c.children, out);
                out.push_str("endchoice\n");
            }
            Entry::If { cond, children, .. } => {
                let _ = writeln!(out, "if {}", print_expr(cond));
                print_entries(children, out);
                out.push_str("endif\n");
            }
            Entry::Comment { text, depends, .. } => {
                let _ = writeln!(out, "comment {}", quote(text));
                for d in depends {
                    let _ = writeln!(out, "\tdepends on {}", print_expr(d));
                }
            }
            Entry::Source { path, .. } => {
                let _ = writeln!(out, "source {}", quote(path));
            }
        }
    }
}

//! Seeded generators of Kconfig sources: small random models for exhaustive
//! property tests and large layered models for scalability checks.
//!
//! Expressions only mention earlier symbols and selects only target later
//! ones, so generated models never contain dependency cycles.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SmallModelParams {
    /// Number of Bool/Tristate symbols, including choice members and the
    /// modules symbol.
    pub boolish: usize,
    pub tristate: bool,
    pub modules: bool,
    pub choices: bool,
    pub nonbool: bool,
    pub menus: bool,
}

impl Default for SmallModelParams {
    fn default() -> Self {
        SmallModelParams {
            boolish: 6,
            tristate: true,
            modules: true,
            choices: true,
            nonbool: true,
            menus: true,
        }
    }
}

struct Gen {
    rng: ChaCha8Rng,
    /// Bool/Tristate symbols declared so far.
    names: Vec<String>,
    /// Int symbols declared so far, with constants they may be compared to.
    ints: Vec<String>,
    out: String,
}

impl Gen {
    fn leaf(&mut self) -> String {
        if self.names.is_empty() || self.rng.random_bool(0.05) {
            return ["y", "m", "n", "UNDEFINED_SYM"].choose(&mut self.rng).unwrap().to_string();
        }
        if !self.ints.is_empty() && self.rng.random_bool(0.15) {
            let s = self.ints.choose(&mut self.rng).unwrap().clone();
            let op = ["=", "!=", "<", ">=", ">"].choose(&mut self.rng).unwrap();
            return format!("{s} {op} {}", self.rng.random_range(0..6));
        }
        let s = self.names.choose(&mut self.rng).unwrap().clone();
        match self.rng.random_range(0..10) {
            0 => format!("{s} = {}", ["y", "m", "n"].choose(&mut self.rng).unwrap()),
            1 => format!("{s} != {}", ["y", "m", "n"].choose(&mut self.rng).unwrap()),
            _ => s,
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.random_bool(0.5) {
            let l = self.leaf();
            return if self.rng.random_bool(0.2) { format!("!({l})") } else { l };
        }
        let (a, b) = (self.expr(depth - 1), self.expr(depth - 1));
        let op = if self.rng.random_bool(0.5) { "&&" } else { "||" };
        format!("({a} {op} {b})")
    }

    fn tri_value(&mut self) -> String {
        if !self.names.is_empty() && self.rng.random_bool(0.3) {
            return self.names.choose(&mut self.rng).unwrap().clone();
        }
        ["y", "m", "n"].choose(&mut self.rng).unwrap().to_string()
    }
}

/// A small random model; every generated source parses and links.
pub fn small_model(seed: u64, p: &SmallModelParams) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        names: Vec::new(),
        ints: Vec::new(),
        out: String::new(),
    };
    let mut remaining = p.boolish;
    if p.tristate && p.modules && remaining > 1 && g.rng.random_bool(0.5) {
        g.out.push_str("config MODULES\n\tbool \"modules\"\n\tmodules\n");
        g.names.push("MODULES".into());
        remaining -= 1;
    }
    if p.nonbool && g.rng.random_bool(0.4) {
        let cond = if g.rng.random_bool(0.5) && !g.names.is_empty() { format!("\tdepends on {}\n", g.expr(0)) } else { String::new() };
        let prompt = if g.rng.random_bool(0.7) { " \"n\"" } else { "" };
        let _ = write!(g.out, "config N0\n\tint{prompt}\n{cond}\tdefault {}\n", g.rng.random_range(0..6));
        if g.rng.random_bool(0.5) {
            let lo = g.rng.random_range(0..3);
            let _ = writeln!(g.out, "\trange {lo} {}", lo + g.rng.random_range(1..4));
        }
        g.ints.push("N0".into());
    }
    // selects are recorded as pending until their targets exist
    let mut pending_selects: Vec<(usize, String)> = Vec::new();
    let mut bodies: Vec<String> = Vec::new();
    let mut open_menus = 0;
    let mut counter = 0;
    while remaining > 0 {
        if p.menus && g.rng.random_bool(0.12) {
            let mut head = "menu \"m\"\n".to_string();
            if !g.names.is_empty() && g.rng.random_bool(0.5) {
                let _ = writeln!(head, "\tdepends on {}", g.expr(1));
            }
            if !g.names.is_empty() && g.rng.random_bool(0.4) {
                let _ = writeln!(head, "\tvisible if {}", g.expr(0));
            }
            bodies.push(head);
            open_menus += 1;
        }
        if open_menus > 0 && g.rng.random_bool(0.3) {
            bodies.push("endmenu\n".into());
            open_menus -= 1;
        }
        if p.choices && remaining >= 2 && g.rng.random_bool(0.15) {
            let k = g.rng.random_range(2..=remaining.min(3));
            let ty = if p.tristate && g.rng.random_bool(0.5) { "tristate" } else { "bool" };
            let mut b = format!("choice\n\tprompt \"c\"\n\t{ty}\n");
            if !g.names.is_empty() && g.rng.random_bool(0.4) {
                let _ = writeln!(b, "\tdepends on {}", g.expr(1));
            }
            let members: Vec<String> = (0..k).map(|i| format!("C{counter}_{i}")).collect();
            if g.rng.random_bool(0.5) {
                let d = members.choose(&mut g.rng).unwrap().clone();
                let cond = if !g.names.is_empty() && g.rng.random_bool(0.3) { format!(" if {}", g.expr(0)) } else { String::new() };
                let _ = writeln!(b, "\tdefault {d}{cond}");
            }
            for m in &members {
                let _ = write!(b, "config {m}\n\t{ty} \"{m}\"\n");
                if !g.names.is_empty() && g.rng.random_bool(0.3) {
                    let _ = writeln!(b, "\tdepends on {}", g.expr(0));
                }
            }
            b.push_str("endchoice\n");
            bodies.push(b);
            g.names.extend(members);
            counter += 1;
            remaining -= k;
            continue;
        }
        let name = format!("S{counter}");
        counter += 1;
        let ty = if p.tristate && g.rng.random_bool(0.5) { "tristate" } else { "bool" };
        let mut b = format!("config {name}\n");
        if g.rng.random_bool(0.75) {
            let cond = if !g.names.is_empty() && g.rng.random_bool(0.2) { format!(" if {}", g.expr(0)) } else { String::new() };
            let _ = writeln!(b, "\t{ty} \"{name}\"{cond}");
        } else {
            let _ = writeln!(b, "\t{ty}");
        }
        if !g.names.is_empty() && g.rng.random_bool(0.45) {
            let _ = writeln!(b, "\tdepends on {}", g.expr(2));
        }
        for _ in 0..g.rng.random_range(0..3) {
            let v = g.tri_value();
            let cond = if !g.names.is_empty() && g.rng.random_bool(0.4) { format!(" if {}", g.expr(1)) } else { String::new() };
            let _ = writeln!(b, "\tdefault {v}{cond}");
        }
        // select or imply a later symbol
        if g.rng.random_bool(0.35) {
            let cond = if !g.names.is_empty() && g.rng.random_bool(0.3) { format!(" if {}", g.expr(0)) } else { String::new() };
            let kind = if g.rng.random_bool(0.8) { "select" } else { "imply" };
            pending_selects.push((bodies.len(), format!("{kind}|{cond}")));
        }
        bodies.push(b);
        g.names.push(name);
        remaining -= 1;
    }
    for _ in 0..open_menus {
        bodies.push("endmenu\n".into());
    }
    // resolve select targets: a later plain symbol, if any
    let plain: Vec<(usize, String)> = bodies
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.strip_prefix("config S").map(|r| (i, format!("S{}", r.split('\n').next().unwrap()))))
        .collect();
    for (idx, spec) in pending_selects {
        let (kind, cond) = spec.split_once('|').unwrap();
        let later: Vec<&(usize, String)> = plain.iter().filter(|(i, _)| *i > idx).collect();
        if let Some((_, target)) = later.choose(&mut g.rng) {
            let _ = writeln!(bodies[idx], "\t{kind} {target}{cond}");
        }
    }
    for b in bodies {
        g.out.push_str(&b);
    }
    g.out
}

/// A layered model with `n` symbols mixing depends, select and default
/// properties, used as a scalability proxy.
pub fn large_model(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(n * 80);
    out.push_str("config MODULES\n\tbool \"modules\"\n\tmodules\n\tdefault y\n");
    let mut menu_open = false;
    for i in 1..n {
        if i % 200 == 1 {
            if menu_open {
                out.push_str("endmenu\n");
            }
            let _ = writeln!(out, "menu \"group {}\"", i / 200);
            menu_open = true;
        }
        let ty = if rng.random_bool(0.4) { "tristate" } else { "bool" };
        let _ = writeln!(out, "config L{i}");
        if rng.random_bool(0.8) {
            let _ = writeln!(out, "\t{ty} \"L{i}\"");
        } else {
            let _ = writeln!(out, "\t{ty}");
        }
        let back = |rng: &mut ChaCha8Rng| format!("L{}", rng.random_range(i.saturating_sub(50).max(1)..i));
        if i > 2 && rng.random_bool(0.6) {
            let a = back(&mut rng);
            if rng.random_bool(0.3) {
                let b = back(&mut rng);
                let _ = writeln!(out, "\tdepends on {a} && !{b}");
            } else {
                let _ = writeln!(out, "\tdepends on {a}");
            }
        }
        if rng.random_bool(0.3) {
            let v = if i > 2 && rng.random_bool(0.3) { back(&mut rng) } else { "y".into() };
            let _ = writeln!(out, "\tdefault {v}");
        }
        if i + 60 < n && rng.random_bool(0.15) {
            let _ = writeln!(out, "\tselect L{}", i + rng.random_range(1..60));
        }
    }
    if menu_open {
        out.push_str("endmenu\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kconfig::{link, parse};

    #[test]
    fn small_models_link() {
        for seed in 0..300 {
            let src = small_model(seed, &SmallModelParams::default());
            let m = parse(&src, "g").unwrap_or_else(|e| panic!("{e}\n{src}"));
            let l = link(&m).unwrap_or_else(|e| panic!("{e}\n{src}"));
            let boolish = l.symbols.iter().filter(|s| s.ty.is_boolish()).count();
            assert!(boolish <= 8, "{src}");
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let p = SmallModelParams::default();
        assert_eq!(small_model(7, &p), small_model(7, &p));
        assert_eq!(large_model(500, 1), large_model(500, 1));
    }
}

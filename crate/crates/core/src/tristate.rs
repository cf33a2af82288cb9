//! Three-valued Kleene logic over `n < m < y`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Tristate {
    #[serde(rename = "n")]
    No = 0,
    #[serde(rename = "m")]
    Mod = 1,
    #[serde(rename = "y")]
    Yes = 2,
}

pub use Tristate::{Mod, No, Yes};

impl Tristate {
    pub const ALL: [Tristate; 3] = [No, Mod, Yes];

    pub const fn from_u8(v: u8) -> Option<Tristate> {
        match v {
            0 => Some(No),
            1 => Some(Mod),
            2 => Some(Yes),
            _ => None,
        }
    }

    pub const fn as_u8(self) -> u8 {
        self as u8
    }

    pub const fn from_bool(b: bool) -> Tristate {
        if b {
            Yes
        } else {
            No
        }
    }

    pub fn and(self, other: Tristate) -> Tristate {
        tri_and(self, other)
    }

    pub fn or(self, other: Tristate) -> Tristate {
        tri_or(self, other)
    }

    pub fn is_set(self) -> bool {
        self != No
    }

    pub const fn letter(self) -> char {
        match self {
            No => 'n',
            Mod => 'm',
            Yes => 'y',
        }
    }
}

/// Kleene conjunction: the minimum.
pub fn tri_and(a: Tristate, b: Tristate) -> Tristate {
    a.min(b)
}

/// Kleene disjunction: the maximum.
pub fn tri_or(a: Tristate, b: Tristate) -> Tristate {
    a.max(b)
}

/// Kleene negation: `2 - a`.
pub fn tri_not(a: Tristate) -> Tristate {
    match a {
        No => Yes,
        Mod => Mod,
        Yes => No,
    }
}

impl std::ops::Not for Tristate {
    type Output = Tristate;

    fn not(self) -> Tristate {
        tri_not(self)
    }
}

impl fmt::Display for Tristate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Tristate {
    type Err = String;

    fn from_str(s: &str) -> Result<Tristate, String> {
        match s {
            "n" | "N" => Ok(No),
            "m" | "M" => Ok(Mod),
            "y" | "Y" => Ok(Yes),
            _ => Err(format!("`{s}` is not a tristate value")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(tri_and(Yes, Mod), Mod);
        assert_eq!(tri_and(No, No), No);
        assert_eq!(tri_or(No, Yes), Yes);
        assert_eq!(tri_or(Mod, No), Mod);
        assert_eq!(tri_not(Yes), No);
        assert_eq!(tri_not(Mod), Mod);
        assert_eq!(tri_not(No), Yes);
    }

    #[test]
    fn numeric_encoding() {
        for t in Tristate::ALL {
            assert_eq!(Tristate::from_u8(t.as_u8()), Some(t));
            assert_eq!(tri_not(t).as_u8(), 2 - t.as_u8());
        }
    }
}

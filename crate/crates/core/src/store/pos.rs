use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Coarse part-of-speech tag used to restrict sense candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 5] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv, Pos::Other];

    /// Code used by the binary dump format.
    pub fn code(self) -> u8 {
        match self {
            Pos::Noun => 0,
            Pos::Verb => 1,
            Pos::Adj => 2,
            Pos::Adv => 3,
            Pos::Other => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Pos> {
        Pos::ALL.get(code as usize).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Other => "OTHER",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown part-of-speech tag `{0}`")]
pub struct UnknownPos(pub String);

impl FromStr for Pos {
    type Err = UnknownPos;

    /// Accepts the universal tag names and WordNet's single-letter codes
    /// (`s`, the satellite adjective, maps to ADJ).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "NOUN" | "N" => Ok(Pos::Noun),
            "VERB" | "V" => Ok(Pos::Verb),
            "ADJ" | "A" | "S" => Ok(Pos::Adj),
            "ADV" | "R" => Ok(Pos::Adv),
            "OTHER" | "X" => Ok(Pos::Other),
            _ => Err(UnknownPos(s.to_string())),
        }
    }
}

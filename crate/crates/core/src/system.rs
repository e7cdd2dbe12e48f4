//! Finite systems of equations `E ⊂ F_S`, given as relators `w` meaning `w = 1`.
//!
//! File format: the first non-comment line lists the generator names, each
//! following line holds relator words (whitespace or comma separated). The
//! JSON form is `{"alphabet": "xy", "relators": ["xyXY"]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Alphabet, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem {
    alphabet: Alphabet,
    relators: Vec<Word>,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    alphabet: String,
    relators: Vec<String>,
}

impl EquationSystem {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self> {
        if relators.is_empty() {
            return Err(Error::InvalidArgument(
                "an equation system needs at least one relator".into(),
            ));
        }
        for (i, w) in relators.iter().enumerate() {
            if w.rank() != alphabet.rank() {
                return Err(Error::AlphabetMismatch {
                    left: w.rank(),
                    right: alphabet.rank(),
                });
            }
            if w.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "relator {} reduces to the identity",
                    i + 1
                )));
            }
            if relators[..i].contains(w) {
                return Err(Error::InvalidArgument(format!(
                    "relator {} is listed twice",
                    alphabet.render(w)
                )));
            }
        }
        let label = relators
            .iter()
            .map(|w| alphabet.render(w))
            .collect::<Vec<_>>()
            .join(",");
        Ok(EquationSystem {
            alphabet,
            relators,
            label,
        })
    }

    /// `{xyXY}`: the two generators commute.
    pub fn commutator() -> Self {
        let a = Alphabet::standard(2);
        let w = a.parse_word("xyXY").expect("valid word");
        let mut sys = Self::new(a, vec![w]).expect("valid system");
        sys.label = "commutator".into();
        sys
    }

    /// `{x yᵐ x⁻¹ y⁻ⁿ}`, the Baumslag–Solitar relation `x yᵐ = yⁿ x`.
    pub fn baumslag_solitar(m: i64, n: i64) -> Result<Self> {
        let rel = Word::generator(2, 0)
            .concat(&Word::power(2, 1, m))?
            .concat(&Word::generator(2, 0).invert())?
            .concat(&Word::power(2, 1, -n))?;
        let mut sys = Self::new(Alphabet::standard(2), vec![rel])?;
        sys.label = format!("bs {m} {n}");
        Ok(sys)
    }

    /// `commutator`, `bs m n` (also `bs:m:n`).
    pub fn named(name: &str) -> Result<Self> {
        let parts: Vec<&str> = name
            .split(|c: char| c.is_whitespace() || c == ':')
            .filter(|t| !t.is_empty())
            .collect();
        match parts.as_slice() {
            ["commutator"] => Ok(Self::commutator()),
            ["bs", m, n] => {
                let m = m
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent {m:?}")))?;
                let n = n
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent {n:?}")))?;
                Self::baumslag_solitar(m, n)
            }
            _ => Err(Error::Parse(format!("unknown system {name:?}"))),
        }
    }

    pub fn parse_file(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let raw: SystemJson = serde_json::from_str(text)
                .map_err(|e| Error::Parse(format!("system JSON: {e}")))?;
            let alphabet = Alphabet::new(&raw.alphabet)?;
            let relators = raw
                .relators
                .iter()
                .map(|w| alphabet.parse_word(w))
                .collect::<Result<_>>()?;
            return Self::new(alphabet, relators);
        }
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let alphabet = Alphabet::new(
            lines
                .next()
                .ok_or_else(|| Error::Parse("empty system file".into()))?,
        )?;
        let mut relators = Vec::new();
        for line in lines {
            relators.extend(alphabet.parse_word_list(line)?);
        }
        Self::new(alphabet, relators)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SystemJson {
            alphabet: self.alphabet.names().iter().collect(),
            relators: self.relators.iter().map(|w| self.alphabet.render(w)).collect(),
        })
        .expect("plain data")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rank(&self) -> usize {
        self.alphabet.rank()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_relator_len(&self) -> usize {
        self.relators.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Context for the built-in Baumslag–Solitar systems. Informational
    /// only; nothing here is verified.
    pub fn note(&self) -> Option<&'static str> {
        let rest = self.label.strip_prefix("bs ")?;
        let mut it = rest.split(' ').map(|t| t.parse::<i64>().ok());
        let (m, n) = (it.next()??.abs(), it.next()??.abs());
        if m == n && m >= 2 {
            Some("m = n >= 2: known not to be BS-rigid, hence not testable")
        } else if m >= 2 && n >= 2 && gcd(m, n) == 1 {
            Some("coprime m, n >= 2: known to be testable but not stable")
        } else {
            None
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

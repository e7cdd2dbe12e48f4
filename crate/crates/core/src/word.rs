//! Reduced words in a free group of finite rank.
//!
//! Text format: one ASCII letter per generator, lowercase for the generator
//! and uppercase for its inverse. The empty string (or `1`) is the identity.
//!
//! Words act on points from the left: `(uv)(σ)x = u(σ)(v(σ)x)`, so the
//! rightmost letter is applied first.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::perm::{PermTuple, Permutation, QueryOracle};

const DEFAULT_NAMES: &str = "xyzwvutsrqponmlkjihgfedcba";

/// A generator `s_i` or its inverse. `index` is 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub index: usize,
    pub inverted: bool,
}

impl Generator {
    pub fn new(index: usize, inverted: bool) -> Self {
        Generator { index, inverted }
    }

    pub fn inverse(self) -> Self {
        Generator {
            index: self.index,
            inverted: !self.inverted,
        }
    }

    /// Position in the letter order `s_1 < s_1⁻¹ < s_2 < s_2⁻¹ < ...`.
    pub fn ordinal(self) -> usize {
        2 * self.index + self.inverted as usize
    }

    fn cancels(self, other: Generator) -> bool {
        self.index == other.index && self.inverted != other.inverted
    }
}

impl PartialOrd for Generator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Generator {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ordinal().cmp(&other.ordinal())
    }
}

/// Generator names. Case encodes inversion, so names are lowercase ASCII
/// letters and pairwise distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    pub fn new(names: &str) -> Result<Self> {
        let mut out: Vec<char> = Vec::new();
        for c in names.chars().filter(|c| !c.is_whitespace() && *c != ',') {
            if !c.is_ascii_alphabetic() {
                return Err(Error::InvalidAlphabet(format!(
                    "generator name {c:?} is not an ASCII letter"
                )));
            }
            let c = c.to_ascii_lowercase();
            if out.contains(&c) {
                return Err(Error::InvalidAlphabet(format!(
                    "generator name {c:?} appears twice (names are case-insensitive)"
                )));
            }
            out.push(c);
        }
        if out.is_empty() {
            return Err(Error::InvalidAlphabet("no generators".into()));
        }
        Ok(Alphabet { names: out })
    }

    /// `x, y, z, w, ...` for `k` generators.
    pub fn standard(k: usize) -> Self {
        assert!(
            (1..=DEFAULT_NAMES.len()).contains(&k),
            "standard alphabet supports 1..=26 generators"
        );
        Alphabet {
            names: DEFAULT_NAMES.chars().take(k).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn letter(&self, g: Generator) -> char {
        let c = self.names[g.index];
        if g.inverted {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn render(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.letters.iter().map(|&g| self.letter(g)).collect()
    }

    /// Parses a word and returns its freely reduced form.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        let mut letters = Vec::with_capacity(text.len());
        for (position, c) in text.chars().enumerate() {
            if c == '1' {
                continue;
            }
            let lower = c.to_ascii_lowercase();
            match self.names.iter().position(|&n| n == lower) {
                Some(index) => letters.push(Generator::new(index, c.is_ascii_uppercase())),
                None => {
                    return Err(Error::UnknownSymbol {
                        found: c,
                        position,
                        reason: format!(
                            "alphabet is {:?}",
                            self.names.iter().collect::<String>()
                        ),
                    })
                }
            }
        }
        Ok(reduce(self.rank(), letters))
    }

    /// Parses a whitespace- or comma-separated list of words.
    pub fn parse_word_list(&self, text: &str) -> Result<Vec<Word>> {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| self.parse_word(t))
            .collect()
    }
}

/// A freely reduced word over `rank` generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<Generator>,
}

/// Freely reduces a letter sequence.
pub fn reduce(rank: usize, letters: impl IntoIterator<Item = Generator>) -> Word {
    let mut stack: Vec<Generator> = Vec::new();
    for g in letters {
        assert!(g.index < rank, "generator {} outside rank {rank}", g.index);
        match stack.last() {
            Some(&top) if top.cancels(g) => {
                stack.pop();
            }
            _ => stack.push(g),
        }
    }
    Word {
        rank,
        letters: stack,
    }
}

impl Word {
    pub fn identity(rank: usize) -> Self {
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    pub fn generator(rank: usize, index: usize) -> Self {
        reduce(rank, [Generator::new(index, false)])
    }

    /// `g^e` for a single generator; negative exponents use the inverse.
    pub fn power(rank: usize, index: usize, exponent: i64) -> Self {
        let g = Generator::new(index, exponent < 0);
        reduce(rank, std::iter::repeat_n(g, exponent.unsigned_abs() as usize))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Generator] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn invert(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|g| g.inverse()).collect(),
        }
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.rank != other.rank {
            return Err(Error::AlphabetMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(reduce(
            self.rank,
            self.letters.iter().chain(other.letters.iter()).copied(),
        ))
    }

    fn check_arity(&self, sigma: &PermTuple) -> Result<()> {
        if sigma.k() != self.rank {
            return Err(Error::ArityMismatch {
                expected: self.rank,
                got: sigma.k(),
            });
        }
        Ok(())
    }

    /// Applies the word to a single point without query accounting.
    pub fn apply(&self, sigma: &PermTuple, x: usize) -> usize {
        self.letters.iter().rev().fold(x, |p, g| {
            let perm = sigma.get(g.index);
            if g.inverted {
                perm.preimage(p)
            } else {
                perm.image(p)
            }
        })
    }

    /// `w(σ̄)` as a permutation.
    pub fn evaluate(&self, sigma: &PermTuple) -> Result<Permutation> {
        self.check_arity(sigma)?;
        let images = (0..sigma.degree()).map(|x| self.apply(sigma, x)).collect();
        Ok(Permutation::from_images_unchecked(images))
    }

    /// `w(σ̄)x`, paying one oracle query per letter.
    pub fn evaluate_point_counted(&self, oracle: &mut QueryOracle<'_>, x: usize) -> Result<usize> {
        self.check_arity(oracle.tuple())?;
        Ok(self.letters.iter().rev().fold(x, |p, g| {
            if g.inverted {
                oracle.inverse(g.index, p)
            } else {
                oracle.forward(g.index, p)
            }
        }))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank <= DEFAULT_NAMES.len() {
            f.write_str(&Alphabet::standard(self.rank.max(1)).render(self))
        } else {
            write!(f, "{:?}", self.letters)
        }
    }
}

/// Shortlex: shorter words first, then lexicographic in letter order.
impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(self.letters.len().cmp(&other.letters.len()))
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

/// All freely reduced words of length at most `max_len`, in shortlex order.
pub fn enumerate_reduced_words(rank: usize, max_len: usize) -> Vec<Word> {
    let letters: Vec<Generator> = (0..rank)
        .flat_map(|i| [Generator::new(i, false), Generator::new(i, true)])
        .collect();
    let mut out = vec![Word::identity(rank)];
    let mut layer = vec![Word::identity(rank)];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * (2 * rank).saturating_sub(1).max(1));
        for w in &layer {
            for &g in &letters {
                if w.letters.last().is_some_and(|&last| last.cancels(g)) {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(g);
                next.push(Word { rank, letters });
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `1 + Σ_{ℓ=1..r} 2k(2k−1)^{ℓ−1}`.
pub fn reduced_word_count(rank: usize, max_len: usize) -> u128 {
    let k = rank as u128;
    let mut total = 1u128;
    let mut layer = 2 * k;
    for _ in 0..max_len {
        total += layer;
        layer *= (2 * k).saturating_sub(1);
    }
    total
}

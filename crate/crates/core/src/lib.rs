//! Randomized testers for systems of equations over permutations.
//!
//! The crate evaluates free-group words on tuples of permutations, runs the
//! sample-and-substitute and local-statistics testers under an explicit query
//! cost model, and provides exact (rational) oracles for solution sets,
//! defects, distances and stabilizer-trace distributions at small degree.
//!
//! Points are 0-based everywhere inside the library. The text formats in
//! [`perm`] and the CLI are 1-based.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod gset;
pub mod perm;
pub mod rng;
pub mod solutions;
pub mod stats;
pub mod system;
pub mod testers;
pub mod word;

pub use error::{Error, Result};
pub use perm::{PermTuple, Permutation, QueryOracle};
pub use system::EquationSystem;
pub use word::{Alphabet, Generator, Word};

/// Exact rational used for distances, defects and distribution weights.
pub type Rational = num_rational::Ratio<i64>;

/// Arbitrary-precision rational, used where powers would overflow `i64`.
pub type BigRational = num_rational::BigRational;

pub(crate) fn big(r: Rational) -> BigRational {
    BigRational::new((*r.numer()).into(), (*r.denom()).into())
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.05` into an
/// exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("bad rational {t:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let scale = 10i64.pow(frac.len() as u32);
    let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let value = int
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(bad)?;
    Ok(Rational::new(if negative { -value } else { value }, scale))
}

/// `p/q` rendering used in JSON and CSV output.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

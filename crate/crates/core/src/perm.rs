//! Permutations of `[n]`, k-tuples of them and the normalized Hamming metric.
//!
//! Internally points are `0..n`. The text formats are 1-based:
//!
//! * image list: `2 3 1` (the image of 1, then of 2, ...)
//! * cycle notation: `(1 2 3)(4 5)`, or `()` / `id` for the identity
//!
//! A tuple is one permutation per line, or a JSON array of image lists.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutation degree must be positive");
        let images: Vec<usize> = (0..n).collect();
        Permutation {
            inverse: images.clone(),
            images,
        }
    }

    /// From 0-based images; fails unless `images` is a bijection of `0..n`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("degree must be positive".into()));
        }
        let mut inverse = vec![usize::MAX; n];
        for (x, &y) in images.iter().enumerate() {
            if y >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {} out of range 1..={n}",
                    y + 1
                )));
            }
            if inverse[y] != usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "value {} appears twice",
                    y + 1
                )));
            }
            inverse[y] = x;
        }
        Ok(Permutation { images, inverse })
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        let mut inverse = vec![0; images.len()];
        for (x, &y) in images.iter().enumerate() {
            inverse[y] = x;
        }
        Permutation { images, inverse }
    }

    /// From 1-based images.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let images = images
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("points are 1-based".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(images)
    }

    /// From 1-based disjoint cycles on `[n]`.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPermutation("degree must be positive".into()));
        }
        let mut images: Vec<usize> = (0..n).collect();
        let mut seen = vec![false; n];
        for cycle in cycles {
            for (i, &p) in cycle.iter().enumerate() {
                if p == 0 || p > n {
                    return Err(Error::InvalidPermutation(format!(
                        "point {p} outside 1..={n}"
                    )));
                }
                if seen[p - 1] {
                    return Err(Error::InvalidPermutation(format!(
                        "point {p} appears in more than one place"
                    )));
                }
                seen[p - 1] = true;
                images[p - 1] = cycle[(i + 1) % cycle.len()] - 1;
            }
        }
        Self::from_images(images)
    }

    /// Parses an image list or cycle notation. Cycle notation uses `degree`
    /// when given, otherwise the largest point mentioned.
    pub fn parse(text: &str, degree: Option<usize>) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty permutation".into()));
        }
        if text == "id" || text.starts_with('(') {
            let cycles = parse_cycles(text)?;
            let max = cycles.iter().flatten().copied().max().unwrap_or(1);
            let n = degree.unwrap_or(max);
            if max > n {
                return Err(Error::InvalidPermutation(format!(
                    "point {max} exceeds degree {n}"
                )));
            }
            return Self::from_cycles(n, &cycles);
        }
        let images = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad point {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = Self::from_one_based(&images)?;
        if let Some(n) = degree {
            if n != p.degree() {
                return Err(Error::DegreeMismatch {
                    left: p.degree(),
                    right: n,
                });
            }
        }
        Ok(p)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng);
        Self::from_images_unchecked(images)
    }

    /// The transposition of 0-based points `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Self::from_images_unchecked(images)
    }

    /// `x ↦ x + 1 mod n`.
    pub fn cycle(n: usize) -> Self {
        Self::from_images_unchecked((0..n).map(|x| (x + 1) % n).collect())
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn preimage(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            images: self.inverse.clone(),
            inverse: self.images.clone(),
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(Self::from_images_unchecked(
            other.images.iter().map(|&y| self.images[y]).collect(),
        ))
    }

    /// `self^e` for `e ≥ 0`; negative exponents use the inverse.
    pub fn pow(&self, e: i64) -> Permutation {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Permutation::identity(self.degree());
        for _ in 0..e.unsigned_abs() {
            out = base.compose(&out).expect("same degree");
        }
        out
    }

    /// `π ∘ self ∘ π⁻¹`, i.e. `self` with points relabeled by `π`.
    pub fn conjugate_by(&self, pi: &Permutation) -> Result<Permutation> {
        pi.compose(self)?.compose(&pi.inverse())
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn fixed_points(&self) -> usize {
        self.images.iter().enumerate().filter(|(x, y)| x == *y).count()
    }

    /// 1-based cycle notation omitting fixed points; `()` for the identity.
    pub fn cycle_string(&self) -> String {
        let mut seen = vec![false; self.degree()];
        let mut out = String::new();
        for start in 0..self.degree() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            out.push('(');
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    out.push(' ');
                }
                first = false;
                out.push_str(&(x + 1).to_string());
                x = self.images[x];
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }

    /// 1-based image list.
    pub fn image_string(&self) -> String {
        self.images
            .iter()
            .map(|y| (y + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.images.iter().map(|y| y + 1).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycle_string())
    }
}

fn parse_cycles(text: &str) -> Result<Vec<Vec<usize>>> {
    if text == "id" || text == "()" {
        return Ok(Vec::new());
    }
    let mut cycles = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected '(' in {text:?}")))?;
        let close = open
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unclosed cycle in {text:?}")))?;
        let cycle = open[..close]
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad point {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
        rest = open[close + 1..].trim_start();
    }
    Ok(cycles)
}

/// Normalized Hamming distance `|{x : σx ≠ τx}| / n` on equal degrees.
pub fn dist(sigma: &Permutation, tau: &Permutation) -> Result<Rational> {
    if sigma.degree() != tau.degree() {
        return Err(Error::DegreeMismatch {
            left: sigma.degree(),
            right: tau.degree(),
        });
    }
    Ok(dist_cross(sigma, tau))
}

/// Distance across degrees: disagreements on the smaller point set, divided
/// by its size. Symmetric in its arguments.
pub fn dist_cross(sigma: &Permutation, tau: &Permutation) -> Rational {
    let n = sigma.degree().min(tau.degree());
    let disagree = (0..n)
        .filter(|&x| sigma.images[x] != tau.images[x])
        .count();
    Rational::new(disagree as i64, n as i64)
}

/// A k-tuple of permutations of a common degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermTuple {
    perms: Vec<Permutation>,
}

impl PermTuple {
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        let first = perms
            .first()
            .ok_or_else(|| Error::InvalidArgument("a tuple needs at least one permutation".into()))?;
        let n = first.degree();
        if let Some(bad) = perms.iter().find(|p| p.degree() != n) {
            return Err(Error::DegreeMismatch {
                left: n,
                right: bad.degree(),
            });
        }
        Ok(PermTuple { perms })
    }

    pub fn identity(k: usize, n: usize) -> Self {
        PermTuple {
            perms: vec![Permutation::identity(n); k],
        }
    }

    pub fn random<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Self {
        PermTuple {
            perms: (0..k).map(|_| Permutation::random(n, rng)).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.perms.len()
    }

    pub fn degree(&self) -> usize {
        self.perms[0].degree()
    }

    pub fn get(&self, i: usize) -> &Permutation {
        &self.perms[i]
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn into_perms(self) -> Vec<Permutation> {
        self.perms
    }

    pub(crate) fn set(&mut self, i: usize, p: Permutation) {
        debug_assert_eq!(p.degree(), self.degree());
        self.perms[i] = p;
    }

    /// Relabels the base set by `π` in every coordinate.
    pub fn conjugate_by(&self, pi: &Permutation) -> Result<PermTuple> {
        Ok(PermTuple {
            perms: self
                .perms
                .iter()
                .map(|p| p.conjugate_by(pi))
                .collect::<Result<_>>()?,
        })
    }

    /// One permutation per non-empty line; `#` starts a comment.
    pub fn parse_text(text: &str, degree: Option<usize>) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .collect();
        Self::parse_lines(&lines, degree)
    }

    /// Parses each entry as one permutation. Cycle-notation entries default
    /// to the degree of any image-list entry, else the largest point seen.
    pub fn parse_lines(entries: &[&str], degree: Option<usize>) -> Result<Self> {
        let degree = degree.or_else(|| infer_degree(entries));
        let perms = entries
            .iter()
            .map(|e| Permutation::parse(e, degree))
            .collect::<Result<Vec<_>>>()?;
        Self::new(perms)
    }

    /// JSON array of 1-based image lists, e.g. `[[2,3,1],[2,1,3]]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<Vec<usize>> =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("tuple JSON: {e}")))?;
        Self::new(
            raw.iter()
                .map(|p| Permutation::from_one_based(p))
                .collect::<Result<_>>()?,
        )
    }

    /// Accepts either the JSON form or the line-oriented text form.
    pub fn parse_any(text: &str, degree: Option<usize>) -> Result<Self> {
        let t = text.trim_start();
        if t.starts_with("[") {
            let tuple = Self::from_json(t)?;
            if let Some(n) = degree {
                if n != tuple.degree() {
                    return Err(Error::DegreeMismatch {
                        left: tuple.degree(),
                        right: n,
                    });
                }
            }
            Ok(tuple)
        } else {
            Self::parse_text(text, degree)
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(
            self.perms
                .iter()
                .map(|p| serde_json::Value::from(p.one_based()))
                .collect::<Vec<_>>(),
        )
    }

    pub fn to_text(&self) -> String {
        self.perms
            .iter()
            .map(|p| p.image_string() + "\n")
            .collect()
    }
}

fn infer_degree(entries: &[&str]) -> Option<usize> {
    let mut max_point = 0;
    for e in entries {
        let e = e.trim();
        if e == "id" || e.starts_with('(') {
            if let Ok(cycles) = parse_cycles(e) {
                max_point = max_point.max(cycles.iter().flatten().copied().max().unwrap_or(1));
            }
        } else {
            return Some(e.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).count());
        }
    }
    (max_point > 0).then_some(max_point)
}

impl fmt::Display for PermTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.perms.iter().map(|p| p.cycle_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `Σᵢ d(aᵢ, bᵢ)`, coordinatewise [`dist_cross`] so degrees may differ.
pub fn tuple_dist(a: &PermTuple, b: &PermTuple) -> Result<Rational> {
    if a.k() != b.k() {
        return Err(Error::ArityMismatch {
            expected: a.k(),
            got: b.k(),
        });
    }
    Ok(a.perms
        .iter()
        .zip(&b.perms)
        .map(|(p, q)| dist_cross(p, q))
        .sum())
}

/// One recorded oracle lookup (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Query {
    pub generator: usize,
    pub inverse: bool,
    pub point: usize,
    pub answer: usize,
}

/// Query access to a tuple under test. Every lookup of `σᵢx` or `σᵢ⁻¹x`
/// costs one unit.
#[derive(Debug)]
pub struct QueryOracle<'a> {
    tuple: &'a PermTuple,
    count: u64,
    transcript: Option<Vec<Query>>,
}

impl<'a> QueryOracle<'a> {
    pub fn new(tuple: &'a PermTuple) -> Self {
        QueryOracle {
            tuple,
            count: 0,
            transcript: None,
        }
    }

    pub fn with_transcript(tuple: &'a PermTuple) -> Self {
        QueryOracle {
            tuple,
            count: 0,
            transcript: Some(Vec::new()),
        }
    }

    pub fn tuple(&self) -> &'a PermTuple {
        self.tuple
    }

    pub fn degree(&self) -> usize {
        self.tuple.degree()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn reset(&mut self) {
        self.count = 0;
        if let Some(t) = &mut self.transcript {
            t.clear();
        }
    }

    pub fn transcript(&self) -> Option<&[Query]> {
        self.transcript.as_deref()
    }

    pub fn take_transcript(&mut self) -> Option<Vec<Query>> {
        self.transcript.as_mut().map(std::mem::take)
    }

    fn record(&mut self, generator: usize, inverse: bool, point: usize, answer: usize) -> usize {
        self.count += 1;
        if let Some(t) = &mut self.transcript {
            t.push(Query {
                generator,
                inverse,
                point,
                answer,
            });
        }
        answer
    }

    /// "What is σᵢx?"
    pub fn forward(&mut self, i: usize, x: usize) -> usize {
        let answer = self.tuple.perms[i].image(x);
        self.record(i, false, x, answer)
    }

    /// "What is σᵢ⁻¹x?"
    pub fn inverse(&mut self, i: usize, x: usize) -> usize {
        let answer = self.tuple.perms[i].preimage(x);
        self.record(i, true, x, answer)
    }
}

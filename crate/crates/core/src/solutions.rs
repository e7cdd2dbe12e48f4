//! Exact solution sets `Sol_E(n)`, defects, distances to solutions (plain and
//! flexible) and planted near-solution instances.
//!
//! Every exhaustive computation is guarded by an [`EnumerationBudget`] and
//! refuses with [`Error::Budget`] instead of silently sampling.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{tuple_dist, PermTuple, Permutation};
use crate::rng::rng_for;
use crate::system::EquationSystem;
use crate::word::Word;
use crate::{format_rational, parse_rational, Rational};

/// Ceiling on `(n!)^k`, the number of tuples an exhaustive pass visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationBudget {
    pub max_tuples: u128,
}

impl Default for EnumerationBudget {
    /// Admits `n ≤ 6` for pairs and `n ≤ 9` for single permutations.
    fn default() -> Self {
        EnumerationBudget {
            max_tuples: 1_000_000,
        }
    }
}

impl EnumerationBudget {
    pub fn tuples(k: usize, n: usize) -> u128 {
        (1..=n as u128)
            .try_fold(1u128, |acc, i| acc.checked_mul(i))
            .and_then(|f| f.checked_pow(k as u32))
            .unwrap_or(u128::MAX)
    }

    pub fn admits(&self, k: usize, n: usize) -> bool {
        Self::tuples(k, n) <= self.max_tuples
    }

    pub fn check(&self, k: usize, n: usize) -> Result<()> {
        let required = Self::tuples(k, n);
        if required > self.max_tuples {
            return Err(Error::budget(
                format!("enumerating Sym({n})^{k}"),
                required,
                self.max_tuples,
            ));
        }
        Ok(())
    }

    /// Largest degree this budget admits for `k` coordinates.
    pub fn max_degree(&self, k: usize) -> usize {
        let mut n = 1;
        while self.admits(k, n + 1) {
            n += 1;
        }
        n
    }
}

fn check_arity(system: &EquationSystem, sigma: &PermTuple) -> Result<()> {
    if system.rank() != sigma.k() {
        return Err(Error::ArityMismatch {
            expected: system.rank(),
            got: sigma.k(),
        });
    }
    Ok(())
}

fn fixes_everything(w: &Word, sigma: &PermTuple) -> bool {
    (0..sigma.degree()).all(|x| w.apply(sigma, x) == x)
}

pub fn is_solution(system: &EquationSystem, sigma: &PermTuple) -> Result<bool> {
    check_arity(system, sigma)?;
    Ok(system.relators().iter().all(|w| fixes_everything(w, sigma)))
}

/// `(1/|E|) Σ_{w∈E} d(w(σ̄), id)`.
pub fn defect(system: &EquationSystem, sigma: &PermTuple) -> Result<Rational> {
    check_arity(system, sigma)?;
    let n = sigma.degree() as i64;
    let moved: i64 = system
        .relators()
        .iter()
        .map(|w| (0..sigma.degree()).filter(|&x| w.apply(sigma, x) != x).count() as i64)
        .sum();
    Ok(Rational::new(moved, n * system.relators().len() as i64))
}

/// `Sym(n)` in lexicographic order of image lists.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![Permutation::from_images_unchecked(cur.clone())];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(Permutation::from_images_unchecked(cur.clone()));
    }
}

/// `Sol_E(n)`, in lexicographic order over `Sym(n)^k`.
pub fn enumerate_solutions(
    system: &EquationSystem,
    n: usize,
    budget: &EnumerationBudget,
) -> Result<Vec<PermTuple>> {
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be positive".into()));
    }
    let k = system.rank();
    budget.check(k, n)?;
    let sym = all_permutations(n);
    let m = sym.len();
    let total = m.pow(k as u32);
    // the first coordinate splits the work; collect keeps index order
    let chunks: Vec<Vec<PermTuple>> = (0..m)
        .into_par_iter()
        .map(|first| {
            let per = total / m;
            let mut found = Vec::new();
            let mut tuple = PermTuple::identity(k, n);
            for rest in 0..per {
                let mut idx = rest;
                let mut coords = vec![first; k];
                for c in (1..k).rev() {
                    coords[c] = idx % m;
                    idx /= m;
                }
                for (c, &i) in coords.iter().enumerate() {
                    tuple.set(c, sym[i].clone());
                }
                if system.relators().iter().all(|w| fixes_everything(w, &tuple)) {
                    found.push(tuple.clone());
                }
            }
            found
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Memoized `Sol_E(N)` for one system, across degrees.
#[derive(Debug, Clone)]
pub struct SolutionCache {
    system: EquationSystem,
    budget: EnumerationBudget,
    by_degree: BTreeMap<usize, Arc<Vec<PermTuple>>>,
}

impl SolutionCache {
    pub fn new(system: EquationSystem, budget: EnumerationBudget) -> Self {
        SolutionCache {
            system,
            budget,
            by_degree: BTreeMap::new(),
        }
    }

    pub fn system(&self) -> &EquationSystem {
        &self.system
    }

    pub fn budget(&self) -> &EnumerationBudget {
        &self.budget
    }

    pub fn get(&mut self, n: usize) -> Result<Arc<Vec<PermTuple>>> {
        if let Some(s) = self.by_degree.get(&n) {
            return Ok(Arc::clone(s));
        }
        let sols = Arc::new(enumerate_solutions(&self.system, n, &self.budget)?);
        self.by_degree.insert(n, Arc::clone(&sols));
        Ok(sols)
    }

    /// Supplies `Sol_E(n)` from elsewhere (e.g. a user list). Entries must
    /// all be solutions of degree `n`.
    pub fn insert(&mut self, n: usize, solutions: Vec<PermTuple>) -> Result<()> {
        for s in &solutions {
            if s.degree() != n || !is_solution(&self.system, s)? {
                return Err(Error::InvalidArgument(format!(
                    "{s} is not a degree-{n} solution"
                )));
            }
        }
        self.by_degree.insert(n, Arc::new(solutions));
        Ok(())
    }
}

/// The window function `ν(ε, n)` of the flexible model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", content = "c", rename_all = "snake_case")]
pub enum FlexBudget {
    Zero,
    /// `⌊c·ε·n⌋`
    LinearInEpsN(#[serde(serialize_with = "ser_rational")] Rational),
    /// `⌊c·n⌋`
    LinearInN(#[serde(serialize_with = "ser_rational")] Rational),
    Unbounded,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

impl FlexBudget {
    /// `zero`, `linear:c`, `n-linear:c` or `unbounded`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let coeff = |c: &str| -> Result<Rational> {
            let c = parse_rational(c)?;
            if c < Rational::zero() {
                return Err(Error::Parse(format!("negative flex coefficient in {t:?}")));
            }
            Ok(c)
        };
        match t.split_once(':') {
            None if t == "zero" => Ok(FlexBudget::Zero),
            None if t == "unbounded" => Ok(FlexBudget::Unbounded),
            Some(("linear", c)) => Ok(FlexBudget::LinearInEpsN(coeff(c)?)),
            Some(("n-linear", c)) => Ok(FlexBudget::LinearInN(coeff(c)?)),
            _ => Err(Error::Parse(format!("unknown flex rule {t:?}"))),
        }
    }

    /// `ν(ε, n)`; `None` means unbounded.
    pub fn window(&self, eps: Rational, n: usize) -> Option<usize> {
        let n = Rational::from_integer(n as i64);
        match *self {
            FlexBudget::Zero => Some(0),
            FlexBudget::LinearInEpsN(c) => Some((c * eps * n).floor().to_usize().unwrap_or(0)),
            FlexBudget::LinearInN(c) => Some((c * n).floor().to_usize().unwrap_or(0)),
            FlexBudget::Unbounded => None,
        }
    }
}

impl std::fmt::Display for FlexBudget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FlexBudget::Zero => write!(f, "zero"),
            FlexBudget::LinearInEpsN(c) => write!(f, "linear:{}", format_rational(c)),
            FlexBudget::LinearInN(c) => write!(f, "n-linear:{}", format_rational(c)),
            FlexBudget::Unbounded => write!(f, "unbounded"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionDistance {
    pub value: Rational,
    /// A minimizing solution (first in enumeration order, smallest degree).
    pub witness: PermTuple,
    /// Degrees `N` searched, inclusive.
    pub degrees: (usize, usize),
    /// False when an unbounded window was cut off at the enumeration budget;
    /// `value` is then an upper bound on the true infimum.
    pub exhaustive: bool,
}

impl SolutionDistance {
    /// Membership in `Sol^{<ε}` (or its flexible variant).
    pub fn is_below(&self, eps: Rational) -> bool {
        self.value < eps
    }
}

/// `min { Σᵢ d(σᵢ, τᵢ) : τ̄ ∈ Sol_E(N), n ≤ N ≤ n + ν(ε, n) }`.
pub fn dist_to_solutions(
    cache: &mut SolutionCache,
    sigma: &PermTuple,
    flex: FlexBudget,
    eps: Rational,
) -> Result<SolutionDistance> {
    check_arity(cache.system(), sigma)?;
    let n = sigma.degree();
    let k = sigma.k();
    let (top, exhaustive) = match flex.window(eps, n) {
        Some(w) => {
            let top = n + w;
            cache.budget().check(k, top)?;
            (top, true)
        }
        None => {
            let top = cache.budget().max_degree(k);
            cache.budget().check(k, n)?;
            (top.max(n), false)
        }
    };
    let mut best: Option<(Rational, PermTuple)> = None;
    for degree in n..=top {
        let sols = cache.get(degree)?;
        let found = sols
            .par_iter()
            .enumerate()
            .map(|(i, tau)| (tuple_dist(sigma, tau).expect("same arity"), i))
            .min();
        if let Some((d, i)) = found {
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, sols[i].clone()));
            }
        }
    }
    // the identity tuple always solves E, so every degree contributes
    let (value, witness) = best.expect("Sol_E(N) is never empty");
    Ok(SolutionDistance {
        value,
        witness,
        degrees: (n, top),
        exhaustive,
    })
}

/// A transposition edit `σ_coord ← σ_coord ∘ (a b)` (0-based points).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edit {
    pub coord: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantSource {
    /// Uniform over an exhaustive `Sol_E(n)`.
    Enumerated,
    /// Two powers of one random n-cycle (commutator only).
    CyclePowers,
}

#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub tuple: PermTuple,
    pub base: PermTuple,
    pub source: PlantSource,
    pub edits: Vec<Edit>,
}

impl PlantedInstance {
    /// Ground-truth upper bound on `d(σᵢ, baseᵢ)`: each edit moves at most
    /// two images of its coordinate.
    pub fn coordinate_bounds(&self) -> Vec<Rational> {
        let n = self.tuple.degree() as i64;
        (0..self.tuple.k())
            .map(|c| {
                let edits = self.edits.iter().filter(|e| e.coord == c).count() as i64;
                Rational::new((2 * edits).min(n), n)
            })
            .collect()
    }

    /// Upper bound on the distance to `Sol_E(n)`.
    pub fn distance_bound(&self) -> Rational {
        self.coordinate_bounds().into_iter().sum()
    }
}

fn is_commutator(system: &EquationSystem) -> bool {
    system.relators() == EquationSystem::commutator().relators()
}

/// A uniformly random solution followed by `corruption` random
/// transposition edits on random coordinates.
pub fn plant_near_solution<R: Rng + ?Sized>(
    cache: &mut SolutionCache,
    n: usize,
    corruption: usize,
    rng: &mut R,
) -> Result<PlantedInstance> {
    let k = cache.system().rank();
    if corruption > k * n {
        return Err(Error::InvalidArgument(format!(
            "corruption {corruption} exceeds k·n = {}",
            k * n
        )));
    }
    if corruption > 0 && n < 2 {
        return Err(Error::InvalidArgument(
            "transposition edits need at least two points".into(),
        ));
    }
    let (base, source) = if cache.budget().admits(k, n) {
        let sols = cache.get(n)?;
        (sols[rng.gen_range(0..sols.len())].clone(), PlantSource::Enumerated)
    } else if is_commutator(cache.system()) {
        let c = Permutation::cycle(n).conjugate_by(&Permutation::random(n, rng))?;
        let a = c.pow(rng.gen_range(0..n as i64));
        let b = c.pow(rng.gen_range(0..n as i64));
        (PermTuple::new(vec![a, b])?, PlantSource::CyclePowers)
    } else {
        cache.budget().check(k, n)?;
        unreachable!("budget check fails above");
    };
    let mut tuple = base.clone();
    let mut edits = Vec::with_capacity(corruption);
    for _ in 0..corruption {
        let coord = rng.gen_range(0..k);
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let edited = tuple.get(coord).compose(&Permutation::transposition(n, a, b))?;
        tuple.set(coord, edited);
        edits.push(Edit { coord, a, b });
    }
    Ok(PlantedInstance {
        tuple,
        base,
        source,
        edits,
    })
}

/// [`plant_near_solution`] driven by a seed.
pub fn plant_seeded(
    cache: &mut SolutionCache,
    n: usize,
    corruption: usize,
    seed: u64,
) -> Result<PlantedInstance> {
    plant_near_solution(cache, n, corruption, &mut rng_for(seed, &[n as u64, corruption as u64]))
}

/// A uniformly random tuple whose exact distance to `Sol_E(n)` is at least
/// `eps`; gives up after `attempts` draws.
pub fn random_far_instance<R: Rng + ?Sized>(
    cache: &mut SolutionCache,
    n: usize,
    eps: Rational,
    attempts: usize,
    rng: &mut R,
) -> Result<(PermTuple, SolutionDistance)> {
    let k = cache.system().rank();
    for _ in 0..attempts {
        let t = PermTuple::random(k, n, rng);
        let d = dist_to_solutions(cache, &t, FlexBudget::Zero, eps)?;
        if !d.is_below(eps) {
            return Ok((t, d));
        }
    }
    Err(Error::InvalidArgument(format!(
        "no tuple at distance >= {} found in {attempts} draws at n = {n}",
        format_rational(&eps)
    )))
}

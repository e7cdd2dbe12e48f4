//! Stabilizer traces `stab_σ̄(x) ∩ P` and their distributions over points.
//!
//! A trace is a bitmask over the probe set in shortlex order. Distributions
//! are stored sparsely: only traces that occur carry weight, and weights are
//! exact rationals summing to one.

use std::collections::BTreeMap;
use std::io::Write;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ball, build_graph, BallCode};
use crate::perm::{PermTuple, QueryOracle};
use crate::word::{enumerate_reduced_words, Alphabet, Word};
use crate::{format_rational, parse_rational, rational_to_f64, Rational};

/// A finite set of probe words, deduplicated and kept in shortlex order so
/// that bit `i` of a [`Trace`] always means the `i`-th word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProbeSet {
    rank: usize,
    words: Vec<Word>,
}

impl ProbeSet {
    pub fn new(rank: usize, mut words: Vec<Word>) -> Result<Self> {
        if let Some(bad) = words.iter().find(|w| w.rank() != rank) {
            return Err(Error::AlphabetMismatch {
                left: bad.rank(),
                right: rank,
            });
        }
        words.sort();
        words.dedup();
        Ok(ProbeSet { rank, words })
    }

    /// All reduced words of length at most `radius`.
    pub fn ball(rank: usize, radius: usize) -> Self {
        ProbeSet {
            rank,
            words: enumerate_reduced_words(rank, radius),
        }
    }

    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Self> {
        Self::new(alphabet.rank(), alphabet.parse_word_list(text)?)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.words.binary_search(w).ok()
    }

    /// `Σ_{w∈P} |w|`, the query cost of one trace.
    pub fn total_length(&self) -> u64 {
        self.words.iter().map(|w| w.len() as u64).sum()
    }

    pub fn is_subset_of(&self, other: &ProbeSet) -> bool {
        self.rank == other.rank && self.words.iter().all(|w| other.index_of(w).is_some())
    }
}

/// A subset of a probe set, as a bitmask over probe indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    blocks: Vec<u64>,
}

impl Trace {
    pub fn empty(probe_len: usize) -> Self {
        Trace {
            blocks: vec![0; probe_len.div_ceil(64)],
        }
    }

    pub fn full(probe_len: usize) -> Self {
        let mut t = Self::empty(probe_len);
        for i in 0..probe_len {
            t.insert(i);
        }
        t
    }

    pub fn insert(&mut self, i: usize) {
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.blocks.get(i / 64).is_some_and(|b| b >> (i % 64) & 1 == 1)
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &b)| {
            (0..64).filter(move |j| b >> j & 1 == 1).map(move |j| bi * 64 + j)
        })
    }

    pub fn words<'p>(&'p self, probe: &'p ProbeSet) -> impl Iterator<Item = &'p Word> + 'p {
        self.indices().map(move |i| &probe.words[i])
    }
}

/// `{ w ∈ P : w(σ̄)x = x }`, paying `Σ|w|` queries on `oracle`.
pub fn stab_trace_counted(oracle: &mut QueryOracle<'_>, x: usize, probe: &ProbeSet) -> Result<Trace> {
    let mut trace = Trace::empty(probe.len());
    for (i, w) in probe.words.iter().enumerate() {
        if w.evaluate_point_counted(oracle, x)? == x {
            trace.insert(i);
        }
    }
    Ok(trace)
}

pub fn stab_trace(sigma: &PermTuple, x: usize, probe: &ProbeSet) -> Result<Trace> {
    stab_trace_counted(&mut QueryOracle::new(sigma), x, probe)
}

/// A probability distribution over subsets of a probe set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalStats {
    probe: ProbeSet,
    weights: BTreeMap<Trace, Rational>,
}

impl LocalStats {
    fn from_counts(probe: ProbeSet, counts: BTreeMap<Trace, i64>, total: i64) -> Self {
        let weights = counts
            .into_iter()
            .map(|(t, c)| (t, Rational::new(c, total)))
            .collect();
        LocalStats { probe, weights }
    }

    /// Builds a distribution from explicit atoms; weights must be positive
    /// and sum to one.
    pub fn from_atoms(probe: ProbeSet, atoms: impl IntoIterator<Item = (Trace, Rational)>) -> Result<Self> {
        let mut weights: BTreeMap<Trace, Rational> = BTreeMap::new();
        for (t, w) in atoms {
            if !w.is_positive() {
                return Err(Error::InvalidArgument("atom weights must be positive".into()));
            }
            if t.indices().any(|i| i >= probe.len()) {
                return Err(Error::InvalidArgument("trace outside the probe set".into()));
            }
            *weights.entry(t).or_insert_with(Rational::zero) += w;
        }
        let total: Rational = weights.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {}, not 1",
                format_rational(&total)
            )));
        }
        Ok(LocalStats { probe, weights })
    }

    pub fn point_mass(probe: ProbeSet, trace: Trace) -> Self {
        LocalStats {
            probe,
            weights: BTreeMap::from([(trace, Rational::one())]),
        }
    }

    pub fn probe(&self) -> &ProbeSet {
        &self.probe
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Trace, &Rational)> {
        self.weights.iter()
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, t: &Trace) -> Rational {
        self.weights.get(t).copied().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.weights.values().sum()
    }

    /// Pushforward under `trace ↦ trace ∩ P'`.
    pub fn restrict(&self, sub: &ProbeSet) -> Result<LocalStats> {
        if !sub.is_subset_of(&self.probe) {
            return Err(Error::NotSubset("restriction target has words outside the probe set".into()));
        }
        let map: Vec<usize> = sub
            .words
            .iter()
            .map(|w| self.probe.index_of(w).expect("checked subset"))
            .collect();
        let mut weights: BTreeMap<Trace, Rational> = BTreeMap::new();
        for (t, w) in &self.weights {
            let mut r = Trace::empty(sub.len());
            for (j, &i) in map.iter().enumerate() {
                if t.contains(i) {
                    r.insert(j);
                }
            }
            *weights.entry(r).or_insert_with(Rational::zero) += *w;
        }
        Ok(LocalStats {
            probe: sub.clone(),
            weights,
        })
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> serde_json::Value {
        let doc = StatsJson {
            probe: self.probe.words.iter().map(|w| alphabet.render(w)).collect(),
            atoms: self
                .weights
                .iter()
                .map(|(t, w)| AtomJson {
                    subset: t.words(&self.probe).map(|w| alphabet.render(w)).collect(),
                    weight: format_rational(w),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("plain data")
    }

    pub fn from_json(alphabet: &Alphabet, value: &serde_json::Value) -> Result<Self> {
        let doc: StatsJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::Parse(format!("local stats JSON: {e}")))?;
        let words = doc
            .probe
            .iter()
            .map(|w| alphabet.parse_word(w))
            .collect::<Result<Vec<_>>>()?;
        let probe = ProbeSet::new(alphabet.rank(), words)?;
        let atoms = doc
            .atoms
            .iter()
            .map(|a| {
                let mut t = Trace::empty(probe.len());
                for w in &a.subset {
                    let w = alphabet.parse_word(w)?;
                    let i = probe
                        .index_of(&w)
                        .ok_or_else(|| Error::NotSubset(alphabet.render(&w)))?;
                    t.insert(i);
                }
                Ok((t, parse_rational(&a.weight)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(probe, atoms)
    }

    /// Columns: `subset,size,weight,weight_f64`. Subsets are space-separated
    /// words; the identity word prints as `1`.
    pub fn write_csv<W: Write>(&self, alphabet: &Alphabet, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(["subset", "size", "weight", "weight_f64"]).map_err(io)?;
        for (t, weight) in &self.weights {
            let subset: Vec<String> = t.words(&self.probe).map(|w| alphabet.render(w)).collect();
            w.write_record([
                subset.join(" "),
                t.count().to_string(),
                format_rational(weight),
                format!("{:.6}", rational_to_f64(weight)),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct StatsJson {
    probe: Vec<String>,
    atoms: Vec<AtomJson>,
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    subset: Vec<String>,
    weight: String,
}

/// `N_{σ̄,P}`: the trace distribution of a uniform point.
pub fn exact_local_stats(sigma: &PermTuple, probe: &ProbeSet) -> Result<LocalStats> {
    let mut oracle = QueryOracle::new(sigma);
    let mut counts: BTreeMap<Trace, i64> = BTreeMap::new();
    for x in 0..sigma.degree() {
        *counts.entry(stab_trace_counted(&mut oracle, x, probe)?).or_default() += 1;
    }
    Ok(LocalStats::from_counts(probe.clone(), counts, sigma.degree() as i64))
}

/// `N^Emp_{σ̄,P}` from `samples` uniform i.i.d. points, queried through `oracle`.
pub fn empirical_local_stats<R: Rng + ?Sized>(
    oracle: &mut QueryOracle<'_>,
    probe: &ProbeSet,
    samples: usize,
    rng: &mut R,
) -> Result<LocalStats> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let n = oracle.degree();
    let mut counts: BTreeMap<Trace, i64> = BTreeMap::new();
    for _ in 0..samples {
        let x = rng.gen_range(0..n);
        *counts.entry(stab_trace_counted(oracle, x, probe)?).or_default() += 1;
    }
    Ok(LocalStats::from_counts(probe.clone(), counts, samples as i64))
}

/// `½ Σ |a(t) − b(t)|` over the union of supports.
pub fn tv_distance(a: &LocalStats, b: &LocalStats) -> Result<Rational> {
    if a.probe != b.probe {
        return Err(Error::ProbeMismatch);
    }
    let mut sum = Rational::zero();
    for (t, w) in &a.weights {
        sum += (*w - b.weight(t)).abs();
    }
    for (t, w) in &b.weights {
        if !a.weights.contains_key(t) {
            sum += *w;
        }
    }
    Ok(sum / 2)
}

/// Multiset of radius-`r` ball codes over all roots.
pub fn ball_stats(sigma: &PermTuple, radius: usize) -> BTreeMap<BallCode, usize> {
    let g = build_graph(sigma);
    let mut out = BTreeMap::new();
    for x in 0..sigma.degree() {
        *out.entry(ball(&g, x, radius)).or_insert(0) += 1;
    }
    out
}

/// Groups points by a key, returning blocks sorted by their smallest point.
fn partition_by<K: Ord>(keys: Vec<K>) -> Vec<Vec<usize>> {
    let mut blocks: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (x, k) in keys.into_iter().enumerate() {
        blocks.entry(k).or_default().push(x);
    }
    let mut out: Vec<Vec<usize>> = blocks.into_values().collect();
    out.sort();
    out
}

/// Partition of `[n]` by radius-`r` ball isomorphism class.
pub fn ball_partition(sigma: &PermTuple, radius: usize) -> Vec<Vec<usize>> {
    let g = build_graph(sigma);
    partition_by((0..sigma.degree()).map(|x| ball(&g, x, radius)).collect())
}

/// Partition of `[n]` by stabilizer trace on words of length at most `2r`.
pub fn trace_partition(sigma: &PermTuple, radius: usize) -> Result<Vec<Vec<usize>>> {
    let probe = ProbeSet::ball(sigma.k(), 2 * radius);
    let traces = (0..sigma.degree())
        .map(|x| stab_trace(sigma, x, &probe))
        .collect::<Result<Vec<_>>>()?;
    Ok(partition_by(traces))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(lines: &[&str], n: usize) -> PermTuple {
        PermTuple::parse_lines(lines, Some(n)).unwrap()
    }

    fn probe(alphabet: &str, words: &str) -> ProbeSet {
        ProbeSet::parse(&Alphabet::new(alphabet).unwrap(), words).unwrap()
    }

    fn trace_of(p: &ProbeSet, words: &[&str], alphabet: &str) -> Trace {
        let a = Alphabet::new(alphabet).unwrap();
        let mut t = Trace::empty(p.len());
        for w in words {
            t.insert(p.index_of(&a.parse_word(w).unwrap()).unwrap());
        }
        t
    }

    #[test]
    fn traces_of_a_transposition() {
        let s = tuple(&["(1 2)"], 3);
        let p = probe("x", "x xx");
        assert_eq!(stab_trace(&s, 2, &p).unwrap(), trace_of(&p, &["x", "xx"], "x"));
        assert_eq!(stab_trace(&s, 0, &p).unwrap(), trace_of(&p, &["xx"], "x"));
        assert_eq!(stab_trace(&s, 1, &p).unwrap(), trace_of(&p, &["xx"], "x"));
        let empty = ProbeSet::new(1, vec![]).unwrap();
        assert_eq!(stab_trace(&s, 0, &empty).unwrap().count(), 0);
    }

    #[test]
    fn identity_is_point_mass_on_full_probe() {
        let p = ProbeSet::ball(2, 2);
        let st = exact_local_stats(&PermTuple::identity(2, 5), &p).unwrap();
        assert_eq!(st, LocalStats::point_mass(p.clone(), Trace::full(p.len())));
    }

    #[test]
    fn exact_stats_examples() {
        let p = probe("xy", "x y xy");
        let st = exact_local_stats(&tuple(&["(1 2)", "(1 2)"], 2), &p).unwrap();
        assert_eq!(st, LocalStats::point_mass(p.clone(), trace_of(&p, &["xy"], "xy")));

        let p = probe("x", "x");
        let st = exact_local_stats(&tuple(&["(1 2)"], 3), &p).unwrap();
        assert_eq!(st.weight(&Trace::empty(1)), Rational::new(2, 3));
        assert_eq!(st.weight(&Trace::full(1)), Rational::new(1, 3));
        assert_eq!(st.total(), Rational::one());
    }

    #[test]
    fn probe_sets_are_canonical() {
        let p = probe("xy", "xy x x 1 Y");
        let names: Vec<String> = p.words().iter().map(|w| w.to_string()).collect();
        assert_eq!(names, ["1", "x", "Y", "xy"]);
        assert_eq!(p.total_length(), 4);
    }

    #[test]
    fn tv_examples() {
        let p = probe("x", "x");
        let a = LocalStats::point_mass(p.clone(), Trace::empty(1));
        let b = LocalStats::point_mass(p.clone(), Trace::full(1));
        let half = LocalStats::from_atoms(
            p.clone(),
            [(Trace::empty(1), Rational::new(1, 2)), (Trace::full(1), Rational::new(1, 2))],
        )
        .unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), Rational::zero());
        assert_eq!(tv_distance(&a, &b).unwrap(), Rational::one());
        assert_eq!(tv_distance(&half, &a).unwrap(), Rational::new(1, 2));
        let other = LocalStats::point_mass(probe("x", "xx"), Trace::empty(1));
        assert_eq!(tv_distance(&a, &other), Err(Error::ProbeMismatch));
    }

    #[test]
    fn restriction_examples() {
        let p = ProbeSet::ball(1, 2);
        let st = exact_local_stats(&tuple(&["(1 2)"], 3), &p).unwrap();
        assert_eq!(st.restrict(&p).unwrap(), st);
        let none = ProbeSet::new(1, vec![]).unwrap();
        assert_eq!(
            st.restrict(&none).unwrap(),
            LocalStats::point_mass(none.clone(), Trace::empty(0))
        );
        assert!(matches!(
            st.restrict(&probe("x", "xxx")),
            Err(Error::NotSubset(_))
        ));
    }

    #[test]
    fn from_atoms_validates() {
        let p = probe("x", "x");
        assert!(LocalStats::from_atoms(p.clone(), [(Trace::empty(1), Rational::new(1, 2))]).is_err());
        assert!(LocalStats::from_atoms(p.clone(), [(Trace::empty(1), Rational::from_integer(0))]).is_err());
    }

    #[test]
    fn json_round_trip_and_csv() {
        let a = Alphabet::standard(2);
        let p = ProbeSet::ball(2, 2);
        let st = exact_local_stats(&tuple(&["(1 2 3)", "(1 2)"], 4), &p).unwrap();
        let json = st.to_json(&a);
        assert_eq!(LocalStats::from_json(&a, &json).unwrap(), st);
        assert!(json["atoms"][0]["weight"].as_str().unwrap().contains('/'));
        let mut buf = Vec::new();
        st.write_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("subset,size,weight,weight_f64\n"));
        assert_eq!(text.lines().count(), 1 + st.support_size());
    }

    #[test]
    fn ball_stats_match_traces_on_transposition() {
        let s = tuple(&["(1 2)"], 3);
        let balls = ball_stats(&s, 1);
        let mut mult: Vec<usize> = balls.values().copied().collect();
        mult.sort();
        assert_eq!(mult, [1, 2]);
        let st = exact_local_stats(&s, &ProbeSet::ball(1, 2)).unwrap();
        assert_eq!(st.support_size(), 2);
        assert_eq!(ball_partition(&s, 1), trace_partition(&s, 1).unwrap());
    }

    #[test]
    fn vertex_transitive_tuples_have_one_ball() {
        let s = PermTuple::new(vec![crate::Permutation::cycle(6)]).unwrap();
        assert_eq!(ball_stats(&s, 2).len(), 1);
        assert_eq!(ball_stats(&PermTuple::identity(2, 4), 3).len(), 1);
    }
}

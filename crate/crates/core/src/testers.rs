//! Query-counted randomized testers and an empirical harness for the
//! completeness / soundness contract of a separator.
//!
//! * Sample-and-substitute: draw `s` pairs `(w, x)` from `E × [n]` and accept
//!   iff every `w(σ̄)x = x`.
//! * Local-statistics matcher: draw `s` points, build the empirical trace
//!   distribution on a probe set `P`, and accept iff some solution `τ̄` of
//!   degree `n` has `d_TV(N^Emp_σ̄, N_τ̄) ≤ δ`.
//!
//! Every run is reproducible from `(config, seed)`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use num_traits::{One, Pow, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::perm::{PermTuple, Query, QueryOracle};
use crate::rng::{rng_for, TrialRng};
use crate::solutions::{
    defect, dist_to_solutions, is_solution, plant_near_solution, EnumerationBudget, FlexBudget,
    SolutionCache,
};
use crate::stats::{empirical_local_stats, exact_local_stats, tv_distance, LocalStats, ProbeSet};
use crate::system::EquationSystem;
use crate::{big, format_rational, BigRational, Rational};

/// Completeness and soundness target of a separator.
pub const DEFAULT_CONTRACT: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TesterVerdict {
    pub accepted: bool,
    pub queries_used: u64,
    pub query_bound: u64,
    /// LSM only: the minimum TV distance to the comparison set.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_rational")]
    pub min_tv: Option<Rational>,
    /// LSM only: true when the comparison set is not all of `Sol_E(n)`.
    pub approximate_comparison: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Vec<Query>>,
}

fn ser_opt_rational<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug)]
pub struct SasConfig {
    pub system: EquationSystem,
    pub repetition: usize,
}

impl SasConfig {
    pub fn new(system: EquationSystem, repetition: usize) -> Result<Self> {
        if repetition == 0 {
            return Err(Error::InvalidArgument("repetition must be at least 1".into()));
        }
        Ok(SasConfig { system, repetition })
    }

    /// `s · max_{w∈E} |w|`.
    pub fn query_bound(&self) -> u64 {
        self.repetition as u64 * self.system.max_relator_len() as u64
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

pub fn sas_run<R: Rng + ?Sized>(
    cfg: &SasConfig,
    oracle: &mut QueryOracle<'_>,
    rng: &mut R,
) -> Result<TesterVerdict> {
    check_arity(&cfg.system, oracle.tuple())?;
    let start = oracle.count();
    let n = oracle.degree();
    let relators = cfg.system.relators();
    let mut accepted = true;
    for _ in 0..cfg.repetition {
        let w = &relators[rng.gen_range(0..relators.len())];
        let x = rng.gen_range(0..n);
        if w.evaluate_point_counted(oracle, x)? != x {
            accepted = false;
        }
    }
    Ok(TesterVerdict {
        accepted,
        queries_used: oracle.count() - start,
        query_bound: cfg.query_bound(),
        min_tv: None,
        approximate_comparison: false,
        transcript: oracle.take_transcript(),
    })
}

/// Exact acceptance probability `(1 − defect)^s`: one check passes with
/// probability equal to the fraction of `E × [n]` that is fixed.
pub fn sas_accept_probability(cfg: &SasConfig, sigma: &PermTuple) -> Result<BigRational> {
    let pass = BigRational::one() - big(defect(&cfg.system, sigma)?);
    Ok(Pow::pow(pass, cfg.repetition as u32))
}

pub fn sas_reject_probability(cfg: &SasConfig, sigma: &PermTuple) -> Result<BigRational> {
    Ok(BigRational::one() - sas_accept_probability(cfg, sigma)?)
}

/// Smallest `s` with `(1 − d)^s ≤ 1 − target`, via `s = ⌈ln(1/(1−target))/d⌉`.
pub fn amplified_repetition(defect: Rational, target: f64) -> Result<usize> {
    if defect <= Rational::zero() {
        return Err(Error::InvalidArgument(
            "amplification needs a positive defect".into(),
        ));
    }
    if !(0.0..1.0).contains(&target) {
        return Err(Error::InvalidArgument("target must lie in [0, 1)".into()));
    }
    let d = crate::rational_to_f64(&defect);
    Ok(((1.0 / (1.0 - target)).ln() / d).ceil().max(1.0) as usize)
}

/// Where the LSM comparison set `Sol_E(n)` comes from.
#[derive(Clone, Debug)]
pub enum SolutionSource {
    /// All of `Sol_E(n)`, within the budget. The only exact option.
    Exhaustive(EnumerationBudget),
    /// A caller-supplied list of solutions.
    Provided(Vec<PermTuple>),
    /// `count` random members of a constructive family (commutator: powers of
    /// a common n-cycle), drawn from `seed`.
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct LsmConfig {
    pub system: EquationSystem,
    pub repetition: usize,
    pub probe: ProbeSet,
    pub delta: Rational,
    pub source: SolutionSource,
}

impl LsmConfig {
    pub fn new(
        system: EquationSystem,
        repetition: usize,
        probe: ProbeSet,
        delta: Rational,
        source: SolutionSource,
    ) -> Result<Self> {
        if repetition == 0 {
            return Err(Error::InvalidArgument("repetition must be at least 1".into()));
        }
        if probe.is_empty() {
            return Err(Error::InvalidArgument("probe set must be nonempty".into()));
        }
        if delta <= Rational::zero() {
            return Err(Error::InvalidArgument("delta must be positive".into()));
        }
        if probe.rank() != system.rank() {
            return Err(Error::AlphabetMismatch {
                left: probe.rank(),
                right: system.rank(),
            });
        }
        Ok(LsmConfig {
            system,
            repetition,
            probe,
            delta,
            source,
        })
    }

    /// `s · Σ_{w∈P} |w|`.
    pub fn query_bound(&self) -> u64 {
        self.repetition as u64 * self.probe.total_length()
    }
}

/// The distinct `N_{τ̄,P}` over a comparison set of degree-`n` solutions.
#[derive(Clone, Debug)]
pub struct LsmComparison {
    pub degree: usize,
    pub stats: Vec<LocalStats>,
    pub solutions: usize,
    pub approximate: bool,
}

impl LsmComparison {
    pub fn build(cfg: &LsmConfig, n: usize) -> Result<Self> {
        let (solutions, approximate): (Arc<Vec<PermTuple>>, bool) = match &cfg.source {
            SolutionSource::Exhaustive(budget) => {
                let mut cache = SolutionCache::new(cfg.system.clone(), *budget);
                match cache.get(n) {
                    Ok(s) => (s, false),
                    Err(e) if e.is_budget() => return Err(Error::NoComparisonSolutions(n)),
                    Err(e) => return Err(e),
                }
            }
            SolutionSource::Provided(list) => {
                let mut keep = Vec::new();
                for t in list.iter().filter(|t| t.degree() == n) {
                    if !is_solution(&cfg.system, t)? {
                        return Err(Error::InvalidArgument(format!("{t} is not a solution")));
                    }
                    keep.push(t.clone());
                }
                (Arc::new(keep), true)
            }
            SolutionSource::Sampled { count, seed } => {
                // a zero budget forces the constructive family
                let mut cache = SolutionCache::new(cfg.system.clone(), EnumerationBudget { max_tuples: 0 });
                let mut rng = rng_for(*seed, &[n as u64]);
                let mut out = Vec::with_capacity(*count);
                for _ in 0..*count {
                    match plant_near_solution(&mut cache, n, 0, &mut rng) {
                        Ok(p) => out.push(p.tuple),
                        Err(e) if e.is_budget() => return Err(Error::NoComparisonSolutions(n)),
                        Err(e) => return Err(e),
                    }
                }
                (Arc::new(out), true)
            }
        };
        if solutions.is_empty() {
            return Err(Error::NoComparisonSolutions(n));
        }
        let distinct: BTreeSet<LocalStats> = solutions
            .par_iter()
            .map(|t| exact_local_stats(t, &cfg.probe))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect();
        Ok(LsmComparison {
            degree: n,
            stats: distinct.into_iter().collect(),
            solutions: solutions.len(),
            approximate,
        })
    }

    /// `min_τ d_TV(stats, N_τ̄)`.
    pub fn min_tv(&self, stats: &LocalStats) -> Result<Rational> {
        let mut best = Rational::one();
        for s in &self.stats {
            best = best.min(tv_distance(stats, s)?);
            if best.is_zero() {
                break;
            }
        }
        Ok(best)
    }
}

pub fn lsm_run<R: Rng + ?Sized>(
    cfg: &LsmConfig,
    comparison: &LsmComparison,
    oracle: &mut QueryOracle<'_>,
    rng: &mut R,
) -> Result<TesterVerdict> {
    check_arity(&cfg.system, oracle.tuple())?;
    if comparison.degree != oracle.degree() {
        return Err(Error::DegreeMismatch {
            left: comparison.degree,
            right: oracle.degree(),
        });
    }
    let start = oracle.count();
    let empirical = empirical_local_stats(oracle, &cfg.probe, cfg.repetition, rng)?;
    let min_tv = comparison.min_tv(&empirical)?;
    Ok(TesterVerdict {
        accepted: min_tv <= cfg.delta,
        queries_used: oracle.count() - start,
        query_bound: cfg.query_bound(),
        min_tv: Some(min_tv),
        approximate_comparison: comparison.approximate,
        transcript: oracle.take_transcript(),
    })
}

/// A randomized query-bounded tester usable by [`validate_separator`].
pub trait Tester: Sync {
    fn name(&self) -> &'static str;
    fn system(&self) -> &EquationSystem;
    fn query_bound(&self) -> u64;
    fn run(&self, sigma: &PermTuple, rng: &mut TrialRng) -> Result<TesterVerdict>;
}

pub struct SasTester(pub SasConfig);

impl Tester for SasTester {
    fn name(&self) -> &'static str {
        "sas"
    }

    fn system(&self) -> &EquationSystem {
        &self.0.system
    }

    fn query_bound(&self) -> u64 {
        self.0.query_bound()
    }

    fn run(&self, sigma: &PermTuple, rng: &mut TrialRng) -> Result<TesterVerdict> {
        sas_run(&self.0, &mut QueryOracle::new(sigma), rng)
    }
}

/// LSM with comparison sets built once per degree and shared across runs.
pub struct LsmTester {
    cfg: LsmConfig,
    comparisons: RwLock<BTreeMap<usize, Arc<LsmComparison>>>,
}

impl LsmTester {
    pub fn new(cfg: LsmConfig) -> Self {
        LsmTester {
            cfg,
            comparisons: RwLock::new(BTreeMap::new()),
        }
    }

    /// Seeds the cache with a prebuilt comparison set.
    pub fn with_comparison(cfg: LsmConfig, comparison: Arc<LsmComparison>) -> Self {
        let t = Self::new(cfg);
        t.comparisons
            .write()
            .expect("lock")
            .insert(comparison.degree, comparison);
        t
    }

    pub fn config(&self) -> &LsmConfig {
        &self.cfg
    }

    pub fn comparison(&self, n: usize) -> Result<Arc<LsmComparison>> {
        if let Some(c) = self.comparisons.read().expect("lock").get(&n) {
            return Ok(Arc::clone(c));
        }
        let built = Arc::new(LsmComparison::build(&self.cfg, n)?);
        self.comparisons
            .write()
            .expect("lock")
            .insert(n, Arc::clone(&built));
        Ok(built)
    }
}

impl Tester for LsmTester {
    fn name(&self) -> &'static str {
        "lsm"
    }

    fn system(&self) -> &EquationSystem {
        &self.cfg.system
    }

    fn query_bound(&self) -> u64 {
        self.cfg.query_bound()
    }

    fn run(&self, sigma: &PermTuple, rng: &mut TrialRng) -> Result<TesterVerdict> {
        let comparison = self.comparison(sigma.degree())?;
        lsm_run(&self.cfg, &comparison, &mut QueryOracle::new(sigma), rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplifyRule {
    /// Accept iff every round accepts (keeps perfect completeness).
    AllAccept,
    /// Accept iff a strict majority of rounds accepts.
    Majority,
}

/// Repeats an inner tester with independent randomness.
pub struct Amplified<T> {
    pub inner: T,
    pub rounds: usize,
    pub rule: AmplifyRule,
}

impl<T: Tester> Tester for Amplified<T> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn system(&self) -> &EquationSystem {
        self.inner.system()
    }

    fn query_bound(&self) -> u64 {
        self.rounds as u64 * self.inner.query_bound()
    }

    fn run(&self, sigma: &PermTuple, rng: &mut TrialRng) -> Result<TesterVerdict> {
        let mut accepts = 0;
        let mut queries = 0;
        let mut approximate = false;
        for _ in 0..self.rounds {
            let v = self.inner.run(sigma, rng)?;
            accepts += v.accepted as usize;
            queries += v.queries_used;
            approximate |= v.approximate_comparison;
        }
        let accepted = match self.rule {
            AmplifyRule::AllAccept => accepts == self.rounds,
            AmplifyRule::Majority => 2 * accepts > self.rounds,
        };
        Ok(TesterVerdict {
            accepted,
            queries_used: queries,
            query_bound: self.query_bound(),
            min_tv: None,
            approximate_comparison: approximate,
            transcript: None,
        })
    }
}

/// Wilson score interval for `successes / trials`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let t = trials as f64;
    let p = successes as f64 / t;
    let denom = 1.0 + z * z / t;
    let center = (p + z * z / (2.0 * t)) / denom;
    let half = z * (p * (1.0 - p) / t + z * z / (4.0 * t * t)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug)]
pub struct ValidationConfig {
    pub trials: usize,
    pub seed: u64,
    /// Negatives must have exact distance at least `eps` to `Sol_E(n)`.
    pub eps: Rational,
    pub budget: EnumerationBudget,
    pub confidence: f64,
    /// Required acceptance (positives) and rejection (negatives) probability.
    pub contract: f64,
}

impl ValidationConfig {
    pub fn new(trials: usize, seed: u64, eps: Rational) -> Self {
        ValidationConfig {
            trials,
            seed,
            eps,
            budget: EnumerationBudget::default(),
            confidence: 0.95,
            contract: DEFAULT_CONTRACT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Positive,
    Negative,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceReport {
    pub role: Role,
    pub index: usize,
    pub degree: usize,
    pub accepts: u64,
    pub trials: u64,
    pub accept_rate: f64,
    /// Wilson interval for the probability of the correct verdict.
    pub correct_interval: (f64, f64),
    pub max_queries: u64,
    pub mean_queries: f64,
    #[serde(serialize_with = "ser_rational")]
    pub exact_defect: Rational,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_rational")]
    pub exact_dist_to_sol: Option<Rational>,
    /// The correct-verdict probability is below the contract with confidence.
    pub flagged: bool,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparatorReport {
    pub tester: &'static str,
    pub system: String,
    pub seed: u64,
    pub trials_per_instance: usize,
    pub confidence: f64,
    pub contract: f64,
    pub completeness_rate: Option<f64>,
    pub soundness_rate: Option<f64>,
    pub max_queries: u64,
    pub query_bound: u64,
    pub query_violations: u64,
    pub approximate_comparison: bool,
    pub instances: Vec<InstanceReport>,
}

impl SeparatorReport {
    pub fn contract_violated(&self) -> bool {
        self.query_violations > 0 || self.instances.iter().any(|i| i.flagged)
    }
}

/// Runs `trials` seeded trials per instance and checks completeness on the
/// positives and soundness on the negatives.
pub fn validate_separator<T: Tester + ?Sized>(
    tester: &T,
    positives: &[PermTuple],
    negatives: &[PermTuple],
    cfg: &ValidationConfig,
) -> Result<SeparatorReport> {
    let system = tester.system();
    let mut cache = SolutionCache::new(system.clone(), cfg.budget);
    let mut dists = Vec::with_capacity(negatives.len());
    for (i, p) in positives.iter().enumerate() {
        if !is_solution(system, p)? {
            return Err(Error::InvalidArgument(format!(
                "positive instance {i} is not a solution"
            )));
        }
    }
    for (index, t) in negatives.iter().enumerate() {
        let d = match dist_to_solutions(&mut cache, t, FlexBudget::Zero, cfg.eps) {
            Ok(d) => d,
            Err(e) if e.is_budget() => {
                return Err(Error::Uncertified {
                    index,
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        };
        if d.is_below(cfg.eps) {
            return Err(Error::Uncertified {
                index,
                reason: format!(
                    "distance {} is below eps {}",
                    format_rational(&d.value),
                    format_rational(&cfg.eps)
                ),
            });
        }
        dists.push(d.value);
    }

    let jobs: Vec<(Role, usize, &PermTuple)> = positives
        .iter()
        .enumerate()
        .map(|(i, t)| (Role::Positive, i, t))
        .chain(negatives.iter().enumerate().map(|(i, t)| (Role::Negative, i, t)))
        .collect();
    let bound = tester.query_bound();
    let mut instances = Vec::with_capacity(jobs.len());
    let mut violations = 0;
    let mut approximate = false;
    for (role, index, sigma) in jobs {
        let role_tag = matches!(role, Role::Negative) as u64;
        let verdicts = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = rng_for(cfg.seed, &[role_tag, index as u64, trial as u64]);
                tester.run(sigma, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let accepts = verdicts.iter().filter(|v| v.accepted).count() as u64;
        let trials = cfg.trials as u64;
        violations += verdicts.iter().filter(|v| v.queries_used > bound).count() as u64;
        approximate |= verdicts.iter().any(|v| v.approximate_comparison);
        let correct = match role {
            Role::Positive => accepts,
            Role::Negative => trials - accepts,
        };
        let interval = wilson_interval(correct, trials, cfg.confidence);
        instances.push(InstanceReport {
            role,
            index,
            degree: sigma.degree(),
            accepts,
            trials,
            accept_rate: accepts as f64 / trials.max(1) as f64,
            correct_interval: interval,
            max_queries: verdicts.iter().map(|v| v.queries_used).max().unwrap_or(0),
            mean_queries: verdicts.iter().map(|v| v.queries_used).sum::<u64>() as f64
                / trials.max(1) as f64,
            exact_defect: defect(system, sigma)?,
            exact_dist_to_sol: match role {
                Role::Positive => Some(Rational::zero()),
                Role::Negative => Some(dists[index]),
            },
            flagged: interval.1 < cfg.contract,
        });
    }

    let rate = |role: Role| -> Option<f64> {
        let sel: Vec<&InstanceReport> = instances.iter().filter(|i| i.role == role).collect();
        let trials: u64 = sel.iter().map(|i| i.trials).sum();
        if trials == 0 {
            return None;
        }
        let accepts: u64 = sel.iter().map(|i| i.accepts).sum();
        Some(match role {
            Role::Positive => accepts as f64 / trials as f64,
            Role::Negative => (trials - accepts) as f64 / trials as f64,
        })
    };
    Ok(SeparatorReport {
        tester: tester.name(),
        system: system.label().to_string(),
        seed: cfg.seed,
        trials_per_instance: cfg.trials,
        confidence: cfg.confidence,
        contract: cfg.contract,
        completeness_rate: rate(Role::Positive),
        soundness_rate: rate(Role::Negative),
        max_queries: instances.iter().map(|i| i.max_queries).max().unwrap_or(0),
        query_bound: bound,
        query_violations: violations,
        approximate_comparison: approximate,
        instances,
    })
}

/// Exact acceptance probability as `f64`, for reporting.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    fn pair(a: &str, b: &str, n: usize) -> PermTuple {
        PermTuple::parse_lines(&[a, b], Some(n)).unwrap()
    }

    fn sas(s: usize) -> SasConfig {
        SasConfig::new(EquationSystem::commutator(), s).unwrap()
    }

    #[test]
    fn sas_accepts_solutions_deterministically() {
        let t = pair("(1 2 3)", "(1 3 2)", 3);
        for seed in 0..50 {
            let v = sas_run(&sas(7), &mut QueryOracle::new(&t), &mut rng_for(seed, &[])).unwrap();
            assert!(v.accepted);
            assert!(v.queries_used <= v.query_bound);
        }
    }

    #[test]
    fn sas_always_rejects_defect_one() {
        let t = pair("(1 2 3)", "(1 2)", 3);
        for seed in 0..50 {
            let v = sas_run(&sas(1), &mut QueryOracle::new(&t), &mut rng_for(seed, &[])).unwrap();
            assert!(!v.accepted);
            assert_eq!(v.queries_used, 4);
        }
        assert!(sas_accept_probability(&sas(3), &t).unwrap().is_zero());
    }

    #[test]
    fn sas_transcript_matches_count() {
        let t = pair("(1 2 3)", "(1 2)", 3);
        let mut o = QueryOracle::with_transcript(&t);
        let v = sas_run(&sas(5), &mut o, &mut rng_for(1, &[])).unwrap();
        assert_eq!(v.transcript.unwrap().len() as u64, v.queries_used);
    }

    #[test]
    fn reject_probability_with_one_repetition_is_defect() {
        let t = pair("(1 2 3 4)", "(1 2)", 4);
        let p = sas_reject_probability(&sas(1), &t).unwrap();
        assert_eq!(p, big(Rational::new(3, 4)));
        let p5 = sas_accept_probability(&sas(5), &t).unwrap();
        assert_eq!(p5, big(Rational::new(1, 1024)));
    }

    #[test]
    fn amplification_reaches_target() {
        for (num, den) in [(1, 4), (1, 10), (3, 4), (1, 1), (1, 37)] {
            let d = Rational::new(num, den);
            let s = amplified_repetition(d, 0.99).unwrap();
            let acc = sas_accept_probability_formula(d, s);
            assert!(acc <= 0.01 + 1e-12, "d={d} s={s} acc={acc}");
        }
        assert!(amplified_repetition(Rational::zero(), 0.99).is_err());
    }

    fn sas_accept_probability_formula(d: Rational, s: usize) -> f64 {
        (1.0 - crate::rational_to_f64(&d)).powi(s as i32)
    }

    #[test]
    fn lsm_config_preconditions() {
        let sys = EquationSystem::commutator();
        let p = ProbeSet::ball(2, 1);
        let src = || SolutionSource::Exhaustive(EnumerationBudget::default());
        assert!(LsmConfig::new(sys.clone(), 0, p.clone(), Rational::new(1, 10), src()).is_err());
        assert!(LsmConfig::new(sys.clone(), 5, ProbeSet::new(2, vec![]).unwrap(), Rational::new(1, 10), src()).is_err());
        assert!(LsmConfig::new(sys.clone(), 5, p.clone(), Rational::zero(), src()).is_err());
        assert!(LsmConfig::new(sys, 5, ProbeSet::ball(1, 1), Rational::new(1, 10), src()).is_err());
    }

    #[test]
    fn lsm_point_mass_example() {
        let sys = EquationSystem::commutator();
        let probe = ProbeSet::parse(sys.alphabet(), "x y xy").unwrap();
        let cfg = LsmConfig::new(
            sys,
            50,
            probe,
            Rational::new(1, 100),
            SolutionSource::Exhaustive(EnumerationBudget::default()),
        )
        .unwrap();
        let tester = LsmTester::new(cfg);
        let t = pair("(1 2)", "(1 2)", 2);
        for seed in 0..20 {
            let v = tester.run(&t, &mut rng_for(seed, &[])).unwrap();
            assert!(v.accepted);
            assert_eq!(v.min_tv, Some(Rational::zero()));
            assert!(!v.approximate_comparison);
            assert!(v.queries_used <= v.query_bound);
        }
    }

    #[test]
    fn lsm_without_comparison_set_errors() {
        let sys = EquationSystem::named("bs 1 2").unwrap();
        let cfg = LsmConfig::new(
            sys,
            10,
            ProbeSet::ball(2, 1),
            Rational::new(1, 10),
            SolutionSource::Sampled { count: 3, seed: 0 },
        )
        .unwrap();
        let t = PermTuple::identity(2, 3);
        let err = LsmTester::new(cfg).run(&t, &mut rng_for(0, &[])).unwrap_err();
        assert_eq!(err, Error::NoComparisonSolutions(3));
    }

    #[test]
    fn lsm_sampled_family_is_flagged_approximate() {
        let cfg = LsmConfig::new(
            EquationSystem::commutator(),
            200,
            ProbeSet::ball(2, 2),
            Rational::new(1, 10),
            SolutionSource::Sampled { count: 4, seed: 9 },
        )
        .unwrap();
        let tester = LsmTester::new(cfg);
        let v = tester.run(&PermTuple::identity(2, 9), &mut rng_for(0, &[])).unwrap();
        assert!(v.approximate_comparison);
    }

    #[test]
    fn wilson_interval_sanity() {
        let (lo, hi) = wilson_interval(100, 100, 0.95);
        assert!(hi > 0.999 && lo > 0.96 && lo < 0.97);
        let (lo, hi) = wilson_interval(50, 100, 0.95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn validation_reports_rates() {
        let tester = SasTester(sas(1));
        let pos = vec![pair("(1 2)", "(1 2)", 3), PermTuple::identity(2, 3)];
        let neg = vec![pair("(1 2 3)", "(1 2)", 3)];
        let cfg = ValidationConfig::new(200, 5, Rational::new(1, 2));
        let r = validate_separator(&tester, &pos, &neg, &cfg).unwrap();
        assert_eq!(r.completeness_rate, Some(1.0));
        assert_eq!(r.soundness_rate, Some(1.0));
        assert!(!r.contract_violated());
        assert_eq!(r.max_queries, 4);
    }

    #[test]
    fn validation_refuses_uncertified_negatives() {
        let tester = SasTester(sas(1));
        let near = vec![pair("(1 2)", "()", 3)];
        let cfg = ValidationConfig::new(10, 0, Rational::new(1, 2));
        assert!(matches!(
            validate_separator(&tester, &[], &near, &cfg),
            Err(Error::Uncertified { index: 0, .. })
        ));
        let big = vec![PermTuple::identity(2, 9)];
        assert!(matches!(
            validate_separator(&tester, &[], &big, &cfg),
            Err(Error::Uncertified { .. })
        ));
    }

    #[test]
    fn validation_flags_weak_soundness() {
        // one transposition edit far from commuting, but s = 1 rejects rarely
        let tester = SasTester(sas(1));
        let t = pair("(1 2 3 4)", "(1 2)", 4);
        let cfg = ValidationConfig::new(400, 2, Rational::new(1, 4));
        let r = validate_separator(&tester, &[], &[t], &cfg).unwrap();
        assert!(r.contract_violated());
    }

    #[test]
    fn amplified_wrapper_multiplies_budget() {
        let a = Amplified {
            inner: SasTester(sas(2)),
            rounds: 3,
            rule: AmplifyRule::AllAccept,
        };
        assert_eq!(a.query_bound(), 3 * 2 * 4);
        let t = pair("(1 2 3 4)", "(1 2)", 4);
        let v = a.run(&t, &mut rng_for(0, &[])).unwrap();
        assert!(v.queries_used <= a.query_bound());
    }
}

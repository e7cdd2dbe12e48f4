//! Acceptance criteria. Runs as a plain binary (`harness = false`) so that
//! each criterion prints exactly one PASS/FAIL line.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use permtest::gset::{gset_distance, GSet, InjectionBudget};
use permtest::perm::dist;
use permtest::rng::{label_hash, rng_for};
use permtest::solutions::{
    dist_to_solutions, enumerate_solutions, plant_seeded, EnumerationBudget, FlexBudget,
    SolutionCache,
};
use permtest::stats::{
    ball_partition, ball_stats, exact_local_stats, trace_partition, tv_distance, ProbeSet,
};
use permtest::testers::{
    sas_accept_probability, sas_run, LsmConfig, LsmTester, SasConfig, SolutionSource, Tester,
    TesterVerdict,
};
use permtest::word::enumerate_reduced_words;
use permtest::{EquationSystem, PermTuple, Permutation, QueryOracle, Rational};

const SEED: u64 = 0x5eed_2024;

/// Query accounting shared by criteria 1-5 and checked in criterion 6.
#[derive(Default)]
struct Queries {
    runs: AtomicU64,
    violations: AtomicU64,
}

impl Queries {
    fn record(&self, v: &TesterVerdict) {
        self.runs.fetch_add(1, Ordering::Relaxed);
        if v.queries_used > v.query_bound {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
    }
}

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rejection_law(q: &Queries) -> Outcome {
    let start = Instant::now();
    const TRIALS: u64 = 100_000;
    let systems = [EquationSystem::commutator(), EquationSystem::named("bs 1 2").unwrap()];
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for sys in &systems {
        let mut cache = SolutionCache::new(sys.clone(), EnumerationBudget::default());
        for n in 3..=6 {
            for m in 0..=3 {
                let seed = permtest::rng::derive_seed(SEED, &[label_hash(sys.label()), n as u64, m as u64]);
                let inst = plant_seeded(&mut cache, n, m, seed).map_err(|e| e.to_string())?;
                for s in [1usize, 5] {
                    let cfg = SasConfig::new(sys.clone(), s).unwrap();
                    let exact = sas_accept_probability(&cfg, &inst.tuple).unwrap().to_f64().unwrap();
                    let accepts: u64 = (0..TRIALS)
                        .into_par_iter()
                        .map(|t| {
                            let mut rng = rng_for(seed, &[s as u64, t]);
                            let v = sas_run(&cfg, &mut QueryOracle::new(&inst.tuple), &mut rng).unwrap();
                            q.record(&v);
                            v.accepted as u64
                        })
                        .sum();
                    let freq = accepts as f64 / TRIALS as f64;
                    let se = (exact * (1.0 - exact) / TRIALS as f64).sqrt();
                    let dev = (freq - exact).abs();
                    ensure(dev <= 4.0 * se, || {
                        format!(
                            "{} n={n} m={m} s={s}: frequency {freq} vs exact {exact} (4 SE = {})",
                            sys.label(),
                            4.0 * se
                        )
                    })?;
                    if se > 0.0 {
                        worst = worst.max(dev / se);
                    }
                    checked += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{checked} (instance, s) cells, max deviation {worst:.2} SE, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn perfect_completeness(q: &Queries) -> Outcome {
    let sys = EquationSystem::commutator();
    let mut runs = 0u64;
    for (n, expected) in [(3, 18), (4, 120)] {
        let sols = enumerate_solutions(&sys, n, &EnumerationBudget::default()).unwrap();
        ensure(sols.len() == expected, || format!("|Sol({n})| = {}, expected {expected}", sols.len()))?;
        for (i, sol) in sols.iter().enumerate() {
            for s in [1usize, 10] {
                let cfg = SasConfig::new(sys.clone(), s).unwrap();
                for seed in 0..100u64 {
                    let mut rng = rng_for(SEED, &[n as u64, i as u64, s as u64, seed]);
                    let v = sas_run(&cfg, &mut QueryOracle::new(sol), &mut rng).unwrap();
                    q.record(&v);
                    ensure(v.accepted, || format!("rejected solution {sol} at seed {seed}"))?;
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("|Sol(3)| = 18, |Sol(4)| = 120, {runs} runs, zero failures"))
}

fn random_probe<R: Rng>(pool: &[permtest::Word], size: usize, rng: &mut R) -> ProbeSet {
    let words: Vec<_> = pool.choose_multiple(rng, size).cloned().collect();
    ProbeSet::new(2, words).unwrap()
}

fn tv_monotonicity() -> Outcome {
    let pool = enumerate_reduced_words(2, 3);
    let mut rng = rng_for(SEED, &[3]);
    for i in 0..1000 {
        let sigma = PermTuple::random(2, rng.gen_range(1..=8), &mut rng);
        let tau = PermTuple::random(2, rng.gen_range(1..=8), &mut rng);
        let p = random_probe(&pool, rng.gen_range(1..=10), &mut rng);
        let sub: Vec<_> = p
            .words()
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .cloned()
            .collect();
        let sub = ProbeSet::new(2, sub).unwrap();
        let (a, b) = (exact_local_stats(&sigma, &p).unwrap(), exact_local_stats(&tau, &p).unwrap());
        let full = tv_distance(&a, &b).unwrap();
        let ra = a.restrict(&sub).unwrap();
        let rb = b.restrict(&sub).unwrap();
        ensure(ra == exact_local_stats(&sigma, &sub).unwrap(), || {
            format!("triple {i}: restriction disagrees with direct computation")
        })?;
        let restricted = tv_distance(&ra, &rb).unwrap();
        ensure(restricted <= full, || {
            format!("triple {i}: TV on P' = {restricted} exceeds TV on P = {full}")
        })?;
    }
    Ok("1000/1000 triples satisfy the exact inequality".into())
}

fn ball_faithfulness() -> Outcome {
    let mut rng = rng_for(SEED, &[4]);
    for i in 0..100 {
        let k = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=8);
        let r = rng.gen_range(0..=1);
        let sigma = PermTuple::random(k, n, &mut rng);
        let balls = ball_partition(&sigma, r);
        let traces = trace_partition(&sigma, r).unwrap();
        ensure(balls == traces, || format!("tuple {i} ({sigma}, r = {r}): partitions differ"))?;
        let mut ball_mult: Vec<usize> = ball_stats(&sigma, r).values().copied().collect();
        let stats = exact_local_stats(&sigma, &ProbeSet::ball(k, 2 * r)).unwrap();
        let mut trace_mult: Vec<usize> = stats
            .atoms()
            .map(|(_, w)| (w * Rational::from_integer(n as i64)).to_integer() as usize)
            .collect();
        ball_mult.sort_unstable();
        trace_mult.sort_unstable();
        ensure(ball_mult == trace_mult, || format!("tuple {i}: multiplicities differ"))?;
    }
    Ok("100/100 tuples agree".into())
}

fn lsm_sanity(q: &Queries) -> Outcome {
    let sys = EquationSystem::commutator();
    let delta = Rational::new(1, 20);
    let cfg = LsmConfig::new(
        sys.clone(),
        10_000,
        ProbeSet::ball(2, 4),
        delta,
        SolutionSource::Exhaustive(EnumerationBudget::default()),
    )
    .unwrap();
    let tester = LsmTester::new(cfg);
    let mut cache = SolutionCache::new(sys, EnumerationBudget::default());
    let mut worst = Rational::zero();
    for n in 2..=5 {
        let sols = cache.get(n).unwrap();
        let verdicts: Vec<TesterVerdict> = (0..200u64)
            .into_par_iter()
            .map(|run| {
                let mut rng = rng_for(SEED, &[5, n as u64, run]);
                let sol = &sols[rng.gen_range(0..sols.len())];
                tester.run(sol, &mut rng).unwrap()
            })
            .collect();
        for v in &verdicts {
            q.record(v);
            worst = worst.max(v.min_tv.unwrap());
        }
        let accepted = verdicts.iter().filter(|v| v.accepted).count();
        ensure(accepted == 200, || format!("n = {n}: accepted {accepted}/200"))?;
    }

    let bad = PermTuple::new(vec![
        Permutation::parse("(1 2 3)", Some(3)).unwrap(),
        Permutation::parse("(1 2)", Some(3)).unwrap(),
    ])
    .unwrap();
    let comparison = tester.comparison(3).unwrap();
    let exact = comparison.min_tv(&exact_local_stats(&bad, &tester.config().probe).unwrap()).unwrap();
    ensure(exact == Rational::from_integer(1), || format!("exact min TV {exact}, expected 1"))?;
    let mut rejected = 0;
    for run in 0..200u64 {
        let v = tester.run(&bad, &mut rng_for(SEED, &[55, run])).unwrap();
        q.record(&v);
        rejected += (!v.accepted) as usize;
    }
    ensure(rejected == 200, || format!("defect-1 instance rejected {rejected}/200"))?;
    Ok(format!(
        "800/800 solution runs accepted (max min-TV {}), defect-1 instance rejected 200/200 at exact min TV 1",
        permtest::format_rational(&worst)
    ))
}

fn query_accounting(q: &Queries) -> Outcome {
    let runs = q.runs.load(Ordering::Relaxed);
    let bad = q.violations.load(Ordering::Relaxed);
    ensure(runs > 0, || "no runs recorded".into())?;
    ensure(bad == 0, || format!("{bad} of {runs} runs exceeded their query bound"))?;
    Ok(format!("{runs} runs, zero violations"))
}

fn gset_exactness() -> Outcome {
    let mut rng = rng_for(SEED, &[7]);
    let budget = InjectionBudget::default();
    for i in 0..50 {
        let n = rng.gen_range(1..=6);
        let x = PermTuple::random(2, n, &mut rng);
        let y = x.conjugate_by(&Permutation::random(n, &mut rng)).unwrap();
        ensure(common::isomorphic(&common::from_tuple(&x), &common::from_tuple(&y)), || {
            format!("pair {i}: oracle disagrees on a conjugate pair")
        })?;
        let d = gset_distance(&GSet::new(x), &GSet::new(y), &budget).unwrap();
        ensure(d.is_zero(), || format!("isomorphic pair {i}: d_S = {d}"))?;
    }
    let mut found = 0;
    while found < 50 {
        let n = rng.gen_range(2..=6);
        let x = PermTuple::random(2, n, &mut rng);
        let y = PermTuple::random(2, n, &mut rng);
        if common::isomorphic(&common::from_tuple(&x), &common::from_tuple(&y)) {
            continue;
        }
        let d = gset_distance(&GSet::new(x.clone()), &GSet::new(y.clone()), &budget).unwrap();
        ensure(d > Rational::zero(), || format!("non-isomorphic {x} vs {y}: d_S = 0"))?;
        found += 1;
    }
    Ok("50 isomorphic pairs at 0, 50 non-isomorphic pairs positive".into())
}

fn metric_axioms() -> Outcome {
    for n in [3, 4] {
        let perms: Vec<Permutation> = common::all_perms(n)
            .into_iter()
            .map(|p| Permutation::from_images(p).unwrap())
            .collect();
        for a in &perms {
            for b in &perms {
                let ab = dist(a, b).unwrap();
                ensure(ab == common::hamming(a.images(), b.images()), || "dist disagrees with oracle".into())?;
                ensure((ab == Rational::zero()) == (a == b), || format!("identity of indiscernibles fails on {a}, {b}"))?;
                ensure(ab == dist(b, a).unwrap(), || format!("asymmetric on {a}, {b}"))?;
                for c in &perms {
                    ensure(dist(a, c).unwrap() <= ab + dist(b, c).unwrap(), || {
                        format!("triangle fails on {a}, {b}, {c}")
                    })?;
                }
            }
        }
    }

    let sys = EquationSystem::commutator();
    let mut cache = SolutionCache::new(sys, EnumerationBudget::default());
    let flexes = [
        FlexBudget::Zero,
        FlexBudget::LinearInN(Rational::new(1, 4)),
        FlexBudget::LinearInN(Rational::new(1, 2)),
        FlexBudget::Unbounded,
    ];
    let eps = Rational::new(1, 4);
    let mut rng = rng_for(SEED, &[8]);
    for i in 0..100 {
        let sigma = PermTuple::random(2, rng.gen_range(1..=4), &mut rng);
        let values: Vec<Rational> = flexes
            .iter()
            .map(|f| dist_to_solutions(&mut cache, &sigma, *f, eps).unwrap().value)
            .collect();
        ensure(values.windows(2).all(|w| w[1] <= w[0]), || {
            format!("instance {i} ({sigma}): values {values:?} increase with the window")
        })?;
    }
    Ok("metric axioms exhaustive on Sym(3), Sym(4); flex monotone on 100/100".into())
}

fn main() -> ExitCode {
    let q = Queries::default();
    let criteria: Vec<Criterion> = vec![
        ("rejection law (1 - defect)^s", Box::new(|| rejection_law(&q))),
        ("SAS perfect completeness", Box::new(|| perfect_completeness(&q))),
        ("TV monotonicity under restriction", Box::new(tv_monotonicity)),
        ("ball statistics faithfulness", Box::new(ball_faithfulness)),
        ("LSM sanity on solutions", Box::new(|| lsm_sanity(&q))),
        ("query accounting", Box::new(|| query_accounting(&q))),
        ("d_S exactness", Box::new(gset_exactness)),
        ("metric axioms and flex monotonicity", Box::new(metric_axioms)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Experiment specifications and the deterministic sweep runner.
//!
//! A spec is a TOML file. List-valued keys span a grid; every grid cell
//! draws one instance and runs `trials` independent tester runs on it.
//!
//! ```toml
//! system = "commutator"
//! tester = "sas"
//! n = "3..=6"
//! s = [1, 5]
//! instance_model = ["solution", "planted:1", "far:1/4"]
//! trials = 1000
//! seed = 7
//! ```
//!
//! CSV columns, in order: `system, n, s, P_radius, delta, instance_model,
//! corruption, accept_rate, reject_rate, mean_queries, exact_defect,
//! exact_dist_to_sol`. Exact columns are `p/q`; a blank cell means the value
//! is undefined for the row (no probe set for SAS, no edits outside the
//! planted model) or beyond the enumeration budget.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::PermTuple;
use crate::rng::{derive_seed, label_hash, rng_for};
use crate::solutions::{
    defect, dist_to_solutions, plant_near_solution, random_far_instance, EnumerationBudget,
    FlexBudget, PlantSource, SolutionCache,
};
use crate::stats::ProbeSet;
use crate::system::EquationSystem;
use crate::testers::{
    sas_accept_probability, to_f64, validate_separator, wilson_interval, LsmComparison, LsmConfig,
    LsmTester, Role, SasConfig, SasTester, SolutionSource, Tester, ValidationConfig,
    DEFAULT_CONTRACT,
};
use crate::{format_rational, parse_rational, Rational};

/// Draws allowed when searching for a certified far instance.
pub const FAR_ATTEMPTS: usize = 2000;

const INSTANCE_TAG: u64 = 1;
const TRIAL_TAG: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TesterKind {
    Sas,
    Lsm,
}

/// `n = 4`, `n = [3, 5]` or `n = "3..=6"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Degrees {
    One(usize),
    List(Vec<usize>),
    Range(String),
}

impl Degrees {
    pub fn expand(&self) -> Result<Vec<usize>> {
        let mut out = match self {
            Degrees::One(n) => vec![*n],
            Degrees::List(v) => v.clone(),
            Degrees::Range(r) => {
                let bad = || Error::Parse(format!("bad degree range {r:?}"));
                let (lo, hi, inclusive) = if let Some((a, b)) = r.split_once("..=") {
                    (a, b, true)
                } else if let Some((a, b)) = r.split_once("..") {
                    (a, b, false)
                } else {
                    return r.trim().parse().map(|n| vec![n]).map_err(|_| bad());
                };
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                if inclusive {
                    (lo..=hi).collect()
                } else {
                    (lo..hi).collect()
                }
            }
        };
        out.sort_unstable();
        out.dedup();
        if out.is_empty() || out[0] == 0 {
            return Err(Error::InvalidArgument("degrees must be nonempty and positive".into()));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum InstanceModel {
    /// A uniformly random solution (positive instance).
    Solution,
    /// A random solution with `m` transposition edits.
    Planted(usize),
    /// A uniformly random tuple.
    Random,
    /// A random tuple certified at exact distance at least `eps` (negative).
    Far(Rational),
}

impl InstanceModel {
    /// `solution`, `planted:m`, `random`, `far[:eps]` (default eps 1/4).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let (head, arg) = match t.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (t, None),
        };
        match (head, arg) {
            ("solution" | "solutions", None) => Ok(InstanceModel::Solution),
            ("random", None) => Ok(InstanceModel::Random),
            ("planted", Some(m)) => m
                .parse()
                .map(InstanceModel::Planted)
                .map_err(|_| Error::Parse(format!("bad corruption in {t:?}"))),
            ("far" | "far-certified", arg) => {
                let eps = arg.map(parse_rational).transpose()?.unwrap_or(Rational::new(1, 4));
                if eps <= Rational::zero() {
                    return Err(Error::InvalidArgument("far models need eps > 0".into()));
                }
                Ok(InstanceModel::Far(eps))
            }
            _ => Err(Error::Parse(format!("unknown instance model {t:?}"))),
        }
    }

    /// The `instance_model` CSV column; the corruption has its own column.
    pub fn label(&self) -> String {
        match self {
            InstanceModel::Solution => "solution".into(),
            InstanceModel::Planted(_) => "planted".into(),
            InstanceModel::Random => "random".into(),
            InstanceModel::Far(eps) => format!("far:{}", format_rational(eps)),
        }
    }

    pub fn key(&self) -> String {
        match self {
            InstanceModel::Planted(m) => format!("planted:{m}"),
            other => other.label(),
        }
    }

    pub fn role(&self) -> Option<Role> {
        match self {
            InstanceModel::Solution => Some(Role::Positive),
            InstanceModel::Far(_) => Some(Role::Negative),
            _ => None,
        }
    }

    pub fn corruption(&self) -> Option<usize> {
        match self {
            InstanceModel::Planted(m) => Some(*m),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// A built-in name (`commutator`, `bs m n`), ignored when `system_file` is set.
    #[serde(default)]
    pub system: Option<String>,
    #[serde(default)]
    pub system_file: Option<PathBuf>,
    pub tester: TesterKind,
    pub n: Degrees,
    pub s: Vec<usize>,
    #[serde(default)]
    pub probe_radius: Vec<usize>,
    /// Rationals as strings (`"1/20"`, `"0.05"`).
    #[serde(default)]
    pub delta: Vec<String>,
    pub instance_model: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub enumeration_budget: Option<u64>,
    /// LSM comparison set: `exhaustive` (default) or `sampled:COUNT`.
    #[serde(default)]
    pub comparison: Option<String>,
    #[serde(default)]
    pub confidence: Option<f64>,
    #[serde(default)]
    pub contract: Option<f64>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("experiment spec: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec is plain data")
    }

    pub fn budget(&self) -> EnumerationBudget {
        self.enumeration_budget
            .map(|m| EnumerationBudget { max_tuples: m as u128 })
            .unwrap_or_default()
    }

    pub fn load_system(&self) -> Result<EquationSystem> {
        match (&self.system_file, &self.system) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::InvalidArgument(format!("reading {}: {e}", path.display()))
                })?;
                EquationSystem::parse_file(&text)
            }
            (None, Some(name)) => EquationSystem::named(name),
            (None, None) => Err(Error::InvalidArgument("spec names no system".into())),
        }
    }

    fn source(&self) -> Result<SolutionSource> {
        match self.comparison.as_deref().map(str::trim) {
            None | Some("exhaustive") => Ok(SolutionSource::Exhaustive(self.budget())),
            Some(other) => match other.split_once(':') {
                Some(("sampled", count)) => {
                    let count = count
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad comparison {other:?}")))?;
                    Ok(SolutionSource::Sampled {
                        count,
                        seed: derive_seed(self.seed, &[label_hash("comparison")]),
                    })
                }
                _ => Err(Error::Parse(format!("bad comparison {other:?}"))),
            },
        }
    }
}

/// One grid point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellKey {
    pub n: usize,
    pub s: usize,
    pub probe_radius: Option<usize>,
    pub delta: Option<Rational>,
    /// Position in the spec's `instance_model` list.
    pub model_index: usize,
    pub model: InstanceModel,
}

/// A validated spec with its grid expanded.
#[derive(Clone, Debug)]
pub struct Plan {
    pub spec: ExperimentSpec,
    pub system: EquationSystem,
    pub budget: EnumerationBudget,
    pub degrees: Vec<usize>,
    pub models: Vec<InstanceModel>,
    pub cells: Vec<CellKey>,
}

impl Plan {
    pub fn new(spec: ExperimentSpec) -> Result<Self> {
        let system = spec.load_system()?;
        let budget = spec.budget();
        let degrees = spec.n.expand()?;
        if spec.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if spec.s.is_empty() || spec.s.contains(&0) {
            return Err(Error::InvalidArgument("s must be a nonempty list of positive values".into()));
        }
        if spec.instance_model.is_empty() {
            return Err(Error::InvalidArgument("instance_model must be nonempty".into()));
        }
        let models = spec
            .instance_model
            .iter()
            .map(|m| InstanceModel::parse(m))
            .collect::<Result<Vec<_>>>()?;
        let (radii, deltas): (Vec<Option<usize>>, Vec<Option<Rational>>) = match spec.tester {
            TesterKind::Sas => (vec![None], vec![None]),
            TesterKind::Lsm => {
                if spec.probe_radius.is_empty() || spec.delta.is_empty() {
                    return Err(Error::InvalidArgument(
                        "lsm needs probe_radius and delta".into(),
                    ));
                }
                let deltas = spec
                    .delta
                    .iter()
                    .map(|d| parse_rational(d).map(Some))
                    .collect::<Result<Vec<_>>>()?;
                (spec.probe_radius.iter().map(|&r| Some(r)).collect(), deltas)
            }
        };
        spec.source()?;

        let k = system.rank();
        for &n in &degrees {
            let exhaustive_lsm = spec.tester == TesterKind::Lsm
                && matches!(spec.source()?, SolutionSource::Exhaustive(_));
            if exhaustive_lsm || models.iter().any(|m| matches!(m, InstanceModel::Far(_))) {
                budget.check(k, n)?;
            }
            for m in &models {
                if let InstanceModel::Planted(c) = m {
                    if *c > k * n {
                        return Err(Error::InvalidArgument(format!(
                            "corruption {c} exceeds k·n = {} at n = {n}",
                            k * n
                        )));
                    }
                }
            }
        }

        let mut cells = Vec::new();
        for &n in &degrees {
            for &s in &spec.s {
                for &probe_radius in &radii {
                    for &delta in &deltas {
                        for (model_index, &model) in models.iter().enumerate() {
                            cells.push(CellKey {
                                n,
                                s,
                                probe_radius,
                                delta,
                                model_index,
                                model,
                            });
                        }
                    }
                }
            }
        }
        cells.sort();
        cells.dedup();
        Ok(Plan {
            spec,
            system,
            budget,
            degrees,
            models,
            cells,
        })
    }
}

/// The instance a cell runs on, with whatever ground truth is available.
#[derive(Clone, Debug)]
pub struct CellInstance {
    pub tuple: PermTuple,
    pub role: Option<Role>,
    /// Planted model only: the upper bound from the edit count.
    pub planted_bound: Option<Rational>,
    pub plant_source: Option<PlantSource>,
}

/// Regenerates the instance shared by every cell with this `(n, model)`.
/// It depends only on the seed, the system, `n` and the model.
pub fn cell_instance(
    cache: &mut SolutionCache,
    seed: u64,
    n: usize,
    model: &InstanceModel,
) -> Result<CellInstance> {
    let k = cache.system().rank();
    let mut rng = rng_for(
        seed,
        &[
            INSTANCE_TAG,
            label_hash(cache.system().label()),
            n as u64,
            label_hash(&model.key()),
        ],
    );
    let role = model.role();
    match model {
        InstanceModel::Solution | InstanceModel::Planted(_) => {
            let m = model.corruption().unwrap_or(0);
            let p = plant_near_solution(cache, n, m, &mut rng)?;
            Ok(CellInstance {
                planted_bound: model.corruption().map(|_| p.distance_bound()),
                plant_source: Some(p.source),
                tuple: p.tuple,
                role,
            })
        }
        InstanceModel::Random => Ok(CellInstance {
            tuple: PermTuple::random(k, n, &mut rng),
            role,
            planted_bound: None,
            plant_source: None,
        }),
        InstanceModel::Far(eps) => {
            let (tuple, _) = random_far_instance(cache, n, *eps, FAR_ATTEMPTS, &mut rng)?;
            Ok(CellInstance {
                tuple,
                role,
                planted_bound: None,
                plant_source: None,
            })
        }
    }
}

/// One CSV row. Field order is the documented column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub system: String,
    pub n: usize,
    pub s: usize,
    #[serde(rename = "P_radius")]
    pub p_radius: Option<usize>,
    pub delta: Option<String>,
    pub instance_model: String,
    pub corruption: Option<usize>,
    pub accept_rate: f64,
    pub reject_rate: f64,
    pub mean_queries: f64,
    pub exact_defect: String,
    pub exact_dist_to_sol: Option<String>,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "system",
    "n",
    "s",
    "P_radius",
    "delta",
    "instance_model",
    "corruption",
    "accept_rate",
    "reject_rate",
    "mean_queries",
    "exact_defect",
    "exact_dist_to_sol",
];

#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    #[serde(flatten)]
    pub row: SweepRow,
    /// 1-based image lists.
    pub instance: serde_json::Value,
    pub role: Option<Role>,
    pub accepts: u64,
    pub trials: u64,
    /// Wilson interval for the acceptance probability.
    pub accept_interval: (f64, f64),
    /// SAS only: `(1 − defect)^s`.
    pub exact_accept_probability: Option<f64>,
    pub planted_distance_bound: Option<String>,
    pub max_queries: u64,
    pub query_bound: u64,
    pub query_violations: u64,
    pub approximate_comparison: bool,
    /// Labeled instances only: the correct verdict misses the contract.
    pub flagged: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentOutput {
    pub config: ExperimentSpec,
    pub system: serde_json::Value,
    pub system_label: String,
    pub version: &'static str,
    pub cells: Vec<CellResult>,
}

impl ExperimentOutput {
    pub fn contract_violated(&self) -> bool {
        self.cells
            .iter()
            .any(|c| c.flagged == Some(true) || c.query_violations > 0)
    }

    pub fn rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.cells.iter().map(|c| &c.row)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(self.rows(), out)
    }

    /// Everything but the rows: the config echo that accompanies a CSV.
    pub fn meta(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "system": self.system,
            "system_label": self.system_label,
            "version": self.version,
            "columns": CSV_COLUMNS,
        })
    }
}

pub fn write_rows<'a, W: Write>(rows: impl IntoIterator<Item = &'a SweepRow>, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("writing CSV: {e}"));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("writing CSV: {e}")))
}

fn cell_seed(seed: u64, key: &CellKey) -> u64 {
    derive_seed(
        seed,
        &[
            TRIAL_TAG,
            key.n as u64,
            key.s as u64,
            key.probe_radius.map_or(0, |r| r as u64 + 1),
            key.delta.map_or(0, |d| label_hash(&format_rational(&d))),
            label_hash(&key.model.key()),
        ],
    )
}

struct Shared {
    instances: BTreeMap<(usize, usize), CellInstance>,
    dists: BTreeMap<(usize, usize), Option<Rational>>,
    comparisons: BTreeMap<(usize, usize), Arc<LsmComparison>>,
}

fn prepare(plan: &Plan) -> Result<Shared> {
    let mut cache = SolutionCache::new(plan.system.clone(), plan.budget);
    let k = plan.system.rank();
    let mut instances = BTreeMap::new();
    let mut dists = BTreeMap::new();
    for &n in &plan.degrees {
        for (i, model) in plan.models.iter().enumerate() {
            let inst = cell_instance(&mut cache, plan.spec.seed, n, model)?;
            let d = if plan.budget.admits(k, n) {
                Some(dist_to_solutions(&mut cache, &inst.tuple, FlexBudget::Zero, Rational::one())?.value)
            } else if matches!(model, InstanceModel::Solution) {
                Some(Rational::zero())
            } else {
                None
            };
            dists.insert((n, i), d);
            instances.insert((n, i), inst);
        }
    }
    let mut comparisons = BTreeMap::new();
    if plan.spec.tester == TesterKind::Lsm {
        let source = plan.spec.source()?;
        for &r in &plan.spec.probe_radius {
            let cfg = LsmConfig::new(
                plan.system.clone(),
                1,
                ProbeSet::ball(k, r),
                Rational::one(),
                source.clone(),
            )?;
            for &n in &plan.degrees {
                comparisons.insert((r, n), Arc::new(LsmComparison::build(&cfg, n)?));
            }
        }
    }
    Ok(Shared {
        instances,
        dists,
        comparisons,
    })
}

fn build_tester(plan: &Plan, shared: &Shared, key: &CellKey) -> Result<Box<dyn Tester>> {
    Ok(match plan.spec.tester {
        TesterKind::Sas => Box::new(SasTester(SasConfig::new(plan.system.clone(), key.s)?)),
        TesterKind::Lsm => {
            let r = key.probe_radius.expect("lsm cells carry a radius");
            let cfg = LsmConfig::new(
                plan.system.clone(),
                key.s,
                ProbeSet::ball(plan.system.rank(), r),
                key.delta.expect("lsm cells carry a delta"),
                plan.spec.source()?,
            )?;
            let comparison = Arc::clone(&shared.comparisons[&(r, key.n)]);
            Box::new(LsmTester::with_comparison(cfg, comparison))
        }
    })
}

fn run_cell(plan: &Plan, shared: &Shared, key: &CellKey) -> Result<CellResult> {
    let inst = &shared.instances[&(key.n, key.model_index)];
    let dist = shared.dists[&(key.n, key.model_index)];
    let tester = build_tester(plan, shared, key)?;
    let seed = cell_seed(plan.spec.seed, key);
    let trials = plan.spec.trials as u64;
    let bound = tester.query_bound();
    let confidence = plan.spec.confidence.unwrap_or(0.95);

    let (accepts, total_queries, max_queries, violations, approximate, flagged) = match inst.role {
        Some(role) => {
            let mut cfg = ValidationConfig::new(
                plan.spec.trials,
                seed,
                match key.model {
                    InstanceModel::Far(eps) => eps,
                    _ => Rational::one(),
                },
            );
            cfg.budget = plan.budget;
            cfg.confidence = confidence;
            cfg.contract = plan.spec.contract.unwrap_or(DEFAULT_CONTRACT);
            let one = std::slice::from_ref(&inst.tuple);
            let (pos, neg): (&[PermTuple], &[PermTuple]) = match role {
                Role::Positive => (one, &[]),
                Role::Negative => (&[], one),
            };
            let report = validate_separator(tester.as_ref(), pos, neg, &cfg)?;
            let r = &report.instances[0];
            (
                r.accepts,
                (r.mean_queries * trials as f64).round() as u64,
                r.max_queries,
                report.query_violations,
                report.approximate_comparison,
                Some(r.flagged),
            )
        }
        None => {
            let verdicts = (0..plan.spec.trials)
                .into_par_iter()
                .map(|t| tester.run(&inst.tuple, &mut rng_for(seed, &[t as u64])))
                .collect::<Result<Vec<_>>>()?;
            (
                verdicts.iter().filter(|v| v.accepted).count() as u64,
                verdicts.iter().map(|v| v.queries_used).sum(),
                verdicts.iter().map(|v| v.queries_used).max().unwrap_or(0),
                verdicts.iter().filter(|v| v.queries_used > bound).count() as u64,
                verdicts.iter().any(|v| v.approximate_comparison),
                None,
            )
        }
    };

    let accept_rate = accepts as f64 / trials as f64;
    let exact_accept_probability = match plan.spec.tester {
        TesterKind::Sas => Some(to_f64(&sas_accept_probability(
            &SasConfig::new(plan.system.clone(), key.s)?,
            &inst.tuple,
        )?)),
        TesterKind::Lsm => None,
    };
    Ok(CellResult {
        row: SweepRow {
            system: plan.system.label().to_string(),
            n: key.n,
            s: key.s,
            p_radius: key.probe_radius,
            delta: key.delta.as_ref().map(format_rational),
            instance_model: key.model.label(),
            corruption: key.model.corruption(),
            accept_rate,
            reject_rate: (trials - accepts) as f64 / trials as f64,
            mean_queries: total_queries as f64 / trials as f64,
            exact_defect: format_rational(&defect(&plan.system, &inst.tuple)?),
            exact_dist_to_sol: dist.as_ref().map(format_rational),
        },
        instance: inst.tuple.to_json(),
        role: inst.role,
        accepts,
        trials,
        accept_interval: wilson_interval(accepts, trials, confidence),
        exact_accept_probability,
        planted_distance_bound: inst.planted_bound.as_ref().map(format_rational),
        max_queries,
        query_bound: bound,
        query_violations: violations,
        approximate_comparison: approximate,
        flagged,
    })
}

/// Runs every cell of the plan. Cells run in parallel; the result is in
/// sweep-key order and depends only on the spec.
pub fn run_plan(plan: &Plan) -> Result<ExperimentOutput> {
    let shared = prepare(plan)?;
    let mut results = plan
        .cells
        .par_iter()
        .map(|key| run_cell(plan, &shared, key).map(|r| (key.clone(), r)))
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(ExperimentOutput {
        config: plan.spec.clone(),
        system: plan.system.to_json(),
        system_label: plan.system.label().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        cells: results.into_iter().map(|(_, r)| r).collect(),
    })
}

pub fn run_experiment(spec: ExperimentSpec) -> Result<ExperimentOutput> {
    run_plan(&Plan::new(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> ExperimentSpec {
        ExperimentSpec::from_toml(text).unwrap()
    }

    const SAS: &str = r#"
system = "commutator"
tester = "sas"
n = "3..=4"
s = [1, 3]
instance_model = ["solution", "planted:1", "random", "far:1/4"]
trials = 200
seed = 11
"#;

    #[test]
    fn degrees_expand() {
        assert_eq!(Degrees::Range("3..=5".into()).expand().unwrap(), vec![3, 4, 5]);
        assert_eq!(Degrees::Range("3..5".into()).expand().unwrap(), vec![3, 4]);
        assert_eq!(Degrees::List(vec![5, 3, 5]).expand().unwrap(), vec![3, 5]);
        assert_eq!(Degrees::One(4).expand().unwrap(), vec![4]);
        assert!(Degrees::Range("a..b".into()).expand().is_err());
        assert!(Degrees::List(vec![]).expand().is_err());
    }

    #[test]
    fn models_parse() {
        assert_eq!(InstanceModel::parse("planted:2").unwrap(), InstanceModel::Planted(2));
        assert_eq!(InstanceModel::parse("far").unwrap(), InstanceModel::Far(Rational::new(1, 4)));
        assert_eq!(
            InstanceModel::parse("far-certified:0.5").unwrap().label(),
            "far:1/2"
        );
        assert!(InstanceModel::parse("planted").is_err());
        assert!(InstanceModel::parse("far:0").is_err());
    }

    #[test]
    fn seed_is_mandatory() {
        let text = SAS.replace("seed = 11\n", "");
        assert!(ExperimentSpec::from_toml(&text).unwrap_err().is_parse());
    }

    #[test]
    fn sweep_is_deterministic_and_sorted() {
        let a = run_experiment(spec(SAS)).unwrap();
        let b = run_experiment(spec(SAS)).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.cells.len(), 2 * 2 * 4);
        let header = String::from_utf8(ca).unwrap();
        assert!(header.starts_with(&CSV_COLUMNS.join(",")));
        assert_eq!(header.lines().count(), 1 + a.cells.len());
        let keys: Vec<(usize, usize)> = a.rows().map(|r| (r.n, r.s)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn solutions_accept_and_far_instances_are_certified() {
        let out = run_experiment(spec(SAS)).unwrap();
        for c in &out.cells {
            match c.row.instance_model.as_str() {
                "solution" => {
                    assert_eq!(c.row.accept_rate, 1.0);
                    assert_eq!(c.row.exact_defect, "0/1");
                    assert_eq!(c.row.exact_dist_to_sol.as_deref(), Some("0/1"));
                }
                "far:1/4" => {
                    let d = parse_rational(c.row.exact_dist_to_sol.as_deref().unwrap()).unwrap();
                    assert!(d >= Rational::new(1, 4));
                }
                _ => {}
            }
            assert!(c.max_queries <= c.query_bound);
        }
    }

    #[test]
    fn instance_is_shared_across_s() {
        let out = run_experiment(spec(SAS)).unwrap();
        let planted: Vec<&CellResult> = out
            .cells
            .iter()
            .filter(|c| c.row.n == 4 && c.row.instance_model == "planted")
            .collect();
        assert_eq!(planted.len(), 2);
        assert_eq!(planted[0].instance, planted[1].instance);
    }

    #[test]
    fn lsm_needs_parameters_and_budget() {
        let text = SAS.replace("tester = \"sas\"", "tester = \"lsm\"");
        assert!(Plan::new(spec(&text)).is_err());
        let big = format!("{text}probe_radius = [1]\ndelta = [\"0.1\"]\n").replace("n = \"3..=4\"", "n = 7");
        assert!(Plan::new(spec(&big)).unwrap_err().is_budget());
    }

    #[test]
    fn lsm_cells_run() {
        let text = r#"
system = "commutator"
tester = "lsm"
n = 3
s = [500]
probe_radius = [1, 2]
delta = ["1/10"]
instance_model = ["solution"]
trials = 20
seed = 3
"#;
        let out = run_experiment(spec(text)).unwrap();
        assert_eq!(out.cells.len(), 2);
        for c in &out.cells {
            assert!(c.row.accept_rate >= 0.9);
            assert!(c.max_queries <= c.query_bound);
            assert_eq!(c.row.delta.as_deref(), Some("1/10"));
        }
    }
}

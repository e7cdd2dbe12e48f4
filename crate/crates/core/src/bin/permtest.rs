use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use permtest::experiment::{run_experiment, Degrees, ExperimentOutput, ExperimentSpec, TesterKind};
use permtest::gset::{gset_distance_or_bound, random_stabilizer_marginal, GSet, InjectionBudget, MarginalSpec};
use permtest::solutions::{
    defect, dist_to_solutions, enumerate_solutions, is_solution, EnumerationBudget, FlexBudget,
    SolutionCache,
};
use permtest::stats::{exact_local_stats, ProbeSet};
use permtest::{format_rational, parse_rational, Alphabet, EquationSystem, Error, PermTuple};

const EXIT_OTHER: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_CONTRACT: u8 = 4;

const SYSTEM_HELP: &str = "Built-in name (\"commutator\", \"bs M N\") or a system file. \
For bs M N: M = N >= 2 is known not to be BS-rigid (hence not testable); \
coprime M, N >= 2 is known to be testable but not stable. These notes are \
provenance only and are not checked.";

#[derive(Parser)]
#[command(name = "permtest", version, about = "Testers and exact oracles for equations over permutations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format (defaults: text for single values, json for tester runs, csv for sweeps).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a word on a tuple of permutations.
    Eval {
        #[arg(long)]
        word: String,
        #[command(flatten)]
        tuple: TupleArg,
        /// Generator names, e.g. "xy" (default: the standard alphabet of the tuple's rank).
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Freely reduce a word.
    Reduce {
        #[arg(long)]
        word: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Count (and optionally list) the solutions of degree n.
    Solutions {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Fraction of (relator, point) pairs that are not fixed.
    Defect {
        #[command(flatten)]
        system: SystemArg,
        #[command(flatten)]
        tuple: TupleArg,
    },
    /// Exact distance to the solution set.
    Dist {
        #[command(flatten)]
        system: SystemArg,
        #[command(flatten)]
        tuple: TupleArg,
        /// zero | linear:c | n-linear:c | unbounded
        #[arg(long, default_value = "zero")]
        flex: String,
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Run the sample-and-substitute tester.
    Sas(TesterArgs),
    /// Run the local-statistics tester.
    Lsm(TesterArgs),
    /// Equivariance distance between two finite actions.
    Dsets {
        /// Tuple (inline or file) acting on X.
        #[arg(long)]
        x: String,
        /// Tuple (inline or file) acting on Y.
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = InjectionBudget::default().max_domain)]
        max_domain: usize,
    },
    /// Probability that a random point's stabilizer meets A exactly in B.
    Marginal {
        #[command(flatten)]
        tuple: TupleArg,
        #[arg(long)]
        a: String,
        #[arg(long, default_value = "")]
        b: String,
    },
    /// Exact stabilizer-trace distribution on a probe set.
    Stats {
        #[command(flatten)]
        tuple: TupleArg,
        #[arg(long, conflicts_with = "probe")]
        probe_radius: Option<usize>,
        /// Explicit probe words, whitespace or comma separated.
        #[arg(long)]
        probe: Option<String>,
    },
    /// Run a parameter sweep from a TOML spec.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the spec's trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Args)]
struct SystemArg {
    #[arg(long, default_value = "commutator", help = SYSTEM_HELP)]
    system: String,
}

#[derive(Args)]
struct TupleArg {
    /// Permutations separated by ';' (cycles or 1-based image lists), JSON, or a file.
    #[arg(long)]
    tuple: String,
    /// Degree, when cycle notation leaves it ambiguous.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct BudgetArg {
    /// Ceiling on (n!)^k for exhaustive passes.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct TesterArgs {
    /// A full TOML spec; the remaining flags are then ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    system: SystemArg,
    /// Degree, list "3,4" or range "3..=6".
    #[arg(long, default_value = "3")]
    n: String,
    /// Repetition count(s), comma separated.
    #[arg(long, default_value = "1")]
    s: String,
    #[arg(long, default_value = "2")]
    probe_radius: String,
    #[arg(long, default_value = "1/20")]
    delta: String,
    /// solution | planted:m | random | far[:eps], comma separated.
    #[arg(long, default_value = "solution")]
    instance: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// LSM comparison set: exhaustive | sampled:COUNT
    #[arg(long)]
    comparison: Option<String>,
    #[command(flatten)]
    budget: BudgetArg,
}

fn load_system(name: &str) -> permtest::Result<EquationSystem> {
    let path = Path::new(name);
    if path.is_file() {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("reading {name}: {e}")))?;
        EquationSystem::parse_file(&text)
    } else {
        EquationSystem::named(name)
    }
}

fn load_tuple(arg: &str, n: Option<usize>) -> permtest::Result<PermTuple> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("reading {arg}: {e}")))?;
        return PermTuple::parse_any(&text, n);
    }
    if arg.trim_start().starts_with('[') {
        return PermTuple::parse_any(arg, n);
    }
    let entries: Vec<&str> = arg.split(';').map(str::trim).filter(|e| !e.is_empty()).collect();
    PermTuple::parse_lines(&entries, n)
}

fn alphabet_for(names: Option<&str>, rank: usize) -> permtest::Result<Alphabet> {
    match names {
        Some(n) => Alphabet::new(n),
        None => Ok(Alphabet::standard(rank)),
    }
}

/// The smallest standard alphabet that spells `word`.
fn infer_alphabet(word: &str) -> permtest::Result<Alphabet> {
    let probe = Alphabet::standard(26);
    let rank = word
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .filter_map(|c| probe.names().iter().position(|&n| n == c.to_ascii_lowercase()))
        .max()
        .map_or(1, |i| i + 1);
    Ok(Alphabet::standard(rank))
}

fn budget(arg: &BudgetArg) -> EnumerationBudget {
    arg.budget
        .map(|m| EnumerationBudget { max_tuples: m as u128 })
        .unwrap_or_default()
}

fn split_list(text: &str) -> Vec<String> {
    text.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

fn parse_usizes(text: &str, what: &str) -> permtest::Result<Vec<usize>> {
    split_list(text)
        .iter()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad {what} {t:?}"))))
        .collect()
}

fn tester_spec(kind: TesterKind, a: &TesterArgs) -> anyhow::Result<ExperimentSpec> {
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec = ExperimentSpec::from_toml(&text)?;
        if spec.tester != kind {
            return Err(Error::InvalidArgument("spec names a different tester".into()).into());
        }
        return Ok(spec);
    }
    let n = if a.n.contains("..") {
        Degrees::Range(a.n.clone())
    } else {
        Degrees::List(parse_usizes(&a.n, "degree")?)
    };
    let (system, system_file) = if Path::new(&a.system.system).is_file() {
        (None, Some(PathBuf::from(&a.system.system)))
    } else {
        (Some(a.system.system.clone()), None)
    };
    let lsm = kind == TesterKind::Lsm;
    Ok(ExperimentSpec {
        system,
        system_file,
        tester: kind,
        n,
        s: parse_usizes(&a.s, "repetition")?,
        probe_radius: if lsm { parse_usizes(&a.probe_radius, "probe radius")? } else { vec![] },
        delta: if lsm { split_list(&a.delta) } else { vec![] },
        instance_model: split_list(&a.instance),
        trials: a.trials,
        seed: a.seed,
        out: None,
        enumeration_budget: a.budget.budget,
        comparison: a.comparison.clone(),
        confidence: None,
        contract: None,
    })
}

struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    fn write(&self, bytes: &[u8]) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(bytes)?;
                stdout.flush()?;
                Ok(())
            }
        }
    }

    /// A flat record: `text` as-is, JSON pretty-printed, or a one-row CSV.
    fn record(&self, format: Option<Format>, text: String, value: Value) -> anyhow::Result<()> {
        match format {
            None => self.write(format!("{text}\n").as_bytes()),
            Some(Format::Json) => self.write(format!("{}\n", serde_json::to_string_pretty(&value)?).as_bytes()),
            Some(Format::Csv) => {
                let obj = value.as_object().context("csv output needs a flat record")?;
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(obj.keys())?;
                w.write_record(obj.values().map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                }))?;
                self.write(&w.into_inner()?)
            }
        }
    }

    fn experiment(&self, format: Format, output: &ExperimentOutput) -> anyhow::Result<()> {
        match format {
            Format::Json => {
                self.write(format!("{}\n", serde_json::to_string_pretty(output)?).as_bytes())
            }
            Format::Csv => {
                let mut buf = Vec::new();
                output.write_csv(&mut buf)?;
                self.write(&buf)?;
                if let Some(p) = &self.out {
                    let meta = meta_path(p);
                    let text = serde_json::to_string_pretty(&output.meta())? + "\n";
                    fs::write(&meta, text).with_context(|| format!("writing {}", meta.display()))?;
                }
                Ok(())
            }
        }
    }
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// `Ok(false)` means the run finished but a contract violation was detected.
fn run(cli: Cli) -> anyhow::Result<bool> {
    let sink = Sink { out: cli.out.clone() };
    let format = cli.format;
    match cli.command {
        Command::Eval { word, tuple, alphabet } => {
            let t = load_tuple(&tuple.tuple, tuple.n)?;
            let a = alphabet_for(alphabet.as_deref(), t.k())?;
            let p = a.parse_word(&word)?.evaluate(&t)?;
            sink.record(
                format,
                p.cycle_string(),
                json!({ "word": a.render(&a.parse_word(&word)?), "cycles": p.cycle_string(), "images": p.one_based() }),
            )?;
        }
        Command::Reduce { word, alphabet } => {
            let a = match alphabet {
                Some(names) => Alphabet::new(&names)?,
                None => infer_alphabet(&word)?,
            };
            let w = a.parse_word(&word)?;
            sink.record(format, a.render(&w), json!({ "word": a.render(&w), "length": w.len() }))?;
        }
        Command::Solutions { system, n, list, budget: b } => {
            let sys = load_system(&system.system)?;
            let sols = enumerate_solutions(&sys, n, &budget(&b))?;
            let mut text = sols.len().to_string();
            let mut value = json!({ "system": sys.label(), "n": n, "count": sols.len() });
            if let Some(note) = sys.note() {
                value["note"] = json!(note);
            }
            if list {
                for s in sols.iter() {
                    text.push('\n');
                    text.push_str(&s.to_string());
                }
                value["solutions"] = Value::from(sols.iter().map(|s| s.to_json()).collect::<Vec<_>>());
            }
            sink.record(format, text, value)?;
        }
        Command::Defect { system, tuple } => {
            let sys = load_system(&system.system)?;
            let t = load_tuple(&tuple.tuple, tuple.n)?;
            let d = defect(&sys, &t)?;
            sink.record(
                format,
                format_rational(&d),
                json!({ "system": sys.label(), "defect": format_rational(&d), "is_solution": is_solution(&sys, &t)? }),
            )?;
        }
        Command::Dist { system, tuple, flex, eps, budget: b } => {
            let sys = load_system(&system.system)?;
            let t = load_tuple(&tuple.tuple, tuple.n)?;
            let flex = FlexBudget::parse(&flex)?;
            let eps = parse_rational(&eps)?;
            let mut cache = SolutionCache::new(sys.clone(), budget(&b));
            let d = dist_to_solutions(&mut cache, &t, flex, eps)?;
            sink.record(
                format,
                format_rational(&d.value),
                json!({
                    "system": sys.label(),
                    "flex": flex.to_string(),
                    "eps": format_rational(&eps),
                    "value": format_rational(&d.value),
                    "below_eps": d.is_below(eps),
                    "witness": d.witness.to_json(),
                    "degrees": [d.degrees.0, d.degrees.1],
                    "exhaustive": d.exhaustive,
                }),
            )?;
        }
        Command::Sas(args) => return tester(&sink, format, TesterKind::Sas, &args),
        Command::Lsm(args) => return tester(&sink, format, TesterKind::Lsm, &args),
        Command::Dsets { x, y, max_domain } => {
            let x = GSet::new(load_tuple(&x, None)?);
            let y = GSet::new(load_tuple(&y, None)?);
            let d = gset_distance_or_bound(&x, &y, &InjectionBudget { max_domain })?;
            let text = if d.exact {
                format_rational(&d.value)
            } else {
                format!("<= {} (greedy bound)", format_rational(&d.value))
            };
            sink.record(
                format,
                text,
                json!({ "value": format_rational(&d.value), "exact": d.exact, "x_size": x.size(), "y_size": y.size() }),
            )?;
        }
        Command::Marginal { tuple, a, b } => {
            let t = load_tuple(&tuple.tuple, tuple.n)?;
            let alphabet = Alphabet::standard(t.k());
            let spec = MarginalSpec::new(alphabet.parse_word_list(&a)?, alphabet.parse_word_list(&b)?)?;
            let p = random_stabilizer_marginal(&GSet::new(t), &spec)?;
            sink.record(format, format_rational(&p), json!({ "probability": format_rational(&p) }))?;
        }
        Command::Stats { tuple, probe_radius, probe } => {
            let t = load_tuple(&tuple.tuple, tuple.n)?;
            let alphabet = Alphabet::standard(t.k());
            let probe = match (probe, probe_radius) {
                (Some(words), _) => ProbeSet::parse(&alphabet, &words)?,
                (None, Some(r)) => ProbeSet::ball(t.k(), r),
                (None, None) => bail!(Error::InvalidArgument("give --probe or --probe-radius".into())),
            };
            let stats = exact_local_stats(&t, &probe)?;
            match format {
                Some(Format::Csv) => {
                    let mut buf = Vec::new();
                    stats.write_csv(&alphabet, &mut buf)?;
                    sink.write(&buf)?;
                }
                _ => sink.write(format!("{}\n", serde_json::to_string_pretty(&stats.to_json(&alphabet))?).as_bytes())?,
            }
        }
        Command::Sweep { config, seed, trials } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut spec = ExperimentSpec::from_toml(&text)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            let sink = Sink { out: sink.out.or_else(|| spec.out.clone()) };
            let output = run_experiment(spec)?;
            sink.experiment(format.unwrap_or(Format::Csv), &output)?;
            return Ok(!output.contract_violated());
        }
    }
    Ok(true)
}

fn tester(sink: &Sink, format: Option<Format>, kind: TesterKind, args: &TesterArgs) -> anyhow::Result<bool> {
    let output = run_experiment(tester_spec(kind, args)?)?;
    sink.experiment(format.unwrap_or(Format::Json), &output)?;
    Ok(!output.contract_violated())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_parse() => EXIT_PARSE,
        Some(e) if e.is_budget() => EXIT_BUDGET,
        Some(Error::NoComparisonSolutions(_)) => EXIT_BUDGET,
        _ => EXIT_OTHER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("permtest: contract violation detected");
            ExitCode::from(EXIT_CONTRACT)
        }
        Err(e) => {
            eprintln!("permtest: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! Command-line front end. Every command prints `key: value` lines.
//!
//! Exit codes: 0 yes / success, 1 no, 2 usage or input error, 3 calibration
//! budget exceeded.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bwc_mp::synthesize_bwc_mp;
use crate::bwc_sp::{safe_region, synthesize_bwc_sp, unfold};
use crate::eval::{certify, lift_strategy, project_strategy, Certificate};
use crate::expectation::{expected_mp_optimal, expected_ssp_optimal};
use crate::io::{parse_game, parse_model, parse_strategy, serialize_strategy, ParseError, ParsedModel};
use crate::model::{
    apply_model, apply_strategy, apply_strategy_until, compose_finite_memory_model, FiniteMemoryModel,
    FiniteMemoryStrategy, GameGraph, Measure, ModelError, ModelProduct, StateId, StochasticModel,
};
use crate::rational::{parse_rational, to_decimal, ExtRational, Rational};
use crate::sim::{simulate, SimError};
use crate::synthesis::{beats, Decision, Strictness, SynthesisError, SynthesisResult};
use crate::worst_case::{solve_mp_game, solve_sp_worst_case};

const DECIMALS: usize = 6;

#[derive(Parser, Debug)]
#[command(name = "bwc", version, about = "Beyond worst-case synthesis for weighted games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report as JSON to this file as well.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Worker threads for parallel phases.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal worst-case value and a memoryless strategy achieving it.
    SolveWorstCase {
        #[command(flatten)]
        input: GameArgs,
        /// Threshold: exit 1 unless the optimum beats it.
        #[arg(long)]
        mu: Option<i64>,
        /// Write the strategy here.
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Optimal expectation against the stochastic model.
    SolveExpectation {
        #[command(flatten)]
        input: ModelArgs,
        /// Threshold: exit 1 unless the optimum beats it.
        #[arg(long, value_parser = parse_rat)]
        nu: Option<Rational>,
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Beyond worst-case synthesis: worst case beats mu and expectation beats nu.
    SolveBwc {
        #[command(flatten)]
        input: ModelArgs,
        #[arg(long, allow_negative_numbers = true)]
        mu: i64,
        #[arg(long, value_parser = parse_rat, allow_negative_numbers = true)]
        nu: Rational,
        /// Mean-payoff only: allowed loss against the optimum.
        #[arg(long, value_parser = parse_rat)]
        epsilon: Option<Rational>,
        #[command(flatten)]
        strictness: StrictArgs,
        /// Mean-payoff only: largest expectation phase length tried.
        #[arg(long, default_value_t = 1024)]
        budget_k: u64,
        /// Output strategy file (default: `<game stem>.bwc.s` next to the game).
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Certifies a strategy file: exact worst case and expectation.
    Verify {
        #[command(flatten)]
        input: ModelArgs,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        mu: i64,
        #[arg(long, value_parser = parse_rat, allow_negative_numbers = true)]
        nu: Option<Rational>,
    },
    /// Monte Carlo runs of a strategy against the stochastic model.
    Simulate {
        #[command(flatten)]
        input: ModelArgs,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        runs: u64,
        /// Step limit per run.
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
    /// Dumps the cost unfolding of a shortest-path game and its safe region.
    Unfold {
        #[command(flatten)]
        input: GameArgs,
        #[arg(long)]
        mu: i64,
    },
}

#[derive(Args, Debug)]
pub struct GameArgs {
    #[arg(long)]
    pub game: PathBuf,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args, Debug)]
#[group(multiple = false)]
pub struct StrictArgs {
    /// Strict thresholds (default).
    #[arg(long)]
    pub strict: bool,
    /// Allow equality with both thresholds (shortest path only).
    #[arg(long)]
    pub non_strict: bool,
}

fn parse_rat(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: Box<ParseError> },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Synthesis(SynthesisError::CalibrationBudgetExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

/// Ordered `key: value` report.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub entries: Vec<(String, String)>,
}

impl Report {
    fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    fn rational(&mut self, key: &str, q: &Rational) {
        self.push(key, q);
        self.push(&format!("{key}_decimal"), to_decimal(q, DECIMALS));
    }

    fn ext(&mut self, key: &str, v: &ExtRational) {
        self.push(key, v);
        if let ExtRational::Finite(q) = v {
            self.push(&format!("{key}_decimal"), to_decimal(q, DECIMALS));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.entries.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect(),
        )
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

/// Game plus adversary model, composed with the adversary memory when the
/// model is a Mealy machine.
struct Loaded {
    original: GameGraph,
    measure: Measure,
    /// Game the solvers run on.
    game: GameGraph,
    model: StochasticModel,
    targets: BTreeSet<StateId>,
    composed: Option<(FiniteMemoryModel, ModelProduct)>,
}

impl Loaded {
    /// Strategy on the solver game, as seen on the original game.
    fn export(&self, s: &FiniteMemoryStrategy) -> FiniteMemoryStrategy {
        match &self.composed {
            Some((fm, prod)) => project_strategy(&self.original, fm, prod, s),
            None => s.clone(),
        }
    }

    fn import(&self, s: &FiniteMemoryStrategy) -> FiniteMemoryStrategy {
        match &self.composed {
            Some((_, prod)) => lift_strategy(&self.original, prod, s),
            None => s.clone(),
        }
    }
}

fn load_game(path: &Path) -> Result<crate::io::ParsedGame, CliError> {
    parse_game(&read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source: Box::new(source) })
}

fn load(args: &ModelArgs) -> Result<Loaded, CliError> {
    let parsed = load_game(&args.game)?;
    let model = parse_model(&read(&args.model)?, &parsed.game)
        .map_err(|source| CliError::Parse { path: args.model.clone(), source: Box::new(source) })?;
    Ok(match model {
        ParsedModel::Memoryless(m) => Loaded {
            original: parsed.game.clone(),
            measure: parsed.measure,
            game: parsed.game,
            model: m,
            targets: parsed.targets,
            composed: None,
        },
        ParsedModel::Mealy(fm) => {
            let prod = compose_finite_memory_model(&parsed.game, &fm)?;
            log::info!("composed with adversary memory: {} product states", prod.game.num_states());
            Loaded {
                original: parsed.game,
                measure: parsed.measure,
                game: prod.game.clone(),
                model: prod.model.clone(),
                targets: prod.lift_states(&parsed.targets),
                composed: Some((fm, prod)),
            }
        }
    })
}

fn load_strategy(path: &Path, g: &GameGraph) -> Result<FiniteMemoryStrategy, CliError> {
    parse_strategy(&read(path)?, g).map_err(|source| CliError::Parse { path: path.to_path_buf(), source: Box::new(source) })
}

fn certificate_lines(r: &mut Report, g: &GameGraph, c: &Certificate) {
    r.ext("worst_case", &c.worst_case_value);
    if let Some(e) = &c.expectation {
        r.ext("expectation", e);
    }
    r.push("witness", c.witness.render(g));
    r.push("certified", c.passed);
}

fn default_strategy_path(game: &Path) -> PathBuf {
    let stem = game.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "game".into());
    game.with_file_name(format!("{stem}.bwc.s"))
}

/// Runs one command; `Ok(true)` means a positive answer.
pub fn execute(cli: &Cli, r: &mut Report) -> Result<bool, CliError> {
    r.push("version", env!("CARGO_PKG_VERSION"));
    match &cli.command {
        Command::SolveWorstCase { input, mu, strategy } => {
            r.push("command", "solve-worst-case");
            let p = load_game(&input.game)?;
            r.push("measure", p.measure);
            let init = p.game.initial();
            let (value, choice) = match p.measure {
                Measure::MeanPayoff => {
                    let t = solve_mp_game(&p.game);
                    (ExtRational::Finite(t.values[init].clone()), t.p1_strategy)
                }
                Measure::ShortestPath => {
                    let t = solve_sp_worst_case(&p.game, &p.targets);
                    (t.values[init].clone(), t.p1_strategy)
                }
            };
            r.ext("worst_case_optimum", &value);
            let ok = match mu {
                Some(mu) => {
                    r.push("mu", mu);
                    let ok = beats(p.measure, &value, &Rational::from_integer((*mu).into()), Strictness::Strict);
                    r.push("decision", if ok { "yes" } else { "no" });
                    ok
                }
                None => true,
            };
            if let Some(path) = strategy {
                let s = FiniteMemoryStrategy::memoryless(&choice);
                write(path, &serialize_strategy(&s, &p.game))?;
                r.push("strategy", path.display());
            }
            Ok(ok)
        }
        Command::SolveExpectation { input, nu, strategy } => {
            r.push("command", "solve-expectation");
            let l = load(input)?;
            r.push("measure", l.measure);
            let mdp = apply_model(&l.game, &l.model)?;
            let init = l.game.initial();
            let (value, choice) = match l.measure {
                Measure::MeanPayoff => {
                    let o = expected_mp_optimal(&mdp);
                    (ExtRational::Finite(o.values[init].clone()), o.strategy)
                }
                Measure::ShortestPath => {
                    let o = expected_ssp_optimal(&mdp, &l.targets);
                    (o.values[init].clone(), o.strategy)
                }
            };
            r.ext("expectation_optimum", &value);
            let ok = match nu {
                Some(nu) => {
                    r.rational("nu", nu);
                    let ok = beats(l.measure, &value, nu, Strictness::Strict);
                    r.push("decision", if ok { "yes" } else { "no" });
                    ok
                }
                None => true,
            };
            if let Some(path) = strategy {
                let s = l.export(&FiniteMemoryStrategy::memoryless(&choice));
                write(path, &serialize_strategy(&s, &l.original))?;
                r.push("strategy", path.display());
            }
            Ok(ok)
        }
        Command::SolveBwc { input, mu, nu, epsilon, strictness, budget_k, strategy } => {
            r.push("command", "solve-bwc");
            let l = load(input)?;
            let strict = if strictness.non_strict { Strictness::NonStrict } else { Strictness::Strict };
            r.push("measure", l.measure);
            r.push("mu", mu);
            r.rational("nu", nu);
            r.push("strict", strict == Strictness::Strict);
            let res: SynthesisResult = match l.measure {
                Measure::ShortestPath => {
                    if epsilon.is_some() {
                        return Err(CliError::Usage("--epsilon only applies to mean-payoff games".into()));
                    }
                    synthesize_bwc_sp(&l.game, &l.model, &l.targets, *mu, nu, strict)?
                }
                Measure::MeanPayoff => {
                    if strict == Strictness::NonStrict {
                        return Err(CliError::Usage("--non-strict is only supported for shortest-path games".into()));
                    }
                    synthesize_bwc_mp(&l.game, &l.model, *mu, nu, epsilon.as_ref(), *budget_k)?
                }
            };
            r.push("decision", res.decision);
            r.ext("worst_case_optimum", &res.worst_case_optimum);
            if let Some(e) = &res.expectation_optimum {
                r.ext("expectation_optimum", e);
            }
            for (k, v) in &res.details {
                r.push(k, v);
            }
            if let (Some(s), Some(c)) = (&res.strategy, &res.certificate) {
                certificate_lines(r, &l.game, c);
                if !res.details.iter().any(|(k, _)| k == "memory_size") {
                    r.push("memory_size", s.memory_size());
                }
                if let Some(b) = res.memory_bound {
                    r.push("memory_bound", b);
                }
                let path = strategy.clone().unwrap_or_else(|| default_strategy_path(&input.game));
                write(&path, &serialize_strategy(&l.export(s), &l.original))?;
                r.push("strategy", path.display());
            }
            Ok(res.decision == Decision::Yes)
        }
        Command::Verify { input, strategy, mu, nu } => {
            r.push("command", "verify");
            let l = load(input)?;
            r.push("measure", l.measure);
            r.push("mu", mu);
            if let Some(nu) = nu {
                r.rational("nu", nu);
            }
            let s = l.import(&load_strategy(strategy, &l.original)?);
            r.push("memory_size", s.memory_size());
            let c = certify(&l.game, &l.model, &s, l.measure, &l.targets, *mu, nu.as_ref())?;
            certificate_lines(r, &l.game, &c);
            Ok(c.passed)
        }
        Command::Simulate { input, strategy, seed, runs, horizon } => {
            r.push("command", "simulate");
            let l = load(input)?;
            r.push("measure", l.measure);
            let s = l.import(&load_strategy(strategy, &l.original)?);
            let mdp = apply_model(&l.game, &l.model)?;
            let mc = match l.measure {
                Measure::MeanPayoff => apply_strategy(&mdp, &s)?,
                Measure::ShortestPath => apply_strategy_until(&mdp, &s, &l.targets)?,
            };
            let sum = simulate(&mc, l.measure, &l.targets, *runs, *horizon, *seed)?;
            r.push("seed", seed);
            r.push("prng", sum.prng);
            r.push("runs", sum.runs);
            r.push("horizon", horizon);
            r.push("censored", sum.censored);
            r.rational("mean", &sum.mean);
            r.push("mean_is_lower_bound", sum.mean_is_lower_bound);
            r.rational("variance", &sum.variance);
            r.push("std_error", format!("{:.6}", sum.std_error()));
            if let Some(min) = &sum.min {
                r.rational("min", min);
            }
            if let Some(max) = &sum.max {
                r.rational("max", max);
            }
            let hist: Vec<String> = sum.histogram.iter().map(|(v, n)| format!("{v}={n}")).collect();
            r.push("histogram", hist.join(" "));
            Ok(true)
        }
        Command::Unfold { input, mu } => {
            r.push("command", "unfold");
            let p = load_game(&input.game)?;
            if p.measure != Measure::ShortestPath {
                return Err(CliError::Usage("unfold needs a shortest-path game".into()));
            }
            if *mu < 1 {
                return Err(CliError::Usage("--mu must be positive".into()));
            }
            let u = unfold(&p.game, *mu, &p.targets);
            let safe = safe_region(&u);
            let names = |keep: &dyn Fn(StateId) -> bool| {
                (0..u.game.num_states()).filter(|&s| keep(s)).map(|s| u.game.name(s).to_string()).collect::<Vec<_>>().join(" ")
            };
            r.push("mu", mu);
            r.push("unfolded_states", u.game.num_states());
            r.push("unfolded_edges", u.game.num_edges());
            r.push("states", names(&|_| true));
            r.push("doubles", names(&|s| u.double[s]));
            r.push("safe_region_states", safe.region.len());
            r.push("safe_region", names(&|s| safe.region.contains(&s)));
            r.push("excluded", names(&|s| !safe.region.contains(&s)));
            r.push("initial_safe", safe.contains_initial(&u));
            Ok(safe.contains_initial(&u))
        }
    }
}

/// Parses `args`, runs the command and prints the report to `out`. Returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::debug!("thread pool already set: {e}");
        }
    }
    let started = Instant::now();
    let mut report = Report::default();
    let result = execute(&cli, &mut report);
    report.push("elapsed_ms", started.elapsed().as_millis());
    let code = match &result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            report.push("error", e);
            e.exit_code()
        }
    };
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    let _ = write!(out, "{report}");
    if let Some(path) = &cli.report {
        let text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: {}: {e}", path.display());
            return 2;
        }
    }
    code
}

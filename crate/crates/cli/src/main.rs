//! `twosheet`: decisions, future cones, witnesses and Monte-Carlo cross-checks
//! for two-sheeted space-time models described in a TOML file.
//!
//! Exit status: 0 on success, 1 on bad input or a violated precondition,
//! 2 when the library contradicts itself (oracle against decision, failed
//! witness audit or self-test).

mod output;
mod selftest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twosheet_core::causality::field_warnings;
use twosheet_core::cone::{check_points, min_eigenvalue_at, state_difference, CausalElementPair};
use twosheet_core::geometry::{max_weighted_length_with, Strategy};
use twosheet_core::io::{self as tio, fmt_num, json_num};
use twosheet_core::oracle::{mc_check, OracleSummary, SampledElement};
use twosheet_core::{
    decide_with, future_cone, make_representation, run_oracle, sample_causal_elements, witness_element, Grid, Mass,
    Metric, MixedState, OracleConfig, SpacetimeModel, VerdictKind,
};

use output::{write_atomic, Sink};

const THREADS_VAR: &str = "TWOSHEET_THREADS";

#[derive(Parser, Debug)]
#[command(name = "twosheet", version, about = "Causal structure of two-sheeted space-times")]
#[command(args_conflicts_with_subcommands = true, arg_required_else_help = true)]
struct Cli {
    /// Print the normalized model file and exit.
    #[arg(long, value_name = "FILE")]
    dump_model: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether one state can influence another (JSON record).
    Decide(DecideArgs),
    /// Largest weighted proper time between two points.
    Distance(DistanceArgs),
    /// Largest reachable internal weight over a grid (CSV surface).
    Cone(ConeArgs),
    /// Build and audit the separating element along a curve (CSV).
    Witness(WitnessArgs),
    /// Cross-check random decisions against sampled causal elements.
    Oracle(OracleArgs),
    /// Run the built-in identity, certificate and spinor suites.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct ModelArg {
    /// Model file (TOML).
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum StrategyArg {
    Auto,
    ClosedForm,
    Grid,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::ClosedForm => Strategy::ClosedForm,
            StrategyArg::Grid => Strategy::Grid,
        }
    }
}

#[derive(Args, Debug)]
struct DecideArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Source point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    p: Vec<f64>,
    /// Internal weight at the source.
    #[arg(long)]
    xi: f64,
    /// Target point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    q: Vec<f64>,
    /// Internal weight at the target.
    #[arg(long)]
    phi: f64,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    /// Also check the decision against this many sampled elements.
    #[arg(long, default_value_t = 0)]
    elements: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    p: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    q: Vec<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConeArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    p: Vec<f64>,
    #[arg(long)]
    xi: f64,
    /// Points per axis: one value for all axes or one per axis.
    /// Defaults to the model's certification resolution.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<usize>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WitnessArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Curve table with header `t,x0,...`.
    #[arg(long, value_name = "FILE")]
    curve: PathBuf,
    #[arg(long)]
    xi: f64,
    #[arg(long)]
    phi: f64,
    /// Also certify on a tube of this coordinate radius around the curve
    /// (flat models with constant mass only).
    #[arg(long)]
    tube: Option<f64>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Random state pairs to check.
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    /// Sampled causal elements.
    #[arg(long, default_value_t = 1000)]
    elements: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for element tables of contradicting pairs.
    #[arg(long, value_name = "DIR", default_value = ".")]
    artifacts: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

/// The library disagreed with itself; exit status 2.
#[derive(Debug)]
struct Contradiction(String);

impl std::fmt::Display for Contradiction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Contradiction {}

fn main() -> ExitCode {
    // clap's own usage errors would exit with 2, which is reserved here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Contradiction>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| anyhow!("{THREADS_VAR} must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    if let Some(path) = cli.dump_model {
        let model = load_model(&path)?;
        print!("{}", tio::dump_model(&model));
        return Ok(());
    }
    match cli.command {
        Some(Command::Decide(a)) => cmd_decide(a),
        Some(Command::Distance(a)) => cmd_distance(a),
        Some(Command::Cone(a)) => cmd_cone(a),
        Some(Command::Witness(a)) => cmd_witness(a),
        Some(Command::Oracle(a)) => cmd_oracle(a),
        Some(Command::Selftest(a)) => cmd_selftest(a),
        None => bail!("no subcommand given"),
    }
}

fn load_model(path: &Path) -> Result<SpacetimeModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let model = tio::parse_model(&text).with_context(|| format!("in {}", path.display()))?;
    for w in field_warnings(&model) {
        eprintln!("warning: {w}");
    }
    Ok(model)
}

fn json_bytes(value: &Value, buf: &mut Vec<u8>) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *buf, value)?;
    buf.push(b'\n');
    Ok(())
}

fn cmd_decide(a: DecideArgs) -> Result<()> {
    let model = load_model(&a.model.model)?;
    let from = MixedState::new(a.p, a.xi)?;
    let to = MixedState::new(a.q, a.phi)?;
    let decision = decide_with(&from, &to, &model, a.strategy.into())?;
    let verdict = if a.elements > 0 {
        let rep = make_representation(model.dimension)?;
        let report = sample_causal_elements(&model, &rep, &OracleConfig::new(a.elements, a.seed))?;
        Some(mc_check(&from, &to, &report.elements, &decision, &model))
    } else {
        None
    };
    let record = tio::decision_json(&from, &to, &decision, verdict.as_ref());
    Sink::new(a.out).emit(|buf| json_bytes(&record, buf))?;
    if verdict.is_some_and(|v| v.kind == VerdictKind::Contradiction) {
        return Err(Contradiction("a sampled causal element violates the decision".into()).into());
    }
    Ok(())
}

fn cmd_distance(a: DistanceArgs) -> Result<()> {
    let model = load_model(&a.model.model)?;
    let opt = max_weighted_length_with(&a.p, &a.q, &model, a.strategy.into())?;
    let record = json!({
        "p": a.p.iter().map(|v| json_num(*v)).collect::<Vec<_>>(),
        "q": a.q.iter().map(|v| json_num(*v)).collect::<Vec<_>>(),
        "length": json_num(opt.value),
        "method": opt.method.as_str(),
    });
    Sink::new(a.out).emit(|buf| json_bytes(&record, buf))
}

fn cone_grid(model: &SpacetimeModel, counts: &[usize]) -> Result<Grid> {
    let n = model.dimension;
    let counts = match counts {
        [] => vec![model.settings.certification_points; n],
        [c] => vec![*c; n],
        c if c.len() == n => c.to_vec(),
        c => bail!("--grid takes 1 or {n} values, got {}", c.len()),
    };
    Ok(Grid::new(model.domain.lower.clone(), model.domain.upper.clone(), counts)?)
}

fn cmd_cone(a: ConeArgs) -> Result<()> {
    let model = load_model(&a.model.model)?;
    let state = MixedState::new(a.p, a.xi)?;
    let grid = cone_grid(&model, &a.grid)?;
    let surface = future_cone(&state, &model, &grid)?;
    eprintln!("method: {}", surface.method.as_str());
    Sink::new(a.out).emit(|buf| tio::write_surface(buf, &surface, model.dimension))
}

fn flat_constant(model: &SpacetimeModel) -> bool {
    matches!(model.metric, Metric::Minkowski) && matches!(model.mass, Mass::Constant(_))
}

fn cmd_witness(a: WitnessArgs) -> Result<()> {
    let model = load_model(&a.model.model)?;
    let file = fs::File::open(&a.curve).with_context(|| format!("reading {}", a.curve.display()))?;
    let curve = tio::read_curve(std::io::BufReader::new(file), model.dimension)
        .with_context(|| format!("in {}", a.curve.display()))?;
    let rep = make_representation(model.dimension)?;
    let witness = witness_element(&curve, a.xi, a.phi, &model)?;
    let rows = witness.audit(&model, &rep)?;
    Sink::new(a.out).emit(|buf| tio::write_witness(buf, &rows))?;

    let from = MixedState::new(curve.start().to_vec(), a.xi)?;
    let to = MixedState::new(curve.end().to_vec(), a.phi)?;
    let separation = state_difference(&witness, &from, &to);
    let min_eig = rows.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min);
    let discrepancy = rows.iter().map(|r| r.closed_form_discrepancy).fold(0.0, f64::max);
    let failed = rows.iter().filter(|r| !r.passed).count();
    let mut err = std::io::stderr().lock();
    writeln!(err, "sigma: {}", fmt_num(witness.sigma()))?;
    writeln!(err, "epsilon: {}", fmt_num(witness.epsilon()))?;
    writeln!(err, "nodes: {} ({failed} failed)", rows.len())?;
    writeln!(err, "min eigenvalue: {}", fmt_num(min_eig))?;
    writeln!(err, "max closed-form discrepancy: {}", fmt_num(discrepancy))?;
    writeln!(err, "separation: {}", fmt_num(separation))?;
    let mut tube_failed = false;
    if let Some(radius) = a.tube {
        if !flat_constant(&model) {
            bail!("--tube needs a flat model with constant mass");
        }
        let points: Vec<Vec<f64>> = witness
            .tube_points(radius)
            .into_iter()
            .filter(|x| model.domain.contains(x))
            .collect();
        let check = check_points(&witness, &model, &rep, &points)?;
        writeln!(
            err,
            "tube {}: {} points, min eigenvalue {}",
            fmt_num(radius),
            check.points,
            fmt_num(check.min_eigenvalue)
        )?;
        tube_failed = !check.passed;
    }
    if failed > 0 || tube_failed {
        return Err(Contradiction("witness element failed its own audit".into()).into());
    }
    Ok(())
}

/// Samples an element over its certification grid for post-mortem plotting.
fn element_table(element: &SampledElement, model: &SpacetimeModel) -> Result<Vec<u8>> {
    let rep = make_representation(model.dimension)?;
    let axes = ["t", "x", "y", "z"];
    let mut buf = Vec::new();
    writeln!(buf, "{},a,b,min_eigenvalue", axes[..model.dimension].join(","))?;
    for x in element.certified_grid.points() {
        let s = element.pair.sample(&x);
        let lam = min_eigenvalue_at(&element.pair, &x, model, &rep)?;
        let mut cells: Vec<String> = x.iter().map(|v| fmt_num(*v)).collect();
        cells.extend([fmt_num(s.a), fmt_num(s.b), fmt_num(lam)]);
        writeln!(buf, "{}", cells.join(","))?;
    }
    Ok(buf)
}

fn summary_json(summary: &OracleSummary, config: &OracleConfig) -> Value {
    let contradictions: Vec<Value> = summary
        .contradictions()
        .map(|o| tio::decision_json(&o.from, &o.to, &o.decision, Some(&o.verdict)))
        .collect();
    let unrelated_with_base = |o: &&twosheet_core::oracle::PairOutcome| !o.decision.related && o.decision.base_related;
    let min_margin = summary
        .outcomes
        .iter()
        .filter(unrelated_with_base)
        .filter_map(|o| o.verdict.witness_value)
        .map(|v| -v)
        .fold(f64::INFINITY, f64::min);
    json!({
        "seed": config.seed,
        "elements": summary.elements,
        "discarded": summary.discarded,
        "pairs": summary.outcomes.len(),
        "related": summary.outcomes.iter().filter(|o| o.decision.related).count(),
        "consistent": summary.count(VerdictKind::Consistent),
        "contradiction": summary.count(VerdictKind::Contradiction),
        "separated": summary.count(VerdictKind::Separated),
        "inconclusive": summary.count(VerdictKind::Inconclusive),
        "min_witness_margin": json_num(min_margin),
        "contradictions": contradictions,
    })
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let model = load_model(&a.model.model)?;
    let rep = make_representation(model.dimension)?;
    let config = OracleConfig::new(a.elements, a.seed);
    let (summary, report) = run_oracle(&model, &rep, a.pairs, &config)?;
    for d in &report.discarded {
        eprintln!("discarded element {}: {}", d.index, d.reason);
    }
    let record = summary_json(&summary, &config);
    Sink::new(a.out).emit(|buf| json_bytes(&record, buf))?;
    let bad: Vec<_> = summary.contradictions().collect();
    if bad.is_empty() {
        return Ok(());
    }
    fs::create_dir_all(&a.artifacts)?;
    for (k, o) in bad.iter().enumerate() {
        let Some(idx) = o.verdict.worst_element else { continue };
        if let Some(e) = report.elements.iter().find(|e| e.index == idx) {
            let path = a.artifacts.join(format!("contradiction-{k}-element-{idx}.csv"));
            write_atomic(&path, &element_table(e, &model)?)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Err(Contradiction(format!("{} decisions contradicted by sampled elements", bad.len())).into())
}

fn cmd_selftest(a: SelftestArgs) -> Result<()> {
    let suites = selftest::run(a.seed);
    let mut failed = 0;
    for s in &suites {
        println!("{} {}: {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
        failed += usize::from(!s.passed);
    }
    if failed > 0 {
        return Err(Contradiction(format!("{failed} self-test suites failed")).into());
    }
    Ok(())
}

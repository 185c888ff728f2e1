//! `popshm`: generate truss populations, label them with finite elements,
//! train a graph network on the first natural frequency and evaluate it.

mod data;
mod manifest;
mod plot;

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use popshm::fem::first_natural_frequency;
use popshm::synth::{generate_labeled_dataset, LabeledSample, SynthConfig};
use popshm::training::{evaluate, train_with, Evaluation};
use popshm::{Checkpoint, Dataset, GraphDims, History, TrainConfig};

use manifest::ManifestBuilder;

#[derive(Debug, Parser)]
#[command(name = "popshm", version, about = "Truss population frequency regression with graph networks")]
struct Cli {
    /// Seed for every random choice of the subcommand.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for generation, labelling and evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled truss population as JSON lines.
    Gen(GenArgs),
    /// Recompute the frequency label of every sample in a dataset.
    Label(LabelArgs),
    /// Train a model and write its checkpoint and learning history.
    Train(TrainArgs),
    /// Report the NMSE of a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Evaluate a checkpoint on a freshly generated population.
    Extrapolate(ExtrapolateArgs),
    /// Draw a learning history as SVG.
    Plot(PlotArgs),
    /// Run the built-in numerical checks.
    Selftest,
}

#[derive(Debug, Clone, Args)]
struct PopulationArgs {
    #[arg(long, default_value_t = 10)]
    nodes_min: usize,
    #[arg(long, default_value_t = 20)]
    nodes_max: usize,
    /// Number of member types; more than one adds temperature dependence.
    #[arg(long)]
    types: Option<usize>,
    #[arg(long)]
    temp_min: Option<f64>,
    #[arg(long)]
    temp_max: Option<f64>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    count: usize,
    #[command(flatten)]
    population: PopulationArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LabelArgs {
    #[arg(long)]
    input: PathBuf,
    /// Number of member types the dataset was generated with.
    #[arg(long, default_value_t = 1)]
    types: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// JSON training configuration; unspecified fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    val: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    out_checkpoint: PathBuf,
    #[arg(long)]
    out_history: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Optional JSON report with predictions and residuals.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtrapolateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[command(flatten)]
    population: PopulationArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    history: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// A failed run. Usage failures exit with 1, runtime failures with 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn io(path: &Path, e: io::Error) -> Self {
        Failure::Runtime(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(
    serde_json::Error,
    popshm::TrainError,
    popshm::synth::SynthError,
    popshm::fem::FemError
);

struct Context {
    argv: Vec<String>,
    seed: Option<u64>,
    quiet: bool,
}

impl Context {
    fn say(&self, msg: impl fmt::Display) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn population_config(p: &PopulationArgs, types: usize, seed: u64) -> Result<SynthConfig, Failure> {
    let mut cfg = SynthConfig::with_types(types).nodes(p.nodes_min, p.nodes_max).seed(seed);
    if let Some(t) = p.temp_min {
        cfg.temperature.0 = t;
    }
    if let Some(t) = p.temp_max {
        cfg.temperature.1 = t;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Member type count implied by the edge attribute width.
fn types_for(dims: GraphDims) -> usize {
    if dims.edge <= 3 {
        1
    } else {
        dims.edge - 3
    }
}

fn gen(ctx: &Context, args: &GenArgs) -> Result<(), Failure> {
    let seed = ctx.seed.unwrap_or(0);
    let types = args.population.types.unwrap_or(1);
    if types == 0 {
        return Err(Failure::Usage("--types must be at least 1".into()));
    }
    let cfg = population_config(&args.population, types, seed)?;
    let mut m = ManifestBuilder::new(&ctx.argv, "gen");
    m.config(&cfg)?;
    m.seed("population", seed);
    let samples = generate_labeled_dataset(&cfg, args.count)?;
    m.write(&args.out, &data::to_jsonl(&samples)?)?;
    m.finish()?;
    ctx.say(format_args!("wrote {} samples to {}", samples.len(), args.out.display()));
    Ok(())
}

fn label(ctx: &Context, args: &LabelArgs) -> Result<(), Failure> {
    if args.types == 0 {
        return Err(Failure::Usage("--types must be at least 1".into()));
    }
    let cfg = SynthConfig::with_types(args.types);
    let mut m = ManifestBuilder::new(&ctx.argv, "label");
    m.config(&(&cfg.materials, &cfg.mass))?;
    let (samples, bytes) = data::read_samples(&args.input)?;
    m.input(&args.input, &bytes);
    let relabelled: Vec<LabeledSample> = samples
        .into_par_iter()
        .map(|mut s| {
            s.omega1 = first_natural_frequency(&s.truss, s.temperature, &cfg.materials, &cfg.mass)?.omega1;
            Ok(s)
        })
        .collect::<Result<_, popshm::fem::FemError>>()?;
    m.write(&args.out, &data::to_jsonl(&relabelled)?)?;
    m.finish()?;
    ctx.say(format_args!("labelled {} samples", relabelled.len()));
    Ok(())
}

fn load_dataset(m: &mut ManifestBuilder, path: &Path) -> Result<Dataset, Failure> {
    let (samples, bytes) = data::read_samples(path)?;
    m.input(path, &bytes);
    Ok(Dataset::from_samples(&samples))
}

fn load_checkpoint(m: &mut ManifestBuilder, path: &Path) -> Result<Checkpoint, Failure> {
    let bytes = data::read(path)?;
    m.input(path, &bytes);
    serde_json::from_slice(&bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn train(ctx: &Context, args: &TrainArgs) -> Result<(), Failure> {
    let mut m = ManifestBuilder::new(&ctx.argv, "train");
    let mut cfg = match &args.config {
        Some(path) => {
            let bytes = data::read(path)?;
            m.input(path, &bytes);
            serde_json::from_slice::<TrainConfig>(&bytes)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => TrainConfig::default(),
    };
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        cfg.epochs = epochs;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    m.config(&cfg)?;
    m.seed("model", cfg.seed);

    let train_set = load_dataset(&mut m, &args.train)?;
    let val_set = load_dataset(&mut m, &args.val)?;
    let test_set = load_dataset(&mut m, &args.test)?;
    let dims = train_set.dims().ok_or_else(|| Failure::Runtime("training set is empty".into()))?;
    let model = cfg.build_model::<f64>(dims)?;
    ctx.say(format_args!(
        "training {} parameters on {} samples",
        model.param_count(),
        train_set.len()
    ));
    let outcome = train_with(model, &train_set, &val_set, &test_set, &cfg, |r| {
        ctx.say(format_args!(
            "epoch {:>4}  train {:>8.3}  val {:>8.3}  test {:>8.3}  {:>7.1} s",
            r.epoch, r.train_nmse, r.val_nmse, r.test_nmse, r.seconds
        ))
    })?;
    m.write(&args.out_checkpoint, serde_json::to_string(&outcome.best)?.as_bytes())?;
    m.write(&args.out_history, outcome.history.to_csv().as_bytes())?;
    m.finish()?;
    let test = evaluate(&outcome.best, &test_set)?;
    println!(
        "best epoch {}: val NMSE {:.4}%, test NMSE {:.4}%",
        outcome.best.epoch, outcome.best.val_nmse, test.nmse
    );
    Ok(())
}

fn check_dims(ckpt: &Checkpoint, data: &Dataset) -> Result<(), Failure> {
    match data.dims() {
        Some(d) if d != ckpt.input_dims() => Err(Failure::Runtime(format!(
            "DimensionMismatch: checkpoint expects node/edge/global widths {}/{}/{}, data has {}/{}/{}",
            ckpt.input_dims().node,
            ckpt.input_dims().edge,
            ckpt.input_dims().global,
            d.node,
            d.edge,
            d.global
        ))),
        _ => Ok(()),
    }
}

fn report(m: &mut ManifestBuilder, out: Option<&Path>, e: &Evaluation) -> Result<(), Failure> {
    if let Some(path) = out {
        m.write(path, serde_json::to_string_pretty(e)?.as_bytes())?;
    }
    Ok(())
}

fn eval(ctx: &Context, args: &EvalArgs) -> Result<(), Failure> {
    let mut m = ManifestBuilder::new(&ctx.argv, "eval");
    let ckpt = load_checkpoint(&mut m, &args.checkpoint)?;
    let data = load_dataset(&mut m, &args.data)?;
    check_dims(&ckpt, &data)?;
    let e = evaluate(&ckpt, &data)?;
    report(&mut m, args.out.as_deref(), &e)?;
    m.finish()?;
    println!("NMSE {:.4}% on {} samples", e.nmse, data.len());
    Ok(())
}

fn extrapolate(ctx: &Context, args: &ExtrapolateArgs) -> Result<(), Failure> {
    let mut m = ManifestBuilder::new(&ctx.argv, "extrapolate");
    let ckpt = load_checkpoint(&mut m, &args.checkpoint)?;
    let seed = ctx.seed.unwrap_or(0);
    let types = args.population.types.unwrap_or_else(|| types_for(ckpt.input_dims()));
    let cfg = population_config(&args.population, types, seed)?;
    if cfg.encoding.node_width() != ckpt.input_dims().node
        || cfg.encoding.edge_width() != ckpt.input_dims().edge
        || cfg.encoding.global_width() != ckpt.input_dims().global
    {
        return Err(Failure::Runtime(format!(
            "DimensionMismatch: {types} member type(s) do not match the checkpoint inputs"
        )));
    }
    m.config(&cfg)?;
    m.seed("population", seed);
    let e = popshm::training::extrapolate(&ckpt, &cfg, args.count)?;
    report(&mut m, args.out.as_deref(), &e)?;
    m.finish()?;
    println!(
        "NMSE {:.4}% on {} fresh trusses with {}-{} nodes",
        e.nmse, args.count, args.population.nodes_min, args.population.nodes_max
    );
    Ok(())
}

fn plot(ctx: &Context, args: &PlotArgs) -> Result<(), Failure> {
    let mut m = ManifestBuilder::new(&ctx.argv, "plot");
    let bytes = data::read(&args.history)?;
    m.input(&args.history, &bytes);
    let history = History::from_csv(&String::from_utf8_lossy(&bytes))?;
    m.write(&args.out, plot::history_svg(&history).as_bytes())?;
    m.finish()?;
    ctx.say(format_args!("plotted {} epochs to {}", history.len(), args.out.display()));
    Ok(())
}

fn selftest(ctx: &Context) -> Result<(), Failure> {
    let checks = popshm::selftest::run();
    let failed = checks.iter().filter(|c| !c.passed).count();
    let mut out = io::stdout().lock();
    for c in &checks {
        if !ctx.quiet || !c.passed {
            let _ = writeln!(out, "{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
        }
    }
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), Failure> {
    let threads = match cli.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let ctx = Context {
        argv,
        seed: cli.seed,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Gen(a) => gen(&ctx, a),
        Command::Label(a) => label(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Extrapolate(a) => extrapolate(&ctx, a),
        Command::Plot(a) => plot(&ctx, a),
        Command::Selftest => selftest(&ctx),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nUsage: popshm [OPTIONS] <COMMAND>\nRun `popshm --help` for details.");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

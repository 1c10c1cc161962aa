//! `prefspace`: generate scenes, score datasets and run benchmark sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prefspace::datagen::{self, SceneKind, SyntheticSpec};
use prefspace::eval::{self, MethodId, ScoreSetup};
use prefspace::models::{ModelKind, StructureModel};
use prefspace::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "prefspace", version, about = "Structure-based anomaly detection in the preference space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled synthetic scene as CSV plus a structures sidecar.
    Generate(GenerateArgs),
    /// Score every point of a dataset and write `index,score,label` CSV.
    Score(ScoreArgs),
    /// Run a benchmark sweep described by a JSON config.
    Bench(BenchArgs),
    /// Estimate the noise level of a dataset from its ground-truth structures.
    Estimate(EstimateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lines,
    Circles,
    Mixed,
}

impl From<KindArg> for SceneKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lines => SceneKind::Lines,
            KindArg::Circles => SceneKind::Circles,
            KindArg::Mixed => SceneKind::Mixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Line,
    Circle,
}

impl From<FamilyArg> for ModelKind {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Line => ModelKind::Line,
            FamilyArg::Circle => ModelKind::Circle,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "lines")]
    kind: KindArg,
    #[arg(long, default_value_t = 2)]
    structures: usize,
    /// Genuine points per structure.
    #[arg(long, default_value_t = 125)]
    points: usize,
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    /// Fraction of anomalies in the output, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    /// Half-width of the square holding the structures.
    #[arg(long, default_value_t = 2.5)]
    extent: f64,
    #[arg(long, env = "PREFSPACE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Dataset CSV (`x,y,label`).
    data: PathBuf,
    #[arg(long, default_value = "rhf", value_parser = parse_method)]
    method: MethodId,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 256)]
    psi: usize,
    #[arg(long, default_value_t = 4)]
    branching: usize,
    /// Pool size as a multiple of the number of points.
    #[arg(long, default_value_t = 10)]
    pool_mult: usize,
    /// Inlier threshold multiplier: `ε = k·σ`.
    #[arg(long, default_value_t = 3.0)]
    k: f64,
    /// Noise level; read from the structures sidecar when omitted.
    #[arg(long)]
    sigma: Option<f64>,
    /// Model families for the pool; taken from the sidecar when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    families: Vec<FamilyArg>,
    #[arg(long, env = "PREFSPACE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON sweep config.
    config: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write one scores CSV per (method, b, run) here.
    #[arg(long)]
    scores_dir: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EstimateArgs {
    data: PathBuf,
    /// Structures JSON; defaults to the sidecar of the dataset.
    #[arg(long)]
    structures: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<MethodId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Format { .. } | Error::Json(_) => EXIT_IO,
        Error::DimensionMismatch { .. } => EXIT_INTERNAL,
        _ => EXIT_USAGE,
    }
}

fn load_structures(data: &Path) -> prefspace::Result<Option<Vec<StructureModel>>> {
    let side = datagen::structures_path(data);
    if side.exists() {
        datagen::load_structures(&side).map(Some)
    } else {
        Ok(None)
    }
}

fn generate(args: GenerateArgs) -> prefspace::Result<()> {
    let spec = SyntheticSpec {
        kind: args.kind.into(),
        structures: args.structures,
        points_per_structure: args.points,
        sigma: args.sigma,
        anomaly_ratio: args.ratio,
        extent: args.extent,
        seed: args.seed,
    };
    let scene = datagen::generate(&spec)?;
    datagen::save_csv(&scene.data, &args.output)?;
    datagen::save_structures(&scene.structures, &datagen::structures_path(&args.output))?;
    println!(
        "n={} anomalies={} seed={} -> {}",
        scene.data.len(),
        scene.data.anomaly_count(),
        args.seed,
        args.output.display()
    );
    Ok(())
}

fn score(args: ScoreArgs) -> prefspace::Result<()> {
    let data = datagen::load_csv(&args.data)?;
    let structures = load_structures(&args.data)?;
    let sigma = match (args.sigma, &structures) {
        (Some(s), _) => s,
        (None, Some(st)) => eval::estimate_sigma(&data, st)?,
        (None, None) => {
            return Err(Error::config(format!(
                "no --sigma given and no structures file at {}",
                datagen::structures_path(&args.data).display()
            )))
        }
    };
    let families = if !args.families.is_empty() {
        args.families.iter().map(|&f| f.into()).collect()
    } else if let Some(st) = &structures {
        eval::families_of(st)
    } else {
        vec![ModelKind::Line]
    };
    let setup = ScoreSetup {
        method: args.method,
        trees: args.trees,
        psi: args.psi,
        branching: args.branching,
        pool_mult: args.pool_mult,
        k: args.k,
        sigma,
        families,
        seed: args.seed,
    };
    let run = eval::score_once(&data, &setup)?;
    eval::write_scores_csv(&args.output, &run.scores, data.labels())?;
    let auc = match eval::roc_auc(&run.scores, data.labels()) {
        Ok(a) => format!("{a:.4}"),
        Err(_) => "n/a".into(),
    };
    println!(
        "method={} n={} m={} sigma={sigma:.5} auc={auc} train={:.3}s test={:.3}s -> {}",
        args.method,
        data.len(),
        run.pool_size,
        run.train_time,
        run.test_time,
        args.output.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> prefspace::Result<()> {
    let mut cfg = eval::load_sweep_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let outcome = eval::run_sweep_with_progress(&cfg, &|r| {
        eprintln!(
            "{:<6} b={:<4} auc={:.4} train={:.3}s test={:.3}s",
            r.method, r.b, r.auc, r.train_time, r.test_time
        );
    })?;
    eval::save_report(&outcome.report, &args.output)?;
    if let Some(dir) = &args.scores_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for cell in &outcome.scores {
            let path = dir.join(eval::scores_file_name(cell.method, cell.b, cell.run));
            eval::write_scores_csv(&path, &cell.scores, &outcome.labels)?;
        }
    }
    println!(
        "{} cells x {} runs -> {}",
        outcome.report.aggregates.len(),
        cfg.runs,
        args.output.display()
    );
    Ok(())
}

fn estimate(args: EstimateArgs) -> prefspace::Result<()> {
    let data = datagen::load_csv(&args.data)?;
    let path = args.structures.unwrap_or_else(|| datagen::structures_path(&args.data));
    let structures = datagen::load_structures(&path)?;
    println!("{}", eval::estimate_sigma(&data, &structures)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| match cli.command {
        Command::Generate(a) => generate(a),
        Command::Score(a) => score(a),
        Command::Bench(a) => bench(a),
        Command::Estimate(a) => estimate(a),
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}

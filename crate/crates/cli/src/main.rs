use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use omx_core::datagen::{gen_task, SynthSpec};
use omx_core::eval::{benchmark_run, render_bar_chart, BenchmarkSettings, EvalReport, Metric, Task};
use omx_core::io::{
    load_model, read_labels, read_matrix, render_dense, save_model, write_atomic, write_labels, write_matrix,
    ModelFile, RunConfig, TaskSource,
};
use omx_core::matrix::MatrixData;
use omx_core::model::{Learner, ModelKind, Regressor};
use omx_core::preprocess::{log1p_transform, Projector};
use omx_core::{Error, RngStream};

#[derive(Parser)]
#[command(name = "omx", version, about = "Multi-omics modality translation with ESN, ELM and random forest regressors")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic task: features.txt, targets.csv, groups.txt.
    Datagen(DatagenArgs),
    /// Fit one model and save it.
    Fit(FitArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
    /// Grouped K-fold benchmark of every configured model on every task.
    Benchmark(BenchmarkArgs),
    /// Render correlation.svg and mse.svg from results.csv.
    Report(ReportArgs),
}

#[derive(Args)]
struct DatagenArgs {
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Starting point: desk, multiome or citeseq.
    #[arg(long, default_value = "desk")]
    preset: String,
    /// Scale-down factor for the multiome and citeseq presets.
    #[arg(long, default_value_t = 50)]
    scale: usize,
    #[arg(long)]
    n_cells: Option<usize>,
    #[arg(long)]
    d_input: Option<usize>,
    #[arg(long)]
    d_output: Option<usize>,
    #[arg(long)]
    latent_rank: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    n_groups: Option<usize>,
    #[arg(long)]
    sparsity: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

/// `key=value` settings that override the config file.
#[derive(Args)]
struct Overrides {
    /// Run config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set elm.hidden_size=512`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, short)]
    model: ModelKind,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    targets: PathBuf,
    /// Output model file.
    #[arg(long, short)]
    out: PathBuf,
    /// Truncated-SVD projection size; 0 trains on the raw features.
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    log1p: bool,
    /// CSV inputs start with a header row.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `fit`.
    #[arg(long, short)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Predictions CSV.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for results.csv (default: config `output_dir`, else `.`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Write measured wall times into results.csv instead of zeros.
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ReportArgs {
    results: PathBuf,
    /// Output directory (default: next to results.csv).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::Config(_) | Error::Parameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var("OMX_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("OMX_SEED=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> CliResult<u64> {
    Ok(match (flag, config) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => env_seed()?.unwrap_or(0),
    })
}

fn load_config(o: &Overrides) -> CliResult<RunConfig> {
    let pairs = o
        .set
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(match &o.config {
        Some(path) => RunConfig::load_with_overrides(path, &pairs)?,
        None => RunConfig::parse_with_overrides("", Path::new("."), &pairs)?,
    })
}

fn datagen(a: &DatagenArgs) -> CliResult<()> {
    let mut spec = match a.preset.as_str() {
        "desk" => SynthSpec::desk(),
        "multiome" => SynthSpec::multiome_scaled(a.scale),
        "citeseq" => SynthSpec::citeseq_scaled(a.scale),
        other => return Err(Failure::Usage(format!("unknown preset `{other}` (desk, multiome, citeseq)"))),
    };
    macro_rules! apply {
        ($($f:ident),*) => { $(if let Some(v) = a.$f { spec.$f = v; })* };
    }
    apply!(n_cells, d_input, d_output, latent_rank, noise_sigma, n_groups, sparsity);
    if let Some(s) = a.seed.or(env_seed()?) {
        spec.seed = s;
    }
    let task = gen_task(&spec)?;
    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    write_matrix(&a.out.join("features.txt"), &MatrixData::Sparse(task.x))?;
    write_atomic(&a.out.join("targets.csv"), render_dense(&task.y).as_bytes())?;
    write_labels(&a.out.join("groups.txt"), &task.groups)?;
    println!(
        "wrote {} cells ({} -> {}) to {}",
        spec.n_cells,
        spec.d_input,
        spec.d_output,
        a.out.display()
    );
    Ok(())
}

fn fit(a: &FitArgs) -> CliResult<()> {
    let cfg = load_config(&a.overrides)?;
    let seed = resolve_seed(a.seed, cfg.seed)?;
    let header = a.header || cfg.header;
    let log1p = a.log1p || cfg.log1p;
    let mut x = read_matrix(&a.features, header)?;
    let y = read_matrix(&a.targets, header)?.into_dense();
    if log1p {
        x = log1p_transform(&x)?;
    }
    let components = a.components.unwrap_or(cfg.components);
    let rng = RngStream::new(seed);
    let (projector, z) = if components == 0 {
        (None, x.into_dense())
    } else {
        let (p, z) = Projector::fit_transform(&x, components, &mut rng.derive(1))?;
        (Some(p), z)
    };
    let config = match a.model {
        ModelKind::Esn => omx_core::model::ModelConfig::Esn(cfg.esn),
        ModelKind::Elm => omx_core::model::ModelConfig::Elm(cfg.elm),
        ModelKind::Forest => omx_core::model::ModelConfig::Forest(cfg.forest),
    };
    let model = config.with_seed(rng.derive(2).next_u64()).train(&z, &y)?;
    save_model(&ModelFile { projector, log1p, model }, &a.out)?;
    println!("saved {} model to {}", a.model, a.out.display());
    Ok(())
}

fn predict(a: &PredictArgs) -> CliResult<()> {
    let file = load_model(&a.model)?;
    let mut x = read_matrix(&a.features, a.header)?;
    if file.log1p {
        x = log1p_transform(&x)?;
    }
    let z = match &file.projector {
        Some(p) => p.apply(&x)?,
        None => x.into_dense(),
    };
    let pred = file.model.predict(&z)?;
    write_atomic(&a.out, render_dense(&pred).as_bytes())?;
    println!("wrote {} predictions to {}", pred.rows(), a.out.display());
    Ok(())
}

fn load_task(spec: &omx_core::io::TaskSpec, header: bool) -> CliResult<Task> {
    Ok(match &spec.source {
        TaskSource::Synthetic(s) => gen_task(s)?.into_task(spec.name.clone()),
        TaskSource::Files { features, targets, groups } => Task {
            name: spec.name.clone(),
            features: read_matrix(features, header)?,
            targets: read_matrix(targets, header)?.into_dense(),
            groups: read_labels(groups)?,
        },
    })
}

fn benchmark(a: &BenchmarkArgs) -> CliResult<()> {
    let cfg = load_config(&a.overrides)?;
    if cfg.tasks.is_empty() {
        return Err(Failure::Usage("no tasks configured (set `tasks = ...`)".into()));
    }
    let seed = resolve_seed(a.seed, cfg.seed)?;
    let out = a.out.clone().or(cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let mut report = EvalReport::default();
    for spec in &cfg.tasks {
        let task = load_task(spec, cfg.header)?;
        let configs: Vec<_> = cfg.models.iter().map(|&k| spec.model_config(k)).collect();
        let learners: Vec<&dyn Learner> = configs.iter().map(|c| c as &dyn Learner).collect();
        let settings = BenchmarkSettings {
            folds: cfg.folds,
            seed,
            components: spec.components.unwrap_or(cfg.components),
            log1p: cfg.log1p,
        };
        report = report.merge(benchmark_run(&task, &learners, &settings)?);
    }
    std::fs::create_dir_all(&out).map_err(Error::from)?;
    write_atomic(&out.join("results.csv"), report.to_csv(a.timings).as_bytes())?;
    write_atomic(&out.join("timings.csv"), report.timings_csv().as_bytes())?;
    for r in report.rows() {
        println!(
            "{:<8} {:<12} correlation {:.4}  mse {:.4}  fit {:.1}s",
            r.model, r.task, r.correlation_score, r.mse, r.fit_seconds
        );
    }
    println!("wrote {}", out.join("results.csv").display());
    Ok(())
}

fn report(a: &ReportArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.results).map_err(|e| Error::from(e).context(a.results.display().to_string()))?;
    let report = EvalReport::from_csv(&text).map_err(|e| e.context(a.results.display().to_string()))?;
    let out = a
        .out
        .clone()
        .or_else(|| a.results.parent().map(Path::to_path_buf))
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(Error::from)?;
    for (metric, name) in [(Metric::Correlation, "correlation.svg"), (Metric::Mse, "mse.svg")] {
        write_atomic(&out.join(name), render_bar_chart(&report, metric).as_bytes())?;
    }
    println!("wrote correlation.svg and mse.svg to {}", out.display());
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Datagen(a) => datagen(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be >= 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Failure::Usage(format!("cannot start thread pool: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sparsefool::{load_model, save_model, DeepFoolConfig, MlpClassifier, SparseFoolConfig, TrainConfig};
use sparsefool_bench::report::{report_to_csv, rows_to_csv, to_json, write_json, write_rows};
use sparsefool_bench::{
    accuracy, clip_failure, evaluate, preset_train_config, random_sparse_baseline, read_report, sweep_delta,
    sweep_lambda, train_preset, transfer_matrix, write_report, BenchError, BoundsPolicy, DataSource, Dataset, Format,
    Result, Split,
};

#[derive(Parser, Debug)]
#[command(name = "sparsefool", version, about = "Sparse adversarial attacks and their benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the standard MLP and save it.
    Train(TrainArgs),
    /// Attack every test sample and report fooling rate and sparsity.
    Attack(AttackArgs),
    /// Compare unclipped, post-hoc clipped and in-loop clipped l1-DeepFool.
    Clipfail(AttackArgs),
    /// One evaluation per lambda.
    SweepLambda {
        #[command(flatten)]
        attack: AttackArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,5")]
        lambdas: Vec<f64>,
    },
    /// One evaluation per delta (domain units).
    SweepDelta {
        #[command(flatten)]
        attack: AttackArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.5,1.0")]
        deltas: Vec<f64>,
    },
    /// Random sparse noise at a per-channel element budget.
    Baseline {
        #[command(flatten)]
        attack: AttackArgs,
        /// Elements per channel; defaults to the sparsefool median on the same data.
        #[arg(long, value_delimiter = ',')]
        budget: Option<Vec<usize>>,
    },
    /// Fooling rate of each model on examples crafted against every other.
    Transfer {
        #[command(flatten)]
        attack: AttackArgs,
        /// Extra models; the first comes from --model (or is trained).
        #[arg(long = "with")]
        others: Vec<PathBuf>,
    },
    /// Print or convert a saved JSON report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Directory of IDX files, `cifar:<batch.bin>`, or `synth:n=..,classes=..,dim=..,margin=..,seed=..`.
    #[arg(long)]
    data: Option<String>,
    /// Use at most this many samples.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct AttackArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Model file; when absent the standard MLP is trained on the train split.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Defaults to 1 for IDX data and 3 otherwise.
    #[arg(long)]
    lambda: Option<f64>,
    /// Per-coordinate bound around each sample, in domain units.
    #[arg(long, conflicts_with = "delta255")]
    delta: Option<f64>,
    /// Same as --delta but in 0-255 pixel units.
    #[arg(long)]
    delta255: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    target: Option<usize>,
}

#[derive(Serialize)]
struct TransferRow {
    crafted_on: String,
    evaluated_on: String,
    fooling_rate: f64,
}

struct Context {
    model: MlpClassifier,
    model_name: String,
    data: Dataset,
    source: DataSource,
}

impl DataArgs {
    fn source(&self) -> Result<DataSource> {
        self.data.as_deref().map_or_else(|| Ok(DataSource::default()), DataSource::parse)
    }
}

impl OutputArgs {
    fn format(&self) -> Result<Format> {
        self.format.parse()
    }
}

impl AttackArgs {
    fn context(&self) -> Result<Context> {
        self.output.format()?;
        let source = self.data.source()?;
        self.config(&source)?;
        self.policy()?;
        let mut data = source.load(Split::Test)?;
        if let Some(n) = self.data.limit {
            data = data.take(n);
        }
        let (model, model_name) = match &self.model {
            Some(path) => (load_model(path)?, path.display().to_string()),
            None => {
                let train = source.load(Split::Train)?;
                let (m, rep) = train_preset(&train, None, &preset_train_config(self.data.seed, train.len()))?;
                eprintln!("trained preset: train accuracy {:.4}", rep.train_accuracy);
                (m, format!("preset(seed={})", self.data.seed))
            }
        };
        Ok(Context { model, model_name, data, source })
    }

    fn config(&self, source: &DataSource) -> Result<SparseFoolConfig> {
        let lambda = self.lambda.unwrap_or(match source {
            DataSource::Dir(_) => 1.0,
            _ => 3.0,
        });
        let mut cfg = SparseFoolConfig { target: self.target, ..SparseFoolConfig::with_lambda(lambda) };
        if let Some(n) = self.max_iter {
            cfg.max_outer_iter = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn policy(&self) -> Result<BoundsPolicy> {
        let delta = match (self.delta, self.delta255) {
            (Some(d), _) => Some(d),
            (None, Some(d)) => Some(d / 255.0),
            (None, None) => None,
        };
        match delta {
            Some(d) if !(d >= 0.0) => Err(BenchError::Usage(format!("delta must be >= 0, got {d}"))),
            Some(d) => Ok(BoundsPolicy::Delta(d)),
            None => Ok(BoundsPolicy::Domain),
        }
    }
}

/// JSON writes `value`; CSV writes the flat `rows` view of it.
fn emit<T: Serialize, R: Serialize>(value: &T, rows: &[R], out: &OutputArgs) -> Result<()> {
    match out.format()? {
        Format::Json => match &out.out {
            Some(path) => write_json(value, path),
            None => {
                println!("{}", to_json(value)?);
                Ok(())
            }
        },
        Format::Csv => emit_rows(rows, out),
    }
}

fn emit_rows<T: Serialize>(rows: &[T], out: &OutputArgs) -> Result<()> {
    let format = out.format()?;
    match &out.out {
        Some(path) => write_rows(rows, path, format),
        None => match format {
            Format::Json => {
                println!("{}", to_json(&rows)?);
                Ok(())
            }
            Format::Csv => rows_to_csv(rows, std::io::stdout().lock()),
        },
    }
}

fn emit_report(report: &sparsefool_bench::EvalReport, out: &OutputArgs) -> Result<()> {
    let format = out.format()?;
    eprintln!(
        "fooling rate {:.4}, median perturbed pixels {}, mean outer iterations {:.3}",
        report.fooling_rate,
        report.median_pert_pct.map_or_else(|| "n/a".into(), |m| format!("{m:.4}%")),
        report.mean_outer_iterations
    );
    match &out.out {
        Some(path) => write_report(report, path, format),
        None => match format {
            Format::Json => {
                println!("{}", to_json(report)?);
                Ok(())
            }
            Format::Csv => report_to_csv(report, std::io::stdout().lock()),
        },
    }
}

fn train(args: &TrainArgs) -> Result<()> {
    let source = args.data.source()?;
    let mut train = source.load(Split::Train)?;
    if let Some(n) = args.data.limit {
        train = train.take(n);
    }
    let test = source.load(Split::Test).ok();
    let defaults = preset_train_config(args.data.seed, train.len());
    let cfg = TrainConfig {
        epochs: args.epochs.unwrap_or(defaults.epochs),
        learning_rate: args.learning_rate.unwrap_or(defaults.learning_rate),
        ..defaults
    };
    let (model, rep) = train_preset(&train, None, &cfg)?;
    save_model(&model, &args.out)?;
    let test_acc = test.as_ref().map(|t| accuracy(&model, t)).transpose()?;
    eprintln!(
        "train accuracy {:.4}, test accuracy {}",
        rep.train_accuracy,
        test_acc.map_or_else(|| "n/a".into(), |a| format!("{a:.4}"))
    );
    Ok(())
}

fn attack(args: &AttackArgs) -> Result<()> {
    let ctx = args.context()?;
    let cfg = args.config(&ctx.source)?;
    let mut report = evaluate(&ctx.model, &ctx.data, args.policy()?, &cfg)?;
    report.config_echo.model = Some(ctx.model_name);
    report.config_echo.seed = Some(args.data.seed);
    emit_report(&report, &args.output)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Train(args) => train(args),
        Command::Attack(args) => attack(args),
        Command::Clipfail(args) => {
            let ctx = args.context()?;
            let summary = clip_failure(&ctx.model, &ctx.data, args.policy()?, &DeepFoolConfig::default())?;
            eprintln!(
                "unclipped {:.4}, post-hoc clipped {:.4}, in-loop clipped {:.4}",
                summary.unclipped_rate, summary.post_hoc_rate, summary.in_loop_rate
            );
            emit(&summary, std::slice::from_ref(&summary), &args.output)
        }
        Command::SweepLambda { attack, lambdas } => {
            let ctx = attack.context()?;
            let cfg = attack.config(&ctx.source)?;
            let (rows, _) = sweep_lambda(&ctx.model, &ctx.data, lambdas, attack.policy()?, &cfg)?;
            emit_rows(&rows, &attack.output)
        }
        Command::SweepDelta { attack, deltas } => {
            let ctx = attack.context()?;
            let cfg = attack.config(&ctx.source)?;
            let (rows, _) = sweep_delta(&ctx.model, &ctx.data, deltas, &cfg)?;
            emit_rows(&rows, &attack.output)
        }
        Command::Baseline { attack, budget } => {
            let ctx = attack.context()?;
            let budget = match budget {
                Some(b) => b.clone(),
                None => {
                    let cfg = attack.config(&ctx.source)?;
                    let reference = evaluate(&ctx.model, &ctx.data, attack.policy()?, &cfg)?;
                    reference.matched_budget().ok_or_else(|| {
                        BenchError::Usage("no sample was fooled, so there is no budget to match".into())
                    })?
                }
            };
            let mut report = random_sparse_baseline(&ctx.model, &ctx.data, &budget, attack.data.seed)?;
            report.config_echo.model = Some(ctx.model_name);
            emit_report(&report, &attack.output)
        }
        Command::Transfer { attack, others } => {
            let ctx = attack.context()?;
            let cfg = attack.config(&ctx.source)?;
            let mut models = vec![(ctx.model_name.clone(), ctx.model)];
            for path in others {
                models.push((path.display().to_string(), load_model(path)?));
            }
            let matrix = transfer_matrix(&models, &ctx.data, attack.policy()?, &cfg)?;
            let mut rows = Vec::new();
            for (i, from) in matrix.models.iter().enumerate() {
                for (j, to) in matrix.models.iter().enumerate() {
                    rows.push(TransferRow {
                        crafted_on: from.clone(),
                        evaluated_on: to.clone(),
                        fooling_rate: matrix.rates[i][j],
                    });
                }
            }
            emit(&matrix, &rows, &attack.output)
        }
        Command::Report { input, output } => {
            let report = read_report(input)?;
            emit_report(&report, output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

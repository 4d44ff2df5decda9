use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conformal_pce::benchmarks::{sample_design, Benchmark, TestFunction};
use conformal_pce::conformal::{ConformalConfig, Conformalizer, Method, Score};
use conformal_pce::dataset::{read_points_csv, write_intervals_csv, Dataset};
use conformal_pce::harness::{emit_report, run_grid, ExperimentConfig, ReportFormat};
use conformal_pce::pce::{fit, PceModel, VarianceEstimator};
use conformal_pce::{build_total_degree_set, Error, InputSpec};

/// Polynomial chaos surrogates with jackknife and jackknife+ prediction intervals.
#[derive(Parser)]
#[command(name = "cpce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a surrogate and write it as JSON.
    Fit(FitArgs),
    /// Conformal intervals for query points.
    Interval(IntervalArgs),
    /// Run a coverage experiment grid.
    Experiment(ExperimentArgs),
    /// Print the benchmark parameter tables.
    Benchmarks(BenchmarksArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Training CSV with header x1,...,xN,y.
    #[arg(
        long,
        conflicts_with = "benchmark",
        required_unless_present = "benchmark"
    )]
    data: Option<PathBuf>,
    /// Input box for --data as lo:hi per dimension, comma separated.
    /// Defaults to [-1, 1] in every dimension.
    #[arg(long, requires = "data")]
    bounds: Option<String>,
    /// Sample the training set from a built-in benchmark.
    #[arg(long, requires = "m")]
    benchmark: Option<Benchmark>,
    /// Number of training samples drawn from --benchmark.
    #[arg(long, requires = "benchmark")]
    m: Option<usize>,
    #[arg(long, requires = "benchmark", default_value_t = 0)]
    seed: u64,
    /// Total polynomial degree.
    #[arg(long)]
    degree: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    #[value(name = "jk")]
    Jackknife,
    #[value(name = "jk+")]
    JackknifePlus,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    Abs,
    Norm,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarianceArg {
    Coefficients,
    Empirical,
}

#[derive(Args)]
struct IntervalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Query CSV with header x1,...,xN (a trailing y column is ignored).
    #[arg(long)]
    points: PathBuf,
    #[arg(long, value_enum, default_value = "jk+")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "abs")]
    score: ScoreArg,
    /// Output variance estimate for normalized scores.
    #[arg(long, value_enum, default_value = "coefficients")]
    variance: VarianceArg,
    /// Significance level s; intervals target 1 - s coverage.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// 20 seeds and 2000 test points instead of the configured sizes.
    #[arg(long)]
    quick: bool,
    /// Report directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct BenchmarksArgs {
    /// Only this benchmark.
    id: Option<Benchmark>,
}

/// Failure carrying the exit code of the stable contract.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: format!("error kind=invalid: {}", message.into()),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure {
            code: if err.is_numerical() { 3 } else { 2 },
            message: format!("error kind={}: {err}", err.kind()),
        }
    }
}

type CmdResult = std::result::Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Interval(args) => cmd_interval(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Benchmarks(args) => cmd_benchmarks(args),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_bounds(text: &str) -> std::result::Result<Vec<(f64, f64)>, Failure> {
    text.split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| Failure::usage(format!("bound {pair:?} is not lo:hi")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Failure::usage(format!("bound {s:?} is not a number")))
            };
            Ok((parse(lo)?, parse(hi)?))
        })
        .collect()
}

fn cmd_fit(args: FitArgs) -> CmdResult {
    let (data, spec) = match (&args.data, args.benchmark) {
        (Some(path), _) => {
            let data = Dataset::load(path)?;
            let spec = match &args.bounds {
                Some(text) => InputSpec::new(parse_bounds(text)?)?,
                None => InputSpec::reference(data.input_dim())?,
            };
            if spec.dim() != data.input_dim() {
                return Err(Failure::usage(format!(
                    "--bounds gives {} dimensions, data has {}",
                    spec.dim(),
                    data.input_dim()
                )));
            }
            (data, spec)
        }
        (None, Some(b)) => {
            let m = args.m.expect("clap enforces --m with --benchmark");
            (sample_design(b, m, args.seed)?, b.input_spec())
        }
        (None, None) => unreachable!("clap requires a data source"),
    };

    let set = build_total_degree_set(spec.dim(), args.degree)?;
    let model = fit(&data, &set, &spec)?;
    model.save(&args.out)?;

    println!("K={}", model.n_terms());
    println!("M={}", model.n_samples());
    match model.relative_loo_error(VarianceEstimator::Coefficients) {
        Ok(e) => println!("rel_loo_error={e:e}"),
        Err(err) => println!("rel_loo_error=undefined ({err})"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_interval(args: IntervalArgs) -> CmdResult {
    let model = PceModel::load(&args.model)?;
    let points = read_points_csv(File::open(&args.points).map_err(Error::from)?)?;
    let method = match args.method {
        MethodArg::Jackknife => Method::Jackknife,
        MethodArg::JackknifePlus => Method::JackknifePlus,
    };
    let score = match args.score {
        ScoreArg::Abs => Score::Absolute,
        ScoreArg::Norm => Score::Normalized,
    };
    let variance = match args.variance {
        VarianceArg::Coefficients => VarianceEstimator::Coefficients,
        VarianceArg::Empirical => VarianceEstimator::Empirical,
    };
    let cfg = ConformalConfig::new(method, score, args.alpha)?.with_variance(variance);
    let conf = Conformalizer::new(&model, cfg)?;
    let intervals = points
        .iter()
        .map(|x| conf.interval(x))
        .collect::<conformal_pce::Result<Vec<_>>>()?;

    let file = File::create(&args.out).map_err(Error::from)?;
    write_intervals_csv(&points, &intervals, BufWriter::new(file))?;

    let unbounded = intervals.iter().filter(|iv| !iv.is_bounded()).count();
    if unbounded > 0 {
        eprintln!(
            "warning: {unbounded} of {} intervals are unbounded; M={} is too small for s={}",
            intervals.len(),
            model.n_samples(),
            args.alpha
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn load_config(path: &Path) -> std::result::Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn cmd_experiment(args: ExperimentArgs) -> CmdResult {
    let mut cfg = load_config(&args.config)?;
    if args.quick {
        cfg = cfg.quick();
    }
    let dir = args
        .out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Failure::usage("no report directory: pass --out or set `output`"))?;

    let report = run_grid(&cfg)?;
    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    let written = emit_report(&report, &dir, format)?;

    print!("{}", report.format_table());
    let failed = report.failures().count();
    if failed > 0 {
        println!("{failed} of {} runs failed:", report.records.len());
        let mut kinds: Vec<&str> = report
            .failures()
            .filter_map(|r| r.failure.as_deref())
            .map(|f| f.split(':').next().unwrap_or(f))
            .collect();
        kinds.sort_unstable();
        kinds.dedup();
        for kind in kinds {
            println!("  {kind}");
        }
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    if report.all_failed() {
        eprintln!("error kind=experiment: every cell failed");
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_benchmarks(args: BenchmarksArgs) -> CmdResult {
    let selected: Vec<Benchmark> = match args.id {
        Some(b) => vec![b],
        None => Benchmark::ALL.to_vec(),
    };
    for (i, b) in selected.iter().enumerate() {
        if i > 0 {
            println!();
        }
        let degrees: Vec<String> = b.degree_grid().iter().map(usize::to_string).collect();
        println!("{b} (N={}, P in {{{}}})", b.dim(), degrees.join(","));
        println!(
            "  {:<6} {:<28} {:<8} {:>12} {:>12}",
            "symbol", "description", "unit", "lower", "upper"
        );
        for p in b.parameters() {
            println!(
                "  {:<6} {:<28} {:<8} {:>12} {:>12}",
                p.symbol, p.description, p.unit, p.lower, p.upper
            );
        }
        let spec = b.input_spec();
        println!("  midpoint output: {}", b.evaluate(&spec.midpoint())?);
    }
    Ok(ExitCode::SUCCESS)
}

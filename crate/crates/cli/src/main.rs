use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ratlab::dataset::{generate, read_dataset, write_dataset, DatasetKind, GeneratorRequest};
use ratlab::domain::{build_domain, DomainId};
use ratlab::harness::{
    emit_report, run_plan, unix_now, AggregateReport, ExperimentPlan, SUMMARY_FILE,
};
use ratlab::nn::{load_model, save_model, train, IterationUnit, NetworkConfig, TrainConfig};
use ratlab::oracle::verify_dataset;
use ratlab::rationale::{
    accuracy, condition_table, curve_deviation, curve_setup, ideal_curve, output_curve,
    turning_points, write_curve_tsv,
};
use ratlab::seed::child_seed;

#[derive(Parser)]
#[command(
    name = "ratlab",
    version,
    about = "Generate legal-domain datasets, train small MLPs and evaluate their rationale"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset as CSV plus a .meta.json sidecar.
    Gen(GenArgs),
    /// Recompute every label of a dataset file and audit its structure.
    Verify(VerifyArgs),
    /// Train a network on a dataset file.
    Train(TrainArgs),
    /// Evaluate a trained model on a dataset file.
    Eval(EvalArgs),
    /// Run an experiment plan and write its report files.
    Experiment(ExperimentArgs),
    /// Print the tables of a finished experiment.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    domain: DomainId,
    #[arg(long)]
    kind: DatasetKind,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    domain: DomainId,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Steps,
    Epochs,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    domain: DomainId,
    /// Hidden layer widths, e.g. `24-10-3`.
    #[arg(long, default_value = "12")]
    arch: String,
    #[arg(long, default_value_t = 50_000)]
    iterations: usize,
    #[arg(long, value_enum, default_value_t = Unit::Steps)]
    unit: Unit,
    #[arg(long, default_value_t = 50)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.001)]
    learning_rate: f64,
    /// Master seed for weight initialisation and batch order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
    #[arg(long)]
    out: PathBuf,
    /// Optional TSV of `(step, batch loss)` samples.
    #[arg(long)]
    loss_trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Write the mean-output curve of a dedicated set here.
    #[arg(long)]
    curve_tsv: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Override the plan's repetition count.
    #[arg(long)]
    repetitions: Option<usize>,
    /// Override the plan's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory written by `experiment`.
    #[arg(long)]
    dir: PathBuf,
}

/// Prints to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

enum Failure {
    Usage(anyhow::Error),
    Verification,
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn parse_arch(text: &str) -> Result<Vec<usize>, Failure> {
    text.split('-')
        .map(|w| w.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| {
            usage(anyhow!(
                "invalid architecture `{text}`, expected widths like 24-10-3"
            ))
        })
}

fn to_json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let req = GeneratorRequest::new(args.domain, args.kind, args.size, args.seed);
    req.validate().map_err(usage)?;
    eprintln!("seed: {}", args.seed);
    let data = generate(&req).context("generating dataset")?;
    write_dataset(&data, &args.out).context("writing dataset")?;
    say!(
        "wrote {} cases ({} positive) to {}",
        data.len(),
        data.positives(),
        args.out.display()
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let schema = build_domain(args.domain);
    let data = read_dataset(&args.input, &schema).context("reading dataset")?;
    eprintln!("seed: {}", data.meta.seed);
    let report = verify_dataset(&data, &schema).context("verifying dataset")?;
    say!("{}", to_json(&report)?);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_train(args: TrainArgs) -> Result<(), Failure> {
    let hidden = parse_arch(&args.arch)?;
    let width = build_domain(args.domain).width();
    let init_seed = child_seed(args.seed, 0, "init");
    let shuffle_seed = child_seed(args.seed, 0, "shuffle");
    let network = NetworkConfig::custom(width, &hidden, init_seed).map_err(usage)?;
    let config = TrainConfig {
        learning_rate: args.learning_rate,
        batch_size: args.batch_size,
        iterations: args.iterations,
        iteration_unit: match args.unit {
            Unit::Steps => IterationUnit::Steps,
            Unit::Epochs => IterationUnit::Epochs,
        },
        shuffle_seed,
        ..TrainConfig::default()
    };
    config.validate().map_err(usage)?;
    eprintln!(
        "seed: {} (init {init_seed}, shuffle {shuffle_seed})",
        args.seed
    );

    let data = read_dataset(&args.data, &build_domain(args.domain)).context("reading dataset")?;
    let trace = match args.precision {
        Precision::F64 => {
            let (model, trace) = train::<f64>(&data, &network, &config).context("training")?;
            save_model(&model, &args.out).context("saving model")?;
            trace
        }
        Precision::F32 => {
            let (model, trace) = train::<f32>(&data, &network, &config).context("training")?;
            save_model(&model, &args.out).context("saving model")?;
            trace
        }
    };
    if let Some(path) = &args.loss_trace {
        let mut text = String::from("step\tloss\n");
        for (step, loss) in &trace {
            writeln!(text, "{step}\t{loss}").expect("string write");
        }
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some((step, loss)) = trace.last() {
        say!(
            "trained {} for {step} steps, final batch loss {loss:.6}",
            network.shape_label()
        );
    }
    say!("saved model to {}", args.out.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let model = load_model::<f64>(&args.model).context("loading model")?;
    eprintln!(
        "seed: init {}, shuffle {}",
        model.config.init_seed, model.train_config.shuffle_seed
    );
    let data = read_dataset(&args.data, &build_domain(model.domain)).context("reading dataset")?;
    let mut out = serde_json::Map::new();
    out.insert(
        "accuracy".into(),
        accuracy(&model, &data).context("evaluating")?.into(),
    );
    if let Some(cond) = data.kind().target_condition(data.domain()) {
        if let Ok((x, group, _)) = curve_setup(data.domain(), cond) {
            let curve = output_curve(&model, &data, x, group).context("building curve")?;
            let ideal = ideal_curve(data.domain(), cond).context("building ideal curve")?;
            out.insert(
                "turning_points".into(),
                serde_json::to_value(turning_points(&curve)).map_err(anyhow::Error::from)?,
            );
            out.insert(
                "deviation".into(),
                serde_json::to_value(curve_deviation(&curve, &ideal).context("comparing curves")?)
                    .map_err(anyhow::Error::from)?,
            );
            if let Some(path) = &args.curve_tsv {
                write_curve_tsv(&curve, path).context("writing curve")?;
            }
        } else {
            let table = condition_table(&model, &data, cond).context("building condition table")?;
            out.insert(
                "condition_table".into(),
                serde_json::to_value(table).map_err(anyhow::Error::from)?,
            );
        }
    } else if args.curve_tsv.is_some() {
        return Err(usage(anyhow!(
            "--curve-tsv needs an age-gender or patient-distance dataset"
        )));
    }
    say!("{}", to_json(&out)?);
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let mut plan = ExperimentPlan::load(&args.plan).map_err(usage)?;
    if let Some(n) = args.parallelism {
        plan.parallelism = Some(n);
    }
    if let Some(r) = args.repetitions {
        plan.repetitions = r;
    }
    if let Some(s) = args.seed {
        plan.master_seed = s;
    }
    plan.validate().map_err(usage)?;
    eprintln!("master seed: {}", plan.master_seed);
    let started = unix_now();
    let report = run_plan(&plan).context("running plan")?;
    emit_report(&report, &args.out_dir, started).context("writing report")?;
    say!(
        "{} cells over {} repetitions written to {}",
        report.accuracy.len(),
        plan.repetitions,
        args.out_dir.display()
    );
    Ok(())
}

fn render_report(report: &AggregateReport) -> String {
    let mut out = String::new();
    let plan = &report.plan;
    writeln!(
        out,
        "{} ({}, {} repetitions, master seed {})",
        plan.name, plan.domain, plan.repetitions, plan.master_seed
    )
    .expect("string write");
    let mut trains: Vec<&str> = Vec::new();
    let mut tests: Vec<&str> = Vec::new();
    let mut archs: Vec<&str> = Vec::new();
    for c in &report.accuracy {
        for (list, v) in [
            (&mut trains, &c.train),
            (&mut tests, &c.test),
            (&mut archs, &c.arch),
        ] {
            if !list.contains(&v.as_str()) {
                list.push(v);
            }
        }
    }
    for train in &trains {
        writeln!(out, "\ntrained on {train}").expect("string write");
        write!(out, "{:<10}", "arch").expect("string write");
        for test in &tests {
            write!(out, " {test:>22}").expect("string write");
        }
        out.push('\n');
        for arch in &archs {
            write!(out, "{arch:<10}").expect("string write");
            for test in &tests {
                let cell = report.cell(train, test, arch).expect("complete matrix");
                let mut text = format!("{:.2}±{:.2}", cell.mean, cell.std);
                if cell.diverged > 0 {
                    write!(text, " ({} div)", cell.diverged).expect("string write");
                }
                write!(out, " {text:>22}").expect("string write");
            }
            out.push('\n');
        }
    }
    if !report.curves.is_empty() {
        writeln!(
            out,
            "\nturning points (first grid point past 0.5, interpolated crossing in brackets)"
        )
        .expect("string write");
        for c in &report.curves {
            let points: Vec<String> = c
                .turning_points
                .groups
                .iter()
                .map(|g| match g.first {
                    Some(c) => format!("{} {} ({:.1})", g.label, c.grid_after, c.x),
                    None => format!("{} none", g.label),
                })
                .collect();
            writeln!(
                out,
                "  {} / {} / {}: {}; max |dev| {:.3}, away from steps {:.3}",
                c.train,
                c.test,
                c.arch,
                points.join(", "),
                c.deviation.max_abs,
                c.deviation_away_from_steps.max_abs
            )
            .expect("string write");
        }
    }
    if !report.condition_tables.is_empty() {
        writeln!(out, "\nmean output by condition value").expect("string write");
        for t in &report.condition_tables {
            writeln!(
                out,
                "  {} / {} / {}: {} false {:.3}, true {:.3}",
                t.train,
                t.test,
                t.arch,
                t.notion.as_deref().unwrap_or(&t.condition),
                t.false_mean,
                t.true_mean
            )
            .expect("string write");
        }
    }
    out
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let path = args.dir.join(SUMMARY_FILE);
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let report: AggregateReport =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    eprintln!("master seed: {}", report.plan.master_seed);
    say!("{}", render_report(&report).trim_end());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.exists() => {
            bail!("directory {} does not exist", p.display())
        }
        _ => Ok(()),
    }
}

/// Joins the error chain, skipping causes the previous message already shows.
fn describe(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if parts.last().is_some_and(|last| last.contains(&text)) {
            continue;
        }
        parts.push(text);
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outputs: Vec<&Path> = match &cli.command {
        Command::Gen(a) => vec![&a.out],
        Command::Train(a) => vec![&a.out],
        _ => vec![],
    };
    for path in outputs {
        if let Err(e) = ensure_parent(path) {
            eprintln!("error: {}", describe(&e));
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(2)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(3)
        }
    }
}

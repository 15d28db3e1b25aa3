use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use icvi_artmap::bench::{self, GaussianSpec, Grid, SelectBy, SpeedSpec, SweepSpec};
use icvi_artmap::data::load_csv;
use icvi_artmap::trainer::CheckLevel;
use icvi_artmap::{fit, metrics, prepare, CviKind, CviMode, Error, Labels, Result, TrainerConfig};

#[derive(Parser)]
#[command(name = "icvi-artmap", version, about = "ARTMAP clustering driven by incremental validity indices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled Gaussian fixture
    Gen(GenArgs),
    /// Cluster a CSV data file
    Fit(FitArgs),
    /// Grid-search the vigilance parameters
    Sweep(SweepArgs),
    /// Time incremental against batch index computation
    Speed(SpeedArgs),
    /// Adjusted Rand index of two label files
    Eval(EvalArgs),
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Minimum centre distance in units of the largest standard deviation
    #[arg(long, default_value_t = 6.0)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_data: PathBuf,
    #[arg(long)]
    out_labels: PathBuf,
}

#[derive(Args, Serialize)]
struct ModelArgs {
    /// Headerless numeric CSV, one sample per row
    #[arg(long)]
    data: PathBuf,
    /// The CSV starts with a header row
    #[arg(long)]
    header: bool,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "ni")]
    icvi: CviKind,
    #[arg(long, default_value_t = 1.0)]
    beta_a: f64,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    #[arg(long, default_value_t = 0.001)]
    beta_ab: f64,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// incr or batch
    #[arg(long, default_value = "incr")]
    mode: CviMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// off, epoch or every
    #[arg(long, default_value = "off")]
    check: String,
}

impl ModelArgs {
    fn config(&self, rho_a: f64, rho_ab: f64) -> Result<TrainerConfig> {
        let check = match self.check.as_str() {
            "off" => CheckLevel::Off,
            "epoch" => CheckLevel::Epoch,
            "every" => CheckLevel::Every,
            other => return Err(Error::InvalidInput(format!("unknown check level '{other}'"))),
        };
        let cfg = TrainerConfig {
            rho_a,
            rho_ab,
            beta_a: self.beta_a,
            alpha_a: self.alpha,
            beta_ab: self.beta_ab,
            epsilon: self.eps,
            max_epochs: self.epochs,
            tol: self.tol,
            seed: self.seed,
            mode: self.mode,
            check,
            ..TrainerConfig::new(self.k, self.icvi)
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Serialize)]
struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    rho_a: f64,
    #[arg(long, default_value_t = 0.5)]
    rho_ab: f64,
    #[arg(long)]
    out_labels: PathBuf,
    /// CSV of (iteration, icvi_value)
    #[arg(long)]
    out_trace: Option<PathBuf>,
    /// Full run result as JSON
    #[arg(long)]
    out_result: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Ground-truth labels, required for --select-by ari
    #[arg(long)]
    truth: Option<PathBuf>,
    /// ari or icvi
    #[arg(long, default_value = "icvi")]
    select_by: SelectBy,
    /// lo:hi:step; defaults depend on the data dimension
    #[arg(long)]
    rho_a: Option<String>,
    #[arg(long)]
    rho_ab: Option<String>,
    /// Sweep table CSV
    #[arg(long)]
    out: PathBuf,
    /// Labels of the selected run
    #[arg(long)]
    out_labels: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SpeedArgs {
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long)]
    k_max: usize,
    /// Comma-separated index kinds; all six by default
    #[arg(long, value_delimiter = ',')]
    icvi: Vec<CviKind>,
    #[arg(long, default_value_t = 6.0)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Speed table CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    a: PathBuf,
    b: PathBuf,
}

fn parse_grid(s: &str) -> Result<Grid> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidInput(format!("grid '{s}' is not lo:hi:step")))?;
    let grid = match parts[..] {
        [v] => Grid::point(v),
        [lo, hi, step] => Grid::new(lo, hi, step),
        _ => return Err(Error::InvalidInput(format!("grid '{s}' is not lo:hi:step"))),
    };
    grid.validate()?;
    Ok(grid)
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest(command: &str, args: &impl Serialize, outputs: &[&Path], summary: serde_json::Value) -> Result<()> {
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
        "outputs": outputs,
        "summary": summary,
    });
    let path = manifest_path(outputs[0]);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::Io { path, source: e })
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec = GaussianSpec::new(args.k, args.d, args.n, args.sep, args.seed);
    let (ds, labels) = bench::generate(&spec)?;
    icvi_artmap::data::write_csv(&args.out_data, ds.x())?;
    labels.save(&args.out_labels)?;
    write_manifest(
        "gen",
        args,
        &[&args.out_data, &args.out_labels],
        json!({ "rows": ds.n(), "spec": spec }),
    )
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let cfg = args.model.config(args.rho_a, args.rho_ab)?;
    let prep = prepare(&load_csv(&args.model.data, args.model.header)?);
    let result = fit(&prep, &cfg)?;
    result.labels.save(&args.out_labels)?;
    let mut outputs: Vec<&Path> = vec![&args.out_labels];
    if let Some(path) = &args.out_trace {
        let mut text = String::from("iteration,icvi_value\n");
        for (it, v) in &result.trace {
            text.push_str(&format!("{it},{v}\n"));
        }
        std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        outputs.push(path);
    }
    if let Some(path) = &args.out_result {
        let text = serde_json::to_string_pretty(&result)?;
        std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        outputs.push(path);
    }
    write_manifest(
        "fit",
        args,
        &outputs,
        json!({
            "k_final": result.k_final,
            "value": result.value,
            "epochs_run": result.epochs_run,
            "stop_reason": result.stop_reason,
            "timings": result.timings,
        }),
    )
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let model = &args.model;
    let base = model.config(0.0, 1.0)?;
    let ds = load_csv(&model.data, model.header)?;
    let truth = args.truth.as_ref().map(Labels::load).transpose()?;
    let mut spec = SweepSpec::for_dimension(ds.d(), args.select_by);
    if let Some(g) = &args.rho_a {
        spec.rho_a = parse_grid(g)?;
    }
    if let Some(g) = &args.rho_ab {
        spec.rho_ab = parse_grid(g)?;
    }
    let prep = prepare(&ds);
    let outcome = bench::sweep(&prep, truth.as_ref(), &spec, &base)?;
    bench::write_sweep_csv(&args.out, &outcome.rows)?;
    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(path) = &args.out_labels {
        outcome.labels.save(path)?;
        outputs.push(path);
    }
    let best = outcome.best();
    println!(
        "selected rho_a={} rho_ab={} icvi={} ari={}",
        best.rho_a,
        best.rho_ab,
        best.icvi,
        best.ari.map_or_else(|| "n/a".into(), |a| a.to_string())
    );
    write_manifest("sweep", args, &outputs, json!({ "grid": spec, "selected": best }))
}

fn cmd_speed(args: &SpeedArgs) -> Result<()> {
    if args.k_min < 2 || args.k_min > args.k_max {
        return Err(Error::InvalidInput("need 2 <= k-min <= k-max".into()));
    }
    let mut spec = SpeedSpec::new(args.d, args.n, args.k_max, args.seed);
    spec.ks = (args.k_min..=args.k_max).collect();
    spec.sep = args.sep;
    if !args.icvi.is_empty() {
        spec.kinds = args.icvi.clone();
    }
    let rows = bench::speed_study_with(&spec, |r| eprintln!("{} k={} {} {:.3}s", r.icvi, r.k, r.mode, r.seconds))?;
    bench::write_speed_csv(&args.out, &rows)?;
    let speedups: Vec<_> = spec
        .kinds
        .iter()
        .flat_map(|&kind| spec.ks.iter().map(move |&k| (kind, k)))
        .map(|(kind, k)| json!({ "icvi": kind, "k": k, "speedup": bench::speedup(&rows, kind, k) }))
        .collect();
    write_manifest("speed", args, &[&args.out], json!({ "speedups": speedups }))
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let a = Labels::load(&args.a)?;
    let b = Labels::load(&args.b)?;
    println!("{:?}", metrics::ari(a.as_slice(), b.as_slice())?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Speed(a) => cmd_speed(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

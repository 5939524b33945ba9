//! Command-line front end: dataset generation, training, evaluation,
//! meshless prediction, and sensitivity sweeps.
//!
//! Exit codes: 0 on success, 1 on runtime (data/model) errors, 2 on usage
//! errors. Diagnostics go to stderr; data goes to files or stdout.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use anfis::dataset::{
    generate_surrogate, load_csv, select_regression, split, write_csv, Dataset, GridSpec,
    SurrogateParams,
};
use anfis::fis::{build_model_with, load_model, save_model, BuildOptions, DEFAULT_MAX_RULES};
use anfis::linalg::Matrix;
use anfis::membership::MfFamily;
use anfis::metrics::metric_report;
use anfis::sweep::{report_to_csv, run_sweep, trend_summary, CellStatus, SweepSpec};
use anfis::trainer::{train, TrainConfig};

#[derive(Debug, Parser)]
#[command(
    name = "anfis",
    version,
    about = "Sugeno fuzzy regression over bubble-column hydrodynamics data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the surrogate pressure-gradient dataset as CSV (default
    /// grid: 10 radii x 12 angles x 10 heights x 5 velocities = 6000 rows)
    Gen(GenArgs),
    /// Train a model on a CSV dataset and save it as JSON
    Train(TrainArgs),
    /// Evaluate a saved model: held-out (r2_test) and combined (r2_combined)
    /// metrics over the model's recorded split
    Eval(EvalArgs),
    /// Evaluate a saved model at arbitrary query points (meshless)
    Predict(PredictArgs),
    /// Sensitivity sweep over input sets, MF counts, and MF families
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Radial stations [default: 10]
    #[arg(long)]
    n_r: Option<usize>,
    /// Angular stations [default: 12]
    #[arg(long)]
    n_theta: Option<usize>,
    /// Axial stations [default: 10]
    #[arg(long)]
    n_z: Option<usize>,
    /// Comma-separated superficial velocities in m/s
    /// [default: 0.0025,0.005,0.0075,0.01,0.0125]
    #[arg(long)]
    velocities: Option<String>,
    /// Gaussian noise standard deviation in Pa/m [default: 0]
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Noise seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// JSON config file supplying defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training dataset CSV
    #[arg(long)]
    data: PathBuf,
    /// Where to write the trained model (JSON)
    #[arg(long)]
    model_out: PathBuf,
    /// Comma-separated input column names [default: x,y,z,v_as]
    #[arg(long)]
    inputs: Option<String>,
    /// Output column name [default: dpdz]
    #[arg(long)]
    output_col: Option<String>,
    /// Membership functions per input [default: 4]
    #[arg(long)]
    mf_count: Option<usize>,
    /// Membership family: gbell, gauss, gauss2, dsig, psig, or tri
    /// [default: gbell]
    #[arg(long)]
    mf_type: Option<String>,
    /// Training epochs [default: 700]
    #[arg(long)]
    epochs: Option<usize>,
    /// Fraction of rows used for training [default: 0.7]
    #[arg(long)]
    train_frac: Option<f64>,
    /// Split and provenance seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Initial premise step size [default: 0.01]
    #[arg(long)]
    initial_step: Option<f64>,
    /// Step growth factor after sustained improvement [default: 1.1]
    #[arg(long)]
    step_increase: Option<f64>,
    /// Step shrink factor under oscillation [default: 0.9]
    #[arg(long)]
    step_decrease: Option<f64>,
    /// Ridge regularization of the consequent solve [default: 1e-8]
    #[arg(long)]
    ridge_lambda: Option<f64>,
    /// Keep inputs in data units instead of min-max normalizing to [0, 1]
    #[arg(long)]
    no_normalize: bool,
    /// Rule-count limit; ANFIS_MAX_RULES overrides [default: 10000]
    #[arg(long)]
    max_rules: Option<usize>,
    /// Write the per-epoch trace (epoch, train RMSE, step) as CSV
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// JSON config file supplying defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Dataset CSV (the full set; the split is re-derived)
    #[arg(long)]
    data: PathBuf,
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Train fraction override [default: from model provenance, else 0.7]
    #[arg(long)]
    train_frac: Option<f64>,
    /// Split seed override [default: from model provenance, else 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Query points CSV; must contain the model's input columns
    #[arg(long)]
    points: PathBuf,
    /// Output CSV: input columns plus the predicted output column
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Dataset CSV
    #[arg(long)]
    data: PathBuf,
    /// Report CSV path
    #[arg(long)]
    out: PathBuf,
    /// Input set as a comma list; repeat the flag for several sets
    /// [default: x | x,y | x,y,z | x,y,z,v_as]
    #[arg(long = "input-set")]
    input_sets: Vec<String>,
    /// Comma-separated MF counts [default: 2,4,6]
    #[arg(long)]
    mf_counts: Option<String>,
    /// Comma-separated families, or 'all'
    /// [default: gbell,gauss,gauss2,dsig,psig,tri]
    #[arg(long)]
    families: Option<String>,
    /// Output column name [default: dpdz]
    #[arg(long)]
    output_col: Option<String>,
    /// Epochs per cell [default: 100; the reference protocol uses 700]
    #[arg(long)]
    epochs: Option<usize>,
    /// Fraction of rows used for training [default: 0.7]
    #[arg(long)]
    train_frac: Option<f64>,
    /// Seed of the shared split [default: 0]
    #[arg(long)]
    split_seed: Option<u64>,
    /// Training seed recorded in provenance [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for cell-level parallelism [default: 1 (sequential)]
    #[arg(long)]
    jobs: Option<usize>,
    /// Rule-count limit; ANFIS_MAX_RULES overrides [default: 10000]
    #[arg(long)]
    max_rules: Option<usize>,
    /// JSON config file supplying defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Optional JSON file carrying flag defaults; explicit flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n_r: Option<usize>,
    n_theta: Option<usize>,
    n_z: Option<usize>,
    velocities: Option<Vec<f64>>,
    noise_sd: Option<f64>,
    seed: Option<u64>,
    inputs: Option<Vec<String>>,
    output_col: Option<String>,
    mf_count: Option<usize>,
    mf_type: Option<String>,
    epochs: Option<usize>,
    train_frac: Option<f64>,
    split_seed: Option<u64>,
    initial_step: Option<f64>,
    step_increase: Option<f64>,
    step_decrease: Option<f64>,
    ridge_lambda: Option<f64>,
    normalize_inputs: Option<bool>,
    max_rules: Option<usize>,
    jobs: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(anfis::AnfisError),
}

impl From<anfis::AnfisError> for CliError {
    fn from(e: anfis::AnfisError) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn load_config(path: &Option<PathBuf>) -> CliResult<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| usage(format!("invalid config {}: {e}", p.display())))
        }
    }
}

fn parse_comma_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| usage(format!("invalid {what} entry '{s}'")))
        })
        .collect()
}

fn parse_families(text: &str) -> CliResult<Vec<MfFamily>> {
    if text.trim() == "all" {
        return Ok(MfFamily::ALL.to_vec());
    }
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<MfFamily>().map_err(|e| usage(e.to_string())))
        .collect()
}

/// Rule-count limit: flag beats ANFIS_MAX_RULES beats config beats default.
fn resolve_max_rules(flag: Option<usize>, config: &ConfigFile) -> CliResult<usize> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Ok(text) = std::env::var("ANFIS_MAX_RULES") {
        return text
            .parse::<usize>()
            .map_err(|_| usage(format!("invalid ANFIS_MAX_RULES '{text}'")));
    }
    Ok(config.max_rules.unwrap_or(DEFAULT_MAX_RULES))
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let defaults = GridSpec::default();
    let velocities = match args.velocities {
        Some(text) => parse_comma_list::<f64>(&text, "velocity")?,
        None => cfg.velocities.unwrap_or(defaults.velocities),
    };
    let grid = GridSpec {
        n_r: args.n_r.or(cfg.n_r).unwrap_or(defaults.n_r),
        n_theta: args.n_theta.or(cfg.n_theta).unwrap_or(defaults.n_theta),
        n_z: args.n_z.or(cfg.n_z).unwrap_or(defaults.n_z),
        velocities,
    };
    let params = SurrogateParams {
        noise_sd: args.noise_sd.or(cfg.noise_sd).unwrap_or(0.0),
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        ..Default::default()
    };
    let ds = generate_surrogate(&grid, &params)?;
    write_csv(&ds, &args.out)?;
    eprintln!("wrote {} rows to {}", ds.n_rows(), args.out.display());
    Ok(())
}

fn resolve_train_config(args: &TrainArgs, cfg: &ConfigFile) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        epochs: args.epochs.or(cfg.epochs).unwrap_or(d.epochs),
        initial_step: args
            .initial_step
            .or(cfg.initial_step)
            .unwrap_or(d.initial_step),
        step_increase: args
            .step_increase
            .or(cfg.step_increase)
            .unwrap_or(d.step_increase),
        step_decrease: args
            .step_decrease
            .or(cfg.step_decrease)
            .unwrap_or(d.step_decrease),
        ridge_lambda: args
            .ridge_lambda
            .or(cfg.ridge_lambda)
            .unwrap_or(d.ridge_lambda),
        seed: args.seed.or(cfg.seed).unwrap_or(d.seed),
        normalize_inputs: if args.no_normalize {
            false
        } else {
            cfg.normalize_inputs.unwrap_or(true)
        },
    }
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let max_rules = resolve_max_rules(args.max_rules, &cfg)?;
    let config = resolve_train_config(&args, &cfg);
    let train_frac = args.train_frac.or(cfg.train_frac).unwrap_or(0.7);
    let input_names: Vec<String> = match &args.inputs {
        Some(text) => parse_comma_list(text, "input column")?,
        None => cfg.inputs.clone().unwrap_or_else(|| {
            ["x", "y", "z", "v_as"]
                .iter()
                .map(|s| s.to_string())
                .collect()
        }),
    };
    let output_col = args
        .output_col
        .clone()
        .or(cfg.output_col.clone())
        .unwrap_or_else(|| "dpdz".into());
    let mf_count = args.mf_count.or(cfg.mf_count).unwrap_or(4);
    let family: MfFamily = args
        .mf_type
        .clone()
        .or(cfg.mf_type.clone())
        .unwrap_or_else(|| "gbell".into())
        .parse()
        .map_err(|e: anfis::AnfisError| usage(e.to_string()))?;

    let dataset = load_csv(&args.data)?;
    let total_rows = dataset.n_rows();
    let (train_ds, _test_ds) = split(&dataset, train_frac, config.seed)?;
    let (x, y, input_specs) = select_regression(&train_ds, &input_names, &output_col)?;

    let opts = BuildOptions {
        max_rules,
        normalize_inputs: config.normalize_inputs,
    };
    let model = build_model_with(&input_specs, mf_count, family, &output_col, &opts)?;
    eprintln!(
        "training: {} inputs, {} rules, {} rows, {} epochs",
        input_specs.len(),
        model.n_rules(),
        x.rows(),
        config.epochs
    );
    let (mut trained, trace) = train(model, &x, &y, &config)?;
    if let Some(p) = trained.provenance.as_mut() {
        p.total_rows = Some(total_rows);
        p.train_frac = Some(train_frac);
    }
    save_model(&trained, &args.model_out)?;
    if let Some(path) = &args.trace_out {
        trace.to_csv(path)?;
    }
    let best = trace.records[trace.best_epoch];
    eprintln!(
        "saved {} (best epoch {}, train RMSE {:.6})",
        args.model_out.display(),
        best.epoch,
        best.train_rmse
    );
    Ok(())
}

fn extract_x(ds: &Dataset, names: &[String]) -> CliResult<Matrix> {
    let cols: Vec<usize> = names
        .iter()
        .map(|n| {
            ds.column_index(n).ok_or_else(|| {
                CliError::Runtime(anfis::AnfisError::Selection(format!(
                    "column '{n}' not present in the data"
                )))
            })
        })
        .collect::<CliResult<_>>()?;
    let mut x = Matrix::zeros(ds.n_rows(), cols.len());
    for i in 0..ds.n_rows() {
        for (k, &c) in cols.iter().enumerate() {
            x.row_mut(i)[k] = ds.get(i, c);
        }
    }
    Ok(x)
}

fn extract_y(ds: &Dataset, output: &str) -> CliResult<Vec<f64>> {
    let out = ds.column_index(output).ok_or_else(|| {
        CliError::Runtime(anfis::AnfisError::Selection(format!(
            "column '{output}' not present in the data"
        )))
    })?;
    Ok((0..ds.n_rows()).map(|i| ds.get(i, out)).collect())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let dataset = load_csv(&args.data)?;
    let provenance = model.provenance.as_ref();
    let train_frac = args
        .train_frac
        .or(provenance.and_then(|p| p.train_frac))
        .unwrap_or(0.7);
    let seed = args.seed.or(provenance.map(|p| p.seed)).unwrap_or(0);

    let (train_ds, test_ds) = split(&dataset, train_frac, seed)?;
    let names: Vec<String> = model.inputs.iter().map(|i| i.name.clone()).collect();

    let pred_test = model.predict_batch(&extract_x(&test_ds, &names)?)?;
    let y_test = extract_y(&test_ds, &model.output_name)?;
    let test = metric_report(&pred_test, &y_test)?;

    let pred_train = model.predict_batch(&extract_x(&train_ds, &names)?)?;
    let y_train = extract_y(&train_ds, &model.output_name)?;
    let mut pred_all = pred_train;
    pred_all.extend_from_slice(&pred_test);
    let mut y_all = y_train;
    y_all.extend_from_slice(&y_test);
    let combined = metric_report(&pred_all, &y_all)?;

    println!("r2_test {:.6}", test.r2_determination);
    println!("r2_combined {:.6}", combined.r2_determination);
    println!("r2_pearson_test {:.6}", test.r2_pearson);
    println!("rmse_test {:.6}", test.rmse);
    println!("rmse_combined {:.6}", combined.rmse);
    println!("mae_test {:.6}", test.mae);
    println!("n_test {}", test.n);
    println!("n_combined {}", combined.n);
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let points = load_csv(&args.points)?;
    let names: Vec<String> = model.inputs.iter().map(|i| i.name.clone()).collect();
    for n in &names {
        if points.column_index(n).is_none() {
            return Err(CliError::Runtime(anfis::AnfisError::Selection(format!(
                "points file lacks input column '{n}'"
            ))));
        }
    }
    let x = extract_x(&points, &names)?;
    let pred = model.predict_batch(&x)?;

    let mut columns: Vec<(String, String)> = names
        .iter()
        .map(|n| {
            let unit = points
                .column_index(n)
                .map(|c| points.columns[c].1.clone())
                .unwrap_or_default();
            (n.clone(), unit)
        })
        .collect();
    columns.push((model.output_name.clone(), String::new()));
    let mut m = Matrix::zeros(points.n_rows(), columns.len());
    for i in 0..points.n_rows() {
        for k in 0..names.len() {
            m.row_mut(i)[k] = x.get(i, k);
        }
        m.row_mut(i)[names.len()] = pred[i];
    }
    let out = Dataset::new(columns, m)?;
    write_csv(&out, &args.out)?;
    eprintln!(
        "wrote {} predictions to {}",
        out.n_rows(),
        args.out.display()
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let max_rules = resolve_max_rules(args.max_rules, &cfg)?;
    let defaults = SweepSpec::default();
    let input_sets: Vec<Vec<String>> = if args.input_sets.is_empty() {
        defaults.input_sets
    } else {
        args.input_sets
            .iter()
            .map(|s| parse_comma_list(s, "input column"))
            .collect::<CliResult<_>>()?
    };
    let mf_counts = match &args.mf_counts {
        Some(text) => parse_comma_list::<usize>(text, "MF count")?,
        None => defaults.mf_counts,
    };
    let families = match &args.families {
        Some(text) => parse_families(text)?,
        None => defaults.families,
    };
    let train = TrainConfig {
        epochs: args.epochs.or(cfg.epochs).unwrap_or(defaults.train.epochs),
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        ..Default::default()
    };
    let spec = SweepSpec {
        input_sets,
        mf_counts,
        families,
        output_name: args
            .output_col
            .clone()
            .or(cfg.output_col.clone())
            .unwrap_or(defaults.output_name),
        train,
        train_frac: args
            .train_frac
            .or(cfg.train_frac)
            .unwrap_or(defaults.train_frac),
        split_seed: args.split_seed.or(cfg.split_seed).unwrap_or(0),
        max_rules,
        jobs: args.jobs.or(cfg.jobs).unwrap_or(1),
    };

    let dataset = load_csv(&args.data)?;
    let report = run_sweep(&dataset, &spec)?;
    report_to_csv(&report, &args.out)?;

    for cell in &report.cells {
        let label = format!(
            "{} mf={} {}",
            cell.input_set.join(","),
            cell.mf_count,
            cell.family
        );
        match cell.status {
            CellStatus::Ok => eprintln!(
                "cell {label}: ok, rules={}, r2_test={:.4} ({:.2}s)",
                cell.rule_count,
                cell.test_metrics
                    .as_ref()
                    .map(|m| m.r2_determination)
                    .unwrap_or(f64::NAN),
                cell.wall_time_s
            ),
            CellStatus::SkippedRuleExplosion => eprintln!(
                "cell {label}: skipped, {} rules exceed the limit",
                cell.rule_count
            ),
            CellStatus::Failed => eprintln!(
                "cell {label}: failed: {}",
                cell.failure.as_deref().unwrap_or("unknown")
            ),
        }
    }
    if let Ok(summary) = trend_summary(&report) {
        for (size, r2) in &summary.best_by_size {
            eprintln!("best r2_test with {size} input(s): {r2:.4}");
        }
    }
    eprintln!("report written to {}", args.out.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage errors.
            e.exit();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

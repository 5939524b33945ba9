//! Sensitivity sweep: train and evaluate one model per (input set, MF count,
//! MF family) cell over a shared train/test split, and emit the trend table.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use crate::dataset::{select_regression, split, Dataset};
use crate::error::{AnfisError, Result};
use crate::fis::{build_model_with, BuildOptions};
use crate::linalg::Matrix;
use crate::membership::MfFamily;
use crate::metrics::{metric_report, MetricReport};
use crate::parallel::{map_indexed, with_jobs};
use crate::trainer::{train, TrainConfig};

/// Axes and execution knobs of one sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub input_sets: Vec<Vec<String>>,
    pub mf_counts: Vec<usize>,
    pub families: Vec<MfFamily>,
    pub output_name: String,
    pub train: TrainConfig,
    pub train_frac: f64,
    pub split_seed: u64,
    pub max_rules: usize,
    /// Worker threads for cell-level parallelism (1 = sequential).
    pub jobs: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let strings = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        SweepSpec {
            input_sets: vec![
                strings(&["x"]),
                strings(&["x", "y"]),
                strings(&["x", "y", "z"]),
                strings(&["x", "y", "z", "v_as"]),
            ],
            mf_counts: vec![2, 4, 6],
            families: MfFamily::ALL.to_vec(),
            output_name: "dpdz".into(),
            // Sweeps default to 100 epochs: the least-squares pass does the
            // heavy lifting, and full sweeps stay tractable.
            train: TrainConfig {
                epochs: 100,
                ..Default::default()
            },
            train_frac: 0.7,
            split_seed: 0,
            max_rules: crate::fis::DEFAULT_MAX_RULES,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    SkippedRuleExplosion,
    Failed,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Ok => "ok",
            CellStatus::SkippedRuleExplosion => "skipped_rule_explosion",
            CellStatus::Failed => "failed",
        })
    }
}

/// One trained-and-evaluated sweep cell.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub input_set: Vec<String>,
    pub mf_count: usize,
    pub family: MfFamily,
    pub status: CellStatus,
    pub rule_count: usize,
    pub train_metrics: Option<MetricReport>,
    pub test_metrics: Option<MetricReport>,
    pub combined_metrics: Option<MetricReport>,
    /// Measured wall time; diagnostic only, never serialized into the
    /// reproducible report.
    pub wall_time_s: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub split_seed: u64,
    pub train_frac: f64,
}

/// Best held-out determination R-squared per input-set size and per
/// (size, MF count).
#[derive(Debug, Clone, PartialEq)]
pub struct TrendSummary {
    pub best_by_size: BTreeMap<usize, f64>,
    pub best_by_size_count: BTreeMap<(usize, usize), f64>,
}

fn extract_xy(ds: &Dataset, names: &[String], output: &str) -> Result<(Matrix, Vec<f64>)> {
    let cols: Vec<usize> = names
        .iter()
        .map(|n| {
            ds.column_index(n)
                .ok_or_else(|| AnfisError::Selection(format!("unknown column '{n}'")))
        })
        .collect::<Result<_>>()?;
    let out = ds
        .column_index(output)
        .ok_or_else(|| AnfisError::Selection(format!("unknown column '{output}'")))?;
    let mut x = Matrix::zeros(ds.n_rows(), cols.len());
    let mut y = Vec::with_capacity(ds.n_rows());
    for i in 0..ds.n_rows() {
        let row = ds.row(i);
        for (k, &c) in cols.iter().enumerate() {
            x.row_mut(i)[k] = row[c];
        }
        y.push(row[out]);
    }
    Ok((x, y))
}

fn run_cell(
    train_ds: &Dataset,
    test_ds: &Dataset,
    input_set: &[String],
    mf_count: usize,
    family: MfFamily,
    spec: &SweepSpec,
) -> SweepCell {
    let started = Instant::now();
    let mut cell = SweepCell {
        input_set: input_set.to_vec(),
        mf_count,
        family,
        status: CellStatus::Failed,
        rule_count: 0,
        train_metrics: None,
        test_metrics: None,
        combined_metrics: None,
        wall_time_s: 0.0,
        failure: None,
    };

    let outcome = (|| -> Result<()> {
        let (x_train, y_train, input_specs) =
            select_regression(train_ds, input_set, &spec.output_name)?;
        let opts = BuildOptions {
            max_rules: spec.max_rules,
            normalize_inputs: spec.train.normalize_inputs,
        };
        let model = build_model_with(&input_specs, mf_count, family, &spec.output_name, &opts)?;
        cell.rule_count = model.n_rules();

        let (trained, _) = train(model, &x_train, &y_train, &spec.train)?;

        let pred_train = trained.predict_batch(&x_train)?;
        let (x_test, y_test) = extract_xy(test_ds, input_set, &spec.output_name)?;
        let pred_test = trained.predict_batch(&x_test)?;

        let mut pred_all = pred_train.clone();
        pred_all.extend_from_slice(&pred_test);
        let mut y_all = y_train.clone();
        y_all.extend_from_slice(&y_test);

        cell.train_metrics = Some(metric_report(&pred_train, &y_train)?);
        cell.test_metrics = Some(metric_report(&pred_test, &y_test)?);
        cell.combined_metrics = Some(metric_report(&pred_all, &y_all)?);
        cell.status = CellStatus::Ok;
        Ok(())
    })();

    if let Err(e) = outcome {
        if let AnfisError::RuleExplosion { rules, .. } = e {
            cell.status = CellStatus::SkippedRuleExplosion;
            cell.rule_count = rules;
        } else {
            cell.status = CellStatus::Failed;
            cell.failure = Some(e.to_string());
        }
    }
    cell.wall_time_s = started.elapsed().as_secs_f64();
    cell
}

/// Run every (input set, MF count, family) cell over one shared split.
///
/// Cells are ordered lexicographically over the grid axes regardless of the
/// execution order; with `jobs > 1` cells run concurrently.
pub fn run_sweep(dataset: &Dataset, spec: &SweepSpec) -> Result<SweepReport> {
    if spec.input_sets.is_empty() || spec.mf_counts.is_empty() || spec.families.is_empty() {
        return Err(AnfisError::Config("sweep grid is empty".into()));
    }
    for set in &spec.input_sets {
        for name in set {
            if dataset.column_index(name).is_none() {
                return Err(AnfisError::Selection(format!("unknown column '{name}'")));
            }
        }
    }
    if dataset.column_index(&spec.output_name).is_none() {
        return Err(AnfisError::Selection(format!(
            "unknown column '{}'",
            spec.output_name
        )));
    }
    spec.train.validate()?;

    let (train_ds, test_ds) = split(dataset, spec.train_frac, spec.split_seed)?;

    let mut grid = Vec::new();
    for input_set in &spec.input_sets {
        for &mf_count in &spec.mf_counts {
            for &family in &spec.families {
                grid.push((input_set, mf_count, family));
            }
        }
    }

    let cells = with_jobs(spec.jobs, || {
        map_indexed(grid.len(), |i| {
            let (input_set, mf_count, family) = grid[i];
            run_cell(&train_ds, &test_ds, input_set, mf_count, family, spec)
        })
    });

    Ok(SweepReport {
        cells,
        split_seed: spec.split_seed,
        train_frac: spec.train_frac,
    })
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// Write the report as comma-separated text.
///
/// Input sets are joined with '|' so every cell stays comma-free. The
/// wall_time_s column is left empty: identical sweeps must produce
/// byte-identical reports, and wall time is inherently volatile (it is kept
/// in memory and printed to the error stream instead).
pub fn report_to_csv(report: &SweepReport, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from(
        "input_set,mf_count,family,status,rule_count,\
         r2_train,r2_test,r2_combined,rmse_test,wall_time_s\n",
    );
    for cell in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},\n",
            cell.input_set.join("|"),
            cell.mf_count,
            cell.family,
            cell.status,
            cell.rule_count,
            fmt_metric(cell.train_metrics.as_ref().map(|m| m.r2_determination)),
            fmt_metric(cell.test_metrics.as_ref().map(|m| m.r2_determination)),
            fmt_metric(cell.combined_metrics.as_ref().map(|m| m.r2_determination)),
            fmt_metric(cell.test_metrics.as_ref().map(|m| m.rmse)),
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Extract the trend behind the report: the best held-out determination
/// R-squared per input-set size, and per (size, MF count).
pub fn trend_summary(report: &SweepReport) -> Result<TrendSummary> {
    let mut best_by_size: BTreeMap<usize, f64> = BTreeMap::new();
    let mut best_by_size_count: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for cell in &report.cells {
        if cell.status != CellStatus::Ok {
            continue;
        }
        let r2 = cell
            .test_metrics
            .as_ref()
            .map(|m| m.r2_determination)
            .unwrap_or(f64::NEG_INFINITY);
        let size = cell.input_set.len();
        best_by_size
            .entry(size)
            .and_modify(|b| *b = b.max(r2))
            .or_insert(r2);
        best_by_size_count
            .entry((size, cell.mf_count))
            .and_modify(|b| *b = b.max(r2))
            .or_insert(r2);
    }
    if best_by_size.is_empty() {
        return Err(AnfisError::Summary(
            "no successful cells in the report".into(),
        ));
    }
    Ok(TrendSummary {
        best_by_size,
        best_by_size_count,
    })
}

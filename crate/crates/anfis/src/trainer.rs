//! Hybrid learning: per epoch, a batch ridge least-squares solve for the
//! consequent parameters followed by one normalized gradient-descent step on
//! the premise (membership) parameters, with Jang's step-size heuristic and
//! best-snapshot retention.
//!
//! Per-sample accumulation runs through [`crate::parallel::chunked_fold`],
//! so results are bit-identical at any thread count.

use serde::{Deserialize, Serialize};

use crate::error::{AnfisError, Result};
use crate::fis::{AnfisModel, Provenance};
use crate::linalg::{cholesky_solve, Matrix, SymPacked};
use crate::membership::{grad_unchecked, MfFamily};
use crate::parallel::{chunked_fold, DEFAULT_CHUNK};

/// All training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub initial_step: f64,
    pub step_increase: f64,
    pub step_decrease: f64,
    pub ridge_lambda: f64,
    pub seed: u64,
    pub normalize_inputs: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 700,
            initial_step: 0.01,
            step_increase: 1.1,
            step_decrease: 0.9,
            ridge_lambda: 1e-8,
            seed: 0,
            normalize_inputs: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(AnfisError::Config(format!(
                "epochs must be at least 1, got {}",
                self.epochs
            )));
        }
        if !(self.initial_step > 0.0) {
            return Err(AnfisError::Config(format!(
                "initial_step must be positive, got {}",
                self.initial_step
            )));
        }
        if !(self.step_decrease > 0.0 && self.step_decrease < 1.0) {
            return Err(AnfisError::Config(format!(
                "step_decrease must lie in (0, 1), got {}",
                self.step_decrease
            )));
        }
        if !(self.step_increase > 1.0) {
            return Err(AnfisError::Config(format!(
                "step_increase must exceed 1, got {}",
                self.step_increase
            )));
        }
        if !(self.ridge_lambda >= 0.0) {
            return Err(AnfisError::Config(format!(
                "ridge_lambda must be non-negative, got {}",
                self.ridge_lambda
            )));
        }
        Ok(())
    }

    /// Stable hex digest of the serialized config, recorded in provenance.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// One epoch's record in the training trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_rmse: f64,
    pub step_size: f64,
}

/// Per-epoch history plus the index of the best epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
    pub best_epoch: usize,
}

impl TrainTrace {
    pub fn to_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut out = String::from("epoch,train_rmse,step_size\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                r.epoch, r.train_rmse, r.step_size
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

fn check_data(model: &AnfisModel, x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() == 0 {
        return Err(AnfisError::Data("empty training set".into()));
    }
    if x.cols() != model.n_inputs() {
        return Err(AnfisError::Shape {
            what: "sample matrix columns".into(),
            expected: model.n_inputs(),
            got: x.cols(),
        });
    }
    if y.len() != x.rows() {
        return Err(AnfisError::Shape {
            what: "target vector".into(),
            expected: x.rows(),
            got: y.len(),
        });
    }
    if x.data().iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(AnfisError::Data("non-finite value in training data".into()));
    }
    Ok(())
}

/// Chunk size keeping the per-chunk normal-equation partials within a fixed
/// memory budget; depends only on problem shape, never on thread count.
fn lse_chunk(n_samples: usize, n_params: usize) -> usize {
    let bytes_per_partial = (n_params * (n_params + 1) / 2 + n_params) * 8;
    let max_partials = ((1usize << 30) / bytes_per_partial.max(1)).max(1);
    let n_chunks = n_samples.div_ceil(DEFAULT_CHUNK).min(max_partials).max(1);
    n_samples.div_ceil(n_chunks)
}

/// Batch ridge least squares for the consequent matrix.
///
/// Minimizes `sum (y - D c)^2 + lambda |c|^2` over the flattened consequents,
/// where D stacks one design row per sample. Returns the consequent matrix
/// and the unregularized residual sum of squares at the solution.
pub fn fit_consequents_lse(
    model: &AnfisModel,
    x: &Matrix,
    y: &[f64],
    ridge_lambda: f64,
) -> Result<(Vec<Vec<f64>>, f64)> {
    check_data(model, x, y)?;
    if !(ridge_lambda >= 0.0) {
        return Err(AnfisError::Config(format!(
            "ridge_lambda must be non-negative, got {ridge_lambda}"
        )));
    }
    let n = x.rows();
    let p = model.n_consequent_params();
    let chunk = lse_chunk(n, p);

    // Normal equations: M = D^T D (packed upper triangle), b = D^T y.
    let (m, b) = chunked_fold(
        n,
        chunk,
        (SymPacked::zeros(p), vec![0.0; p]),
        |range| {
            let mut part_m = SymPacked::zeros(p);
            let mut part_b = vec![0.0; p];
            let mut scratch = model.scratch();
            let mut row = vec![0.0; p];
            for i in range {
                model.design_row_with(x.row(i), &mut scratch, &mut row);
                part_m.rank1_update(&row);
                let yi = y[i];
                for (bk, rk) in part_b.iter_mut().zip(&row) {
                    *bk += rk * yi;
                }
            }
            (part_m, part_b)
        },
        |(mut am, mut ab), (pm, pb)| {
            am.add_assign(&pm);
            for (a, b) in ab.iter_mut().zip(&pb) {
                *a += b;
            }
            (am, ab)
        },
    );

    let mut dense = m.to_dense();
    if ridge_lambda > 0.0 {
        for i in 0..p {
            let v = dense.get(i, i) + ridge_lambda;
            dense.set(i, i, v);
        }
    }
    let flat = cholesky_solve(dense, &b)?;

    let width = model.coeffs_per_rule();
    let consequents: Vec<Vec<f64>> = flat.chunks_exact(width).map(|c| c.to_vec()).collect();

    // Unregularized residual sum of squares at the solution.
    let sse = chunked_fold(
        n,
        chunk,
        0.0f64,
        |range| {
            let mut scratch = model.scratch();
            let mut row = vec![0.0; p];
            let mut acc = 0.0;
            for i in range {
                model.design_row_with(x.row(i), &mut scratch, &mut row);
                let yhat: f64 = row.iter().zip(&flat).map(|(r, c)| r * c).sum();
                let r = y[i] - yhat;
                acc += r * r;
            }
            acc
        },
        |a, b| a + b,
    );

    Ok((consequents, sse))
}

/// Offsets of each (input, mf) parameter block in the flattened premise
/// parameter vector, bank-major.
fn premise_layout(model: &AnfisModel) -> (Vec<Vec<usize>>, usize) {
    let mut offsets = Vec::with_capacity(model.banks.len());
    let mut total = 0;
    for bank in &model.banks {
        let mut per_mf = Vec::with_capacity(bank.mfs.len());
        for mf in &bank.mfs {
            per_mf.push(total);
            total += mf.params.len();
        }
        offsets.push(per_mf);
    }
    (offsets, total)
}

/// Gradient of the training SSE with respect to every premise parameter,
/// holding the consequents fixed. Ordered bank-major: input 0's MFs first,
/// each MF contributing its parameters in family order.
pub fn premise_gradient(model: &AnfisModel, x: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    check_data(model, x, y)?;
    let n = x.rows();
    let (offsets, total) = premise_layout(model);
    let n_inputs = model.n_inputs();

    let grad = chunked_fold(
        n,
        DEFAULT_CHUNK,
        vec![0.0f64; total],
        |range| {
            let mut part = vec![0.0f64; total];
            let mut scratch = model.scratch();
            let mut f = vec![0.0f64; model.n_rules()];
            // d yhat / d mu, laid out like mu.
            let mut dmu: Vec<Vec<f64>> = scratch.mu.clone();
            for i in range {
                let xi = x.row(i);
                let sum_w = model.fire(xi, &mut scratch);
                let inv = 1.0 / sum_w;
                let mut yhat = 0.0;
                for (fi, (wi, row)) in f
                    .iter_mut()
                    .zip(scratch.w.iter().zip(&model.consequents))
                {
                    let mut v = row[n_inputs];
                    for (uk, pk) in scratch.u.iter().zip(row.iter()) {
                        v += uk * pk;
                    }
                    *fi = v;
                    yhat += wi * v;
                }
                yhat *= inv;
                let res = yhat - y[i];

                for d in dmu.iter_mut() {
                    d.iter_mut().for_each(|v| *v = 0.0);
                }
                for (ri, rule) in model.rules.iter().enumerate() {
                    let dyw = (f[ri] - yhat) * inv;
                    let contrib = dyw * scratch.w[ri];
                    for (k, &j) in rule.mf_indices.iter().enumerate() {
                        dmu[k][j] += contrib / scratch.mu[k][j];
                    }
                }
                for (k, bank) in model.banks.iter().enumerate() {
                    let uk = scratch.u[k];
                    for (j, mf) in bank.mfs.iter().enumerate() {
                        let dy_dmu = dmu[k][j];
                        if dy_dmu == 0.0 {
                            continue;
                        }
                        let g = grad_unchecked(mf, uk);
                        let base = offsets[k][j];
                        for (t, gt) in g.iter().enumerate() {
                            part[base + t] += 2.0 * res * dy_dmu * gt;
                        }
                    }
                }
            }
            part
        },
        |mut a, b| {
            for (ai, bi) in a.iter_mut().zip(&b) {
                *ai += bi;
            }
            a
        },
    );
    Ok(grad)
}

/// Clamp premise parameters back into their family's valid domain after a
/// gradient step: widths stay at or above 1e-6 of the bank range, triangular
/// vertices stay sorted and non-collapsed, and peak locations stay inside
/// the bank range (two-sided families shift rigidly so the plateau width is
/// preserved).
fn project_premises(model: &mut AnfisModel) {
    for bank in &mut model.banks {
        let span = bank.hi - bank.lo;
        let width_floor = 1e-6 * span;
        let (lo, hi) = (bank.lo, bank.hi);
        for mf in &mut bank.mfs {
            let p = &mut mf.params;
            match mf.family {
                MfFamily::Gbell => {
                    p[0] = p[0].max(width_floor);
                    p[1] = p[1].max(1e-6);
                    p[2] = p[2].clamp(lo, hi);
                }
                MfFamily::Gauss => {
                    p[0] = p[0].max(width_floor);
                    p[1] = p[1].clamp(lo, hi);
                }
                MfFamily::Gauss2 => {
                    p[0] = p[0].max(width_floor);
                    p[2] = p[2].max(width_floor);
                    shift_center_into(p, lo, hi);
                }
                MfFamily::Dsig | MfFamily::Psig => {
                    shift_center_into(p, lo, hi);
                }
                MfFamily::Tri => {
                    p.sort_by(|a, b| a.partial_cmp(b).expect("finite premise params"));
                    if p[2] - p[0] < width_floor {
                        let mid = p[1];
                        p[0] = mid - 0.5 * width_floor;
                        p[2] = mid + 0.5 * width_floor;
                    }
                    let delta = p[1].clamp(lo, hi) - p[1];
                    if delta != 0.0 {
                        p[0] += delta;
                        p[1] += delta;
                        p[2] += delta;
                    }
                }
            }
        }
    }
}

/// Rigidly translate a two-sided MF so its plateau midpoint lies in [lo, hi].
fn shift_center_into(p: &mut [f64], lo: f64, hi: f64) {
    let center = 0.5 * (p[1] + p[3]);
    let delta = center.clamp(lo, hi) - center;
    if delta != 0.0 {
        p[1] += delta;
        p[3] += delta;
    }
}

/// Step-size adaptation state implementing Jang's heuristic: four
/// consecutive error reductions grow the step; two consecutive
/// reduction/increase oscillations shrink it.
#[derive(Debug, Default)]
struct StepAdapter {
    signs: Vec<i8>,
}

impl StepAdapter {
    fn update(&mut self, prev_rmse: f64, rmse: f64, step: &mut f64, cfg: &TrainConfig) {
        let sign: i8 = if rmse < prev_rmse { -1 } else { 1 };
        self.signs.push(sign);
        if self.signs.len() > 4 {
            self.signs.remove(0);
        }
        if self.signs.len() == 4 {
            let s = &self.signs;
            if s.iter().all(|&v| v == -1) {
                *step *= cfg.step_increase;
                self.signs.clear();
            } else if (s[0] == -1 && s[1] == 1 && s[2] == -1 && s[3] == 1)
                || (s[0] == 1 && s[1] == -1 && s[2] == 1 && s[3] == -1)
            {
                *step *= cfg.step_decrease;
                self.signs.clear();
            }
        }
    }
}

/// Hybrid training loop. Returns the best-RMSE snapshot (with a final
/// least-squares re-solve) and the per-epoch trace. Deterministic for fixed
/// data and config at any parallelism level.
pub fn train(
    mut model: AnfisModel,
    x: &Matrix,
    y: &[f64],
    config: &TrainConfig,
) -> Result<(AnfisModel, TrainTrace)> {
    config.validate()?;
    check_data(&model, x, y)?;
    model.validate()?;

    let n = x.rows() as f64;
    let mut step = config.initial_step;
    let mut adapter = StepAdapter::default();
    let mut records = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, AnfisModel)> = None;
    let mut best_epoch = 0;
    let mut prev_rmse = f64::INFINITY;

    for epoch in 0..config.epochs {
        let (consequents, sse) = fit_consequents_lse(&model, x, y, config.ridge_lambda)?;
        model.consequents = consequents;
        let rmse = (sse / n).sqrt();
        records.push(EpochRecord {
            epoch,
            train_rmse: rmse,
            step_size: step,
        });
        if best.as_ref().is_none_or(|(b, _)| rmse < *b) {
            best = Some((rmse, model.clone()));
            best_epoch = epoch;
        }

        if epoch + 1 < config.epochs {
            let grad = premise_gradient(&model, x, y)?;
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > 0.0 {
                let scale = step / norm;
                let mut idx = 0;
                for bank in &mut model.banks {
                    for mf in &mut bank.mfs {
                        for p in &mut mf.params {
                            *p -= scale * grad[idx];
                            idx += 1;
                        }
                    }
                }
                project_premises(&mut model);
            }
            adapter.update(prev_rmse, rmse, &mut step, config);
        }
        prev_rmse = rmse;
    }

    let (_, mut best_model) = best.expect("at least one epoch ran");
    // Final re-solve on the snapshot premises; idempotent but guarantees the
    // consequents correspond to the returned premises.
    let (consequents, _) = fit_consequents_lse(&best_model, x, y, config.ridge_lambda)?;
    best_model.consequents = consequents;
    best_model.provenance = Some(Provenance {
        seed: config.seed,
        epochs: config.epochs,
        train_rows: x.rows(),
        total_rows: None,
        train_frac: None,
        config_digest: config.digest(),
    });
    best_model.validate()?;

    Ok((
        best_model,
        TrainTrace {
            records,
            best_epoch,
        },
    ))
}

//! First-order Sugeno inference over a grid-partition rule base: fuzzify,
//! multiply per-input degrees into rule firing strengths, normalize, apply
//! linear consequents, and sum.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{AnfisError, Result};
use crate::membership::{eval_clamped, make_mf_bank, MfBank, MfFamily, MfSpec};

/// Default cap on the grid-partition rule count.
pub const DEFAULT_MAX_RULES: usize = 10_000;

/// Model file schema version.
pub const FORMAT_VERSION: u32 = 1;

/// One model input: column name and its range in data units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl InputSpec {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(AnfisError::Config(format!(
                "input range degenerate: [{lo}, {hi}]"
            )));
        }
        Ok(InputSpec {
            name: name.into(),
            lo,
            hi,
        })
    }
}

/// One rule's antecedent: the MF index chosen for each input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub mf_indices: Vec<usize>,
}

/// How training and inference provenance is recorded in the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub epochs: usize,
    pub train_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub total_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub train_frac: Option<f64>,
    pub config_digest: String,
}

/// Construction knobs for [`build_model`].
#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub max_rules: usize,
    /// Build membership banks over [0, 1] and map raw inputs through their
    /// recorded ranges at inference time.
    pub normalize_inputs: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_rules: DEFAULT_MAX_RULES,
            normalize_inputs: true,
        }
    }
}

/// A complete Sugeno model: inputs, per-input MF banks, the cartesian rule
/// list, and one linear consequent row per rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AnfisModel {
    pub inputs: Vec<InputSpec>,
    pub family: MfFamily,
    pub normalize_inputs: bool,
    pub banks: Vec<MfBank>,
    pub rules: Vec<Rule>,
    /// rules x (n_inputs + 1); row i = [p_i, q_i, ..., t_i].
    pub consequents: Vec<Vec<f64>>,
    pub output_name: String,
    pub provenance: Option<Provenance>,
}

/// Reusable evaluation buffers for one model shape.
#[derive(Debug, Clone)]
pub struct Scratch {
    /// Input mapped into bank coordinates.
    pub u: Vec<f64>,
    /// Membership degrees, per input then per MF.
    pub mu: Vec<Vec<f64>>,
    /// Rule firing strengths.
    pub w: Vec<f64>,
}

impl AnfisModel {
    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    /// Width of one design-row block: the linear coefficients plus intercept.
    pub fn coeffs_per_rule(&self) -> usize {
        self.n_inputs() + 1
    }

    /// Total number of consequent parameters.
    pub fn n_consequent_params(&self) -> usize {
        self.n_rules() * self.coeffs_per_rule()
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            u: vec![0.0; self.n_inputs()],
            mu: self.banks.iter().map(|b| vec![0.0; b.mfs.len()]).collect(),
            w: vec![0.0; self.n_rules()],
        }
    }

    /// Map a raw input vector into bank coordinates.
    #[inline]
    pub(crate) fn to_internal(&self, x: &[f64], u: &mut [f64]) {
        if self.normalize_inputs {
            for (k, (xi, spec)) in x.iter().zip(&self.inputs).enumerate() {
                u[k] = (xi - spec.lo) / (spec.hi - spec.lo);
            }
        } else {
            u.copy_from_slice(x);
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(AnfisError::Shape {
                what: "input vector".into(),
                expected: self.n_inputs(),
                got: x.len(),
            });
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(AnfisError::Data(format!("non-finite input value {bad}")));
        }
        Ok(())
    }

    /// Fill `scratch` with degrees and firing strengths; returns their sum.
    #[inline]
    pub(crate) fn fire(&self, x: &[f64], scratch: &mut Scratch) -> f64 {
        self.to_internal(x, &mut scratch.u);
        for (bank, mu) in self.banks.iter().zip(scratch.mu.iter_mut()) {
            let ux = scratch.u[bank.input_index];
            for (m, spec) in mu.iter_mut().zip(&bank.mfs) {
                *m = eval_clamped(spec, ux);
            }
        }
        let mut sum = 0.0;
        for (wi, rule) in scratch.w.iter_mut().zip(&self.rules) {
            let mut w = 1.0;
            for (k, &j) in rule.mf_indices.iter().enumerate() {
                w *= scratch.mu[k][j];
            }
            *wi = w;
            sum += w;
        }
        sum
    }

    /// Rule firing strengths for one raw input vector (layer 2).
    pub fn firing_strengths(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut scratch = self.scratch();
        self.fire(x, &mut scratch);
        Ok(scratch.w)
    }

    /// Model output for one raw input vector (layers 1-5).
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut scratch = self.scratch();
        Ok(self.forward_with(x, &mut scratch))
    }

    #[inline]
    pub(crate) fn forward_with(&self, x: &[f64], scratch: &mut Scratch) -> f64 {
        let sum_w = self.fire(x, scratch);
        let mut y = 0.0;
        for (wi, row) in scratch.w.iter().zip(&self.consequents) {
            let mut f = row[self.n_inputs()];
            for (uk, pk) in scratch.u.iter().zip(row) {
                f += uk * pk;
            }
            y += wi * f;
        }
        y / sum_w
    }

    /// Forward pass over every row of a sample matrix, preserving order.
    pub fn predict_batch(&self, x: &crate::linalg::Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_inputs() {
            return Err(AnfisError::Shape {
                what: "sample matrix columns".into(),
                expected: self.n_inputs(),
                got: x.cols(),
            });
        }
        if let Some(bad) = x.data().iter().find(|v| !v.is_finite()) {
            return Err(AnfisError::Data(format!("non-finite input value {bad}")));
        }
        Ok(crate::parallel::map_indexed(x.rows(), |i| {
            let mut scratch = self.scratch();
            self.forward_with(x.row(i), &mut scratch)
        }))
    }

    /// Linearization of the consequent layer: block i of the row is
    /// `wbar_i * [u, 1]`, so `row . vec(consequents)` equals `forward(x)`.
    pub fn design_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut scratch = self.scratch();
        let mut row = vec![0.0; self.n_consequent_params()];
        self.design_row_with(x, &mut scratch, &mut row);
        Ok(row)
    }

    #[inline]
    pub(crate) fn design_row_with(&self, x: &[f64], scratch: &mut Scratch, row: &mut [f64]) {
        let sum_w = self.fire(x, scratch);
        let inv = 1.0 / sum_w;
        let width = self.coeffs_per_rule();
        let n = self.n_inputs();
        for (i, &wi) in scratch.w.iter().enumerate() {
            let wbar = wi * inv;
            let block = &mut row[i * width..(i + 1) * width];
            for (b, &uk) in block[..n].iter_mut().zip(scratch.u.iter()) {
                *b = wbar * uk;
            }
            block[n] = wbar;
        }
    }

    /// Check all structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(AnfisError::Config("model has no inputs".into()));
        }
        if self.banks.len() != self.inputs.len() {
            return Err(AnfisError::Shape {
                what: "bank list".into(),
                expected: self.inputs.len(),
                got: self.banks.len(),
            });
        }
        for spec in &self.inputs {
            if !(spec.lo < spec.hi) {
                return Err(AnfisError::Config(format!(
                    "input '{}' range degenerate: [{}, {}]",
                    spec.name, spec.lo, spec.hi
                )));
            }
        }
        for bank in &self.banks {
            bank.validate()?;
        }
        let expect_rules: usize = self.banks.iter().map(|b| b.mfs.len()).product();
        if self.rules.len() != expect_rules {
            return Err(AnfisError::Shape {
                what: "rule list (grid partition)".into(),
                expected: expect_rules,
                got: self.rules.len(),
            });
        }
        for rule in &self.rules {
            if rule.mf_indices.len() != self.inputs.len() {
                return Err(AnfisError::Shape {
                    what: "rule antecedent".into(),
                    expected: self.inputs.len(),
                    got: rule.mf_indices.len(),
                });
            }
            for (k, &j) in rule.mf_indices.iter().enumerate() {
                if j >= self.banks[k].mfs.len() {
                    return Err(AnfisError::ModelFormat(format!(
                        "rule references MF {j} of input {k}, which has only {}",
                        self.banks[k].mfs.len()
                    )));
                }
            }
        }
        if self.consequents.len() != self.rules.len() {
            return Err(AnfisError::Shape {
                what: "consequent rows".into(),
                expected: self.rules.len(),
                got: self.consequents.len(),
            });
        }
        let width = self.coeffs_per_rule();
        for (i, row) in self.consequents.iter().enumerate() {
            if row.len() != width {
                return Err(AnfisError::Shape {
                    what: format!("consequent row {i}"),
                    expected: width,
                    got: row.len(),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(AnfisError::Data(format!(
                    "non-finite consequent {v} in row {i}"
                )));
            }
        }
        Ok(())
    }
}

/// Full cartesian rule list in row-major order: the first input is the most
/// significant digit, the last cycles fastest.
fn cartesian_rules(counts: &[usize]) -> Vec<Rule> {
    let total: usize = counts.iter().product();
    let n = counts.len();
    let mut rules = Vec::with_capacity(total);
    for r in 0..total {
        let mut idx = vec![0usize; n];
        let mut rem = r;
        for k in (0..n).rev() {
            idx[k] = rem % counts[k];
            rem /= counts[k];
        }
        rules.push(Rule { mf_indices: idx });
    }
    rules
}

/// Build a grid-partition model: one bank of `mf_count` MFs per input, the
/// full cartesian rule list, and zero-initialized consequents.
pub fn build_model(
    inputs: &[InputSpec],
    mf_count: usize,
    family: MfFamily,
    output_name: &str,
) -> Result<AnfisModel> {
    build_model_with(inputs, mf_count, family, output_name, &BuildOptions::default())
}

pub fn build_model_with(
    inputs: &[InputSpec],
    mf_count: usize,
    family: MfFamily,
    output_name: &str,
    opts: &BuildOptions,
) -> Result<AnfisModel> {
    if inputs.is_empty() {
        return Err(AnfisError::Config("at least one input required".into()));
    }
    if mf_count < 2 {
        return Err(AnfisError::Config(format!(
            "membership count must be at least 2, got {mf_count}"
        )));
    }
    let n = inputs.len();
    let rule_count = mf_count
        .checked_pow(n as u32)
        .ok_or(AnfisError::RuleExplosion {
            rules: usize::MAX,
            max: opts.max_rules,
        })?;
    if rule_count > opts.max_rules {
        return Err(AnfisError::RuleExplosion {
            rules: rule_count,
            max: opts.max_rules,
        });
    }
    let mut banks = Vec::with_capacity(n);
    for (k, spec) in inputs.iter().enumerate() {
        let range = if opts.normalize_inputs {
            (0.0, 1.0)
        } else {
            (spec.lo, spec.hi)
        };
        banks.push(make_mf_bank(k, range, mf_count, family)?);
    }
    let rules = cartesian_rules(&vec![mf_count; n]);
    let consequents = vec![vec![0.0; n + 1]; rule_count];
    let model = AnfisModel {
        inputs: inputs.to_vec(),
        family,
        normalize_inputs: opts.normalize_inputs,
        banks,
        rules,
        consequents,
        output_name: output_name.to_string(),
        provenance: None,
    };
    model.validate()?;
    Ok(model)
}

/// Normalized firing strengths: each weight divided by the total (layer 3).
pub fn normalize_strengths(w: &[f64]) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Err(AnfisError::Shape {
            what: "firing strengths".into(),
            expected: 1,
            got: 0,
        });
    }
    let sum: f64 = w.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(AnfisError::Data(format!(
            "firing strengths must be positive with finite sum, got sum {sum}"
        )));
    }
    Ok(w.iter().map(|wi| wi / sum).collect())
}

// ---------------------------------------------------------------------------
// Model file I/O
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    inputs: Vec<InputSpec>,
    family: MfFamily,
    normalize_inputs: bool,
    /// Per input, per MF: the raw parameter vector.
    banks: Vec<Vec<Vec<f64>>>,
    rules: Vec<Vec<usize>>,
    consequents: Vec<Vec<f64>>,
    output_name: String,
    provenance: Option<Provenance>,
}

/// Serialize a model to a self-describing JSON document. Reals round-trip
/// exactly: the writer emits the shortest decimal that parses back to the
/// same f64.
pub fn save_model(model: &AnfisModel, path: impl AsRef<Path>) -> Result<()> {
    model.validate()?;
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        inputs: model.inputs.clone(),
        family: model.family,
        normalize_inputs: model.normalize_inputs,
        banks: model
            .banks
            .iter()
            .map(|b| b.mfs.iter().map(|m| m.params.clone()).collect())
            .collect(),
        rules: model.rules.iter().map(|r| r.mf_indices.clone()).collect(),
        consequents: model.consequents.clone(),
        output_name: model.output_name.clone(),
        provenance: model.provenance.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| AnfisError::ModelFormat(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<AnfisModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| AnfisError::Parse {
        path: path.display().to_string(),
        row: Some(e.line()),
        col: Some(e.column()),
        detail: e.to_string(),
    })?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| AnfisError::ModelFormat("missing field 'format_version'".into()))?;
    if version != FORMAT_VERSION as u64 {
        return Err(AnfisError::VersionMismatch {
            found: version as u32,
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value)
        .map_err(|e| AnfisError::ModelFormat(format!("in {}: {e}", path.display())))?;

    let banks = file
        .banks
        .iter()
        .enumerate()
        .map(|(k, mfs)| {
            let specs = mfs
                .iter()
                .map(|params| MfSpec::new(file.family, params.clone()))
                .collect::<Result<Vec<_>>>()?;
            let range = if file.normalize_inputs {
                (0.0, 1.0)
            } else {
                (file.inputs[k].lo, file.inputs[k].hi)
            };
            Ok(MfBank {
                input_index: k,
                lo: range.0,
                hi: range.1,
                mfs: specs,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let model = AnfisModel {
        inputs: file.inputs,
        family: file.family,
        normalize_inputs: file.normalize_inputs,
        banks,
        rules: file
            .rules
            .into_iter()
            .map(|mf_indices| Rule { mf_indices })
            .collect(),
        consequents: file.consequents,
        output_name: file.output_name,
        provenance: file.provenance,
    };
    model.validate()?;
    Ok(model)
}

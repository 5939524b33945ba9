//! Parametric membership functions: the six families, their evaluation,
//! analytic parameter gradients, and grid-partition initialization.
//!
//! Outputs are clamped to `[MF_FLOOR, 1]` so downstream rule strengths stay
//! strictly positive and normalization never divides by zero. Gradients are
//! zero wherever the clamp is active and at the kinks of the triangular
//! family.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{AnfisError, Result};

/// Lower clamp for every membership degree.
pub const MF_FLOOR: f64 = 1e-12;

/// The six supported membership-function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfFamily {
    /// Generalized bell: 1 / (1 + |(x-c)/a|^(2b)), params [a, b, c].
    Gbell,
    /// Gaussian: exp(-(x-c)^2 / (2 sigma^2)), params [sigma, c].
    Gauss,
    /// Two-sided Gaussian: rising left branch, plateau, falling right branch,
    /// params [sigma1, c1, sigma2, c2].
    Gauss2,
    /// Difference of two sigmoids, params [a1, c1, a2, c2].
    Dsig,
    /// Product of two sigmoids, params [a1, c1, a2, c2].
    Psig,
    /// Triangular hat, params [a, b, c] with a <= b <= c, a < c.
    Tri,
}

impl MfFamily {
    pub const ALL: [MfFamily; 6] = [
        MfFamily::Gbell,
        MfFamily::Gauss,
        MfFamily::Gauss2,
        MfFamily::Dsig,
        MfFamily::Psig,
        MfFamily::Tri,
    ];

    /// Number of parameters the family takes.
    pub fn param_count(self) -> usize {
        match self {
            MfFamily::Gbell | MfFamily::Tri => 3,
            MfFamily::Gauss => 2,
            MfFamily::Gauss2 | MfFamily::Dsig | MfFamily::Psig => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MfFamily::Gbell => "gbell",
            MfFamily::Gauss => "gauss",
            MfFamily::Gauss2 => "gauss2",
            MfFamily::Dsig => "dsig",
            MfFamily::Psig => "psig",
            MfFamily::Tri => "tri",
        }
    }
}

impl fmt::Display for MfFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MfFamily {
    type Err = AnfisError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gbell" => Ok(MfFamily::Gbell),
            "gauss" => Ok(MfFamily::Gauss),
            "gauss2" => Ok(MfFamily::Gauss2),
            "dsig" => Ok(MfFamily::Dsig),
            "psig" => Ok(MfFamily::Psig),
            "tri" => Ok(MfFamily::Tri),
            other => Err(AnfisError::Config(format!(
                "unknown membership family '{other}' \
                 (expected gbell, gauss, gauss2, dsig, psig, or tri)"
            ))),
        }
    }
}

/// One parametric membership function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfSpec {
    pub family: MfFamily,
    pub params: Vec<f64>,
}

impl MfSpec {
    pub fn new(family: MfFamily, params: Vec<f64>) -> Result<Self> {
        let mf = MfSpec { family, params };
        mf.validate()?;
        Ok(mf)
    }

    /// Check the family's parameter-domain invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |detail: String| {
            Err(AnfisError::InvalidMfParams {
                family: self.family.name().into(),
                detail,
            })
        };
        if self.params.len() != self.family.param_count() {
            return fail(format!(
                "expected {} parameters, got {}",
                self.family.param_count(),
                self.params.len()
            ));
        }
        if let Some(p) = self.params.iter().find(|p| !p.is_finite()) {
            return fail(format!("non-finite parameter {p}"));
        }
        match self.family {
            MfFamily::Gbell => {
                let (a, b) = (self.params[0], self.params[1]);
                if a <= 0.0 || b <= 0.0 {
                    return fail(format!("widths must be positive: a={a}, b={b}"));
                }
            }
            MfFamily::Gauss => {
                if self.params[0] <= 0.0 {
                    return fail(format!("sigma must be positive: {}", self.params[0]));
                }
            }
            MfFamily::Gauss2 => {
                let (s1, s2) = (self.params[0], self.params[2]);
                if s1 <= 0.0 || s2 <= 0.0 {
                    return fail(format!("sigmas must be positive: {s1}, {s2}"));
                }
            }
            MfFamily::Dsig | MfFamily::Psig => {}
            MfFamily::Tri => {
                let (a, b, c) = (self.params[0], self.params[1], self.params[2]);
                if !(a <= b && b <= c && a < c) {
                    return fail(format!("vertices must satisfy a <= b <= c, a < c: ({a}, {b}, {c})"));
                }
            }
        }
        Ok(())
    }

    /// Center used by bank invariants: the location of the peak (plateau
    /// midpoint for two-sided families).
    pub fn center(&self) -> f64 {
        match self.family {
            MfFamily::Gbell => self.params[2],
            MfFamily::Gauss => self.params[1],
            MfFamily::Tri => self.params[1],
            MfFamily::Gauss2 | MfFamily::Dsig | MfFamily::Psig => {
                0.5 * (self.params[1] + self.params[3])
            }
        }
    }
}

fn sig(a: f64, c: f64, x: f64) -> f64 {
    1.0 / (1.0 + (-a * (x - c)).exp())
}

/// Raw (unclamped) membership degree.
fn eval_raw(mf: &MfSpec, x: f64) -> f64 {
    let p = &mf.params;
    match mf.family {
        MfFamily::Gbell => {
            let (a, b, c) = (p[0], p[1], p[2]);
            let t = ((x - c) / a).abs();
            if t == 0.0 {
                1.0
            } else {
                1.0 / (1.0 + t.powf(2.0 * b))
            }
        }
        MfFamily::Gauss => {
            let (s, c) = (p[0], p[1]);
            let d = (x - c) / s;
            (-0.5 * d * d).exp()
        }
        MfFamily::Gauss2 => {
            let (s1, c1, s2, c2) = (p[0], p[1], p[2], p[3]);
            let left = if x < c1 {
                let d = (x - c1) / s1;
                (-0.5 * d * d).exp()
            } else {
                1.0
            };
            let right = if x > c2 {
                let d = (x - c2) / s2;
                (-0.5 * d * d).exp()
            } else {
                1.0
            };
            left * right
        }
        MfFamily::Dsig => sig(p[0], p[1], x) - sig(p[2], p[3], x),
        MfFamily::Psig => sig(p[0], p[1], x) * sig(p[2], p[3], x),
        MfFamily::Tri => {
            let (a, b, c) = (p[0], p[1], p[2]);
            if x <= a || x >= c {
                // At a == b (or b == c) the peak itself is handled below.
                if x == b {
                    1.0
                } else {
                    0.0
                }
            } else if x == b {
                1.0
            } else if x < b {
                (x - a) / (b - a)
            } else {
                (c - x) / (c - b)
            }
        }
    }
}

/// Membership degree of `x`, clamped to `[MF_FLOOR, 1]`.
pub fn eval_mf(mf: &MfSpec, x: f64) -> Result<f64> {
    mf.validate()?;
    if !x.is_finite() {
        return Err(AnfisError::Data(format!("non-finite input {x}")));
    }
    Ok(eval_clamped(mf, x))
}

/// Clamped evaluation without re-validating (hot path; caller guarantees a
/// valid spec and finite input).
#[inline]
pub(crate) fn eval_clamped(mf: &MfSpec, x: f64) -> f64 {
    eval_raw(mf, x).clamp(MF_FLOOR, 1.0)
}

/// Gradient of the clamped degree with respect to each parameter.
///
/// Returns zeros where the clamp is active and at the triangular kinks.
pub fn grad_mf(mf: &MfSpec, x: f64) -> Result<Vec<f64>> {
    mf.validate()?;
    if !x.is_finite() {
        return Err(AnfisError::Data(format!("non-finite input {x}")));
    }
    Ok(grad_unchecked(mf, x))
}

pub(crate) fn grad_unchecked(mf: &MfSpec, x: f64) -> Vec<f64> {
    let p = &mf.params;
    let raw = eval_raw(mf, x);
    if !(MF_FLOOR..=1.0).contains(&raw) {
        return vec![0.0; p.len()];
    }
    match mf.family {
        MfFamily::Gbell => {
            let (a, b, c) = (p[0], p[1], p[2]);
            let d = x - c;
            if d == 0.0 {
                return vec![0.0; 3];
            }
            let t = (d / a).abs();
            let u = t.powf(2.0 * b);
            let g = 1.0 / (1.0 + u);
            let common = -g * g; // d(1/(1+u))/du
            vec![
                common * u * (-2.0 * b / a),
                common * u * 2.0 * t.ln(),
                common * u * (-2.0 * b / d),
            ]
        }
        MfFamily::Gauss => {
            let (s, c) = (p[0], p[1]);
            let d = x - c;
            let g = raw;
            vec![g * d * d / (s * s * s), g * d / (s * s)]
        }
        MfFamily::Gauss2 => {
            let (s1, c1, s2, c2) = (p[0], p[1], p[2], p[3]);
            let (mut left, mut dl_ds, mut dl_dc) = (1.0, 0.0, 0.0);
            if x < c1 {
                let d = x - c1;
                left = (-0.5 * (d / s1) * (d / s1)).exp();
                dl_ds = left * d * d / (s1 * s1 * s1);
                dl_dc = left * d / (s1 * s1);
            }
            let (mut right, mut dr_ds, mut dr_dc) = (1.0, 0.0, 0.0);
            if x > c2 {
                let d = x - c2;
                right = (-0.5 * (d / s2) * (d / s2)).exp();
                dr_ds = right * d * d / (s2 * s2 * s2);
                dr_dc = right * d / (s2 * s2);
            }
            vec![dl_ds * right, dl_dc * right, left * dr_ds, left * dr_dc]
        }
        MfFamily::Dsig => {
            let s1 = sig(p[0], p[1], x);
            let s2 = sig(p[2], p[3], x);
            vec![
                s1 * (1.0 - s1) * (x - p[1]),
                s1 * (1.0 - s1) * (-p[0]),
                -s2 * (1.0 - s2) * (x - p[3]),
                -s2 * (1.0 - s2) * (-p[2]),
            ]
        }
        MfFamily::Psig => {
            let s1 = sig(p[0], p[1], x);
            let s2 = sig(p[2], p[3], x);
            vec![
                s1 * (1.0 - s1) * (x - p[1]) * s2,
                s1 * (1.0 - s1) * (-p[0]) * s2,
                s1 * s2 * (1.0 - s2) * (x - p[3]),
                s1 * s2 * (1.0 - s2) * (-p[2]),
            ]
        }
        MfFamily::Tri => {
            let (a, b, c) = (p[0], p[1], p[2]);
            if x <= a || x >= c || x == b {
                return vec![0.0; 3];
            }
            if x < b {
                let w = b - a;
                vec![(x - b) / (w * w), -(x - a) / (w * w), 0.0]
            } else {
                let w = c - b;
                vec![0.0, (c - x) / (w * w), (x - b) / (w * w)]
            }
        }
    }
}

/// Per-input fuzzification bank: the MFs covering one input's range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfBank {
    pub input_index: usize,
    pub lo: f64,
    pub hi: f64,
    pub mfs: Vec<MfSpec>,
}

impl MfBank {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) {
            return Err(AnfisError::Config(format!(
                "bank range degenerate: [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.mfs.is_empty() {
            return Err(AnfisError::Config("bank has no membership functions".into()));
        }
        for mf in &self.mfs {
            mf.validate()?;
            let c = mf.center();
            if c < self.lo || c > self.hi {
                return Err(AnfisError::Config(format!(
                    "MF center {c} outside bank range [{}, {}]",
                    self.lo, self.hi
                )));
            }
        }
        Ok(())
    }
}

/// Sigmoid slope used by the grid-partition initializer: transition
/// steepness matched to the gauss2 half-width so the 0.5-crossings sit at
/// the plateau edges and neighbor overlap is comparable across families.
fn grid_sigmoid_slope(spacing: f64) -> f64 {
    2.0 * 2.354 * 2.354 / spacing
}

/// Evenly spaced grid-partition bank over `[lo, hi]`.
///
/// Centers are `lo + j*(hi-lo)/(count-1)`; widths give neighboring MFs an
/// intersection near degree 0.5 at the midpoints between centers.
pub fn make_mf_bank(
    input_index: usize,
    range: (f64, f64),
    count: usize,
    family: MfFamily,
) -> Result<MfBank> {
    let (lo, hi) = range;
    if count < 2 {
        return Err(AnfisError::Config(format!(
            "membership count must be at least 2, got {count}"
        )));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(AnfisError::Config(format!("degenerate range [{lo}, {hi}]")));
    }
    let spacing = (hi - lo) / (count - 1) as f64;
    let mut mfs = Vec::with_capacity(count);
    for j in 0..count {
        let center = lo + j as f64 * spacing;
        let params = match family {
            MfFamily::Gbell => vec![spacing / 2.0, 2.0, center],
            MfFamily::Gauss => vec![spacing / 2.354, center],
            MfFamily::Gauss2 => {
                let sigma = (spacing / 4.0) * 2.0 / 2.354;
                vec![sigma, center - spacing / 4.0, sigma, center + spacing / 4.0]
            }
            MfFamily::Dsig => {
                let a = grid_sigmoid_slope(spacing);
                vec![a, center - spacing / 4.0, a, center + spacing / 4.0]
            }
            MfFamily::Psig => {
                let a = grid_sigmoid_slope(spacing);
                vec![a, center - spacing / 4.0, -a, center + spacing / 4.0]
            }
            MfFamily::Tri => vec![center - spacing, center, center + spacing],
        };
        mfs.push(MfSpec::new(family, params)?);
    }
    let bank = MfBank {
        input_index,
        lo,
        hi,
        mfs,
    };
    bank.validate()?;
    Ok(bank)
}

//! Data plane: a deterministic analytic surrogate of the bubble-column
//! pressure-gradient field, CSV ingestion and emission, column selection,
//! and the seeded train/test split.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use crate::error::{AnfisError, Result};
use crate::fis::InputSpec;
use crate::linalg::Matrix;

/// Column-labeled numeric table. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// (name, unit) per column.
    pub columns: Vec<(String, String)>,
    data: Matrix,
}

impl Dataset {
    pub fn new(columns: Vec<(String, String)>, data: Matrix) -> Result<Self> {
        if data.cols() != columns.len() {
            return Err(AnfisError::Shape {
                what: "dataset width".into(),
                expected: columns.len(),
                got: data.cols(),
            });
        }
        if let Some(v) = data.data().iter().find(|v| !v.is_finite()) {
            return Err(AnfisError::Data(format!("non-finite value {v} in dataset")));
        }
        Ok(Dataset { columns, data })
    }

    pub fn n_rows(&self) -> usize {
        self.data.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data.get(i, j)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(n, _)| n == name)
    }

    /// New dataset holding the given rows, in the given order.
    pub fn take_rows(&self, indices: &[usize]) -> Dataset {
        let mut m = Matrix::zeros(indices.len(), self.n_cols());
        for (out, &i) in indices.iter().enumerate() {
            m.row_mut(out).copy_from_slice(self.data.row(i));
        }
        Dataset {
            columns: self.columns.clone(),
            data: m,
        }
    }
}

/// Physical constants of the surrogate pressure-gradient field.
///
/// The defaults pin the column geometry (radius 0.144 m, height 2.6 m), the
/// reference superficial velocity 0.005 m/s, and the holdup/density model, so
/// independently generated datasets are byte-comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateParams {
    /// Column radius, m.
    pub radius: f64,
    /// Column height, m.
    pub height: f64,
    /// Reference superficial velocity, m/s.
    pub v_ref: f64,
    /// Peak holdup factor at the reference velocity.
    pub eps0: f64,
    /// Velocity exponent of the holdup scaling.
    pub exponent: f64,
    /// Liquid density, kg/m^3.
    pub rho_l: f64,
    /// Gas density, kg/m^3.
    pub rho_g: f64,
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
    /// Standard deviation of additive Gaussian noise, Pa/m.
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams {
            radius: 0.144,
            height: 2.6,
            v_ref: 0.005,
            eps0: 0.1,
            exponent: 0.8,
            rho_l: 998.0,
            rho_g: 1.2,
            g: 9.81,
            noise_sd: 0.0,
            seed: 0,
        }
    }
}

impl SurrogateParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("radius", self.radius),
            ("height", self.height),
            ("v_ref", self.v_ref),
            ("rho_l", self.rho_l),
            ("rho_g", self.rho_g),
            ("g", self.g),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(AnfisError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eps0 > 0.0 && self.eps0 < 0.5) {
            return Err(AnfisError::Config(format!(
                "eps0 must lie in (0, 0.5), got {}",
                self.eps0
            )));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(AnfisError::Config(format!(
                "noise_sd must be non-negative, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }
}

/// Sampling layout of the generated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_z: usize,
    /// Superficial velocities to sweep, m/s.
    pub velocities: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        // 10 * 12 * 10 * 5 = 6000 rows.
        GridSpec {
            n_r: 10,
            n_theta: 12,
            n_z: 10,
            velocities: vec![0.0025, 0.005, 0.0075, 0.01, 0.0125],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_r < 1 || self.n_theta < 1 || self.n_z < 1 {
            return Err(AnfisError::Config("grid counts must be at least 1".into()));
        }
        if self.velocities.is_empty() {
            return Err(AnfisError::Config("at least one velocity required".into()));
        }
        for pair in self.velocities.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(AnfisError::Config(
                    "velocities must be strictly increasing".into(),
                ));
            }
        }
        if self.velocities.iter().any(|v| !(*v > 0.0)) {
            return Err(AnfisError::Config("velocities must be positive".into()));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_r * self.n_theta * self.n_z * self.velocities.len()
    }
}

/// Noiseless axial pressure gradient at one point, Pa/m.
///
/// Local gas holdup rises with velocity, peaks on the axis, and grows with
/// height; the gradient is the hydrostatic weight of the aerated mixture.
/// Noise, when requested, is added by [`generate_surrogate`], not here.
pub fn surrogate_dpdz(x: f64, y: f64, z: f64, v: f64, p: &SurrogateParams) -> Result<f64> {
    p.validate()?;
    let r = (x * x + y * y).sqrt();
    if r > p.radius {
        return Err(AnfisError::Data(format!(
            "point radius {r} outside column radius {}",
            p.radius
        )));
    }
    if !(0.0..=p.height).contains(&z) {
        return Err(AnfisError::Data(format!(
            "z = {z} outside column height [0, {}]",
            p.height
        )));
    }
    if !(v > 0.0) {
        return Err(AnfisError::Data(format!("velocity must be positive, got {v}")));
    }
    Ok(dpdz_unchecked(r, z, v, p))
}

#[inline]
fn dpdz_unchecked(r: f64, z: f64, v: f64, p: &SurrogateParams) -> f64 {
    let radial = {
        let t = 1.0 - (r / p.radius) * (r / p.radius);
        t * t
    };
    let axial = 0.6 + 0.4 * z / p.height;
    let eps = (p.eps0 * (v / p.v_ref).powf(p.exponent) * radial * axial).clamp(0.0, 0.5);
    -p.g * (p.rho_l * (1.0 - eps) + p.rho_g * eps)
}

/// Column labels of the generated dataset.
pub const SURROGATE_COLUMNS: [(&str, &str); 5] = [
    ("x", "m"),
    ("y", "m"),
    ("z", "m"),
    ("v_as", "m/s"),
    ("dpdz", "Pa/m"),
];

/// Generate the surrogate dataset: one row per (r, theta, z, v) node.
///
/// Radial and axial stations are cell-centered (`r_i = R (i+1/2)/n_r`,
/// `z_k = H (k+1/2)/n_z`), angles are `2 pi j / n_theta`, and rows nest in
/// (r, theta, z, v) order with v cycling fastest. Defaults yield 6000 rows.
pub fn generate_surrogate(grid: &GridSpec, p: &SurrogateParams) -> Result<Dataset> {
    grid.validate()?;
    p.validate()?;
    let n = grid.n_rows();
    let mut m = Matrix::zeros(n, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut row = 0;
    for i in 0..grid.n_r {
        let r = p.radius * (i as f64 + 0.5) / grid.n_r as f64;
        for j in 0..grid.n_theta {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / grid.n_theta as f64;
            let (x, y) = (r * theta.cos(), r * theta.sin());
            for k in 0..grid.n_z {
                let z = p.height * (k as f64 + 0.5) / grid.n_z as f64;
                for &v in &grid.velocities {
                    let mut dpdz = dpdz_unchecked(r, z, v, p);
                    if p.noise_sd > 0.0 {
                        dpdz += p.noise_sd * standard_normal(&mut rng);
                    }
                    let out = m.row_mut(row);
                    out[0] = x;
                    out[1] = y;
                    out[2] = z;
                    out[3] = v;
                    out[4] = dpdz;
                    row += 1;
                }
            }
        }
    }
    Dataset::new(
        SURROGATE_COLUMNS
            .iter()
            .map(|(n, u)| (n.to_string(), u.to_string()))
            .collect(),
        m,
    )
}

/// One standard normal draw via Box-Muller on two uniform u64 draws.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Map to (0, 1]: avoids ln(0).
    let u1 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let u1 = (1.0 - u1).max(f64::MIN_POSITIVE);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

fn format_header(columns: &[(String, String)]) -> String {
    columns
        .iter()
        .map(|(name, unit)| {
            if unit.is_empty() {
                name.clone()
            } else {
                format!("{name}[{unit}]")
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_header_cell(cell: &str) -> (String, String) {
    match (cell.find('['), cell.ends_with(']')) {
        (Some(open), true) => (
            cell[..open].to_string(),
            cell[open + 1..cell.len() - 1].to_string(),
        ),
        _ => (cell.to_string(), String::new()),
    }
}

/// Write a dataset as comma-separated text with a `name[unit]` header.
/// Values use 17 significant decimal digits so they round-trip exactly.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(ds.n_rows() * ds.n_cols() * 24 + 64);
    out.push_str(&format_header(&ds.columns));
    out.push('\n');
    let mut cells: Vec<String> = Vec::with_capacity(ds.n_cols());
    for i in 0..ds.n_rows() {
        cells.clear();
        cells.extend(ds.row(i).iter().map(|v| format!("{v:.16e}")));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Load a comma-separated numeric table. Row numbers in errors are 1-based
/// file lines (the header is line 1).
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines();
    let header = lines.next().filter(|l| !l.trim().is_empty()).ok_or_else(|| {
        AnfisError::Parse {
            path: display.clone(),
            row: None,
            col: None,
            detail: "missing header".into(),
        }
    })?;
    let columns: Vec<(String, String)> = header.split(',').map(parse_header_cell).collect();
    for (j, (name, _)) in columns.iter().enumerate() {
        if columns[..j].iter().any(|(n, _)| n == name) {
            return Err(AnfisError::Parse {
                path: display.clone(),
                row: Some(1),
                col: Some(j + 1),
                detail: format!("duplicate column name '{name}'"),
            });
        }
    }
    let ncols = columns.len();
    let mut values: Vec<f64> = Vec::new();
    let mut nrows = 0;
    for (line_idx, line) in lines.enumerate() {
        let file_row = line_idx + 2;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ncols {
            return Err(AnfisError::Parse {
                path: display.clone(),
                row: Some(file_row),
                col: None,
                detail: format!("expected {ncols} cells, found {}", cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| AnfisError::Parse {
                path: display.clone(),
                row: Some(file_row),
                col: Some(j + 1),
                detail: format!("non-numeric cell '{cell}'"),
            })?;
            if !v.is_finite() {
                return Err(AnfisError::Parse {
                    path: display.clone(),
                    row: Some(file_row),
                    col: Some(j + 1),
                    detail: format!("non-finite value '{cell}'"),
                });
            }
            values.push(v);
        }
        nrows += 1;
    }
    let mut m = Matrix::zeros(nrows, ncols);
    for i in 0..nrows {
        m.row_mut(i).copy_from_slice(&values[i * ncols..(i + 1) * ncols]);
    }
    Dataset::new(columns, m)
}

// ---------------------------------------------------------------------------
// Column selection and splitting
// ---------------------------------------------------------------------------

/// Extract a regression problem: X follows `input_names` order, y is the
/// output column, and each returned `InputSpec` carries the observed
/// min/max of its column.
pub fn select_regression(
    ds: &Dataset,
    input_names: &[String],
    output_name: &str,
) -> Result<(Matrix, Vec<f64>, Vec<InputSpec>)> {
    if input_names.is_empty() {
        return Err(AnfisError::Selection("at least one input required".into()));
    }
    for (j, name) in input_names.iter().enumerate() {
        if input_names[..j].contains(name) {
            return Err(AnfisError::Selection(format!("duplicated input '{name}'")));
        }
        if name == output_name {
            return Err(AnfisError::Selection(format!(
                "'{name}' listed as both input and output"
            )));
        }
    }
    let col_of = |name: &str| {
        ds.column_index(name)
            .ok_or_else(|| AnfisError::Selection(format!("unknown column '{name}'")))
    };
    let input_cols: Vec<usize> = input_names
        .iter()
        .map(|n| col_of(n))
        .collect::<Result<_>>()?;
    let output_col = col_of(output_name)?;

    if ds.n_rows() == 0 {
        return Err(AnfisError::Selection("dataset has no rows".into()));
    }
    let mut x = Matrix::zeros(ds.n_rows(), input_cols.len());
    let mut y = Vec::with_capacity(ds.n_rows());
    for i in 0..ds.n_rows() {
        let row = ds.row(i);
        let out = x.row_mut(i);
        for (k, &c) in input_cols.iter().enumerate() {
            out[k] = row[c];
        }
        y.push(row[output_col]);
    }
    let mut specs = Vec::with_capacity(input_cols.len());
    for (k, &c) in input_cols.iter().enumerate() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..ds.n_rows() {
            let v = ds.get(i, c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(lo < hi) {
            return Err(AnfisError::Selection(format!(
                "column '{}' is constant ({lo}); it cannot serve as an input",
                input_names[k]
            )));
        }
        specs.push(InputSpec {
            name: input_names[k].clone(),
            lo,
            hi,
        });
    }
    Ok((x, y, specs))
}

/// Seeded uniform shuffle followed by a prefix split. The train part gets
/// `round(n * frac)` rows; the test part gets the rest.
pub fn split(ds: &Dataset, train_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(AnfisError::Config(format!(
            "train fraction must lie strictly inside (0, 1), got {train_frac}"
        )));
    }
    let n = ds.n_rows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates; the tiny modulo bias is irrelevant here and keeps the
    // permutation pinned to the raw ChaCha stream.
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    let n_train = (n as f64 * train_frac).round() as usize;
    let train = ds.take_rows(&order[..n_train]);
    let test = ds.take_rows(&order[n_train..]);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_point_is_pure_liquid() {
        let p = SurrogateParams::default();
        let v = surrogate_dpdz(p.radius, 0.0, 1.0, 0.005, &p).unwrap();
        assert!((v - -9790.38).abs() < 1e-9);
    }

    #[test]
    fn centerline_reference_point() {
        let p = SurrogateParams::default();
        let v = surrogate_dpdz(0.0, 0.0, p.height, p.v_ref, &p).unwrap();
        assert!((v - -8812.5192).abs() < 1e-9);
    }

    #[test]
    fn vanishing_gas_limit() {
        let p = SurrogateParams::default();
        let v = surrogate_dpdz(0.05, 0.02, 1.3, 1e-12, &p).unwrap();
        assert!((v - -9790.38).abs() < 1e-3);
    }

    #[test]
    fn outside_cylinder_rejected() {
        let p = SurrogateParams::default();
        assert!(surrogate_dpdz(0.2, 0.0, 1.0, 0.005, &p).is_err());
        assert!(surrogate_dpdz(0.0, 0.0, 3.0, 0.005, &p).is_err());
    }

    #[test]
    fn default_grid_row_count() {
        let ds = generate_surrogate(&GridSpec::default(), &SurrogateParams::default()).unwrap();
        assert_eq!(ds.n_rows(), 6000);
        assert_eq!(ds.n_cols(), 5);
        assert_eq!(ds.columns[3].0, "v_as");
        assert_eq!(ds.columns[4].1, "Pa/m");
    }

    #[test]
    fn single_cell_grid() {
        let grid = GridSpec {
            n_r: 1,
            n_theta: 1,
            n_z: 1,
            velocities: vec![0.005],
        };
        let ds = generate_surrogate(&grid, &SurrogateParams::default()).unwrap();
        assert_eq!(ds.n_rows(), 1);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let p = SurrogateParams {
            noise_sd: 5.0,
            seed: 99,
            ..Default::default()
        };
        let grid = GridSpec::default();
        let a = generate_surrogate(&grid, &p).unwrap();
        let b = generate_surrogate(&grid, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ds = generate_surrogate(
            &GridSpec {
                n_r: 2,
                n_theta: 3,
                n_z: 2,
                velocities: vec![0.005, 0.01],
            },
            &SurrogateParams::default(),
        )
        .unwrap();
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn csv_text_cell_cites_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let mut text = String::from("a,b\n");
        for i in 0..6 {
            if i == 5 {
                text.push_str("1.0,oops\n");
            } else {
                text.push_str("1.0,2.0\n");
            }
        }
        std::fs::write(&path, text).unwrap();
        let err = load_csv(&path).unwrap_err().to_string();
        assert!(err.contains("row 7"), "{err}");
        assert!(err.contains("column 2"), "{err}");
    }

    #[test]
    fn csv_empty_file_missing_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        let err = load_csv(&path).unwrap_err().to_string();
        assert!(err.contains("missing header"), "{err}");
    }

    #[test]
    fn csv_duplicate_columns_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.csv");
        std::fs::write(&path, "a,a\n1,2\n").unwrap();
        assert!(load_csv(&path).is_err());
    }

    #[test]
    fn csv_ragged_row_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "a,b\n1,2\n3\n").unwrap();
        let err = load_csv(&path).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
    }

    #[test]
    fn selection_shapes_and_errors() {
        let ds = generate_surrogate(&GridSpec::default(), &SurrogateParams::default()).unwrap();
        let (x, y, specs) =
            select_regression(&ds, &["x".into()], "dpdz").unwrap();
        assert_eq!((x.rows(), x.cols()), (6000, 1));
        assert_eq!(y.len(), 6000);
        assert_eq!(specs.len(), 1);

        let names: Vec<String> = ["x", "y", "z", "v_as"].iter().map(|s| s.to_string()).collect();
        let (x, _, specs) = select_regression(&ds, &names, "dpdz").unwrap();
        assert_eq!((x.rows(), x.cols()), (6000, 4));
        assert!(specs[3].lo < specs[3].hi);

        assert!(select_regression(&ds, &["dpdz".into()], "dpdz").is_err());
        assert!(select_regression(&ds, &["nope".into()], "dpdz").is_err());
        assert!(select_regression(&ds, &["x".into(), "x".into()], "dpdz").is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = generate_surrogate(&GridSpec::default(), &SurrogateParams::default()).unwrap();
        let (train, test) = split(&ds, 0.7, 42).unwrap();
        assert_eq!(train.n_rows(), 4200);
        assert_eq!(test.n_rows(), 1800);

        let (train2, test2) = split(&ds, 0.7, 42).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);

        assert!(split(&ds, 1.0, 42).is_err());
        assert!(split(&ds, 0.0, 42).is_err());
    }
}

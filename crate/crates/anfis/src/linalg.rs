//! Minimal dense linear algebra: a flat row-major matrix and a Cholesky
//! solver for the symmetric positive-definite normal equations.

use crate::error::{AnfisError, Result};

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(AnfisError::Shape {
                    what: format!("matrix row {i}"),
                    expected: ncols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }
}

/// Packed upper triangle of a symmetric n-by-n matrix, row by row.
///
/// Entry (i, j) with i <= j lives at `i*n - i*(i-1)/2 + (j-i)`, so each row's
/// tail `j = i..n` is contiguous: rank-1 updates stream through memory.
#[derive(Debug, Clone)]
pub struct SymPacked {
    n: usize,
    data: Vec<f64>,
}

impl SymPacked {
    pub fn zeros(n: usize) -> Self {
        SymPacked {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn row_offset(&self, i: usize) -> usize {
        i * self.n - (i * i - i) / 2
    }

    /// self += v vᵀ (upper triangle only).
    #[inline]
    pub fn rank1_update(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.n);
        let mut off = 0;
        for i in 0..self.n {
            let vi = v[i];
            let row = &mut self.data[off..off + (self.n - i)];
            let tail = &v[i..];
            if vi != 0.0 {
                for (m, &t) in row.iter_mut().zip(tail) {
                    *m += vi * t;
                }
            }
            off += self.n - i;
        }
    }

    /// Elementwise sum, used to merge per-chunk partials.
    pub fn add_assign(&mut self, other: &SymPacked) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[self.row_offset(i) + (j - i)]
    }

    /// Unpack into a full dense matrix.
    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }
}

/// Solve A x = b for symmetric positive-definite A via Cholesky (A = L Lᵀ).
///
/// A is consumed and overwritten with its factor. Fails if A is not positive
/// definite, which for ridge-regularized normal equations signals a
/// degenerate instance rather than a numerical accident.
pub fn cholesky_solve(mut a: Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(AnfisError::Shape {
            what: "cholesky matrix".into(),
            expected: n,
            got: a.cols(),
        });
    }
    if b.len() != n {
        return Err(AnfisError::Shape {
            what: "cholesky rhs".into(),
            expected: n,
            got: b.len(),
        });
    }

    // Factor: row-oriented Cholesky–Crout storing L in the lower triangle.
    for j in 0..n {
        let mut diag = a.get(j, j);
        for k in 0..j {
            let l = a.get(j, k);
            diag -= l * l;
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(AnfisError::Data(format!(
                "normal equations not positive definite at pivot {j}; \
                 increase ridge_lambda"
            )));
        }
        let diag = diag.sqrt();
        a.set(j, j, diag);
        let inv = 1.0 / diag;
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            // Row i and row j prefixes are contiguous slices.
            let (ri, rj) = (i * n, j * n);
            let (pi, pj) = (&a.data[ri..ri + j], &a.data[rj..rj + j]);
            for (x, y) in pi.iter().zip(pj) {
                s -= x * y;
            }
            a.data[i * n + j] = s * inv;
        }
    }

    // Forward substitution: L y = b.
    let mut y = b.to_vec();
    for i in 0..n {
        let row = &a.data[i * n..i * n + i];
        let mut s = y[i];
        for (l, yk) in row.iter().zip(&y[..i]) {
            s -= l * yk;
        }
        y[i] = s / a.get(i, i);
    }

    // Back substitution: Lᵀ x = y.
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= a.get(k, i) * y[k];
        }
        y[i] = s / a.get(i, i);
    }
    Ok(y)
}

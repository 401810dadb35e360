//! Row-major batch matrix used throughout the crate.

use crate::error::{Error, Result};

/// Dense 2-D matrix of `f64`, row-major. Rows are samples, columns features.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2D {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2D {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2D {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from a flat row-major buffer. Fails on length mismatch or
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{}={} values, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        let t = Tensor2D { rows, cols, data };
        t.check_finite()?;
        Ok(t)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Tensor2D::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Copy of the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Tensor2D {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Tensor2D {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::NonFinite(format!(
                "entry ({}, {}) is {}",
                i / self.cols.max(1),
                i % self.cols.max(1),
                self.data[i]
            ))),
        }
    }

    fn check_same_shape(&self, other: &Tensor2D) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor2D) -> Result<Tensor2D> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Tensor2D {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Tensor2D) -> Result<Tensor2D> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Tensor2D {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, k: f64) -> Tensor2D {
        Tensor2D {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor2D {
        Tensor2D {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &Tensor2D) -> Result<Tensor2D> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Tensor2D {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// self (n x k) * other^T (k x m from an m x k matrix) -> n x m.
    ///
    /// This is the layer forward shape: inputs (n x in) times weights
    /// stored (out x in) give activations (n x out).
    pub fn matmul_transpose(&self, other: &Tensor2D) -> Result<Tensor2D> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "inner dims {} vs {}",
                self.cols, other.cols
            )));
        }
        let (n, m) = (self.rows, other.rows);
        let mut data = vec![0.0; n * m];
        for i in 0..n {
            let a_row = self.row(i);
            for j in 0..m {
                let b_row = other.row(j);
                let acc: f64 = a_row.iter().zip(b_row).map(|(a, b)| a * b).sum();
                data[i * m + j] = acc;
            }
        }
        Ok(Tensor2D {
            rows: n,
            cols: m,
            data,
        })
    }

    /// self (n x k) * other (k x m) -> n x m.
    pub fn matmul(&self, other: &Tensor2D) -> Result<Tensor2D> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "inner dims {} vs {}",
                self.cols, other.rows
            )));
        }
        let (n, m) = (self.rows, other.cols);
        let mut data = vec![0.0; n * m];
        for i in 0..n {
            let out_row = &mut data[i * m..(i + 1) * m];
            for (t, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (out, b) in out_row.iter_mut().zip(other.row(t)) {
                    *out += a * b;
                }
            }
        }
        Ok(Tensor2D {
            rows: n,
            cols: m,
            data,
        })
    }

    /// self^T (k x n from n x k) * other (n x m) -> k x m.
    ///
    /// Backward shape: gradients (n x out) against layer inputs (n x in)
    /// give weight gradients (out x in).
    pub fn transpose_matmul(&self, other: &Tensor2D) -> Result<Tensor2D> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "outer dims {} vs {}",
                self.rows, other.rows
            )));
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut data = vec![0.0; k * m];
        for i in 0..n {
            let a_row = self.row(i);
            let b_row = other.row(i);
            for t in 0..k {
                let a = a_row[t];
                if a == 0.0 {
                    continue;
                }
                for j in 0..m {
                    data[t * m + j] += a * b_row[j];
                }
            }
        }
        Ok(Tensor2D {
            rows: k,
            cols: m,
            data,
        })
    }

    /// Add a bias vector to every row.
    pub fn add_row_vector(&self, bias: &[f64]) -> Result<Tensor2D> {
        if bias.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "bias len {} vs cols {}",
                bias.len(),
                self.cols
            )));
        }
        let mut out = self.clone();
        for r in 0..self.rows {
            let row = &mut out.data[r * self.cols..(r + 1) * self.cols];
            for (v, b) in row.iter_mut().zip(bias) {
                *v += b;
            }
        }
        Ok(out)
    }

    /// Column sums as a vector of length `cols`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(r)) {
                *s += v;
            }
        }
        sums
    }

    /// Per-row sum of squares.
    pub fn row_sq_norms(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| v * v).sum())
            .collect()
    }

    /// Sum of squares of all entries (squared Frobenius norm).
    pub fn sq_frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

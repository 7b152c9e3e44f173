use serde::{Deserialize, Serialize};

use crate::error::{Result, ShgnError};

/// Dense rank-2 tensor of f64 values in row-major order.
///
/// Vectors are represented as single-row matrices `[1, n]` and scalars as
/// `[1, 1]`; keeping everything rank-2 keeps the op set small.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: [usize; 2],
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            shape: [rows, cols],
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(ShgnError::shape(
                "from_vec",
                format!("{}x{} needs {} values, got {}", rows, cols, rows * cols, data.len()),
            ));
        }
        Ok(Tensor {
            shape: [rows, cols],
            data,
        })
    }

    pub fn scalar(v: f64) -> Self {
        Tensor {
            shape: [1, 1],
            data: vec![v],
        }
    }

    pub fn row(values: &[f64]) -> Self {
        Tensor {
            shape: [1, values.len()],
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.shape[0], self.shape[1])
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.shape[1] + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.shape[1] + c] = v;
    }

    pub fn row_slice(&self, r: usize) -> &[f64] {
        let w = self.shape[1];
        &self.data[r * w..(r + 1) * w]
    }

    /// Treats a `[1, 1]` tensor as a scalar.
    pub fn item(&self) -> Result<f64> {
        if self.data.len() != 1 {
            return Err(ShgnError::shape(
                "item",
                format!("expected [1,1], got [{},{}]", self.shape[0], self.shape[1]),
            ));
        }
        Ok(self.data[0])
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sq_l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let (n, k) = self.shape();
        let (k2, m) = other.shape();
        if k != k2 {
            return Err(ShgnError::shape(
                "matmul",
                format!("[{},{}] x [{},{}]", n, k, k2, m),
            ));
        }
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let a_row = &self.data[i * k..(i + 1) * k];
            let o_row = &mut out[i * m..(i + 1) * m];
            for (p, &a) in a_row.iter().enumerate() {
                let b_row = &other.data[p * m..(p + 1) * m];
                for (o, &b) in o_row.iter_mut().zip(b_row.iter()) {
                    *o += a * b;
                }
            }
        }
        Ok(Tensor {
            shape: [n, m],
            data: out,
        })
    }

    pub fn transpose(&self) -> Tensor {
        let (n, m) = self.shape();
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                out[j * n + i] = self.data[i * m + j];
            }
        }
        Tensor {
            shape: [m, n],
            data: out,
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(ShgnError::shape(
                "add",
                format!("{:?} vs {:?}", self.shape, other.shape),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(Tensor {
            shape: self.shape,
            data,
        })
    }

    pub fn scale(&self, c: f64) -> Tensor {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// In-place `self += other * c`, used by the optimizer and gradient
    /// accumulation.
    pub fn axpy(&mut self, c: f64, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(ShgnError::shape(
                "axpy",
                format!("{:?} vs {:?}", self.shape, other.shape),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
        Ok(())
    }

    /// Row-wise numerically stable softmax (subtracts the row max).
    pub fn softmax_rows(&self) -> Tensor {
        let (n, m) = self.shape();
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let row = &self.data[i * m..(i + 1) * m];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for (o, &v) in out[i * m..(i + 1) * m].iter_mut().zip(row.iter()) {
                *o = (v - max).exp();
                sum += *o;
            }
            for o in &mut out[i * m..(i + 1) * m] {
                *o /= sum;
            }
        }
        Tensor {
            shape: [n, m],
            data: out,
        }
    }

    /// Row-wise log-softmax via log-sum-exp.
    pub fn log_softmax_rows(&self) -> Tensor {
        let (n, m) = self.shape();
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let row = &self.data[i * m..(i + 1) * m];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
            for (o, &v) in out[i * m..(i + 1) * m].iter_mut().zip(row.iter()) {
                *o = v - lse;
            }
        }
        Tensor {
            shape: [n, m],
            data: out,
        }
    }
}

use crate::{HdxError, Result};

/// Compressed sparse row matrix of `f64`, used for random-walk operators.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(HdxError::shape(
                format!("index inside {rows}x{cols}"),
                format!("({r}, {c})"),
            ));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
        };
        m.prune(0.0);
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `r` as `(col, value)` pairs in column order.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[r]..self.indptr[r + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.indptr[r]..self.indptr[r + 1];
        match self.indices[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    fn prune(&mut self, tol: f64) {
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k].abs() > tol {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Row `r` of `self * other` as a dense vector of length `other.cols()`.
    pub fn row_times(&self, r: usize, other: &CsrMatrix) -> Vec<f64> {
        let mut out = vec![0.0; other.cols];
        for (k, a) in self.row(r) {
            for (c, b) in other.row(k) {
                out[c] += a * b;
            }
        }
        out
    }

    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.cols != other.rows {
            return Err(HdxError::shape(self.cols, other.rows));
        }
        let mut triplets = Vec::new();
        let mut acc = vec![0.0; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if acc[c] == 0.0 {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                triplets.push((r, c, acc[c]));
                acc[c] = 0.0;
            }
            touched.clear();
        }
        CsrMatrix::from_triplets(self.rows, other.cols, triplets)
    }

    /// `a * self + b * other`, entrywise.
    pub fn linear_combination(&self, a: f64, other: &CsrMatrix, b: f64) -> Result<CsrMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(HdxError::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.rows {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, a * v)));
            triplets.extend(other.row(r).map(|(c, v)| (r, c, b * v)));
        }
        CsrMatrix::from_triplets(self.rows, self.cols, triplets)
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            triplets.extend(self.row(r).map(|(c, v)| (c, r, v)));
        }
        CsrMatrix::from_triplets(self.cols, self.rows, triplets).expect("indices in range")
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> Result<f64> {
        let d = self.linear_combination(1.0, other, -1.0)?;
        Ok(d.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Largest deviation of a row sum from 1.
    pub fn stochastic_defect(&self) -> f64 {
        (0..self.rows)
            .map(|r| (self.row(r).map(|(_, v)| v).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn asymmetry(&self) -> f64 {
        self.max_abs_diff(&self.transpose()).expect("square matrix")
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

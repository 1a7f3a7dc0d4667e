use serde::{Deserialize, Serialize};

use super::field::{inv, PrimeField};
use crate::{HdxError, Result};

/// Dense row-major matrix over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    p: u32,
    data: Vec<u32>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize, p: u32) -> Self {
        ExactMatrix {
            rows,
            cols,
            p,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, p: u32) -> Self {
        let mut m = Self::zeros(n, n, p);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from explicit rows, reducing every entry mod `p`.
    pub fn from_rows(rows: &[Vec<u32>], cols: usize, p: u32) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(HdxError::shape(
                    format!("row of length {cols}"),
                    format!("row {i} of length {}", r.len()),
                ));
            }
            data.extend(r.iter().map(|&x| x % p));
        }
        Ok(ExactMatrix {
            rows: rows.len(),
            cols,
            p,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[u32]) -> Result<()> {
        if row.len() != self.cols {
            return Err(HdxError::shape(self.cols, row.len()));
        }
        let p = self.p;
        self.data.extend(row.iter().map(|&x| x % p));
        self.rows += 1;
        Ok(())
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// `M v`.
    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(HdxError::shape(self.cols, v.len()));
        }
        let f = PrimeField::new(self.p)?;
        Ok(self.iter_rows().map(|r| f.dot(r, v)).collect())
    }

    pub fn transpose(&self) -> ExactMatrix {
        let mut t = Self::zeros(self.cols, self.rows, self.p);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn rank(&self) -> usize {
        let mut work = self.data.clone();
        eliminate(&mut work, self.rows, self.cols, self.cols, self.p, false).len()
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0).count()
    }
}

/// Outcome of solving `M x = b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhsOutcome {
    Solution(Vec<u32>),
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elimination {
    pub rank: usize,
    /// Pivot column of each nonzero row of the reduced echelon form.
    pub pivots: Vec<usize>,
    /// `cols - rank` independent vectors spanning the kernel.
    pub nullspace: Vec<Vec<u32>>,
    pub rhs: Option<RhsOutcome>,
}

/// Reduced row echelon form, keeping only the nonzero rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub matrix: ExactMatrix,
}

pub fn rref(m: &ExactMatrix) -> Rref {
    let mut work = m.data.clone();
    let pivots = eliminate(&mut work, m.rows, m.cols, m.cols, m.p, true);
    let rank = pivots.len();
    work.truncate(rank * m.cols);
    Rref {
        rank,
        pivots,
        matrix: ExactMatrix {
            rows: rank,
            cols: m.cols,
            p: m.p,
            data: work,
        },
    }
}

/// Exact rank, a kernel basis and optionally a solution of `M x = rhs`.
///
/// Kernel vectors use the usual free-variable construction on the reduced
/// echelon form: one vector per non-pivot column, with a 1 in that column.
pub fn rank_nullspace(m: &ExactMatrix, rhs: Option<&[u32]>) -> Result<Elimination> {
    let (rows, cols, p) = (m.rows, m.cols, m.p);
    if let Some(b) = rhs {
        if b.len() != rows {
            return Err(HdxError::shape(
                format!("right-hand side of length {rows}"),
                b.len(),
            ));
        }
    }
    let width = cols + rhs.is_some() as usize;
    let mut work = Vec::with_capacity(rows * width);
    for r in 0..rows {
        work.extend_from_slice(m.row(r));
        if let Some(b) = rhs {
            work.push(b[r] % p);
        }
    }
    let pivots = eliminate(&mut work, rows, width, cols, p, true);
    let rank = pivots.len();

    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut nullspace = Vec::with_capacity(cols - rank);
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0u32; cols];
        v[free] = 1;
        for (k, &pc) in pivots.iter().enumerate() {
            let e = work[k * width + free];
            v[pc] = if e == 0 { 0 } else { p - e };
        }
        nullspace.push(v);
    }

    let rhs_outcome = rhs.map(|_| {
        let inconsistent = (rank..rows).any(|r| work[r * width + cols] != 0);
        if inconsistent {
            RhsOutcome::Inconsistent
        } else {
            let mut x = vec![0u32; cols];
            for (k, &pc) in pivots.iter().enumerate() {
                x[pc] = work[k * width + cols];
            }
            RhsOutcome::Solution(x)
        }
    });

    Ok(Elimination {
        rank,
        pivots,
        nullspace,
        rhs: rhs_outcome,
    })
}

/// In-place Gauss-Jordan elimination of a row-major `rows x width` block,
/// choosing pivots among the first `pivot_cols` columns only. Returns the
/// pivot columns; on exit the first `rank` rows hold the echelon form with
/// unit pivots and every entry fully reduced. With `full`, entries above the
/// pivots are cleared as well.
///
/// Entries are updated lazily: additions accumulate in `u32` and a row is
/// reduced only when the next update could overflow.
fn eliminate(
    data: &mut [u32],
    rows: usize,
    width: usize,
    pivot_cols: usize,
    p: u32,
    full: bool,
) -> Vec<usize> {
    let pm1 = (p - 1) as u64;
    let mut bound = vec![pm1; rows];
    let mut pivots = Vec::new();
    let mut nz: Vec<usize> = Vec::new();
    let mut top = 0usize;

    for col in 0..pivot_cols {
        if top == rows {
            break;
        }
        let Some(found) = (top..rows).find(|&r| !data[r * width + col].is_multiple_of(p)) else {
            continue;
        };
        if found != top {
            for c in col..width {
                data.swap(found * width + c, top * width + c);
            }
            bound.swap(found, top);
        }

        // Normalize the pivot row.
        let prow = &mut data[top * width..(top + 1) * width];
        let scale = inv(prow[col] % p, p).expect("pivot is nonzero") as u64;
        nz.clear();
        for (c, x) in prow.iter_mut().enumerate().skip(col) {
            let v = (*x as u64 % p as u64) * scale % p as u64;
            *x = v as u32;
            if v != 0 {
                nz.push(c);
            }
        }
        bound[top] = pm1;
        let sparse = nz.len() * 4 < width - col;
        let last = *nz.last().expect("pivot entry present");

        let (start, end) = if full { (0, rows) } else { (top + 1, rows) };
        for r in start..end {
            if r == top {
                continue;
            }
            let f = data[r * width + col] % p;
            if f == 0 {
                continue;
            }
            let m = (p - f) as u64;
            if bound[r] + m * pm1 > u32::MAX as u64 {
                for x in &mut data[r * width + col..(r + 1) * width] {
                    *x %= p;
                }
                bound[r] = pm1;
            }
            bound[r] += m * pm1;
            let m = m as u32;
            let (target, pivot) = if r < top {
                let (a, b) = data.split_at_mut(top * width);
                (&mut a[r * width..(r + 1) * width], &b[..width])
            } else {
                let (a, b) = data.split_at_mut(r * width);
                (&mut b[..width], &a[top * width..(top + 1) * width])
            };
            if sparse {
                for &c in &nz {
                    target[c] = target[c].wrapping_add(m.wrapping_mul(pivot[c]));
                }
            } else {
                for (x, &y) in target[col..=last].iter_mut().zip(&pivot[col..=last]) {
                    *x = x.wrapping_add(m.wrapping_mul(y));
                }
            }
            // The pivot column is now an exact multiple of p.
            target[col] = 0;
        }
        pivots.push(col);
        top += 1;
    }
    for x in data[..rows * width].iter_mut() {
        *x %= p;
    }
    pivots
}

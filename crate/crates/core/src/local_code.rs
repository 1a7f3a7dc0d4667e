//! Reed-Solomon checks and the vertex-local code `C_{dx,dy}`.
//!
//! `C_{dx,dy}` is the space of functions `f: F_p^3 -> F_p` of degree at most
//! `dx` along every row line `(., b, c)` and at most `dy` along every skew line
//! `y -> (a, y, a y + c)`. Points are indexed as `x + p y + p^2 z`.

use serde::{Deserialize, Serialize};

use crate::algebra::{rank_nullspace, rref, ExactMatrix, PrimeField};
use crate::{HdxError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsSpec {
    pub q: u32,
    pub d: u32,
}

/// Monomial parity rows of `RS(q, d)`: row `j` is `(alpha^j)_alpha` for
/// `j = 0, ..., q - d - 2`, with `0^0 = 1`.
pub fn rs_parity_rows(q: u32, d: u32) -> Result<ExactMatrix> {
    let f = PrimeField::new(q)?;
    if d >= q {
        return Err(HdxError::Parameter(format!(
            "degree {d} must be below the field size {q}"
        )));
    }
    let rows: Vec<Vec<u32>> = (0..q - d - 1)
        .map(|j| (0..q).map(|a| f.pow(a, j as u64)).collect())
        .collect();
    ExactMatrix::from_rows(&rows, q as usize, q)
}

/// Weight-`(d + 2)` check supported on `support`: the coefficient at `alpha`
/// is `prod_{beta != alpha} (alpha - beta)^-1`.
pub fn rs_sparse_check(q: u32, d: u32, support: &[u32]) -> Result<Vec<u32>> {
    let f = PrimeField::new(q)?;
    if d + 2 > q {
        return Err(HdxError::Parameter(format!(
            "RS({q}, {d}) has no nontrivial checks"
        )));
    }
    if support.len() != d as usize + 2 {
        return Err(HdxError::shape(d + 2, support.len()));
    }
    let mut seen = vec![false; q as usize];
    for &s in support {
        if s >= q || std::mem::replace(&mut seen[s as usize], true) {
            return Err(HdxError::Validation(format!(
                "support {support:?} must be distinct points of F_{q}"
            )));
        }
    }
    let mut check = vec![0u32; q as usize];
    for &a in support {
        let den = support
            .iter()
            .filter(|&&b| b != a)
            .fold(1, |acc, &b| f.mul(acc, f.sub(a, b)));
        check[a as usize] = f.inv(den)?;
    }
    Ok(check)
}

/// `(dx + 1)(dy + 1)(dx + dy + 2) / 2`.
pub fn local_dim_formula(dx: u32, dy: u32) -> u64 {
    let (dx, dy) = (dx as u64, dy as u64);
    (dx + 1) * (dy + 1) * (dx + dy + 2) / 2
}

pub fn skew_line_points(a: u32, c: u32, p: u32) -> Vec<(u32, u32, u32)> {
    (0..p).map(|y| (a, y, (a * y + c) % p)).collect()
}

#[inline]
pub fn point_index(x: u32, y: u32, z: u32, p: u32) -> usize {
    (x + p * y + p * p * z) as usize
}

/// `a^e` for all `a < p`, `e < len`, with `0^0 = 1`.
fn power_table(f: &PrimeField, len: usize) -> Vec<Vec<u32>> {
    (0..f.p())
        .map(|a| {
            let mut row = Vec::with_capacity(len);
            let mut x = 1;
            for _ in 0..len {
                row.push(x);
                x = f.mul(x, a);
            }
            row
        })
        .collect()
}

/// Values of the Lagrange basis on nodes `0..=deg` at every point of `F_p`:
/// `out[s][a] = L_s(a)`.
fn lagrange_table(f: &PrimeField, deg: u32) -> Vec<Vec<u32>> {
    (0..=deg)
        .map(|s| {
            let den = (0..=deg)
                .filter(|&t| t != s)
                .fold(1, |acc, t| f.mul(acc, f.sub(s, t)));
            let den_inv = f.inv(den).expect("distinct nodes");
            (0..f.p())
                .map(|a| {
                    let num = (0..=deg)
                        .filter(|&t| t != s)
                        .fold(1, |acc, t| f.mul(acc, f.sub(a, t)));
                    f.mul(num, den_inv)
                })
                .collect()
        })
        .collect()
}

/// Coefficients of the unique polynomial of degree `< p` with the given
/// values at `0, 1, ..., p - 1`.
pub fn interpolate_line(f: &PrimeField, values: &[u32]) -> Vec<u32> {
    let p = f.p();
    let mut out = vec![0u32; p as usize];
    out[0] = values[0];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let e = (p as usize - 1 - k) as u64;
        let s = values
            .iter()
            .enumerate()
            .fold(0, |acc, (a, &v)| f.add(acc, f.mul(v, f.pow(a as u32, e))));
        *slot = f.neg(s);
    }
    out
}

/// Degree of the interpolating polynomial of a line's values, `None` for zero.
pub fn line_degree(f: &PrimeField, values: &[u32]) -> Option<u32> {
    interpolate_line(f, values)
        .iter()
        .rposition(|&c| c != 0)
        .map(|d| d as u32)
}

/// The full `p^3`-column constraint system: for every row line `(b, c)` the
/// `p - dx - 1` monomial checks in `x`, then for every skew line `(a, c)` the
/// `p - dy - 1` checks in `y`.
pub fn constraint_matrix(p: u32, dx: u32, dy: u32) -> Result<ExactMatrix> {
    let f = PrimeField::new(p)?;
    check_degrees(p, dx, dy)?;
    let pw = power_table(&f, p as usize);
    let n = (p * p * p) as usize;
    let mut m = ExactMatrix::zeros(0, n, p);
    let mut row = vec![0u32; n];
    for c in 0..p {
        for b in 0..p {
            for j in 0..(p - dx - 1) as usize {
                row.iter_mut().for_each(|x| *x = 0);
                for x in 0..p {
                    row[point_index(x, b, c, p)] = pw[x as usize][j];
                }
                m.push_row(&row)?;
            }
        }
    }
    for c in 0..p {
        for a in 0..p {
            for j in 0..(p - dy - 1) as usize {
                row.iter_mut().for_each(|x| *x = 0);
                for (x, y, z) in skew_line_points(a, c, p) {
                    row[point_index(x, y, z, p)] = pw[y as usize][j];
                }
                m.push_row(&row)?;
            }
        }
    }
    Ok(m)
}

fn check_degrees(p: u32, dx: u32, dy: u32) -> Result<()> {
    if dx >= p || dy >= p {
        return Err(HdxError::Parameter(format!(
            "degrees ({dx}, {dy}) must be below p = {p}"
        )));
    }
    Ok(())
}

/// The code `C_{dx,dy}` with a canonical basis.
///
/// `basis_eval` is in reduced echelon form, so the coordinates of a codeword
/// in this basis are its values at the `info_set` points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCodeSpec {
    pub p: u32,
    pub dx: u32,
    pub dy: u32,
    pub dim: usize,
    pub basis_eval: Vec<Vec<u32>>,
    /// Per basis vector, `c_{ijk}` at `i + (dx + 1) (j + p k)` for
    /// `i <= dx`, `j, k < p`.
    pub basis_coeffs: Vec<Vec<u32>>,
    pub info_set: Vec<usize>,
    /// `p >= dx + dy + 2` and `dim` equals [`local_dim_formula`].
    pub formula_checked: bool,
}

#[derive(Serialize)]
struct LocalCodeJson<'a> {
    p: u32,
    dx: u32,
    dy: u32,
    dim: usize,
    basis_eval: &'a [Vec<u32>],
    provenance: Provenance,
}

#[derive(Serialize)]
struct Provenance {
    formula_checked: bool,
}

impl LocalCodeSpec {
    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.p).expect("validated at build")
    }

    pub fn len(&self) -> usize {
        (self.p * self.p * self.p) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    pub fn coeff(&self, basis: usize, i: u32, j: u32, k: u32) -> u32 {
        let idx = i + (self.dx + 1) * (j + self.p * k);
        self.basis_coeffs[basis][idx as usize]
    }

    /// Linear combination of the basis vectors.
    pub fn encode(&self, coords: &[u32]) -> Result<Vec<u32>> {
        if coords.len() != self.dim {
            return Err(HdxError::shape(self.dim, coords.len()));
        }
        let f = self.field();
        let mut w = vec![0u32; self.len()];
        for (b, &c) in coords.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (x, &v) in w.iter_mut().zip(&self.basis_eval[b]) {
                *x = f.add(*x, f.mul(c, v));
            }
        }
        Ok(w)
    }

    /// Coordinates of a codeword, or `None` if `w` is not in the code.
    pub fn coordinates(&self, w: &[u32]) -> Option<Vec<u32>> {
        if w.len() != self.len() {
            return None;
        }
        let coords: Vec<u32> = self.info_set.iter().map(|&i| w[i]).collect();
        (self.encode(&coords).ok()? == w).then_some(coords)
    }

    /// Membership by degree checks on every row line and skew line.
    pub fn contains(&self, w: &[u32]) -> bool {
        w.len() == self.len() && line_checks_pass(self.p, self.dx, self.dy, w)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&LocalCodeJson {
            p: self.p,
            dx: self.dx,
            dy: self.dy,
            dim: self.dim,
            basis_eval: &self.basis_eval,
            provenance: Provenance {
                formula_checked: self.formula_checked,
            },
        })?)
    }
}

fn line_checks_pass(p: u32, dx: u32, dy: u32, w: &[u32]) -> bool {
    let f = PrimeField::new(p).expect("prime");
    let pw = power_table(&f, p as usize);
    let check = |vals: &mut dyn Iterator<Item = (u32, u32)>, d: u32| {
        let mut acc = vec![0u64; (p - d - 1) as usize];
        for (t, v) in vals {
            for (j, s) in acc.iter_mut().enumerate() {
                *s += (v as u64) * pw[t as usize][j] as u64;
            }
        }
        acc.iter().all(|&s| s % p as u64 == 0)
    };
    for c in 0..p {
        for b in 0..p {
            let mut it = (0..p).map(|x| (x, w[point_index(x, b, c, p)]));
            if !check(&mut it, dx) {
                return false;
            }
        }
    }
    for c in 0..p {
        for a in 0..p {
            let mut it = skew_line_points(a, c, p)
                .into_iter()
                .map(|(x, y, z)| (y, w[point_index(x, y, z, p)]));
            if !check(&mut it, dy) {
                return false;
            }
        }
    }
    true
}

/// Builds `C_{dx,dy}`.
///
/// Rather than eliminating the full `p^3`-column system, the code is
/// parameterized by its slices at `x = 0, ..., dx` (which determine `f` by
/// interpolation in `x`). A slice `u_s = f(s, ., .)` has low skew degree
/// exactly when `u_s(y, z) = sum_{j <= dy} y^j r_{s,j}(z - s y)`, so the
/// free data is the functions `r_{s,j}` and the only remaining constraints
/// are the skew checks at `x = a > dx`. Every basis vector is then verified
/// against all line checks.
pub fn build_local_code(p: u32, dx: u32, dy: u32) -> Result<LocalCodeSpec> {
    let f = PrimeField::new(p)?;
    check_degrees(p, dx, dy)?;
    let pu = p as usize;
    let pw = power_table(&f, 2 * pu);
    let lag = lagrange_table(&f, dx);
    let nd = (dy + 1) as usize;
    let unknowns = (dx as usize + 1) * nd * pu;
    let var = |s: usize, j: usize, w: usize| (s * nd + j) * pu + w;

    let mut m = ExactMatrix::zeros(0, unknowns, p);
    let mut row = vec![0u32; unknowns];
    for a in (dx + 1)..p {
        for c in 0..p {
            for jc in 0..(p - dy - 1) as usize {
                row.iter_mut().for_each(|x| *x = 0);
                for s in 0..=dx {
                    let l = lag[s as usize][a as usize];
                    for y in 0..p {
                        let w = (f.mul(f.sub(a, s), y) + c) % p;
                        for j in 0..nd {
                            let v = f.mul(l, pw[y as usize][jc + j]);
                            let idx = var(s as usize, j, w as usize);
                            row[idx] = f.add(row[idx], v);
                        }
                    }
                }
                m.push_row(&row)?;
            }
        }
    }
    let kernel = if m.rows() == 0 {
        (0..unknowns)
            .map(|i| {
                let mut v = vec![0; unknowns];
                v[i] = 1;
                v
            })
            .collect()
    } else {
        rank_nullspace(&m, None)?.nullspace
    };

    let n = pu * pu * pu;
    let evals: Vec<Vec<u32>> = kernel
        .iter()
        .map(|r| {
            let mut slices = vec![vec![0u32; pu * pu]; dx as usize + 1];
            for (s, slice) in slices.iter_mut().enumerate() {
                for y in 0..p {
                    for z in 0..p {
                        let w = f.sub(z, f.mul(s as u32, y)) as usize;
                        let v =
                            (0..nd).fold(0, |acc, j| f.add(acc, f.mul(pw[y as usize][j], r[var(s, j, w)])));
                        slice[(y + p * z) as usize] = v;
                    }
                }
            }
            let mut out = vec![0u32; n];
            for x in 0..pu {
                for yz in 0..pu * pu {
                    let v = (0..=dx as usize).fold(0, |acc, s| f.add(acc, f.mul(lag[s][x], slices[s][yz])));
                    out[x + pu * yz] = v;
                }
            }
            out
        })
        .collect();
    finish_spec(p, dx, dy, evals)
}

/// Builds `C_{dx,dy}` as the kernel of [`constraint_matrix`]. Quartic in `p`
/// in memory and much slower; kept as a cross-check.
pub fn build_local_code_dense(p: u32, dx: u32, dy: u32) -> Result<LocalCodeSpec> {
    let m = constraint_matrix(p, dx, dy)?;
    let kernel = rank_nullspace(&m, None)?.nullspace;
    finish_spec(p, dx, dy, kernel)
}

fn finish_spec(p: u32, dx: u32, dy: u32, evals: Vec<Vec<u32>>) -> Result<LocalCodeSpec> {
    let n = (p * p * p) as usize;
    let dim = evals.len();
    let (basis_eval, info_set) = if dim == 0 {
        (Vec::new(), Vec::new())
    } else {
        let r = rref(&ExactMatrix::from_rows(&evals, n, p)?);
        if r.rank != dim {
            return Err(HdxError::Inconsistent(format!(
                "local code basis has rank {} but {} vectors",
                r.rank, dim
            )));
        }
        (r.matrix.iter_rows().map(|x| x.to_vec()).collect(), r.pivots)
    };
    if let Some(b) = basis_eval.iter().position(|v| !line_checks_pass(p, dx, dy, v)) {
        return Err(HdxError::Inconsistent(format!(
            "basis vector {b} of C_({dx},{dy}) over F_{p} violates a line check"
        )));
    }
    let f = PrimeField::new(p)?;
    let basis_coeffs = basis_eval
        .iter()
        .map(|v| {
            let full = interpolate_grid(&f, v);
            truncate_x(&full, p, dx)
                .ok_or_else(|| HdxError::Inconsistent("basis vector has x-degree above dx".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let formula_checked = p >= dx + dy + 2 && dim as u64 == local_dim_formula(dx, dy);
    Ok(LocalCodeSpec {
        p,
        dx,
        dy,
        dim,
        basis_eval,
        basis_coeffs,
        info_set,
        formula_checked,
    })
}

/// Coefficients `c_{ijk}` (at `i + p j + p^2 k`) of the reduced polynomial
/// with the given values on the grid, one variable at a time.
pub fn interpolate_grid(f: &PrimeField, values: &[u32]) -> Vec<u32> {
    let p = f.p() as usize;
    let mut cur = values.to_vec();
    let mut line = vec![0u32; p];
    for stride in [1, p, p * p] {
        for base in 0..p * p * p {
            // `base` must have a zero digit in the current position.
            if (base / stride) % p != 0 {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = cur[base + t * stride];
            }
            for (t, c) in interpolate_line(f, &line).into_iter().enumerate() {
                cur[base + t * stride] = c;
            }
        }
    }
    cur
}

fn truncate_x(full: &[u32], p: u32, dx: u32) -> Option<Vec<u32>> {
    let p = p as usize;
    let nx = dx as usize + 1;
    let mut out = vec![0u32; nx * p * p];
    for (idx, &c) in full.iter().enumerate() {
        let (i, jk) = (idx % p, idx / p);
        if i < nx {
            out[i + nx * jk] = c;
        } else if c != 0 {
            return None;
        }
    }
    Some(out)
}

/// Result of [`coeff_support_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportCheck {
    /// Whether `p >= dx + dy + 2`; when false nothing was checked.
    pub applicable: bool,
    pub holds: bool,
    /// `(basis, i, j, k)` with `j + k > dx + dy` and `c_{ijk} != 0`.
    pub violations: Vec<(usize, u32, u32, u32)>,
}

/// Checks that no basis polynomial has a monomial with `j + k > dx + dy`.
pub fn coeff_support_check(spec: &LocalCodeSpec) -> SupportCheck {
    if spec.p < spec.dx + spec.dy + 2 {
        return SupportCheck {
            applicable: false,
            holds: true,
            violations: Vec::new(),
        };
    }
    let mut violations = Vec::new();
    for b in 0..spec.dim {
        for k in 0..spec.p {
            for j in 0..spec.p {
                if j + k <= spec.dx + spec.dy {
                    continue;
                }
                for i in 0..=spec.dx {
                    if spec.coeff(b, i, j, k) != 0 {
                        violations.push((b, i, j, k));
                    }
                }
            }
        }
    }
    SupportCheck {
        applicable: true,
        holds: violations.is_empty(),
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomialMatrix {
    pub matrix: ExactMatrix,
    pub full_rank: bool,
    /// `r <= k <= m < p`.
    pub hypothesis_holds: bool,
}

/// The `(r + 1) x (r + 1)` matrix with entries `C(m - i, k - j) mod p`.
pub fn binomial_matrix_rank(m: u32, k: u32, r: u32, p: u32) -> Result<BinomialMatrix> {
    let f = PrimeField::new(p)?;
    let n = r as usize + 1;
    let mut mat = ExactMatrix::zeros(n, n, p);
    for i in 0..=r {
        for j in 0..=r {
            let v = if i <= m && j <= k {
                f.binomial((m - i) as u64, (k - j) as u64)
            } else {
                0
            };
            mat.set(i as usize, j as usize, v);
        }
    }
    let full_rank = mat.rank() == n;
    Ok(BinomialMatrix {
        matrix: mat,
        full_rank,
        hypothesis_holds: r <= k && k <= m && m < p,
    })
}

/// Evaluations of `x^i y^j z^k` on the grid.
pub fn monomial_eval(p: u32, i: u32, j: u32, k: u32) -> Vec<u32> {
    let f = PrimeField::new(p).expect("prime");
    let mut out = vec![0u32; (p * p * p) as usize];
    for z in 0..p {
        for y in 0..p {
            for x in 0..p {
                let v = f.mul(f.pow(x, i as u64), f.mul(f.pow(y, j as u64), f.pow(z, k as u64)));
                out[point_index(x, y, z, p)] = v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rs_rows_examples() {
        assert_eq!(rs_parity_rows(3, 1).unwrap().row(0), &[1, 1, 1]);
        let m = rs_parity_rows(5, 2).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.row(0), &[1, 1, 1, 1, 1]);
        assert_eq!(m.row(1), &[0, 1, 2, 3, 4]);
        assert_eq!(rs_parity_rows(7, 6).unwrap().rows(), 0);
        assert!(rs_parity_rows(5, 5).is_err());
    }

    #[test]
    fn rs_rows_annihilate_exactly_low_degree() {
        for (q, d) in [(5u32, 1u32), (5, 2), (7, 3), (11, 4)] {
            let f = PrimeField::new(q).unwrap();
            let h = rs_parity_rows(q, d).unwrap();
            for deg in 0..q {
                let mut coeffs = vec![0; deg as usize + 1];
                coeffs[deg as usize] = 1;
                let w: Vec<u32> = (0..q).map(|a| f.eval_poly(&coeffs, a)).collect();
                let zero = h.mul_vec(&w).unwrap().iter().all(|&s| s == 0);
                assert_eq!(zero, deg <= d, "q={q} d={d} deg={deg}");
            }
        }
    }

    #[test]
    fn sparse_check_examples() {
        let c = rs_sparse_check(5, 1, &[0, 1, 2]).unwrap();
        assert_eq!(c, vec![3, 4, 3, 0, 0]);
        let c = rs_sparse_check(3, 1, &[0, 1, 2]).unwrap();
        let s = c[0];
        assert!(c.iter().all(|&x| x == s));
        assert!(rs_sparse_check(5, 1, &[0, 1, 1]).is_err());
        assert!(rs_sparse_check(5, 1, &[0, 1]).is_err());
        // full support at d = q - 2 is the single dual direction
        let c = rs_sparse_check(7, 5, &[0, 1, 2, 3, 4, 5, 6]).unwrap();
        let h = rs_parity_rows(7, 5).unwrap();
        let m = ExactMatrix::from_rows(&[h.row(0).to_vec(), c], 7, 7).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn formula_values() {
        assert_eq!(local_dim_formula(1, 1), 8);
        assert_eq!(local_dim_formula(0, 0), 1);
        assert_eq!(local_dim_formula(1, 2), 15);
    }

    #[test]
    fn skew_examples() {
        assert_eq!(
            skew_line_points(0, 3, 5),
            (0..5).map(|y| (0, y, 3)).collect::<Vec<_>>()
        );
        assert_eq!(
            skew_line_points(1, 0, 5),
            vec![(1, 0, 0), (1, 1, 1), (1, 2, 2), (1, 3, 3), (1, 4, 4)]
        );
        assert_eq!(skew_line_points(2, 1, 3), vec![(2, 0, 1), (2, 1, 0), (2, 2, 2)]);
    }

    #[test]
    fn lines_partition_the_grid() {
        let p = 7;
        let mut row_hits = vec![0; 343];
        let mut skew_hits = vec![0; 343];
        for c in 0..p {
            for b in 0..p {
                for x in 0..p {
                    row_hits[point_index(x, b, c, p)] += 1;
                }
                for (x, y, z) in skew_line_points(b, c, p) {
                    skew_hits[point_index(x, y, z, p)] += 1;
                }
            }
        }
        assert!(row_hits.iter().chain(&skew_hits).all(|&h| h == 1));
    }

    #[test]
    fn interpolation_round_trips() {
        let f = PrimeField::new(5).unwrap();
        let vals = [3, 1, 4, 1, 0];
        let c = interpolate_line(&f, &vals);
        let back: Vec<u32> = (0..5).map(|a| f.eval_poly(&c, a)).collect();
        assert_eq!(back, vals);
        assert_eq!(line_degree(&f, &[2; 5]), Some(0));
        assert_eq!(line_degree(&f, &[0; 5]), None);
        let g = monomial_eval(5, 1, 2, 3);
        let coeffs = interpolate_grid(&f, &g);
        for (idx, &c) in coeffs.iter().enumerate() {
            assert_eq!(c, (idx == 1 + 5 * 2 + 25 * 3) as u32);
        }
    }

    #[test]
    fn small_codes() {
        let c = build_local_code(5, 1, 1).unwrap();
        assert_eq!(c.dim, 8);
        assert!(c.formula_checked);
        let c = build_local_code(7, 0, 0).unwrap();
        assert_eq!(c.dim, 1);
        assert!(c.basis_eval[0].iter().all(|&v| v == 1));
    }

    #[test]
    fn fast_build_matches_full_system() {
        for (p, dx, dy) in [
            (5u32, 1u32, 1u32),
            (5, 2, 1),
            (5, 0, 3),
            (5, 4, 4),
            (5, 3, 2),
            (7, 2, 2),
            (7, 1, 4),
        ] {
            let fast = build_local_code(p, dx, dy).unwrap();
            let dense = build_local_code_dense(p, dx, dy).unwrap();
            assert_eq!(fast.basis_eval, dense.basis_eval, "p={p} dx={dx} dy={dy}");
        }
        assert_eq!(build_local_code(7, 2, 2).unwrap().dim, 27);
    }

    #[test]
    fn monomials_are_members() {
        for (p, dx, dy) in [(5u32, 1u32, 1u32), (7, 2, 3), (11, 1, 2)] {
            let code = build_local_code(p, dx, dy).unwrap();
            for i in 0..=dx {
                for j in 0..=dy {
                    for k in 0..=dy - j {
                        let m = monomial_eval(p, i, j, k);
                        assert!(code.coordinates(&m).is_some(), "x^{i} y^{j} z^{k}");
                    }
                }
            }
            let outside = monomial_eval(p, dx + 1, 0, 0);
            assert!(!code.contains(&outside));
            assert!(code.coordinates(&outside).is_none());
        }
    }

    #[test]
    fn support_property_on_examples() {
        for (p, dx, dy) in [(5u32, 1u32, 1u32), (7, 0, 0), (13, 2, 3)] {
            let s = coeff_support_check(&build_local_code(p, dx, dy).unwrap());
            assert!(s.applicable && s.holds, "{:?}", s.violations);
        }
        let s = coeff_support_check(&build_local_code(5, 2, 2).unwrap());
        assert!(!s.applicable);
    }

    #[test]
    fn binomial_examples() {
        let b = binomial_matrix_rank(4, 2, 1, 5).unwrap();
        assert_eq!(b.matrix.row(0), &[1, 4]);
        assert_eq!(b.matrix.row(1), &[3, 3]);
        assert!(b.full_rank && b.hypothesis_holds);
        let b = binomial_matrix_rank(3, 2, 2, 5).unwrap();
        assert_eq!(b.matrix.row(0), &[3, 3, 1]);
        assert_eq!(b.matrix.row(1), &[1, 2, 1]);
        assert_eq!(b.matrix.row(2), &[0, 1, 1]);
        assert!(b.full_rank);
        let b = binomial_matrix_rank(6, 4, 0, 7).unwrap();
        assert_eq!(b.matrix.row(0), &[15 % 7]);
        assert!(!binomial_matrix_rank(3, 4, 1, 5).unwrap().hypothesis_holds);
    }

    #[test]
    fn json_shape() {
        let s = build_local_code(5, 0, 0).unwrap().to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["dim"], 1);
        assert_eq!(v["provenance"]["formula_checked"], true);
        assert_eq!(v["basis_eval"][0].as_array().unwrap().len(), 125);
    }
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::{HdxError, Result};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Largest dimension handled by the dense solver.
    pub dense_limit: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            dense_limit: 2048,
            tolerance: 1e-13,
            max_iterations: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMethod {
    Dense,
    /// Deflated, shifted power iteration; only the two top eigenvalues are known.
    Power {
        iterations: usize,
        converged: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    pub lambda2: f64,
    pub method: SpectralMethod,
}

/// Full spectrum of a symmetric matrix.
pub fn second_eigenvalue_dense(a: &DMatrix<f64>) -> Result<SpectralResult> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(HdxError::shape(
            "square matrix".to_string(),
            format!("{}x{}", n, a.ncols()),
        ));
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL {
        return Err(HdxError::Validation(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let mut eigenvalues: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    let lambda2 = eigenvalues.get(1).copied().unwrap_or(f64::NAN);
    Ok(SpectralResult {
        eigenvalues,
        lambda2,
        method: SpectralMethod::Dense,
    })
}

/// Second largest eigenvalue of a sparse symmetric matrix. Dense up to
/// `opts.dense_limit`, otherwise power iteration on `A + s I` deflated
/// against the computed top eigenvector.
pub fn second_eigenvalue(a: &CsrMatrix, opts: &SpectralOptions) -> Result<SpectralResult> {
    if a.rows() != a.cols() {
        return Err(HdxError::shape(
            "square matrix",
            format!("{}x{}", a.rows(), a.cols()),
        ));
    }
    if a.rows() <= opts.dense_limit {
        return second_eigenvalue_dense(&a.to_dense());
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(HdxError::Validation(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    // Gershgorin bound makes A + shift I positive semidefinite.
    let shift = (0..a.rows())
        .map(|r| a.row(r).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let (l1, v1, it1, ok1) = power(a, shift, &[], opts, opts.seed);
    let (l2, _, it2, ok2) = power(a, shift, &[v1], opts, opts.seed.wrapping_add(1));
    Ok(SpectralResult {
        eigenvalues: vec![l1, l2],
        lambda2: l2,
        method: SpectralMethod::Power {
            iterations: it1 + it2,
            converged: ok1 && ok2,
        },
    })
}

fn power(
    a: &CsrMatrix,
    shift: f64,
    deflate: &[Vec<f64>],
    opts: &SpectralOptions,
    seed: u64,
) -> (f64, Vec<f64>, usize, bool) {
    use rand::{Rng, SeedableRng};
    let n = a.rows();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let project = |v: &mut Vec<f64>| {
        for u in deflate {
            let d: f64 = u.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    };
    project(&mut v);
    let mut lambda = f64::NAN;
    for it in 1..=opts.max_iterations {
        let mut w = a.mul_vec(&v);
        for (x, y) in w.iter_mut().zip(&v) {
            *x += shift * y;
        }
        let rq: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() - shift;
        project(&mut w);
        v = w;
        if (rq - lambda).abs() < opts.tolerance {
            return (rq, v, it, true);
        }
        lambda = rq;
    }
    (lambda, v, opts.max_iterations, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, (i + 1) % n, 0.5));
            t.push(((i + 1) % n, i, 0.5));
        }
        CsrMatrix::from_triplets(n, n, t).unwrap()
    }

    #[test]
    fn triangle_and_square() {
        let k3 = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 0.5 });
        let r = second_eigenvalue_dense(&k3).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((r.lambda2 + 0.5).abs() < 1e-12);
        let r = second_eigenvalue(&cycle(4), &SpectralOptions::default()).unwrap();
        assert!(r.lambda2.abs() < 1e-12);
        assert!((r.eigenvalues[3] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(
            second_eigenvalue_dense(&m),
            Err(HdxError::Validation(_))
        ));
    }

    #[test]
    fn power_iteration_matches_dense() {
        // Cycle with a chord pattern so that the gap is not tiny.
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            for step in [1, 7] {
                t.push((i, (i + step) % n, 0.25));
                t.push(((i + step) % n, i, 0.25));
            }
        }
        let m = CsrMatrix::from_triplets(n, n, t).unwrap();
        let dense = second_eigenvalue(&m, &SpectralOptions::default()).unwrap();
        let opts = SpectralOptions {
            dense_limit: 10,
            tolerance: 1e-13,
            ..Default::default()
        };
        let it = second_eigenvalue(&m, &opts).unwrap();
        assert!(matches!(it.method, SpectralMethod::Power { converged: true, .. }));
        assert!(
            (dense.lambda2 - it.lambda2).abs() < 1e-6,
            "{} vs {}",
            dense.lambda2,
            it.lambda2
        );
    }

    #[test]
    fn stochastic_spectra_lie_in_unit_interval() {
        for n in 3..20 {
            let r = second_eigenvalue(&cycle(n), &SpectralOptions::default()).unwrap();
            assert!(r
                .eigenvalues
                .iter()
                .all(|&x| (-1.0 - 1e-9..=1.0 + 1e-9).contains(&x)));
        }
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ComplexInstance;
use crate::algebra::CsrMatrix;
use crate::{HdxError, Result};

/// Above this many edges the walk operators are not materialized and the
/// identities are checked on sampled rows.
pub const DEFAULT_DENSE_EDGE_LIMIT: usize = 20_000;

/// Row-stochastic edge walks.
#[derive(Clone, Debug)]
pub struct WalkMatrices {
    /// `UD`: edge, endpoint, edge through that endpoint.
    pub lower: CsrMatrix,
    /// `M+`: edge, triangle, one of the two other edges of the triangle.
    pub upper: CsrMatrix,
    /// `DU`: edge, triangle, any of its three edges.
    pub lazy_upper: CsrMatrix,
    /// `S_{0,1} D`: edge, triangle, opposite vertex, edge through it.
    pub swap: CsrMatrix,
}

fn merge(mut entries: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    entries.sort_by_key(|&(c, _)| c);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out
}

impl ComplexInstance {
    fn vertex_degree(&self) -> f64 {
        2.0 * (self.q() as f64).powi(2)
    }

    pub fn lower_walk_row(&self, e: usize) -> Vec<(usize, f64)> {
        let w = 0.5 / self.vertex_degree();
        merge(
            self.edge_vertices(e)
                .iter()
                .flat_map(|&v| {
                    self.vertex_edges(v as usize)
                        .iter()
                        .map(move |&f| (f as usize, w))
                })
                .collect(),
        )
    }

    pub fn upper_walk_row(&self, e: usize) -> Vec<(usize, f64)> {
        let w = 0.5 / self.q() as f64;
        merge(
            self.edge_star(e)
                .iter()
                .flat_map(|&t| self.triangle_edges(t as usize))
                .filter(|&f| f as usize != e)
                .map(|f| (f as usize, w))
                .collect(),
        )
    }

    pub fn lazy_upper_walk_row(&self, e: usize) -> Vec<(usize, f64)> {
        let w = 1.0 / (3.0 * self.q() as f64);
        merge(
            self.edge_star(e)
                .iter()
                .flat_map(|&t| self.triangle_edges(t as usize))
                .map(|f| (f as usize, w))
                .collect(),
        )
    }

    pub fn swap_walk_row(&self, e: usize) -> Vec<(usize, f64)> {
        let ty = self.edge_type(e);
        let w = 1.0 / (self.q() as f64 * self.vertex_degree());
        merge(
            self.edge_star(e)
                .iter()
                .flat_map(|&t| {
                    let v = self.triangle_vertices(t as usize)[ty - 1] as usize;
                    self.vertex_edges(v).iter().map(move |&f| (f as usize, w))
                })
                .collect(),
        )
    }
}

fn materialize(x: &ComplexInstance, row: impl Fn(usize) -> Vec<(usize, f64)>) -> CsrMatrix {
    let n = x.num_edges();
    let triplets = (0..n)
        .flat_map(|e| row(e).into_iter().map(move |(c, v)| (e, c, v)))
        .collect();
    CsrMatrix::from_triplets(n, n, triplets).expect("edge indices in range")
}

/// Materializes the four walks; refuses above `edge_limit` edges.
pub fn walk_matrices(x: &ComplexInstance, edge_limit: usize) -> Result<WalkMatrices> {
    if x.num_edges() > edge_limit {
        return Err(HdxError::budget(
            "walk matrices",
            x.num_edges() as u128,
            edge_limit as u128,
        ));
    }
    Ok(WalkMatrices {
        lower: materialize(x, |e| x.lower_walk_row(e)),
        upper: materialize(x, |e| x.upper_walk_row(e)),
        lazy_upper: materialize(x, |e| x.lazy_upper_walk_row(e)),
        swap: materialize(x, |e| x.swap_walk_row(e)),
    })
}

impl WalkMatrices {
    /// `(<g, M+ g>, <g, (UD + gamma I) g>)` with the uniform inner product.
    pub fn updown_sides(&self, g: &[f64], gamma: f64) -> (f64, f64) {
        let n = g.len() as f64;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n;
        let mg = self.upper.mul_vec(g);
        let ug = self.lower.mul_vec(g);
        (dot(g, &mg), dot(g, &ug) + gamma * dot(g, g))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkVerification {
    Exact,
    Sampled { rows: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkResiduals {
    pub verification: WalkVerification,
    /// `max |DU - (2/3 M+ + 1/3 I)|`.
    pub du_identity: f64,
    /// `max |M+ UD - (1/2 S D + 1/2 UD)|`.
    pub swap_identity: f64,
    /// Largest row-sum deviation from 1 over all four walks.
    pub stochastic_defect: f64,
}

/// Checks `DU = 2/3 M+ + 1/3 I` and `M+ UD = 1/2 S_{0,1} D + 1/2 UD`
/// entrywise: on every row when the instance has at most `edge_limit`
/// edges, otherwise on `samples` seeded random rows.
pub fn walk_identities(
    x: &ComplexInstance,
    edge_limit: usize,
    samples: usize,
    seed: u64,
) -> Result<WalkResiduals> {
    let n = x.num_edges();
    if n <= edge_limit {
        let w = walk_matrices(x, edge_limit)?;
        let lhs = w.lazy_upper.clone();
        let rhs = w
            .upper
            .linear_combination(2.0 / 3.0, &CsrMatrix::identity(n), 1.0 / 3.0)?;
        let du_identity = lhs.max_abs_diff(&rhs)?;
        let lhs = w.upper.matmul(&w.lower)?;
        let rhs = w.swap.linear_combination(0.5, &w.lower, 0.5)?;
        let swap_identity = lhs.max_abs_diff(&rhs)?;
        let stochastic_defect = [&w.lower, &w.upper, &w.lazy_upper, &w.swap]
            .iter()
            .map(|m| m.stochastic_defect())
            .fold(0.0, f64::max);
        return Ok(WalkResiduals {
            verification: WalkVerification::Exact,
            du_identity,
            swap_identity,
            stochastic_defect,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut du_identity = 0.0f64;
    let mut swap_identity = 0.0f64;
    let mut stochastic_defect = 0.0f64;
    let mut acc = Accumulator::new(n);
    for _ in 0..samples {
        let e = rng.random_range(0..n);
        let upper = x.upper_walk_row(e);
        let lower = x.lower_walk_row(e);
        let lazy = x.lazy_upper_walk_row(e);
        let swap = x.swap_walk_row(e);
        for row in [&upper, &lower, &lazy, &swap] {
            let s: f64 = row.iter().map(|&(_, v)| v).sum();
            stochastic_defect = stochastic_defect.max((s - 1.0).abs());
        }

        acc.add_row(&lazy, 1.0);
        acc.add_row(&upper, -2.0 / 3.0);
        acc.add(e, -1.0 / 3.0);
        du_identity = du_identity.max(acc.drain_max_abs());

        for &(mid, a) in &upper {
            acc.add_row(&x.lower_walk_row(mid), a);
        }
        acc.add_row(&swap, -0.5);
        acc.add_row(&lower, -0.5);
        swap_identity = swap_identity.max(acc.drain_max_abs());
    }
    Ok(WalkResiduals {
        verification: WalkVerification::Sampled { rows: samples, seed },
        du_identity,
        swap_identity,
        stochastic_defect,
    })
}

/// Sparse accumulator over a dense scratch vector.
struct Accumulator {
    dense: Vec<f64>,
    touched: Vec<usize>,
    mark: Vec<bool>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            dense: vec![0.0; n],
            touched: Vec::new(),
            mark: vec![false; n],
        }
    }

    fn add(&mut self, c: usize, v: f64) {
        if !self.mark[c] {
            self.mark[c] = true;
            self.touched.push(c);
        }
        self.dense[c] += v;
    }

    fn add_row(&mut self, row: &[(usize, f64)], scale: f64) {
        for &(c, v) in row {
            self.add(c, scale * v);
        }
    }

    fn drain_max_abs(&mut self) -> f64 {
        let mut m = 0.0f64;
        for &c in &self.touched {
            m = m.max(self.dense[c].abs());
            self.dense[c] = 0.0;
            self.mark[c] = false;
        }
        self.touched.clear();
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::q3;

    #[test]
    fn identities_hold_exactly_and_when_sampled() {
        let x = q3();
        let r = walk_identities(x, DEFAULT_DENSE_EDGE_LIMIT, 0, 0).unwrap();
        assert_eq!(r.verification, WalkVerification::Exact);
        assert!(r.du_identity < 1e-12, "{}", r.du_identity);
        assert!(r.swap_identity < 1e-12, "{}", r.swap_identity);
        assert!(r.stochastic_defect < 1e-12);
        let s = walk_identities(x, 0, 300, 5).unwrap();
        assert!(matches!(
            s.verification,
            WalkVerification::Sampled { rows: 300, .. }
        ));
        assert!(s.du_identity < 1e-12 && s.swap_identity < 1e-12);
    }

    #[test]
    fn walk_row_supports() {
        let x = q3();
        // lower walk: 2 endpoints x 18 edges, the starting edge counted twice
        assert_eq!(x.lower_walk_row(0).len(), 35);
        assert_eq!(x.upper_walk_row(0).len(), 6);
        assert_eq!(x.lazy_upper_walk_row(0).len(), 7);
        assert!(walk_matrices(x, 10).is_err());
    }

    #[test]
    fn updown_inequality_on_random_vectors() {
        let x = q3();
        let w = walk_matrices(x, DEFAULT_DENSE_EDGE_LIMIT).unwrap();
        let gamma = 1.0 / 3f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let g: Vec<f64> = (0..x.num_edges()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (lhs, rhs) = w.updown_sides(&g, gamma);
            assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
        }
    }
}

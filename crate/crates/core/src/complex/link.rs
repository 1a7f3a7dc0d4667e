use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{second_eigenvalue_dense, SpectralResult};
use crate::Result;

/// Bipartite multigraph with parts `0..left` and `0..right`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(u32, u32)>,
}

/// The link model: left vertices `(*, b, c)` at index `b q + c`, right
/// vertices `(alpha, *, gamma)` at index `alpha q + gamma`, joined iff
/// `c = alpha b + gamma`.
pub fn link_graph(q: u32) -> BipartiteGraph {
    let mut edges = Vec::with_capacity((q * q * q) as usize);
    for b in 0..q {
        for c in 0..q {
            for alpha in 0..q {
                let gamma = (c + q * q - alpha * b % q) % q;
                edges.push((b * q + c, alpha * q + gamma));
            }
        }
    }
    BipartiteGraph {
        left: (q * q) as usize,
        right: (q * q) as usize,
        edges,
    }
}

impl BipartiteGraph {
    pub fn num_vertices(&self) -> usize {
        self.left + self.right
    }

    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut l = vec![0; self.left];
        let mut r = vec![0; self.right];
        for &(a, b) in &self.edges {
            l[a as usize] += 1;
            r[b as usize] += 1;
        }
        (l, r)
    }

    pub fn is_biregular(&self, dl: usize, dr: usize) -> bool {
        let (l, r) = self.degrees();
        l.iter().all(|&d| d == dl) && r.iter().all(|&d| d == dr)
    }

    pub fn has_multi_edges(&self) -> bool {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e.windows(2).any(|w| w[0] == w[1])
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            let (a, b) = (a as usize, self.left + b as usize);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Exact `B B^T` of the `left x right` biadjacency matrix.
    pub fn gram(&self) -> Vec<Vec<u64>> {
        let mut nbrs = vec![Vec::new(); self.right];
        for &(a, b) in &self.edges {
            nbrs[b as usize].push(a as usize);
        }
        let mut g = vec![vec![0u64; self.left]; self.left];
        for ns in &nbrs {
            for &a in ns {
                for &b in ns {
                    g[a][b] += 1;
                }
            }
        }
        g
    }

    /// `D^{-1/2} A D^{-1/2}` on all `left + right` vertices, left part first.
    pub fn normalized_adjacency(&self) -> DMatrix<f64> {
        let n = self.num_vertices();
        let (dl, dr) = self.degrees();
        let deg: Vec<f64> = dl.iter().chain(&dr).map(|&d| d as f64).collect();
        let mut a = DMatrix::zeros(n, n);
        for &(l, r) in &self.edges {
            let (i, j) = (l as usize, self.left + r as usize);
            let w = 1.0 / (deg[i] * deg[j]).sqrt();
            a[(i, j)] += w;
            a[(j, i)] += w;
        }
        a
    }

    pub fn spectrum(&self) -> Result<SpectralResult> {
        second_eigenvalue_dense(&self.normalized_adjacency())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_link_structure() {
        for q in [2u32, 3, 5, 7] {
            let g = link_graph(q);
            assert_eq!(g.num_vertices(), 2 * (q * q) as usize);
            assert_eq!(g.edges.len(), (q * q * q) as usize);
            assert!(g.is_biregular(q as usize, q as usize));
            assert!(!g.has_multi_edges());
            assert!(g.is_connected());
        }
    }

    #[test]
    fn gram_matrix_has_kronecker_form() {
        let q = 5u32;
        let g = link_graph(q).gram();
        for b in 0..q {
            for c in 0..q {
                for b2 in 0..q {
                    for c2 in 0..q {
                        let expected = if b != b2 {
                            1
                        } else if c == c2 {
                            q as u64
                        } else {
                            0
                        };
                        assert_eq!(g[(b * q + c) as usize][(b2 * q + c2) as usize], expected);
                    }
                }
            }
        }
    }

    #[test]
    fn second_eigenvalue_is_inverse_root_q() {
        let r = link_graph(3).spectrum().unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((r.lambda2 - 1.0 / 3f64.sqrt()).abs() < 1e-9);
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ComplexInstance, DEFAULT_DENSE_EDGE_LIMIT};
use crate::algebra::{second_eigenvalue, CsrMatrix, SpectralMethod, SpectralOptions};
use crate::Result;

/// Normalized adjacency `D^{-1/2} A D^{-1/2}` of the graph `(X(0), X(1))`.
pub fn skeleton_graph(x: &ComplexInstance) -> CsrMatrix {
    let n = x.num_vertices();
    let deg: Vec<f64> = (0..n).map(|v| x.vertex_edges(v).len() as f64).collect();
    let mut triplets = Vec::with_capacity(2 * x.num_edges());
    for e in 0..x.num_edges() {
        let [u, v] = x.edge_vertices(e).map(|v| v as usize);
        let w = 1.0 / (deg[u] * deg[v]).sqrt();
        triplets.push((u, v, w));
        triplets.push((v, u, w));
    }
    CsrMatrix::from_triplets(n, n, triplets).expect("vertex indices in range")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReportOptions {
    pub skeleton: bool,
    /// Eigen-decompose the swap walk; skipped above `edge_limit` edges.
    pub swap_walk: bool,
    pub edge_limit: usize,
    pub spectral: SpectralOptions,
}

impl Default for SpectralReportOptions {
    fn default() -> Self {
        SpectralReportOptions {
            skeleton: true,
            swap_walk: true,
            edge_limit: DEFAULT_DENSE_EDGE_LIMIT,
            spectral: SpectralOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapSpectrum {
    pub lambda2: f64,
    /// Largest `|S - S^T|` entry; the spectrum is taken of `(S + S^T) / 2`.
    pub asymmetry: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub method: SpectralMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub q: u32,
    pub target: f64,
    pub link_lambda2_min: f64,
    pub link_lambda2_max: f64,
    /// Every link is within `1e-9` of `1/sqrt(q)`.
    pub links_match_target: bool,
    /// Every link is connected, bipartite `q`-regular on `2 q^2` vertices.
    pub links_well_formed: bool,
    pub skeleton_lambda2: Option<f64>,
    /// `gamma` = largest link eigenvalue; the swap-walk bound is `3 gamma`.
    pub gamma: f64,
    pub swap_bound_vacuous: bool,
    pub swap: Option<SwapSpectrum>,
    pub notes: Vec<String>,
}

pub fn spectral_report(x: &ComplexInstance, opts: &SpectralReportOptions) -> Result<SpectralReport> {
    let q = x.q();
    let target = 1.0 / (q as f64).sqrt();
    let qq = (q * q) as usize;
    let links: Vec<(f64, bool)> = (0..x.num_vertices())
        .into_par_iter()
        .map(|v| {
            let l = x.vertex_link(v);
            let ok = l.left == qq
                && l.right == qq
                && l.is_biregular(q as usize, q as usize)
                && !l.has_multi_edges()
                && l.is_connected();
            l.spectrum().map(|s| (s.lambda2, ok))
        })
        .collect::<Result<_>>()?;
    let link_lambda2_min = links.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    let link_lambda2_max = links.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
    let gamma = link_lambda2_max;
    let mut notes = Vec::new();

    let skeleton_lambda2 = if opts.skeleton {
        Some(second_eigenvalue(&skeleton_graph(x), &opts.spectral)?.lambda2)
    } else {
        None
    };

    let swap = if opts.swap_walk && x.num_edges() <= opts.edge_limit {
        let s = super::walk_matrices(x, opts.edge_limit)?.swap;
        let st = s.transpose();
        let asymmetry = s.max_abs_diff(&st)?;
        let sym = s.linear_combination(0.5, &st, 0.5)?;
        let r = second_eigenvalue(&sym, &opts.spectral)?;
        Some(SwapSpectrum {
            lambda2: r.lambda2,
            asymmetry,
            bound: 3.0 * gamma,
            within_bound: r.lambda2 <= 3.0 * gamma + 1e-9,
            method: r.method,
        })
    } else {
        if opts.swap_walk {
            notes.push(format!(
                "swap walk skipped: {} edges exceed the limit {}",
                x.num_edges(),
                opts.edge_limit
            ));
        }
        None
    };

    Ok(SpectralReport {
        q,
        target,
        link_lambda2_min,
        link_lambda2_max,
        links_match_target: links.iter().all(|l| (l.0 - target).abs() < 1e-9),
        links_well_formed: links.iter().all(|l| l.1),
        skeleton_lambda2,
        gamma,
        swap_bound_vacuous: 3.0 * gamma >= 1.0,
        swap,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::q3;

    #[test]
    fn links_and_skeleton() {
        let opts = SpectralReportOptions {
            swap_walk: false,
            ..Default::default()
        };
        let r = spectral_report(q3(), &opts).unwrap();
        assert!(r.links_match_target && r.links_well_formed);
        assert!((r.gamma - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        assert!(r.swap_bound_vacuous);
        let s = r.skeleton_lambda2.unwrap();
        assert!(s < 1.0 - 1e-6, "skeleton is connected: {s}");
    }

    #[test]
    fn swap_walk_by_power_iteration() {
        let r = spectral_report(q3(), &SpectralReportOptions::default()).unwrap();
        let sw = r.swap.unwrap();
        assert!(matches!(sw.method, SpectralMethod::Power { converged: true, .. }));
        // value from a full dense eigen-decomposition of the same 5616 x 5616 matrix
        assert!((sw.lambda2 - 0.532_097_067_261).abs() < 1e-9, "{}", sw.lambda2);
        assert!(!sw.within_bound || sw.lambda2 <= sw.bound + 1e-9);
    }
}

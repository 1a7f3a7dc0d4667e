//! The coset complex `X[G; K_1, K_2, K_3]`.
//!
//! Triangles are the group elements, sorted by canonical serialization.
//! Vertices of type `i` are the left cosets `g K_i` and edges of type `k`
//! the cosets `g H_k`; an edge of type `k` joins the two vertices whose types
//! differ from `k`. Types are 1-based in the public API, ids are type-major.

mod group;
mod io;
mod link;
mod spectra;
mod walks;

use std::ops::Range;

pub use group::{
    canonical_coset_rep, generate_group, h, k, sl3_order, subgroup_elements, Family, GroupElement,
    SubgroupKind, DEFAULT_GROUP_BUDGET,
};
pub use io::{load_instance, save_instance, InstanceCounts, InstanceHeader, INSTANCE_VERSION};
pub use link::{link_graph, BipartiteGraph};
pub use spectra::{skeleton_graph, spectral_report, SpectralReport, SpectralReportOptions};
pub use walks::{
    walk_identities, walk_matrices, WalkMatrices, WalkResiduals, WalkVerification, DEFAULT_DENSE_EDGE_LIMIT,
};

use crate::algebra::{primitive_modulus, Ring};
use crate::{HdxError, Result};

const UNSET: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct ComplexInstance {
    ring: Ring,
    elements: Vec<GroupElement>,
    keys: Vec<u128>,
    vertex_offset: [usize; 4],
    edge_offset: [usize; 4],
    vertex_rep: Vec<u32>,
    edge_rep: Vec<u32>,
    tri_vertices: Vec<[u32; 3]>,
    tri_edges: Vec<[u32; 3]>,
    tri_chart: Vec<[u32; 3]>,
    vertex_star: Vec<u32>,
    edge_star: Vec<u32>,
    edge_vertices: Vec<[u32; 2]>,
    vertex_edges: Vec<u32>,
}

/// Builds the complex for `q`, `phi` (coefficients low to high; `None`
/// picks the smallest primitive modulus of degree `n`).
pub fn build_complex(q: u32, n: usize, phi: Option<&[u32]>, budget: usize) -> Result<ComplexInstance> {
    let phi = match phi {
        Some(phi) => {
            if phi.len() != n + 1 {
                return Err(HdxError::Parameter(format!(
                    "modulus {phi:?} does not have degree {n}"
                )));
            }
            phi.to_vec()
        }
        None => primitive_modulus(q, n)?.phi,
    };
    let ring = Ring::new(q, &phi)?;
    if phi[0] == 0 {
        return Err(HdxError::Parameter("t must be a unit: phi(0) = 0".into()));
    }
    let elements = generate_group(&ring, budget)?;
    ComplexInstance::from_elements(ring, elements)
}

/// Points of the chart of a type-`ty` vertex: `(x, y, z) -> K_ty(a, b, c)`
/// with `(a, b, c) = (x, y, z)` for types 1 and 2 and `(y, x, z)` for type 3,
/// so that row lines in `x` are the edges of type `ty + 1` and skew lines
/// the edges of type `ty - 1` (cyclically).
pub fn chart_elements(ring: &Ring, ty: usize) -> Vec<GroupElement> {
    let q = ring.q();
    let mut out = Vec::with_capacity((q * q * q) as usize);
    for z in 0..q {
        for y in 0..q {
            for x in 0..q {
                out.push(match ty {
                    3 => k(ring, 3, y, x, z),
                    _ => k(ring, ty, x, y, z),
                });
            }
        }
    }
    out
}

impl ComplexInstance {
    /// Builds the face tables from a sorted, closed list of group elements.
    pub fn from_elements(ring: Ring, elements: Vec<GroupElement>) -> Result<Self> {
        let size = ring.size();
        let keys: Vec<u128> = elements.iter().map(|g| g.key(size)).collect();
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HdxError::Validation(
                "group elements must be sorted and distinct".into(),
            ));
        }
        let n_tri = elements.len();
        let q = ring.q() as usize;
        let q3 = q * q * q;
        let lookup = |g: &GroupElement| keys.binary_search(&g.key(size)).ok();

        let mut tri_vertices = vec![[UNSET; 3]; n_tri];
        let mut tri_chart = vec![[UNSET; 3]; n_tri];
        let mut vertex_star = Vec::with_capacity(3 * n_tri);
        let mut vertex_rep = Vec::new();
        let mut vertex_offset = [0usize; 4];
        for ty in 1..=3 {
            let chart = chart_elements(&ring, ty);
            for t in 0..n_tri {
                if tri_vertices[t][ty - 1] != UNSET {
                    continue;
                }
                let v = vertex_rep.len() as u32;
                vertex_rep.push(t as u32);
                for (ci, s) in chart.iter().enumerate() {
                    let g = elements[t].mul(s, &ring);
                    let id = lookup(&g)
                        .ok_or_else(|| HdxError::Inconsistent("vertex coset leaves the group".into()))?;
                    if tri_vertices[id][ty - 1] != UNSET {
                        return Err(HdxError::Inconsistent("overlapping vertex cosets".into()));
                    }
                    tri_vertices[id][ty - 1] = v;
                    tri_chart[id][ty - 1] = ci as u32;
                    vertex_star.push(id as u32);
                }
            }
            vertex_offset[ty] = vertex_rep.len();
        }

        let mut tri_edges = vec![[UNSET; 3]; n_tri];
        let mut edge_star = Vec::with_capacity(3 * n_tri);
        let mut edge_rep = Vec::new();
        let mut edge_offset = [0usize; 4];
        for ty in 1..=3 {
            let hs = subgroup_elements(&ring, SubgroupKind::h(ty));
            for t in 0..n_tri {
                if tri_edges[t][ty - 1] != UNSET {
                    continue;
                }
                let e = edge_rep.len() as u32;
                edge_rep.push(t as u32);
                for s in &hs {
                    let id = lookup(&elements[t].mul(s, &ring))
                        .ok_or_else(|| HdxError::Inconsistent("edge coset leaves the group".into()))?;
                    if tri_edges[id][ty - 1] != UNSET {
                        return Err(HdxError::Inconsistent("overlapping edge cosets".into()));
                    }
                    tri_edges[id][ty - 1] = e;
                    edge_star.push(id as u32);
                }
            }
            edge_offset[ty] = edge_rep.len();
        }

        let mut edge_vertices = Vec::with_capacity(edge_rep.len());
        for e in 0..edge_rep.len() {
            let ty = type_of(&edge_offset, e);
            let (i, j) = other_types(ty);
            let star = &edge_star[e * q..(e + 1) * q];
            let ends = [
                tri_vertices[star[0] as usize][i - 1],
                tri_vertices[star[0] as usize][j - 1],
            ];
            for &t in star {
                let tv = tri_vertices[t as usize];
                if [tv[i - 1], tv[j - 1]] != ends {
                    return Err(HdxError::Inconsistent(format!(
                        "triangles of edge {e} do not share its endpoints"
                    )));
                }
            }
            edge_vertices.push(ends);
        }

        let per_vertex = 2 * q * q;
        let mut vertex_edges = Vec::with_capacity(vertex_rep.len() * per_vertex);
        for v in 0..vertex_rep.len() {
            let ty = type_of(&vertex_offset, v);
            let mut es: Vec<u32> = vertex_star[v * q3..(v + 1) * q3]
                .iter()
                .flat_map(|&t| {
                    let te = tri_edges[t as usize];
                    (1..=3).filter(move |&k| k != ty).map(move |k| te[k - 1])
                })
                .collect();
            es.sort_unstable();
            es.dedup();
            if es.len() != per_vertex {
                return Err(HdxError::Inconsistent(format!(
                    "vertex {v} meets {} edges, expected {per_vertex}",
                    es.len()
                )));
            }
            vertex_edges.extend(es);
        }

        Ok(ComplexInstance {
            ring,
            elements,
            keys,
            vertex_offset,
            edge_offset,
            vertex_rep,
            edge_rep,
            tri_vertices,
            tri_edges,
            tri_chart,
            vertex_star,
            edge_star,
            edge_vertices,
            vertex_edges,
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn q(&self) -> u32 {
        self.ring.q()
    }

    pub fn n(&self) -> usize {
        self.ring.n()
    }

    pub fn phi(&self) -> &[u32] {
        self.ring.phi()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_rep.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_rep.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, t: usize) -> &GroupElement {
        &self.elements[t]
    }

    pub fn triangle_id(&self, g: &GroupElement) -> Option<usize> {
        self.keys.binary_search(&g.key(self.ring.size())).ok()
    }

    pub fn vertices_of_type(&self, ty: usize) -> Range<usize> {
        self.vertex_offset[ty - 1]..self.vertex_offset[ty]
    }

    pub fn edges_of_type(&self, ty: usize) -> Range<usize> {
        self.edge_offset[ty - 1]..self.edge_offset[ty]
    }

    pub fn vertex_type(&self, v: usize) -> usize {
        type_of(&self.vertex_offset, v)
    }

    pub fn edge_type(&self, e: usize) -> usize {
        type_of(&self.edge_offset, e)
    }

    /// The `q^3` triangles of a vertex in chart order `x + q y + q^2 z`.
    pub fn vertex_star(&self, v: usize) -> &[u32] {
        let q3 = (self.q() as usize).pow(3);
        &self.vertex_star[v * q3..(v + 1) * q3]
    }

    /// The `q` triangles `rep * h_k(alpha)` of an edge, by `alpha`.
    pub fn edge_star(&self, e: usize) -> &[u32] {
        let q = self.q() as usize;
        &self.edge_star[e * q..(e + 1) * q]
    }

    /// Vertex ids of a triangle, by type.
    pub fn triangle_vertices(&self, t: usize) -> [u32; 3] {
        self.tri_vertices[t]
    }

    /// Edge ids of a triangle, by type.
    pub fn triangle_edges(&self, t: usize) -> [u32; 3] {
        self.tri_edges[t]
    }

    /// Position of triangle `t` in the chart of its type-`ty` vertex.
    pub fn chart_index(&self, t: usize, ty: usize) -> usize {
        self.tri_chart[t][ty - 1] as usize
    }

    /// Endpoints of an edge, ordered by type.
    pub fn edge_vertices(&self, e: usize) -> [u32; 2] {
        self.edge_vertices[e]
    }

    /// The `2 q^2` edges at a vertex, sorted.
    pub fn vertex_edges(&self, v: usize) -> &[u32] {
        let d = 2 * (self.q() as usize).pow(2);
        &self.vertex_edges[v * d..(v + 1) * d]
    }

    pub fn vertex_rep(&self, v: usize) -> &GroupElement {
        &self.elements[self.vertex_rep[v] as usize]
    }

    pub fn edge_rep(&self, e: usize) -> &GroupElement {
        &self.elements[self.edge_rep[e] as usize]
    }

    /// Triangle ids of the coset representatives (vertices, then edges).
    pub fn rep_triangles(&self) -> (&[u32], &[u32]) {
        (&self.vertex_rep, &self.edge_rep)
    }

    /// The link of a vertex as a bipartite graph: left side the neighbours
    /// of the next type, right side those of the previous type, one edge per
    /// star triangle.
    pub fn vertex_link(&self, v: usize) -> BipartiteGraph {
        let ty = self.vertex_type(v);
        let (lt, rt) = (ty % 3 + 1, (ty + 1) % 3 + 1);
        let star = self.vertex_star(v);
        let mut left: Vec<u32> = star
            .iter()
            .map(|&t| self.tri_vertices[t as usize][lt - 1])
            .collect();
        let mut right: Vec<u32> = star
            .iter()
            .map(|&t| self.tri_vertices[t as usize][rt - 1])
            .collect();
        left.sort_unstable();
        left.dedup();
        right.sort_unstable();
        right.dedup();
        let edges = star
            .iter()
            .map(|&t| {
                let tv = self.tri_vertices[t as usize];
                (
                    left.binary_search(&tv[lt - 1]).expect("left vertex") as u32,
                    right.binary_search(&tv[rt - 1]).expect("right vertex") as u32,
                )
            })
            .collect();
        BipartiteGraph {
            left: left.len(),
            right: right.len(),
            edges,
        }
    }

    /// Translate of a triangle by left multiplication: the id of `g * t`.
    pub fn left_translate(&self, g: &GroupElement, t: usize) -> Option<usize> {
        self.triangle_id(&g.mul(&self.elements[t], &self.ring))
    }
}

fn type_of(offsets: &[usize; 4], id: usize) -> usize {
    (1..=3).find(|&ty| id < offsets[ty]).expect("id in range")
}

/// The two types different from `ty`, in increasing order.
pub fn other_types(ty: usize) -> (usize, usize) {
    match ty {
        1 => (2, 3),
        2 => (1, 3),
        3 => (1, 2),
        _ => panic!("type is 1, 2 or 3"),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::sync::OnceLock;

    pub(crate) fn q3() -> &'static ComplexInstance {
        static X: OnceLock<ComplexInstance> = OnceLock::new();
        X.get_or_init(|| build_complex(3, 1, None, DEFAULT_GROUP_BUDGET).unwrap())
    }

    #[test]
    fn census() {
        let x = q3();
        assert_eq!(x.phi(), &[1, 1]);
        assert_eq!(x.num_triangles(), 5616);
        assert_eq!(x.num_edges(), 5616);
        assert_eq!(x.num_vertices(), 624);
        for ty in 1..=3 {
            assert_eq!(x.vertices_of_type(ty).len(), 208);
            assert_eq!(x.edges_of_type(ty).len(), 1872);
        }
    }

    #[test]
    fn partite_and_consistent() {
        let x = q3();
        for t in 0..x.num_triangles() {
            let tv = x.triangle_vertices(t);
            for ty in 1..=3 {
                assert_eq!(x.vertex_type(tv[ty - 1] as usize), ty);
                let e = x.triangle_edges(t)[ty - 1] as usize;
                assert_eq!(x.edge_type(e), ty);
                let (i, j) = other_types(ty);
                assert_eq!(x.edge_vertices(e), [tv[i - 1], tv[j - 1]]);
                assert_eq!(
                    x.vertex_star(tv[ty - 1] as usize)[x.chart_index(t, ty)] as usize,
                    t
                );
            }
        }
    }

    #[test]
    fn reps_are_canonical() {
        let x = q3();
        let ring = x.ring();
        for v in (0..x.num_vertices()).step_by(7) {
            let kind = SubgroupKind::k(x.vertex_type(v));
            let g = x.vertex_rep(v);
            assert_eq!(canonical_coset_rep(ring, g, kind), *g);
            let other = x.element(x.vertex_star(v)[13] as usize);
            assert_eq!(canonical_coset_rep(ring, other, kind), *g);
        }
        for e in (0..x.num_edges()).step_by(11) {
            let ty = x.edge_type(e);
            let g = x.edge_rep(e);
            for (alpha, &t) in x.edge_star(e).iter().enumerate() {
                assert_eq!(*x.element(t as usize), g.mul(&h(ring, ty, alpha as u32), ring));
            }
            assert_eq!(canonical_coset_rep(ring, g, SubgroupKind::h(ty)), *g);
        }
    }

    #[test]
    fn vertex_links_match_the_model_graph() {
        let x = q3();
        for v in [0, 300, 623] {
            let l = x.vertex_link(v);
            assert_eq!((l.left, l.right, l.edges.len()), (9, 9, 27));
            assert!(l.is_biregular(3, 3));
            assert!(l.is_connected());
        }
    }

    #[test]
    #[ignore = "builds the 372,000-triangle instance"]
    fn census_q5() {
        let x = build_complex(5, 1, None, DEFAULT_GROUP_BUDGET).unwrap();
        assert_eq!(x.phi(), &[2, 1]);
        assert_eq!(
            (x.num_vertices(), x.num_edges(), x.num_triangles()),
            (8928, 223_200, 372_000)
        );
    }

    #[test]
    fn rejects_bad_modulus() {
        assert!(build_complex(3, 1, Some(&[0, 1]), DEFAULT_GROUP_BUDGET).is_err());
        assert!(build_complex(3, 2, Some(&[1, 1]), DEFAULT_GROUP_BUDGET).is_err());
        assert!(build_complex(4, 1, None, DEFAULT_GROUP_BUDGET).is_err());
    }
}

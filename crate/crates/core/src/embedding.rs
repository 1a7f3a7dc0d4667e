//! The coefficient embedding `iota: G -> F_q^{9n}` and the affine lines traced
//! out by edge stars.
//!
//! Coordinate `(3 r + c) n + l` holds the coefficient of `t^l` in entry
//! `(r, c)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{ExactMatrix, PrimeField, Ring};
use crate::complex::{ComplexInstance, GroupElement};
use crate::{HdxError, Result};

/// Embeds any 3x3 matrix over `R_n` given by entry codes.
pub fn iota_entries(ring: &Ring, entries: &[u32; 9]) -> Vec<u32> {
    entries.iter().flat_map(|&c| ring.element(c).coeffs).collect()
}

pub fn iota(ring: &Ring, g: &GroupElement) -> Vec<u32> {
    iota_entries(ring, &g.0)
}

/// Inverse of [`iota`] on its image.
pub fn from_point(ring: &Ring, point: &[u32]) -> Result<GroupElement> {
    let n = ring.n();
    if point.len() != 9 * n {
        return Err(HdxError::shape(9 * n, point.len()));
    }
    let mut e = [0u32; 9];
    for (i, chunk) in point.chunks(n).enumerate() {
        e[i] = ring.code(&crate::algebra::RingElement {
            coeffs: chunk.to_vec(),
        });
    }
    Ok(GroupElement(e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineLine {
    pub edge_id: usize,
    pub ty: usize,
    pub v0: Vec<u32>,
    pub dir: Vec<u32>,
    /// Triangle at parameter `alpha`.
    pub alpha_to_triangle: Vec<u32>,
}

impl AffineLine {
    pub fn point(&self, alpha: u32, field: &PrimeField) -> Vec<u32> {
        self.v0
            .iter()
            .zip(&self.dir)
            .map(|(&b, &d)| field.add(b, field.mul(alpha, d)))
            .collect()
    }
}

/// Direction `v_ty` of the line through `g` of the given type: the matrix
/// holding `t g_3`, `t g_1` or `t g_2` in column 1, 2 or 3 respectively.
pub fn line_direction(ring: &Ring, g: &GroupElement, ty: usize) -> Vec<u32> {
    let (target, source) = match ty {
        1 => (0, 2),
        2 => (1, 0),
        3 => (2, 1),
        _ => panic!("line type is 1, 2 or 3"),
    };
    let t = ring.t();
    let mut d = [0u32; 9];
    for r in 0..3 {
        d[3 * r + target] = ring.mul(t, g.entry(r, source));
    }
    iota_entries(ring, &d)
}

/// The line `alpha -> iota(rep * h_ty(alpha))` of an edge, checked point by
/// point against the edge star.
pub fn line_of_edge(e: usize, x: &ComplexInstance) -> Result<AffineLine> {
    let ring = x.ring();
    let field = ring.field();
    let g = x.edge_rep(e);
    let ty = x.edge_type(e);
    let line = AffineLine {
        edge_id: e,
        ty,
        v0: iota(ring, g),
        dir: line_direction(ring, g, ty),
        alpha_to_triangle: x.edge_star(e).to_vec(),
    };
    if line.dir.iter().all(|&c| c == 0) {
        return Err(HdxError::Inconsistent(format!("edge {e} has a zero direction")));
    }
    for (alpha, &t) in line.alpha_to_triangle.iter().enumerate() {
        if line.point(alpha as u32, &field) != iota(ring, x.element(t as usize)) {
            return Err(HdxError::Inconsistent(format!(
                "edge {e}: point {alpha} is off the embedded star"
            )));
        }
    }
    Ok(line)
}

/// Rank of the differences `iota(t) - iota(t_0)` over a vertex star.
pub fn star_affine_dimension(x: &ComplexInstance, v: usize) -> usize {
    let ring = x.ring();
    let f = ring.field();
    let star = x.vertex_star(v);
    let base = iota(ring, x.element(star[0] as usize));
    let rows: Vec<Vec<u32>> = star[1..]
        .iter()
        .map(|&t| {
            iota(ring, x.element(t as usize))
                .iter()
                .zip(&base)
                .map(|(&a, &b)| f.sub(a, b))
                .collect()
        })
        .collect();
    ExactMatrix::from_rows(&rows, base.len(), ring.q())
        .expect("uniform row length")
        .rank()
}

/// A polynomial in `9n` variables as `(exponents, coefficient)` terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiPoly {
    pub nvars: usize,
    pub terms: Vec<(Vec<u32>, u32)>,
}

impl MultiPoly {
    pub fn constant(nvars: usize, c: u32) -> Self {
        MultiPoly {
            nvars,
            terms: vec![(vec![0; nvars], c)],
        }
    }

    /// The single variable `u_k`.
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        MultiPoly {
            nvars,
            terms: vec![(e, 1)],
        }
    }

    /// Affine form `c_0 + sum_k c_k u_{vars[k]}`.
    pub fn affine(nvars: usize, constant: u32, vars: &[usize], coeffs: &[u32]) -> Self {
        let mut p = MultiPoly::constant(nvars, constant);
        for (&v, &c) in vars.iter().zip(coeffs) {
            let mut e = vec![0; nvars];
            e[v] = 1;
            p.terms.push((e, c));
        }
        p
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|(_, c)| *c != 0)
            .map(|(e, _)| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Exponents are reduced with `u^q = u` only here, never for degrees.
    pub fn eval(&self, point: &[u32], field: &PrimeField) -> u32 {
        let q = field.p() as u64;
        self.terms.iter().fold(0, |acc, (e, c)| {
            if *c == 0 {
                return acc;
            }
            let m = e.iter().zip(point).fold(*c, |m, (&k, &x)| match k {
                0 => m,
                1 => field.mul(m, x),
                k => field.mul(m, field.pow(x, (k as u64 - 1) % (q - 1) + 1)),
            });
            field.add(acc, m)
        })
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        MultiPoly {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn scale(&self, s: u32, field: &PrimeField) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), field.mul(*c, s)))
                .collect(),
        }
    }
}

/// The coordinates of the constant coefficients of the strictly upper
/// entries `(1,2)`, `(1,3)`, `(2,3)`.
pub fn upper_slots(n: usize) -> [usize; 3] {
    [n, 2 * n, 5 * n]
}

/// `word[t] = poly(iota(t))` over all triangles.
pub fn rm_restrict(poly: &MultiPoly, x: &ComplexInstance) -> Result<Vec<u32>> {
    let ring = x.ring();
    if poly.nvars != 9 * ring.n() {
        return Err(HdxError::shape(9 * ring.n(), poly.nvars));
    }
    let f = ring.field();
    let q = ring.q();
    let n = ring.n();
    // Only the variables a term actually uses.
    let terms: Vec<(u32, Vec<(usize, u64)>)> = poly
        .terms
        .iter()
        .filter(|(_, c)| *c != 0)
        .map(|(e, c)| {
            let vars = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(v, &k)| (v, (k as u64 - 1) % (q as u64 - 1) + 1))
                .collect();
            (*c, vars)
        })
        .collect();
    Ok(x.elements()
        .par_iter()
        .map_init(
            || vec![0u32; 9 * n],
            |point, g| {
                for (i, &code) in g.0.iter().enumerate() {
                    let mut c = code;
                    for l in (0..n).rev() {
                        point[i * n + l] = c % q;
                        c /= q;
                    }
                }
                terms.iter().fold(0, |acc, (c, vars)| {
                    let m = vars.iter().fold(*c, |m, &(v, k)| f.mul(m, f.pow(point[v], k)));
                    f.add(acc, m)
                })
            },
        )
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, h, DEFAULT_GROUP_BUDGET};
    use crate::local_code::line_degree;
    use std::sync::OnceLock;

    fn q3() -> &'static ComplexInstance {
        static X: OnceLock<ComplexInstance> = OnceLock::new();
        X.get_or_init(|| build_complex(3, 1, None, DEFAULT_GROUP_BUDGET).unwrap())
    }

    #[test]
    fn identity_and_h3() {
        let x = q3();
        let ring = x.ring();
        let id = GroupElement::identity(ring);
        assert_eq!(iota(ring, &id), vec![1, 0, 0, 0, 1, 0, 0, 0, 1]);
        let v = iota(ring, &h(ring, 3, 1));
        assert_eq!(v, vec![1, 0, 0, 0, 1, 2, 0, 0, 1]);
        assert_eq!(from_point(ring, &v).unwrap(), h(ring, 3, 1));
    }

    #[test]
    fn identity_line_of_type_three() {
        let x = q3();
        let ring = x.ring();
        let id = GroupElement::identity(ring);
        assert_eq!(line_direction(ring, &id, 3), vec![0, 0, 0, 0, 0, 2, 0, 0, 0]);
    }

    #[test]
    fn every_edge_star_is_a_line() {
        let x = q3();
        let f = x.ring().field();
        for e in 0..x.num_edges() {
            let l = line_of_edge(e, x).unwrap();
            let p: Vec<Vec<u32>> = (0..3).map(|a| l.point(a, &f)).collect();
            for k in 0..p[0].len() {
                assert_eq!(f.sub(p[2][k], p[1][k]), f.sub(p[1][k], p[0][k]));
            }
        }
    }

    #[test]
    fn reparameterized_lines_agree() {
        let x = q3();
        let ring = x.ring();
        let f = ring.field();
        for e in (0..x.num_edges()).step_by(97) {
            let l = line_of_edge(e, x).unwrap();
            let ty = x.edge_type(e);
            for shift in 1..3u32 {
                let g2 = x.edge_rep(e).mul(&h(ring, ty, shift), ring);
                let dir2 = line_direction(ring, &g2, ty);
                let base2 = iota(ring, &g2);
                for a in 0..3u32 {
                    let p2: Vec<u32> = base2
                        .iter()
                        .zip(&dir2)
                        .map(|(&b, &d)| f.add(b, f.mul(a, d)))
                        .collect();
                    assert_eq!(p2, l.point((a + shift) % 3, &f));
                }
            }
        }
    }

    #[test]
    fn stars_are_three_dimensional() {
        let x = q3();
        for v in (0..x.num_vertices()).step_by(13) {
            assert_eq!(star_affine_dimension(x, v), 3);
        }
    }

    #[test]
    fn affine_restrictions_have_degree_one_on_lines() {
        let x = q3();
        let f = x.ring().field();
        let slots = upper_slots(1);
        let poly = MultiPoly::affine(9, 2, &slots, &[1, 2, 1]);
        assert_eq!(poly.total_degree(), 1);
        let w = rm_restrict(&poly, x).unwrap();
        for e in 0..x.num_edges() {
            let vals: Vec<u32> = x.edge_star(e).iter().map(|&t| w[t as usize]).collect();
            assert!(line_degree(&f, &vals).unwrap_or(0) <= 1);
        }
        let rows: Vec<Vec<u32>> = std::iter::once(MultiPoly::constant(9, 1))
            .chain(slots.iter().map(|&k| MultiPoly::var(9, k)))
            .map(|p| rm_restrict(&p, x).unwrap())
            .collect();
        assert_eq!(
            ExactMatrix::from_rows(&rows, x.num_triangles(), 3)
                .unwrap()
                .rank(),
            4
        );
    }

    #[test]
    fn restriction_is_linear() {
        let x = q3();
        let f = x.ring().field();
        let a = MultiPoly::var(9, 1);
        let b = MultiPoly::affine(9, 1, &[4, 8], &[2, 1]);
        let combo = a.scale(2, &f).add(&b.scale(2, &f));
        let wa = rm_restrict(&a, x).unwrap();
        let wb = rm_restrict(&b, x).unwrap();
        let wc = rm_restrict(&combo, x).unwrap();
        for t in 0..x.num_triangles() {
            assert_eq!(wc[t], f.add(f.mul(2, wa[t]), f.mul(2, wb[t])));
        }
    }

    #[test]
    fn evaluation_reduces_exponents_by_fermat() {
        let f = PrimeField::new(3).unwrap();
        let p = MultiPoly {
            nvars: 1,
            terms: vec![(vec![3], 1)],
        };
        assert_eq!(p.total_degree(), 3);
        for a in 0..3 {
            assert_eq!(p.eval(&[a], &f), a);
        }
    }
}

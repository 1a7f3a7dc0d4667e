//! The Tanner code on the triangles of a coset complex: a word is a codeword
//! when its values along every edge star, read in `alpha` order, form a
//! Reed-Solomon codeword of degree at most `d_i` for the edge's type `i`.

use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{rank_nullspace, ExactMatrix, PrimeField};
use crate::complex::{ComplexInstance, GroupElement};
use crate::embedding::{from_point, line_of_edge};
use crate::local_code::{line_degree, rs_parity_rows, rs_sparse_check, LocalCodeSpec};
use crate::local_decoder::{Codebook, LocalCodeCache};
use crate::{HdxError, Result};

/// Largest triangle count for which [`GlobalCode::dimension`] eliminates.
pub const DEFAULT_RANK_BUDGET: usize = 8_000;
/// Largest `q^dim` enumerated by [`min_weight_probe`].
pub const DEFAULT_WEIGHT_ENUM_BUDGET: u128 = 10_000_000;

/// A weight-`(d + 2)` check in `alpha` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseCheck {
    pub support: Vec<u32>,
    /// Length `q`, zero off the support.
    pub coeffs: Vec<u32>,
}

/// A parity row over triangles: `(triangle, coefficient)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityRow {
    pub edge: usize,
    pub entries: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub triangles: usize,
    pub dense_rows: usize,
    /// `None` when the elimination budget was exceeded.
    pub rank: Option<usize>,
    /// Exact dimension, or `triangles - dense_rows` when over budget.
    pub value: usize,
    pub exact: bool,
}

pub struct GlobalCode<'a> {
    x: &'a ComplexInstance,
    degrees: [u32; 3],
    /// Per edge type, the monomial checks of `RS(q, d_i)`.
    dense: [ExactMatrix; 3],
    sparse: [Vec<SparseCheck>; 3],
    generator: Option<Vec<Vec<u32>>>,
    dimension: Option<DimensionReport>,
}

/// Attaches the Reed-Solomon checks to every edge and verifies, per type,
/// that the sliding-window sparse checks span the dense ones.
pub fn assemble_code(x: &ComplexInstance, degrees: [u32; 3]) -> Result<GlobalCode<'_>> {
    let q = x.q();
    let mut dense = Vec::with_capacity(3);
    let mut sparse = Vec::with_capacity(3);
    for &d in &degrees {
        let h = rs_parity_rows(q, d)?;
        let want = h.rows();
        let mut checks: Vec<SparseCheck> = Vec::new();
        let mut start = 0u32;
        while rows_rank(&checks, q) < want {
            if start >= q {
                return Err(HdxError::Inconsistent(format!(
                    "windows of RS({q}, {d}) checks do not span"
                )));
            }
            let support: Vec<u32> = (0..d + 2).map(|k| (start + k) % q).collect();
            let coeffs = rs_sparse_check(q, d, &support)?;
            checks.push(SparseCheck { support, coeffs });
            start += 1;
        }
        // The checks must stay inside the dense row space.
        let mut stacked: Vec<Vec<u32>> = h.iter_rows().map(<[u32]>::to_vec).collect();
        stacked.extend(checks.iter().map(|c| c.coeffs.clone()));
        if want > 0 && ExactMatrix::from_rows(&stacked, q as usize, q)?.rank() != want {
            return Err(HdxError::Inconsistent(format!(
                "sparse checks of RS({q}, {d}) leave the dense row space"
            )));
        }
        debug_assert!(checks
            .iter()
            .all(|c| c.coeffs.iter().filter(|&&v| v != 0).count() == d as usize + 2));
        dense.push(h);
        sparse.push(checks);
    }
    let dense: [ExactMatrix; 3] = dense.try_into().expect("three types");
    let sparse: [Vec<SparseCheck>; 3] = sparse.try_into().expect("three types");
    Ok(GlobalCode {
        x,
        degrees,
        dense,
        sparse,
        generator: None,
        dimension: None,
    })
}

fn rows_rank(checks: &[SparseCheck], q: u32) -> usize {
    if checks.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<u32>> = checks.iter().map(|c| c.coeffs.clone()).collect();
    ExactMatrix::from_rows(&rows, q as usize, q)
        .expect("uniform rows")
        .rank()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    pub failing_edges: Vec<usize>,
}

impl<'a> GlobalCode<'a> {
    pub fn complex(&self) -> &'a ComplexInstance {
        self.x
    }

    pub fn degrees(&self) -> [u32; 3] {
        self.degrees
    }

    pub fn q(&self) -> u32 {
        self.x.q()
    }

    pub fn len(&self) -> usize {
        self.x.num_triangles()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_degree(&self, e: usize) -> u32 {
        self.degrees[self.x.edge_type(e) - 1]
    }

    pub fn rs_dense(&self, ty: usize) -> &ExactMatrix {
        &self.dense[ty - 1]
    }

    pub fn rs_sparse(&self, ty: usize) -> &[SparseCheck] {
        &self.sparse[ty - 1]
    }

    pub fn dense_row_count(&self) -> usize {
        (1..=3)
            .map(|ty| self.x.edges_of_type(ty).len() * self.dense[ty - 1].rows())
            .sum()
    }

    pub fn sparse_row_count(&self) -> usize {
        (1..=3)
            .map(|ty| self.x.edges_of_type(ty).len() * self.sparse[ty - 1].len())
            .sum()
    }

    /// Dense rows, edge by edge.
    pub fn dense_rows(&self) -> impl Iterator<Item = ParityRow> + '_ {
        (0..self.x.num_edges()).flat_map(move |e| {
            let star = self.x.edge_star(e);
            self.dense[self.x.edge_type(e) - 1]
                .iter_rows()
                .map(move |r| ParityRow {
                    edge: e,
                    entries: star
                        .iter()
                        .zip(r)
                        .filter(|(_, &c)| c != 0)
                        .map(|(&t, &c)| (t, c))
                        .collect(),
                })
                .collect::<Vec<_>>()
        })
    }

    pub fn sparse_rows(&self) -> impl Iterator<Item = ParityRow> + '_ {
        (0..self.x.num_edges()).flat_map(move |e| {
            let star = self.x.edge_star(e);
            self.sparse[self.x.edge_type(e) - 1]
                .iter()
                .map(move |c| ParityRow {
                    edge: e,
                    entries: c
                        .support
                        .iter()
                        .map(|&a| (star[a as usize], c.coeffs[a as usize]))
                        .collect(),
                })
                .collect::<Vec<_>>()
        })
    }

    /// Whether values on the edge star, in `alpha` order, pass the checks.
    pub fn star_values_ok(&self, e: usize, values: &[u32]) -> bool {
        let q = self.q() as u64;
        self.dense[self.x.edge_type(e) - 1].iter_rows().all(|r| {
            r.iter()
                .zip(values)
                .map(|(&a, &b)| a as u64 * b as u64)
                .sum::<u64>()
                % q
                == 0
        })
    }

    pub fn edge_ok(&self, w: &[u32], e: usize) -> bool {
        let vals: Vec<u32> = self.x.edge_star(e).iter().map(|&t| w[t as usize]).collect();
        self.star_values_ok(e, &vals)
    }

    fn check_len(&self, w: &[u32]) -> Result<()> {
        if w.len() != self.len() {
            return Err(HdxError::shape(self.len(), w.len()));
        }
        Ok(())
    }

    pub fn membership(&self, w: &[u32]) -> Result<Membership> {
        self.check_len(w)?;
        let failing_edges: Vec<usize> = (0..self.x.num_edges())
            .into_par_iter()
            .filter(|&e| !self.edge_ok(w, e))
            .collect();
        Ok(Membership {
            member: failing_edges.is_empty(),
            failing_edges,
        })
    }

    /// Membership through the embedding: every line `alpha -> v_0 + alpha v`
    /// is mapped back to triangles by coordinates alone and `w` along it must
    /// interpolate to degree at most `d_i`.
    pub fn line_membership(&self, w: &[u32]) -> Result<Membership> {
        self.check_len(w)?;
        let ring = self.x.ring();
        let f = ring.field();
        let failing: Result<Vec<Option<usize>>> = (0..self.x.num_edges())
            .into_par_iter()
            .map(|e| {
                let line = line_of_edge(e, self.x)?;
                let vals = (0..self.q())
                    .map(|a| {
                        let g = from_point(ring, &line.point(a, &f))?;
                        let t = self.x.triangle_id(&g).ok_or_else(|| {
                            HdxError::Inconsistent(format!("line of edge {e} leaves the complex"))
                        })?;
                        Ok(w[t])
                    })
                    .collect::<Result<Vec<u32>>>()?;
                let ok = line_degree(&f, &vals).is_none_or(|d| d <= self.edge_degree(e));
                Ok((!ok).then_some(e))
            })
            .collect();
        let failing_edges: Vec<usize> = failing?.into_iter().flatten().collect();
        Ok(Membership {
            member: failing_edges.is_empty(),
            failing_edges,
        })
    }

    /// `|X(2)| - rank(dense rows)`, by exact elimination when the complex has
    /// at most `budget` triangles; the kernel is kept as generator basis.
    /// Over budget only the constraint-count lower bound is returned.
    pub fn dimension(&mut self, budget: usize) -> Result<DimensionReport> {
        if let Some(d) = &self.dimension {
            if d.exact || self.len() > budget {
                return Ok(d.clone());
            }
        }
        let n = self.len();
        let rows = self.dense_row_count();
        let report = if n > budget {
            DimensionReport {
                triangles: n,
                dense_rows: rows,
                rank: None,
                value: n.saturating_sub(rows),
                exact: false,
            }
        } else if rows == 0 {
            self.generator = Some(
                (0..n)
                    .map(|i| {
                        let mut v = vec![0; n];
                        v[i] = 1;
                        v
                    })
                    .collect(),
            );
            DimensionReport {
                triangles: n,
                dense_rows: 0,
                rank: Some(0),
                value: n,
                exact: true,
            }
        } else {
            let mut m = ExactMatrix::zeros(rows, n, self.q());
            for (i, r) in self.dense_rows().enumerate() {
                for (t, c) in r.entries {
                    m.set(i, t as usize, c);
                }
            }
            let el = rank_nullspace(&m, None)?;
            if let Some(b) = el
                .nullspace
                .iter()
                .position(|v| !self.membership(v).map(|m| m.member).unwrap_or(false))
            {
                return Err(HdxError::Inconsistent(format!(
                    "kernel vector {b} is not a codeword"
                )));
            }
            let value = el.nullspace.len();
            self.generator = Some(el.nullspace);
            DimensionReport {
                triangles: n,
                dense_rows: rows,
                rank: Some(el.rank),
                value,
                exact: true,
            }
        };
        self.dimension = Some(report.clone());
        Ok(report)
    }

    pub fn generator(&self) -> Option<&[Vec<u32>]> {
        self.generator.as_deref()
    }

    /// A uniformly random codeword; needs the generator basis.
    pub fn random_member(&self, rng: &mut impl Rng) -> Result<Vec<u32>> {
        let gen = self
            .generator
            .as_ref()
            .ok_or_else(|| HdxError::Parameter("generator basis not computed".into()))?;
        let f = PrimeField::new(self.q())?;
        let mut w = vec![0u32; self.len()];
        for g in gen {
            let c = rng.random_range(0..self.q());
            if c != 0 {
                for (x, &v) in w.iter_mut().zip(g) {
                    *x = f.add(*x, f.mul(c, v));
                }
            }
        }
        Ok(w)
    }

    /// Coordinate export: header line, then `row col value` triplets.
    pub fn write_parity(&self, out: &mut impl Write, sparse: bool) -> Result<()> {
        let rows: Vec<ParityRow> = if sparse {
            self.sparse_rows().collect()
        } else {
            self.dense_rows().collect()
        };
        let nnz: usize = rows.iter().map(|r| r.entries.len()).sum();
        writeln!(
            out,
            "%%MatrixMarket-like: {} {} {} {}",
            rows.len(),
            self.len(),
            nnz,
            self.q()
        )?;
        for (i, r) in rows.iter().enumerate() {
            for &(t, c) in &r.entries {
                writeln!(out, "{i} {t} {c}")?;
            }
        }
        Ok(())
    }
}

/// `(translate w)[t] = w[g t]`.
pub fn translate(w: &[u32], g: &GroupElement, x: &ComplexInstance) -> Result<Vec<u32>> {
    if w.len() != x.num_triangles() {
        return Err(HdxError::shape(x.num_triangles(), w.len()));
    }
    (0..w.len())
        .map(|t| {
            x.left_translate(g, t)
                .map(|s| w[s])
                .ok_or_else(|| HdxError::Parameter("translation leaves the group".into()))
        })
        .collect()
}

/// Coordinatewise product.
pub fn multiply(a: &[u32], b: &[u32], q: u32) -> Result<Vec<u32>> {
    if a.len() != b.len() {
        return Err(HdxError::shape(a.len(), b.len()));
    }
    let f = PrimeField::new(q)?;
    Ok(a.iter().zip(b).map(|(&x, &y)| f.mul(x, y)).collect())
}

/// Base-`q` digits, one character per triangle.
pub fn word_to_digits(w: &[u32], q: u32) -> Result<String> {
    w.iter()
        .map(|&v| {
            char::from_digit(v, q)
                .ok_or_else(|| HdxError::Parameter(format!("symbol {v} is not a base-{q} digit")))
        })
        .collect()
}

pub fn digits_to_word(s: &str, q: u32) -> Result<Vec<u32>> {
    if q > 36 {
        return Err(HdxError::Parameter(format!("no digit alphabet for q = {q}")));
    }
    s.trim()
        .chars()
        .map(|c| {
            c.to_digit(q)
                .ok_or_else(|| HdxError::Validation(format!("{c:?} is not a base-{q} digit")))
        })
        .collect()
}

/// `count` distinct triangles, each moved to a different random symbol.
pub fn corrupt(w: &[u32], count: usize, seed: u64, q: u32) -> Result<Vec<u32>> {
    if count > w.len() {
        return Err(HdxError::Parameter(format!(
            "cannot corrupt {count} of {} symbols",
            w.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = w.to_vec();
    let mut positions = sample(&mut rng, w.len(), count).into_vec();
    positions.sort_unstable();
    for i in positions {
        out[i] = (out[i] + 1 + rng.random_range(0..q - 1)) % q;
    }
    Ok(out)
}

/// The chart `(x, y, z) -> rep(v) K_ty(.)` of a vertex and its local code
/// `C_{d_{ty+1}, d_{ty-1}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexChart {
    pub vertex: usize,
    pub ty: usize,
    pub dx: u32,
    pub dy: u32,
    /// Triangle at chart point `x + q y + q^2 z`.
    pub triangles: Vec<u32>,
}

impl VertexChart {
    pub fn pullback(&self, w: &[u32]) -> Vec<u32> {
        self.triangles.iter().map(|&t| w[t as usize]).collect()
    }
}

/// `(dx, dy)` of the local code at a vertex of type `ty`.
pub fn local_degrees(degrees: [u32; 3], ty: usize) -> (u32, u32) {
    (degrees[ty % 3], degrees[(ty + 1) % 3])
}

pub fn vertex_chart(v: usize, code: &GlobalCode) -> VertexChart {
    let x = code.complex();
    let ty = x.vertex_type(v);
    let (dx, dy) = local_degrees(code.degrees(), ty);
    VertexChart {
        vertex: v,
        ty,
        dx,
        dy,
        triangles: x.vertex_star(v).to_vec(),
    }
}

/// The three local codes, by vertex type.
pub fn local_specs(code: &GlobalCode, cache: &LocalCodeCache) -> Result<[std::sync::Arc<LocalCodeSpec>; 3]> {
    let q = code.q();
    let get = |ty| {
        let (dx, dy) = local_degrees(code.degrees(), ty);
        cache.get(q, dx, dy)
    };
    Ok([get(1)?, get(2)?, get(3)?])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexTest {
    pub rejecting: Vec<usize>,
    pub fraction: f64,
}

/// Fraction of vertices whose star view is not in the local code.
pub fn vertex_tester(w: &[u32], code: &GlobalCode, cache: &LocalCodeCache) -> Result<VertexTest> {
    code.check_len(w)?;
    let specs = local_specs(code, cache)?;
    let x = code.complex();
    let rejecting: Vec<usize> = (0..x.num_vertices())
        .into_par_iter()
        .filter(|&v| {
            let chart = vertex_chart(v, code);
            !specs[chart.ty - 1].contains(&chart.pullback(w))
        })
        .collect();
    Ok(VertexTest {
        fraction: rejecting.len() as f64 / x.num_vertices() as f64,
        rejecting,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViewMode {
    /// The star view if it is a local codeword, else bottom.
    Restrict,
    /// The nearest local codeword, by enumeration.
    Nearest,
}

/// Per-vertex local codewords in chart order; `None` is bottom, read as the
/// zero codeword.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalViewEnsemble {
    pub views: Vec<Option<Vec<u32>>>,
}

impl LocalViewEnsemble {
    /// Value of `z_v` at triangle `t` of its star.
    fn value(&self, x: &ComplexInstance, v: usize, t: usize) -> u32 {
        self.views[v]
            .as_ref()
            .map_or(0, |z| z[x.chart_index(t, x.vertex_type(v))])
    }
}

/// Enumerated local codebooks by vertex type.
pub struct Codebooks {
    books: [std::sync::Arc<Codebook>; 3],
}

impl Codebooks {
    pub fn new(code: &GlobalCode, cache: &LocalCodeCache, budget: u64) -> Result<Self> {
        let specs = local_specs(code, cache)?;
        let mut built: Vec<std::sync::Arc<Codebook>> = Vec::new();
        for ty in 0..3 {
            let same = (0..ty).find(|&k| specs[k] == specs[ty]);
            built.push(match same {
                Some(k) => built[k].clone(),
                None => std::sync::Arc::new(Codebook::new(&specs[ty], budget)?),
            });
        }
        Ok(Codebooks {
            books: built.try_into().expect("three types"),
        })
    }

    pub fn get(&self, ty: usize) -> &Codebook {
        &self.books[ty - 1]
    }
}

/// First codeword at minimum Hamming distance, in lexicographic coordinate
/// order.
fn nearest_in_book(book: &Codebook, w: &[u32]) -> usize {
    let mut best = (usize::MAX, 0);
    for (i, c) in book.words.iter().enumerate() {
        let d = c.iter().zip(w).filter(|(a, b)| a != b).count();
        if d < best.0 {
            best = (d, i);
            if d == 0 {
                break;
            }
        }
    }
    best.1
}

pub fn views_from_word(
    w: &[u32],
    code: &GlobalCode,
    mode: ViewMode,
    cache: &LocalCodeCache,
    enum_budget: u64,
) -> Result<LocalViewEnsemble> {
    code.check_len(w)?;
    let specs = local_specs(code, cache)?;
    let books = match mode {
        ViewMode::Nearest => Some(Codebooks::new(code, cache, enum_budget)?),
        ViewMode::Restrict => None,
    };
    let x = code.complex();
    let views = (0..x.num_vertices())
        .into_par_iter()
        .map(|v| {
            let chart = vertex_chart(v, code);
            let local = chart.pullback(w);
            if specs[chart.ty - 1].contains(&local) {
                return Some(local);
            }
            books.as_ref().map(|b| {
                let book = b.get(chart.ty);
                book.words[nearest_in_book(book, &local)].clone()
            })
        })
        .collect();
    Ok(LocalViewEnsemble { views })
}

fn edge_disagrees(z: &LocalViewEnsemble, x: &ComplexInstance, e: usize) -> bool {
    let [u, v] = x.edge_vertices(e).map(|v| v as usize);
    x.edge_star(e)
        .iter()
        .any(|&t| z.value(x, u, t as usize) != z.value(x, v, t as usize))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    pub disagreeing_edges: usize,
    pub fraction: f64,
}

/// Fraction of edges `uv` whose endpoint views differ on the edge star.
pub fn alpha(z: &LocalViewEnsemble, x: &ComplexInstance) -> Alpha {
    let n = (0..x.num_edges())
        .into_par_iter()
        .filter(|&e| edge_disagrees(z, x, e))
        .count();
    Alpha {
        disagreeing_edges: n,
        fraction: n as f64 / x.num_edges() as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionStep {
    pub vertex: usize,
    /// Disagreeing edges at the vertex before and after the replacement.
    pub old: usize,
    pub new: usize,
    /// Disagreeing edges overall, after the replacement.
    pub total: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionOutcome {
    Codeword,
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTrace {
    pub sweeps: Vec<Vec<CorrectionStep>>,
    pub initial: Alpha,
    pub final_alpha: Alpha,
    pub outcome: CorrectionOutcome,
}

impl CorrectionTrace {
    pub fn steps(&self) -> usize {
        self.sweeps.iter().map(Vec::len).sum()
    }

    /// The overall disagreement count drops at every step and the number of
    /// steps is at most the initial count.
    pub fn is_monotone(&self) -> bool {
        let mut prev = self.initial.disagreeing_edges;
        for s in self.sweeps.iter().flatten() {
            if s.new >= s.old || s.total >= prev {
                return false;
            }
            prev = s.total;
        }
        self.steps() <= self.initial.disagreeing_edges
    }
}

#[derive(Clone, Debug)]
pub struct Correction {
    pub ensemble: LocalViewEnsemble,
    pub codeword: Option<Vec<u32>>,
    pub trace: CorrectionTrace,
}

/// Greedy local correction: sweep vertices in id order, replacing `z_v` by
/// the local codeword with the fewest disagreeing incident edges whenever
/// that is a strict improvement; stop after a sweep without changes.
pub fn local_correction(
    z: &LocalViewEnsemble,
    code: &GlobalCode,
    cache: &LocalCodeCache,
    enum_budget: u64,
) -> Result<Correction> {
    let x = code.complex();
    if z.views.len() != x.num_vertices() {
        return Err(HdxError::shape(x.num_vertices(), z.views.len()));
    }
    let books = Codebooks::new(code, cache, enum_budget)?;
    let mut z = z.clone();
    let initial = alpha(&z, x);
    let mut bad: Vec<bool> = (0..x.num_edges()).map(|e| edge_disagrees(&z, x, e)).collect();
    let mut total = initial.disagreeing_edges;
    let mut sweeps = Vec::new();
    loop {
        let mut steps = Vec::new();
        for v in 0..x.num_vertices() {
            let edges = x.vertex_edges(v);
            let old = edges.iter().filter(|&&e| bad[e as usize]).count();
            if old == 0 {
                continue;
            }
            let ty = x.vertex_type(v);
            // Neighbour values at each incident edge, by chart position at v.
            let targets: Vec<(Vec<usize>, Vec<u32>)> = edges
                .iter()
                .map(|&e| {
                    let e = e as usize;
                    let [a, b] = x.edge_vertices(e).map(|u| u as usize);
                    let u = if a == v { b } else { a };
                    x.edge_star(e)
                        .iter()
                        .map(|&t| (x.chart_index(t as usize, ty), z.value(x, u, t as usize)))
                        .unzip()
                })
                .collect();
            let book = books.get(ty);
            let mut best = (old, usize::MAX);
            for (i, c) in book.words.iter().enumerate() {
                let mut n = 0;
                for (pos, vals) in &targets {
                    if pos.iter().zip(vals).any(|(&p, &val)| c[p] != val) {
                        n += 1;
                        if n >= best.0 {
                            break;
                        }
                    }
                }
                if n < best.0 {
                    best = (n, i);
                }
            }
            if best.1 == usize::MAX {
                continue;
            }
            z.views[v] = Some(book.words[best.1].clone());
            for &e in edges {
                let e = e as usize;
                let now = edge_disagrees(&z, x, e);
                if bad[e] && !now {
                    total -= 1;
                } else if !bad[e] && now {
                    total += 1;
                }
                bad[e] = now;
            }
            steps.push(CorrectionStep {
                vertex: v,
                old,
                new: best.0,
                total,
            });
        }
        let done = steps.is_empty();
        if !done {
            sweeps.push(steps);
        }
        if done {
            break;
        }
    }
    let final_alpha = alpha(&z, x);
    let codeword = if final_alpha.disagreeing_edges == 0 {
        let w: Vec<u32> = (0..x.num_triangles())
            .map(|t| z.value(x, x.triangle_vertices(t)[0] as usize, t))
            .collect();
        if !code.membership(&w)?.member {
            return Err(HdxError::Inconsistent(
                "agreeing local views do not glue to a codeword".into(),
            ));
        }
        Some(w)
    } else {
        None
    };
    Ok(Correction {
        ensemble: z,
        trace: CorrectionTrace {
            sweeps,
            initial,
            final_alpha,
            outcome: if codeword.is_some() {
                CorrectionOutcome::Codeword
            } else {
                CorrectionOutcome::Stalled
            },
        },
        codeword,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinWeightProbe {
    pub weight: usize,
    pub exact: bool,
    pub witness: Vec<u32>,
    pub method: String,
    /// Minimum relative distance of the edge Reed-Solomon codes.
    pub delta: f64,
    pub gamma: f64,
    /// `(delta - 2 gamma)(delta - gamma) delta`.
    pub relative_bound: f64,
    pub vacuous: bool,
}

/// Minimum nonzero weight: exact by enumeration when `q^dim <= enum_budget`,
/// otherwise the best of every generator and `samples` random combinations.
pub fn min_weight_probe(
    code: &GlobalCode,
    gamma: f64,
    enum_budget: u128,
    samples: usize,
    seed: u64,
) -> Result<MinWeightProbe> {
    let gen = code
        .generator()
        .ok_or_else(|| HdxError::Parameter("generator basis not computed".into()))?;
    let q = code.q();
    let f = PrimeField::new(q)?;
    let dmax = *code.degrees().iter().max().expect("three degrees");
    let delta = (q - dmax) as f64 / q as f64;
    let relative_bound = (delta - 2.0 * gamma) * (delta - gamma) * delta;
    let weight = |w: &[u32]| w.iter().filter(|&&v| v != 0).count();
    let dim = gen.len();
    let size = (q as u128).checked_pow(dim as u32);
    let mut best: Option<(usize, Vec<u32>)> = None;
    let consider = |w: Vec<u32>, best: &mut Option<(usize, Vec<u32>)>| {
        let k = weight(&w);
        if k > 0 && best.as_ref().is_none_or(|b| k < b.0) {
            *best = Some((k, w));
        }
    };
    let (exact, method) = match size {
        Some(s) if s <= enum_budget && dim > 0 => {
            // Odometer over coefficient vectors, last coordinate fastest.
            // Each increment adds one generator; a wrap from q - 1 to 0
            // adds it a q-th time, which cancels.
            let mut coords = vec![0u32; dim];
            let mut w = vec![0u32; code.len()];
            'outer: loop {
                let mut k = dim;
                loop {
                    if k == 0 {
                        break 'outer;
                    }
                    k -= 1;
                    for (x, &g) in w.iter_mut().zip(&gen[k]) {
                        *x = f.add(*x, g);
                    }
                    coords[k] = (coords[k] + 1) % q;
                    if coords[k] != 0 {
                        break;
                    }
                }
                consider(w.clone(), &mut best);
            }
            (true, "enumeration")
        }
        _ => {
            for g in gen {
                consider(g.clone(), &mut best);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let mut w = vec![0u32; code.len()];
                for g in gen {
                    let c = rng.random_range(0..q);
                    if c != 0 {
                        for (x, &v) in w.iter_mut().zip(g) {
                            *x = f.add(*x, f.mul(c, v));
                        }
                    }
                }
                consider(w, &mut best);
            }
            (false, "sampling")
        }
    };
    let (weight, witness) = best.ok_or_else(|| HdxError::Parameter("the code is zero".into()))?;
    if !code.membership(&witness)?.member {
        return Err(HdxError::Inconsistent("weight witness is not a codeword".into()));
    }
    Ok(MinWeightProbe {
        weight,
        exact,
        witness,
        method: method.into(),
        delta,
        gamma,
        relative_bound,
        vacuous: relative_bound <= 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQuery {
    /// Per vertex, the local coordinates of its star view, or `None` for the
    /// non-code symbol.
    pub symbols: Vec<Option<Vec<u32>>>,
    pub rejected_edges: Vec<usize>,
    pub rejection_fraction: f64,
}

/// The two-query tester: an edge accepts iff both endpoint symbols decode
/// and the decoded views agree on the edge star.
pub fn two_query_views(w: &[u32], code: &GlobalCode, cache: &LocalCodeCache) -> Result<TwoQuery> {
    code.check_len(w)?;
    let specs = local_specs(code, cache)?;
    let x = code.complex();
    let symbols: Vec<Option<Vec<u32>>> = (0..x.num_vertices())
        .into_par_iter()
        .map(|v| {
            let chart = vertex_chart(v, code);
            specs[chart.ty - 1].coordinates(&chart.pullback(w))
        })
        .collect();
    let decoded: Vec<Option<Vec<u32>>> = symbols
        .par_iter()
        .enumerate()
        .map(|(v, s)| {
            s.as_ref()
                .map(|c| specs[x.vertex_type(v) - 1].encode(c).expect("coordinate length"))
        })
        .collect();
    let rejected_edges: Vec<usize> = (0..x.num_edges())
        .into_par_iter()
        .filter(|&e| {
            let [u, v] = x.edge_vertices(e).map(|v| v as usize);
            match (&decoded[u], &decoded[v]) {
                (Some(a), Some(b)) => x.edge_star(e).iter().any(|&t| {
                    let t = t as usize;
                    a[x.chart_index(t, x.vertex_type(u))] != b[x.chart_index(t, x.vertex_type(v))]
                }),
                _ => true,
            }
        })
        .collect();
    Ok(TwoQuery {
        rejection_fraction: rejected_edges.len() as f64 / x.num_edges() as f64,
        symbols,
        rejected_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::q3;
    use crate::local_decoder::DEFAULT_ENUM_BUDGET;
    use std::sync::OnceLock;

    fn code3() -> &'static GlobalCode<'static> {
        static C: OnceLock<GlobalCode<'static>> = OnceLock::new();
        C.get_or_init(|| {
            let mut c = assemble_code(q3(), [1, 1, 1]).unwrap();
            c.dimension(DEFAULT_RANK_BUDGET).unwrap();
            c
        })
    }

    fn member(seed: u64) -> Vec<u32> {
        code3()
            .random_member(&mut ChaCha8Rng::seed_from_u64(seed))
            .unwrap()
    }

    #[test]
    fn assembly_counts() {
        let c = code3();
        assert_eq!(c.dense_row_count(), 5616);
        assert_eq!(c.sparse_row_count(), 5616);
        assert!(c.sparse_rows().all(|r| r.entries.len() == 3));
        let full = assemble_code(q3(), [2, 2, 2]).unwrap();
        assert_eq!(full.dense_row_count(), 0);
        assert!(assemble_code(q3(), [3, 1, 1]).is_err());
    }

    #[test]
    fn dimension_and_generators() {
        let c = code3();
        let d = c.dimension.as_ref().unwrap();
        assert!(d.exact);
        assert_eq!(d.value + d.rank.unwrap(), 5616);
        assert!(d.value >= 4);
        let mut full = assemble_code(q3(), [2, 2, 2]).unwrap();
        assert_eq!(full.dimension(DEFAULT_RANK_BUDGET).unwrap().value, 5616);
        let mut small = assemble_code(q3(), [1, 1, 1]).unwrap();
        let r = small.dimension(100).unwrap();
        assert!(!r.exact);
        assert_eq!(r.value, 0);
    }

    #[test]
    fn single_symbol_change_fails_its_three_edges() {
        let c = code3();
        let ones = vec![1u32; c.len()];
        assert!(c.membership(&ones).unwrap().member);
        let mut w = member(1);
        assert!(c.membership(&w).unwrap().member);
        w[100] = (w[100] + 1) % 3;
        let mut expected = q3().triangle_edges(100).map(|e| e as usize).to_vec();
        expected.sort_unstable();
        assert_eq!(c.membership(&w).unwrap().failing_edges, expected);
    }

    #[test]
    fn tanner_and_line_membership_agree() {
        let c = code3();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for i in 0..20u64 {
            let w = match i % 3 {
                0 => member(i),
                1 => corrupt(&member(i), 1 + i as usize % 4, i, 3).unwrap(),
                _ => (0..c.len()).map(|_| rng.random_range(0..3)).collect(),
            };
            assert_eq!(c.membership(&w).unwrap(), c.line_membership(&w).unwrap());
        }
    }

    #[test]
    fn translations_and_products() {
        let c = code3();
        let x = q3();
        let ring = x.ring();
        let w = member(5);
        let id = GroupElement::identity(ring);
        assert_eq!(translate(&w, &id, x).unwrap(), w);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let g = *x.element(rng.random_range(0..x.num_triangles()));
            let tw = translate(&w, &g, x).unwrap();
            assert!(c.membership(&tw).unwrap().member);
            let back = translate(&tw, &g.inverse(ring).unwrap(), x).unwrap();
            assert_eq!(back, w);
        }
        assert_eq!(multiply(&w, &vec![1; w.len()], 3).unwrap(), w);
    }

    #[test]
    fn local_codes_pull_back_to_edge_checks() {
        let c = code3();
        let x = q3();
        let cache = LocalCodeCache::new();
        let specs = local_specs(c, &cache).unwrap();
        for v in 0..x.num_vertices() {
            let chart = vertex_chart(v, c);
            let mut sorted = chart.triangles.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 27);
            for b in &specs[chart.ty - 1].basis_eval {
                let mut w = vec![0u32; x.num_triangles()];
                for (&t, &val) in chart.triangles.iter().zip(b) {
                    w[t as usize] = val;
                }
                assert!(x.vertex_edges(v).iter().all(|&e| c.edge_ok(&w, e as usize)));
            }
        }
        // and conversely on words that are not local codewords
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for v in (0..x.num_vertices()).step_by(31) {
            let chart = vertex_chart(v, c);
            let w: Vec<u32> = (0..x.num_triangles()).map(|_| rng.random_range(0..3)).collect();
            let local = specs[chart.ty - 1].contains(&chart.pullback(&w));
            let edges = x.vertex_edges(v).iter().all(|&e| c.edge_ok(&w, e as usize));
            assert_eq!(local, edges);
        }
    }

    #[test]
    fn vertex_tester_and_two_query() {
        let c = code3();
        let cache = LocalCodeCache::new();
        let w = member(9);
        assert_eq!(vertex_tester(&w, c, &cache).unwrap().fraction, 0.0);
        let tq = two_query_views(&w, c, &cache).unwrap();
        assert!(tq.rejected_edges.is_empty());
        let bad = corrupt(&w, 1, 3, 3).unwrap();
        let vt = vertex_tester(&bad, c, &cache).unwrap();
        assert_eq!(vt.rejecting.len(), 3);
        assert_eq!(vt.fraction, 3.0 / 624.0);
        let tq = two_query_views(&bad, c, &cache).unwrap();
        assert!(tq.rejection_fraction > 0.0);
        assert_eq!(tq.symbols.iter().filter(|s| s.is_none()).count(), 3);
    }

    #[test]
    fn correction_recovers_small_corruptions() {
        let c = code3();
        let x = q3();
        let cache = LocalCodeCache::new();
        let w = member(11);
        let z = views_from_word(&w, c, ViewMode::Restrict, &cache, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(alpha(&z, x).disagreeing_edges, 0);
        let out = local_correction(&z, c, &cache, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(out.trace.steps(), 0);
        assert_eq!(out.codeword.as_ref(), Some(&w));

        for k in 1..=3 {
            let bad = corrupt(&w, k, 40 + k as u64, 3).unwrap();
            let z = views_from_word(&bad, c, ViewMode::Nearest, &cache, DEFAULT_ENUM_BUDGET).unwrap();
            let out = local_correction(&z, c, &cache, DEFAULT_ENUM_BUDGET).unwrap();
            assert!(out.trace.is_monotone());
            assert_eq!(out.trace.outcome, CorrectionOutcome::Codeword);
            assert_eq!(out.codeword.as_ref(), Some(&w));
        }
    }

    #[test]
    fn corruption_is_exact_and_deterministic() {
        let w = member(12);
        assert_eq!(corrupt(&w, 0, 1, 3).unwrap(), w);
        let a = corrupt(&w, 17, 99, 3).unwrap();
        assert_eq!(a.iter().zip(&w).filter(|(x, y)| x != y).count(), 17);
        assert_eq!(a, corrupt(&w, 17, 99, 3).unwrap());
        assert!(corrupt(&w, w.len() + 1, 0, 3).is_err());
    }

    #[test]
    fn weight_probes() {
        let c = code3();
        let gamma = 1.0 / 3f64.sqrt();
        let p = min_weight_probe(c, gamma, DEFAULT_WEIGHT_ENUM_BUDGET, 50, 1).unwrap();
        assert!(!p.exact && p.vacuous);
        assert!((p.delta - 2.0 / 3.0).abs() < 1e-12);
        assert!(p.weight > 0 && c.membership(&p.witness).unwrap().member);

        let mut full = assemble_code(q3(), [2, 2, 2]).unwrap();
        full.dimension(DEFAULT_RANK_BUDGET).unwrap();
        assert_eq!(min_weight_probe(&full, gamma, 10, 0, 1).unwrap().weight, 1);
    }

    #[test]
    fn enumeration_matches_brute_force_on_a_toy_generator() {
        let mut c = assemble_code(q3(), [1, 1, 1]).unwrap();
        let gens: Vec<Vec<u32>> = code3().generator().unwrap()[..4].to_vec();
        c.generator = Some(gens.clone());
        let p = min_weight_probe(&c, 0.5, 1000, 0, 0).unwrap();
        assert!(p.exact);
        let f = PrimeField::new(3).unwrap();
        let mut best = usize::MAX;
        for code in 1..81u32 {
            let mut w = vec![0u32; c.len()];
            let mut k = code;
            for g in &gens {
                let a = k % 3;
                k /= 3;
                for (x, &v) in w.iter_mut().zip(g) {
                    *x = f.add(*x, f.mul(a, v));
                }
            }
            best = best.min(w.iter().filter(|&&v| v != 0).count());
        }
        assert_eq!(p.weight, best);
    }

    #[test]
    fn exports() {
        let c = code3();
        let mut buf = Vec::new();
        c.write_parity(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "%%MatrixMarket-like: 5616 5616 16848 3");
        assert_eq!(lines.count(), 16848);
        let w = member(13);
        let s = word_to_digits(&w, 3).unwrap();
        assert_eq!(s.len(), 5616);
        assert_eq!(digits_to_word(&s, 3).unwrap(), w);
        assert!(digits_to_word("013", 3).is_err());
    }
}

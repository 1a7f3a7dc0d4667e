//! Agreement decoding for `C_{dx,dy}`.
//!
//! Two ensembles of univariate polynomials, one per row line `(., b, c)` and
//! one per skew line `(a, ., a y + c)`, are reconciled into a single codeword:
//! an error locator `E` in `C_{e,e}` is fitted to vanish where they disagree,
//! and the codeword `Q` is then recovered by a linear solve on `{E != 0}`.
//! Also holds the exhaustive nearest-codeword oracle used to cross-check it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{rank_nullspace, ExactMatrix, PrimeField, RhsOutcome};
use crate::local_code::{build_local_code, interpolate_line, point_index, LocalCodeSpec};
use crate::{HdxError, Result};

/// Default limit on `p^dim` for exhaustive enumeration.
pub const DEFAULT_ENUM_BUDGET: u64 = 2_000_000;

/// Shared, lazily built local codes keyed by `(p, dx, dy)`.
#[derive(Default)]
pub struct LocalCodeCache {
    codes: Mutex<HashMap<(u32, u32, u32), Arc<LocalCodeSpec>>>,
}

impl LocalCodeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static LocalCodeCache {
        static CACHE: OnceLock<LocalCodeCache> = OnceLock::new();
        CACHE.get_or_init(LocalCodeCache::new)
    }

    pub fn get(&self, p: u32, dx: u32, dy: u32) -> Result<Arc<LocalCodeSpec>> {
        if let Some(c) = self.codes.lock().expect("cache lock").get(&(p, dx, dy)) {
            return Ok(c.clone());
        }
        let spec = Arc::new(build_local_code(p, dx, dy)?);
        Ok(self
            .codes
            .lock()
            .expect("cache lock")
            .entry((p, dx, dy))
            .or_insert(spec)
            .clone())
    }
}

fn check_poly(p: u32, d: u32, poly: &[u32]) -> Result<()> {
    if poly.len() != d as usize + 1 {
        return Err(HdxError::shape(d + 1, poly.len()));
    }
    if poly.iter().any(|&c| c >= p) {
        return Err(HdxError::Validation(format!("coefficient outside F_{p}")));
    }
    Ok(())
}

/// Restriction of `w` to a line as a polynomial of degree at most `d`.
fn fit_line(f: &PrimeField, values: &[u32], d: u32) -> Option<Vec<u32>> {
    let mut c = interpolate_line(f, values);
    if c[d as usize + 1..].iter().any(|&x| x != 0) {
        return None;
    }
    c.truncate(d as usize + 1);
    Some(c)
}

/// One polynomial of degree at most `dx` per row line `(., b, c)`, stored at
/// `b + p c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineEnsemble {
    pub p: u32,
    pub dx: u32,
    pub rows: Vec<Vec<u32>>,
}

impl LineEnsemble {
    pub fn new(p: u32, dx: u32, rows: Vec<Vec<u32>>) -> Result<Self> {
        PrimeField::new(p)?;
        if rows.len() != (p * p) as usize {
            return Err(HdxError::shape(p * p, rows.len()));
        }
        for r in &rows {
            check_poly(p, dx, r)?;
        }
        Ok(LineEnsemble { p, dx, rows })
    }

    /// Row restrictions of a point-indexed word; fails if a row is too
    /// high in degree.
    pub fn from_word(w: &[u32], p: u32, dx: u32) -> Result<Self> {
        let f = PrimeField::new(p)?;
        let rows = (0..p * p)
            .map(|bc| {
                let vals: Vec<u32> = (0..p).map(|x| w[(x + p * bc) as usize]).collect();
                fit_line(&f, &vals, dx)
                    .ok_or_else(|| HdxError::Validation(format!("row {bc} has x-degree above {dx}")))
            })
            .collect::<Result<_>>()?;
        Ok(LineEnsemble { p, dx, rows })
    }

    pub fn row(&self, b: u32, c: u32) -> &[u32] {
        &self.rows[(b + self.p * c) as usize]
    }

    pub fn set_row(&mut self, b: u32, c: u32, poly: Vec<u32>) -> Result<()> {
        check_poly(self.p, self.dx, &poly)?;
        self.rows[(b + self.p * c) as usize] = poly;
        Ok(())
    }

    /// Values at every point, indexed `x + p y + p^2 z`.
    pub fn grid(&self) -> Vec<u32> {
        let f = PrimeField::new(self.p).expect("validated");
        let p = self.p;
        let mut out = vec![0u32; (p * p * p) as usize];
        for (bc, poly) in self.rows.iter().enumerate() {
            for x in 0..p {
                out[x as usize + (p as usize) * bc] = f.eval_poly(poly, x);
            }
        }
        out
    }
}

/// One polynomial in `y` of degree at most `dy` per skew line
/// `y -> (a, y, a y + c)`, stored at `a + p c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewEnsemble {
    pub p: u32,
    pub dy: u32,
    pub lines: Vec<Vec<u32>>,
}

impl SkewEnsemble {
    pub fn new(p: u32, dy: u32, lines: Vec<Vec<u32>>) -> Result<Self> {
        PrimeField::new(p)?;
        if lines.len() != (p * p) as usize {
            return Err(HdxError::shape(p * p, lines.len()));
        }
        for l in &lines {
            check_poly(p, dy, l)?;
        }
        Ok(SkewEnsemble { p, dy, lines })
    }

    pub fn from_word(w: &[u32], p: u32, dy: u32) -> Result<Self> {
        let f = PrimeField::new(p)?;
        let mut lines = Vec::with_capacity((p * p) as usize);
        for c in 0..p {
            for a in 0..p {
                let vals: Vec<u32> = (0..p).map(|y| w[point_index(a, y, (a * y + c) % p, p)]).collect();
                lines.push(fit_line(&f, &vals, dy).ok_or_else(|| {
                    HdxError::Validation(format!("skew line ({a}, {c}) has degree above {dy}"))
                })?);
            }
        }
        Ok(SkewEnsemble { p, dy, lines })
    }

    pub fn line(&self, a: u32, c: u32) -> &[u32] {
        &self.lines[(a + self.p * c) as usize]
    }

    pub fn set_line(&mut self, a: u32, c: u32, poly: Vec<u32>) -> Result<()> {
        check_poly(self.p, self.dy, &poly)?;
        self.lines[(a + self.p * c) as usize] = poly;
        Ok(())
    }

    pub fn grid(&self) -> Vec<u32> {
        let f = PrimeField::new(self.p).expect("validated");
        let p = self.p;
        let mut out = vec![0u32; (p * p * p) as usize];
        for c in 0..p {
            for a in 0..p {
                let poly = self.line(a, c);
                for y in 0..p {
                    out[point_index(a, y, (a * y + c) % p, p)] = f.eval_poly(poly, y);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    /// Point indices where the ensembles differ, increasing.
    pub points: Vec<usize>,
    pub delta_cubed: f64,
}

pub fn disagreement_set(x: &LineEnsemble, y: &SkewEnsemble) -> Result<Disagreement> {
    if x.p != y.p {
        return Err(HdxError::Parameter(format!(
            "ensembles over F_{} and F_{}",
            x.p, y.p
        )));
    }
    let (gx, gy) = (x.grid(), y.grid());
    let points: Vec<usize> = (0..gx.len()).filter(|&i| gx[i] != gy[i]).collect();
    Ok(Disagreement {
        delta_cubed: points.len() as f64 / gx.len() as f64,
        points,
    })
}

/// A member of a local code with its coordinates and evaluations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalWord {
    pub coords: Vec<u32>,
    pub eval: Vec<u32>,
}

/// A nonzero `E` in `C_{e,e}` vanishing on `points`: the sum of a kernel
/// basis of the evaluation map restricted to `points`. `None` iff no such
/// `E` exists.
pub fn fit_error_locator(
    p: u32,
    points: &[usize],
    e: u32,
    cache: &LocalCodeCache,
) -> Result<Option<LocalWord>> {
    if e >= p {
        return Err(HdxError::Parameter(format!(
            "locator degree {e} must be below {p}"
        )));
    }
    let spec = cache.get(p, e, e)?;
    let f = spec.field();
    let coords = if points.is_empty() {
        let one = vec![1u32; spec.len()];
        spec.coordinates(&one)
            .ok_or_else(|| HdxError::Inconsistent("constants are not in C_{e,e}".into()))?
    } else {
        let rows: Vec<Vec<u32>> = points
            .iter()
            .map(|&s| spec.basis_eval.iter().map(|b| b[s]).collect())
            .collect();
        let kernel = rank_nullspace(&ExactMatrix::from_rows(&rows, spec.dim, p)?, None)?.nullspace;
        if kernel.is_empty() {
            return Ok(None);
        }
        kernel.iter().fold(vec![0u32; spec.dim], |acc, v| {
            acc.iter().zip(v).map(|(&a, &b)| f.add(a, b)).collect()
        })
    };
    let eval = spec.encode(&coords)?;
    assert!(eval.iter().any(|&v| v != 0), "locator is nonzero");
    assert!(points.iter().all(|&s| eval[s] == 0), "locator vanishes on S");
    Ok(Some(LocalWord { coords, eval }))
}

/// The unique `Q` in `C_{dx,dy}` agreeing with `x_values` wherever the
/// locator is nonzero; `None` if the system is inconsistent or leaves `Q`
/// undetermined.
pub fn fit_quotient(x_values: &[u32], locator: &[u32], spec: &LocalCodeSpec) -> Result<Option<LocalWord>> {
    if x_values.len() != spec.len() || locator.len() != spec.len() {
        return Err(HdxError::shape(spec.len(), x_values.len().min(locator.len())));
    }
    if locator.iter().all(|&v| v == 0) {
        return Err(HdxError::Parameter("the locator must be nonzero".into()));
    }
    let support: Vec<usize> = (0..spec.len()).filter(|&i| locator[i] != 0).collect();
    let rows: Vec<Vec<u32>> = support
        .iter()
        .map(|&s| spec.basis_eval.iter().map(|b| b[s]).collect())
        .collect();
    let rhs: Vec<u32> = support.iter().map(|&s| x_values[s]).collect();
    let el = rank_nullspace(&ExactMatrix::from_rows(&rows, spec.dim, spec.p)?, Some(&rhs))?;
    let coords = match el.rhs {
        Some(RhsOutcome::Solution(c)) if el.nullspace.is_empty() => c,
        _ => return Ok(None),
    };
    let eval = spec.encode(&coords)?;
    assert!(spec.contains(&eval), "quotient is a codeword");
    assert!(
        support.iter().all(|&s| eval[s] == x_values[s]),
        "quotient matches X off the locator"
    );
    Ok(Some(LocalWord { coords, eval }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeStatus {
    /// Both ensembles are restrictions of `Q`.
    Exact,
    /// `line_disagreement <= 4 delta`.
    WithinBound,
    /// A codeword was found but it misses the bound.
    ExceedsBound,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecodeResult {
    pub status: DecodeStatus,
    pub q: Option<LocalWord>,
    pub disagreement_points: usize,
    pub delta_cubed: f64,
    pub delta: f64,
    /// Fraction of rows of `X` plus fraction of skew lines of `Y` that are
    /// not restrictions of `Q`.
    pub line_disagreement: Option<f64>,
    pub locator_degree: Option<u32>,
    /// `p >= 2 (dx + dy) + 5 delta p`, evaluated on the measured `delta`.
    pub hypothesis_holds: bool,
    pub tried: Vec<u32>,
}

/// `p >= 2 (dx + dy) + 5 delta p` with `delta^3 = count / p^3`, decided as
/// `(p - 2 (dx + dy))^3 >= 125 count` to avoid rounding.
pub fn hypothesis_holds(p: u32, dx: u32, dy: u32, count: usize) -> bool {
    let slack = p as i128 - 2 * (dx + dy) as i128;
    slack >= 0 && slack.pow(3) >= 125 * count as i128
}

/// Locator degrees to try: `0, 1, ...` up to the larger of `ceil(delta p)`
/// and `floor((p - 2 (dx + dy)) / 5)`, clipped below `p`.
pub fn locator_schedule(p: u32, dx: u32, dy: u32, count: usize) -> Vec<u32> {
    // ceil(delta p) = smallest e with e^3 >= count.
    let mut first = 0u32;
    while (first as u64).pow(3) < count as u64 {
        first += 1;
    }
    let cap = (p as i64 - 2 * (dx + dy) as i64).max(0) as u32 / 5;
    (0..=first.max(cap).min(p - 1)).collect()
}

pub fn agreement_decode(x: &LineEnsemble, y: &SkewEnsemble, cache: &LocalCodeCache) -> Result<DecodeResult> {
    let dis = disagreement_set(x, y)?;
    let (p, dx, dy) = (x.p, x.dx, y.dy);
    let spec = cache.get(p, dx, dy)?;
    let delta = dis.delta_cubed.cbrt();
    let gx = x.grid();
    let mut result = DecodeResult {
        status: DecodeStatus::Failed,
        q: None,
        disagreement_points: dis.points.len(),
        delta_cubed: dis.delta_cubed,
        delta,
        line_disagreement: None,
        locator_degree: None,
        hypothesis_holds: hypothesis_holds(p, dx, dy, dis.points.len()),
        tried: Vec::new(),
    };
    for e in locator_schedule(p, dx, dy, dis.points.len()) {
        result.tried.push(e);
        let Some(loc) = fit_error_locator(p, &dis.points, e, cache)? else {
            continue;
        };
        let Some(q) = fit_quotient(&gx, &loc.eval, &spec)? else {
            continue;
        };
        let ld = line_disagreement(x, y, &q.eval)?;
        result.status = if ld == 0.0 {
            DecodeStatus::Exact
        } else if ld <= 4.0 * delta {
            DecodeStatus::WithinBound
        } else {
            DecodeStatus::ExceedsBound
        };
        result.line_disagreement = Some(ld);
        result.locator_degree = Some(e);
        result.q = Some(q);
        break;
    }
    Ok(result)
}

/// `Pr_{b,c}[X row != Q row] + Pr_{a,c}[Y line != Q line]`.
pub fn line_disagreement(x: &LineEnsemble, y: &SkewEnsemble, q: &[u32]) -> Result<f64> {
    let qx = LineEnsemble::from_word(q, x.p, x.dx)?;
    let qy = SkewEnsemble::from_word(q, y.p, y.dy)?;
    let n = (x.p * x.p) as f64;
    let rows = x.rows.iter().zip(&qx.rows).filter(|(a, b)| a != b).count();
    let lines = y.lines.iter().zip(&qy.lines).filter(|(a, b)| a != b).count();
    Ok(rows as f64 / n + lines as f64 / n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nearest {
    pub coords: Vec<u32>,
    pub word: Vec<u32>,
    pub distance: usize,
}

fn enumeration_size(p: u32, dim: usize) -> u128 {
    (p as u128).saturating_pow(dim as u32)
}

/// Nearest codeword of `spec` to `w` by exhaustive enumeration; ties go to
/// the lexicographically smallest coordinate vector.
pub fn brute_nearest(w: &[u32], spec: &LocalCodeSpec, budget: u64) -> Result<Nearest> {
    if w.len() != spec.len() {
        return Err(HdxError::shape(spec.len(), w.len()));
    }
    let size = enumeration_size(spec.p, spec.dim);
    if size > budget as u128 {
        return Err(HdxError::budget(
            "local codeword enumeration",
            size,
            budget as u128,
        ));
    }
    if spec.dim == 0 {
        return Ok(Nearest {
            coords: Vec::new(),
            word: vec![0; w.len()],
            distance: w.iter().filter(|&&v| v != 0).count(),
        });
    }
    let f = spec.field();
    let best = (0..spec.p)
        .into_par_iter()
        .map(|c0| {
            let start: Vec<u32> = spec.basis_eval[0].iter().map(|&b| f.mul(c0, b)).collect();
            let mut best: Option<(usize, Vec<u32>)> = None;
            let mut coords = vec![0u32; spec.dim];
            coords[0] = c0;
            search(spec, &f, w, 1, &start, &mut coords, &mut best);
            best.expect("at least one codeword")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("p > 0");
    let word = spec.encode(&best.1)?;
    Ok(Nearest {
        coords: best.1,
        word,
        distance: best.0,
    })
}

/// Depth-first enumeration in lexicographic order; `partial` is the sum of
/// the first `level` scaled basis vectors.
fn search(
    spec: &LocalCodeSpec,
    f: &PrimeField,
    w: &[u32],
    level: usize,
    partial: &[u32],
    coords: &mut Vec<u32>,
    best: &mut Option<(usize, Vec<u32>)>,
) {
    if level == spec.dim {
        let d = partial.iter().zip(w).filter(|(a, b)| a != b).count();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            *best = Some((d, coords.clone()));
        }
        return;
    }
    let basis = &spec.basis_eval[level];
    let mut cur = partial.to_vec();
    for c in 0..spec.p {
        coords[level] = c;
        search(spec, f, w, level + 1, &cur, coords, best);
        for (x, &b) in cur.iter_mut().zip(basis) {
            *x = f.add(*x, b);
        }
    }
    coords[level] = 0;
}

/// Every codeword of a local code in lexicographic coordinate order.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub p: u32,
    pub dim: usize,
    pub words: Vec<Vec<u32>>,
}

impl Codebook {
    pub fn new(spec: &LocalCodeSpec, budget: u64) -> Result<Self> {
        let size = enumeration_size(spec.p, spec.dim);
        if size > budget as u128 {
            return Err(HdxError::budget("local codebook", size, budget as u128));
        }
        let f = spec.field();
        let mut words = Vec::with_capacity(size as usize);
        let mut coords = vec![0u32; spec.dim];
        loop {
            words.push(spec.encode(&coords)?);
            // Odometer with the last coordinate fastest.
            let mut k = spec.dim;
            loop {
                if k == 0 {
                    return Ok(Codebook {
                        p: f.p(),
                        dim: spec.dim,
                        words,
                    });
                }
                k -= 1;
                coords[k] += 1;
                if coords[k] < spec.p {
                    break;
                }
                coords[k] = 0;
            }
        }
    }

    /// Coordinates of the `i`-th word.
    pub fn coords(&self, mut i: usize) -> Vec<u32> {
        let mut c = vec![0u32; self.dim];
        for slot in c.iter_mut().rev() {
            *slot = (i % self.p as usize) as u32;
            i /= self.p as usize;
        }
        c
    }
}

/// One experiment row of the decoder Monte Carlo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecodeRecord {
    pub p: u32,
    pub dx: u32,
    pub dy: u32,
    pub seed: u64,
    pub corruption: Corruption,
    pub delta_cubed: f64,
    pub e: Option<u32>,
    pub status: DecodeStatus,
    pub line_disagreement: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corruption {
    pub rows: usize,
    pub lines: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_member(spec: &LocalCodeSpec, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let c: Vec<u32> = (0..spec.dim).map(|_| rng.random_range(0..spec.p)).collect();
        spec.encode(&c).unwrap()
    }

    fn ensembles(w: &[u32], p: u32, dx: u32, dy: u32) -> (LineEnsemble, SkewEnsemble) {
        (
            LineEnsemble::from_word(w, p, dx).unwrap(),
            SkewEnsemble::from_word(w, p, dy).unwrap(),
        )
    }

    #[test]
    fn restrictions_agree_and_round_trip() {
        let cache = LocalCodeCache::new();
        let spec = cache.get(13, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let w = random_member(&spec, &mut rng);
            let (x, y) = ensembles(&w, 13, 1, 1);
            assert_eq!(x.grid(), w);
            assert_eq!(y.grid(), w);
            let r = agreement_decode(&x, &y, &cache).unwrap();
            assert_eq!(r.status, DecodeStatus::Exact);
            assert_eq!(r.locator_degree, Some(0));
            assert_eq!(r.q.unwrap().eval, w);
        }
    }

    #[test]
    fn one_changed_row() {
        let cache = LocalCodeCache::new();
        let spec = cache.get(7, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_member(&spec, &mut rng);
        let (mut x, y) = ensembles(&w, 7, 1, 1);
        let old = x.row(2, 5).to_vec();
        let new = vec![(old[0] + 1) % 7, (old[1] + 3) % 7];
        x.set_row(2, 5, new.clone()).unwrap();
        let d = disagreement_set(&x, &y).unwrap();
        let f = PrimeField::new(7).unwrap();
        let direct = (0..7)
            .filter(|&a| f.eval_poly(&old, a) != f.eval_poly(&new, a))
            .count();
        assert_eq!(d.points.len(), direct);
        assert!(direct <= 7);
    }

    #[test]
    fn everywhere_disagreeing_ensembles() {
        let x = LineEnsemble::new(5, 1, vec![vec![0, 0]; 25]).unwrap();
        let y = SkewEnsemble::new(5, 1, vec![vec![1, 0]; 25]).unwrap();
        let d = disagreement_set(&x, &y).unwrap();
        assert_eq!(d.points.len(), 125);
        assert_eq!(d.delta_cubed, 1.0);
    }

    #[test]
    fn locator_examples() {
        let cache = LocalCodeCache::new();
        let e = fit_error_locator(5, &[], 2, &cache).unwrap().unwrap();
        assert!(e.eval.iter().all(|&v| v == 1));
        // one evaluation row against the 8-dimensional C_{1,1}: 7-dim kernel
        let spec = cache.get(5, 1, 1).unwrap();
        let row: Vec<Vec<u32>> = vec![spec.basis_eval.iter().map(|b| b[0]).collect()];
        let k = rank_nullspace(&ExactMatrix::from_rows(&row, 8, 5).unwrap(), None).unwrap();
        assert_eq!(k.nullspace.len(), 7);
        let e = fit_error_locator(5, &[0], 1, &cache).unwrap().unwrap();
        assert_eq!(e.eval[0], 0);
        assert!(fit_error_locator(5, &(0..125).collect::<Vec<_>>(), 1, &cache)
            .unwrap()
            .is_none());
    }

    #[test]
    fn quotient_cases() {
        let cache = LocalCodeCache::new();
        let spec = cache.get(7, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = random_member(&spec, &mut rng);
        let one = vec![1u32; spec.len()];
        assert_eq!(fit_quotient(&w, &one, &spec).unwrap().unwrap().eval, w);

        // corrupt one row; a locator vanishing on exactly that row
        let mut bad = w.clone();
        for x in 0..7 {
            let i = point_index(x, 3, 4, 7);
            bad[i] = (bad[i] + 1) % 7;
        }
        let loc: Vec<u32> = (0..spec.len())
            .map(|i| u32::from(!((i / 7) % 7 == 3 && i / 49 == 4)))
            .collect();
        assert_eq!(fit_quotient(&bad, &loc, &spec).unwrap().unwrap().eval, w);

        let noise: Vec<u32> = (0..spec.len()).map(|_| rng.random_range(0..7)).collect();
        assert!(fit_quotient(&noise, &one, &spec).unwrap().is_none());
    }

    #[test]
    fn single_row_corruption_at_17() {
        let cache = LocalCodeCache::new();
        let spec = cache.get(17, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let w = random_member(&spec, &mut rng);
            let (mut x, y) = ensembles(&w, 17, 1, 1);
            let (b, c) = (rng.random_range(0..17), rng.random_range(0..17));
            let mut row = x.row(b, c).to_vec();
            row[1] = (row[1] + rng.random_range(1..17)) % 17;
            x.set_row(b, c, row).unwrap();
            let r = agreement_decode(&x, &y, &cache).unwrap();
            assert!(r.hypothesis_holds);
            assert_eq!(r.q.as_ref().unwrap().eval, w);
            assert!(r.line_disagreement.unwrap() <= 4.0 * r.delta);
            assert_eq!(r.status, DecodeStatus::WithinBound);
        }
    }

    #[test]
    fn hypothesis_arithmetic() {
        // p = 17, dx = dy = 1: (17 - 4)^3 = 2197 >= 125 * 17
        assert!(hypothesis_holds(17, 1, 1, 17));
        assert!(!hypothesis_holds(17, 1, 1, 18));
        assert!(!hypothesis_holds(5, 1, 1, 5));
        assert!(hypothesis_holds(5, 1, 1, 0));
        assert_eq!(locator_schedule(17, 1, 1, 17), vec![0, 1, 2, 3]);
        assert_eq!(locator_schedule(13, 1, 1, 0), vec![0, 1]);
    }

    #[test]
    fn nearest_codeword_oracle() {
        let cache = LocalCodeCache::new();
        let spec = cache.get(5, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_member(&spec, &mut rng);
        let n = brute_nearest(&w, &spec, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!((n.distance, &n.word), (0, &w));
        let mut v = w.clone();
        v[17] = (v[17] + 2) % 5;
        let n = brute_nearest(&v, &spec, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!((n.distance, &n.word), (1, &w));
        assert!(brute_nearest(&v, &spec, 1000).is_err());

        let consts = cache.get(5, 0, 0).unwrap();
        assert_eq!(consts.dim, 1);
        let mut v = vec![3u32; 125];
        v[..40].iter_mut().for_each(|x| *x = 1);
        let n = brute_nearest(&v, &consts, DEFAULT_ENUM_BUDGET).unwrap();
        assert!(n.word.iter().all(|&x| x == 3));
        assert_eq!(n.distance, 40);
    }

    #[test]
    fn codebook_order_matches_coordinates() {
        let cache = LocalCodeCache::new();
        let spec = cache.get(3, 1, 1).unwrap();
        // p < dx + dy + 2, so the dimension exceeds the formula value 8
        assert_eq!(spec.dim, 10);
        let book = Codebook::new(&spec, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(book.words.len(), 59049);
        for i in [0, 1, 2, 3, 100, 59048] {
            assert_eq!(book.words[i], spec.encode(&book.coords(i)).unwrap());
        }
        // minimum distance of C_{1,1} over F_3 is at least 3
        let min = book.words[1..]
            .iter()
            .map(|w| w.iter().filter(|&&v| v != 0).count())
            .min()
            .unwrap();
        assert!(min >= 3, "{min}");
    }
}

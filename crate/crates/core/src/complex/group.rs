use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::algebra::{is_primitive, Ring, RingElement};
use crate::{HdxError, Result};

/// A 3x3 matrix over `R_n`, entries stored row-major as ring codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(pub [u32; 9]);

impl GroupElement {
    pub fn identity(ring: &Ring) -> Self {
        let one = ring.one();
        GroupElement([one, 0, 0, 0, one, 0, 0, 0, one])
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> u32 {
        self.0[3 * r + c]
    }

    pub fn mul(&self, other: &GroupElement, ring: &Ring) -> GroupElement {
        let mut out = [0u32; 9];
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = 0;
                for k in 0..3 {
                    let a = self.0[3 * r + k];
                    let b = other.0[3 * k + c];
                    if a != 0 && b != 0 {
                        acc = ring.add(acc, ring.mul(a, b));
                    }
                }
                out[3 * r + c] = acc;
            }
        }
        GroupElement(out)
    }

    pub fn det(&self, ring: &Ring) -> u32 {
        let e = |r, c| self.entry(r, c);
        let m = |a, b| ring.mul(a, b);
        let term = |a, b, c| m(a, m(b, c));
        let plus = ring.add(
            ring.add(term(e(0, 0), e(1, 1), e(2, 2)), term(e(0, 1), e(1, 2), e(2, 0))),
            term(e(0, 2), e(1, 0), e(2, 1)),
        );
        let minus = ring.add(
            ring.add(term(e(0, 2), e(1, 1), e(2, 0)), term(e(0, 0), e(1, 2), e(2, 1))),
            term(e(0, 1), e(1, 0), e(2, 2)),
        );
        ring.sub(plus, minus)
    }

    /// Inverse of a determinant-one matrix (its adjugate).
    pub fn inverse(&self, ring: &Ring) -> Result<GroupElement> {
        if self.det(ring) != ring.one() {
            return Err(HdxError::Validation("matrix does not have determinant 1".into()));
        }
        let e = |r: usize, c: usize| self.entry(r % 3, c % 3);
        let mut out = [0u32; 9];
        for r in 0..3 {
            for c in 0..3 {
                // adj[r][c] = cofactor of (c, r)
                let a = ring.mul(e(c + 1, r + 1), e(c + 2, r + 2));
                let b = ring.mul(e(c + 1, r + 2), e(c + 2, r + 1));
                out[3 * r + c] = ring.sub(a, b);
            }
        }
        Ok(GroupElement(out))
    }

    /// Entries as coefficient vectors.
    pub fn ring_entries(&self, ring: &Ring) -> [RingElement; 9] {
        std::array::from_fn(|i| ring.element(self.0[i]))
    }

    /// Key whose numeric order is the order of the canonical serialization
    /// (nine entries row-major, each as `n` base-`q` digits with `t^0` first).
    #[inline]
    pub fn key(&self, ring_size: u32) -> u128 {
        self.0
            .iter()
            .fold(0u128, |acc, &c| acc * ring_size as u128 + c as u128)
    }

    pub fn from_key(mut key: u128, ring_size: u32) -> GroupElement {
        let mut out = [0u32; 9];
        for slot in out.iter_mut().rev() {
            *slot = (key % ring_size as u128) as u32;
            key /= ring_size as u128;
        }
        GroupElement(out)
    }

    /// Canonical byte serialization: one byte per base-`q` digit.
    pub fn to_bytes(&self, ring: &Ring) -> Vec<u8> {
        self.ring_entries(ring)
            .iter()
            .flat_map(|e| e.coeffs.iter().map(|&c| c as u8).collect::<Vec<_>>())
            .collect()
    }

    pub fn from_bytes(bytes: &[u8], ring: &Ring) -> Result<GroupElement> {
        let n = ring.n();
        if bytes.len() != 9 * n {
            return Err(HdxError::shape(9 * n, bytes.len()));
        }
        let mut out = [0u32; 9];
        for (i, chunk) in bytes.chunks(n).enumerate() {
            if chunk.iter().any(|&b| b as u32 >= ring.q()) {
                return Err(HdxError::Validation(format!("digit out of range in {chunk:?}")));
            }
            out[i] = ring.code(&RingElement {
                coeffs: chunk.iter().map(|&b| b as u32).collect(),
            });
        }
        Ok(GroupElement(out))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    K,
    H,
}

/// One of the subgroups `K_1, K_2, K_3, H_1, H_2, H_3` (index 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubgroupKind {
    pub family: Family,
    pub index: usize,
}

impl SubgroupKind {
    pub fn k(index: usize) -> Self {
        assert!((1..=3).contains(&index), "subgroup index is 1, 2 or 3");
        SubgroupKind {
            family: Family::K,
            index,
        }
    }

    pub fn h(index: usize) -> Self {
        assert!((1..=3).contains(&index), "subgroup index is 1, 2 or 3");
        SubgroupKind {
            family: Family::H,
            index,
        }
    }
}

/// `h_i(alpha)`: the identity with `alpha t` at `(3,1)`, `(1,2)` or `(2,3)`
/// for `i = 1, 2, 3` (1-based positions).
pub fn h(ring: &Ring, i: usize, alpha: u32) -> GroupElement {
    let mut g = GroupElement::identity(ring);
    let v = ring.scale(alpha, ring.t());
    let pos = match i {
        1 => 6,
        2 => 1,
        3 => 5,
        _ => panic!("h index is 1, 2 or 3"),
    };
    g.0[pos] = v;
    g
}

/// `K_i(a, b, c)` following the defining matrix patterns.
pub fn k(ring: &Ring, i: usize, a: u32, b: u32, c: u32) -> GroupElement {
    let t = ring.t();
    let t2 = ring.mul(t, t);
    let (at, bt, ct2) = (ring.scale(a, t), ring.scale(b, t), ring.scale(c, t2));
    let mut g = GroupElement::identity(ring);
    match i {
        1 => {
            g.0[1] = at;
            g.0[2] = ct2;
            g.0[5] = bt;
        }
        2 => {
            g.0[3] = ct2;
            g.0[5] = at;
            g.0[6] = bt;
        }
        3 => {
            g.0[1] = at;
            g.0[6] = bt;
            g.0[7] = ct2;
        }
        _ => panic!("K index is 1, 2 or 3"),
    }
    g
}

/// All elements of a subgroup. `K_i` is listed by `(a, b, c)` with `a`
/// fastest; `H_i` by `alpha`.
pub fn subgroup_elements(ring: &Ring, kind: SubgroupKind) -> Vec<GroupElement> {
    let q = ring.q();
    match kind.family {
        Family::H => (0..q).map(|a| h(ring, kind.index, a)).collect(),
        Family::K => {
            let mut out = Vec::with_capacity((q * q * q) as usize);
            for c in 0..q {
                for b in 0..q {
                    for a in 0..q {
                        out.push(k(ring, kind.index, a, b, c));
                    }
                }
            }
            out
        }
    }
}

/// Smallest element of the left coset `g S` in serialization order.
pub fn canonical_coset_rep(ring: &Ring, g: &GroupElement, kind: SubgroupKind) -> GroupElement {
    subgroup_elements(ring, kind)
        .iter()
        .map(|s| g.mul(s, ring))
        .min_by_key(|x| x.key(ring.size()))
        .expect("subgroups are nonempty")
}

pub const DEFAULT_GROUP_BUDGET: usize = 500_000;

/// Order of `SL_3` over a field with `q^n` elements.
pub fn sl3_order(q: u32, n: usize) -> u128 {
    let m = (q as u128).pow(n as u32);
    let m3 = m * m * m;
    (m3 - 1) * (m3 - m) * (m3 - m * m) / (m - 1)
}

/// Closure of `{h_i(alpha) : alpha != 0}` under right multiplication, sorted
/// by canonical serialization.
///
/// When `phi` is primitive and `3` does not divide `q^n - 1` the size is
/// checked against `|SL_3(F_{q^n})|`.
pub fn generate_group(ring: &Ring, budget: usize) -> Result<Vec<GroupElement>> {
    let size = ring.size();
    if (size as f64).powi(9) >= 2f64.powi(127) {
        return Err(HdxError::Parameter(format!(
            "ring of order {size} is too large for 128-bit element keys"
        )));
    }
    let gens: Vec<GroupElement> = (1..=3)
        .flat_map(|i| (1..ring.q()).map(move |a| (i, a)))
        .map(|(i, a)| h(ring, i, a))
        .collect();
    let id = GroupElement::identity(ring);
    let mut seen: HashSet<u128> = HashSet::new();
    seen.insert(id.key(size));
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in &gens {
            let x = g.mul(s, ring);
            if seen.insert(x.key(size)) {
                if seen.len() > budget {
                    return Err(HdxError::budget(
                        "group closure",
                        seen.len() as u128,
                        budget as u128,
                    ));
                }
                queue.push_back(x);
            }
        }
    }
    let mut keys: Vec<u128> = seen.into_iter().collect();
    keys.sort_unstable();
    let q = ring.q();
    let n = ring.n();
    if is_primitive(q, ring.phi())? && !((q as u64).pow(n as u32) - 1).is_multiple_of(3) {
        let expected = sl3_order(q, n);
        if keys.len() as u128 != expected {
            return Err(HdxError::Inconsistent(format!(
                "closure has {} elements, expected |SL_3| = {expected}",
                keys.len()
            )));
        }
    }
    Ok(keys
        .into_iter()
        .map(|k| GroupElement::from_key(k, size))
        .collect())
}

use serde::{Deserialize, Serialize};

use super::field::PrimeField;
use crate::{HdxError, Result};

/// An element of `F_q[t]/<phi>` as its coefficient vector; `coeffs[l]` is the
/// coefficient of `t^l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingElement {
    pub coeffs: Vec<u32>,
}

impl RingElement {
    pub fn zero(n: usize) -> Self {
        RingElement { coeffs: vec![0; n] }
    }

    pub fn scalar(c: u32, n: usize) -> Self {
        let mut coeffs = vec![0; n];
        coeffs[0] = c;
        RingElement { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// Multiplies two residues modulo the monic polynomial `phi` (coefficients
/// low to high, length `n + 1`) over `F_q`.
pub fn ring_mul(a: &RingElement, b: &RingElement, phi: &[u32], q: u32) -> Result<RingElement> {
    let field = PrimeField::new(q)?;
    let n = phi
        .len()
        .checked_sub(1)
        .filter(|&n| n >= 1)
        .ok_or_else(|| HdxError::Parameter("modulus must have degree at least 1".into()))?;
    if a.coeffs.len() != n || b.coeffs.len() != n {
        return Err(HdxError::shape(
            format!("two residues of length {n}"),
            format!("lengths {} and {}", a.coeffs.len(), b.coeffs.len()),
        ));
    }
    if phi[n] % q != 1 {
        return Err(HdxError::Parameter("modulus must be monic".into()));
    }
    Ok(RingElement {
        coeffs: poly_mul_mod(&field, &a.coeffs, &b.coeffs, phi),
    })
}

/// Schoolbook product followed by reduction modulo a monic `phi`.
fn poly_mul_mod(field: &PrimeField, a: &[u32], b: &[u32], phi: &[u32]) -> Vec<u32> {
    let n = phi.len() - 1;
    let mut prod = vec![0u32; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = field.add(prod[i + j], field.mul(x, y));
        }
    }
    let prod = reduce_mod(field, prod, phi);
    let mut out = vec![0; n];
    for (i, c) in out.iter_mut().enumerate() {
        *c = prod.get(i).copied().unwrap_or(0);
    }
    out
}

fn reduce_mod(field: &PrimeField, poly: Vec<u32>, phi: &[u32]) -> Vec<u32> {
    let mut poly = poly;
    let n = phi.len() - 1;
    for top in (n..poly.len()).rev() {
        let c = poly[top];
        if c == 0 {
            continue;
        }
        // t^top = -sum_{k<n} phi_k t^(top-n+k)
        for k in 0..=n {
            let idx = top - n + k;
            poly[idx] = field.sub(poly[idx], field.mul(c, phi[k]));
        }
    }
    poly
}

/// The ring `R_n = F_q[t]/<phi>`.
///
/// Elements are handled as integer codes: the coefficient of `t^0` is the
/// most significant base-`q` digit, so comparing codes numerically matches
/// comparing coefficient strings lexicographically with `t^0` first.
#[derive(Clone, Debug)]
pub struct Ring {
    field: PrimeField,
    phi: Vec<u32>,
    size: u32,
    add_table: Option<Vec<u32>>,
    mul_table: Option<Vec<u32>>,
}

const TABLE_LIMIT: u32 = 256;

impl Ring {
    pub fn new(q: u32, phi: &[u32]) -> Result<Self> {
        let field = PrimeField::new(q)?;
        if phi.len() < 2 {
            return Err(HdxError::Parameter("modulus must have degree at least 1".into()));
        }
        let n = phi.len() - 1;
        if phi.iter().any(|&c| c >= q) || phi[n] != 1 {
            return Err(HdxError::Parameter(format!(
                "modulus {phi:?} must be monic with coefficients below {q}"
            )));
        }
        let size = (q as u64)
            .checked_pow(n as u32)
            .filter(|&s| s <= u32::MAX as u64 / 2)
            .ok_or_else(|| HdxError::Parameter(format!("ring of order {q}^{n} is too large")))?
            as u32;
        let mut ring = Ring {
            field,
            phi: phi.to_vec(),
            size,
            add_table: None,
            mul_table: None,
        };
        if size <= TABLE_LIMIT {
            let s = size as usize;
            let mut add = vec![0; s * s];
            let mut mul = vec![0; s * s];
            for a in 0..size {
                for b in 0..size {
                    add[a as usize * s + b as usize] = ring.add_slow(a, b);
                    mul[a as usize * s + b as usize] = ring.mul_slow(a, b);
                }
            }
            ring.add_table = Some(add);
            ring.mul_table = Some(mul);
        }
        Ok(ring)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn q(&self) -> u32 {
        self.field.p()
    }

    pub fn n(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi(&self) -> &[u32] {
        &self.phi
    }

    /// Number of ring elements, `q^n`.
    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn code(&self, e: &RingElement) -> u32 {
        e.coeffs
            .iter()
            .fold(0u32, |acc, &c| acc * self.q() + c % self.q())
    }

    pub fn element(&self, code: u32) -> RingElement {
        let n = self.n();
        let q = self.q();
        let mut coeffs = vec![0; n];
        let mut c = code;
        for slot in coeffs.iter_mut().rev() {
            *slot = c % q;
            c /= q;
        }
        RingElement { coeffs }
    }

    /// Code of the constant `c`.
    pub fn scalar(&self, c: u32) -> u32 {
        (c % self.q()) * self.size / self.q()
    }

    pub fn one(&self) -> u32 {
        self.scalar(1)
    }

    /// Code of the residue of `t`.
    pub fn t(&self) -> u32 {
        let n = self.n();
        let mut poly = vec![0; n.max(2)];
        poly[1] = 1;
        let reduced = reduce_mod(&self.field, poly, &self.phi);
        self.code(&RingElement {
            coeffs: reduced[..n].to_vec(),
        })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.add_table {
            Some(t) => t[(a * self.size + b) as usize],
            None => self.add_slow(a, b),
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.mul_table {
            Some(t) => t[(a * self.size + b) as usize],
            None => self.mul_slow(a, b),
        }
    }

    pub fn neg(&self, a: u32) -> u32 {
        let e = self.element(a);
        self.code(&RingElement {
            coeffs: e.coeffs.iter().map(|&c| self.field.neg(c)).collect(),
        })
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    /// Multiplies by the scalar `c` of the base field.
    pub fn scale(&self, c: u32, a: u32) -> u32 {
        self.mul(self.scalar(c), a)
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = self.one();
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        let (x, y) = (self.element(a), self.element(b));
        self.code(&RingElement {
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(&u, &v)| self.field.add(u, v))
                .collect(),
        })
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let (x, y) = (self.element(a), self.element(b));
        self.code(&RingElement {
            coeffs: poly_mul_mod(&self.field, &x.coeffs, &y.coeffs, &self.phi),
        })
    }
}

/// A primitive modulus and whether `3` is coprime to `q^n - 1`, which the
/// large-`n` generation results assume.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveModulus {
    /// Coefficients low to high, monic, length `n + 1`.
    pub phi: Vec<u32>,
    /// Whether `3` does not divide `q^n - 1`.
    pub coprime_to_three: bool,
}

/// Smallest monic degree-`n` polynomial over `F_q` in which `t` generates the
/// multiplicative group. Candidates are ordered by their coefficient vector
/// read from `t^(n-1)` down to the constant term.
pub fn primitive_modulus(q: u32, n: usize) -> Result<PrimitiveModulus> {
    if n == 0 {
        return Err(HdxError::Parameter("degree must be at least 1".into()));
    }
    let field = PrimeField::new(q)?;
    let order = (q as u64)
        .checked_pow(n as u32)
        .filter(|&s| s < 1 << 40)
        .ok_or_else(|| HdxError::Parameter(format!("q^n = {q}^{n} is too large")))?
        - 1;
    let prime_factors = distinct_prime_factors(order);
    for v in 0..(order + 1) {
        let mut phi = vec![0u32; n + 1];
        phi[n] = 1;
        let mut rest = v;
        for slot in phi.iter_mut().take(n) {
            *slot = (rest % q as u64) as u32;
            rest /= q as u64;
        }
        if phi[0] == 0 {
            continue;
        }
        if t_is_primitive(&field, &phi, order, &prime_factors) {
            return Ok(PrimitiveModulus {
                phi,
                coprime_to_three: order % 3 != 0,
            });
        }
    }
    Err(HdxError::Inconsistent(format!(
        "no primitive polynomial of degree {n} over F_{q} found"
    )))
}

/// Whether `t` generates the unit group of `F_q[t]/<phi>`.
pub fn is_primitive(q: u32, phi: &[u32]) -> Result<bool> {
    let field = PrimeField::new(q)?;
    let ring = Ring::new(q, phi)?;
    let order = ring.size() as u64 - 1;
    Ok(phi[0] != 0 && t_is_primitive(&field, phi, order, &distinct_prime_factors(order)))
}

fn t_is_primitive(field: &PrimeField, phi: &[u32], order: u64, factors: &[u64]) -> bool {
    let n = phi.len() - 1;
    let mut t = vec![0u32; n.max(2)];
    t[1] = 1;
    let t = reduce_mod(field, t, phi)[..n].to_vec();
    let one = {
        let mut v = vec![0; n];
        v[0] = 1;
        v
    };
    let pow = |e: u64| {
        let mut acc = one.clone();
        let mut b = t.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mul_mod(field, &acc, &b, phi);
            }
            b = poly_mul_mod(field, &b, &b, phi);
            e >>= 1;
        }
        acc
    };
    pow(order) == one && factors.iter().all(|&r| pow(order / r) != one)
}

fn distinct_prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Order of `t` by repeated multiplication.
    fn brute_order(q: u32, phi: &[u32]) -> u64 {
        let ring = Ring::new(q, phi).unwrap();
        let t = ring.t();
        let mut x = t;
        let mut k = 1;
        while x != ring.one() {
            x = ring.mul(x, t);
            k += 1;
            assert!(k <= ring.size() as u64, "t is not a unit");
        }
        k
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive_modulus(3, 1).unwrap().phi, vec![1, 1]);
        assert_eq!(primitive_modulus(2, 3).unwrap().phi, vec![1, 1, 0, 1]);
        assert_eq!(primitive_modulus(5, 1).unwrap().phi, vec![2, 1]);
        assert!(primitive_modulus(3, 1).unwrap().coprime_to_three);
        assert!(!primitive_modulus(7, 1).unwrap().coprime_to_three);
    }

    #[test]
    fn primitive_modulus_is_minimal_and_correct() {
        for (q, n) in [(2u32, 2usize), (2, 4), (3, 2), (3, 3), (5, 2), (7, 1), (3, 5)] {
            let found = primitive_modulus(q, n).unwrap().phi;
            let order = (q as u64).pow(n as u32) - 1;
            assert_eq!(brute_order(q, &found), order, "q={q} n={n}");
            // every earlier candidate with a nonzero constant term fails
            let key = |phi: &[u32]| phi[..n].iter().rev().fold(0u64, |a, &c| a * q as u64 + c as u64);
            for v in 0..key(&found) {
                let mut phi = vec![0u32; n + 1];
                phi[n] = 1;
                let mut r = v;
                for slot in phi.iter_mut().take(n) {
                    *slot = (r % q as u64) as u32;
                    r /= q as u64;
                }
                if phi[0] == 0 {
                    continue;
                }
                let ring = Ring::new(q, &phi).unwrap();
                let t = ring.t();
                let full =
                    ring.pow(t, order) == ring.one() && (1..order).all(|k| ring.pow(t, k) != ring.one());
                assert!(!full, "earlier candidate {phi:?} is also primitive");
            }
        }
    }

    #[test]
    fn ring_mul_examples() {
        // t * t in F_3[t]/<t + 1>: t = 2, t^2 = 4 = 1
        let t = RingElement { coeffs: vec![2] };
        assert_eq!(ring_mul(&t, &t, &[1, 1], 3).unwrap().coeffs, vec![1]);
        // t^2 * t^2 in F_2[t]/<t^3 + t + 1> is t^2 + t
        let t2 = RingElement {
            coeffs: vec![0, 0, 1],
        };
        assert_eq!(
            ring_mul(&t2, &t2, &[1, 1, 0, 1], 2).unwrap().coeffs,
            vec![0, 1, 1]
        );
        let a = RingElement {
            coeffs: vec![1, 0, 1],
        };
        let one = RingElement::scalar(1, 3);
        assert_eq!(ring_mul(&a, &one, &[1, 1, 0, 1], 2).unwrap(), a);
        assert!(ring_mul(&a, &t, &[1, 1, 0, 1], 2).is_err());
    }

    #[test]
    fn codes_order_like_serialization() {
        let ring = Ring::new(3, &[2, 0, 1]).unwrap();
        let mut elems: Vec<RingElement> = (0..ring.size()).map(|c| ring.element(c)).collect();
        let codes: Vec<u32> = elems.iter().map(|e| ring.code(e)).collect();
        assert_eq!(codes, (0..ring.size()).collect::<Vec<_>>());
        elems.sort();
        assert_eq!(elems.iter().map(|e| ring.code(e)).collect::<Vec<_>>(), codes);
        assert_eq!(ring.element(ring.scalar(2)).coeffs, vec![2, 0]);
        assert_eq!(ring.element(ring.t()).coeffs, vec![0, 1]);
    }

    #[test]
    fn fermat_power_identity_for_primitive_moduli() {
        for (q, n) in [(2u32, 3usize), (3, 2), (3, 3), (5, 2), (3, 5), (2, 5)] {
            let phi = primitive_modulus(q, n).unwrap().phi;
            let ring = Ring::new(q, &phi).unwrap();
            let order = ring.size() as u64 - 1;
            assert_eq!(ring.pow(ring.t(), order), ring.one());
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::{HdxError, Result};

/// Largest supported modulus. Keeps `(p - 1)^2` inside `u32`, which the lazy
/// reduction in the eliminator depends on.
pub const MAX_MODULUS: u32 = 65_521;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Multiplicative inverse of `a` modulo the prime `p`.
pub fn inv(a: u32, p: u32) -> Result<u32> {
    let a = a % p;
    if a == 0 {
        return Err(HdxError::DivisionByZero(p));
    }
    // Fermat: a^(p-2).
    Ok(pow_mod(a, p as u64 - 2, p))
}

pub(crate) fn pow_mod(base: u32, mut exp: u64, p: u32) -> u32 {
    let p64 = p as u64;
    let mut acc = 1 % p64;
    let mut b = base as u64 % p64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p64;
        }
        b = b * b % p64;
        exp >>= 1;
    }
    acc as u32
}

/// The prime field `F_p`. Elements are `u32` values in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(HdxError::Parameter(format!("{p} is not prime")));
        }
        if p > MAX_MODULUS {
            return Err(HdxError::Parameter(format!(
                "modulus {p} exceeds the supported maximum {MAX_MODULUS}"
            )));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// `a^e` with the convention `0^0 = 1`.
    pub fn pow(&self, a: u32, e: u64) -> u32 {
        pow_mod(a, e, self.p)
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        inv(a, self.p)
    }

    /// Dot product of two equal-length slices.
    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        let p = self.p as u64;
        let mut acc = 0u64;
        for (x, y) in a.iter().zip(b) {
            acc += *x as u64 * *y as u64;
            if acc >= 1 << 62 {
                acc %= p;
            }
        }
        (acc % p) as u32
    }

    /// Evaluates `sum_k coeffs[k] x^k` by Horner's rule.
    pub fn eval_poly(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// Binomial coefficient `C(n, k) mod p` via Lucas' theorem.
    pub fn binomial(&self, mut n: u64, mut k: u64) -> u32 {
        let p = self.p as u64;
        let mut acc = 1u32;
        while n > 0 || k > 0 {
            let (ni, ki) = (n % p, k % p);
            if ki > ni {
                return 0;
            }
            acc = self.mul(acc, self.small_binomial(ni, ki));
            n /= p;
            k /= p;
        }
        acc
    }

    fn small_binomial(&self, n: u64, k: u64) -> u32 {
        let mut num = 1u32;
        let mut den = 1u32;
        for i in 0..k {
            num = self.mul(num, ((n - i) % self.p as u64) as u32);
            den = self.mul(den, ((i + 1) % self.p as u64) as u32);
        }
        // den is a product of values below p, hence a unit.
        self.mul(num, self.inv(den).expect("nonzero denominator"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_examples() {
        assert_eq!(inv(3, 7).unwrap(), 5);
        assert_eq!(inv(1, 13).unwrap(), 1);
        assert_eq!(inv(2, 5).unwrap(), 3);
        assert!(matches!(inv(0, 7), Err(HdxError::DivisionByZero(7))));
    }

    #[test]
    fn inverse_is_inverse_for_all_units() {
        for p in [2u32, 3, 5, 7, 11, 13, 17, 65_521] {
            let f = PrimeField::new(p).unwrap();
            for a in (1..p).step_by(((p / 50) as usize).max(1)) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn rejects_composites() {
        assert!(PrimeField::new(9).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(65_537).is_err());
    }

    #[test]
    fn binomials_match_pascal() {
        let f = PrimeField::new(7).unwrap();
        let mut row = vec![1u64];
        for n in 0..20u64 {
            for (k, &c) in row.iter().enumerate() {
                assert_eq!(f.binomial(n, k as u64), (c % 7) as u32, "C({n},{k})");
            }
            let mut next = vec![1u64; row.len() + 1];
            for k in 1..row.len() {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
        }
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.pow(0, 0), 1);
        assert_eq!(f.pow(0, 3), 0);
    }
}

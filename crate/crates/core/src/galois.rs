//! Arithmetic in GF(2^m), 1 <= m <= 8.
//!
//! Elements are stored as `u8` bit-vectors of polynomial coefficients over
//! GF(2). Addition is XOR; multiplication goes through log/antilog tables
//! built from a primitive polynomial. A full `q x q` product table is also
//! kept, since the decoder and encoder both multiply whole rows by a
//! constant.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element. Always interpreted relative to some [`Field`].
pub type Symbol = u8;

/// Default primitive polynomials, indexed by degree. Bit `i` is the
/// coefficient of `x^i`. These are part of the stable interface: changing
/// one silently relabels every stored matrix.
///
/// | m | polynomial            |
/// |---|-----------------------|
/// | 1 | x + 1                 |
/// | 2 | x^2 + x + 1           |
/// | 3 | x^3 + x + 1           |
/// | 4 | x^4 + x + 1           |
/// | 5 | x^5 + x^2 + 1         |
/// | 6 | x^6 + x + 1           |
/// | 7 | x^7 + x^3 + 1         |
/// | 8 | x^8 + x^4 + x^3 + x^2 + 1 |
pub const DEFAULT_PRIMITIVE_POLYS: [u32; 9] = [0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D];

struct Tables {
    m: u32,
    q: usize,
    poly: u32,
    // log[0] is unused.
    log: Vec<u8>,
    // exp has length 2(q-1) so that exp[log a + log b] needs no reduction.
    exp: Vec<u8>,
    mul: Vec<u8>,
    inv: Vec<u8>,
}

/// The finite field GF(2^m). Cheap to clone; the tables are shared.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl Field {
    /// Builds GF(2^m). With `poly = None` the documented default polynomial
    /// for `m` is used; an explicit polynomial must be primitive of degree m.
    pub fn new(m: u32, poly: Option<u32>) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(Error::InvalidField(format!("degree m={m} outside 1..=8")));
        }
        let poly = poly.unwrap_or(DEFAULT_PRIMITIVE_POLYS[m as usize]);
        if poly >> m != 1 {
            return Err(Error::InvalidField(format!("polynomial {poly:#x} does not have degree {m}")));
        }
        let q = 1usize << m;
        let order = q - 1;

        let mut log = vec![0u8; q];
        let mut exp = vec![0u8; 2 * order];
        let mut seen = vec![false; q];
        let mut x: u32 = 1;
        for k in 0..order {
            if seen[x as usize] {
                return Err(Error::InvalidField(format!(
                    "polynomial {poly:#x} is not primitive: x has order {k} < {order}"
                )));
            }
            seen[x as usize] = true;
            exp[k] = x as u8;
            log[x as usize] = k as u8;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::InvalidField(format!("polynomial {poly:#x} is not primitive: x^{order} != 1")));
        }
        for k in order..2 * order {
            exp[k] = exp[k - order];
        }

        let mut mul = vec![0u8; q * q];
        for a in 1..q {
            for b in 1..q {
                mul[a * q + b] = exp[log[a] as usize + log[b] as usize];
            }
        }
        let mut inv = vec![0u8; q];
        for a in 1..q {
            inv[a] = exp[(order - log[a] as usize) % order];
        }

        Ok(Field { t: Arc::new(Tables { m, q, poly, log, exp, mul, inv }) })
    }

    /// Bits per symbol.
    pub fn m(&self) -> u32 {
        self.t.m
    }

    /// Field order `2^m`.
    pub fn q(&self) -> usize {
        self.t.q
    }

    pub fn poly(&self) -> u32 {
        self.t.poly
    }

    /// Validates a raw value as a field element.
    pub fn element(&self, v: u32) -> Result<Symbol> {
        if (v as usize) < self.t.q {
            Ok(v as Symbol)
        } else {
            Err(Error::SymbolOutOfRange { value: v, q: self.t.q })
        }
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    /// Product via log/antilog; zero absorbs.
    #[inline]
    pub fn mul_log(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            0
        } else {
            self.t.exp[self.t.log[a as usize] as usize + self.t.log[b as usize] as usize]
        }
    }

    /// Product via the precomputed table. Same result as [`Field::mul_log`].
    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        self.t.mul[a as usize * self.t.q + b as usize]
    }

    /// The row `x -> h * x` of the product table.
    #[inline]
    pub fn mul_row(&self, h: Symbol) -> &[u8] {
        let q = self.t.q;
        &self.t.mul[h as usize * q..(h as usize + 1) * q]
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a == 0 {
            Err(Error::ZeroInverse)
        } else {
            Ok(self.t.inv[a as usize])
        }
    }

    /// Inverse of a nonzero element. Panics on zero.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: Symbol) -> Symbol {
        assert!(a != 0, "inverse of zero");
        self.t.inv[a as usize]
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Discrete logarithm base x. `None` for zero.
    pub fn log(&self, a: Symbol) -> Option<u32> {
        (a != 0).then(|| self.t.log[a as usize] as u32)
    }

    /// `x^k`.
    pub fn exp(&self, k: u32) -> Symbol {
        let order = self.t.q - 1;
        self.t.exp[k as usize % order]
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}) poly={:#x}", self.t.q, self.t.poly)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.t.m == other.t.m && self.t.poly == other.t.poly
    }
}

impl Eq for Field {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf2_is_boolean_and() {
        let f = Field::new(1, None).unwrap();
        assert_eq!(f.q(), 2);
        for a in 0..2u8 {
            for b in 0..2u8 {
                assert_eq!(f.mul(a, b), a & b);
            }
        }
        assert_eq!(f.inv(1).unwrap(), 1);
    }

    #[test]
    fn gf4_products() {
        let f = Field::new(2, Some(0b111)).unwrap();
        // x * x = x + 1
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.mul(2, 3), 1);
        assert_eq!(f.mul(3, 3), 2);
        assert_eq!(f.inv(2).unwrap(), 3);
        assert_eq!(f.inv(1).unwrap(), 1);
    }

    #[test]
    fn gf16_group_order_and_inverses() {
        let f = Field::new(4, None).unwrap();
        assert_eq!(f.q(), 16);
        let nonzero: Vec<u8> = (1..16).collect();
        let powers: std::collections::HashSet<u8> = (0..15).map(|k| f.exp(k)).collect();
        assert_eq!(powers.len(), 15);
        for a in nonzero {
            assert_eq!(f.mul(f.inv(a).unwrap(), a), 1);
        }
    }

    #[test]
    fn default_polys_are_primitive() {
        for m in 1..=8 {
            let f = Field::new(m, None).unwrap();
            assert_eq!(f.poly(), DEFAULT_PRIMITIVE_POLYS[m as usize]);
        }
    }

    #[test]
    fn rejects_bad_polynomials() {
        // x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5.
        assert!(matches!(Field::new(4, Some(0x1F)), Err(Error::InvalidField(_))));
        // reducible: x^2 + 1 = (x + 1)^2
        assert!(Field::new(2, Some(0b101)).is_err());
        // wrong degree
        assert!(Field::new(3, Some(0x13)).is_err());
        assert!(Field::new(0, None).is_err());
        assert!(Field::new(9, None).is_err());
    }

    #[test]
    fn zero_inverse_is_an_error() {
        let f = Field::new(3, None).unwrap();
        assert!(matches!(f.inv(0), Err(Error::ZeroInverse)));
    }

    #[test]
    fn table_and_log_products_agree() {
        for m in 1..=8 {
            let f = Field::new(m, None).unwrap();
            for a in 0..f.q() {
                for b in 0..f.q() {
                    assert_eq!(f.mul(a as u8, b as u8), f.mul_log(a as u8, b as u8));
                }
            }
        }
    }

    #[test]
    fn ring_axioms_exhaustive_small_fields() {
        for m in 1..=4 {
            let f = Field::new(m, None).unwrap();
            let q = f.q() as u8;
            for a in 0..q {
                assert_eq!(f.add(a, a), 0);
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn ring_axioms_randomized_large_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for m in [6, 8] {
            let f = Field::new(m, None).unwrap();
            let q = f.q() as u32;
            for _ in 0..10_000 {
                let a = rng.random_range(0..q) as u8;
                let b = rng.random_range(0..q) as u8;
                let c = rng.random_range(0..q) as u8;
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            }
        }
    }

    #[test]
    fn scaling_is_a_permutation_fixing_zero() {
        for m in 1..=8 {
            let f = Field::new(m, None).unwrap();
            for h in 1..f.q() {
                let row = f.mul_row(h as u8);
                assert_eq!(row[0], 0);
                let mut seen = vec![false; f.q()];
                for &y in row {
                    assert!(!seen[y as usize]);
                    seen[y as usize] = true;
                }
            }
        }
    }
}

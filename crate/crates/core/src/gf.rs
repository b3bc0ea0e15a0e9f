//! Arithmetic over GF(q) for prime q (up to 2^16) and GF(2^m), m in {2, 4, 8}.
//!
//! Elements are plain integers in `[0, q)`. For prime fields an element is the
//! residue itself; for binary extension fields it is the bit pattern of the
//! polynomial-basis representation, so addition is XOR.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element. Always `< q` for the field it belongs to.
pub type Elem = u32;

/// Default irreducible moduli, including the leading `x^m` bit.
pub const GF4_MODULUS: u32 = 0b111; // x^2 + x + 1
pub const GF16_MODULUS: u32 = 0b1_0011; // x^4 + x + 1
pub const GF256_MODULUS: u32 = 0x11D; // x^8 + x^4 + x^3 + x^2 + 1

const MAX_PRIME: u32 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Prime,
    BinaryExtension { degree: u32 },
}

struct Inner {
    q: u32,
    kind: FieldKind,
    modulus: u32,
    // exp has 2(q-1) entries so log sums need no reduction.
    exp: Vec<Elem>,
    log: Vec<u32>,
}

/// Immutable field context. Cloning is cheap.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.q == other.inner.q && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner.kind {
            FieldKind::Prime => write!(f, "GF({})", self.inner.q),
            FieldKind::BinaryExtension { .. } => {
                write!(f, "GF({}, modulus={:#x})", self.inner.q, self.inner.modulus)
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.inner.q)
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn degree(p: u32) -> u32 {
    31 - p.leading_zeros()
}

/// Remainder of binary polynomial division.
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

fn is_irreducible(modulus: u32, m: u32) -> bool {
    if modulus == 0 || degree(modulus) != m {
        return false;
    }
    // Any factorization has a factor of degree <= m/2.
    (2u32..(1 << (m / 2 + 1))).all(|d| poly_rem(modulus, d) != 0)
}

fn clmul_mod(mut a: u32, mut b: u32, modulus: u32, m: u32) -> u32 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << m) != 0 {
            a ^= modulus;
        }
    }
    acc
}

impl Field {
    /// Builds GF(q). `modulus` is only meaningful for q in {4, 16, 256};
    /// `None` selects the default modulus.
    pub fn new(q: u32, modulus: Option<u32>) -> Result<Self> {
        let degree = match q {
            4 => Some(2),
            16 => Some(4),
            256 => Some(8),
            _ => None,
        };
        match degree {
            Some(m) => {
                let modulus = modulus.unwrap_or(match m {
                    2 => GF4_MODULUS,
                    4 => GF16_MODULUS,
                    _ => GF256_MODULUS,
                });
                if !is_irreducible(modulus, m) {
                    return Err(Error::ReducibleModulus { modulus, degree: m });
                }
                Ok(Self::binary(q, m, modulus))
            }
            None => {
                if q > MAX_PRIME || !is_prime(q) {
                    return Err(Error::UnsupportedOrder(q as u64));
                }
                if modulus.is_some() {
                    return Err(Error::UnexpectedModulus(q));
                }
                Ok(Self {
                    inner: Arc::new(Inner {
                        q,
                        kind: FieldKind::Prime,
                        modulus: 0,
                        exp: Vec::new(),
                        log: Vec::new(),
                    }),
                })
            }
        }
    }

    /// Shorthand for `Field::new(q, None)`.
    pub fn with_order(q: u32) -> Result<Self> {
        Self::new(q, None)
    }

    fn binary(q: u32, m: u32, modulus: u32) -> Self {
        let order = q - 1;
        // The modulus need not be primitive, so search for a generator.
        let generator = (2..q)
            .find(|&g| {
                let mut x = g;
                let mut k = 1;
                while x != 1 {
                    x = clmul_mod(x, g, modulus, m);
                    k += 1;
                }
                k == order
            })
            .expect("the multiplicative group of a finite field is cyclic");
        let mut exp = vec![0; 2 * order as usize];
        let mut log = vec![0; q as usize];
        let mut x = 1;
        for i in 0..order {
            exp[i as usize] = x;
            exp[(i + order) as usize] = x;
            log[x as usize] = i;
            x = clmul_mod(x, generator, modulus, m);
        }
        Self {
            inner: Arc::new(Inner {
                q,
                kind: FieldKind::BinaryExtension { degree: m },
                modulus,
                exp,
                log,
            }),
        }
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.inner.q
    }

    pub fn kind(&self) -> FieldKind {
        self.inner.kind
    }

    /// The modulus bitmask for binary extension fields.
    pub fn modulus(&self) -> Option<u32> {
        match self.inner.kind {
            FieldKind::Prime => None,
            FieldKind::BinaryExtension { .. } => Some(self.inner.modulus),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.inner.kind, FieldKind::BinaryExtension { .. }) || self.inner.q == 2
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        x < self.inner.q
    }

    #[inline]
    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        match self.inner.kind {
            FieldKind::Prime => {
                let s = x + y;
                if s >= self.inner.q {
                    s - self.inner.q
                } else {
                    s
                }
            }
            FieldKind::BinaryExtension { .. } => x ^ y,
        }
    }

    #[inline]
    pub fn neg(&self, x: Elem) -> Elem {
        match self.inner.kind {
            FieldKind::Prime if x != 0 => self.inner.q - x,
            _ => x,
        }
    }

    #[inline]
    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        match self.inner.kind {
            FieldKind::Prime => ((x as u64 * y as u64) % self.inner.q as u64) as Elem,
            FieldKind::BinaryExtension { .. } => {
                if x == 0 || y == 0 {
                    0
                } else {
                    let inner = &*self.inner;
                    inner.exp[(inner.log[x as usize] + inner.log[y as usize]) as usize]
                }
            }
        }
    }

    pub fn inv(&self, x: Elem) -> Result<Elem> {
        if x == 0 {
            return Err(Error::DivideByZero);
        }
        match self.inner.kind {
            FieldKind::Prime => {
                // Extended Euclid on (x, q).
                let q = self.inner.q as i64;
                let (mut r0, mut r1) = (q, x as i64);
                let (mut t0, mut t1) = (0i64, 1i64);
                while r1 != 0 {
                    let quot = r0 / r1;
                    (r0, r1) = (r1, r0 - quot * r1);
                    (t0, t1) = (t1, t0 - quot * t1);
                }
                Ok(t0.rem_euclid(q) as Elem)
            }
            FieldKind::BinaryExtension { .. } => {
                let inner = &*self.inner;
                let order = inner.q - 1;
                Ok(inner.exp[((order - inner.log[x as usize]) % order) as usize])
            }
        }
    }

    pub fn div(&self, x: Elem, y: Elem) -> Result<Elem> {
        Ok(self.mul(x, self.inv(y)?))
    }

    /// `acc += c * x`, elementwise.
    pub fn axpy(&self, acc: &mut [Elem], c: Elem, x: &[Elem]) {
        debug_assert_eq!(acc.len(), x.len());
        if c == 0 {
            return;
        }
        for (a, &v) in acc.iter_mut().zip(x) {
            *a = self.add(*a, self.mul(c, v));
        }
    }

    pub fn scale(&self, c: Elem, x: &[Elem]) -> Vec<Elem> {
        x.iter().map(|&v| self.mul(c, v)).collect()
    }

    /// Elementwise `x - y`.
    pub fn sub_vec(&self, x: &[Elem], y: &[Elem]) -> Vec<Elem> {
        x.iter().zip(y).map(|(&a, &b)| self.sub(a, b)).collect()
    }

    /// The element playing the role of `-1`. Equal to 1 in characteristic 2.
    pub fn minus_one(&self) -> Elem {
        self.neg(1)
    }

    /// Reads an integer written in signed notation (`-1` means `q-1`).
    /// Negative values are only accepted in odd characteristic.
    pub fn elem_from_signed(&self, v: i64) -> Result<Elem> {
        let q = self.inner.q as i64;
        if v >= 0 && v < q {
            Ok(v as Elem)
        } else if v < 0 && v > -q && !self.is_binary() {
            Ok((q + v) as Elem)
        } else {
            Err(Error::ValueOutOfField {
                line: 0,
                value: v.unsigned_abs(),
                q: self.inner.q,
            })
        }
    }
}

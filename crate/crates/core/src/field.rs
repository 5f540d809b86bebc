//! Arithmetic in the prime field F_p for p < 2^16.
//!
//! A [`FieldContext`] fixes the modulus once, checks primality at
//! construction, and hands out [`FieldElement`] values that are always
//! reduced residues in `[0, p)`. Elements carry no back-reference to their
//! context; mixing elements across contexts is the caller's bug and is
//! guarded only by debug assertions in the matrix layer.

use std::sync::Arc;

use thiserror::Error;

/// Exclusive upper bound on the modulus; the largest usable prime is 65521.
pub const MAX_MODULUS: u32 = 1 << 16;

/// Moduli up to this bound get a precomputed inverse table.
const INV_TABLE_BOUND: u32 = 1 << 8;

/// Errors from field construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    /// The requested modulus is not a prime in `[2, 2^16)`.
    #[error("modulus {0} is not a prime in [2, 65536)")]
    NotPrime(u32),
    /// Division by zero: zero has no multiplicative inverse.
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// A residue in `[0, p)` for the `p` of the context that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    /// The additive identity of every context.
    pub const ZERO: FieldElement = FieldElement(0);
    /// The multiplicative identity of every context (p ≥ 2).
    pub const ONE: FieldElement = FieldElement(1);

    /// The canonical representative in `[0, p)`.
    pub fn value(self) -> u32 {
        self.0
    }

    /// Whether this is the additive identity.
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// An immutable prime-field descriptor: the modulus plus, for small moduli,
/// a shared inverse table. Cheap to clone and safe to send across threads.
#[derive(Debug, Clone)]
pub struct FieldContext {
    p: u32,
    inv_table: Option<Arc<[u32]>>,
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

impl Eq for FieldContext {}

impl Default for FieldContext {
    /// F_2, the default coefficient field.
    fn default() -> Self {
        FieldContext::new(2).expect("2 is prime")
    }
}

impl FieldContext {
    /// Builds the field F_p. Fails unless `p` is a prime in `[2, 2^16)`.
    pub fn new(p: u32) -> Result<FieldContext, FieldError> {
        if p >= MAX_MODULUS || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let inv_table = (p <= INV_TABLE_BOUND).then(|| {
            // inverse_euclid is total on [1, p) for prime p.
            let mut table = vec![0u32; p as usize];
            for a in 1..p {
                table[a as usize] = inverse_euclid(a, p);
            }
            Arc::from(table)
        });
        Ok(FieldContext { p, inv_table })
    }

    /// The modulus.
    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Reduces an arbitrary integer into the field.
    pub fn element(&self, raw: u64) -> FieldElement {
        FieldElement((raw % self.p as u64) as u32)
    }

    /// Embeds a signed integer, mapping negatives to their residues.
    pub fn element_signed(&self, raw: i64) -> FieldElement {
        FieldElement(raw.rem_euclid(self.p as i64) as u32)
    }
}

/// a + b in F_p.
pub fn ff_add(ctx: &FieldContext, a: FieldElement, b: FieldElement) -> FieldElement {
    let s = a.0 + b.0;
    FieldElement(if s >= ctx.p { s - ctx.p } else { s })
}

/// a − b in F_p.
pub fn ff_sub(ctx: &FieldContext, a: FieldElement, b: FieldElement) -> FieldElement {
    FieldElement(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + ctx.p - b.0 })
}

/// −a in F_p.
pub fn ff_neg(ctx: &FieldContext, a: FieldElement) -> FieldElement {
    FieldElement(if a.0 == 0 { 0 } else { ctx.p - a.0 })
}

/// a · b in F_p. Operands are below 2^16, so the raw product fits in u32.
pub fn ff_mul(ctx: &FieldContext, a: FieldElement, b: FieldElement) -> FieldElement {
    FieldElement(a.0 * b.0 % ctx.p)
}

/// a^(−1) in F_p; table lookup for p ≤ 2^8, extended Euclid above.
pub fn ff_inv(ctx: &FieldContext, a: FieldElement) -> Result<FieldElement, FieldError> {
    if a.0 == 0 {
        return Err(FieldError::ZeroInverse);
    }
    let v = match &ctx.inv_table {
        Some(table) => table[a.0 as usize],
        None => inverse_euclid(a.0, ctx.p),
    };
    Ok(FieldElement(v))
}

/// Deterministic primality by trial division; sufficient below 2^16.
fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Inverse of `a` modulo prime `p` via the extended Euclidean algorithm.
fn inverse_euclid(a: u32, p: u32) -> u32 {
    let (mut r0, mut r1) = (p as i64, a as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "gcd(a, p) = 1 for prime p and 0 < a < p");
    t0.rem_euclid(p as i64) as u32
}

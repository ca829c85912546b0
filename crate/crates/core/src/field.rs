//! Arithmetic in the multiplicative group of a safe-prime field and in the
//! exponent ring `Z/(p-1)`.
//!
//! Every published protocol value lives in [`GroupElement`]; every secret code,
//! indicator and share lives in [`ExponentValue`]. Both are plain `u64`
//! newtypes and carry no reference to their [`FieldParams`]; callers keep the
//! context. Arithmetic is not constant time and is meant for simulation.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// A validated safe prime `p = 2q + 1` together with a generator `g` of the
/// full multiplicative group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldParams {
    p: u64,
    g: u64,
    q: u64,
}

/// A non-zero residue mod `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement(u64);

/// A residue mod `p - 1`, stored as its canonical representative in `[0, p-2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExponentValue(u64);

impl GroupElement {
    pub const ONE: GroupElement = GroupElement(1);

    pub fn value(self) -> u64 {
        self.0
    }
}

impl ExponentValue {
    pub const ZERO: ExponentValue = ExponentValue(0);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for ExponentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

const TRIAL_DIVISION_LIMIT: u64 = 1 << 32;

/// Primality test: trial division below 2^32, deterministic Miller-Rabin above.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    if n < TRIAL_DIVISION_LIMIT {
        let mut d = 5u64;
        while d * d <= n {
            if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
                return false;
            }
            d += 6;
        }
        return true;
    }
    miller_rabin(n)
}

// These bases are a deterministic witness set for every n < 3.3e24.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn miller_rabin(n: u64) -> bool {
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_BASES {
        if a % n == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn is_safe_prime(p: u64) -> bool {
    p >= 5 && p % 2 == 1 && is_prime(p) && is_prime((p - 1) / 2)
}

impl FieldParams {
    /// Validates `p` as a safe prime and `g` as a generator of `Z_p^*`.
    pub fn new(p: u64, g: u64) -> Result<Self> {
        if p < 7 {
            return Err(Error::ModulusTooSmall(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let q = (p - 1) / 2;
        if !is_prime(q) {
            return Err(Error::NotSafePrime(p));
        }
        let field = FieldParams { p, g, q };
        if !field.is_generator(g) {
            return Err(Error::NotGenerator { p, g });
        }
        Ok(field)
    }

    /// For a safe prime the group order is `2q`, so `x` generates iff neither
    /// `x^2` nor `x^q` is the identity.
    pub fn is_generator(&self, x: u64) -> bool {
        (2..=self.p - 2).contains(&x)
            && pow_mod(x, 2, self.p) != 1
            && pow_mod(x, self.q, self.p) != 1
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The modulus of the exponent ring, `p - 1`.
    pub fn order(&self) -> u64 {
        self.p - 1
    }

    pub fn generator(&self) -> GroupElement {
        GroupElement(self.g)
    }

    pub fn element(&self, value: u64) -> Result<GroupElement> {
        if value == 0 || value >= self.p {
            return Err(Error::NotInGroup { p: self.p, value });
        }
        Ok(GroupElement(value))
    }

    /// Canonical exponent for any signed integer; `z` and `z + (p-1)` map to
    /// the same value.
    pub fn exponent(&self, z: i128) -> ExponentValue {
        ExponentValue(z.rem_euclid(self.order() as i128) as u64)
    }

    pub fn exponent_u64(&self, z: u64) -> ExponentValue {
        ExponentValue(z % self.order())
    }

    /// The exponent as a signed integer in `(-(p-1)/2, (p-1)/2]`.
    pub fn signed(&self, x: ExponentValue) -> i128 {
        let m = self.order() as i128;
        let v = x.0 as i128;
        if v > m / 2 {
            v - m
        } else {
            v
        }
    }

    pub fn mul(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        GroupElement(mul_mod(a.0, b.0, self.p))
    }

    pub fn pow(&self, base: GroupElement, exp: ExponentValue) -> GroupElement {
        GroupElement(pow_mod(base.0, exp.0, self.p))
    }

    pub fn pow_g(&self, exp: ExponentValue) -> GroupElement {
        self.pow(self.generator(), exp)
    }

    pub fn inv(&self, x: GroupElement) -> GroupElement {
        // x is non-zero and p is prime, so the inverse always exists.
        GroupElement(inv_mod(x.0, self.p).expect("group element is invertible"))
    }

    /// Inverse of an arbitrary integer, failing on zero.
    pub fn invert(&self, x: u64) -> Result<GroupElement> {
        let x = x % self.p;
        if x == 0 {
            return Err(Error::ZeroElement);
        }
        Ok(self.inv(GroupElement(x)))
    }

    pub fn div(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        self.mul(a, self.inv(b))
    }

    pub fn product<I: IntoIterator<Item = GroupElement>>(&self, items: I) -> GroupElement {
        items
            .into_iter()
            .fold(GroupElement::ONE, |acc, x| self.mul(acc, x))
    }

    pub fn exp_add(&self, a: ExponentValue, b: ExponentValue) -> ExponentValue {
        ExponentValue(((a.0 as u128 + b.0 as u128) % self.order() as u128) as u64)
    }

    pub fn exp_sub(&self, a: ExponentValue, b: ExponentValue) -> ExponentValue {
        self.exp_add(a, self.exp_neg(b))
    }

    pub fn exp_neg(&self, a: ExponentValue) -> ExponentValue {
        if a.0 == 0 {
            a
        } else {
            ExponentValue(self.order() - a.0)
        }
    }

    pub fn exp_mul(&self, a: ExponentValue, b: ExponentValue) -> ExponentValue {
        ExponentValue(mul_mod(a.0, b.0, self.order()))
    }

    pub fn exp_scale(&self, a: ExponentValue, by: i128) -> ExponentValue {
        self.exp_mul(a, self.exponent(by))
    }

    pub fn exp_sum<I: IntoIterator<Item = ExponentValue>>(&self, items: I) -> ExponentValue {
        items
            .into_iter()
            .fold(ExponentValue::ZERO, |acc, x| self.exp_add(acc, x))
    }

    pub fn exp_product<I: IntoIterator<Item = ExponentValue>>(&self, items: I) -> ExponentValue {
        items
            .into_iter()
            .fold(self.exponent(1), |acc, x| self.exp_mul(acc, x))
    }

    /// Uniform draw from `[1, p-2]`, the non-zero exponents.
    pub fn random_nonzero_exponent<R: Rng + ?Sized>(&self, rng: &mut R) -> ExponentValue {
        ExponentValue(rng.gen_range(1..self.order()))
    }

    pub fn random_exponent<R: Rng + ?Sized>(&self, rng: &mut R) -> ExponentValue {
        ExponentValue(rng.gen_range(0..self.order()))
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        GroupElement(rng.gen_range(1..self.p))
    }
}

/// Picks a safe prime in `[lo, hi]` starting from a random offset, then a
/// random generator for it.
pub fn random_safe_prime<R: Rng + ?Sized>(lo: u64, hi: u64, rng: &mut R) -> Result<FieldParams> {
    if lo >= hi {
        return Err(Error::RangeExhausted { lo, hi });
    }
    let start = rng.gen_range(lo..=hi);
    // Every safe prime above 7 is 11 mod 12.
    let candidate = |p: u64| (p == 7 || p % 12 == 11) && is_safe_prime(p);
    let p = (start..=hi)
        .chain(lo..start)
        .find(|&p| candidate(p))
        .ok_or(Error::RangeExhausted { lo, hi })?;
    let q = (p - 1) / 2;
    let probe = FieldParams { p, g: 0, q };
    let g = loop {
        let g = rng.gen_range(2..=p - 2);
        if probe.is_generator(g) {
            break g;
        }
    };
    FieldParams::new(p, g)
}

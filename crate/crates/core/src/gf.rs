//! Arithmetic in the finite fields GF(p^k).
//!
//! Elements are encoded as integers `v = c_0 + c_1 p + .. + c_{k-1} p^{k-1}`
//! where `c_i` is the coefficient of `x^i` in the polynomial representative.
//! Enumeration follows this integer order, so zero comes first and one second;
//! for GF(4) with modulus `x^2 + x + 1` the order is `[0, 1, ω, ω^2 = 1 + ω]`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 1;
    }
    true
}

/// Decomposes `q = p^k` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Smallest prime factor of `n >= 2`.
pub fn smallest_prime_factor(n: u64) -> u64 {
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return f;
        }
        f += 1;
    }
    n
}

/// A finite field GF(p^k) with a fixed monic irreducible modulus.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    /// `k + 1` coefficients, constant term first; the last one is 1.
    modulus: Vec<u32>,
    order: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec").field("p", &self.p).field("k", &self.k).field("modulus", &self.modulus).finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

impl FieldSpec {
    /// Builds GF(p^k) using the smallest monic irreducible polynomial of degree `k`,
    /// where polynomials are ordered by their integer encoding of the non-leading
    /// coefficients.
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("field degree k must be at least 1".into()));
        }
        let order = p.checked_pow(k).filter(|&q| q <= MAX_ORDER).ok_or(Error::FieldTooLarge { p, k })?;
        let p32 = p as u32;
        let modulus = (0..order as u32)
            .map(|low| {
                let mut c = digits(low, p32, k as usize);
                c.push(1);
                c
            })
            .find(|f| is_irreducible(f, p32))
            .expect("an irreducible polynomial exists in every degree");
        Self::with_modulus_unchecked(p32, k, modulus, order as u32)
    }

    /// Builds the prime-power field of order `q`.
    pub fn of_order(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Self::new(p, k)
    }

    fn with_modulus_unchecked(p: u32, k: u32, modulus: Vec<u32>, order: u32) -> Result<Self> {
        let mut field = Self { p, k, modulus, order, exp: Vec::new(), log: Vec::new() };
        // find a generator of the multiplicative group by brute force
        let group = order - 1;
        for g in 1..order {
            let mut powers = Vec::with_capacity(group as usize);
            let mut x = 1;
            loop {
                powers.push(x);
                x = field.poly_mul(x, g);
                if x == 1 {
                    break;
                }
            }
            if powers.len() == group as usize {
                let mut log = vec![0; order as usize];
                for (e, &v) in powers.iter().enumerate() {
                    log[v as usize] = e as u32;
                }
                field.exp = powers;
                field.log = log;
                return Ok(field);
            }
        }
        unreachable!("multiplicative group of a finite field is cyclic")
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficients of the modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> u32 {
        if self.order == 2 {
            1
        } else {
            self.exp[1]
        }
    }

    /// Polynomial coefficients of the element encoded as `v`.
    pub fn coeffs(&self, v: u32) -> Vec<u32> {
        digits(v, self.p, self.k as usize)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c % self.p)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.digitwise(a, b, |x, y| (x + y) % self.p)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.digitwise(a, b, |x, y| (x + self.p - y) % self.p)
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let group = self.order - 1;
        let e = (self.log[a as usize] + self.log[b as usize]) % group;
        self.exp[e as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let group = self.order - 1;
        let e = (group - self.log[a as usize]) % group;
        Ok(self.exp[e as usize])
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let group = (self.order - 1) as u64;
        let l = (self.log[a as usize] as u64 * (e % group)) % group;
        self.exp[l as usize]
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let group = self.order - 1;
        let l = self.log[a as usize];
        Some(group / gcd(group, l))
    }

    /// All elements as handles, in encoding order.
    pub fn enumerate(&self) -> Vec<FieldElement<'_>> {
        (0..self.order).map(|v| FieldElement { field: self, value: v }).collect()
    }

    pub fn element(&self, value: u32) -> FieldElement<'_> {
        FieldElement { field: self, value: value % self.order }
    }

    fn digitwise(&self, a: u32, b: u32, op: impl Fn(u32, u32) -> u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += op(a % self.p, b % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    /// Schoolbook product reduced by the modulus (used to build the tables).
    fn poly_mul(&self, a: u32, b: u32) -> u32 {
        let k = self.k as usize;
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let mut prod = vec![0u32; 2 * k - 1];
        for i in 0..k {
            for j in 0..k {
                prod[i + j] = (prod[i + j] + ca[i] * cb[j]) % self.p;
            }
        }
        let rem = poly_rem(&prod, &self.modulus, self.p);
        self.from_coeffs(&rem[..k.min(rem.len())])
    }
}

/// A field element bound to its field.
#[derive(Clone, Copy)]
pub struct FieldElement<'f> {
    field: &'f FieldSpec,
    value: u32,
}

impl fmt::Debug for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})[{}]", self.field.p, self.field.k, self.value)
    }
}

impl PartialEq for FieldElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.value == other.value
    }
}

impl<'f> FieldElement<'f> {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> &'f FieldSpec {
        self.field
    }

    pub fn coeffs(&self) -> Vec<u32> {
        self.field.coeffs(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &Self) -> Result<()> {
        if std::ptr::eq(self.field, other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(Error::MismatchedFields)
        }
    }

    fn wrap(&self, value: u32) -> Self {
        Self { field: self.field, value }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> Self {
        self.wrap(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.wrap(self.field.pow(self.value, e))
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn digits(mut v: u32, p: u32, k: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(v % p);
        v /= p;
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m` over GF(p); the result has
/// `deg(m)` coefficients (or fewer when `a` is shorter).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let dm = m.len() - 1;
    let mut r = a.to_vec();
    for i in (dm..r.len()).rev() {
        let lead = r[i];
        if lead == 0 {
            continue;
        }
        let shift = i - dm;
        for (j, &c) in m.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p - (lead * c) % p) % p;
        }
    }
    r.truncate(dm);
    r
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for e in 1..=deg / 2 {
        for low in 0..p.pow(e as u32) {
            let mut g = digits(low, p, e);
            g.push(1);
            let r = poly_rem(f, &g, p);
            if r.iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

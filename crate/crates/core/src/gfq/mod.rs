//! Exact arithmetic in `F_p` and `F_{p^m}`.
//!
//! An element of `F_{p^m}` is stored as the integer `sum c_i p^i` built from
//! its residue polynomial `c_0 + c_1 x + ... + c_{m-1} x^{m-1}` modulo a fixed
//! monic irreducible polynomial. The modulus is the lexicographically least
//! irreducible polynomial of degree `m`, so an element's encoding is stable
//! across runs and machines.
//!
//! All operations go through the owning [`FieldCtx`]; a [`FieldElem`] is a
//! plain `Copy` index and carries no reference to its field.

mod embed;
mod poly;

pub use embed::{trace_norm, FieldEmbedding, RelativeBasis};
pub use poly::{Poly, PolyRing};

use std::f64::consts::PI;
use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported characteristic (exclusive).
pub const MAX_PRIME: u64 = 1 << 20;

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 16;

/// Fields up to this size get discrete log tables for fast multiplication.
const LOG_TABLE_LIMIT: u64 = 1 << 20;

/// An element of a finite field, encoded as `sum c_i p^i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(pub(crate) u64);

impl FieldElem {
    /// The integer encoding of the element.
    pub fn index(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

struct LogTables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// The field `F_q`, `q = p^m`, together with its arithmetic tables.
pub struct FieldCtx {
    p: u64,
    m: usize,
    q: u64,
    modulus: Vec<u64>,
    pow_p: Vec<u64>,
    basis_trace: Vec<u64>,
    generator: FieldElem,
    tables: Option<LogTables>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (modulus {:?})", self.p, self.m, self.modulus)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime divisors by trial division.
pub(crate) fn prime_divisors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d: u128 = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

impl FieldCtx {
    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Arc<Self>> {
        Self::new(p, 1)
    }

    /// `F_{p^m}` with the lexicographically least irreducible modulus.
    ///
    /// Candidates `x^m + c_{m-1} x^{m-1} + ... + c_0` are enumerated in
    /// increasing order of `sum c_i p^i`.
    ///
    /// Contexts are memoized per `(p, m)`.
    pub fn new(p: u64, m: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<FieldCtx>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(f) = cache.lock().unwrap().get(&(p, m)) {
            return Ok(f.clone());
        }
        let f = Self::search(p, m)?;
        cache.lock().unwrap().insert((p, m), f.clone());
        Ok(f)
    }

    fn search(p: u64, m: usize) -> Result<Arc<Self>> {
        Self::check_prime(p)?;
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::Domain(format!("extension degree {m} out of range")));
        }
        if m == 1 {
            return Self::build(p, vec![0, 1]);
        }
        let q = checked_pow(p, m).ok_or(Error::Overflow("field order"))?;
        for tail in 0..q {
            let mut modulus = Vec::with_capacity(m + 1);
            let mut t = tail;
            for _ in 0..m {
                modulus.push(t % p);
                t /= p;
            }
            modulus.push(1);
            if modulus[0] == 0 {
                continue;
            }
            if poly::is_irreducible_mod_p(p, &modulus) {
                return Self::build(p, modulus);
            }
        }
        Err(Error::Consistency(format!("no irreducible polynomial of degree {m} mod {p}")))
    }

    /// `F_p[x]/(modulus)`; the modulus must be monic and irreducible.
    pub fn with_modulus(p: u64, modulus: &[u64]) -> Result<Arc<Self>> {
        Self::check_prime(p)?;
        let modulus: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::Domain("modulus must be monic of degree >= 1".into()));
        }
        if modulus.len() - 1 > MAX_DEGREE {
            return Err(Error::Domain("extension degree too large".into()));
        }
        if !poly::is_irreducible_mod_p(p, &modulus) {
            return Err(Error::Reducible { p, poly: modulus });
        }
        Self::build(p, modulus)
    }

    fn check_prime(p: u64) -> Result<()> {
        if p < 3 || p >= MAX_PRIME || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        Ok(())
    }

    fn build(p: u64, modulus: Vec<u64>) -> Result<Arc<Self>> {
        let m = modulus.len() - 1;
        let q = checked_pow(p, m).ok_or(Error::Overflow("field order"))?;
        let pow_p = (0..=m).map(|i| p.pow(i as u32)).collect();
        let mut ctx = FieldCtx {
            p,
            m,
            q,
            modulus,
            pow_p,
            basis_trace: vec![0; m],
            generator: FieldElem(0),
            tables: None,
        };
        // Tr(x^i) = sum_j (x^i)^(p^j); computed before anything relies on it.
        let x = if m == 1 { FieldElem(0) } else { FieldElem(p) };
        for i in 0..m {
            let xi = if m == 1 { ctx.one() } else { ctx.pow(x, i as u128) };
            let mut acc = ctx.zero();
            let mut c = xi;
            for _ in 0..m {
                acc = ctx.add(acc, c);
                c = ctx.pow(c, p as u128);
            }
            // the trace lies in F_p, i.e. is a constant residue
            ctx.basis_trace[i] = acc.0;
        }
        ctx.generator = ctx.find_generator();
        if m > 1 && q <= LOG_TABLE_LIMIT {
            let n = (q - 1) as usize;
            let mut exp = vec![0u32; n];
            let mut log = vec![0u32; q as usize];
            let mut cur = ctx.one();
            for (i, slot) in exp.iter_mut().enumerate() {
                *slot = cur.0 as u32;
                log[cur.0 as usize] = i as u32;
                cur = ctx.mul(cur, ctx.generator);
            }
            ctx.tables = Some(LogTables { exp, log });
        }
        Ok(Arc::new(ctx))
    }

    fn find_generator(&self) -> FieldElem {
        let order = (self.q - 1) as u128;
        let divisors = prime_divisors(order);
        (1..self.q)
            .map(FieldElem)
            .find(|&g| divisors.iter().all(|&r| self.pow(g, order / r) != self.one()))
            .expect("multiplicative group of a finite field is cyclic")
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    /// Degree `m` over the prime field.
    pub fn degree(&self) -> usize {
        self.m
    }

    /// Number of elements `q = p^m`.
    pub fn order(&self) -> u64 {
        self.q
    }

    /// Monic modulus, low degree first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// A fixed generator of the cyclic group `F_q^*`.
    pub fn generator(&self) -> FieldElem {
        self.generator
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(0)
    }

    pub fn one(&self) -> FieldElem {
        FieldElem(1)
    }

    /// Element with the given encoding; panics when out of range.
    pub fn elem(&self, index: u64) -> FieldElem {
        assert!(index < self.q, "index {index} outside F_{}", self.q);
        FieldElem(index)
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u64)
    }

    /// Build an element from its power-basis coefficients (little-endian).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> FieldElem {
        assert!(coeffs.len() <= self.m, "too many coefficients");
        let mut idx = 0;
        for (i, &c) in coeffs.iter().enumerate() {
            idx += (c % self.p) * self.pow_p[i];
        }
        FieldElem(idx)
    }

    /// Power-basis coefficients (little-endian, length `m`).
    pub fn coeffs(&self, a: FieldElem) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.m);
        let mut t = a.0;
        for _ in 0..self.m {
            out.push(t % self.p);
            t /= self.p;
        }
        out
    }

    fn digits(&self, a: FieldElem) -> [u64; MAX_DEGREE] {
        let mut out = [0u64; MAX_DEGREE];
        let mut t = a.0;
        for slot in out.iter_mut().take(self.m) {
            *slot = t % self.p;
            t /= self.p;
        }
        out
    }

    fn undigits(&self, d: &[u64]) -> FieldElem {
        let mut idx = 0;
        for i in (0..self.m).rev() {
            idx = idx * self.p + d[i];
        }
        FieldElem(idx)
    }

    /// Iterator over all elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    /// True when `a` lies in the prime field.
    pub fn in_prime_field(&self, a: FieldElem) -> bool {
        a.0 < self.p
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.m == 1 {
            let s = a.0 + b.0;
            return FieldElem(if s >= self.p { s - self.p } else { s });
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let mut z = [0u64; MAX_DEGREE];
        for i in 0..self.m {
            let s = x[i] + y[i];
            z[i] = if s >= self.p { s - self.p } else { s };
        }
        self.undigits(&z)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.m == 1 {
            return FieldElem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let x = self.digits(a);
        let mut z = [0u64; MAX_DEGREE];
        for i in 0..self.m {
            z[i] = if x[i] == 0 { 0 } else { self.p - x[i] };
        }
        self.undigits(&z)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.m == 1 {
            return FieldElem(mul_mod(a.0, b.0, self.p));
        }
        if a.0 == 0 || b.0 == 0 {
            return FieldElem(0);
        }
        if let Some(t) = &self.tables {
            let n = self.q as usize - 1;
            let s = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
            return FieldElem(t.exp[if s >= n { s - n } else { s }] as u64);
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..self.m {
            if x[i] == 0 {
                continue;
            }
            for j in 0..self.m {
                prod[i + j] = (prod[i + j] + x[i] * y[j]) % self.p;
            }
        }
        for k in (self.m..2 * self.m - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..self.m {
                let t = c * self.modulus[i] % self.p;
                prod[k - self.m + i] = (prod[k - self.m + i] + self.p - t) % self.p;
            }
        }
        self.undigits(&prod[..self.m])
    }

    pub fn square(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElem, mut e: u128) -> FieldElem {
        if self.m == 1 {
            let e = (e % (self.p as u128 - 1)) as u64;
            if a.0 == 0 {
                return FieldElem(if e == 0 { 1 } else { 0 });
            }
            return FieldElem(pow_mod(a.0, e, self.p));
        }
        if let Some(t) = &self.tables {
            if a.0 == 0 {
                return FieldElem(if e == 0 { 1 } else { 0 });
            }
            let n = self.q as u128 - 1;
            let s = (t.log[a.0 as usize] as u128 * (e % n)) % n;
            return FieldElem(t.exp[s as usize] as u64);
        }
        let mut base = a;
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::Domain("inverse of zero".into()));
        }
        if self.m == 1 {
            return Ok(FieldElem(inv_mod(a.0, self.p)));
        }
        Ok(self.pow(a, self.q as u128 - 2))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Multiplicative inverse of 2.
    pub fn half(&self) -> FieldElem {
        FieldElem((self.p + 1) / 2)
    }

    /// Absolute Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.pow(a, self.p as u128)
    }

    /// `Tr_{F_q/F_p}(a)` as an integer in `[0, p)`.
    pub fn abs_trace(&self, a: FieldElem) -> u64 {
        if self.m == 1 {
            return a.0;
        }
        let d = self.digits(a);
        let mut acc = 0;
        for i in 0..self.m {
            acc = (acc + d[i] * self.basis_trace[i]) % self.p;
        }
        acc
    }

    /// `N_{F_q/F_p}(a) = a^((q-1)/(p-1))` as an integer in `[0, p)`.
    pub fn abs_norm(&self, a: FieldElem) -> u64 {
        if self.m == 1 {
            return a.0;
        }
        self.pow(a, ((self.q - 1) / (self.p - 1)) as u128).0
    }

    /// The Legendre character `sigma(a) = a^((q-1)/2)` as `+1` or `-1`.
    pub fn legendre_sigma(&self, a: FieldElem) -> Result<i8> {
        if a.is_zero() {
            return Err(Error::Domain("Legendre character at zero".into()));
        }
        Ok(if self.pow(a, ((self.q - 1) / 2) as u128) == self.one() { 1 } else { -1 })
    }

    pub fn is_square(&self, a: FieldElem) -> bool {
        a.is_zero() || self.legendre_sigma(a) == Ok(1)
    }

    /// Square root, if one exists; the smaller encoding of the two roots.
    pub fn sqrt(&self, a: FieldElem) -> Option<FieldElem> {
        if a.is_zero() {
            return Some(a);
        }
        if !self.is_square(a) {
            return None;
        }
        let ring = PolyRing::new(self);
        let f = Poly::from_elems(vec![self.neg(a), self.zero(), self.one()]);
        ring.roots(&f).into_iter().min()
    }

    /// The exponent `k` with `psi(t) = exp(2 pi i k / p)`, i.e. `Tr(t)`.
    pub fn psi_index(&self, t: FieldElem) -> u64 {
        self.abs_trace(t)
    }

    /// The additive character `psi(t) = exp(2 pi i Tr(t) / p)`.
    pub fn additive_psi(&self, t: FieldElem) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.psi_index(t) as f64 / self.p as f64)
    }

    /// Table of the `p`-th roots of unity, `table[k] = exp(2 pi i k / p)`.
    pub fn psi_table(&self) -> Vec<Complex64> {
        (0..self.p)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.p as f64))
            .collect()
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: FieldElem) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::Domain("order of zero".into()));
        }
        let mut n = (self.q - 1) as u128;
        for r in prime_divisors(n) {
            while n % r == 0 && self.pow(a, n / r) == self.one() {
                n /= r;
            }
        }
        Ok(n as u64)
    }

    /// JSON form: little-endian coefficient array.
    pub fn to_json(&self, a: FieldElem) -> serde_json::Value {
        serde_json::Value::from(self.coeffs(a))
    }
}

pub(crate) fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    let mut r: u64 = 1;
    for _ in 0..exp {
        r = r.checked_mul(base)?;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_examples() {
        let f5 = FieldCtx::prime(5).unwrap();
        let f7 = FieldCtx::prime(7).unwrap();
        assert_eq!(f5.legendre_sigma(f5.one()), Ok(1));
        assert_eq!(f5.legendre_sigma(f5.from_int(3)), Ok(-1));
        assert_eq!(f7.legendre_sigma(f7.from_int(2)), Ok(1));
        assert!(f7.legendre_sigma(f7.zero()).is_err());
    }

    #[test]
    fn legendre_matches_enumerated_squares() {
        for (p, m) in [(3, 1), (5, 1), (7, 1), (11, 1), (3, 2), (5, 2), (7, 2), (11, 2), (3, 4)] {
            let f = FieldCtx::new(p, m).unwrap();
            let squares: std::collections::HashSet<_> =
                f.elements().skip(1).map(|a| f.square(a)).collect();
            let mut plus = 0;
            for a in f.elements().skip(1) {
                let s = f.legendre_sigma(a).unwrap();
                assert_eq!(s == 1, squares.contains(&a));
                plus += (s == 1) as u64;
                for b in f.elements().skip(1) {
                    let ab = f.legendre_sigma(f.mul(a, b)).unwrap();
                    assert_eq!(ab, s * f.legendre_sigma(b).unwrap());
                }
            }
            assert_eq!(plus, (f.order() - 1) / 2);
        }
    }

    #[test]
    fn psi_is_a_nontrivial_character() {
        for (p, m) in [(5, 1), (3, 2), (7, 2)] {
            let f = FieldCtx::new(p, m).unwrap();
            assert!((f.additive_psi(f.zero()) - 1.0).norm() < 1e-15);
            let total: Complex64 = f.elements().map(|t| f.additive_psi(t)).sum();
            assert!(total.norm() < 1e-10);
            for s in f.elements() {
                for t in f.elements().step_by(3) {
                    let lhs = f.additive_psi(f.add(s, t));
                    assert!((lhs - f.additive_psi(s) * f.additive_psi(t)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn psi_on_base_field_of_f9() {
        // Tr_{F_9/F_3}(x) = 2x for x in F_3.
        let f9 = FieldCtx::new(3, 2).unwrap();
        for x in 0..3 {
            assert_eq!(f9.abs_trace(f9.from_int(x)), (2 * x as u64) % 3);
        }
    }

    #[test]
    fn generator_has_full_order() {
        for (p, m) in [(3, 1), (5, 1), (13, 1), (3, 3), (5, 2), (7, 4)] {
            let f = FieldCtx::new(p, m).unwrap();
            assert_eq!(f.mult_order(f.generator()).unwrap(), f.order() - 1);
        }
    }

    #[test]
    fn table_and_schoolbook_products_agree() {
        let f = FieldCtx::new(5, 3).unwrap();
        let slow = FieldCtx {
            p: f.p,
            m: f.m,
            q: f.q,
            modulus: f.modulus.clone(),
            pow_p: f.pow_p.clone(),
            basis_trace: f.basis_trace.clone(),
            generator: f.generator,
            tables: None,
        };
        for a in f.elements() {
            for b in f.elements().step_by(7) {
                assert_eq!(f.mul(a, b), slow.mul(a, b));
            }
        }
    }

    #[test]
    fn rejects_bad_primes() {
        assert_eq!(FieldCtx::prime(2).unwrap_err(), Error::BadPrime(2));
        assert_eq!(FieldCtx::prime(9).unwrap_err(), Error::BadPrime(9));
        assert!(FieldCtx::prime(MAX_PRIME + 7).is_err());
        assert!(FieldCtx::with_modulus(3, &[1, 0, 1]).is_ok());
        assert!(matches!(
            FieldCtx::with_modulus(5, &[1, 0, 1]),
            Err(Error::Reducible { .. })
        ));
    }

    #[test]
    fn sqrt_roundtrip() {
        let f = FieldCtx::new(7, 2).unwrap();
        for a in f.elements() {
            let s = f.square(a);
            let r = f.sqrt(s).unwrap();
            assert_eq!(f.square(r), s);
        }
    }
}

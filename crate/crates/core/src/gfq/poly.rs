//! Univariate polynomials over `F_q` and their factorization.
//!
//! Factorization is the classical three-stage pipeline: squarefree
//! decomposition, distinct-degree splitting, then Cantor-Zassenhaus
//! equal-degree splitting driven by a fixed-seed PRNG so results are
//! reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FieldCtx, FieldElem};
use crate::error::{Error, Result};

/// Coefficients low degree first, with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Poly(Vec<FieldElem>);

impl Poly {
    pub fn from_elems(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> FieldElem {
        self.0.last().copied().unwrap_or_default()
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.0.get(i).copied().unwrap_or_default()
    }
}

/// Polynomial arithmetic over a fixed field.
#[derive(Clone, Copy)]
pub struct PolyRing<'a> {
    ctx: &'a FieldCtx,
}

const FACTOR_SEED: u64 = 0x5eed_f00d;

impl<'a> PolyRing<'a> {
    pub fn new(ctx: &'a FieldCtx) -> Self {
        PolyRing { ctx }
    }

    pub fn ctx(&self) -> &'a FieldCtx {
        self.ctx
    }

    pub fn zero(&self) -> Poly {
        Poly(Vec::new())
    }

    pub fn one(&self) -> Poly {
        Poly(vec![self.ctx.one()])
    }

    pub fn x(&self) -> Poly {
        Poly(vec![self.ctx.zero(), self.ctx.one()])
    }

    pub fn constant(&self, c: FieldElem) -> Poly {
        Poly::from_elems(vec![c])
    }

    /// Polynomial with integer coefficients reduced into the field.
    pub fn from_ints(&self, coeffs: &[i64]) -> Poly {
        Poly::from_elems(coeffs.iter().map(|&c| self.ctx.from_int(c)).collect())
    }

    pub fn is_one(&self, f: &Poly) -> bool {
        f.0.len() == 1 && f.0[0] == self.ctx.one()
    }

    pub fn is_monic(&self, f: &Poly) -> bool {
        !f.is_zero() && f.lead() == self.ctx.one()
    }

    pub fn add(&self, f: &Poly, g: &Poly) -> Poly {
        let n = f.0.len().max(g.0.len());
        Poly::from_elems((0..n).map(|i| self.ctx.add(f.coeff(i), g.coeff(i))).collect())
    }

    pub fn sub(&self, f: &Poly, g: &Poly) -> Poly {
        let n = f.0.len().max(g.0.len());
        Poly::from_elems((0..n).map(|i| self.ctx.sub(f.coeff(i), g.coeff(i))).collect())
    }

    pub fn scale(&self, f: &Poly, c: FieldElem) -> Poly {
        Poly::from_elems(f.0.iter().map(|&a| self.ctx.mul(a, c)).collect())
    }

    pub fn mul(&self, f: &Poly, g: &Poly) -> Poly {
        if f.is_zero() || g.is_zero() {
            return self.zero();
        }
        let mut out = vec![self.ctx.zero(); f.0.len() + g.0.len() - 1];
        for (i, &a) in f.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in g.0.iter().enumerate() {
                out[i + j] = self.ctx.add(out[i + j], self.ctx.mul(a, b));
            }
        }
        Poly::from_elems(out)
    }

    /// Division with remainder; panics on a zero divisor.
    pub fn divrem(&self, f: &Poly, g: &Poly) -> (Poly, Poly) {
        let dg = g.degree().expect("division by the zero polynomial");
        let lead_inv = self.ctx.inv(g.lead()).expect("nonzero leading coefficient");
        let mut r = f.0.clone();
        if r.len() <= dg {
            return (self.zero(), f.clone());
        }
        let mut quot = vec![self.ctx.zero(); r.len() - dg];
        for k in (dg..r.len()).rev() {
            let c = self.ctx.mul(r[k], lead_inv);
            if c.is_zero() {
                continue;
            }
            quot[k - dg] = c;
            for (i, &b) in g.0.iter().enumerate() {
                let idx = k - dg + i;
                r[idx] = self.ctx.sub(r[idx], self.ctx.mul(c, b));
            }
        }
        r.truncate(dg);
        (Poly::from_elems(quot), Poly::from_elems(r))
    }

    pub fn rem(&self, f: &Poly, g: &Poly) -> Poly {
        self.divrem(f, g).1
    }

    pub fn monic(&self, f: &Poly) -> Poly {
        if f.is_zero() {
            return f.clone();
        }
        let inv = self.ctx.inv(f.lead()).expect("nonzero leading coefficient");
        self.scale(f, inv)
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, f: &Poly, g: &Poly) -> Poly {
        let (mut a, mut b) = (f.clone(), g.clone());
        while !b.is_zero() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    /// Extended gcd: `(g, s, t)` with `s f + t h = g`, `g` monic.
    pub fn xgcd(&self, f: &Poly, h: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (f.clone(), h.clone());
        let (mut s0, mut s1) = (self.one(), self.zero());
        let (mut t0, mut t1) = (self.zero(), self.one());
        while !r1.is_zero() {
            let (qt, r) = self.divrem(&r0, &r1);
            let s = self.sub(&s0, &self.mul(&qt, &s1));
            let t = self.sub(&t0, &self.mul(&qt, &t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = self.ctx.inv(r0.lead()).unwrap();
        (self.scale(&r0, inv), self.scale(&s0, inv), self.scale(&t0, inv))
    }

    pub fn derivative(&self, f: &Poly) -> Poly {
        Poly::from_elems(
            f.0.iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| self.ctx.mul(c, self.ctx.from_int(i as i64)))
                .collect(),
        )
    }

    pub fn eval(&self, f: &Poly, a: FieldElem) -> FieldElem {
        f.0.iter().rev().fold(self.ctx.zero(), |acc, &c| self.ctx.add(self.ctx.mul(acc, a), c))
    }

    /// `base^e mod modulus`.
    pub fn powmod(&self, base: &Poly, mut e: u128, modulus: &Poly) -> Poly {
        let mut b = self.rem(base, modulus);
        let mut r = self.rem(&self.one(), modulus);
        while e > 0 {
            if e & 1 == 1 {
                r = self.rem(&self.mul(&r, &b), modulus);
            }
            b = self.rem(&self.mul(&b, &b), modulus);
            e >>= 1;
        }
        r
    }

    /// Reciprocal dual `f*(x) = x^deg f * f(1/x) / f(0)`; requires `f(0) != 0`.
    pub fn reciprocal(&self, f: &Poly) -> Result<Poly> {
        let c0 = f.coeff(0);
        if c0.is_zero() {
            return Err(Error::Domain("reciprocal of a polynomial vanishing at 0".into()));
        }
        let rev = Poly::from_elems(f.0.iter().rev().copied().collect());
        Ok(self.scale(&rev, self.ctx.inv(c0)?))
    }

    pub fn is_squarefree(&self, f: &Poly) -> bool {
        self.is_one(&self.gcd(f, &self.derivative(f)))
    }

    /// Rabin's irreducibility test over `F_q`.
    pub fn is_irreducible(&self, f: &Poly) -> bool {
        let Some(n) = f.degree() else { return false };
        if n == 0 {
            return false;
        }
        let f = self.monic(f);
        let q = self.ctx.order() as u128;
        let x = self.x();
        // x^(q^n) == x mod f
        let mut h = self.rem(&x, &f);
        for _ in 0..n {
            h = self.powmod(&h, q, &f);
        }
        if h != self.rem(&x, &f) {
            return false;
        }
        for r in super::prime_divisors(n as u128) {
            let k = n / r as usize;
            let mut h = self.rem(&x, &f);
            for _ in 0..k {
                h = self.powmod(&h, q, &f);
            }
            let g = self.gcd(&self.sub(&h, &x), &f);
            if !self.is_one(&g) {
                return false;
            }
        }
        true
    }

    fn pth_root(&self, f: &Poly) -> Poly {
        let p = self.ctx.characteristic() as usize;
        let e = (self.ctx.order() / self.ctx.characteristic()) as u128;
        let n = f.0.len().div_ceil(p);
        Poly::from_elems((0..n).map(|i| self.ctx.pow(f.coeff(i * p), e)).collect())
    }

    /// Squarefree decomposition: `f = prod g_i^{e_i}` with the `g_i`
    /// squarefree and pairwise coprime.
    pub fn squarefree_decomposition(&self, f: &Poly) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let f = self.monic(f);
        if f.degree().unwrap_or(0) == 0 {
            return out;
        }
        let mut c = self.gcd(&f, &self.derivative(&f));
        let mut w = self.divrem(&f, &c).0;
        let mut i = 1;
        while !self.is_one(&w) {
            let y = self.gcd(&w, &c);
            let fac = self.divrem(&w, &y).0;
            if !self.is_one(&fac) {
                out.push((fac, i));
            }
            w = y;
            c = self.divrem(&c, &w).0;
            i += 1;
        }
        if !self.is_one(&c) {
            let p = self.ctx.characteristic() as usize;
            for (g, k) in self.squarefree_decomposition(&self.pth_root(&c)) {
                out.push((g, k * p));
            }
        }
        out
    }

    /// Distinct-degree factorization of a monic squarefree polynomial.
    pub fn distinct_degree(&self, f: &Poly) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let mut f = self.monic(f);
        let x = self.x();
        let q = self.ctx.order() as u128;
        let mut h = self.rem(&x, &f);
        let mut d = 0;
        while f.degree().unwrap_or(0) >= 2 * (d + 1) {
            d += 1;
            h = self.powmod(&h, q, &f);
            let g = self.gcd(&self.sub(&h, &x), &f);
            if !self.is_one(&g) {
                f = self.divrem(&f, &g).0;
                h = self.rem(&h, &f);
                out.push((g, d));
            }
        }
        if let Some(n) = f.degree() {
            if n > 0 {
                out.push((f, n));
            }
        }
        out
    }

    /// Split a product of distinct irreducibles of degree `d`.
    pub fn equal_degree(&self, f: &Poly, d: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let n = f.degree().unwrap_or(0);
        if n == d {
            return vec![self.monic(f)];
        }
        let q = self.ctx.order() as u128;
        let e = (q.pow(d as u32) - 1) / 2;
        loop {
            let a = Poly::from_elems(
                (0..n).map(|_| self.ctx.elem(rng.gen_range(0..self.ctx.order()))).collect(),
            );
            if a.degree().unwrap_or(0) == 0 {
                continue;
            }
            let b = self.sub(&self.powmod(&a, e, f), &self.one());
            let g = self.gcd(&b, f);
            let dg = g.degree().unwrap_or(0);
            if dg > 0 && dg < n {
                let h = self.divrem(f, &g).0;
                let mut out = self.equal_degree(&g, d, rng);
                out.extend(self.equal_degree(&h, d, rng));
                return out;
            }
        }
    }

    /// Complete factorization of a monic polynomial of degree >= 1 into
    /// monic irreducibles with multiplicities, sorted by (degree, coefficients).
    pub fn factor(&self, f: &Poly) -> Result<Vec<(Poly, usize)>> {
        if f.degree().unwrap_or(0) == 0 {
            return Err(Error::Domain("factorization needs degree >= 1".into()));
        }
        if !self.is_monic(f) {
            return Err(Error::Domain("factorization needs a monic polynomial".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(FACTOR_SEED);
        let mut out = Vec::new();
        for (sq, mult) in self.squarefree_decomposition(f) {
            for (g, d) in self.distinct_degree(&sq) {
                for h in self.equal_degree(&g, d, &mut rng) {
                    out.push((h, mult));
                }
            }
        }
        out.sort_by(|(a, _), (b, _)| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    /// Distinct roots in the field, sorted by encoding.
    pub fn roots(&self, f: &Poly) -> Vec<FieldElem> {
        if f.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let f = self.monic(f);
        let mut roots: Vec<_> = self
            .factor(&f)
            .expect("monic of positive degree")
            .into_iter()
            .filter(|(g, _)| g.degree() == Some(1))
            .map(|(g, _)| self.ctx.neg(g.coeff(0)))
            .collect();
        roots.sort();
        roots
    }

    /// Product of factors with multiplicities.
    pub fn expand(&self, factors: &[(Poly, usize)]) -> Poly {
        factors.iter().fold(self.one(), |acc, (g, e)| {
            (0..*e).fold(acc, |a, _| self.mul(&a, g))
        })
    }
}

/// Rabin irreducibility over the prime field on raw residues; used while a
/// field context is still being built.
pub(crate) fn is_irreducible_mod_p(p: u64, f: &[u64]) -> bool {
    let n = f.len() - 1;
    if n == 1 {
        return true;
    }
    let rem = |a: &mut Vec<u64>| {
        while a.len() > n {
            let c = a.pop().unwrap();
            if c == 0 {
                continue;
            }
            let k = a.len() - n;
            for i in 0..n {
                a[k + i] = (a[k + i] + p - c * f[i] % p) % p;
            }
        }
    };
    let mulmod = |a: &[u64], b: &[u64]| {
        let mut out = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        rem(&mut out);
        out
    };
    let powmod = |base: &[u64], mut e: u64| {
        let mut r = vec![1u64];
        let mut b = base.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(&r, &b);
            }
            b = mulmod(&b, &b);
            e >>= 1;
        }
        r.resize(n, 0);
        r
    };
    let trim = |mut a: Vec<u64>| {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    };
    let gcd_is_one = |a: Vec<u64>| {
        let mut a = trim(a);
        let mut b = trim(f.to_vec());
        while !a.is_empty() {
            // b mod a
            let la = *a.last().unwrap();
            let inv = super::inv_mod(la, p);
            while b.len() >= a.len() {
                let c = b.last().unwrap() * inv % p;
                let k = b.len() - a.len();
                for i in 0..a.len() {
                    b[k + i] = (b[k + i] + p - c * a[i] % p) % p;
                }
                b = trim(b);
                if b.is_empty() {
                    break;
                }
            }
            std::mem::swap(&mut a, &mut b);
        }
        b.len() == 1
    };
    let mut x = vec![0u64; n];
    x[1] = 1;
    let frob_iter = |k: usize| {
        let mut h = x.clone();
        for _ in 0..k {
            h = powmod(&h, p);
        }
        h
    };
    if frob_iter(n) != x {
        return false;
    }
    for r in super::prime_divisors(n as u128) {
        let mut h = frob_iter(n / r as usize);
        h[1] = (h[1] + p - 1) % p;
        if !gcd_is_one(h) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfq::FieldCtx;

    fn ints(f: &Poly) -> Vec<u64> {
        f.coeffs().iter().map(|c| c.index()).collect()
    }

    #[test]
    fn factor_examples() {
        let f5 = FieldCtx::prime(5).unwrap();
        let r5 = PolyRing::new(&f5);
        let fs = r5.factor(&r5.from_ints(&[-1, 0, 1])).unwrap();
        let got: Vec<_> = fs.iter().map(|(g, e)| (ints(g), *e)).collect();
        assert_eq!(got, vec![(vec![1, 1], 1), (vec![4, 1], 1)]);

        let fs = r5.factor(&r5.from_ints(&[1, 0, 1])).unwrap();
        let got: Vec<_> = fs.iter().map(|(g, e)| (ints(g), *e)).collect();
        // (x + 2)(x + 3)
        assert_eq!(got, vec![(vec![2, 1], 1), (vec![3, 1], 1)]);

        let f3 = FieldCtx::prime(3).unwrap();
        let r3 = PolyRing::new(&f3);
        let fs = r3.factor(&r3.from_ints(&[1, 0, 1])).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].0.degree(), Some(2));
    }

    #[test]
    fn factor_rejects_non_monic_and_constants() {
        let f5 = FieldCtx::prime(5).unwrap();
        let r = PolyRing::new(&f5);
        assert!(r.factor(&r.from_ints(&[2, 1])).is_ok());
        assert!(r.factor(&r.from_ints(&[1, 0, 2])).is_err());
        assert!(r.factor(&r.from_ints(&[1])).is_err());
    }

    #[test]
    fn factor_with_repeated_and_pth_power_factors() {
        let f3 = FieldCtx::prime(3).unwrap();
        let r = PolyRing::new(&f3);
        // (x^2+1)^3 (x+1)^2 (x+2)
        let a = r.from_ints(&[1, 0, 1]);
        let b = r.from_ints(&[1, 1]);
        let c = r.from_ints(&[2, 1]);
        let f = r.expand(&[(a.clone(), 3), (b.clone(), 2), (c.clone(), 1)]);
        let fs = r.factor(&f).unwrap();
        assert_eq!(r.expand(&fs), f);
        let mut mults: Vec<_> = fs.iter().map(|(_, e)| *e).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 2, 3]);
    }

    #[test]
    fn factor_over_extension_field() {
        let f9 = FieldCtx::new(3, 2).unwrap();
        let r = PolyRing::new(&f9);
        // x^2 + 1 splits over F_9
        let fs = r.factor(&r.from_ints(&[1, 0, 1])).unwrap();
        assert_eq!(fs.len(), 2);
        for (g, _) in &fs {
            assert!(r.is_irreducible(g));
        }
        // x^9 - x is the product of all monic linears
        let mut coeffs = vec![0i64; 10];
        coeffs[9] = 1;
        coeffs[1] = -1;
        let fs = r.factor(&r.from_ints(&coeffs)).unwrap();
        assert_eq!(fs.len(), 9);
    }

    #[test]
    fn raw_and_field_irreducibility_agree() {
        let f5 = FieldCtx::prime(5).unwrap();
        let r = PolyRing::new(&f5);
        for tail in 0..125u64 {
            let c = [tail % 5, tail / 5 % 5, tail / 25, 1];
            let f = Poly::from_elems(c.iter().map(|&x| f5.elem(x)).collect());
            assert_eq!(is_irreducible_mod_p(5, &c), r.is_irreducible(&f));
        }
    }

    #[test]
    fn reciprocal_dual() {
        let f7 = FieldCtx::prime(7).unwrap();
        let r = PolyRing::new(&f7);
        let f = r.from_ints(&[2, 3, 1]);
        let fs = r.reciprocal(&f).unwrap();
        // (2x^2 + 3x + 1)/2 = x^2 + 5x + 4
        assert_eq!(fs, r.from_ints(&[4, 5, 1]));
        assert_eq!(r.reciprocal(&fs).unwrap(), f);
        assert!(r.reciprocal(&r.x()).is_err());
    }
}

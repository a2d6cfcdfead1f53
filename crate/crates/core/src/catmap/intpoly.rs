//! Integer polynomials, coefficients lowest degree first.

use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, Poly, PolyRing};

pub type IntPoly = Vec<i128>;

fn ovf() -> Error {
    Error::Overflow("integer polynomial arithmetic")
}

pub fn trim(mut f: IntPoly) -> IntPoly {
    while f.len() > 1 && *f.last().unwrap() == 0 {
        f.pop();
    }
    f
}

pub fn degree(f: &[i128]) -> usize {
    trim(f.to_vec()).len() - 1
}

/// Characteristic polynomial `det(x I - A)` by Faddeev-LeVerrier.
pub fn charpoly(a: &[Vec<i64>]) -> Result<IntPoly> {
    let n = a.len();
    let a: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut m = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i128;
                for l in 0..n {
                    s = s.checked_add(a[i][l].checked_mul(m[l][j]).ok_or_else(ovf)?).ok_or_else(ovf)?;
                }
                next[i][j] = s;
            }
            next[i][i] = next[i][i].checked_add(c[n - k + 1]).ok_or_else(ovf)?;
        }
        m = next;
        let mut tr = 0i128;
        for i in 0..n {
            for l in 0..n {
                tr = tr.checked_add(a[i][l].checked_mul(m[l][i]).ok_or_else(ovf)?).ok_or_else(ovf)?;
            }
        }
        if tr % k as i128 != 0 {
            return Err(Error::Consistency("non-integral Faddeev-LeVerrier step".into()));
        }
        c[n - k] = -tr / k as i128;
    }
    Ok(c)
}

pub fn derivative(f: &[i128]) -> IntPoly {
    if f.len() <= 1 {
        return vec![0];
    }
    trim(f.iter().enumerate().skip(1).map(|(i, &c)| c * i as i128).collect())
}

fn content(f: &[i128]) -> i128 {
    f.iter().fold(0i128, |g, &c| gcd(g, c.abs()))
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn primitive(f: IntPoly) -> IntPoly {
    let c = content(&f);
    if c == 0 {
        return f;
    }
    let s = if *f.last().unwrap() < 0 { -1 } else { 1 };
    f.into_iter().map(|x| s * x / c).collect()
}

fn is_zero(f: &[i128]) -> bool {
    f.iter().all(|&c| c == 0)
}

// lc(b)^{deg a - deg b + 1} a mod b
fn pseudo_rem(a: &[i128], b: &[i128]) -> Result<IntPoly> {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let lb = b[db];
    while !is_zero(&r) && r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr];
        let shift = dr - db;
        let mut next: IntPoly = r.iter().map(|&c| c.checked_mul(lb).ok_or_else(ovf)).collect::<Result<_>>()?;
        for (i, &c) in b.iter().enumerate() {
            next[i + shift] = next[i + shift].checked_sub(lr.checked_mul(c).ok_or_else(ovf)?).ok_or_else(ovf)?;
        }
        r = trim(next);
    }
    Ok(r)
}

/// Primitive gcd over `Z[x]` (hence over `Q[x]` up to units).
pub fn gcd_poly(a: &[i128], b: &[i128]) -> Result<IntPoly> {
    let (mut a, mut b) = (primitive(trim(a.to_vec())), primitive(trim(b.to_vec())));
    if degree(&a) < degree(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    while !is_zero(&b) {
        let r = pseudo_rem(&a, &b)?;
        a = b;
        b = primitive(r);
    }
    Ok(primitive(a))
}

pub fn is_squarefree(f: &[i128]) -> Result<bool> {
    Ok(degree(&gcd_poly(f, &derivative(f))?) == 0)
}

/// Exact division by a monic polynomial; `None` if it does not divide.
pub fn div_monic(f: &[i128], g: &[i128]) -> Option<IntPoly> {
    let g = trim(g.to_vec());
    let dg = g.len() - 1;
    assert_eq!(g[dg], 1);
    let mut r = trim(f.to_vec());
    if r.len() - 1 < dg {
        return is_zero(&r).then(|| vec![0]);
    }
    let mut q = vec![0i128; r.len() - dg];
    for k in (0..q.len()).rev() {
        let c = r[k + dg];
        q[k] = c;
        for (i, &gi) in g.iter().enumerate() {
            r[k + i] -= c * gi;
        }
    }
    is_zero(&r).then(|| trim(q))
}

/// Cyclotomic polynomial `Phi_n`.
pub fn cyclotomic(n: u64) -> IntPoly {
    let mut f = vec![0i128; n as usize + 1];
    f[0] = -1;
    f[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            f = div_monic(&f, &cyclotomic(d)).expect("Phi_d divides x^n - 1");
        }
    }
    f
}

fn euler_phi(mut n: u64) -> u64 {
    let mut r = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if n > 1 {
        r -= r / n;
    }
    r
}

/// Whether `f` has a root of unity among its roots.
pub fn has_cyclotomic_factor(f: &[i128]) -> bool {
    let d = degree(f) as u64;
    // phi(n) <= d forces n <= 2 d^2 + 2
    (1..=2 * d * d + 2).filter(|&n| euler_phi(n) <= d).any(|n| div_monic(f, &cyclotomic(n)).is_some())
}

/// `x^deg f(1/x)`.
pub fn reciprocal(f: &[i128]) -> IntPoly {
    let mut r = trim(f.to_vec());
    r.reverse();
    trim(r)
}

/// Reduction mod `p` as a polynomial over `F_p`.
pub fn reduce(ctx: &FieldCtx, f: &[i128]) -> Poly {
    let p = ctx.characteristic() as i128;
    PolyRing::new(ctx).from_ints(&f.iter().map(|&c| c.rem_euclid(p) as i64).collect::<Vec<_>>())
}

fn divisors(n: i128) -> Vec<i128> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            out.push(n / d);
        }
        d += 1;
    }
    out.iter().flat_map(|&d| [d, -d]).collect()
}

fn eval(f: &[i128], x: i128) -> Option<i128> {
    f.iter().rev().try_fold(0i128, |acc, &c| acc.checked_mul(x)?.checked_add(c))
}

fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i128;
    (r - 1..=r + 1).find(|&s| s >= 0 && s * s == n)
}

// monic quadratic factor x^2 + a x + b of a monic quartic
fn quadratic_factor(f: &[i128]) -> Option<IntPoly> {
    let (a0, a1, a2, a3) = (f[0], f[1], f[2], f[3]);
    for b in divisors(a0) {
        let d = a0 / b;
        let cands: Vec<i128> = if d != b {
            let num = a1 - b * a3;
            if num % (d - b) != 0 {
                continue;
            }
            vec![num / (d - b)]
        } else {
            if a1 != b * a3 {
                continue;
            }
            // a^2 - a3 a + (a2 - 2b) = 0
            let disc = a3 * a3 - 4 * (a2 - 2 * b);
            match isqrt(disc) {
                Some(s) if (a3 + s) % 2 == 0 => vec![(a3 + s) / 2, (a3 - s) / 2],
                _ => continue,
            }
        };
        for a in cands {
            let c = a3 - a;
            if a * c + b + d == a2 && a * d + b * c == a1 {
                return Some(vec![b, a, 1]);
            }
        }
    }
    None
}

/// Irreducible over `Q`: witnessed by an irreducible reduction mod a small
/// prime, else decided exactly for degree at most 4.
pub fn is_irreducible_q(f: &[i128]) -> Result<Option<bool>> {
    let f = trim(f.to_vec());
    let d = f.len() - 1;
    if *f.last().unwrap() != 1 {
        return Err(Error::Domain("expected a monic polynomial".into()));
    }
    if d <= 1 {
        return Ok(Some(d == 1));
    }
    for p in (3..200u64).filter(|&p| crate::gfq::is_prime(p)) {
        let ctx = FieldCtx::prime(p)?;
        if PolyRing::new(&ctx).is_irreducible(&reduce(&ctx, &f)) {
            return Ok(Some(true));
        }
    }
    Ok(factor_small(&f)?.map(|fs| fs.len() == 1))
}

/// Factorization over `Q` of a squarefree monic polynomial of degree at most
/// 4; `None` for larger degree.
pub fn factor_small(f: &[i128]) -> Result<Option<Vec<IntPoly>>> {
    let mut f = trim(f.to_vec());
    if *f.last().unwrap() != 1 {
        return Err(Error::Domain("expected a monic polynomial".into()));
    }
    if f.len() - 1 > 4 {
        return Ok(None);
    }
    let mut out = Vec::new();
    'roots: loop {
        if f.len() <= 2 {
            break;
        }
        for r in divisors(f[0]).into_iter().chain(std::iter::once(0)) {
            if eval(&f, r) == Some(0) {
                let lin = vec![-r, 1];
                f = div_monic(&f, &lin).unwrap();
                out.push(lin);
                continue 'roots;
            }
        }
        break;
    }
    if f.len() == 5 {
        if let Some(q) = quadratic_factor(&f) {
            let rest = div_monic(&f, &q).ok_or(Error::Consistency("quadratic factor check".into()))?;
            out.push(q);
            out.push(rest);
            f = vec![1];
        }
    }
    if f.len() > 1 {
        out.push(f);
    }
    out.sort();
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_examples() {
        assert_eq!(charpoly(&[vec![2, 1], vec![1, 1]]).unwrap(), vec![1, -3, 1]);
        assert_eq!(charpoly(&[vec![0, 1], vec![-1, 0]]).unwrap(), vec![1, 0, 1]);
        let a = vec![vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![-1, 0, 1, 1], vec![0, -1, 1, 2]];
        assert_eq!(charpoly(&a).unwrap(), vec![1, -3, 3, -3, 1]);
    }

    #[test]
    fn cyclotomics() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
        assert!(has_cyclotomic_factor(&[1, 0, 1]));
        assert!(!has_cyclotomic_factor(&[1, -3, 1]));
    }

    #[test]
    fn squarefree_and_gcd() {
        assert!(is_squarefree(&[1, -3, 1]).unwrap());
        assert!(!is_squarefree(&[1, -2, 1]).unwrap());
        assert_eq!(gcd_poly(&[-1, 0, 1], &[1, 2, 1]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn small_factorizations() {
        // x^4 + 1 is reducible mod every prime
        assert_eq!(is_irreducible_q(&[1, 0, 0, 0, 1]).unwrap(), Some(true));
        assert_eq!(factor_small(&[1, 0, 0, 0, 1]).unwrap().unwrap().len(), 1);
        // (x^2 + x + 1)(x^2 - 3x + 1)
        let f = vec![1, -2, -1, -2, 1];
        assert_eq!(factor_small(&f).unwrap().unwrap(), vec![vec![1, -3, 1], vec![1, 1, 1]]);
        assert_eq!(factor_small(&[2, -3, 1]).unwrap().unwrap(), vec![vec![-2, 1], vec![-1, 1]]);
    }
}

//! Independent oracles: an intertwiner built by averaging over the
//! Heisenberg group, a hand-written Schrödinger model, and character sums
//! evaluated through Euler's criterion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weil_core::gfq::FieldCtx;
use weil_core::heiwei::{HeisenbergElem, Operator, WeilRep};
use weil_core::spectra::decompose;
use weil_core::symp::{build_maximal_torus, SympGroupElement, SympSpace, TorusDescriptor};

fn euler(a: i64, p: u64) -> i64 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let (mut r, mut b, mut e) = (1u64, a, (p - 1) / 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

fn psi(t: i64, p: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t.rem_euclid(p as i64) as f64 / p as f64)
}

/// `pi(a + b) f(x) = psi(b.x + a.b / 2) f(x + a)` on functions of `F_p^n`,
/// with integer vectors and little-endian indexing.
fn schrodinger(p: u64, n: usize, v: &[i64]) -> Vec<Vec<Complex64>> {
    let dim = p.pow(n as u32) as usize;
    let half = (p as i64 + 1) / 2;
    let (a, b) = v.split_at(n);
    let digits = |mut i: usize| -> Vec<i64> {
        (0..n)
            .map(|_| {
                let d = (i % p as usize) as i64;
                i /= p as usize;
                d
            })
            .collect()
    };
    let index = |x: &[i64]| -> usize {
        x.iter().rev().fold(0usize, |acc, &d| acc * p as usize + d.rem_euclid(p as i64) as usize)
    };
    let ab: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (row, line) in m.iter_mut().enumerate() {
        let x = digits(row);
        let bx: i64 = b.iter().zip(&x).map(|(s, t)| s * t).sum();
        let shifted: Vec<i64> = x.iter().zip(a).map(|(s, t)| s + t).collect();
        line[index(&shifted)] = psi(bx + half * ab, p);
    }
    m
}

fn all_vectors(p: u64, len: usize) -> Vec<Vec<i64>> {
    (0..p.pow(len as u32))
        .map(|mut i| {
            (0..len)
                .map(|_| {
                    let d = (i % p) as i64;
                    i /= p;
                    d
                })
                .collect()
        })
        .collect()
}

fn apply_int(g: &SympGroupElement, v: &[i64]) -> Vec<i64> {
    let d = v.len();
    let m = g.mat().data();
    (0..d).map(|i| (0..d).map(|j| m[i * d + j].index() as i64 * v[j]).sum()).collect()
}

/// The unitary `U` with `U pi(v) U^* = pi(g v)`, scaled so that
/// `Tr U = sigma((-1)^N det(g - I))`. Built as
/// `sum_v pi(g v) E_{jk} pi(-v)` for a matrix unit `E_{jk}` that survives.
fn twirled(p: u64, n: usize, g: &SympGroupElement, det: i64) -> Vec<Vec<Complex64>> {
    let dim = p.pow(n as u32) as usize;
    let vs = all_vectors(p, 2 * n);
    let mats: Vec<_> = vs.iter().map(|v| (schrodinger(p, n, &apply_int(g, v)), schrodinger(p, n, &neg(v)))).collect();
    for (j, k) in (0..dim).flat_map(|j| (0..dim).map(move |k| (j, k))) {
        let mut u = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (a, b) in &mats {
            for (r, row) in u.iter_mut().enumerate() {
                let left = a[r][j];
                if left.norm() == 0.0 {
                    continue;
                }
                for (c, x) in row.iter_mut().enumerate() {
                    *x += left * b[k][c];
                }
            }
        }
        let scale: f64 = u.iter().map(|r| r.iter().map(|x| x.norm_sqr()).sum::<f64>()).sum::<f64>() / dim as f64;
        if scale < 1e-6 {
            continue;
        }
        let tr: Complex64 = (0..dim).map(|i| u[i][i]).sum::<Complex64>() / scale.sqrt();
        let sign = if n % 2 == 0 { 1 } else { -1 };
        let want = euler(sign * det, p) as f64;
        let phase = want / tr;
        return u.into_iter().map(|r| r.into_iter().map(|x| x / scale.sqrt() * phase).collect()).collect();
    }
    unreachable!("some matrix unit has a non-zero twirl")
}

fn neg(v: &[i64]) -> Vec<i64> {
    v.iter().map(|x| -x).collect()
}

fn dist(a: &Operator, b: &[Vec<Complex64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, row) in b.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            d = d.max((a.data()[i * row.len() + j] - x).norm());
        }
    }
    d
}

#[test]
fn schrodinger_model_matches() {
    for (p, n) in [(5, 1), (7, 1), (3, 2)] {
        let f = FieldCtx::prime(p).unwrap();
        let sp = SympSpace::standard(&f, n).unwrap();
        let rep = WeilRep::new(&sp).unwrap();
        for v in all_vectors(p, 2 * n) {
            let elems = v.iter().map(|&x| f.from_int(x)).collect();
            let op = rep.pi_op(&HeisenbergElem::translation(elems));
            assert!(dist(&op, &schrodinger(p, n, &v)) < 1e-12, "p = {p}, v = {v:?}");
        }
    }
}

#[test]
fn weil_operators_match_twirled_intertwiner() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (p, n, count) in [(5u64, 1usize, 12), (7, 1, 12), (11, 1, 6), (3, 2, 4), (5, 2, 2)] {
        let f = FieldCtx::prime(p).unwrap();
        let sp = SympSpace::standard(&f, n).unwrap();
        let rep = WeilRep::new(&sp).unwrap();
        let mut done = 0;
        while done < count {
            let g = sp.random_element(&mut rng);
            let det = g.det_minus_identity();
            if det.is_zero() {
                continue;
            }
            let oracle = twirled(p, n, &g, det.index() as i64);
            let d = dist(&rep.build(&g).unwrap(), &oracle);
            assert!(d < 1e-9, "p = {p}, N = {n}: distance {d}");
            done += 1;
        }
    }
}

/// On a torus of SL2(F_p) every non-identity element is generic, so
/// `m_chi = (p + sum_{t != 1} conj(chi(t)) sigma(-det(t - I))) / |T|`.
#[test]
fn sl2_multiplicities_from_character_sums() {
    for p in [5u64, 7, 11, 13, 17, 19] {
        let f = FieldCtx::prime(p).unwrap();
        let sp = SympSpace::standard(&f, 1).unwrap();
        let rep = WeilRep::new(&sp).unwrap();
        for spec in ["split", "inert"] {
            let t = build_maximal_torus(&sp, &TorusDescriptor::parse(spec, &f, 1).unwrap()).unwrap();
            let dec = decompose(&rep, &t).unwrap();
            for (chi, &m) in dec.characters().iter().zip(dec.multiplicities()) {
                let mut sum = Complex64::new(p as f64, 0.0);
                for (i, g) in t.elements().iter().enumerate().skip(1) {
                    let s = euler(-(g.det_minus_identity().index() as i64), p) as f64;
                    sum += chi.value(&t, i).conj() * s;
                }
                let want = sum / t.order() as f64;
                assert!((want.re - m as f64).abs() < 1e-9 && want.im.abs() < 1e-9, "p = {p} {spec} {chi}: {want}");
            }
        }
    }
}

#[test]
fn legendre_symbol_agrees_with_euler() {
    for p in [3u64, 5, 7, 11, 13, 101] {
        let f = FieldCtx::prime(p).unwrap();
        for a in 1..p {
            assert_eq!(f.legendre_sigma(f.elem(a)).unwrap() as i64, euler(a as i64, p));
        }
    }
}

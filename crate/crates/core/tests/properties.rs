use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weil_core::gfq::FieldCtx;
use weil_core::heiwei::{heisenberg_compose, HeisenbergElem, WeilRep};
use weil_core::spectra::torus_characters;
use weil_core::sums::{bound_report, is_admissible, BoundOptions, VRange};
use weil_core::symp::{build_maximal_torus, SympSpace, TorusDescriptor};

const FIELDS: [(u64, usize); 5] = [(3, 1), (3, 3), (5, 2), (7, 1), (11, 2)];

fn heis(f: &FieldCtx, n: usize, seed: u64) -> HeisenbergElem {
    let q = f.order();
    let v = (0..2 * n as u64).map(|i| f.elem((seed >> (5 * i)) % q)).collect();
    HeisenbergElem::new(v, f.elem((seed >> 40) % q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(which in 0usize..FIELDS.len(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (p, m) = FIELDS[which];
        let f = FieldCtx::new(p, m).unwrap();
        let q = f.order();
        let (a, b, c) = (f.elem(a % q), f.elem(b % q), f.elem(c % q));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
        prop_assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
        prop_assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
        prop_assert_eq!(f.pow(a, q as u128), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            prop_assert_eq!(f.abs_norm(f.mul(a, b)), f.abs_norm(a) * f.abs_norm(b) % p);
        }
    }

    #[test]
    fn random_elements_are_symplectic(which in 0usize..FIELDS.len(), n in 1usize..=2, seed in any::<u64>()) {
        let (p, m) = FIELDS[which];
        let f = FieldCtx::new(p, m).unwrap();
        let sp = SympSpace::standard(&f, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sp.random_element(&mut rng);
        let (u, v) = (sp.random_vector(&mut rng), sp.random_vector(&mut rng));
        prop_assert_eq!(sp.omega(&g.apply(&u), &g.apply(&v)), sp.omega(&u, &v));
        prop_assert!(g.mul(&g.inverse(&sp)).is_identity());
    }

    #[test]
    fn heisenberg_associative_and_pi_multiplicative(
        case in prop::sample::select(vec![(5u64, 1usize), (7, 1), (3, 2)]),
        s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(),
    ) {
        let (p, n) = case;
        let f = FieldCtx::prime(p).unwrap();
        let sp = SympSpace::standard(&f, n).unwrap();
        let (a, b, c) = (heis(&f, n, s1), heis(&f, n, s2), heis(&f, n, s3));
        let left = heisenberg_compose(&sp, &heisenberg_compose(&sp, &a, &b), &c);
        let right = heisenberg_compose(&sp, &a, &heisenberg_compose(&sp, &b, &c));
        prop_assert_eq!(&left, &right);
        let rep = WeilRep::new(&sp).unwrap();
        let prod = rep.pi_op(&a).mul(&rep.pi_op(&b));
        prop_assert!(prod.max_abs_diff(&rep.pi_op(&heisenberg_compose(&sp, &a, &b))) < 1e-12);
    }

    #[test]
    fn weil_is_a_homomorphism(
        case in prop::sample::select(vec![(5u64, 1usize, 1usize), (3, 2, 1), (3, 1, 2), (5, 1, 2)]),
        seed in any::<u64>(),
    ) {
        let (p, m, n) = case;
        let f = FieldCtx::new(p, m).unwrap();
        let sp = SympSpace::standard(&f, n).unwrap();
        let rep = WeilRep::new(&sp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, h) = (sp.random_element(&mut rng), sp.random_element(&mut rng));
        let lhs = rep.build(&g).unwrap().mul(&rep.build(&h).unwrap());
        prop_assert!(lhs.max_abs_diff(&rep.build(&g.mul(&h)).unwrap()) < rep.tol());
    }

    #[test]
    fn sl2_sums_respect_the_sharp_bound(p in prop::sample::select(vec![29u64, 31, 37, 41]), split: bool, a: u64, b: u64) {
        let f = FieldCtx::prime(p).unwrap();
        let sp = SympSpace::standard(&f, 1).unwrap();
        let desc = TorusDescriptor::parse(if split { "split" } else { "inert" }, &f, 1).unwrap();
        let t = build_maximal_torus(&sp, &desc).unwrap();
        let v = vec![f.elem(a % p), f.elem(b % p)];
        prop_assume!(v.iter().any(|x| !x.is_zero()));
        // split tori fix the two coordinate lines; inert tori fix no line
        prop_assert_eq!(is_admissible(&t, &v), !split || v.iter().all(|x| !x.is_zero()));
        prop_assume!(is_admissible(&t, &v));
        let r = bound_report(&sp, &t, &BoundOptions { range: VRange::Explicit(vec![v]), keep_rows: false }).unwrap();
        prop_assert!(r.max_abs <= 2.0 * (p as f64).sqrt() + 1e-8);
    }
}

#[test]
fn torus_characters_are_orthogonal() {
    let f = FieldCtx::prime(5).unwrap();
    let sp = SympSpace::standard(&f, 2).unwrap();
    for blocks in TorusDescriptor::all_types(2) {
        let t = build_maximal_torus(&sp, &TorusDescriptor::new(&f, blocks)).unwrap();
        let chars = torus_characters(&t);
        assert_eq!(chars.len() as u64, t.order());
        for (i, x) in chars.iter().enumerate() {
            for (j, y) in chars.iter().enumerate().take(i + 1) {
                let s: num_complex::Complex64 =
                    (0..t.order() as usize).map(|k| x.value(&t, k) * y.value(&t, k).conj()).sum();
                let want = if i == j { t.order() as f64 } else { 0.0 };
                assert!((s - want).norm() < 1e-8, "{x} vs {y}");
            }
        }
    }
}

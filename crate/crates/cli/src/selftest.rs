use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use weil_core::gfq::FieldCtx;
use weil_core::Error;
use weil_core::heiwei::{norm, HeisenbergElem, WeilRep};
use weil_core::spectra::{decompose, expected_multiplicity_for_kinds};
use weil_core::sums::{bound_report, BoundOptions, VRange};
use weil_core::symp::{build_maximal_torus, BlockKind, SympSpace, TorusDescriptor};

use crate::config::RunConfig;
use crate::report::Reporter;
use crate::Fail;

#[derive(Serialize, Clone, Debug)]
struct CheckRow {
    check: &'static str,
    q: u64,
    #[serde(rename = "N")]
    n: usize,
    cases: usize,
    failures: usize,
    /// Largest defect divided by its tolerance.
    worst: f64,
}

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn record(&mut self, defect: f64, tol: f64) {
        self.cases += 1;
        self.worst = self.worst.max(defect / tol);
        self.failures += usize::from(defect > tol);
    }
}

fn euler(a: u64, p: u64) -> f64 {
    let mut r = 1u64;
    let (mut b, mut e) = (a % p, (p - 1) / 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1.0
    } else {
        -1.0
    }
}

const NAMES: [&str; 7] =
    ["egorov", "homomorphism", "inverse", "unitarity", "trace_formula", "orthogonality", "parseval"];

fn invariants(p: u64, n: usize, samples: usize, seed: u64) -> Result<Vec<CheckRow>, Fail> {
    let f = FieldCtx::prime(p)?;
    let sp = SympSpace::standard(&f, n)?;
    let rep = WeilRep::new(&sp)?;
    let dim = rep.dim();
    let tol = rep.tol();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p << 8) ^ n as u64);
    let mut t: [Tally; 7] = Default::default();
    for _ in 0..samples {
        let g = sp.random_element(&mut rng);
        let g2 = sp.random_element(&mut rng);
        let h = HeisenbergElem::new(sp.random_vector(&mut rng), f.elem(rng.gen_range(0..p)));
        let rg = rep.build(&g)?;
        let conj = rg.mul(&rep.pi_op(&h)).mul(&rg.adjoint());
        t[0].record(conj.max_abs_diff(&rep.pi_op(&h.act(&g))), tol);
        t[1].record(rg.mul(&rep.build(&g2)?).max_abs_diff(&rep.build(&g.mul(&g2))?), tol);
        t[2].record(rep.build(&g.inverse(&sp))?.max_abs_diff(&rg.adjoint()), tol);
        t[3].record(rg.unitarity_defect(), tol);
        let d = g.det_minus_identity();
        if !d.is_zero() {
            // sigma((-1)^N det(g - I)) by Euler's criterion
            let a = if n % 2 == 0 { d.index() } else { p - d.index() };
            t[4].record((rg.trace() - euler(a, p)).norm(), tol);
        }
        let v = sp.random_vector(&mut rng);
        let w = if rng.gen_bool(0.5) { v.clone() } else { sp.random_vector(&mut rng) };
        let pv = rep.pi_op(&HeisenbergElem::translation(v.clone()));
        let pw = rep.pi_op(&HeisenbergElem::translation(w.clone()));
        let want = if v == w { dim as f64 } else { 0.0 };
        t[5].record((pv.mul(&pw.adjoint()).trace() - want).norm(), tol);
        let phi: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let r = norm(&phi);
        let phi: Vec<Complex64> = phi.iter().map(|x| x / r).collect();
        let total: f64 = rep.wigner_table(&phi).iter().map(|x| x.norm_sqr()).sum();
        t[6].record((total - dim as f64).abs(), tol);
    }
    Ok(NAMES
        .iter()
        .zip(t)
        .map(|(&check, t)| CheckRow { check, q: p, n, cases: t.cases, failures: t.failures, worst: t.worst })
        .collect())
}

fn torus_checks(p: u64, n: usize, seed: u64) -> Result<Vec<CheckRow>, Fail> {
    let f = FieldCtx::prime(p)?;
    let sp = SympSpace::standard(&f, n)?;
    let rep = WeilRep::new(&sp)?;
    let mut mult = Tally::default();
    let mut bound = Tally::default();
    for blocks in TorusDescriptor::all_types(n) {
        let desc = TorusDescriptor::new(&f, blocks);
        let t = build_maximal_torus(&sp, &desc)?;
        let kinds: Vec<BlockKind> = desc.blocks.iter().map(|b| b.kind).collect();
        let dec = decompose(&rep, &t)?;
        for (chi, &m) in dec.characters().iter().zip(dec.multiplicities()) {
            mult.record((m as f64 - expected_multiplicity_for_kinds(&kinds, chi) as f64).abs(), 0.5);
        }
        let opts = BoundOptions { range: VRange::Auto { seed, samples: 256 }, keep_rows: false };
        // split blocks over F_3 are {+-I}: no module structure, no bound
        match bound_report(&sp, &t, &opts) {
            Ok(r) => bound.record(r.max_ratio, 1.0 + 1e-9),
            Err(Error::NotMaximal(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let row = |check, t: Tally| CheckRow { check, q: p, n, cases: t.cases, failures: t.failures, worst: t.worst };
    Ok(vec![row("multiplicity", mult), row("sum_bound", bound)])
}

pub fn run(cfg: &RunConfig, rep: &Reporter) -> Result<String, Fail> {
    let suite: &[(u64, usize)] =
        if cfg.quick { &[(5, 1), (7, 1)] } else { &[(5, 1), (7, 1), (3, 2), (5, 2), (7, 2)] };
    let parts: Vec<Vec<CheckRow>> = suite
        .par_iter()
        .map(|&(p, n)| {
            let mut rows = invariants(p, n, cfg.samples, cfg.seed)?;
            rows.extend(torus_checks(p, n, cfg.seed)?);
            Ok(rows)
        })
        .collect::<Result<_, Fail>>()?;
    let rows: Vec<CheckRow> = parts.into_iter().flatten().collect();
    rep.csv(&rows)?;
    rep.json(&rows)?;
    if let Some(bad) = rows.iter().find(|r| r.failures > 0) {
        return Err(Fail::Violation(format!("{bad:?}")));
    }
    let cases: usize = rows.iter().map(|r| r.cases).sum();
    Ok(format!("{} checks, {cases} cases, all passed", rows.len()))
}

//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weil_core::catmap::{
    cat_map, density_test_element, hecke_que_experiment, rank_density_sweep, sieve_odd_primes,
    statistical_state_experiment, QueOptions,
};
use weil_core::gfq::FieldCtx;
use weil_core::heiwei::{norm, restrict_to_extension, HeisenbergElem, RestrictionOptions, WeilRep};
use weil_core::spectra::{
    claim_rest_identity, decompose, expected_multiplicity_for_kinds, odd_prime_powers, sigma_character,
};
use weil_core::sums::{bound_report, BoundOptions};
use weil_core::symp::{build_maximal_torus, module_structure, BlockKind, SympSpace, Torus, TorusDescriptor};
use weil_core::Result;

fn torus(p: u64, n: usize, spec: &str) -> Result<(SympSpace, Torus, TorusDescriptor)> {
    let f = FieldCtx::prime(p)?;
    let sp = SympSpace::standard(&f, n)?;
    let desc = TorusDescriptor::parse(spec, &f, n)?;
    let t = build_maximal_torus(&sp, &desc)?;
    Ok((sp, t, desc))
}

fn legendre(a: i64, p: u64) -> i8 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let mut r = 1u64;
    let mut b = a;
    let mut e = (p - 1) / 2;
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

fn two_dim_bound() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut ok = true;
    for p in [5, 7, 11, 13, 17, 19, 23] {
        for spec in ["split", "inert"] {
            let (sp, t, _) = torus(p, 1, spec)?;
            let r = bound_report(&sp, &t, &BoundOptions::default())?;
            let bound = 2.0 * (p as f64).sqrt();
            ok &= r.vectors == (p * p - 1) as usize && r.max_abs <= bound + 1e-8;
            worst = worst.max(r.max_abs / bound);
        }
    }
    Ok((ok, format!("max |c_chi| / 2 sqrt(p) = {worst:.6}")))
}

fn multiplicities() -> Result<(bool, String)> {
    let mut mismatches = 0;
    let mut checked = 0;
    for p in [5, 7, 11, 13] {
        for (spec, sigma_m) in [("split", 2), ("inert", 0)] {
            let (sp, t, _) = torus(p, 1, spec)?;
            let dec = decompose(&WeilRep::new(&sp)?, &t)?;
            let sigma = sigma_character(&t).expect("cyclic torus of even order");
            for (chi, &m) in dec.characters().iter().zip(dec.multiplicities()) {
                let want = if *chi == sigma { sigma_m } else { 1 };
                checked += 1;
                mismatches += usize::from(m != want);
            }
        }
    }
    for p in [3, 5, 7] {
        let f = FieldCtx::prime(p)?;
        let sp = SympSpace::standard(&f, 2)?;
        let rep = WeilRep::new(&sp)?;
        for blocks in TorusDescriptor::all_types(2) {
            let desc = TorusDescriptor::new(&f, blocks);
            let t = build_maximal_torus(&sp, &desc)?;
            let kinds: Vec<BlockKind> = desc.blocks.iter().map(|b| b.kind).collect();
            let dec = decompose(&rep, &t)?;
            for (chi, &m) in dec.characters().iter().zip(dec.multiplicities()) {
                checked += 1;
                mismatches += usize::from(m as u64 != expected_multiplicity_for_kinds(&kinds, chi));
            }
        }
    }
    Ok((mismatches == 0, format!("{checked} characters, {mismatches} mismatches")))
}

fn self_reducibility() -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    for p in [3, 5, 7] {
        let (sp, t, _) = torus(p, 2, "irreducible")?;
        let ms = module_structure(&t)?;
        let rep = WeilRep::new(&sp)?;
        let samples = if p == 5 { 50 } else { 0 };
        let r = restrict_to_extension(&rep, &ms, &t, &RestrictionOptions { samples, seed: 11 })?;
        let exhaustive = r.trace_checked as u64 == t.order() - 1;
        ok &= exhaustive && r.trace_mismatches.is_empty() && r.psi_mismatches == 0;
        if p == 5 {
            let d = r.operator_distance.unwrap_or(f64::INFINITY);
            ok &= r.operator_samples == 50 && d <= 1e-8 * 25.0;
            notes.push(format!("q=5 operator distance {d:.2e}"));
        }
        notes.push(format!("q={p}: {} elements, {} mismatches", r.trace_checked, r.trace_mismatches.len()));
    }
    Ok((ok, notes.join("; ")))
}

fn sharpening() -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    for p in [3, 5, 7] {
        let (sp, t, _) = torus(p, 2, "irreducible")?;
        let r = bound_report(&sp, &t, &BoundOptions::default())?;
        let sharp = 2.0 * p as f64;
        ok &= r.rank == 1 && r.max_abs <= sharp + 1e-8;
        notes.push(format!("p={p}: max {:.4}, /2p {:.4}, /4p {:.4}", r.max_abs, r.max_abs / sharp, r.max_abs / (2.0 * sharp)));
    }
    Ok((ok, notes.join("; ")))
}

fn claim_rest() -> Result<(bool, String)> {
    let mut failures = 0;
    let mut fields = 0;
    for (p, m) in odd_prime_powers(199) {
        let r = claim_rest_identity(p, m)?;
        failures += r.failures.len();
        fields += 1;
    }
    Ok((failures == 0, format!("{fields} fields, {failures} failures")))
}

fn invariant_suite() -> Result<(bool, String)> {
    let mut failures = 0;
    let mut worst = 0.0f64;
    for (p, n) in [(5u64, 1usize), (7, 1), (5, 2)] {
        let f = FieldCtx::prime(p)?;
        let sp = SympSpace::standard(&f, n)?;
        let rep = WeilRep::new(&sp)?;
        let dim = rep.dim();
        let tol = 1e-9 * dim as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(p * 10 + n as u64);
        let mut check = |d: f64| {
            worst = worst.max(d / tol);
            failures += usize::from(d > tol);
        };
        for _ in 0..100 {
            let g = sp.random_element(&mut rng);
            let g2 = sp.random_element(&mut rng);
            let h = HeisenbergElem::new(sp.random_vector(&mut rng), f.elem(rng.gen_range(0..p)));
            let rg = rep.build(&g)?;
            let rg2 = rep.build(&g2)?;
            // Egorov
            check(rg.mul(&rep.pi_op(&h)).mul(&rg.adjoint()).max_abs_diff(&rep.pi_op(&h.act(&g))));
            // homomorphism and inverse
            check(rg.mul(&rg2).max_abs_diff(&rep.build(&g.mul(&g2))?));
            check(rep.build(&g.inverse(&sp))?.max_abs_diff(&rg.adjoint()));
            // unitarity
            check(rg.unitarity_defect());
            // trace formula at generic elements
            let d = g.det_minus_identity();
            if !d.is_zero() {
                let sign = if n % 2 == 0 { 1 } else { -1 };
                let s = legendre(sign * d.index() as i64, p) as f64;
                check((rg.trace() - Complex64::new(s, 0.0)).norm());
            }
            // operator basis orthogonality
            let v = sp.random_vector(&mut rng);
            let w = if rng.gen_bool(0.5) { v.clone() } else { sp.random_vector(&mut rng) };
            let a = rep.pi_op(&HeisenbergElem::translation(v.clone()));
            let b = rep.pi_op(&HeisenbergElem::translation(w.clone()));
            let want = if v == w { dim as f64 } else { 0.0 };
            check((a.mul(&b.adjoint()).trace() - want).norm());
            // Parseval
            let phi: Vec<Complex64> =
                (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let nr = norm(&phi);
            let phi: Vec<Complex64> = phi.iter().map(|x| x / nr).collect();
            let total: f64 = rep.wigner_table(&phi).iter().map(|x| x.norm_sqr()).sum();
            check((total - dim as f64).abs());
        }
    }
    Ok((failures == 0, format!("{failures} failures, worst defect {worst:.3} tol")))
}

fn cat_primes() -> Vec<u64> {
    sieve_odd_primes(97).into_iter().filter(|&p| p > 5).collect()
}

fn cat_map_que() -> Result<(bool, String)> {
    let a = cat_map();
    let mut ok = true;
    let mut trend = Vec::new();
    for p in cat_primes() {
        let out = hecke_que_experiment(&a, p, &QueOptions::default())?;
        let strict = out.strict_max_ratio.unwrap_or(f64::INFINITY);
        ok &= out.row.skipped_reason.is_empty() && out.violations.is_empty() && strict <= 1.0 + 1e-9;
        ok &= out.observables.iter().all(|o| o.skipped || o.max_ratio <= 1.0 + 1e-9);
        trend.push(format!("{p}:{strict:.3}"));
    }
    Ok((ok, format!("max ratio by p [{}]", trend.join(" "))))
}

fn statistical_states() -> Result<(bool, String)> {
    let a = cat_map();
    let mut violations = 0;
    let mut worst_trace = 0.0f64;
    let mut worst = 0.0f64;
    for p in cat_primes() {
        let out = statistical_state_experiment(&a, p, &QueOptions::default())?;
        violations += out.violations + usize::from(!out.skipped_reason.is_empty());
        for r in &out.rows {
            worst_trace = worst_trace.max(r.trace_error);
            worst = worst.max(r.max_ratio);
        }
    }
    Ok((
        violations == 0 && worst_trace <= 1e-10,
        format!("{violations} violations, max ratio {worst:.4}, max |Tr D - 1| {worst_trace:.1e}"),
    ))
}

fn density() -> Result<(bool, String)> {
    let a = density_test_element();
    let g = a.genericity()?;
    let r = rank_density_sweep(&a, 100_000)?;
    let d = |m: &std::collections::BTreeMap<usize, f64>, k| m.get(&k).copied().unwrap_or(0.0);
    let ok = g.strongly_generic
        && (d(&r.delta, 1) - 0.5).abs() <= 0.05
        && (d(&r.delta, 2) - 0.5).abs() <= 0.05
        && (d(&r.delta, 1) - d(&r.delta_half, 1)).abs() <= 0.05;
    Ok((
        ok,
        format!(
            "{} primes: delta(1) = {:.4}, delta(2) = {:.4}; at x/2: {:.4}, {:.4}",
            r.primes_used,
            d(&r.delta, 1),
            d(&r.delta, 2),
            d(&r.delta_half, 1),
            d(&r.delta_half, 2)
        ),
    ))
}

fn main() -> ExitCode {
    type Check = fn() -> Result<(bool, String)>;
    let criteria: [(&str, Check); 9] = [
        ("two-dimensional sharp bound", two_dim_bound),
        ("multiplicity formulas", multiplicities),
        ("self-reducibility", self_reducibility),
        ("sharpened bound for irreducible tori", sharpening),
        ("norm-one identity", claim_rest),
        ("representation invariants", invariant_suite),
        ("cat map Hecke QUE", cat_map_que),
        ("statistical states", statistical_states),
        ("rank density", density),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!(
            "criterion {} {name}: {} ({detail}) [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Frequencies of the symplectic rank of `A mod p` over primes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{intpoly, LatticeAutomorphism};
use crate::error::Result;
use crate::gfq::FieldCtx;
use crate::symp::rank_from_charpoly;

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub p: u64,
    pub r_p: Option<usize>,
    pub skipped_reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub x: u64,
    pub primes_used: usize,
    pub primes_skipped: usize,
    pub counts: BTreeMap<usize, usize>,
    /// `delta(r)` over odd primes `p <= x`.
    pub delta: BTreeMap<usize, f64>,
    /// The same over `p <= x / 2`.
    pub delta_half: BTreeMap<usize, f64>,
    #[serde(skip)]
    pub rows: Vec<DensityRow>,
}

/// Odd primes up to `x`.
pub fn sieve_odd_primes(x: u64) -> Vec<u64> {
    let n = x as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        if i > 2 {
            out.push(i as u64);
        }
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn frequencies(rows: &[DensityRow], x: u64) -> BTreeMap<usize, f64> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.p <= x) {
        if let Some(rank) = r.r_p {
            *counts.entry(rank).or_default() += 1;
        }
    }
    let total: usize = counts.values().sum();
    counts.into_iter().map(|(r, c)| (r, c as f64 / total.max(1) as f64)).collect()
}

/// The symplectic rank `r_p` read off the factorization of the
/// characteristic polynomial mod `p`, for every odd prime `p <= x` not
/// dividing the discriminant.
pub fn rank_density_sweep(a: &LatticeAutomorphism, x: u64) -> Result<DensityReport> {
    let primes = sieve_odd_primes(x);
    let cp = a.charpoly().to_vec();
    let rows: Vec<DensityRow> = primes
        .par_iter()
        .map(|&p| {
            let f = FieldCtx::prime(p)?;
            if a.bad_prime(&f) {
                return Ok(DensityRow { p, r_p: None, skipped_reason: "p divides the discriminant".into() });
            }
            let specs = rank_from_charpoly(&f, &intpoly::reduce(&f, &cp))?;
            Ok(DensityRow { p, r_p: Some(specs.len()), skipped_reason: String::new() })
        })
        .collect::<Result<_>>()?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &rows {
        if let Some(rank) = r.r_p {
            *counts.entry(rank).or_default() += 1;
        }
    }
    let used = counts.values().sum();
    Ok(DensityReport {
        x,
        primes_used: used,
        primes_skipped: rows.len() - used,
        counts,
        delta: frequencies(&rows, x),
        delta_half: frequencies(&rows, x / 2),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catmap::{cat_map, density_test_element};

    #[test]
    fn sieve() {
        assert_eq!(sieve_odd_primes(20), vec![3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn plane_rank_is_one() {
        let r = rank_density_sweep(&cat_map(), 500).unwrap();
        assert_eq!(r.delta.get(&1), Some(&1.0));
        assert!(r.rows.iter().any(|x| x.p == 5 && x.r_p.is_none()));
    }

    #[test]
    fn rank_two_iff_five_is_a_square() {
        let r = rank_density_sweep(&density_test_element(), 400).unwrap();
        for row in r.rows.iter().filter(|x| x.r_p.is_some()) {
            let f = FieldCtx::prime(row.p).unwrap();
            let expect = if f.is_square(f.from_int(5)) { 2 } else { 1 };
            assert_eq!(row.r_p, Some(expect), "p = {}", row.p);
        }
        let total: f64 = r.delta.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

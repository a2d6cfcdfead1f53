//! Hecke eigenstates of the quantized `A` and their Wigner distributions.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::LatticeAutomorphism;
use crate::error::{Error, Result};
use crate::gfq::{is_prime, FieldCtx, FieldElem};
use crate::heiwei::{inner, Operator, WeilRep};
use crate::linalg::{vec_from_index, FqMatrix};
use crate::spectra::{decompose, EigenDecomposition, MAX_DECOMPOSE_DIM};
use crate::symp::{centralizer_torus, module_structure, rank_from_charpoly, SympModuleStructure, SympSpace, Torus};

const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default)]
pub struct QueOptions {
    /// `xi` ranges over integer vectors with entries in `[0, min(xi_max, p))`.
    pub xi_max: Option<u64>,
}

/// One row per prime.
#[derive(Clone, Debug, Serialize)]
pub struct QueRow {
    pub p: u64,
    pub r_p: Option<usize>,
    pub torus_order: Option<u64>,
    pub max_wigner_ratio: Option<f64>,
    pub n_eigenstates: usize,
    pub skipped_reason: String,
}

impl QueRow {
    fn skipped(p: u64, reason: impl Into<String>) -> Self {
        QueRow { p, r_p: None, torus_order: None, max_wigner_ratio: None, n_eigenstates: 0, skipped_reason: reason.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QueViolation {
    pub chi: String,
    pub state: usize,
    pub xi: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservableRow {
    pub p: u64,
    pub name: String,
    /// Max over eigenstates of `|<phi| pi(f) phi> - a_0| / sum_{xi != 0} |a_xi| m_chi B(xi)`.
    pub max_ratio: f64,
    pub skipped: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QueOutcome {
    pub row: QueRow,
    /// Max of `|W| / B(xi)` for one-dimensional `H_chi`, and of
    /// `||P pi(xi) P|| / B(xi)` otherwise, with `B(xi)` the bound without the
    /// multiplicity factor.
    pub strict_max_ratio: Option<f64>,
    pub checked_xi: usize,
    /// `xi` whose orbit fails to span its support.
    pub excluded_xi: usize,
    pub violations: Vec<QueViolation>,
    pub observables: Vec<ObservableRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatRow {
    pub p: u64,
    /// `lambda = exp(2 pi i k / |T|)`.
    pub lambda_index: u64,
    pub m_lambda: usize,
    pub trace_error: f64,
    pub commutator: f64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatisticalOutcome {
    pub p: u64,
    pub skipped_reason: String,
    pub rows: Vec<StatRow>,
    pub max_multiplicity: usize,
    pub violations: usize,
}

/// A trigonometric polynomial `sum a_xi e(<xi, x>)` with real coefficients.
#[derive(Clone, Debug)]
pub struct Observable {
    pub name: &'static str,
    pub constant: f64,
    pub terms: Vec<(Vec<i64>, f64)>,
}

/// Three fixed test observables on the `2N`-torus.
pub fn test_observables(n: usize) -> Vec<Observable> {
    let d = 2 * n;
    let unit = |i: usize, c: i64| {
        let mut v = vec![0i64; d];
        v[i] = c;
        v
    };
    let pm = |v: Vec<i64>, a: f64| vec![(v.iter().map(|x| -x).collect(), a / 2.0), (v, a / 2.0)];
    let mut mixed = unit(0, 1);
    mixed[d - 1] = 1;
    let mut skew = unit(0, 1);
    skew[d - 1] = -2;
    vec![
        Observable { name: "cos(x1)", constant: 0.0, terms: pm(unit(0, 1), 1.0) },
        Observable {
            name: "cos(x1+xd)+cos(2xd)/2",
            constant: 0.0,
            terms: [pm(mixed, 1.0), pm(unit(d - 1, 2), 0.5)].concat(),
        },
        Observable {
            name: "1+cos(x1-2xd)+cos(3x1)/3",
            constant: 1.0,
            terms: [pm(skew, 1.0), pm(unit(0, 3), 1.0 / 3.0)].concat(),
        },
    ]
}

struct Setup {
    space: SympSpace,
    rep: WeilRep,
    torus: Torus,
    dec: EigenDecomposition,
    a_index: usize,
    rank: usize,
    // per block: 2 sqrt(p^{d_alpha}) / |T_alpha|
    block_bound: Vec<f64>,
    ms: SympModuleStructure,
    gen_of_block: Vec<usize>,
}

fn setup(a: &LatticeAutomorphism, p: u64) -> Result<std::result::Result<Setup, String>> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::BadPrime(p));
    }
    let n = a.half_dim();
    if p == 3 && n == 1 {
        return Ok(Err("F_3 in dimension 2 has no canonical Weil representation".into()));
    }
    let f = FieldCtx::prime(p)?;
    if a.bad_prime(&f) {
        return Ok(Err("p divides the discriminant".into()));
    }
    if crate::gfq::checked_pow(p, n).is_none_or(|d| d > MAX_DECOMPOSE_DIM as u64) {
        return Ok(Err(format!("p^N exceeds {MAX_DECOMPOSE_DIM}")));
    }
    let space = SympSpace::standard(&f, n)?;
    let am = a.reduce(&space)?;
    let torus = centralizer_torus(&space, &am)?;
    let ms = module_structure(&torus)?;
    let mut cheap = rank_from_charpoly(&f, &am.mat().charpoly())?;
    let mut full: Vec<_> = ms.blocks().iter().map(|b| b.spec()).collect();
    cheap.sort();
    full.sort();
    if cheap != full {
        return Err(Error::Consistency(format!("rank paths disagree at p = {p}: {cheap:?} vs {full:?}")));
    }
    let gb = ms.generator_blocks(&torus)?;
    let mut gen_of_block = vec![usize::MAX; ms.blocks().len()];
    for (i, &b) in gb.iter().enumerate() {
        gen_of_block[b] = i;
    }
    if gen_of_block.contains(&usize::MAX) {
        return Err(Error::Consistency("a block carries no torus generator".into()));
    }
    let block_bound = ms
        .blocks()
        .iter()
        .zip(&gen_of_block)
        .map(|(b, &g)| 2.0 * (b.field().order() as f64).sqrt() / torus.structure()[g] as f64)
        .collect();
    let rep = WeilRep::new(&space)?;
    let dec = decompose(&rep, &torus)?;
    let a_index = torus.index_of(&am).ok_or_else(|| Error::Consistency("A is not in T_A".into()))?;
    Ok(Ok(Setup { rank: ms.blocks().len(), space, rep, torus, dec, a_index, block_bound, ms, gen_of_block }))
}

// B(xi) without multiplicity, or None when xi = 0 or its orbit misses part
// of its support
fn xi_bound(s: &Setup, v: &[FieldElem]) -> Option<f64> {
    if v.iter().all(|e| e.is_zero()) {
        return None;
    }
    let k = s.space.ctx();
    let mut b = 1.0;
    for (alpha, blk) in s.ms.blocks().iter().enumerate() {
        let va = blk.project(v);
        if va.iter().all(|e| e.is_zero()) {
            continue;
        }
        let g = &s.torus.generators()[s.gen_of_block[alpha]];
        let dim = 2 * blk.degree();
        let mut rows = vec![va];
        for _ in 1..dim {
            let next = g.apply(rows.last().unwrap());
            rows.push(next);
        }
        let m = FqMatrix::from_fn(k, rows.len(), v.len(), |i, j| rows[i][j]);
        if m.rank() < dim {
            return None;
        }
        b *= s.block_bound[alpha];
    }
    Some(b)
}

fn window(s: &Setup, opts: &QueOptions) -> Vec<(u64, String, Option<f64>)> {
    let k = s.space.ctx();
    let p = k.characteristic();
    let w = opts.xi_max.unwrap_or(p).min(p);
    let d = s.space.dim();
    let count = w.pow(d as u32);
    (1..count)
        .into_par_iter()
        .map(|i| {
            let digits: Vec<u64> = (0..d).map(|j| i / w.pow(j as u32) % w).collect();
            let idx = digits.iter().rev().fold(0u64, |acc, &x| acc * p + x);
            let v = vec_from_index(k, idx, d);
            let label = digits.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
            (idx, label, xi_bound(s, &v))
        })
        .collect()
}

fn reduce_xi(p: u64, xi: &[i64]) -> u64 {
    xi.iter().rev().fold(0u64, |acc, &x| acc * p + x.rem_euclid(p as i64) as u64)
}

/// Wigner distributions of every Hecke eigenstate at prime `p` against the
/// per-block bound `m_chi prod_{alpha in S_xi} 2 sqrt(p^{d_alpha}) / |T_alpha|`.
pub fn hecke_que_experiment(a: &LatticeAutomorphism, p: u64, opts: &QueOptions) -> Result<QueOutcome> {
    let s = match setup(a, p)? {
        Ok(s) => s,
        Err(reason) => {
            return Ok(QueOutcome {
                row: QueRow::skipped(p, reason),
                strict_max_ratio: None,
                checked_xi: 0,
                excluded_xi: 0,
                violations: vec![],
                observables: vec![],
            })
        }
    };
    let xis = window(&s, opts);
    let checked: Vec<&(u64, String, Option<f64>)> = xis.iter().filter(|x| x.2.is_some()).collect();
    let excluded_xi = xis.len() - checked.len();
    let observables = test_observables(a.half_dim());
    let dim = s.rep.dim();

    struct ChiResult {
        max_ratio: f64,
        strict: f64,
        violations: Vec<QueViolation>,
        obs: Vec<Option<f64>>,
    }
    let per_chi: Vec<ChiResult> = (0..s.dec.characters().len())
        .into_par_iter()
        .filter(|&i| s.dec.multiplicity(i) > 0)
        .map(|i| {
            let chi = &s.dec.characters()[i];
            let basis = s.dec.basis(i);
            let m = basis.len() as f64;
            let mut res = ChiResult { max_ratio: 0.0, strict: 0.0, violations: vec![], obs: vec![Some(0.0); 3] };
            for (k, phi) in basis.iter().enumerate() {
                let table = s.rep.wigner_table(phi);
                for (idx, label, b) in &checked {
                    let bound = m * b.unwrap();
                    let w = table[*idx as usize].norm();
                    res.max_ratio = res.max_ratio.max(w / bound);
                    if basis.len() == 1 {
                        res.strict = res.strict.max(w / b.unwrap());
                    }
                    if w > bound + SLACK {
                        res.violations.push(QueViolation { chi: chi.label(), state: k, xi: label.clone(), value: w, bound });
                    }
                }
                for (o, slot) in observables.iter().zip(res.obs.iter_mut()) {
                    let mut val = Complex64::new(o.constant, 0.0);
                    let mut bound = 0.0;
                    let mut ok = true;
                    for (xi, c) in &o.terms {
                        let idx = reduce_xi(p, xi);
                        let v = vec_from_index(s.space.ctx(), idx, xi.len());
                        match xi_bound(&s, &v) {
                            Some(b) => {
                                val += table[idx as usize] * *c;
                                bound += c.abs() * m * b;
                            }
                            None => ok = false,
                        }
                    }
                    *slot = match (ok, *slot) {
                        (true, Some(cur)) => Some(cur.max((val.re - o.constant).hypot(val.im) / bound)),
                        _ => None,
                    };
                }
            }
            if basis.len() > 1 {
                for (idx, _, b) in &checked {
                    let v = vec_from_index(s.space.ctx(), *idx, s.space.dim());
                    let imgs: Vec<Vec<Complex64>> = basis.iter().map(|phi| s.rep.pi_apply(&v, phi)).collect();
                    let c = Operator::from_fn(basis.len(), |r, col| inner(&basis[r], &imgs[col]));
                    res.strict = res.strict.max(c.spectral_norm() / b.unwrap());
                }
            }
            res
        })
        .collect();

    let max_ratio = per_chi.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let strict = per_chi.iter().map(|r| r.strict).fold(0.0, f64::max);
    let violations = per_chi.iter().flat_map(|r| r.violations.clone()).collect();
    let obs_rows = observables
        .iter()
        .enumerate()
        .map(|(j, o)| {
            let worst = per_chi.iter().map(|r| r.obs[j]).try_fold(0.0f64, |acc, x| x.map(|x| acc.max(x)));
            ObservableRow {
                p,
                name: o.name.to_string(),
                max_ratio: worst.unwrap_or(0.0),
                skipped: worst.is_none(),
            }
        })
        .collect();
    Ok(QueOutcome {
        row: QueRow {
            p,
            r_p: Some(s.rank),
            torus_order: Some(s.torus.order()),
            max_wigner_ratio: Some(max_ratio),
            n_eigenstates: dim,
            skipped_reason: String::new(),
        },
        strict_max_ratio: Some(strict),
        checked_xi: checked.len(),
        excluded_xi,
        violations,
        observables: obs_rows,
    })
}

/// Density operators `D_lambda = P_lambda / m_lambda` of the eigenspaces of
/// `rho(A)`, against `max_chi m_chi prod_{alpha in S_xi} 2 sqrt(p^{d_alpha}) / |T_alpha|`.
pub fn statistical_state_experiment(
    a: &LatticeAutomorphism,
    p: u64,
    opts: &QueOptions,
) -> Result<StatisticalOutcome> {
    let s = match setup(a, p)? {
        Ok(s) => s,
        Err(reason) => {
            return Ok(StatisticalOutcome { p, skipped_reason: reason, rows: vec![], max_multiplicity: 0, violations: 0 })
        }
    };
    let xis = window(&s, opts);
    let m_max = s.dec.multiplicities().iter().copied().max().unwrap_or(0);
    let a_exps = s.torus.exponents(s.a_index);
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, chi) in s.dec.characters().iter().enumerate() {
        if s.dec.multiplicity(i) > 0 {
            groups.entry(chi.phase_index(&a_exps)).or_default().push(i);
        }
    }
    let rho_a = s.rep.weil_op(&s.torus.elements()[s.a_index])?;
    let dim = s.rep.dim();
    let rows: Vec<StatRow> = groups
        .par_iter()
        .map(|(&lambda, chis)| {
            let states: Vec<Vec<Complex64>> =
                chis.iter().flat_map(|&i| s.dec.basis(i).iter().cloned()).collect();
            let m = states.len() as f64;
            let d = Operator::from_orthonormal(dim, &states).scale(Complex64::new(1.0 / m, 0.0));
            let trace_error = (d.trace() - 1.0).norm();
            let commutator = rho_a.mul(&d).max_abs_diff(&d.mul(&rho_a));
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            for phi in &states {
                for (x, w) in acc.iter_mut().zip(s.rep.wigner_table(phi)) {
                    *x += w / m;
                }
            }
            let max_ratio = xis
                .iter()
                .filter_map(|(idx, _, b)| b.map(|b| acc[*idx as usize].norm() / (m_max as f64 * b)))
                .fold(0.0, f64::max);
            StatRow { p, lambda_index: lambda, m_lambda: states.len(), trace_error, commutator, max_ratio }
        })
        .collect();
    let tol = s.rep.tol();
    let violations = rows
        .iter()
        .filter(|r| r.max_ratio > 1.0 + SLACK || r.trace_error > 1e-10 || r.commutator > tol)
        .count();
    Ok(StatisticalOutcome { p, skipped_reason: String::new(), rows, max_multiplicity: m_max, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catmap::cat_map;

    #[test]
    fn cat_map_at_seven() {
        let out = hecke_que_experiment(&cat_map(), 7, &QueOptions::default()).unwrap();
        assert_eq!(out.row.torus_order, Some(8));
        assert_eq!(out.row.n_eigenstates, 7);
        assert!(out.violations.is_empty());
        assert!(out.strict_max_ratio.unwrap() <= 1.0 + 1e-9);
        assert_eq!(out.excluded_xi, 0);
        assert!(out.observables.iter().all(|o| o.skipped || o.max_ratio <= 1.0 + 1e-9));
    }

    #[test]
    fn skips_are_recorded() {
        let out = hecke_que_experiment(&cat_map(), 5, &QueOptions::default()).unwrap();
        assert_eq!(out.row.skipped_reason, "p divides the discriminant");
        let out = hecke_que_experiment(&cat_map(), 3, &QueOptions::default()).unwrap();
        assert!(!out.row.skipped_reason.is_empty());
        assert!(hecke_que_experiment(&cat_map(), 9, &QueOptions::default()).is_err());
    }

    #[test]
    fn statistical_states_at_eleven() {
        let out = statistical_state_experiment(&cat_map(), 11, &QueOptions::default()).unwrap();
        assert_eq!(out.violations, 0, "{out:?}");
        assert_eq!(out.rows.iter().map(|r| r.m_lambda).sum::<usize>(), 11);
    }
}

//! Characters of tori and the decomposition `H = sum_chi H_chi` under `rho(T)`.

mod claim;

pub use claim::{claim_rest_identity, odd_prime_powers, ClaimRestReport};

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heiwei::{inner, norm, Operator, WeilRep};
use crate::linalg::FqMatrix;
use crate::symp::{BlockKind, SympModuleStructure, Torus};

/// Largest `q^N` accepted by [`decompose`].
pub const MAX_DECOMPOSE_DIM: usize = 343;

const PROBE_SEED: u64 = 0x9e37_79b9;
const ROUNDING_THRESHOLD: f64 = 0.01;

/// A character of `T = prod_i Z/n_i`, `chi(g_1^{e_1} ... ) = prod exp(2 pi i a_i e_i / n_i)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct TorusCharacter {
    orders: Vec<u64>,
    exponents: Vec<u64>,
}

impl TorusCharacter {
    pub fn new(orders: Vec<u64>, exponents: Vec<u64>) -> Result<Self> {
        if orders.len() != exponents.len() || exponents.iter().zip(&orders).any(|(a, n)| a >= n) {
            return Err(Error::Domain("character exponents must satisfy 0 <= a_i < n_i".into()));
        }
        Ok(TorusCharacter { orders, exponents })
    }

    pub fn trivial(t: &Torus) -> Self {
        TorusCharacter { orders: t.structure().to_vec(), exponents: vec![0; t.structure().len()] }
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// `|T|`.
    pub fn group_order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// `chi(g) = exp(2 pi i k / |T|)` for the returned `k`, with `g` given by
    /// its exponent tuple.
    pub fn phase_index(&self, g: &[u64]) -> u64 {
        let t = self.group_order();
        self.exponents
            .iter()
            .zip(&self.orders)
            .zip(g)
            .fold(0u64, |acc, ((&a, &n), &e)| (acc + (a * e % n) * (t / n)) % t)
    }

    pub fn value_at(&self, g: &[u64]) -> Complex64 {
        let t = self.group_order() as f64;
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.phase_index(g) as f64 / t)
    }

    /// `chi` of the torus element with index `idx`.
    pub fn value(&self, t: &Torus, idx: usize) -> Complex64 {
        self.value_at(&t.exponents(idx))
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&a| a == 0)
    }

    /// Real-valued and non-trivial.
    pub fn is_quadratic(&self) -> bool {
        !self.is_trivial() && self.exponents.iter().zip(&self.orders).all(|(&a, &n)| (2 * a) % n == 0)
    }

    /// Whether the `i`-th cyclic component is the quadratic character of `Z/n_i`.
    pub fn is_sigma_on(&self, i: usize) -> bool {
        let n = self.orders[i];
        n % 2 == 0 && self.exponents[i] == n / 2
    }

    pub fn inverse(&self) -> Self {
        let exponents = self.exponents.iter().zip(&self.orders).map(|(&a, &n)| (n - a) % n).collect();
        TorusCharacter { orders: self.orders.clone(), exponents }
    }

    /// Exponents joined by `;`.
    pub fn label(&self) -> String {
        self.exponents.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";")
    }
}

impl fmt::Display for TorusCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi[{}]", self.label())
    }
}

/// All `|T|` characters, lexicographic in the exponent tuple.
pub fn torus_characters(t: &Torus) -> Vec<TorusCharacter> {
    let orders = t.structure().to_vec();
    (0..t.order() as usize)
        .map(|idx| TorusCharacter { orders: orders.clone(), exponents: t.exponents(idx) })
        .collect()
}

/// The unique quadratic character of a cyclic torus, found by its values.
pub fn sigma_character(t: &Torus) -> Option<TorusCharacter> {
    if t.structure().len() != 1 {
        return None;
    }
    torus_characters(t).into_iter().find(|chi| {
        !chi.is_trivial() && (0..t.order() as usize).all(|i| (chi.value(t, i).im).abs() < 1e-12)
    })
}

/// `m_chi = 2^l`, `l` the number of split blocks where `chi` restricts to the
/// quadratic character, and `0` when it does so on an inert block.
pub fn expected_multiplicity(ms: &SympModuleStructure, t: &Torus, chi: &TorusCharacter) -> Result<u64> {
    let kinds: Vec<BlockKind> = ms.generator_blocks(t)?.iter().map(|&b| ms.blocks()[b].kind()).collect();
    Ok(expected_multiplicity_for_kinds(&kinds, chi))
}

/// As [`expected_multiplicity`], with the block type of each cyclic factor
/// given directly.
pub fn expected_multiplicity_for_kinds(kinds: &[BlockKind], chi: &TorusCharacter) -> u64 {
    let mut m = 1;
    for (i, kind) in kinds.iter().enumerate() {
        if chi.is_sigma_on(i) {
            match kind {
                BlockKind::Inert => return 0,
                BlockKind::Split => m *= 2,
            }
        }
    }
    m
}

/// `H = sum_chi H_chi` with orthonormal bases of the character spaces.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    dim: usize,
    characters: Vec<TorusCharacter>,
    multiplicities: Vec<usize>,
    bases: Vec<Vec<Vec<Complex64>>>,
    tol: f64,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn characters(&self) -> &[TorusCharacter] {
        &self.characters
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn multiplicity(&self, i: usize) -> usize {
        self.multiplicities[i]
    }

    /// Orthonormal basis of `H_chi` for the `i`-th character.
    pub fn basis(&self, i: usize) -> &[Vec<Complex64>] {
        &self.bases[i]
    }

    pub fn index_of(&self, chi: &TorusCharacter) -> Option<usize> {
        self.characters.iter().position(|c| c == chi)
    }

    /// `P_chi = sum_k phi_k phi_k^dagger`.
    pub fn projector(&self, i: usize) -> Operator {
        Operator::from_orthonormal(self.dim, &self.bases[i])
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `max |rho(g) phi - chi(g) phi|` over generators and basis vectors.
    pub fn equivariance_defect(&self, rep: &WeilRep, t: &Torus) -> Result<f64> {
        let mut worst = 0.0f64;
        for (gi, g) in t.generators().iter().enumerate() {
            let op = rep.weil_op(g)?;
            let mut e = vec![0; t.structure().len()];
            e[gi] = 1;
            for (chi, basis) in self.characters.iter().zip(&self.bases) {
                let c = chi.value_at(&e);
                for phi in basis {
                    let img = op.apply(phi);
                    let d = img.iter().zip(phi).map(|(a, b)| (a - c * b).norm()).fold(0.0, f64::max);
                    worst = worst.max(d);
                }
            }
        }
        Ok(worst)
    }
}

fn orthonormalize(candidates: Vec<Vec<Complex64>>, want: usize, floor: f64) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for mut v in candidates {
        if basis.len() == want {
            break;
        }
        // two sweeps of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&v);
        if n > floor {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

/// Decompose `H` under `rho(T)`.
///
/// One pass over the torus builds each `rho(g)` and keeps its diagonal and
/// its action on a few seeded random probe vectors. Multiplicities are the
/// rounded traces of `P_chi = |T|^{-1} sum chi(g)^{-1} rho(g)`, and bases
/// come from orthonormalizing the projected probes.
pub fn decompose(rep: &WeilRep, t: &Torus) -> Result<EigenDecomposition> {
    let dim = rep.dim();
    if dim > MAX_DECOMPOSE_DIM {
        return Err(Error::TooLarge { dim: dim as u64, bound: MAX_DECOMPOSE_DIM as u64 });
    }
    if t.space().gram() != rep.space().gram() {
        return Err(Error::Domain("torus and representation live on different spaces".into()));
    }
    let n_probe = dim.min((1 << rep.space().half_dim()) + 2);
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let probes: Vec<Vec<Complex64>> = (0..n_probe)
        .map(|_| (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let samples: Vec<(Vec<Complex64>, Vec<Vec<Complex64>>)> = t
        .elements()
        .par_iter()
        .map(|g| {
            let op = rep.build(g)?;
            Ok((op.diag(), probes.iter().map(|r| op.apply(r)).collect()))
        })
        .collect::<Result<_>>()?;

    let order = t.order() as usize;
    let roots: Vec<Complex64> = (0..order)
        .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / order as f64))
        .collect();
    let exps: Vec<Vec<u64>> = (0..order).map(|i| t.exponents(i)).collect();
    let characters = torus_characters(t);
    let floor = 1e-6 * probes.iter().map(|r| norm(r)).fold(f64::INFINITY, f64::min);
    let per_chi: Vec<(usize, Vec<Vec<Complex64>>)> = characters
        .par_iter()
        .map(|chi| {
            let w: Vec<Complex64> = exps.iter().map(|e| roots[chi.phase_index(e) as usize] / order as f64).collect();
            let trace: f64 = samples.iter().zip(&w).map(|((d, _), c)| c * d.iter().sum::<Complex64>()).sum::<Complex64>().re;
            let m = trace.round();
            if (trace - m).abs() > ROUNDING_THRESHOLD || m < 0.0 {
                return Err(Error::Consistency(format!("Tr P_{chi} = {trace} is not an integer")));
            }
            let m = m as usize;
            let projected: Vec<Vec<Complex64>> = (0..n_probe)
                .map(|j| {
                    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
                    for ((_, imgs), c) in samples.iter().zip(&w) {
                        acc.iter_mut().zip(&imgs[j]).for_each(|(a, x)| *a += c * x);
                    }
                    acc
                })
                .collect();
            let basis = orthonormalize(projected, m, floor);
            if basis.len() != m {
                return Err(Error::Consistency(format!(
                    "probes span {} of the {m} dimensions of H_{chi}",
                    basis.len()
                )));
            }
            Ok((m, basis))
        })
        .collect::<Result<_>>()?;
    let total: usize = per_chi.iter().map(|(m, _)| m).sum();
    if total != dim {
        return Err(Error::Consistency(format!("multiplicities sum to {total}, not {dim}")));
    }
    let (multiplicities, bases) = per_chi.into_iter().unzip();
    Ok(EigenDecomposition { dim, characters, multiplicities, bases, tol: rep.tol() })
}

/// `<phi | pi(v, 0) phi>`.
pub fn wigner(rep: &WeilRep, phi: &[Complex64], v: &[crate::gfq::FieldElem]) -> Complex64 {
    rep.wigner(phi, v)
}

/// One row of a multiplicity table.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityRow {
    pub p: u64,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub torus_descriptor: String,
    pub chi_exponents: String,
    pub multiplicity: usize,
}

/// Measured multiplicities next to the predicted ones.
#[derive(Clone, Debug)]
pub struct MultiplicityCheck {
    pub rows: Vec<MultiplicityRow>,
    pub expected: Vec<u64>,
}

impl MultiplicityCheck {
    pub fn mismatches(&self) -> Vec<&MultiplicityRow> {
        self.rows.iter().zip(&self.expected).filter(|(r, &e)| r.multiplicity as u64 != e).map(|(r, _)| r).collect()
    }
}

pub fn multiplicity_check(rep: &WeilRep, t: &Torus, ms: &SympModuleStructure) -> Result<MultiplicityCheck> {
    let dec = decompose(rep, t)?;
    let f = rep.ctx();
    let mut rows = Vec::new();
    let mut expected = Vec::new();
    for (chi, &m) in dec.characters().iter().zip(dec.multiplicities()) {
        rows.push(MultiplicityRow {
            p: f.characteristic(),
            m: f.degree(),
            n: rep.space().half_dim(),
            torus_descriptor: t.label(),
            chi_exponents: chi.label(),
            multiplicity: m,
        });
        expected.push(expected_multiplicity(ms, t, chi)?);
    }
    Ok(MultiplicityCheck { rows, expected })
}

/// `sigma(-det(g - I))` against `sigma_T(g)` on `T \ I` for a torus of
/// `SL(2, F_q)`: `-1` if always opposite, `+1` if always equal.
pub fn sign_relation(t: &Torus) -> Result<Option<i8>> {
    let sp = t.space();
    let f = sp.ctx();
    let sigma = sigma_character(t).ok_or_else(|| Error::Domain("torus is not cyclic of even order".into()))?;
    let mut rel = None;
    for (i, g) in t.elements().iter().enumerate().skip(1) {
        let d = g.mat().sub(&FqMatrix::identity(f, sp.dim())).det();
        let s = f.legendre_sigma(f.neg(d))?;
        let st = sigma.value(t, i).re.round() as i8;
        let r = s * st;
        match rel {
            None => rel = Some(r),
            Some(x) if x != r => return Ok(None),
            _ => {}
        }
    }
    Ok(rel)
}

//! The exponential sums
//!
//! ```text
//! c_chi(v) = sum_{g in T, g != I} chi(g)^{-1} sigma((-1)^N det(g - I)) psi(omega((g - I)^{-1} v, v)/2),
//! ```
//!
//! equal to `|T| Tr(pi(v) P_chi)`, computed directly over `k` or blockwise
//! over the fields `K_alpha`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, FieldElem};
use crate::linalg::{vec_from_index, vec_index, FqMatrix};
use crate::spectra::{torus_characters, TorusCharacter};
use crate::symp::{symplectic_rank, ModuleBlock, SympModuleStructure, SympSpace, Torus};

/// Vector spaces up to this size are swept exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 6561;
pub const DEFAULT_SAMPLES: usize = 4096;

fn minus_one_pow(f: &FieldCtx, n: usize) -> FieldElem {
    if n % 2 == 0 {
        f.one()
    } else {
        f.neg(f.one())
    }
}

fn witness(g: &FqMatrix) -> Vec<u64> {
    g.data().iter().map(|e| e.index()).collect()
}

/// Per-element data for the direct sum.
struct Term {
    idx: usize,
    sign: f64,
    // (g - I)^{-1}, or g - I itself when singular
    inv: Option<FqMatrix>,
    g_minus_i: FqMatrix,
}

fn prepare(space: &SympSpace, t: &Torus) -> Result<Vec<Term>> {
    let f = space.ctx();
    let id = FqMatrix::identity(f, space.dim());
    let sgn = minus_one_pow(f, space.half_dim());
    t.elements()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(idx, g)| {
            let gm = g.mat().sub(&id);
            let d = gm.det();
            if d.is_zero() {
                Ok(Term { idx, sign: 0.0, inv: None, g_minus_i: gm })
            } else {
                let sign = f.legendre_sigma(f.mul(sgn, d))? as f64;
                Ok(Term { idx, sign, inv: Some(gm.inverse()?), g_minus_i: gm })
            }
        })
        .collect()
}

// Tr(pi(v) rho(g)) for g != I; zero for singular g when v is outside the image.
fn term_value(space: &SympSpace, term: &Term, v: &[FieldElem]) -> Result<Complex64> {
    let f = space.ctx();
    match &term.inv {
        Some(q) => {
            let t = f.mul(f.half(), space.omega(&q.mul_vec(v), v));
            Ok(f.additive_psi(t) * term.sign)
        }
        None => {
            if term.g_minus_i.solve(v).is_some() {
                Err(Error::SingularElement { witness: witness(&term.g_minus_i) })
            } else {
                Ok(Complex64::new(0.0, 0.0))
            }
        }
    }
}

fn terms_for(space: &SympSpace, terms: &[Term], v: &[FieldElem]) -> Result<Vec<(usize, Complex64)>> {
    terms.iter().map(|t| Ok((t.idx, term_value(space, t, v)?))).collect()
}

fn combine(t: &Torus, chi: &TorusCharacter, terms: &[(usize, Complex64)]) -> Complex64 {
    let n = t.order() as f64;
    terms
        .iter()
        .map(|&(idx, val)| {
            let k = chi.phase_index(&t.exponents(idx)) as f64;
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k / n) * val
        })
        .sum()
}

/// `c_chi(v)` summed over the torus.
///
/// An element with `det(g - I) = 0` contributes `Tr(pi(v) rho(g))`, which
/// vanishes when `v` is not in the image of `g - I`; otherwise the sum has
/// no closed form and a [`Error::SingularElement`] naming `g - I` is returned.
pub fn c_chi_direct(space: &SympSpace, t: &Torus, chi: &TorusCharacter, v: &[FieldElem]) -> Result<Complex64> {
    if v.iter().all(|e| e.is_zero()) {
        return Err(Error::Domain("c_chi needs v != 0".into()));
    }
    let terms = prepare(space, t)?;
    Ok(combine(t, chi, &terms_for(space, &terms, v)?))
}

// powers of the K-matrix of a block generator
fn block_sum(blk: &ModuleBlock, gen: &[[FieldElem; 2]; 2], order: u64, a: u64, v: (FieldElem, FieldElem)) -> Complex64 {
    let f = blk.field();
    let mut s = Complex64::new(0.0, 0.0);
    if v.0.is_zero() && v.1.is_zero() {
        s += f.order() as f64;
    }
    let mul = |x: &[[FieldElem; 2]; 2], y: &[[FieldElem; 2]; 2]| {
        let mut out = [[f.zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = f.add(f.mul(x[i][0], y[0][j]), f.mul(x[i][1], y[1][j]));
            }
        }
        out
    };
    let mut m = *gen;
    for k in 1..order {
        let (a11, b) = (f.sub(m[0][0], f.one()), m[0][1]);
        let (c, d) = (m[1][0], f.sub(m[1][1], f.one()));
        let det = f.sub(f.mul(a11, d), f.mul(b, c));
        if let Ok(di) = f.inv(det) {
            let sign = f.legendre_sigma(f.neg(det)).unwrap_or(0) as f64;
            let y0 = f.mul(di, f.sub(f.mul(d, v.0), f.mul(b, v.1)));
            let y1 = f.mul(di, f.sub(f.mul(a11, v.1), f.mul(c, v.0)));
            let w = f.sub(f.mul(y0, v.1), f.mul(y1, v.0));
            let chi = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((a * k) % order) as f64 / order as f64);
            s += chi * f.additive_psi(f.mul(f.half(), w)) * sign;
        }
        m = mul(&m, gen);
    }
    s
}

/// `c_chi(v)` as a product of one-dimensional sums over the block fields.
pub fn c_chi_reduced(ms: &SympModuleStructure, t: &Torus, chi: &TorusCharacter, v: &[FieldElem]) -> Result<Complex64> {
    if v.iter().all(|e| e.is_zero()) {
        return Err(Error::Domain("c_chi needs v != 0".into()));
    }
    let gb = ms.generator_blocks(t)?;
    if gb.len() != ms.blocks().len() || gb.iter().collect::<BTreeSet<_>>().len() != gb.len() {
        return Err(Error::Domain("torus generators do not match the blocks one to one".into()));
    }
    let mut total = Complex64::new(1.0, 0.0);
    for (i, &b) in gb.iter().enumerate() {
        let blk = &ms.blocks()[b];
        let gen = blk.k_matrix(t.generators()[i].mat());
        total *= block_sum(blk, &gen, t.structure()[i], chi.exponents()[i], blk.coords(v));
    }
    Ok(total)
}

/// Whether the `T`-orbit of `v` spans `V`.
pub fn is_admissible(t: &Torus, v: &[FieldElem]) -> bool {
    let f = t.space().ctx();
    let rows: Vec<Vec<FieldElem>> = t.elements().iter().map(|g| g.apply(v)).collect();
    let m = FqMatrix::from_fn(f, rows.len(), v.len(), |i, j| rows[i][j]);
    m.rank() == v.len()
}

/// Which vectors `bound_report` visits.
#[derive(Clone, Debug)]
pub enum VRange {
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`], otherwise seeded samples plus
    /// all vectors of Hamming weight at most 2.
    Auto { seed: u64, samples: usize },
    Explicit(Vec<Vec<FieldElem>>),
}

impl Default for VRange {
    fn default() -> Self {
        VRange::Auto { seed: 0, samples: DEFAULT_SAMPLES }
    }
}

#[derive(Clone, Debug, Default)]
pub struct BoundOptions {
    pub range: VRange,
    /// Keep one row per `(chi, v)` in the report.
    pub keep_rows: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SumRow {
    pub p: u64,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub torus: String,
    pub chi: String,
    pub v_serialized: String,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SumWitness {
    pub chi: String,
    pub v: String,
    pub abs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiMax {
    pub chi: String,
    pub max_abs: f64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SumReport {
    pub p: u64,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub torus: String,
    pub rank: usize,
    /// `2^r sqrt(q^N)`.
    pub bound: f64,
    /// `2^N sqrt(q^N)`.
    pub generic_bound: f64,
    pub vectors: usize,
    pub admissible: usize,
    pub max_abs: f64,
    pub max_ratio: f64,
    pub max_generic_ratio: f64,
    pub argmax: Option<SumWitness>,
    pub per_chi: Vec<ChiMax>,
    /// Largest ratio over vectors inside a proper invariant subspace; these
    /// are excluded from `max_ratio`.
    pub flagged_max: Option<SumWitness>,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub rows: Vec<SumRow>,
}

impl SumReport {
    /// Violations of the bound, with `1e-8` slack on the modulus.
    pub fn violations(&self) -> usize {
        self.per_chi.iter().filter(|c| c.max_abs > self.bound + 1e-8).count()
    }
}

pub fn serialize_vector(v: &[FieldElem]) -> String {
    v.iter().map(|e| e.index().to_string()).collect::<Vec<_>>().join(";")
}

fn vector_range(space: &SympSpace, range: &VRange) -> (Vec<Vec<FieldElem>>, Option<u64>) {
    let f = space.ctx();
    let dim = space.dim();
    match range {
        VRange::Explicit(vs) => (vs.clone(), None),
        VRange::Auto { seed, samples } => {
            let total = crate::gfq::checked_pow(f.order(), dim);
            if let Some(total) = total.filter(|&t| t <= EXHAUSTIVE_LIMIT) {
                return ((1..total).map(|i| vec_from_index(f, i, dim)).collect(), None);
            }
            let mut seen = BTreeSet::new();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::new();
            let mut push = |v: Vec<FieldElem>, out: &mut Vec<Vec<FieldElem>>| {
                if v.iter().any(|e| !e.is_zero()) && seen.insert(vec_index(f, &v)) {
                    out.push(v);
                }
            };
            for i in 0..dim {
                for a in 1..f.order() {
                    let mut v = vec![f.zero(); dim];
                    v[i] = f.elem(a);
                    push(v.clone(), &mut out);
                    for j in i + 1..dim {
                        for b in 1..f.order() {
                            let mut w = v.clone();
                            w[j] = f.elem(b);
                            push(w, &mut out);
                        }
                    }
                }
            }
            for _ in 0..*samples {
                push(space.random_vector(&mut rng), &mut out);
            }
            (out, Some(*seed))
        }
    }
}

/// Sweep `c_chi(v)` over all characters and a range of `v`, against the
/// bound `2^r sqrt(q^N)`.
pub fn bound_report(space: &SympSpace, t: &Torus, opts: &BoundOptions) -> Result<SumReport> {
    let f = space.ctx();
    let n = space.half_dim();
    let (_, rank) = symplectic_rank(t)?;
    let root = (f.order() as f64).powi(n as i32).sqrt();
    let bound = (1u64 << rank) as f64 * root;
    let generic_bound = (1u64 << n) as f64 * root;
    let (vectors, seed) = vector_range(space, &opts.range);
    let chars = torus_characters(t);
    let terms = prepare(space, t)?;
    let label = t.label();

    struct PerV {
        admissible: bool,
        values: Option<Vec<Complex64>>,
        v: String,
    }
    let per_v: Vec<PerV> = vectors
        .par_iter()
        .map(|v| {
            let admissible = is_admissible(t, v);
            let values = match terms_for(space, &terms, v) {
                Ok(ts) => Some(chars.iter().map(|chi| combine(t, chi, &ts)).collect()),
                Err(_) if !admissible => None,
                Err(e) => return Err(e),
            };
            Ok(PerV { admissible, values, v: serialize_vector(v) })
        })
        .collect::<Result<_>>()?;

    let mut per_chi: Vec<ChiMax> =
        chars.iter().map(|c| ChiMax { chi: c.label(), max_abs: 0.0, max_ratio: 0.0 }).collect();
    let mut argmax: Option<SumWitness> = None;
    let mut flagged_max: Option<SumWitness> = None;
    let mut rows = Vec::new();
    let mut admissible = 0;
    for pv in &per_v {
        let Some(values) = &pv.values else { continue };
        if pv.admissible {
            admissible += 1;
        }
        for (ci, c) in values.iter().enumerate() {
            let abs = c.norm();
            let ratio = abs / bound;
            let w = || SumWitness { chi: chars[ci].label(), v: pv.v.clone(), abs, ratio };
            if pv.admissible {
                let slot = &mut per_chi[ci];
                slot.max_abs = slot.max_abs.max(abs);
                slot.max_ratio = slot.max_ratio.max(ratio);
                if argmax.as_ref().is_none_or(|a| ratio > a.ratio) {
                    argmax = Some(w());
                }
                if opts.keep_rows {
                    rows.push(SumRow {
                        p: f.characteristic(),
                        m: f.degree(),
                        n,
                        torus: label.clone(),
                        chi: chars[ci].label(),
                        v_serialized: pv.v.clone(),
                        re: c.re,
                        im: c.im,
                        abs,
                        bound,
                        ratio,
                    });
                }
            } else if flagged_max.as_ref().is_none_or(|a| ratio > a.ratio) {
                flagged_max = Some(w());
            }
        }
    }
    let max_abs = per_chi.iter().map(|c| c.max_abs).fold(0.0, f64::max);
    Ok(SumReport {
        p: f.characteristic(),
        m: f.degree(),
        n,
        torus: label,
        rank,
        bound,
        generic_bound,
        vectors: vectors.len(),
        admissible,
        max_abs,
        max_ratio: max_abs / bound,
        max_generic_ratio: max_abs / generic_bound,
        argmax,
        per_chi,
        flagged_max,
        seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heiwei::WeilRep;
    use crate::spectra::decompose;
    use crate::symp::{build_maximal_torus, module_structure, TorusDescriptor};

    fn torus(p: u64, n: usize, spec: &str) -> Torus {
        let f = FieldCtx::prime(p).unwrap();
        let sp = SympSpace::standard(&f, n).unwrap();
        build_maximal_torus(&sp, &TorusDescriptor::parse(spec, &f, n).unwrap()).unwrap()
    }

    #[test]
    fn sum_over_characters_vanishes() {
        let t = torus(7, 1, "inert");
        let sp = t.space().clone();
        let v = vec![sp.ctx().one(), sp.ctx().from_int(3)];
        let s: Complex64 =
            torus_characters(&t).iter().map(|chi| c_chi_direct(&sp, &t, chi, &v).unwrap()).sum();
        assert!(s.norm() < 1e-9);
    }

    #[test]
    fn matches_trace_against_projector() {
        let t = torus(5, 1, "split");
        let sp = t.space().clone();
        let rep = WeilRep::new(&sp).unwrap();
        let dec = decompose(&rep, &t).unwrap();
        let f = sp.ctx();
        for vi in 1..25 {
            let v = vec_from_index(f, vi, 2);
            let pi = rep.pi_op(&crate::heiwei::HeisenbergElem::translation(v.clone()));
            for (i, chi) in dec.characters().iter().enumerate() {
                let lhs = c_chi_direct(&sp, &t, chi, &v).unwrap();
                let rhs = pi.mul(&dec.projector(i)).trace() * t.order() as f64;
                assert!((lhs - rhs).norm() < 1e-8, "{chi} {vi}");
            }
        }
    }

    #[test]
    fn reduced_equals_direct() {
        for (p, spec) in [(3, "irreducible"), (5, "split+inert"), (5, "split:2"), (7, "inert+inert")] {
            let t = torus(p, 2, spec);
            let sp = t.space().clone();
            let ms = module_structure(&t).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..20 {
                let v = sp.random_vector(&mut rng);
                if v.iter().all(|e| e.is_zero()) || !is_admissible(&t, &v) {
                    continue;
                }
                for chi in torus_characters(&t).iter().step_by(3) {
                    let d = c_chi_direct(&sp, &t, chi, &v).unwrap();
                    let r = c_chi_reduced(&ms, &t, chi, &v).unwrap();
                    assert!((d - r).norm() < 1e-8 * (p as f64), "{spec} {chi}");
                }
            }
        }
    }

    #[test]
    fn sl2_f7_bound_and_eigenvectors() {
        for spec in ["split", "inert"] {
            let t = torus(7, 1, spec);
            let r = bound_report(t.space(), &t, &BoundOptions::default()).unwrap();
            assert!(r.max_ratio <= 1.0 + 1e-9);
            assert_eq!(r.vectors, 48);
        }
        let t = torus(11, 1, "split");
        let r = bound_report(t.space(), &t, &BoundOptions::default()).unwrap();
        let flagged = r.flagged_max.unwrap();
        assert!((flagged.abs - 9.0).abs() < 1e-9);
        assert!(flagged.ratio > 1.0);
    }

    #[test]
    fn empty_range() {
        let t = torus(5, 1, "inert");
        let opts = BoundOptions { range: VRange::Explicit(vec![]), keep_rows: true };
        let r = bound_report(t.space(), &t, &opts).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert!(r.rows.is_empty());
    }
}

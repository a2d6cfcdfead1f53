//! Restriction of the Weil representation to `prod_alpha SL(2, K_alpha)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{norm, Operator, WeilRep};
use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, FieldElem};
use crate::linalg::{vec_add, vec_from_index, vec_scale, FqMatrix};
use crate::symp::{BlockSpec, ModuleBlock, SympModuleStructure, SympSpace, Torus};

/// Largest `q^N` for which the intertwiner is built.
pub const MAX_RESTRICTION_DIM: u64 = 343;

#[derive(Clone, Copy, Debug)]
pub struct RestrictionOptions {
    /// Random elements of `prod SL(2, K_alpha)` for the operator check.
    pub samples: usize,
    pub seed: u64,
}

impl Default for RestrictionOptions {
    fn default() -> Self {
        RestrictionOptions { samples: 8, seed: 7 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionReport {
    pub q: u64,
    pub n: usize,
    pub blocks: Vec<BlockSpec>,
    /// Torus elements where the sign identity was checked.
    pub trace_checked: usize,
    /// Torus indices where it failed.
    pub trace_mismatches: Vec<usize>,
    pub psi_checked: usize,
    pub psi_mismatches: usize,
    pub operator_samples: usize,
    /// `max |rho(g) U - U (x) rhobar(g_alpha)|` over the samples.
    pub operator_distance: Option<f64>,
    pub operator_skipped: Option<String>,
    pub tol: f64,
}

impl RestrictionReport {
    pub fn passed(&self) -> bool {
        self.trace_mismatches.is_empty()
            && self.psi_mismatches == 0
            && self.operator_distance.is_none_or(|d| d <= self.tol)
    }
}

fn minus_one_pow(f: &FieldCtx, n: usize) -> FieldElem {
    if n % 2 == 0 {
        f.one()
    } else {
        f.neg(f.one())
    }
}

// Tr_{K/F_p}(wbar((g - I)^{-1} x, x) / 2) in block coordinates, or None if g - I is singular.
fn block_phase(blk: &ModuleBlock, m: &[[FieldElem; 2]; 2], x: (FieldElem, FieldElem)) -> Option<u64> {
    let f = blk.field();
    let (a, b) = (f.sub(m[0][0], f.one()), m[0][1]);
    let (c, d) = (m[1][0], f.sub(m[1][1], f.one()));
    let det = f.sub(f.mul(a, d), f.mul(b, c));
    let di = f.inv(det).ok()?;
    let y0 = f.mul(di, f.sub(f.mul(d, x.0), f.mul(b, x.1)));
    let y1 = f.mul(di, f.sub(f.mul(a, x.1), f.mul(c, x.0)));
    let w = f.sub(f.mul(y0, x.1), f.mul(y1, x.0));
    Some(f.abs_trace(f.mul(f.half(), w)))
}

/// Check that `rho` restricted along `prod SL(2, K_alpha) -> Sp(V)` agrees
/// with the tensor product of the Weil representations of the blocks.
///
/// Three checks are made. The sign identity
/// `sigma((-1)^N det(g - I)) = prod sigma_alpha(-det(g_alpha - I))` on every
/// torus element, also evaluated through the norms as a second path. The
/// phase identity `Tr omega((g - I)^{-1} v, v)/2 = sum Tr wbar_alpha(...)/2`
/// on sampled vectors. Finally an explicit intertwiner `U` is compared on
/// random elements, unless some block field is `F_3` with no Weil operator.
pub fn restrict_to_extension(
    rep: &WeilRep,
    ms: &SympModuleStructure,
    torus: &Torus,
    opts: &RestrictionOptions,
) -> Result<RestrictionReport> {
    let space = rep.space();
    let k = space.ctx().clone();
    let n = space.half_dim();
    if rep.dim() as u64 > MAX_RESTRICTION_DIM {
        return Err(Error::TooLarge { dim: rep.dim() as u64, bound: MAX_RESTRICTION_DIM });
    }
    let blocks = ms.blocks();
    let dimv = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let exhaustive = (rep.dim() * rep.dim()) as u64 <= 729;
    let vectors: Vec<Vec<FieldElem>> = if exhaustive {
        (0..(rep.dim() * rep.dim()) as u64).map(|i| vec_from_index(&k, i, dimv)).collect()
    } else {
        (0..32).map(|_| space.random_vector(&mut rng)).collect()
    };

    let mut report = RestrictionReport {
        q: k.order(),
        n,
        blocks: blocks.iter().map(|b| b.spec()).collect(),
        trace_checked: 0,
        trace_mismatches: vec![],
        psi_checked: 0,
        psi_mismatches: 0,
        operator_samples: 0,
        operator_distance: None,
        operator_skipped: None,
        tol: rep.tol(),
    };

    for (idx, g) in torus.elements().iter().enumerate() {
        let dk = g.det_minus_identity();
        if dk.is_zero() {
            continue;
        }
        let lhs = k.legendre_sigma(k.mul(minus_one_pow(&k, n), dk))?;
        let mut rhs = 1i8;
        let mut normed = k.one();
        let mats: Vec<[[FieldElem; 2]; 2]> = blocks.iter().map(|b| b.k_matrix(g.mat())).collect();
        for blk in blocks {
            let f = blk.field();
            let d = f.neg(blk.det_minus_identity(g.mat()));
            rhs *= f.legendre_sigma(d)?;
            normed = k.mul(normed, blk.embedding().norm(d));
        }
        report.trace_checked += 1;
        if lhs != rhs || k.legendre_sigma(normed)? != lhs {
            report.trace_mismatches.push(idx);
        }
        if report.psi_checked >= 4096 {
            continue;
        }
        let qinv = g.mat().sub(&FqMatrix::identity(&k, dimv)).inverse()?;
        for v in &vectors {
            let full = k.abs_trace(k.mul(k.half(), space.omega(&qinv.mul_vec(v), v)));
            let mut split = 0u64;
            for (blk, m) in blocks.iter().zip(&mats) {
                let ph = block_phase(blk, m, blk.coords(v))
                    .ok_or_else(|| Error::Consistency("block of g - I singular".into()))?;
                split += ph;
            }
            report.psi_checked += 1;
            if full != split % k.characteristic() {
                report.psi_mismatches += 1;
            }
        }
    }

    if let Some(blk) = blocks.iter().find(|b| b.field().order() == 3) {
        report.operator_skipped = Some(format!(
            "block {} has field F_3, where the Weil operator is not determined",
            blk.spec()
        ));
        return Ok(report);
    }

    let reps: Vec<WeilRep> = blocks
        .iter()
        .map(|b| WeilRep::new(&SympSpace::standard(b.field(), 1)?))
        .collect::<Result<_>>()?;
    let u = intertwiner(rep, blocks)?;
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let gs: Vec<_> = reps.iter().map(|r| r.space().random_element(&mut rng)).collect();
        let mats: Vec<[[FieldElem; 2]; 2]> = gs
            .iter()
            .map(|g| {
                let m = g.mat();
                [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
            })
            .collect();
        let big = ms.embed_sl2(&mats)?;
        let mut tensor = Operator::identity(1);
        for (r, g) in reps.iter().zip(&gs) {
            tensor = tensor.kron(&r.build(g)?);
        }
        let lhs = rep.build(&big)?.mul(&u);
        let d = lhs.max_abs_diff(&u.mul(&tensor));
        worst = worst.max(d);
        report.operator_samples += 1;
    }
    report.operator_distance = Some(worst);
    Ok(report)
}

/// The unitary `U` with columns `pi(-sum y_alpha u_alpha) phi_0`, where
/// `phi_0` is the normalized invariant vector of `{sum c_alpha w_alpha}`.
/// Columns follow the Kronecker order, block 0 slowest.
pub fn intertwiner(rep: &WeilRep, blocks: &[ModuleBlock]) -> Result<Operator> {
    let k = rep.ctx();
    let dimv = rep.space().dim();
    let sizes: Vec<u64> = blocks.iter().map(|b| b.field().order()).collect();
    let total: u64 = sizes.iter().product();
    if total != rep.dim() as u64 {
        return Err(Error::Consistency("block fields do not multiply to q^N".into()));
    }
    let combos = |dir: fn(&ModuleBlock) -> &[FieldElem]| -> Vec<Vec<FieldElem>> {
        (0..total)
            .map(|mut idx| {
                let mut v = vec![k.zero(); dimv];
                for (blk, &s) in blocks.iter().zip(&sizes).rev() {
                    let c = blk.field().elem(idx % s);
                    idx /= s;
                    v = vec_add(k, &v, &blk.act_vec(c, dir(blk)));
                }
                v
            })
            .collect()
    };
    let mut e0 = vec![Complex64::new(0.0, 0.0); rep.dim()];
    e0[0] = Complex64::new(1.0, 0.0);
    let mut phi = vec![Complex64::new(0.0, 0.0); rep.dim()];
    for w in combos(|b| b.k_basis().1) {
        for (a, b) in phi.iter_mut().zip(rep.pi_apply(&w, &e0)) {
            *a += b;
        }
    }
    let nr = norm(&phi);
    if nr < 1e-9 {
        return Err(Error::Consistency("invariant vector vanished".into()));
    }
    phi.iter_mut().for_each(|x| *x /= nr);
    let minus = k.neg(k.one());
    let cols: Vec<Vec<Complex64>> =
        combos(|b| b.k_basis().0).iter().map(|y| rep.pi_apply(&vec_scale(k, minus, y), &phi)).collect();
    Ok(Operator::from_fn(rep.dim(), |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symp::{build_maximal_torus, module_structure, TorusDescriptor};

    fn check(p: u64, n: usize, spec: &str) -> RestrictionReport {
        let f = FieldCtx::prime(p).unwrap();
        let sp = SympSpace::standard(&f, n).unwrap();
        let t = build_maximal_torus(&sp, &TorusDescriptor::parse(spec, &f, n).unwrap()).unwrap();
        let ms = module_structure(&t).unwrap();
        let rep = WeilRep::new(&sp).unwrap();
        restrict_to_extension(&rep, &ms, &t, &RestrictionOptions { samples: 3, seed: 1 }).unwrap()
    }

    #[test]
    fn sl2_over_f5_is_its_own_extension() {
        let r = check(5, 1, "inert");
        assert!(r.passed(), "{r:?}");
        assert!(r.operator_distance.is_some());
    }

    #[test]
    fn sp4_blocks_over_f5() {
        for spec in ["irreducible", "split:2", "split+inert", "inert+inert"] {
            let r = check(5, 2, spec);
            assert!(r.passed(), "{spec}: {r:?}");
            assert!(r.trace_checked > 0);
        }
    }

    #[test]
    fn f3_blocks_skip_the_operator_check() {
        let r = check(3, 2, "inert+inert");
        assert!(r.passed());
        assert!(r.operator_skipped.is_some());
        let r = check(3, 2, "irreducible");
        assert!(r.operator_distance.unwrap() < r.tol);
    }
}

//! The Heisenberg representation `pi` in the Schrodinger model and the Weil
//! representation `rho` of `Sp(2N, F_q)`.
//!
//! `V = L + L'` with `L` spanned by the first `N` basis vectors. The Hilbert
//! space is functions on `L = F_q^N`, indexed by `x -> sum x_i q^i`, and
//!
//! ```text
//! pi(a + b, z) f(x) = psi(z + <b, x> + <a, b>/2) f(x + a).
//! ```
//!
//! For `det(g - I) != 0`,
//!
//! ```text
//! rho(g) = q^{-N} sigma((-1)^N det(g - I)) sum_v psi(omega((g - I)^{-1} v, v)/2) pi(v, 0),
//! ```
//!
//! and any other `g` is written as a product of two such elements.

mod operator;
mod restrict;

pub use operator::{inner, norm, Operator};
pub use restrict::{restrict_to_extension, RestrictionOptions, RestrictionReport};

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, FieldElem};
use crate::linalg::{vec_add, vec_from_index, vec_index, FqMatrix};
use crate::symp::{SympGroupElement, SympSpace};

/// Largest supported Hilbert space dimension `q^N`.
pub const MAX_DIM: u64 = 1024;

const FACTORIZATION_RETRIES: usize = 64;
const FACTORIZATION_SEED: u64 = 0x00c0_ffee;
// complex entries kept in the operator cache
const CACHE_BUDGET: usize = 1 << 22;

/// An element `(v, z)` of the Heisenberg group `V x k`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HeisenbergElem {
    pub v: Vec<FieldElem>,
    pub z: FieldElem,
}

impl HeisenbergElem {
    pub fn new(v: Vec<FieldElem>, z: FieldElem) -> Self {
        HeisenbergElem { v, z }
    }

    /// `(v, 0)`.
    pub fn translation(v: Vec<FieldElem>) -> Self {
        HeisenbergElem { v, z: FieldElem::default() }
    }

    /// The symplectic action `g . (v, z) = (g v, z)`.
    pub fn act(&self, g: &SympGroupElement) -> Self {
        HeisenbergElem { v: g.apply(&self.v), z: self.z }
    }
}

/// `(v, z)(v', z') = (v + v', z + z' + omega(v, v')/2)`.
pub fn heisenberg_compose(space: &SympSpace, h1: &HeisenbergElem, h2: &HeisenbergElem) -> HeisenbergElem {
    let f = space.ctx();
    let w = f.mul(f.half(), space.omega(&h1.v, &h2.v));
    HeisenbergElem { v: vec_add(f, &h1.v, &h2.v), z: f.add(f.add(h1.z, h2.z), w) }
}

/// `sigma((-1)^N det(g - I))`, the trace of `rho(g)` for generic `g`.
pub fn weil_character(space: &SympSpace, g: &SympGroupElement) -> Result<i8> {
    let f = space.ctx();
    let d = g.det_minus_identity();
    if d.is_zero() {
        return Err(Error::CharacterFormulaUndefined);
    }
    let sign = if space.half_dim() % 2 == 0 { f.one() } else { f.neg(f.one()) };
    f.legendre_sigma(f.mul(sign, d))
}

/// The Heisenberg-Weil character
/// `sigma((-1)^N det(g - I)) psi(omega((g - I)^{-1} v, v)/2 + z)`.
pub fn ch_tau(space: &SympSpace, g: &SympGroupElement, h: &HeisenbergElem) -> Result<Complex64> {
    let f = space.ctx();
    let s = weil_character(space, g)?;
    let q = g.mat().sub(&FqMatrix::identity(f, space.dim())).inverse()?;
    let t = f.add(f.mul(f.half(), space.omega(&q.mul_vec(&h.v), &h.v)), h.z);
    Ok(f.additive_psi(t) * s as f64)
}

/// The Weil representation on functions on `F_q^N`.
pub struct WeilRep {
    space: SympSpace,
    n: usize,
    p: u64,
    dim: usize,
    roots: Vec<Complex64>,
    // dot[b * dim + x] = Tr <b, x>
    dot: Vec<u32>,
    // add[x * dim + a] = index of x + a
    add: Vec<u32>,
    neg: Vec<u32>,
    cache: RwLock<HashMap<FqMatrix, Arc<Operator>>>,
    cached_entries: AtomicUsize,
    tol: f64,
}

impl std::fmt::Debug for WeilRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WeilRep(dim {})", self.dim)
    }
}

impl WeilRep {
    pub fn new(space: &SympSpace) -> Result<Self> {
        let f = space.ctx();
        let n = space.half_dim();
        if !space.is_standard() {
            return Err(Error::Domain("the Weil representation needs the standard Gram form".into()));
        }
        if f.order() == 3 && n == 1 {
            return Err(Error::AmbiguousLinearization);
        }
        let dim = crate::gfq::checked_pow(f.order(), n)
            .filter(|&d| d <= MAX_DIM)
            .ok_or(Error::TooLarge { dim: f.order().saturating_pow(n as u32), bound: MAX_DIM })?
            as usize;
        let vecs: Vec<Vec<FieldElem>> = (0..dim as u64).map(|i| vec_from_index(f, i, n)).collect();
        let mut dot = vec![0u32; dim * dim];
        let mut add = vec![0u32; dim * dim];
        for (i, x) in vecs.iter().enumerate() {
            for (j, y) in vecs.iter().enumerate() {
                dot[i * dim + j] = f.abs_trace(crate::linalg::dot(f, x, y)) as u32;
                add[i * dim + j] = vec_index(f, &vec_add(f, x, y)) as u32;
            }
        }
        let neg = vecs
            .iter()
            .map(|x| vec_index(f, &x.iter().map(|&c| f.neg(c)).collect::<Vec<_>>()) as u32)
            .collect();
        Ok(WeilRep {
            space: space.clone(),
            n,
            p: f.characteristic(),
            dim,
            roots: f.psi_table(),
            dot,
            add,
            neg,
            cache: RwLock::new(HashMap::new()),
            cached_entries: AtomicUsize::new(0),
            tol: 1e-9 * dim as f64,
        })
    }

    pub fn space(&self) -> &SympSpace {
        &self.space
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.space.ctx()
    }

    /// `q^N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Max-norm comparison tolerance `1e-9 q^N`.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn split(&self, v: &[FieldElem]) -> (usize, usize) {
        let f = self.ctx();
        (vec_index(f, &v[..self.n]) as usize, vec_index(f, &v[self.n..]) as usize)
    }

    fn half_idx(&self, t: u64) -> u64 {
        t * self.p.div_ceil(2) % self.p
    }

    pub fn pi_op(&self, h: &HeisenbergElem) -> Operator {
        let (a, b) = self.split(&h.v);
        let p = self.p;
        let z = self.ctx().psi_index(h.z);
        let c = (z + self.half_idx(self.dot[a * self.dim + b] as u64)) % p;
        let mut m = Operator::zeros(self.dim);
        for x in 0..self.dim {
            let col = self.add[x * self.dim + a] as usize;
            m[(x, col)] = self.roots[((c + self.dot[b * self.dim + x] as u64) % p) as usize];
        }
        m
    }

    /// `pi(v, 0) f` without forming the matrix.
    pub fn pi_apply(&self, v: &[FieldElem], f: &[Complex64]) -> Vec<Complex64> {
        let (a, b) = self.split(v);
        let p = self.p;
        let c = self.half_idx(self.dot[a * self.dim + b] as u64);
        (0..self.dim)
            .map(|x| {
                let y = self.add[x * self.dim + a] as usize;
                self.roots[((c + self.dot[b * self.dim + x] as u64) % p) as usize] * f[y]
            })
            .collect()
    }

    /// `<phi | pi(v, 0) phi>`.
    pub fn wigner(&self, phi: &[Complex64], v: &[FieldElem]) -> Complex64 {
        inner(phi, &self.pi_apply(v, phi))
    }

    /// `<phi | pi(v, 0) phi>` for every `v`, indexed by `vec_index(v)`: the
    /// `a`-part is the fast index.
    pub fn wigner_table(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim;
        let p = self.p;
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        out.par_chunks_mut(dim).enumerate().for_each(|(b, row)| {
            for (a, slot) in row.iter_mut().enumerate() {
                let c = self.half_idx(self.dot[a * dim + b] as u64);
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..dim {
                    let y = self.add[x * dim + a] as usize;
                    let ph = ((c + self.dot[b * dim + x] as u64) % p) as usize;
                    acc += phi[x].conj() * self.roots[ph] * phi[y];
                }
                *slot = acc;
            }
        });
        out
    }

    /// `rho(g)`, memoized.
    pub fn weil_op(&self, g: &SympGroupElement) -> Result<Arc<Operator>> {
        if let Some(op) = self.cache.read().unwrap().get(g.mat()) {
            return Ok(op.clone());
        }
        let op = Arc::new(self.build(g)?);
        let size = self.dim * self.dim;
        if self.cached_entries.load(Ordering::Relaxed) + size <= CACHE_BUDGET {
            let mut cache = self.cache.write().unwrap();
            if cache.insert(g.mat().clone(), op.clone()).is_none() {
                self.cached_entries.fetch_add(size, Ordering::Relaxed);
            }
        }
        Ok(op)
    }

    /// `rho(g)` without touching the cache.
    pub fn build(&self, g: &SympGroupElement) -> Result<Operator> {
        if !self.space.is_symplectic(g.mat()) {
            return Err(Error::NotSymplectic);
        }
        if g.is_identity() {
            return Ok(Operator::identity(self.dim));
        }
        if !g.det_minus_identity().is_zero() {
            return self.build_generic(g);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(FACTORIZATION_SEED);
        for _ in 0..FACTORIZATION_RETRIES {
            let r = self.space.random_element(&mut rng);
            if r.det_minus_identity().is_zero() {
                continue;
            }
            let g1 = g.mul(&r.inverse(&self.space));
            if g1.det_minus_identity().is_zero() {
                continue;
            }
            return Ok(self.build_generic(&g1)?.mul(&self.build_generic(&r)?));
        }
        Err(Error::FactorizationSearch(FACTORIZATION_RETRIES))
    }

    fn build_generic(&self, g: &SympGroupElement) -> Result<Operator> {
        let f = self.ctx();
        let dim = self.dim;
        let p = self.p;
        let sign = weil_character(&self.space, g)? as f64;
        let qinv = g.mat().sub(&FqMatrix::identity(f, self.space.dim())).inverse()?;
        // base[a * dim + b] = Tr(omega(Q v, v)/2 + <a, b>/2), v = (a, b)
        let base: Vec<u32> = (0..dim * dim)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (k / dim, k % dim);
                let mut v = vec_from_index(f, a as u64, self.n);
                v.extend(vec_from_index(f, b as u64, self.n));
                let w = self.space.omega(&qinv.mul_vec(&v), &v);
                let t = f.abs_trace(w) + self.dot[a * dim + b] as u64;
                self.half_idx(t % p) as u32
            })
            .collect();
        let scale = sign / dim as f64;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data.par_chunks_mut(dim).enumerate().for_each(|(x, row)| {
            for (y, slot) in row.iter_mut().enumerate() {
                let a = self.add[y * dim + self.neg[x] as usize] as usize;
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..dim {
                    let idx = base[a * dim + b] + self.dot[b * dim + x];
                    acc += self.roots[(idx as u64 % p) as usize];
                }
                *slot = acc * scale;
            }
        });
        Ok(Operator::from_data(dim, data))
    }

    pub fn clear_cache(&self) {
        self.cache.write().unwrap().clear();
        self.cached_entries.store(0, Ordering::Relaxed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rep(p: u64, n: usize) -> WeilRep {
        let f = FieldCtx::prime(p).unwrap();
        WeilRep::new(&SympSpace::standard(&f, n).unwrap()).unwrap()
    }

    #[test]
    fn compose_example() {
        let f = FieldCtx::prime(5).unwrap();
        let sp = SympSpace::standard(&f, 1).unwrap();
        let h1 = HeisenbergElem::translation(vec![f.one(), f.zero()]);
        let h2 = HeisenbergElem::translation(vec![f.zero(), f.one()]);
        let h = heisenberg_compose(&sp, &h1, &h2);
        assert_eq!(h.v, vec![f.one(), f.one()]);
        assert_eq!(h.z, f.from_int(3));
        let inv = HeisenbergElem::translation(vec![f.from_int(4), f.zero()]);
        assert_eq!(heisenberg_compose(&sp, &h1, &inv), HeisenbergElem::translation(vec![f.zero(), f.zero()]));
    }

    #[test]
    fn characters_at_small_elements() {
        let f = FieldCtx::prime(5).unwrap();
        let sp = SympSpace::standard(&f, 1).unwrap();
        let g = sp.element(FqMatrix::from_ints(&f, &[vec![2, 0], vec![0, 3]]).unwrap()).unwrap();
        assert_eq!(weil_character(&sp, &g).unwrap(), -1);
        let minus = sp.element(FqMatrix::from_ints(&f, &[vec![-1, 0], vec![0, -1]]).unwrap()).unwrap();
        assert_eq!(weil_character(&sp, &minus).unwrap(), 1);
        let r = rep(5, 1);
        assert!((r.weil_op(&minus).unwrap().trace().re - 1.0).abs() < 1e-9);
        assert_eq!(weil_character(&sp, &sp.identity()), Err(Error::CharacterFormulaUndefined));
    }

    #[test]
    fn pi_central_and_trace() {
        let r = rep(7, 1);
        let f = r.ctx().clone();
        let z = f.from_int(3);
        let op = r.pi_op(&HeisenbergElem::new(vec![f.zero(), f.zero()], z));
        assert!(op.max_abs_diff(&Operator::identity(7).scale(f.additive_psi(z))) < 1e-12);
        let op = r.pi_op(&HeisenbergElem::translation(vec![f.zero(), f.one()]));
        assert!(op.trace().norm() < 1e-12);
    }

    #[test]
    fn egorov_and_homomorphism_small() {
        let r = rep(5, 1);
        let sp = r.space().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let g = sp.random_element(&mut rng);
            let h = sp.random_element(&mut rng);
            let (rg, rh) = (r.weil_op(&g).unwrap(), r.weil_op(&h).unwrap());
            assert!(rg.mul(&rh).max_abs_diff(&r.weil_op(&g.mul(&h)).unwrap()) < r.tol());
            let v = sp.random_vector(&mut rng);
            let z = sp.ctx().elem(rng.gen_range(0..5));
            let he = HeisenbergElem::new(v, z);
            let lhs = rg.mul(&r.pi_op(&he)).mul(&rg.adjoint());
            assert!(lhs.max_abs_diff(&r.pi_op(&he.act(&g))) < r.tol());
        }
    }

    #[test]
    fn f3_plane_is_excluded() {
        let f = FieldCtx::prime(3).unwrap();
        let sp = SympSpace::standard(&f, 1).unwrap();
        assert_eq!(WeilRep::new(&sp).unwrap_err(), Error::AmbiguousLinearization);
        assert!(WeilRep::new(&SympSpace::standard(&f, 2).unwrap()).is_ok());
    }
}

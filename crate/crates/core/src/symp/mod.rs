//! Symplectic spaces over `F_q`, the group `Sp(2N, F_q)`, maximal tori and
//! the torus-adapted symplectic module structure.

mod structure;
mod torus;

pub use structure::{
    module_structure, rank_from_charpoly, symplectic_rank, symplectic_rank_cheap, ModuleBlock,
    SympModuleStructure,
};
pub use torus::{
    build_maximal_torus, centralizer_torus, BlockKind, BlockSpec, Torus, TorusDescriptor,
};

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, FieldElem};
use crate::linalg::{dot, vec_scale, vec_sub, FqMatrix};

/// `(V, omega)` with `V = F_q^{2N}` and `omega(u, v) = u^T G v`.
#[derive(Clone, Debug)]
pub struct SympSpace {
    ctx: Arc<FieldCtx>,
    n: usize,
    gram: FqMatrix,
    gram_inv: FqMatrix,
    standard: bool,
}

impl PartialEq for SympSpace {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.gram == other.gram
    }
}

/// The block form `[[0, I], [-I, 0]]`.
pub fn standard_gram(ctx: &Arc<FieldCtx>, n: usize) -> FqMatrix {
    FqMatrix::from_fn(ctx, 2 * n, 2 * n, |i, j| {
        if j == i + n {
            ctx.one()
        } else if i == j + n {
            ctx.neg(ctx.one())
        } else {
            ctx.zero()
        }
    })
}

impl SympSpace {
    pub fn standard(ctx: &Arc<FieldCtx>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("half-dimension must be positive".into()));
        }
        let gram = standard_gram(ctx, n);
        let gram_inv = gram.neg();
        Ok(SympSpace { ctx: ctx.clone(), n, gram, gram_inv, standard: true })
    }

    /// Space with an arbitrary antisymmetric invertible Gram matrix.
    pub fn with_gram(ctx: &Arc<FieldCtx>, gram: FqMatrix) -> Result<Self> {
        let dim = gram.rows();
        if !gram.is_square() || dim == 0 || dim % 2 == 1 {
            return Err(Error::Domain("Gram matrix must be square of even size".into()));
        }
        if gram.transpose() != gram.neg() || (0..dim).any(|i| !gram[(i, i)].is_zero()) {
            return Err(Error::Domain("Gram matrix is not alternating".into()));
        }
        let gram_inv = gram
            .inverse()
            .map_err(|_| Error::Domain("Gram matrix is degenerate".into()))?;
        let standard = gram == standard_gram(ctx, dim / 2);
        Ok(SympSpace { ctx: ctx.clone(), n: dim / 2, gram, gram_inv, standard })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    /// `N`, half the dimension.
    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn gram(&self) -> &FqMatrix {
        &self.gram
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn omega(&self, u: &[FieldElem], v: &[FieldElem]) -> FieldElem {
        dot(&self.ctx, u, &self.gram.mul_vec(v))
    }

    /// `R^t = G^{-1} R^T G`, the adjoint for `omega`.
    pub fn symplectic_transpose(&self, r: &FqMatrix) -> FqMatrix {
        self.gram_inv.mul(&r.transpose()).mul(&self.gram)
    }

    pub fn is_symplectic(&self, m: &FqMatrix) -> bool {
        m.rows() == self.dim() && m.cols() == self.dim() && m.transpose().mul(&self.gram).mul(m) == self.gram
    }

    pub fn element(&self, mat: FqMatrix) -> Result<SympGroupElement> {
        if !self.is_symplectic(&mat) {
            return Err(Error::NotSymplectic);
        }
        Ok(SympGroupElement { mat })
    }

    pub fn identity(&self) -> SympGroupElement {
        SympGroupElement { mat: FqMatrix::identity(&self.ctx, self.dim()) }
    }

    pub fn zero_vector(&self) -> Vec<FieldElem> {
        vec![self.ctx.zero(); self.dim()]
    }

    pub fn random_vector(&self, rng: &mut impl Rng) -> Vec<FieldElem> {
        (0..self.dim()).map(|_| self.ctx.elem(rng.gen_range(0..self.ctx.order()))).collect()
    }

    /// Transvection `x -> x + c omega(u, x) u`.
    pub fn transvection(&self, u: &[FieldElem], c: FieldElem) -> SympGroupElement {
        let f = &self.ctx;
        let gu = self.gram.transpose().mul_vec(u);
        // column j: e_j + c omega(u, e_j) u, omega(u, e_j) = (G^T u)_j
        let mat = FqMatrix::from_fn(f, self.dim(), self.dim(), |i, j| {
            let base = if i == j { f.one() } else { f.zero() };
            f.add(base, f.mul(c, f.mul(gu[j], u[i])))
        });
        SympGroupElement { mat }
    }

    /// A random element of `Sp`, as a product of random transvections.
    pub fn random_element(&self, rng: &mut impl Rng) -> SympGroupElement {
        let mut g = self.identity();
        for _ in 0..4 * self.dim() + 4 {
            let u = self.random_vector(rng);
            let c = self.ctx.elem(rng.gen_range(0..self.ctx.order()));
            g = g.mul(&self.transvection(&u, c));
        }
        g
    }

    /// Columns `e_1..e_N, f_1..f_N` with `omega(e_i, f_j) = delta_ij` and all
    /// other pairings zero.
    pub fn symplectic_basis(&self) -> FqMatrix {
        symplectic_gram_schmidt(&self.ctx, &self.gram).expect("gram is non-degenerate")
    }
}

/// Symplectic Gram-Schmidt for an alternating non-degenerate form.
pub(crate) fn symplectic_gram_schmidt(ctx: &Arc<FieldCtx>, gram: &FqMatrix) -> Result<FqMatrix> {
    let dim = gram.rows();
    let n = dim / 2;
    let omega = |u: &[FieldElem], v: &[FieldElem]| dot(ctx, u, &gram.mul_vec(v));
    let mut pool: Vec<Vec<FieldElem>> =
        (0..dim).map(|j| (0..dim).map(|i| if i == j { ctx.one() } else { ctx.zero() }).collect()).collect();
    let (mut es, mut fs) = (Vec::new(), Vec::new());
    while let Some(u) = pool.first().cloned() {
        let Some(w) = pool.iter().find(|w| !omega(&u, w).is_zero()).cloned() else {
            return Err(Error::Domain("degenerate alternating form".into()));
        };
        let e = u;
        let f = vec_scale(ctx, ctx.inv(omega(&e, &w))?, &w);
        pool = pool
            .into_iter()
            .map(|x| {
                let a = omega(&x, &f);
                let b = omega(&x, &e);
                let y = vec_sub(ctx, &x, &vec_scale(ctx, a, &e));
                crate::linalg::vec_add(ctx, &y, &vec_scale(ctx, b, &f))
            })
            .filter(|x| x.iter().any(|c| !c.is_zero()))
            .collect();
        es.push(e);
        fs.push(f);
    }
    if es.len() != n {
        return Err(Error::Consistency("symplectic basis has wrong size".into()));
    }
    let cols: Vec<&Vec<FieldElem>> = es.iter().chain(fs.iter()).collect();
    Ok(FqMatrix::from_fn(ctx, dim, dim, |i, j| cols[j][i]))
}

/// An element of `Sp(V, omega)`; symplecticity is checked on construction.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SympGroupElement {
    mat: FqMatrix,
}

impl SympGroupElement {
    pub fn mat(&self) -> &FqMatrix {
        &self.mat
    }

    pub fn mul(&self, other: &Self) -> Self {
        SympGroupElement { mat: self.mat.mul(&other.mat) }
    }

    pub fn inverse(&self, space: &SympSpace) -> Self {
        SympGroupElement { mat: space.symplectic_transpose(&self.mat) }
    }

    pub fn pow(&self, e: u64) -> Self {
        SympGroupElement { mat: self.mat.pow(e) }
    }

    pub fn apply(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        self.mat.mul_vec(v)
    }

    pub fn is_identity(&self) -> bool {
        self.mat.is_identity()
    }

    /// `det(g - I)`.
    pub fn det_minus_identity(&self) -> FieldElem {
        let n = self.mat.rows();
        self.mat.sub(&FqMatrix::identity(self.mat.ctx(), n)).det()
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.mat.to_json()
    }
}

/// Elements of the commutant algebra `{X : X g = g X for all g}`, as a basis.
pub(crate) fn commutant_basis(ctx: &Arc<FieldCtx>, mats: &[&FqMatrix], dim: usize) -> Vec<FqMatrix> {
    let n2 = dim * dim;
    let mut rows: Vec<Vec<FieldElem>> = Vec::new();
    for g in mats {
        // (Xg - gX)_{ij} = sum_k X_ik g_kj - g_ik X_kj
        for i in 0..dim {
            for j in 0..dim {
                let mut row = vec![ctx.zero(); n2];
                for k in 0..dim {
                    let a = &mut row[i * dim + k];
                    *a = ctx.add(*a, g[(k, j)]);
                    let b = &mut row[k * dim + j];
                    *b = ctx.sub(*b, g[(i, k)]);
                }
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        rows.push(vec![ctx.zero(); n2]);
    }
    let sys = FqMatrix::from_fn(ctx, rows.len(), n2, |i, j| rows[i][j]);
    sys.nullspace()
        .into_iter()
        .map(|v| FqMatrix::from_fn(ctx, dim, dim, |i, j| v[i * dim + j]))
        .collect()
}

/// Index of each element of a finite list, for membership lookups.
pub(crate) fn index_map(elems: &[SympGroupElement]) -> HashMap<SympGroupElement, usize> {
    elems.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect()
}

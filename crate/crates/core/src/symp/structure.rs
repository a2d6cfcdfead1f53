//! The canonical symplectic module structure attached to a maximal torus.
//!
//! `A = Z(T, End V)` is a commutative algebra of dimension `2N`; its
//! subalgebra `K` fixed by the symplectic transpose has dimension `N` and
//! splits as a product of fields `K_alpha`. Each `V_alpha = E_alpha V` is a
//! free `K_alpha`-module of rank 2 carrying the `K_alpha`-valued form
//! characterized by `Tr(a wbar(x, y)) = omega(a x, y)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::torus::{BlockKind, BlockSpec, Torus, TorusDescriptor};
use super::{commutant_basis, SympGroupElement, SympSpace};
use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, FieldElem, FieldEmbedding, Poly, PolyRing, RelativeBasis};
use crate::linalg::{vec_add, FqMatrix};

const DECOMPOSE_SEED: u64 = 0xdec0;
const DECOMPOSE_ATTEMPTS: usize = 256;

/// A field summand `K_alpha E_alpha` of a commutative semisimple algebra of
/// matrices.
#[derive(Clone, Debug)]
pub(crate) struct AlgBlock {
    pub idempotent: FqMatrix,
    pub field: Arc<FieldCtx>,
    pub emb: FieldEmbedding,
    pub theta: FieldElem,
    pub degree: usize,
    // Y^0 = E, Y, ..., Y^{d-1}
    powers: Vec<FqMatrix>,
    rb: RelativeBasis,
}

impl AlgBlock {
    /// The matrix by which `a in K_alpha` acts (zero off the block).
    pub fn matrix_of(&self, a: FieldElem) -> FqMatrix {
        let c = self.rb.coordinates(a);
        let k = self.idempotent.ctx();
        let n = self.idempotent.rows();
        c.iter()
            .zip(&self.powers)
            .fold(FqMatrix::zeros(k, n, n), |acc, (&ci, p)| acc.add(&p.scale(ci)))
    }

    /// Inverse of [`matrix_of`], if `x` lies in `K_alpha E_alpha`.
    pub fn field_elem_of(&self, x: &FqMatrix) -> Option<FieldElem> {
        let k = self.idempotent.ctx();
        let sys = FqMatrix::from_fn(k, x.data().len(), self.degree, |r, c| self.powers[c].data()[r]);
        let c = sys.solve(x.data())?;
        Some(self.rb.combine(&c))
    }
}

/// Minimal polynomial of `y` inside the algebra with unit `e`.
fn minpoly_with_unit(k: &Arc<FieldCtx>, y: &FqMatrix, e: &FqMatrix) -> (Poly, Vec<FqMatrix>) {
    let mut powers = vec![e.clone()];
    loop {
        let next = powers.last().unwrap().mul(y);
        let sys = FqMatrix::from_fn(k, next.data().len(), powers.len(), |r, c| powers[c].data()[r]);
        if let Some(sol) = sys.solve(next.data()) {
            let mut coeffs: Vec<FieldElem> = sol.iter().map(|&c| k.neg(c)).collect();
            coeffs.push(k.one());
            return (Poly::from_elems(coeffs), powers);
        }
        powers.push(next);
    }
}

fn eval_with_unit(k: &Arc<FieldCtx>, f: &Poly, powers: &[FqMatrix], y: &FqMatrix) -> FqMatrix {
    let n = y.rows();
    let mut acc = FqMatrix::zeros(k, n, n);
    let mut p = powers[0].clone();
    for &c in f.coeffs() {
        acc = acc.add(&p.scale(c));
        p = p.mul(y);
    }
    acc
}

/// Split a commutative semisimple algebra (given by a basis containing the
/// identity in its span) into field summands.
pub(crate) fn decompose_algebra(space: &SympSpace, basis: &[FqMatrix]) -> Result<Vec<AlgBlock>> {
    let k = space.ctx();
    let ring = PolyRing::new(k);
    let dim = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(DECOMPOSE_SEED);
    let mut work = vec![FqMatrix::identity(k, dim)];
    let mut done = Vec::new();
    while let Some(e) = work.pop() {
        let sub: Vec<FqMatrix> = basis.iter().map(|b| b.mul(&e)).collect();
        let span = FqMatrix::from_fn(k, sub.len(), dim * dim, |i, j| sub[i].data()[j]).rank();
        let mut finished = false;
        for _ in 0..DECOMPOSE_ATTEMPTS {
            let y = sub.iter().fold(FqMatrix::zeros(k, dim, dim), |acc, b| {
                acc.add(&b.scale(k.elem(rng.gen_range(0..k.order()))))
            });
            let (f, powers) = minpoly_with_unit(k, &y, &e);
            let factors = ring.factor(&f)?;
            if factors.iter().any(|(_, m)| *m > 1) {
                return Err(Error::NotMaximal("centralizer algebra is not semisimple".into()));
            }
            if factors.len() > 1 {
                for (fi, _) in &factors {
                    let g = ring.divrem(&f, fi).0;
                    let (_, s, _) = ring.xgcd(&g, fi);
                    let idem = ring.rem(&ring.mul(&g, &s), &f);
                    work.push(eval_with_unit(k, &idem, &powers, &y));
                }
                finished = true;
                break;
            }
            let d = f.degree().unwrap();
            if d == span {
                done.push(make_block(k, e.clone(), &f, powers)?);
                finished = true;
                break;
            }
        }
        if !finished {
            return Err(Error::Consistency("algebra decomposition did not converge".into()));
        }
    }
    // order blocks by the first coordinate they touch
    let first = |b: &AlgBlock| (0..dim).find(|&j| (0..dim).any(|i| !b.idempotent[(i, j)].is_zero()));
    done.sort_by_key(first);
    Ok(done)
}

fn make_block(k: &Arc<FieldCtx>, e: FqMatrix, f: &Poly, powers: Vec<FqMatrix>) -> Result<AlgBlock> {
    let d = f.degree().unwrap();
    let field = FieldCtx::new(k.characteristic(), k.degree() * d)?;
    let emb = FieldEmbedding::new(k, &field)?;
    let lifted = Poly::from_elems(f.coeffs().iter().map(|&c| emb.embed(c)).collect());
    let theta = *PolyRing::new(&field)
        .roots(&lifted)
        .first()
        .ok_or_else(|| Error::Consistency("irreducible factor has no root in its field".into()))?;
    let rb = RelativeBasis::power(&emb, theta)?;
    Ok(AlgBlock { idempotent: e, field, emb, theta, degree: d, powers: powers[..d].to_vec(), rb })
}

/// Basis of `{X in span(algebra) : X^t = X}`.
pub(crate) fn theta_fixed_basis(space: &SympSpace, algebra: &[FqMatrix]) -> Vec<FqMatrix> {
    let k = space.ctx();
    let diffs: Vec<FqMatrix> =
        algebra.iter().map(|x| space.symplectic_transpose(x).sub(x)).collect();
    let n2 = space.dim() * space.dim();
    let sys = FqMatrix::from_fn(k, n2, algebra.len(), |r, c| diffs[c].data()[r]);
    sys.nullspace()
        .into_iter()
        .map(|c| {
            c.iter()
                .zip(algebra)
                .fold(FqMatrix::zeros(k, space.dim(), space.dim()), |acc, (&ci, x)| acc.add(&x.scale(ci)))
        })
        .collect()
}

/// One summand `(K_alpha, V_alpha, wbar_alpha)`.
#[derive(Clone, Debug)]
pub struct ModuleBlock {
    alg: AlgBlock,
    space: SympSpace,
    kind: BlockKind,
    u: Vec<FieldElem>,
    w: Vec<FieldElem>,
    trace_gram_inv: FqMatrix,
}

impl ModuleBlock {
    fn new(space: &SympSpace, alg: AlgBlock) -> Result<Self> {
        let k = space.ctx();
        let d = alg.degree;
        let pw: Vec<FieldElem> = (0..2 * d).map(|i| alg.field.pow(alg.theta, i as u128)).collect();
        let tg = FqMatrix::from_fn(k, d, d, |i, j| alg.emb.trace(pw[i + j]));
        let trace_gram_inv = tg.inverse()?;
        let mut blk = ModuleBlock {
            alg,
            space: space.clone(),
            kind: BlockKind::Split,
            u: Vec::new(),
            w: Vec::new(),
            trace_gram_inv,
        };
        let e = &blk.alg.idempotent;
        let cols: Vec<Vec<FieldElem>> =
            (0..space.dim()).map(|j| e.col(j)).filter(|c| c.iter().any(|x| !x.is_zero())).collect();
        let u = cols[0].clone();
        let (b, pairing) = cols
            .iter()
            .find_map(|b| {
                let s = blk.omega_bar(&u, b);
                (!s.is_zero()).then(|| (b.clone(), s))
            })
            .ok_or_else(|| Error::Consistency("wbar is degenerate on a block".into()))?;
        let w = blk.act_vec(blk.alg.field.inv(pairing)?, &b);
        blk.u = u;
        blk.w = w;
        Ok(blk)
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.alg.field
    }

    /// The embedding `k -> K_alpha`.
    pub fn embedding(&self) -> &FieldEmbedding {
        &self.alg.emb
    }

    /// `[K_alpha : k]`.
    pub fn degree(&self) -> usize {
        self.alg.degree
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn spec(&self) -> BlockSpec {
        BlockSpec { kind: self.kind, degree: self.alg.degree }
    }

    /// The projector `E_alpha` onto `V_alpha`.
    pub fn idempotent(&self) -> &FqMatrix {
        &self.alg.idempotent
    }

    /// `K`-basis `(u, w)` of `V_alpha` with `wbar(u, w) = 1`.
    pub fn k_basis(&self) -> (&[FieldElem], &[FieldElem]) {
        (&self.u, &self.w)
    }

    /// The matrix of `a in K_alpha` acting on `V` (zero off `V_alpha`).
    pub fn act(&self, a: FieldElem) -> FqMatrix {
        self.alg.matrix_of(a)
    }

    pub fn act_vec(&self, a: FieldElem, v: &[FieldElem]) -> Vec<FieldElem> {
        self.act(a).mul_vec(v)
    }

    pub fn project(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        self.alg.idempotent.mul_vec(v)
    }

    /// `wbar_alpha(E x, E y)`.
    pub fn omega_bar(&self, x: &[FieldElem], y: &[FieldElem]) -> FieldElem {
        let k = self.space.ctx();
        let (x, y) = (self.project(x), self.project(y));
        let rhs: Vec<FieldElem> =
            self.alg.powers.iter().map(|p| self.space.omega(&p.mul_vec(&x), &y)).collect();
        let c = self.trace_gram_inv.mul_vec(&rhs);
        let f = &self.alg.field;
        let _ = k;
        c.iter().enumerate().fold(f.zero(), |acc, (j, &cj)| {
            f.add(acc, f.mul(self.alg.emb.embed(cj), f.pow(self.alg.theta, j as u128)))
        })
    }

    /// `(a, b)` with `E x = a u + b w`.
    pub fn coords(&self, x: &[FieldElem]) -> (FieldElem, FieldElem) {
        (self.omega_bar(x, &self.w), self.omega_bar(&self.u, x))
    }

    pub fn from_coords(&self, a: FieldElem, b: FieldElem) -> Vec<FieldElem> {
        vec_add(self.space.ctx(), &self.act_vec(a, &self.u), &self.act_vec(b, &self.w))
    }

    /// The `K_alpha`-matrix of a `K`-linear `g` on `V_alpha` in the basis `(u, w)`.
    pub fn k_matrix(&self, g: &FqMatrix) -> [[FieldElem; 2]; 2] {
        let (a0, b0) = self.coords(&g.mul_vec(&self.u));
        let (a1, b1) = self.coords(&g.mul_vec(&self.w));
        [[a0, a1], [b0, b1]]
    }

    /// `det_K(g - I)` on the block.
    pub fn det_minus_identity(&self, g: &FqMatrix) -> FieldElem {
        let f = &self.alg.field;
        let m = self.k_matrix(g);
        let a = f.sub(m[0][0], f.one());
        let d = f.sub(m[1][1], f.one());
        f.sub(f.mul(a, d), f.mul(m[0][1], m[1][0]))
    }
}

/// `(K, V, wbar)` as a list of blocks.
#[derive(Clone, Debug)]
pub struct SympModuleStructure {
    space: SympSpace,
    blocks: Vec<ModuleBlock>,
}

impl SympModuleStructure {
    pub fn space(&self) -> &SympSpace {
        &self.space
    }

    pub fn blocks(&self) -> &[ModuleBlock] {
        &self.blocks
    }

    /// Symplectic rank `|Xi|`.
    pub fn rank(&self) -> usize {
        self.blocks.len()
    }

    pub fn descriptor(&self) -> TorusDescriptor {
        TorusDescriptor::new(self.space.ctx(), self.blocks.iter().map(|b| b.spec()).collect())
    }

    /// For each torus generator, the unique block on which it acts
    /// non-trivially.
    pub fn generator_blocks(&self, t: &Torus) -> Result<Vec<usize>> {
        let k = self.space.ctx();
        let id = FqMatrix::identity(k, self.space.dim());
        t.generators()
            .iter()
            .map(|g| {
                let moved = g.mat().sub(&id);
                let hits: Vec<usize> = (0..self.blocks.len())
                    .filter(|&i| !moved.mul(self.blocks[i].idempotent()).is_zero())
                    .collect();
                match hits[..] {
                    [i] => Ok(i),
                    _ => Err(Error::Domain("torus generator is not supported on a single block".into())),
                }
            })
            .collect()
    }

    /// The canonical embedding of `prod SL(2, K_alpha)` into `Sp(V)`.
    pub fn embed_sl2(&self, mats: &[[[FieldElem; 2]; 2]]) -> Result<SympGroupElement> {
        if mats.len() != self.blocks.len() {
            return Err(Error::Domain("one 2x2 matrix per block".into()));
        }
        let k = self.space.ctx();
        let dim = self.space.dim();
        let mut cols = vec![vec![k.zero(); dim]; dim];
        for (blk, m) in self.blocks.iter().zip(mats) {
            let f = blk.field();
            for (j, col) in cols.iter_mut().enumerate() {
                let mut ej = vec![k.zero(); dim];
                ej[j] = k.one();
                let (a, b) = blk.coords(&ej);
                let a2 = f.add(f.mul(m[0][0], a), f.mul(m[0][1], b));
                let b2 = f.add(f.mul(m[1][0], a), f.mul(m[1][1], b));
                *col = vec_add(k, col, &blk.from_coords(a2, b2));
            }
        }
        self.space.element(FqMatrix::from_fn(k, dim, dim, |i, j| cols[j][i]))
    }

    /// Check `sum_alpha Tr wbar_alpha = omega` on basis pairs and invariance
    /// of every `wbar_alpha` under the given elements.
    pub fn verify(&self, elements: &[SympGroupElement]) -> Result<()> {
        let k = self.space.ctx();
        let dim = self.space.dim();
        let basis: Vec<Vec<FieldElem>> = (0..dim)
            .map(|j| (0..dim).map(|i| if i == j { k.one() } else { k.zero() }).collect())
            .collect();
        for x in &basis {
            for y in &basis {
                let total = self
                    .blocks
                    .iter()
                    .fold(k.zero(), |acc, b| k.add(acc, b.embedding().trace(b.omega_bar(x, y))));
                if total != self.space.omega(x, y) {
                    return Err(Error::Consistency("Tr wbar differs from omega".into()));
                }
                for g in elements {
                    let (gx, gy) = (g.apply(x), g.apply(y));
                    for b in &self.blocks {
                        if b.omega_bar(&gx, &gy) != b.omega_bar(x, y) {
                            return Err(Error::Consistency("wbar is not torus-invariant".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The canonical module structure of a maximal torus.
pub fn module_structure(t: &Torus) -> Result<SympModuleStructure> {
    let space = t.space();
    let n = space.half_dim();
    let gens: Vec<&FqMatrix> = t.generators().iter().map(|g| g.mat()).collect();
    let algebra = commutant_basis(space.ctx(), &gens, space.dim());
    if algebra.len() != 2 * n {
        return Err(Error::NotMaximal(format!(
            "centralizer algebra has dimension {} instead of {}",
            algebra.len(),
            2 * n
        )));
    }
    let kbasis = theta_fixed_basis(space, &algebra);
    if kbasis.len() != n {
        return Err(Error::NotMaximal(format!("transpose-fixed part has dimension {}", kbasis.len())));
    }
    let mut blocks = Vec::new();
    for alg in decompose_algebra(space, &kbasis)? {
        let mut blk = ModuleBlock::new(space, alg)?;
        let f = blk.field().clone();
        let kind = t.generators().iter().find_map(|g| {
            let m = blk.k_matrix(g.mat());
            let tr = f.add(m[0][0], m[1][1]);
            let disc = f.sub(f.square(tr), f.from_int(4));
            (!disc.is_zero()).then(|| if f.is_square(disc) { BlockKind::Split } else { BlockKind::Inert })
        });
        blk.kind = kind.ok_or_else(|| Error::NotMaximal("torus acts by scalars on a block".into()))?;
        blocks.push(blk);
    }
    let ms = SympModuleStructure { space: space.clone(), blocks };
    ms.verify(t.generators())?;
    Ok(ms)
}

/// Block types from the characteristic polynomial of a regular element, by
/// pairing each irreducible factor with its reciprocal dual.
pub fn rank_from_charpoly(ctx: &FieldCtx, cp: &Poly) -> Result<Vec<BlockSpec>> {
    let ring = PolyRing::new(ctx);
    let factors = ring.factor(cp)?;
    if factors.iter().any(|(_, m)| *m > 1) {
        return Err(Error::DegenerateCentralizer("characteristic polynomial is not squarefree".into()));
    }
    let mut used = vec![false; factors.len()];
    let mut specs = Vec::new();
    for i in 0..factors.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let f = &factors[i].0;
        let deg = f.degree().unwrap();
        let dual = ring.reciprocal(f)?;
        if dual == *f {
            if deg == 1 {
                return Err(Error::DegenerateCentralizer("eigenvalue +-1".into()));
            }
            if deg % 2 == 1 {
                return Err(Error::Consistency("odd-degree self-dual factor".into()));
            }
            specs.push(BlockSpec::inert(deg / 2));
        } else {
            let j = (0..factors.len())
                .find(|&j| !used[j] && factors[j].0 == dual)
                .ok_or(Error::NotSymplectic)?;
            used[j] = true;
            specs.push(BlockSpec::split(deg));
        }
    }
    specs.sort();
    Ok(specs)
}

/// Symplectic type and rank `r = |Xi|`.
///
/// The cheap path reads the type off the characteristic polynomial of a
/// regular torus element. Some small-field tori (e.g. split x split in
/// `Sp(4, F_5)`) contain no regular element; those fall back to the full
/// module structure.
pub fn symplectic_rank(t: &Torus) -> Result<(Vec<BlockSpec>, usize)> {
    let specs = match symplectic_rank_cheap(t) {
        Some(specs) => specs,
        None => {
            let mut specs: Vec<BlockSpec> = module_structure(t)?.blocks().iter().map(|b| b.spec()).collect();
            specs.sort();
            specs
        }
    };
    let r = specs.len();
    Ok((specs, r))
}

/// The characteristic-polynomial path alone; `None` when no torus element is
/// regular.
pub fn symplectic_rank_cheap(t: &Torus) -> Option<Vec<BlockSpec>> {
    let ctx = t.space().ctx();
    t.elements().iter().skip(1).find_map(|g| rank_from_charpoly(ctx, &g.mat().charpoly()).ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symp::build_maximal_torus;

    fn torus(p: u64, n: usize, kind: &str) -> Torus {
        let f = FieldCtx::prime(p).unwrap();
        let sp = SympSpace::standard(&f, n).unwrap();
        build_maximal_torus(&sp, &TorusDescriptor::parse(kind, &f, n).unwrap()).unwrap()
    }

    #[test]
    fn irreducible_torus_has_one_field_block() {
        let t = torus(5, 2, "irreducible");
        let ms = module_structure(&t).unwrap();
        assert_eq!(ms.rank(), 1);
        assert_eq!(ms.blocks()[0].degree(), 2);
        assert_eq!(ms.blocks()[0].field().order(), 25);
        assert_eq!(symplectic_rank(&t).unwrap(), (vec![BlockSpec::inert(2)], 1));
        ms.verify(t.elements()).unwrap();
    }

    #[test]
    fn sl2_split_has_trivial_structure() {
        let t = torus(7, 1, "split");
        let ms = module_structure(&t).unwrap();
        assert_eq!(ms.rank(), 1);
        let b = &ms.blocks()[0];
        assert_eq!(b.field().order(), 7);
        assert_eq!(b.kind(), BlockKind::Split);
        let sp = t.space();
        let e0 = vec![sp.ctx().one(), sp.ctx().zero()];
        let e1 = vec![sp.ctx().zero(), sp.ctx().one()];
        assert_eq!(b.omega_bar(&e0, &e1), sp.omega(&e0, &e1));
        let inert = torus(5, 1, "inert");
        assert_eq!(module_structure(&inert).unwrap().blocks()[0].kind(), BlockKind::Inert);
    }

    #[test]
    fn structure_matches_descriptor_for_all_sp4_types() {
        for p in [5u64, 7] {
            let f = FieldCtx::prime(p).unwrap();
            for blocks in TorusDescriptor::all_types(2) {
                let d = TorusDescriptor::new(&f, blocks.clone());
                let sp = SympSpace::standard(&f, 2).unwrap();
                let t = build_maximal_torus(&sp, &d).unwrap();
                let ms = module_structure(&t).unwrap();
                let mut got: Vec<_> = ms.blocks().iter().map(|b| b.spec()).collect();
                got.sort();
                let mut want = blocks.clone();
                want.sort();
                assert_eq!(got, want, "p={p} {}", d.label());
                assert_eq!(symplectic_rank(&t).unwrap().0, want);
                if let Some(cheap) = symplectic_rank_cheap(&t) {
                    assert_eq!(cheap, want);
                }
            }
        }
    }

    #[test]
    fn embedded_sl2_lands_in_sp() {
        let t = torus(5, 2, "irreducible");
        let ms = module_structure(&t).unwrap();
        let f = ms.blocks()[0].field().clone();
        let (o, z) = (f.one(), f.zero());
        let x = f.generator();
        for m in [[[o, x], [z, o]], [[o, z], [x, o]], [[x, z], [z, f.inv(x).unwrap()]]] {
            let g = ms.embed_sl2(&[m]).unwrap();
            assert_eq!(ms.blocks()[0].k_matrix(g.mat()), m);
        }
    }

    #[test]
    fn q3_split_block_is_not_maximal() {
        let t = torus(3, 2, "split+inert");
        assert!(matches!(module_structure(&t), Err(Error::NotMaximal(_))));
        assert!(symplectic_rank(&t).is_err());
    }
}

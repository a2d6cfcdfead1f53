//! Maximal tori: construction from block types and as centralizers.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::structure::{decompose_algebra, theta_fixed_basis};
use super::{symplectic_gram_schmidt, SympGroupElement, SympSpace};
use crate::error::{Error, Result};
use crate::gfq::{checked_pow, FieldCtx, FieldElem, FieldEmbedding, Poly, PolyRing, RelativeBasis};
use crate::linalg::FqMatrix;

/// How a block of the torus sits over its field `K_alpha`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// `K^*` acting as `diag(a, a^{-1})`, order `q^d - 1`.
    Split,
    /// Norm-one elements of the quadratic extension of `K`, order `q^d + 1`.
    #[serde(alias = "irreducible")]
    Inert,
}

/// One block of a torus: its kind and the degree `d = [K_alpha : k]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct BlockSpec {
    #[serde(rename = "type")]
    pub kind: BlockKind,
    #[serde(default = "default_degree")]
    pub degree: usize,
}

fn default_degree() -> usize {
    1
}

impl BlockSpec {
    pub fn split(degree: usize) -> Self {
        BlockSpec { kind: BlockKind::Split, degree }
    }

    pub fn inert(degree: usize) -> Self {
        BlockSpec { kind: BlockKind::Inert, degree }
    }

    /// Order of the block torus over `F_q`.
    pub fn order(&self, q: u64) -> Result<u64> {
        let qd = checked_pow(q, self.degree).ok_or(Error::Overflow("torus order"))?;
        Ok(match self.kind {
            BlockKind::Split => qd - 1,
            BlockKind::Inert => qd + 1,
        })
    }
}

impl fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            BlockKind::Split => "split",
            BlockKind::Inert => "inert",
        };
        write!(f, "{k}:{}", self.degree)
    }
}

/// Serializable torus type: `{blocks: [{type, degree}], p, m}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TorusDescriptor {
    pub blocks: Vec<BlockSpec>,
    pub p: u64,
    pub m: usize,
}

impl TorusDescriptor {
    pub fn new(ctx: &FieldCtx, blocks: Vec<BlockSpec>) -> Self {
        TorusDescriptor { blocks, p: ctx.characteristic(), m: ctx.degree() }
    }

    /// Parse `split`, `inert`, `irreducible` or `+`-joined `kind[:degree]`
    /// tokens. A bare `irreducible` means one inert block of degree `n`.
    pub fn parse(s: &str, ctx: &FieldCtx, n: usize) -> Result<Self> {
        let s = s.trim();
        if s == "irreducible" {
            return Ok(Self::new(ctx, vec![BlockSpec::inert(n)]));
        }
        let mut blocks = Vec::new();
        for tok in s.split('+') {
            let (kind, deg) = match tok.split_once(':') {
                Some((k, d)) => {
                    (k.trim(), d.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad degree in {tok:?}")))?)
                }
                None => (tok.trim(), 1),
            };
            let kind = match kind {
                "split" => BlockKind::Split,
                "inert" | "irreducible" => BlockKind::Inert,
                other => return Err(Error::Config(format!("unknown block type {other:?}"))),
            };
            if deg == 0 {
                return Err(Error::Config("block degree must be positive".into()));
            }
            blocks.push(BlockSpec { kind, degree: deg });
        }
        Ok(Self::new(ctx, blocks))
    }

    pub fn half_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.degree).sum()
    }

    /// Compact label like `split:1+inert:1`.
    pub fn label(&self) -> String {
        self.blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("+")
    }

    /// Every block type list (sorted, as a multiset) of total degree `n`.
    pub fn all_types(n: usize) -> Vec<Vec<BlockSpec>> {
        fn rec(left: usize, min: BlockSpec, cur: &mut Vec<BlockSpec>, out: &mut Vec<Vec<BlockSpec>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for d in 1..=left {
                for kind in [BlockKind::Split, BlockKind::Inert] {
                    let b = BlockSpec { kind, degree: d };
                    if (b.degree, b.kind) < (min.degree, min.kind) {
                        continue;
                    }
                    cur.push(b);
                    rec(left - d, b, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(n, BlockSpec::split(1), &mut Vec::new(), &mut out);
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("descriptor serializes")
    }
}

/// A finite abelian subgroup of `Sp`, stored as a direct product of cyclic
/// groups with explicit generators.
///
/// Elements are enumerated in lexicographic order of their exponent tuples,
/// the first generator varying slowest.
#[derive(Clone)]
pub struct Torus {
    space: SympSpace,
    generators: Vec<SympGroupElement>,
    orders: Vec<u64>,
    elements: Vec<SympGroupElement>,
    lookup: HashMap<SympGroupElement, usize>,
    descriptor: Option<TorusDescriptor>,
}

impl fmt::Debug for Torus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Torus(orders {:?}, {:?})", self.orders, self.descriptor.as_ref().map(|d| d.label()))
    }
}

/// Upper bound on the number of enumerated torus elements.
pub const MAX_TORUS_ORDER: u64 = 1 << 16;

impl Torus {
    /// Torus generated by commuting elements of the given exact orders,
    /// generating an internal direct product.
    pub fn from_generators(
        space: &SympSpace,
        generators: Vec<SympGroupElement>,
        orders: Vec<u64>,
    ) -> Result<Self> {
        if generators.len() != orders.len() {
            return Err(Error::Domain("one order per generator".into()));
        }
        let total: u64 = orders.iter().try_fold(1u64, |a, &o| a.checked_mul(o)).ok_or(Error::Overflow("torus order"))?;
        if total > MAX_TORUS_ORDER {
            return Err(Error::TooLarge { dim: total, bound: MAX_TORUS_ORDER });
        }
        for (g, &o) in generators.iter().zip(&orders) {
            if !space.is_symplectic(g.mat()) {
                return Err(Error::NotSymplectic);
            }
            if !g.pow(o).is_identity() {
                return Err(Error::Consistency(format!("generator order is not {o}")));
            }
            for r in crate::gfq::prime_divisors(o as u128) {
                if g.pow(o / r as u64).is_identity() {
                    return Err(Error::Consistency(format!("generator order is smaller than {o}")));
                }
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if a.mul(b) != b.mul(a) {
                    return Err(Error::Domain("torus generators do not commute".into()));
                }
            }
        }
        let mut elements = vec![space.identity()];
        for (g, &o) in generators.iter().zip(&orders) {
            let mut next = Vec::with_capacity(elements.len() * o as usize);
            for x in &elements {
                let mut cur = x.clone();
                for _ in 0..o {
                    next.push(cur.clone());
                    cur = cur.mul(g);
                }
            }
            elements = next;
        }
        let lookup = super::index_map(&elements);
        if lookup.len() != elements.len() {
            return Err(Error::Consistency("generators are not independent".into()));
        }
        Ok(Torus { space: space.clone(), generators, orders, elements, lookup, descriptor: None })
    }

    pub fn space(&self) -> &SympSpace {
        &self.space
    }

    pub fn generators(&self) -> &[SympGroupElement] {
        &self.generators
    }

    /// Orders of the cyclic factors.
    pub fn structure(&self) -> &[u64] {
        &self.orders
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn elements(&self) -> &[SympGroupElement] {
        &self.elements
    }

    /// Exponent tuple of the element at `idx`.
    pub fn exponents(&self, mut idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.orders.len()];
        for (slot, &o) in out.iter_mut().zip(&self.orders).rev() {
            *slot = idx as u64 % o;
            idx /= o as usize;
        }
        out
    }

    pub fn index_of(&self, g: &SympGroupElement) -> Option<usize> {
        self.lookup.get(g).copied()
    }

    pub fn contains(&self, g: &SympGroupElement) -> bool {
        self.lookup.contains_key(g)
    }

    pub fn descriptor(&self) -> Option<&TorusDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn label(&self) -> String {
        self.descriptor.as_ref().map_or_else(|| "centralizer".to_string(), |d| d.label())
    }
}

fn multiplication_matrix(rb: &RelativeBasis, c: FieldElem) -> FqMatrix {
    let big = rb.embedding().big();
    let small = rb.embedding().small();
    let cols: Vec<Vec<FieldElem>> =
        rb.elements().iter().map(|&b| rb.coordinates(big.mul(c, b))).collect();
    let n = cols.len();
    FqMatrix::from_fn(small, n, n, |i, j| cols[j][i])
}

/// `diag(M_zeta, M_zeta^{-T})` on `K^2`, `K = F_{q^d}`.
fn split_block(k: &Arc<FieldCtx>, d: usize) -> Result<(FqMatrix, u64)> {
    let big = FieldCtx::new(k.characteristic(), k.degree() * d)?;
    let emb = FieldEmbedding::new(k, &big)?;
    let zeta = big.generator();
    let rb = RelativeBasis::power(&emb, zeta)?;
    let m = multiplication_matrix(&rb, zeta);
    let mit = m.inverse()?.transpose();
    Ok((FqMatrix::block_diag(k, &[m, mit]), big.order() - 1))
}

/// Norm-one group of `F_{q^{2d}} / F_{q^d}` acting on `F_{q^{2d}}` with the
/// form `Tr(delta x y^{q^d})`, written in a symplectic basis.
fn inert_block(k: &Arc<FieldCtx>, d: usize) -> Result<(FqMatrix, u64)> {
    let big = FieldCtx::new(k.characteristic(), k.degree() * 2 * d)?;
    let emb = FieldEmbedding::new(k, &big)?;
    let zeta = big.generator();
    let qd = checked_pow(k.order(), d).ok_or(Error::Overflow("field order"))?;
    let delta = big.pow(zeta, ((qd + 1) / 2) as u128);
    let rb = RelativeBasis::power(&emb, zeta)?;
    let basis = rb.elements();
    let gram = FqMatrix::from_fn(k, 2 * d, 2 * d, |i, j| {
        let conj = big.pow(basis[j], qd as u128);
        emb.trace(big.mul(delta, big.mul(basis[i], conj)))
    });
    let b = symplectic_gram_schmidt(k, &gram)?;
    let c = big.pow(zeta, (qd - 1) as u128);
    let m = b.inverse()?.mul(&multiplication_matrix(&rb, c)).mul(&b);
    Ok((m, qd + 1))
}

/// Place a `2d x 2d` block (e-part then f-part) at offset `off` of `Sp(2N)`.
fn embed_block(k: &Arc<FieldCtx>, n: usize, off: usize, d: usize, blk: &FqMatrix) -> FqMatrix {
    let mut g = FqMatrix::identity(k, 2 * n);
    let global = |i: usize| if i < d { off + i } else { n + off + i - d };
    for i in 0..2 * d {
        for j in 0..2 * d {
            g[(global(i), global(j))] = blk[(i, j)];
        }
    }
    g
}

/// The maximal torus of the given block type, one cyclic generator per block.
pub fn build_maximal_torus(space: &SympSpace, desc: &TorusDescriptor) -> Result<Torus> {
    let k = space.ctx();
    if desc.p != k.characteristic() || desc.m != k.degree() {
        return Err(Error::Domain(format!(
            "descriptor field F_{}^{} differs from the space's field",
            desc.p, desc.m
        )));
    }
    let n = space.half_dim();
    if desc.blocks.is_empty() || desc.half_dim() != n {
        return Err(Error::Domain(format!(
            "block degrees sum to {} but N = {n}",
            desc.half_dim()
        )));
    }
    let change = (!space.is_standard()).then(|| space.symplectic_basis());
    let mut gens = Vec::new();
    let mut orders = Vec::new();
    let mut off = 0;
    for spec in &desc.blocks {
        let (blk, order) = match spec.kind {
            BlockKind::Split => split_block(k, spec.degree)?,
            BlockKind::Inert => inert_block(k, spec.degree)?,
        };
        let mut g = embed_block(k, n, off, spec.degree, &blk);
        if let Some(b) = &change {
            g = b.mul(&g).mul(&b.inverse()?);
        }
        gens.push(space.element(g)?);
        orders.push(order);
        off += spec.degree;
    }
    let mut t = Torus::from_generators(space, gens, orders)?;
    t.descriptor = Some(desc.clone());
    Ok(t)
}

/// The centralizer of a regular element `A` in `Sp`.
pub fn centralizer_torus(space: &SympSpace, a: &SympGroupElement) -> Result<Torus> {
    let k = space.ctx();
    let ring = PolyRing::new(k);
    let cp = a.mat().charpoly();
    if !ring.is_squarefree(&cp) {
        return Err(Error::DegenerateCentralizer(format!(
            "characteristic polynomial {:?} is not squarefree",
            cp.coeffs()
        )));
    }
    let dim = space.dim();
    let mut powers = vec![FqMatrix::identity(k, dim)];
    for _ in 1..dim {
        powers.push(powers.last().unwrap().mul(a.mat()));
    }
    let kbasis = theta_fixed_basis(space, &powers);
    let blocks = decompose_algebra(space, &kbasis)?;
    let mut gens = Vec::new();
    let mut orders = Vec::new();
    for blk in &blocks {
        let kf = &blk.field;
        let aa = a.mat().mul(&blk.idempotent);
        let s_mat = aa.add(&space.symplectic_transpose(&aa));
        let s = blk
            .field_elem_of(&s_mat)
            .ok_or_else(|| Error::Consistency("A + A^t outside K".into()))?;
        let disc = kf.sub(kf.square(s), kf.from_int(4));
        let qd = kf.order();
        let (x, y, order) = if let Some(root) = kf.sqrt(disc).filter(|_| !disc.is_zero()) {
            let lam = kf.mul(kf.add(s, root), kf.half());
            let lam_inv = kf.inv(lam)?;
            let mu = kf.generator();
            let mu_inv = kf.inv(mu)?;
            let y = kf.div(kf.sub(mu, mu_inv), kf.sub(lam, lam_inv))?;
            let x = kf.sub(mu, kf.mul(y, lam));
            (x, y, qd - 1)
        } else if disc.is_zero() {
            return Err(Error::DegenerateCentralizer("repeated eigenvalue on a block".into()));
        } else {
            let big = FieldCtx::new(kf.characteristic(), kf.degree() * 2)?;
            let emb = FieldEmbedding::new(kf, &big)?;
            let quad = Poly::from_elems(vec![big.one(), big.neg(emb.embed(s)), big.one()]);
            let tau = *PolyRing::new(&big)
                .roots(&quad)
                .first()
                .ok_or_else(|| Error::Consistency("no root in the quadratic extension".into()))?;
            let rb = RelativeBasis::new(&emb, vec![big.one(), tau])?;
            let eta = big.pow(big.generator(), (qd - 1) as u128);
            let c = rb.coordinates(eta);
            (c[0], c[1], qd + 1)
        };
        let complement = FqMatrix::identity(k, dim).sub(&blk.idempotent);
        let g = blk.matrix_of(x).add(&blk.matrix_of(y).mul(&aa)).add(&complement);
        gens.push(space.element(g)?);
        orders.push(order);
    }
    let t = Torus::from_generators(space, gens, orders)?;
    if !t.contains(a) {
        return Err(Error::Consistency("A is missing from its centralizer".into()));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl2(p: u64) -> SympSpace {
        SympSpace::standard(&FieldCtx::prime(p).unwrap(), 1).unwrap()
    }

    #[test]
    fn sl2_orders() {
        let sp = sl2(5);
        let f = sp.ctx().clone();
        let s = build_maximal_torus(&sp, &TorusDescriptor::parse("split", &f, 1).unwrap()).unwrap();
        assert_eq!(s.order(), 4);
        let i = build_maximal_torus(&sp, &TorusDescriptor::parse("inert", &f, 1).unwrap()).unwrap();
        assert_eq!(i.order(), 6);
    }

    #[test]
    fn irreducible_sp4_f3_has_order_ten() {
        let f = FieldCtx::prime(3).unwrap();
        let sp = SympSpace::standard(&f, 2).unwrap();
        let t = build_maximal_torus(&sp, &TorusDescriptor::parse("irreducible", &f, 2).unwrap()).unwrap();
        assert_eq!(t.order(), 10);
        for g in t.elements() {
            assert!(sp.is_symplectic(g.mat()));
        }
    }

    #[test]
    fn cat_map_centralizer_mod_7() {
        let f = FieldCtx::prime(7).unwrap();
        let sp = SympSpace::standard(&f, 1).unwrap();
        let a = sp.element(FqMatrix::from_ints(&f, &[vec![2, 1], vec![1, 1]]).unwrap()).unwrap();
        let t = centralizer_torus(&sp, &a).unwrap();
        assert_eq!(t.order(), 8);
        assert!(t.contains(&a));
        for x in t.elements() {
            for y in t.elements() {
                assert_eq!(x.mul(y), y.mul(x));
            }
        }
        assert!(centralizer_torus(&sp, &sp.identity()).is_err());
    }

    #[test]
    fn descriptor_parsing_and_json() {
        let f = FieldCtx::prime(5).unwrap();
        let d = TorusDescriptor::parse("split+inert:2", &f, 3).unwrap();
        assert_eq!(d.blocks, vec![BlockSpec::split(1), BlockSpec::inert(2)]);
        let js = serde_json::to_string(&d).unwrap();
        assert_eq!(js, r#"{"blocks":[{"type":"split","degree":1},{"type":"inert","degree":2}],"p":5,"m":1}"#);
        let back: TorusDescriptor =
            serde_json::from_str(r#"{"blocks":[{"type":"irreducible","degree":2}],"p":5,"m":1}"#).unwrap();
        assert_eq!(back.blocks, vec![BlockSpec::inert(2)]);
        assert!(TorusDescriptor::parse("bogus", &f, 1).is_err());
        assert_eq!(TorusDescriptor::all_types(2).len(), 5);
        assert_eq!(TorusDescriptor::all_types(1).len(), 2);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let f = FieldCtx::prime(5).unwrap();
        let sp = SympSpace::standard(&f, 2).unwrap();
        let d = TorusDescriptor::parse("split", &f, 1).unwrap();
        assert!(matches!(build_maximal_torus(&sp, &d), Err(Error::Domain(_))));
    }
}

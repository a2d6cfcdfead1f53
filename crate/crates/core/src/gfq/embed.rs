//! Embeddings between finite fields of the same characteristic.

use std::sync::Arc;

use super::{FieldCtx, FieldElem, Poly, PolyRing};
use crate::error::{Error, Result};
use crate::linalg::FqMatrix;

/// A fixed embedding `F_{p^a} -> F_{p^b}`, `a | b`.
///
/// The generator `x` of the small field is sent to the least (by encoding)
/// root of its modulus in the big field.
#[derive(Clone)]
pub struct FieldEmbedding {
    small: Arc<FieldCtx>,
    big: Arc<FieldCtx>,
    images: Vec<FieldElem>,
    // F_p-linear left inverse of `embed`, as a (small.m x big.m) matrix
    retract: FqMatrix,
}

impl std::fmt::Debug for FieldEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} -> {:?}", self.small, self.big)
    }
}

fn coord_matrix(prime: &Arc<FieldCtx>, big: &FieldCtx, elems: &[FieldElem]) -> FqMatrix {
    FqMatrix::from_fn(prime, big.degree(), elems.len(), |i, j| prime.elem(big.coeffs(elems[j])[i]))
}

impl FieldEmbedding {
    pub fn new(small: &Arc<FieldCtx>, big: &Arc<FieldCtx>) -> Result<Self> {
        if small.characteristic() != big.characteristic() || big.degree() % small.degree() != 0 {
            return Err(Error::Domain(format!("{small:?} does not embed in {big:?}")));
        }
        let gen = if small.degree() == 1 {
            big.one()
        } else {
            let ring = PolyRing::new(big);
            let f = Poly::from_elems(small.modulus().iter().map(|&c| big.elem(c)).collect());
            *ring.roots(&f).first().ok_or_else(|| Error::Consistency("modulus has no root".into()))?
        };
        let mut images = Vec::with_capacity(small.degree());
        let mut cur = big.one();
        for _ in 0..small.degree() {
            images.push(cur);
            cur = big.mul(cur, gen);
        }
        let prime = FieldCtx::prime(small.characteristic())?;
        let a = coord_matrix(&prime, big, &images);
        // pick independent rows to get a left inverse
        let (_, pivots) = a.transpose().rref();
        let sq = FqMatrix::from_fn(&prime, pivots.len(), a.cols(), |i, j| a[(pivots[i], j)]);
        let sq_inv = sq.inverse()?;
        let mut retract = FqMatrix::zeros(&prime, small.degree(), big.degree());
        for i in 0..small.degree() {
            for (k, &pr) in pivots.iter().enumerate() {
                retract[(i, pr)] = sq_inv[(i, k)];
            }
        }
        Ok(FieldEmbedding { small: small.clone(), big: big.clone(), images, retract })
    }

    pub fn small(&self) -> &Arc<FieldCtx> {
        &self.small
    }

    pub fn big(&self) -> &Arc<FieldCtx> {
        &self.big
    }

    /// Relative degree `[big : small]`.
    pub fn relative_degree(&self) -> usize {
        self.big.degree() / self.small.degree()
    }

    pub fn embed(&self, a: FieldElem) -> FieldElem {
        if self.small.degree() == 1 {
            return self.big.from_int(a.index() as i64);
        }
        self.small
            .coeffs(a)
            .iter()
            .zip(&self.images)
            .fold(self.big.zero(), |acc, (&c, &img)| {
                self.big.add(acc, self.big.mul(self.big.from_int(c as i64), img))
            })
    }

    /// Preimage of `b`, if `b` lies in the image.
    pub fn restrict(&self, b: FieldElem) -> Option<FieldElem> {
        if self.small.degree() == 1 {
            return self.big.in_prime_field(b).then(|| self.small.elem(b.index()));
        }
        let prime = self.retract.ctx();
        let bc: Vec<FieldElem> = self.big.coeffs(b).iter().map(|&c| prime.elem(c)).collect();
        let ac = self.retract.mul_vec(&bc);
        let a = self.small.from_coeffs(&ac.iter().map(|e| e.index()).collect::<Vec<_>>());
        (self.embed(a) == b).then_some(a)
    }

    /// Relative Frobenius `b -> b^{|small|}`.
    pub fn frobenius(&self, b: FieldElem) -> FieldElem {
        self.big.pow(b, self.small.order() as u128)
    }

    pub fn trace(&self, b: FieldElem) -> FieldElem {
        let mut acc = self.big.zero();
        let mut c = b;
        for _ in 0..self.relative_degree() {
            acc = self.big.add(acc, c);
            c = self.frobenius(c);
        }
        self.restrict(acc).expect("trace lies in the subfield")
    }

    pub fn norm(&self, b: FieldElem) -> FieldElem {
        let e = (self.big.order() - 1) / (self.small.order() - 1);
        self.restrict(self.big.pow(b, e as u128)).expect("norm lies in the subfield")
    }
}

/// `(Tr, N)` of `a` from `big` down to `small`.
pub fn trace_norm(
    big: &Arc<FieldCtx>,
    small: &Arc<FieldCtx>,
    a: FieldElem,
) -> Result<(FieldElem, FieldElem)> {
    let emb = FieldEmbedding::new(small, big)?;
    Ok((emb.trace(a), emb.norm(a)))
}

/// A basis of `big` as a vector space over `small`.
#[derive(Clone, Debug)]
pub struct RelativeBasis {
    emb: FieldEmbedding,
    basis: Vec<FieldElem>,
    // inverse of the F_p-coordinate matrix of {embed(e_j) * b_i}
    inv: FqMatrix,
}

impl RelativeBasis {
    pub fn new(emb: &FieldEmbedding, basis: Vec<FieldElem>) -> Result<Self> {
        let n = emb.relative_degree();
        if basis.len() != n {
            return Err(Error::Domain("wrong number of basis elements".into()));
        }
        let (small, big) = (emb.small(), emb.big());
        let prime = FieldCtx::prime(small.characteristic())?;
        let mut cols = Vec::with_capacity(big.degree());
        for &b in &basis {
            for j in 0..small.degree() {
                let mut c = vec![0u64; small.degree()];
                c[j] = 1;
                cols.push(big.mul(b, emb.embed(small.from_coeffs(&c))));
            }
        }
        let inv = coord_matrix(&prime, big, &cols)
            .inverse()
            .map_err(|_| Error::Domain("elements are not a relative basis".into()))?;
        Ok(RelativeBasis { emb: emb.clone(), basis, inv })
    }

    /// The basis `1, z, ..., z^{n-1}`.
    pub fn power(emb: &FieldEmbedding, z: FieldElem) -> Result<Self> {
        let big = emb.big();
        let basis = (0..emb.relative_degree()).map(|i| big.pow(z, i as u128)).collect();
        Self::new(emb, basis)
    }

    pub fn embedding(&self) -> &FieldEmbedding {
        &self.emb
    }

    pub fn elements(&self) -> &[FieldElem] {
        &self.basis
    }

    pub fn coordinates(&self, b: FieldElem) -> Vec<FieldElem> {
        let (small, big) = (self.emb.small(), self.emb.big());
        let prime = self.inv.ctx();
        let bc: Vec<FieldElem> = big.coeffs(b).iter().map(|&c| prime.elem(c)).collect();
        let x = self.inv.mul_vec(&bc);
        let d = small.degree();
        (0..self.basis.len())
            .map(|i| small.from_coeffs(&x[i * d..(i + 1) * d].iter().map(|e| e.index()).collect::<Vec<_>>()))
            .collect()
    }

    pub fn combine(&self, coords: &[FieldElem]) -> FieldElem {
        let big = self.emb.big();
        coords
            .iter()
            .zip(&self.basis)
            .fold(big.zero(), |acc, (&c, &b)| big.add(acc, big.mul(self.emb.embed(c), b)))
    }
}

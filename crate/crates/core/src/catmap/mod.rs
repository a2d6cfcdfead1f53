//! Quantized lattice automorphisms of the torus `R^{2N} / Z^{2N}` at Planck
//! constant `1/p`: genericity of `A in Sp(2N, Z)`, the Hecke torus
//! `T_A = Z(A mod p)`, bounds on Hecke eigenstates, and rank statistics over
//! primes.

mod density;
pub mod intpoly;
mod que;

pub use density::{rank_density_sweep, sieve_odd_primes, DensityReport, DensityRow};
pub use que::{
    hecke_que_experiment, statistical_state_experiment, test_observables, Observable, ObservableRow,
    QueOptions, QueOutcome, QueRow, QueViolation, StatRow, StatisticalOutcome,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, PolyRing};
use crate::linalg::FqMatrix;
use crate::symp::{SympGroupElement, SympSpace};
use intpoly::IntPoly;

/// An element of `Sp(2N, Z)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeAutomorphism {
    mat: Vec<Vec<i64>>,
    #[serde(skip)]
    charpoly: IntPoly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Genericity {
    /// Squarefree characteristic polynomial.
    pub regular: bool,
    /// Irreducible characteristic polynomial.
    pub strongly_generic: bool,
    /// Regular with no invariant isotropic rational subspace.
    pub generic: bool,
    /// No root of unity among the eigenvalues.
    pub ergodic: bool,
}

impl LatticeAutomorphism {
    pub fn new(mat: Vec<Vec<i64>>) -> Result<Self> {
        let d = mat.len();
        if d == 0 || d % 2 == 1 || mat.iter().any(|r| r.len() != d) {
            return Err(Error::Domain("A must be a square matrix of even size".into()));
        }
        let n = d / 2;
        let j = |i: usize, k: usize| -> i128 {
            if k == i + n && i < n {
                1
            } else if i == k + n && k < n {
                -1
            } else {
                0
            }
        };
        for r in 0..d {
            for c in 0..d {
                // (A^t J A)_{rc}
                let mut s = 0i128;
                for i in 0..d {
                    for k in 0..d {
                        s += mat[i][r] as i128 * j(i, k) * mat[k][c] as i128;
                    }
                }
                if s != j(r, c) {
                    return Err(Error::NotSymplectic);
                }
            }
        }
        let charpoly = intpoly::charpoly(&mat)?;
        Ok(LatticeAutomorphism { mat, charpoly })
    }

    /// Parse a JSON integer matrix.
    pub fn from_json(s: &str) -> Result<Self> {
        let mat: Vec<Vec<i64>> =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("matrix JSON: {e}")))?;
        Self::new(mat)
    }

    pub fn mat(&self) -> &[Vec<i64>] {
        &self.mat
    }

    pub fn half_dim(&self) -> usize {
        self.mat.len() / 2
    }

    /// `det(x I - A)`, lowest coefficient first.
    pub fn charpoly(&self) -> &[i128] {
        &self.charpoly
    }

    pub fn reduce(&self, space: &SympSpace) -> Result<SympGroupElement> {
        space.element(FqMatrix::from_ints(space.ctx(), &self.mat)?)
    }

    /// Whether `p` divides the discriminant, i.e. the characteristic
    /// polynomial is not squarefree mod `p`.
    pub fn bad_prime(&self, ctx: &FieldCtx) -> bool {
        !PolyRing::new(ctx).is_squarefree(&intpoly::reduce(ctx, &self.charpoly))
    }

    pub fn genericity(&self) -> Result<Genericity> {
        let f = &self.charpoly;
        let regular = intpoly::is_squarefree(f)?;
        let strongly_generic = regular && intpoly::is_irreducible_q(f)? == Some(true);
        let generic = if !regular {
            false
        } else if strongly_generic {
            true
        } else {
            let factors = intpoly::factor_small(f)?.ok_or_else(|| {
                Error::Domain("genericity of a reducible polynomial of degree > 4 is not decided".into())
            })?;
            factors.iter().all(|g| {
                let r = intpoly::reciprocal(g);
                let s = if r.last() == Some(&-1) { -1 } else { 1 };
                r.iter().map(|c| c * s).collect::<Vec<_>>() == *g
            })
        };
        let ergodic = !intpoly::has_cyclotomic_factor(f);
        Ok(Genericity { regular, strongly_generic, generic, ergodic })
    }
}

/// The `Sp(4, Z)` element `[[0, I], [-I, S]]`, `S = [[1, 1], [1, 2]]`, with
/// characteristic polynomial `x^2 g(x + 1/x)`, `g = y^2 - 3 y + 1`.
///
/// The Galois group swaps the two reciprocal pairs of eigenvalues over
/// `Q(sqrt 5)`, and the symplectic rank mod `p` is `2` exactly when `5` is a
/// square mod `p`.
pub fn density_test_element() -> LatticeAutomorphism {
    LatticeAutomorphism::new(vec![vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![-1, 0, 1, 1], vec![0, -1, 1, 2]])
        .expect("symplectic by construction")
}

/// `[[2, 1], [1, 1]]`.
pub fn cat_map() -> LatticeAutomorphism {
    LatticeAutomorphism::new(vec![vec![2, 1], vec![1, 1]]).expect("symplectic")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genericity_examples() {
        let g = cat_map().genericity().unwrap();
        assert!(g.regular && g.strongly_generic && g.generic && g.ergodic);
        let w = LatticeAutomorphism::new(vec![vec![0, 1], vec![-1, 0]]).unwrap().genericity().unwrap();
        assert!(w.generic && !w.ergodic);
        let id = LatticeAutomorphism::new(vec![vec![1, 0], vec![0, 1]]).unwrap().genericity().unwrap();
        assert!(!id.regular && !id.generic);
        let d = density_test_element().genericity().unwrap();
        assert!(d.strongly_generic && d.generic && d.ergodic);
    }

    #[test]
    fn split_reducible_generic() {
        // diag(A, A^{-T}) style: charpoly (x^2 - 3x + 1)^2 is not regular
        let a = LatticeAutomorphism::new(vec![
            vec![2, 0, 0, 0],
            vec![0, 2, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ]);
        assert!(a.is_err());
        // cat map on each symplectic plane, twisted: blocks [[2,1],[1,1]] and [[1,1],[1,2]]
        let b = LatticeAutomorphism::new(vec![
            vec![2, 0, 1, 0],
            vec![0, 3, 0, 1],
            vec![1, 0, 1, 0],
            vec![0, 2, 0, 1],
        ])
        .unwrap();
        let g = b.genericity().unwrap();
        assert!(g.regular && !g.strongly_generic && g.generic);
    }

    #[test]
    fn non_symplectic_rejected() {
        assert_eq!(LatticeAutomorphism::new(vec![vec![2, 0], vec![0, 1]]).unwrap_err(), Error::NotSymplectic);
    }
}

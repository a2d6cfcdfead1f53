//! Dense matrices over a finite field.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, FieldElem, Poly, PolyRing};

/// A dense row-major matrix over `F_q`.
#[derive(Clone)]
pub struct FqMatrix {
    ctx: Arc<FieldCtx>,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl PartialEq for FqMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for FqMatrix {}

impl std::hash::Hash for FqMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_index_rows())
    }
}

impl FqMatrix {
    pub fn zeros(ctx: &Arc<FieldCtx>, rows: usize, cols: usize) -> Self {
        FqMatrix { ctx: ctx.clone(), rows, cols, data: vec![ctx.zero(); rows * cols] }
    }

    pub fn identity(ctx: &Arc<FieldCtx>, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = ctx.one();
        }
        m
    }

    pub fn from_fn(
        ctx: &Arc<FieldCtx>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElem,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        FqMatrix { ctx: ctx.clone(), rows, cols, data }
    }

    /// Matrix from integer rows, reduced into the prime field.
    pub fn from_ints(ctx: &Arc<FieldCtx>, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Domain("ragged matrix rows".into()));
        }
        Ok(Self::from_fn(ctx, r, c, |i, j| ctx.from_int(rows[i][j])))
    }

    /// Matrix from element encodings.
    pub fn from_indices(ctx: &Arc<FieldCtx>, rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c || row.iter().any(|&x| x >= ctx.order())) {
            return Err(Error::Domain("malformed matrix entries".into()));
        }
        Ok(Self::from_fn(ctx, r, c, |i, j| ctx.elem(rows[i][j])))
    }

    pub fn to_index_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|e| e.index()).collect()).collect()
    }

    /// Single column vector.
    pub fn column(ctx: &Arc<FieldCtx>, v: &[FieldElem]) -> Self {
        FqMatrix { ctx: ctx.clone(), rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[FieldElem] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| self[(i, j)] == if i == j { self.ctx.one() } else { self.ctx.zero() })
            })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.ctx, self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.ctx.add(a, b)).collect();
        FqMatrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.ctx.sub(a, b)).collect();
        FqMatrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        let data = self.data.iter().map(|&a| self.ctx.neg(a)).collect();
        FqMatrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        let data = self.data.iter().map(|&a| self.ctx.mul(a, c)).collect();
        FqMatrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let f = &self.ctx;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = f.mul(a, other[(k, j)]);
                    out[(i, j)] = f.add(out[(i, j)], t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(self.ctx.zero(), |acc, (&a, &b)| self.ctx.add(acc, self.ctx.mul(a, b)))
            })
            .collect()
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut r = Self::identity(&self.ctx, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        r
    }

    pub fn trace(&self) -> FieldElem {
        (0..self.rows).fold(self.ctx.zero(), |acc, i| self.ctx.add(acc, self[(i, i)]))
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let f = &self.ctx;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            m.swap_rows(r, pr);
            let inv = f.inv(m[(r, c)]).unwrap();
            for j in 0..m.cols {
                m[(r, j)] = f.mul(m[(r, j)], inv);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m[(i, c)];
                if factor.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let t = f.mul(factor, m[(r, j)]);
                    m[(i, j)] = f.sub(m[(i, j)], t);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det(&self) -> FieldElem {
        assert!(self.is_square());
        let f = &self.ctx;
        let mut m = self.clone();
        let n = m.rows;
        let mut det = f.one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m[(i, c)].is_zero()) else { return f.zero() };
            if pr != c {
                m.swap_rows(c, pr);
                det = f.neg(det);
            }
            let pivot = m[(c, c)];
            det = f.mul(det, pivot);
            let inv = f.inv(pivot).unwrap();
            for i in c + 1..n {
                let factor = f.mul(m[(i, c)], inv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let t = f.mul(factor, m[(c, j)]);
                    m[(i, j)] = f.sub(m[(i, j)], t);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Domain("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = Self::from_fn(&self.ctx, n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)]
            } else if j - n == i {
                self.ctx.one()
            } else {
                self.ctx.zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Domain("singular matrix".into()));
        }
        Ok(Self::from_fn(&self.ctx, n, n, |i, j| r[(i, n + j)]))
    }

    /// Basis of `{x : self x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<FieldElem>> {
        let f = &self.ctx;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols];
                v[fc] = f.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r[(row, fc)]);
                }
                v
            })
            .collect()
    }

    /// Some solution of `self x = b`, if one exists.
    pub fn solve(&self, b: &[FieldElem]) -> Option<Vec<FieldElem>> {
        assert_eq!(b.len(), self.rows);
        let f = &self.ctx;
        let aug = Self::from_fn(&self.ctx, self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                b[i]
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![f.zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r[(row, self.cols)];
        }
        Some(x)
    }

    /// Characteristic polynomial `det(xI - self)`, via Hessenberg reduction.
    pub fn charpoly(&self) -> Poly {
        assert!(self.is_square());
        let f = &self.ctx;
        let ring = PolyRing::new(f);
        let n = self.rows;
        let mut h = self.clone();
        // similarity transform to upper Hessenberg form
        for c in 0..n.saturating_sub(2) {
            let Some(pr) = (c + 1..n).find(|&i| !h[(i, c)].is_zero()) else { continue };
            if pr != c + 1 {
                h.swap_rows(pr, c + 1);
                for i in 0..n {
                    h.data.swap(i * n + pr, i * n + c + 1);
                }
            }
            let inv = f.inv(h[(c + 1, c)]).unwrap();
            for i in c + 2..n {
                let u = f.mul(h[(i, c)], inv);
                if u.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = f.mul(u, h[(c + 1, j)]);
                    h[(i, j)] = f.sub(h[(i, j)], t);
                }
                for k in 0..n {
                    let t = f.mul(u, h[(k, i)]);
                    h[(k, c + 1)] = f.add(h[(k, c + 1)], t);
                }
            }
        }
        // recurrence on leading principal minors
        let mut p: Vec<Poly> = vec![ring.one()];
        for k in 0..n {
            let xk = Poly::from_elems(vec![f.neg(h[(k, k)]), f.one()]);
            let mut next = ring.mul(&xk, &p[k]);
            let mut prod = f.one();
            for i in (0..k).rev() {
                prod = f.mul(prod, h[(i + 1, i)]);
                let coeff = f.mul(prod, h[(i, k)]);
                next = ring.sub(&next, &ring.scale(&p[i], coeff));
            }
            p.push(next);
        }
        p.pop().unwrap()
    }

    /// Minimal polynomial, from the first linear dependency among powers.
    pub fn minpoly(&self) -> Poly {
        assert!(self.is_square());
        let f = &self.ctx;
        let n = self.rows;
        let mut powers = vec![Self::identity(f, n)];
        loop {
            let k = powers.len();
            let next = powers[k - 1].mul(self);
            let sys = Self::from_fn(f, n * n, k, |r, c| powers[c].data[r]);
            if let Some(sol) = sys.solve(&next.data) {
                let mut coeffs: Vec<FieldElem> = sol.iter().map(|&c| f.neg(c)).collect();
                coeffs.push(f.one());
                return Poly::from_elems(coeffs);
            }
            powers.push(next);
        }
    }

    /// Evaluate a polynomial at this matrix.
    pub fn eval_poly(&self, poly: &Poly) -> Self {
        let n = self.rows;
        let mut acc = Self::zeros(&self.ctx, n, n);
        for &c in poly.coeffs().iter().rev() {
            acc = acc.mul(self).add(&Self::identity(&self.ctx, n).scale(c));
        }
        acc
    }

    pub fn block_diag(ctx: &Arc<FieldCtx>, blocks: &[FqMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(ctx, n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(&self.ctx, rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(self.to_index_rows())
    }
}

impl std::ops::Index<(usize, usize)> for FqMatrix {
    type Output = FieldElem;
    fn index(&self, (i, j): (usize, usize)) -> &FieldElem {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for FqMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut FieldElem {
        &mut self.data[i * self.cols + j]
    }
}

/// Vector helpers over a field.
pub fn vec_add(f: &FieldCtx, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

pub fn vec_sub(f: &FieldCtx, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

pub fn vec_scale(f: &FieldCtx, c: FieldElem, a: &[FieldElem]) -> Vec<FieldElem> {
    a.iter().map(|&x| f.mul(c, x)).collect()
}

pub fn dot(f: &FieldCtx, a: &[FieldElem], b: &[FieldElem]) -> FieldElem {
    a.iter().zip(b).fold(f.zero(), |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

/// Vector from its index in the enumeration `sum v_i q^i`.
pub fn vec_from_index(f: &FieldCtx, mut idx: u64, len: usize) -> Vec<FieldElem> {
    let q = f.order();
    (0..len)
        .map(|_| {
            let e = f.elem(idx % q);
            idx /= q;
            e
        })
        .collect()
}

pub fn vec_index(f: &FieldCtx, v: &[FieldElem]) -> u64 {
    v.iter().rev().fold(0, |acc, e| acc * f.order() + e.index())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let f = FieldCtx::prime(7).unwrap();
        let a = FqMatrix::from_ints(&f, &[vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(a.det(), f.one());
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        let s = FqMatrix::from_ints(&f, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(s.inverse().is_err());
        assert_eq!(s.det(), f.zero());
        assert_eq!(s.rank(), 1);
        assert_eq!(s.nullspace().len(), 1);
    }

    #[test]
    fn charpoly_matches_determinant_at_points() {
        let f = FieldCtx::prime(11).unwrap();
        let ring = PolyRing::new(&f);
        let a = FqMatrix::from_ints(
            &f,
            &[vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![-1, 0, 1, 1], vec![0, -1, 1, 2]],
        )
        .unwrap();
        let cp = a.charpoly();
        for t in f.elements() {
            let m = FqMatrix::identity(&f, 4).scale(t).sub(&a);
            assert_eq!(ring.eval(&cp, t), m.det());
        }
        assert!(ring.rem(&cp, &a.minpoly()).is_zero());
        assert!(a.eval_poly(&cp).is_zero());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let f = FieldCtx::prime(5).unwrap();
        let a = FqMatrix::from_ints(&f, &[vec![1, 1], vec![2, 2]]).unwrap();
        let b = vec![f.from_int(1), f.from_int(2)];
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul_vec(&x), b);
        assert!(a.solve(&[f.from_int(1), f.from_int(1)]).is_none());
    }
}

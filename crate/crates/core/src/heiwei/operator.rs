use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rayon::prelude::*;

/// A dense complex square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({}x{})", self.dim, self.dim)
    }
}

const PAR_THRESHOLD: usize = 48;

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let data = (0..dim * dim).into_par_iter().map(|k| f(k / dim, k % dim)).collect();
        Operator { dim, data }
    }

    pub fn from_data(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        Operator { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        let kernel = |(i, row): (usize, &mut [Complex64])| {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b = &other.data[k * n..(k + 1) * n];
                for (o, &x) in row.iter_mut().zip(b) {
                    *o += a * x;
                }
            }
        };
        if n >= PAR_THRESHOLD {
            out.par_chunks_mut(n).enumerate().for_each(kernel);
        } else {
            out.chunks_mut(n).enumerate().for_each(kernel);
        }
        Operator { dim: n, data: out }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Operator { dim: self.dim, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Operator { dim: self.dim, data }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Operator { dim: self.dim, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Operator { dim: n, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `max |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// `max |U U^dagger - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&Self::identity(self.dim))
    }

    /// Kronecker product, `self` as the slow index.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |r, c| self[(r / m, c / m)] * other[(r % m, c % m)])
    }

    /// `sum_k v_k v_k^dagger`.
    pub fn from_orthonormal(dim: usize, vecs: &[Vec<Complex64>]) -> Self {
        Self::from_fn(dim, |i, j| vecs.iter().map(|v| v[i] * v[j].conj()).sum())
    }

    /// Largest singular value, by power iteration on `A^dagger A`.
    pub fn spectral_norm(&self) -> f64 {
        let n = self.dim;
        if n == 0 {
            return 0.0;
        }
        let adj = self.adjoint();
        let mut v: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05)).collect();
        let mut est = 0.0;
        for _ in 0..500 {
            let w = adj.apply(&self.apply(&v));
            let norm = norm(&w);
            if norm == 0.0 {
                return 0.0;
            }
            v = w.iter().map(|x| x / norm).collect();
            if (norm - est).abs() <= 1e-13 * norm {
                est = norm;
                break;
            }
            est = norm;
        }
        est.sqrt()
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_and_products() {
        let a = Operator::from_fn(2, |i, j| Complex64::new((i + 2 * j) as f64, 1.0));
        let b = Operator::from_fn(3, |i, j| Complex64::new(i as f64, j as f64));
        let ab = a.kron(&b);
        assert_eq!(ab.dim(), 6);
        assert_eq!(ab[(4, 2)], a[(1, 0)] * b[(1, 2)]);
        let i6 = Operator::identity(6);
        assert_eq!(ab.mul(&i6), ab);
        assert!((ab.trace() - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let mut d = Operator::zeros(4);
        for (i, x) in [0.5, -3.0, 2.0, 1.0].iter().enumerate() {
            d[(i, i)] = Complex64::new(*x, 0.0);
        }
        assert!((d.spectral_norm() - 3.0).abs() < 1e-9);
    }
}

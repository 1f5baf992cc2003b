//! Small dense and tridiagonal containers over [`Real`] / [`Cx`] scalars.
//!
//! Everything here is deliberately plain: the auxiliary-space matrices are
//! at most a few hundred wide and the dense many-body matrices are only
//! built for short chains.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::Zero;

use crate::scalar::{max_abs, Cx, Real};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Cx::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Cx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn matmul(&self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat<T> {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> CMat<T> {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: Cx<T>) -> CMat<T> {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.rows.min(self.cols)).fold(Cx::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &CMat<T>) -> CMat<T> {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        CMat::from_fn(r, c, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    pub fn commutator(&self, rhs: &CMat<T>) -> CMat<T> {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn anticommutator(&self, rhs: &CMat<T>) -> CMat<T> {
        &self.matmul(rhs) + &rhs.matmul(self)
    }

    /// Largest component magnitude over all entries.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &z| m.max(max_abs(z)))
    }

    /// Largest component magnitude over the leading `k × k` block.
    pub fn max_abs_block(&self, k: usize) -> T {
        let k = k.min(self.rows).min(self.cols);
        let mut m = T::zero();
        for i in 0..k {
            for j in 0..k {
                m = m.max(max_abs(self[(i, j)]));
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &CMat<T>) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max(max_abs(a - b)))
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Cx::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o += vi * m;
            }
        }
        out
    }

    pub fn map<U: Real>(&self, f: impl Fn(Cx<T>) -> Cx<U>) -> CMat<U> {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMat<T> {
    type Output = CMat<T>;
    fn add(self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMat<T> {
    type Output = CMat<T>;
    fn sub(self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMat<T> {
    type Output = CMat<T>;
    fn mul(self, rhs: &CMat<T>) -> CMat<T> {
        self.matmul(rhs)
    }
}

/// Tridiagonal square matrix. `upper[r]` is entry `(r, r+1)`, `lower[r]`
/// is entry `(r+1, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiag<E> {
    pub diag: Vec<E>,
    pub upper: Vec<E>,
    pub lower: Vec<E>,
}

impl<E: Copy + Zero> Tridiag<E> {
    pub fn zeros(d: usize) -> Self {
        let off = d.saturating_sub(1);
        Tridiag { diag: vec![E::zero(); d], upper: vec![E::zero(); off], lower: vec![E::zero(); off] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, r: usize, c: usize) -> E {
        if r == c {
            self.diag[r]
        } else if c == r + 1 {
            self.upper[r]
        } else if r == c + 1 {
            self.lower[c]
        } else {
            E::zero()
        }
    }

    pub fn map<F: Copy + Zero>(&self, f: impl Fn(E) -> F) -> Tridiag<F> {
        Tridiag {
            diag: self.diag.iter().map(|&x| f(x)).collect(),
            upper: self.upper.iter().map(|&x| f(x)).collect(),
            lower: self.lower.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl<E> Tridiag<E>
where
    E: Copy + Zero + Add<Output = E> + Mul<Output = E>,
{
    /// `vᵀ M`.
    pub fn left_mul(&self, v: &[E]) -> Vec<E> {
        let d = self.dim();
        (0..d)
            .map(|c| {
                let mut acc = v[c] * self.diag[c];
                if c > 0 {
                    acc = acc + v[c - 1] * self.upper[c - 1];
                }
                if c + 1 < d {
                    acc = acc + v[c + 1] * self.lower[c];
                }
                acc
            })
            .collect()
    }

    /// `M v`.
    pub fn right_mul(&self, v: &[E]) -> Vec<E> {
        let d = self.dim();
        (0..d)
            .map(|r| {
                let mut acc = self.diag[r] * v[r];
                if r + 1 < d {
                    acc = acc + self.upper[r] * v[r + 1];
                }
                if r > 0 {
                    acc = acc + self.lower[r - 1] * v[r - 1];
                }
                acc
            })
            .collect()
    }
}

impl<E: Copy + Zero> Tridiag<E> {
    /// `uᵀ M v` for vectors over a scalar type that `E` can be scaled by.
    pub fn sandwich<S>(&self, u: &[S], v: &[S]) -> E
    where
        S: Copy,
        E: Mul<S, Output = E> + Add<Output = E>,
    {
        let d = self.dim();
        let mut acc = E::zero();
        for r in 0..d {
            let mut row = self.diag[r] * v[r];
            if r + 1 < d {
                row = row + self.upper[r] * v[r + 1];
            }
            if r > 0 {
                row = row + self.lower[r - 1] * v[r - 1];
            }
            acc = acc + row * u[r];
        }
        acc
    }
}

impl<T: Real> Tridiag<T> {
    pub fn to_dense(&self) -> CMat<T> {
        let d = self.dim();
        CMat::from_fn(d, d, |r, c| Cx::new(self.get(r, c), T::zero()))
    }
}

impl<T: Real> Tridiag<Cx<T>> {
    pub fn to_dense(&self) -> CMat<T> {
        let d = self.dim();
        CMat::from_fn(d, d, |r, c| self.get(r, c))
    }
}

/// Copy into an `nalgebra` matrix for decompositions.
pub fn to_dmatrix<T: Real + nalgebra::RealField>(m: &CMat<T>) -> nalgebra::DMatrix<Cx<T>> {
    nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_dmatrix<T: Real + nalgebra::RealField>(m: &nalgebra::DMatrix<Cx<T>>) -> CMat<T> {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues<T: Real + nalgebra::RealField>(m: &CMat<T>) -> Vec<T> {
    let eig = nalgebra::SymmetricEigen::new(to_dmatrix(m));
    let mut ev: Vec<T> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    #[test]
    fn tridiag_products_match_dense() {
        let t = Tridiag {
            diag: vec![1.0, 2.0, 3.0],
            upper: vec![0.5, -1.0],
            lower: vec![4.0, 0.25],
        };
        let dense = t.to_dense();
        let v = [1.0f64, -2.0, 0.5];
        let vc: Vec<_> = v.iter().map(|&x| re(x)).collect();
        let left = t.left_mul(&v);
        let dl = dense.left_mul(&vc);
        for (a, b) in left.iter().zip(&dl) {
            assert!((a - b.re).abs() < 1e-15);
        }
        let right = t.right_mul(&v);
        assert_eq!(right, vec![1.0 * 1.0 + 0.5 * -2.0, 4.0 - 4.0 - 0.5, -0.5 + 1.5]);
        let s = t.sandwich(&v, &v);
        let s2: f64 = v.iter().zip(&right).map(|(a, b)| a * b).sum();
        assert!((s - s2).abs() < 1e-15);
    }

    #[test]
    fn kron_and_adjoint() {
        let a = CMat::from_fn(2, 2, |i, j| Cx::new((i + 2 * j) as f64, i as f64));
        let id = CMat::<f64>::identity(2);
        let k = a.kron(&id);
        assert_eq!(k.rows(), 4);
        assert_eq!(k[(2, 2)], a[(1, 1)]);
        assert_eq!(k[(2, 0)], a[(1, 0)]);
        assert_eq!(k[(1, 3)], a[(0, 1)]);
        assert_eq!(k[(0, 1)], Cx::new(0.0, 0.0));
        let adj = a.adjoint();
        assert_eq!(adj[(0, 1)], a[(1, 0)].conj());
        assert_eq!(a.matmul(&id), a);
    }

    #[test]
    fn hermitian_spectrum() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Cx::new(0.0, 1.0),
            (1, 0) => Cx::new(0.0, -1.0),
            _ => Cx::new(2.0, 0.0),
        });
        let ev: Vec<f64> = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert_eq!(from_dmatrix(&to_dmatrix(&m)), m);
    }
}

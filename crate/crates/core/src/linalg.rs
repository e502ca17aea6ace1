//! Minimal dense complex linear algebra: just the handful of operations the
//! relay model needs (matrix-vector products, inner products, squared norms).

use crate::scalar::Real;
use num_complex::Complex;

/// Complex scalar over the crate's generic real type.
pub type C<T> = Complex<T>;

/// `a^H b` (conjugate the left argument).
pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    assert_eq!(a.len(), b.len(), "inner: length mismatch");
    a.iter()
        .zip(b)
        .fold(C::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * *y
        })
}

/// Plain (unconjugated) dot product `Σ a_i b_i`.
pub fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    a.iter()
        .zip(b)
        .fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + *x * *y)
}

/// Squared Euclidean norm `‖v‖²`.
pub fn norm_sq<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    n: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C::new(T::zero(), T::zero()); n * n],
        }
    }

    /// `c · I`.
    pub fn scaled_identity(n: usize, c: C<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C<T>>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "from_rows: not square");
        Self {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.n + j] = v;
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[C<T>] {
        &self.data
    }

    /// `W h` (column vector).
    pub fn mul_vec(&self, h: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(h.len(), self.n, "mul_vec: length mismatch");
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], h))
            .collect()
    }

    /// `f^H W` as a vector of length `n` (the row's entries).
    pub fn vh_mul(&self, f: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(f.len(), self.n, "vh_mul: length mismatch");
        (0..self.n)
            .map(|j| {
                (0..self.n).fold(C::new(T::zero(), T::zero()), |acc, i| {
                    acc + f[i].conj() * self.data[i * self.n + j]
                })
            })
            .collect()
    }

    /// Squared Frobenius norm.
    pub fn fro_sq(&self) -> T {
        norm_sq(&self.data)
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| *x * c).collect(),
        }
    }
}

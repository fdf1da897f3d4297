//! Small dense tensors for the two-dimensional verifiers.

use std::ops::{Add, Mul, Sub};

use crate::scalar::{lit, Scalar};

/// 2x2 matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Scalar> Mat2<T> {
    pub fn zero() -> Self {
        Mat2([[T::zero(); 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2([[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    /// Unit basis matrix with a one at `(i, j)`.
    pub fn unit(i: usize, j: usize) -> Self {
        let mut m = Self::zero();
        m.0[i][j] = T::one();
        m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.0[i][j]
    }

    pub fn det(&self) -> T {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    /// Cofactor matrix, `det(F) F^{-T}`.
    pub fn cofactor(&self) -> Self {
        Mat2([[self.0[1][1], -self.0[1][0]], [-self.0[0][1], self.0[0][0]]])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() {
            return None;
        }
        Some(self.cofactor().transpose().scale(T::one() / d))
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                *v = *v * s;
            }
        }
        m
    }

    /// Frobenius inner product `A : B`.
    pub fn ddot(&self, other: &Self) -> T {
        let mut s = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                s = s + self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> T {
        self.ddot(self).sqrt()
    }

    pub fn sym(&self) -> Self {
        (*self + self.transpose()).scale(lit(0.5))
    }

    pub fn skew(&self) -> Self {
        (*self - self.transpose()).scale(lit(0.5))
    }

    /// Rotation nearest to `self` in the Frobenius norm.
    ///
    /// For `det > 0` this is the rotation factor of the polar decomposition.
    pub fn nearest_rotation(&self) -> Self {
        let a = self.0[0][0] + self.0[1][1];
        let b = self.0[1][0] - self.0[0][1];
        let r = a.hypot(b);
        if r == T::zero() {
            return Self::identity();
        }
        let (c, s) = (a / r, b / r);
        Mat2([[c, -s], [s, c]])
    }

    /// Extreme eigenvalues of the symmetric part.
    pub fn sym_eigenvalues(&self) -> (T, T) {
        let s = self.sym();
        let mean = s.trace() * lit(0.5);
        let diff = (s.0[0][0] - s.0[1][1]) * lit(0.5);
        let rad = diff.hypot(s.0[0][1]);
        (mean - rad, mean + rad)
    }

    /// Flattened index of entry `(i, j)`.
    pub fn flat(i: usize, j: usize) -> usize {
        2 * i + j
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = self;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = m.0[i][j] + o.0[i][j];
            }
        }
        m
    }
}

impl<T: Scalar> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut m = self;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = m.0[i][j] - o.0[i][j];
            }
        }
        m
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        m
    }
}

/// Fourth-order tensor acting on `d x d` matrices, stored as a `d^2 x d^2` matrix
/// over row-major flattened indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4<T> {
    pub dim: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor4<T> {
    pub fn zeros(dim: usize) -> Self {
        let n = dim * dim;
        Tensor4 {
            dim,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.dim * self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        self.data[a * self.size() + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: T) {
        let n = self.size();
        self.data[a * n + b] = v;
    }

    /// Applies the tensor to a flattened matrix.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.size();
        (0..n).map(|a| (0..n).map(|b| self.get(a, b) * x[b]).sum()).collect()
    }

    /// `(A : T : B)` for flattened matrices.
    pub fn bilinear(&self, a: &[T], b: &[T]) -> T {
        let tb = self.apply(b);
        a.iter().zip(tb).map(|(x, y)| *x * y).sum()
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, a| m.max(a.abs()))
    }
}

/// Orthonormal basis of symmetric `d x d` matrices, flattened.
pub fn sym_basis<T: Scalar>(dim: usize) -> Vec<Vec<T>> {
    let n = dim * dim;
    let mut basis = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let mut e = vec![T::zero(); n];
            if i == j {
                e[i * dim + j] = T::one();
            } else {
                let w = T::one() / lit::<T>(2.0).sqrt();
                e[i * dim + j] = w;
                e[j * dim + i] = w;
            }
            basis.push(e);
        }
    }
    basis
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: &[Vec<T>]) -> Vec<T> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off + m[i][j] * m[i][j];
                }
            }
        }
        if off.sqrt() <= T::epsilon() * lit(1e-2) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q] == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (lit::<T>(2.0) * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

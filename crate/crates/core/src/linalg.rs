//! Small fixed-size dense linear algebra: just enough for normal equations,
//! principal axes and the 13-state filter.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::scalar::Real;

/// Row-major `N x N` matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareMatrix<T, const N: usize>(pub [[T; N]; N]);

impl<T: Real, const N: usize> SquareMatrix<T, N> {
    pub fn zeros() -> Self {
        Self([[T::zero(); N]; N])
    }

    pub fn identity() -> Self {
        Self::from_diagonal(&[T::one(); N])
    }

    pub fn from_diagonal(diag: &[T; N]) -> Self {
        let mut m = Self::zeros();
        for (i, d) in diag.iter().enumerate() {
            m.0[i][i] = *d;
        }
        m
    }

    pub fn scaled_identity(s: T) -> Self {
        Self::from_diagonal(&[s; N])
    }

    pub fn diagonal(&self) -> [T; N] {
        std::array::from_fn(|i| self.0[i][i])
    }

    pub fn trace(&self) -> T {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn transpose(&self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i])))
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| (self.0[i][j] + self.0[j][i]) * half)
        }))
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.map(|row| row.map(|v| v * s)))
    }

    pub fn mul_vec(&self, v: &[T; N]) -> [T; N] {
        std::array::from_fn(|i| (0..N).map(|j| self.0[i][j] * v[j]).sum())
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..N {
            for j in (i + 1)..N {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }

    /// Lower Cholesky factor, or `None` if the matrix is not positive definite.
    pub fn cholesky(&self) -> Option<Self> {
        let mut l = Self::zeros();
        for i in 0..N {
            for j in 0..=i {
                let mut sum = self.0[i][j];
                for k in 0..j {
                    sum -= l.0[i][k] * l.0[j][k];
                }
                if i == j {
                    if !(sum > T::zero()) || !sum.is_finite() {
                        return None;
                    }
                    l.0[i][i] = sum.sqrt();
                } else {
                    l.0[i][j] = sum / l.0[j][j];
                }
            }
        }
        Some(l)
    }

    /// Solves `A x = b` for symmetric positive definite `A`.
    pub fn solve_spd(&self, b: &[T; N]) -> Option<[T; N]> {
        let l = self.cholesky()?;
        Some(cholesky_solve(&l, b))
    }

    /// Inverse of a symmetric positive definite matrix.
    pub fn inverse_spd(&self) -> Option<Self> {
        let l = self.cholesky()?;
        let mut inv = Self::zeros();
        for col in 0..N {
            let mut e = [T::zero(); N];
            e[col] = T::one();
            let x = cholesky_solve(&l, &e);
            for row in 0..N {
                inv.0[row][col] = x[row];
            }
        }
        Some(inv.symmetrized())
    }

    /// Solves a general linear system by Gaussian elimination with partial
    /// pivoting. Returns `None` when a pivot falls below `rel_tol` times the
    /// largest absolute entry.
    pub fn solve(&self, b: &[T; N], rel_tol: T) -> Option<[T; N]> {
        let mut a = self.0;
        let mut x = *b;
        let scale = a.iter().flat_map(|r| r.iter()).fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return None;
        }
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&p, &q| {
                    a[p][col]
                        .abs()
                        .partial_cmp(&a[q][col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if !(a[pivot][col].abs() > rel_tol * scale) {
                return None;
            }
            a.swap(col, pivot);
            x.swap(col, pivot);
            for row in (col + 1)..N {
                let f = a[row][col] / a[col][col];
                for k in col..N {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
                let v = x[col];
                x[row] -= f * v;
            }
        }
        for row in (0..N).rev() {
            let mut s = x[row];
            for k in (row + 1)..N {
                s -= a[row][k] * x[k];
            }
            x[row] = s / a[row][row];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Eigenvalues come back ascending; column `k` of the returned matrix is the
    /// eigenvector for eigenvalue `k`.
    pub fn symmetric_eigen(&self) -> ([T; N], Self) {
        let mut a = self.symmetrized();
        let mut v = Self::identity();
        let norm: T = a.0.iter().flat_map(|r| r.iter()).map(|x| *x * *x).sum();
        let tiny = T::epsilon() * T::epsilon() * norm;
        for _sweep in 0..64 {
            let mut off = T::zero();
            for p in 0..N {
                for q in (p + 1)..N {
                    off += a.0[p][q] * a.0[p][q];
                }
            }
            if off <= tiny {
                break;
            }
            for p in 0..N {
                for q in (p + 1)..N {
                    let apq = a.0[p][q];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a.0[q][q] - a.0[p][p]) / (T::lit(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..N {
                        let akp = a.0[k][p];
                        let akq = a.0[k][q];
                        a.0[k][p] = c * akp - s * akq;
                        a.0[k][q] = s * akp + c * akq;
                    }
                    for k in 0..N {
                        let apk = a.0[p][k];
                        let aqk = a.0[q][k];
                        a.0[p][k] = c * apk - s * aqk;
                        a.0[q][k] = s * apk + c * aqk;
                    }
                    for k in 0..N {
                        let vkp = v.0[k][p];
                        let vkq = v.0[k][q];
                        v.0[k][p] = c * vkp - s * vkq;
                        v.0[k][q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: [usize; N] = std::array::from_fn(|i| i);
        order.sort_by(|&i, &j| a.0[i][i].partial_cmp(&a.0[j][j]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.map(|i| a.0[i][i]);
        let vectors = Self(std::array::from_fn(|row| order.map(|col| v.0[row][col])));
        (values, vectors)
    }

    pub fn column(&self, col: usize) -> [T; N] {
        std::array::from_fn(|row| self.0[row][col])
    }
}

fn cholesky_solve<T: Real, const N: usize>(l: &SquareMatrix<T, N>, b: &[T; N]) -> [T; N] {
    let mut y = [T::zero(); N];
    for i in 0..N {
        let mut s = b[i];
        for k in 0..i {
            s -= l.0[i][k] * y[k];
        }
        y[i] = s / l.0[i][i];
    }
    let mut x = [T::zero(); N];
    for i in (0..N).rev() {
        let mut s = y[i];
        for k in (i + 1)..N {
            s -= l.0[k][i] * x[k];
        }
        x[i] = s / l.0[i][i];
    }
    x
}

impl<T: Real, const N: usize> Add for SquareMatrix<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl<T: Real, const N: usize> Sub for SquareMatrix<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}

impl<T: Real, const N: usize> Mul for SquareMatrix<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..N).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
        }))
    }
}

impl<T, const N: usize> Index<(usize, usize)> for SquareMatrix<T, N> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.0[r][c]
    }
}

impl<T, const N: usize> IndexMut<(usize, usize)> for SquareMatrix<T, N> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.0[r][c]
    }
}

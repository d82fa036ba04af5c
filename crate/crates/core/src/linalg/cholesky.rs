use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cholesky factor `M = R^T R` with `R` upper triangular (stored as its transpose `L`).
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn new(m: &Matrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension {
                context: "cholesky",
                expected: m.rows(),
                actual: m.cols(),
            });
        }
        let n = m.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let lj = l.row(j);
            let mut d = m[(j, j)] - lj[..j].iter().map(|&x| x * x).sum::<T>();
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite { op: "cholesky" });
            }
            d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let s: T = l.row(i)[..j]
                    .iter()
                    .zip(&l.row(j)[..j])
                    .map(|(&a, &b)| a * b)
                    .sum();
                l[(i, j)] = (m[(i, j)] - s) / d;
            }
        }
        Ok(Self { l })
    }

    /// Lower-triangular factor `L` with `M = L Lᵀ`.
    pub fn lower(&self) -> &Matrix<T> {
        &self.l
    }

    /// `Lᵀ x`, i.e. the vector whose Euclidean norm is the `M`-norm of `x`.
    pub fn apply_upper(&self, x: &[T]) -> Vec<T> {
        let n = self.l.rows();
        (0..n)
            .map(|i| (i..n).map(|k| self.l[(k, i)] * x[k]).sum())
            .collect()
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        let mut x = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let s: T = row[..i].iter().zip(&x[..i]).map(|(&a, &b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }
}

use num_traits::{Float, Zero};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Field;

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct Lu<E> {
    lu: Matrix<E>,
    perm: Vec<usize>,
    sign: bool,
}

impl<E: Field> Lu<E> {
    pub fn new(m: &Matrix<E>) -> Result<Self> {
        Self::new_owned(m.clone())
    }

    pub fn new_owned(mut lu: Matrix<E>) -> Result<Self> {
        if !lu.is_square() {
            return Err(Error::Dimension {
                context: "lu",
                expected: lu.rows(),
                actual: lu.cols(),
            });
        }
        let n = lu.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = true;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for i in k + 1..n {
                let v = lu[(i, k)].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == <E::Real as Zero>::zero() {
                return Err(Error::Singular { op: "lu" });
            }
            if p != k {
                perm.swap(p, k);
                sign = !sign;
                let data = lu.as_mut_slice();
                for j in 0..n {
                    data.swap(k * n + j, p * n + j);
                }
            }
            let pivot = lu[(k, k)];
            let (head, tail) = lu.as_mut_slice().split_at_mut((k + 1) * n);
            let row_k = &head[k * n..(k + 1) * n];
            for row_i in tail.chunks_exact_mut(n) {
                let f = row_i[k] / pivot;
                row_i[k] = f;
                if f.is_zero() {
                    continue;
                }
                for (a, &b) in row_i[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                    *a -= f * b;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &[E]) -> Vec<E> {
        let mut x: Vec<E> = self.perm.iter().map(|&p| b[p]).collect();
        self.solve_permuted_in_place(&mut x);
        x
    }

    /// Solves in place; `x` holds the right-hand side on entry.
    pub fn solve_in_place(&self, x: &mut [E], scratch: &mut Vec<E>) {
        scratch.clear();
        scratch.extend(self.perm.iter().map(|&p| x[p]));
        self.solve_permuted_in_place(scratch);
        x.copy_from_slice(scratch);
    }

    fn solve_permuted_in_place(&self, x: &mut [E]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: E = row[..i].iter().zip(&x[..i]).map(|(&a, &b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: E = row[i + 1..].iter().zip(&x[i + 1..]).map(|(&a, &b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
    }

    pub fn solve_matrix(&self, b: &Matrix<E>) -> Matrix<E> {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j));
            out.set_column(j, &x);
        }
        out
    }

    pub fn determinant(&self) -> E {
        let mut d = if self.sign { E::one() } else { -E::one() };
        for i in 0..self.dim() {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Smallest pivot modulus relative to the largest; a cheap singularity indicator.
    pub fn pivot_ratio(&self) -> E::Real {
        let n = self.dim();
        let mut lo = <E::Real as num_traits::Float>::infinity();
        let mut hi = <E::Real as Zero>::zero();
        for i in 0..n {
            let v = self.lu[(i, i)].modulus();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi == <E::Real as Zero>::zero() {
            <E::Real as Zero>::zero()
        } else {
            lo / hi
        }
    }
}

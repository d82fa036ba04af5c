//! Seeded random test data: unit vectors, orthogonal matrices and PSD
//! coupling pairs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::kalman::CouplingPair;
use crate::linalg::{norm, symmetric_eigen, Matrix};
use crate::scalar::Real;

pub fn random_gaussian_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect()
}

/// Uniform on the unit sphere of `ℝⁿ` (zero vector when `n == 0`).
pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    loop {
        let v = random_gaussian_vector::<T, R>(n, rng);
        let nv = norm(&v);
        if n == 0 {
            return v;
        }
        if nv > T::zero() {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

/// Haar-ish orthogonal matrix from the eigenvectors of a Gaussian symmetric matrix.
pub fn random_orthogonal<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix<T> {
    let g = Matrix::from_row_major(n, n, random_gaussian_vector(n * n, rng)).expect("square");
    let (s, _) = g.add(&g.transpose()).symmetrized();
    symmetric_eigen(&s).expect("jacobi converges").vectors
}

/// `Q diag(values) Qᵀ`.
pub fn conjugated<T: Real>(q: &Matrix<T>, values: &[T]) -> Matrix<T> {
    let m = q.matmul(&Matrix::diag(values)).matmul(&q.transpose());
    m.symmetrized().0
}

/// Random PSD pair of size `n`. Eigenvalues of `A` are drawn from a small
/// integer set so repeated eigenvalues are common, and `D` has random rank,
/// so both Kalman-satisfying and Kalman-failing pairs occur.
pub fn random_pair<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CouplingPair<T> {
    let qa = random_orthogonal::<T, R>(n, rng);
    let lambdas: Vec<T> = (0..n).map(|_| T::from_usize_lossy(rng.random_range(0..4))).collect();
    let qd = random_orthogonal::<T, R>(n, rng);
    let rank = rng.random_range(0..=n);
    let deltas: Vec<T> = (0..n)
        .map(|i| if i < rank { T::lit(rng.random_range(0.2..3.0)) } else { T::zero() })
        .collect();
    CouplingPair::new(conjugated(&qa, &lambdas), conjugated(&qd, &deltas)).expect("PSD by construction")
}

/// Random pair that satisfies the Kalman condition.
pub fn random_kalman_pair<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CouplingPair<T> {
    loop {
        let p = random_pair::<T, R>(n, rng);
        if p.satisfies_kalman() {
            return p;
        }
    }
}

/// Random pair violating the Kalman condition: an eigenvector of `A` lies in
/// `Ker D` by construction.
pub fn random_failing_pair<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CouplingPair<T> {
    let q = random_orthogonal::<T, R>(n, rng);
    let lambdas: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(0.0..4.0))).collect();
    let a = conjugated(&q, &lambdas);
    // D = R Rᵀ with R orthogonal to the first eigenvector of A
    let k = rng.random_range(1..=n.max(2) - 1);
    let q0 = q.column(0);
    let mut r = Matrix::zeros(n, k);
    for j in 0..k {
        let mut v = random_gaussian_vector::<T, R>(n, rng);
        let c: T = v.iter().zip(&q0).map(|(&a, &b)| a * b).sum();
        for (x, &y) in v.iter_mut().zip(&q0) {
            *x -= c * y;
        }
        r.set_column(j, &v);
    }
    let d = r.matmul(&r.transpose()).symmetrized().0;
    CouplingPair::new(a, d).expect("PSD by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_and_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = random_orthogonal::<f64, _>(4, &mut rng);
        assert!(q.transpose().matmul(&q).sub(&Matrix::identity(4)).max_abs() < 1e-13);
        let u = random_unit_vector::<f64, _>(5, &mut rng);
        assert!((norm(&u) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn failing_pairs_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=5 {
            let p = random_failing_pair::<f64, _>(n, &mut rng);
            assert!(p.kalman_rank() < n);
        }
    }
}

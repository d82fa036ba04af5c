use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{norm, symmetric_eigen, Matrix};
use crate::sampling::random_unit_vector;
use crate::scalar::Real;

/// Eigenvalues of `D` at or below `FACTOR_TOL · ‖D‖₂` count as zero.
pub const FACTOR_TOL: f64 = 1e-10;

/// `D = P · diag(δ_1, …, δ_d, 0, …, 0) · Pᵀ` with `0 < δ_1 ≤ … ≤ δ_d`.
#[derive(Debug, Clone)]
pub struct SpectralFactorD<T> {
    /// Orthonormal basis; the first `d` columns carry the positive eigenvalues.
    pub p: Matrix<T>,
    pub deltas: Vec<T>,
    /// Rank of `D`.
    pub d: usize,
    source: Matrix<T>,
}

impl<T: Real> SpectralFactorD<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.p.rows();
        let mut diag = self.deltas.clone();
        diag.resize(n, T::zero());
        self.p.matmul(&Matrix::diag(&diag)).matmul(&self.p.transpose())
    }

    /// `‖D − P M Pᵀ‖₂`.
    pub fn reconstruction_error(&self) -> T {
        self.source.sub(&self.reconstruct()).norm2()
    }

    /// `δ_d² ‖Û‖² − ‖DU‖²`, where `Û` holds the first `d` coordinates of `PᵀU`.
    pub fn bound_slack(&self, u: &[T]) -> T {
        let du = self.source.matvec(u);
        let coords = self.p.transpose().matvec(u);
        let top = self.deltas.last().copied().unwrap_or_else(T::zero);
        let hat: T = coords[..self.d].iter().map(|&c| c * c).sum();
        let lhs = norm(&du);
        top * top * hat - lhs * lhs
    }

    /// Smallest [`bound_slack`](Self::bound_slack) over `samples` random
    /// unit vectors.
    pub fn certify_bound(&self, samples: usize, seed: u64) -> T {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.p.rows();
        (0..samples)
            .map(|_| self.bound_slack(&random_unit_vector::<T, _>(n, &mut rng)))
            .fold(T::infinity(), T::min)
    }
}

pub fn spectral_factor<T: Real>(d: &Matrix<T>) -> Result<SpectralFactorD<T>> {
    if !d.is_square() {
        return Err(Error::InvalidInput("spectral_factor: matrix must be square".into()));
    }
    let eig = symmetric_eigen(d)?;
    let n = d.rows();
    let scale = eig.values.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let tol = T::lit(FACTOR_TOL) * scale;
    let positive: Vec<usize> = (0..n).filter(|&i| eig.values[i] > tol).collect();
    let zero: Vec<usize> = (0..n).filter(|&i| eig.values[i] <= tol).collect();
    let mut p = Matrix::zeros(n, n);
    for (col, &i) in positive.iter().chain(&zero).enumerate() {
        p.set_column(col, &eig.vectors.column(i));
    }
    Ok(SpectralFactorD {
        p,
        deltas: positive.iter().map(|&i| eig.values[i]).collect(),
        d: positive.len(),
        source: d.clone(),
    })
}

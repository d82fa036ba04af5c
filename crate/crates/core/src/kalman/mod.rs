//! Finite-dimensional algebra of the coupling pair `(A, D)`: Kalman rank,
//! invariant subspaces of `A` inside `Ker D`, eigenvalue grouping and the
//! block partition of `D`, the coercivity constant, a constructive minimal
//! rank damping matrix, commutator norms, the spectral factorization of `D`,
//! and the Kronecker lifting `(A ⊗ I_m, D ⊗ I_m)`.

mod blocks;
mod factor;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, symmetric_eigen, Matrix};
use crate::scalar::Real;

pub use blocks::{
    block_partition, coercivity_constant, coercivity_slack, construct_min_rank_d, eig_group,
    verify_coercivity, verify_coercivity_with, BlockPartition, CoercivityCheck, EigenGroups,
};
pub use factor::{spectral_factor, SpectralFactorD};

/// Relative PSD tolerance: the smallest eigenvalue may be as low as
/// `-PSD_TOL · ‖M‖₂`.
pub const PSD_TOL: f64 = 1e-10;

/// Symmetric positive semi-definite coupling matrix `A` and damping matrix `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingPair<T> {
    a: Matrix<T>,
    d: Matrix<T>,
    asymmetry: T,
}

impl<T: Real> CouplingPair<T> {
    /// Symmetrizes both matrices and checks positive semi-definiteness.
    pub fn new(a: Matrix<T>, d: Matrix<T>) -> Result<Self> {
        if !a.is_square() || !d.is_square() {
            return Err(Error::InvalidInput("coupling matrices must be square".into()));
        }
        if a.rows() != d.rows() {
            return Err(Error::Dimension {
                context: "coupling pair",
                expected: a.rows(),
                actual: d.rows(),
            });
        }
        if a.rows() == 0 {
            return Err(Error::InvalidInput("empty coupling pair".into()));
        }
        if !a.is_finite() || !d.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let (a, da) = a.symmetrized();
        let (d, dd) = d.symmetrized();
        check_psd(&a)?;
        check_psd(&d)?;
        Ok(Self {
            a,
            d,
            asymmetry: da.max(dd),
        })
    }

    pub fn from_rows(a: &[Vec<T>], d: &[Vec<T>]) -> Result<Self> {
        Self::new(Matrix::from_rows(a)?, Matrix::from_rows(d)?)
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn d(&self) -> &Matrix<T> {
        &self.d
    }

    /// System size `N`.
    pub fn size(&self) -> usize {
        self.a.rows()
    }

    /// Largest entrywise asymmetry removed on construction.
    pub fn asymmetry_defect(&self) -> T {
        self.asymmetry
    }

    /// The `N × N²` controllability matrix `(D, AD, …, A^{N−1}D)`.
    pub fn kalman_matrix(&self) -> Matrix<T> {
        let n = self.size();
        let mut blocks = Vec::with_capacity(n);
        let mut cur = self.d.clone();
        for k in 0..n {
            if k > 0 {
                cur = self.a.matmul(&cur);
            }
            blocks.push(cur.clone());
        }
        Matrix::hstack(&blocks)
    }

    /// Numerical rank of the controllability matrix.
    ///
    /// The powers are taken of `(A − cI)/ρ`, with `c` and `ρ` the midpoint
    /// and half-width of the spectrum of `A`. The column space is the same
    /// (polynomials in `A` of degree below `N` applied to `D`), but the
    /// columns no longer grow like `‖A‖ᵏ`, which keeps rounding noise in a
    /// kernel direction near `ε`. Singular values above [`rank_tol`] count.
    pub fn kalman_rank(&self) -> usize {
        let sv = singular_values(&self.normalized_kalman_matrix());
        rank_from_singular_values(&sv, rank_tol(self.size(), sv.first().copied().unwrap_or_else(T::zero)))
    }

    fn normalized_kalman_matrix(&self) -> Matrix<T> {
        let n = self.size();
        let eig = match symmetric_eigen(&self.a) {
            Ok(e) => e,
            Err(_) => return self.kalman_matrix(),
        };
        let lo = eig.values[0];
        let hi = eig.values[n - 1];
        let two = T::lit(2.0);
        let rho = (hi - lo) / two;
        // a spread inside the grouping tolerance means A = cI, as in eig_group
        let scaled = if rho > T::lit(1e-8) * hi.abs().max(lo.abs()) {
            self.a.sub(&Matrix::identity(n).scale((hi + lo) / two)).scale(T::one() / rho)
        } else {
            // A is a multiple of the identity: only D itself contributes
            Matrix::zeros(n, n)
        };
        let mut blocks = Vec::with_capacity(n);
        let mut cur = self.d.clone();
        for k in 0..n {
            if k > 0 {
                cur = scaled.matmul(&cur);
            }
            blocks.push(cur.clone());
        }
        Matrix::hstack(&blocks)
    }

    pub fn satisfies_kalman(&self) -> bool {
        self.kalman_rank() == self.size()
    }

    /// Dimension of the largest `A`-invariant subspace contained in `Ker D`.
    ///
    /// `A` is symmetric, so invariant subspaces are sums of pieces of its
    /// eigenspaces; the answer is `Σ_l (σ_l − rank(D P_l))` over the
    /// eigenvalue groups.
    pub fn max_invariant_dim(&self) -> Result<usize> {
        let groups = eig_group(&self.a, default_group_tol(&self.a))?;
        let tol = rank_tol(self.size(), self.d.norm2());
        let mut dim = 0;
        for l in 0..groups.len() {
            let dp = self.d.matmul(&groups.group_basis(l));
            let sv = singular_values(&dp);
            dim += groups.sigmas[l] - rank_from_singular_values(&sv, tol);
        }
        Ok(dim)
    }

    /// `AD − DA`.
    pub fn commutator(&self) -> Matrix<T> {
        self.a.matmul(&self.d).sub(&self.d.matmul(&self.a))
    }

    /// Spectral norm `‖AD − DA‖₂`; a diagnostic, never thresholded.
    pub fn commutator_norm(&self) -> T {
        self.commutator().norm2()
    }

    /// `(A ⊗ I_m, D ⊗ I_m)`, i.e. every entry replaced by a scalar block.
    pub fn lift(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("lift factor must be positive".into()));
        }
        let id = Matrix::identity(m);
        Ok(Self {
            a: self.a.kron(&id),
            d: self.d.kron(&id),
            asymmetry: self.asymmetry,
        })
    }

    /// Swaps the roles of `A` and `D`.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.d.clone(),
            d: self.a.clone(),
            asymmetry: self.asymmetry,
        }
    }
}

/// Multiple of `N · ε · σ_max` below which a singular value counts as zero.
pub const RANK_TOL_FACTOR: f64 = 4096.0;

/// `RANK_TOL_FACTOR · N · ε · σ_max`.
pub fn rank_tol<T: Real>(n: usize, sigma_max: T) -> T {
    T::lit(RANK_TOL_FACTOR) * T::from_usize_lossy(n) * T::epsilon() * sigma_max
}

fn rank_from_singular_values<T: Real>(sv: &[T], tol: T) -> usize {
    if sv.first().is_none_or(|&s| s == T::zero()) {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol).count()
}

/// `1e-8 · ‖A‖₂`, the default eigenvalue clustering tolerance.
pub fn default_group_tol<T: Real>(a: &Matrix<T>) -> T {
    T::lit(1e-8) * a.norm2()
}

fn check_psd<T: Real>(m: &Matrix<T>) -> Result<()> {
    let eig = symmetric_eigen(m)?;
    let min = eig.values.first().copied().unwrap_or_else(T::zero);
    let scale = eig
        .values
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    if min < -T::lit(PSD_TOL) * scale {
        return Err(Error::NotPsd { min_eig: min.as_f64() });
    }
    Ok(())
}

/// The coupling pair of the two-component examples with interior damping:
/// `A = diag(1, 2)`, `D = [[1, 2], [2, 4]]`.
pub fn example_pair<T: Real>() -> CouplingPair<T> {
    let l = T::lit;
    CouplingPair::from_rows(
        &[vec![l(1.0), l(0.0)], vec![l(0.0), l(2.0)]],
        &[vec![l(1.0), l(2.0)], vec![l(2.0), l(4.0)]],
    )
    .expect("valid pair")
}

/// The coupling pair of the boundary-damped example:
/// `A = diag(1, 0)`, `D = [[1, −1], [−1, 1]]`.
pub fn boundary_example_pair<T: Real>() -> CouplingPair<T> {
    let l = T::lit;
    CouplingPair::from_rows(
        &[vec![l(1.0), l(0.0)], vec![l(0.0), l(0.0)]],
        &[vec![l(1.0), l(-1.0)], vec![l(-1.0), l(1.0)]],
    )
    .expect("valid pair")
}

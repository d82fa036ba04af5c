use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{rank_tol, CouplingPair};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, symmetric_eigen, Matrix};
use crate::sampling::random_unit_vector;
use crate::scalar::Real;

/// Orthogonal diagonalization of `A` with eigenvalues clustered into groups.
#[derive(Debug, Clone)]
pub struct EigenGroups<T> {
    /// The matrix that was diagonalized.
    pub a: Matrix<T>,
    /// Orthogonal eigenvector matrix, columns ordered by ascending eigenvalue.
    pub p: Matrix<T>,
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<T>,
    /// Distinct eigenvalues λ_1 < … < λ_m (group means).
    pub lambdas: Vec<T>,
    /// Multiplicities σ_l.
    pub sigmas: Vec<usize>,
    /// Cumulative offsets μ_0 = 0, μ_l = μ_{l−1} + σ_l.
    pub mus: Vec<usize>,
}

impl<T: Real> EigenGroups<T> {
    /// Number of groups `m`.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Columns of `P` spanning eigenspace `l`.
    pub fn group_basis(&self, l: usize) -> Matrix<T> {
        let (lo, hi) = (self.mus[l], self.mus[l + 1]);
        self.p.block(0, lo, self.p.rows(), hi - lo)
    }

    /// `‖PᵀAP − blockdiag(λ_l I_{σ_l})‖₂`.
    pub fn diagonalization_error(&self) -> T {
        let pap = self.p.transpose().matmul(&self.a).matmul(&self.p);
        let mut diag = Vec::with_capacity(self.p.rows());
        for (l, &s) in self.sigmas.iter().enumerate() {
            diag.extend(std::iter::repeat_n(self.lambdas[l], s));
        }
        pap.sub(&Matrix::diag(&diag)).norm2()
    }
}

/// Diagonalizes symmetric `A`; consecutive ascending eigenvalues closer than
/// `group_tol` share a group.
pub fn eig_group<T: Real>(a: &Matrix<T>, group_tol: T) -> Result<EigenGroups<T>> {
    if group_tol < T::zero() {
        return Err(Error::InvalidInput("group tolerance must be non-negative".into()));
    }
    let eig = symmetric_eigen(a)?;
    let mut lambdas = Vec::new();
    let mut sigmas: Vec<usize> = Vec::new();
    let mut sums: Vec<T> = Vec::new();
    let mut last = None;
    for &v in &eig.values {
        match last {
            Some(prev) if v - prev <= group_tol => {
                *sigmas.last_mut().expect("open group") += 1;
                *sums.last_mut().expect("open group") += v;
            }
            _ => {
                sigmas.push(1);
                sums.push(v);
            }
        }
        last = Some(v);
    }
    for (s, &k) in sums.iter().zip(&sigmas) {
        lambdas.push(*s / T::from_usize_lossy(k));
    }
    let mut mus = vec![0];
    for &s in &sigmas {
        mus.push(mus.last().copied().unwrap_or(0) + s);
    }
    Ok(EigenGroups {
        a: a.clone(),
        p: eig.vectors,
        eigenvalues: eig.values,
        lambdas,
        sigmas,
        mus,
    })
}

/// Columns of `D` in the eigenbasis of `A`, split by eigenvalue group.
#[derive(Debug, Clone)]
pub struct BlockPartition<T> {
    /// `N × σ_l` blocks `D_l` of `PᵀDP`.
    pub blocks: Vec<Matrix<T>>,
    /// Whether the columns of `D_l` are linearly independent.
    pub independence: Vec<bool>,
    /// Smallest eigenvalue of `D_lᵀ D_l` (squared smallest singular value).
    pub gram_min: Vec<T>,
    rank_tol: T,
}

impl<T: Real> BlockPartition<T> {
    pub fn all_independent(&self) -> bool {
        self.independence.iter().all(|&b| b)
    }

    pub fn dim(&self) -> usize {
        self.blocks.first().map_or(0, Matrix::rows)
    }

    pub fn rank_tol(&self) -> T {
        self.rank_tol
    }

    fn offsets(&self) -> Vec<usize> {
        let mut out = vec![0];
        for b in &self.blocks {
            out.push(out.last().copied().unwrap_or(0) + b.cols());
        }
        out
    }
}

pub fn block_partition<T: Real>(pair: &CouplingPair<T>, groups: &EigenGroups<T>) -> Result<BlockPartition<T>> {
    let n = pair.size();
    if groups.p.rows() != n {
        return Err(Error::Dimension {
            context: "block_partition",
            expected: n,
            actual: groups.p.rows(),
        });
    }
    let d_hat = groups.p.transpose().matmul(pair.d()).matmul(&groups.p);
    let tol = rank_tol(n, pair.d().norm2());
    let mut blocks = Vec::with_capacity(groups.len());
    let mut independence = Vec::with_capacity(groups.len());
    let mut gram_min = Vec::with_capacity(groups.len());
    for l in 0..groups.len() {
        let (lo, hi) = (groups.mus[l], groups.mus[l + 1]);
        let block = d_hat.block(0, lo, n, hi - lo);
        let sv = singular_values(&block);
        // a block with more columns than rows always has a zero singular value
        let smin = if block.cols() > n {
            T::zero()
        } else {
            sv.last().copied().unwrap_or_else(T::zero)
        };
        independence.push(smin > tol && smin > T::zero());
        gram_min.push(smin * smin);
        blocks.push(block);
    }
    Ok(BlockPartition {
        blocks,
        independence,
        gram_min,
        rank_tol: tol,
    })
}

/// `c = min_l λ_min(D_lᵀ D_l)`.
pub fn coercivity_constant<T: Real>(partition: &BlockPartition<T>) -> Result<T> {
    if let Some(l) = partition.independence.iter().position(|&b| !b) {
        return Err(Error::DependentBlock { block: l });
    }
    Ok(partition
        .gram_min
        .iter()
        .copied()
        .fold(T::infinity(), T::min))
}

/// `‖D̂U‖² − Σ_{k≠l} ⟨D_l U_l, D_k U_k⟩ − c‖U‖²` for `U` in eigenbasis coordinates.
pub fn coercivity_slack<T: Real>(partition: &BlockPartition<T>, c: T, u: &[T]) -> T {
    let offsets = partition.offsets();
    let n = partition.dim();
    let parts: Vec<Vec<T>> = partition
        .blocks
        .iter()
        .enumerate()
        .map(|(l, b)| b.matvec(&u[offsets[l]..offsets[l + 1]]))
        .collect();
    let mut total = vec![T::zero(); n];
    for p in &parts {
        for (t, &v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let du2: T = total.iter().map(|&v| v * v).sum();
    let mut cross = T::zero();
    for (l, pl) in parts.iter().enumerate() {
        for (k, pk) in parts.iter().enumerate() {
            if k != l {
                cross += pl.iter().zip(pk).map(|(&a, &b)| a * b).sum::<T>();
            }
        }
    }
    let u2: T = u.iter().map(|&v| v * v).sum();
    du2 - cross - c * u2
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityCheck<T> {
    pub constant: T,
    pub worst_slack: T,
    pub passed: bool,
    pub samples: usize,
}

/// Slack threshold below which the inequality is considered violated.
pub const COERCIVITY_SLACK_TOL: f64 = -1e-12;

/// Checks the coercivity inequality with the computed constant on `samples`
/// random unit vectors plus the per-block minimizing directions.
pub fn verify_coercivity<T: Real>(partition: &BlockPartition<T>, samples: usize, seed: u64) -> Result<CoercivityCheck<T>> {
    let c = coercivity_constant(partition)?;
    Ok(verify_coercivity_with(partition, c, samples, seed))
}

/// As [`verify_coercivity`] with a caller-supplied constant.
pub fn verify_coercivity_with<T: Real>(partition: &BlockPartition<T>, c: T, samples: usize, seed: u64) -> CoercivityCheck<T> {
    let n = partition.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::infinity();
    for _ in 0..samples {
        let u = random_unit_vector::<T, _>(n, &mut rng);
        worst = worst.min(coercivity_slack(partition, c, &u));
    }
    for u in minimizing_directions(partition) {
        worst = worst.min(coercivity_slack(partition, c, &u));
    }
    if worst == T::infinity() {
        worst = T::zero();
    }
    CoercivityCheck {
        constant: c,
        worst_slack: worst,
        passed: worst >= T::lit(COERCIVITY_SLACK_TOL),
        samples,
    }
}

fn minimizing_directions<T: Real>(partition: &BlockPartition<T>) -> Vec<Vec<T>> {
    let offsets = partition.offsets();
    let n = partition.dim();
    let mut out = Vec::new();
    for (l, b) in partition.blocks.iter().enumerate() {
        let gram = b.transpose().matmul(b);
        if let Ok(eig) = symmetric_eigen(&gram) {
            let mut u = vec![T::zero(); n];
            for i in 0..b.cols() {
                u[offsets[l] + i] = eig.vectors[(i, 0)];
            }
            out.push(u);
        }
    }
    out
}

/// Damping matrix of minimal rank `σ_1 = max_l σ_l` for which `(A, D)`
/// satisfies the Kalman condition: `D = P W Wᵀ Pᵀ`, where the rows of `W`
/// belonging to group `l` are the first `σ_l` unit vectors of `ℝ^{σ_1}`.
pub fn construct_min_rank_d<T: Real>(groups: &EigenGroups<T>) -> Result<CouplingPair<T>> {
    let n = groups.p.rows();
    let width = groups.sigmas.iter().copied().max().unwrap_or(0);
    // Group order does not matter for the construction; the widest group
    // fixes the column count.
    let mut w = Matrix::<T>::zeros(n, width);
    for l in 0..groups.len() {
        for i in 0..groups.sigmas[l] {
            w[(groups.mus[l] + i, i)] = T::one();
        }
    }
    let pw = groups.p.matmul(&w);
    let d = pw.matmul(&pw.transpose());
    let pair = CouplingPair::new(groups.a.clone(), d)?;
    debug_assert_eq!(pair.kalman_rank(), n);
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kalman::{boundary_example_pair, example_pair};
    use crate::linalg::numerical_rank;

    fn m(rows: &[Vec<f64>]) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn grouping_examples() {
        let g = eig_group(&Matrix::diag(&[1.0, 2.0]), 0.0).unwrap();
        assert_eq!(g.sigmas, vec![1, 1]);
        assert_eq!(g.lambdas, vec![1.0, 2.0]);
        assert_eq!(g.mus, vec![0, 1, 2]);

        let g = eig_group(&Matrix::<f64>::identity(2), 0.0).unwrap();
        assert_eq!(g.sigmas, vec![2]);

        let g = eig_group(&m(&[vec![2.0, 1.0], vec![1.0, 2.0]]), 0.0).unwrap();
        assert!((g.lambdas[0] - 1.0).abs() < 1e-15 && (g.lambdas[1] - 3.0).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        // columns (1, −1)/√2 and (1, 1)/√2 up to sign
        assert!((g.p[(0, 0)] * g.p[(1, 0)] + 0.5).abs() < 1e-15);
        assert!((g.p[(0, 1)] * g.p[(1, 1)] - 0.5).abs() < 1e-15);
        assert!((g.p[(0, 1)].abs() - s).abs() < 1e-15);
        assert!(g.diagonalization_error() < 1e-14);
        assert!(eig_group(&Matrix::diag(&[1.0]), -1.0).is_err());
    }

    #[test]
    fn grouping_merges_within_tolerance() {
        let g = eig_group(&Matrix::diag(&[1.0, 1.0 + 1e-10, 2.0]), 1e-8).unwrap();
        assert_eq!(g.sigmas, vec![2, 1]);
        let g = eig_group(&Matrix::diag(&[1.0, 1.0 + 1e-10, 2.0]), 0.0).unwrap();
        assert_eq!(g.sigmas, vec![1, 1, 1]);
    }

    #[test]
    fn partition_examples() {
        let pair = example_pair::<f64>();
        let g = eig_group(pair.a(), 0.0).unwrap();
        let part = block_partition(&pair, &g).unwrap();
        assert_eq!(part.blocks.len(), 2);
        assert!(part.all_independent());
        assert!((coercivity_constant(&part).unwrap() - 5.0).abs() < 1e-13);
        assert!((part.gram_min[1] - 20.0).abs() < 1e-12);

        let pair = CouplingPair::new(Matrix::identity(2), Matrix::diag(&[1.0, 0.0])).unwrap();
        let g = eig_group(pair.a(), 0.0).unwrap();
        let part = block_partition(&pair, &g).unwrap();
        assert_eq!(part.blocks.len(), 1);
        assert_eq!(part.blocks[0].cols(), 2);
        assert!(!part.all_independent());
        assert!(matches!(coercivity_constant(&part), Err(Error::DependentBlock { block: 0 })));

        let pair = CouplingPair::new(Matrix::diag(&[1.0, 2.0]), Matrix::zeros(2, 2)).unwrap();
        let g = eig_group(pair.a(), 0.0).unwrap();
        let part = block_partition(&pair, &g).unwrap();
        assert!(part.independence.iter().all(|&b| !b));
    }

    #[test]
    fn coercivity_examples() {
        // orthonormal columns give identity Gram blocks
        let s = 0.5f64.sqrt();
        let q = m(&[vec![s, s], vec![s, -s]]);
        let pair = CouplingPair::new(Matrix::diag(&[1.0, 3.0]), q.matmul(&q.transpose())).unwrap();
        let g = eig_group(pair.a(), 0.0).unwrap();
        let part = block_partition(&pair, &g).unwrap();
        assert!((coercivity_constant(&part).unwrap() - 1.0).abs() < 1e-14);

        let pair = boundary_example_pair::<f64>();
        let g = eig_group(pair.a(), 0.0).unwrap();
        let part = block_partition(&pair, &g).unwrap();
        assert!((coercivity_constant(&part).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn verify_and_sharpness() {
        let pair = example_pair::<f64>();
        let g = eig_group(pair.a(), 0.0).unwrap();
        let part = block_partition(&pair, &g).unwrap();
        let check = verify_coercivity(&part, 1000, 1).unwrap();
        assert!(check.passed, "slack {}", check.worst_slack);
        assert!(check.worst_slack.abs() < 1e-12);

        assert_eq!(coercivity_slack(&part, check.constant, &[0.0, 0.0]), 0.0);

        let probe = verify_coercivity_with(&part, check.constant * (1.0 + 1e-3), 1000, 1);
        assert!(!probe.passed);
    }

    #[test]
    fn min_rank_constructions() {
        let g = eig_group(&Matrix::diag(&[1.0, 2.0]), 0.0).unwrap();
        let pair = construct_min_rank_d(&g).unwrap();
        assert!(pair.d().sub(&m(&[vec![1.0, 1.0], vec![1.0, 1.0]])).max_abs() < 1e-15);
        assert_eq!(pair.kalman_rank(), 2);

        let g = eig_group(&Matrix::<f64>::identity(2), 0.0).unwrap();
        let pair = construct_min_rank_d(&g).unwrap();
        assert!(pair.d().sub(&Matrix::identity(2)).max_abs() < 1e-15);

        let g = eig_group(&Matrix::diag(&[1.0, 1.0, 2.0]), 0.0).unwrap();
        let pair = construct_min_rank_d(&g).unwrap();
        assert_eq!(numerical_rank(pair.d(), 3.0), 2);
        assert_eq!(pair.kalman_rank(), 3);
    }
}

use super::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order, by one-sided Jacobi rotations.
///
/// The rotations act on the rows when the matrix is wide and on the columns
/// otherwise, so the work is `O(min(r, c)² · max(r, c))` per sweep. One-sided
/// Jacobi keeps small singular values accurate relative to `ε·σ_max`, which
/// the numerical rank decisions rely on.
pub fn singular_values<T: Real>(m: &Matrix<T>) -> Vec<T> {
    let mut vecs: Vec<Vec<T>> = if m.rows() <= m.cols() {
        m.to_rows()
    } else {
        m.transpose().to_rows()
    };
    let k = vecs.len();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (head, tail) = vecs.split_at_mut(q);
                let xp = &mut head[p];
                let xq = &mut tail[0];
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for (&a, &b) in xp.iter().zip(xq.iter()) {
                    alpha += a * a;
                    beta += b * b;
                    gamma += a * b;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<T> = vecs
        .iter()
        .map(|v| v.iter().map(|&x| x * x).sum::<T>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    sv
}

/// Numerical rank with threshold `tol_factor · ε · σ_max`.
pub fn numerical_rank<T: Real>(m: &Matrix<T>, tol_factor: T) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or_else(T::zero);
    if smax == T::zero() {
        return 0;
    }
    let tol = tol_factor * T::epsilon() * smax;
    sv.iter().filter(|&&s| s > tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        let m = Matrix::from_rows(&[vec![3.0f64, 0.0, 0.0], vec![0.0, -4.0, 0.0]]).unwrap();
        assert_eq!(singular_values(&m), vec![4.0, 3.0]);
        let r1 = Matrix::from_rows(&[vec![1.0f64, 2.0], vec![2.0, 4.0]]).unwrap();
        let sv = singular_values(&r1);
        assert!((sv[0] - 5.0).abs() < 1e-14);
        assert!(sv[1] < 1e-15);
        assert_eq!(numerical_rank(&r1, 2.0), 1);
    }

    #[test]
    fn tall_matrix_uses_columns() {
        let m = Matrix::from_rows(&[vec![1.0f64, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let sv = singular_values(&m);
        assert!((sv[0] - 3f64.sqrt()).abs() < 1e-14);
        assert!((sv[1] - 1.0).abs() < 1e-14);
    }
}

//! Dense nonsymmetric eigensolver: balancing, Householder reduction to
//! Hessenberg form, Francis double-shift QR, and eigenvectors recovered by
//! back-substitution on the real Schur form.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Matrix};
use crate::scalar::Real;

/// Largest matrix accepted by [`eig_all`] and [`eigenvalues`].
pub const MAX_EIG_DIM: usize = 4000;

/// Per-eigenvalue iteration cap of the QR sweep.
const MAX_ITER_PER_EIGENVALUE: usize = 60;

/// Eigenvalues, unit eigenvectors (columns) and relative residuals
/// `‖Mv − λv‖ / ‖M‖_F`.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<Complex<T>>,
    pub vectors: CMatrix<T>,
    pub residuals: Vec<T>,
}

impl<T: Real> Eigen<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.vectors.column(k)
    }
}

/// Full spectrum with eigenvectors and residuals.
pub fn eig_all<T: Real>(m: &Matrix<T>) -> Result<Eigen<T>> {
    check_input(m)?;
    let n = m.rows();
    let mut a = m.clone();
    let scale = balance(&mut a);
    let mut z = hessenberg(&mut a, true).expect("accumulated");
    let (wr, wi) = schur(&mut a, Some(&mut z))?;

    let norm_m = m.frobenius_norm();
    let mut vectors = CMatrix::zeros(n, n);
    let mut residuals = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut prev: Option<Vec<Complex<T>>> = None;
    for k in 0..n {
        let lambda = Complex::new(wr[k], wi[k]);
        let x = if wi[k] < T::zero() {
            prev.take()
                .expect("conjugate partner precedes")
                .iter()
                .map(|c| c.conj())
                .collect()
        } else {
            let y = schur_vector(&a, &wr, &wi, k);
            let mut x: Vec<Complex<T>> = (0..n)
                .map(|i| {
                    let row = z.row(i);
                    let mut s = Complex::new(T::zero(), T::zero());
                    for (zij, yj) in row.iter().zip(&y) {
                        s += yj * *zij;
                    }
                    s * scale[i]
                })
                .collect();
            let nx = crate::linalg::norm(&x);
            if nx > T::zero() {
                for v in &mut x {
                    *v /= nx;
                }
            }
            x
        };
        if wi[k] > T::zero() {
            prev = Some(x.clone());
        }
        let r = residual(m, lambda, &x);
        residuals.push(if norm_m > T::zero() { r / norm_m } else { r });
        vectors.set_column(k, &x);
        values.push(lambda);
    }
    Ok(Eigen {
        values,
        vectors,
        residuals,
    })
}

/// Eigenvalues only; skips the Schur-vector accumulation.
pub fn eigenvalues<T: Real>(m: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    check_input(m)?;
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a, false);
    let (wr, wi) = schur(&mut a, None)?;
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex::new(re, im))
        .collect())
}

fn check_input<T: Real>(m: &Matrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension {
            context: "eig",
            expected: m.rows(),
            actual: m.cols(),
        });
    }
    if m.rows() > MAX_EIG_DIM {
        return Err(Error::InvalidInput(format!(
            "eig: dimension {} exceeds {MAX_EIG_DIM}",
            m.rows()
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("eig: non-finite entry".into()));
    }
    Ok(())
}

fn residual<T: Real>(m: &Matrix<T>, lambda: Complex<T>, x: &[Complex<T>]) -> T {
    let n = m.rows();
    let mut acc = T::zero();
    for i in 0..n {
        let mut s = Complex::new(T::zero(), T::zero());
        for (mij, xj) in m.row(i).iter().zip(x) {
            s += xj * *mij;
        }
        s -= lambda * x[i];
        acc += s.norm_sqr();
    }
    acc.sqrt()
}

/// Parlett–Reinsch diagonal scaling `A ← S⁻¹ A S` by powers of two.
/// Returns the diagonal of `S`.
pub(crate) fn balance<T: Real>(a: &mut Matrix<T>) -> Vec<T> {
    let n = a.rows();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut scale = vec![T::one(); n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let ginv = T::one() / f;
                scale[i] *= f;
                for v in a.row_mut(i) {
                    *v *= ginv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    scale
}

/// Householder reduction to upper Hessenberg form, `A = Q H Qᵀ`.
/// Entries below the subdiagonal are set to zero.
pub(crate) fn hessenberg<T: Real>(a: &mut Matrix<T>, accumulate: bool) -> Option<Matrix<T>> {
    let n = a.rows();
    let mut q = accumulate.then(|| Matrix::<T>::identity(n));
    let mut v = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let col_scale = (k + 1..n).fold(T::zero(), |acc, i| acc.max(a[(i, k)].abs()));
        if col_scale == T::zero() {
            continue;
        }
        let mut sigma = T::zero();
        for i in 0..len {
            v[i] = a[(k + 1 + i, k)] / col_scale;
            sigma += v[i] * v[i];
        }
        let tail: T = (1..len).map(|i| v[i] * v[i]).sum();
        if tail == T::zero() {
            continue;
        }
        let xnorm = sigma.sqrt();
        let alpha = if v[0] > T::zero() { -xnorm } else { xnorm };
        v[0] -= alpha;
        let vnorm2 = v[0] * v[0] + tail;
        let beta = T::lit(2.0) / vnorm2;

        // Left: rows k+1.., columns k..
        for x in w[k..].iter_mut() {
            *x = T::zero();
        }
        for i in 0..len {
            let vi = v[i];
            let row = &a.row(k + 1 + i)[k..];
            for (wj, &aij) in w[k..].iter_mut().zip(row) {
                *wj += vi * aij;
            }
        }
        for i in 0..len {
            let f = beta * v[i];
            let row = &mut a.row_mut(k + 1 + i)[k..];
            for (aij, &wj) in row.iter_mut().zip(&w[k..]) {
                *aij -= f * wj;
            }
        }
        // Right: all rows, columns k+1..
        apply_right(a, &v[..len], beta, k + 1);
        if let Some(q) = q.as_mut() {
            apply_right(q, &v[..len], beta, k + 1);
        }
        a[(k + 1, k)] = alpha * col_scale;
        for i in k + 2..n {
            a[(i, k)] = T::zero();
        }
    }
    q
}

fn apply_right<T: Real>(m: &mut Matrix<T>, v: &[T], beta: T, c0: usize) {
    for r in 0..m.rows() {
        let row = &mut m.row_mut(r)[c0..c0 + v.len()];
        let s: T = row.iter().zip(v).map(|(&x, &y)| x * y).sum();
        if s == T::zero() {
            continue;
        }
        let f = beta * s;
        for (x, &vi) in row.iter_mut().zip(v) {
            *x -= f * vi;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
///
/// With `z = Some(..)` the full real Schur form is produced in `h` and the
/// orthogonal transformations are accumulated into `z`; otherwise only the
/// active window is updated and `h` is meaningful only for its eigenvalues.
/// Returns real and imaginary parts; a complex pair occupies consecutive
/// slots with positive imaginary part first.
pub(crate) fn schur<T: Real>(h: &mut Matrix<T>, mut z: Option<&mut Matrix<T>>) -> Result<(Vec<T>, Vec<T>)> {
    let nn = h.rows();
    let full = z.is_some();
    let mut d = vec![T::zero(); nn];
    let mut e = vec![T::zero(); nn];
    if nn == 0 {
        return Ok((d, e));
    }
    let eps = T::epsilon();
    let low: isize = 0;
    let mut n: isize = nn as isize - 1;
    let mut exshift = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let (mut s, mut zz);
    let (mut w, mut x, mut y);

    let mut norm = T::zero();
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    macro_rules! hh {
        ($i:expr, $j:expr) => {
            h[(($i) as usize, ($j) as usize)]
        };
    }

    let mut iter = 0usize;
    while n >= low {
        // Look for a single small subdiagonal element.
        let mut l = n;
        while l > low {
            s = hh!(l - 1, l - 1).abs() + hh!(l, l).abs();
            if s == T::zero() {
                s = norm;
            }
            if hh!(l, l - 1).abs() < eps * s {
                hh!(l, l - 1) = T::zero();
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root.
            hh!(n, n) = hh!(n, n) + exshift;
            d[n as usize] = hh!(n, n);
            e[n as usize] = T::zero();
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots.
            w = hh!(n, n - 1) * hh!(n - 1, n);
            p = (hh!(n - 1, n - 1) - hh!(n, n)) / T::lit(2.0);
            q = p * p + w;
            zz = q.abs().sqrt();
            hh!(n, n) = hh!(n, n) + exshift;
            hh!(n - 1, n - 1) = hh!(n - 1, n - 1) + exshift;
            x = hh!(n, n);

            if q >= T::zero() {
                zz = if p >= T::zero() { p + zz } else { p - zz };
                d[(n - 1) as usize] = x + zz;
                d[n as usize] = d[(n - 1) as usize];
                if zz != T::zero() {
                    d[n as usize] = x - w / zz;
                }
                e[(n - 1) as usize] = T::zero();
                e[n as usize] = T::zero();
                x = hh!(n, n - 1);
                s = x.abs() + zz.abs();
                p = x / s;
                q = zz / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;

                let jmax = if full { nn as isize } else { n + 1 };
                for j in (n - 1)..jmax {
                    zz = hh!(n - 1, j);
                    hh!(n - 1, j) = q * zz + p * hh!(n, j);
                    hh!(n, j) = q * hh!(n, j) - p * zz;
                }
                let imin = if full { 0 } else { l };
                for i in imin..=n {
                    zz = hh!(i, n - 1);
                    hh!(i, n - 1) = q * zz + p * hh!(i, n);
                    hh!(i, n) = q * hh!(i, n) - p * zz;
                }
                if let Some(zm) = z.as_deref_mut() {
                    for i in 0..nn {
                        let a0 = zm[(i, (n - 1) as usize)];
                        let a1 = zm[(i, n as usize)];
                        zm[(i, (n - 1) as usize)] = q * a0 + p * a1;
                        zm[(i, n as usize)] = q * a1 - p * a0;
                    }
                }
                hh!(n, n - 1) = T::zero();
            } else {
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = zz;
                e[n as usize] = -zz;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form shift.
            x = hh!(n, n);
            y = T::zero();
            w = T::zero();
            if l < n {
                y = hh!(n - 1, n - 1);
                w = hh!(n, n - 1) * hh!(n - 1, n);
            }

            // Exceptional shifts.
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    hh!(i, i) = hh!(i, i) - x;
                }
                s = hh!(n, n - 1).abs() + hh!(n - 1, n - 2).abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / T::lit(2.0);
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / T::lit(2.0) + s);
                    for i in low..=n {
                        hh!(i, i) = hh!(i, i) - s;
                    }
                    exshift += s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            if iter > MAX_ITER_PER_EIGENVALUE {
                return Err(Error::NoConvergence {
                    op: "eig",
                    iterations: iter,
                    converged: nn - (n as usize + 1),
                    total: nn,
                });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = n - 2;
            while m >= l {
                zz = hh!(m, m);
                r = x - zz;
                s = y - zz;
                p = (r * s - w) / hh!(m + 1, m) + hh!(m, m + 1);
                q = hh!(m + 1, m + 1) - zz - r - s;
                r = hh!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if hh!(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (hh!(m - 1, m - 1).abs() + zz.abs() + hh!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                hh!(i, i - 2) = T::zero();
                if i > m + 2 {
                    hh!(i, i - 3) = T::zero();
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = hh!(k, k - 1);
                    q = hh!(k + 1, k - 1);
                    r = if notlast { hh!(k + 2, k - 1) } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x == T::zero() {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s != T::zero() {
                    if k != m {
                        hh!(k, k - 1) = -s * x;
                    } else if l != m {
                        hh!(k, k - 1) = -hh!(k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    zz = r / s;
                    q /= p;
                    r /= p;

                    let jmax = if full { nn as isize } else { n + 1 };
                    for j in k..jmax {
                        p = hh!(k, j) + q * hh!(k + 1, j);
                        if notlast {
                            p += r * hh!(k + 2, j);
                            hh!(k + 2, j) = hh!(k + 2, j) - p * zz;
                        }
                        hh!(k, j) = hh!(k, j) - p * x;
                        hh!(k + 1, j) = hh!(k + 1, j) - p * y;
                    }
                    let imin = if full { 0 } else { l };
                    let imax = n.min(k + 3);
                    for i in imin..=imax {
                        p = x * hh!(i, k) + y * hh!(i, k + 1);
                        if notlast {
                            p += zz * hh!(i, k + 2);
                            hh!(i, k + 2) = hh!(i, k + 2) - p * r;
                        }
                        hh!(i, k) = hh!(i, k) - p;
                        hh!(i, k + 1) = hh!(i, k + 1) - p * q;
                    }
                    if let Some(zm) = z.as_deref_mut() {
                        let (k0, k1) = (k as usize, (k + 1) as usize);
                        for i in 0..nn {
                            let row = zm.row_mut(i);
                            let mut pp = x * row[k0] + y * row[k1];
                            if notlast {
                                pp += zz * row[k0 + 2];
                                row[k0 + 2] -= pp * r;
                            }
                            row[k0] -= pp;
                            row[k1] -= pp * q;
                        }
                    }
                }
                k += 1;
            }
        }
    }
    Ok((d, e))
}

/// Eigenvector of the quasi-triangular Schur factor for eigenvalue slot `k`
/// (a real eigenvalue or the first member of a complex pair).
fn schur_vector<T: Real>(t: &Matrix<T>, wr: &[T], wi: &[T], k: usize) -> Vec<Complex<T>> {
    let n = t.rows();
    let c0 = Complex::new(T::zero(), T::zero());
    let lambda = Complex::new(wr[k], wi[k]);
    let tnorm = t.max_abs();
    let smin = (T::epsilon() * tnorm).max(T::min_positive_value());
    let mut y = vec![c0; n];

    let top = if wi[k] > T::zero() {
        let (a, b) = (t[(k, k)], t[(k, k + 1)]);
        let (c, dd) = (t[(k + 1, k)], t[(k + 1, k + 1)]);
        let v1 = (Complex::new(b, T::zero()), lambda - a);
        let v2 = (lambda - dd, Complex::new(c, T::zero()));
        let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
        let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
        let (y0, y1) = if n1 >= n2 { v1 } else { v2 };
        y[k] = y0;
        y[k + 1] = y1;
        k + 1
    } else {
        y[k] = Complex::new(T::one(), T::zero());
        k
    };
    let block_start = if wi[k] > T::zero() { k } else { top };

    let big = T::lit(1e100);
    let mut i = block_start as isize - 1;
    while i >= 0 {
        let iu = i as usize;
        let second_of_pair = iu >= 1 && wi[iu - 1] > T::zero() && wi[iu] < T::zero();
        if second_of_pair {
            let i0 = iu - 1;
            let rhs0 = -dot_row(t, i0, iu + 1, top, &y);
            let rhs1 = -dot_row(t, iu, iu + 1, top, &y);
            let a11 = Complex::new(t[(i0, i0)], T::zero()) - lambda;
            let a12 = Complex::new(t[(i0, iu)], T::zero());
            let a21 = Complex::new(t[(iu, i0)], T::zero());
            let a22 = Complex::new(t[(iu, iu)], T::zero()) - lambda;
            let mut det = a11 * a22 - a12 * a21;
            if det.norm() < smin * smin {
                det = Complex::new(smin * smin, T::zero());
            }
            y[i0] = (rhs0 * a22 - a12 * rhs1) / det;
            y[iu] = (a11 * rhs1 - a21 * rhs0) / det;
            i -= 2;
        } else {
            let rhs = -dot_row(t, iu, iu + 1, top, &y);
            let mut denom = Complex::new(t[(iu, iu)], T::zero()) - lambda;
            if denom.norm() < smin {
                denom = Complex::new(smin, T::zero());
            }
            y[iu] = rhs / denom;
            i -= 1;
        }
        let ymax = y.iter().fold(T::zero(), |a, v| a.max(v.norm()));
        if ymax > big {
            for v in &mut y {
                *v = *v / ymax;
            }
        }
    }
    y
}

fn dot_row<T: Real>(t: &Matrix<T>, i: usize, from: usize, to: usize, y: &[Complex<T>]) -> Complex<T> {
    let mut s = Complex::new(T::zero(), T::zero());
    for j in from..=to {
        s += y[j] * t[(i, j)];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let m = Matrix::diag(&[1.0, 2.0, 3.0]);
        let e = eig_all(&m).unwrap();
        let v = sorted(e.values.clone());
        for (k, z) in v.iter().enumerate() {
            assert!((z.re - (k + 1) as f64).abs() < 1e-14 && z.im.abs() < 1e-14);
        }
        assert!(e.max_residual() < 1e-14);
    }

    #[test]
    fn rotation_generator() {
        let m = Matrix::from_rows(&[vec![0.0f64, 1.0], vec![-1.0, 0.0]]).unwrap();
        let e = eig_all(&m).unwrap();
        let v = sorted(e.values.clone());
        assert!((v[0] - Complex::new(0.0, -1.0)).norm() < 1e-14);
        assert!((v[1] - Complex::new(0.0, 1.0)).norm() < 1e-14);
        assert!(e.max_residual() < 1e-14);
    }

    #[test]
    fn companion_of_shifted_quadratic() {
        // z² + 3z + 2 = (z + 1)(z + 2)
        let m = Matrix::from_rows(&[vec![0.0f64, 1.0], vec![-2.0, -3.0]]).unwrap();
        let v = sorted(eig_all(&m).unwrap().values);
        assert!((v[0].re + 2.0).abs() < 1e-14);
        assert!((v[1].re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_matrix_residuals_and_conjugacy() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [5usize, 17, 40] {
            let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let e = eig_all(&m).unwrap();
            assert!(e.max_residual() < 1e-12, "n={n} residual {}", e.max_residual());
            let vals = eigenvalues(&m).unwrap();
            for z in &e.values {
                assert!(vals.iter().any(|w| (w - z).norm() < 1e-9));
                assert!(e.values.iter().any(|w| (w - z.conj()).norm() < 1e-10));
            }
            let tr: f64 = e.values.iter().map(|z| z.re).sum();
            assert!((tr - m.trace()).abs() < 1e-10);
        }
    }

    #[test]
    fn badly_scaled_matrix_balanced() {
        let m = Matrix::from_rows(&[
            vec![1.0, 1e6, 0.0],
            vec![1e-6, 2.0, 1e6],
            vec![0.0, 1e-6, 3.0],
        ])
        .unwrap();
        let e = eig_all(&m).unwrap();
        assert!(e.max_residual() < 1e-12);
    }

    #[test]
    fn defective_jordan_block() {
        let m = Matrix::from_rows(&[vec![2.0f64, 1.0], vec![0.0, 2.0]]).unwrap();
        let e = eig_all(&m).unwrap();
        for z in &e.values {
            assert!((z.re - 2.0).abs() < 1e-7);
        }
        assert!(e.max_residual() < 1e-8);
    }
}

use num_complex::Complex;
use rayon::prelude::*;

use crate::discretize::Generator;
use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::linalg::{Cholesky, Lu, Matrix};
use crate::scalar::Real;

/// Frequency range used for the slope fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanWindow<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> ScanWindow<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidInput(format!("scan window needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `[10, ν_max/2]`: above the lowest decade and well below the grid
    /// cutoff, `ν_max` being the largest stiffness frequency.
    pub fn default_for(gen: &Generator<T>) -> Result<Self> {
        let nu_max = crate::linalg::symmetric_eigen(&gen.stiffness)?
            .values
            .last()
            .copied()
            .unwrap_or_else(T::zero)
            .max(T::zero())
            .sqrt();
        Self::new(T::lit(10.0), nu_max / T::lit(2.0))
    }

    pub fn contains(&self, beta: T) -> bool {
        self.lo <= beta && beta <= self.hi
    }
}

/// Resolvent norms `‖(iβ − 𝒜_h)⁻¹‖_E` over a frequency grid.
#[derive(Debug, Clone)]
pub struct ResolventScan<T> {
    /// Frequencies actually used (a hit on the spectrum is moved by 1e-6).
    pub betas: Vec<T>,
    /// Norms; `+∞` where the shifted operator was singular.
    pub norms: Vec<T>,
    pub window: ScanWindow<T>,
    /// Slope of `log‖R(iβ)‖` against `log β` over the window.
    pub fitted_exponent: Option<T>,
    /// `1 / fitted_exponent`.
    pub theta_implied: Option<T>,
}

impl<T: Real> ResolventScan<T> {
    pub fn singular_points(&self) -> usize {
        self.norms.iter().filter(|v| !v.is_finite()).count()
    }
}

/// Shift by which a frequency is moved when `iβ` hits the spectrum.
pub const BETA_PERTURBATION: f64 = 1e-6;
const MAX_POWER_ITERATIONS: usize = 2000;
const POWER_TOL: f64 = 1e-11;

/// `‖(iβ − 𝒜)⁻¹‖` in the energy norm, or `None` if `iβ` is an eigenvalue
/// to working precision.
///
/// With `W = (U, V)`, `(iβ − 𝒜)W = F` reduces to the complex symmetric
/// system `(K − β² + iβC) U = F₂ + (iβ + C) F₁` and `V = iβU − F₁`. The
/// norm is the largest singular value of `Lᵀ R L⁻ᵀ`, `E = LLᵀ`, found by
/// power iteration on its Gram operator.
pub fn resolvent_norm<T: Real>(gen: &Generator<T>, chol: &Cholesky<T>, beta: T) -> Result<Option<T>> {
    let half = gen.half();
    let q = Matrix::from_fn(half, half, |i, j| {
        let k = gen.stiffness[(i, j)] - if i == j { beta * beta } else { T::zero() };
        Complex::new(k, beta * gen.damping[(i, j)])
    });
    let lu = match Lu::new_owned(q) {
        Ok(lu) => lu,
        Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if lu.pivot_ratio() < T::epsilon() * T::lit(16.0) {
        return Ok(None);
    }
    let op = EnergyResolvent { gen, chol, lu: &lu, beta };
    let n = 2 * half;
    let mut x: Vec<Complex<T>> = (0..n)
        .map(|j| {
            Complex::new(
                T::one() + T::lit(0.1) * T::from_usize_lossy(j % 7),
                T::lit(0.05) * T::from_usize_lossy(j % 5),
            )
        })
        .collect();
    normalize(&mut x);
    let mut sigma2 = T::zero();
    for _ in 0..MAX_POWER_ITERATIONS {
        let tx = op.apply(&x);
        let mut y = op.apply_adjoint(&tx);
        let next = norm2(&tx);
        let ny = normalize(&mut y);
        if ny == T::zero() || !next.is_finite() {
            return Ok(None);
        }
        let done = (next - sigma2).abs() <= T::lit(POWER_TOL) * next;
        sigma2 = next;
        x = y;
        if done {
            break;
        }
    }
    Ok(Some(sigma2.sqrt()))
}

/// `R(iβ)` in energy coordinates, `T = Lᵀ R L⁻ᵀ`.
struct EnergyResolvent<'a, T: Real> {
    gen: &'a Generator<T>,
    chol: &'a Cholesky<T>,
    lu: &'a Lu<Complex<T>>,
    beta: T,
}

impl<T: Real> EnergyResolvent<'_, T> {
    fn ib(&self) -> Complex<T> {
        Complex::new(T::zero(), self.beta)
    }

    /// `(iβ − 𝒜)⁻¹ F`.
    fn resolve(&self, f1: &[Complex<T>], f2: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let ib = self.ib();
        let cf1 = real_matvec(&self.gen.damping, f1);
        let rhs: Vec<Complex<T>> = (0..f1.len()).map(|i| f2[i] + ib * f1[i] + cf1[i]).collect();
        let u = self.lu.solve(&rhs);
        let v = (0..f1.len()).map(|i| ib * u[i] - f1[i]).collect();
        (u, v)
    }

    /// `(iβ − 𝒜)⁻ᴴ F`, using `conj(Q)⁻¹ b = conj(Q⁻¹ conj(b))`.
    fn resolve_adjoint(&self, f1: &[Complex<T>], f2: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let ib = self.ib();
        let rhs: Vec<Complex<T>> = (0..f1.len()).map(|i| (f1[i] - ib * f2[i]).conj()).collect();
        let v: Vec<Complex<T>> = self.lu.solve(&rhs).into_iter().map(|z| z.conj()).collect();
        let cv = real_matvec(&self.gen.damping, &v);
        let u = (0..f1.len()).map(|i| cv[i] - ib * v[i] - f2[i]).collect();
        (u, v)
    }

    fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let half = self.gen.half();
        let (xu, xv) = x.split_at(half);
        let yu = complex_apply(xu, |b| self.chol.solve_upper(b));
        let (u, v) = self.resolve(&yu, xv);
        let mut out = complex_apply(&u, |b| self.chol.apply_upper(b));
        out.extend(v);
        out
    }

    fn apply_adjoint(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let half = self.gen.half();
        let (xu, xv) = x.split_at(half);
        let yu = complex_apply(xu, |b| self.chol.lower().matvec(b));
        let (u, v) = self.resolve_adjoint(&yu, xv);
        let mut out = complex_apply(&u, |b| self.chol.solve_lower(b));
        out.extend(v);
        out
    }
}

/// Applies a real linear map to the real and imaginary parts separately.
fn complex_apply<T: Real>(x: &[Complex<T>], f: impl Fn(&[T]) -> Vec<T>) -> Vec<Complex<T>> {
    let re: Vec<T> = x.iter().map(|z| z.re).collect();
    let im: Vec<T> = x.iter().map(|z| z.im).collect();
    f(&re).into_iter().zip(f(&im)).map(|(a, b)| Complex::new(a, b)).collect()
}

fn real_matvec<T: Real>(m: &Matrix<T>, x: &[Complex<T>]) -> Vec<Complex<T>> {
    complex_apply(x, |b| m.matvec(b))
}

fn norm2<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum()
}

fn normalize<T: Real>(x: &mut [Complex<T>]) -> T {
    let n = norm2(x).sqrt();
    if n > T::zero() {
        for z in x.iter_mut() {
            *z = *z / n;
        }
    }
    n
}

/// Scans `‖(iβ − 𝒜_h)⁻¹‖_E` over `betas` (in parallel) and fits the
/// growth exponent over `window`.
pub fn resolvent_scan<T: Real>(gen: &Generator<T>, betas: &[T], window: ScanWindow<T>) -> Result<ResolventScan<T>> {
    if betas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("scan frequencies must be strictly increasing".into()));
    }
    let chol = Cholesky::new(&gen.stiffness).map_err(|_| Error::NotPositiveDefinite { op: "resolvent_scan" })?;
    let points: Vec<(T, T)> = betas
        .par_iter()
        .map(|&beta| -> Result<(T, T)> {
            if let Some(v) = resolvent_norm(gen, &chol, beta)? {
                return Ok((beta, v));
            }
            let moved = beta + T::lit(BETA_PERTURBATION);
            Ok(match resolvent_norm(gen, &chol, moved)? {
                Some(v) => (moved, v),
                None => (moved, T::infinity()),
            })
        })
        .collect::<Result<_>>()?;
    let (betas, norms): (Vec<T>, Vec<T>) = points.into_iter().unzip();
    let (fx, fy): (Vec<T>, Vec<T>) = betas
        .iter()
        .zip(&norms)
        .filter(|(b, v)| window.contains(**b) && v.is_finite() && **b > T::zero())
        .map(|(b, v)| (*b, *v))
        .unzip();
    let fitted_exponent = if fx.len() >= 3 { Some(log_log_slope(&fx, &fy)?) } else { None };
    Ok(ResolventScan {
        betas,
        norms,
        window,
        fitted_exponent,
        theta_implied: fitted_exponent.map(|s| T::one() / s),
    })
}

/// Resonant frequencies: imaginary parts of the least damped half of the
/// eigenvalues with `Im λ` inside the window, thinned to at most `count`
/// values spread evenly in `log β`.
///
/// On a resonance `‖R(iβ)‖ ≈ 1/|Re λ|`, so the scan follows the envelope
/// of the resolvent instead of the valleys between modes.
pub fn resonant_betas<T: Real>(eigenvalues: &[Complex<T>], window: ScanWindow<T>, count: usize) -> Vec<T> {
    let mut cands: Vec<Complex<T>> = eigenvalues
        .iter()
        .copied()
        .filter(|z| z.im > T::zero() && window.contains(z.im))
        .collect();
    if cands.is_empty() || count == 0 {
        return Vec::new();
    }
    let mut damp: Vec<T> = cands.iter().map(|z| z.re.abs()).collect();
    damp.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let median = damp[(damp.len() - 1) / 2];
    cands.retain(|z| z.re.abs() <= median);
    let mut ims: Vec<T> = cands.iter().map(|z| z.im).collect();
    ims.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    ims.dedup();
    if ims.len() <= count {
        return ims;
    }
    let (l0, l1) = (ims[0].ln(), ims[ims.len() - 1].ln());
    let mut out: Vec<T> = Vec::with_capacity(count);
    let mut next = 0;
    for j in 0..count {
        let target = if count == 1 {
            l0
        } else {
            l0 + (l1 - l0) * T::from_usize_lossy(j) / T::from_usize_lossy(count - 1)
        };
        // nearest unused resonance to the target in log scale
        while next + 1 < ims.len() && (ims[next + 1].ln() - target).abs() <= (ims[next].ln() - target).abs() {
            next += 1;
        }
        if out.last().is_none_or(|&b| ims[next] > b) {
            out.push(ims[next]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_generator, DampingKind, Grid1D, ModelSpec, StiffnessKind};
    use crate::kalman::CouplingPair;
    use crate::spectra::eigenvalues;

    fn gen51(n: usize) -> Generator<f64> {
        assemble_generator(&ModelSpec::viscous_example(n).unwrap()).unwrap()
    }

    #[test]
    fn resolve_inverts_the_shifted_generator() {
        let gen = gen51(6);
        let chol = Cholesky::new(&gen.stiffness).unwrap();
        let beta = 3.7;
        let q = Matrix::from_fn(gen.half(), gen.half(), |i, j| {
            Complex::new(gen.stiffness[(i, j)] - if i == j { beta * beta } else { 0.0 }, beta * gen.damping[(i, j)])
        });
        let lu = Lu::new(&q).unwrap();
        let op = EnergyResolvent { gen: &gen, chol: &chol, lu: &lu, beta };
        let f: Vec<Complex<f64>> = (0..gen.size()).map(|j| Complex::new((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let (u, v) = op.resolve(&f[..gen.half()], &f[gen.half()..]);
        let mut w = u.clone();
        w.extend(v);
        let shifted = Matrix::from_fn(gen.size(), gen.size(), |i, j| {
            Complex::new(-gen.op[(i, j)], if i == j { beta } else { 0.0 })
        });
        let back = shifted.matvec(&w);
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).norm() < 1e-10);
        }
        // adjointness of the energy-coordinate operator
        let g: Vec<Complex<f64>> = (0..gen.size()).map(|j| Complex::new((j as f64 * 0.7).cos(), 0.2)).collect();
        let lhs: Complex<f64> = op.apply(&f).iter().zip(&g).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex<f64> = f.iter().zip(op.apply_adjoint(&g)).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm());
    }

    #[test]
    fn norm_dominates_inverse_distance() {
        let gen = gen51(10);
        let chol = Cholesky::new(&gen.stiffness).unwrap();
        let eig = eigenvalues(&gen.op).unwrap();
        for beta in [0.0, 2.5, 3.33, 9.0, 15.0] {
            let r = resolvent_norm(&gen, &chol, beta).unwrap().unwrap();
            let dist = eig.iter().map(|z| (z - Complex::new(0.0, beta)).norm()).fold(f64::INFINITY, f64::min);
            assert!(r >= 1.0 / dist - 1e-9, "beta {beta}: {r} < {}", 1.0 / dist);
        }
    }

    #[test]
    fn undamped_resonance_is_singular() {
        let pair = CouplingPair::new(Matrix::diag(&[0.0]), Matrix::diag(&[0.0])).unwrap();
        let model = ModelSpec::new(Grid1D::new(4).unwrap(), StiffnessKind::wave_dirichlet(), DampingKind::global_viscous(), pair).unwrap();
        let gen = assemble_generator(&model).unwrap();
        let chol = Cholesky::new(&gen.stiffness).unwrap();
        let nu = crate::discretize::discrete_frequency::<f64>(&model.grid, 1);
        assert!(resolvent_norm(&gen, &chol, nu).unwrap().is_none());
        let scan = resolvent_scan(&gen, &[nu], ScanWindow::new(1.0, 2.0).unwrap()).unwrap();
        assert!(scan.norms[0].is_finite());
        assert!((scan.betas[0] - nu - BETA_PERTURBATION).abs() < 1e-12);
    }

    #[test]
    fn resonances_pick_the_slow_branch() {
        let gen = gen51(30);
        let eig = eigenvalues(&gen.op).unwrap();
        let betas = resonant_betas(&eig, ScanWindow::new(5.0, 40.0).unwrap(), 6);
        assert!(betas.len() >= 4);
        assert!(betas.windows(2).all(|w| w[1] > w[0]));
        for b in &betas {
            let z = eig.iter().find(|z| z.im == *b).unwrap();
            assert!(z.re > -0.01);
        }
    }
}

use num_complex::Complex;

use super::modal::{ModalDamping, ModalPencil};
use crate::discretize::continuum_frequency;
use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::kalman::{example_pair, CouplingPair};
use crate::scalar::Real;

/// One computed eigenvalue of a branch next to its asymptotic prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRoot<T> {
    /// Mode index `k` (or `n`).
    pub index: usize,
    /// Frequency label of the mode.
    pub nu: T,
    pub beta: Complex<T>,
    pub prediction: Complex<T>,
    /// Relative residual of the characteristic equation at `beta`.
    pub residual: T,
}

impl<T: Real> BranchRoot<T> {
    /// `|Re β − Re β_pred| / |Re β_pred|`.
    pub fn rel_err(&self) -> T {
        ((self.beta.re - self.prediction.re) / self.prediction.re).abs()
    }
}

/// Root of the modal pencil with the largest real part (upper half-plane
/// member of its conjugate pair).
///
/// For two components the companion root is refined by the fixed point
/// `β ← i·√(ν² + λ + ζ(βμ))`, where `ζ(x)` is the small eigenvalue of
/// `A + xD`. The companion matrix carries entries of size `μ‖D‖`, which
/// limits the absolute accuracy of its roots to about `ε·μ‖D‖`; that is
/// larger than the real part of the slow branch once `μ = ν²` is large.
pub fn slowest_root<T: Real>(pair: &CouplingPair<T>, nu: T, shift: T, damping: ModalDamping) -> Result<(Complex<T>, T)> {
    let pencil = ModalPencil::new(pair, 0, nu, shift, damping);
    let roots = pencil.roots()?;
    let mut best = roots
        .iter()
        .copied()
        .filter(|z| z.im >= T::zero())
        .max_by(|a, b| a.re.partial_cmp(&b.re).expect("finite roots"))
        .ok_or_else(|| Error::InvalidInput("pencil has no roots".into()))?;
    if pair.size() == 2 && best.im > T::zero() {
        let zeta = SmallEigenvalue::new(pair);
        let mu = pencil.mu;
        let base = Complex::new(nu * nu + shift, T::zero());
        let i = Complex::new(T::zero(), T::one());
        for _ in 0..200 {
            let next = i * (base + zeta.at(best * mu)).sqrt();
            let step = (next - best).norm();
            best = next;
            if step <= T::lit(4.0) * T::epsilon() * best.norm() {
                break;
            }
        }
    }
    let p = pencil.matrix_at(best);
    let scale = p.frobenius_norm().powi(pair.size() as i32);
    Ok((best, pencil.determinant(best).norm() / scale))
}

/// Small eigenvalue of `A + xD` for 2×2 pairs, evaluated from the exact
/// polynomial coefficients of the determinant and discriminant in `x`.
struct SmallEigenvalue<T> {
    det: [T; 3],
    trace: [T; 2],
    disc: [T; 3],
}

impl<T: Real> SmallEigenvalue<T> {
    fn new(pair: &CouplingPair<T>) -> Self {
        let (a, d) = (pair.a(), pair.d());
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let c0 = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let c1 = a[(0, 0)] * d[(1, 1)] + a[(1, 1)] * d[(0, 0)] - a[(0, 1)] * d[(1, 0)] - a[(1, 0)] * d[(0, 1)];
        let c2 = d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)];
        let ta = a[(0, 0)] + a[(1, 1)];
        let td = d[(0, 0)] + d[(1, 1)];
        Self {
            det: [c0, c1, c2],
            trace: [ta, td],
            disc: [ta * ta / four - c0, ta * td / two - c1, td * td / four - c2],
        }
    }

    fn at(&self, x: Complex<T>) -> Complex<T> {
        let det = (x * self.det[2] + self.det[1]) * x + self.det[0];
        let half_trace = (x * self.trace[1] + self.trace[0]) / T::lit(2.0);
        let s = ((x * self.disc[2] + self.disc[1]) * x + self.disc[0]).sqrt();
        let (p, m) = (half_trace + s, half_trace - s);
        let large = if p.norm() >= m.norm() { p } else { m };
        if large.norm() == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        det / large
    }
}

/// Predicted slow root `−2/(125ν^{2p}) + i(ν + 3/(5ν))`, `p = 1` for
/// viscous and `p = 2` for Kelvin–Voigt damping.
pub fn prediction_coupled<T: Real>(nu: T, damping: ModalDamping) -> Complex<T> {
    let power = match damping {
        ModalDamping::Viscous => nu * nu,
        ModalDamping::KelvinVoigt => nu * nu * nu * nu,
    };
    Complex::new(
        -T::lit(2.0) / (T::lit(125.0) * power),
        nu + T::lit(3.0) / (T::lit(5.0) * nu),
    )
}

fn coupled_branch<T: Real>(ks: impl IntoIterator<Item = usize>, damping: ModalDamping) -> Result<Vec<BranchRoot<T>>> {
    let pair = example_pair::<T>();
    ks.into_iter()
        .map(|k| {
            if k == 0 {
                return Err(Error::InvalidInput("mode index starts at 1".into()));
            }
            let nu = continuum_frequency::<T>(k);
            let (beta, residual) = slowest_root(&pair, nu, T::zero(), damping)?;
            Ok(BranchRoot {
                index: k,
                nu,
                beta,
                prediction: prediction_coupled(nu, damping),
                residual,
            })
        })
        .collect()
}

/// Slow branch of the interior viscous example, modes `ν_k = kπ`.
pub fn branch_roots_ex51<T: Real>(ks: impl IntoIterator<Item = usize>) -> Result<Vec<BranchRoot<T>>> {
    coupled_branch(ks, ModalDamping::Viscous)
}

/// Slow branch of the Kelvin–Voigt example, modes `ν_k = kπ`.
pub fn branch_roots_ex52<T: Real>(ks: impl IntoIterator<Item = usize>) -> Result<Vec<BranchRoot<T>>> {
    coupled_branch(ks, ModalDamping::KelvinVoigt)
}

/// Boundary-damped characteristic function
/// `f(β) = (β₁/β) cosh β₁ (sinh β + cosh β) + cosh β sinh β₁`, `β₁ = √(β² + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipFunction<T> {
    /// `f(β)·e^{−|Re β|−|Re β₁|}`.
    pub value: Complex<T>,
    /// `f′(β)` with the same factor.
    pub derivative: Complex<T>,
    /// Sum of the moduli of the two terms of `f`, with the same factor.
    pub scale: T,
}

/// `(cosh z, sinh z)·e^{−|Re z|}`.
fn scaled_cosh_sinh<T: Real>(z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let shift = Complex::new(z.re.abs(), T::zero());
    let ep = (z - shift).exp();
    let em = (-z - shift).exp();
    let half = T::lit(0.5);
    ((ep + em) * half, (ep - em) * half)
}

/// `√(β² + 1)`; the sign is the one with `β₁ ≈ β`. `f` is even in `β₁` up
/// to an overall sign, so both signs share the roots, and this choice keeps
/// `f` analytic along a Newton path that crosses the imaginary axis.
fn beta_one<T: Real>(beta: Complex<T>) -> Complex<T> {
    let b1 = (beta * beta + T::one()).sqrt();
    if (b1 * beta.conj()).re < T::zero() {
        -b1
    } else {
        b1
    }
}

pub fn tip_function<T: Real>(beta: Complex<T>) -> TipFunction<T> {
    let b1 = beta_one(beta);
    let (c, s) = scaled_cosh_sinh(beta);
    let (c1, s1) = scaled_cosh_sinh(b1);
    let e = (beta - Complex::new(beta.re.abs(), T::zero())).exp();
    let ratio = b1 / beta;
    let t1 = ratio * c1 * e;
    let t2 = c * s1;
    let derivative = -(c1 * e) / (b1 * beta * beta) + s1 * e + ratio * c1 * e + s * s1 + (beta / b1) * c * c1;
    TipFunction {
        value: t1 + t2,
        derivative,
        scale: t1.norm() + t2.norm(),
    }
}

/// Convergence threshold `|f| ≤ TIP_TOL · scale` for the Newton iteration.
pub const TIP_TOL: f64 = 1e-12;

/// Damped Newton iteration on the tip function from `seed`. A full step
/// that does not decrease `|f|` is halved up to 40 times.
pub fn tip_root<T: Real>(seed: Complex<T>) -> Result<(Complex<T>, T)> {
    let mut beta = seed;
    let mut cur = tip_function(beta);
    for it in 0..100 {
        let rel = cur.value.norm() / cur.scale;
        if rel <= T::lit(TIP_TOL) {
            return Ok((beta, rel));
        }
        if cur.derivative.norm() == T::zero() {
            break;
        }
        let step = cur.value / cur.derivative;
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial = beta - step * t;
            let next = tip_function(trial);
            if next.value.norm() < cur.value.norm() {
                beta = trial;
                cur = next;
                accepted = true;
                break;
            }
            t *= T::lit(0.5);
        }
        if !accepted {
            let rel = cur.value.norm() / cur.scale;
            // already at round-off level: no step can improve |f|
            if rel <= T::lit(1e3 * TIP_TOL) {
                return Ok((beta, rel));
            }
            return Err(Error::NoConvergence {
                op: "tip_root",
                iterations: it + 1,
                converged: 0,
                total: 1,
            });
        }
    }
    let rel = cur.value.norm() / cur.scale;
    if rel <= T::lit(TIP_TOL) {
        return Ok((beta, rel));
    }
    Err(Error::NoConvergence {
        op: "tip_root",
        iterations: 100,
        converged: 0,
        total: 1,
    })
}

/// Printed expansion `−9/(64n²π²) + i(nπ + π/2 + 1/(8nπ))`.
pub fn prediction_tip<T: Real>(n: usize) -> Complex<T> {
    let pi = T::PI();
    let nf = T::from_usize_lossy(n);
    Complex::new(
        -T::lit(9.0) / (T::lit(64.0) * nf * nf * pi * pi),
        nf * pi + pi / T::lit(2.0) + T::one() / (T::lit(8.0) * nf * pi),
    )
}

/// Leading-order location of the strongly damped tip branch,
/// `−ln(3)/2 + inπ`, from the root `e^{2β} = 1/3` of the leading balance
/// `3e^{4β} + 2e^{2β} − 1 = 0`.
pub fn prediction_tip_secondary<T: Real>(n: usize) -> Complex<T> {
    Complex::new(-T::lit(3.0).ln() / T::lit(2.0), T::from_usize_lossy(n) * T::PI())
}

fn tip_branch<T: Real>(
    ns: impl IntoIterator<Item = usize>,
    seed: impl Fn(usize) -> Complex<T>,
    prediction: impl Fn(usize) -> Complex<T>,
) -> Result<Vec<BranchRoot<T>>> {
    ns.into_iter()
        .map(|n| {
            if n == 0 {
                return Err(Error::InvalidInput("branch index starts at 1".into()));
            }
            let (beta, residual) = tip_root(seed(n))?;
            Ok(BranchRoot {
                index: n,
                nu: T::from_usize_lossy(n) * T::PI(),
                beta,
                prediction: prediction(n),
                residual,
            })
        })
        .collect()
}

/// Weakly damped tip branch, Newton seeded at `i(nπ + π/2)`.
pub fn branch_roots_ex53<T: Real>(ns: impl IntoIterator<Item = usize>) -> Result<Vec<BranchRoot<T>>> {
    tip_branch(
        ns,
        |n| Complex::new(T::zero(), (T::from_usize_lossy(n) + T::lit(0.5)) * T::PI()),
        prediction_tip,
    )
}

/// Strongly damped tip branch, Newton seeded at `−ln(3)/2 + inπ`.
pub fn branch_roots_ex53_secondary<T: Real>(ns: impl IntoIterator<Item = usize>) -> Result<Vec<BranchRoot<T>>> {
    tip_branch(ns, prediction_tip_secondary, prediction_tip_secondary)
}

/// Fits `Re β ∼ −|Im β|^{−1/θ}` and returns `θ = −1/s`, where `s` is the
/// least-squares slope of `log(−Re β)` against `log|Im β|`.
pub fn optimality_exponent<T: Real>(branch: &[Complex<T>]) -> Result<T> {
    if branch.len() < 8 {
        return Err(Error::Fit(format!("need at least 8 branch points, got {}", branch.len())));
    }
    if branch.iter().any(|z| !(z.re < T::zero())) {
        return Err(Error::Fit("every branch point needs Re < 0".into()));
    }
    let im: Vec<T> = branch.iter().map(|z| z.im.abs()).collect();
    let increasing = im.windows(2).all(|w| w[1] > w[0]);
    let decreasing = im.windows(2).all(|w| w[1] < w[0]);
    if !increasing && !decreasing {
        return Err(Error::Fit("branch is not monotone in |Im β|".into()));
    }
    let re: Vec<T> = branch.iter().map(|z| -z.re).collect();
    let s = log_log_slope(&im, &re)?;
    if s == T::zero() {
        return Err(Error::Fit("flat branch has no finite exponent".into()));
    }
    Ok(-T::one() / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::modal::characteristic_viscous;

    #[test]
    fn first_mode_predictions() {
        let p = prediction_coupled::<f64>(std::f64::consts::PI, ModalDamping::Viscous);
        assert!((p.re + 0.0016212).abs() < 1e-7 && (p.im - 3.33258).abs() < 1e-5);
        let p = prediction_coupled::<f64>(std::f64::consts::PI, ModalDamping::KelvinVoigt);
        assert!((p.re + 0.000164256).abs() < 1e-9);
        let p = prediction_tip::<f64>(1);
        assert!((p.re + 0.014248).abs() < 1e-6 && (p.im - 4.752178).abs() < 1e-6);
    }

    #[test]
    fn viscous_first_root_near_prediction() {
        let r = branch_roots_ex51::<f64>([1]).unwrap()[0];
        assert!(characteristic_viscous(r.beta, r.nu).norm() < 1e-12 * r.beta.norm().powi(4));
        assert!((r.beta - r.prediction).norm() <= 0.05 * r.prediction.re.abs() + 0.05);
        assert!(r.beta.re < 0.0);
    }

    #[test]
    fn refinement_agrees_with_companion_at_low_modes() {
        let pair = example_pair::<f64>();
        let nu = 2.0 * std::f64::consts::PI;
        let (refined, res) = slowest_root(&pair, nu, 0.0, ModalDamping::Viscous).unwrap();
        let roots = ModalPencil::new(&pair, 2, nu, 0.0, ModalDamping::Viscous).roots().unwrap();
        assert!(roots.iter().any(|z| (z - refined).norm() < 1e-10));
        assert!(res < 1e-14);
    }

    #[test]
    fn tip_roots_converge() {
        for r in branch_roots_ex53::<f64>(1..=5).unwrap() {
            let f = tip_function(r.beta);
            assert!(f.value.norm() <= 1e-10 * f.scale);
            assert!(r.beta.re < 0.0);
            let n = r.index as f64;
            assert!(r.beta.im > n * std::f64::consts::PI && r.beta.im < (n + 1.0) * std::f64::consts::PI);
        }
        for r in branch_roots_ex53_secondary::<f64>(1..=5).unwrap() {
            assert!(r.beta.re < -0.5);
        }
    }

    #[test]
    fn tip_derivative_matches_difference_quotient() {
        let b = Complex::new(-0.01, 7.3);
        let h = 1e-6;
        let factor = |z: Complex<f64>| (z.re.abs() + beta_one(z).re.abs()).exp();
        let f = |z: Complex<f64>| tip_function(z).value * factor(z);
        let num = (f(b + Complex::new(0.0, h)) - f(b - Complex::new(0.0, h))) / Complex::new(0.0, 2.0 * h);
        let d = tip_function(b).derivative * factor(b);
        assert!((num - d).norm() < 1e-6 * d.norm());
    }

    #[test]
    fn exponent_of_synthetic_branches() {
        let im: Vec<f64> = (1..=12).map(|k| 3.0 * k as f64 + 0.7 * (k as f64).sqrt()).collect();
        let branch: Vec<Complex<f64>> = im.iter().map(|&y| Complex::new(-1.0 / (y * y), y)).collect();
        assert!((optimality_exponent(&branch).unwrap() - 0.5).abs() < 1e-12);
        assert!(optimality_exponent(&branch[..7]).is_err());
        let mut shuffled = branch.clone();
        shuffled.swap(2, 5);
        assert!(optimality_exponent(&shuffled).is_err());
        let mut positive = branch.clone();
        positive[0].re = 0.1;
        assert!(optimality_exponent(&positive).is_err());
    }
}

use super::{CrankNicolson, State};
use crate::discretize::{unknown_positions, Generator, ModelSpec};
use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::scalar::Real;
use crate::spectra::eigenvalues;

/// Upper bound on `T / dt`.
pub const MAX_STEPS: f64 = 1e7;
/// Ratio between consecutive sample times.
pub const SAMPLE_RATIO: f64 = 1.2;
const MIN_FIT_SAMPLES: usize = 8;

/// Energy history of one trajectory.
///
/// A finite truncation decays exponentially at the rate of its spectral
/// abscissa for large times; the polynomial rate of the continuum problem
/// only shows as a transient before that, which is what the fit window
/// brackets.
#[derive(Debug, Clone)]
pub struct DecayReport<T> {
    pub times: Vec<T>,
    /// `‖W(t)‖²_E`.
    pub energies: Vec<T>,
    /// Largest relative residual of `E⁺ − E + 2dt⟨C V_mid, V_mid⟩` over the
    /// steps since the previous sample.
    pub dissipation_residuals: Vec<T>,
    /// Largest relative energy increase over a single step.
    pub max_energy_growth: T,
    pub fitted_theta: Option<T>,
    pub fit_window: Option<(T, T)>,
    /// Local log-log slopes steepened monotonically over the window.
    pub exponential_regime: bool,
    /// `‖W₀‖_E + ‖𝒜W₀‖_E`.
    pub graph_norm0: T,
    pub abscissa: Option<T>,
}

impl<T: Real> DecayReport<T> {
    pub fn max_residual(&self) -> T {
        self.dissipation_residuals.iter().copied().fold(T::zero(), T::max)
    }

    pub fn is_non_increasing(&self, rel_tol: T) -> bool {
        self.energies.windows(2).all(|w| w[1] <= w[0] * (T::one() + rel_tol))
    }

    /// `(t, t^θ ‖W(t)‖_E / graph_norm0)` on the fit window.
    pub fn ratio_curve(&self) -> Vec<(T, T)> {
        let (Some(theta), Some((lo, hi))) = (self.fitted_theta, self.fit_window) else {
            return Vec::new();
        };
        self.times
            .iter()
            .zip(&self.energies)
            .filter(|(t, _)| lo <= **t && **t <= hi)
            .map(|(&t, &e)| (t, t.powf(theta) * e.sqrt() / self.graph_norm0))
            .collect()
    }
}

/// Result of a log-log fit of the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    /// `−slope / 2`; `None` in the exponential regime.
    pub theta: Option<T>,
    pub slope: T,
    pub samples: usize,
    pub exponential: bool,
}

/// Least-squares slope `s` of `log E` against `log t` over `window`,
/// `θ = −s/2`.
pub fn fit_decay_exponent<T: Real>(times: &[T], energies: &[T], window: (T, T)) -> Result<DecayFit<T>> {
    if times.len() != energies.len() {
        return Err(Error::Dimension {
            context: "fit_decay_exponent",
            expected: times.len(),
            actual: energies.len(),
        });
    }
    let (t, e): (Vec<T>, Vec<T>) = times
        .iter()
        .zip(energies)
        .filter(|(t, _)| **t > T::zero() && window.0 <= **t && **t <= window.1)
        .map(|(a, b)| (*a, *b))
        .unzip();
    if t.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "window [{}, {}] holds {} samples, need {MIN_FIT_SAMPLES}",
            window.0,
            window.1,
            t.len()
        )));
    }
    let slope = log_log_slope(&t, &e)?;
    let local: Vec<T> = (1..t.len())
        .map(|j| ((e[j] / e[j - 1]).ln() / (t[j] / t[j - 1]).ln()).abs())
        .collect();
    let growth = T::one() + T::lit(1e-6);
    let exponential = local.windows(2).all(|w| w[1] > w[0] * growth);
    Ok(DecayFit {
        theta: (!exponential).then(|| -slope / T::lit(2.0)),
        slope,
        samples: t.len(),
        exponential,
    })
}

/// `[10·(2π/ν₁), 0.2/|abscissa|]` with `ν₁` the smallest positive
/// frequency of the spectrum, and the abscissa itself.
pub fn calibrated_window<T: Real>(gen: &Generator<T>) -> Result<((T, T), T)> {
    let eig = eigenvalues(&gen.op)?;
    let scale = eig.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let abscissa = eig.iter().map(|z| z.re).fold(T::neg_infinity(), T::max);
    let nu1 = eig
        .iter()
        .map(|z| z.im)
        .filter(|&im| im > T::lit(1e-10) * scale)
        .fold(T::infinity(), T::min);
    if !nu1.is_finite() {
        return Err(Error::InvalidInput("spectrum has no oscillating mode".into()));
    }
    let t_lo = T::lit(10.0) * T::lit(2.0) * T::PI() / nu1;
    let t_hi = if abscissa < T::zero() {
        T::lit(0.2) / abscissa.abs()
    } else {
        T::infinity()
    };
    Ok(((t_lo, t_hi), abscissa))
}

/// Simulates on the calibrated window of `gen`.
pub fn simulate<T: Real>(gen: &Generator<T>, s0: &State<T>, dt: T, t_end: T) -> Result<DecayReport<T>> {
    let ((lo, hi), abscissa) = calibrated_window(gen)?;
    let mut report = simulate_with_window(gen, s0, dt, t_end, Some((lo, hi.min(t_end))))?;
    report.abscissa = Some(abscissa);
    Ok(report)
}

/// Integrates to `t_end` with step `dt`, logging the energy at times
/// spaced by the factor [`SAMPLE_RATIO`], and fits `θ` over `window`.
pub fn simulate_with_window<T: Real>(
    gen: &Generator<T>,
    s0: &State<T>,
    dt: T,
    t_end: T,
    window: Option<(T, T)>,
) -> Result<DecayReport<T>> {
    s0.check(gen)?;
    if !(dt > T::zero()) || !(t_end >= T::zero()) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!("need dt > 0 and T >= 0, got dt={dt}, T={t_end}")));
    }
    let ratio = (t_end / dt).ceil();
    if ratio > T::lit(MAX_STEPS) {
        return Err(Error::InvalidInput(format!("T/dt = {ratio} exceeds {MAX_STEPS:e}")));
    }
    let steps = ratio.to_usize().unwrap_or(0);
    let cn = CrankNicolson::new(gen, dt)?;
    let half = gen.half();
    let mut w = s0.to_vector();
    let mut next = vec![T::zero(); w.len()];
    let mut vmid = vec![T::zero(); half];
    let two = T::lit(2.0);

    let mut energy = gen.energy_norm2(&w);
    let mut times = vec![s0.t];
    let mut energies = vec![energy];
    let mut residuals = vec![T::zero()];
    let mut growth = T::zero();
    let mut worst = T::zero();
    let mut sample_at = 1usize;
    for k in 1..=steps {
        cn.step_vector(&mut w, &mut next);
        for (i, m) in vmid.iter_mut().enumerate() {
            *m = (next[half + i] + w[half + i]) / two;
        }
        let e_new = gen.energy_norm2(&w);
        let balance = e_new - energy + two * dt * gen.dissipation(&vmid);
        if energy > T::zero() {
            worst = worst.max(balance.abs() / energy);
            growth = growth.max((e_new - energy) / energy);
        }
        energy = e_new;
        if k == sample_at || k == steps {
            times.push(s0.t + dt * T::from_usize_lossy(k));
            energies.push(energy);
            residuals.push(worst);
            worst = T::zero();
            let scaled = (T::from_usize_lossy(k) * T::lit(SAMPLE_RATIO)).ceil().to_usize().unwrap_or(usize::MAX);
            sample_at = scaled.max(k + 1);
        }
    }

    let (fitted_theta, exponential_regime) = match window {
        Some(win) => match fit_decay_exponent(&times, &energies, win) {
            Ok(fit) => (fit.theta, fit.exponential),
            Err(Error::Fit(_)) => (None, false),
            Err(e) => return Err(e),
        },
        None => (None, false),
    };
    Ok(DecayReport {
        times,
        energies,
        dissipation_residuals: residuals,
        max_energy_growth: growth,
        fitted_theta,
        fit_window: window,
        exponential_regime,
        graph_norm0: gen.graph_norm(&s0.to_vector()),
        abscissa: None,
    })
}

/// Smooth data `U₀ = Σ_k k^{-5/2} sin(kπx)` in every component, `V₀ = 0`,
/// scaled to unit graph norm.
pub fn decay_initial_data<T: Real>(model: &ModelSpec<T>, gen: &Generator<T>) -> Result<State<T>> {
    let x = unknown_positions::<T>(&model.grid, model.stiffness.variant);
    let profile: Vec<T> = x
        .iter()
        .map(|&xj| {
            (1..=x.len())
                .map(|k| {
                    let kf = T::from_usize_lossy(k);
                    kf.powf(T::lit(-2.5)) * (kf * T::PI() * xj).sin()
                })
                .sum()
        })
        .collect();
    let mut u = Vec::with_capacity(gen.half());
    for _ in 0..gen.components {
        u.extend_from_slice(&profile);
    }
    let s = State::new(u, vec![T::zero(); gen.half()], T::zero())?;
    let g = gen.graph_norm(&s.to_vector());
    if !(g > T::zero()) {
        return Err(Error::InvalidInput("initial data has zero graph norm".into()));
    }
    Ok(s.scaled(T::one() / g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_time_energy_gives_half() {
        let t: Vec<f64> = (0..20).map(|j| 1.2f64.powi(j)).collect();
        let e: Vec<f64> = t.iter().map(|t| 1.0 / t).collect();
        let fit = fit_decay_exponent(&t, &e, (1.0, 100.0)).unwrap();
        assert!((fit.theta.unwrap() - 0.5).abs() < 1e-12);
        assert!(!fit.exponential);
    }

    #[test]
    fn exponential_energy_is_flagged() {
        let t: Vec<f64> = (0..20).map(|j| 1.2f64.powi(j)).collect();
        let e: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        let fit = fit_decay_exponent(&t, &e, (1.0, 100.0)).unwrap();
        assert!(fit.exponential && fit.theta.is_none());
    }

    #[test]
    fn short_window_rejected() {
        let t: Vec<f64> = (1..20).map(f64::from).collect();
        let e: Vec<f64> = t.iter().map(|t| 1.0 / t).collect();
        assert!(matches!(fit_decay_exponent(&t, &e, (1.0, 7.5)), Err(Error::Fit(_))));
    }
}

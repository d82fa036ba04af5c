//! Implicit midpoint time stepping of `W' = 𝒜_h W` and decay-rate fits.

mod decay;

pub use decay::{
    calibrated_window, decay_initial_data, fit_decay_exponent, simulate, simulate_with_window, DecayFit, DecayReport,
    MAX_STEPS, SAMPLE_RATIO,
};

use crate::discretize::Generator;
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::scalar::Real;

/// `(U, V)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub t: T,
}

impl<T: Real> State<T> {
    pub fn new(u: Vec<T>, v: Vec<T>, t: T) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::Dimension {
                context: "State::new",
                expected: u.len(),
                actual: v.len(),
            });
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) || !t.is_finite() {
            return Err(Error::InvalidInput("state has non-finite entries".into()));
        }
        Ok(Self { u, v, t })
    }

    pub fn zero(half: usize) -> Self {
        Self {
            u: vec![T::zero(); half],
            v: vec![T::zero(); half],
            t: T::zero(),
        }
    }

    /// Splits `W = (U, V)`.
    pub fn from_vector(w: &[T], t: T) -> Result<Self> {
        if !w.len().is_multiple_of(2) {
            return Err(Error::InvalidInput("state vector has odd length".into()));
        }
        let (u, v) = w.split_at(w.len() / 2);
        Self::new(u.to_vec(), v.to_vec(), t)
    }

    pub fn to_vector(&self) -> Vec<T> {
        let mut w = self.u.clone();
        w.extend_from_slice(&self.v);
        w
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            u: self.u.iter().map(|&x| x * s).collect(),
            v: self.v.iter().map(|&x| x * s).collect(),
            t: self.t,
        }
    }

    fn check(&self, gen: &Generator<T>) -> Result<()> {
        if self.u.len() != gen.half() || self.v.len() != gen.half() {
            return Err(Error::Dimension {
                context: "State",
                expected: gen.half(),
                actual: self.u.len().max(self.v.len()),
            });
        }
        Ok(())
    }
}

/// One implicit midpoint step `(I − dt/2·𝒜)W⁺ = (I + dt/2·𝒜)W`.
pub fn step_cn<T: Real>(gen: &Generator<T>, s: &State<T>, dt: T) -> Result<State<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    s.check(gen)?;
    let (lhs, rhs) = midpoint_pair(&gen.op, dt);
    let lu = Lu::new_owned(lhs).map_err(|_| Error::Singular { op: "step_cn" })?;
    let w = lu.solve(&rhs.matvec(&s.to_vector()));
    State::from_vector(&w, s.t + dt)
}

fn midpoint_pair<T: Real>(op: &Matrix<T>, dt: T) -> (Matrix<T>, Matrix<T>) {
    let half_step = op.scale(dt / T::lit(2.0));
    let id = Matrix::identity(op.rows());
    (id.sub(&half_step), id.add(&half_step))
}

/// Midpoint propagator `(I − dt/2·𝒜)⁻¹(I + dt/2·𝒜)` for a fixed step.
///
/// A negative `dt` gives the inverse map of the step `|dt|`.
#[derive(Debug, Clone)]
pub struct CrankNicolson<T> {
    propagator: Matrix<T>,
    dt: T,
}

impl<T: Real> CrankNicolson<T> {
    pub fn new(gen: &Generator<T>, dt: T) -> Result<Self> {
        if dt == T::zero() || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("time step must be nonzero and finite, got {dt}")));
        }
        let (lhs, rhs) = midpoint_pair(&gen.op, dt);
        let lu = Lu::new_owned(lhs).map_err(|_| Error::Singular { op: "CrankNicolson::new" })?;
        Ok(Self {
            propagator: lu.solve_matrix(&rhs),
            dt,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn propagator(&self) -> &Matrix<T> {
        &self.propagator
    }

    pub fn step(&self, s: &State<T>) -> State<T> {
        let w = self.propagator.matvec(&s.to_vector());
        let half = s.u.len();
        State {
            u: w[..half].to_vec(),
            v: w[half..].to_vec(),
            t: s.t + self.dt,
        }
    }

    /// Steps `w` in place using `scratch` of the same length.
    pub fn step_vector(&self, w: &mut Vec<T>, scratch: &mut Vec<T>) {
        scratch.resize(w.len(), T::zero());
        self.propagator.matvec_into(w, scratch);
        std::mem::swap(w, scratch);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_generator, ModelSpec};

    #[test]
    fn zero_state_stays_zero() {
        let gen = assemble_generator(&ModelSpec::<f64>::viscous_example(6).unwrap()).unwrap();
        let s = step_cn(&gen, &State::zero(gen.half()), 0.1).unwrap();
        assert!(s.u.iter().chain(&s.v).all(|&x| x == 0.0));
        assert_eq!(s.t, 0.1);
    }

    #[test]
    fn propagator_matches_single_step() {
        let gen = assemble_generator(&ModelSpec::<f64>::viscous_example(6).unwrap()).unwrap();
        let w: Vec<f64> = (0..gen.size()).map(|j| (j as f64 * 0.37).sin()).collect();
        let s = State::from_vector(&w, 0.0).unwrap();
        let a = step_cn(&gen, &s, 0.05).unwrap();
        let b = CrankNicolson::new(&gen, 0.05).unwrap().step(&s);
        for (x, y) in a.to_vector().iter().zip(b.to_vector()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let gen = assemble_generator(&ModelSpec::<f64>::viscous_example(4).unwrap()).unwrap();
        assert!(step_cn(&gen, &State::zero(gen.half()), 0.0).is_err());
        assert!(step_cn(&gen, &State::zero(3), 0.1).is_err());
        assert!(State::new(vec![f64::NAN], vec![0.0], 0.0).is_err());
    }
}

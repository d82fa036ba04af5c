use num_complex::Complex;

use super::eig::eigenvalues;
use crate::discretize::{continuum_frequency, discrete_frequency, DampingKind, ModelSpec, StiffnessVariant};
use crate::error::{Error, Result};
use crate::kalman::CouplingPair;
use crate::linalg::{Lu, Matrix};
use crate::scalar::Real;

/// Which Dirichlet frequencies label the modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeFrequencies {
    /// `ν_k = kπ`.
    Continuum,
    /// `ν_{k,h} = (2/h) sin(kπh/2)` of the assembled grid.
    Discrete,
}

/// How the damping scales on a mode of frequency `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModalDamping {
    /// `μ = 1`.
    Viscous,
    /// `μ = ν²`.
    KelvinVoigt,
}

impl ModalDamping {
    pub fn mu<T: Real>(&self, nu: T) -> T {
        match self {
            Self::Viscous => T::one(),
            Self::KelvinVoigt => nu * nu,
        }
    }
}

/// Quadratic pencil `β² I + β μ D + (ν² + λ) I + A` of one sine mode.
#[derive(Debug, Clone)]
pub struct ModalPencil<T> {
    pub k: usize,
    pub nu: T,
    pub mu: T,
    /// `(ν² + λ) I + A`.
    pub stiffness: Matrix<T>,
    /// `μ D`.
    pub damping: Matrix<T>,
}

impl<T: Real> ModalPencil<T> {
    pub fn new(pair: &CouplingPair<T>, k: usize, nu: T, shift: T, damping: ModalDamping) -> Self {
        let n = pair.size();
        let mu = damping.mu(nu);
        Self {
            k,
            nu,
            mu,
            stiffness: Matrix::identity(n).scale(nu * nu + shift).add(pair.a()),
            damping: pair.d().scale(mu),
        }
    }

    pub fn size(&self) -> usize {
        self.stiffness.rows()
    }

    /// `[[0, I], [−((ν² + λ)I + A), −μD]]`.
    pub fn companion(&self) -> Matrix<T> {
        let n = self.size();
        let mut c = Matrix::zeros(2 * n, 2 * n);
        c.set_block(0, n, &Matrix::identity(n));
        c.set_block(n, 0, &self.stiffness.scale(-T::one()));
        c.set_block(n, n, &self.damping.scale(-T::one()));
        c
    }

    /// All `2N` roots of `det P(β) = 0`.
    pub fn roots(&self) -> Result<Vec<Complex<T>>> {
        eigenvalues(&self.companion())
    }

    /// `P(β)`.
    pub fn matrix_at(&self, beta: Complex<T>) -> Matrix<Complex<T>> {
        let n = self.size();
        Matrix::from_fn(n, n, |i, j| {
            let diag = if i == j { beta * beta } else { Complex::new(T::zero(), T::zero()) };
            diag + beta * self.damping[(i, j)] + Complex::new(self.stiffness[(i, j)], T::zero())
        })
    }

    /// `det P(β)`.
    pub fn determinant(&self, beta: Complex<T>) -> Complex<T> {
        match Lu::new(&self.matrix_at(beta)) {
            Ok(lu) => lu.determinant(),
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }
}

/// Splits a uniformly damped `wave_dirichlet` model into independent modal
/// pencils for modes `1..=modes`.
pub fn modal_reduce<T: Real>(model: &ModelSpec<T>, modes: usize, freq: ModeFrequencies) -> Result<Vec<ModalPencil<T>>> {
    if model.stiffness.variant != StiffnessVariant::WaveDirichlet {
        return Err(Error::InvalidInput("modal_reduce needs wave_dirichlet stiffness".into()));
    }
    let damping = modal_damping(&model.damping)?;
    if freq == ModeFrequencies::Discrete && modes > model.grid.n() {
        return Err(Error::InvalidInput(format!(
            "the grid resolves {} modes, {modes} requested",
            model.grid.n()
        )));
    }
    Ok((1..=modes)
        .map(|k| {
            let nu = match freq {
                ModeFrequencies::Continuum => continuum_frequency(k),
                ModeFrequencies::Discrete => discrete_frequency(&model.grid, k),
            };
            ModalPencil::new(&model.pair, k, nu, model.stiffness.shift, damping)
        })
        .collect())
}

fn modal_damping<T: Real>(d: &DampingKind<T>) -> Result<ModalDamping> {
    if !d.is_uniform() {
        return Err(Error::InvalidInput(
            "modal_reduce needs global viscous damping or Kelvin-Voigt damping with a = 1".into(),
        ));
    }
    Ok(match d {
        DampingKind::KelvinVoigt { .. } => ModalDamping::KelvinVoigt,
        _ => ModalDamping::Viscous,
    })
}

/// Left side of the viscous characteristic equation
/// `(β² + ν² + 1 + β)(β² + ν² + 2 + 4β) − 4β²`.
pub fn characteristic_viscous<T: Real>(beta: Complex<T>, nu: T) -> Complex<T> {
    characteristic(beta, nu, T::one())
}

/// Left side of the Kelvin–Voigt characteristic equation
/// `(β² + ν² + 1 + βν²)(β² + ν² + 2 + 4βν²) − 4β²ν⁴`.
pub fn characteristic_kelvin_voigt<T: Real>(beta: Complex<T>, nu: T) -> Complex<T> {
    characteristic(beta, nu, nu * nu)
}

fn characteristic<T: Real>(beta: Complex<T>, nu: T, mu: T) -> Complex<T> {
    let z = beta * beta + nu * nu;
    let bm = beta * mu;
    let one = T::one();
    (z + one + bm) * (z + T::lit(2.0) + bm * T::lit(4.0)) - bm * bm * T::lit(4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_pencil_quadratic_formula() {
        let pair = CouplingPair::new(Matrix::diag(&[0.0]), Matrix::diag(&[1.0])).unwrap();
        for nu in [0.3, 2.0, 7.5] {
            let p = ModalPencil::new(&pair, 1, nu, 0.0, ModalDamping::Viscous);
            let mut roots = p.roots().unwrap();
            roots.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap().then(a.re.partial_cmp(&b.re).unwrap()));
            let disc = Complex::new(1.0 - 4.0 * nu * nu, 0.0).sqrt();
            let mut expect: [Complex<f64>; 2] = [(-1.0 + disc) / 2.0, (-1.0 - disc) / 2.0];
            expect.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap().then(a.re.partial_cmp(&b.re).unwrap()));
            for (r, e) in roots.iter().zip(&expect) {
                assert!((r - e).norm() < 1e-12, "{r} vs {e}");
            }
        }
    }

    #[test]
    fn pencil_roots_solve_characteristic_equations() {
        let pair = crate::kalman::example_pair::<f64>();
        for k in [1, 4, 12] {
            let nu = continuum_frequency::<f64>(k);
            for (kind, chi) in [
                (ModalDamping::Viscous, characteristic_viscous as fn(Complex<f64>, f64) -> Complex<f64>),
                (ModalDamping::KelvinVoigt, characteristic_kelvin_voigt),
            ] {
                let p = ModalPencil::new(&pair, k, nu, 0.0, kind);
                for r in p.roots().unwrap() {
                    let scale = (r.norm() + nu).powi(4) + (p.mu * r.norm()).powi(2);
                    assert!(chi(r, nu).norm() <= 1e-10 * scale);
                    let det = p.determinant(r);
                    assert!((det - chi(r, nu)).norm() <= 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn reduction_requires_uniform_damping() {
        let local = ModelSpec::new(
            crate::discretize::Grid1D::new(8).unwrap(),
            crate::discretize::StiffnessKind::wave_dirichlet(),
            DampingKind::viscous(0.5, 1.0).unwrap(),
            crate::kalman::example_pair::<f64>(),
        )
        .unwrap();
        assert!(modal_reduce(&local, 3, ModeFrequencies::Continuum).is_err());
        let model = ModelSpec::<f64>::kelvin_voigt_example(8).unwrap();
        let pencils = modal_reduce(&model, 8, ModeFrequencies::Discrete).unwrap();
        assert_eq!(pencils.len(), 8);
        assert_eq!(pencils[2].mu, pencils[2].nu * pencils[2].nu);
        assert!(modal_reduce(&model, 9, ModeFrequencies::Discrete).is_err());
    }
}

use num_complex::Complex;

use super::branches::BranchRoot;
use super::eig::{eig_all, eigenvalues};
use crate::discretize::Generator;
use crate::error::Result;
use crate::scalar::Real;

/// Spectrum of an assembled generator.
#[derive(Debug, Clone)]
pub struct SpectrumReport<T> {
    pub eigenvalues: Vec<Complex<T>>,
    /// `‖Mv − λv‖ / ‖M‖_F` per eigenpair.
    pub residuals: Vec<T>,
    /// `max Re λ`.
    pub abscissa: T,
    pub branch_table: Vec<BranchRoot<T>>,
}

impl<T: Real> SpectrumReport<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().copied().fold(T::zero(), T::max)
    }

    /// Largest distance from an eigenvalue to the conjugate of its nearest
    /// partner, relative to the largest modulus.
    pub fn conjugate_defect(&self) -> T {
        conjugate_defect(&self.eigenvalues)
    }
}

/// Eigenpairs of `gen.op` with residuals.
pub fn spectrum_report<T: Real>(gen: &Generator<T>) -> Result<SpectrumReport<T>> {
    let eig = eig_all(&gen.op)?;
    let abscissa = max_real(&eig.values);
    Ok(SpectrumReport {
        eigenvalues: eig.values,
        residuals: eig.residuals,
        abscissa,
        branch_table: Vec::new(),
    })
}

/// `max Re λ` over the spectrum of `gen.op`.
pub fn spectral_abscissa<T: Real>(gen: &Generator<T>) -> Result<T> {
    Ok(max_real(&eigenvalues(&gen.op)?))
}

pub(crate) fn max_real<T: Real>(values: &[Complex<T>]) -> T {
    values.iter().map(|z| z.re).fold(T::neg_infinity(), T::max)
}

pub fn conjugate_defect<T: Real>(values: &[Complex<T>]) -> T {
    let scale = values.iter().map(|z| z.norm()).fold(T::one(), T::max);
    let mut worst = T::zero();
    for z in values {
        let target = z.conj();
        let best = values
            .iter()
            .map(|w| (w - target).norm())
            .fold(T::infinity(), T::min);
        worst = worst.max(best);
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_generator, DampingKind, Grid1D, ModelSpec, StiffnessKind};
    use crate::kalman::CouplingPair;
    use crate::linalg::Matrix;

    fn scalar_model(n: usize, d: f64) -> ModelSpec<f64> {
        let pair = CouplingPair::new(Matrix::diag(&[0.0]), Matrix::diag(&[d])).unwrap();
        ModelSpec::new(Grid1D::new(n).unwrap(), StiffnessKind::wave_dirichlet(), DampingKind::global_viscous(), pair).unwrap()
    }

    #[test]
    fn undamped_spectrum_is_imaginary() {
        let gen = assemble_generator(&scalar_model(12, 0.0)).unwrap();
        let rep = spectrum_report(&gen).unwrap();
        assert!(rep.abscissa.abs() <= 1e-8 * gen.op.frobenius_norm());
        assert!(rep.max_residual() < 1e-8);
        assert!(rep.conjugate_defect() < 1e-10);
    }

    #[test]
    fn scalar_viscous_abscissa() {
        let gen = assemble_generator(&scalar_model(12, 1.0)).unwrap();
        let a = spectral_abscissa(&gen).unwrap();
        assert!((a + 0.5).abs() < 1e-9, "abscissa {a}");
    }
}

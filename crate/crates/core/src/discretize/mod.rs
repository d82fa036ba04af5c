//! Finite-difference realizations on `(0, 1)` of the scalar operator `L`,
//! the damping operators `g*g`, and the coupled first-order generator
//! `𝒜(U, V) = (V, −ℒU − AU − D𝒢*𝒢V)` with its energy inner product.

use crate::error::{Error, Result};
use crate::kalman::{self, CouplingPair};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Real;

/// Largest generator dimension `2Nn` that will be assembled.
pub const MAX_GENERATOR_DIM: usize = 20000;

/// Uniform grid on `(0, 1)` with `n` interior nodes and spacing `1/(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid1D {
    n: usize,
}

impl Grid1D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("grid needs n >= 2 interior nodes, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h<T: Real>(&self) -> T {
        T::one() / T::from_usize_lossy(self.n + 1)
    }

    /// Interior nodes `x_i = i·h`, `i = 1..=n`.
    pub fn nodes<T: Real>(&self) -> Vec<T> {
        let h = self.h::<T>();
        (1..=self.n).map(|i| T::from_usize_lossy(i) * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StiffnessVariant {
    /// `−u″` with `u(0) = u(1) = 0`.
    WaveDirichlet,
    /// `−u″` with `u(0) = 0` and a free tip at `x = 1` whose flux is set by
    /// the boundary damping.
    WaveTip,
    /// `u⁗` with `u = u′ = 0` at both ends.
    BeamClamped,
}

impl StiffnessVariant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::WaveDirichlet => "wave_dirichlet",
            Self::WaveTip => "wave_tip",
            Self::BeamClamped => "beam_clamped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessKind<T> {
    pub variant: StiffnessVariant,
    /// Zero-order term `λ ≥ 0`.
    pub shift: T,
}

impl<T: Real> StiffnessKind<T> {
    pub fn new(variant: StiffnessVariant, shift: T) -> Result<Self> {
        if !(shift >= T::zero()) || !shift.is_finite() {
            return Err(Error::InvalidInput(format!("stiffness shift must be finite and >= 0, got {shift}")));
        }
        Ok(Self { variant, shift })
    }

    pub fn wave_dirichlet() -> Self {
        Self {
            variant: StiffnessVariant::WaveDirichlet,
            shift: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DampingKind<T> {
    /// Indicator of `[lo, hi)` sampled at the nodes.
    Viscous { lo: T, hi: T },
    /// Strain-rate damping `−∂ₓ(a ∂ₓ(a ·))` with `a` given at the nodes.
    KelvinVoigt { a: Vec<T> },
    /// Point damping at the tip `x = 1`.
    BoundaryTip,
}

impl<T: Real> DampingKind<T> {
    pub fn viscous(lo: T, hi: T) -> Result<Self> {
        if !(T::zero() <= lo && lo < hi && hi <= T::one()) {
            return Err(Error::InvalidInput(format!(
                "viscous region needs 0 <= lo < hi <= 1, got [{lo}, {hi})"
            )));
        }
        Ok(Self::Viscous { lo, hi })
    }

    pub fn global_viscous() -> Self {
        Self::Viscous {
            lo: T::zero(),
            hi: T::one(),
        }
    }

    pub fn kelvin_voigt(a: Vec<T>) -> Result<Self> {
        if let Some(bad) = a.iter().find(|v| !(**v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("Kelvin-Voigt coefficient must be >= 0, got {bad}")));
        }
        Ok(Self::KelvinVoigt { a })
    }

    pub fn kelvin_voigt_uniform(grid: &Grid1D, value: T) -> Result<Self> {
        Self::kelvin_voigt(vec![value; grid.n()])
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Viscous { .. } => "viscous",
            Self::KelvinVoigt { .. } => "kelvin_voigt",
            Self::BoundaryTip => "boundary_tip",
        }
    }

    /// Regularity exponent `r` of the damping.
    pub fn regularity(&self) -> T {
        match self {
            Self::Viscous { .. } | Self::BoundaryTip => T::zero(),
            Self::KelvinVoigt { .. } => T::one(),
        }
    }

    /// Predicted decay exponent `θ = 1 / (2(1 + r))`.
    pub fn predicted_theta(&self) -> T {
        T::one() / (T::lit(2.0) * (T::one() + self.regularity()))
    }

    /// Whether the damping acts the same way on every sine mode.
    pub fn is_uniform(&self) -> bool {
        match self {
            Self::Viscous { lo, hi } => *lo == T::zero() && *hi == T::one(),
            Self::KelvinVoigt { a } => a.first().is_some_and(|&a0| a0 == T::one() && a.iter().all(|&v| v == a0)),
            Self::BoundaryTip => false,
        }
    }
}

/// A coupled 1-D model `U″ + ℒU + AU + D𝒢*𝒢U′ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub grid: Grid1D,
    pub stiffness: StiffnessKind<T>,
    pub damping: DampingKind<T>,
    pub pair: CouplingPair<T>,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(grid: Grid1D, stiffness: StiffnessKind<T>, damping: DampingKind<T>, pair: CouplingPair<T>) -> Result<Self> {
        let model = Self {
            grid,
            stiffness,
            damping,
            pair,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        match (&self.damping, self.stiffness.variant) {
            (DampingKind::BoundaryTip, v) if v != StiffnessVariant::WaveTip => {
                return Err(Error::InvalidInput("boundary_tip damping requires wave_tip stiffness".into()));
            }
            (DampingKind::KelvinVoigt { .. }, StiffnessVariant::WaveTip) => {
                return Err(Error::InvalidInput("kelvin_voigt damping is not available with wave_tip stiffness".into()));
            }
            (DampingKind::KelvinVoigt { a }, _) if a.len() != n => {
                return Err(Error::Dimension {
                    context: "kelvin_voigt coefficient",
                    expected: n,
                    actual: a.len(),
                });
            }
            (DampingKind::Viscous { lo, hi }, _) => {
                DampingKind::viscous(*lo, *hi)?;
            }
            _ => {}
        }
        if self.stiffness.variant == StiffnessVariant::BeamClamped && n < 5 {
            return Err(Error::InvalidInput(format!("beam_clamped needs n >= 5, got {n}")));
        }
        StiffnessKind::new(self.stiffness.variant, self.stiffness.shift)?;
        Ok(())
    }

    /// Number of components `N`.
    pub fn components(&self) -> usize {
        self.pair.size()
    }

    /// Interior damped wave model with `ω = (0, 1)` and the pair
    /// `A = diag(1, 2)`, `D = [[1, 2], [2, 4]]`.
    pub fn viscous_example(n: usize) -> Result<Self> {
        Self::new(
            Grid1D::new(n)?,
            StiffnessKind::wave_dirichlet(),
            DampingKind::global_viscous(),
            kalman::example_pair(),
        )
    }

    /// Kelvin–Voigt analog of [`viscous_example`](Self::viscous_example) with `a ≡ 1`.
    pub fn kelvin_voigt_example(n: usize) -> Result<Self> {
        let grid = Grid1D::new(n)?;
        Self::new(
            grid,
            StiffnessKind::wave_dirichlet(),
            DampingKind::kelvin_voigt_uniform(&grid, T::one())?,
            kalman::example_pair(),
        )
    }

    /// Tip-damped string with `A = diag(1, 0)`, `D = [[1, −1], [−1, 1]]`.
    pub fn boundary_example(n: usize) -> Result<Self> {
        Self::new(
            Grid1D::new(n)?,
            StiffnessKind {
                variant: StiffnessVariant::WaveTip,
                shift: T::zero(),
            },
            DampingKind::BoundaryTip,
            kalman::boundary_example_pair(),
        )
    }

    pub fn with_pair(&self, pair: CouplingPair<T>) -> Self {
        Self {
            pair,
            ..self.clone()
        }
    }
}

/// Mesh width used by a stiffness variant. The tip variant places the last
/// unknown on `x = 1`, so its `n` unknowns sit at `i/n`.
pub fn spacing<T: Real>(grid: &Grid1D, variant: StiffnessVariant) -> T {
    match variant {
        StiffnessVariant::WaveTip => T::one() / T::from_usize_lossy(grid.n()),
        _ => grid.h(),
    }
}

/// Positions of the unknowns for a stiffness variant.
pub fn unknown_positions<T: Real>(grid: &Grid1D, variant: StiffnessVariant) -> Vec<T> {
    let h = spacing::<T>(grid, variant);
    (1..=grid.n()).map(|i| T::from_usize_lossy(i) * h).collect()
}

/// Symmetric stiffness matrix `L_h`.
///
/// For `wave_tip` the tip unknown is stored mass-weighted as `u_n/√2`, so
/// the half-cell mass at `x = 1` becomes the identity and `L_h` stays
/// symmetric.
pub fn assemble_stiffness<T: Real>(grid: &Grid1D, kind: &StiffnessKind<T>) -> Result<Matrix<T>> {
    let n = grid.n();
    let mut l = Matrix::zeros(n, n);
    match kind.variant {
        StiffnessVariant::WaveDirichlet => {
            let h = grid.h::<T>();
            let w = T::one() / (h * h);
            for i in 0..n {
                l[(i, i)] = T::lit(2.0) * w;
                if i > 0 {
                    l[(i, i - 1)] = -w;
                    l[(i - 1, i)] = -w;
                }
            }
        }
        StiffnessVariant::WaveTip => {
            let h = spacing::<T>(grid, kind.variant);
            let w = T::one() / (h * h);
            for i in 0..n {
                l[(i, i)] = T::lit(2.0) * w;
                if i > 0 {
                    l[(i, i - 1)] = -w;
                    l[(i - 1, i)] = -w;
                }
            }
            // ghost node u_{n+1} = u_{n−1} − 2h·u_x(1); the flux term moves
            // to the damping, and the half-cell tip mass is scaled out
            let s = T::lit(2.0).sqrt() * w;
            l[(n - 1, n - 2)] = -s;
            l[(n - 2, n - 1)] = -s;
        }
        StiffnessVariant::BeamClamped => {
            if n < 5 {
                return Err(Error::InvalidInput(format!("beam_clamped needs n >= 5, got {n}")));
            }
            let h = grid.h::<T>();
            let w = T::one() / (h * h * h * h);
            let stencil = [T::one(), T::lit(-4.0), T::lit(6.0), T::lit(-4.0), T::one()];
            for i in 0..n {
                for (k, &c) in stencil.iter().enumerate() {
                    let j = i as isize + k as isize - 2;
                    if j >= 0 && (j as usize) < n {
                        l[(i, j as usize)] = c * w;
                    }
                }
            }
            // reflected ghost u_{−1} = u_1 for u′(0) = 0, likewise at x = 1
            l[(0, 0)] = T::lit(7.0) * w;
            l[(n - 1, n - 1)] = T::lit(7.0) * w;
        }
    }
    for i in 0..n {
        l[(i, i)] += kind.shift;
    }
    Ok(l)
}

/// Symmetric positive semi-definite damping matrix `G_h`.
pub fn assemble_damping<T: Real>(grid: &Grid1D, variant: StiffnessVariant, damping: &DampingKind<T>) -> Result<Matrix<T>> {
    let n = grid.n();
    match damping {
        DampingKind::Viscous { lo, hi } => {
            DampingKind::viscous(*lo, *hi)?;
            let x = unknown_positions::<T>(grid, variant);
            let diag: Vec<T> = x
                .iter()
                .map(|&xi| if *lo <= xi && xi < *hi { T::one() } else { T::zero() })
                .collect();
            Ok(Matrix::diag(&diag))
        }
        DampingKind::KelvinVoigt { a } => {
            DampingKind::kelvin_voigt(a.clone())?;
            if a.len() != n {
                return Err(Error::Dimension {
                    context: "kelvin_voigt coefficient",
                    expected: n,
                    actual: a.len(),
                });
            }
            // B maps nodal values (zero at both ends) to the n+1 cell slopes
            let h = grid.h::<T>();
            let mut b = Matrix::zeros(n + 1, n);
            for i in 0..n {
                b[(i, i)] = T::one() / h;
                b[(i + 1, i)] = -T::one() / h;
            }
            let ba = b.matmul(&Matrix::diag(a));
            Ok(ba.transpose().matmul(&ba).symmetrized().0)
        }
        DampingKind::BoundaryTip => {
            if variant != StiffnessVariant::WaveTip {
                return Err(Error::InvalidInput("boundary_tip damping requires wave_tip stiffness".into()));
            }
            let h = spacing::<T>(grid, variant);
            let mut g = Matrix::zeros(n, n);
            g[(n - 1, n - 1)] = T::lit(2.0) / h;
            Ok(g)
        }
    }
}

/// Assembled first-order operator and energy inner product.
///
/// States are `W = (U, V)` with `U, V ∈ ℝ^{Nn}` stored component-major:
/// block `i` of length `n` holds the `i`-th component.
#[derive(Debug, Clone)]
pub struct Generator<T> {
    /// `[[0, I], [−K, −C]]`.
    pub op: Matrix<T>,
    /// `blockdiag(K, I)`.
    pub energy: Matrix<T>,
    /// `K = I_N ⊗ L_h + A ⊗ I_n`.
    pub stiffness: Matrix<T>,
    /// `C = D ⊗ G_h`.
    pub damping: Matrix<T>,
    /// Scalar stiffness `L_h`.
    pub l_h: Matrix<T>,
    /// Scalar damping `G_h`.
    pub g_h: Matrix<T>,
    /// Grid size `n`.
    pub n: usize,
    /// Number of components `N`.
    pub components: usize,
}

impl<T: Real> Generator<T> {
    /// `2Nn`.
    pub fn size(&self) -> usize {
        self.op.rows()
    }

    /// `Nn`, the length of `U` and of `V`.
    pub fn half(&self) -> usize {
        self.n * self.components
    }

    /// `‖W‖²_E`.
    pub fn energy_norm2(&self, w: &[T]) -> T {
        let (u, v) = w.split_at(self.half());
        let ku = self.stiffness.matvec(u);
        ku.iter().zip(u).map(|(&a, &b)| a * b).sum::<T>() + v.iter().map(|&x| x * x).sum::<T>()
    }

    /// `⟨W₁, W₂⟩_E`.
    pub fn energy_inner(&self, w1: &[T], w2: &[T]) -> T {
        let half = self.half();
        let ku = self.stiffness.matvec(&w1[..half]);
        ku.iter().zip(&w2[..half]).map(|(&a, &b)| a * b).sum::<T>()
            + w1[half..].iter().zip(&w2[half..]).map(|(&a, &b)| a * b).sum::<T>()
    }

    /// `⟨C V, V⟩`, the dissipation rate of the state.
    pub fn dissipation(&self, v: &[T]) -> T {
        let cv = self.damping.matvec(v);
        cv.iter().zip(v).map(|(&a, &b)| a * b).sum()
    }

    /// `‖W‖_E + ‖𝒜W‖_E`, the graph norm of `D(𝒜)`.
    pub fn graph_norm(&self, w: &[T]) -> T {
        let aw = self.op.matvec(w);
        self.energy_norm2(w).sqrt() + self.energy_norm2(&aw).sqrt()
    }
}

/// `K = I_N ⊗ L_h + A ⊗ I_n`.
fn coupled_stiffness<T: Real>(l_h: &Matrix<T>, pair: &CouplingPair<T>) -> Matrix<T> {
    let n = l_h.rows();
    Matrix::identity(pair.size())
        .kron(l_h)
        .add(&pair.a().kron(&Matrix::identity(n)))
}

pub fn assemble_generator<T: Real>(model: &ModelSpec<T>) -> Result<Generator<T>> {
    model.validate()?;
    let n = model.grid.n();
    let big_n = model.components();
    let dim = 2 * big_n * n;
    if dim > MAX_GENERATOR_DIM {
        return Err(Error::InvalidInput(format!(
            "generator dimension {dim} exceeds the limit {MAX_GENERATOR_DIM}"
        )));
    }
    let l_h = assemble_stiffness(&model.grid, &model.stiffness)?;
    let g_h = assemble_damping(&model.grid, model.stiffness.variant, &model.damping)?;
    let k = coupled_stiffness(&l_h, &model.pair);
    let c = model.pair.d().kron(&g_h);
    let half = big_n * n;
    let mut op = Matrix::zeros(dim, dim);
    op.set_block(0, half, &Matrix::identity(half));
    op.set_block(half, 0, &k.scale(-T::one()));
    op.set_block(half, half, &c.scale(-T::one()));
    let mut energy = Matrix::zeros(dim, dim);
    energy.set_block(0, 0, &k);
    energy.set_block(half, half, &Matrix::identity(half));
    Ok(Generator {
        op,
        energy,
        stiffness: k,
        damping: c,
        l_h,
        g_h,
        n,
        components: big_n,
    })
}

/// `blockdiag(I_N ⊗ L_h + A ⊗ I_n, I_{Nn})`, certified positive definite.
pub fn energy_product<T: Real>(model: &ModelSpec<T>) -> Result<Matrix<T>> {
    model.validate()?;
    let l_h = assemble_stiffness(&model.grid, &model.stiffness)?;
    let k = coupled_stiffness(&l_h, &model.pair);
    let half = k.rows();
    let mut e = Matrix::zeros(2 * half, 2 * half);
    e.set_block(0, 0, &k);
    e.set_block(half, half, &Matrix::identity(half));
    Cholesky::new(&e).map_err(|_| Error::NotPositiveDefinite { op: "energy_product" })?;
    Ok(e)
}

/// Continuum Dirichlet frequencies `ν_k = kπ`.
pub fn continuum_frequency<T: Real>(k: usize) -> T {
    T::from_usize_lossy(k) * T::PI()
}

/// Discrete Dirichlet frequencies `ν_{k,h} = (2/h) sin(kπh/2)`, the square
/// roots of the eigenvalues of the unshifted `wave_dirichlet` stiffness.
pub fn discrete_frequency<T: Real>(grid: &Grid1D, k: usize) -> T {
    let h = grid.h::<T>();
    let two = T::lit(2.0);
    two / h * (T::from_usize_lossy(k) * T::PI() * h / two).sin()
}

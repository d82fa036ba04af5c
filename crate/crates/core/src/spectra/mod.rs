//! Spectra of the assembled generators: a dense nonsymmetric eigensolver,
//! the spectral abscissa, resolvent norms along the imaginary axis, modal
//! reduction of uniformly damped models, the eigenvalue branches of the
//! two-component examples, and the optimality exponent fit.

mod branches;
mod eig;
mod modal;
mod report;
mod resolvent;

pub use branches::{
    branch_roots_ex51, branch_roots_ex52, branch_roots_ex53, branch_roots_ex53_secondary, optimality_exponent,
    prediction_coupled, prediction_tip, prediction_tip_secondary, slowest_root, tip_function, tip_root, BranchRoot,
    TipFunction, TIP_TOL,
};
pub use eig::{eig_all, eigenvalues, Eigen, MAX_EIG_DIM};
pub use modal::{
    characteristic_kelvin_voigt, characteristic_viscous, modal_reduce, ModalDamping, ModalPencil, ModeFrequencies,
};
pub use report::{conjugate_defect, spectral_abscissa, spectrum_report, SpectrumReport};
pub use resolvent::{resolvent_norm, resolvent_scan, resonant_betas, ResolventScan, ScanWindow};

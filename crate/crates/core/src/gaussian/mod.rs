//! Zero-mean Gaussian states of bosonic modes: covariance matrices,
//! symplectic spectra, entropies, energies and thermal states.

mod covariance;
mod entropy;
mod hamiltonian;
mod symplectic;
mod thermal;

pub use covariance::{
    reduced_state, symplectic_eigenvalues, CovarianceMatrix, SymplecticEigenSpectrum,
};
pub use entropy::{
    entropy, mode_entropy, mutual_information, mutual_information_between, Bipartition,
};
pub use hamiltonian::{mean_energy, QuadraticHamiltonian};
pub use symplectic::{
    is_symplectic, omega_mul, symplectic_defect, symplectic_form, symplectic_project,
    SymplecticForm,
};
pub use thermal::{mean_occupation, normal_modes, thermal_nu, thermal_state, NormalModes};

//! Hamiltonians and initial states for the two detector–bath models: a
//! non-interacting cavity field and an interacting periodic oscillator chain.

mod cavity;
mod chain;
mod switching;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use cavity::CavityModelSpec;
pub use chain::ChainModelSpec;
pub use switching::{switching_value, SwitchingProfile};

use crate::error::{Error, Result};
use crate::gaussian::{thermal_state, CovarianceMatrix, QuadraticHamiltonian};

/// Index of the detector mode in every model.
pub const SYSTEM_MODE: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Cavity(CavityModelSpec),
    Chain(ChainModelSpec),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Cavity(c) => c.validate(),
            ModelSpec::Chain(c) => c.validate(),
        }
    }

    /// Bath modes plus the detector.
    pub fn n_modes(&self) -> usize {
        self.bath_size() + 1
    }

    pub fn bath_size(&self) -> usize {
        match self {
            ModelSpec::Cavity(c) => c.modes,
            ModelSpec::Chain(c) => c.sites,
        }
    }

    pub fn bath_modes(&self) -> Vec<usize> {
        (1..=self.bath_size()).collect()
    }

    pub fn switching(&self) -> &SwitchingProfile {
        match self {
            ModelSpec::Cavity(c) => &c.switching,
            ModelSpec::Chain(c) => &c.switching,
        }
    }

    pub fn detector_frequency(&self) -> f64 {
        match self {
            ModelSpec::Cavity(c) => c.detector_frequency,
            ModelSpec::Chain(c) => c.frequency,
        }
    }

    pub fn coupling(&self) -> f64 {
        match self {
            ModelSpec::Cavity(c) => c.coupling,
            ModelSpec::Chain(c) => c.coupling,
        }
    }

    pub fn system_temperature(&self) -> f64 {
        match self {
            ModelSpec::Cavity(c) => c.system_temperature,
            ModelSpec::Chain(c) => c.system_temperature,
        }
    }

    pub fn bath_temperature(&self) -> f64 {
        match self {
            ModelSpec::Cavity(c) => c.bath_temperature,
            ModelSpec::Chain(c) => c.bath_temperature,
        }
    }

    /// Switching-independent part of `F`.
    pub fn free_hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        self.validate()?;
        labeled(self.free_matrix())
    }

    /// Interaction part of `F` with the switching fully on.
    pub fn interaction_hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        self.validate()?;
        labeled(self.interaction_matrix())
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<QuadraticHamiltonian> {
        match self {
            ModelSpec::Cavity(c) => c.hamiltonian_at(t),
            ModelSpec::Chain(c) => c.hamiltonian_at(t),
        }
    }

    /// Detector block of the free Hamiltonian.
    pub fn system_hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        self.free_hamiltonian()?.restricted(&[SYSTEM_MODE])
    }

    /// Static bath Hamiltonian on the `N` bath modes.
    pub fn bath_hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        self.free_hamiltonian()?.restricted(&self.bath_modes())
    }

    /// `σ_S(T_S) ⊕ σ_E(T_E)`, uncorrelated thermal states of the free parts.
    pub fn initial_joint_state(&self) -> Result<CovarianceMatrix> {
        let system = thermal_state(&self.system_hamiltonian()?, self.system_temperature())?;
        let bath = thermal_state(&self.bath_hamiltonian()?, self.bath_temperature())?;
        Ok(system.direct_sum(&bath))
    }

    pub(crate) fn free_matrix(&self) -> DMatrix<f64> {
        match self {
            ModelSpec::Cavity(c) => c.free_matrix(),
            ModelSpec::Chain(c) => c.free_matrix(),
        }
    }

    pub(crate) fn interaction_matrix(&self) -> DMatrix<f64> {
        match self {
            ModelSpec::Cavity(c) => c.interaction_matrix(),
            ModelSpec::Chain(c) => c.interaction_matrix(),
        }
    }
}

fn labeled(matrix: DMatrix<f64>) -> Result<QuadraticHamiltonian> {
    let n = matrix.nrows() / 2;
    QuadraticHamiltonian::with_partition(matrix, vec![SYSTEM_MODE], (1..n).collect())
}

fn check_temperature(which: &str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "{which} temperature must be finite and non-negative, got {t}"
        )))
    }
}

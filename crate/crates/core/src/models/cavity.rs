use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::switching::SwitchingProfile;
use crate::error::{Error, Result};
use crate::gaussian::QuadraticHamiltonian;

/// Detector oscillator coupled through its monopole `a_s + a_s†` to the
/// field `Σ_j (a_j + a_j†) sin(jπx/L)` of `N` Dirichlet cavity modes with
/// `ω_j = jπ/L`. Normalization of the mode functions is absorbed in the
/// coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityModelSpec {
    pub modes: usize,
    pub length: f64,
    pub detector_frequency: f64,
    pub coupling: f64,
    pub detector_position: f64,
    pub system_temperature: f64,
    pub bath_temperature: f64,
    pub switching: SwitchingProfile,
}

impl CavityModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::InvalidSpec("cavity needs at least one mode".into()));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "cavity length must be positive, got {}",
                self.length
            )));
        }
        if !(self.detector_position > 0.0 && self.detector_position < self.length) {
            return Err(Error::InvalidSpec(format!(
                "detector position {} outside (0, {})",
                self.detector_position, self.length
            )));
        }
        if !(self.detector_frequency > 0.0 && self.detector_frequency.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "detector frequency must be positive, got {}",
                self.detector_frequency
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidSpec("coupling must be finite".into()));
        }
        super::check_temperature("system", self.system_temperature)?;
        super::check_temperature("bath", self.bath_temperature)
    }

    /// `ω_j = jπ/L` for `j = 1..=N`.
    pub fn mode_frequency(&self, j: usize) -> f64 {
        j as f64 * PI / self.length
    }

    /// `u_j(x) = sin(jπx/L)`.
    pub fn mode_function(&self, j: usize) -> f64 {
        (j as f64 * PI * self.detector_position / self.length).sin()
    }

    /// Coefficient of `q_s q_j` in the Hamiltonian with the switching on:
    /// `λ μ φ = 2λ Σ_j u_j q_s q_j`.
    pub fn coupling_coefficient(&self, j: usize) -> f64 {
        2.0 * self.coupling * self.mode_function(j)
    }

    pub(crate) fn free_matrix(&self) -> DMatrix<f64> {
        let n = self.modes + 1;
        let mut f = DMatrix::zeros(2 * n, 2 * n);
        f[(0, 0)] = 0.5 * self.detector_frequency;
        f[(1, 1)] = 0.5 * self.detector_frequency;
        for j in 1..=self.modes {
            let w = self.mode_frequency(j);
            f[(2 * j, 2 * j)] = 0.5 * w;
            f[(2 * j + 1, 2 * j + 1)] = 0.5 * w;
        }
        f
    }

    pub(crate) fn interaction_matrix(&self) -> DMatrix<f64> {
        let n = self.modes + 1;
        let mut f = DMatrix::zeros(2 * n, 2 * n);
        for j in 1..=self.modes {
            let half = 0.5 * self.coupling_coefficient(j);
            f[(0, 2 * j)] = half;
            f[(2 * j, 0)] = half;
        }
        f
    }

    /// `F(t)` on `N + 1` modes, detector first.
    pub fn hamiltonian_at(&self, t: f64) -> Result<QuadraticHamiltonian> {
        self.validate()?;
        let chi = self.switching.value(t);
        super::labeled(self.free_matrix() + self.interaction_matrix() * chi)
    }
}

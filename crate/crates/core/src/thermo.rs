//! Entropy production and its split into system–bath mutual information and
//! the bath's relative entropy to its initial Gibbs state, plus effective
//! temperatures and pairwise correlation maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    entropy, mean_energy, mutual_information, mutual_information_between, Bipartition,
    CovarianceMatrix, QuadraticHamiltonian,
};
use crate::tolerance;

/// Observables of one recorded time. Entropies in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoSample {
    pub t: f64,
    pub s_sys: f64,
    pub s_env: f64,
    pub s_joint: f64,
    pub mi_sys_env: f64,
    /// Entropy production from the bath-energy route.
    pub zeta: f64,
    pub rel_entropy: f64,
    pub t_eff: Option<f64>,
    pub e_env: f64,
}

impl ThermoSample {
    /// `ζ - I - D`; vanishes when the joint evolution is unitary.
    pub fn reconciliation_error(&self) -> f64 {
        self.zeta - self.mi_sys_env - self.rel_entropy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub t: f64,
    pub pairs: Vec<(String, f64)>,
}

/// Two disjoint mode sets whose mutual information is tracked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSpec {
    pub label: String,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

fn inverse_temperature(temperature: f64) -> Result<f64> {
    if temperature > 0.0 && temperature.is_finite() {
        Ok(1.0 / temperature)
    } else {
        Err(Error::InvalidSpec(format!(
            "bath temperature must be positive for entropy production, got {temperature}"
        )))
    }
}

/// `ζ = β (⟨H_E⟩_t - ⟨H_E⟩_0) - (S(σ_S(0)) - S(σ_S(t)))`.
pub fn entropy_production(
    sigma_t: &CovarianceMatrix,
    sigma_0: &CovarianceMatrix,
    bath: &QuadraticHamiltonian,
    beta: f64,
    split: &Bipartition,
) -> Result<f64> {
    if sigma_t.n_modes() != sigma_0.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: sigma_0.n_modes(),
            got: sigma_t.n_modes(),
        });
    }
    if split.first().len() + split.second().len() != sigma_t.n_modes() {
        return Err(Error::InvalidPartition("partition does not cover the state".into()));
    }
    if bath.n_modes() != split.second().len() {
        return Err(Error::DimensionMismatch {
            expected: split.second().len(),
            got: bath.n_modes(),
        });
    }
    let heat = mean_energy(bath, &sigma_t.reduced(split.second())?)?
        - mean_energy(bath, &sigma_0.reduced(split.second())?)?;
    let s_before = entropy(&sigma_0.reduced(split.first())?)?;
    let s_after = entropy(&sigma_t.reduced(split.first())?)?;
    Ok(beta * heat - (s_before - s_after))
}

/// `D(ρ'_E‖ρ_E) = β (E' - E_0) - (S(ρ'_E) - S(ρ_E))`, valid because `ρ_E` is
/// the Gibbs state of `bath` at inverse temperature `β`.
pub fn relative_entropy_to_initial(
    env_t: &CovarianceMatrix,
    env_0: &CovarianceMatrix,
    bath: &QuadraticHamiltonian,
    beta: f64,
) -> Result<f64> {
    let heat = mean_energy(bath, env_t)? - mean_energy(bath, env_0)?;
    Ok(beta * heat - (entropy(env_t)? - entropy(env_0)?))
}

/// Thermality diagnostics of a single mode and, when it is thermal, the
/// temperature that reproduces its symplectic eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTemperature {
    pub nu: f64,
    /// `|σ_qq - σ_pp|`.
    pub imbalance: f64,
    /// `|σ_qp|`.
    pub cross: f64,
    pub value: Option<f64>,
}

/// `T = ω / ln((ν+1)/(ν-1))`, the inverse of `ν = coth(ω/2T)`, reported only
/// when the mode is close to `ν I₂`.
pub fn effective_temperature(mode: &CovarianceMatrix, frequency: f64) -> Result<EffectiveTemperature> {
    effective_temperature_with(mode, frequency, tolerance::THERMALITY)
}

/// [`effective_temperature`] with the thermality threshold given relative to `ν`.
pub fn effective_temperature_with(
    mode: &CovarianceMatrix,
    frequency: f64,
    thermality: f64,
) -> Result<EffectiveTemperature> {
    if mode.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: mode.n_modes(),
        });
    }
    let m = mode.entries();
    let nu = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let imbalance = (m[(0, 0)] - m[(1, 1)]).abs();
    let cross = m[(0, 1)].abs();
    let threshold = thermality * nu;
    let value = if imbalance < threshold && cross < threshold {
        Some(if nu <= 1.0 + 1e-12 {
            0.0
        } else {
            frequency / ((nu + 1.0) / (nu - 1.0)).ln()
        })
    } else {
        None
    };
    Ok(EffectiveTemperature {
        nu,
        imbalance,
        cross,
        value,
    })
}

pub fn correlation_map(sigma: &CovarianceMatrix, t: f64, pairs: &[PairSpec]) -> Result<CorrelationMap> {
    let pairs = pairs
        .iter()
        .map(|p| Ok((p.label.clone(), mutual_information_between(sigma, &p.first, &p.second)?)))
        .collect::<Result<_>>()?;
    Ok(CorrelationMap { t, pairs })
}

/// Everything about the initial product state that the per-sample
/// observables are measured against.
#[derive(Debug, Clone)]
pub struct ThermoReference {
    initial: CovarianceMatrix,
    bath: QuadraticHamiltonian,
    split: Bipartition,
    beta: f64,
    detector_frequency: f64,
    thermality: f64,
    s_sys0: f64,
    s_env0: f64,
    s_joint0: f64,
    e_env0: f64,
}

impl ThermoReference {
    /// `initial` must be the product of a detector state (mode 0) and the
    /// Gibbs state of `bath` at `bath_temperature` on the remaining modes.
    pub fn new(
        initial: CovarianceMatrix,
        bath: QuadraticHamiltonian,
        bath_temperature: f64,
        detector_frequency: f64,
    ) -> Result<Self> {
        let split = Bipartition::system_environment(initial.n_modes())?;
        let beta = inverse_temperature(bath_temperature)?;
        let env0 = initial.reduced(split.second())?;
        let s_sys0 = entropy(&initial.reduced(split.first())?)?;
        let s_env0 = entropy(&env0)?;
        let s_joint0 = entropy(&initial)?;
        let e_env0 = mean_energy(&bath, &env0)?;
        Ok(Self {
            initial,
            bath,
            split,
            beta,
            detector_frequency,
            thermality: tolerance::THERMALITY,
            s_sys0,
            s_env0,
            s_joint0,
            e_env0,
        })
    }

    /// Replaces the default thermality threshold used for `t_eff`.
    pub fn with_thermality(mut self, thermality: f64) -> Self {
        self.thermality = thermality;
        self
    }

    pub fn initial(&self) -> &CovarianceMatrix {
        &self.initial
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn initial_joint_entropy(&self) -> f64 {
        self.s_joint0
    }

    pub fn sample(&self, t: f64, sigma: &CovarianceMatrix) -> Result<ThermoSample> {
        let system = sigma.reduced(self.split.first())?;
        let env = sigma.reduced(self.split.second())?;
        let s_sys = entropy(&system)?;
        let s_env = entropy(&env)?;
        let s_joint = entropy(sigma)?;
        let e_env = mean_energy(&self.bath, &env)?;
        let heat = e_env - self.e_env0;
        Ok(ThermoSample {
            t,
            s_sys,
            s_env,
            s_joint,
            mi_sys_env: s_sys + s_env - s_joint,
            zeta: self.beta * heat - (self.s_sys0 - s_sys),
            rel_entropy: self.beta * heat - (s_env - self.s_env0),
            t_eff: effective_temperature_with(&system, self.detector_frequency, self.thermality)?.value,
            e_env,
        })
    }

    /// Mutual information between detector and bath through the generic
    /// bipartition route, for cross-checks.
    pub fn system_bath_information(&self, sigma: &CovarianceMatrix) -> Result<f64> {
        mutual_information(sigma, &self.split)
    }
}

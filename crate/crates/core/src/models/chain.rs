use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::switching::SwitchingProfile;
use crate::error::{Error, Result};
use crate::gaussian::QuadraticHamiltonian;

/// Detector coupled by `λ χ(t) q_s Σ_{i∈contacts} q_i` to a periodic chain
/// `Σ_i (ω/2)(p_i² + q_i²) + α Σ_i q_i q_{i+1}` with `q_{N+1} = q_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModelSpec {
    pub sites: usize,
    pub frequency: f64,
    /// Nearest-neighbour coupling `α`.
    pub hopping: f64,
    pub coupling: f64,
    /// 1-based chain sites touched by the detector.
    pub contacts: Vec<usize>,
    pub system_temperature: f64,
    pub bath_temperature: f64,
    pub switching: SwitchingProfile,
}

impl ChainModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::InvalidSpec("chain needs at least one site".into()));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "chain frequency must be positive, got {}",
                self.frequency
            )));
        }
        if !((2.0 * self.hopping).abs() < self.frequency) {
            return Err(Error::Unstable(format!(
                "|2α| = {} must stay below ω = {}",
                (2.0 * self.hopping).abs(),
                self.frequency
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidSpec("coupling must be finite".into()));
        }
        if self.contacts.is_empty() {
            return Err(Error::InvalidSpec("detector needs at least one contact site".into()));
        }
        let mut seen = vec![false; self.sites + 1];
        for &c in &self.contacts {
            if c == 0 || c > self.sites {
                return Err(Error::InvalidSpec(format!(
                    "contact site {c} outside 1..={}",
                    self.sites
                )));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidSpec(format!("contact site {c} listed twice")));
            }
        }
        super::check_temperature("system", self.system_temperature)?;
        super::check_temperature("bath", self.bath_temperature)
    }

    /// `sqrt(ω(ω + 2α cos(2πk/N)))` for `k = 0..N`.
    pub fn dispersion(&self) -> Vec<f64> {
        (0..self.sites)
            .map(|k| {
                let phase = 2.0 * std::f64::consts::PI * k as f64 / self.sites as f64;
                (self.frequency * (self.frequency + 2.0 * self.hopping * phase.cos())).sqrt()
            })
            .collect()
    }

    /// Largest `|dω̃/dκ|` of the dispersion, in sites per unit time.
    pub fn max_group_velocity(&self) -> f64 {
        let (w, a) = (self.frequency, self.hopping);
        // ω̃(κ)² = ω² + 2ωα cos κ ⇒ dω̃/dκ = -ωα sin κ / ω̃(κ); scan κ densely.
        (0..=20_000)
            .map(|i| {
                let kappa = std::f64::consts::PI * i as f64 / 20_000.0;
                let wt = (w * (w + 2.0 * a * kappa.cos())).sqrt();
                (w * a * kappa.sin() / wt).abs()
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn free_matrix(&self) -> DMatrix<f64> {
        let n = self.sites + 1;
        let mut f = DMatrix::zeros(2 * n, 2 * n);
        for m in 0..n {
            f[(2 * m, 2 * m)] = 0.5 * self.frequency;
            f[(2 * m + 1, 2 * m + 1)] = 0.5 * self.frequency;
        }
        for i in 1..=self.sites {
            let j = i % self.sites + 1;
            f[(2 * i, 2 * j)] += 0.5 * self.hopping;
            f[(2 * j, 2 * i)] += 0.5 * self.hopping;
        }
        f
    }

    pub(crate) fn interaction_matrix(&self) -> DMatrix<f64> {
        let n = self.sites + 1;
        let mut f = DMatrix::zeros(2 * n, 2 * n);
        for &c in &self.contacts {
            f[(0, 2 * c)] += 0.5 * self.coupling;
            f[(2 * c, 0)] += 0.5 * self.coupling;
        }
        f
    }

    /// `F(t)` on `N + 1` modes: detector first, then sites `1..=N`.
    pub fn hamiltonian_at(&self, t: f64) -> Result<QuadraticHamiltonian> {
        self.validate()?;
        let chi = self.switching.value(t);
        super::labeled(self.free_matrix() + self.interaction_matrix() * chi)
    }
}

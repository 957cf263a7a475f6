use super::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::tolerance;

/// Entropy in nats of a single mode with symplectic eigenvalue `nu`:
/// `f(ν) = ((ν+1)/2) ln((ν+1)/2) - ((ν-1)/2) ln((ν-1)/2)`, with `f(1) = 0`.
pub fn mode_entropy(nu: f64) -> Result<f64> {
    if !(nu >= 1.0 - tolerance::STATE_VALIDITY) {
        return Err(Error::InvalidState { min_nu: nu });
    }
    let excess = nu - 1.0;
    if excess < 1e-12 {
        return Ok(0.0);
    }
    let plus = 0.5 * (nu + 1.0);
    let minus = 0.5 * excess;
    Ok(plus * plus.ln() - minus * minus.ln())
}

/// Von Neumann entropy (nats) of a Gaussian state.
pub fn entropy(sigma: &CovarianceMatrix) -> Result<f64> {
    sigma
        .symplectic_spectrum()?
        .values()
        .iter()
        .try_fold(0.0, |acc, &nu| Ok(acc + mode_entropy(nu)?))
}

/// Two disjoint mode sets that together cover every mode of a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    first: Vec<usize>,
    second: Vec<usize>,
}

impl Bipartition {
    pub fn new(first: Vec<usize>, second: Vec<usize>, n_modes: usize) -> Result<Self> {
        let split = Self::partial(first, second, n_modes)?;
        let covered = split.first.len() + split.second.len();
        if covered != n_modes {
            return Err(Error::InvalidPartition(format!(
                "covers {covered} of {n_modes} modes"
            )));
        }
        Ok(split)
    }

    /// Disjoint, non-empty sets that need not cover every mode.
    pub(crate) fn partial(first: Vec<usize>, second: Vec<usize>, n_modes: usize) -> Result<Self> {
        if first.is_empty() || second.is_empty() {
            return Err(Error::InvalidPartition("empty side".into()));
        }
        let mut owner = vec![0u8; n_modes];
        for (side, set) in [(1u8, &first), (2u8, &second)] {
            for &m in set {
                if m >= n_modes {
                    return Err(Error::ModeOutOfRange { index: m, n_modes });
                }
                if owner[m] != 0 {
                    return Err(Error::InvalidPartition(format!("mode {m} appears twice")));
                }
                owner[m] = side;
            }
        }
        Ok(Self { first, second })
    }

    /// System mode 0 against every other mode.
    pub fn system_environment(n_modes: usize) -> Result<Self> {
        Self::new(vec![0], (1..n_modes).collect(), n_modes)
    }

    pub fn first(&self) -> &[usize] {
        &self.first
    }

    pub fn second(&self) -> &[usize] {
        &self.second
    }

    pub fn swapped(&self) -> Self {
        Self {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }

    fn union(&self) -> Vec<usize> {
        self.first.iter().chain(&self.second).copied().collect()
    }
}

/// `I(A:B) = S(σ_A) + S(σ_B) - S(σ_AB)` in nats.
pub fn mutual_information(sigma: &CovarianceMatrix, split: &Bipartition) -> Result<f64> {
    if split.first.len() + split.second.len() != sigma.n_modes() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} modes, state has {}",
            split.first.len() + split.second.len(),
            sigma.n_modes()
        )));
    }
    marginal_mutual_information(sigma, split)
}

/// Mutual information between two disjoint mode sets of a larger state,
/// evaluated on their joint marginal.
pub fn mutual_information_between(
    sigma: &CovarianceMatrix,
    first: &[usize],
    second: &[usize],
) -> Result<f64> {
    let split = Bipartition::partial(first.to_vec(), second.to_vec(), sigma.n_modes())?;
    marginal_mutual_information(sigma, &split)
}

fn marginal_mutual_information(sigma: &CovarianceMatrix, split: &Bipartition) -> Result<f64> {
    let joint = if split.first.len() + split.second.len() == sigma.n_modes() {
        entropy(sigma)?
    } else {
        entropy(&sigma.reduced(&split.union())?)?
    };
    let a = entropy(&sigma.reduced(&split.first)?)?;
    let b = entropy(&sigma.reduced(&split.second)?)?;
    Ok(a + b - joint)
}

use nalgebra::DMatrix;

use super::covariance::CovarianceMatrix;
use crate::error::{Error, Result};

/// `H = xᵀ F x` on interleaved quadratures, with the modes split into system
/// and environment labels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    n_modes: usize,
    matrix: DMatrix<f64>,
    system: Vec<usize>,
    environment: Vec<usize>,
}

impl QuadraticHamiltonian {
    /// Every mode is labeled as system.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = checked_modes(&matrix)?;
        Ok(Self {
            n_modes: n,
            matrix,
            system: (0..n).collect(),
            environment: Vec::new(),
        })
    }

    pub fn with_partition(
        matrix: DMatrix<f64>,
        system: Vec<usize>,
        environment: Vec<usize>,
    ) -> Result<Self> {
        let n = checked_modes(&matrix)?;
        let mut seen = vec![false; n];
        for &m in system.iter().chain(&environment) {
            if m >= n {
                return Err(Error::ModeOutOfRange { index: m, n_modes: n });
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidPartition(format!("mode {m} labeled twice")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPartition("some modes are unlabeled".into()));
        }
        Ok(Self {
            n_modes: n,
            matrix,
            system,
            environment,
        })
    }

    /// `Σ_k (ω_k/2)(q_k² + p_k²)`.
    pub fn free_modes(frequencies: &[f64]) -> Result<Self> {
        let n = frequencies.len();
        let mut matrix = DMatrix::zeros(2 * n, 2 * n);
        for (k, &w) in frequencies.iter().enumerate() {
            matrix[(2 * k, 2 * k)] = 0.5 * w;
            matrix[(2 * k + 1, 2 * k + 1)] = 0.5 * w;
        }
        Self::new(matrix)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn system_modes(&self) -> &[usize] {
        &self.system
    }

    pub fn environment_modes(&self) -> &[usize] {
        &self.environment
    }

    /// `F_s = F + Fᵀ`, the matrix entering the equations of motion.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        &self.matrix + self.matrix.transpose()
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix == self.matrix.transpose()
    }

    /// Restriction to `modes` (in the given order); labels are dropped.
    pub fn restricted(&self, modes: &[usize]) -> Result<Self> {
        for &m in modes {
            if m >= self.n_modes {
                return Err(Error::ModeOutOfRange {
                    index: m,
                    n_modes: self.n_modes,
                });
            }
        }
        let dim = 2 * modes.len();
        let sub = DMatrix::from_fn(dim, dim, |i, j| {
            self.matrix[(2 * modes[i / 2] + i % 2, 2 * modes[j / 2] + j % 2)]
        });
        Self::new(sub)
    }
}

fn checked_modes(m: &DMatrix<f64>) -> Result<usize> {
    if !m.is_square() || m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "phase-space matrix must be 2N x 2N, got {} x {}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

/// `⟨H⟩ = ½ Tr[(F_s/2) σ]`.
pub fn mean_energy(h: &QuadraticHamiltonian, sigma: &CovarianceMatrix) -> Result<f64> {
    if h.n_modes() != sigma.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: h.n_modes(),
            got: sigma.n_modes(),
        });
    }
    let f = h.matrix();
    let s = sigma.entries();
    let dim = s.nrows();
    let mut acc = 0.0;
    for j in 0..dim {
        for i in 0..dim {
            acc += 0.5 * (f[(i, j)] + f[(j, i)]) * s[(j, i)];
        }
    }
    Ok(0.5 * acc)
}

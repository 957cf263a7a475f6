use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::symplectic::omega_mul;
use crate::error::{Error, Result};
use crate::tolerance;

/// Symplectic eigenvalues of a covariance matrix, sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticEigenSpectrum {
    values: Vec<f64>,
}

impl SymplecticEigenSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Second moments `σ_ab = ⟨x_a x_b + x_b x_a⟩` of a zero-mean Gaussian state of
/// `n_modes` bosonic modes, interleaved as `(q₁, p₁, …, q_N, p_N)`. The vacuum
/// is the identity.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
    spectrum: OnceLock<SymplecticEigenSpectrum>,
}

impl PartialEq for CovarianceMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl CovarianceMatrix {
    /// Validates symmetry and the uncertainty relation. Tiny asymmetries from
    /// round-off are removed by symmetrizing.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n_modes = check_shape(&entries)?;
        let scale = entries.amax().max(1.0);
        let asym = max_asymmetry(&entries);
        if asym > tolerance::SYMMETRY * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let state = Self {
            n_modes,
            entries: symmetrized(entries),
            spectrum: OnceLock::new(),
        };
        let min_nu = state.symplectic_spectrum()?.min();
        if min_nu < 1.0 - tolerance::STATE_VALIDITY {
            return Err(Error::InvalidState { min_nu });
        }
        Ok(state)
    }

    /// Skips the uncertainty check; the spectrum is computed lazily and any
    /// violation surfaces when entropies are requested.
    pub(crate) fn from_symmetric_unchecked(entries: DMatrix<f64>) -> Self {
        let n_modes = entries.nrows() / 2;
        Self {
            n_modes,
            entries: symmetrized(entries),
            spectrum: OnceLock::new(),
        }
    }

    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidDimension("state needs at least one mode".into()));
        }
        Ok(Self::from_symmetric_unchecked(DMatrix::identity(
            2 * n_modes,
            2 * n_modes,
        )))
    }

    /// `⊕ ν_k I₂`, the Williamson normal form with the given eigenvalues.
    pub fn diagonal(nus: &[f64]) -> Result<Self> {
        if nus.is_empty() {
            return Err(Error::InvalidDimension("state needs at least one mode".into()));
        }
        let mut entries = DMatrix::zeros(2 * nus.len(), 2 * nus.len());
        for (k, &nu) in nus.iter().enumerate() {
            entries[(2 * k, 2 * k)] = nu;
            entries[(2 * k + 1, 2 * k + 1)] = nu;
        }
        Self::new(entries)
    }

    /// Block-diagonal `σ_A ⊕ σ_B`.
    pub fn direct_sum(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let (da, db) = (self.dim(), other.dim());
        let mut entries = DMatrix::zeros(da + db, da + db);
        entries.view_mut((0, 0), (da, da)).copy_from(&self.entries);
        entries.view_mut((da, da), (db, db)).copy_from(&other.entries);
        Self::from_symmetric_unchecked(entries)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn symplectic_spectrum(&self) -> Result<&SymplecticEigenSpectrum> {
        if let Some(spectrum) = self.spectrum.get() {
            return Ok(spectrum);
        }
        let computed = compute_spectrum(&self.entries)?;
        Ok(self.spectrum.get_or_init(|| computed))
    }

    /// Principal submatrix on the `(q, p)` pairs of `modes`, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<CovarianceMatrix> {
        if modes.is_empty() {
            return Err(Error::InvalidPartition("empty mode subset".into()));
        }
        let mut seen = vec![false; self.n_modes];
        for &m in modes {
            if m >= self.n_modes {
                return Err(Error::ModeOutOfRange {
                    index: m,
                    n_modes: self.n_modes,
                });
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidPartition(format!("mode {m} listed twice")));
            }
        }
        let dim = 2 * modes.len();
        let sub = DMatrix::from_fn(dim, dim, |i, j| {
            let row = 2 * modes[i / 2] + i % 2;
            let col = 2 * modes[j / 2] + j % 2;
            self.entries[(row, col)]
        });
        Ok(Self::from_symmetric_unchecked(sub))
    }

    /// `S σ Sᵀ` for a phase-space transformation `S`.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<CovarianceMatrix> {
        if s.nrows() != self.dim() || s.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: s.nrows(),
            });
        }
        Ok(Self::from_symmetric_unchecked(
            s * &self.entries * s.transpose(),
        ))
    }
}

/// Symplectic eigenvalues `|spec(iΩσ)|`, one per mode.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<SymplecticEigenSpectrum> {
    sigma.symplectic_spectrum().cloned()
}

/// Partial trace onto `modes`.
pub fn reduced_state(sigma: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    sigma.reduced(modes)
}

fn check_shape(m: &DMatrix<f64>) -> Result<usize> {
    if !m.is_square() || m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "covariance matrix must be 2N x 2N, got {} x {}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn symmetrized(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m
}

// With σ = L Lᵀ, the antisymmetric A = Lᵀ Ω L is similar to σΩ, so its
// eigenvalues are ±iν and AᵀA carries every ν² twice.
fn compute_spectrum(sigma: &DMatrix<f64>) -> Result<SymplecticEigenSpectrum> {
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalQuality("non-finite covariance entries".into()));
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or(Error::InvalidState { min_nu: 0.0 })?;
    let l = chol.l();
    let a = l.transpose() * omega_mul(&l);
    let gram = a.transpose() * &a;
    let mut squares: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    squares.sort_by(|x, y| y.total_cmp(x));
    let values = squares
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect();
    Ok(SymplecticEigenSpectrum { values })
}

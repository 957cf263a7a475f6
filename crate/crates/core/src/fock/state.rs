use nalgebra::{DMatrix, DVector};

use super::operator::{strides, FockOperator, C64};
use crate::error::{Error, Result};

/// Eigenvalues below this are treated as a numerical failure.
pub const NEGATIVITY_LIMIT: f64 = 1e-10;

/// A density matrix `Σ_k w_k |ψ_k⟩⟨ψ_k|` on a truncated Fock space, kept as
/// its (not necessarily orthogonal) pure-state ensemble.
#[derive(Debug, Clone)]
pub struct MixedState {
    dims: Vec<usize>,
    weights: Vec<f64>,
    /// `amps[basis * rank + k]`
    amps: Vec<C64>,
}

/// Spectrum of a Hermitian matrix through its real symmetric embedding
/// `[[A, -B], [B, A]]`, whose eigenvalues are those of `A + iB`, each twice.
/// Entries far below the largest one are flushed to zero first: they cannot
/// affect an entropy, and underflowing products inside the QR sweeps of the
/// eigensolver otherwise turn into NaN.
fn hermitian_eigenvalues(m: DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let floor = 1e-40 * m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let real = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let v = m[(i % n, j % n)];
        let v = if v.norm() < floor { C64::new(0.0, 0.0) } else { v };
        match (i < n, j < n) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    });
    let mut values: Vec<f64> = real.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// von Neumann entropy in nats from a Hermitian eigensolve.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::InvalidDimension("density matrix must be square".into()));
    }
    entropy_of_spectrum(&hermitian_eigenvalues(rho.clone()))
}

fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in values {
        if l < -NEGATIVITY_LIMIT || !l.is_finite() {
            return Err(Error::NumericalQuality(format!(
                "density matrix eigenvalue {l:e} below {NEGATIVITY_LIMIT:e}"
            )));
        }
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s)
}

impl MixedState {
    /// Columns of `vectors` are the ensemble members.
    pub fn new(dims: Vec<usize>, weights: Vec<f64>, vectors: &DMatrix<C64>) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidDimension("empty Fock space".into()));
        }
        if vectors.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: vectors.nrows(),
            });
        }
        if vectors.ncols() != weights.len() || weights.is_empty() {
            return Err(Error::InvalidDimension(
                "one non-negative weight per ensemble member is required".into(),
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidState { min_nu: f64::NAN });
        }
        let rank = weights.len();
        let mut amps = vec![C64::new(0.0, 0.0); dim * rank];
        for k in 0..rank {
            for i in 0..dim {
                amps[i * rank + k] = vectors[(i, k)];
            }
        }
        Ok(Self {
            dims,
            weights,
            amps,
        })
    }

    pub fn pure(dims: Vec<usize>, psi: &DVector<C64>) -> Result<Self> {
        let m = DMatrix::from_column_slice(psi.len(), 1, psi.as_slice());
        Self::new(dims, vec![1.0], &m)
    }

    /// Ensemble of eigenvectors of a dense density matrix.
    pub fn from_density(dims: Vec<usize>, rho: &DMatrix<C64>) -> Result<Self> {
        if (rho - rho.adjoint()).camax() > 1e-10 * rho.camax().max(1.0) {
            return Err(Error::NotSymmetric((rho - rho.adjoint()).camax()));
        }
        let eig = rho.clone().symmetric_eigen();
        entropy_of_spectrum(eig.eigenvalues.as_slice())?;
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > 0.0)
            .collect();
        let mut vectors = DMatrix::zeros(rho.nrows(), keep.len());
        for (c, &i) in keep.iter().enumerate() {
            vectors.set_column(c, &eig.eigenvectors.column(i));
        }
        let weights = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
        Self::new(dims, weights, &vectors)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimension(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut Vec<C64> {
        &mut self.amps
    }

    pub fn trace(&self) -> f64 {
        let rank = self.rank();
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| self.weights[i % rank] * a.norm_sqr())
            .sum()
    }

    /// `G_kl = √(w_k w_l) ⟨ψ_k|ψ_l⟩`, which shares its nonzero spectrum with ρ.
    /// Assembled from real products, which are much faster than complex ones.
    fn gram(&self) -> DMatrix<C64> {
        let rank = self.rank();
        let dim = self.dimension();
        let part = |f: fn(&C64) -> f64| {
            DMatrix::from_fn(dim, rank, |i, k| f(&self.amps[i * rank + k]) * self.weights[k].sqrt())
        };
        let (x, y) = (part(|a| a.re), part(|a| a.im));
        let (xt, yt) = (x.transpose(), y.transpose());
        let re = &xt * &x + &yt * &y;
        let im = &xt * &y - &yt * &x;
        DMatrix::from_fn(rank, rank, |i, j| C64::new(re[(i, j)], im[(i, j)]))
    }

    pub fn entropy(&self) -> Result<f64> {
        entropy_of_spectrum(&hermitian_eigenvalues(self.gram()))
    }

    pub fn purity(&self) -> f64 {
        self.gram().iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        let all: Vec<usize> = (0..self.dims.len()).collect();
        self.reduced(&all).expect("full mode set is valid")
    }

    /// Partial trace onto `modes`, in the order given.
    pub fn reduced(&self, modes: &[usize]) -> Result<DMatrix<C64>> {
        let n = self.dims.len();
        if modes.is_empty() {
            return Err(Error::InvalidPartition("empty mode set".into()));
        }
        for (i, &m) in modes.iter().enumerate() {
            if m >= n {
                return Err(Error::ModeOutOfRange { index: m, n_modes: n });
            }
            if modes[..i].contains(&m) {
                return Err(Error::InvalidPartition(format!("mode {m} listed twice")));
            }
        }
        let rest: Vec<usize> = (0..n).filter(|m| !modes.contains(m)).collect();
        let kept_dims: Vec<usize> = modes.iter().map(|&m| self.dims[m]).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&m| self.dims[m]).collect();
        let (sk, sr, s) = (strides(&kept_dims), strides(&rest_dims), strides(&self.dims));
        let d_kept: usize = kept_dims.iter().product();
        let d_rest: usize = rest_dims.iter().product();
        let rank = self.rank();
        // M[a, (r, k)] = √w_k ψ_k[a, r]
        let mut m = DMatrix::<C64>::zeros(d_kept, d_rest * rank);
        for idx in 0..self.dimension() {
            let level = |mode: usize| (idx / s[mode]) % self.dims[mode];
            let a: usize = modes.iter().enumerate().map(|(i, &md)| level(md) * sk[i]).sum();
            let r: usize = rest.iter().enumerate().map(|(i, &md)| level(md) * sr[i]).sum();
            for k in 0..rank {
                m[(a, r * rank + k)] = self.amps[idx * rank + k] * self.weights[k].sqrt();
            }
        }
        Ok(&m * m.adjoint())
    }

    pub fn expectation(&self, op: &FockOperator) -> Result<f64> {
        if op.dim() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: op.dim(),
            });
        }
        Ok(op.ensemble_expectation(&self.amps, &self.weights).re)
    }

    /// Largest probability, over modes, of finding a mode at its top level.
    pub fn cutoff_leakage(&self) -> f64 {
        let s = strides(&self.dims);
        let rank = self.rank();
        let mut top = vec![0.0; self.dims.len()];
        for idx in 0..self.dimension() {
            let p: f64 = (0..rank)
                .map(|k| self.weights[k] * self.amps[idx * rank + k].norm_sqr())
                .sum();
            for (m, t) in top.iter_mut().enumerate() {
                if (idx / s[m]) % self.dims[m] == self.dims[m] - 1 {
                    *t += p;
                }
            }
        }
        top.into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{mode_entropy, thermal_nu};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pure_state_has_zero_entropy() {
        let psi = DVector::from_vec(vec![c(0.6), C64::new(0.0, 0.8), c(0.0), c(0.0)]);
        let s = MixedState::pure(vec![2, 2], &psi).unwrap();
        assert!(s.entropy().unwrap().abs() < 1e-14);
        assert!((s.purity() - 1.0).abs() < 1e-14);
        // |00⟩ and |01⟩ superposed: product state
        let r0 = s.reduced(&[0]).unwrap();
        assert!(von_neumann_entropy(&r0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn product_state_has_no_mutual_information() {
        let wa = [0.7, 0.3];
        let wb = [0.5, 0.25, 0.25];
        let mut weights = Vec::new();
        let mut vecs = DMatrix::zeros(6, 6);
        for a in 0..2 {
            for b in 0..3 {
                let k = a * 3 + b;
                weights.push(wa[a] * wb[b]);
                vecs[(k, k)] = c(1.0);
            }
        }
        let s = MixedState::new(vec![2, 3], weights, &vecs).unwrap();
        let sa = von_neumann_entropy(&s.reduced(&[0]).unwrap()).unwrap();
        let sb = von_neumann_entropy(&s.reduced(&[1]).unwrap()).unwrap();
        let sab = s.entropy().unwrap();
        assert!((sa + sb - sab).abs() < 1e-13);
        let h = |w: &[f64]| -w.iter().map(|p| p * p.ln()).sum::<f64>();
        assert!((sa - h(&wa)).abs() < 1e-13);
    }

    #[test]
    fn bell_state_marginals_are_maximally_mixed() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi = DVector::from_vec(vec![c(r), c(0.0), c(0.0), c(r)]);
        let s = MixedState::pure(vec![2, 2], &psi).unwrap();
        let r1 = s.reduced(&[1]).unwrap();
        assert!((von_neumann_entropy(&r1).unwrap() - 2f64.ln()).abs() < 1e-13);
        let swapped = s.reduced(&[1, 0]).unwrap();
        assert!((von_neumann_entropy(&swapped).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn truncated_gibbs_entropy_matches_gaussian_formula() {
        let (w, t): (f64, f64) = (4.0, 10.0);
        let d = 400;
        let r = (-w / t).exp();
        let weights: Vec<f64> = (0..d).map(|n| (1.0 - r) * r.powi(n as i32)).collect();
        let rho = DMatrix::from_diagonal(&DVector::from_iterator(d, weights.iter().map(|&p| c(p))));
        let s = von_neumann_entropy(&rho).unwrap();
        let want = mode_entropy(thermal_nu(w, t)).unwrap();
        // tail weight r^400 ≈ 1e-70
        assert!((s - want).abs() < 1e-10, "{s} vs {want}");
    }

    #[test]
    fn density_round_trip_and_negativity_guard() {
        let rho = DMatrix::from_row_slice(2, 2, &[c(0.75), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.25)]);
        let s = MixedState::from_density(vec![2], &rho).unwrap();
        assert!((s.density_matrix() - &rho).camax() < 1e-14);
        assert!((s.trace() - 1.0).abs() < 1e-14);
        let bad = DMatrix::from_row_slice(2, 2, &[c(1.1), c(0.0), c(0.0), c(-0.1)]);
        assert!(matches!(von_neumann_entropy(&bad), Err(Error::NumericalQuality(_))));
        assert!(MixedState::from_density(vec![2], &bad).is_err());
    }

    #[test]
    fn leakage_reports_top_level_population() {
        let psi = DVector::from_vec(vec![c(0.0), c(0.6), c(0.0), c(0.8)]);
        let s = MixedState::pure(vec![2, 2], &psi).unwrap();
        // mode 1 at level 1 with probability 1
        assert!((s.cutoff_leakage() - 1.0).abs() < 1e-15);
        assert!(s.reduced(&[0, 0]).is_err());
        assert!(s.reduced(&[2]).is_err());
    }
}

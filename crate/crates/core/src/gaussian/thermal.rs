use nalgebra::{DMatrix, DVector};

use super::covariance::CovarianceMatrix;
use super::hamiltonian::QuadraticHamiltonian;
use crate::error::{Error, Result};

/// Symplectic `M` with `x = M x'` bringing a Hamiltonian to
/// `Σ_k (ω̃_k/2)(q'_k² + p'_k²)`, i.e. `Mᵀ F_s M = diag(ω̃₁, ω̃₁, …)`.
#[derive(Debug, Clone)]
pub struct NormalModes {
    pub transform: DMatrix<f64>,
    /// Ascending.
    pub frequencies: Vec<f64>,
}

/// Diagonalizes `H = ½ pᵀ K p + ½ qᵀ V q` (no q–p cross terms, `K` and `V`
/// positive definite) by a point transformation followed by per-mode scaling.
pub fn normal_modes(h: &QuadraticHamiltonian) -> Result<NormalModes> {
    let n = h.n_modes();
    let fs = h.symmetrized();
    let scale = fs.amax().max(1.0);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut potential = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if fs[(2 * i, 2 * j + 1)].abs() > 1e-14 * scale {
                return Err(Error::Unsupported(
                    "normal modes need a Hamiltonian without q-p cross terms".into(),
                ));
            }
            potential[(i, j)] = fs[(2 * i, 2 * j)];
            kinetic[(i, j)] = fs[(2 * i + 1, 2 * j + 1)];
        }
    }

    let k_eig = kinetic.symmetric_eigen();
    if k_eig.eigenvalues.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Unstable("kinetic block is not positive definite".into()));
    }
    let root = |power: f64| -> DMatrix<f64> {
        let d = DVector::from_iterator(n, k_eig.eigenvalues.iter().map(|v| v.powf(power)));
        &k_eig.eigenvectors * DMatrix::from_diagonal(&d) * k_eig.eigenvectors.transpose()
    };
    let (k_half, k_neg_half) = (root(0.5), root(-0.5));

    let w = &k_half * &potential * &k_half;
    let w_eig = w.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w_eig.eigenvalues[a].total_cmp(&w_eig.eigenvalues[b]));
    if let Some(&lowest) = order.first() {
        let v = w_eig.eigenvalues[lowest];
        if !(v > 0.0) {
            return Err(Error::Unstable(format!(
                "potential is not positive definite (lowest curvature {v:e})"
            )));
        }
    }

    let mut frequencies = Vec::with_capacity(n);
    let mut q_map = DMatrix::zeros(n, n);
    let mut p_map = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let wk = w_eig.eigenvalues[k];
        frequencies.push(wk.sqrt());
        let vec = w_eig.eigenvectors.column(k);
        q_map.set_column(col, &(&k_half * vec * wk.powf(-0.25)));
        p_map.set_column(col, &(&k_neg_half * vec * wk.powf(0.25)));
    }

    let mut transform = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            transform[(2 * i, 2 * j)] = q_map[(i, j)];
            transform[(2 * i + 1, 2 * j + 1)] = p_map[(i, j)];
        }
    }
    Ok(NormalModes {
        transform,
        frequencies,
    })
}

/// Symplectic eigenvalue of a thermal mode, `coth(ω/2T) = (e^{ω/T}+1)/(e^{ω/T}-1)`.
pub fn thermal_nu(frequency: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 1.0;
    }
    1.0 / (0.5 * frequency / temperature).tanh()
}

/// Mean occupation `(ν - 1)/2`.
pub fn mean_occupation(nu: f64) -> f64 {
    0.5 * (nu - 1.0)
}

/// Gibbs state of a static Hamiltonian at temperature `T` (`T = 0` gives the
/// ground state).
pub fn thermal_state(h: &QuadraticHamiltonian, temperature: f64) -> Result<CovarianceMatrix> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "temperature must be finite and non-negative, got {temperature}"
        )));
    }
    let modes = normal_modes(h)?;
    let nus: Vec<f64> = modes
        .frequencies
        .iter()
        .map(|&w| thermal_nu(w, temperature))
        .collect();
    CovarianceMatrix::diagonal(&nus)?.transformed(&modes.transform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{entropy, is_symplectic, mean_energy, symplectic_eigenvalues};

    fn ring(n: usize, omega: f64, alpha: f64) -> QuadraticHamiltonian {
        let mut f = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            f[(2 * i, 2 * i)] += 0.5 * omega;
            f[(2 * i + 1, 2 * i + 1)] += 0.5 * omega;
            let j = (i + 1) % n;
            f[(2 * i, 2 * j)] += 0.5 * alpha;
            f[(2 * j, 2 * i)] += 0.5 * alpha;
        }
        QuadraticHamiltonian::new(f).unwrap()
    }

    #[test]
    fn nu_for_three_pi_at_three() {
        let nu = thermal_nu(3.0 * std::f64::consts::PI, 3.0);
        let e = std::f64::consts::PI.exp();
        assert!((nu - (e + 1.0) / (e - 1.0)).abs() < 1e-14);
        assert!((nu - 1.0903).abs() < 1e-4);
    }

    #[test]
    fn occupation_is_bose_einstein() {
        for (w, t) in [(1.0, 0.3), (4.0, 10.0), (9.0, 3.0)] {
            let nbar = 1.0 / ((w / t as f64).exp() - 1.0);
            assert!((mean_occupation(thermal_nu(w, t)) - nbar).abs() < 1e-13);
        }
    }

    #[test]
    fn decoupled_modes_keep_their_frequencies() {
        let h = ring(5, 4.0, 0.0);
        let nm = normal_modes(&h).unwrap();
        for w in &nm.frequencies {
            assert!((w - 4.0).abs() < 1e-13);
        }
        assert!(is_symplectic(&nm.transform, 1e-12));
    }

    #[test]
    fn ring_frequencies_follow_dispersion() {
        // Oracle: eigenvalues of the circulant potential ω(ω + 2α cos(2πk/N)).
        let (n, omega, alpha) = (25, 4.0, 0.15);
        let nm = normal_modes(&ring(n, omega, alpha)).unwrap();
        let mut closed: Vec<f64> = (0..n)
            .map(|k| {
                let c = (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos();
                (omega * (omega + 2.0 * alpha * c)).sqrt()
            })
            .collect();
        closed.sort_by(f64::total_cmp);
        for (a, b) in nm.frequencies.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!((nm.frequencies[0] - 14.8f64.sqrt()).abs() < 2e-3);
        assert!((nm.frequencies[n - 1] - 17.2f64.sqrt()).abs() < 1e-12);
        assert!(is_symplectic(&nm.transform, 1e-8));

        let fs = ring(n, omega, alpha).symmetrized();
        let diag = nm.transform.transpose() * fs * &nm.transform;
        for i in 0..2 * n {
            for j in 0..2 * n {
                let want = if i == j { nm.frequencies[i / 2] } else { 0.0 };
                assert!((diag[(i, j)] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn unstable_ring_rejected() {
        assert!(matches!(
            normal_modes(&ring(4, 1.0, 0.6)),
            Err(Error::Unstable(_))
        ));
    }

    #[test]
    fn zero_temperature_is_pure() {
        let s = thermal_state(&ring(6, 4.0, 0.3), 0.0).unwrap();
        for nu in symplectic_eigenvalues(&s).unwrap().values() {
            assert!((nu - 1.0).abs() < 1e-12);
        }
        assert!(entropy(&s).unwrap() < 1e-9);
    }

    #[test]
    fn diagonal_hamiltonian_gives_direct_sum() {
        let h = QuadraticHamiltonian::free_modes(&[1.0, 2.0, 3.0]).unwrap();
        let s = thermal_state(&h, 1.5).unwrap();
        for k in 0..3 {
            let want = thermal_nu((k + 1) as f64, 1.5);
            assert!((s.entries()[(2 * k, 2 * k)] - want).abs() < 1e-13);
            assert!((s.entries()[(2 * k + 1, 2 * k + 1)] - want).abs() < 1e-13);
        }
        assert!(s.entries()[(0, 2)].abs() < 1e-15);
    }

    #[test]
    fn interacting_ring_is_correlated_and_translation_invariant() {
        let s = thermal_state(&ring(7, 4.0, 0.15), 10.0).unwrap();
        assert!(s.entries()[(0, 2)].abs() > 1e-4);
        let first = s.reduced(&[0]).unwrap();
        for site in 1..7 {
            let other = s.reduced(&[site]).unwrap();
            assert!((first.entries() - other.entries()).amax() < 1e-12);
        }
    }

    #[test]
    fn energy_grows_with_temperature() {
        let h = ring(5, 4.0, 0.15);
        let mut last = f64::NEG_INFINITY;
        for t in [0.0, 0.4, 1.0, 3.0, 10.0, 30.0] {
            let e = mean_energy(&h, &thermal_state(&h, t).unwrap()).unwrap();
            assert!(e > last, "energy not increasing at T = {t}");
            last = e;
        }
    }

    #[test]
    fn negative_temperature_rejected() {
        let h = QuadraticHamiltonian::free_modes(&[1.0]).unwrap();
        assert!(thermal_state(&h, -1.0).is_err());
        assert!(thermal_state(&h, f64::NAN).is_err());
    }
}

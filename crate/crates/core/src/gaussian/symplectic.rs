use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// The canonical form `Ω = ⊕ [[0, 1], [-1, 0]]` in interleaved ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidDimension(
                "symplectic form needs at least one mode".into(),
            ));
        }
        let dim = 2 * n_modes;
        let mut matrix = DMatrix::zeros(dim, dim);
        for k in 0..n_modes {
            matrix[(2 * k, 2 * k + 1)] = 1.0;
            matrix[(2 * k + 1, 2 * k)] = -1.0;
        }
        Ok(Self { n_modes, matrix })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Convenience wrapper for [`SymplecticForm::new`].
pub fn symplectic_form(n_modes: usize) -> Result<SymplecticForm> {
    SymplecticForm::new(n_modes)
}

/// `Ω · m` without forming Ω: row pairs are swapped with a sign flip.
pub fn omega_mul(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    debug_assert!(rows % 2 == 0);
    let mut out = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        for k in 0..rows / 2 {
            out[(2 * k, c)] = m[(2 * k + 1, c)];
            out[(2 * k + 1, c)] = -m[(2 * k, c)];
        }
    }
    out
}

/// `max |Sᵀ Ω S - Ω|`, zero for an exactly symplectic matrix.
pub fn symplectic_defect(s: &DMatrix<f64>) -> f64 {
    let dim = s.nrows();
    let gram = s.transpose() * omega_mul(s);
    let mut worst = 0.0f64;
    for j in 0..dim {
        for i in 0..dim {
            let target = if i % 2 == 0 && j == i + 1 {
                1.0
            } else if i % 2 == 1 && j + 1 == i {
                -1.0
            } else {
                0.0
            };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> bool {
    s.is_square() && s.nrows() % 2 == 0 && symplectic_defect(s) <= tol
}

/// First-order correction pulling `s` back toward the symplectic group:
/// `S ← S (I + ½ Ω E)` with `E = SᵀΩS - Ω`.
pub fn symplectic_project(s: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = s.nrows();
    let omega = SymplecticForm::new(dim / 2)
        .expect("even non-empty dimension")
        .into_matrix();
    let err = s.transpose() * omega_mul(s) - &omega;
    let correction = omega_mul(&err) * 0.5;
    s * (DMatrix::identity(dim, dim) + correction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_block() {
        let omega = symplectic_form(1).unwrap();
        assert_eq!(
            omega.matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
        );
    }

    #[test]
    fn squares_to_minus_identity() {
        for n in 1..6 {
            let omega = symplectic_form(n).unwrap().into_matrix();
            let id = DMatrix::<f64>::identity(2 * n, 2 * n);
            assert_eq!(&omega * &omega, -&id);
            assert_eq!(omega.transpose() * &omega, id);
            assert_eq!(omega.transpose(), -&omega);
        }
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(matches!(symplectic_form(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn omega_mul_matches_dense_product() {
        let m = DMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 - 2.5);
        let omega = symplectic_form(2).unwrap().into_matrix();
        assert_eq!(omega_mul(&m), &omega * &m);
    }

    #[test]
    fn rotation_and_squeezer_are_symplectic() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        let sq = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert!(is_symplectic(&rot, 1e-15));
        assert!(is_symplectic(&(&sq * &rot), 1e-15));
        let bad = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(!is_symplectic(&bad, 1e-3));
    }

    #[test]
    fn projection_reduces_defect() {
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]) * (1.0 + 1e-6);
        let before = symplectic_defect(&rot);
        let after = symplectic_defect(&symplectic_project(&rot));
        assert!(after < before * 1e-3, "{before} -> {after}");
    }
}

use nalgebra::DMatrix;

use crate::error::Result;
use crate::gaussian::{omega_mul, QuadraticHamiltonian};
use crate::models::{ModelSpec, SwitchingProfile};

/// Right-hand side `A(t) = Ω F_s(t)` of the propagator equation `dS/dt = A S`.
pub trait PhaseSpaceGenerator {
    fn n_modes(&self) -> usize;

    /// `out = A(t) x`.
    fn apply(&self, t: f64, x: &DMatrix<f64>, out: &mut DMatrix<f64>);

    fn dense(&self, t: f64) -> DMatrix<f64>;

    /// Whether `A` is the same matrix for every time in `[t0, t1]`.
    fn is_constant_on(&self, _t0: f64, _t1: f64) -> bool {
        false
    }
}

pub fn generator_matrix(h: &QuadraticHamiltonian) -> DMatrix<f64> {
    omega_mul(&h.symmetrized())
}

/// Nonzero entries of a square matrix, applied to dense column-major blocks.
#[derive(Debug, Clone)]
pub(crate) struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub(crate) fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self {
            dim: m.nrows(),
            entries,
        }
    }

    /// `out += scale * self * x`.
    fn accumulate(&self, scale: f64, x: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        let n = self.dim;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for c in 0..x.ncols() {
            let col = &xs[c * n..(c + 1) * n];
            let dst = &mut os[c * n..(c + 1) * n];
            for &(i, j, v) in &self.entries {
                dst[i] += scale * v * col[j];
            }
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }
}

/// `A(t) = A_free + χ(t) A_int`, the structure shared by both bath models.
#[derive(Debug, Clone)]
pub struct SwitchedGenerator {
    n_modes: usize,
    free: SparseMatrix,
    interaction: SparseMatrix,
    profile: SwitchingProfile,
}

impl SwitchedGenerator {
    pub fn new(
        free: &QuadraticHamiltonian,
        interaction: &QuadraticHamiltonian,
        profile: SwitchingProfile,
    ) -> Self {
        Self {
            n_modes: free.n_modes(),
            free: SparseMatrix::from_dense(&generator_matrix(free)),
            interaction: SparseMatrix::from_dense(&generator_matrix(interaction)),
            profile,
        }
    }

    pub fn from_model(model: &ModelSpec) -> Result<Self> {
        Ok(Self::new(
            &model.free_hamiltonian()?,
            &model.interaction_hamiltonian()?,
            *model.switching(),
        ))
    }
}

impl PhaseSpaceGenerator for SwitchedGenerator {
    fn n_modes(&self) -> usize {
        self.n_modes
    }

    fn apply(&self, t: f64, x: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        out.fill(0.0);
        self.free.accumulate(1.0, x, out);
        let chi = self.profile.value(t);
        if chi != 0.0 {
            self.interaction.accumulate(chi, x, out);
        }
    }

    fn dense(&self, t: f64) -> DMatrix<f64> {
        self.free.to_dense() + self.interaction.to_dense() * self.profile.value(t)
    }

    fn is_constant_on(&self, t0: f64, t1: f64) -> bool {
        self.profile.is_constant_on(t0, t1)
    }
}

/// Generator from an arbitrary `t ↦ F(t)`.
pub struct HamiltonianFn<F> {
    n_modes: usize,
    hamiltonian: F,
    constant: bool,
}

impl<F: Fn(f64) -> QuadraticHamiltonian> HamiltonianFn<F> {
    pub fn new(n_modes: usize, hamiltonian: F) -> Self {
        Self {
            n_modes,
            hamiltonian,
            constant: false,
        }
    }

    /// Declares `F` time independent, enabling the constant-step fast path.
    pub fn constant(n_modes: usize, hamiltonian: F) -> Self {
        Self {
            n_modes,
            hamiltonian,
            constant: true,
        }
    }
}

impl<F: Fn(f64) -> QuadraticHamiltonian> PhaseSpaceGenerator for HamiltonianFn<F> {
    fn n_modes(&self) -> usize {
        self.n_modes
    }

    fn apply(&self, t: f64, x: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        out.gemm(1.0, &self.dense(t), x, 0.0);
    }

    fn dense(&self, t: f64) -> DMatrix<f64> {
        generator_matrix(&(self.hamiltonian)(t))
    }

    fn is_constant_on(&self, _t0: f64, _t1: f64) -> bool {
        self.constant
    }
}

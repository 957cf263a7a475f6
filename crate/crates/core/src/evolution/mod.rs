//! Propagation of the symplectic evolution matrix for time-dependent
//! quadratic Hamiltonians.

mod generator;
mod grid;
mod propagator;

pub use generator::{generator_matrix, HamiltonianFn, PhaseSpaceGenerator, SwitchedGenerator};
pub use grid::IntegrationGrid;
pub use propagator::{
    evolve_state, integrate, integrate_with, IntegratorOptions, SymplecticPropagator,
};

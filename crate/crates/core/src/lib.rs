//! Non-perturbative simulation of a harmonic-oscillator detector coupled to
//! thermal bosonic baths, using the covariance-matrix formalism for Gaussian
//! states. Entropy production, mutual information and relative entropy are
//! tracked along the joint unitary evolution.

pub mod error;
pub mod evolution;
pub mod experiment;
pub mod fock;
pub mod gaussian;
pub mod models;
pub mod thermo;
pub mod tolerance;

pub use error::{Error, Result};

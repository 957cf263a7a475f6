//! Brute-force reference dynamics in a truncated Fock space for models with
//! at most three modes. Every observable is computed from density matrices
//! without any Gaussian machinery, so agreement with the phase-space
//! pipeline is an independent check.

mod operator;
mod state;

pub use operator::{FockOperator, C64};
pub use state::{von_neumann_entropy, MixedState, NEGATIVITY_LIMIT};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::IntegrationGrid;
use crate::models::{ModelSpec, SwitchingProfile, SYSTEM_MODE};
use operator::SwitchedOperator;

pub const MAX_MODES: usize = 3;
pub const MAX_DIMENSION: usize = 10_000;
pub const DEFAULT_CUTOFF: usize = 40;
/// Trace must stay within this of one along the evolution.
pub const TRACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleOptions {
    /// Step length while the switching function varies; `χ` is frozen at
    /// each step's midpoint.
    pub ramp_step: f64,
    /// Longest step where `χ` is constant, where freezing is exact.
    pub plateau_step: f64,
    /// Initial ensemble members with smaller weight are dropped.
    pub prune: f64,
    /// Largest admissible top-level occupation probability of any mode.
    pub leakage_limit: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            ramp_step: 1e-3,
            plateau_step: 0.5,
            prune: 1e-12,
            leakage_limit: 1e-6,
        }
    }
}

impl OracleOptions {
    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.ramp_step) || !positive(self.plateau_step) {
            return Err(Error::InvalidGrid("oracle step lengths must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.prune) || !positive(self.leakage_limit) {
            return Err(Error::InvalidSpec(
                "oracle prune threshold must lie in [0, 1) and the leakage limit must be positive"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// A model restricted to a truncated Fock space.
#[derive(Debug, Clone)]
pub struct TruncatedSystem {
    mode_dims: Vec<usize>,
    free: FockOperator,
    interaction: FockOperator,
    bath: FockOperator,
    detector_local: FockOperator,
    bath_local: FockOperator,
    profile: SwitchingProfile,
    system_temperature: f64,
    bath_temperature: f64,
}

impl TruncatedSystem {
    /// Uniform cutoff: levels `0..=n_max` on every mode.
    pub fn from_model(model: &ModelSpec, n_max: usize) -> Result<Self> {
        Self::with_dims(model, vec![n_max + 1; model.n_modes()])
    }

    pub fn with_dims(model: &ModelSpec, mode_dims: Vec<usize>) -> Result<Self> {
        model.validate()?;
        let n = model.n_modes();
        if n > MAX_MODES {
            return Err(Error::Unsupported(format!(
                "the Fock oracle handles at most {MAX_MODES} modes, model has {n}"
            )));
        }
        if mode_dims.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: mode_dims.len(),
            });
        }
        if mode_dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidDimension("each mode needs at least two levels".into()));
        }
        let dim = mode_dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if dim.map_or(true, |d| d > MAX_DIMENSION) {
            return Err(Error::InvalidDimension(format!(
                "truncated space of {mode_dims:?} exceeds {MAX_DIMENSION} states"
            )));
        }
        let all: Vec<usize> = (0..n).collect();
        let bath_modes = model.bath_modes();
        let free = FockOperator::quadratic(&mode_dims, model.free_hamiltonian()?.matrix(), &all)?;
        let interaction =
            FockOperator::quadratic(&mode_dims, model.interaction_hamiltonian()?.matrix(), &all)?;
        let bath_h = model.bath_hamiltonian()?;
        let bath = FockOperator::quadratic(&mode_dims, bath_h.matrix(), &bath_modes)?;
        let bath_dims: Vec<usize> = bath_modes.iter().map(|&m| mode_dims[m]).collect();
        let local: Vec<usize> = (0..bath_modes.len()).collect();
        let bath_local = FockOperator::quadratic(&bath_dims, bath_h.matrix(), &local)?;
        let detector_local = FockOperator::quadratic(
            &mode_dims[SYSTEM_MODE..=SYSTEM_MODE],
            model.system_hamiltonian()?.matrix(),
            &[0],
        )?;
        Ok(Self {
            mode_dims,
            free,
            interaction,
            bath,
            detector_local,
            bath_local,
            profile: *model.switching(),
            system_temperature: model.system_temperature(),
            bath_temperature: model.bath_temperature(),
        })
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn dimension(&self) -> usize {
        self.mode_dims.iter().product()
    }

    pub fn bath_operator(&self) -> &FockOperator {
        &self.bath
    }

    pub fn switching(&self) -> &SwitchingProfile {
        &self.profile
    }

    /// Product of the truncated Gibbs states of detector and bath, as an
    /// ensemble of product eigenstates. Returns the state and the weight
    /// removed by pruning.
    pub fn initial_state(&self, prune: f64) -> Result<(MixedState, f64)> {
        let sys = gibbs_ensemble(&self.detector_local, self.system_temperature)?;
        let env = gibbs_ensemble(&self.bath_local, self.bath_temperature)?;
        let mut members: Vec<(f64, usize, usize)> = Vec::new();
        for (i, &(ws, _)) in sys.iter().enumerate() {
            for (j, &(we, _)) in env.iter().enumerate() {
                members.push((ws * we, i, j));
            }
        }
        members.sort_by(|a, b| b.0.total_cmp(&a.0));
        let total: f64 = members.iter().map(|m| m.0).sum();
        members.retain(|m| m.0 >= prune * total);
        let kept: f64 = members.iter().map(|m| m.0).sum();
        let d_env = self.bath_local.dim();
        let mut vectors = DMatrix::<C64>::zeros(self.dimension(), members.len());
        for (c, &(_, i, j)) in members.iter().enumerate() {
            let (vs, ve) = (&sys[i].1, &env[j].1);
            for a in 0..vs.len() {
                for b in 0..d_env {
                    vectors[(a * d_env + b, c)] = vs[a] * ve[b];
                }
            }
        }
        let weights = members.iter().map(|m| m.0 / kept).collect();
        let state = MixedState::new(self.mode_dims.clone(), weights, &vectors)?;
        Ok((state, (total - kept) / total))
    }
}

/// Eigenpairs of a local Hamiltonian weighted by `exp(-E/T)`, normalized.
fn gibbs_ensemble(h: &FockOperator, temperature: f64) -> Result<Vec<(f64, Vec<C64>)>> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidSpec(format!("invalid temperature {temperature}")));
    }
    let d = h.dim();
    let dense = h.to_dense();
    let (energies, vectors): (Vec<f64>, Vec<Vec<C64>>) = if h.is_diagonal() {
        (0..d)
            .map(|n| {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[n] = C64::new(1.0, 0.0);
                (dense[(n, n)].re, v)
            })
            .unzip()
    } else {
        let eig = dense.symmetric_eigen();
        (0..d)
            .map(|n| (eig.eigenvalues[n], eig.eigenvectors.column(n).iter().copied().collect()))
            .unzip()
    };
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = energies
        .iter()
        .map(|&e| {
            if temperature == 0.0 {
                if e - e0 < 1e-12 { 1.0 } else { 0.0 }
            } else {
                (-(e - e0) / temperature).exp()
            }
        })
        .collect();
    let z: f64 = raw.iter().sum();
    Ok(raw
        .into_iter()
        .zip(vectors)
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, v)| (w / z, v))
        .collect())
}

struct Propagator {
    op: SwitchedOperator,
    term: Vec<C64>,
    next: Vec<C64>,
}

impl Propagator {
    const MAX_TERMS: usize = 200;

    /// `ψ ← exp(-i H(χ) h) ψ` by a Taylor series summed to machine precision.
    fn step(&mut self, state: &mut MixedState, chi: f64, h: f64) -> Result<()> {
        let rank = state.rank();
        let vals = self.op.values_at(chi);
        let amps = state.amplitudes_mut();
        self.term.clone_from(amps);
        let scale = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for k in 1..=Self::MAX_TERMS {
            self.op.apply(&vals, &self.term, &mut self.next, rank);
            // term ← (-i h / k) H term, accumulated into the state
            let c = h / k as f64;
            let mut norm = 0.0;
            for ((t, n), a) in self.term.iter_mut().zip(&self.next).zip(amps.iter_mut()) {
                *t = C64::new(c * n.im, -c * n.re);
                norm += t.norm_sqr();
                *a += *t;
            }
            if norm.sqrt() <= 1e-16 * scale {
                return Ok(());
            }
        }
        Err(Error::NumericalQuality(format!(
            "Taylor propagator did not converge for step {h}"
        )))
    }
}

/// Stream the exact evolution, calling `on_sample` at every sample time of
/// `grid`. Fails when the trace drifts or the cutoff leaks.
pub fn evolve_exact_with<F>(
    system: &TruncatedSystem,
    grid: &IntegrationGrid,
    options: &OracleOptions,
    initial: MixedState,
    mut on_sample: F,
) -> Result<()>
where
    F: FnMut(f64, &MixedState) -> Result<()>,
{
    options.validate()?;
    if initial.dimension() != system.dimension() {
        return Err(Error::DimensionMismatch {
            expected: system.dimension(),
            got: initial.dimension(),
        });
    }
    let len = initial.amplitudes().len();
    let mut prop = Propagator {
        op: SwitchedOperator::new(&system.free, &system.interaction),
        term: vec![C64::new(0.0, 0.0); len],
        next: vec![C64::new(0.0, 0.0); len],
    };
    let mut state = initial;
    let times = grid.sample_times();
    let mut t = grid.t_start();
    for &target in &times {
        let span = target - t;
        if span > 0.0 {
            let h_max = if system.profile.is_constant_on(t, target) {
                options.plateau_step
            } else {
                options.ramp_step
            };
            let n = (span / h_max).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for i in 0..n {
                let mid = t + (i as f64 + 0.5) * h;
                prop.step(&mut state, system.profile.value(mid), h)?;
            }
        }
        t = target;
        let trace = state.trace();
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::NumericalQuality(format!(
                "trace {trace} drifted from one at t = {t}"
            )));
        }
        let leak = state.cutoff_leakage();
        if leak > options.leakage_limit {
            return Err(Error::OracleInvalid(format!(
                "cutoff occupation {leak:e} exceeds {:e} at t = {t}",
                options.leakage_limit
            )));
        }
        on_sample(t, &state)?;
    }
    Ok(())
}

/// Exact counterparts of the phase-space observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactObservables {
    pub t: f64,
    pub s_sys: f64,
    pub s_env: f64,
    pub s_joint: f64,
    pub mi_sys_env: f64,
    pub zeta: f64,
    pub rel_entropy: f64,
    pub e_env: f64,
    pub leakage: f64,
}

/// Initial quantities that entropy production is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactReference {
    pub beta: f64,
    pub s_sys0: f64,
    pub s_env0: f64,
    pub e_env0: f64,
}

impl ExactReference {
    pub fn new(system: &TruncatedSystem, initial: &MixedState) -> Result<Self> {
        if !(system.bath_temperature > 0.0) {
            return Err(Error::InvalidSpec(
                "bath temperature must be positive for entropy production".into(),
            ));
        }
        let env: Vec<usize> = (1..system.mode_dims.len()).collect();
        Ok(Self {
            beta: 1.0 / system.bath_temperature,
            s_sys0: von_neumann_entropy(&initial.reduced(&[SYSTEM_MODE])?)?,
            s_env0: von_neumann_entropy(&initial.reduced(&env)?)?,
            e_env0: initial.expectation(&system.bath)?,
        })
    }
}

/// Entropies, mutual information, `ζ` and `D` of one state.
pub fn observables_exact(
    t: f64,
    state: &MixedState,
    system: &TruncatedSystem,
    reference: &ExactReference,
) -> Result<ExactObservables> {
    let env: Vec<usize> = (1..state.dims().len()).collect();
    let s_sys = von_neumann_entropy(&state.reduced(&[SYSTEM_MODE])?)?;
    let s_env = von_neumann_entropy(&state.reduced(&env)?)?;
    let s_joint = state.entropy()?;
    let e_env = state.expectation(&system.bath)?;
    let heat = reference.beta * (e_env - reference.e_env0);
    Ok(ExactObservables {
        t,
        s_sys,
        s_env,
        s_joint,
        mi_sys_env: s_sys + s_env - s_joint,
        zeta: heat - (reference.s_sys0 - s_sys),
        rel_entropy: heat - (s_env - reference.s_env0),
        e_env,
        leakage: state.cutoff_leakage(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactTrajectory {
    pub samples: Vec<ExactObservables>,
    pub ensemble_size: usize,
    pub pruned_weight: f64,
    pub max_leakage: f64,
}

/// Evolve the truncated Gibbs product state and record observables at the
/// sample times of `grid`.
pub fn evolve_exact(
    system: &TruncatedSystem,
    grid: &IntegrationGrid,
    options: &OracleOptions,
) -> Result<ExactTrajectory> {
    options.validate()?;
    let (initial, pruned_weight) = system.initial_state(options.prune)?;
    let reference = ExactReference::new(system, &initial)?;
    let ensemble_size = initial.rank();
    let mut samples = Vec::with_capacity(grid.sample_steps().len());
    evolve_exact_with(system, grid, options, initial, |t, state| {
        samples.push(observables_exact(t, state, system, &reference)?);
        Ok(())
    })?;
    let max_leakage = samples.iter().map(|s| s.leakage).fold(0.0, f64::max);
    Ok(ExactTrajectory {
        samples,
        ensemble_size,
        pruned_weight,
        max_leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{mode_entropy, thermal_nu};
    use crate::models::{CavityModelSpec, ChainModelSpec};
    use std::f64::consts::PI;

    fn pair(coupling: f64, tau: f64) -> ModelSpec {
        ModelSpec::Cavity(CavityModelSpec {
            modes: 1,
            length: PI,
            detector_frequency: 1.0,
            coupling,
            detector_position: 0.5 * PI,
            system_temperature: 0.5,
            bath_temperature: 1.0,
            switching: SwitchingProfile::new(0.1 * tau, tau).unwrap(),
        })
    }

    fn fast() -> OracleOptions {
        OracleOptions {
            ramp_step: 1e-2,
            ..OracleOptions::default()
        }
    }

    #[test]
    fn initial_state_is_the_truncated_gibbs_product() {
        let sys = TruncatedSystem::from_model(&pair(0.05, 10.0), 30).unwrap();
        let (state, pruned) = sys.initial_state(0.0).unwrap();
        assert_eq!(pruned, 0.0);
        assert_eq!(state.rank(), 31 * 31);
        assert!((state.trace() - 1.0).abs() < 1e-13);
        let s = von_neumann_entropy(&state.reduced(&[0]).unwrap()).unwrap();
        let want = mode_entropy(thermal_nu(1.0, 0.5)).unwrap();
        assert!((s - want).abs() < 1e-12);
        let e = state.expectation(sys.bath_operator()).unwrap();
        assert!((e - 0.5 * thermal_nu(1.0, 1.0)).abs() < 1e-10);
        let (pruned_state, lost) = sys.initial_state(1e-12).unwrap();
        assert!(pruned_state.rank() < 300 && lost < 1e-10);
    }

    #[test]
    fn decoupled_thermal_state_is_stationary() {
        let model = pair(0.0, 10.0);
        let sys = TruncatedSystem::from_model(&model, 16).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 10.0, 1e-2, 6).unwrap();
        let traj = evolve_exact(&sys, &grid, &fast()).unwrap();
        for s in &traj.samples {
            assert!(s.zeta.abs() < 1e-10, "{}", s.zeta);
            assert!(s.mi_sys_env.abs() < 1e-10);
            assert!(s.rel_entropy.abs() < 1e-10);
        }
    }

    #[test]
    fn joint_purity_and_entropy_are_conserved() {
        let model = pair(0.2, 10.0);
        let sys = TruncatedSystem::from_model(&model, 20).unwrap();
        let (initial, _) = sys.initial_state(1e-12).unwrap();
        let purity0 = initial.purity();
        let reference = ExactReference::new(&sys, &initial).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 10.0, 1e-2, 11).unwrap();
        let mut mi_max: f64 = 0.0;
        evolve_exact_with(&sys, &grid, &fast(), initial, |t, state| {
            assert!((state.purity() - purity0).abs() < 1e-10);
            let o = observables_exact(t, state, &sys, &reference)?;
            assert!((o.zeta - o.mi_sys_env - o.rel_entropy).abs() < 1e-8);
            assert!(o.zeta > -1e-10 && o.rel_entropy > -1e-10);
            mi_max = mi_max.max(o.mi_sys_env);
            Ok(())
        })
        .unwrap();
        assert!(mi_max > 1e-4);
    }

    #[test]
    fn ramp_step_is_converged() {
        let model = pair(0.1, 6.0);
        let sys = TruncatedSystem::from_model(&model, 20).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 6.0, 1e-2, 7).unwrap();
        let coarse = evolve_exact(&sys, &grid, &fast()).unwrap();
        let fine = evolve_exact(
            &sys,
            &grid,
            &OracleOptions {
                ramp_step: 2.5e-3,
                ..fast()
            },
        )
        .unwrap();
        for (a, b) in coarse.samples.iter().zip(&fine.samples) {
            assert!((a.s_sys - b.s_sys).abs() < 1e-6, "{} {}", a.s_sys, b.s_sys);
            assert!((a.zeta - b.zeta).abs() < 1e-6);
        }
    }

    #[test]
    fn small_cutoff_trips_the_leakage_gate() {
        let mut model = pair(0.05, 10.0);
        if let ModelSpec::Cavity(c) = &mut model {
            c.bath_temperature = 3.0;
        }
        let sys = TruncatedSystem::from_model(&model, 6).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 10.0, 1e-2, 3).unwrap();
        let err = evolve_exact(&sys, &grid, &fast()).unwrap_err();
        assert!(matches!(err, Error::OracleInvalid(_)), "{err}");
    }

    #[test]
    fn guards_reject_large_spaces() {
        let model = ModelSpec::Cavity(CavityModelSpec {
            modes: 3,
            ..match pair(0.05, 10.0) {
                ModelSpec::Cavity(c) => c,
                _ => unreachable!(),
            }
        });
        assert!(TruncatedSystem::from_model(&model, 40).is_err());
        assert!(TruncatedSystem::from_model(&model, 20).is_err());
        let chain = ModelSpec::Chain(ChainModelSpec {
            sites: 2,
            frequency: 1.0,
            hopping: 0.1,
            coupling: 0.1,
            contacts: vec![1],
            system_temperature: 0.5,
            bath_temperature: 1.0,
            switching: SwitchingProfile::new(1.0, 10.0).unwrap(),
        });
        let sys = TruncatedSystem::from_model(&chain, 15).unwrap();
        assert_eq!(sys.dimension(), 16 * 16 * 16);
    }

    #[test]
    fn interacting_bath_starts_in_its_own_gibbs_state() {
        // Two coupled bath sites with no detector contact: the bath state
        // must be stationary under its own Hamiltonian.
        let chain = ModelSpec::Chain(ChainModelSpec {
            sites: 2,
            frequency: 1.0,
            hopping: 0.2,
            coupling: 0.0,
            contacts: vec![1],
            system_temperature: 0.5,
            bath_temperature: 0.4,
            switching: SwitchingProfile::new(1.0, 4.0).unwrap(),
        });
        let sys = TruncatedSystem::from_model(&chain, 8).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 4.0, 1e-2, 3).unwrap();
        let traj = evolve_exact(&sys, &grid, &fast()).unwrap();
        for s in &traj.samples {
            assert!(s.rel_entropy.abs() < 1e-9 && s.zeta.abs() < 1e-9, "{s:?}");
        }
    }
}

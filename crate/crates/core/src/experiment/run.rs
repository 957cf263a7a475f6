use std::collections::BTreeMap;

use serde::Serialize;

use super::columns::{pair_specs, Column};
use super::config::{Assumption, RunConfig};
use crate::error::{Error, Result};
use crate::evolution::{evolve_state, integrate_with, SwitchedGenerator};
use crate::gaussian::mean_energy;
use crate::models::ModelSpec;
use crate::thermo::{correlation_map, CorrelationMap, ThermoReference, ThermoSample};
use crate::tolerance;

/// Pass/fail check of one numerical-quality metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Gate {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            passed: value < limit,
        }
    }

    fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            passed: value >= limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Telemetry {
    pub steps: usize,
    pub samples: usize,
    pub max_symplectic_defect: f64,
    pub max_joint_entropy_drift: f64,
    /// Relative drift of the total energy over samples with the coupling
    /// fully on; zero when no sample falls there.
    pub max_plateau_energy_drift: f64,
    pub max_reconciliation_error: f64,
    pub min_entropy_production: f64,
    pub min_mutual_information: f64,
    pub min_relative_entropy: f64,
    pub gates: Vec<Gate>,
}

impl Telemetry {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn failed_gates(&self) -> Vec<&Gate> {
        self.gates.iter().filter(|g| !g.passed).collect()
    }
}

/// Everything a run produced, ready to be written out.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub config: RunConfig,
    pub model: ModelSpec,
    pub columns: Vec<Column>,
    pub samples: Vec<ThermoSample>,
    pub correlations: Vec<CorrelationMap>,
    pub telemetry: Telemetry,
    pub assumptions: BTreeMap<String, Assumption>,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Values of the selected columns, one row per sample.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .zip(&self.correlations)
            .map(|(s, c)| {
                let mut pairs = c.pairs.iter().map(|p| p.1);
                self.columns.iter().map(|col| col.value(s, &mut pairs)).collect()
            })
            .collect()
    }

    /// One column by label, or `None` if it was not selected.
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.label() == label)?;
        Some(self.rows().into_iter().map(|r| r[i]).collect())
    }

    pub fn passed(&self) -> bool {
        self.telemetry.passed()
    }
}

/// Integrate one configuration and evaluate every observable at the sample
/// times. A run whose telemetry gates fail still returns its data; check
/// [`TrajectoryRecord::passed`].
pub fn run(config: &RunConfig) -> Result<TrajectoryRecord> {
    let resolved = config.resolve().map_err(|e| e.in_stage("configuration"))?;
    let assumptions = config.assumptions().map_err(|e| e.in_stage("configuration"))?;
    let model = resolved.model;
    let prepare = || -> Result<_> {
        let reference = ThermoReference::new(
            model.initial_joint_state()?,
            model.bath_hamiltonian()?,
            model.bath_temperature(),
            model.detector_frequency(),
        )?
        .with_thermality(resolved.thermality);
        let generator = SwitchedGenerator::from_model(&model)?;
        let (lo, hi) = model.switching().plateau();
        let plateau_h = model.hamiltonian_at(0.5 * (lo + hi))?;
        Ok((reference, generator, plateau_h, (lo, hi)))
    };
    let (reference, generator, plateau_h, (lo, hi)) =
        prepare().map_err(|e| e.in_stage("state preparation"))?;
    let pairs = pair_specs(&resolved.columns);
    let n = resolved.grid.sample_steps().len();
    let mut samples = Vec::with_capacity(n);
    let mut correlations = Vec::with_capacity(n);
    let mut max_defect: f64 = 0.0;
    let mut plateau_energy: Option<f64> = None;
    let mut max_energy_drift: f64 = 0.0;
    let mut observe_failure = None;
    let s_joint0 = reference.initial_joint_entropy();

    let evolved = integrate_with(&generator, &resolved.grid, &resolved.options, |p| {
        max_defect = max_defect.max(p.defect);
        let mut observe = || -> Result<()> {
            let sigma = evolve_state(reference.initial(), p)?;
            let sample = reference.sample(p.t, &sigma)?;
            correlations.push(correlation_map(&sigma, p.t, &pairs)?);
            if p.t >= lo && p.t <= hi {
                let e = mean_energy(&plateau_h, &sigma)?;
                let e0 = *plateau_energy.get_or_insert(e);
                max_energy_drift = max_energy_drift.max((e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE));
            }
            samples.push(sample);
            Ok(())
        };
        observe().map_err(|e| {
            observe_failure = Some(());
            e.in_stage("observables")
        })
    });
    if let Err(e) = evolved {
        return Err(match e {
            Error::Stage { .. } if observe_failure.is_some() => e,
            other => other.in_stage("evolution"),
        });
    }

    let fold = |f: fn(&ThermoSample) -> f64| samples.iter().map(f).fold(f64::INFINITY, f64::min);
    let max_rec = samples
        .iter()
        .map(|s| s.reconciliation_error().abs())
        .fold(0.0, f64::max);
    let max_drift = samples
        .iter()
        .map(|s| (s.s_joint - s_joint0).abs())
        .fold(0.0, f64::max);
    let (min_zeta, min_mi, min_d) = (fold(|s| s.zeta), fold(|s| s.mi_sys_env), fold(|s| s.rel_entropy));
    let floor = -tolerance::DERIVED;
    let gates = vec![
        Gate::at_most("symplectic_defect", max_defect, tolerance::SYMPLECTIC_DEFECT),
        Gate::at_most("joint_entropy_drift", max_drift, tolerance::ENTROPY_DRIFT),
        Gate::at_most("plateau_energy_drift", max_energy_drift, tolerance::ENERGY_DRIFT),
        Gate::at_most("reconciliation", max_rec, tolerance::RECONCILIATION),
        Gate::at_least("min_entropy_production", min_zeta, floor),
        Gate::at_least("min_mutual_information", min_mi, floor),
        Gate::at_least("min_relative_entropy", min_d, floor),
    ];
    let telemetry = Telemetry {
        steps: resolved.grid.steps(),
        samples: samples.len(),
        max_symplectic_defect: max_defect,
        max_joint_entropy_drift: max_drift,
        max_plateau_energy_drift: max_energy_drift,
        max_reconciliation_error: max_rec,
        min_entropy_production: min_zeta,
        min_mutual_information: min_mi,
        min_relative_entropy: min_d,
        gates,
    };
    Ok(TrajectoryRecord {
        config: config.clone(),
        model,
        columns: resolved.columns,
        samples,
        correlations,
        telemetry,
        assumptions,
    })
}

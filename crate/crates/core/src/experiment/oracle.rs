use serde::Serialize;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::evolution::{evolve_state, integrate_with};
use crate::evolution::SwitchedGenerator;
use crate::fock::{evolve_exact, ExactObservables, TruncatedSystem};
use crate::thermo::{ThermoReference, ThermoSample};

/// Agreement required between the phase-space and exact pipelines, in nats.
pub const ORACLE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub gaussian: ThermoSample,
    pub exact: ExactObservables,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OracleDeviation {
    pub s_sys: f64,
    pub s_env: f64,
    pub mi_sys_env: f64,
    pub zeta: f64,
    pub rel_entropy: f64,
}

impl OracleDeviation {
    pub fn max(&self) -> f64 {
        [self.s_sys, self.s_env, self.mi_sys_env, self.zeta, self.rel_entropy]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub rows: Vec<OracleRow>,
    pub deviation: OracleDeviation,
    pub ensemble_size: usize,
    pub pruned_weight: f64,
    pub max_leakage: f64,
    pub tolerance: f64,
}

impl OracleComparison {
    pub fn passed(&self) -> bool {
        self.deviation.max() < self.tolerance
    }
}

/// Run a small configuration through both the covariance-matrix pipeline
/// and exact truncated Fock-space evolution, sampled on the same grid.
pub fn compare_with_oracle(config: &RunConfig) -> Result<OracleComparison> {
    let resolved = config.resolve().map_err(|e| e.in_stage("configuration"))?;
    let model = &resolved.model;
    let oracle = config.oracle.clone().unwrap_or_default();
    let system =
        TruncatedSystem::from_model(model, oracle.n_max).map_err(|e| e.in_stage("oracle setup"))?;
    let exact = evolve_exact(&system, &resolved.grid, &oracle.options())
        .map_err(|e| e.in_stage("oracle evolution"))?;

    let gaussian = (|| -> Result<Vec<ThermoSample>> {
        let reference = ThermoReference::new(
            model.initial_joint_state()?,
            model.bath_hamiltonian()?,
            model.bath_temperature(),
            model.detector_frequency(),
        )?;
        let generator = SwitchedGenerator::from_model(model)?;
        let mut out = Vec::new();
        integrate_with(&generator, &resolved.grid, &resolved.options, |p| {
            out.push(reference.sample(p.t, &evolve_state(reference.initial(), p)?)?);
            Ok(())
        })?;
        Ok(out)
    })()
    .map_err(|e| e.in_stage("evolution"))?;

    if gaussian.len() != exact.samples.len() {
        return Err(Error::NumericalQuality("pipelines sampled different times".into()));
    }
    let mut dev = OracleDeviation::default();
    let rows: Vec<OracleRow> = gaussian
        .into_iter()
        .zip(exact.samples)
        .map(|(g, e)| {
            let d = |a: f64, b: f64, m: &mut f64| *m = m.max((a - b).abs());
            d(g.s_sys, e.s_sys, &mut dev.s_sys);
            d(g.s_env, e.s_env, &mut dev.s_env);
            d(g.mi_sys_env, e.mi_sys_env, &mut dev.mi_sys_env);
            d(g.zeta, e.zeta, &mut dev.zeta);
            d(g.rel_entropy, e.rel_entropy, &mut dev.rel_entropy);
            OracleRow { gaussian: g, exact: e }
        })
        .collect();
    Ok(OracleComparison {
        rows,
        deviation: dev,
        ensemble_size: exact.ensemble_size,
        pruned_weight: exact.pruned_weight,
        max_leakage: exact.max_leakage,
        tolerance: ORACLE_TOLERANCE,
    })
}

/// Side-by-side CSV of both pipelines.
pub fn write_oracle_csv<W: std::io::Write>(cmp: &OracleComparison, out: W) -> Result<()> {
    use super::emit::format_value;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::NumericalQuality(format!("CSV serialization failed: {e}"));
    w.write_record([
        "t", "S_sys", "S_sys_exact", "S_env", "S_env_exact", "MI(S:E)", "MI(S:E)_exact", "zeta",
        "zeta_exact", "D", "D_exact",
    ])
    .map_err(io)?;
    for r in &cmp.rows {
        let (g, e) = (&r.gaussian, &r.exact);
        let values = [
            g.t, g.s_sys, e.s_sys, g.s_env, e.s_env, g.mi_sys_env, e.mi_sys_env, g.zeta, e.zeta,
            g.rel_entropy, e.rel_entropy,
        ];
        w.write_record(values.iter().map(|v| format_value(*v))).map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })
}

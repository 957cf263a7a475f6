use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use super::columns::{parse_columns, Column};
use crate::error::{Error, Result};
use crate::evolution::{IntegrationGrid, IntegratorOptions};
use crate::fock::{OracleOptions, DEFAULT_CUTOFF};
use crate::models::{CavityModelSpec, ChainModelSpec, ModelSpec, SwitchingProfile};
use crate::tolerance;

/// A real number given either literally or as a product/quotient of
/// literals and `pi`, e.g. `"3*pi"` or `"pi/2"`.
#[derive(Debug, Clone, PartialEq)]
pub struct Real {
    value: f64,
    source: Option<String>,
}

impl Real {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            source: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self {
            value: eval_expression(text)?,
            source: Some(text.to_string()),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Self::new(v)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Some(s) => write!(f, "{s}"),
            None => write!(f, "{}", self.value),
        }
    }
}

fn eval_factor(text: &str) -> Result<f64> {
    let t = text.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, t),
    };
    let v = match body {
        "pi" | "PI" | "Pi" | "π" => PI,
        other => other
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("cannot read '{text}' as a number or 'pi'")))?,
    };
    Ok(sign * v)
}

fn eval_expression(text: &str) -> Result<f64> {
    if text.trim().is_empty() {
        return Err(Error::Config("empty numeric expression".into()));
    }
    let mut value = 1.0;
    for product_term in text.split('*') {
        let mut parts = product_term.split('/');
        let mut term = eval_factor(parts.next().unwrap_or(""))?;
        for divisor in parts {
            term /= eval_factor(divisor)?;
        }
        value *= term;
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Config(format!("'{text}' does not evaluate to a finite number")))
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Real::new(v)),
            Raw::Text(s) => Real::parse(&s).map_err(de::Error::custom),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.source {
            Some(text) => s.serialize_str(text),
            None => s.serialize_f64(self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub modes: usize,
    pub length: Real,
    pub detector_frequency: Real,
    pub coupling: Real,
    /// Defaults to the cavity midpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_position: Option<Real>,
    pub system_temperature: Real,
    pub bath_temperature: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub sites: usize,
    pub frequency: Real,
    pub hopping: Real,
    pub coupling: Real,
    /// 1-based sites coupled to the detector; defaults to site 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contacts: Option<Vec<usize>>,
    pub system_temperature: Real,
    pub bath_temperature: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Cavity(CavityConfig),
    Chain(ChainConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchingConfig {
    pub duration: Real,
    /// Ramp time; exactly one of `ramp` and `ramp_fraction` must be given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<Real>,
    /// Ramp time as a fraction of the duration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_fraction: Option<Real>,
}

pub const DEFAULT_SAMPLES: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dt: Real,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// End of the recorded window; defaults to the switching duration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<Real>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

pub const DEFAULT_COLUMNS: [&str; 8] =
    ["S_sys", "S_env", "S_joint", "MI(S:E)", "zeta", "D", "T_eff", "E_env"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesConfig {
    pub columns: Vec<String>,
    /// Largest `|σ_qq - σ_pp|` and `|σ_qp|`, relative to `ν`, for which the
    /// detector still counts as thermal and `T_eff` is reported.
    pub thermality: f64,
}

impl Default for ObservablesConfig {
    fn default() -> Self {
        Self {
            columns: DEFAULT_COLUMNS.iter().map(|s| s.to_string()).collect(),
            thermality: tolerance::THERMALITY,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// File stem for the CSV and JSON outputs; defaults to the run name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub project: bool,
    pub abort_defect: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let o = IntegratorOptions::default();
        Self {
            project: o.project,
            abort_defect: o.abort_defect,
        }
    }
}

/// Cutoff and step controls of the exact cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub n_max: usize,
    pub ramp_step: f64,
    pub plateau_step: f64,
    pub prune: f64,
    pub leakage_limit: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let o = OracleOptions::default();
        Self {
            n_max: DEFAULT_CUTOFF,
            ramp_step: o.ramp_step,
            plateau_step: o.plateau_step,
            prune: o.prune,
            leakage_limit: o.leakage_limit,
        }
    }
}

impl OracleConfig {
    pub fn options(&self) -> OracleOptions {
        OracleOptions {
            ramp_step: self.ramp_step,
            plateau_step: self.plateau_step,
            prune: self.prune,
            leakage_limit: self.leakage_limit,
        }
    }
}

/// One run, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub model: ModelConfig,
    pub switching: SwitchingConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub observables: ObservablesConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    /// Only read by the exact cross-check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

/// A reproduction choice the configuration did not pin down explicitly,
/// surfaced in the output metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assumption {
    pub value: serde_json::Value,
    pub note: String,
}

/// Validated, ready-to-run form of a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub model: ModelSpec,
    pub grid: IntegrationGrid,
    pub columns: Vec<Column>,
    pub thermality: f64,
    pub options: IntegratorOptions,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml_str(&text)?;
        if config.name.is_none() {
            config.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("run")
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or_else(|| self.name())
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.grid.dt = Real::new(dt);
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.grid.samples = samples;
        self
    }

    pub fn switching_profile(&self) -> Result<SwitchingProfile> {
        let s = &self.switching;
        let duration = s.duration.value();
        let ramp = match (&s.ramp, &s.ramp_fraction) {
            (Some(r), None) => r.value(),
            (None, Some(f)) => f.value() * duration,
            _ => {
                return Err(Error::Config(
                    "switching needs exactly one of 'ramp' and 'ramp_fraction'".into(),
                ))
            }
        };
        SwitchingProfile::new(ramp, duration)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let switching = self.switching_profile()?;
        let spec = match &self.model {
            ModelConfig::Cavity(c) => ModelSpec::Cavity(CavityModelSpec {
                modes: c.modes,
                length: c.length.value(),
                detector_frequency: c.detector_frequency.value(),
                coupling: c.coupling.value(),
                detector_position: c
                    .detector_position
                    .as_ref()
                    .map_or(0.5 * c.length.value(), Real::value),
                system_temperature: c.system_temperature.value(),
                bath_temperature: c.bath_temperature.value(),
                switching,
            }),
            ModelConfig::Chain(c) => ModelSpec::Chain(ChainModelSpec {
                sites: c.sites,
                frequency: c.frequency.value(),
                hopping: c.hopping.value(),
                coupling: c.coupling.value(),
                contacts: c.contacts.clone().unwrap_or_else(|| vec![1]),
                system_temperature: c.system_temperature.value(),
                bath_temperature: c.bath_temperature.value(),
                switching,
            }),
        };
        spec.validate()?;
        if !(spec.bath_temperature() > 0.0) {
            return Err(Error::InvalidSpec(
                "bath temperature must be positive: entropy production uses β = 1/T_E".into(),
            ));
        }
        Ok(spec)
    }

    pub fn t_end(&self) -> f64 {
        self.grid
            .t_end
            .as_ref()
            .map_or(self.switching.duration.value(), Real::value)
    }

    pub fn integration_grid(&self) -> Result<IntegrationGrid> {
        IntegrationGrid::uniform(0.0, self.t_end(), self.grid.dt.value(), self.grid.samples)
    }

    pub fn integrator_options(&self) -> Result<IntegratorOptions> {
        let a = self.integrator.abort_defect;
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Config("integrator.abort_defect must be positive".into()));
        }
        Ok(IntegratorOptions {
            abort_defect: a,
            project: self.integrator.project,
        })
    }

    /// Check everything that can be checked without integrating.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let model = self.model_spec()?;
        let grid = self.integration_grid()?;
        let columns = parse_columns(&self.observables.columns, model.bath_size())?;
        let options = self.integrator_options()?;
        let thermality = self.observables.thermality;
        if !(thermality > 0.0 && thermality < 1.0) {
            return Err(Error::Config(format!(
                "observables.thermality must lie in (0, 1), got {thermality}"
            )));
        }
        if let Some(stem) = &self.output.stem {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return Err(Error::Config(format!("invalid output stem '{stem}'")));
            }
        }
        Ok(ResolvedRun {
            model,
            grid,
            columns,
            thermality,
            options,
        })
    }

    /// Reproduction choices that were defaulted or interpreted.
    pub fn assumptions(&self) -> Result<BTreeMap<String, Assumption>> {
        let mut out = BTreeMap::new();
        let model = self.model_spec()?;
        let grid = self.integration_grid()?;
        let profile = self.switching_profile()?;
        let mut put = |key: &str, value: serde_json::Value, note: &str| {
            out.insert(
                key.to_string(),
                Assumption {
                    value,
                    note: note.to_string(),
                },
            );
        };
        if let ModelSpec::Cavity(c) = &model {
            let defaulted = matches!(&self.model, ModelConfig::Cavity(cc) if cc.detector_position.is_none());
            put(
                "detector_position",
                c.detector_position.into(),
                if defaulted {
                    "not given; defaulted to the cavity midpoint L/2"
                } else {
                    "set in the configuration"
                },
            );
        }
        if let ModelSpec::Chain(c) = &model {
            put(
                "contacts",
                serde_json::json!(c.contacts),
                "1-based chain sites coupled to the detector",
            );
        }
        let ramp_note = if self.switching.ramp_fraction.is_some() {
            "ramp time = ramp_fraction × duration"
        } else {
            "ramp time given directly"
        };
        put("ramp", profile.ramp().into(), ramp_note);
        put("dt", grid.dt().into(), "fixed RK4 step; grid span / dt rounded to whole steps");
        put(
            "samples",
            grid.sample_steps().len().into(),
            "recorded times including both ends of the window",
        );
        put("t_end", grid.t_end().into(), "end of the recorded window");
        put(
            "thermality",
            self.observables.thermality.into(),
            "T_eff is reported only while |s_qq - s_pp| and |s_qp| of the detector stay below this fraction of nu",
        );
        Ok(out)
    }
}

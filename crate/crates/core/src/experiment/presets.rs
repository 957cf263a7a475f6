use super::config::RunConfig;
use crate::error::{Error, Result};

/// Figure presets and the exact cross-check configuration, shipped as the
/// TOML files under `presets/` at the workspace root.
const PRESETS: [(&str, &str); 6] = [
    ("fig1", include_str!("../../../../presets/fig1.toml")),
    ("fig2", include_str!("../../../../presets/fig2.toml")),
    ("fig3", include_str!("../../../../presets/fig3.toml")),
    ("fig4", include_str!("../../../../presets/fig4.toml")),
    ("fig5", include_str!("../../../../presets/fig5.toml")),
    ("oracle", include_str!("../../../../presets/oracle.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let text = preset_source(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset '{name}'; available: {}",
            preset_names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    RunConfig::from_toml_str(text)
}

use crate::error::{Error, Result};
use crate::models::SYSTEM_MODE;
use crate::thermo::{PairSpec, ThermoSample};

/// One output column besides time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    SystemEntropy,
    BathEntropy,
    JointEntropy,
    SystemBathInformation,
    EntropyProduction,
    RelativeEntropy,
    EffectiveTemperature,
    BathEnergy,
    /// Mutual information between two mode sets other than detector and
    /// whole bath.
    Information(PairSpec),
}

impl Column {
    pub fn label(&self) -> &str {
        match self {
            Column::SystemEntropy => "S_sys",
            Column::BathEntropy => "S_env",
            Column::JointEntropy => "S_joint",
            Column::SystemBathInformation => "MI(S:E)",
            Column::EntropyProduction => "zeta",
            Column::RelativeEntropy => "D",
            Column::EffectiveTemperature => "T_eff",
            Column::BathEnergy => "E_env",
            Column::Information(p) => &p.label,
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Column::EffectiveTemperature => "temperature",
            Column::BathEnergy => "energy",
            _ => "nats",
        }
    }

    /// Value from the per-sample observables; `pair_values` holds the
    /// [`Column::Information`] entries in column order.
    pub(crate) fn value(&self, s: &ThermoSample, pair_values: &mut impl Iterator<Item = f64>) -> f64 {
        match self {
            Column::SystemEntropy => s.s_sys,
            Column::BathEntropy => s.s_env,
            Column::JointEntropy => s.s_joint,
            Column::SystemBathInformation => s.mi_sys_env,
            Column::EntropyProduction => s.zeta,
            Column::RelativeEntropy => s.rel_entropy,
            Column::EffectiveTemperature => s.t_eff.unwrap_or(f64::NAN),
            Column::BathEnergy => s.e_env,
            Column::Information(_) => pair_values.next().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Party {
    System,
    Bath,
    Mode(usize),
    Rest,
}

fn parse_party(text: &str, bath_size: usize) -> Result<Party> {
    match text {
        "S" => Ok(Party::System),
        "E" => Ok(Party::Bath),
        "rest" => Ok(Party::Rest),
        _ => {
            let k: usize = text
                .strip_prefix("mode")
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| Error::Config(format!("unknown party '{text}'")))?;
            if k == 0 || k > bath_size {
                return Err(Error::Config(format!(
                    "mode{k} is outside the bath modes 1..={bath_size}"
                )));
            }
            Ok(Party::Mode(k))
        }
    }
}

fn party_name(p: &Party) -> String {
    match p {
        Party::System => "S".into(),
        Party::Bath => "E".into(),
        Party::Mode(k) => format!("mode{k}"),
        Party::Rest => "rest".into(),
    }
}

/// Modes of `p`; `rest` is the bath minus the other party.
fn party_modes(p: &Party, other: &[usize], bath_size: usize) -> Vec<usize> {
    match p {
        Party::System => vec![SYSTEM_MODE],
        Party::Bath => (1..=bath_size).collect(),
        Party::Mode(k) => vec![*k],
        Party::Rest => (1..=bath_size).filter(|m| !other.contains(m)).collect(),
    }
}

/// Parse one column name, e.g. `zeta` or `MI(mode1:rest)`.
pub fn parse_column(text: &str, bath_size: usize) -> Result<Column> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let simple = match compact.as_str() {
        "S_sys" => Some(Column::SystemEntropy),
        "S_env" => Some(Column::BathEntropy),
        "S_joint" => Some(Column::JointEntropy),
        "zeta" => Some(Column::EntropyProduction),
        "D" => Some(Column::RelativeEntropy),
        "T_eff" => Some(Column::EffectiveTemperature),
        "E_env" => Some(Column::BathEnergy),
        _ => None,
    };
    if let Some(c) = simple {
        return Ok(c);
    }
    let inner = compact
        .strip_prefix("MI(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::Config(format!("unknown observable column '{text}'")))?;
    let (a, b) = inner
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("'{text}' needs two parties separated by ':'")))?;
    let (pa, pb) = (parse_party(a, bath_size)?, parse_party(b, bath_size)?);
    if pa == Party::System && pb == Party::Bath {
        return Ok(Column::SystemBathInformation);
    }
    if pa == Party::Rest && pb == Party::Rest {
        return Err(Error::Config(format!("'{text}': 'rest' needs a concrete partner")));
    }
    let (first, second) = if pa == Party::Rest {
        let second = party_modes(&pb, &[], bath_size);
        (party_modes(&pa, &second, bath_size), second)
    } else {
        let first = party_modes(&pa, &[], bath_size);
        let second = party_modes(&pb, &first, bath_size);
        (first, second)
    };
    if first.is_empty() || second.is_empty() || first.iter().any(|m| second.contains(m)) {
        return Err(Error::Config(format!(
            "'{text}' does not name two disjoint, non-empty mode sets"
        )));
    }
    Ok(Column::Information(PairSpec {
        label: format!("MI({}:{})", party_name(&pa), party_name(&pb)),
        first,
        second,
    }))
}

pub fn parse_columns(names: &[String], bath_size: usize) -> Result<Vec<Column>> {
    if names.is_empty() {
        return Err(Error::Config("at least one observable column is required".into()));
    }
    let columns = names
        .iter()
        .map(|n| parse_column(n, bath_size))
        .collect::<Result<Vec<_>>>()?;
    for (i, c) in columns.iter().enumerate() {
        if columns[..i].iter().any(|d| d.label() == c.label()) {
            return Err(Error::Config(format!("column '{}' listed twice", c.label())));
        }
    }
    Ok(columns)
}

pub(crate) fn pair_specs(columns: &[Column]) -> Vec<PairSpec> {
    columns
        .iter()
        .filter_map(|c| match c {
            Column::Information(p) => Some(p.clone()),
            _ => None,
        })
        .collect()
}

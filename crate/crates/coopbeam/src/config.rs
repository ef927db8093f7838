//! Flat `key = value` config files with `#` comments.
//!
//! Unset keys fall back to the default experiment parameters (900 MHz
//! carrier, 5λ cluster, −60 dBm noise, destination at 20R, eavesdroppers in
//! [40R, 100R], C_s⁰ = 3 b/s/Hz or P₀ = 5 dBm, 1000 trials). Power and noise
//! levels are written in dBm and converted to watts at this boundary; all
//! internal math is in linear watts.

use std::collections::HashMap;
use thiserror::Error;

use crate::channel::{GeometryConfig, PhaseModel};
use crate::montecarlo::{Strategy, SweepConfig};
use crate::secrecy::Stage1Accounting;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown key `{key}` at line {line}")]
    UnknownKey { line: usize, key: String },
    #[error("unit error: {0}")]
    Unit(String),
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

const KEYS: &[&str] = &[
    "wavelength_m",
    "cluster_radius_m",
    "path_loss_exponent",
    "noise_power_dbm",
    "noise_power_w",
    "n_nodes",
    "n_eavesdroppers",
    "dest_distance_m",
    "eav_distance_min_m",
    "eav_distance_max_m",
    "phase_model",
    "strategy",
    "fixed_secrecy_capacity",
    "fixed_power_dbm",
    "fixed_power_w",
    "trials",
    "seed",
    "n_values",
    "j_values",
    "csi_error_variance",
    "stage1_enabled",
    "stage1_power_dbm",
];

struct RawEntry {
    line: usize,
    col: usize,
    value: String,
}

/// Parse a config document into a sweep description. Unknown keys,
/// duplicates and malformed values are rejected with their location.
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut entries: HashMap<String, RawEntry> = HashMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let eq = line.find('=').ok_or(ConfigError::Parse {
            line: line_no,
            col: 1,
            msg: "expected `key = value`".into(),
        })?;
        let key = line[..eq].trim().to_string();
        let value_part = &line[eq + 1..];
        let value = value_part.trim().to_string();
        let col = eq + 2 + (value_part.len() - value_part.trim_start().len());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                col,
                msg: "expected `key = value`".into(),
            });
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line: line_no, key });
        }
        if entries.contains_key(&key) {
            return Err(ConfigError::Parse {
                line: line_no,
                col: 1,
                msg: format!("duplicate key `{key}`"),
            });
        }
        entries.insert(key, RawEntry { line: line_no, col, value });
    }

    build_config(entries)
}

fn parse_value<T: std::str::FromStr>(entry: &RawEntry, what: &str) -> Result<T, ConfigError> {
    entry.value.parse::<T>().map_err(|_| ConfigError::Parse {
        line: entry.line,
        col: entry.col,
        msg: format!("expected {what}, got `{}`", entry.value),
    })
}

fn parse_list(entry: &RawEntry) -> Result<Vec<usize>, ConfigError> {
    entry
        .value
        .split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|_| ConfigError::Parse {
                line: entry.line,
                col: entry.col,
                msg: format!("expected a comma-separated list of counts, got `{}`", entry.value),
            })
        })
        .collect()
}

fn build_config(entries: HashMap<String, RawEntry>) -> Result<SweepConfig, ConfigError> {
    let mut geometry = GeometryConfig::default();
    let get = |key: &str| entries.get(key);

    if let Some(e) = get("wavelength_m") {
        geometry.wavelength = parse_value(e, "a positive length in meters")?;
    }
    if let Some(e) = get("cluster_radius_m") {
        geometry.cluster_radius = parse_value(e, "a positive length in meters")?;
    }
    if let Some(e) = get("path_loss_exponent") {
        geometry.path_loss_exponent = parse_value(e, "a number >= 2")?;
    }
    match (get("noise_power_dbm"), get("noise_power_w")) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Unit(
                "set only one of noise_power_dbm and noise_power_w".into(),
            ))
        }
        (Some(e), None) => geometry.noise_power = dbm_to_watts(parse_value(e, "a dBm value")?),
        (None, Some(e)) => geometry.noise_power = parse_value(e, "a power in watts")?,
        (None, None) => {}
    }
    if let Some(e) = get("n_nodes") {
        geometry.n_nodes = parse_value(e, "a count >= 1")?;
    }
    if let Some(e) = get("n_eavesdroppers") {
        geometry.n_eavesdroppers = parse_value(e, "a count")?;
    }
    if let Some(e) = get("dest_distance_m") {
        geometry.dest_distance = parse_value(e, "a positive length in meters")?;
    }
    if let Some(e) = get("eav_distance_min_m") {
        geometry.eav_distance_min = parse_value(e, "a positive length in meters")?;
    }
    if let Some(e) = get("eav_distance_max_m") {
        geometry.eav_distance_max = parse_value(e, "a positive length in meters")?;
    }
    if let Some(e) = get("phase_model") {
        geometry.phase_model = match e.value.as_str() {
            "geometric" => PhaseModel::Geometric,
            "uniform_random" => PhaseModel::UniformRandom,
            other => {
                return Err(ConfigError::Parse {
                    line: e.line,
                    col: e.col,
                    msg: format!("expected `geometric` or `uniform_random`, got `{other}`"),
                })
            }
        };
    }
    if let Err(err) = geometry.validate() {
        // attribute the failure to the config as a whole
        return Err(ConfigError::Parse { line: 0, col: 0, msg: err.to_string() });
    }

    let strategy = match get("strategy") {
        Some(e) => Strategy::parse(&e.value).ok_or(ConfigError::Parse {
            line: e.line,
            col: e.col,
            msg: format!(
                "expected one of coop_min_power, coop_max_secrecy, direct_min_power, \
                 direct_max_secrecy; got `{}`",
                e.value
            ),
        })?,
        None => Strategy::CoopMinPower,
    };

    let fixed_value = if strategy.is_min_power() {
        if get("fixed_power_dbm").is_some() || get("fixed_power_w").is_some() {
            return Err(ConfigError::Unit(format!(
                "strategy {} fixes a secrecy capacity; use fixed_secrecy_capacity",
                strategy.as_str()
            )));
        }
        match get("fixed_secrecy_capacity") {
            Some(e) => parse_value(e, "a rate in bits/s/Hz")?,
            None => 3.0,
        }
    } else {
        if get("fixed_secrecy_capacity").is_some() {
            return Err(ConfigError::Unit(format!(
                "strategy {} fixes a transmit power; use fixed_power_dbm or fixed_power_w",
                strategy.as_str()
            )));
        }
        match (get("fixed_power_dbm"), get("fixed_power_w")) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Unit(
                    "set only one of fixed_power_dbm and fixed_power_w".into(),
                ))
            }
            (Some(e), None) => dbm_to_watts(parse_value(e, "a dBm value")?),
            (None, Some(e)) => parse_value(e, "a power in watts")?,
            (None, None) => dbm_to_watts(5.0),
        }
    };

    let trials = match get("trials") {
        Some(e) => parse_value(e, "a count >= 1")?,
        None => 1000,
    };
    let base_seed = match get("seed") {
        Some(e) => parse_value(e, "a 64-bit seed")?,
        None => 1,
    };
    let n_values = match get("n_values") {
        Some(e) => parse_list(e)?,
        None => vec![geometry.n_nodes],
    };
    let j_values = match get("j_values") {
        Some(e) => parse_list(e)?,
        None => vec![geometry.n_eavesdroppers],
    };
    let csi_error_variance = match get("csi_error_variance") {
        Some(e) => {
            let eps: f64 = parse_value(e, "a non-negative variance")?;
            if eps > 0.0 {
                Some(eps)
            } else {
                None
            }
        }
        None => None,
    };
    let stage1_enabled = match get("stage1_enabled") {
        Some(e) => parse_value::<bool>(e, "true or false")?,
        None => false,
    };
    let stage1_power = match get("stage1_power_dbm") {
        Some(e) => dbm_to_watts(parse_value(e, "a dBm value")?),
        None => 0.0,
    };

    let config = SweepConfig {
        geometry,
        n_values,
        j_values,
        strategy,
        fixed_value,
        trials,
        base_seed,
        csi_error_variance,
        stage1: Stage1Accounting { enabled: stage1_enabled, stage1_power },
    };
    config
        .validate()
        .map_err(|e| ConfigError::Parse { line: 0, col: 0, msg: e.to_string() })?;
    Ok(config)
}

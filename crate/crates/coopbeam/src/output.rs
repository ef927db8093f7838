//! CSV and JSON emission for sweep results, plus the run manifest that every
//! output file is tied to.
//!
//! CSV output is the contract with external plotting tools: fixed column
//! order, decimal-point floats with 12 significant digits, no locale
//! dependence.

use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

use crate::channel::PRNG_ID;
use crate::montecarlo::{SweepResult, SweepRow};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub const CSV_HEADER: &str = "n_nodes,n_eavesdroppers,strategy,metric_name,mean,stderr,infeasible,trials";

/// Provenance record written next to each output file.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub config_path: Option<String>,
    pub config_echo: String,
    pub base_seed: u64,
    pub prng: String,
    pub artifact_version: String,
    pub timestamp_unix_s: u64,
    pub output_paths: Vec<String>,
}

impl RunManifest {
    pub fn new(config_path: Option<String>, result: &SweepResult, outputs: Vec<String>) -> Self {
        RunManifest {
            config_path,
            config_echo: result.metadata.config_echo.clone(),
            base_seed: result.metadata.base_seed,
            prng: PRNG_ID.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            output_paths: outputs,
        }
    }
}

/// 12 significant digits, always with a decimal exponent; `NaN` for missing.
pub fn format_float(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.11e}"),
        _ => "NaN".to_string(),
    }
}

fn csv_row(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        row.n_nodes,
        row.n_eavesdroppers,
        row.strategy.as_str(),
        row.metric_name,
        format_float(row.mean),
        format_float(row.stderr),
        row.infeasible,
        row.trials
    )
}

/// Serialize the result rows as CSV with a fixed header.
pub fn emit_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * (result.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    out
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct JsonDocument {
    pub manifest: RunManifest,
    pub rows: Vec<SweepRow>,
}

/// Serialize rows plus the manifest as pretty JSON.
pub fn emit_json(result: &SweepResult, manifest: &RunManifest) -> Result<String, OutputError> {
    let doc = JsonDocument { manifest: manifest.clone(), rows: result.rows.clone() };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{Strategy, SweepMetadata};

    fn sample_result() -> SweepResult {
        SweepResult {
            rows: vec![SweepRow {
                n_nodes: 10,
                n_eavesdroppers: 2,
                strategy: Strategy::CoopMinPower,
                metric_name: "transmit_power_w".into(),
                mean: Some(3.16227766017e-3),
                stderr: Some(1.5e-4),
                infeasible: 1,
                trials: 100,
            }],
            metadata: SweepMetadata {
                base_seed: 7,
                prng: PRNG_ID.into(),
                artifact_version: "test".into(),
                config_echo: "echo".into(),
            },
        }
    }

    #[test]
    fn single_row_gives_two_csv_lines() {
        let csv = emit_csv(&sample_result());
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[1],
            "10,2,coop_min_power,transmit_power_w,3.16227766017e-3,1.50000000000e-4,1,100"
        );
    }

    #[test]
    fn float_formatting_is_locale_free_and_12_digits() {
        assert_eq!(format_float(Some(1e-9)), "1.00000000000e-9");
        assert_eq!(format_float(Some(-60.5)), "-6.05000000000e1");
        assert_eq!(format_float(None), "NaN");
        assert!(!format_float(Some(1234567.89)).contains(','));
    }

    #[test]
    fn json_round_trip_preserves_rows() {
        let result = sample_result();
        let manifest = RunManifest::new(None, &result, vec!["out.json".into()]);
        let text = emit_json(&result, &manifest).unwrap();
        let parsed: JsonDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.rows, result.rows);
        assert_eq!(parsed.manifest.base_seed, 7);
    }
}

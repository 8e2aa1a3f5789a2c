//! Result records and their text forms.

use exact_rwa::erroranalysis::Verdict;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// One reported number with its uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub label: String,
    pub value: f64,
    pub uncertainty: f64,
    /// `value(uncertainty digits)`
    pub display: String,
}

impl Quantity {
    pub fn new(label: impl Into<String>, value: f64, uncertainty: f64) -> Self {
        Quantity { label: label.into(), value, uncertainty, display: with_uncertainty(value, uncertainty) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    /// SHA-256 of the canonical TOML form of `config`.
    pub config_hash: String,
    pub config: RunConfig,
    pub version: String,
    pub quantities: Vec<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub improvement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    /// Command-specific payload.
    pub details: serde_json::Value,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        ResultRecord {
            command: command.to_string(),
            config_hash: config_hash(config),
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            quantities: Vec::new(),
            improvement: None,
            verdict: None,
            details: serde_json::Value::Null,
            wall_time_s: 0.0,
        }
    }

    pub fn quantity(&self, label: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.label == label)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    /// `label,value,uncertainty,display` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,value,uncertainty,display\n");
        for q in &self.quantities {
            out.push_str(&format!("{},{:e},{:e},{}\n", q.label, q.value, q.uncertainty, q.display));
        }
        out
    }
}

pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(config.to_toml().as_bytes()))
}

/// `0.099116584(3)`: the value rounded to the first significant digit of
/// the uncertainty, which follows in parentheses. Nonzero uncertainties
/// below `1e-13 |value|` (summation round-off) are raised to that floor; a
/// zero uncertainty prints the bare value.
pub fn with_uncertainty(value: f64, uncertainty: f64) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    if uncertainty == 0.0 || !uncertainty.is_finite() {
        return format!("{value:e}");
    }
    let u = uncertainty.abs().max(1e-13 * value.abs());
    let mut decimals = ((-u.log10().floor()).max(0.0) as usize).min(20);
    let mut digits = (u * 10f64.powi(decimals as i32)).round() as u64;
    if digits >= 10 && decimals > 0 {
        decimals -= 1;
        digits = (u * 10f64.powi(decimals as i32)).round() as u64;
    }
    format!("{value:.decimals$}({digits})")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncertainty_digits() {
        assert_eq!(with_uncertainty(0.0991165841, 2.7e-9), "0.099116584(3)");
        assert_eq!(with_uncertainty(0.00633432, 1e-8), "0.00633432(1)");
        assert_eq!(with_uncertainty(12.34, 0.5), "12.3(5)");
        assert_eq!(with_uncertainty(1234.0, 30.0), "1234(30)");
        assert_eq!(with_uncertainty(0.0, 0.0), "0e0");
        assert_eq!(with_uncertainty(0.0991165840636451, 1.4e-17), "0.09911658406365(1)");
    }

    #[test]
    fn hash_tracks_config() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.drive.amplitude = 0.003;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}

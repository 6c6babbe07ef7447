//! Machine-checkable reports: sign/bound certificates emitted by every
//! verification operation, and the persistent table of computed constants.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quad::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A sampled (input point, computed value) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sample {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Tolerances a certificate was judged against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Estimated quadrature/solver error on each sampled value.
    pub error_estimate: f64,
    /// Margin demanded beyond the bound (>= 2x the error estimate to pass).
    pub required_margin: f64,
}

/// Verdict `pass` iff every sampled value satisfies the stated bound with
/// the stated margin. `bound` is an upper bound for the sampled values unless
/// `lower_bound` is also present (two-sided bracket).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub subject: String,
    pub samples: Vec<Sample>,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    pub margin: f64,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CertificateReport {
    /// Build an upper-bound certificate: pass iff value <= bound - margin at
    /// every sample, with margin >= 2x the error estimate.
    pub fn upper_bound(
        subject: impl Into<String>,
        samples: Vec<Sample>,
        bound: f64,
        margin: f64,
        error_estimate: f64,
    ) -> Self {
        let ok =
            margin >= 2.0 * error_estimate && samples.iter().all(|s| s.value <= bound - margin);
        CertificateReport {
            subject: subject.into(),
            samples,
            bound,
            lower_bound: None,
            margin,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            tolerances: Tolerances {
                error_estimate,
                required_margin: margin,
            },
            detail: None,
        }
    }

    /// Two-sided bracket: pass iff lower + margin <= value <= upper - margin.
    pub fn bracket(
        subject: impl Into<String>,
        samples: Vec<Sample>,
        lower: f64,
        upper: f64,
        margin: f64,
        error_estimate: f64,
    ) -> Self {
        let ok = margin >= 2.0 * error_estimate
            && samples
                .iter()
                .all(|s| s.value >= lower + margin && s.value <= upper - margin);
        CertificateReport {
            subject: subject.into(),
            samples,
            bound: upper,
            lower_bound: Some(lower),
            margin,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            tolerances: Tolerances {
                error_estimate,
                required_margin: margin,
            },
            detail: None,
        }
    }

    pub fn failed(subject: impl Into<String>, detail: impl Into<String>) -> Self {
        CertificateReport {
            subject: subject.into(),
            samples: Vec::new(),
            bound: 0.0,
            lower_bound: None,
            margin: 0.0,
            verdict: Verdict::Fail,
            tolerances: Tolerances {
                error_estimate: 0.0,
                required_margin: 0.0,
            },
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// One computed constant with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub value: f64,
    pub method: String,
    /// |value(refined quadrature) - value(base quadrature)|; recomputation
    /// with a finer spec moves the value by less than this.
    pub error_estimate: f64,
    pub quad_spec: QuadratureSpec,
}

/// Table of computed constants keyed by canonical parameter strings,
/// persisted as JSON. BTreeMap keeps the serialization order deterministic.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstantTable {
    pub entries: BTreeMap<String, ConstantEntry>,
}

impl ConstantTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Canonical key, e.g. `C(beta=0.25,s=0.5,p=2)`.
    pub fn key(name: &str, params: &[(&str, f64)]) -> String {
        let body: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{name}({})", body.join(","))
    }

    pub fn insert(&mut self, key: String, entry: ConstantEntry) {
        self.entries.insert(key, entry);
    }

    pub fn get(&self, key: &str) -> Option<&ConstantEntry> {
        self.entries.get(key)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_bound_and_margin() {
        let samples = vec![
            Sample {
                point: vec![0.1],
                value: -1.0,
            },
            Sample {
                point: vec![0.2],
                value: -0.8,
            },
        ];
        let ok = CertificateReport::upper_bound("test", samples.clone(), 0.0, 0.5, 0.1);
        assert!(ok.passed());
        // margin not satisfied by the -0.8 sample against bound -0.5
        let bad = CertificateReport::upper_bound("test", samples.clone(), -0.5, 0.5, 0.1);
        assert!(!bad.passed());
        // margin below 2x error estimate fails regardless of samples
        let thin = CertificateReport::upper_bound("test", samples, 0.0, 0.5, 0.3);
        assert!(!thin.passed());
    }

    #[test]
    fn table_round_trips_and_keys_are_canonical() {
        let key = ConstantTable::key("C", &[("beta", 0.25), ("s", 0.5), ("p", 2.0)]);
        assert_eq!(key, "C(beta=0.25,s=0.5,p=2)");
        let mut t = ConstantTable::new();
        t.insert(
            key.clone(),
            ConstantEntry {
                value: 1.5,
                method: "test".to_string(),
                error_estimate: 1e-10,
                quad_spec: QuadratureSpec::standard(),
            },
        );
        let json = serde_json::to_string(&t).unwrap();
        let back: ConstantTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back.get(&key).unwrap().value, 1.5);
    }
}

use std::collections::BTreeMap;

use serde::Serialize;

use crate::report::Check;

/// A scalar estimate with its standard error (zero for exact values).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

/// Fitted log-log slope; `None` when the series has a zero or too few points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Slope {
    pub name: String,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Output of every simulator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub model: String,
    pub algebra: String,
    pub inputs: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub estimates: Vec<Estimate>,
    pub slopes: Vec<Slope>,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
    pub runtime_ms: f64,
}

impl SimReport {
    pub(crate) fn new(model: &str, algebra: &str) -> Self {
        Self {
            model: model.to_string(),
            algebra: algebra.to_string(),
            inputs: BTreeMap::new(),
            seed: None,
            estimates: Vec::new(),
            slopes: Vec::new(),
            series: Vec::new(),
            checks: Vec::new(),
            runtime_ms: 0.0,
        }
    }

    pub(crate) fn input(&mut self, name: &str, value: f64) {
        self.inputs.insert(name.to_string(), value);
    }

    pub(crate) fn estimate(&mut self, name: impl Into<String>, value: f64, stderr: f64, target: Option<f64>) {
        self.estimates.push(Estimate {
            name: name.into(),
            value,
            stderr,
            target,
        });
    }

    pub fn get(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn slope(&self, name: &str) -> Option<f64> {
        self.slopes.iter().find(|s| s.name == name).and_then(|s| s.value)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

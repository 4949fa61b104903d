//! Classical test baselines: Ljung-Box autocorrelation, augmented
//! Dickey-Fuller unit root, and the BDS independence test.

mod adf;
mod bds;
mod ljung_box;
mod ols;

pub use adf::{adf_default_lag, adf_p_value, adf_test};
pub use bds::{bds_test, correlation_sums, CorrelationSums, DEFAULT_EPS_MULTIPLES, DEFAULT_M_VALUES};
pub use ljung_box::ljung_box;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    LjungBox,
    Adf,
    Bds,
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [TestKind::LjungBox, TestKind::Adf, TestKind::Bds];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::LjungBox => "ljung_box",
            TestKind::Adf => "adf",
            TestKind::Bds => "bds",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        TestKind::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown test `{s}` (expected ljung_box, adf or bds)")))
    }
}

/// One statistic with its p-value. BDS fills `m` and `eps`, the others `lags`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCell {
    pub statistic: f64,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lags: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_multiple: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

impl TestCell {
    fn with_lags(statistic: f64, p_value: f64, lags: usize) -> Self {
        TestCell { statistic, p_value, lags: Some(lags), m: None, eps_multiple: None, eps: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestKind,
    pub n: usize,
    pub cells: Vec<TestCell>,
}

impl TestReport {
    pub fn min_p_value(&self) -> f64 {
        self.cells.iter().map(|c| c.p_value).fold(1.0, f64::min)
    }

    /// True when any cell rejects the null at level `alpha`.
    pub fn rejects_any(&self, alpha: f64) -> bool {
        self.cells.iter().any(|c| c.p_value <= alpha)
    }

    /// Rejection after a Bonferroni correction over the cells.
    pub fn rejects_bonferroni(&self, alpha: f64) -> bool {
        self.min_p_value() * self.cells.len() as f64 <= alpha
    }
}

/// Sample mean and the sum of squared deviations.
pub(crate) fn mean_and_ss(x: &[f64]) -> (f64, f64) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let ss = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss)
}

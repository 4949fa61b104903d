use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{mean_and_ss, TestCell, TestKind, TestReport};
use crate::error::{Error, Result};
use crate::series::ReturnSeries;

/// Portmanteau test of no autocorrelation up to `lags`; Q is referred to
/// χ²(lags).
pub fn ljung_box(series: &ReturnSeries, lags: usize) -> Result<TestReport> {
    let x = series.values();
    let n = x.len();
    if lags == 0 || n < lags + 2 {
        return Err(Error::Size(format!("Ljung-Box with {lags} lags needs more than {} points, got {n}", lags + 1)));
    }
    let (mean, ss) = mean_and_ss(x);
    if ss == 0.0 {
        return Err(Error::Domain { index: 0, msg: "zero-variance series has no autocorrelation".into() });
    }
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let nf = n as f64;
    let mut q = 0.0;
    for k in 1..=lags {
        let acov: f64 = d[k..].iter().zip(&d[..n - k]).map(|(a, b)| a * b).sum();
        let rho = acov / ss;
        q += rho * rho / (nf - k as f64);
    }
    q *= nf * (nf + 2.0);
    let chi = ChiSquared::new(lags as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    let p = chi.sf(q).clamp(0.0, 1.0);
    Ok(TestReport { test: TestKind::LjungBox, n, cells: vec![TestCell::with_lags(q, p, lags)] })
}

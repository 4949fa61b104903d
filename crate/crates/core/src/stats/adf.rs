use super::ols::ols;
use super::{TestCell, TestKind, TestReport};
use crate::error::{Error, Result};
use crate::series::ReturnSeries;

// Dickey-Fuller τ critical values, regression with a constant and no trend.
// Rows are sample sizes, columns the lower-tail probabilities in PROBS.
const SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, 100_000.0];
const PROBS: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];
#[allow(clippy::approx_constant)]
const TAU_MU: [[f64; 8]; 6] = [
    [-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
];

/// Linear interpolation with flat extrapolation beyond the end points.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// p-value of a τ statistic at sample size `n`, interpolated in the table and
/// therefore confined to [0.01, 0.99].
pub fn adf_p_value(tau: f64, n: usize) -> f64 {
    let crit: Vec<f64> = (0..PROBS.len())
        .map(|j| {
            let col: Vec<f64> = TAU_MU.iter().map(|row| row[j]).collect();
            interp(&SIZES, &col, n as f64)
        })
        .collect();
    interp(&crit, &PROBS, tau)
}

/// floor((n - 1)^(1/3)), the usual default augmentation order.
pub fn adf_default_lag(n: usize) -> usize {
    let mut k = ((n.saturating_sub(1)) as f64).cbrt().floor() as usize;
    // guard the floating cube root at exact cubes
    while (k + 1).pow(3) <= n.saturating_sub(1) {
        k += 1;
    }
    while k > 0 && k.pow(3) > n.saturating_sub(1) {
        k -= 1;
    }
    k
}

/// Augmented Dickey-Fuller test with a constant:
/// Δx_t = α + γ x_{t-1} + Σ_{j=1..k} β_j Δx_{t-j} + e_t, τ = γ̂ / se(γ̂).
pub fn adf_test(series: &ReturnSeries, lag_order: Option<usize>) -> Result<TestReport> {
    let x = series.values();
    let n = x.len();
    let k = lag_order.unwrap_or_else(|| adf_default_lag(n));
    if n <= k + 2 {
        return Err(Error::Size(format!("ADF with {k} lags needs more than {} points, got {n}", k + 2)));
    }
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let m = dx.len();
    // observations t = k..m-1 of the differenced series
    let mut rows = Vec::with_capacity(m - k);
    let mut y = Vec::with_capacity(m - k);
    for t in k..m {
        let mut row = Vec::with_capacity(k + 2);
        row.push(1.0);
        row.push(x[t]);
        for j in 1..=k {
            row.push(dx[t - j]);
        }
        rows.push(row);
        y.push(dx[t]);
    }
    if y.len() <= k + 2 {
        return Err(Error::Size(format!("ADF with {k} lags leaves too few observations")));
    }
    let fit = ols(&rows, &y)?;
    let tau = fit.coef[1] / fit.se[1];
    if !tau.is_finite() {
        return Err(Error::Numeric("ADF statistic is not finite".into()));
    }
    let p = adf_p_value(tau, m);
    Ok(TestReport { test: TestKind::Adf, n, cells: vec![TestCell::with_lags(tau, p, k)] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{iid_gaussian_returns, Seed};

    #[test]
    fn default_lag() {
        assert_eq!(adf_default_lag(32000), 31);
        assert_eq!(adf_default_lag(28), 3);
        assert_eq!(adf_default_lag(29), 3);
        assert_eq!(adf_default_lag(12500), 23);
    }

    #[test]
    fn table_interpolation() {
        // exact table entries at a tabulated size
        assert!((adf_p_value(-2.89, 100) - 0.05).abs() < 1e-12);
        assert!((adf_p_value(-2.58, 100) - 0.10).abs() < 1e-12);
        assert_eq!(adf_p_value(-30.0, 32000), 0.01);
        assert_eq!(adf_p_value(3.0, 32000), 0.99);
        // halfway between the 250 and 500 rows at the 5% column
        let crit = (-2.88 + -2.87) / 2.0;
        assert!((adf_p_value(crit, 375) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn stationary_input_rejects() {
        let x = iid_gaussian_returns(2000, Seed(11));
        let r = adf_test(&x, None).unwrap();
        assert_eq!(r.cells[0].lags, Some(12));
        assert_eq!(r.cells[0].p_value, 0.01);
        assert!(r.cells[0].statistic < -5.0);
    }

    #[test]
    fn random_walk_does_not_reject() {
        let mut ps = Vec::new();
        for s in 0..40 {
            let e = iid_gaussian_returns(500, Seed(100 + s)).into_values();
            let walk: Vec<f64> = e
                .iter()
                .scan(0.0, |acc, v| {
                    *acc += v;
                    Some(*acc)
                })
                .collect();
            ps.push(adf_test(&ReturnSeries::new(walk).unwrap(), None).unwrap().cells[0].p_value);
        }
        ps.sort_by(f64::total_cmp);
        assert!(ps[20] > 0.10, "median p {}", ps[20]);
    }

    #[test]
    fn constant_series_is_singular() {
        let x = ReturnSeries::new(vec![2.0; 50]).unwrap();
        assert!(matches!(adf_test(&x, Some(2)), Err(Error::Numeric(_))));
        assert!(matches!(adf_test(&x, Some(48)), Err(Error::Size(_))));
    }
}

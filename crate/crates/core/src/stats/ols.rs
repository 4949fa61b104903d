//! Least squares through the normal equations with a Cholesky factor.

use crate::error::{Error, Result};

pub(crate) struct OlsFit {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
}

/// Fits `y ~ X` where `rows` yields one regressor row per observation.
/// Columns are rescaled to unit norm before factoring, which leaves t-ratios
/// unchanged.
pub(crate) fn ols(x_rows: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = y.len();
    let p = x_rows.first().map_or(0, |r| r.len());
    if n <= p {
        return Err(Error::Size(format!("{n} observations for {p} regressors")));
    }
    let mut scale = vec![0.0; p];
    for row in x_rows {
        for (s, v) in scale.iter_mut().zip(row) {
            *s += v * v;
        }
    }
    for s in &mut scale {
        if *s == 0.0 {
            return Err(Error::Numeric("regressor column is identically zero".into()));
        }
        *s = s.sqrt();
    }
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    let mut z = vec![0.0; p];
    for (row, &yi) in x_rows.iter().zip(y) {
        for j in 0..p {
            z[j] = row[j] / scale[j];
        }
        for i in 0..p {
            let zi = z[i];
            xty[i] += zi * yi;
            for j in 0..=i {
                xtx[i * p + j] += zi * z[j];
            }
        }
    }
    // Cholesky, lower triangle in place
    let mut l = xtx;
    for j in 0..p {
        let mut d = l[j * p + j];
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if d <= 1e-10 {
            return Err(Error::Numeric("singular regression (collinear regressors)".into()));
        }
        let d = d.sqrt();
        l[j * p + j] = d;
        for i in j + 1..p {
            let mut v = l[i * p + j];
            for k in 0..j {
                v -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = v / d;
        }
    }
    let solve_lower = |b: &mut [f64]| {
        for i in 0..p {
            let mut v = b[i];
            for k in 0..i {
                v -= l[i * p + k] * b[k];
            }
            b[i] = v / l[i * p + i];
        }
    };
    let solve_upper = |b: &mut [f64]| {
        for i in (0..p).rev() {
            let mut v = b[i];
            for k in i + 1..p {
                v -= l[k * p + i] * b[k];
            }
            b[i] = v / l[i * p + i];
        }
    };
    let mut beta = xty;
    solve_lower(&mut beta);
    solve_upper(&mut beta);
    let mut rss = 0.0;
    for (row, &yi) in x_rows.iter().zip(y) {
        let fit: f64 = row.iter().zip(&beta).zip(&scale).map(|((x, b), s)| x / s * b).sum();
        rss += (yi - fit) * (yi - fit);
    }
    let sigma2 = rss / (n - p) as f64;
    let mut se = vec![0.0; p];
    let mut e = vec![0.0; p];
    for j in 0..p {
        e.fill(0.0);
        e[j] = 1.0;
        solve_lower(&mut e);
        // diag of (L L^T)^-1 is the squared norm of L^-1 e_j
        se[j] = (sigma2 * e.iter().map(|v| v * v).sum::<f64>()).sqrt() / scale[j];
    }
    let coef = beta.iter().zip(&scale).map(|(b, s)| b / s).collect();
    Ok(OlsFit { coef, se })
}

use super::{mean_and_ss, TestCell, TestKind, TestReport};
use crate::error::{Error, Result};
use crate::numeric::normal_sf;
use crate::series::ReturnSeries;

pub const DEFAULT_M_VALUES: [usize; 2] = [2, 3];
pub const DEFAULT_EPS_MULTIPLES: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
const MIN_LEN: usize = 200;

/// Correlation integrals for one ε, with closeness `|x_i - x_j| < ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSums {
    /// Fraction of close pairs i < j in the whole sample.
    pub c1: f64,
    /// `cm[m - 1]`: fraction of pairs of m-histories that are close in every
    /// coordinate, over the n - m + 1 histories.
    pub cm: Vec<f64>,
    /// `c1_tail[m - 1]`: `c1` restricted to indices ≥ m - 1, the sample the
    /// m-histories end on.
    pub c1_tail: Vec<f64>,
    /// Triple-wise closeness estimate used by the asymptotic variance.
    pub k: f64,
}

fn pairs(n: usize) -> f64 {
    n as f64 * (n as f64 - 1.0) / 2.0
}

/// Row counts `#{j : |x_j - x_i| < eps}` (diagonal included) by binary
/// search on sorted values. The close set is contiguous in sorted order
/// because rounded differences are monotone, so this matches a direct scan.
fn row_counts(x: &[f64], eps: f64) -> Vec<u64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    x.iter()
        .map(|&xi| {
            let lo = sorted.partition_point(|&v| xi - v >= eps);
            let hi = sorted.partition_point(|&v| v - xi < eps);
            (hi - lo) as u64
        })
        .collect()
}

/// Bit i of the result is bit i + s of `bits` (LSB-first words).
fn shifted_word(bits: &[u64], word: usize, s: usize) -> u64 {
    let w = word + s / 64;
    let r = s % 64;
    let lo = bits.get(w).copied().unwrap_or(0);
    if r == 0 {
        lo
    } else {
        let hi = bits.get(w + 1).copied().unwrap_or(0);
        lo >> r | hi << (64 - r)
    }
}

fn count_prefix(words: impl Iterator<Item = u64>, len: usize) -> u64 {
    let mut total = 0;
    for (i, w) in words.enumerate() {
        let start = i * 64;
        if start >= len {
            break;
        }
        let keep = len - start;
        let w = if keep >= 64 { w } else { w & ((1u64 << keep) - 1) };
        total += w.count_ones() as u64;
    }
    total
}

/// Correlation integrals up to dimension `max_m`, for each ε in `eps`.
///
/// Works one diagonal `j - i = d` at a time: the closeness of the pairs
/// `(t, t + d)` is packed into a bitset, and an m-history pair starting at t
/// is close exactly when bits t..t+m-1 are all set.
pub fn correlation_sums(x: &[f64], eps: &[f64], max_m: usize) -> Vec<CorrelationSums> {
    let n = x.len();
    let max_m = max_m.max(1);
    let mut close_m = vec![vec![0u64; max_m]; eps.len()];
    let mut close_tail = vec![vec![0u64; max_m]; eps.len()];
    let mut diff = vec![0.0f64; n];
    let mut bits = vec![0u64; n.div_ceil(64) + 1];
    let mut joint = vec![0u64; bits.len()];
    for d in 1..n {
        let len = n - d;
        for t in 0..len {
            diff[t] = (x[t] - x[t + d]).abs();
        }
        let words = len.div_ceil(64);
        for (e, &eps_e) in eps.iter().enumerate() {
            let full = len / 64;
            for (w, chunk) in diff[..full * 64].chunks_exact(64).enumerate() {
                let mut word = 0u64;
                for (b, &d) in chunk.iter().enumerate() {
                    word |= ((d < eps_e) as u64) << b;
                }
                bits[w] = word;
            }
            if full < words {
                let mut word = 0u64;
                for (b, &v) in diff[full * 64..len].iter().enumerate() {
                    word |= ((v < eps_e) as u64) << b;
                }
                bits[full] = word;
            }
            bits[words] = 0;
            joint[..=words].copy_from_slice(&bits[..=words]);
            for m in 1..=max_m {
                if m > 1 {
                    for (w, j) in joint[..words].iter_mut().enumerate() {
                        *j &= shifted_word(&bits, w, m - 1);
                    }
                }
                // history pairs need t + d + m - 1 <= n - 1
                if len + 1 > m {
                    close_m[e][m - 1] += count_prefix(joint[..words].iter().copied(), len + 1 - m);
                }
                // single points with both indices >= m - 1: t in [m-1, len)
                if len > m - 1 {
                    let s = m - 1;
                    let tail = count_prefix((0..words).map(|w| shifted_word(&bits, w, s)), len - s);
                    close_tail[e][m - 1] += tail;
                }
            }
        }
    }
    eps.iter()
        .enumerate()
        .map(|(e, &eps_e)| {
            let rows = row_counts(x, eps_e);
            let nf = n as f64;
            let sum: f64 = rows.iter().map(|&r| r as f64).sum();
            let sum_sq: f64 = rows.iter().map(|&r| (r as f64) * (r as f64)).sum();
            let k = (sum_sq - 3.0 * sum + 2.0 * nf) / (nf * (nf - 1.0) * (nf - 2.0));
            let c1 = (sum - nf) / 2.0 / pairs(n);
            let cm = (1..=max_m).map(|m| close_m[e][m - 1] as f64 / pairs(n - m + 1)).collect();
            let c1_tail = (1..=max_m).map(|m| close_tail[e][m - 1] as f64 / pairs(n - m + 1)).collect();
            CorrelationSums { c1, cm, c1_tail, k }
        })
        .collect()
}

/// Asymptotic variance of √N (C_m − C_1^m) under independence.
fn variance(m: usize, c: f64, k: f64) -> f64 {
    let mut tmp = 0.0;
    for j in 1..m {
        tmp += k.powi((m - j) as i32) * c.powi(2 * j as i32);
    }
    let mf = m as f64;
    4.0 * (k.powi(m as i32) + 2.0 * tmp + (mf - 1.0).powi(2) * c.powi(2 * m as i32)
        - mf * mf * k * c.powi(2 * m as i32 - 2))
}

/// BDS test of independence. `eps_multiples` scale the sample standard
/// deviation; each (m, ε) cell gets a statistic and a two-sided p-value.
pub fn bds_test(series: &ReturnSeries, m_values: &[usize], eps_multiples: &[f64]) -> Result<TestReport> {
    let x = series.values();
    let n = x.len();
    if n < MIN_LEN {
        return Err(Error::Size(format!("BDS needs at least {MIN_LEN} points, got {n}")));
    }
    if m_values.is_empty() || eps_multiples.is_empty() {
        return Err(Error::Config("BDS needs at least one dimension and one epsilon".into()));
    }
    if let Some(&m) = m_values.iter().find(|&&m| m < 2 || m > n / 2) {
        return Err(Error::Range(format!("embedding dimension {m} outside [2, n/2]")));
    }
    if let Some(&e) = eps_multiples.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::Range(format!("epsilon multiple {e} must be positive")));
    }
    let (_, ss) = mean_and_ss(x);
    if ss == 0.0 {
        return Err(Error::Domain { index: 0, msg: "zero-variance series".into() });
    }
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    let eps: Vec<f64> = eps_multiples.iter().map(|e| e * sd).collect();
    let max_m = *m_values.iter().max().expect("non-empty");
    let sums = correlation_sums(x, &eps, max_m);
    let mut cells = Vec::new();
    for &m in m_values {
        for (i, s) in sums.iter().enumerate() {
            let var = variance(m, s.c1, s.k);
            if var.is_nan() || var <= 0.0 {
                return Err(Error::Numeric(format!(
                    "BDS variance is {var} at m = {m}, eps = {}; epsilon too small or too large",
                    eps[i]
                )));
            }
            let effect = s.cm[m - 1] - s.c1_tail[m - 1].powi(m as i32);
            let w = ((n - m + 1) as f64).sqrt() * effect / var.sqrt();
            cells.push(TestCell {
                statistic: w,
                p_value: (2.0 * normal_sf(w.abs())).min(1.0),
                lags: None,
                m: Some(m),
                eps_multiple: Some(eps_multiples[i]),
                eps: Some(eps[i]),
            });
        }
    }
    Ok(TestReport { test: TestKind::Bds, n, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{iid_gaussian_returns, Seed};

    /// Direct double loops over the indicator matrix.
    fn brute(x: &[f64], eps: f64, max_m: usize) -> CorrelationSums {
        let n = x.len();
        let close = |i: usize, j: usize| ((x[i] - x[j]).abs() < eps) as u64;
        let mut cm = Vec::new();
        let mut c1_tail = Vec::new();
        for m in 1..=max_m {
            let h = n - m + 1;
            let (mut joint, mut tail) = (0u64, 0u64);
            for i in 0..h {
                for j in i + 1..h {
                    joint += (0..m).map(|k| close(i + k, j + k)).product::<u64>();
                    tail += close(i + m - 1, j + m - 1);
                }
            }
            cm.push(joint as f64 / pairs(h));
            c1_tail.push(tail as f64 / pairs(h));
        }
        let rows: Vec<f64> = (0..n).map(|i| (0..n).map(|j| close(i, j)).sum::<u64>() as f64).collect();
        let nf = n as f64;
        let sum: f64 = rows.iter().sum();
        let sum_sq: f64 = rows.iter().map(|r| r * r).sum();
        CorrelationSums { c1: cm[0], cm, c1_tail, k: (sum_sq - 3.0 * sum + 2.0 * nf) / (nf * (nf - 1.0) * (nf - 2.0)) }
    }

    #[test]
    fn matches_brute_force() {
        for (n, seed) in [(10usize, 1u64), (67, 2), (130, 3), (257, 4)] {
            let x = iid_gaussian_returns(n, Seed(seed)).into_values();
            let eps = [0.3, 1.0, 1.7];
            let fast = correlation_sums(&x, &eps, 4);
            for (f, &e) in fast.iter().zip(&eps) {
                let b = brute(&x, e, 4);
                assert!((f.c1 - b.c1).abs() < 1e-12);
                assert!((f.k - b.k).abs() < 1e-12);
                for m in 0..4 {
                    assert!((f.cm[m] - b.cm[m]).abs() < 1e-12, "n={n} m={}", m + 1);
                    assert!((f.c1_tail[m] - b.c1_tail[m]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ties_and_discrete_values() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 7) % 5) as f64).collect();
        let fast = correlation_sums(&x, &[1.0, 1.5], 3);
        for (f, e) in fast.iter().zip([1.0, 1.5]) {
            let b = brute(&x, e, 3);
            assert_eq!(f, &b);
        }
    }

    #[test]
    fn iid_input_is_not_rejected() {
        let x = iid_gaussian_returns(1000, Seed(5));
        let r = bds_test(&x, &DEFAULT_M_VALUES, &DEFAULT_EPS_MULTIPLES).unwrap();
        assert_eq!(r.cells.len(), 8);
        assert!(r.cells.iter().all(|c| c.statistic.abs() < 4.0));
    }

    #[test]
    fn dependent_input_is_rejected() {
        // squared-volatility feedback: x_t = e_t * sqrt(0.2 + 0.7 x_{t-1}^2)
        let e = iid_gaussian_returns(1500, Seed(8)).into_values();
        let mut x = vec![0.0f64; e.len()];
        for t in 1..e.len() {
            x[t] = e[t] * (0.2 + 0.7 * x[t - 1] * x[t - 1]).sqrt();
        }
        let r = bds_test(&ReturnSeries::new(x).unwrap(), &[2], &[1.0]).unwrap();
        assert!(r.cells[0].p_value < 1e-4, "{:?}", r.cells[0]);
    }

    #[test]
    fn preconditions() {
        let short = iid_gaussian_returns(100, Seed(1));
        assert!(matches!(bds_test(&short, &[2], &[1.0]), Err(Error::Size(_))));
        let flat = ReturnSeries::new(vec![1.0; 300]).unwrap();
        assert!(matches!(bds_test(&flat, &[2], &[1.0]), Err(Error::Domain { .. })));
        let x = iid_gaussian_returns(300, Seed(1));
        assert!(bds_test(&x, &[1], &[1.0]).is_err());
        assert!(bds_test(&x, &[2], &[0.0]).is_err());
    }
}

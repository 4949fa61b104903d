//! Mapping real-valued returns onto power-of-two integer alphabets.
//!
//! Four schemes are provided: equal-width bins over the sample range,
//! normal-quantile bins, empirical-quantile bins (rank based) and the
//! progressive sliding-window variant of the latter, which codes each return
//! relative to its trailing window and so removes volatility clustering.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bitcodec::{SymbolSeries, MAX_WIDTH};
use crate::error::{Error, Result};
use crate::numeric::normal_quantile;
use crate::series::ReturnSeries;

/// `2^width + 1` strictly increasing bin edges; bin `i` is `[bounds[i], bounds[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    bounds: Vec<f64>,
    width: u8,
}

fn check_width(width: u8) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::Range(format!("width must be in 1..={MAX_WIDTH}, got {width}")));
    }
    Ok(())
}

impl BoundsTable {
    pub fn new(bounds: Vec<f64>, width: u8) -> Result<Self> {
        check_width(width)?;
        let expected = (1usize << width) + 1;
        if bounds.len() != expected {
            return Err(Error::Size(format!("width {width} needs {expected} bounds, got {}", bounds.len())));
        }
        let last = bounds.len() - 1;
        for (i, &b) in bounds.iter().enumerate() {
            let ok = b.is_finite() || (i == 0 && b == f64::NEG_INFINITY) || (i == last && b == f64::INFINITY);
            if !ok {
                return Err(Error::Range(format!("bound {i} is {b}")));
            }
        }
        if let Some(i) = bounds.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Range(format!(
                "bounds not strictly increasing at {i}: {} >= {}",
                bounds[i],
                bounds[i + 1]
            )));
        }
        Ok(Self { bounds, width })
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn bins(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Index `i` with `bounds[i] <= x < bounds[i+1]`, if any.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if x.is_nan() || x < self.bounds[0] || x >= self.bounds[self.bins()] {
            return None;
        }
        // first edge strictly greater than x, minus one
        Some(self.bounds.partition_point(|&b| b <= x) - 1)
    }

    /// `index,bound` rows with `-inf`/`+inf` literals.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,bound")?;
        for (i, b) in self.bounds.iter().enumerate() {
            if *b == f64::NEG_INFINITY {
                writeln!(w, "{i},-inf")?;
            } else if *b == f64::INFINITY {
                writeln!(w, "{i},+inf")?;
            } else {
                writeln!(w, "{i},{b:?}")?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut text = String::new();
        let mut r = r;
        r.read_to_string(&mut text)?;
        let mut bounds = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with("index")) {
                continue;
            }
            let (idx, val) =
                line.split_once(',').ok_or_else(|| Error::Parse { line: n + 1, msg: "expected index,bound".into() })?;
            let idx: usize =
                idx.trim().parse().map_err(|_| Error::Parse { line: n + 1, msg: format!("bad index {idx:?}") })?;
            if idx != bounds.len() {
                return Err(Error::Parse { line: n + 1, msg: format!("expected index {}, found {idx}", bounds.len()) });
            }
            let v = match val.trim() {
                "-inf" => f64::NEG_INFINITY,
                "+inf" | "inf" => f64::INFINITY,
                s => s.parse().map_err(|_| Error::Parse { line: n + 1, msg: format!("bad bound {s:?}") })?,
            };
            bounds.push(v);
        }
        let bins = bounds.len().saturating_sub(1);
        if bins < 2 || !bins.is_power_of_two() {
            return Err(Error::Size(format!("{} bounds do not describe a power-of-two alphabet", bounds.len())));
        }
        Self::new(bounds, bins.trailing_zeros() as u8)
    }
}

/// Everything needed to re-run a discretization bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum DiscretizationRecord {
    EqualWidth { width: u8, min: f64, max: f64 },
    NormalQuantile { width: u8 },
    EmpiricalQuantile { width: u8 },
    Progressive { width: u8, window: usize },
}

impl DiscretizationRecord {
    /// Re-applies the recorded scheme to `returns`.
    pub fn apply(&self, returns: &ReturnSeries) -> Result<SymbolSeries> {
        match *self {
            DiscretizationRecord::EqualWidth { width, min, max } => equal_width_with_range(returns, width, min, max),
            DiscretizationRecord::NormalQuantile { width } => {
                discretize_with_bounds(returns, &normal_quantile_bounds(width)?)
            }
            DiscretizationRecord::EmpiricalQuantile { width } => empirical_quantile_discretize(returns, width),
            DiscretizationRecord::Progressive { width, window } => progressive_discretize(returns, window, width),
        }
    }

    pub fn width(&self) -> u8 {
        match *self {
            DiscretizationRecord::EqualWidth { width, .. }
            | DiscretizationRecord::NormalQuantile { width }
            | DiscretizationRecord::EmpiricalQuantile { width }
            | DiscretizationRecord::Progressive { width, .. } => width,
        }
    }
}

/// Equal-width bins over `[min, max]`; the maximum falls in the top bin.
pub fn equal_width_bins(
    returns: &ReturnSeries,
    width: u8,
) -> Result<(SymbolSeries, BoundsTable, DiscretizationRecord)> {
    check_width(width)?;
    if returns.len() < 2 {
        return Err(Error::Size(format!("equal-width bins need at least 2 returns, got {}", returns.len())));
    }
    let (min, max) =
        returns.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if max <= min {
        return Err(Error::Degenerate("constant series has no range to bin".into()));
    }
    let symbols = equal_width_with_range(returns, width, min, max)?;
    let bins = 1usize << width;
    let step = (max - min) / bins as f64;
    let mut bounds: Vec<f64> = (0..=bins).map(|k| min + k as f64 * step).collect();
    bounds[bins] = max;
    // the top edge is closed in this scheme; nudge it so bin_of(max) agrees
    bounds[bins] = bounds[bins].next_up();
    let table = BoundsTable::new(bounds, width)?;
    Ok((symbols, table, DiscretizationRecord::EqualWidth { width, min, max }))
}

fn equal_width_with_range(returns: &ReturnSeries, width: u8, min: f64, max: f64) -> Result<SymbolSeries> {
    check_width(width)?;
    if max <= min {
        return Err(Error::Degenerate("empty range".into()));
    }
    let top = (1u32 << width) - 1;
    let step = (max - min) / (1u64 << width) as f64;
    let mut symbols = Vec::with_capacity(returns.len());
    for (index, &x) in returns.values().iter().enumerate() {
        if x < min || x > max {
            return Err(Error::OutOfBounds { index, value: x });
        }
        let k = ((x - min) / step).floor();
        symbols.push((k as u32).min(top));
    }
    SymbolSeries::new(symbols, width)
}

/// `bounds[i] = Φ⁻¹(i / 2^width)`, with infinite end points.
pub fn normal_quantile_bounds(width: u8) -> Result<BoundsTable> {
    check_width(width)?;
    let bins = 1usize << width;
    let bounds = (0..=bins).map(|i| normal_quantile(i as f64 / bins as f64)).collect();
    BoundsTable::new(bounds, width)
}

/// Binary-search binning against a fixed table.
pub fn discretize_with_bounds(returns: &ReturnSeries, bounds: &BoundsTable) -> Result<SymbolSeries> {
    let mut symbols = Vec::with_capacity(returns.len());
    for (index, &x) in returns.values().iter().enumerate() {
        let bin = bounds.bin_of(x).ok_or(Error::OutOfBounds { index, value: x })?;
        symbols.push(bin as u32);
    }
    SymbolSeries::new(symbols, bounds.width())
}

/// Rank-based equal-count bins: stable sort by (value, index), then
/// `symbol = floor(rank * 2^width / n)`.
pub fn empirical_quantile_discretize(returns: &ReturnSeries, width: u8) -> Result<SymbolSeries> {
    check_width(width)?;
    let n = returns.len();
    let bins = 1usize << width;
    if n < bins {
        return Err(Error::Size(format!("{n} returns cannot fill {bins} equal-count bins")));
    }
    let values = returns.values();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut symbols = vec![0u32; n];
    for (rank, &idx) in order.iter().enumerate() {
        symbols[idx] = (rank as u128 * bins as u128 / n as u128) as u32;
    }
    SymbolSeries::new(symbols, width)
}

/// Sliding-window empirical quantiles. Output `t` is the symbol of return
/// `t + window - 1` ranked among itself and its `window - 1` predecessors;
/// equal earlier values rank below the current one.
pub fn progressive_discretize(returns: &ReturnSeries, window: usize, width: u8) -> Result<SymbolSeries> {
    check_width(width)?;
    let n = returns.len();
    let bins = 1usize << width;
    if window < bins {
        return Err(Error::Size(format!("window {window} smaller than alphabet {bins}")));
    }
    if window >= n {
        return Err(Error::Size(format!("window {window} must be shorter than the series ({n})")));
    }
    let values = returns.values();
    let symbols = (window - 1..n)
        .map(|t| {
            let x = values[t];
            let rank = values[t + 1 - window..t].iter().filter(|&&v| v.total_cmp(&x).is_le()).count();
            (rank * bins / window) as u32
        })
        .collect();
    SymbolSeries::new(symbols, width)
}

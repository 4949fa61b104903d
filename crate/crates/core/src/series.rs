//! Real- and integer-valued series plus the reversible transforms that open
//! every regularity-erasing pipeline.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly positive price levels with optional ordinal labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl PriceSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain { index, msg: format!("price must be finite and positive, got {v}") });
            }
        }
        Ok(Self { values, labels: None })
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::Size(format!("{} labels for {} prices", labels.len(), values.len())));
        }
        let mut s = Self::new(values)?;
        s.labels = Some(labels);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Log-returns; every entry finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain { index, msg: "return is not finite".into() });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerSeries {
    values: Vec<i64>,
}

impl IntegerSeries {
    pub fn new(values: Vec<i64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<i64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<i64>> for IntegerSeries {
    fn from(values: Vec<i64>) -> Self {
        Self::new(values)
    }
}

/// r_i = ln(p_{i+1}) − ln(p_i).
pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::Size(format!("log returns need at least 2 prices, got {}", prices.len())));
    }
    let values = prices.values.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    ReturnSeries::new(values)
}

/// Rebuilds prices from an initial level and log-returns (inverse of [`log_returns`]).
pub fn prices_from_returns(initial: f64, returns: &ReturnSeries) -> Result<PriceSeries> {
    let mut log_level = initial.ln();
    let mut values = Vec::with_capacity(returns.len() + 1);
    values.push(initial);
    for r in returns.values() {
        log_level += r;
        values.push(log_level.exp());
    }
    PriceSeries::new(values)
}

/// First difference of an integer series. Keep `values[0]` to invert with
/// [`cumulative_sum`].
pub fn first_difference(series: &IntegerSeries) -> Result<IntegerSeries> {
    if series.len() < 2 {
        return Err(Error::Size(format!("first difference needs at least 2 values, got {}", series.len())));
    }
    Ok(IntegerSeries::new(series.values.windows(2).map(|w| w[1] - w[0]).collect()))
}

/// Integer-valued prices (such as tick counts) as an [`IntegerSeries`].
pub fn integral_prices(prices: &PriceSeries) -> Result<IntegerSeries> {
    let mut out = Vec::with_capacity(prices.len());
    for (index, &p) in prices.values.iter().enumerate() {
        if p.fract() != 0.0 || p > i64::MAX as f64 {
            return Err(Error::Domain { index, msg: format!("price {p} is not an integer") });
        }
        out.push(p as i64);
    }
    Ok(IntegerSeries::new(out))
}

/// First difference of integer-valued prices.
pub fn price_difference(prices: &PriceSeries) -> Result<IntegerSeries> {
    first_difference(&integral_prices(prices)?)
}

/// Prefix sums starting from `initial`; output has one more element than the input.
pub fn cumulative_sum(initial: i64, increments: &IntegerSeries) -> IntegerSeries {
    let mut acc = initial;
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(acc);
    for d in &increments.values {
        acc += d;
        out.push(acc);
    }
    IntegerSeries::new(out)
}

pub fn affine_shift(series: &IntegerSeries, offset: i64) -> IntegerSeries {
    IntegerSeries::new(series.values.iter().map(|v| v + offset).collect())
}

fn parse_f64(field: &str) -> Option<f64> {
    let t = field.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok()
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

/// Reads prices from a one-column (`price`) or two-column (`label,price`) CSV.
/// A first row whose price field is not numeric is taken as a header.
pub fn read_prices_csv<R: Read>(reader: R) -> Result<PriceSeries> {
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut columns = None;
    for (row, record) in csv_reader(reader).records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(row + 1),
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(row + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let width = record.len();
        if !(1..=2).contains(&width) {
            return Err(Error::Parse { line, msg: format!("expected 1 or 2 columns, found {width}") });
        }
        let price_field = &record[width - 1];
        match parse_f64(price_field) {
            Some(p) => {
                match columns {
                    None => columns = Some(width),
                    Some(c) if c != width => {
                        return Err(Error::Parse { line, msg: format!("expected {c} columns, found {width}") })
                    }
                    _ => {}
                }
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::Parse { line, msg: format!("price must be positive, got {price_field}") });
                }
                if width == 2 {
                    labels.push(record[0].to_string());
                }
                values.push(p);
            }
            None if values.is_empty() && columns.is_none() && row == 0 => {
                // header row
            }
            None => return Err(Error::Parse { line, msg: format!("not a number: {price_field:?}") }),
        }
    }
    if columns == Some(2) {
        PriceSeries::with_labels(values, labels)
    } else {
        PriceSeries::new(values)
    }
}

/// Reads a one-column CSV of returns (header optional).
pub fn read_returns_csv<R: Read>(reader: R) -> Result<ReturnSeries> {
    let mut values = Vec::new();
    for (row, record) in csv_reader(reader).records().enumerate() {
        let record = record.map_err(|e| Error::Parse { line: row + 1, msg: e.to_string() })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(row + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = &record[record.len() - 1];
        match parse_f64(field) {
            Some(v) if v.is_finite() => values.push(v),
            Some(_) => return Err(Error::Parse { line, msg: format!("return is not finite: {field}") }),
            None if row == 0 => {}
            None => return Err(Error::Parse { line, msg: format!("not a number: {field:?}") }),
        }
    }
    ReturnSeries::new(values)
}

/// Writes returns as `return` header plus one shortest-round-trip value per
/// line. An empty series writes nothing.
pub fn write_returns_csv<W: Write>(mut writer: W, returns: &ReturnSeries) -> Result<()> {
    if returns.is_empty() {
        return Ok(());
    }
    writeln!(writer, "return")?;
    for v in returns.values() {
        writeln!(writer, "{v:?}")?;
    }
    Ok(())
}

pub fn write_prices_csv<W: Write>(mut writer: W, prices: &PriceSeries) -> Result<()> {
    match prices.labels() {
        Some(labels) => {
            writeln!(writer, "label,price")?;
            for (l, p) in labels.iter().zip(prices.values()) {
                writeln!(writer, "{l},{p:?}")?;
            }
        }
        None => {
            writeln!(writer, "price")?;
            for p in prices.values() {
                writeln!(writer, "{p:?}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> IntegerSeries {
        IntegerSeries::new(v.to_vec())
    }

    #[test]
    fn log_returns_constant_and_unit_step() {
        let flat = PriceSeries::new(vec![100.0, 100.0, 100.0]).unwrap();
        assert_eq!(log_returns(&flat).unwrap().values(), &[0.0, 0.0]);
        let e = PriceSeries::new(vec![1.0, std::f64::consts::E]).unwrap();
        assert!((log_returns(&e).unwrap().values()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_positive_price_names_index() {
        match PriceSeries::new(vec![1.0, 2.0, 0.0]) {
            Err(Error::Domain { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(PriceSeries::new(vec![-1.0]), Err(Error::Domain { index: 0, .. })));
    }

    #[test]
    fn short_series_are_size_errors() {
        let one = PriceSeries::new(vec![5.0]).unwrap();
        assert!(matches!(log_returns(&one), Err(Error::Size(_))));
        assert!(matches!(first_difference(&ints(&[3])), Err(Error::Size(_))));
    }

    #[test]
    fn worked_example_difference_and_shift() {
        let e1 = ints(&[1000, 1028, 1044, 1015, 998]);
        let e2 = first_difference(&e1).unwrap();
        assert_eq!(e2.values(), &[28, 16, -29, -17]);
        assert_eq!(first_difference(&ints(&[5, 5, 5])).unwrap().values(), &[0, 0]);
        let e3 = affine_shift(&ints(&[28, 16, -29]), 32);
        assert_eq!(e3.values(), &[60, 48, 3]);
        assert_eq!(affine_shift(&e3, 0), e3);
    }

    #[test]
    fn non_integral_price_cannot_be_differenced() {
        let p = PriceSeries::new(vec![1.0, 1.5]).unwrap();
        assert!(matches!(price_difference(&p), Err(Error::Domain { index: 1, .. })));
    }

    #[test]
    fn csv_one_and_two_columns() {
        let one = read_prices_csv("price\n1.5\n2.5\n".as_bytes()).unwrap();
        assert_eq!(one.values(), &[1.5, 2.5]);
        assert!(one.labels().is_none());
        let two = read_prices_csv("d1,10\nd2,11\n".as_bytes()).unwrap();
        assert_eq!(two.values(), &[10.0, 11.0]);
        assert_eq!(two.labels().unwrap(), &["d1".to_string(), "d2".to_string()]);
    }

    #[test]
    fn csv_errors_report_lines() {
        match read_prices_csv("price\n1.0\nabc\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match read_prices_csv("1.0\n-2\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        // locale decimal comma splits into an extra column
        assert!(read_prices_csv("a,1,5\n".as_bytes()).is_err());
    }

    #[test]
    fn returns_csv_round_trip() {
        let r = ReturnSeries::new(vec![0.1, -1e-300, 3.0e10, 0.0]).unwrap();
        let mut buf = Vec::new();
        write_returns_csv(&mut buf, &r).unwrap();
        assert_eq!(read_returns_csv(buf.as_slice()).unwrap(), r);
    }

    proptest! {
        #[test]
        fn difference_inverts_by_cumulative_sum(v in prop::collection::vec(-1_000_000i64..1_000_000, 2..200)) {
            let s = ints(&v);
            let d = first_difference(&s).unwrap();
            prop_assert_eq!(cumulative_sum(v[0], &d), s);
        }

        #[test]
        fn shift_then_unshift_is_identity(v in prop::collection::vec(-1_000_000i64..1_000_000, 0..200), off in -1000i64..1000) {
            let s = ints(&v);
            prop_assert_eq!(affine_shift(&affine_shift(&s, off), -off), s);
        }

        #[test]
        fn prices_round_trip_through_returns(r in prop::collection::vec(-0.2f64..0.2, 1..300)) {
            let rs = ReturnSeries::new(r).unwrap();
            let prices = prices_from_returns(100.0, &rs).unwrap();
            let back = log_returns(&prices).unwrap();
            for (a, b) in back.values().iter().zip(rs.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let again = prices_from_returns(100.0, &back).unwrap();
            for (a, b) in again.values().iter().zip(prices.values()) {
                prop_assert!(((a - b) / b).abs() <= 1e-10);
            }
        }
    }
}

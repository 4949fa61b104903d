//! The regularity-erasing pipeline: a chain of reversible stages, each
//! followed by compression, Monte-Carlo significance and optional tests.
//!
//! A stage's coders are judged against a null distribution of rates on
//! i.i.d. uniform sequences of the same length and alphabet. The verdict of
//! the last compressed stage is the verdict of the run.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bitcodec::{bits_to_symbols, symbols_to_bits, take_every_kth, BitSequence, SymbolSeries};
use crate::codecs::{compress, compress_bits, Coder, CompressionOutcome};
use crate::discretize::{
    discretize_with_bounds, empirical_quantile_discretize, equal_width_bins, normal_quantile_bounds,
    progressive_discretize, DiscretizationRecord,
};
use crate::error::{Error, Result};
use crate::generators::{uniform_symbols, Seed};
use crate::series::{
    affine_shift, first_difference, integral_prices, log_returns, IntegerSeries, PriceSeries, ReturnSeries,
};
use crate::stats::{adf_test, bds_test, ljung_box, TestReport, DEFAULT_EPS_MULTIPLES, DEFAULT_M_VALUES};

pub const DEFAULT_TRIALS: usize = 199;
pub const MIN_TRIALS: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_REGULAR_THRESHOLD: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_WINDOW: usize = 512;
pub const DEFAULT_LB_LAGS: usize = 36;

/// Data flowing between stages.
#[derive(Debug, Clone, PartialEq)]
pub enum StageData {
    Prices(PriceSeries),
    Returns(ReturnSeries),
    Integers(IntegerSeries),
    Symbols(SymbolSeries),
    Bits(BitSequence),
}

impl StageData {
    pub fn kind(&self) -> &'static str {
        match self {
            StageData::Prices(_) => "prices",
            StageData::Returns(_) => "returns",
            StageData::Integers(_) => "integers",
            StageData::Symbols(_) => "symbols",
            StageData::Bits(_) => "bits",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            StageData::Prices(p) => p.len(),
            StageData::Returns(r) => r.len(),
            StageData::Integers(i) => i.len(),
            StageData::Symbols(s) => s.len(),
            StageData::Bits(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// SHA-256 over a canonical byte form, tagged with the data kind.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind().as_bytes());
        match self {
            StageData::Prices(p) => p.values().iter().for_each(|v| h.update(v.to_le_bytes())),
            StageData::Returns(r) => r.values().iter().for_each(|v| h.update(v.to_le_bytes())),
            StageData::Integers(i) => i.values().iter().for_each(|v| h.update(v.to_le_bytes())),
            StageData::Symbols(s) => {
                h.update([s.width()]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.to_packed_bytes());
            }
            StageData::Bits(b) => {
                h.update((b.len() as u64).to_le_bytes());
                h.update(b.to_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Real-valued view used by the statistical tests.
    fn as_reals(&self) -> Option<ReturnSeries> {
        let v: Vec<f64> = match self {
            StageData::Prices(p) => p.values().to_vec(),
            StageData::Returns(r) => return Some(r.clone()),
            StageData::Integers(i) => i.values().iter().map(|&v| v as f64).collect(),
            StageData::Symbols(s) => s.symbols().iter().map(|&v| v as f64).collect(),
            StageData::Bits(_) => return None,
        };
        ReturnSeries::new(v).ok()
    }
}

/// A reversible (or, for `take_every_kth`, structure-assuming) transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "snake_case")]
pub enum Transform {
    LogReturns,
    FirstDifference,
    AffineShift {
        offset: i64,
    },
    EqualWidth {
        width: u8,
    },
    NormalQuantile {
        width: u8,
    },
    EmpiricalQuantile {
        width: u8,
    },
    Progressive {
        width: u8,
        #[serde(default = "default_window")]
        window: usize,
    },
    ToSymbols {
        width: u8,
    },
    ToBits,
    FromBits {
        width: u8,
    },
    TakeEveryKth {
        k: usize,
        #[serde(default)]
        offset: usize,
    },
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::LogReturns => "log_returns",
            Transform::FirstDifference => "first_difference",
            Transform::AffineShift { .. } => "affine_shift",
            Transform::EqualWidth { .. } => "equal_width",
            Transform::NormalQuantile { .. } => "normal_quantile",
            Transform::EmpiricalQuantile { .. } => "empirical_quantile",
            Transform::Progressive { .. } => "progressive",
            Transform::ToSymbols { .. } => "to_symbols",
            Transform::ToBits => "to_bits",
            Transform::FromBits { .. } => "from_bits",
            Transform::TakeEveryKth { .. } => "take_every_kth",
        }
    }

    fn mismatch(&self, data: &StageData) -> Error {
        Error::Config(format!("{} cannot be applied to {}", self.name(), data.kind()))
    }

    /// Applies the transform and returns the data needed to invert or replay it.
    pub fn apply(&self, data: &StageData) -> Result<(StageData, StageRecord)> {
        use StageData::*;
        let none = StageRecord::default();
        Ok(match (self, data) {
            (Transform::LogReturns, Prices(p)) => {
                let rec = StageRecord { initial: Some(p.values()[0]), ..none };
                (Returns(log_returns(p)?), rec)
            }
            (Transform::FirstDifference, Prices(p)) => {
                let levels = integral_prices(p)?;
                let rec = StageRecord { initial: Some(levels.values()[0] as f64), ..none };
                (Integers(first_difference(&levels)?), rec)
            }
            (Transform::FirstDifference, Integers(i)) => {
                let d = first_difference(i)?;
                (Integers(d), StageRecord { initial: Some(i.values()[0] as f64), ..none })
            }
            (Transform::AffineShift { offset }, Integers(i)) => (Integers(affine_shift(i, *offset)), none),
            (Transform::EqualWidth { width }, Returns(r)) => {
                let (s, _, rec) = equal_width_bins(r, *width)?;
                (Symbols(s), StageRecord { discretization: Some(rec), ..none })
            }
            (Transform::NormalQuantile { width }, Returns(r)) => {
                let s = discretize_with_bounds(r, &normal_quantile_bounds(*width)?)?;
                let rec = DiscretizationRecord::NormalQuantile { width: *width };
                (Symbols(s), StageRecord { discretization: Some(rec), ..none })
            }
            (Transform::EmpiricalQuantile { width }, Returns(r)) => {
                let s = empirical_quantile_discretize(r, *width)?;
                let rec = DiscretizationRecord::EmpiricalQuantile { width: *width };
                (Symbols(s), StageRecord { discretization: Some(rec), ..none })
            }
            (Transform::Progressive { width, window }, Returns(r)) => {
                let s = progressive_discretize(r, *window, *width)?;
                let rec = DiscretizationRecord::Progressive { width: *width, window: *window };
                (Symbols(s), StageRecord { discretization: Some(rec), ..none })
            }
            (Transform::ToSymbols { width }, Integers(i)) => (Symbols(SymbolSeries::from_integers(i, *width)?), none),
            (Transform::ToBits, Symbols(s)) => (Bits(symbols_to_bits(s)), none),
            (Transform::FromBits { width }, Bits(b)) => (Symbols(bits_to_symbols(b, *width)?), none),
            (Transform::TakeEveryKth { k, offset }, Bits(b)) => (Bits(take_every_kth(b, *k, *offset)?), none),
            (t, d) => return Err(t.mismatch(d)),
        })
    }
}

/// Replay and inversion data kept in the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization: Option<DiscretizationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum TestSpec {
    LjungBox {
        #[serde(default = "default_lb_lags")]
        lags: usize,
    },
    Adf {
        #[serde(default)]
        lags: Option<usize>,
    },
    Bds {
        #[serde(default = "default_m")]
        m: Vec<usize>,
        #[serde(default = "default_eps")]
        eps: Vec<f64>,
    },
}

fn default_lb_lags() -> usize {
    DEFAULT_LB_LAGS
}
fn default_m() -> Vec<usize> {
    DEFAULT_M_VALUES.to_vec()
}
fn default_eps() -> Vec<f64> {
    DEFAULT_EPS_MULTIPLES.to_vec()
}

impl TestSpec {
    pub fn run(&self, series: &ReturnSeries) -> Result<TestReport> {
        match self {
            TestSpec::LjungBox { lags } => ljung_box(series, *lags),
            TestSpec::Adf { lags } => adf_test(series, *lags),
            TestSpec::Bds { m, eps } => bds_test(series, m, eps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    #[serde(flatten)]
    pub transform: Transform,
    /// Whether to run the coders on this stage; defaults to true for symbol
    /// and bit data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compress: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestSpec>,
}

impl StageSpec {
    pub fn new(transform: Transform) -> Self {
        StageSpec { transform, compress: None, tests: Vec::new() }
    }

    pub fn with_tests(mut self, tests: Vec<TestSpec>) -> Self {
        self.tests = tests;
        self
    }
}

/// Whole pipeline configuration, as loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    #[serde(default = "default_coders")]
    pub coders: Vec<Coder>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_regular")]
    pub regular_threshold: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(rename = "stage", default)]
    pub stages: Vec<StageSpec>,
}

fn default_coders() -> Vec<Coder> {
    Coder::ALL.to_vec()
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_regular() -> f64 {
    DEFAULT_REGULAR_THRESHOLD
}

impl PipelineSpec {
    pub fn new(stages: Vec<StageSpec>) -> Self {
        PipelineSpec {
            coders: default_coders(),
            trials: DEFAULT_TRIALS,
            alpha: DEFAULT_ALPHA,
            regular_threshold: DEFAULT_REGULAR_THRESHOLD,
            seed: None,
            stages,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: PipelineSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config("pipeline has no stages".into()));
        }
        if self.coders.is_empty() {
            return Err(Error::Config("pipeline has no coders".into()));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!("at least {MIN_TRIALS} Monte-Carlo trials are required")));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !self.regular_threshold.is_finite() {
            return Err(Error::Config("regular_threshold must be finite".into()));
        }
        Ok(())
    }

    pub fn seed(&self) -> Seed {
        Seed(self.seed.unwrap_or(DEFAULT_SEED))
    }
}

/// Rates of one coder on i.i.d. uniform sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub coder: Coder,
    pub length: usize,
    pub width: u8,
    pub trials: usize,
    pub seed: Seed,
    /// Ascending.
    pub rates: Vec<f64>,
}

/// Compresses `trials` uniform sequences, trial `i` seeded by `seed.derive(i)`.
pub fn mc_null_distribution(
    coder: Coder,
    length: usize,
    width: u8,
    trials: usize,
    seed: Seed,
) -> Result<NullDistribution> {
    if trials < MIN_TRIALS {
        return Err(Error::Size(format!("{trials} trials; at least {MIN_TRIALS} are required")));
    }
    if length == 0 {
        return Err(Error::Size("null sequences must be non-empty".into()));
    }
    let mut rates = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = uniform_symbols(length, width, seed.derive(i))?;
            Ok(compress(coder, &s)?.1.rate)
        })
        .collect::<Result<Vec<f64>>>()?;
    rates.sort_by(f64::total_cmp);
    Ok(NullDistribution { coder, length, width, trials, seed, rates })
}

/// `(1 + #{null ≥ observed}) / (trials + 1)`.
pub fn empirical_p_value(observed_rate: f64, null: &NullDistribution) -> f64 {
    let at_least = null.rates.iter().filter(|&&r| r >= observed_rate).count();
    (1 + at_least) as f64 / (null.rates.len() + 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "REGULAR")]
    Regular,
    #[serde(rename = "RANDOM-INCOMPRESSIBLE")]
    RandomIncompressible,
    #[serde(rename = "RANDOM-IN-PRACTICE")]
    RandomInPractice,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Regular => "REGULAR",
            Verdict::RandomIncompressible => "RANDOM-INCOMPRESSIBLE",
            Verdict::RandomInPractice => "RANDOM-IN-PRACTICE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    #[serde(flatten)]
    pub outcome: CompressionOutcome,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub transform: String,
    pub params: StageSpec,
    pub record: StageRecord,
    pub kind: String,
    pub n: usize,
    pub digest: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<OutcomeReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub source: String,
    pub kind: String,
    pub n: usize,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub coders: Vec<Coder>,
    pub trials: usize,
    pub alpha: f64,
    pub regular_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub input: InputSummary,
    pub stages: Vec<StageReport>,
    pub verdict: Verdict,
    pub annotations: Vec<String>,
    pub settings: Settings,
    pub seed: Seed,
    pub version: String,
}

pub const NOTE_UNDECIDABLE: &str =
    "no coder found significant structure; incompressibility in theory cannot be established by any coder";
pub const NOTE_CONSISTENT: &str = "consistent with incompressible: every coder has p >= 0.5";

/// Verdict for one compressed stage.
pub fn stage_verdict(outcomes: &[OutcomeReport], alpha: f64, regular_threshold: f64) -> (Verdict, Vec<String>) {
    let mut notes = Vec::new();
    let significant: Vec<&OutcomeReport> = outcomes.iter().filter(|o| o.p_value <= alpha).collect();
    if significant.iter().any(|o| o.outcome.rate >= regular_threshold) {
        return (Verdict::Regular, notes);
    }
    if let Some(best) = significant.iter().max_by(|a, b| a.outcome.rate.total_cmp(&b.outcome.rate)) {
        notes.push(format!(
            "weak structure detected: {} rate {:.4} (p = {:.4}) below the regular threshold {}",
            best.outcome.coder, best.outcome.rate, best.p_value, regular_threshold
        ));
    } else {
        notes.push(NOTE_UNDECIDABLE.to_string());
    }
    if !outcomes.is_empty() && outcomes.iter().all(|o| o.p_value >= 0.5) {
        notes.push(NOTE_CONSISTENT.to_string());
    }
    (Verdict::RandomInPractice, notes)
}

type NullKey = (Coder, usize, u8);

fn stage_error(stage: usize, spec: &StageSpec, source: Error) -> Error {
    Error::Stage { stage, transform: spec.transform.name().to_string(), source: Box::new(source) }
}

/// Runs every stage in order. Nulls are shared between stages with the same
/// coder, length and width.
pub fn run_pipeline(spec: &PipelineSpec, source: &str, data: StageData) -> Result<PipelineReport> {
    spec.validate()?;
    let seed = spec.seed();
    let input =
        InputSummary { source: source.to_string(), kind: data.kind().into(), n: data.len(), digest: data.digest() };
    let mut nulls: BTreeMap<NullKey, NullDistribution> = BTreeMap::new();
    let mut current = data;
    let mut stages = Vec::with_capacity(spec.stages.len());
    for (i, st) in spec.stages.iter().enumerate() {
        let (next, record) = st.transform.apply(&current).map_err(|e| stage_error(i, st, e))?;
        current = next;
        let mut report = StageReport {
            transform: st.transform.name().to_string(),
            params: st.clone(),
            record,
            kind: current.kind().into(),
            n: current.len(),
            digest: current.digest(),
            outcomes: Vec::new(),
            tests: Vec::new(),
            verdict: None,
            annotations: Vec::new(),
        };
        let compressible = matches!(current, StageData::Symbols(_) | StageData::Bits(_));
        if st.compress.unwrap_or(compressible) {
            let (symbols, length, width) = match &current {
                StageData::Symbols(s) => (Some(s), s.len(), s.width()),
                StageData::Bits(b) => (None, b.len(), 1),
                _ => return Err(stage_error(i, st, Error::Config(format!("cannot compress {} data", current.kind())))),
            };
            for &coder in &spec.coders {
                let outcome = match (symbols, &current) {
                    (Some(s), _) => compress(coder, s),
                    (None, StageData::Bits(b)) => compress_bits(coder, b),
                    _ => unreachable!(),
                }
                .map_err(|e| stage_error(i, st, e))?
                .1;
                let key = (coder, length, width);
                if let std::collections::btree_map::Entry::Vacant(e) = nulls.entry(key) {
                    let null_seed = seed.derive(((coder.id() as u64) << 40) ^ ((width as u64) << 32) ^ length as u64);
                    let null = mc_null_distribution(coder, length, width, spec.trials, null_seed)
                        .map_err(|e| stage_error(i, st, e))?;
                    e.insert(null);
                }
                let p_value = empirical_p_value(outcome.rate, &nulls[&key]);
                report.outcomes.push(OutcomeReport { outcome, p_value });
            }
            let (v, notes) = stage_verdict(&report.outcomes, spec.alpha, spec.regular_threshold);
            report.verdict = Some(v);
            report.annotations = notes;
        }
        if !st.tests.is_empty() {
            let reals = current.as_reals().ok_or_else(|| {
                stage_error(
                    i,
                    st,
                    Error::Config(format!("tests need real-valued data, stage yields {}", current.kind())),
                )
            })?;
            for t in &st.tests {
                report.tests.push(t.run(&reals).map_err(|e| stage_error(i, st, e))?);
            }
        }
        stages.push(report);
    }
    let last = stages
        .iter()
        .rev()
        .find(|s| s.verdict.is_some())
        .ok_or_else(|| Error::Config("no stage was compressed, so there is no verdict".into()))?;
    let verdict = last.verdict.expect("filtered");
    let annotations = last.annotations.clone();
    Ok(PipelineReport {
        input,
        stages,
        verdict,
        annotations,
        settings: Settings {
            coders: spec.coders.clone(),
            trials: spec.trials,
            alpha: spec.alpha,
            regular_threshold: spec.regular_threshold,
        },
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Re-runs the recorded transforms on `data` and checks every stage digest.
/// Discretizations are replayed from their records, the rest from their specs.
pub fn replay(report: &PipelineReport, data: &StageData) -> Result<()> {
    if data.digest() != report.input.digest {
        return Err(Error::Integrity("input differs from the one the report was built from".into()));
    }
    let mut current = data.clone();
    for (i, st) in report.stages.iter().enumerate() {
        current = match (&st.record.discretization, &current) {
            (Some(rec), StageData::Returns(r)) => {
                StageData::Symbols(rec.apply(r).map_err(|e| stage_error(i, &st.params, e))?)
            }
            _ => st.params.transform.apply(&current).map_err(|e| stage_error(i, &st.params, e))?.0,
        };
        if current.digest() != st.digest {
            return Err(Error::Integrity(format!("stage {i} ({}) does not replay", st.transform)));
        }
    }
    Ok(())
}

/// CSV table of one stage's outcomes: `algorithm,file_size_bits,rate`.
pub fn outcome_table(outcomes: &[OutcomeReport]) -> String {
    let mut out = String::from("algorithm,file_size_bits,rate\n");
    for o in outcomes {
        out.push_str(&format!("{},{},{}\n", o.outcome.coder, o.outcome.compressed_bits, o.outcome.rate));
    }
    out
}

/// One row of the counting-bound audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingRow {
    pub k: usize,
    /// Inputs whose compressed size is below `n - k` bits.
    pub count: u64,
    pub total: u64,
    pub fraction: f64,
    pub bound: f64,
}

impl CountingRow {
    pub fn holds(&self) -> bool {
        self.fraction <= self.bound
    }
}

/// Compresses all 2^n bit strings of length n and counts, for k = 0..=k_max,
/// how many shrink by more than k bits. Header bits count toward the size.
pub fn counting_bound_audit(coder: Coder, n: usize, k_max: usize) -> Result<Vec<CountingRow>> {
    if n == 0 || n > 16 {
        return Err(Error::Size(format!("exhaustive audit needs 1 <= n <= 16, got {n}")));
    }
    let total = 1u64 << n;
    let mut savings = Vec::with_capacity(total as usize);
    for v in 0..total {
        let bits: BitSequence = (0..n).rev().map(|i| v >> i & 1 == 1).collect();
        let (_, o) = compress_bits(coder, &bits)?;
        savings.push(n as i64 - o.compressed_bits as i64);
    }
    Ok((0..=k_max)
        .map(|k| {
            let count = savings.iter().filter(|&&s| s > k as i64).count() as u64;
            CountingRow { k, count, total, fraction: count as f64 / total as f64, bound: 0.5f64.powi(k as i32) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null_of(rates: Vec<f64>) -> NullDistribution {
        NullDistribution { coder: Coder::Cm, length: 1, width: 8, trials: rates.len(), seed: Seed(0), rates }
    }

    #[test]
    fn p_value_formula() {
        let null = null_of((0..100).map(|i| -0.01 + i as f64 * 1e-4).collect());
        assert_eq!(empirical_p_value(-1.0, &null), 1.0);
        assert!((empirical_p_value(0.5, &null) - 1.0 / 101.0).abs() < 1e-15);
        let median = null.rates[50];
        assert!((empirical_p_value(median, &null) - 51.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn verdict_rules() {
        let o = |rate: f64, p: f64| OutcomeReport {
            outcome: CompressionOutcome { coder: Coder::Cm, original_bits: 800, compressed_bits: 700, rate },
            p_value: p,
        };
        assert_eq!(stage_verdict(&[o(0.12, 0.005)], 0.05, 0.05).0, Verdict::Regular);
        let (v, notes) = stage_verdict(&[o(0.01, 0.005)], 0.05, 0.05);
        assert_eq!(v, Verdict::RandomInPractice);
        assert!(notes[0].starts_with("weak structure detected"));
        let (v, notes) = stage_verdict(&[o(-0.01, 0.7)], 0.05, 0.05);
        assert_eq!(v, Verdict::RandomInPractice);
        assert_eq!(notes, vec![NOTE_UNDECIDABLE.to_string(), NOTE_CONSISTENT.to_string()]);
        // raising the threshold cannot turn a random verdict into a regular one
        for th in [0.05, 0.1, 0.2, 0.5] {
            assert_ne!(stage_verdict(&[o(0.01, 0.005)], 0.05, th).0, Verdict::Regular);
        }
    }

    #[test]
    fn counting_audit_matches_enumeration() {
        let rows = counting_bound_audit(Coder::Lz, 8, 8).unwrap();
        assert_eq!(rows[0].total, 256);
        for r in &rows {
            assert!(r.holds());
        }
        assert!(counting_bound_audit(Coder::Cm, 17, 1).is_err());
    }

    #[test]
    fn toml_config() {
        let text = r#"
            coders = ["cm", "huffman"]
            trials = 100
            seed = 9

            [[stage]]
            transform = "log_returns"
            tests = [{ test = "ljung_box", lags = 5 }, { test = "adf" }]

            [[stage]]
            transform = "progressive"
            width = 8
        "#;
        let spec = PipelineSpec::from_toml(text).unwrap();
        assert_eq!(spec.coders, vec![Coder::Cm, Coder::Huffman]);
        assert_eq!(spec.stages[1].transform, Transform::Progressive { width: 8, window: 512 });
        assert_eq!(spec.stages[0].tests[0], TestSpec::LjungBox { lags: 5 });
        assert!(PipelineSpec::from_toml("trials = 10\n[[stage]]\ntransform = \"to_bits\"").is_err());
        assert!(PipelineSpec::from_toml("bogus = 1\n[[stage]]\ntransform = \"to_bits\"").is_err());
        assert!(PipelineSpec::from_toml("[[stage]]\ntransform = \"fft\"").is_err());
    }

    #[test]
    fn mismatched_stage_names_the_stage() {
        let spec = PipelineSpec::new(vec![StageSpec::new(Transform::ToBits)]);
        let err = run_pipeline(&spec, "t", StageData::Returns(ReturnSeries::new(vec![0.1, 0.2]).unwrap())).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: 0, .. }), "{err}");
    }
}

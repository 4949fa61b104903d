//! Seeded and deterministic sequence generators.
//!
//! Every random generator draws from a ChaCha8 stream keyed by a [`Seed`], so
//! identical parameters and seed give bit-identical output on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitcodec::{bits_to_symbols, decimal_digits_to_nibbles, duplicate_each_bit, BitSequence, SymbolSeries};
use crate::discretize::{normal_quantile_bounds, BoundsTable};
use crate::error::{Error, Result};
use crate::numeric::{normal_cdf, normal_quantile, open_unit};
use crate::pi::pi_digits;
use crate::series::{cumulative_sum, IntegerSeries, PriceSeries, ReturnSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent per-trial seed, so parallel trials need no shared stream.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// First `n` digits of the Thue–Morse sequence: bit i is the parity of popcount(i).
pub fn thue_morse(n: usize) -> BitSequence {
    (0..n as u64).map(|i| i.count_ones() % 2 == 1).collect()
}

/// First `n` digits of the binary Champernowne word 0 1 10 11 100 ...
pub fn champernowne_binary(n: usize) -> BitSequence {
    let mut out = BitSequence::new();
    let mut k = 0u64;
    while out.len() < n {
        let len = 64 - k.leading_zeros().min(63);
        for shift in (0..len).rev() {
            if out.len() == n {
                break;
            }
            out.push(k >> shift & 1 == 1);
        }
        k += 1;
    }
    out
}

/// First `n` decimals of π after the point.
pub fn pi_decimal_digits(n: usize) -> IntegerSeries {
    IntegerSeries::new(pi_digits(n).into_iter().map(i64::from).collect())
}

pub fn bernoulli_bits(n: usize, p_one: f64, seed: Seed) -> Result<BitSequence> {
    if !(0.0..=1.0).contains(&p_one) {
        return Err(Error::Range(format!("probability {p_one} not in [0, 1]")));
    }
    let mut rng = seed.rng();
    Ok((0..n).map(|_| open_unit(rng.next_u64()) < p_one).collect())
}

/// i.i.d. N(0,1) draws by inverse-CDF of 53-bit uniforms.
pub fn iid_gaussian_returns(n: usize, seed: Seed) -> ReturnSeries {
    let mut rng = seed.rng();
    let values = (0..n).map(|_| normal_quantile(open_unit(rng.next_u64()))).collect();
    ReturnSeries::new(values).expect("normal draws are finite")
}

/// i.i.d. uniform symbols over `0..2^width`, taking the top `width` bits of each word.
pub fn uniform_symbols(n: usize, width: u8, seed: Seed) -> Result<SymbolSeries> {
    if width == 0 || width > crate::bitcodec::MAX_WIDTH {
        return Err(Error::Range(format!("bad width {width}")));
    }
    let mut rng = seed.rng();
    let symbols = (0..n).map(|_| (rng.next_u64() >> (64 - width as u32)) as u32).collect();
    SymbolSeries::new(symbols, width)
}

/// Overwrites the lowest `cycle_bits` bits of symbol `t` with
/// `(t + phase) mod 2^cycle_bits`; upper bits are untouched.
pub fn embed_low_bit_cycle(symbols: &SymbolSeries, cycle_bits: u8, phase: u64) -> Result<SymbolSeries> {
    if cycle_bits == 0 || cycle_bits >= symbols.width() {
        return Err(Error::Range(format!("cycle of {cycle_bits} bits needs 1 <= bits < width {}", symbols.width())));
    }
    let period = 1u64 << cycle_bits;
    let mask = (period - 1) as u32;
    let out = symbols
        .symbols()
        .iter()
        .enumerate()
        .map(|(t, &s)| (s & !mask) | ((t as u64 + phase) % period) as u32)
        .collect();
    SymbolSeries::new(out, symbols.width())
}

/// Draws one real per symbol inside that symbol's bin, so re-binning with the
/// same table returns the input exactly. Interior bins are sampled uniformly;
/// an infinite end bin is sampled from the standard normal restricted to it.
pub fn symbols_to_returns(symbols: &SymbolSeries, bounds: &BoundsTable, seed: Seed) -> Result<ReturnSeries> {
    if symbols.width() != bounds.width() {
        return Err(Error::Range(format!(
            "symbols of width {} against a width-{} table",
            symbols.width(),
            bounds.width()
        )));
    }
    let edges = bounds.bounds();
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(symbols.len());
    for &s in symbols.symbols() {
        let (lo, hi) = (edges[s as usize], edges[s as usize + 1]);
        let u = open_unit(rng.next_u64());
        let mut x = if lo.is_infinite() || hi.is_infinite() {
            let plo = if lo.is_infinite() { 0.0 } else { normal_cdf(lo) };
            let phi = if hi.is_infinite() { 1.0 } else { normal_cdf(hi) };
            normal_quantile(plo + (phi - plo) * u)
        } else {
            lo + (hi - lo) * u
        };
        // rounding can land on an edge; pull back inside [lo, hi)
        if x >= hi {
            x = hi.next_down();
        }
        if x < lo {
            x = lo;
        }
        if x == f64::NEG_INFINITY {
            x = f64::MIN;
        }
        out.push(x);
    }
    ReturnSeries::new(out)
}

/// Prices built by running the integer worked example backwards, along with
/// the random bit source it hides.
#[derive(Debug, Clone)]
pub struct ToyPrices {
    pub prices: PriceSeries,
    pub source_bits: BitSequence,
}

pub const TOY_INITIAL_PRICE: i64 = 1000;
pub const TOY_OFFSET: i64 = 32;

/// Random bits, each doubled, cut into 6-bit symbols, shifted by −32 and
/// summed from 1000.
pub fn toy_price_series(n: usize, seed: Seed) -> Result<ToyPrices> {
    if n == 0 {
        return Err(Error::Size("toy series needs at least one price".into()));
    }
    let source_bits = bernoulli_bits(3 * (n - 1), 0.5, seed)?;
    let doubled = duplicate_each_bit(&source_bits, 2)?;
    let symbols = bits_to_symbols(&doubled, 6)?;
    let increments = IntegerSeries::new(symbols.symbols().iter().map(|&s| s as i64 - TOY_OFFSET).collect());
    let levels = cumulative_sum(TOY_INITIAL_PRICE, &increments);
    let prices = PriceSeries::new(levels.values().iter().map(|&v| v as f64).collect())?;
    Ok(ToyPrices { prices, source_bits })
}

/// π decimals → 4-bit nibbles → bytes. `digits` must be even.
pub fn pi_symbols(digits: usize) -> Result<SymbolSeries> {
    if !digits.is_multiple_of(2) {
        return Err(Error::Size(format!("{digits} decimals do not fill whole bytes")));
    }
    let bits = decimal_digits_to_nibbles(&pi_decimal_digits(digits))?;
    bits_to_symbols(&bits, 8)
}

/// π bytes mapped to returns through the width-8 normal-quantile table.
pub fn pi_returns(digits: usize, seed: Seed) -> Result<ReturnSeries> {
    symbols_to_returns(&pi_symbols(digits)?, &normal_quantile_bounds(8)?, seed)
}

/// Uniform bytes with an embedded low-bit cycle, mapped to normal returns.
pub fn hidden_cycle_returns(n: usize, cycle_bits: u8, seed: Seed) -> Result<(SymbolSeries, ReturnSeries)> {
    let text = uniform_symbols(n, 8, seed.derive(0))?;
    let biased = embed_low_bit_cycle(&text, cycle_bits, 0)?;
    let chron = symbols_to_returns(&biased, &normal_quantile_bounds(8)?, seed.derive(1))?;
    Ok((biased, chron))
}

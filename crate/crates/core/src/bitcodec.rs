//! Reversible packing between integer symbols, bit strings and bytes.
//!
//! Bits are always most-significant first, both inside a symbol and inside a
//! byte: 60 at width 6 is `111100`, and the bit string `00010100` is the byte 20.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::IntegerSeries;

/// An ordered string of binary digits, not necessarily byte aligned.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct BitSequence {
    bits: Vec<bool>,
}

impl BitSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Packs MSB-first into bytes; the last byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i))))
            .collect()
    }

    /// The first `len` bits of `bytes`, MSB-first.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if len > bytes.len() * 8 {
            return Err(Error::Size(format!("{len} bits requested from {} bytes", bytes.len())));
        }
        let bits = (0..len).map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1).collect();
        Ok(Self { bits })
    }
}

impl FromIterator<bool> for BitSequence {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self { bits: iter.into_iter().collect() }
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses a string of `0`/`1`; spaces and underscores are ignored.
impl FromStr for BitSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse { line: 1, msg: format!("invalid bit {other:?} at position {i}") }),
            })
            .collect()
    }
}

/// Integers over a power-of-two alphabet `0..2^width`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolSeries {
    symbols: Vec<u32>,
    width: u8,
}

pub const MAX_WIDTH: u8 = 24;

fn check_width(width: u8) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::Range(format!("symbol width must be in 1..={MAX_WIDTH}, got {width}")));
    }
    Ok(())
}

impl SymbolSeries {
    pub fn new(symbols: Vec<u32>, width: u8) -> Result<Self> {
        check_width(width)?;
        let limit = 1u32 << width;
        if let Some(i) = symbols.iter().position(|&s| s >= limit) {
            return Err(Error::Range(format!("symbol {} at index {i} does not fit in {width} bits", symbols[i])));
        }
        Ok(Self { symbols, width })
    }

    /// Width-8 series straight from bytes.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self { symbols: bytes.iter().map(|&b| b as u32).collect(), width: 8 }
    }

    /// Range-checked conversion from an integer series.
    pub fn from_integers(series: &IntegerSeries, width: u8) -> Result<Self> {
        check_width(width)?;
        let limit = 1i64 << width;
        let mut symbols = Vec::with_capacity(series.len());
        for (i, &v) in series.values().iter().enumerate() {
            if !(0..limit).contains(&v) {
                return Err(Error::Range(format!("value {v} at index {i} does not fit in {width} bits")));
            }
            symbols.push(v as u32);
        }
        Ok(Self { symbols, width })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn alphabet_size(&self) -> usize {
        1usize << self.width
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn bit_len(&self) -> u64 {
        self.symbols.len() as u64 * self.width as u64
    }

    pub fn to_integers(&self) -> IntegerSeries {
        IntegerSeries::new(self.symbols.iter().map(|&s| s as i64).collect())
    }

    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.alphabet_size()];
        for &s in &self.symbols {
            h[s as usize] += 1;
        }
        h
    }

    /// Byte stream fed to the coders: raw bytes at width 8, otherwise the
    /// MSB-first bit packing padded with zeros.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        if self.width == 8 {
            self.symbols.iter().map(|&s| s as u8).collect()
        } else {
            symbols_to_bits(self).to_bytes()
        }
    }

    /// Serializes to the on-disk format: raw bytes at width 8, otherwise a
    /// two-byte header (`0xA` magic nibble | pad length, width) followed by
    /// the zero-padded bit packing.
    pub fn to_file_bytes(&self) -> Vec<u8> {
        if self.width == 8 {
            return self.to_packed_bytes();
        }
        let bits = self.bit_len();
        let pad = ((8 - bits % 8) % 8) as u8;
        let mut out = Vec::with_capacity(2 + bits.div_ceil(8) as usize);
        out.push(FILE_MAGIC << 4 | pad);
        out.push(self.width);
        out.extend(symbols_to_bits(self).to_bytes());
        out
    }

    /// Inverse of [`to_file_bytes`](Self::to_file_bytes). Width 8 files carry
    /// no header, so the caller states the expected width.
    pub fn from_file_bytes(bytes: &[u8], width: u8) -> Result<Self> {
        check_width(width)?;
        if width == 8 {
            return Ok(Self::from_bytes(bytes));
        }
        if bytes.len() < 2 {
            return Err(Error::Integrity("symbol file shorter than its header".into()));
        }
        if bytes[0] >> 4 != FILE_MAGIC || bytes[0] & 0x08 != 0 {
            return Err(Error::Integrity("bad symbol file magic".into()));
        }
        let pad = (bytes[0] & 0x07) as usize;
        if bytes[1] != width {
            return Err(Error::Integrity(format!("file holds width {} symbols, expected {width}", bytes[1])));
        }
        let payload = &bytes[2..];
        let total = payload.len() * 8;
        if pad > total || !(total - pad).is_multiple_of(width as usize) || (pad > 0 && payload.is_empty()) {
            return Err(Error::Integrity("symbol file length inconsistent with header".into()));
        }
        let bits = BitSequence::from_bytes(payload, total - pad)?;
        if payload.last().is_some_and(|&last| pad > 0 && last & ((1u8 << pad) - 1) != 0) {
            return Err(Error::Integrity("non-zero padding bits".into()));
        }
        bits_to_symbols(&bits, width)
    }
}

const FILE_MAGIC: u8 = 0xA;

/// Concatenates each symbol's `width`-bit big-endian expansion.
pub fn symbols_to_bits(symbols: &SymbolSeries) -> BitSequence {
    let w = symbols.width as u32;
    let mut bits = Vec::with_capacity(symbols.len() * w as usize);
    for &s in &symbols.symbols {
        for shift in (0..w).rev() {
            bits.push(s >> shift & 1 == 1);
        }
    }
    BitSequence { bits }
}

/// Cuts a bit string into `width`-bit big-endian symbols.
pub fn bits_to_symbols(bits: &BitSequence, width: u8) -> Result<SymbolSeries> {
    check_width(width)?;
    if !bits.len().is_multiple_of(width as usize) {
        return Err(Error::Size(format!("{} bits do not split into {width}-bit symbols", bits.len())));
    }
    let symbols =
        bits.bits.chunks(width as usize).map(|c| c.iter().fold(0u32, |acc, &b| acc << 1 | b as u32)).collect();
    Ok(SymbolSeries { symbols, width })
}

/// Each decimal digit becomes its 4-bit binary code.
pub fn decimal_digits_to_nibbles(digits: &IntegerSeries) -> Result<BitSequence> {
    let mut bits = Vec::with_capacity(digits.len() * 4);
    for (i, &d) in digits.values().iter().enumerate() {
        if !(0..=9).contains(&d) {
            return Err(Error::Range(format!("digit {d} at index {i} is not in 0..=9")));
        }
        for shift in (0..4).rev() {
            bits.push(d >> shift & 1 == 1);
        }
    }
    Ok(BitSequence { bits })
}

/// Bits at positions `offset, offset + k, offset + 2k, ...`.
pub fn take_every_kth(bits: &BitSequence, k: usize, offset: usize) -> Result<BitSequence> {
    if k == 0 || offset >= k {
        return Err(Error::Range(format!("need k >= 1 and offset < k, got k={k} offset={offset}")));
    }
    Ok(bits.bits.iter().skip(offset).step_by(k).copied().collect())
}

/// Repeats every bit `k` times.
pub fn duplicate_each_bit(bits: &BitSequence, k: usize) -> Result<BitSequence> {
    if k == 0 {
        return Err(Error::Range("duplication factor must be >= 1".into()));
    }
    Ok(bits.bits.iter().flat_map(|&b| std::iter::repeat_n(b, k)).collect())
}

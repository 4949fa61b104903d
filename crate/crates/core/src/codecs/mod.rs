//! Lossless coders and the compression-rate measurement.
//!
//! Four coders cover the classic families: static Huffman (symbol
//! frequencies), run-length, LZSS (dictionary) and context mixing
//! (prediction). All sizes reported here count the complete on-disk blob,
//! headers included, so an incompressible input shows a negative rate.

mod bitio;
pub mod cm;
pub mod huffman;
pub mod lz;
pub mod rle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitcodec::{BitSequence, SymbolSeries};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"KREP";
pub const HEADER_LEN: usize = 4 + 1 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coder {
    Huffman,
    Rle,
    Lz,
    Cm,
}

impl Coder {
    pub const ALL: [Coder; 4] = [Coder::Huffman, Coder::Rle, Coder::Lz, Coder::Cm];

    pub fn id(self) -> u8 {
        match self {
            Coder::Huffman => 1,
            Coder::Rle => 2,
            Coder::Lz => 3,
            Coder::Cm => 4,
        }
    }

    pub fn from_id(id: u8) -> Option<Coder> {
        Coder::ALL.into_iter().find(|c| c.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Coder::Huffman => "huffman",
            Coder::Rle => "rle",
            Coder::Lz => "lz",
            Coder::Cm => "cm",
        }
    }
}

impl fmt::Display for Coder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Coder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Coder::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown coder `{s}` (expected huffman, rle, lz or cm)")))
    }
}

/// A self-describing compressed stream: magic, coder id, original length in
/// bits (little-endian u64), payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlob {
    pub coder: Coder,
    pub original_bits: u64,
    pub payload: Vec<u8>,
}

impl CompressedBlob {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(self.coder.id());
        out.extend_from_slice(&self.original_bits.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Integrity(format!("blob of {} bytes is shorter than its header", bytes.len())));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::Integrity("bad magic".into()));
        }
        let coder =
            Coder::from_id(bytes[4]).ok_or_else(|| Error::Integrity(format!("unknown coder id {}", bytes[4])))?;
        let original_bits = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes"));
        Ok(CompressedBlob { coder, original_bits, payload: bytes[HEADER_LEN..].to_vec() })
    }

    /// Size of the serialized blob in bits.
    pub fn size_bits(&self) -> u64 {
        8 * (HEADER_LEN + self.payload.len()) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionOutcome {
    pub coder: Coder,
    pub original_bits: u64,
    pub compressed_bits: u64,
    pub rate: f64,
}

/// `(original - compressed) / original`; negative when the output grew.
pub fn compression_rate(original_bits: u64, compressed_bits: u64) -> Result<f64> {
    if original_bits == 0 {
        return Err(Error::Domain { index: 0, msg: "compression rate of an empty input".into() });
    }
    Ok((original_bits as f64 - compressed_bits as f64) / original_bits as f64)
}

fn byte_len(bits: u64) -> usize {
    bits.div_ceil(8) as usize
}

/// Compresses the first `original_bits` bits of `data` (MSB first; bits past
/// that count must be zero).
pub fn compress_bytes(coder: Coder, data: &[u8], original_bits: u64) -> Result<(CompressedBlob, CompressionOutcome)> {
    if byte_len(original_bits) != data.len() {
        return Err(Error::Size(format!("{original_bits} bits do not fill {} bytes", data.len())));
    }
    let payload = match coder {
        Coder::Huffman => huffman::encode(data)?,
        Coder::Rle => rle::encode(data),
        Coder::Lz => lz::encode(data),
        Coder::Cm => cm::encode(data),
    };
    let blob = CompressedBlob { coder, original_bits, payload };
    let compressed_bits = blob.size_bits();
    let outcome = CompressionOutcome {
        coder,
        original_bits,
        compressed_bits,
        rate: compression_rate(original_bits, compressed_bits)?,
    };
    Ok((blob, outcome))
}

/// Compresses a symbol series in its packed form (one byte per symbol at width 8).
pub fn compress(coder: Coder, symbols: &SymbolSeries) -> Result<(CompressedBlob, CompressionOutcome)> {
    compress_bytes(coder, &symbols.to_packed_bytes(), symbols.bit_len())
}

pub fn compress_bits(coder: Coder, bits: &BitSequence) -> Result<(CompressedBlob, CompressionOutcome)> {
    compress_bytes(coder, &bits.to_bytes(), bits.len() as u64)
}

pub fn decompress(blob: &CompressedBlob) -> Result<Vec<u8>> {
    let len = byte_len(blob.original_bits);
    let data = match blob.coder {
        Coder::Huffman => huffman::decode(&blob.payload, len)?,
        Coder::Rle => rle::decode(&blob.payload, len)?,
        Coder::Lz => lz::decode(&blob.payload, len)?,
        Coder::Cm => cm::decode(&blob.payload, len)?,
    };
    debug_assert_eq!(data.len(), len);
    let pad = (8 - blob.original_bits % 8) % 8;
    if pad > 0 && data[len - 1] & ((1u8 << pad) - 1) != 0 {
        return Err(Error::Integrity("nonzero padding after the last bit".into()));
    }
    Ok(data)
}

pub fn decompress_bits(blob: &CompressedBlob) -> Result<BitSequence> {
    BitSequence::from_bytes(&decompress(blob)?, blob.original_bits as usize)
}

pub fn decompress_symbols(blob: &CompressedBlob, width: u8) -> Result<SymbolSeries> {
    if width == 0 || !blob.original_bits.is_multiple_of(width as u64) {
        return Err(Error::Size(format!("{} bits are not whole {width}-bit symbols", blob.original_bits)));
    }
    let bits = decompress_bits(blob)?;
    crate::bitcodec::bits_to_symbols(&bits, width)
}

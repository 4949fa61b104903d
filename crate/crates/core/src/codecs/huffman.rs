//! Static canonical Huffman coding over bytes.
//!
//! Payload: 128 bytes of 4-bit code lengths (symbol 0 in the high nibble of
//! the first byte, 0 = unused), then the MSB-first code stream padded with
//! zero bits. Lengths are limited to 15 by package-merge.

use super::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};

pub const MAX_CODE_LEN: u8 = 15;
const HEADER_LEN: usize = 128;

#[derive(Clone)]
struct Item {
    weight: u64,
    symbols: Vec<u8>,
}

/// Optimal code lengths under a maximum length (package-merge).
pub(crate) fn limited_code_lengths(freqs: &[u64; 256], max_len: u8) -> [u8; 256] {
    let mut lengths = [0u8; 256];
    let mut leaves: Vec<Item> =
        (0..256).filter(|&s| freqs[s] > 0).map(|s| Item { weight: freqs[s], symbols: vec![s as u8] }).collect();
    match leaves.len() {
        0 => return lengths,
        1 => {
            lengths[leaves[0].symbols[0] as usize] = 1;
            return lengths;
        }
        _ => {}
    }
    leaves.sort_by(|a, b| a.weight.cmp(&b.weight).then(a.symbols[0].cmp(&b.symbols[0])));
    let mut list = leaves.clone();
    for _ in 1..max_len {
        let packages = list.chunks_exact(2).map(|pair| Item {
            weight: pair[0].weight + pair[1].weight,
            symbols: pair[0].symbols.iter().chain(&pair[1].symbols).copied().collect(),
        });
        let mut merged = Vec::with_capacity(leaves.len() * 2);
        let mut pk = packages.peekable();
        let mut lv = leaves.iter().peekable();
        loop {
            match (lv.peek(), pk.peek()) {
                (Some(l), Some(p)) => {
                    if l.weight <= p.weight {
                        merged.push((*l).clone());
                        lv.next();
                    } else {
                        merged.push(pk.next().unwrap());
                    }
                }
                (Some(_), None) => merged.push(lv.next().unwrap().clone()),
                (None, Some(_)) => merged.push(pk.next().unwrap()),
                (None, None) => break,
            }
        }
        list = merged;
    }
    for item in list.iter().take(2 * leaves.len() - 2) {
        for &s in &item.symbols {
            lengths[s as usize] += 1;
        }
    }
    lengths
}

/// Canonical codes: symbols ordered by (length, value) get consecutive codes.
fn canonical_codes(lengths: &[u8; 256]) -> [u32; 256] {
    let mut codes = [0u32; 256];
    let mut order: Vec<usize> = (0..256).filter(|&s| lengths[s] > 0).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut code = 0u32;
    let mut prev_len = 0u8;
    for (i, &s) in order.iter().enumerate() {
        if i > 0 {
            code += 1;
        }
        code <<= lengths[s] - prev_len;
        prev_len = lengths[s];
        codes[s] = code;
    }
    codes
}

pub fn encode(data: &[u8]) -> Result<Vec<u8>> {
    if data.is_empty() {
        return Err(Error::Size("huffman coding needs a non-empty input".into()));
    }
    let mut freqs = [0u64; 256];
    for &b in data {
        freqs[b as usize] += 1;
    }
    let lengths = limited_code_lengths(&freqs, MAX_CODE_LEN);
    let codes = canonical_codes(&lengths);
    let mut out = Vec::with_capacity(HEADER_LEN + data.len());
    for pair in lengths.chunks(2) {
        out.push(pair[0] << 4 | pair[1]);
    }
    let mut w = BitWriter::new();
    for &b in data {
        w.put(codes[b as usize], lengths[b as usize]);
    }
    out.extend(w.finish());
    Ok(out)
}

pub fn decode(payload: &[u8], len: usize) -> Result<Vec<u8>> {
    if payload.len() < HEADER_LEN {
        return Err(Error::Integrity("huffman header truncated".into()));
    }
    let mut lengths = [0u8; 256];
    for (i, &b) in payload[..HEADER_LEN].iter().enumerate() {
        lengths[2 * i] = b >> 4;
        lengths[2 * i + 1] = b & 15;
    }
    let used = lengths.iter().filter(|&&l| l > 0).count();
    if used == 0 {
        return Err(Error::Integrity("huffman table is empty".into()));
    }
    // Kraft sum in units of 2^-15: complete code, or a lone 1-bit code
    let kraft: u32 = lengths.iter().filter(|&&l| l > 0).map(|&l| 1u32 << (MAX_CODE_LEN - l)).sum();
    let full = 1u32 << MAX_CODE_LEN;
    if !(kraft == full || (used == 1 && kraft == full / 2)) {
        return Err(Error::Integrity("huffman code lengths are not a complete prefix code".into()));
    }
    // canonical decoding tables
    let mut count = [0u32; MAX_CODE_LEN as usize + 1];
    for &l in lengths.iter() {
        count[l as usize] += 1;
    }
    count[0] = 0;
    let mut sorted: Vec<u8> = (0..=255u8).filter(|&s| lengths[s as usize] > 0).collect();
    sorted.sort_by_key(|&s| (lengths[s as usize], s));
    let mut reader = BitReader::new(&payload[HEADER_LEN..]);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let mut code = 0u32;
        let mut first = 0u32;
        let mut index = 0u32;
        let mut found = None;
        for &c in &count[1..=MAX_CODE_LEN as usize] {
            code |= reader.bit()?;
            if code < first + c {
                found = Some(sorted[(index + code - first) as usize]);
                break;
            }
            index += c;
            first = (first + c) << 1;
            code <<= 1;
        }
        match found {
            Some(s) => out.push(s),
            None => return Err(Error::Integrity("invalid huffman code".into())),
        }
    }
    reader.expect_end()?;
    Ok(out)
}

//! Run-length coding with `(symbol, count)` records, counts as 7-bit varints.
//!
//! The first payload byte selects the mode: [`MODE_RUNS`] for run records,
//! [`MODE_STORED`] for a verbatim copy, used whenever runs would not be
//! shorter. The worst case therefore costs one byte over the raw input.

use crate::error::{Error, Result};

pub const MODE_STORED: u8 = 0;
pub const MODE_RUNS: u8 = 1;

pub(crate) fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8 & 0x7f) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

pub(crate) fn get_varint(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *bytes.get(*pos).ok_or_else(|| Error::Integrity("varint truncated".into()))?;
        *pos += 1;
        // reject overlong encodings so every count has one representation
        if shift > 0 && b == 0 {
            return Err(Error::Integrity("overlong varint".into()));
        }
        v |= ((b & 0x7f) as u64)
            .checked_shl(shift)
            .filter(|x| x >> shift == (b & 0x7f) as u64)
            .ok_or_else(|| Error::Integrity("varint overflow".into()))?;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(Error::Integrity("varint too long".into()))
}

fn runs(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < data.len() {
        let s = data[i];
        let mut j = i + 1;
        while j < data.len() && data[j] == s {
            j += 1;
        }
        out.push(s);
        put_varint(&mut out, (j - i) as u64);
        i = j;
    }
    out
}

pub fn encode(data: &[u8]) -> Vec<u8> {
    let r = runs(data);
    let mut out = Vec::with_capacity(1 + r.len().min(data.len()));
    if r.len() < data.len() {
        out.push(MODE_RUNS);
        out.extend(r);
    } else {
        out.push(MODE_STORED);
        out.extend_from_slice(data);
    }
    out
}

pub fn decode(payload: &[u8], len: usize) -> Result<Vec<u8>> {
    let (&mode, body) = payload.split_first().ok_or_else(|| Error::Integrity("empty rle payload".into()))?;
    match mode {
        MODE_STORED => {
            if body.len() != len {
                return Err(Error::Integrity(format!("stored block holds {} bytes, expected {len}", body.len())));
            }
            Ok(body.to_vec())
        }
        MODE_RUNS => {
            let mut out = Vec::with_capacity(len);
            let mut pos = 0;
            let mut prev: Option<u8> = None;
            while pos < body.len() {
                let s = body[pos];
                pos += 1;
                let count = get_varint(body, &mut pos)?;
                if count == 0 || prev == Some(s) {
                    return Err(Error::Integrity("non-canonical run record".into()));
                }
                if count > (len - out.len()) as u64 {
                    return Err(Error::Integrity("runs exceed the declared length".into()));
                }
                out.extend(std::iter::repeat_n(s, count as usize));
                prev = Some(s);
            }
            if out.len() != len {
                return Err(Error::Integrity(format!("runs decode to {} bytes, expected {len}", out.len())));
            }
            Ok(out)
        }
        m => Err(Error::Integrity(format!("unknown rle mode {m}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_run() {
        let data = vec![9u8; 32_000];
        let enc = encode(&data);
        assert_eq!(enc[0], MODE_RUNS);
        assert_eq!(enc.len(), 1 + 1 + 3);
        assert_eq!(decode(&enc, data.len()).unwrap(), data);
    }

    #[test]
    fn incompressible_falls_back_to_stored() {
        let data: Vec<u8> = (0..=255).collect();
        let enc = encode(&data);
        assert_eq!(enc[0], MODE_STORED);
        assert_eq!(enc.len(), data.len() + 1);
        assert_eq!(decode(&enc, data.len()).unwrap(), data);
    }

    #[test]
    fn varints() {
        for v in [0u64, 1, 127, 128, 300, 1 << 40, u64::MAX] {
            let mut buf = Vec::new();
            put_varint(&mut buf, v);
            let mut pos = 0;
            assert_eq!(get_varint(&buf, &mut pos).unwrap(), v);
            assert_eq!(pos, buf.len());
        }
        let mut pos = 0;
        assert!(get_varint(&[0x80, 0x00], &mut pos).is_err());
    }

    #[test]
    fn corrupted() {
        let enc = encode(&[1, 1, 1, 2, 2, 2, 2, 2]);
        assert!(decode(&enc, 7).is_err());
        assert!(decode(&enc[..enc.len() - 1], 8).is_err());
        assert!(decode(&[7, 1], 1).is_err());
        assert!(decode(&[], 0).is_err());
        // two adjacent records for the same symbol
        assert!(decode(&[MODE_RUNS, 5, 1, 5, 1], 2).is_err());
    }
}

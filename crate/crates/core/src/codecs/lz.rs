//! LZSS dictionary coder: a 64 KiB sliding window, greedy hash-chain
//! matching, and tokens grouped eight at a time behind a flag byte
//! (MSB first, 1 = match). A match is a big-endian `offset - 1` (u16) and
//! `length - MIN_MATCH` (u8). As with the run-length coder the first payload
//! byte selects LZ tokens or a stored copy, whichever is shorter.

use crate::error::{Error, Result};

pub const MODE_STORED: u8 = 0;
pub const MODE_LZ: u8 = 1;
pub const WINDOW: usize = 1 << 16;
pub const MIN_MATCH: usize = 3;
pub const MAX_MATCH: usize = MIN_MATCH + 255;
const HASH_BITS: u32 = 15;
const MAX_CHAIN: usize = 128;
const NIL: usize = usize::MAX;

fn hash3(d: &[u8]) -> usize {
    let v = (d[0] as u32) << 16 | (d[1] as u32) << 8 | d[2] as u32;
    (v.wrapping_mul(0x9E37_79B1) >> (32 - HASH_BITS)) as usize
}

fn tokens(data: &[u8]) -> Vec<u8> {
    let n = data.len();
    let mut head = vec![NIL; 1 << HASH_BITS];
    let mut prev = vec![NIL; n];
    let mut out = Vec::new();
    let mut flag_pos = 0;
    let mut flag_count = 8;
    let insert = |pos: usize, head: &mut Vec<usize>, prev: &mut Vec<usize>| {
        if pos + MIN_MATCH <= n {
            let h = hash3(&data[pos..]);
            prev[pos] = head[h];
            head[h] = pos;
        }
    };
    let mut i = 0;
    while i < n {
        if flag_count == 8 {
            flag_pos = out.len();
            out.push(0);
            flag_count = 0;
        }
        let mut best_len = 0;
        let mut best_off = 0;
        if i + MIN_MATCH <= n {
            let mut cand = head[hash3(&data[i..])];
            let limit = (n - i).min(MAX_MATCH);
            let mut chain = 0;
            while cand != NIL && i - cand <= WINDOW && chain < MAX_CHAIN {
                let mut l = 0;
                while l < limit && data[cand + l] == data[i + l] {
                    l += 1;
                }
                if l > best_len {
                    best_len = l;
                    best_off = i - cand;
                    if l == limit {
                        break;
                    }
                }
                cand = prev[cand];
                chain += 1;
            }
        }
        if best_len >= MIN_MATCH {
            out[flag_pos] |= 0x80 >> flag_count;
            out.extend_from_slice(&((best_off - 1) as u16).to_be_bytes());
            out.push((best_len - MIN_MATCH) as u8);
            for p in i..i + best_len {
                insert(p, &mut head, &mut prev);
            }
            i += best_len;
        } else {
            out.push(data[i]);
            insert(i, &mut head, &mut prev);
            i += 1;
        }
        flag_count += 1;
    }
    out
}

pub fn encode(data: &[u8]) -> Vec<u8> {
    let t = tokens(data);
    let mut out = Vec::with_capacity(1 + t.len().min(data.len()));
    if t.len() < data.len() {
        out.push(MODE_LZ);
        out.extend(t);
    } else {
        out.push(MODE_STORED);
        out.extend_from_slice(data);
    }
    out
}

fn truncated() -> Error {
    Error::Integrity("lz token stream truncated".into())
}

pub fn decode(payload: &[u8], len: usize) -> Result<Vec<u8>> {
    let (&mode, body) = payload.split_first().ok_or_else(|| Error::Integrity("empty lz payload".into()))?;
    match mode {
        MODE_STORED => {
            if body.len() != len {
                return Err(Error::Integrity(format!("stored block holds {} bytes, expected {len}", body.len())));
            }
            Ok(body.to_vec())
        }
        MODE_LZ => {
            let mut out = Vec::with_capacity(len);
            let mut pos = 0;
            while out.len() < len {
                let flags = *body.get(pos).ok_or_else(truncated)?;
                pos += 1;
                for k in 0..8 {
                    if out.len() == len {
                        if flags & (0xff >> k) != 0 {
                            return Err(Error::Integrity("unused lz flag bits set".into()));
                        }
                        break;
                    }
                    if flags & (0x80 >> k) != 0 {
                        let t = body.get(pos..pos + 3).ok_or_else(truncated)?;
                        pos += 3;
                        let off = u16::from_be_bytes([t[0], t[1]]) as usize + 1;
                        let l = t[2] as usize + MIN_MATCH;
                        if off > out.len() || l > len - out.len() {
                            return Err(Error::Integrity("lz match outside the window".into()));
                        }
                        let start = out.len() - off;
                        for j in 0..l {
                            let b = out[start + j];
                            out.push(b);
                        }
                    } else {
                        out.push(*body.get(pos).ok_or_else(truncated)?);
                        pos += 1;
                    }
                }
            }
            if pos != body.len() {
                return Err(Error::Integrity("trailing bytes after lz tokens".into()));
            }
            Ok(out)
        }
        m => Err(Error::Integrity(format!("unknown lz mode {m}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_block_collapses() {
        let block: Vec<u8> = (0..64u8).map(|i| i.wrapping_mul(37) ^ 0x5a).collect();
        let data: Vec<u8> = block.iter().cycle().take(64 * 500).copied().collect();
        let enc = encode(&data);
        assert_eq!(enc[0], MODE_LZ);
        assert!(enc.len() < data.len() / 20, "len={}", enc.len());
        assert_eq!(decode(&enc, data.len()).unwrap(), data);
    }

    #[test]
    fn tiny_inputs() {
        for data in [vec![], vec![1u8], vec![1, 2], vec![3, 3, 3, 3]] {
            assert_eq!(decode(&encode(&data), data.len()).unwrap(), data);
        }
    }

    #[test]
    fn overlapping_match() {
        let data = vec![b'a'; 1000];
        let enc = encode(&data);
        assert!(enc.len() < 30);
        assert_eq!(decode(&enc, data.len()).unwrap(), data);
    }

    #[test]
    fn corrupted() {
        let data: Vec<u8> = b"abcabcabcabcabcabcxyz".to_vec();
        let enc = encode(&data);
        assert!(decode(&enc[..enc.len() - 1], data.len()).is_err());
        let mut longer = enc.clone();
        longer.push(0);
        assert!(decode(&longer, data.len()).is_err());
        // a match reaching before the start of output
        assert!(decode(&[MODE_LZ, 0x80, 0, 5, 0], 3).is_err());
        assert!(decode(&[9], 0).is_err());
    }
}

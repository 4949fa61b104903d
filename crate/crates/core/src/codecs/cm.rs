//! Context-mixing coder: a binary arithmetic coder driven by a logistic mix of
//! adaptive bit predictors over several byte contexts.
//!
//! Bytes are coded MSB first. Each bit is predicted by counters selected by
//! the partial byte `c0` and, depending on the input, by the previous one to
//! three bytes, a sparse previous-byte context that ignores the partial byte,
//! and coarse magnitude buckets of recent bytes. A small integer network
//! mixes the stretched predictions, with a weight set per bit position.
//! Everything is integer arithmetic, so the decoder replays the encoder
//! exactly on any platform.

use crate::error::{Error, Result};

const SQUASH_KNOTS: [i32; 33] = [
    1, 2, 3, 6, 10, 16, 27, 45, 73, 120, 194, 310, 488, 747, 1101, 1546, 2047, 2549, 2994, 3348, 3607, 3785, 3901,
    3975, 4022, 4050, 4068, 4079, 4085, 4089, 4092, 4093, 4094,
];

/// Logistic function: stretch domain (±2047, 256 per nat) to a 12-bit probability.
fn squash(d: i32) -> i32 {
    if d > 2047 {
        return 4095;
    }
    if d < -2047 {
        return 1;
    }
    let w = d & 127;
    let i = ((d >> 7) + 16) as usize;
    (SQUASH_KNOTS[i] * (128 - w) + SQUASH_KNOTS[i + 1] * w + 64) >> 7
}

fn stretch_table() -> Vec<i16> {
    let mut t = vec![0i16; 4096];
    let mut next = 0usize;
    for x in -2047..=2047 {
        let v = squash(x) as usize;
        for slot in t.iter_mut().take(v + 1).skip(next) {
            *slot = x as i16;
        }
        next = next.max(v + 1);
    }
    for slot in t.iter_mut().skip(next) {
        *slot = 2047;
    }
    t
}

/// Reciprocal adaptation rates, 65536 / (n + 1.5).
fn rate_table() -> [u32; 1024] {
    let mut t = [0u32; 1024];
    for (n, r) in t.iter_mut().enumerate() {
        *r = 131_072 / (2 * n as u32 + 3);
    }
    t
}

/// A table of adaptive probabilities, each slot packing a 16-bit
/// probability (high half) with its hit count (low half).
struct Counters {
    slots: Vec<u32>,
    limit: u32,
}

impl Counters {
    fn new(size: usize, limit: u32) -> Self {
        Counters { slots: vec![32768 << 16; size], limit }
    }

    fn p(&self, i: usize) -> u32 {
        self.slots[i] >> 16
    }

    fn update(&mut self, i: usize, bit: u32, rates: &[u32; 1024]) {
        let v = self.slots[i];
        let p = (v >> 16) as i32;
        let n = v & 0xffff;
        let target = if bit == 1 { 65535 } else { 0 };
        let delta = ((target - p) as i64 * rates[n as usize] as i64) >> 16;
        let p = (p + delta as i32).clamp(32, 65503) as u32;
        self.slots[i] = p << 16 | (n + (n < self.limit) as u32);
    }
}

fn hash(mut x: u32) -> u32 {
    x ^= x >> 16;
    x = x.wrapping_mul(0x7feb_352d);
    x ^= x >> 15;
    x = x.wrapping_mul(0x846c_a68b);
    x ^ (x >> 16)
}

const HASHED: usize = 4;
const INPUTS: usize = HASHED + 5;
const LEARNING_RATE: i64 = 6;
const STATIONARY_LIMIT: u32 = 1023;
const FAST_LIMIT: u32 = 30;

struct Model {
    stretch: Vec<i16>,
    rates: [u32; 1024],
    // bit position only, order 0, fast order 0, sparse previous byte
    by_pos: Counters,
    order0: Counters,
    fast0: Counters,
    sparse1: Counters,
    // order 1, 2, 3 and the magnitude-bucket history, hashed with c0
    hashed: Vec<Counters>,
    hash_bits: u32,
    base: [u32; HASHED],
    slots: [usize; INPUTS - 1],
    st: [i32; INPUTS],
    weights: Vec<i32>,
    pr: i32,
    c0: u32,
    bitpos: u32,
    hist: u32,
}

impl Model {
    fn new(len: usize) -> Self {
        let log = usize::BITS - len.max(1).leading_zeros();
        let hash_bits = (log + 2).clamp(10, 22);
        let mut weights = vec![0i32; 8 * INPUTS];
        for set in weights.chunks_mut(INPUTS) {
            set[..INPUTS - 1].fill(1 << 14);
        }
        let mut m = Model {
            stretch: stretch_table(),
            rates: rate_table(),
            by_pos: Counters::new(8, STATIONARY_LIMIT),
            order0: Counters::new(256, STATIONARY_LIMIT),
            fast0: Counters::new(256, FAST_LIMIT),
            sparse1: Counters::new(256 * 8, STATIONARY_LIMIT),
            hashed: (0..HASHED).map(|_| Counters::new(1 << hash_bits, STATIONARY_LIMIT)).collect(),
            hash_bits,
            base: [0; HASHED],
            slots: [0; INPUTS - 1],
            st: [0; INPUTS],
            weights,
            pr: 2048,
            c0: 1,
            bitpos: 0,
            hist: 0,
        };
        m.new_byte();
        m.predict();
        m
    }

    fn new_byte(&mut self) {
        let h = self.hist;
        let c1 = h & 0xff;
        let bucket = |b: u32| b >> 6;
        let contexts = [
            c1 | 1 << 24,
            h & 0xffff | 2 << 24,
            h & 0xff_ffff | 3 << 24,
            bucket(c1) | bucket((h >> 8) & 0xff) << 2 | bucket((h >> 16) & 0xff) << 4 | 4 << 24,
        ];
        for (b, c) in self.base.iter_mut().zip(contexts) {
            *b = hash(c);
        }
    }

    fn predict(&mut self) {
        let c0 = self.c0 as usize;
        let c1 = (self.hist & 0xff) as usize;
        let pos = self.bitpos as usize;
        self.slots[0] = pos;
        self.slots[1] = c0;
        self.slots[2] = c0;
        self.slots[3] = c1 << 3 | pos;
        let shift = 32 - self.hash_bits;
        for k in 0..HASHED {
            self.slots[4 + k] = (hash(self.base[k].wrapping_add(self.c0.wrapping_mul(0x9e37_79b1))) >> shift) as usize;
        }
        let probs = [
            self.by_pos.p(self.slots[0]),
            self.order0.p(self.slots[1]),
            self.fast0.p(self.slots[2]),
            self.sparse1.p(self.slots[3]),
        ];
        for (i, p) in probs.into_iter().enumerate() {
            self.st[i] = self.stretch[(p >> 4) as usize] as i32;
        }
        for k in 0..HASHED {
            self.st[4 + k] = self.stretch[(self.hashed[k].p(self.slots[4 + k]) >> 4) as usize] as i32;
        }
        self.st[INPUTS - 1] = 256;
        let w = &self.weights[pos * INPUTS..(pos + 1) * INPUTS];
        let dot: i64 = self.st.iter().zip(w).map(|(&s, &w)| s as i64 * w as i64).sum();
        self.pr = squash((dot >> 16).clamp(-2047, 2047) as i32).clamp(1, 4095);
    }

    fn update(&mut self, bit: u32) {
        let pos = self.bitpos as usize;
        let err = ((bit as i64) << 12) - self.pr as i64;
        let w = &mut self.weights[pos * INPUTS..(pos + 1) * INPUTS];
        for (wi, &s) in w.iter_mut().zip(&self.st) {
            *wi += ((s as i64 * err * LEARNING_RATE) >> 14) as i32;
        }
        let rates = &self.rates;
        self.by_pos.update(self.slots[0], bit, rates);
        self.order0.update(self.slots[1], bit, rates);
        self.fast0.update(self.slots[2], bit, rates);
        self.sparse1.update(self.slots[3], bit, rates);
        for k in 0..HASHED {
            self.hashed[k].update(self.slots[4 + k], bit, rates);
        }
        self.c0 = self.c0 << 1 | bit;
        self.bitpos += 1;
        if self.bitpos == 8 {
            self.hist = self.hist << 8 | (self.c0 & 0xff);
            self.c0 = 1;
            self.bitpos = 0;
            self.new_byte();
        }
        self.predict();
    }

    /// Probability (12-bit) that the next bit is 1.
    fn p(&self) -> u32 {
        self.pr as u32
    }
}

fn split(x1: u32, x2: u32, p: u32) -> u32 {
    let range = x2 - x1;
    x1 + (range >> 12) * p + (((range & 0xfff) * p) >> 12)
}

pub fn encode(data: &[u8]) -> Vec<u8> {
    let mut model = Model::new(data.len());
    let mut out = Vec::with_capacity(data.len() + 8);
    let (mut x1, mut x2) = (0u32, u32::MAX);
    for &byte in data {
        for i in (0..8).rev() {
            let bit = (byte >> i) as u32 & 1;
            let xmid = split(x1, x2, model.p());
            if bit == 1 {
                x2 = xmid;
            } else {
                x1 = xmid + 1;
            }
            model.update(bit);
            while (x1 ^ x2) & 0xff00_0000 == 0 {
                out.push((x2 >> 24) as u8);
                x1 <<= 8;
                x2 = x2 << 8 | 0xff;
            }
        }
    }
    out.extend_from_slice(&x1.to_be_bytes());
    out
}

pub fn decode(payload: &[u8], len: usize) -> Result<Vec<u8>> {
    if payload.len() < 4 {
        return Err(Error::Integrity("cm payload shorter than the coder state".into()));
    }
    let mut model = Model::new(len);
    let mut out = Vec::with_capacity(len);
    let (mut x1, mut x2) = (0u32, u32::MAX);
    let mut x = u32::from_be_bytes([payload[0], payload[1], payload[2], payload[3]]);
    let mut pos = 4;
    for _ in 0..len {
        let mut byte = 0u32;
        for _ in 0..8 {
            let xmid = split(x1, x2, model.p());
            let bit = (x <= xmid) as u32;
            if bit == 1 {
                x2 = xmid;
            } else {
                x1 = xmid + 1;
            }
            model.update(bit);
            byte = byte << 1 | bit;
            while (x1 ^ x2) & 0xff00_0000 == 0 {
                let next = *payload.get(pos).ok_or_else(|| Error::Integrity("cm payload truncated".into()))?;
                pos += 1;
                x1 <<= 8;
                x2 = x2 << 8 | 0xff;
                x = x << 8 | next as u32;
            }
        }
        out.push(byte as u8);
    }
    if pos != payload.len() {
        return Err(Error::Integrity(format!("{} unread bytes after the cm stream", payload.len() - pos)));
    }
    if x < x1 || x > x2 {
        return Err(Error::Integrity("cm stream ends outside the coding interval".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squash_stretch_are_inverse() {
        let st = stretch_table();
        for (p, &s) in st.iter().enumerate().take(4095).skip(1) {
            let back = squash(s as i32);
            assert!((back - p as i32).abs() <= 40, "p={p} back={back}");
        }
        assert_eq!(squash(0), 2047);
        for x in -2047..2047 {
            assert!(squash(x) <= squash(x + 1));
        }
    }

    #[test]
    fn round_trips() {
        let cases: Vec<Vec<u8>> = vec![
            vec![],
            vec![0],
            vec![255; 1000],
            (0..=255).collect(),
            b"abracadabra abracadabra abracadabra".to_vec(),
        ];
        for data in cases {
            let enc = encode(&data);
            assert_eq!(decode(&enc, data.len()).unwrap(), data);
        }
    }

    #[test]
    fn constant_input_shrinks() {
        let data = vec![7u8; 32_000];
        let enc = encode(&data);
        assert!(enc.len() < 200, "len={}", enc.len());
    }

    #[test]
    fn corrupted() {
        let data: Vec<u8> = (0..2000u32).map(|i| (i * i % 251) as u8).collect();
        let enc = encode(&data);
        assert!(decode(&enc[..enc.len() - 1], data.len()).is_err());
        let mut longer = enc.clone();
        longer.push(1);
        assert!(decode(&longer, data.len()).is_err());
        assert!(decode(&enc[..3], 0).is_err());
    }
}

use crate::error::{Error, Result};

/// MSB-first bit writer.
#[derive(Default)]
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    used: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, code: u32, len: u8) {
        for shift in (0..len).rev() {
            self.acc = self.acc << 1 | (code >> shift & 1) as u8;
            self.used += 1;
            if self.used == 8 {
                self.bytes.push(self.acc);
                self.acc = 0;
                self.used = 0;
            }
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        if self.used > 0 {
            self.bytes.push(self.acc << (8 - self.used));
        }
        self.bytes
    }
}

pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn bit(&mut self) -> Result<u32> {
        let byte = self.bytes.get(self.pos / 8).ok_or_else(|| Error::Integrity("bit stream truncated".into()))?;
        let b = (byte >> (7 - self.pos % 8) & 1) as u32;
        self.pos += 1;
        Ok(b)
    }

    /// Fails unless the stream ends in this byte and the padding is zero.
    pub fn expect_end(&self) -> Result<()> {
        let used_bytes = self.pos.div_ceil(8);
        if used_bytes != self.bytes.len() {
            return Err(Error::Integrity(format!(
                "{} trailing bytes after bit stream",
                self.bytes.len() - used_bytes.min(self.bytes.len())
            )));
        }
        if !self.pos.is_multiple_of(8) {
            let last = self.bytes[used_bytes - 1];
            if last & ((1u8 << (8 - self.pos % 8)) - 1) != 0 {
                return Err(Error::Integrity("non-zero padding bits".into()));
            }
        }
        Ok(())
    }
}

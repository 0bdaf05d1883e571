//! Fixed-width bit-packed integer arrays.

use crate::format::{FormatError, Reader, Writer};

/// Minimum bits needed to write `max` (at least 1).
pub fn bits_for(max: u64) -> u32 {
    (64 - max.leading_zeros()).max(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntVector {
    width: u32,
    len: usize,
    words: Vec<u64>,
}

impl IntVector {
    /// Packs `values` using the narrowest width that holds the maximum.
    pub fn from_values(values: &[u64]) -> Self {
        let max = values.iter().copied().max().unwrap_or(0);
        Self::with_width(values, bits_for(max))
    }

    pub fn with_width(values: &[u64], width: u32) -> Self {
        assert!((1..=64).contains(&width));
        let total = values.len() * width as usize;
        let mut words = vec![0u64; total.div_ceil(64) + 1];
        for (i, &v) in values.iter().enumerate() {
            debug_assert!(width == 64 || v >> width == 0, "{v} does not fit {width} bits");
            let bit = i * width as usize;
            let (w, off) = (bit / 64, bit % 64);
            words[w] |= v << off;
            if off + width as usize > 64 {
                words[w + 1] |= v >> (64 - off);
            }
        }
        Self { width, len: values.len(), words }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        let mask = if self.width == 64 { u64::MAX } else { (1u64 << self.width) - 1 };
        let mut v = self.words[w] >> off;
        if off + self.width as usize > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        v & mask
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Payload bits, `len * width`.
    pub fn size_bits(&self) -> u64 {
        self.len as u64 * u64::from(self.width)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn write_to(&self, w: &mut Writer) {
        w.put_u8(self.width as u8);
        w.put_u64(self.len as u64);
        let used = (self.len * self.width as usize).div_ceil(64);
        for &word in &self.words[..used] {
            w.put_u64(word);
        }
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self, FormatError> {
        let width = u32::from(r.get_u8()?);
        if !(1..=64).contains(&width) {
            return Err(FormatError::Corrupt("integer width out of range"));
        }
        let len = r.get_len()?;
        let used =
            len.checked_mul(width as usize).ok_or(FormatError::Corrupt("integer vector too large"))?.div_ceil(64);
        if used > r.remaining() / 8 {
            return Err(FormatError::Truncated);
        }
        let mut words = Vec::with_capacity(used + 1);
        for _ in 0..used {
            words.push(r.get_u64()?);
        }
        words.push(0);
        Ok(Self { width, len, words })
    }
}

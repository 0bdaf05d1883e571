//! Byte-aligned variable-length integers.
//!
//! Seven payload bits per byte, least significant group first. The high bit
//! is set only on the last byte of a codeword, so `135` becomes `[0x07, 0x81]`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VbyteError {
    #[error("truncated vbyte codeword at offset {0}")]
    Truncated(usize),
    #[error("vbyte codeword at offset {0} overflows 64 bits")]
    Overflow(usize),
}

pub fn encode(mut g: u64, out: &mut Vec<u8>) {
    while g >= 0x80 {
        out.push((g & 0x7f) as u8);
        g >>= 7;
    }
    out.push(g as u8 | 0x80);
}

pub fn encoded_len(g: u64) -> usize {
    (64 - g.leading_zeros() as usize).max(1).div_ceil(7)
}

/// Decodes the codeword at `*offset` and advances past it.
pub fn decode(bytes: &[u8], offset: &mut usize) -> Result<u64, VbyteError> {
    let start = *offset;
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let &b = bytes.get(*offset).ok_or(VbyteError::Truncated(start))?;
        *offset += 1;
        let payload = u64::from(b & 0x7f);
        if shift >= 64 || (shift > 57 && payload >> (64 - shift) != 0) {
            return Err(VbyteError::Overflow(start));
        }
        value |= payload << shift;
        if b & 0x80 != 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

/// Decoder for streams that were validated when built or loaded.
#[inline]
pub(crate) fn decode_trusted(bytes: &[u8], offset: &mut usize) -> u64 {
    let mut value = 0u64;
    let mut shift = 0;
    loop {
        let b = bytes[*offset];
        *offset += 1;
        value |= u64::from(b & 0x7f) << shift;
        if b & 0x80 != 0 {
            return value;
        }
        shift += 7;
    }
}

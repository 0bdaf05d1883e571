//! Little-endian binary layout shared by every serialized structure.
//!
//! An index file starts with a fixed header:
//!
//! ```text
//! magic "TGX1" | version u16 | arity u8 | kind u8
//! n u64 | vertices u64 | lifetime u64 | sigma u64
//! codec u8 | t_psi u16 | 5 zero bytes
//! ```
//!
//! followed by length-prefixed sections. Each section is a `u64` byte length,
//! the payload, then zero padding up to the next multiple of eight bytes.

use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"TGX1";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("unexpected end of input")]
    Truncated,
    #[error("bad magic, not an index file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown codec tag {0}")]
    UnknownCodec(u8),
    #[error("codec {0} was not compiled into this build")]
    CodecUnavailable(&'static str),
    #[error("corrupt index: {0}")]
    Corrupt(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_bytes(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn pad8(&mut self) {
        while !self.buf.len().is_multiple_of(8) {
            self.buf.push(0);
        }
    }

    /// Writes a length-prefixed, 8-byte aligned section.
    pub fn section(&mut self, body: impl FnOnce(&mut Writer)) {
        let mut inner = Writer::new();
        body(&mut inner);
        self.put_u64(inner.buf.len() as u64);
        self.buf.extend_from_slice(&inner.buf);
        self.pad8();
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).ok_or(FormatError::Truncated)?;
        let slice = self.buf.get(self.pos..end).ok_or(FormatError::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    pub fn get_u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    pub fn get_u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn get_u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn get_u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A u64 used as an element count or length.
    pub fn get_len(&mut self) -> Result<usize, FormatError> {
        let v = self.get_u64()?;
        usize::try_from(v).map_err(|_| FormatError::Corrupt("length overflows usize"))
    }

    pub fn get_bytes(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        self.take(n)
    }

    pub fn skip_pad8(&mut self) -> Result<(), FormatError> {
        let pad = (8 - self.pos % 8) % 8;
        let bytes = self.take(pad)?;
        if bytes.iter().any(|&b| b != 0) {
            return Err(FormatError::Corrupt("non-zero padding"));
        }
        Ok(())
    }

    /// Reads one section and hands back a reader confined to its payload.
    pub fn section(&mut self) -> Result<Reader<'a>, FormatError> {
        let len = self.get_len()?;
        let body = self.take(len)?;
        self.skip_pad8()?;
        Ok(Reader::new(body))
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn is_exhausted(&self) -> bool {
        self.pos == self.buf.len()
    }

    pub fn expect_end(&self) -> Result<(), FormatError> {
        if self.is_exhausted() {
            Ok(())
        } else {
            Err(FormatError::Corrupt("trailing bytes"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub arity: u8,
    pub kind: u8,
    pub n: u64,
    pub vertices: u64,
    pub lifetime: u64,
    pub sigma: u64,
    pub codec: u8,
    pub t_psi: u16,
}

impl Header {
    pub fn write_to(&self, w: &mut Writer) {
        w.put_bytes(MAGIC);
        w.put_u16(VERSION);
        w.put_u8(self.arity);
        w.put_u8(self.kind);
        w.put_u64(self.n);
        w.put_u64(self.vertices);
        w.put_u64(self.lifetime);
        w.put_u64(self.sigma);
        w.put_u8(self.codec);
        w.put_u16(self.t_psi);
        w.pad8();
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self, FormatError> {
        if r.get_bytes(4)? != MAGIC {
            return Err(FormatError::BadMagic);
        }
        let version = r.get_u16()?;
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let h = Header {
            arity: r.get_u8()?,
            kind: r.get_u8()?,
            n: r.get_u64()?,
            vertices: r.get_u64()?,
            lifetime: r.get_u64()?,
            sigma: r.get_u64()?,
            codec: r.get_u8()?,
            t_psi: r.get_u16()?,
        };
        r.skip_pad8()?;
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip_and_alignment() {
        let h = Header { arity: 4, kind: 0, n: 5, vertices: 5, lifetime: 8, sigma: 13, codec: 1, t_psi: 16 };
        let mut w = Writer::new();
        h.write_to(&mut w);
        assert_eq!(w.len() % 8, 0);
        let bytes = w.into_bytes();
        assert_eq!(&bytes[..4], b"TGX1");
        assert_eq!(Header::read_from(&mut Reader::new(&bytes)).unwrap(), h);
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let mut bytes = vec![0u8; 48];
        bytes[..4].copy_from_slice(b"NOPE");
        assert!(matches!(Header::read_from(&mut Reader::new(&bytes)), Err(FormatError::BadMagic)));
        bytes[..4].copy_from_slice(MAGIC);
        bytes[4..6].copy_from_slice(&9u16.to_le_bytes());
        assert!(matches!(Header::read_from(&mut Reader::new(&bytes)), Err(FormatError::UnsupportedVersion(9))));
    }

    #[test]
    fn sections_are_aligned() {
        let mut w = Writer::new();
        w.section(|s| s.put_u8(7));
        w.section(|s| s.put_u16(9));
        let bytes = w.into_bytes();
        assert_eq!(bytes.len(), 32);
        let mut r = Reader::new(&bytes);
        assert_eq!(r.section().unwrap().get_u8().unwrap(), 7);
        assert_eq!(r.section().unwrap().get_u16().unwrap(), 9);
        r.expect_end().unwrap();
    }

    #[test]
    fn truncated_input() {
        let mut r = Reader::new(&[1, 2, 3]);
        assert!(matches!(r.get_u64(), Err(FormatError::Truncated)));
    }
}

//! Interchangeable representations of Ψ.
//!
//! Every codec stores the adjusted Ψ permutation and supports point access
//! plus a buffered range scan that synchronizes once and then decodes
//! sequentially. Positions and values are 1-based.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::bitseq::BitSequence;
use crate::format::{FormatError, Reader, Writer};

#[cfg(feature = "huff")]
pub mod huff;
pub mod plain;
pub mod vbyte;
pub mod vbyte_rle;

#[cfg(feature = "huff")]
pub use huff::HuffRlePsi;
pub use plain::PlainPsi;
pub use vbyte_rle::VbyteRlePsi;

pub trait Psi {
    /// Number of entries, `arity · n`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ψ[i]. Panics when `i` is outside `[1, len]`.
    fn access(&self, i: usize) -> usize;

    /// Calls `f(j, Ψ[j])` for every `j` in `[l, r]`, in order.
    fn range_for_each<F: FnMut(usize, usize)>(&self, l: usize, r: usize, f: F);

    /// Storage in bits, sample overlays included.
    fn size_bits(&self) -> u64;

    fn get(&self, i: usize) -> Option<usize> {
        (i >= 1 && i <= self.len()).then(|| self.access(i))
    }

    fn range(&self, l: usize, r: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity((r + 1).saturating_sub(l));
        self.range_for_each(l, r, |_, v| out.push(v));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Codec {
    Plain,
    #[default]
    VbyteRle,
    VbyteRleSelect,
    HuffRleOpt,
}

impl Codec {
    pub const ALL: [Codec; 4] = [Codec::Plain, Codec::VbyteRle, Codec::VbyteRleSelect, Codec::HuffRleOpt];

    pub fn tag(self) -> u8 {
        match self {
            Codec::Plain => 0,
            Codec::VbyteRle => 1,
            Codec::VbyteRleSelect => 2,
            Codec::HuffRleOpt => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Codec::ALL.into_iter().find(|c| c.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Codec::Plain => "plain",
            Codec::VbyteRle => "vbyte-rle",
            Codec::VbyteRleSelect => "vbyte-rle-select",
            Codec::HuffRleOpt => "huff-rle-opt",
        }
    }

    /// Whether this build can encode and decode the codec.
    pub fn is_available(self) -> bool {
        self != Codec::HuffRleOpt || cfg!(feature = "huff")
    }

    /// Codecs compiled into this build.
    pub fn available() -> impl Iterator<Item = Codec> {
        Codec::ALL.into_iter().filter(|c| c.is_available())
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Codec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Codec::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown codec `{s}` (expected plain, vbyte-rle, vbyte-rle-select or huff-rle-opt)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodecParams {
    pub codec: Codec,
    /// Sampling period for the codecs that sample; ignored by plain.
    pub t_psi: u16,
}

impl Default for CodecParams {
    fn default() -> Self {
        Self { codec: Codec::VbyteRle, t_psi: 16 }
    }
}

impl CodecParams {
    pub fn new(codec: Codec, t_psi: u16) -> Self {
        Self { codec, t_psi }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PsiError {
    #[error("codec {0} was not compiled into this build")]
    CodecUnavailable(Codec),
    #[error("sampling period must be positive")]
    ZeroSamplePeriod,
}

/// A Ψ array held by one of the codecs.
#[derive(Debug, Clone)]
pub enum PsiEncoding {
    Plain(PlainPsi),
    VbyteRle(VbyteRlePsi),
    #[cfg(feature = "huff")]
    Huff(HuffRlePsi),
}

macro_rules! dispatch {
    ($self:expr, $p:ident => $body:expr) => {
        match $self {
            PsiEncoding::Plain($p) => $body,
            PsiEncoding::VbyteRle($p) => $body,
            #[cfg(feature = "huff")]
            PsiEncoding::Huff($p) => $body,
        }
    };
}

impl PsiEncoding {
    /// Encodes `psi` (entry `k` holds Ψ[k+1]). `d` marks the first position of every symbol group.
    pub fn encode(psi: &[u32], d: &Arc<BitSequence>, params: CodecParams) -> Result<Self, PsiError> {
        if params.t_psi == 0 && params.codec != Codec::Plain {
            return Err(PsiError::ZeroSamplePeriod);
        }
        debug_assert_eq!(psi.len(), d.len());
        Ok(match params.codec {
            Codec::Plain => PsiEncoding::Plain(PlainPsi::new(psi)),
            Codec::VbyteRle => PsiEncoding::VbyteRle(VbyteRlePsi::new(psi, Arc::clone(d), params.t_psi, false)),
            Codec::VbyteRleSelect => PsiEncoding::VbyteRle(VbyteRlePsi::new(psi, Arc::clone(d), params.t_psi, true)),
            #[cfg(feature = "huff")]
            Codec::HuffRleOpt => PsiEncoding::Huff(HuffRlePsi::new(psi, params.t_psi)),
            #[cfg(not(feature = "huff"))]
            Codec::HuffRleOpt => return Err(PsiError::CodecUnavailable(Codec::HuffRleOpt)),
        })
    }

    pub fn codec(&self) -> Codec {
        match self {
            PsiEncoding::Plain(_) => Codec::Plain,
            PsiEncoding::VbyteRle(v) if v.is_select_variant() => Codec::VbyteRleSelect,
            PsiEncoding::VbyteRle(_) => Codec::VbyteRle,
            #[cfg(feature = "huff")]
            PsiEncoding::Huff(_) => Codec::HuffRleOpt,
        }
    }

    pub fn t_psi(&self) -> u16 {
        match self {
            PsiEncoding::Plain(_) => 0,
            PsiEncoding::VbyteRle(v) => v.t_psi(),
            #[cfg(feature = "huff")]
            PsiEncoding::Huff(h) => h.t_psi(),
        }
    }

    /// Writes the codec payload. The codec tag and period travel in the file header.
    pub fn write_to(&self, w: &mut Writer) {
        dispatch!(self, p => p.write_to(w))
    }

    pub fn read_from(r: &mut Reader<'_>, codec: Codec, t_psi: u16, d: &Arc<BitSequence>) -> Result<Self, FormatError> {
        let enc = match codec {
            Codec::Plain => PsiEncoding::Plain(PlainPsi::read_from(r)?),
            Codec::VbyteRle | Codec::VbyteRleSelect => {
                PsiEncoding::VbyteRle(VbyteRlePsi::read_from(r, Arc::clone(d), t_psi, codec == Codec::VbyteRleSelect)?)
            }
            #[cfg(feature = "huff")]
            Codec::HuffRleOpt => PsiEncoding::Huff(HuffRlePsi::read_from(r, t_psi)?),
            #[cfg(not(feature = "huff"))]
            Codec::HuffRleOpt => return Err(FormatError::CodecUnavailable("huff-rle-opt")),
        };
        if enc.len() != d.len() {
            return Err(FormatError::Corrupt("psi length differs from D"));
        }
        Ok(enc)
    }
}

impl Psi for PsiEncoding {
    fn len(&self) -> usize {
        dispatch!(self, p => p.len())
    }

    #[inline]
    fn access(&self, i: usize) -> usize {
        dispatch!(self, p => p.access(i))
    }

    fn range_for_each<F: FnMut(usize, usize)>(&self, l: usize, r: usize, f: F) {
        dispatch!(self, p => p.range_for_each(l, r, f))
    }

    fn size_bits(&self) -> u64 {
        dispatch!(self, p => p.size_bits())
    }
}

pub(crate) fn check_range(l: usize, r: usize, len: usize) {
    assert!(l >= 1 && r <= len, "psi range [{l}, {r}] outside [1, {len}]");
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const G5_PSI: [u32; 20] = [7, 9, 6, 8, 10, 11, 12, 15, 14, 13, 16, 18, 17, 19, 20, 3, 5, 1, 2, 4];

    pub(crate) fn g5_d() -> Arc<BitSequence> {
        Arc::new(BitSequence::from_bits("10110110111010111100".chars().map(|c| c == '1')))
    }

    /// A random permutation whose groups (given as lengths) hold increasing values.
    pub(crate) fn grouped_psi(groups: &[usize], seed: u64) -> (Vec<u32>, Arc<BitSequence>) {
        let n: usize = groups.iter().sum();
        let mut vals: Vec<u32> = (1..=n as u32).collect();
        let mut s = seed | 1;
        for i in (1..n).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            vals.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let mut bits = Vec::with_capacity(n);
        let mut at = 0;
        for &g in groups {
            vals[at..at + g].sort_unstable();
            bits.push(true);
            bits.extend(std::iter::repeat_n(false, g - 1));
            at += g;
        }
        (vals, Arc::new(BitSequence::from_bits(bits)))
    }

    /// Like `grouped_psi` but with long consecutive runs inside each group.
    pub(crate) fn runny_psi(groups: &[usize]) -> (Vec<u32>, Arc<BitSequence>) {
        let n: usize = groups.iter().sum();
        let mut vals = Vec::with_capacity(n);
        let mut bits = Vec::with_capacity(n);
        let mut next = n as u32;
        for &g in groups.iter() {
            let start = next + 1 - g as u32;
            vals.extend(start..=next);
            next = start - 1;
            bits.push(true);
            bits.extend(std::iter::repeat_n(false, g - 1));
        }
        (vals, Arc::new(BitSequence::from_bits(bits)))
    }

    fn all_encodings(psi: &[u32], d: &Arc<BitSequence>) -> Vec<PsiEncoding> {
        let mut out = Vec::new();
        for codec in Codec::available() {
            for t in [1u16, 2, 8, 16, 64, 256] {
                out.push(PsiEncoding::encode(psi, d, CodecParams::new(codec, t)).unwrap());
            }
        }
        out
    }

    fn check_against(psi: &[u32], enc: &PsiEncoding) {
        assert_eq!(enc.len(), psi.len());
        for (k, &v) in psi.iter().enumerate() {
            assert_eq!(enc.access(k + 1), v as usize, "{:?} t={} i={}", enc.codec(), enc.t_psi(), k + 1);
        }
        let whole: Vec<usize> = psi.iter().map(|&v| v as usize).collect();
        if !psi.is_empty() {
            assert_eq!(enc.range(1, psi.len()), whole, "{:?} t={}", enc.codec(), enc.t_psi());
        }
    }

    fn reload(enc: &PsiEncoding, d: &Arc<BitSequence>) -> PsiEncoding {
        let mut w = Writer::new();
        enc.write_to(&mut w);
        let bytes = w.into_bytes();
        let mut r = Reader::new(&bytes);
        let back = PsiEncoding::read_from(&mut r, enc.codec(), enc.t_psi(), d).unwrap();
        r.expect_end().unwrap();
        let mut w2 = Writer::new();
        back.write_to(&mut w2);
        assert_eq!(w2.into_bytes(), bytes);
        back
    }

    #[test]
    fn g5_every_codec() {
        let d = g5_d();
        for enc in all_encodings(&G5_PSI, &d) {
            check_against(&G5_PSI, &enc);
            assert_eq!(enc.access(7), 12);
            assert_eq!(enc.access(20), 4);
            assert_eq!(enc.range(1, 2), vec![7, 9]);
            assert_eq!(enc.range(16, 20), vec![3, 5, 1, 2, 4]);
            check_against(&G5_PSI, &reload(&enc, &d));
        }
    }

    #[test]
    fn codec_names_and_tags() {
        for c in Codec::ALL {
            assert_eq!(c.name().parse::<Codec>(), Ok(c));
            assert_eq!(Codec::from_tag(c.tag()), Some(c));
        }
        assert!(Codec::from_tag(9).is_none());
        assert!("zip".parse::<Codec>().is_err());
    }

    #[test]
    fn zero_period_rejected() {
        let d = g5_d();
        let err = PsiEncoding::encode(&G5_PSI, &d, CodecParams::new(Codec::VbyteRle, 0)).unwrap_err();
        assert_eq!(err, PsiError::ZeroSamplePeriod);
        assert!(PsiEncoding::encode(&G5_PSI, &d, CodecParams::new(Codec::Plain, 0)).is_ok());
    }

    #[test]
    fn empty_psi() {
        let d = Arc::new(BitSequence::default());
        for enc in all_encodings(&[], &d) {
            assert_eq!(enc.len(), 0);
            assert_eq!(enc.get(1), None);
            reload(&enc, &d);
        }
    }

    #[test]
    fn long_runs() {
        let (psi, d) = runny_psi(&[1, 3, 700, 2, 1000, 1, 9]);
        for enc in all_encodings(&psi, &d) {
            check_against(&psi, &enc);
            check_against(&psi, &reload(&enc, &d));
        }
    }

    #[test]
    fn select_variant_is_smaller() {
        let (psi, d) = grouped_psi(&vec![37; 60], 7);
        for t in [8u16, 16, 64, 256] {
            let a = PsiEncoding::encode(&psi, &d, CodecParams::new(Codec::VbyteRle, t)).unwrap();
            let b = PsiEncoding::encode(&psi, &d, CodecParams::new(Codec::VbyteRleSelect, t)).unwrap();
            assert!(b.size_bits() < a.size_bits());
        }
    }

    #[test]
    fn plain_size() {
        let enc = PsiEncoding::encode(&G5_PSI, &g5_d(), CodecParams::new(Codec::Plain, 0)).unwrap();
        assert_eq!(enc.size_bits(), 100);
    }

    proptest! {
        #[test]
        fn codecs_agree(groups in proptest::collection::vec(1usize..40, 1..30), seed in any::<u64>(), runny in any::<bool>()) {
            let (psi, d) = if runny { runny_psi(&groups) } else { grouped_psi(&groups, seed) };
            let encs = all_encodings(&psi, &d);
            let n = psi.len();
            let mut s = seed | 1;
            for enc in &encs {
                for (k, &v) in psi.iter().enumerate() {
                    prop_assert_eq!(enc.access(k + 1), v as usize);
                }
                for _ in 0..50 {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let a = (s >> 33) as usize % n + 1;
                    let b = (s >> 13) as usize % n + 1;
                    let (l, r) = (a.min(b), a.max(b));
                    let want: Vec<usize> = psi[l - 1..r].iter().map(|&v| v as usize).collect();
                    prop_assert_eq!(enc.range(l, r), want);
                }
            }
        }
    }
}

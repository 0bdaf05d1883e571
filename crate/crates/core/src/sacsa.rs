//! Construction of the compressed suffix array over a contact set.
//!
//! The mapped terms of all contacts are concatenated into `Sid` (length
//! `arity · n`). Positions are sorted into `A` so that section `q` of `A`
//! lists the `q`-th terms of all contacts, ordered by the contact read
//! cyclically from that term, with contact index breaking ties. `Ψ` maps the
//! slot of each term to the slot of the next term of the same contact; for
//! the last term it points back to the first, so every contact is a cycle of
//! length `arity`. Only `B`, `D` and `Ψ` survive construction.

use std::cmp::Ordering;
use std::sync::Arc;

use thiserror::Error;

use crate::bitseq::BitSequence;
use crate::corpus::{build_sid, AlphabetMap, ContactKind, ContactSet, Section};
use crate::format::{FormatError, Header, Reader, Writer};
use crate::psienc::{Codec, CodecParams, Psi, PsiEncoding, PsiError};

/// Intermediate arrays that exist only while building.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildArtifacts {
    /// `a[k]` is the Sid position (1-based) stored at slot `k + 1`.
    pub a: Vec<u32>,
    /// Inverse of `a`: `a_inv[p - 1]` is the slot of Sid position `p`.
    pub a_inv: Vec<u32>,
    pub arity: usize,
}

/// Sorts Sid positions by contact-local rotation.
pub fn build_rotation_array(sid: &[u32], arity: usize) -> BuildArtifacts {
    assert!(arity > 0 && sid.len().is_multiple_of(arity));
    let rotation_cmp = |&x: &u32, &y: &u32| -> Ordering {
        let (x, y) = (x as usize - 1, y as usize - 1);
        let (bx, by) = (x - x % arity, y - y % arity);
        for k in 0..arity {
            let sx = sid[bx + (x - bx + k) % arity];
            let sy = sid[by + (y - by + k) % arity];
            match sx.cmp(&sy) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        x.cmp(&y)
    };
    let mut a: Vec<u32> = (1..=sid.len() as u32).collect();
    a.sort_unstable_by(rotation_cmp);
    let mut a_inv = vec![0u32; a.len()];
    for (slot, &p) in a.iter().enumerate() {
        a_inv[p as usize - 1] = slot as u32 + 1;
    }
    BuildArtifacts { a, a_inv, arity }
}

/// `Ψ[i] = A⁻¹[(A[i] mod len) + 1]`, before the cyclic adjustment.
pub fn compute_psi(ba: &BuildArtifacts) -> Vec<u32> {
    let len = ba.a.len();
    ba.a.iter().map(|&p| ba.a_inv[p as usize % len]).collect()
}

/// Remaps the last section so each entry points to the first term of its own contact.
pub fn cyclic_adjust_psi(mut psi: Vec<u32>, n: usize, arity: usize) -> Vec<u32> {
    for v in &mut psi[(arity - 1) * n..] {
        *v = ((*v as usize + n - 2) % n + 1) as u32;
    }
    psi
}

/// Marks the first slot of every symbol group in `A` order.
pub fn build_d(ba: &BuildArtifacts, sid: &[u32]) -> BitSequence {
    BitSequence::from_bits(
        ba.a.iter().enumerate().map(|(k, &p)| k == 0 || sid[p as usize - 1] != sid[ba.a[k - 1] as usize - 1]),
    )
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Psi(#[from] PsiError),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("index file holds the {0} baseline, not a compressed suffix array")]
    WrongKind(&'static str),
    #[error("index is inconsistent: {0}")]
    Invalid(Violation),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("D has length {found}, expected {expected}")]
    DLength { expected: usize, found: usize },
    #[error("D has {found} ones but the alphabet has {expected} symbols")]
    DPopcount { expected: usize, found: usize },
    #[error("D[1] is not set")]
    DFirstUnset,
    #[error("psi has length {found}, expected {expected}")]
    PsiLength { expected: usize, found: usize },
    #[error("psi is not a permutation: value {value} at {position}")]
    NotPermutation { position: usize, value: usize },
    #[error("psi[{position}] = {value} does not advance to the next section")]
    SectionAdvance { position: usize, value: usize },
    #[error("cycle through {start} has length {length} instead of the arity")]
    CycleLength { start: usize, length: usize },
    #[error("symbol group of {symbol} starting at {position} lies outside its section")]
    SectionPurity { symbol: usize, position: usize },
    #[error("contacts out of order at {position}")]
    FirstSectionOrder { position: usize },
    #[error("psi decreases inside a symbol group at {position}")]
    GroupNotIncreasing { position: usize },
}

/// The compressed index: bitmap `B` (inside the alphabet map), `D` and `Ψ`.
#[derive(Debug, Clone)]
pub struct TgcsaIndex {
    am: AlphabetMap,
    d: Arc<BitSequence>,
    psi: PsiEncoding,
    n: usize,
}

pub fn build_index(cs: &ContactSet, params: CodecParams) -> Result<TgcsaIndex, BuildError> {
    let am = AlphabetMap::build(cs);
    let sid = build_sid(cs, &am);
    let arity = cs.arity();
    let ba = build_rotation_array(&sid, arity);
    let d = Arc::new(build_d(&ba, &sid));
    let psi = cyclic_adjust_psi(compute_psi(&ba), cs.len(), arity);
    let psi = PsiEncoding::encode(&psi, &d, params)?;
    Ok(TgcsaIndex { am, d, psi, n: cs.len() })
}

impl TgcsaIndex {
    /// Assembles an index from parts without checking them; see [`verify_core`](Self::verify_core).
    pub fn from_parts(am: AlphabetMap, d: Arc<BitSequence>, psi: PsiEncoding, n: usize) -> Self {
        Self { am, d, psi, n }
    }

    pub fn alphabet(&self) -> &AlphabetMap {
        &self.am
    }

    pub fn d(&self) -> &BitSequence {
        &self.d
    }

    pub fn d_shared(&self) -> &Arc<BitSequence> {
        &self.d
    }

    pub fn psi(&self) -> &PsiEncoding {
        &self.psi
    }

    /// Number of contacts.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.am.arity()
    }

    pub fn kind(&self) -> ContactKind {
        self.am.kind()
    }

    pub fn vertices(&self) -> u32 {
        self.am.vertices()
    }

    pub fn lifetime(&self) -> u32 {
        self.am.lifetime()
    }

    pub fn sigma(&self) -> usize {
        self.am.sigma()
    }

    pub fn codec(&self) -> Codec {
        self.psi.codec()
    }

    pub fn t_psi(&self) -> u16 {
        self.psi.t_psi()
    }

    /// Total bits of `B`, `D` and `Ψ`.
    pub fn size_bits(&self) -> u64 {
        self.am.size_bits() + self.d.size_bits() + self.psi.size_bits()
    }

    /// Bits per contact.
    pub fn bpc(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.size_bits() as f64 / self.n as f64
        }
    }

    /// Checks the structural invariants and lists every violation found.
    pub fn verify_core(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let arity = self.arity();
        let n = self.n;
        let len = arity * n;
        let sigma = self.am.sigma();
        if self.d.len() != len {
            out.push(Violation::DLength { expected: len, found: self.d.len() });
            return out;
        }
        if self.psi.len() != len {
            out.push(Violation::PsiLength { expected: len, found: self.psi.len() });
            return out;
        }
        if self.d.count_ones() != sigma {
            out.push(Violation::DPopcount { expected: sigma, found: self.d.count_ones() });
        }
        if len == 0 {
            return out;
        }
        if !self.d.access(1) {
            out.push(Violation::DFirstUnset);
        }
        let psi = self.psi.range(1, len);

        let mut seen = vec![false; len];
        for (k, &v) in psi.iter().enumerate() {
            if v == 0 || v > len || std::mem::replace(&mut seen[v - 1], true) {
                out.push(Violation::NotPermutation { position: k + 1, value: v });
            }
        }
        if !out.is_empty() {
            return out;
        }

        let section_of_pos = |p: usize| (p - 1) / n;
        for (k, &v) in psi.iter().enumerate() {
            if section_of_pos(v) != (section_of_pos(k + 1) + 1) % arity {
                out.push(Violation::SectionAdvance { position: k + 1, value: v });
            }
        }
        for start in 1..=n {
            let mut p = start;
            let mut length = 0;
            loop {
                p = psi[p - 1];
                length += 1;
                if p == start || length > arity {
                    break;
                }
            }
            if length != arity {
                out.push(Violation::CycleLength { start, length });
            }
        }

        for c in 1..=self.d.count_ones() {
            let l = self.d.select1(c).unwrap();
            let end = self.d.select1(c + 1).map_or(len, |s| s - 1);
            let expected = self.am.section_of(c as u32).map(Section::index);
            if expected != Some(section_of_pos(l)) || section_of_pos(end) != section_of_pos(l) {
                out.push(Violation::SectionPurity { symbol: c, position: l });
            }
            for p in l + 1..=end {
                if psi[p - 1] <= psi[p - 2] {
                    out.push(Violation::GroupNotIncreasing { position: p });
                }
            }
        }

        let terms = |j: usize| -> Vec<usize> {
            let mut t = Vec::with_capacity(arity);
            let mut p = j;
            for _ in 0..arity {
                t.push(self.d.rank1(p));
                p = psi[p - 1];
            }
            t
        };
        let mut prev = terms(1);
        for j in 2..=n {
            let cur = terms(j);
            if cur < prev {
                out.push(Violation::FirstSectionOrder { position: j });
            }
            prev = cur;
        }
        out
    }

    pub fn header(&self) -> Header {
        Header {
            arity: self.arity() as u8,
            kind: self.kind().tag(),
            n: self.n as u64,
            vertices: u64::from(self.vertices()),
            lifetime: u64::from(self.lifetime()),
            sigma: self.sigma() as u64,
            codec: self.codec().tag(),
            t_psi: self.t_psi(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.header().write_to(&mut w);
        w.section(|s| self.am.bitmap().write_to(s));
        w.section(|s| self.d.write_to(s));
        w.section(|s| self.psi.write_to(s));
        w.into_bytes()
    }

    /// Loads an index and rejects it unless every structural invariant holds.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LoadError> {
        let mut r = Reader::new(bytes);
        let h = Header::read_from(&mut r)?;
        if h.codec == crate::baseline::edgelog::CODEC_TAG {
            return Err(LoadError::WrongKind("EdgeLog"));
        }
        let codec = Codec::from_tag(h.codec).ok_or(FormatError::UnknownCodec(h.codec))?;
        if !codec.is_available() {
            return Err(FormatError::CodecUnavailable(codec.name()).into());
        }
        let kind = ContactKind::from_tag(h.kind).ok_or(FormatError::Corrupt("unknown contact kind"))?;
        if usize::from(h.arity) != kind.arity() {
            return Err(FormatError::Corrupt("arity does not match contact kind").into());
        }
        let vertices = u32::try_from(h.vertices).map_err(|_| FormatError::Corrupt("vertex count"))?;
        let lifetime = u32::try_from(h.lifetime).map_err(|_| FormatError::Corrupt("lifetime"))?;
        let n = usize::try_from(h.n).map_err(|_| FormatError::Corrupt("contact count"))?;

        let b = BitSequence::read_from(&mut r.section()?)?;
        let am = AlphabetMap::from_parts(b, vertices, lifetime, kind)
            .ok_or(FormatError::Corrupt("bitmap B has the wrong length"))?;
        if am.sigma() as u64 != h.sigma {
            return Err(FormatError::Corrupt("sigma does not match B").into());
        }
        let mut ds = r.section()?;
        let d = Arc::new(BitSequence::read_from(&mut ds)?);
        ds.expect_end()?;
        if n.checked_mul(kind.arity()) != Some(d.len()) {
            return Err(FormatError::Corrupt("D has the wrong length").into());
        }
        let mut ps = r.section()?;
        let psi = PsiEncoding::read_from(&mut ps, codec, h.t_psi, &d)?;
        ps.expect_end()?;
        r.expect_end()?;
        let idx = Self { am, d, psi, n };
        if let Some(v) = idx.verify_core().into_iter().next() {
            return Err(LoadError::Invalid(v));
        }
        Ok(idx)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::tests::g5;
    use crate::corpus::{Contact, ContactKind};
    use crate::psienc::tests::G5_PSI;
    use proptest::prelude::*;

    /// Sorts every cyclic rotation of the whole Sid, ties by start position.
    fn naive_global_rotations(sid: &[u32]) -> Vec<u32> {
        let len = sid.len();
        let mut a: Vec<u32> = (1..=len as u32).collect();
        a.sort_by(|&x, &y| {
            let rx = (0..len).map(|k| sid[(x as usize - 1 + k) % len]);
            let ry = (0..len).map(|k| sid[(y as usize - 1 + k) % len]);
            rx.cmp(ry).then(x.cmp(&y))
        });
        a
    }

    /// Groups positions by section, then orders each section by the contact's own rotation.
    fn naive_contact_rotations(sid: &[u32], arity: usize) -> Vec<u32> {
        let n = sid.len() / arity;
        let mut a = Vec::new();
        for q in 0..arity {
            let mut keys: Vec<(Vec<u32>, u32)> = (0..n)
                .map(|j| {
                    let rot: Vec<u32> = (0..arity).map(|k| sid[j * arity + (q + k) % arity]).collect();
                    (rot, (j * arity + q + 1) as u32)
                })
                .collect();
            keys.sort();
            a.extend(keys.into_iter().map(|k| k.1));
        }
        a
    }

    fn g5_sid() -> Vec<u32> {
        vec![1, 5, 8, 13, 1, 6, 9, 13, 2, 4, 8, 11, 3, 5, 10, 13, 3, 7, 9, 12]
    }

    #[test]
    fn g5_rotation_array() {
        let sid = g5_sid();
        let ba = build_rotation_array(&sid, 4);
        let expected = vec![1, 5, 9, 13, 17, 10, 2, 14, 6, 18, 11, 3, 19, 7, 15, 12, 20, 4, 8, 16];
        assert_eq!(ba.a, expected);
        assert_eq!(naive_global_rotations(&sid), expected);
        assert_eq!(naive_contact_rotations(&sid, 4), expected);
    }

    #[test]
    fn g5_psi_and_d() {
        let sid = g5_sid();
        let ba = build_rotation_array(&sid, 4);
        let raw = compute_psi(&ba);
        assert_eq!(raw, vec![7, 9, 6, 8, 10, 11, 12, 15, 14, 13, 16, 18, 17, 19, 20, 4, 1, 2, 3, 5]);
        assert_eq!(raw[16], 1);
        let adj = cyclic_adjust_psi(raw, 5, 4);
        assert_eq!(adj, G5_PSI.to_vec());
        assert_eq!(adj[16], 5);
        let d = build_d(&ba, &sid);
        let bits: String = d.iter().map(|b| if b { '1' } else { '0' }).collect();
        assert_eq!(bits, "10110110111010111100");
        // 1 → 7 → 12 → 18 → 1
        let mut p = 1;
        let mut cycle = vec![p];
        for _ in 0..4 {
            p = adj[p - 1] as usize;
            cycle.push(p);
        }
        assert_eq!(cycle, vec![1, 7, 12, 18, 1]);
    }

    #[test]
    fn single_contact() {
        let sid = vec![1, 2, 3, 4];
        let ba = build_rotation_array(&sid, 4);
        assert_eq!(ba.a, vec![1, 2, 3, 4]);
        let raw = compute_psi(&ba);
        assert_eq!(raw, vec![2, 3, 4, 1]);
        assert_eq!(cyclic_adjust_psi(raw, 1, 4), vec![2, 3, 4, 1]);
        assert_eq!(build_d(&ba, &sid).count_ones(), 4);
    }

    #[test]
    fn identical_contacts() {
        let cs = ContactSet::new(vec![Contact::new(1, 1, 1, 2); 2], ContactKind::Interval, None, None).unwrap();
        let am = AlphabetMap::build(&cs);
        let sid = build_sid(&cs, &am);
        let ba = build_rotation_array(&sid, 4);
        assert_eq!(&ba.a[..2], &[1, 5]);
        let k = ContactSet::new(vec![Contact::new(2, 1, 3, 5); 7], ContactKind::Interval, None, None).unwrap();
        let idx = build_index(&k, CodecParams::default()).unwrap();
        assert_eq!(idx.d().count_ones(), 4);
        assert!(idx.verify_core().is_empty());
    }

    #[test]
    fn g5_index_verifies_and_round_trips() {
        for codec in Codec::available() {
            let idx = build_index(&g5(), CodecParams::new(codec, 8)).unwrap();
            assert_eq!(idx.verify_core(), vec![]);
            assert_eq!(idx.sigma(), 13);
            let bytes = idx.to_bytes();
            let back = TgcsaIndex::from_bytes(&bytes).unwrap();
            assert_eq!(back.to_bytes(), bytes);
            assert_eq!(back.psi().range(1, 20), idx.psi().range(1, 20));
        }
    }

    #[test]
    fn corrupted_psi_is_reported() {
        let idx = build_index(&g5(), CodecParams::new(Codec::Plain, 0)).unwrap();
        let mut psi: Vec<u32> = idx.psi().range(1, 20).into_iter().map(|v| v as u32).collect();
        // swap two last-section targets so two cycles exchange their tails
        psi.swap(15, 16);
        let enc = PsiEncoding::encode(&psi, idx.d_shared(), CodecParams::new(Codec::Plain, 0)).unwrap();
        let bad = TgcsaIndex::from_parts(idx.alphabet().clone(), Arc::clone(idx.d_shared()), enc, 5);
        let v = bad.verify_core();
        assert!(v.iter().any(|v| matches!(v, Violation::CycleLength { .. })), "{v:?}");
        assert!(matches!(TgcsaIndex::from_bytes(&bad.to_bytes()), Err(LoadError::Invalid(_))));
    }

    #[test]
    fn arity_three_cycles() {
        let cs = g5().with_kind(ContactKind::Incremental).unwrap();
        let idx = build_index(&cs, CodecParams::default()).unwrap();
        assert!(idx.verify_core().is_empty());
        let psi = idx.psi().range(1, 15);
        for j in 1..=5 {
            let mut p = j;
            for _ in 0..3 {
                p = psi[p - 1];
            }
            assert_eq!(p, j);
        }
    }

    #[test]
    fn empty_index() {
        let cs = ContactSet::empty(ContactKind::Interval);
        let idx = build_index(&cs, CodecParams::default()).unwrap();
        assert!(idx.verify_core().is_empty());
        let back = TgcsaIndex::from_bytes(&idx.to_bytes()).unwrap();
        assert_eq!(back.n(), 0);
    }

    #[test]
    fn truncated_file_rejected() {
        let bytes = build_index(&g5(), CodecParams::default()).unwrap().to_bytes();
        for cut in [0, 10, 40, bytes.len() - 1] {
            assert!(TgcsaIndex::from_bytes(&bytes[..cut]).is_err());
        }
    }

    fn arb_contacts() -> impl Strategy<Value = (Vec<Contact>, bool)> {
        let contact = (1u32..6, 1u32..6, 1u32..8, 1u32..4).prop_map(|(u, v, ts, len)| Contact::new(u, v, ts, ts + len));
        (proptest::collection::vec(contact, 0..25), any::<bool>()).prop_flat_map(|(mut cs, dup)| {
            if dup && !cs.is_empty() {
                let c = cs[0];
                cs.push(c);
                cs.push(c);
            }
            Just((cs, dup))
        })
    }

    proptest! {
        #[test]
        fn invariants_hold((contacts, _) in arb_contacts(), incremental in any::<bool>()) {
            let mut cs = ContactSet::new(contacts, ContactKind::Interval, None, None).unwrap();
            if incremental {
                cs = cs.with_kind(ContactKind::Incremental).unwrap();
            }
            let arity = cs.arity();
            let am = AlphabetMap::build(&cs);
            let sid = build_sid(&cs, &am);
            let ba = build_rotation_array(&sid, arity);
            prop_assert_eq!(&ba.a, &naive_contact_rotations(&sid, arity));
            for q in 0..cs.len() {
                prop_assert_eq!(ba.a[q] as usize, arity * q + 1);
            }
            let psi = cyclic_adjust_psi(compute_psi(&ba), cs.len(), arity);
            // every contact is recovered by following psi from its first-section slot
            for (j, c) in cs.contacts().iter().enumerate() {
                let mut p = j + 1;
                for (q, s) in Section::ALL[..arity].iter().enumerate() {
                    let id = sid[ba.a[p - 1] as usize - 1];
                    prop_assert_eq!(id, am.getmap(c.term(*s), *s).unwrap());
                    prop_assert_eq!(ba.a[p - 1] as usize, j * arity + q + 1);
                    p = psi[p - 1] as usize;
                }
                prop_assert_eq!(p, j + 1);
            }
            for codec in Codec::available() {
                let idx = build_index(&cs, CodecParams::new(codec, 4)).unwrap();
                prop_assert_eq!(idx.verify_core(), vec![]);
            }
        }
    }
}

//! Ψ as vbyte-coded gaps with run-length coded 1-runs.
//!
//! Inside a symbol group Ψ is strictly increasing, so each entry after the
//! first is stored as the gap to its predecessor. A gap of 1 always starts a
//! pair `⟨1, L⟩` covering a maximal run of `L` consecutive unit gaps; any
//! other gap is a single codeword. Runs never cross groups.
//!
//! The first entry of every group is sampled absolutely (`s0`, with the
//! stream offset of the group's first codeword in `ptr0`). Second-level
//! samples sit at `l_c + j·t_psi` inside each group and are marked in `D1`.
//! A second-level sample records the exact value (`s1`), the offset of the
//! next unread codeword (`ptr1`), and how many positions of the run covering
//! the sample are still ahead of it (`r1`), so decoding can resume from the
//! middle of a run. The select variant drops the position arrays `off0` and
//! `off1` and recovers them with `select` on `D` and `D1`.

use std::sync::Arc;

use super::vbyte::{self, decode_trusted};
use super::{check_range, Psi};
use crate::bitseq::BitSequence;
use crate::format::{FormatError, Reader, Writer};
use crate::intvec::IntVector;

#[derive(Debug, Clone)]
pub struct VbyteRlePsi {
    len: usize,
    t_psi: u16,
    select: bool,
    d: Arc<BitSequence>,
    bytes: Vec<u8>,
    s0: IntVector,
    ptr0: IntVector,
    off0: Option<IntVector>,
    d1: BitSequence,
    s1: IntVector,
    ptr1: IntVector,
    r1: IntVector,
    off1: Option<IntVector>,
}

/// Decoding state: Ψ[pos] = value, `run` more unit gaps pending, next codeword at `ptr`.
#[derive(Debug, Clone, Copy)]
struct Cursor {
    pos: usize,
    value: usize,
    ptr: usize,
    run: usize,
}

impl Cursor {
    #[inline]
    fn step(&mut self, bytes: &[u8]) {
        if self.run == 0 {
            let g = decode_trusted(bytes, &mut self.ptr) as usize;
            if g == 1 {
                self.run = decode_trusted(bytes, &mut self.ptr) as usize - 1;
                self.value += 1;
            } else {
                self.value += g;
            }
        } else {
            self.run -= 1;
            self.value += 1;
        }
        self.pos += 1;
    }

    /// Moves forward to `target` (same group), skipping runs arithmetically.
    #[inline]
    fn advance_to(&mut self, bytes: &[u8], target: usize) {
        while self.pos < target {
            if self.run == 0 {
                let g = decode_trusted(bytes, &mut self.ptr) as usize;
                if g == 1 {
                    self.run = decode_trusted(bytes, &mut self.ptr) as usize;
                } else {
                    self.value += g;
                    self.pos += 1;
                    continue;
                }
            }
            let k = self.run.min(target - self.pos);
            self.value += k;
            self.pos += k;
            self.run -= k;
        }
    }
}

impl VbyteRlePsi {
    pub fn new(psi: &[u32], d: Arc<BitSequence>, t_psi: u16, select: bool) -> Self {
        assert!(t_psi > 0);
        assert_eq!(psi.len(), d.len());
        let len = psi.len();
        let t = usize::from(t_psi);
        let mut bytes = Vec::new();
        let (mut s0, mut ptr0, mut off0) = (Vec::new(), Vec::new(), Vec::new());
        let mut d1_pos = Vec::new();
        let (mut s1, mut ptr1, mut r1) = (Vec::new(), Vec::new(), Vec::new());

        let starts: Vec<usize> = (1..=d.count_ones()).map(|c| d.select1(c).unwrap()).collect();
        for (c, &l) in starts.iter().enumerate() {
            let end = starts.get(c + 1).map_or(len, |&s| s - 1);
            s0.push(u64::from(psi[l - 1]));
            ptr0.push(bytes.len() as u64);
            off0.push(l as u64);
            let mut next_sample = l + t;
            let mut j = l + 1;
            while j <= end {
                let g = psi[j - 1]
                    .checked_sub(psi[j - 2])
                    .filter(|&g| g > 0)
                    .expect("psi must increase inside a symbol group");
                let covered = if g == 1 {
                    let mut run = 1;
                    while j + run <= end && psi[j + run - 1] == psi[j + run - 2] + 1 {
                        run += 1;
                    }
                    vbyte::encode(1, &mut bytes);
                    vbyte::encode(run as u64, &mut bytes);
                    run
                } else {
                    vbyte::encode(u64::from(g), &mut bytes);
                    1
                };
                let last = j + covered - 1;
                while next_sample <= last {
                    d1_pos.push(next_sample);
                    s1.push(u64::from(psi[next_sample - 1]));
                    ptr1.push(bytes.len() as u64);
                    r1.push((last - next_sample) as u64);
                    next_sample += t;
                }
                j = last + 1;
            }
        }
        let off1: Vec<u64> = d1_pos.iter().map(|&p| p as u64).collect();
        Self {
            len,
            t_psi,
            select,
            d,
            bytes,
            s0: IntVector::from_values(&s0),
            ptr0: IntVector::from_values(&ptr0),
            off0: (!select).then(|| IntVector::from_values(&off0)),
            d1: BitSequence::from_positions(len, d1_pos),
            s1: IntVector::from_values(&s1),
            ptr1: IntVector::from_values(&ptr1),
            r1: IntVector::from_values(&r1),
            off1: (!select).then(|| IntVector::from_values(&off1)),
        }
    }

    pub fn t_psi(&self) -> u16 {
        self.t_psi
    }

    pub fn is_select_variant(&self) -> bool {
        self.select
    }

    /// Length of the gap stream in bytes.
    pub fn stream_len(&self) -> usize {
        self.bytes.len()
    }

    pub fn stream(&self) -> &[u8] {
        &self.bytes
    }

    /// Number of second-level samples.
    pub fn second_level_samples(&self) -> usize {
        self.d1.count_ones()
    }

    #[inline]
    fn group_start(&self, c: usize) -> usize {
        match &self.off0 {
            Some(off) => off.get(c - 1) as usize,
            None => self.d.select1(c).unwrap(),
        }
    }

    #[inline]
    fn sample_pos(&self, k: usize) -> usize {
        match &self.off1 {
            Some(off) => off.get(k - 1) as usize,
            None => self.d1.select1(k).unwrap(),
        }
    }

    #[inline]
    fn group_cursor(&self, c: usize, l: usize) -> Cursor {
        Cursor { pos: l, value: self.s0.get(c - 1) as usize, ptr: self.ptr0.get(c - 1) as usize, run: 0 }
    }

    /// Cursor at the closest sample at or before `i`, plus the group id of `i`.
    #[inline]
    fn anchor(&self, i: usize) -> (Cursor, usize) {
        let c = self.d.rank1(i);
        let l = self.group_start(c);
        if i == l {
            return (self.group_cursor(c, l), c);
        }
        let k = self.d1.rank1(i);
        if k > 0 {
            let p = self.sample_pos(k);
            if p > l {
                let cur = Cursor {
                    pos: p,
                    value: self.s1.get(k - 1) as usize,
                    ptr: self.ptr1.get(k - 1) as usize,
                    run: self.r1.get(k - 1) as usize,
                };
                return (cur, c);
            }
        }
        (self.group_cursor(c, l), c)
    }

    pub fn write_to(&self, w: &mut Writer) {
        w.put_u64(self.len as u64);
        w.put_u64(self.bytes.len() as u64);
        w.put_bytes(&self.bytes);
        w.pad8();
        self.s0.write_to(w);
        self.ptr0.write_to(w);
        if let Some(off) = &self.off0 {
            off.write_to(w);
        }
        self.d1.write_to(w);
        self.s1.write_to(w);
        self.ptr1.write_to(w);
        self.r1.write_to(w);
        if let Some(off) = &self.off1 {
            off.write_to(w);
        }
    }

    pub fn read_from(r: &mut Reader<'_>, d: Arc<BitSequence>, t_psi: u16, select: bool) -> Result<Self, FormatError> {
        if t_psi == 0 {
            return Err(FormatError::Corrupt("zero sampling period"));
        }
        let len = r.get_len()?;
        let n_bytes = r.get_len()?;
        let bytes = r.get_bytes(n_bytes)?.to_vec();
        r.skip_pad8()?;
        let s0 = IntVector::read_from(r)?;
        let ptr0 = IntVector::read_from(r)?;
        let off0 = if select { None } else { Some(IntVector::read_from(r)?) };
        let d1 = BitSequence::read_from(r)?;
        let s1 = IntVector::read_from(r)?;
        let ptr1 = IntVector::read_from(r)?;
        let r1 = IntVector::read_from(r)?;
        let off1 = if select { None } else { Some(IntVector::read_from(r)?) };
        let enc = Self { len, t_psi, select, d, bytes, s0, ptr0, off0, d1, s1, ptr1, r1, off1 };
        enc.validate()?;
        Ok(enc)
    }

    /// Checks a loaded encoding by rebuilding it from its own decoded values.
    fn validate(&self) -> Result<(), FormatError> {
        let sigma = self.d.count_ones();
        if self.len != self.d.len() || self.d1.len() != self.len {
            return Err(FormatError::Corrupt("psi length differs from D"));
        }
        if self.s0.len() != sigma || self.ptr0.len() != sigma || self.off0.as_ref().is_some_and(|o| o.len() != sigma) {
            return Err(FormatError::Corrupt("first-level samples do not match D"));
        }
        let n1 = self.d1.count_ones();
        if [&self.s1, &self.ptr1, &self.r1].iter().any(|v| v.len() != n1)
            || self.off1.as_ref().is_some_and(|o| o.len() != n1)
        {
            return Err(FormatError::Corrupt("second-level sample arrays disagree"));
        }
        let bad = FormatError::Corrupt("psi gap stream");
        let mut values = Vec::with_capacity(self.len);
        let mut ptr = 0;
        for c in 1..=sigma {
            let l = self.d.select1(c).unwrap();
            let end = self.d.select1(c + 1).map_or(self.len, |s| s - 1);
            if self.ptr0.get(c - 1) as usize != ptr {
                return Err(FormatError::Corrupt("first-level pointer"));
            }
            let mut value = self.s0.get(c - 1);
            values.push(value);
            let mut pos = l;
            while pos < end {
                let g = vbyte::decode(&self.bytes, &mut ptr).map_err(|_| FormatError::Truncated)?;
                let (step, count) = match g {
                    0 => return Err(bad),
                    1 => (1, vbyte::decode(&self.bytes, &mut ptr).map_err(|_| FormatError::Truncated)?),
                    g => (g, 1),
                };
                if count == 0 || count > (end - pos) as u64 {
                    return Err(FormatError::Corrupt("run crosses a symbol group"));
                }
                for _ in 0..count {
                    value = value.checked_add(step).ok_or(FormatError::Corrupt("psi value overflow"))?;
                    values.push(value);
                }
                pos += count as usize;
            }
        }
        if ptr != self.bytes.len() {
            return Err(FormatError::Corrupt("trailing bytes in psi gap stream"));
        }
        if values.iter().any(|&v| v == 0 || v > self.len as u64) {
            return Err(FormatError::Corrupt("psi value out of range"));
        }
        let psi: Vec<u32> = values.into_iter().map(|v| v as u32).collect();
        let rebuilt = Self::new(&psi, Arc::clone(&self.d), self.t_psi, self.select);
        let same = rebuilt.s0 == self.s0
            && rebuilt.ptr0 == self.ptr0
            && rebuilt.off0 == self.off0
            && rebuilt.d1 == self.d1
            && rebuilt.s1 == self.s1
            && rebuilt.ptr1 == self.ptr1
            && rebuilt.r1 == self.r1
            && rebuilt.off1 == self.off1
            && rebuilt.bytes == self.bytes;
        if same {
            Ok(())
        } else {
            Err(FormatError::Corrupt("psi samples disagree with the gap stream"))
        }
    }
}

impl Psi for VbyteRlePsi {
    fn len(&self) -> usize {
        self.len
    }

    #[inline]
    fn access(&self, i: usize) -> usize {
        check_range(i, i, self.len);
        let (mut cur, _) = self.anchor(i);
        cur.advance_to(&self.bytes, i);
        cur.value
    }

    fn range_for_each<F: FnMut(usize, usize)>(&self, l: usize, r: usize, mut f: F) {
        if l > r {
            return;
        }
        check_range(l, r, self.len);
        let (mut cur, mut c) = self.anchor(l);
        cur.advance_to(&self.bytes, l);
        let sigma = self.d.count_ones();
        let mut next_start = if c < sigma { self.group_start(c + 1) } else { self.len + 1 };
        f(l, cur.value);
        for i in l + 1..=r {
            if i == next_start {
                c += 1;
                cur = self.group_cursor(c, i);
                next_start = if c < sigma { self.group_start(c + 1) } else { self.len + 1 };
            } else {
                cur.step(&self.bytes);
            }
            f(i, cur.value);
        }
    }

    fn size_bits(&self) -> u64 {
        let opt = |v: &Option<IntVector>| v.as_ref().map_or(0, IntVector::size_bits);
        self.bytes.len() as u64 * 8
            + self.s0.size_bits()
            + self.ptr0.size_bits()
            + opt(&self.off0)
            + self.d1.size_bits()
            + self.s1.size_bits()
            + self.ptr1.size_bits()
            + self.r1.size_bits()
            + opt(&self.off1)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{g5_d, runny_psi, G5_PSI};
    use super::*;

    #[test]
    fn g5_last_group_is_one_pair() {
        let enc = VbyteRlePsi::new(&G5_PSI, g5_d(), 256, false);
        // groups by D: [1,2] [3] [4,5] [6] [7,8] [9] [10] [11,12] [13,14] [15] [16] [17] [18,19,20]
        // the last group holds Ψ′[18..20] = [1,2,4]: gap 1 becomes ⟨1,1⟩, then a plain gap of 2
        assert_eq!(enc.stream(), &[0x82, 0x82, 0x83, 0x82, 0x82, 0x81, 0x81, 0x82]);
    }

    #[test]
    fn run_of_nine_is_single_pair() {
        let (psi, d) = runny_psi(&[10]);
        for t in [1u16, 2, 8, 256] {
            let enc = VbyteRlePsi::new(&psi, Arc::clone(&d), t, false);
            assert_eq!(enc.stream(), &[0x81, 0x89]);
        }
    }

    #[test]
    fn long_unit_section_is_tiny() {
        let (psi, d) = runny_psi(&[10_000]);
        let enc = VbyteRlePsi::new(&psi, d, 64, true);
        assert!(enc.stream_len() <= 4);
        assert_eq!(enc.access(5_000), psi[4_999] as usize);
    }

    #[test]
    fn first_level_hits_need_no_stream() {
        let d = g5_d();
        let enc = VbyteRlePsi::new(&G5_PSI, Arc::clone(&d), 8, false);
        for c in 1..=d.count_ones() {
            let l = d.select1(c).unwrap();
            let (cur, _) = enc.anchor(l);
            assert_eq!(cur.pos, l);
            assert_eq!(cur.value, G5_PSI[l - 1] as usize);
        }
    }

    #[test]
    fn stream_re_encodes_to_itself() {
        let (psi, d) = runny_psi(&[5, 300, 1, 77]);
        let enc = VbyteRlePsi::new(&psi, Arc::clone(&d), 16, false);
        let decoded: Vec<u32> = enc.range(1, psi.len()).into_iter().map(|v| v as u32).collect();
        let again = VbyteRlePsi::new(&decoded, d, 16, false);
        assert_eq!(again.stream(), enc.stream());
    }

    #[test]
    fn corrupt_stream_rejected() {
        let d = g5_d();
        let enc = VbyteRlePsi::new(&G5_PSI, Arc::clone(&d), 8, false);
        let mut w = Writer::new();
        enc.write_to(&mut w);
        let bytes = w.into_bytes();
        // first gap codeword lives right after the two length words
        assert_eq!(bytes[16], 0x82);
        for corrupt in [0x80, 0x81, 0x02] {
            let mut bad = bytes.clone();
            bad[16] = corrupt;
            assert!(VbyteRlePsi::read_from(&mut Reader::new(&bad), Arc::clone(&d), 8, false).is_err(), "{corrupt:#x}");
        }
    }
}

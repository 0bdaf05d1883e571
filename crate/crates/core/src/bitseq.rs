//! Plain bitmaps with rank and select.
//!
//! Positions and ranks are 1-based throughout: `rank1(i)` counts the ones in
//! `[1, i]` and `select1(k)` returns the position of the `k`-th one. This is
//! the convention every other module in the crate speaks, so translation to
//! 0-based word offsets stays inside this file.
//!
//! The directory has two levels: one absolute `u64` count per 512-bit
//! superblock and one `u16` count per 64-bit block, relative to its
//! superblock. `select1` binary-searches superblocks, scans at most eight
//! blocks and finishes inside a single word.

use crate::format::{FormatError, Reader, Writer};

const WORD_BITS: usize = 64;
const WORDS_PER_SUPER: usize = 8;

#[derive(Clone, PartialEq, Eq)]
pub struct BitSequence {
    len: usize,
    ones: usize,
    /// Payload plus one trailing zero word so `rank1(len)` never indexes past the end.
    words: Vec<u64>,
    supers: Vec<u64>,
    blocks: Vec<u16>,
}

impl std::fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitSequence(len={}, ones={}, ", self.len, self.ones)?;
        if self.len <= 128 {
            for pos in 1..=self.len {
                f.write_str(if self.access(pos) { "1" } else { "0" })?;
            }
        } else {
            f.write_str("..")?;
        }
        f.write_str(")")
    }
}

impl Default for BitSequence {
    fn default() -> Self {
        Self::from_words(Vec::new(), 0)
    }
}

impl BitSequence {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self::from_words(words, len)
    }

    /// Builds a bitmap of `len` bits with ones exactly at the given 1-based positions.
    ///
    /// Panics if a position is 0 or larger than `len`.
    pub fn from_positions<I: IntoIterator<Item = usize>>(len: usize, ones: I) -> Self {
        let mut words = vec![0u64; len.div_ceil(WORD_BITS)];
        for pos in ones {
            assert!(pos >= 1 && pos <= len, "position {pos} outside [1, {len}]");
            let j = pos - 1;
            words[j / WORD_BITS] |= 1 << (j % WORD_BITS);
        }
        Self::from_words(words, len)
    }

    fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.truncate(len.div_ceil(WORD_BITS));
        if !len.is_multiple_of(WORD_BITS) {
            let last = words.len() - 1;
            words[last] &= (1u64 << (len % WORD_BITS)) - 1;
        }
        words.push(0);

        let mut supers = Vec::with_capacity(words.len() / WORDS_PER_SUPER + 1);
        let mut blocks = Vec::with_capacity(words.len());
        let mut total = 0u64;
        let mut local = 0u64;
        for (w, word) in words.iter().enumerate() {
            if w % WORDS_PER_SUPER == 0 {
                supers.push(total);
                local = 0;
            }
            blocks.push(local as u16);
            let c = u64::from(word.count_ones());
            total += c;
            local += c;
        }
        Self { len, ones: total as usize, words, supers, blocks }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    /// Bit at 1-based `pos`. Panics when `pos` is outside `[1, len]`.
    #[inline]
    pub fn access(&self, pos: usize) -> bool {
        assert!(pos >= 1 && pos <= self.len, "access({pos}) outside [1, {}]", self.len);
        let j = pos - 1;
        (self.words[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    /// Number of ones in `[1, pos]`. Panics when `pos > len`.
    #[inline]
    pub fn rank1(&self, pos: usize) -> usize {
        assert!(pos <= self.len, "rank1({pos}) beyond length {}", self.len);
        let w = pos / WORD_BITS;
        let bit = pos % WORD_BITS;
        let mut r = self.supers[w / WORDS_PER_SUPER] + u64::from(self.blocks[w]);
        if bit != 0 {
            r += u64::from((self.words[w] & ((1u64 << bit) - 1)).count_ones());
        }
        r as usize
    }

    /// Position of the `k`-th one, or `None` when `k` is 0 or exceeds the popcount.
    pub fn select1(&self, k: usize) -> Option<usize> {
        if k == 0 || k > self.ones {
            return None;
        }
        let k = k as u64;
        // last superblock whose cumulative count is < k
        let sb = self.supers.partition_point(|&c| c < k) - 1;
        let mut before = self.supers[sb];
        let first = sb * WORDS_PER_SUPER;
        let last = (first + WORDS_PER_SUPER).min(self.words.len());
        let mut w = first;
        while w + 1 < last && before + u64::from(self.blocks[w + 1]) < k {
            w += 1;
        }
        before += u64::from(self.blocks[w]);
        let mut word = self.words[w];
        for _ in 1..(k - before) {
            word &= word - 1;
        }
        Some(w * WORD_BITS + word.trailing_zeros() as usize + 1)
    }

    /// Bits of payload plus rank directory.
    pub fn size_bits(&self) -> u64 {
        let payload = self.len.div_ceil(WORD_BITS) * WORD_BITS;
        (payload + self.supers.len() * 64 + self.blocks.len() * 16) as u64
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len).map(move |p| self.access(p))
    }

    /// Length as u64, then the payload words. The directory is rebuilt on load.
    pub fn write_to(&self, w: &mut Writer) {
        w.put_u64(self.len as u64);
        for &word in &self.words[..self.len.div_ceil(WORD_BITS)] {
            w.put_u64(word);
        }
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self, FormatError> {
        let len = r.get_len()?;
        let n_words = len.div_ceil(WORD_BITS);
        if n_words > r.remaining() / 8 {
            return Err(FormatError::Truncated);
        }
        let mut words = Vec::with_capacity(n_words + 1);
        for _ in 0..n_words {
            words.push(r.get_u64()?);
        }
        if len % WORD_BITS != 0 && words[n_words - 1] >> (len % WORD_BITS) != 0 {
            return Err(FormatError::Corrupt("bits set beyond bitmap length"));
        }
        Ok(Self::from_words(words, len))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitSequence {
        BitSequence::from_bits(s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1'))
    }

    fn g5_d() -> BitSequence {
        bits("10110 11011 10101 11100")
    }

    fn g5_b() -> BitSequence {
        BitSequence::from_positions(26, [1, 2, 4, 6, 8, 9, 10, 11, 15, 17, 24, 25, 26])
    }

    #[test]
    fn empty() {
        let b = BitSequence::from_bits([]);
        assert_eq!(b.len(), 0);
        assert_eq!(b.rank1(0), 0);
        assert_eq!(b.select1(1), None);
    }

    #[test]
    fn small() {
        let b = bits("10110");
        assert_eq!(b.rank1(5), 3);
        assert_eq!(b.select1(3), Some(4));
        assert_eq!(b.select1(4), None);
        assert_eq!(b.select1(0), None);
    }

    #[test]
    fn g5_fixtures() {
        let d = g5_d();
        assert_eq!(d.count_ones(), 13);
        assert_eq!(d.rank1(7), 5);
        assert_eq!(d.select1(5), Some(7));
        assert!(d.access(1));

        let b = g5_b();
        assert_eq!(b.rank1(8), 5);
        assert_eq!(b.select1(1), Some(1));
        assert_eq!(b.select1(13), Some(26));
        assert!(!b.access(3));
        assert!(b.access(26));
    }

    #[test]
    #[should_panic]
    fn rank_out_of_range() {
        g5_d().rank1(21);
    }

    #[test]
    #[should_panic]
    fn access_zero() {
        g5_d().access(0);
    }

    #[test]
    fn word_boundaries() {
        for len in [63, 64, 65, 511, 512, 513, 1024] {
            let b = BitSequence::from_bits((0..len).map(|_| true));
            assert_eq!(b.rank1(len), len);
            assert_eq!(b.select1(len), Some(len));
            let z = BitSequence::from_bits((0..len).map(|_| false));
            assert_eq!(z.rank1(len), 0);
            assert_eq!(z.select1(1), None);
        }
    }

    #[test]
    fn serialization_round_trip() {
        let b = bits("1101 0000 1111 0001 1");
        let mut w = Writer::new();
        b.write_to(&mut w);
        let bytes = w.into_bytes();
        let back = BitSequence::read_from(&mut Reader::new(&bytes)).unwrap();
        assert_eq!(b, back);
    }

    #[test]
    fn large_random_against_scan() {
        // one sizeable instance near the 10^6 scale; proptest covers variety below
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        let raw: Vec<bool> = (0..1_000_003)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state.is_multiple_of(5)
            })
            .collect();
        let b = BitSequence::from_bits(raw.iter().copied());
        let mut ones = 0;
        for (j, &bit) in raw.iter().enumerate() {
            if bit {
                ones += 1;
                assert_eq!(b.select1(ones), Some(j + 1));
            }
            if j % 997 == 0 {
                assert_eq!(b.rank1(j + 1), ones);
            }
        }
        assert_eq!(b.rank1(raw.len()), ones);
    }

    proptest! {
        #[test]
        fn matches_linear_scan(raw in proptest::collection::vec(any::<bool>(), 0..3000)) {
            let b = BitSequence::from_bits(raw.iter().copied());
            let mut ones = 0;
            prop_assert_eq!(b.rank1(0), 0);
            for (j, &bit) in raw.iter().enumerate() {
                prop_assert_eq!(b.access(j + 1), bit);
                if bit {
                    ones += 1;
                    prop_assert_eq!(b.select1(ones), Some(j + 1));
                }
                prop_assert_eq!(b.rank1(j + 1), ones);
                prop_assert_eq!(b.rank1(j + 1) - b.rank1(j), usize::from(bit));
            }
            prop_assert_eq!(b.count_ones(), ones);
            for k in 1..=ones {
                let p = b.select1(k).unwrap();
                prop_assert_eq!(b.rank1(p), k);
            }
        }
    }
}

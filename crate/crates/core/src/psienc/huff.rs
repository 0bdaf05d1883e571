//! Ψ as a canonical-Huffman coded stream of gaps and 1-runs.
//!
//! Absolute values are sampled every `t_psi` positions; the entries between
//! samples are coded as gaps to their predecessor. The code alphabet has one
//! symbol per run length `1..=t_psi`, one per short gap `2..=N_SV+1`, and
//! `2·OMEGA` escape classes for long or negative gaps. An escape class gives
//! the sign and bit length `b` of the gap, and the `b − 1` bits below its
//! leading one follow verbatim.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{check_range, Psi};
use crate::format::{FormatError, Reader, Writer};
use crate::intvec::IntVector;

const N_SV: usize = 1 << 14;
const OMEGA: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Run(usize),
    Gap(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct CanonicalCode {
    /// Symbols sorted by (code length, symbol).
    symbols: Vec<u32>,
    lengths: Vec<u8>,
    /// Per length `L`: first code value, number of codes, offset into `symbols`.
    first: Vec<u64>,
    count: Vec<u32>,
    offset: Vec<u32>,
    /// Encoder view: code and length per symbol id, length 0 when unused.
    enc: Vec<(u64, u8)>,
}

impl CanonicalCode {
    fn from_frequencies(freq: &[u64]) -> Self {
        let used: Vec<usize> = (0..freq.len()).filter(|&s| freq[s] > 0).collect();
        let mut len_of = vec![0u8; freq.len()];
        match used.len() {
            0 => {}
            1 => len_of[used[0]] = 1,
            _ => {
                // parent links over a classic two-queue merge
                let mut parent = vec![usize::MAX; 2 * used.len() - 1];
                let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
                    used.iter().enumerate().map(|(k, &s)| Reverse((freq[s], k))).collect();
                let mut next = used.len();
                while heap.len() > 1 {
                    let Reverse((fa, a)) = heap.pop().unwrap();
                    let Reverse((fb, b)) = heap.pop().unwrap();
                    parent[a] = next;
                    parent[b] = next;
                    heap.push(Reverse((fa + fb, next)));
                    next += 1;
                }
                let root = next - 1;
                let mut depth = vec![0u8; 2 * used.len() - 1];
                for node in (0..root).rev() {
                    depth[node] = depth[parent[node]] + 1;
                }
                for (k, &s) in used.iter().enumerate() {
                    len_of[s] = depth[k];
                }
            }
        }
        let pairs: Vec<(u32, u8)> = used.iter().map(|&s| (s as u32, len_of[s])).collect();
        Self::from_lengths(freq.len(), pairs).expect("huffman lengths are valid")
    }

    fn from_lengths(alphabet: usize, mut pairs: Vec<(u32, u8)>) -> Option<Self> {
        pairs.sort_unstable_by_key(|&(s, l)| (l, s));
        let max_len = pairs.last().map_or(0, |p| p.1) as usize;
        if max_len > 64 || pairs.iter().any(|&(s, l)| l == 0 || s as usize >= alphabet) {
            return None;
        }
        let mut first = vec![0u64; max_len + 1];
        let mut count = vec![0u32; max_len + 1];
        let mut offset = vec![0u32; max_len + 1];
        for &(_, l) in &pairs {
            count[l as usize] += 1;
        }
        let mut enc = vec![(0u64, 0u8); alphabet];
        let mut code = 0u64;
        let mut at = 0u32;
        // Kraft check in 128-bit space
        let mut kraft: u128 = 0;
        for l in 1..=max_len {
            first[l] = code;
            offset[l] = at;
            for k in 0..count[l] {
                let (s, _) = pairs[(at + k) as usize];
                enc[s as usize] = (code + u64::from(k), l as u8);
            }
            kraft += u128::from(count[l]) << (64 - l);
            at += count[l];
            code = (code + u64::from(count[l])) << 1;
        }
        if kraft > 1u128 << 64 {
            return None;
        }
        Some(Self {
            symbols: pairs.iter().map(|p| p.0).collect(),
            lengths: pairs.iter().map(|p| p.1).collect(),
            first,
            count,
            offset,
            enc,
        })
    }

    #[inline]
    fn decode(&self, bits: &BitStream, pos: &mut usize) -> Option<u32> {
        let mut code = 0u64;
        for l in 1..self.first.len() {
            code = (code << 1) | u64::from(bits.get(*pos)?);
            *pos += 1;
            let rel = code.wrapping_sub(self.first[l]);
            if rel < u64::from(self.count[l]) {
                return Some(self.symbols[(self.offset[l] as u64 + rel) as usize]);
            }
        }
        None
    }

    fn size_bits(&self) -> u64 {
        self.symbols.len() as u64 * (32 + 8)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct BitStream {
    words: Vec<u64>,
    len: usize,
}

impl BitStream {
    fn push(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            if self.len.is_multiple_of(64) {
                self.words.push(0);
            }
            self.words[self.len / 64] |= ((value >> k) & 1) << (self.len % 64);
            self.len += 1;
        }
    }

    #[inline]
    fn get(&self, pos: usize) -> Option<bool> {
        (pos < self.len).then(|| (self.words[pos / 64] >> (pos % 64)) & 1 == 1)
    }

    fn read(&self, pos: &mut usize, width: u32) -> Option<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.get(*pos)?);
            *pos += 1;
        }
        Some(v)
    }
}

#[derive(Debug, Clone)]
pub struct HuffRlePsi {
    len: usize,
    t_psi: u16,
    samples: IntVector,
    ptrs: IntVector,
    code: CanonicalCode,
    bits: BitStream,
}

impl HuffRlePsi {
    pub fn new(psi: &[u32], t_psi: u16) -> Self {
        assert!(t_psi > 0);
        let t = usize::from(t_psi);
        let alphabet = t + N_SV + 2 * OMEGA;
        let blocks: Vec<Vec<Token>> = psi.chunks(t).map(tokenize).collect();
        let mut freq = vec![0u64; alphabet];
        for tok in blocks.iter().flatten() {
            freq[symbol_of(*tok, t)] += 1;
        }
        let code = CanonicalCode::from_frequencies(&freq);
        let mut bits = BitStream::default();
        let mut ptrs = Vec::with_capacity(blocks.len());
        for block in &blocks {
            ptrs.push(bits.len as u64);
            for &tok in block {
                let sym = symbol_of(tok, t);
                let (c, l) = code.enc[sym];
                bits.push(c, u32::from(l));
                if let Token::Gap(g) = tok {
                    if sym >= t + N_SV {
                        let mag = g.unsigned_abs();
                        let b = 64 - mag.leading_zeros();
                        bits.push(mag, b - 1);
                    }
                }
            }
        }
        let samples: Vec<u64> = psi.iter().step_by(t).map(|&v| u64::from(v)).collect();
        Self {
            len: psi.len(),
            t_psi,
            samples: IntVector::from_values(&samples),
            ptrs: IntVector::from_values(&ptrs),
            code,
            bits,
        }
    }

    pub fn t_psi(&self) -> u16 {
        self.t_psi
    }

    fn next_token(&self, pos: &mut usize) -> Option<Token> {
        let t = usize::from(self.t_psi);
        let sym = self.code.decode(&self.bits, pos)? as usize;
        Some(if sym < t {
            Token::Run(sym + 1)
        } else if sym < t + N_SV {
            Token::Gap((sym - t + 2) as i64)
        } else {
            let class = sym - t - N_SV;
            let b = (class % OMEGA) as u32 + 1;
            let low = self.bits.read(pos, b - 1)?;
            let mag = if b == 64 { (1u64 << 63) | low } else { (1u64 << (b - 1)) | low };
            let g = i64::try_from(mag).ok()?;
            Token::Gap(if class >= OMEGA { -g } else { g })
        })
    }

    /// Walks `[l, r]`, decoding each sample block once.
    fn walk<F: FnMut(usize, usize)>(&self, l: usize, r: usize, mut f: F) {
        let t = usize::from(self.t_psi);
        let mut block = (l - 1) / t;
        let mut pos = block * t + 1;
        while pos <= r {
            let mut value = self.samples.get(block) as i64;
            let mut bit = self.ptrs.get(block) as usize;
            let block_end = (pos + t - 1).min(self.len);
            if pos >= l {
                f(pos, value as usize);
            }
            pos += 1;
            while pos <= block_end.min(r) {
                match self.next_token(&mut bit).expect("validated huffman stream") {
                    Token::Run(k) => {
                        for _ in 0..k {
                            value += 1;
                            if pos >= l && pos <= r {
                                f(pos, value as usize);
                            }
                            pos += 1;
                        }
                    }
                    Token::Gap(g) => {
                        value += g;
                        if pos >= l {
                            f(pos, value as usize);
                        }
                        pos += 1;
                    }
                }
            }
            pos = block_end + 1;
            block += 1;
        }
    }

    pub fn write_to(&self, w: &mut Writer) {
        w.put_u64(self.len as u64);
        self.samples.write_to(w);
        self.ptrs.write_to(w);
        w.put_u64(self.code.symbols.len() as u64);
        for (&s, &l) in self.code.symbols.iter().zip(&self.code.lengths) {
            w.put_u32(s);
            w.put_u8(l);
        }
        w.put_u64(self.bits.len as u64);
        for &word in &self.bits.words {
            w.put_u64(word);
        }
    }

    pub fn read_from(r: &mut Reader<'_>, t_psi: u16) -> Result<Self, FormatError> {
        if t_psi == 0 {
            return Err(FormatError::Corrupt("zero sampling period"));
        }
        let t = usize::from(t_psi);
        let len = r.get_len()?;
        let samples = IntVector::read_from(r)?;
        let ptrs = IntVector::read_from(r)?;
        let n_codes = r.get_len()?;
        if n_codes > r.remaining() / 5 {
            return Err(FormatError::Truncated);
        }
        let mut pairs = Vec::with_capacity(n_codes);
        for _ in 0..n_codes {
            pairs.push((r.get_u32()?, r.get_u8()?));
        }
        let code = CanonicalCode::from_lengths(t + N_SV + 2 * OMEGA, pairs)
            .ok_or(FormatError::Corrupt("invalid huffman code lengths"))?;
        let n_bits = r.get_len()?;
        let n_words = n_bits.div_ceil(64);
        if n_words > r.remaining() / 8 {
            return Err(FormatError::Truncated);
        }
        let mut words = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(r.get_u64()?);
        }
        let enc = Self { len, t_psi, samples, ptrs, code, bits: BitStream { words, len: n_bits } };
        enc.validate()?;
        Ok(enc)
    }

    fn validate(&self) -> Result<(), FormatError> {
        let t = usize::from(self.t_psi);
        let n_blocks = self.len.div_ceil(t);
        if self.samples.len() != n_blocks || self.ptrs.len() != n_blocks {
            return Err(FormatError::Corrupt("huffman sample count"));
        }
        let bad = FormatError::Corrupt("huffman stream");
        let mut psi = Vec::with_capacity(self.len);
        let mut bit = 0;
        for block in 0..n_blocks {
            if self.ptrs.get(block) as usize != bit {
                return Err(FormatError::Corrupt("huffman sample pointer"));
            }
            let mut value = self.samples.get(block) as i64;
            psi.push(value);
            let block_len = t.min(self.len - block * t);
            let mut filled = 1;
            while filled < block_len {
                match self.next_token(&mut bit).ok_or(FormatError::Corrupt("huffman stream"))? {
                    Token::Run(k) if filled + k <= block_len => {
                        for _ in 0..k {
                            value += 1;
                            psi.push(value);
                        }
                        filled += k;
                    }
                    Token::Gap(g) => {
                        value = value.checked_add(g).ok_or(FormatError::Corrupt("huffman stream"))?;
                        psi.push(value);
                        filled += 1;
                    }
                    Token::Run(_) => return Err(bad),
                }
            }
        }
        if bit != self.bits.len || psi.iter().any(|&v| v < 1 || v > self.len as i64) {
            return Err(bad);
        }
        let psi: Vec<u32> = psi.into_iter().map(|v| v as u32).collect();
        let rebuilt = Self::new(&psi, self.t_psi);
        if rebuilt.bits != self.bits || rebuilt.code != self.code || rebuilt.samples != self.samples {
            return Err(FormatError::Corrupt("huffman stream is not canonical"));
        }
        Ok(())
    }
}

/// Gaps inside one sample block, with maximal unit-gap runs merged.
fn tokenize(block: &[u32]) -> Vec<Token> {
    let mut out = Vec::new();
    for w in block.windows(2) {
        let g = i64::from(w[1]) - i64::from(w[0]);
        match (g, out.last_mut()) {
            (1, Some(Token::Run(k))) => *k += 1,
            (1, _) => out.push(Token::Run(1)),
            _ => out.push(Token::Gap(g)),
        }
    }
    out
}

fn symbol_of(tok: Token, t: usize) -> usize {
    match tok {
        Token::Run(k) => k - 1,
        Token::Gap(g) if (2..=N_SV as i64 + 1).contains(&g) => t + g as usize - 2,
        Token::Gap(g) => {
            let b = 64 - g.unsigned_abs().leading_zeros() as usize;
            t + N_SV + if g < 0 { OMEGA } else { 0 } + b - 1
        }
    }
}

impl Psi for HuffRlePsi {
    fn len(&self) -> usize {
        self.len
    }

    fn access(&self, i: usize) -> usize {
        check_range(i, i, self.len);
        let mut out = 0;
        self.walk(i, i, |_, v| out = v);
        out
    }

    fn range_for_each<F: FnMut(usize, usize)>(&self, l: usize, r: usize, f: F) {
        if l > r {
            return;
        }
        check_range(l, r, self.len);
        self.walk(l, r, f);
    }

    fn size_bits(&self) -> u64 {
        self.bits.len as u64 + self.samples.size_bits() + self.ptrs.size_bits() + self.code.size_bits()
    }
}

//! Uncompressed Ψ: every entry in `⌈log2(len)⌉` bits.

use super::{check_range, Psi};
use crate::format::{FormatError, Reader, Writer};
use crate::intvec::{bits_for, IntVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainPsi {
    values: IntVector,
}

impl PlainPsi {
    pub fn new(psi: &[u32]) -> Self {
        let width = bits_for(psi.len().saturating_sub(1) as u64);
        let shifted: Vec<u64> = psi.iter().map(|&v| u64::from(v) - 1).collect();
        Self { values: IntVector::with_width(&shifted, width) }
    }

    pub fn write_to(&self, w: &mut Writer) {
        self.values.write_to(w);
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self, FormatError> {
        let values = IntVector::read_from(r)?;
        let len = values.len() as u64;
        if values.iter().any(|v| v >= len) {
            return Err(FormatError::Corrupt("psi value out of range"));
        }
        Ok(Self { values })
    }
}

impl Psi for PlainPsi {
    fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    fn access(&self, i: usize) -> usize {
        check_range(i, i, self.len());
        self.values.get(i - 1) as usize + 1
    }

    fn range_for_each<F: FnMut(usize, usize)>(&self, l: usize, r: usize, mut f: F) {
        if l > r {
            return;
        }
        check_range(l, r, self.len());
        for i in l..=r {
            f(i, self.values.get(i - 1) as usize + 1);
        }
    }

    fn size_bits(&self) -> u64 {
        self.values.size_bits()
    }
}

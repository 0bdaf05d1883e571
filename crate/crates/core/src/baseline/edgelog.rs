//! Adjacency lists with per-edge time logs.
//!
//! Each vertex keeps its sorted out-neighbours as vbyte d-gaps. Each edge
//! keeps the alternating list `ts1, te1, ts2, te2, ..` of its contacts, also
//! as d-gaps, which forces the intervals of one edge to be disjoint and
//! non-adjacent. A transposed adjacency structure serves reverse queries.
//! Snapshot and event queries have to visit every edge.

use thiserror::Error;

use crate::corpus::{Contact, ContactKind, ContactSet};
use crate::format::{FormatError, Header, Reader, Writer};
use crate::intvec::IntVector;
use crate::psienc::vbyte;
use crate::query::{QueryError, TemporalQueries, TimeSemantics};

/// Codec tag identifying an EdgeLog payload in an index file header.
pub const CODEC_TAG: u8 = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EdgeLogError {
    #[error("overlapping contacts unsupported on edge ({u},{v})")]
    Overlap { u: u32, v: u32 },
    #[error("EdgeLog stores four-term interval contacts only, not {0:?}")]
    UnsupportedKind(ContactKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLogIndex {
    vertices: u32,
    lifetime: u32,
    n: usize,
    /// Byte offsets into `adj`, one per vertex plus a terminator.
    adj_offsets: IntVector,
    adj: Vec<u8>,
    /// Index of the first edge of each vertex, plus a terminator.
    edge_base: IntVector,
    /// Byte offsets into `times`, one per edge plus a terminator.
    time_offsets: IntVector,
    times: Vec<u8>,
    rev_offsets: IntVector,
    rev: Vec<u8>,
}

fn push_gaps(values: impl IntoIterator<Item = u32>, out: &mut Vec<u8>) {
    let mut prev = 0;
    for v in values {
        vbyte::encode(u64::from(v - prev), out);
        prev = v;
    }
}

/// Decodes a d-gap list stored in `bytes[from..to]`.
fn gap_list(bytes: &[u8], from: usize, to: usize) -> impl Iterator<Item = u32> + '_ {
    let mut pos = from;
    let mut acc = 0u64;
    std::iter::from_fn(move || {
        (pos < to).then(|| {
            acc += vbyte::decode_trusted(bytes, &mut pos);
            acc as u32
        })
    })
}

impl EdgeLogIndex {
    pub fn build(cs: &ContactSet) -> Result<Self, EdgeLogError> {
        if cs.kind() != ContactKind::Interval {
            return Err(EdgeLogError::UnsupportedKind(cs.kind()));
        }
        let nv = cs.vertices() as usize;
        let contacts = cs.contacts();
        let mut adj = Vec::new();
        let mut adj_offsets = vec![0u64; nv + 1];
        let mut edge_base = vec![0u64; nv + 1];
        let mut times = Vec::new();
        let mut time_offsets = vec![0u64];
        let mut reverse: Vec<Vec<u32>> = vec![Vec::new(); nv];

        let mut k = 0;
        let mut edges = 0u64;
        for u in 1..=nv as u32 {
            adj_offsets[u as usize - 1] = adj.len() as u64;
            edge_base[u as usize - 1] = edges;
            let mut prev_v = 0;
            while k < contacts.len() && contacts[k].u == u {
                let v = contacts[k].v;
                let mut log = Vec::new();
                while k < contacts.len() && contacts[k].edge() == (u, v) {
                    let c = contacts[k];
                    if log.last().is_some_and(|&te| c.ts <= te) {
                        return Err(EdgeLogError::Overlap { u, v });
                    }
                    log.extend([c.ts, c.te]);
                    k += 1;
                }
                vbyte::encode(u64::from(v - prev_v), &mut adj);
                prev_v = v;
                push_gaps(log, &mut times);
                time_offsets.push(times.len() as u64);
                reverse[v as usize - 1].push(u);
                edges += 1;
            }
        }
        adj_offsets[nv] = adj.len() as u64;
        edge_base[nv] = edges;

        let mut rev = Vec::new();
        let mut rev_offsets = Vec::with_capacity(nv + 1);
        for list in reverse {
            rev_offsets.push(rev.len() as u64);
            push_gaps(list, &mut rev);
        }
        rev_offsets.push(rev.len() as u64);

        Ok(Self {
            vertices: cs.vertices(),
            lifetime: cs.lifetime(),
            n: contacts.len(),
            adj_offsets: IntVector::from_values(&adj_offsets),
            adj,
            edge_base: IntVector::from_values(&edge_base),
            time_offsets: IntVector::from_values(&time_offsets),
            times,
            rev_offsets: IntVector::from_values(&rev_offsets),
            rev,
        })
    }

    pub fn vertices(&self) -> u32 {
        self.vertices
    }

    pub fn lifetime(&self) -> u32 {
        self.lifetime
    }

    /// Number of contacts.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct edges.
    pub fn edges(&self) -> usize {
        self.time_offsets.len() - 1
    }

    pub fn size_bits(&self) -> u64 {
        (self.adj.len() + self.times.len() + self.rev.len()) as u64 * 8
            + self.adj_offsets.size_bits()
            + self.edge_base.size_bits()
            + self.time_offsets.size_bits()
            + self.rev_offsets.size_bits()
    }

    pub fn bpc(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.size_bits() as f64 / self.n as f64
        }
    }

    fn in_universe(&self, u: u32) -> bool {
        u >= 1 && u <= self.vertices
    }

    /// `(v, edge index)` for every out-neighbour of `u`.
    fn neighbors(&self, u: u32) -> impl Iterator<Item = (u32, usize)> + '_ {
        let (from, to, base) = if self.in_universe(u) {
            let i = u as usize - 1;
            (self.adj_offsets.get(i) as usize, self.adj_offsets.get(i + 1) as usize, self.edge_base.get(i) as usize)
        } else {
            (0, 0, 0)
        };
        gap_list(&self.adj, from, to).enumerate().map(move |(k, v)| (v, base + k))
    }

    fn reverse(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        let (from, to) = if self.in_universe(v) {
            let i = v as usize - 1;
            (self.rev_offsets.get(i) as usize, self.rev_offsets.get(i + 1) as usize)
        } else {
            (0, 0)
        };
        gap_list(&self.rev, from, to)
    }

    /// `(ts, te)` intervals of edge `e`.
    fn intervals(&self, e: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let mut it = gap_list(&self.times, self.time_offsets.get(e) as usize, self.time_offsets.get(e + 1) as usize);
        std::iter::from_fn(move || Some((it.next()?, it.next()?)))
    }

    fn edge_matches(&self, e: usize, sem: TimeSemantics) -> bool {
        let (a, b) = sem.bounds();
        // the log is sorted, so intervals starting after `a` end the search
        self.intervals(e).take_while(|&(ts, _)| ts <= a).any(|(_, te)| te > b)
    }

    fn all_edges(&self) -> impl Iterator<Item = (u32, u32, usize)> + '_ {
        (1..=self.vertices).flat_map(move |u| self.neighbors(u).map(move |(v, e)| (u, v, e)))
    }

    fn event_scan(&self, sem: TimeSemantics, end: bool) -> Result<Vec<(u32, u32)>, QueryError> {
        let (lo, hi) = sem.validate()?.span();
        Ok(self
            .all_edges()
            .filter(|&(_, _, e)| self.intervals(e).any(|(ts, te)| (lo..=hi).contains(if end { &te } else { &ts })))
            .map(|(u, v, _)| (u, v))
            .collect())
    }

    /// Decodes every contact back, in sorted order.
    pub fn contacts(&self) -> Vec<Contact> {
        self.all_edges()
            .flat_map(|(u, v, e)| self.intervals(e).map(move |(ts, te)| Contact::new(u, v, ts, te)))
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        Header {
            arity: 4,
            kind: ContactKind::Interval.tag(),
            n: self.n as u64,
            vertices: u64::from(self.vertices),
            lifetime: u64::from(self.lifetime),
            sigma: self.edges() as u64,
            codec: CODEC_TAG,
            t_psi: 0,
        }
        .write_to(&mut w);
        w.section(|s| {
            self.adj_offsets.write_to(s);
            self.edge_base.write_to(s);
            self.time_offsets.write_to(s);
            self.rev_offsets.write_to(s);
        });
        for bytes in [&self.adj, &self.times, &self.rev] {
            w.section(|s| s.put_bytes(bytes));
        }
        w.into_bytes()
    }

    /// Loads an index and checks it by re-encoding its own contacts.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut r = Reader::new(bytes);
        let h = Header::read_from(&mut r)?;
        if h.codec != CODEC_TAG {
            return Err(FormatError::UnknownCodec(h.codec));
        }
        let vertices = u32::try_from(h.vertices).map_err(|_| FormatError::Corrupt("vertex count"))?;
        let lifetime = u32::try_from(h.lifetime).map_err(|_| FormatError::Corrupt("lifetime"))?;
        let mut s = r.section()?;
        let adj_offsets = IntVector::read_from(&mut s)?;
        let edge_base = IntVector::read_from(&mut s)?;
        let time_offsets = IntVector::read_from(&mut s)?;
        let rev_offsets = IntVector::read_from(&mut s)?;
        s.expect_end()?;
        let mut byte_section = || -> Result<Vec<u8>, FormatError> {
            let mut s = r.section()?;
            Ok(s.get_bytes(s.remaining())?.to_vec())
        };
        let adj = byte_section()?;
        let times = byte_section()?;
        let rev = byte_section()?;
        r.expect_end()?;

        let nv = vertices as usize;
        let offsets_ok = |v: &IntVector, len: usize, limit: usize| {
            v.len() == len
                && v.iter().zip(v.iter().skip(1)).all(|(a, b)| a <= b)
                && v.iter().all(|x| x as usize <= limit)
        };
        let edges = time_offsets.len().saturating_sub(1);
        if !offsets_ok(&adj_offsets, nv + 1, adj.len())
            || !offsets_ok(&rev_offsets, nv + 1, rev.len())
            || !offsets_ok(&edge_base, nv + 1, edges)
            || !offsets_ok(&time_offsets, edges + 1, times.len())
            || h.sigma != edges as u64
        {
            return Err(FormatError::Corrupt("edgelog offsets"));
        }
        // every list must decode cleanly and end on its boundary before the trusted decoders touch it
        for (bytes, offsets) in [(&adj, &adj_offsets), (&times, &time_offsets), (&rev, &rev_offsets)] {
            if offsets.get(0) != 0 || offsets.get(offsets.len() - 1) as usize != bytes.len() {
                return Err(FormatError::Corrupt("edgelog offsets"));
            }
            for k in 0..offsets.len() - 1 {
                let (mut pos, end) = (offsets.get(k) as usize, offsets.get(k + 1) as usize);
                while pos < end {
                    vbyte::decode(bytes, &mut pos).map_err(|_| FormatError::Corrupt("edgelog stream"))?;
                }
                if pos != end {
                    return Err(FormatError::Corrupt("edgelog list boundary inside a codeword"));
                }
            }
        }
        let loaded = Self {
            vertices,
            lifetime,
            n: usize::try_from(h.n).map_err(|_| FormatError::Corrupt("contact count"))?,
            adj_offsets,
            adj,
            edge_base,
            time_offsets,
            times,
            rev_offsets,
            rev,
        };
        let edge_count: usize = (1..=vertices).map(|u| loaded.neighbors(u).count()).sum();
        if edge_count != edges || loaded.has_odd_time_list() {
            return Err(FormatError::Corrupt("edgelog lists"));
        }
        let contacts = loaded.contacts();
        let rebuilt = ContactSet::new(contacts, ContactKind::Interval, Some(vertices), Some(lifetime))
            .ok()
            .and_then(|cs| Self::build(&cs).ok());
        match rebuilt {
            Some(r) if r == loaded => Ok(loaded),
            _ => Err(FormatError::Corrupt("edgelog lists are not canonical")),
        }
    }

    fn has_odd_time_list(&self) -> bool {
        (0..self.edges()).any(|e| {
            gap_list(&self.times, self.time_offsets.get(e) as usize, self.time_offsets.get(e + 1) as usize).count() % 2
                == 1
        })
    }
}

impl TemporalQueries for EdgeLogIndex {
    fn direct_neighbors(&self, u: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        sem.validate()?;
        Ok(self.neighbors(u).filter(|&(_, e)| self.edge_matches(e, sem)).map(|(v, _)| v).collect())
    }

    fn reverse_neighbors(&self, v: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        sem.validate()?;
        Ok(self.reverse(v).filter(|&u| self.neighbors(u).any(|(w, e)| w == v && self.edge_matches(e, sem))).collect())
    }

    fn active_edge(&self, u: u32, v: u32, sem: TimeSemantics) -> Result<bool, QueryError> {
        sem.validate()?;
        Ok(self.neighbors(u).take_while(|&(w, _)| w <= v).any(|(w, e)| w == v && self.edge_matches(e, sem)))
    }

    fn snapshot(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        sem.validate()?;
        Ok(self.all_edges().filter(|&(_, _, e)| self.edge_matches(e, sem)).map(|(u, v, _)| (u, v)).collect())
    }

    fn activated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        self.event_scan(sem, false)
    }

    fn deactivated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        self.event_scan(sem, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::g5;
    use crate::query::TimeSemantics::{Instant, Strong, Weak};

    #[test]
    fn g5_structure_and_queries() {
        let el = EdgeLogIndex::build(&g5()).unwrap();
        assert_eq!(el.edges(), 5);
        let e13 = el.neighbors(1).find(|&(v, _)| v == 3).unwrap().1;
        assert_eq!(el.intervals(e13).collect::<Vec<_>>(), vec![(1, 8)]);
        assert_eq!(el.direct_neighbors(1, Instant(5)).unwrap(), vec![3, 4]);
        assert_eq!(el.reverse_neighbors(3, Instant(7)).unwrap(), vec![1, 4]);
        assert_eq!(el.snapshot(Instant(6)).unwrap(), vec![(1, 3), (1, 4), (4, 5)]);
        assert_eq!(el.direct_neighbors(1, Weak(2, 5)).unwrap(), vec![3]);
        assert_eq!(el.direct_neighbors(1, Strong(5, 8)).unwrap(), vec![3, 4]);
        assert_eq!(el.deactivated_edges(Instant(8)).unwrap(), vec![(1, 3), (1, 4), (4, 3)]);
        assert_eq!(el.activated_edges(Instant(5)).unwrap(), vec![(1, 4), (4, 5)]);
        assert_eq!(el.contacts(), g5().contacts());
    }

    #[test]
    fn overlap_rejected() {
        for pair in [[(1, 5), (3, 8)], [(1, 5), (5, 8)], [(1, 5), (1, 5)]] {
            let cs = ContactSet::new(
                pair.iter().map(|&(ts, te)| Contact::new(1, 2, ts, te)).collect(),
                ContactKind::Interval,
                None,
                None,
            )
            .unwrap();
            assert_eq!(EdgeLogIndex::build(&cs), Err(EdgeLogError::Overlap { u: 1, v: 2 }));
        }
        let err = EdgeLogError::Overlap { u: 1, v: 2 };
        assert_eq!(err.to_string(), "overlapping contacts unsupported on edge (1,2)");
    }

    #[test]
    fn empty_and_round_trip() {
        let empty = EdgeLogIndex::build(&ContactSet::empty(ContactKind::Interval)).unwrap();
        assert_eq!(empty.snapshot(Instant(1)).unwrap(), vec![]);
        let back = EdgeLogIndex::from_bytes(&empty.to_bytes()).unwrap();
        assert_eq!(back, empty);

        let el = EdgeLogIndex::build(&g5()).unwrap();
        let bytes = el.to_bytes();
        let back = EdgeLogIndex::from_bytes(&bytes).unwrap();
        assert_eq!(back, el);
        assert_eq!(back.to_bytes(), bytes);
        let mut bad = bytes.clone();
        let last = bad.len() - 9;
        bad[last] ^= 0x40;
        assert!(EdgeLogIndex::from_bytes(&bad).is_err());
    }

    #[test]
    fn three_term_rejected() {
        let cs = g5().with_kind(ContactKind::Incremental).unwrap();
        assert_eq!(EdgeLogIndex::build(&cs), Err(EdgeLogError::UnsupportedKind(ContactKind::Incremental)));
    }
}

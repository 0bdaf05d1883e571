//! Temporal queries answered on `D` and `Ψ`.
//!
//! Every activity test reduces to `ts ≤ a ∧ te > b` for a pair `(a, b)`
//! derived from the time semantics. Since symbol groups appear in `A` in id
//! order, `ts ≤ a` holds exactly for start slots `y ≤ rt_s(a)`, the last slot
//! of the greatest start symbol not above `a`. Likewise `te > b` holds for
//! end slots `z > rt_e(b)`. Instants missing from `B` fall back to the
//! nearest smaller symbol, which may belong to the previous section and then
//! yields a boundary before the whole section.
//!
//! Three-term contacts carry no end. Incremental contacts stay active until
//! the end of the lifetime, and point contacts are active only at `ts`.

use std::fmt;

use thiserror::Error;

use crate::bitseq::BitSequence;
use crate::corpus::{AlphabetMap, Contact, ContactKind, Section};
use crate::psienc::{Psi, PsiEncoding};
use crate::sacsa::TgcsaIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeSemantics {
    /// Active at instant `t`.
    Instant(u32),
    /// Active during the whole of `[t, t_end)`.
    Strong(u32, u32),
    /// Active at some instant of `[t, t_end)`.
    Weak(u32, u32),
}

impl TimeSemantics {
    pub fn validate(self) -> Result<Self, QueryError> {
        match self {
            TimeSemantics::Instant(0) | TimeSemantics::Strong(0, _) | TimeSemantics::Weak(0, _) => {
                Err(QueryError::ZeroTime)
            }
            TimeSemantics::Strong(t, e) | TimeSemantics::Weak(t, e) if t >= e => {
                Err(QueryError::EmptyInterval { start: t, end: e })
            }
            s => Ok(s),
        }
    }

    /// `(a, b)` such that a contact matches iff `ts ≤ a` and `te > b`.
    pub fn bounds(self) -> (u32, u32) {
        match self {
            TimeSemantics::Instant(t) => (t, t),
            TimeSemantics::Strong(t, e) => (t, e - 1),
            TimeSemantics::Weak(t, e) => (e - 1, t),
        }
    }

    /// Inclusive instants covered, as used by event queries.
    pub fn span(self) -> (u32, u32) {
        match self {
            TimeSemantics::Instant(t) => (t, t),
            TimeSemantics::Strong(t, e) | TimeSemantics::Weak(t, e) => (t, e - 1),
        }
    }
}

impl fmt::Display for TimeSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeSemantics::Instant(t) => write!(f, "{t}"),
            TimeSemantics::Strong(t, e) => write!(f, "[{t},{e}) strong"),
            TimeSemantics::Weak(t, e) => write!(f, "[{t},{e}) weak"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("time instants start at 1")]
    ZeroTime,
    #[error("interval [{start}, {end}) is empty")]
    EmptyInterval { start: u32, end: u32 },
    #[error("{0}")]
    Unsupported(&'static str),
}

pub const NO_DEACTIVATION: QueryError = QueryError::Unsupported("incremental contacts are never deactivated");

/// Operations shared by the compressed index and the reference implementations.
pub trait TemporalQueries {
    /// Targets `v` of contacts `(u, v, ..)` matching `sem`, ascending.
    fn direct_neighbors(&self, u: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError>;
    /// Sources `u` of contacts `(u, v, ..)` matching `sem`, ascending.
    fn reverse_neighbors(&self, v: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError>;
    fn active_edge(&self, u: u32, v: u32, sem: TimeSemantics) -> Result<bool, QueryError>;
    /// Distinct edges with a contact matching `sem`, sorted.
    fn snapshot(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError>;
    /// Edges with a contact starting inside `sem.span()`.
    fn activated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError>;
    /// Edges with a contact ending inside `sem.span()`.
    fn deactivated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError>;
}

/// Query engine over borrowed index parts, generic in the Ψ representation.
#[derive(Debug, Clone, Copy)]
pub struct Searcher<'a, P: Psi> {
    am: &'a AlphabetMap,
    d: &'a BitSequence,
    psi: &'a P,
    n: usize,
}

/// Start slots matching the start-time condition, and the end-time boundary if one applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Window {
    y_lo: usize,
    y_hi: usize,
    rt_e: Option<usize>,
}

impl Window {
    #[inline]
    fn start_ok(&self, y: usize) -> bool {
        y > self.y_lo && y <= self.y_hi
    }

    #[inline]
    fn is_empty(&self) -> bool {
        self.y_lo >= self.y_hi
    }
}

fn sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v.dedup();
    v
}

fn sorted_edges(mut v: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    v.sort_unstable();
    v.dedup();
    v
}

impl<'a, P: Psi> Searcher<'a, P> {
    pub fn new(am: &'a AlphabetMap, d: &'a BitSequence, psi: &'a P, n: usize) -> Self {
        Self { am, d, psi, n }
    }

    pub fn psi(&self) -> &'a P {
        self.psi
    }

    fn arity(&self) -> usize {
        self.am.arity()
    }

    fn len(&self) -> usize {
        self.arity() * self.n
    }

    /// Last slot of the group of symbol `id`.
    #[inline]
    fn group_end(&self, id: u32) -> usize {
        if id as usize >= self.d.count_ones() {
            self.len()
        } else {
            self.d.select1(id as usize + 1).unwrap() - 1
        }
    }

    /// Slots `[l, r]` of symbol `id`, or `None` for id 0.
    pub fn symbol_range(&self, id: u32) -> Option<(usize, usize)> {
        if id == 0 || id as usize > self.d.count_ones() {
            return None;
        }
        Some((self.d.select1(id as usize).unwrap(), self.group_end(id)))
    }

    /// Narrows the range of `ids[0]` to the slots whose following terms are `ids[1..]`.
    pub fn pattern_range(&self, ids: &[u32]) -> Option<(usize, usize)> {
        assert!(!ids.is_empty() && ids.len() <= self.arity());
        let (mut l, mut r) = self.symbol_range(*ids.first()?)?;
        for (k, &id) in ids.iter().enumerate().skip(1) {
            if id == 0 {
                return None;
            }
            let key = |i: usize| {
                let mut p = i;
                for _ in 0..k {
                    p = self.psi.access(p);
                }
                self.d.rank1(p) as u32
            };
            let lo = l + partition(l, r + 1, |i| key(i) < id);
            let hi = l + partition(l, r + 1, |i| key(i) <= id);
            if lo >= hi {
                return None;
            }
            (l, r) = (lo, hi - 1);
        }
        Some((l, r))
    }

    /// Last start slot with `ts ≤ a`. Returns `2n` when no start time qualifies.
    pub fn rt_s(&self, a: u32) -> usize {
        self.group_end(self.am.getmap_floor(a, Section::Start))
    }

    /// Last end slot with `te ≤ b`. Returns `3n` when no end time qualifies.
    pub fn rt_e(&self, b: u32) -> usize {
        self.group_end(self.am.getmap_floor(b, Section::End))
    }

    /// `(rt_s(t), rt_e(t))` for a four-term index.
    pub fn time_bounds(&self, t: u32) -> (usize, usize) {
        (self.rt_s(t), self.rt_e(t))
    }

    fn window(&self, sem: TimeSemantics) -> Result<Window, QueryError> {
        let (a, b) = sem.validate()?.bounds();
        let none = Window { y_lo: 0, y_hi: 0, rt_e: None };
        if self.n == 0 {
            return Ok(none);
        }
        let tau = self.am.lifetime();
        let start_floor = 2 * self.n;
        Ok(match self.am.kind() {
            ContactKind::Interval => {
                Window { y_lo: start_floor, y_hi: self.rt_s(a), rt_e: Some(self.rt_e(b.min(tau))) }
            }
            ContactKind::Incremental if b >= tau => none,
            ContactKind::Incremental => Window { y_lo: start_floor, y_hi: self.rt_s(a), rt_e: None },
            ContactKind::Point if b > tau => none,
            ContactKind::Point => Window { y_lo: self.rt_s(b - 1), y_hi: self.rt_s(a), rt_e: None },
        })
    }

    /// From a start slot, the end-time test and the source slot of the contact.
    #[inline]
    fn source_of_start(&self, y: usize, w: &Window) -> Option<usize> {
        match w.rt_e {
            Some(rt_e) => {
                let z = self.psi.access(y);
                (z > rt_e).then(|| self.psi.access(z))
            }
            None => Some(self.psi.access(y)),
        }
    }

    #[inline]
    fn unmap(&self, slot: usize, section: Section) -> u32 {
        self.am.getunmap(self.d.rank1(slot) as u32, section).expect("slot symbol belongs to its section")
    }

    fn source_id(&self, u: u32, section: Section) -> u32 {
        self.am.getmap(u, section).unwrap_or(0)
    }

    /// Edge of the contact whose source slot is `i`.
    #[inline]
    fn edge_at(&self, i: usize) -> (u32, u32) {
        (self.unmap(i, Section::Source), self.unmap(self.psi.access(i), Section::Target))
    }

    pub fn direct_neighbors(&self, u: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        let w = self.window(sem)?;
        let mut out = Vec::new();
        let Some((l, r)) = self.symbol_range(self.source_id(u, Section::Source)) else {
            return Ok(out);
        };
        if w.is_empty() {
            return Ok(out);
        }
        self.psi.range_for_each(l, r, |_, x| {
            let y = self.psi.access(x);
            if w.start_ok(y) && w.rt_e.is_none_or(|rt_e| self.psi.access(y) > rt_e) {
                out.push(self.unmap(x, Section::Target));
            }
        });
        Ok(sorted(out))
    }

    pub fn reverse_neighbors(&self, v: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        let w = self.window(sem)?;
        let mut out = Vec::new();
        let Some((l, r)) = self.symbol_range(self.source_id(v, Section::Target)) else {
            return Ok(out);
        };
        if w.is_empty() {
            return Ok(out);
        }
        self.psi.range_for_each(l, r, |_, y| {
            if w.start_ok(y) {
                if let Some(i) = self.source_of_start(y, &w) {
                    out.push(self.unmap(i, Section::Source));
                }
            }
        });
        Ok(sorted(out))
    }

    pub fn active_edge(&self, u: u32, v: u32, sem: TimeSemantics) -> Result<bool, QueryError> {
        let w = self.window(sem)?;
        let ids = [self.source_id(u, Section::Source), self.source_id(v, Section::Target)];
        let Some((l, r)) = self.pattern_range(&ids) else {
            return Ok(false);
        };
        if w.is_empty() {
            return Ok(false);
        }
        for i in l..=r {
            let y = self.psi.access(self.psi.access(i));
            if w.start_ok(y) && self.source_of_start(y, &w).is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Source slots of every contact matching `sem`, in start-slot order.
    fn matching_sources(&self, sem: TimeSemantics) -> Result<Vec<usize>, QueryError> {
        let w = self.window(sem)?;
        let mut out = Vec::new();
        if w.is_empty() {
            return Ok(out);
        }
        match w.rt_e {
            Some(rt_e) => self.psi.range_for_each(w.y_lo + 1, w.y_hi, |_, z| {
                if z > rt_e {
                    out.push(self.psi.access(z));
                }
            }),
            None => self.psi.range_for_each(w.y_lo + 1, w.y_hi, |_, i| out.push(i)),
        }
        Ok(out)
    }

    pub fn snapshot(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        let sources = self.matching_sources(sem)?;
        Ok(sorted_edges(sources.into_iter().map(|i| self.edge_at(i)).collect()))
    }

    /// Every matching contact, duplicates included, sorted.
    pub fn snapshot_contacts(&self, sem: TimeSemantics) -> Result<Vec<Contact>, QueryError> {
        let mut out: Vec<Contact> =
            self.matching_sources(sem)?.into_iter().map(|i| self.reconstruct_contact(i)).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Edges of the contacts in slots `(lo, hi]` of a time section.
    fn edges_from_time_slots(&self, lo: usize, hi: usize, section: Section) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        if lo >= hi {
            return out;
        }
        // hops from this section back to the source section
        let hops = self.arity() - section.index();
        self.psi.range_for_each(lo + 1, hi, |_, mut p| {
            for _ in 1..hops {
                p = self.psi.access(p);
            }
            out.push(self.edge_at(p));
        });
        sorted_edges(out)
    }

    pub fn activated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        let (lo, hi) = sem.validate()?.span();
        if self.n == 0 || lo > self.am.lifetime() {
            return Ok(Vec::new());
        }
        Ok(self.edges_from_time_slots(self.rt_s(lo - 1), self.rt_s(hi), Section::Start))
    }

    pub fn deactivated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        let (lo, hi) = sem.validate()?.span();
        match self.am.kind() {
            ContactKind::Incremental => Err(NO_DEACTIVATION),
            _ if self.n == 0 => Ok(Vec::new()),
            ContactKind::Interval if lo > self.am.lifetime() => Ok(Vec::new()),
            ContactKind::Interval => Ok(self.edges_from_time_slots(self.rt_e(lo - 1), self.rt_e(hi), Section::End)),
            // a point contact at ts is deactivated at ts + 1
            ContactKind::Point if lo > self.am.lifetime() + 1 || hi < 2 => Ok(Vec::new()),
            ContactKind::Point => {
                Ok(self.edges_from_time_slots(self.rt_s(lo.saturating_sub(2)), self.rt_s(hi - 1), Section::Start))
            }
        }
    }

    /// The contact whose cycle passes through slot `i`.
    pub fn reconstruct_contact(&self, i: usize) -> Contact {
        assert!(i >= 1 && i <= self.len(), "slot {i} outside [1, {}]", self.len());
        let mut terms = [0u32; 4];
        let mut p = i;
        for _ in 0..self.arity() {
            let section = Section::ALL[(p - 1) / self.n];
            terms[section.index()] = self.unmap(p, section);
            p = self.psi.access(p);
        }
        Contact::new(terms[0], terms[1], terms[2], terms[3])
    }
}

/// Number of leading indices in `[lo, hi)` for which `pred` holds, assuming it is monotone.
fn partition(lo: usize, hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a) / 2;
        if pred(mid) {
            a = mid + 1;
        } else {
            b = mid;
        }
    }
    a - lo
}

impl TgcsaIndex {
    pub fn searcher(&self) -> Searcher<'_, PsiEncoding> {
        Searcher::new(self.alphabet(), self.d(), self.psi(), self.n())
    }

    pub fn reconstruct_contact(&self, i: usize) -> Contact {
        self.searcher().reconstruct_contact(i)
    }

    pub fn snapshot_contacts(&self, sem: TimeSemantics) -> Result<Vec<Contact>, QueryError> {
        self.searcher().snapshot_contacts(sem)
    }

    /// All contacts, decoded from the index in contact order.
    pub fn contacts(&self) -> Vec<Contact> {
        let s = self.searcher();
        (1..=self.n()).map(|j| s.reconstruct_contact(j)).collect()
    }
}

impl<P: Psi> TemporalQueries for Searcher<'_, P> {
    fn direct_neighbors(&self, u: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        Searcher::direct_neighbors(self, u, sem)
    }
    fn reverse_neighbors(&self, v: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        Searcher::reverse_neighbors(self, v, sem)
    }
    fn active_edge(&self, u: u32, v: u32, sem: TimeSemantics) -> Result<bool, QueryError> {
        Searcher::active_edge(self, u, v, sem)
    }
    fn snapshot(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        Searcher::snapshot(self, sem)
    }
    fn activated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        Searcher::activated_edges(self, sem)
    }
    fn deactivated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        Searcher::deactivated_edges(self, sem)
    }
}

impl TemporalQueries for TgcsaIndex {
    fn direct_neighbors(&self, u: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        self.searcher().direct_neighbors(u, sem)
    }
    fn reverse_neighbors(&self, v: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        self.searcher().reverse_neighbors(v, sem)
    }
    fn active_edge(&self, u: u32, v: u32, sem: TimeSemantics) -> Result<bool, QueryError> {
        self.searcher().active_edge(u, v, sem)
    }
    fn snapshot(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        self.searcher().snapshot(sem)
    }
    fn activated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        self.searcher().activated_edges(sem)
    }
    fn deactivated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        self.searcher().deactivated_edges(sem)
    }
}

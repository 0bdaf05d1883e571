//! Contacts, their text format, and the disjoint-alphabet id space.
//!
//! A contact `(u, v, ts, te)` says edge `(u, v)` is active over `[ts, te)`.
//! Each term is shifted into its own section of a combined alphabet by the
//! `gaps` offsets (`⟨0, ν, 2ν, 2ν+τ⟩`), and the bitmap `B` over that alphabet
//! removes unused values so ids are dense in `[1, σ]`. Because sections never
//! interleave, the section of an id is recoverable from its value.

use std::fmt;
use std::io::BufRead;

use thiserror::Error;

use crate::bitseq::BitSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Contact {
    pub u: u32,
    pub v: u32,
    pub ts: u32,
    /// End instant (exclusive). Zero for three-term contacts, whose end is implied by the kind.
    pub te: u32,
}

impl Contact {
    pub const fn new(u: u32, v: u32, ts: u32, te: u32) -> Self {
        Self { u, v, ts, te }
    }

    pub fn edge(&self) -> (u32, u32) {
        (self.u, self.v)
    }

    pub fn term(&self, section: Section) -> u32 {
        match section {
            Section::Source => self.u,
            Section::Target => self.v,
            Section::Start => self.ts,
            Section::End => self.te,
        }
    }

    fn set_term(&mut self, section: Section, value: u32) {
        match section {
            Section::Source => self.u = value,
            Section::Target => self.v = value,
            Section::Start => self.ts = value,
            Section::End => self.te = value,
        }
    }

    pub(crate) fn from_terms(terms: &[u32]) -> Self {
        let mut c = Contact::default();
        for (q, &t) in terms.iter().enumerate() {
            c.set_term(Section::ALL[q], t);
        }
        c
    }
}

impl fmt::Display for Contact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.te == 0 {
            write!(f, "({},{},{})", self.u, self.v, self.ts)
        } else {
            write!(f, "({},{},{},{})", self.u, self.v, self.ts, self.te)
        }
    }
}

/// How a contact set encodes activity, and therefore how many terms each contact has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ContactKind {
    /// Four terms; active over `[ts, te)`.
    #[default]
    Interval,
    /// Three terms; active from `ts` until the end of the lifetime, `[ts, τ)`.
    Incremental,
    /// Three terms; active only at instant `ts`.
    Point,
}

impl ContactKind {
    pub fn arity(self) -> usize {
        match self {
            ContactKind::Interval => 4,
            ContactKind::Incremental | ContactKind::Point => 3,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            ContactKind::Interval => 0,
            ContactKind::Incremental => 1,
            ContactKind::Point => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(ContactKind::Interval),
            1 => Some(ContactKind::Incremental),
            2 => Some(ContactKind::Point),
            _ => None,
        }
    }
}

/// Role of a term inside a contact, in term order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Source,
    Target,
    Start,
    End,
}

impl Section {
    pub const ALL: [Section; 4] = [Section::Source, Section::Target, Section::Start, Section::End];

    /// Zero-based term index.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_time(self) -> bool {
        matches!(self, Section::Start | Section::End)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: empty interval, start {ts} is not before end {te}")]
    EmptyInterval { line: usize, ts: u32, te: u32 },
    #[error("contact {contact}: term {value} outside universe [1, {limit}]")]
    OutOfUniverse { contact: Contact, value: u32, limit: u32 },
    #[error("contact {contact}: empty interval")]
    EmptyContact { contact: Contact },
    #[error("contact sets of {kind:?} contacts are limited to {limit} total terms")]
    TooLarge { kind: ContactKind, limit: u64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("{section:?} value {value} outside universe [1, {limit}]")]
    OutOfUniverse { section: Section, value: u32, limit: u32 },
    #[error("section {0:?} is not part of this alphabet")]
    NoSuchSection(Section),
    #[error("symbol id {id} does not belong to section {section:?}")]
    WrongSection { id: u32, section: Section },
}

/// A sorted multiset of contacts over vertices `[1, ν]` and instants `[1, τ]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContactSet {
    contacts: Vec<Contact>,
    vertices: u32,
    lifetime: u32,
    kind: ContactKind,
}

impl ContactSet {
    /// Validates and sorts `contacts`.
    ///
    /// `vertices` and `lifetime` default to the largest vertex and instant seen
    /// (for four-term contacts the end instant counts). Overriding them below
    /// the observed maxima is an error.
    pub fn new(
        mut contacts: Vec<Contact>,
        kind: ContactKind,
        vertices: Option<u32>,
        lifetime: Option<u32>,
    ) -> Result<Self, CorpusError> {
        if kind != ContactKind::Interval {
            for c in &mut contacts {
                c.te = 0;
            }
        }
        let max_vertex = contacts.iter().map(|c| c.u.max(c.v)).max().unwrap_or(0);
        let max_time = contacts.iter().map(|c| c.ts.max(c.te)).max().unwrap_or(0);
        let vertices = vertices.unwrap_or(max_vertex);
        let lifetime = lifetime.unwrap_or(max_time);
        for &c in &contacts {
            for (value, limit) in [(c.u, vertices), (c.v, vertices), (c.ts, lifetime)] {
                if value == 0 || value > limit {
                    return Err(CorpusError::OutOfUniverse { contact: c, value, limit });
                }
            }
            if kind == ContactKind::Interval {
                if c.te > lifetime {
                    return Err(CorpusError::OutOfUniverse { contact: c, value: c.te, limit: lifetime });
                }
                if c.ts >= c.te {
                    return Err(CorpusError::EmptyContact { contact: c });
                }
            }
        }
        // positions are stored as u32 in Psi
        let limit = u64::from(u32::MAX);
        if contacts.len() as u64 * kind.arity() as u64 > limit {
            return Err(CorpusError::TooLarge { kind, limit });
        }
        contacts.sort_unstable();
        Ok(Self { contacts, vertices, lifetime, kind })
    }

    pub fn empty(kind: ContactKind) -> Self {
        Self { kind, ..Default::default() }
    }

    pub fn contacts(&self) -> &[Contact] {
        &self.contacts
    }

    pub fn len(&self) -> usize {
        self.contacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contacts.is_empty()
    }

    /// ν
    pub fn vertices(&self) -> u32 {
        self.vertices
    }

    /// τ
    pub fn lifetime(&self) -> u32 {
        self.lifetime
    }

    pub fn kind(&self) -> ContactKind {
        self.kind
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    /// Exclusive end of the activity interval, as implied by the contact kind.
    pub fn effective_end(&self, c: &Contact) -> u64 {
        match self.kind {
            ContactKind::Interval => u64::from(c.te),
            ContactKind::Incremental => u64::from(self.lifetime),
            ContactKind::Point => u64::from(c.ts) + 1,
        }
    }

    /// Same contacts reinterpreted under another kind.
    ///
    /// Going from four terms to three drops the end instant; the reverse is
    /// only meaningful for incremental sets, whose ends become `τ`.
    pub fn with_kind(&self, kind: ContactKind) -> Result<Self, CorpusError> {
        let contacts = self
            .contacts
            .iter()
            .map(|c| match (self.kind, kind) {
                (ContactKind::Incremental, ContactKind::Interval) => Contact { te: self.lifetime, ..*c },
                (ContactKind::Point, ContactKind::Interval) => Contact { te: c.ts + 1, ..*c },
                _ => *c,
            })
            .collect();
        let lifetime = match (self.kind, kind) {
            (ContactKind::Point, ContactKind::Interval) => self.lifetime + 1,
            _ => self.lifetime,
        };
        ContactSet::new(contacts, kind, Some(self.vertices), Some(lifetime))
    }

    /// Writes the contact text format, one contact per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.contacts.len() * 16);
        for c in &self.contacts {
            use std::fmt::Write;
            match self.kind {
                ContactKind::Interval => writeln!(out, "{} {} {} {}", c.u, c.v, c.ts, c.te),
                _ => writeln!(out, "{} {} {}", c.u, c.v, c.ts),
            }
            .unwrap();
        }
        out
    }
}

/// Reads the contact text format: `arity` positive integers per line, `#` comments, blank lines ignored.
pub fn parse_contacts<R: BufRead>(
    input: R,
    kind: ContactKind,
    vertices: Option<u32>,
    lifetime: Option<u32>,
) -> Result<ContactSet, CorpusError> {
    let arity = kind.arity();
    let mut contacts = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| CorpusError::Malformed { line: lineno, msg: e.to_string() })?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut terms = [0u32; 4];
        let mut count = 0;
        for tok in body.split_whitespace() {
            if count == arity {
                return Err(CorpusError::Malformed {
                    line: lineno,
                    msg: format!("expected {arity} columns, found more"),
                });
            }
            let value: u32 = tok.parse().map_err(|_| CorpusError::Malformed {
                line: lineno,
                msg: format!("`{tok}` is not a 32-bit unsigned integer"),
            })?;
            if value == 0 {
                return Err(CorpusError::Malformed { line: lineno, msg: "ids and instants start at 1".into() });
            }
            terms[count] = value;
            count += 1;
        }
        if count != arity {
            return Err(CorpusError::Malformed {
                line: lineno,
                msg: format!("expected {arity} columns, found {count}"),
            });
        }
        let c = Contact::from_terms(&terms[..arity]);
        if kind == ContactKind::Interval && c.ts >= c.te {
            return Err(CorpusError::EmptyInterval { line: lineno, ts: c.ts, te: c.te });
        }
        contacts.push(c);
    }
    ContactSet::new(contacts, kind, vertices, lifetime)
}

/// The offsets, the occupancy bitmap `B`, and the derived dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphabetMap {
    gaps: Vec<u64>,
    b: BitSequence,
    vertices: u32,
    lifetime: u32,
    kind: ContactKind,
}

impl AlphabetMap {
    pub fn build(cs: &ContactSet) -> Self {
        let vertices = u64::from(cs.vertices());
        let lifetime = u64::from(cs.lifetime());
        let gaps = section_gaps(cs.arity(), vertices, lifetime);
        let len = gaps[cs.arity() - 1] + lifetime;
        let mut occupied = vec![false; len as usize];
        for c in cs.contacts() {
            for (q, &g) in gaps.iter().enumerate() {
                occupied[(u64::from(c.term(Section::ALL[q])) + g - 1) as usize] = true;
            }
        }
        Self {
            gaps,
            b: BitSequence::from_bits(occupied),
            vertices: cs.vertices(),
            lifetime: cs.lifetime(),
            kind: cs.kind(),
        }
    }

    pub(crate) fn from_parts(b: BitSequence, vertices: u32, lifetime: u32, kind: ContactKind) -> Option<Self> {
        let gaps = section_gaps(kind.arity(), u64::from(vertices), u64::from(lifetime));
        if b.len() as u64 != gaps[kind.arity() - 1] + u64::from(lifetime) {
            return None;
        }
        Some(Self { gaps, b, vertices, lifetime, kind })
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    pub fn bitmap(&self) -> &BitSequence {
        &self.b
    }

    /// σ, the number of symbols in use.
    pub fn sigma(&self) -> usize {
        self.b.count_ones()
    }

    pub fn vertices(&self) -> u32 {
        self.vertices
    }

    pub fn lifetime(&self) -> u32 {
        self.lifetime
    }

    pub fn kind(&self) -> ContactKind {
        self.kind
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    fn limit(&self, section: Section) -> u32 {
        if section.is_time() {
            self.lifetime
        } else {
            self.vertices
        }
    }

    fn gap(&self, section: Section) -> Result<u64, MapError> {
        self.gaps.get(section.index()).copied().ok_or(MapError::NoSuchSection(section))
    }

    /// Dense id of `value` in `section`, or 0 when the value never occurs there.
    pub fn getmap(&self, value: u32, section: Section) -> Result<u32, MapError> {
        let limit = self.limit(section);
        if value == 0 || value > limit {
            return Err(MapError::OutOfUniverse { section, value, limit });
        }
        let pos = (u64::from(value) + self.gap(section)?) as usize;
        Ok(if self.b.access(pos) { self.b.rank1(pos) as u32 } else { 0 })
    }

    /// Id of the last symbol at or before `value` in the combined alphabet.
    ///
    /// For a time that is a hole this is the nearest earlier symbol, which may
    /// belong to a previous section; it is only meaningful as a range boundary.
    /// `value` is clamped to `[0, τ]`.
    pub fn getmap_floor(&self, value: u32, section: Section) -> u32 {
        debug_assert!(section.is_time());
        let value = value.min(self.lifetime);
        let gap = self.gaps[section.index()];
        self.b.rank1((u64::from(value) + gap) as usize) as u32
    }

    pub fn getunmap(&self, id: u32, section: Section) -> Result<u32, MapError> {
        let gap = self.gap(section)?;
        let pos = self.b.select1(id as usize).ok_or(MapError::WrongSection { id, section })? as u64;
        let value = pos.checked_sub(gap).filter(|&v| v >= 1 && v <= u64::from(self.limit(section)));
        value.map(|v| v as u32).ok_or(MapError::WrongSection { id, section })
    }

    /// Ids `(first, last]` owned by `section`; empty when the section has no symbols.
    pub fn section_ids(&self, section: Section) -> (u32, u32) {
        let q = section.index();
        let lo = self.b.rank1(self.gaps[q] as usize) as u32;
        let hi_pos = self.gaps.get(q + 1).copied().unwrap_or(self.b.len() as u64);
        (lo, self.b.rank1(hi_pos as usize) as u32)
    }

    /// Section of a symbol id.
    pub fn section_of(&self, id: u32) -> Option<Section> {
        let pos = self.b.select1(id as usize)? as u64;
        let q = self.gaps.iter().rposition(|&g| g < pos)?;
        Some(Section::ALL[q])
    }

    pub fn size_bits(&self) -> u64 {
        self.b.size_bits()
    }
}

fn section_gaps(arity: usize, vertices: u64, lifetime: u64) -> Vec<u64> {
    let mut gaps = vec![0, vertices, 2 * vertices, 2 * vertices + lifetime];
    gaps.truncate(arity);
    gaps
}

/// Concatenates the mapped terms of every contact, in contact order.
pub fn build_sid(cs: &ContactSet, am: &AlphabetMap) -> Vec<u32> {
    let arity = cs.arity();
    let mut sid = Vec::with_capacity(cs.len() * arity);
    for c in cs.contacts() {
        for &section in &Section::ALL[..arity] {
            sid.push(am.getmap(c.term(section), section).expect("term inside universe"));
        }
    }
    sid
}

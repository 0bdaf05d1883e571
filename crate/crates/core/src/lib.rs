//! Compressed self-index for temporal graphs.
//!
//! Contacts `(u, v, ts, te)` are mapped onto a combined alphabet and indexed
//! by a compressed suffix array whose Ψ function cycles through the terms of
//! each contact. Neighbourhood, edge, snapshot and event queries are answered
//! directly on the compressed structure.

pub mod baseline;
pub mod batch;
pub mod bitseq;
pub mod corpus;
pub mod format;
pub mod intvec;
pub mod psienc;
pub mod query;
pub mod sacsa;
pub mod synth;

pub use baseline::edgelog::{EdgeLogError, EdgeLogIndex};
pub use baseline::oracle::OracleIndex;
pub use corpus::{parse_contacts, AlphabetMap, Contact, ContactKind, ContactSet, CorpusError, Section};
pub use psienc::{Codec, CodecParams};
pub use query::{QueryError, TemporalQueries, TimeSemantics};
pub use sacsa::{build_index, BuildError, TgcsaIndex, Violation};

//! Text query batches.
//!
//! One query per line: `D u t`, `R v t`, `E u v t`, `S t`, `A t` or `X t`
//! (direct, reverse, active edge, snapshot, activated, deactivated). Any of
//! them may end in `.. t_end [w|s]` to query the interval `[t, t_end)` with
//! weak or strong (default) semantics. `#` starts a comment.

use std::fmt;

use thiserror::Error;

use crate::query::{QueryError, TemporalQueries, TimeSemantics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryOp {
    Direct(u32),
    Reverse(u32),
    Edge(u32, u32),
    Snapshot,
    Activated,
    Deactivated,
}

impl QueryOp {
    pub fn class(&self) -> &'static str {
        match self {
            QueryOp::Direct(_) => "direct",
            QueryOp::Reverse(_) => "reverse",
            QueryOp::Edge(..) => "edge",
            QueryOp::Snapshot => "snapshot",
            QueryOp::Activated => "activated",
            QueryOp::Deactivated => "deactivated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Query {
    pub op: QueryOp,
    pub sem: TimeSemantics,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Vertices(Vec<u32>),
    Edges(Vec<(u32, u32)>),
    Bool(bool),
}

impl Answer {
    /// Number of reported items; a boolean counts as one result when true.
    pub fn count(&self) -> usize {
        match self {
            Answer::Vertices(v) => v.len(),
            Answer::Edges(e) => e.len(),
            Answer::Bool(b) => usize::from(*b),
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Vertices(vs) => {
                for (k, v) in vs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            Answer::Edges(es) => {
                for (k, (u, v)) in es.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({u},{v})")?;
                }
                Ok(())
            }
            Answer::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("query line {line}: {msg}")]
pub struct BatchError {
    pub line: usize,
    pub msg: String,
}

/// Parses one line; `Ok(None)` for blank and comment lines.
pub fn parse_query(text: &str) -> Result<Option<Query>, String> {
    let body = text.split('#').next().unwrap_or("").trim();
    let mut toks = body.split_whitespace();
    let Some(code) = toks.next() else {
        return Ok(None);
    };
    fn num<'a>(toks: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<u32, String> {
        let tok = toks.next().ok_or_else(|| format!("missing {what}"))?;
        tok.parse().map_err(|_| format!("`{tok}` is not a valid {what}"))
    }
    let op = match code {
        "D" => QueryOp::Direct(num(&mut toks, "vertex")?),
        "R" => QueryOp::Reverse(num(&mut toks, "vertex")?),
        "E" => QueryOp::Edge(num(&mut toks, "vertex")?, num(&mut toks, "vertex")?),
        "S" => QueryOp::Snapshot,
        "A" => QueryOp::Activated,
        "X" => QueryOp::Deactivated,
        _ => return Err(format!("unknown query `{code}`")),
    };
    let t = num(&mut toks, "time")?;
    let sem = match toks.next() {
        None => TimeSemantics::Instant(t),
        Some("..") => {
            let end = num(&mut toks, "end time")?;
            match toks.next() {
                None | Some("s") => TimeSemantics::Strong(t, end),
                Some("w") => TimeSemantics::Weak(t, end),
                Some(other) => return Err(format!("expected w or s, got `{other}`")),
            }
        }
        Some(other) => return Err(format!("unexpected `{other}`")),
    };
    if let Some(extra) = toks.next() {
        return Err(format!("unexpected `{extra}`"));
    }
    sem.validate().map_err(|e| e.to_string())?;
    Ok(Some(Query { op, sem }))
}

pub fn parse_batch(text: &str) -> Result<Vec<Query>, BatchError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if let Some(q) = parse_query(line).map_err(|msg| BatchError { line: k + 1, msg })? {
            out.push(q);
        }
    }
    Ok(out)
}

pub fn run_query<Q: TemporalQueries + ?Sized>(index: &Q, q: &Query) -> Result<Answer, QueryError> {
    Ok(match q.op {
        QueryOp::Direct(u) => Answer::Vertices(index.direct_neighbors(u, q.sem)?),
        QueryOp::Reverse(v) => Answer::Vertices(index.reverse_neighbors(v, q.sem)?),
        QueryOp::Edge(u, v) => Answer::Bool(index.active_edge(u, v, q.sem)?),
        QueryOp::Snapshot => Answer::Edges(index.snapshot(q.sem)?),
        QueryOp::Activated => Answer::Edges(index.activated_edges(q.sem)?),
        QueryOp::Deactivated => Answer::Edges(index.deactivated_edges(q.sem)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::g5;
    use crate::psienc::CodecParams;
    use crate::sacsa::build_index;

    #[test]
    fn parsing() {
        assert_eq!(
            parse_query("D 1 5").unwrap(),
            Some(Query { op: QueryOp::Direct(1), sem: TimeSemantics::Instant(5) })
        );
        assert_eq!(
            parse_query("E 4 5 2 .. 7 w  # weak").unwrap(),
            Some(Query { op: QueryOp::Edge(4, 5), sem: TimeSemantics::Weak(2, 7) })
        );
        assert_eq!(parse_query("S 1 .. 3").unwrap().unwrap().sem, TimeSemantics::Strong(1, 3));
        assert_eq!(parse_query("   # nothing").unwrap(), None);
        for bad in ["Q 1", "D", "D x 1", "S 1 2", "S 3 .. 3", "S 0", "S 1 .. 4 q", "A 1 .. 4 s z"] {
            assert!(parse_query(bad).is_err(), "{bad}");
        }
        let err = parse_batch("S 1\n\nD 1\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn g5_formatting() {
        let idx = build_index(&g5(), CodecParams::default()).unwrap();
        let run = |line: &str| run_query(&idx, &parse_query(line).unwrap().unwrap()).unwrap().to_string();
        assert_eq!(run("D 1 5"), "3 4");
        assert_eq!(run("S 6"), "(1,3) (1,4) (4,5)");
        assert_eq!(run("E 4 5 7"), "false");
        assert_eq!(run("E 4 5 6"), "true");
        assert_eq!(run("A 2"), "");
        assert_eq!(run("X 8"), "(1,3) (1,4) (4,3)");
        assert_eq!(run("R 3 7"), "1 4");
    }
}

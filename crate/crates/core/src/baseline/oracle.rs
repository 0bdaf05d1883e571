//! Ground truth by linear scan over the raw contacts.

use crate::corpus::{Contact, ContactKind, ContactSet};
use crate::query::{QueryError, TemporalQueries, TimeSemantics, NO_DEACTIVATION};

#[derive(Debug, Clone)]
pub struct OracleIndex {
    cs: ContactSet,
}

impl OracleIndex {
    pub fn new(cs: ContactSet) -> Self {
        Self { cs }
    }

    pub fn contacts(&self) -> &ContactSet {
        &self.cs
    }

    pub fn matches(&self, c: &Contact, sem: TimeSemantics) -> bool {
        let ts = u64::from(c.ts);
        let te = self.cs.effective_end(c);
        match sem {
            TimeSemantics::Instant(t) => ts <= u64::from(t) && u64::from(t) < te,
            TimeSemantics::Strong(t, t2) => ts <= u64::from(t) && te >= u64::from(t2),
            TimeSemantics::Weak(t, t2) => ts < u64::from(t2) && te > u64::from(t),
        }
    }

    fn scan(&self, sem: TimeSemantics) -> Result<impl Iterator<Item = &Contact> + '_, QueryError> {
        sem.validate()?;
        Ok(self.cs.contacts().iter().filter(move |c| self.matches(c, sem)))
    }

    /// Every matching contact, duplicates included.
    pub fn snapshot_contacts(&self, sem: TimeSemantics) -> Result<Vec<Contact>, QueryError> {
        Ok(self.scan(sem)?.copied().collect())
    }
}

fn distinct<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort_unstable();
    v.dedup();
    v
}

impl TemporalQueries for OracleIndex {
    fn direct_neighbors(&self, u: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        Ok(distinct(self.scan(sem)?.filter(|c| c.u == u).map(|c| c.v).collect()))
    }

    fn reverse_neighbors(&self, v: u32, sem: TimeSemantics) -> Result<Vec<u32>, QueryError> {
        Ok(distinct(self.scan(sem)?.filter(|c| c.v == v).map(|c| c.u).collect()))
    }

    fn active_edge(&self, u: u32, v: u32, sem: TimeSemantics) -> Result<bool, QueryError> {
        Ok(self.scan(sem)?.any(|c| c.u == u && c.v == v))
    }

    fn snapshot(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        Ok(distinct(self.scan(sem)?.map(Contact::edge).collect()))
    }

    fn activated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        let (lo, hi) = sem.validate()?.span();
        Ok(distinct(self.cs.contacts().iter().filter(|c| (lo..=hi).contains(&c.ts)).map(Contact::edge).collect()))
    }

    fn deactivated_edges(&self, sem: TimeSemantics) -> Result<Vec<(u32, u32)>, QueryError> {
        let (lo, hi) = sem.validate()?.span();
        if self.cs.kind() == ContactKind::Incremental {
            return Err(NO_DEACTIVATION);
        }
        let (lo, hi) = (u64::from(lo), u64::from(hi));
        Ok(distinct(
            self.cs
                .contacts()
                .iter()
                .filter(|c| (lo..=hi).contains(&self.cs.effective_end(c)))
                .map(Contact::edge)
                .collect(),
        ))
    }
}

//! Opens either index flavour by peeking at the file header.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use tgcsa::baseline::edgelog::CODEC_TAG;
use tgcsa::format::{Header, Reader};
use tgcsa::{EdgeLogIndex, TemporalQueries, TgcsaIndex};

pub enum LoadedIndex {
    Tgcsa(Box<TgcsaIndex>),
    EdgeLog(Box<EdgeLogIndex>),
}

impl LoadedIndex {
    pub fn open(path: &Path) -> Result<Self> {
        let context = || format!("loading {}", path.display());
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let header = Header::read_from(&mut Reader::new(&bytes)).with_context(context)?;
        Ok(if header.codec == CODEC_TAG {
            LoadedIndex::EdgeLog(Box::new(EdgeLogIndex::from_bytes(&bytes).with_context(context)?))
        } else {
            LoadedIndex::Tgcsa(Box::new(TgcsaIndex::from_bytes(&bytes).with_context(context)?))
        })
    }

    pub fn queries(&self) -> &(dyn TemporalQueries + Sync) {
        match self {
            LoadedIndex::Tgcsa(i) => i.as_ref(),
            LoadedIndex::EdgeLog(i) => i.as_ref(),
        }
    }

    /// `(key, value)` pairs for reports.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        match self {
            LoadedIndex::Tgcsa(i) => vec![
                ("structure", "tgcsa".into()),
                ("codec", i.codec().to_string()),
                ("t_psi", i.t_psi().to_string()),
                ("arity", i.arity().to_string()),
                ("contacts", i.n().to_string()),
                ("size_bits", i.size_bits().to_string()),
                ("bpc", format!("{:.3}", i.bpc())),
            ],
            LoadedIndex::EdgeLog(i) => vec![
                ("structure", "edgelog".into()),
                ("contacts", i.n().to_string()),
                ("size_bits", i.size_bits().to_string()),
                ("bpc", format!("{:.3}", i.bpc())),
            ],
        }
    }
}

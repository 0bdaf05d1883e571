//! Reference implementations answering the same queries as the compressed index.

pub mod edgelog;
pub mod oracle;

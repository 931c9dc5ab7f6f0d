//! File formats: embedding binaries/JSONL and comma-delimited tables.

pub mod embeddings;
pub mod tables;

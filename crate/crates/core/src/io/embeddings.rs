//! Embedding files: the `ASRS` little-endian binary format and its JSONL
//! alternative.
//!
//! Binary layout:
//!
//! ```text
//! "ASRS" | version u32 = 1 | dim u32 | n_views u32 = 5 | n_samples u64
//! per sample: id_len u16 | id bytes | 5 x dim f32, views in canonical order
//! ```
//!
//! Readers sniff the first bytes and accept either encoding.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EmbeddingRecord, SampleId, ViewTag};

pub const MAGIC: &[u8; 4] = b"ASRS";
pub const FORMAT_VERSION: u32 = 1;
pub const N_VIEWS: u32 = 5;
pub const HEADER_LEN: usize = 24;

/// Exact size in bytes of the binary encoding of `ids` at dimension `dim`.
pub fn encoded_len<'a>(dim: usize, ids: impl IntoIterator<Item = &'a str>) -> usize {
    HEADER_LEN
        + ids
            .into_iter()
            .map(|id| 2 + id.len() + N_VIEWS as usize * dim * 4)
            .sum::<usize>()
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<Vec<EmbeddingRecord>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_embeddings(&bytes).map_err(|e| e.in_file(path))
}

/// Decodes either encoding, chosen by sniffing the leading bytes.
pub fn decode_embeddings(bytes: &[u8]) -> Result<Vec<EmbeddingRecord>> {
    if bytes.starts_with(MAGIC) {
        return decode_binary(bytes);
    }
    let first = bytes.iter().copied().find(|b| !b.is_ascii_whitespace());
    match first {
        Some(b'{') => {
            let text = std::str::from_utf8(bytes).map_err(|_| Error::BadMagic)?;
            decode_jsonl(text)
        }
        _ => Err(Error::BadMagic),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, context: impl FnOnce() -> String) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::TruncatedFile { context: context() });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        let b = self.take(2, || what.to_string())?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, || what.to_string())?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let b = self.take(8, || what.to_string())?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }
}

pub fn decode_binary(bytes: &[u8]) -> Result<Vec<EmbeddingRecord>> {
    if !bytes.starts_with(MAGIC) {
        return Err(Error::BadMagic);
    }
    let mut cur = Cursor { bytes, pos: 4 };
    let version = cur.u32("header version")?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let dim = cur.u32("header dim")? as usize;
    let n_views = cur.u32("header n_views")?;
    let n_samples = cur.u64("header n_samples")?;
    if dim == 0 {
        return Err(Error::MalformedHeader("dim must be positive".into()));
    }
    if n_views != N_VIEWS {
        return Err(Error::MalformedHeader(format!("n_views is {n_views}, expected 5")));
    }

    // Each record occupies at least 3 + 20*dim bytes; cap the reservation by what the
    // file can actually hold so a corrupt count cannot trigger a huge allocation.
    let min_record = 3 + 20 * dim;
    let cap = (n_samples as usize).min((bytes.len() - HEADER_LEN) / min_record);
    let mut records = Vec::with_capacity(cap);
    let mut seen = HashSet::with_capacity(cap);
    for i in 0..n_samples {
        let id_len = cur.u16(&format!("id length of sample #{i}"))? as usize;
        let id_bytes = cur.take(id_len, || format!("id of sample #{i}"))?;
        let id = std::str::from_utf8(id_bytes).map_err(|_| Error::InvalidSampleId {
            id: String::from_utf8_lossy(id_bytes).into_owned(),
            reason: "not valid UTF-8",
        })?;
        let sample_id = SampleId::new(id)?;
        let payload = cur.take(dim * 20, || format!("vectors of sample {sample_id}"))?;
        let mut views: [Vec<f32>; 5] = Default::default();
        for (v, chunk) in views.iter_mut().zip(payload.chunks_exact(dim * 4)) {
            *v = chunk
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
        }
        if !seen.insert(sample_id.clone()) {
            return Err(Error::DuplicateSampleId(sample_id.to_string()));
        }
        records.push(EmbeddingRecord::new(sample_id, views)?);
    }
    if cur.pos != bytes.len() {
        return Err(Error::TrailingData(bytes.len() - cur.pos));
    }
    Ok(records)
}

fn check_writable(records: &[EmbeddingRecord]) -> Result<usize> {
    let first = records.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    let mut seen = HashSet::with_capacity(records.len());
    for r in records {
        if r.dim() != dim {
            return Err(Error::MixedDimensions {
                expected: dim,
                found: r.dim(),
            });
        }
        if !seen.insert(r.sample_id()) {
            return Err(Error::DuplicateSampleId(r.sample_id().to_string()));
        }
    }
    Ok(dim)
}

pub fn encode_binary(records: &[EmbeddingRecord]) -> Result<Vec<u8>> {
    let dim = check_writable(records)?;
    let dim_u32 = u32::try_from(dim)
        .map_err(|_| Error::InvalidConfig(format!("dimension {dim} does not fit in u32")))?;
    let mut out = Vec::with_capacity(encoded_len(dim, records.iter().map(|r| r.sample_id().as_str())));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&dim_u32.to_le_bytes());
    out.extend_from_slice(&N_VIEWS.to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for r in records {
        let id = r.sample_id().as_str().as_bytes();
        // SampleId caps ids at 128 bytes.
        out.extend_from_slice(&(id.len() as u16).to_le_bytes());
        out.extend_from_slice(id);
        for v in r.views() {
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn write_embeddings(records: &[EmbeddingRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_binary(records)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlRecord {
    sample_id: String,
    dim: usize,
    views: BTreeMap<ViewTag, Vec<f64>>,
}

pub fn decode_jsonl(text: &str) -> Result<Vec<EmbeddingRecord>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: JsonlRecord = serde_json::from_str(line).map_err(|e| Error::BadJson {
            line: line_no,
            message: e.to_string(),
        })?;
        let sample_id = SampleId::new(raw.sample_id)?;
        let mut views: [Vec<f32>; 5] = Default::default();
        for tag in ViewTag::ALL {
            let v = raw.views.get(&tag).ok_or_else(|| Error::BadJson {
                line: line_no,
                message: format!("sample {sample_id} lacks view {tag}"),
            })?;
            if v.len() != raw.dim {
                return Err(Error::BadJson {
                    line: line_no,
                    message: format!("view {tag} has {} values but dim is {}", v.len(), raw.dim),
                });
            }
            views[tag.index()] = v.iter().map(|&x| x as f32).collect();
        }
        match dim {
            None => dim = Some(raw.dim),
            Some(d) if d != raw.dim => {
                return Err(Error::MixedDimensions {
                    expected: d,
                    found: raw.dim,
                })
            }
            Some(_) => {}
        }
        if !seen.insert(sample_id.clone()) {
            return Err(Error::DuplicateSampleId(sample_id.to_string()));
        }
        records.push(EmbeddingRecord::new(sample_id, views)?);
    }
    if records.is_empty() {
        return Err(Error::BadMagic);
    }
    Ok(records)
}

pub fn encode_jsonl(records: &[EmbeddingRecord]) -> Result<String> {
    let dim = check_writable(records)?;
    let mut out = String::new();
    for r in records {
        let views = ViewTag::ALL
            .into_iter()
            .map(|tag| (tag, r.view(tag).iter().map(|&x| f64::from(x)).collect()))
            .collect();
        let line = JsonlRecord {
            sample_id: r.sample_id().to_string(),
            dim,
            views,
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_embeddings_jsonl(records: &[EmbeddingRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = encode_jsonl(records)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, dim: usize, base: f32) -> EmbeddingRecord {
        let views = std::array::from_fn(|v| (0..dim).map(|i| base + (v * dim + i) as f32 * 0.25).collect());
        EmbeddingRecord::new(SampleId::new(id).unwrap(), views).unwrap()
    }

    #[test]
    fn minimal_round_trip() {
        let r = rec("s1", 2, 1.0);
        let bytes = encode_binary(std::slice::from_ref(&r)).unwrap();
        let back = decode_embeddings(&bytes).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].views().iter().map(Vec::len).collect::<Vec<_>>(), [2; 5]);
        assert_eq!(back[0], r);
    }

    #[test]
    fn byte_count_matches_layout() {
        // header 24 + per sample (2 + 1 id byte + 5 * 3 * 4) = 24 + 2 * 63
        let recs = [rec("a", 3, 0.0), rec("b", 3, 1.0)];
        let bytes = encode_binary(&recs).unwrap();
        assert_eq!(bytes.len(), 150);
        assert_eq!(bytes.len(), encoded_len(3, ["a", "b"]));
        assert_eq!(&bytes[..4], b"ASRS");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let err = encode_binary(&[rec("a", 3, 0.0), rec("b", 4, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::MixedDimensions { expected: 3, found: 4 }));
    }

    #[test]
    fn duplicate_ids_rejected_on_write_and_read() {
        let recs = [rec("a", 2, 0.0), rec("a", 2, 1.0)];
        assert!(matches!(encode_binary(&recs), Err(Error::DuplicateSampleId(_))));

        let mut bytes = encode_binary(&[rec("a", 2, 0.0), rec("b", 2, 1.0)]).unwrap();
        // rename "b" to "a" in place: second id byte sits after header + first record + id_len
        let pos = HEADER_LEN + (2 + 1 + 40) + 2;
        bytes[pos] = b'a';
        assert!(matches!(decode_binary(&bytes), Err(Error::DuplicateSampleId(id)) if id == "a"));
    }

    #[test]
    fn nan_is_reported_with_sample_and_view() {
        let mut bytes = encode_binary(&[rec("s9", 2, 0.0)]).unwrap();
        let last = bytes.len() - 4;
        bytes[last..].copy_from_slice(&f32::NAN.to_le_bytes());
        match decode_binary(&bytes) {
            Err(Error::NonFiniteValue { sample, view, index }) => {
                assert_eq!((sample.as_str(), view, index), ("s9", ViewTag::RotP30, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        let good = encode_binary(&[rec("s", 2, 0.0)]).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_embeddings(&bad), Err(Error::BadMagic)));

        let mut v2 = good.clone();
        v2[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(decode_embeddings(&v2), Err(Error::VersionUnsupported(2))));

        let mut views = good.clone();
        views[12..16].copy_from_slice(&4u32.to_le_bytes());
        assert!(matches!(decode_embeddings(&views), Err(Error::MalformedHeader(_))));

        assert!(matches!(decode_embeddings(&good[..good.len() - 1]), Err(Error::TruncatedFile { .. })));
        assert!(matches!(decode_embeddings(&good[..10]), Err(Error::TruncatedFile { .. })));

        let mut extra = good;
        extra.push(0);
        assert!(matches!(decode_embeddings(&extra), Err(Error::TrailingData(1))));

        assert!(matches!(decode_embeddings(b""), Err(Error::BadMagic)));
    }

    #[test]
    fn jsonl_is_sniffed_and_matches_binary() {
        let recs = vec![rec("a", 3, -1.5), rec("b", 3, 0.1)];
        let text = encode_jsonl(&recs).unwrap();
        assert!(text.starts_with("{\"sample_id\":\"a\",\"dim\":3,\"views\":{\"ORIGINAL\":"));
        assert_eq!(decode_embeddings(text.as_bytes()).unwrap(), recs);
    }

    #[test]
    fn jsonl_missing_view_is_an_error() {
        let line = r#"{"sample_id":"a","dim":1,"views":{"ORIGINAL":[0],"ROT_N30":[0],"ROT_N15":[0],"ROT_P15":[0]}}"#;
        assert!(matches!(decode_embeddings(line.as_bytes()), Err(Error::BadJson { line: 1, .. })));
    }

    #[test]
    fn writes_are_deterministic() {
        let recs = [rec("a", 4, 0.5), rec("b", 4, 2.0)];
        assert_eq!(encode_binary(&recs).unwrap(), encode_binary(&recs).unwrap());
    }
}

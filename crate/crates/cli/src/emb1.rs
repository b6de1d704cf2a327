//! The EMB1 embedding file: little-endian `"EMB1"`, `u32 n`, `u32 dim`,
//! `u8 normalized`, then `n` records of `u32 id_len`, id bytes, `dim × f32`.

use std::path::Path;

use newsimpact_core::embed::EmbeddingMatrix;
use thiserror::Error;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: usize = 13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Emb1Error {
    #[error("bad magic {0:?}, expected \"EMB1\"")]
    BadMagic([u8; 4]),
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("dimension is zero")]
    ZeroDimension,
    #[error("normalized flag must be 0 or 1, got {0}")]
    BadFlag(u8),
    #[error("id of record {0} is not valid UTF-8")]
    BadId(usize),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("{0} trailing bytes after the last record")]
    TrailingBytes(usize),
    #[error("{0} does not fit in the u32 fields of the format")]
    TooLarge(&'static str),
    #[error(transparent)]
    Invalid(#[from] newsimpact_core::Error),
}

fn check_ids(m: &EmbeddingMatrix) -> Result<(), Emb1Error> {
    let mut seen = std::collections::BTreeSet::new();
    for id in m.ids() {
        if !seen.insert(id.as_str()) {
            return Err(Emb1Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

fn to_u32(v: usize, what: &'static str) -> Result<u32, Emb1Error> {
    u32::try_from(v).map_err(|_| Emb1Error::TooLarge(what))
}

pub fn encode(m: &EmbeddingMatrix) -> Result<Vec<u8>, Emb1Error> {
    if m.dim() == 0 {
        return Err(Emb1Error::ZeroDimension);
    }
    check_ids(m)?;
    let mut out = Vec::with_capacity(HEADER_LEN + m.len() * (8 + 4 * m.dim()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&to_u32(m.len(), "row count")?.to_le_bytes());
    out.extend_from_slice(&to_u32(m.dim(), "dimension")?.to_le_bytes());
    out.push(u8::from(m.is_normalized()));
    for (i, id) in m.ids().iter().enumerate() {
        out.extend_from_slice(&to_u32(id.len(), "id length")?.to_le_bytes());
        out.extend_from_slice(id.as_bytes());
        for v in m.row(i) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8], Emb1Error> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            Emb1Error::Truncated(format!(
                "{what} needs {len} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))
        })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32, Emb1Error> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn decode(bytes: &[u8]) -> Result<EmbeddingMatrix, Emb1Error> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Emb1Error::BadMagic([magic[0], magic[1], magic[2], magic[3]]));
    }
    let n = cur.u32("row count")? as usize;
    let dim = cur.u32("dimension")? as usize;
    if dim == 0 {
        return Err(Emb1Error::ZeroDimension);
    }
    let flag = cur.take(1, "normalized flag")?[0];
    let normalized = match flag {
        0 => false,
        1 => true,
        other => return Err(Emb1Error::BadFlag(other)),
    };
    // the smallest possible record is an empty id plus its floats
    let min_record = 4 + 4 * dim;
    if (bytes.len() - HEADER_LEN) / min_record < n {
        return Err(Emb1Error::Truncated(format!(
            "header declares {n} rows of dimension {dim} but only {} bytes follow",
            bytes.len() - HEADER_LEN
        )));
    }
    let mut ids = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        let len = cur.u32("id length")? as usize;
        let id = std::str::from_utf8(cur.take(len, "id")?).map_err(|_| Emb1Error::BadId(i))?;
        ids.push(id.to_string());
        let floats = cur.take(4 * dim, "row values")?;
        data.extend(
            floats
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])),
        );
    }
    if cur.pos != bytes.len() {
        return Err(Emb1Error::TrailingBytes(bytes.len() - cur.pos));
    }
    let m = EmbeddingMatrix::new(ids, dim, data, normalized)?;
    check_ids(&m)?;
    Ok(m)
}

pub fn save_embeddings(m: &EmbeddingMatrix, path: &Path) -> Result<()> {
    let bytes = encode(m).map_err(|source| Error::Emb1 {
        path: path.to_path_buf(),
        source,
    })?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, bytes).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = std::fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|source| Error::Emb1 {
        path: path.to_path_buf(),
        source,
    })
}

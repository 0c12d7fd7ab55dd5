//! Binary model file.
//!
//! ```text
//! magic      8 bytes  "NMTNGRAM"
//! version    u32 LE
//! header_len u32 LE
//! header     JSON (order, vocab_size, min_count, discounts, ngram_counts)
//! vocab      vocab_size × (u32 LE byte length, UTF-8 bytes), in id order
//! orders     for k in 1..=order: u64 LE entry count, then entries sorted by
//!            key, each k × u32 LE token ids followed by u32 LE count
//! ```
//!
//! Counts at orders below the top are continuation counts. Discounts and
//! history totals are recomputed on load; the header copy is informational.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lm::{NGramModel, BOS, EOS, UNK};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"NMTNGRAM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format_version: u32,
    pub order: usize,
    pub vocab_size: usize,
    pub min_count: u32,
    pub discounts: Vec<f64>,
    pub ngram_counts: Vec<usize>,
}

impl NGramModel {
    pub fn header(&self) -> ModelHeader {
        ModelHeader {
            format_version: FORMAT_VERSION,
            order: self.order,
            vocab_size: self.vocab.len(),
            min_count: self.min_count,
            discounts: self.discounts.clone(),
            ngram_counts: self.counts.iter().map(HashMap::len).collect(),
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let header = serde_json::to_vec(&self.header()).map_err(std::io::Error::other)?;
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        for word in &self.vocab {
            w.write_all(&(word.len() as u32).to_le_bytes())?;
            w.write_all(word.as_bytes())?;
        }
        for table in &self.counts {
            let mut entries: Vec<(&[u32], u32)> = table.iter().map(|(g, &c)| (&g[..], c)).collect();
            entries.sort_unstable();
            w.write_all(&(entries.len() as u64).to_le_bytes())?;
            for (gram, count) in entries {
                for id in gram {
                    w.write_all(&id.to_le_bytes())?;
                }
                w.write_all(&count.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|()| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let bad = |what: &str| Error::Model(what.to_string());
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(bad("not a noisemt n-gram model (bad magic)"));
        }
        let version = read_u32(r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let header_len = read_u32(r)? as usize;
        let mut header = vec![0u8; header_len];
        read_exact(r, &mut header)?;
        let header: ModelHeader = serde_json::from_slice(&header).map_err(|e| Error::Model(format!("header: {e}")))?;
        if header.order == 0 || header.vocab_size < 3 {
            return Err(bad("header describes an empty model"));
        }

        let mut vocab = Vec::with_capacity(header.vocab_size);
        for _ in 0..header.vocab_size {
            let len = read_u32(r)? as usize;
            let mut buf = vec![0u8; len];
            read_exact(r, &mut buf)?;
            vocab.push(String::from_utf8(buf).map_err(|_| bad("vocabulary entry is not UTF-8"))?);
        }
        if vocab[..3] != [UNK, EOS, BOS] {
            return Err(bad("reserved vocabulary entries out of place"));
        }

        let mut counts = Vec::with_capacity(header.order);
        for k in 1..=header.order {
            let n = read_u64(r)? as usize;
            let mut table = HashMap::with_capacity(n);
            for _ in 0..n {
                let mut gram = Vec::with_capacity(k);
                for _ in 0..k {
                    let id = read_u32(r)?;
                    if id as usize >= vocab.len() {
                        return Err(bad("token id out of range"));
                    }
                    gram.push(id);
                }
                table.insert(gram.into_boxed_slice(), read_u32(r)?);
            }
            counts.push(table);
        }
        if counts[0].is_empty() {
            return Err(bad("model has no unigrams"));
        }

        let index = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        Ok(NGramModel::from_parts(
            header.order,
            header.min_count,
            vocab,
            index,
            counts,
        ))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(&mut BufReader::new(file)).map_err(|e| match e {
            Error::Model(m) => Error::Model(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Model(format!("truncated model file: {e}")))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

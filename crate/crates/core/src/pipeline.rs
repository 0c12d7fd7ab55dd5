//! Batched, order-preserving corpus noising.
//!
//! Documents are read in bounded batches, noised in parallel (each document
//! from its own RNG stream keyed by its corpus index) and written back in
//! input order, so output is identical for any thread count and memory is
//! bounded by the batch limits plus the largest single document.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Document, DocumentReader};
use crate::error::{Error, Result};
use crate::noising::{bart_noise_traced, NoiseSpec};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug)]
pub struct StreamConfig {
    /// Maximum documents buffered per batch.
    pub batch_docs: usize,
    /// Soft cap on buffered token text; a batch is flushed once it is reached.
    pub batch_bytes: usize,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            batch_docs: 16_384,
            batch_bytes: 32 << 20,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct NoiseCorpusStats {
    pub documents: usize,
    pub sentences: usize,
    pub tokens: usize,
    pub covered_tokens: usize,
    pub masks: usize,
    pub batches: usize,
    pub peak_buffered_bytes: usize,
    pub max_document_bytes: usize,
}

/// Reads documents from `input`, writes noised documents to `source` and the
/// untouched originals to `target`, both blank-line separated.
pub fn noise_corpus<R, S, T>(
    input: DocumentReader<R>,
    spec: &NoiseSpec,
    cfg: StreamConfig,
    source: &mut S,
    target: &mut T,
) -> Result<NoiseCorpusStats>
where
    R: BufRead,
    S: Write + ?Sized,
    T: Write + ?Sized,
{
    spec.validate()?;
    let mut stats = NoiseCorpusStats::default();
    let mut batch: Vec<Document> = Vec::new();
    let mut buffered = 0usize;
    let mut first_index = 0usize;

    for doc in input {
        let doc = doc?;
        let bytes = doc.text_bytes();
        stats.max_document_bytes = stats.max_document_bytes.max(bytes);
        buffered += bytes;
        batch.push(doc);
        stats.peak_buffered_bytes = stats.peak_buffered_bytes.max(buffered);
        if batch.len() >= cfg.batch_docs.max(1) || buffered >= cfg.batch_bytes {
            flush(&mut batch, first_index, spec, source, target, &mut stats)?;
            first_index = stats.documents;
            buffered = 0;
        }
    }
    if !batch.is_empty() {
        flush(&mut batch, first_index, spec, source, target, &mut stats)?;
    }
    source.flush().map_err(|e| Error::io("<source output>", e))?;
    target.flush().map_err(|e| Error::io("<target output>", e))?;
    Ok(stats)
}

fn flush<S, T>(
    batch: &mut Vec<Document>,
    first_index: usize,
    spec: &NoiseSpec,
    source: &mut S,
    target: &mut T,
    stats: &mut NoiseCorpusStats,
) -> Result<()>
where
    S: Write + ?Sized,
    T: Write + ?Sized,
{
    let noised: Vec<_> = batch
        .par_iter()
        .enumerate()
        .map(|(i, doc)| {
            let mut rng = Rng::for_stream(spec.seed, (first_index + i) as u64);
            bart_noise_traced(doc, spec, &mut rng)
        })
        .collect();

    let werr = |e| Error::io("<output>", e);
    for (i, (doc, (noisy, trace))) in batch.iter().zip(&noised).enumerate() {
        if first_index + i > 0 {
            source.write_all(b"\n").map_err(werr)?;
            target.write_all(b"\n").map_err(werr)?;
        }
        noisy.write_to(source).map_err(werr)?;
        doc.write_to(target).map_err(werr)?;
        stats.sentences += doc.sentences().len();
        stats.tokens += trace.tokens;
        stats.covered_tokens += trace.covered;
        stats.masks += trace.masks;
    }
    stats.documents += batch.len();
    stats.batches += 1;
    batch.clear();
    Ok(())
}

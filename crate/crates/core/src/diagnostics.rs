//! Output diagnostics: per-position model confidence, length-matched
//! distractors, source copying, beam degradation, frequency-bucketed word
//! F-measure and rank/frequency profiles.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, Token};
use crate::error::{Error, Result};
use crate::metrics::corpus_bleu;
use crate::rng::Rng;

/// Output tokens with the linear probability the decoder gave each one.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredHypothesis {
    pub tokens: Sentence,
    pub token_probs: Vec<f64>,
}

#[derive(Deserialize, Serialize)]
struct ScoredRecord {
    tokens: Vec<String>,
    probs: Vec<f64>,
}

impl ScoredHypothesis {
    pub fn new(tokens: Sentence, token_probs: Vec<f64>) -> std::result::Result<Self, String> {
        if tokens.len() != token_probs.len() {
            return Err(format!(
                "{} tokens but {} probabilities",
                tokens.len(),
                token_probs.len()
            ));
        }
        if let Some(p) = token_probs.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(format!("probability {p} outside (0, 1]"));
        }
        Ok(ScoredHypothesis { tokens, token_probs })
    }

    /// One JSON-lines record: `{"tokens": [...], "probs": [...]}`.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&ScoredRecord {
            tokens: self.tokens.iter().map(str::to_owned).collect(),
            probs: self.token_probs.clone(),
        })
        .expect("record serializes")
    }
}

/// Streams a JSON-lines file of scored hypotheses; blank lines are skipped.
pub struct ScoredReader<R> {
    reader: R,
    path: PathBuf,
    line_no: usize,
    buf: String,
}

impl<R: BufRead> ScoredReader<R> {
    pub fn new(reader: R, label: impl Into<PathBuf>) -> Self {
        ScoredReader {
            reader,
            path: label.into(),
            line_no: 0,
            buf: String::new(),
        }
    }

    fn malformed(&self, message: String) -> Error {
        Error::Malformed {
            path: self.path.clone(),
            line: self.line_no,
            message,
        }
    }
}

impl<R: BufRead> Iterator for ScoredReader<R> {
    type Item = Result<ScoredHypothesis>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => self.line_no += 1,
                Err(e) => return Some(Err(self.malformed(e.to_string()))),
            }
            if self.buf.trim().is_empty() {
                continue;
            }
            let record: ScoredRecord = match serde_json::from_str(&self.buf) {
                Ok(r) => r,
                Err(e) => return Some(Err(self.malformed(e.to_string()))),
            };
            let mut tokens = Vec::with_capacity(record.tokens.len());
            for t in record.tokens {
                match Token::new(t) {
                    Ok(t) => tokens.push(t),
                    Err(e) => return Some(Err(self.malformed(e.to_string()))),
                }
            }
            return Some(ScoredHypothesis::new(Sentence::new(tokens), record.probs).map_err(|m| self.malformed(m)));
        }
    }
}

pub fn read_scored(path: impl AsRef<Path>) -> Result<ScoredReader<std::io::BufReader<std::fs::File>>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(ScoredReader::new(std::io::BufReader::new(f), path))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositionStat {
    pub position: usize,
    pub mean_prob: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UncertaintyProfile {
    pub per_position: Vec<PositionStat>,
}

/// Mean token probability at each position `t < max_pos`, over the
/// hypotheses long enough to have a token there.
pub fn uncertainty_profile<'a, I>(hyps: I, max_pos: usize) -> Result<UncertaintyProfile>
where
    I: IntoIterator<Item = &'a ScoredHypothesis>,
{
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut seen = 0usize;
    for h in hyps {
        seen += 1;
        let len = h.token_probs.len().min(max_pos);
        if sums.len() < len {
            sums.resize(len, 0.0);
            counts.resize(len, 0);
        }
        for (t, &p) in h.token_probs[..len].iter().enumerate() {
            sums[t] += p;
            counts[t] += 1;
        }
    }
    if seen == 0 {
        return Err(Error::EmptyInput("no scored hypotheses".into()));
    }
    Ok(UncertaintyProfile {
        per_position: sums
            .iter()
            .zip(&counts)
            .enumerate()
            .filter(|(_, (_, &c))| c > 0)
            .map(|(position, (&s, &count))| PositionStat {
                position,
                mean_prob: s / count as f64,
                count,
            })
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distractor {
    pub sentence: Sentence,
    /// False when no pool sentence had the reference's length.
    pub exact: bool,
}

/// For each reference, a uniformly chosen pool sentence of the same length;
/// failing that, of the nearest length (shorter on ties).
pub fn build_distractors<'a, I>(refs: I, pool: Vec<Sentence>, rng: &mut Rng) -> Result<Vec<Distractor>>
where
    I: IntoIterator<Item = &'a Sentence>,
{
    if pool.is_empty() {
        return Err(Error::EmptyInput("distractor pool".into()));
    }
    let mut by_len: BTreeMap<usize, Vec<Sentence>> = BTreeMap::new();
    for s in pool {
        by_len.entry(s.len()).or_default().push(s);
    }
    Ok(refs
        .into_iter()
        .map(|r| {
            let want = r.len();
            let (len, bucket) = if let Some(b) = by_len.get(&want) {
                (want, b)
            } else {
                let below = by_len.range(..want).next_back();
                let above = by_len.range(want..).next();
                match (below, above) {
                    (Some(b), Some(a)) => {
                        if want - b.0 <= a.0 - want {
                            (*b.0, b.1)
                        } else {
                            (*a.0, a.1)
                        }
                    }
                    (Some(b), None) => (*b.0, b.1),
                    (None, Some(a)) => (*a.0, a.1),
                    (None, None) => unreachable!("pool is non-empty"),
                }
            };
            Distractor {
                sentence: bucket[rng.below(bucket.len())].clone(),
                exact: len == want,
            }
        })
        .collect())
}

/// Tokens without any alphabetic character (punctuation, numerals).
pub fn is_punct_or_numeral(token: &str) -> bool {
    !token.chars().any(char::is_alphabetic)
}

fn counts<'a>(tokens: impl Iterator<Item = &'a str>) -> HashMap<&'a str, usize> {
    let mut m = HashMap::new();
    for t in tokens {
        *m.entry(t).or_insert(0) += 1;
    }
    m
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CopyCounts {
    pub copied: usize,
    pub output_tokens: usize,
}

impl CopyCounts {
    pub fn ratio(&self) -> f64 {
        if self.output_tokens == 0 {
            0.0
        } else {
            100.0 * self.copied as f64 / self.output_tokens as f64
        }
    }
}

/// Multiset-clipped overlap between one output and its source.
pub fn copy_counts(source: &Sentence, output: &Sentence, exclude_punct_num: bool) -> CopyCounts {
    let keep = |t: &&str| !(exclude_punct_num && is_punct_or_numeral(t));
    let src = counts(source.iter().filter(keep));
    let out = counts(output.iter().filter(keep));
    CopyCounts {
        copied: out.iter().map(|(t, &c)| c.min(src.get(t).copied().unwrap_or(0))).sum(),
        output_tokens: out.values().sum(),
    }
}

/// Percentage of output tokens that also occur in the source (clipped by
/// source count), aggregated over the corpus.
pub fn copy_ratio<'a, I>(pairs: I, exclude_punct_num: bool) -> Result<f64>
where
    I: IntoIterator<Item = (&'a Sentence, &'a Sentence)>,
{
    let mut total = CopyCounts::default();
    let mut n = 0usize;
    for (src, out) in pairs {
        let c = copy_counts(src, out, exclude_punct_num);
        total.copied += c.copied;
        total.output_tokens += c.output_tokens;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput("no (source, output) pairs".into()));
    }
    Ok(total.ratio())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BeamRow {
    pub beam: usize,
    pub bleu: f64,
    pub copy_ratio: f64,
    /// Relative to the smallest beam.
    pub bleu_delta: f64,
    pub copy_delta: f64,
}

/// BLEU and copy ratio per beam size, with deltas against the smallest beam.
pub fn beam_report(
    outputs_by_beam: &BTreeMap<usize, Vec<Sentence>>,
    refs: &[Vec<Sentence>],
    sources: &[Sentence],
    exclude_punct_num: bool,
) -> Result<Vec<BeamRow>> {
    if outputs_by_beam.len() < 2 {
        return Err(Error::param("beam report needs at least two beam sizes"));
    }
    let mut rows: Vec<BeamRow> = Vec::with_capacity(outputs_by_beam.len());
    for (&beam, hyps) in outputs_by_beam {
        if hyps.len() != sources.len() {
            return Err(Error::mismatch(
                format!("beam {beam} outputs vs sources"),
                hyps.len(),
                sources.len(),
            ));
        }
        let bleu = corpus_bleu(hyps, refs)?.score;
        let copy = copy_ratio(sources.iter().zip(hyps), exclude_punct_num)?;
        let (b0, c0) = rows.first().map_or((bleu, copy), |r| (r.bleu, r.copy_ratio));
        rows.push(BeamRow {
            beam,
            bleu,
            copy_ratio: copy,
            bleu_delta: bleu - b0,
            copy_delta: copy - c0,
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    High,
    Medium,
    Low,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::High, Bucket::Medium, Bucket::Low];

    pub fn name(self) -> &'static str {
        match self {
            Bucket::High => "high",
            Bucket::Medium => "medium",
            Bucket::Low => "low",
        }
    }
}

/// Frequency ranks from a training corpus; rank 1 is the most frequent
/// token, ties broken lexicographically.
#[derive(Clone, Debug)]
pub struct FreqBuckets {
    pub high_max_rank: usize,
    pub med_max_rank: usize,
    ranks: HashMap<String, usize>,
}

pub const HIGH_MAX_RANK: usize = 3_000;
pub const MED_MAX_RANK: usize = 12_000;

/// Tokens ordered by descending count, then lexicographically.
pub fn rank_tokens<'a, I>(corpus: I) -> Vec<(String, usize)>
where
    I: IntoIterator<Item = &'a Sentence>,
{
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for s in corpus {
        for t in s.iter() {
            *freq.entry(t).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = freq.into_iter().map(|(t, c)| (t.to_owned(), c)).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

impl FreqBuckets {
    pub fn from_corpus<'a, I>(corpus: I, high_max_rank: usize, med_max_rank: usize) -> Self
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let ranks = rank_tokens(corpus)
            .into_iter()
            .enumerate()
            .map(|(i, (t, _))| (t, i + 1))
            .collect();
        FreqBuckets {
            high_max_rank,
            med_max_rank,
            ranks,
        }
    }

    pub fn rank(&self, token: &str) -> Option<usize> {
        self.ranks.get(token).copied()
    }

    pub fn bucket(&self, token: &str) -> Bucket {
        match self.rank(token) {
            Some(r) if r <= self.high_max_rank => Bucket::High,
            Some(r) if r <= self.med_max_rank => Bucket::Medium,
            _ => Bucket::Low,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BucketScore {
    pub matched: usize,
    pub hyp_tokens: usize,
    pub ref_tokens: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl BucketScore {
    fn finish(mut self) -> Self {
        let pct = |a: usize, b: usize| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
        self.precision = pct(self.matched, self.hyp_tokens);
        self.recall = pct(self.matched, self.ref_tokens);
        self.f1 = if self.precision + self.recall == 0.0 {
            0.0
        } else {
            2.0 * self.precision * self.recall / (self.precision + self.recall)
        };
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreqReport {
    pub high: BucketScore,
    pub medium: BucketScore,
    pub low: BucketScore,
    /// All buckets pooled.
    pub overall: BucketScore,
}

impl FreqReport {
    pub fn get(&self, b: Bucket) -> &BucketScore {
        match b {
            Bucket::High => &self.high,
            Bucket::Medium => &self.medium,
            Bucket::Low => &self.low,
        }
    }
}

/// Micro-averaged word precision/recall/F1 per frequency bucket. Matches per
/// sentence are the multiset intersection of hypothesis and reference.
pub fn freq_fmeasure(hyps: &[Sentence], refs: &[Sentence], buckets: &FreqBuckets) -> Result<FreqReport> {
    if hyps.len() != refs.len() {
        return Err(Error::mismatch("hypotheses vs references", hyps.len(), refs.len()));
    }
    let mut acc = [BucketScore::default(); 3];
    let slot = |b: Bucket| b as usize;
    for (h, r) in hyps.iter().zip(refs) {
        let hc = counts(h.iter());
        let rc = counts(r.iter());
        for (t, &c) in &hc {
            let b = slot(buckets.bucket(t));
            acc[b].hyp_tokens += c;
            acc[b].matched += c.min(rc.get(t).copied().unwrap_or(0));
        }
        for (t, &c) in &rc {
            acc[slot(buckets.bucket(t))].ref_tokens += c;
        }
    }
    let overall = acc.iter().fold(BucketScore::default(), |mut a, b| {
        a.matched += b.matched;
        a.hyp_tokens += b.hyp_tokens;
        a.ref_tokens += b.ref_tokens;
        a
    });
    Ok(FreqReport {
        high: acc[0].finish(),
        medium: acc[1].finish(),
        low: acc[2].finish(),
        overall: overall.finish(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LexRow {
    pub rank: usize,
    pub token: String,
    pub count: usize,
    pub freq: f64,
    pub log10_freq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LexDist {
    pub rows: Vec<LexRow>,
    /// Measured tokens that are unranked or beyond `max_rank`.
    pub tail_count: usize,
    pub tail_freq: f64,
    pub total: usize,
}

/// Frequency of each ranked token in `corpus`, normalized by the corpus
/// token count, with ranks taken from `rank_source`.
pub fn lexdist(corpus: &[Sentence], rank_source: &[Sentence], max_rank: Option<usize>) -> Result<LexDist> {
    if corpus.is_empty() || rank_source.is_empty() {
        return Err(Error::EmptyInput("lexdist corpora".into()));
    }
    let mut ranked = rank_tokens(rank_source);
    if let Some(m) = max_rank {
        ranked.truncate(m);
    }
    let measured = counts(corpus.iter().flat_map(|s| s.iter()));
    let total: usize = measured.values().sum();
    let norm = |c: usize| if total == 0 { 0.0 } else { c as f64 / total as f64 };

    let mut in_rows = 0usize;
    let rows: Vec<LexRow> = ranked
        .into_iter()
        .enumerate()
        .map(|(i, (token, _))| {
            let count = measured.get(token.as_str()).copied().unwrap_or(0);
            in_rows += count;
            let freq = norm(count);
            LexRow {
                rank: i + 1,
                token,
                count,
                freq,
                log10_freq: freq.log10(),
            }
        })
        .collect();
    let tail_count = total - in_rows;
    Ok(LexDist {
        rows,
        tail_count,
        tail_freq: norm(tail_count),
        total,
    })
}

//! Interpolated Kneser-Ney n-gram language model.
//!
//! Sentences are padded with `order - 1` begin markers and one end marker.
//! The highest order uses raw counts; lower orders use continuation counts
//! (number of distinct left extensions). Each order has a single absolute
//! discount `D = n1 / (n1 + 2·n2)` estimated from its own count-of-counts,
//! and the unigram level interpolates with a uniform distribution over the
//! predictable vocabulary, so every token gets non-zero probability.

use std::collections::HashMap;

use crate::corpus::Sentence;
use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

pub(crate) const UNK_ID: u32 = 0;
pub(crate) const EOS_ID: u32 = 1;
pub(crate) const BOS_ID: u32 = 2;

/// Discount used when an order has no singletons or no doubletons.
pub const FALLBACK_DISCOUNT: f64 = 0.5;

pub trait LanguageModel: Sync {
    fn order(&self) -> usize;

    /// Natural-log probability of each token and of the end marker.
    fn token_log_probs(&self, sentence: &Sentence) -> Vec<f64>;

    fn log_prob(&self, sentence: &Sentence) -> f64 {
        self.token_log_probs(sentence).iter().sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LmConfig {
    pub order: usize,
    /// Tokens seen fewer times than this are mapped to `<unk>`.
    pub min_count: u32,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig { order: 3, min_count: 2 }
    }
}

type Gram = Box<[u32]>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct HistoryStats {
    /// Sum of (adjusted) counts of all continuations.
    pub total: u64,
    /// Number of distinct continuations.
    pub distinct: u32,
}

#[derive(Clone, Debug)]
pub struct NGramModel {
    pub(crate) order: usize,
    pub(crate) min_count: u32,
    /// id → surface. Ids 0, 1, 2 are `<unk>`, `</s>`, `<s>`; the rest are
    /// sorted lexicographically.
    pub(crate) vocab: Vec<String>,
    pub(crate) index: HashMap<String, u32>,
    /// `counts[k-1]`: k-gram → raw count at the top order, continuation
    /// count below it.
    pub(crate) counts: Vec<HashMap<Gram, u32>>,
    /// `histories[k-1]`: (k-1)-gram → stats over its continuations.
    pub(crate) histories: Vec<HashMap<Gram, HistoryStats>>,
    pub(crate) discounts: Vec<f64>,
}

fn estimate_discount(counts: &HashMap<Gram, u32>) -> f64 {
    let n1 = counts.values().filter(|&&c| c == 1).count() as f64;
    let n2 = counts.values().filter(|&&c| c == 2).count() as f64;
    if n1 == 0.0 || n2 == 0.0 {
        FALLBACK_DISCOUNT
    } else {
        n1 / (n1 + 2.0 * n2)
    }
}

pub(crate) fn history_stats(counts: &HashMap<Gram, u32>) -> HashMap<Gram, HistoryStats> {
    let mut out: HashMap<Gram, HistoryStats> = HashMap::new();
    for (g, &c) in counts {
        let h = out.entry(g[..g.len() - 1].into()).or_default();
        h.total += u64::from(c);
        h.distinct += 1;
    }
    out
}

impl NGramModel {
    /// Trains on every sentence of `corpus`; empty sentences contribute only
    /// the end marker.
    pub fn train<I>(corpus: I, cfg: LmConfig) -> Result<Self>
    where
        I: IntoIterator<Item = Sentence>,
    {
        if cfg.order == 0 {
            return Err(Error::param("LM order must be >= 1"));
        }

        // first pass: intern surfaces and count unigrams
        let mut scratch_ids: HashMap<String, u32> = HashMap::new();
        let mut scratch_freq: Vec<u64> = Vec::new();
        let mut sentences: Vec<Vec<u32>> = Vec::new();
        for s in corpus {
            let ids = s
                .into_tokens()
                .into_iter()
                .map(|t| {
                    let next = scratch_ids.len() as u32;
                    let id = *scratch_ids.entry(String::from(t)).or_insert(next);
                    if id == next {
                        scratch_freq.push(0);
                    }
                    scratch_freq[id as usize] += 1;
                    id
                })
                .collect();
            sentences.push(ids);
        }
        if sentences.is_empty() {
            return Err(Error::EmptyInput("LM training corpus".into()));
        }

        let mut kept: Vec<(&String, u32)> = scratch_ids
            .iter()
            .filter(|(w, &id)| {
                scratch_freq[id as usize] >= u64::from(cfg.min_count) && ![UNK, BOS, EOS].contains(&w.as_str())
            })
            .map(|(w, &id)| (w, id))
            .collect();
        kept.sort_unstable();

        let mut vocab: Vec<String> = vec![UNK.into(), EOS.into(), BOS.into()];
        let mut remap = vec![UNK_ID; scratch_ids.len()];
        for (w, scratch) in kept {
            remap[scratch as usize] = vocab.len() as u32;
            vocab.push(w.clone());
        }
        let index = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();

        let order = cfg.order;
        let mut raw: Vec<HashMap<Gram, u32>> = vec![HashMap::new(); order];
        let mut padded: Vec<u32> = Vec::new();
        for ids in &sentences {
            padded.clear();
            padded.extend(std::iter::repeat_n(BOS_ID, order - 1));
            padded.extend(ids.iter().map(|&i| remap[i as usize]));
            padded.push(EOS_ID);
            for i in (order - 1)..padded.len() {
                for k in 1..=order {
                    *raw[k - 1].entry(padded[i + 1 - k..=i].into()).or_insert(0) += 1;
                }
            }
        }
        drop(sentences);

        // lower orders: number of distinct one-token left extensions
        let mut counts: Vec<HashMap<Gram, u32>> = Vec::with_capacity(order);
        for k in 1..order {
            let mut cont: HashMap<Gram, u32> = HashMap::with_capacity(raw[k - 1].len());
            for g in raw[k].keys() {
                *cont.entry(g[1..].into()).or_insert(0) += 1;
            }
            counts.push(cont);
        }
        counts.push(std::mem::take(&mut raw[order - 1]));

        Ok(Self::from_parts(order, cfg.min_count, vocab, index, counts))
    }

    pub(crate) fn from_parts(
        order: usize,
        min_count: u32,
        vocab: Vec<String>,
        index: HashMap<String, u32>,
        counts: Vec<HashMap<Gram, u32>>,
    ) -> Self {
        let discounts = counts.iter().map(estimate_discount).collect();
        let histories = counts.iter().map(history_stats).collect();
        NGramModel {
            order,
            min_count,
            vocab,
            index,
            counts,
            histories,
            discounts,
        }
    }

    pub fn min_count(&self) -> u32 {
        self.min_count
    }

    pub fn discounts(&self) -> &[f64] {
        &self.discounts
    }

    /// Vocabulary including `<unk>`, `</s>` and `<s>`.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Every token the model can predict: the vocabulary minus `<s>`.
    pub fn predictable(&self) -> impl Iterator<Item = &str> {
        self.vocab
            .iter()
            .enumerate()
            .filter(|&(i, _)| i as u32 != BOS_ID)
            .map(|(_, w)| w.as_str())
    }

    fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    /// Id of a token read from text; literal boundary markers count as unknown.
    fn text_id(&self, token: &str) -> u32 {
        match self.id(token) {
            BOS_ID | EOS_ID => UNK_ID,
            id => id,
        }
    }

    /// Histories of length `len` (0 ≤ len < order) seen in training.
    pub fn observed_histories(&self, len: usize) -> Vec<Vec<&str>> {
        let mut out: Vec<Vec<&str>> = self.histories[len]
            .keys()
            .map(|h| h.iter().map(|&i| self.vocab[i as usize].as_str()).collect())
            .collect();
        out.sort();
        out
    }

    /// `P(word | history)` using the last `min(len, order-1)` history tokens.
    pub fn cond_prob(&self, history: &[&str], word: &str) -> f64 {
        let keep = history.len().min(self.order - 1);
        let mut key: Vec<u32> = history[history.len() - keep..].iter().map(|t| self.id(t)).collect();
        key.push(self.id(word));
        self.prob_ids(&key)
    }

    /// `key` = history ids followed by the predicted id.
    fn prob_ids(&self, key: &[u32]) -> f64 {
        let n = key.len();
        let w = key[n - 1];
        let uni = &self.histories[0][&[][..]];
        let d = self.discounts[0];
        let c = self.counts[0].get(&[w][..]).copied().unwrap_or(0) as f64;
        let v = (self.vocab.len() - 1) as f64;
        let mut p = ((c - d).max(0.0) + d * f64::from(uni.distinct) / v) / uni.total as f64;

        for k in 2..=n {
            let gram = &key[n - k..];
            let Some(h) = self.histories[k - 1].get(&gram[..k - 1]) else {
                continue;
            };
            let d = self.discounts[k - 1];
            let c = self.counts[k - 1].get(gram).copied().unwrap_or(0) as f64;
            p = ((c - d).max(0.0) + d * f64::from(h.distinct) * p) / h.total as f64;
        }
        p
    }

    fn padded_ids(&self, sentence: &Sentence) -> Vec<u32> {
        let mut ids = Vec::with_capacity(sentence.len() + self.order);
        ids.extend(std::iter::repeat_n(BOS_ID, self.order - 1));
        ids.extend(sentence.iter().map(|t| self.text_id(t)));
        ids.push(EOS_ID);
        ids
    }

    pub fn perplexity<'a, I>(&self, corpus: I) -> f64
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let (mut lp, mut n) = (0.0, 0usize);
        for s in corpus {
            lp += self.log_prob(s);
            n += s.len() + 1;
        }
        (-lp / n as f64).exp()
    }
}

impl LanguageModel for NGramModel {
    fn order(&self) -> usize {
        self.order
    }

    fn token_log_probs(&self, sentence: &Sentence) -> Vec<f64> {
        let ids = self.padded_ids(sentence);
        let mut key = Vec::with_capacity(self.order);
        (self.order - 1..ids.len())
            .map(|i| {
                key.clear();
                key.extend_from_slice(&ids[i + 1 - self.order..=i]);
                self.prob_ids(&key).ln()
            })
            .collect()
    }
}

/// Per-token linear interpolation `α·P_a + (1−α)·P_b` of two models.
pub struct Interpolated<'a> {
    pub a: &'a dyn LanguageModel,
    pub b: &'a dyn LanguageModel,
    pub alpha: f64,
}

impl LanguageModel for Interpolated<'_> {
    fn order(&self) -> usize {
        self.a.order()
    }

    fn token_log_probs(&self, sentence: &Sentence) -> Vec<f64> {
        let (la, lb) = (self.a.token_log_probs(sentence), self.b.token_log_probs(sentence));
        la.iter()
            .zip(&lb)
            .map(|(&x, &y)| (self.alpha * x.exp() + (1.0 - self.alpha) * y.exp()).ln())
            .collect()
    }
}

//! Synthetic corpora with known structure, for benchmarks and tests.

use crate::corpus::{Sentence, Token};
use crate::rng::Rng;

/// Sentence of `len` tokens drawn uniformly from `w0 .. w{vocab-1}`.
pub fn uniform_sentence(rng: &mut Rng, vocab: usize, len: usize) -> Sentence {
    Sentence::new(
        (0..len)
            .map(|_| Token::from_piece(&format!("w{}", rng.below(vocab))))
            .collect(),
    )
}

/// Cumulative Zipf(1) weights over `n` ranks.
fn zipf_cdf(n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = (1..=n)
        .map(|r| {
            acc += 1.0 / r as f64;
            acc
        })
        .collect();
    for c in &mut cdf {
        *c /= acc;
    }
    cdf
}

fn draw(cdf: &[f64], rng: &mut Rng) -> usize {
    let u = rng.unit();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

#[derive(Clone, Copy, Debug)]
pub struct TwoDomainConfig {
    /// Vocabulary size of each domain.
    pub vocab_per_domain: usize,
    /// Fraction of each domain's vocabulary shared with the other.
    pub overlap: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for TwoDomainConfig {
    fn default() -> Self {
        TwoDomainConfig {
            vocab_per_domain: 1_000,
            overlap: 0.8,
            min_len: 8,
            max_len: 20,
            seed: 0,
        }
    }
}

/// Two unigram-Zipf domains over partially shared vocabularies. Each domain
/// ranks its words in its own random order, so shared words have different
/// frequencies in the two domains.
#[derive(Clone, Debug)]
pub struct TwoDomains {
    cfg: TwoDomainConfig,
    words: [Vec<String>; 2],
    cdf: Vec<f64>,
}

impl TwoDomains {
    pub fn new(cfg: TwoDomainConfig) -> Self {
        let shared = (cfg.vocab_per_domain as f64 * cfg.overlap).round() as usize;
        let own = cfg.vocab_per_domain - shared;
        let mut rng = Rng::new(cfg.seed);
        let words = ["a", "b"].map(|tag| {
            let mut v: Vec<String> = (0..shared).map(|i| format!("s{i}")).collect();
            v.extend((0..own).map(|i| format!("{tag}{i}")));
            rng.shuffle(&mut v);
            v
        });
        TwoDomains {
            cfg,
            words,
            cdf: zipf_cdf(cfg.vocab_per_domain),
        }
    }

    /// `domain` is 0 or 1.
    pub fn sentence(&self, domain: usize, rng: &mut Rng) -> Sentence {
        let span = self.cfg.max_len - self.cfg.min_len + 1;
        let len = self.cfg.min_len + rng.below(span);
        Sentence::new(
            (0..len)
                .map(|_| Token::from_piece(&self.words[domain][draw(&self.cdf, rng)]))
                .collect(),
        )
    }

    pub fn corpus(&self, domain: usize, n: usize, stream: u64) -> Vec<Sentence> {
        let mut rng = Rng::for_stream(self.cfg.seed, stream);
        (0..n).map(|_| self.sentence(domain, &mut rng)).collect()
    }
}

/// Blank-line separated document text: `docs` documents of `sents_per_doc`
/// sentences, each `len` tokens from a `vocab`-word uniform vocabulary.
pub fn document_text(docs: usize, sents_per_doc: usize, len: usize, vocab: usize, seed: u64) -> String {
    let mut rng = Rng::new(seed);
    let mut out = String::with_capacity(docs * sents_per_doc * len * 5);
    for d in 0..docs {
        if d > 0 {
            out.push('\n');
        }
        for _ in 0..sents_per_doc {
            out.push_str(&uniform_sentence(&mut rng, vocab, len).to_string());
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains_share_the_configured_fraction() {
        let d = TwoDomains::new(TwoDomainConfig::default());
        let shared = d.words[0].iter().filter(|w| d.words[1].contains(w)).count();
        assert_eq!(shared, 800);
        let c = d.corpus(0, 50, 1);
        assert!(c.iter().all(|s| (8..=20).contains(&s.len())));
        assert!(c.iter().flat_map(|s| s.iter()).all(|t| !t.starts_with('b')));
    }

    #[test]
    fn document_text_shape() {
        let t = document_text(3, 2, 4, 10, 1);
        assert_eq!(t.lines().count(), 3 * 2 + 2);
    }
}

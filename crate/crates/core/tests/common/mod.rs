//! Brute-force helpers shared by integration tests.
#![allow(dead_code)]

use noisemt_core::{Rng, Sentence};

/// Add-one smoothed sentence BLEU on orders 2..4, straight from counts.
pub fn sentence_bleu(hyp: &Sentence, reference: &Sentence) -> f64 {
    let h: Vec<&str> = hyp.iter().collect();
    let r: Vec<&str> = reference.iter().collect();
    let mut log_p = 0.0;
    for n in 1..=4 {
        let hg: Vec<&[&str]> = if h.len() >= n { h.windows(n).collect() } else { vec![] };
        let rg: Vec<&[&str]> = if r.len() >= n { r.windows(n).collect() } else { vec![] };
        let mut used = vec![false; rg.len()];
        let mut m = 0usize;
        for g in &hg {
            if let Some(j) = (0..rg.len()).find(|&j| !used[j] && rg[j] == *g) {
                used[j] = true;
                m += 1;
            }
        }
        if n == 1 {
            if m == 0 {
                return 0.0;
            }
            log_p += (m as f64 / hg.len() as f64).ln();
        } else {
            log_p += ((m + 1) as f64 / (hg.len() + 1) as f64).ln();
        }
    }
    let bp = if h.len() < r.len() {
        (1.0 - r.len() as f64 / h.len() as f64).exp()
    } else {
        1.0
    };
    (100.0 * bp * (log_p / 4.0).exp()).min(100.0)
}

pub fn sentence_of(words: &[String]) -> Sentence {
    Sentence::parse(&words.join(" "))
}

pub fn random_words(rng: &mut Rng, prefix: &str, vocab: usize, len: usize) -> Vec<String> {
    (0..len).map(|_| format!("{prefix}{}", rng.below(vocab))).collect()
}

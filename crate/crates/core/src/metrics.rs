//! BLEU-4 over whitespace tokens, with multi-reference clipping and paired
//! bootstrap resampling.
//!
//! Corpus BLEU aggregates clipped n-gram matches over all sentences before
//! taking precisions and is unsmoothed. Sentence BLEU adds one to numerator
//! and denominator of the 2- to 4-gram precisions so short outputs still get
//! a usable score.

use std::collections::HashMap;
use std::ops::{Add, AddAssign};

use serde::Serialize;

use crate::corpus::{Sentence, Token};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const MAX_ORDER: usize = 4;

/// Sufficient statistics for BLEU; additive over sentences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl Add for BleuStats {
    type Output = BleuStats;
    fn add(mut self, rhs: BleuStats) -> BleuStats {
        self += rhs;
        self
    }
}

impl AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: BleuStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += rhs.matches[n];
            self.totals[n] += rhs.totals[n];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

impl std::iter::Sum for BleuStats {
    fn sum<I: Iterator<Item = BleuStats>>(iter: I) -> Self {
        iter.fold(BleuStats::default(), Add::add)
    }
}

fn ngram_counts(tokens: &[Token], n: usize) -> HashMap<&[Token], u32> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Reference length closest to `hyp_len`; ties go to the shorter one.
pub fn effective_ref_len(hyp_len: usize, refs: &[Sentence]) -> usize {
    refs.iter()
        .map(Sentence::len)
        .min_by_key(|&r| (r.abs_diff(hyp_len), r))
        .unwrap_or(0)
}

/// Clipped match counts of one hypothesis against a reference set. A
/// hypothesis n-gram is credited up to its maximum count in any single
/// reference.
pub fn sentence_stats(hyp: &Sentence, refs: &[Sentence]) -> BleuStats {
    let h = hyp.tokens();
    let mut stats = BleuStats {
        hyp_len: h.len() as u64,
        ref_len: effective_ref_len(h.len(), refs) as u64,
        ..Default::default()
    };
    for n in 1..=MAX_ORDER {
        let hyp_counts = ngram_counts(h, n);
        let mut max_ref: HashMap<&[Token], u32> = HashMap::new();
        for r in refs {
            for (g, c) in ngram_counts(r.tokens(), n) {
                if hyp_counts.contains_key(g) {
                    let e = max_ref.entry(g).or_insert(0);
                    *e = (*e).max(c);
                }
            }
        }
        stats.matches[n - 1] = hyp_counts
            .iter()
            .map(|(g, &c)| u64::from(c.min(max_ref.get(g).copied().unwrap_or(0))))
            .sum();
        stats.totals[n - 1] = h.len().saturating_sub(n - 1) as u64;
    }
    stats
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
    /// Set when some order had no matches, forcing an unsmoothed score of 0.
    pub zero_match: bool,
    pub stats: BleuStats,
}

fn brevity_penalty(hyp_len: u64, ref_len: u64) -> f64 {
    if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    }
}

impl BleuScore {
    /// Unsmoothed BLEU from aggregated statistics.
    pub fn from_stats(stats: BleuStats) -> Self {
        let precisions: [f64; MAX_ORDER] = std::array::from_fn(|n| {
            if stats.totals[n] == 0 {
                0.0
            } else {
                stats.matches[n] as f64 / stats.totals[n] as f64
            }
        });
        let zero_match = stats.matches.contains(&0);
        let bp = brevity_penalty(stats.hyp_len, stats.ref_len);
        let score = if zero_match {
            0.0
        } else {
            let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
            bp * mean_log.exp() * 100.0
        };
        BleuScore {
            score,
            precisions,
            brevity_penalty: bp,
            hyp_len: stats.hyp_len,
            ref_len: stats.ref_len,
            zero_match,
            stats,
        }
    }

    /// Sentence-level BLEU with add-one smoothing on orders 2..=4.
    pub fn smoothed(stats: BleuStats) -> Self {
        let precisions: [f64; MAX_ORDER] = std::array::from_fn(|n| {
            if n == 0 {
                if stats.totals[0] == 0 {
                    0.0
                } else {
                    stats.matches[0] as f64 / stats.totals[0] as f64
                }
            } else {
                (stats.matches[n] + 1) as f64 / (stats.totals[n] + 1) as f64
            }
        });
        let zero_match = stats.matches[0] == 0;
        let bp = brevity_penalty(stats.hyp_len, stats.ref_len);
        let score = if zero_match {
            0.0
        } else {
            let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
            (bp * mean_log.exp() * 100.0).min(100.0)
        };
        BleuScore {
            score,
            precisions,
            brevity_penalty: bp,
            hyp_len: stats.hyp_len,
            ref_len: stats.ref_len,
            zero_match,
            stats,
        }
    }
}

fn check_aligned(hyps: usize, refs: &[Vec<Sentence>]) -> Result<()> {
    if hyps == 0 {
        return Err(Error::EmptyInput("no hypotheses".into()));
    }
    if hyps != refs.len() {
        return Err(Error::mismatch("hypotheses vs references", hyps, refs.len()));
    }
    if let Some(i) = refs.iter().position(Vec::is_empty) {
        return Err(Error::EmptyInput(format!("no reference for sentence {i}")));
    }
    Ok(())
}

/// Corpus BLEU-4. `refs[i]` holds every reference for `hyps[i]`.
pub fn corpus_bleu(hyps: &[Sentence], refs: &[Vec<Sentence>]) -> Result<BleuScore> {
    check_aligned(hyps.len(), refs)?;
    let stats = hyps.iter().zip(refs).map(|(h, r)| sentence_stats(h, r)).sum();
    Ok(BleuScore::from_stats(stats))
}

pub fn sentence_bleu(hyp: &Sentence, refs: &[Sentence]) -> BleuScore {
    BleuScore::smoothed(sentence_stats(hyp, refs))
}

/// Turns one aligned file per reference set into per-sentence reference lists.
pub fn transpose_refs(sets: Vec<Vec<Sentence>>) -> Result<Vec<Vec<Sentence>>> {
    let Some(n) = sets.first().map(Vec::len) else {
        return Err(Error::EmptyInput("no reference sets".into()));
    };
    if let Some(bad) = sets.iter().find(|s| s.len() != n) {
        return Err(Error::mismatch("reference set sizes", n, bad.len()));
    }
    let mut out: Vec<Vec<Sentence>> = (0..n).map(|_| Vec::with_capacity(sets.len())).collect();
    for set in sets {
        for (slot, s) in out.iter_mut().zip(set) {
            slot.push(s);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BootstrapResult {
    /// Fraction of resamples in which the baseline scored at least as high
    /// as the system.
    pub p_value: f64,
    pub n_resamples: usize,
    /// Mean of (system − baseline) BLEU over resamples.
    pub delta_mean: f64,
    pub system_bleu: f64,
    pub baseline_bleu: f64,
}

/// One-sided paired bootstrap test of system `hyps_a` against baseline
/// `hyps_b`.
pub fn paired_bootstrap(
    hyps_a: &[Sentence],
    hyps_b: &[Sentence],
    refs: &[Vec<Sentence>],
    n_resamples: usize,
    rng: &mut Rng,
) -> Result<BootstrapResult> {
    if hyps_a.len() != hyps_b.len() {
        return Err(Error::mismatch(
            "system vs baseline hypotheses",
            hyps_a.len(),
            hyps_b.len(),
        ));
    }
    check_aligned(hyps_a.len(), refs)?;
    if n_resamples < 100 {
        return Err(Error::param(format!("n_resamples must be >= 100, got {n_resamples}")));
    }
    let a: Vec<BleuStats> = hyps_a.iter().zip(refs).map(|(h, r)| sentence_stats(h, r)).collect();
    let b: Vec<BleuStats> = hyps_b.iter().zip(refs).map(|(h, r)| sentence_stats(h, r)).collect();
    let n = a.len();

    let mut baseline_wins = 0usize;
    let mut delta_sum = 0.0;
    for _ in 0..n_resamples {
        let (mut sa, mut sb) = (BleuStats::default(), BleuStats::default());
        for _ in 0..n {
            let i = rng.below(n);
            sa += a[i];
            sb += b[i];
        }
        let (ba, bb) = (BleuScore::from_stats(sa).score, BleuScore::from_stats(sb).score);
        if bb >= ba {
            baseline_wins += 1;
        }
        delta_sum += ba - bb;
    }

    Ok(BootstrapResult {
        p_value: baseline_wins as f64 / n_resamples as f64,
        n_resamples,
        delta_mean: delta_sum / n_resamples as f64,
        system_bleu: BleuScore::from_stats(a.iter().copied().sum()).score,
        baseline_bleu: BleuScore::from_stats(b.iter().copied().sum()).score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Sentence {
        Sentence::parse(text)
    }

    #[test]
    fn identity_is_100() {
        let hyps = vec![s("the cat sat on the mat"), s("a b c d e")];
        let refs: Vec<_> = hyps.iter().map(|h| vec![h.clone()]).collect();
        let b = corpus_bleu(&hyps, &refs).unwrap();
        assert_eq!(b.score, 100.0);
        assert_eq!(b.brevity_penalty, 1.0);
        assert_eq!(sentence_bleu(&hyps[0], &refs[0]).score, 100.0);
    }

    #[test]
    fn short_hypothesis_brevity_case() {
        let b = corpus_bleu(&[s("a b c d")], &[vec![s("a b c d e")]]).unwrap();
        assert_eq!(b.precisions, [1.0; 4]);
        assert!((b.brevity_penalty - (1.0f64 - 5.0 / 4.0).exp()).abs() < 1e-15);
        assert_eq!(format!("{:.2}", b.score), "77.88");
    }

    #[test]
    fn no_shared_unigrams_is_zero() {
        assert_eq!(sentence_bleu(&s("x y z"), &[s("a b c")]).score, 0.0);
        let b = corpus_bleu(&[s("x y z w")], &[vec![s("a b c d")]]).unwrap();
        assert!(b.zero_match);
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn empty_hypothesis() {
        assert_eq!(sentence_bleu(&Sentence::default(), &[s("a")]).score, 0.0);
        assert!(corpus_bleu(&[], &[]).is_err());
    }

    #[test]
    fn misaligned_inputs_error() {
        assert!(corpus_bleu(&[s("a")], &[vec![s("a")], vec![s("b")]]).is_err());
        assert!(corpus_bleu(&[s("a")], &[vec![]]).is_err());
    }

    #[test]
    fn effective_length_ties_to_shorter() {
        assert_eq!(effective_ref_len(4, &[s("a b c"), s("a b c d e")]), 3);
        assert_eq!(effective_ref_len(4, &[s("a b c d e f"), s("a b c d e")]), 5);
    }

    #[test]
    fn clipping_uses_max_over_references() {
        let st = sentence_stats(&s("the the the"), &[s("the cat"), s("the the dog")]);
        assert_eq!(st.matches[0], 2);
        assert_eq!(st.totals[0], 3);
    }

    #[test]
    fn transpose_checks_sizes() {
        let t = transpose_refs(vec![vec![s("a"), s("b")], vec![s("c"), s("d")]]).unwrap();
        assert_eq!(t[1], vec![s("b"), s("d")]);
        assert!(transpose_refs(vec![vec![s("a")], vec![]]).is_err());
    }

    #[test]
    fn bootstrap_self_comparison() {
        let hyps = vec![s("a b c d"), s("e f g h i"), s("j k l")];
        let refs = vec![vec![s("a b c x")], vec![s("e f g h")], vec![s("j k l m")]];
        let r = paired_bootstrap(&hyps, &hyps, &refs, 200, &mut Rng::new(3)).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.delta_mean, 0.0);
        assert!(paired_bootstrap(&hyps, &hyps[..2], &refs, 200, &mut Rng::new(3)).is_err());
        assert!(paired_bootstrap(&hyps, &hyps, &refs, 50, &mut Rng::new(3)).is_err());
    }
}

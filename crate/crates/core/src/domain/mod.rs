//! Language-model based noise scoring, data selection and domain
//! classification.
//!
//! The noise score of a sentence is `log P_noisy(x) − log P_denoised(x)`
//! (natural log, summed over tokens). Lower means the trusted model likes the
//! sentence more than the model of the raw data does. The denoised model is
//! either a model trained on trusted data alone or an [`Interpolated`] mix of
//! the trusted and full-data models.

pub mod lm;
mod model_file;

use rayon::prelude::*;
use serde::Serialize;

pub use lm::{Interpolated, LanguageModel, LmConfig, NGramModel, BOS, EOS, UNK};
pub use model_file::{ModelHeader, FORMAT_VERSION, MAGIC};

use crate::corpus::Sentence;
use crate::error::{Error, Result};

pub fn train_lm<I>(corpus: I, order: usize) -> Result<NGramModel>
where
    I: IntoIterator<Item = Sentence>,
{
    NGramModel::train(
        corpus,
        LmConfig {
            order,
            ..Default::default()
        },
    )
}

pub fn check_same_order(a: &dyn LanguageModel, b: &dyn LanguageModel) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::mismatch("language model orders", a.order(), b.order()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseScore {
    pub sentence_index: usize,
    pub score: f64,
}

pub fn noise_score(
    lm_noisy: &dyn LanguageModel,
    lm_denoised: &dyn LanguageModel,
    sentence: &Sentence,
    sentence_index: usize,
) -> NoiseScore {
    NoiseScore {
        sentence_index,
        score: lm_noisy.log_prob(sentence) - lm_denoised.log_prob(sentence),
    }
}

pub fn noise_scores(
    lm_noisy: &dyn LanguageModel,
    lm_denoised: &dyn LanguageModel,
    corpus: &[Sentence],
) -> Result<Vec<NoiseScore>> {
    check_same_order(lm_noisy, lm_denoised)?;
    Ok(corpus
        .par_iter()
        .enumerate()
        .map(|(i, s)| noise_score(lm_noisy, lm_denoised, s, i))
        .collect())
}

/// Indices of the `k` lowest scores, ties broken by lower index, returned in
/// ascending index order.
pub fn lowest_k(scores: &[NoiseScore], k: usize) -> Result<Vec<usize>> {
    if k > scores.len() {
        return Err(Error::param(format!(
            "cannot select {k} sentences from a corpus of {}",
            scores.len()
        )));
    }
    let mut ranked: Vec<(f64, usize)> = scores.iter().map(|s| (s.score, s.sentence_index)).collect();
    let by_score = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < ranked.len() && k > 0 {
        ranked.select_nth_unstable_by(k - 1, by_score);
    }
    let mut out: Vec<usize> = ranked[..k].iter().map(|&(_, i)| i).collect();
    out.sort_unstable();
    Ok(out)
}

pub fn select_data(
    corpus: &[Sentence],
    lm_noisy: &dyn LanguageModel,
    lm_denoised: &dyn LanguageModel,
    k: usize,
) -> Result<Vec<usize>> {
    if k > corpus.len() {
        return Err(Error::param(format!(
            "cannot select {k} sentences from a corpus of {}",
            corpus.len()
        )));
    }
    lowest_k(&noise_scores(lm_noisy, lm_denoised, corpus)?, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainLabel {
    InDomain,
    General,
}

impl DomainLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainLabel::InDomain => "in_domain",
            DomainLabel::General => "general",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub label: DomainLabel,
    pub margin: f64,
}

/// Log-odds comparator of an in-domain and a general-domain model.
#[derive(Clone, Debug)]
pub struct DomainClassifier {
    pub lm_in: NGramModel,
    pub lm_gen: NGramModel,
    pub length_normalize: bool,
}

impl DomainClassifier {
    pub fn new(lm_in: NGramModel, lm_gen: NGramModel, length_normalize: bool) -> Result<Self> {
        check_same_order(&lm_in, &lm_gen)?;
        Ok(DomainClassifier {
            lm_in,
            lm_gen,
            length_normalize,
        })
    }

    /// In-domain iff the (optionally per-token) log-likelihood ratio is
    /// strictly positive; a tie goes to general.
    pub fn classify(&self, sentence: &Sentence) -> Classification {
        let diff = self.lm_in.log_prob(sentence) - self.lm_gen.log_prob(sentence);
        let margin = if self.length_normalize {
            diff / (sentence.len() + 1) as f64
        } else {
            diff
        };
        let label = if margin > 0.0 {
            DomainLabel::InDomain
        } else {
            DomainLabel::General
        };
        Classification { label, margin }
    }

    pub fn classify_all(&self, corpus: &[Sentence]) -> Vec<Classification> {
        corpus.par_iter().map(|s| self.classify(s)).collect()
    }

    /// Percentage of `corpus` classified in-domain.
    pub fn domain_ratio(&self, corpus: &[Sentence]) -> Result<f64> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("domain ratio corpus".into()));
        }
        let hits = self
            .classify_all(corpus)
            .iter()
            .filter(|c| c.label == DomainLabel::InDomain)
            .count();
        Ok(100.0 * hits as f64 / corpus.len() as f64)
    }

    /// Fraction of labeled held-out sentences classified correctly.
    pub fn accuracy(&self, held_in: &[Sentence], held_gen: &[Sentence]) -> f64 {
        let n = held_in.len() + held_gen.len();
        if n == 0 {
            return 0.0;
        }
        let ok_in = self
            .classify_all(held_in)
            .iter()
            .filter(|c| c.label == DomainLabel::InDomain)
            .count();
        let ok_gen = self
            .classify_all(held_gen)
            .iter()
            .filter(|c| c.label == DomainLabel::General)
            .count();
        (ok_in + ok_gen) as f64 / n as f64
    }
}

pub fn build_classifier(
    in_corpus: Vec<Sentence>,
    gen_corpus: Vec<Sentence>,
    cfg: LmConfig,
    length_normalize: bool,
) -> Result<DomainClassifier> {
    if in_corpus.is_empty() || gen_corpus.is_empty() {
        return Err(Error::EmptyInput("classifier training corpus".into()));
    }
    let (lm_in, lm_gen) = rayon::join(
        || NGramModel::train(in_corpus, cfg),
        || NGramModel::train(gen_corpus, cfg),
    );
    DomainClassifier::new(lm_in?, lm_gen?, length_normalize)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CandidateScore {
    pub order: usize,
    pub accuracy: f64,
}

/// Trains one classifier per candidate order and keeps the one with the best
/// held-out accuracy (lowest order on ties).
pub fn select_classifier(
    in_corpus: &[Sentence],
    gen_corpus: &[Sentence],
    orders: &[usize],
    min_count: u32,
    length_normalize: bool,
    held_in: &[Sentence],
    held_gen: &[Sentence],
) -> Result<(DomainClassifier, Vec<CandidateScore>)> {
    let mut best: Option<(DomainClassifier, f64)> = None;
    let mut scores = Vec::with_capacity(orders.len());
    for &order in orders {
        let clf = build_classifier(
            in_corpus.to_vec(),
            gen_corpus.to_vec(),
            LmConfig { order, min_count },
            length_normalize,
        )?;
        let accuracy = clf.accuracy(held_in, held_gen);
        scores.push(CandidateScore { order, accuracy });
        if best.as_ref().is_none_or(|(_, a)| accuracy > *a) {
            best = Some((clf, accuracy));
        }
    }
    let (clf, _) = best.ok_or_else(|| Error::param("no candidate orders given"))?;
    Ok((clf, scores))
}

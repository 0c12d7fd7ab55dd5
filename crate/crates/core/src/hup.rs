//! Hallucination under perturbation.
//!
//! A case is hallucinated when the clean translation is adequate (sentence
//! BLEU against the reference above the adequacy threshold) but the
//! translation of the perturbed source has little to do with it (sentence
//! BLEU against the clean translation below the collapse threshold).

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::metrics::{sentence_bleu, sentence_stats, BleuScore, BleuStats};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HupCase {
    pub reference: Sentence,
    pub trans_clean: Sentence,
    pub trans_perturbed: Sentence,
}

impl HupCase {
    pub fn new(reference: Sentence, trans_clean: Sentence, trans_perturbed: Sentence) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::EmptyInput("HuP reference".into()));
        }
        Ok(HupCase {
            reference,
            trans_clean,
            trans_perturbed,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HupThresholds {
    /// Clean translation must score strictly above this against the reference.
    pub adequacy: f64,
    /// Perturbed translation must score strictly below this against the clean one.
    pub collapse: f64,
}

impl Default for HupThresholds {
    fn default() -> Self {
        HupThresholds {
            adequacy: 5.0,
            collapse: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Denominator {
    /// Every case counts.
    #[default]
    All,
    /// Only cases whose clean translation passes the adequacy threshold.
    Eligible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HupVerdict {
    pub is_hallucination: bool,
    pub bleu_ref_clean: f64,
    pub bleu_pert_clean: f64,
    pub eligible: bool,
}

pub fn judge(case: &HupCase, thresholds: HupThresholds) -> HupVerdict {
    let bleu_ref_clean = sentence_bleu(&case.trans_clean, std::slice::from_ref(&case.reference)).score;
    let bleu_pert_clean = sentence_bleu(&case.trans_perturbed, std::slice::from_ref(&case.trans_clean)).score;
    let eligible = bleu_ref_clean > thresholds.adequacy;
    HupVerdict {
        is_hallucination: eligible && bleu_pert_clean < thresholds.collapse,
        bleu_ref_clean,
        bleu_pert_clean,
        eligible,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HupReport {
    pub hup_score: f64,
    pub denominator: Denominator,
    pub n_total: usize,
    pub n_eligible: usize,
    pub n_hallucinated: usize,
    pub bleu_clean: f64,
    pub bleu_perturbed: f64,
    pub bleu_delta: f64,
    pub thresholds: HupThresholds,
}

/// Additive accumulator behind [`evaluate`]; partial results from shards can
/// be merged.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HupTally {
    pub n_total: usize,
    pub n_eligible: usize,
    pub n_hallucinated: usize,
    pub clean: BleuStats,
    pub perturbed: BleuStats,
}

impl HupTally {
    pub fn push(&mut self, case: &HupCase, verdict: &HupVerdict) {
        let refs = std::slice::from_ref(&case.reference);
        self.n_total += 1;
        self.n_eligible += usize::from(verdict.eligible);
        self.n_hallucinated += usize::from(verdict.is_hallucination);
        self.clean += sentence_stats(&case.trans_clean, refs);
        self.perturbed += sentence_stats(&case.trans_perturbed, refs);
    }

    pub fn merge(mut self, other: HupTally) -> HupTally {
        self.n_total += other.n_total;
        self.n_eligible += other.n_eligible;
        self.n_hallucinated += other.n_hallucinated;
        self.clean += other.clean;
        self.perturbed += other.perturbed;
        self
    }

    pub fn report(&self, thresholds: HupThresholds, denominator: Denominator) -> Result<HupReport> {
        if self.n_total == 0 {
            return Err(Error::EmptyInput("no HuP cases".into()));
        }
        let denom = match denominator {
            Denominator::All => self.n_total,
            Denominator::Eligible => self.n_eligible,
        };
        let hup_score = if denom == 0 {
            0.0
        } else {
            100.0 * self.n_hallucinated as f64 / denom as f64
        };
        let bleu_clean = BleuScore::from_stats(self.clean).score;
        let bleu_perturbed = BleuScore::from_stats(self.perturbed).score;
        Ok(HupReport {
            hup_score,
            denominator,
            n_total: self.n_total,
            n_eligible: self.n_eligible,
            n_hallucinated: self.n_hallucinated,
            bleu_clean,
            bleu_perturbed,
            bleu_delta: bleu_perturbed - bleu_clean,
            thresholds,
        })
    }
}

/// Judges every case and aggregates. `on_verdict` sees each verdict in order,
/// which the CLI uses to write the per-sentence table.
pub fn evaluate_with<'a, I, F>(
    cases: I,
    thresholds: HupThresholds,
    denominator: Denominator,
    mut on_verdict: F,
) -> Result<HupReport>
where
    I: IntoIterator<Item = &'a HupCase>,
    F: FnMut(usize, &HupCase, &HupVerdict),
{
    let mut tally = HupTally::default();
    for (i, case) in cases.into_iter().enumerate() {
        let v = judge(case, thresholds);
        on_verdict(i, case, &v);
        tally.push(case, &v);
    }
    tally.report(thresholds, denominator)
}

pub fn evaluate<'a, I>(cases: I, thresholds: HupThresholds, denominator: Denominator) -> Result<HupReport>
where
    I: IntoIterator<Item = &'a HupCase>,
{
    evaluate_with(cases, thresholds, denominator, |_, _, _| {})
}

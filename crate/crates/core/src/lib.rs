//! Corpus noising and translation diagnostics over plain, pre-tokenized text.
//!
//! * [`noising`]: text-infilling span masking with sentence permutation,
//!   source-side input adaptation with noisy/clean mixing, and
//!   first-position-insertion / random-span-masking perturbations.
//! * [`metrics`]: corpus and sentence BLEU (multi-reference) and paired
//!   bootstrap significance.
//! * [`hup`]: hallucination-under-perturbation verdicts and reports.
//! * [`domain`]: Kneser-Ney n-gram models, noise scoring, data selection and
//!   a two-model domain classifier.
//! * [`diagnostics`]: uncertainty profiles, distractors, copy ratio, beam
//!   degradation, frequency-bucketed F-measure and rank/frequency export.
//!
//! Tokens are whitespace-separated units of the input; no tokenizer is
//! applied.

pub mod corpus;
pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod hup;
pub mod meta;
pub mod metrics;
pub mod noising;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use corpus::{Document, ParallelPair, Sentence, Token};
pub use error::{Error, Result};
pub use rng::Rng;

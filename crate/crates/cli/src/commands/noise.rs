use noisemt_core::corpus::{load_aligned, read_documents, read_parallel};
use noisemt_core::noising::{
    adapt_corpus, perturb as perturb_one, AdaptSpec, MixMode, NoiseOps, NoiseSpec, PerturbKind, PerturbSpec,
};
use noisemt_core::pipeline::{self, StreamConfig};
use noisemt_core::{ParallelPair, Rng, Sentence};
use rayon::prelude::*;
use serde_json::json;

use super::{to_json, token, Ctx};
use crate::args::{AdaptInputArgs, MixModeArg, NoiseCorpusArgs, PerturbArgs, PerturbKindArg, PerturbOptions};
use crate::output::Output;
use crate::CliError;

pub fn noise_corpus(ctx: &Ctx, a: &NoiseCorpusArgs) -> Result<(), CliError> {
    let spec = NoiseSpec {
        mask_rate: a.mask_rate,
        poisson_lambda: a.poisson_lambda,
        permute_sentences: !a.no_permute,
        mask_token: token(&a.mask_token)?,
        seed: ctx.seed,
    };
    spec.validate()?;
    let cfg = StreamConfig {
        batch_docs: a.batch_docs,
        batch_bytes: a.batch_bytes,
    };
    let input = read_documents(&a.input)?;
    let mut out = ctx.output()?;
    let mut target = match &a.target_out {
        Some(p) => Output::create(Some(p))?,
        None => Output::sink(),
    };
    let stats = pipeline::noise_corpus(input, &spec, cfg, &mut out, &mut target)?;
    let meta = ctx.seeded().with_stats(to_json(&stats));
    out.finish(&meta)?;
    target.finish(&meta)?;
    let frac = if stats.tokens == 0 {
        0.0
    } else {
        stats.covered_tokens as f64 / stats.tokens as f64
    };
    eprintln!(
        "noised {} documents, {} sentences, {} tokens; masked fraction {frac:.4}",
        stats.documents, stats.sentences, stats.tokens
    );
    Ok(())
}

pub fn adapt_input(ctx: &Ctx, a: &AdaptInputArgs) -> Result<(), CliError> {
    let spec = AdaptSpec {
        word_noise_rate: a.word_noise_rate,
        noise_ops: NoiseOps {
            mask: a.mask_weight,
            delete: a.delete_weight,
            permute: a.permute_weight,
        },
        mix_noisy: a.mix.noisy,
        mix_clean: a.mix.clean,
        mix_mode: match a.mix_mode {
            MixModeArg::Partition => MixMode::Partition,
            MixModeArg::Duplicate => MixMode::Duplicate,
        },
        mask_token: token(&a.mask_token)?,
        seed: ctx.seed,
    };
    spec.validate()?;
    let pairs: Vec<ParallelPair> = read_parallel(&a.src, &a.tgt)?.collect::<Result<_, _>>()?;
    let n = pairs.len();
    let mixed = adapt_corpus(pairs, &spec)?;

    let mut out = ctx.output()?;
    let mut tgt = a.tgt_out.as_deref().map(|p| Output::create(Some(p))).transpose()?;
    let mut labels = a.labels_out.as_deref().map(|p| Output::create(Some(p))).transpose()?;
    for (line, m) in mixed.iter().enumerate() {
        match &mut tgt {
            Some(t) => {
                out.sentence(&m.pair.source)?;
                t.sentence(&m.pair.target)?;
            }
            None => out.line(format!("{}\t{}", m.pair.source, m.pair.target))?,
        }
        if let Some(l) = &mut labels {
            l.line(format!("{line}\t{}\t{}", m.index, u8::from(m.noisy)))?;
        }
    }
    let noisy = mixed.iter().filter(|m| m.noisy).count();
    let meta = ctx.seeded().with_stats(json!({
        "input_pairs": n,
        "output_pairs": mixed.len(),
        "noisy_pairs": noisy,
    }));
    out.finish(&meta)?;
    for o in [tgt, labels].into_iter().flatten() {
        o.finish(&meta)?;
    }
    eprintln!("{} pairs written, {noisy} noisy", mixed.len());
    Ok(())
}

pub(crate) fn perturb_spec(o: &PerturbOptions, seed: u64) -> Result<PerturbSpec, CliError> {
    let spec = PerturbSpec {
        kind: match o.kind {
            PerturbKindArg::Fpi => PerturbKind::Fpi,
            PerturbKindArg::Rsm => PerturbKind::Rsm,
        },
        fpi_token: token(&o.fpi_token)?,
        rsm_mask_rate: o.rsm_rate,
        rsm_lambda: o.rsm_lambda,
        mask_token: token(&o.mask_token)?,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

/// Line `i` uses stream `i` of the seed; blank lines stay blank.
pub(crate) fn perturb_all(sentences: &[Sentence], spec: &PerturbSpec) -> Vec<Sentence> {
    sentences
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if s.is_empty() {
                Sentence::default()
            } else {
                perturb_one(s, spec, &mut Rng::for_stream(spec.seed, i as u64))
            }
        })
        .collect()
}

pub fn perturb(ctx: &Ctx, a: &PerturbArgs) -> Result<(), CliError> {
    let spec = perturb_spec(&a.opts, ctx.seed)?;
    let input = load_aligned(&a.input)?;
    let perturbed = perturb_all(&input, &spec);
    let mut out = ctx.output()?;
    for s in &perturbed {
        out.sentence(s)?;
    }
    out.finish(&ctx.seeded().with_stats(json!({ "sentences": perturbed.len() })))
}

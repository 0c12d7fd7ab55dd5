use std::collections::BTreeMap;
use std::path::Path;

use noisemt_core::corpus::{load_aligned, load_sentences};
use noisemt_core::diagnostics::{
    self, build_distractors, copy_ratio, read_scored, uncertainty_profile, Bucket, FreqBuckets, ScoredHypothesis,
};
use noisemt_core::metrics::transpose_refs;
use noisemt_core::{Rng, Sentence};
use serde_json::json;

use super::{load_aligned_set, to_json, Ctx};
use crate::args::{BeamReportArgs, CopyRateArgs, DistractorArgs, FreqFmeasureArgs, LexdistArgs, UncertaintyArgs};
use crate::CliError;

pub fn uncertainty(ctx: &Ctx, a: &UncertaintyArgs) -> Result<(), CliError> {
    let hyps: Vec<ScoredHypothesis> = read_scored(&a.input)?.collect::<Result<_, _>>()?;
    let prof = uncertainty_profile(&hyps, a.max_pos)?;
    let mut out = ctx.output()?;
    out.line("position\tmean_prob\tcount")?;
    for p in &prof.per_position {
        out.line(format!("{}\t{}\t{}", p.position, p.mean_prob, p.count))?;
    }
    out.finish(&ctx.meta().with_stats(json!({ "hypotheses": hyps.len() })))
}

pub fn distractors(ctx: &Ctx, a: &DistractorArgs) -> Result<(), CliError> {
    let refs = load_aligned(&a.refs)?;
    let pool = load_sentences(&a.pool)?;
    let picked = build_distractors(&refs, pool, &mut Rng::new(ctx.seed))?;
    let mut out = ctx.output()?;
    for d in &picked {
        out.sentence(&d.sentence)?;
    }
    let exact = picked.iter().filter(|d| d.exact).count();
    out.finish(
        &ctx.seeded()
            .with_stats(json!({ "references": refs.len(), "exact_length": exact })),
    )?;
    if exact < picked.len() {
        eprintln!(
            "{} of {} distractors have a different length than their reference",
            picked.len() - exact,
            picked.len()
        );
    }
    Ok(())
}

pub fn copy_rate(ctx: &Ctx, a: &CopyRateArgs) -> Result<(), CliError> {
    let sets = load_aligned_set(&[&a.source, &a.output])?;
    let ratio = copy_ratio(sets[0].iter().zip(&sets[1]), a.exclude_punct_num)?;
    let mut out = ctx.output()?;
    out.line(ratio.to_string())?;
    out.finish(
        &ctx.meta()
            .with_stats(json!({ "copy_ratio": ratio, "sentences": sets[0].len() })),
    )
}

pub fn beam_report(ctx: &Ctx, a: &BeamReportArgs) -> Result<(), CliError> {
    let mut paths: Vec<&Path> = vec![&a.source];
    paths.extend(a.refs.iter().map(|p| p.as_path()));
    paths.extend(a.beams.iter().map(|b| b.path.as_path()));
    let mut sets = load_aligned_set(&paths)?;
    let beams = sets.split_off(1 + a.refs.len());
    let refs = transpose_refs(sets.split_off(1))?;
    let sources = sets.pop().expect("source set");

    let mut by_beam: BTreeMap<usize, Vec<Sentence>> = BTreeMap::new();
    for (b, hyps) in a.beams.iter().zip(beams) {
        if by_beam.insert(b.beam, hyps).is_some() {
            return Err(CliError::Usage(format!("beam size {} given twice", b.beam)));
        }
    }
    let rows = diagnostics::beam_report(&by_beam, &refs, &sources, a.exclude_punct_num)?;
    let mut out = ctx.output()?;
    out.line("beam\tbleu\tcopy_ratio\tbleu_delta\tcopy_delta")?;
    for r in &rows {
        out.line(format!(
            "{}\t{}\t{}\t{}\t{}",
            r.beam, r.bleu, r.copy_ratio, r.bleu_delta, r.copy_delta
        ))?;
    }
    out.finish(&ctx.meta().with_stats(to_json(&rows)))
}

pub fn freq_fmeasure(ctx: &Ctx, a: &FreqFmeasureArgs) -> Result<(), CliError> {
    if a.high_max_rank > a.med_max_rank {
        return Err(CliError::Usage("--high-max-rank exceeds --med-max-rank".into()));
    }
    let sets = load_aligned_set(&[&a.hyp, &a.reference])?;
    let train = load_sentences(&a.train)?;
    let buckets = FreqBuckets::from_corpus(&train, a.high_max_rank, a.med_max_rank);
    let report = diagnostics::freq_fmeasure(&sets[0], &sets[1], &buckets)?;
    let mut out = ctx.output()?;
    out.line("bucket\tprecision\trecall\tf1\tmatched\thyp_tokens\tref_tokens")?;
    let rows = Bucket::ALL
        .iter()
        .map(|&b| (b.name(), report.get(b)))
        .chain([("overall", &report.overall)]);
    for (name, s) in rows {
        out.line(format!(
            "{name}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.precision, s.recall, s.f1, s.matched, s.hyp_tokens, s.ref_tokens
        ))?;
    }
    out.finish(&ctx.meta().with_stats(to_json(&report)))
}

pub fn lexdist(ctx: &Ctx, a: &LexdistArgs) -> Result<(), CliError> {
    let corpus = load_sentences(&a.input)?;
    let ranks = match &a.rank_source {
        Some(p) => load_sentences(p)?,
        None => corpus.clone(),
    };
    let d = diagnostics::lexdist(&corpus, &ranks, a.max_rank)?;
    let mut out = ctx.output()?;
    out.line("rank\ttoken\tcount\tfreq\tlog10_freq")?;
    for r in &d.rows {
        out.line(format!(
            "{}\t{}\t{}\t{}\t{}",
            r.rank, r.token, r.count, r.freq, r.log10_freq
        ))?;
    }
    let stats = json!({ "total": d.total, "tail_count": d.tail_count, "tail_freq": d.tail_freq });
    out.finish(&ctx.meta().with_stats(stats))
}

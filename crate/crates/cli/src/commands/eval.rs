use std::path::Path;

use noisemt_core::corpus::load_aligned;
use noisemt_core::hup::{evaluate_with, Denominator, HupCase, HupThresholds};
use noisemt_core::metrics::{corpus_bleu, paired_bootstrap, sentence_bleu, transpose_refs, BleuScore};
use noisemt_core::noising::PerturbKind;
use noisemt_core::{Rng, Sentence};
use serde_json::{json, Value};

use super::noise::{perturb_all, perturb_spec};
use super::{load_aligned_set, timeout, to_json, Ctx};
use crate::args::{BleuArgs, DenominatorArg, HupEvalArgs, TranslateArgs};
use crate::exec::exec_translate;
use crate::output::Output;
use crate::CliError;

fn summary_line(b: &BleuScore) -> String {
    let p = b.precisions.map(|x| format!("{:.1}", 100.0 * x));
    format!(
        "BLEU = {:.2} {} (BP = {:.3} ratio = {:.3} hyp_len = {} ref_len = {})",
        b.score,
        p.join("/"),
        b.brevity_penalty,
        if b.ref_len == 0 {
            0.0
        } else {
            b.hyp_len as f64 / b.ref_len as f64
        },
        b.hyp_len,
        b.ref_len
    )
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

pub fn bleu(ctx: &Ctx, a: &BleuArgs) -> Result<(), CliError> {
    let mut paths: Vec<&Path> = vec![&a.hyp];
    paths.extend(a.refs.iter().map(|p| p.as_path()));
    let mut sets = load_aligned_set(&paths)?;
    let hyps = sets.remove(0);
    let refs = transpose_refs(sets)?;
    let mut out = ctx.output()?;

    if let Some(base) = &a.baseline {
        let baseline = load_aligned(base)?;
        let res = paired_bootstrap(&hyps, &baseline, &refs, a.resamples, &mut Rng::new(ctx.seed))?;
        if a.json {
            out.line(pretty(&to_json(&res)))?;
        } else {
            out.line(format!(
                "system BLEU = {:.2} baseline BLEU = {:.2} mean delta = {:.2} p = {:.4} ({} resamples)",
                res.system_bleu, res.baseline_bleu, res.delta_mean, res.p_value, res.n_resamples
            ))?;
        }
        return out.finish(&ctx.seeded().with_stats(to_json(&res)));
    }

    let score = corpus_bleu(&hyps, &refs)?;
    if a.sentence_level {
        // index, score, BP, p1..p4
        for (i, (h, r)) in hyps.iter().zip(&refs).enumerate() {
            let s = sentence_bleu(h, r);
            let p = s.precisions.map(|x| x.to_string());
            out.line(format!("{i}\t{}\t{}\t{}", s.score, s.brevity_penalty, p.join("\t")))?;
        }
    } else if a.json {
        out.line(pretty(&to_json(&score)))?;
    } else {
        out.line(summary_line(&score))?;
    }
    out.finish(
        &ctx.meta()
            .with_stats(json!({ "corpus_bleu": score.score, "sentences": hyps.len() })),
    )
}

pub fn translate(ctx: &Ctx, a: &TranslateArgs) -> Result<(), CliError> {
    let input = load_aligned(&a.input)?;
    let output = exec_translate(&input, &a.command, timeout(a.timeout)?)?;
    let mut out = ctx.output()?;
    for s in &output {
        out.sentence(s)?;
    }
    out.finish(&ctx.meta().with_stats(json!({ "sentences": output.len() })))
}

pub fn hup_eval(ctx: &Ctx, a: &HupEvalArgs) -> Result<(), CliError> {
    let mut sets = load_aligned_set(&[&a.source, &a.reference])?;
    let references = sets.pop().expect("two sets");
    let sources = sets.pop().expect("two sets");
    let limit = timeout(a.timeout)?;
    let translate = |what: &str, input: &[Sentence]| -> Result<Vec<Sentence>, CliError> {
        let cmd = a
            .translator
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("hup-eval needs --{what} or --translator")))?;
        Ok(exec_translate(input, cmd, limit)?)
    };
    let load = |p: &Path| -> Result<Vec<Sentence>, CliError> {
        let v = load_aligned(p)?;
        if v.len() != sources.len() {
            return Err(noisemt_core::Error::mismatch(
                format!("line counts of {} and {}", a.source.display(), p.display()),
                sources.len(),
                v.len(),
            )
            .into());
        }
        Ok(v)
    };

    let clean = match &a.clean {
        Some(p) => load(p)?,
        None => translate("clean", &sources)?,
    };
    let spec = perturb_spec(&a.perturb, ctx.seed)?;
    let generated = a.perturbed.is_none();
    let perturbed = match &a.perturbed {
        Some(p) => load(p)?,
        None => translate("perturbed", &perturb_all(&sources, &spec))?,
    };

    let cases: Vec<HupCase> = references
        .into_iter()
        .zip(clean)
        .zip(perturbed)
        .map(|((r, c), p)| HupCase::new(r, c, p))
        .collect::<Result<_, _>>()?;
    let thresholds = HupThresholds {
        adequacy: a.adequacy,
        collapse: a.collapse,
    };
    let denominator = match a.denominator {
        DenominatorArg::All => Denominator::All,
        DenominatorArg::Eligible => Denominator::Eligible,
    };

    let mut verdicts = a.verdicts_out.as_deref().map(|p| Output::create(Some(p))).transpose()?;
    let mut write_err = None;
    let report = evaluate_with(&cases, thresholds, denominator, |i, _, v| {
        if let (Some(o), None) = (&mut verdicts, &write_err) {
            // index, eligible, hallucination, BLEU(clean, ref), BLEU(perturbed, clean)
            let row = format!(
                "{i}\t{}\t{}\t{}\t{}",
                u8::from(v.eligible),
                u8::from(v.is_hallucination),
                v.bleu_ref_clean,
                v.bleu_pert_clean
            );
            write_err = o.line(row).err();
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }

    let pct = |d: usize| {
        if d == 0 {
            0.0
        } else {
            100.0 * report.n_hallucinated as f64 / d as f64
        }
    };
    let mut value = to_json(&report);
    value["hup_score_all"] = json!(pct(report.n_total));
    value["hup_score_eligible"] = json!(pct(report.n_eligible));
    value["perturbation"] = json!(match (generated, spec.kind) {
        (false, _) => "file",
        (true, PerturbKind::Fpi) => "fpi",
        (true, PerturbKind::Rsm) => "rsm",
    });

    let meta = if generated { ctx.seeded() } else { ctx.meta() }.with_stats(value.clone());
    let mut out = ctx.output()?;
    out.line(pretty(&value))?;
    out.finish(&meta)?;
    if let Some(v) = verdicts {
        v.finish(&meta)?;
    }
    Ok(())
}

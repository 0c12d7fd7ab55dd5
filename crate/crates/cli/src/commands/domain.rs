use std::fs;
use std::path::{Path, PathBuf};

use noisemt_core::corpus::{load_aligned, load_sentences};
use noisemt_core::domain::{
    build_classifier, lowest_k, noise_scores, select_classifier, DomainClassifier, Interpolated, LanguageModel,
    LmConfig, NGramModel, NoiseScore,
};
use noisemt_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{to_json, Ctx};
use crate::args::{DomainTrainArgs, DomainUseArgs, LmTrainArgs, NoiseScoreArgs, ScoringModels, SelectDataArgs};
use crate::output::Output;
use crate::CliError;

pub fn lm_train(ctx: &Ctx, a: &LmTrainArgs) -> Result<(), CliError> {
    let path = ctx.required_out()?;
    let corpus = load_sentences(&a.input)?;
    let model = NGramModel::train(
        corpus,
        LmConfig {
            order: a.order,
            min_count: a.min_count,
        },
    )?;
    model.save(path)?;
    ctx.meta().with_stats(to_json(&model.header())).write_for(path)?;
    eprintln!("trained order-{} model, vocabulary {}", a.order, model.vocab_size());
    Ok(())
}

fn scores(input: &Path, m: &ScoringModels) -> Result<Vec<NoiseScore>, CliError> {
    if !(0.0..=1.0).contains(&m.alpha) {
        return Err(CliError::Usage(format!("--alpha must lie in [0, 1], got {}", m.alpha)));
    }
    let noisy = NGramModel::load(&m.noisy_lm)?;
    let trusted = NGramModel::load(&m.trusted_lm)?;
    let corpus = load_aligned(input)?;
    let mix = Interpolated {
        a: &trusted,
        b: &noisy,
        alpha: m.alpha,
    };
    let denoised: &dyn LanguageModel = if m.alpha == 1.0 { &trusted } else { &mix };
    Ok(noise_scores(&noisy, denoised, &corpus)?)
}

pub fn noise_score(ctx: &Ctx, a: &NoiseScoreArgs) -> Result<(), CliError> {
    let scores = scores(&a.input, &a.models)?;
    let mut out = ctx.output()?;
    for s in &scores {
        out.line(format!("{}\t{}", s.sentence_index, s.score))?;
    }
    out.finish(&ctx.meta().with_stats(json!({ "sentences": scores.len() })))
}

pub fn select_data(ctx: &Ctx, a: &SelectDataArgs) -> Result<(), CliError> {
    let scores = scores(&a.input, &a.models)?;
    let keep = lowest_k(&scores, a.k)?;
    let corpus = load_aligned(&a.input)?;
    let mut out = ctx.output()?;
    for &i in &keep {
        out.sentence(&corpus[i])?;
    }
    let meta = ctx
        .meta()
        .with_stats(json!({ "sentences": corpus.len(), "selected": keep.len() }));
    if let Some(p) = &a.indices_out {
        let mut idx = Output::create(Some(p))?;
        for i in &keep {
            idx.line(i.to_string())?;
        }
        idx.finish(&meta)?;
    }
    out.finish(&meta)
}

pub const MANIFEST_FORMAT: &str = "noisemt-domain-classifier";

/// JSON file tying the two model files of a classifier together. Model
/// paths are relative to the manifest.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub order: usize,
    pub min_count: u32,
    pub length_normalize: bool,
    pub lm_in: PathBuf,
    pub lm_gen: PathBuf,
    #[serde(default)]
    pub candidates: serde_json::Value,
}

fn sibling(manifest: &Path, suffix: &str) -> PathBuf {
    let mut name = manifest.file_name().unwrap_or_default().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn domain_train(ctx: &Ctx, a: &DomainTrainArgs) -> Result<(), CliError> {
    let path = ctx.required_out()?;
    let in_corpus = load_sentences(&a.in_domain)?;
    let gen_corpus = load_sentences(&a.general)?;
    let dev = match (&a.dev_in_domain, &a.dev_general) {
        (Some(i), Some(g)) => Some((load_sentences(i)?, load_sentences(g)?)),
        (None, None) => None,
        _ => return Err(CliError::Usage("--dev-in-domain and --dev-general go together".into())),
    };
    if a.orders.is_empty() {
        return Err(CliError::Usage("--orders is empty".into()));
    }
    let normalize = !a.no_length_normalize;
    let (clf, candidates) = match (&dev, a.orders.as_slice()) {
        (Some((di, dg)), orders) => {
            let (clf, c) = select_classifier(&in_corpus, &gen_corpus, orders, a.min_count, normalize, di, dg)?;
            (clf, to_json(&c))
        }
        (None, [order]) => {
            let cfg = LmConfig {
                order: *order,
                min_count: a.min_count,
            };
            (build_classifier(in_corpus, gen_corpus, cfg, normalize)?, json!([]))
        }
        (None, _) => return Err(CliError::Usage("choosing among several --orders needs dev sets".into())),
    };

    let dir = path.parent().unwrap_or(Path::new(""));
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        order: clf.lm_in.order(),
        min_count: a.min_count,
        length_normalize: normalize,
        lm_in: sibling(path, ".in.lm"),
        lm_gen: sibling(path, ".gen.lm"),
        candidates,
    };
    clf.lm_in.save(dir.join(&manifest.lm_in))?;
    clf.lm_gen.save(dir.join(&manifest.lm_gen))?;
    let text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    ctx.meta().with_stats(to_json(&manifest)).write_for(path)?;
    if let Some((di, dg)) = &dev {
        eprintln!("order {} dev accuracy {:.4}", manifest.order, clf.accuracy(di, dg));
    }
    Ok(())
}

pub fn load_classifier(path: &Path) -> Result<DomainClassifier, CliError> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Model(format!("{}: {e}", path.display())))?;
    if m.format != MANIFEST_FORMAT {
        return Err(Error::Model(format!("{}: not a classifier manifest", path.display())).into());
    }
    let dir = path.parent().unwrap_or(Path::new(""));
    let lm_in = NGramModel::load(dir.join(&m.lm_in))?;
    let lm_gen = NGramModel::load(dir.join(&m.lm_gen))?;
    Ok(DomainClassifier::new(lm_in, lm_gen, m.length_normalize)?)
}

pub fn domain_classify(ctx: &Ctx, a: &DomainUseArgs) -> Result<(), CliError> {
    let clf = load_classifier(&a.model)?;
    let corpus = load_aligned(&a.input)?;
    let labels = clf.classify_all(&corpus);
    let mut out = ctx.output()?;
    for (i, c) in labels.iter().enumerate() {
        out.line(format!("{i}\t{}\t{}", c.label.as_str(), c.margin))?;
    }
    out.finish(&ctx.meta().with_stats(json!({ "sentences": labels.len() })))
}

pub fn domain_ratio(ctx: &Ctx, a: &DomainUseArgs) -> Result<(), CliError> {
    let clf = load_classifier(&a.model)?;
    let corpus = load_sentences(&a.input)?;
    let ratio = clf.domain_ratio(&corpus)?;
    let mut out = ctx.output()?;
    out.line(ratio.to_string())?;
    out.finish(
        &ctx.meta()
            .with_stats(json!({ "sentences": corpus.len(), "in_domain_percent": ratio })),
    )
}

mod diag;
mod domain;
mod eval;
mod noise;

use std::path::{Path, PathBuf};
use std::time::Duration;

use noisemt_core::corpus::load_aligned;
use noisemt_core::meta::Metadata;
use noisemt_core::{Error, Sentence, Token};
use serde_json::{json, Value};

use crate::args::{Cli, Command};
use crate::output::Output;
use crate::CliError;

pub(crate) struct Ctx {
    pub command: &'static str,
    pub seed: u64,
    pub out: Option<PathBuf>,
    params: Value,
}

impl Ctx {
    pub fn meta(&self) -> Metadata {
        Metadata::new(self.command, self.params.clone())
    }

    pub fn seeded(&self) -> Metadata {
        self.meta().seeded(self.seed)
    }

    pub fn output(&self) -> Result<Output, CliError> {
        Output::create(self.out.as_deref())
    }

    /// For subcommands whose product is a binary file.
    pub fn required_out(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("{} needs --out", self.command)))
    }
}

pub(crate) fn token(surface: &str) -> Result<Token, CliError> {
    Ok(Token::new(surface)?)
}

pub(crate) fn timeout(secs: Option<f64>) -> Result<Option<Duration>, CliError> {
    secs.map(|s| Duration::try_from_secs_f64(s).map_err(|e| CliError::Usage(format!("--timeout {s}: {e}"))))
        .transpose()
}

/// Loads files whose lines must align, checking they have equal length.
pub(crate) fn load_aligned_set(paths: &[&Path]) -> Result<Vec<Vec<Sentence>>, CliError> {
    let sets: Vec<Vec<Sentence>> = paths.iter().map(load_aligned).collect::<Result<_, _>>()?;
    for (p, s) in paths.iter().zip(&sets).skip(1) {
        if s.len() != sets[0].len() {
            return Err(Error::mismatch(
                format!("line counts of {} and {}", paths[0].display(), p.display()),
                sets[0].len(),
                s.len(),
            )
            .into());
        }
    }
    Ok(sets)
}

pub(crate) fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub(crate) fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a pool built earlier in the same process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let ctx = Ctx {
        command: cli.command.name(),
        seed: cli.global.seed,
        out: cli.global.out.clone(),
        params: json!({ "global": to_json(&cli.global), "command": to_json(&cli.command) }),
    };
    match &cli.command {
        Command::NoiseCorpus(a) => noise::noise_corpus(&ctx, a),
        Command::AdaptInput(a) => noise::adapt_input(&ctx, a),
        Command::Perturb(a) => noise::perturb(&ctx, a),
        Command::Bleu(a) => eval::bleu(&ctx, a),
        Command::HupEval(a) => eval::hup_eval(&ctx, a),
        Command::Translate(a) => eval::translate(&ctx, a),
        Command::LmTrain(a) => domain::lm_train(&ctx, a),
        Command::NoiseScore(a) => domain::noise_score(&ctx, a),
        Command::SelectData(a) => domain::select_data(&ctx, a),
        Command::DomainTrain(a) => domain::domain_train(&ctx, a),
        Command::DomainClassify(a) => domain::domain_classify(&ctx, a),
        Command::DomainRatio(a) => domain::domain_ratio(&ctx, a),
        Command::Uncertainty(a) => diag::uncertainty(&ctx, a),
        Command::Distractors(a) => diag::distractors(&ctx, a),
        Command::CopyRate(a) => diag::copy_rate(&ctx, a),
        Command::BeamReport(a) => diag::beam_report(&ctx, a),
        Command::FreqFmeasure(a) => diag::freq_fmeasure(&ctx, a),
        Command::Lexdist(a) => diag::lexdist(&ctx, a),
    }
}

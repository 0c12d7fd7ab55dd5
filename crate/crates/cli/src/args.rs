use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisemt_core::diagnostics::{HIGH_MAX_RANK, MED_MAX_RANK};
use noisemt_core::noising::{DEFAULT_INSERT_TOKEN, DEFAULT_MASK_TOKEN};
use noisemt_core::pipeline::StreamConfig;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "noisemt",
    version,
    about = "Corpus noising, BLEU/HuP evaluation, n-gram data selection and translation diagnostics",
    after_help = "Any flag can also be set through the environment as NOISEMT_<FLAG> \
                  (e.g. NOISEMT_SEED, NOISEMT_MASK_RATE) or through the --config JSON file. \
                  Precedence: command line, environment, config file, built-in default."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct GlobalArgs {
    /// Seed for every randomized step
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout when absent); a <out>.meta.json sidecar is written next to it
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file of flag values, either top-level or under a subcommand key
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Span-mask and sentence-permute a blank-line separated document corpus
    NoiseCorpus(NoiseCorpusArgs),
    /// Corrupt a share of source sentences and mix them with clean pairs
    AdaptInput(AdaptInputArgs),
    /// Perturb source sentences (first-position insertion or random span masking)
    Perturb(PerturbArgs),
    /// Corpus BLEU, sentence BLEU table, or paired bootstrap against a baseline
    Bleu(BleuArgs),
    /// Hallucination-under-perturbation report from aligned files or a translator command
    HupEval(HupEvalArgs),
    /// Pipe sentences through an external translator command
    Translate(TranslateArgs),
    /// Train a Kneser-Ney n-gram model
    LmTrain(LmTrainArgs),
    /// Per-sentence noise score: log P_noisy(x) - log P_denoised(x)
    NoiseScore(NoiseScoreArgs),
    /// Keep the k sentences with the lowest noise score
    SelectData(SelectDataArgs),
    /// Train a two-model domain classifier
    DomainTrain(DomainTrainArgs),
    /// Label each sentence in-domain or general
    DomainClassify(DomainUseArgs),
    /// Percentage of sentences classified in-domain
    DomainRatio(DomainUseArgs),
    /// Mean token probability per output position
    Uncertainty(UncertaintyArgs),
    /// Length-matched distractor sentences drawn from a pool
    Distractors(DistractorArgs),
    /// Percentage of output tokens copied from the source
    CopyRate(CopyRateArgs),
    /// BLEU and copy ratio across beam sizes
    BeamReport(BeamReportArgs),
    /// Word F-measure bucketed by training-corpus frequency rank
    FreqFmeasure(FreqFmeasureArgs),
    /// Rank/frequency table of a corpus
    Lexdist(LexdistArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::NoiseCorpus(_) => "noise-corpus",
            Command::AdaptInput(_) => "adapt-input",
            Command::Perturb(_) => "perturb",
            Command::Bleu(_) => "bleu",
            Command::HupEval(_) => "hup-eval",
            Command::Translate(_) => "translate",
            Command::LmTrain(_) => "lm-train",
            Command::NoiseScore(_) => "noise-score",
            Command::SelectData(_) => "select-data",
            Command::DomainTrain(_) => "domain-train",
            Command::DomainClassify(_) => "domain-classify",
            Command::DomainRatio(_) => "domain-ratio",
            Command::Uncertainty(_) => "uncertainty",
            Command::Distractors(_) => "distractors",
            Command::CopyRate(_) => "copy-rate",
            Command::BeamReport(_) => "beam-report",
            Command::FreqFmeasure(_) => "freq-fmeasure",
            Command::Lexdist(_) => "lexdist",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct NoiseCorpusArgs {
    /// Documents, one sentence per line, blank line between documents
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the untouched documents (denoising targets)
    #[arg(long)]
    pub target_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.35)]
    pub mask_rate: f64,
    #[arg(long, default_value_t = 3.5)]
    pub poisson_lambda: f64,
    /// Keep sentence order within documents
    #[arg(long)]
    pub no_permute: bool,
    #[arg(long, default_value = DEFAULT_MASK_TOKEN)]
    pub mask_token: String,
    /// Documents per parallel batch
    #[arg(long, default_value_t = StreamConfig::default().batch_docs)]
    pub batch_docs: usize,
    /// Text bytes per parallel batch
    #[arg(long, default_value_t = StreamConfig::default().batch_bytes)]
    pub batch_bytes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub noisy: u32,
    pub clean: u32,
}

impl FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected NOISY:CLEAN, got {s:?}"))?;
        let num = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Ratio {
            noisy: num(a)?,
            clean: num(b)?,
        })
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.noisy, self.clean)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MixModeArg {
    Partition,
    Duplicate,
}

#[derive(Args, Debug, Serialize)]
pub struct AdaptInputArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    /// Target side output; without it --out receives `source<TAB>target` lines
    #[arg(long)]
    pub tgt_out: Option<PathBuf>,
    /// TSV of output line, input index and noisy flag
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.10)]
    pub word_noise_rate: f64,
    #[arg(long, default_value_t = 1)]
    pub mask_weight: u32,
    #[arg(long, default_value_t = 1)]
    pub delete_weight: u32,
    #[arg(long, default_value_t = 1)]
    pub permute_weight: u32,
    /// Noisy to clean ratio
    #[arg(long, default_value = "1:9")]
    pub mix: Ratio,
    #[arg(long, value_enum, default_value_t = MixModeArg::Partition)]
    pub mix_mode: MixModeArg,
    #[arg(long, default_value = DEFAULT_MASK_TOKEN)]
    pub mask_token: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbKindArg {
    Fpi,
    Rsm,
}

#[derive(Args, Debug, Serialize)]
pub struct PerturbOptions {
    #[arg(long, value_enum, default_value_t = PerturbKindArg::Fpi)]
    pub kind: PerturbKindArg,
    /// Token prepended by first-position insertion
    #[arg(long, default_value = DEFAULT_INSERT_TOKEN)]
    pub fpi_token: String,
    /// Random span masking rate
    #[arg(long, default_value_t = 0.35)]
    pub rsm_rate: f64,
    #[arg(long, default_value_t = 3.5)]
    pub rsm_lambda: f64,
    #[arg(long, default_value = DEFAULT_MASK_TOKEN)]
    pub mask_token: String,
}

#[derive(Args, Debug, Serialize)]
pub struct PerturbArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub opts: PerturbOptions,
}

#[derive(Args, Debug, Serialize)]
pub struct BleuArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    /// Reference file; repeat for multiple references
    #[arg(long = "ref", required = true)]
    pub refs: Vec<PathBuf>,
    /// Per-sentence TSV: index, score, BP, p1..p4
    #[arg(long)]
    pub sentence_level: bool,
    /// Baseline hypotheses for a paired bootstrap test
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    /// Print the full score object as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DenominatorArg {
    All,
    Eligible,
}

#[derive(Args, Debug, Serialize)]
pub struct HupEvalArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Translations of the unperturbed sources
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Translations of the perturbed sources
    #[arg(long)]
    pub perturbed: Option<PathBuf>,
    /// Shell command used to translate whichever of --clean/--perturbed is missing
    #[arg(long)]
    pub translator: Option<String>,
    /// Translator timeout in seconds
    #[arg(long)]
    pub timeout: Option<f64>,
    #[command(flatten)]
    pub perturb: PerturbOptions,
    #[arg(long, default_value_t = 5.0)]
    pub adequacy: f64,
    #[arg(long, default_value_t = 3.0)]
    pub collapse: f64,
    #[arg(long, value_enum, default_value_t = DenominatorArg::All)]
    pub denominator: DenominatorArg,
    /// Per-sentence TSV of verdicts
    #[arg(long)]
    pub verdicts_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TranslateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Shell command reading one sentence per line on stdin
    #[arg(long)]
    pub command: String,
    /// Seconds before the child is killed
    #[arg(long)]
    pub timeout: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct LmTrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Tokens seen fewer times become <unk>
    #[arg(long, default_value_t = 2)]
    pub min_count: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct ScoringModels {
    /// Model trained on the raw (noisy) data
    #[arg(long)]
    pub noisy_lm: PathBuf,
    /// Model trained on trusted data
    #[arg(long)]
    pub trusted_lm: PathBuf,
    /// Weight of the trusted model in the denoised mix; 1 uses it alone
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct NoiseScoreArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub models: ScoringModels,
}

#[derive(Args, Debug, Serialize)]
pub struct SelectDataArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub models: ScoringModels,
    /// Number of sentences to keep
    #[arg(long)]
    pub k: usize,
    /// Also write the selected indices, one per line
    #[arg(long)]
    pub indices_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DomainTrainArgs {
    #[arg(long)]
    pub in_domain: PathBuf,
    #[arg(long)]
    pub general: PathBuf,
    /// Candidate n-gram orders; more than one requires dev sets
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub orders: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub min_count: u32,
    #[arg(long)]
    pub dev_in_domain: Option<PathBuf>,
    #[arg(long)]
    pub dev_general: Option<PathBuf>,
    /// Compare total rather than per-token log-probabilities
    #[arg(long)]
    pub no_length_normalize: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct DomainUseArgs {
    /// Classifier manifest written by domain-train
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct UncertaintyArgs {
    /// JSON lines of {"tokens": [...], "probs": [...]}
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub max_pos: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct DistractorArgs {
    #[arg(long = "refs")]
    pub refs: PathBuf,
    /// General-domain sentences to draw from
    #[arg(long)]
    pub pool: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CopyRateArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Ignore tokens without letters (punctuation, numerals)
    #[arg(long)]
    pub exclude_punct_num: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BeamFile {
    pub beam: usize,
    pub path: PathBuf,
}

impl FromStr for BeamFile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (b, p) = s
            .split_once('=')
            .ok_or_else(|| format!("expected SIZE=FILE, got {s:?}"))?;
        Ok(BeamFile {
            beam: b.parse().map_err(|e| format!("beam size {b:?}: {e}"))?,
            path: PathBuf::from(p),
        })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BeamReportArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long = "ref", required = true)]
    pub refs: Vec<PathBuf>,
    /// SIZE=FILE, repeated for each beam size
    #[arg(long = "beam", required = true)]
    pub beams: Vec<BeamFile>,
    #[arg(long)]
    pub exclude_punct_num: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct FreqFmeasureArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Corpus whose word counts define the ranks
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, default_value_t = HIGH_MAX_RANK)]
    pub high_max_rank: usize,
    #[arg(long, default_value_t = MED_MAX_RANK)]
    pub med_max_rank: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct LexdistArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Corpus that defines the ranks (defaults to the input)
    #[arg(long)]
    pub rank_source: Option<PathBuf>,
    #[arg(long)]
    pub max_rank: Option<usize>,
}

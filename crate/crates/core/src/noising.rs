//! Text corruption: text-infilling span masking with sentence permutation for
//! denoising pretraining, source-side input adaptation for finetuning, and
//! the first-position-insertion / random-span-masking robustness probes.

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, ParallelPair, Sentence, Token};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const DEFAULT_MASK_TOKEN: &str = "<mask>";
pub const DEFAULT_INSERT_TOKEN: &str = "<ins>";

/// Stream id reserved for corpus-level decisions (mixing, shuffling); item
/// streams use the item index.
pub const CORPUS_STREAM: u64 = u64::MAX;

/// `⌈rate·n⌉`, tolerant of float noise such as `0.07 * 100 = 7.000000000000001`.
pub fn noise_budget(rate: f64, n: usize) -> usize {
    let raw = rate * n as f64;
    let b = (raw - 1e-9).ceil().max(0.0) as usize;
    b.min(n)
}

fn default_mask_token() -> Token {
    Token::from_piece(DEFAULT_MASK_TOKEN)
}

fn default_insert_token() -> Token {
    Token::from_piece(DEFAULT_INSERT_TOKEN)
}

fn check_rate(name: &str, rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::param(format!("{name} must be in [0, 1], got {rate}")));
    }
    Ok(())
}

fn check_lambda(name: &str, lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param(format!("{name} must be positive, got {lambda}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub mask_rate: f64,
    pub poisson_lambda: f64,
    pub permute_sentences: bool,
    pub mask_token: Token,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            mask_rate: 0.35,
            poisson_lambda: 3.5,
            permute_sentences: true,
            mask_token: default_mask_token(),
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        check_rate("mask_rate", self.mask_rate)?;
        check_lambda("poisson_lambda", self.poisson_lambda)
    }

    fn masker(&self) -> SpanMasker<'_> {
        SpanMasker {
            rate: self.mask_rate,
            lambda: self.poisson_lambda,
            mask_token: &self.mask_token,
        }
    }
}

/// Text-infilling span masker.
///
/// Span lengths are drawn from Poisson(λ); each span starts at a uniformly
/// chosen unmasked position and extends rightwards, merging with any masked
/// run it touches. A zero-length draw inserts a mask before the chosen
/// position. Draws continue until `⌈rate·N⌉` original tokens are covered, and
/// the final span is cut short so coverage is exactly that budget. Every
/// maximal run of masked tokens and insertions becomes one mask token.
#[derive(Clone, Copy, Debug)]
pub struct SpanMasker<'a> {
    pub rate: f64,
    pub lambda: f64,
    pub mask_token: &'a Token,
}

#[derive(Clone, Debug, Default)]
pub struct SpanMaskOutcome {
    pub tokens: Vec<Token>,
    /// Original tokens hidden under masks.
    pub covered: usize,
    /// Every Poisson length drawn, before truncation.
    pub span_draws: Vec<usize>,
    /// Mask tokens in the output.
    pub mask_count: usize,
}

impl SpanMasker<'_> {
    pub fn mask(&self, tokens: &[Token], rng: &mut Rng) -> SpanMaskOutcome {
        let n = tokens.len();
        let budget = noise_budget(self.rate, n);
        if budget == 0 {
            return SpanMaskOutcome {
                tokens: tokens.to_vec(),
                ..Default::default()
            };
        }

        let mut covered = vec![false; n];
        let mut inserted = vec![false; n];
        let mut covered_count = 0;
        let mut span_draws = Vec::new();

        while covered_count < budget {
            let len = rng.poisson(self.lambda);
            span_draws.push(len);
            // rejection gives a uniform start among unmasked positions
            let start = loop {
                let p = rng.below(n);
                if !covered[p] {
                    break p;
                }
            };
            if len == 0 {
                inserted[start] = true;
                continue;
            }
            for flag in covered.iter_mut().skip(start).take(len) {
                if covered_count == budget {
                    break;
                }
                if !*flag {
                    *flag = true;
                    covered_count += 1;
                }
            }
        }

        let mut out = Vec::with_capacity(n - covered_count + 1);
        let mut mask_count = 0;
        let mut in_mask = false;
        for i in 0..n {
            if inserted[i] || covered[i] {
                if !in_mask {
                    out.push(self.mask_token.clone());
                    mask_count += 1;
                }
                in_mask = covered[i];
                if !covered[i] {
                    out.push(tokens[i].clone());
                }
            } else {
                out.push(tokens[i].clone());
                in_mask = false;
            }
        }

        SpanMaskOutcome {
            tokens: out,
            covered: covered_count,
            span_draws,
            mask_count,
        }
    }
}

/// Counters collected while noising one document.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NoiseTrace {
    pub tokens: usize,
    pub covered: usize,
    pub masks: usize,
    pub span_draws: Vec<usize>,
    /// Index into the input document of each output sentence.
    pub order: Vec<usize>,
}

/// Permutes sentence order (if enabled) then span-masks every sentence.
pub fn bart_noise(doc: &Document, spec: &NoiseSpec, rng: &mut Rng) -> Document {
    bart_noise_traced(doc, spec, rng).0
}

pub fn bart_noise_traced(doc: &Document, spec: &NoiseSpec, rng: &mut Rng) -> (Document, NoiseTrace) {
    let mut order: Vec<usize> = (0..doc.sentences().len()).collect();
    if spec.permute_sentences {
        rng.shuffle(&mut order);
    }
    let masker = spec.masker();
    let mut trace = NoiseTrace::default();
    let sentences = order
        .iter()
        .map(|&i| {
            let s = &doc.sentences()[i];
            let out = masker.mask(s.tokens(), rng);
            trace.tokens += s.len();
            trace.covered += out.covered;
            trace.masks += out.mask_count;
            trace.span_draws.extend_from_slice(&out.span_draws);
            Sentence::new(out.tokens)
        })
        .collect();
    trace.order = order;
    (Document::from_nonempty(sentences), trace)
}

/// Noised source and original target of one denoising-pretraining instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenoisingPair {
    pub source: Document,
    pub target: Document,
}

pub fn make_denoising_pair(doc: &Document, spec: &NoiseSpec, rng: &mut Rng) -> DenoisingPair {
    DenoisingPair {
        source: bart_noise(doc, spec, rng),
        target: doc.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseOp {
    Mask,
    Delete,
    Permute,
}

/// Relative weights of the word-level noise operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseOps {
    pub mask: u32,
    pub delete: u32,
    pub permute: u32,
}

impl Default for NoiseOps {
    fn default() -> Self {
        NoiseOps {
            mask: 1,
            delete: 1,
            permute: 1,
        }
    }
}

impl NoiseOps {
    pub fn only(op: NoiseOp) -> Self {
        let mut ops = NoiseOps {
            mask: 0,
            delete: 0,
            permute: 0,
        };
        match op {
            NoiseOp::Mask => ops.mask = 1,
            NoiseOp::Delete => ops.delete = 1,
            NoiseOp::Permute => ops.permute = 1,
        }
        ops
    }

    fn draw(&self, rng: &mut Rng, allow_permute: bool) -> Option<NoiseOp> {
        let permute = if allow_permute { self.permute } else { 0 };
        match rng.weighted_index(&[self.mask, self.delete, permute])? {
            0 => Some(NoiseOp::Mask),
            1 => Some(NoiseOp::Delete),
            _ => Some(NoiseOp::Permute),
        }
    }
}

/// How noisy and clean pairs are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixMode {
    /// Each input pair appears once, either noised or clean.
    #[default]
    Partition,
    /// Every clean pair is kept and noised copies are added on top.
    Duplicate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptSpec {
    pub word_noise_rate: f64,
    pub noise_ops: NoiseOps,
    pub mix_noisy: u32,
    pub mix_clean: u32,
    pub mix_mode: MixMode,
    pub mask_token: Token,
    pub seed: u64,
}

impl Default for AdaptSpec {
    fn default() -> Self {
        AdaptSpec {
            word_noise_rate: 0.10,
            noise_ops: NoiseOps::default(),
            mix_noisy: 1,
            mix_clean: 9,
            mix_mode: MixMode::Partition,
            mask_token: default_mask_token(),
            seed: 0,
        }
    }
}

impl AdaptSpec {
    pub fn validate(&self) -> Result<()> {
        check_rate("word_noise_rate", self.word_noise_rate)?;
        if self.mix_noisy == 0 && self.mix_clean == 0 {
            return Err(Error::param("mix weights cannot both be zero"));
        }
        if self.mix_mode == MixMode::Duplicate && (self.mix_clean == 0 || self.mix_noisy > self.mix_clean) {
            return Err(Error::param("duplicate mixing needs 0 < mix_noisy <= mix_clean"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptOutcome {
    pub pair: ParallelPair,
    /// Selected source positions and the operation applied to each.
    pub edits: Vec<(usize, NoiseOp)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Keep,
    Mask,
    Delete,
}

/// Applies word-level noise to `⌈rate·len⌉` distinct source positions. The
/// target side is returned untouched.
pub fn adapt_source(pair: &ParallelPair, spec: &AdaptSpec, rng: &mut Rng) -> AdaptOutcome {
    let src = pair.source.tokens();
    let n = src.len();
    let k = noise_budget(spec.word_noise_rate, n);
    if k == 0 {
        return AdaptOutcome {
            pair: pair.clone(),
            edits: Vec::new(),
        };
    }

    let positions = rng.sample_indices(n, k);
    let mut edits = Vec::with_capacity(k);
    for p in positions {
        if let Some(op) = spec.noise_ops.draw(rng, n > 1) {
            edits.push((p, op));
        }
    }

    let mut items: Vec<(&Token, Slot)> = src.iter().map(|t| (t, Slot::Keep)).collect();
    for &(p, op) in &edits {
        match op {
            NoiseOp::Mask => items[p].1 = Slot::Mask,
            NoiseOp::Delete => items[p].1 = Slot::Delete,
            NoiseOp::Permute => {}
        }
    }
    for &(p, op) in &edits {
        if op == NoiseOp::Permute {
            let right = if p == 0 {
                true
            } else if p + 1 == n {
                false
            } else {
                rng.coin()
            };
            let q = if right { p + 1 } else { p - 1 };
            items.swap(p, q);
        }
    }

    let mut out: Vec<Token> = items
        .iter()
        .filter_map(|&(t, slot)| match slot {
            Slot::Keep => Some(t.clone()),
            Slot::Mask => Some(spec.mask_token.clone()),
            Slot::Delete => None,
        })
        .collect();
    // a source deleted to nothing keeps a single mask so the pair stays valid
    if out.is_empty() {
        out.push(spec.mask_token.clone());
    }

    AdaptOutcome {
        pair: ParallelPair {
            source: Sentence::new(out),
            target: pair.target.clone(),
        },
        edits,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedPair {
    pub pair: ParallelPair,
    pub noisy: bool,
    /// Position of the pair in the input corpus.
    pub index: usize,
}

/// Number of noisy pairs for a corpus of `n` pairs, rounded half up.
pub fn noisy_count(n: usize, spec: &AdaptSpec) -> usize {
    let (nw, cw) = (spec.mix_noisy as u128, spec.mix_clean as u128);
    let n = n as u128;
    let count = match spec.mix_mode {
        MixMode::Partition => (2 * n * nw + nw + cw) / (2 * (nw + cw)),
        MixMode::Duplicate => (2 * n * nw + cw) / (2 * cw),
    };
    count.min(n) as usize
}

/// Combines aligned noisy and clean variants of one corpus at the spec's
/// ratio, then shuffles. `noisy[i]` must be the noised version of `clean[i]`.
pub fn mix_corpora<N, C>(noisy: N, clean: C, spec: &AdaptSpec, rng: &mut Rng) -> Result<Vec<MixedPair>>
where
    N: IntoIterator<Item = ParallelPair>,
    C: IntoIterator<Item = ParallelPair>,
{
    spec.validate()?;
    let noisy: Vec<ParallelPair> = noisy.into_iter().collect();
    let clean: Vec<ParallelPair> = clean.into_iter().collect();
    if noisy.len() != clean.len() {
        return Err(Error::mismatch("noisy vs clean corpus", noisy.len(), clean.len()));
    }
    let mut noisy: Vec<Option<ParallelPair>> = noisy.into_iter().map(Some).collect();
    mix_with(clean, spec, rng, |i, _| {
        noisy[i].take().expect("noisy pair taken twice")
    })
}

/// Noises only the pairs selected for the noisy share, each from its own
/// stream `Rng::for_stream(spec.seed, index)`. Equivalent to noising every
/// pair that way and calling [`mix_corpora`] with the corpus stream.
pub fn adapt_corpus(pairs: Vec<ParallelPair>, spec: &AdaptSpec) -> Result<Vec<MixedPair>> {
    spec.validate()?;
    let mut rng = Rng::for_stream(spec.seed, CORPUS_STREAM);
    mix_with(pairs, spec, &mut rng, |i, p| {
        adapt_source(p, spec, &mut Rng::for_stream(spec.seed, i as u64)).pair
    })
}

fn mix_with<F>(clean: Vec<ParallelPair>, spec: &AdaptSpec, rng: &mut Rng, mut noisy_at: F) -> Result<Vec<MixedPair>>
where
    F: FnMut(usize, &ParallelPair) -> ParallelPair,
{
    let n = clean.len();
    let k = noisy_count(n, spec);
    let mut chosen = rng.sample_indices(n, k);
    chosen.sort_unstable();

    let mut out = Vec::with_capacity(n + if spec.mix_mode == MixMode::Duplicate { k } else { 0 });
    let mut next = chosen.iter().peekable();
    for (i, pair) in clean.into_iter().enumerate() {
        let selected = next.peek() == Some(&&i);
        if selected {
            next.next();
            out.push(MixedPair {
                pair: noisy_at(i, &pair),
                noisy: true,
                index: i,
            });
        }
        if !selected || spec.mix_mode == MixMode::Duplicate {
            out.push(MixedPair {
                pair,
                noisy: false,
                index: i,
            });
        }
    }
    rng.shuffle(&mut out);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbKind {
    Fpi,
    Rsm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbSpec {
    pub kind: PerturbKind,
    pub fpi_token: Token,
    pub rsm_mask_rate: f64,
    pub rsm_lambda: f64,
    pub mask_token: Token,
    pub seed: u64,
}

impl Default for PerturbSpec {
    fn default() -> Self {
        PerturbSpec {
            kind: PerturbKind::Fpi,
            fpi_token: default_insert_token(),
            rsm_mask_rate: 0.35,
            rsm_lambda: 3.5,
            mask_token: default_mask_token(),
            seed: 0,
        }
    }
}

impl PerturbSpec {
    pub fn fpi() -> Self {
        PerturbSpec::default()
    }

    pub fn rsm() -> Self {
        PerturbSpec {
            kind: PerturbKind::Rsm,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("rsm_mask_rate", self.rsm_mask_rate)?;
        check_lambda("rsm_lambda", self.rsm_lambda)
    }
}

/// Prepends the insertion token.
pub fn perturb_fpi(sentence: &Sentence, spec: &PerturbSpec) -> Sentence {
    let mut tokens = Vec::with_capacity(sentence.len() + 1);
    tokens.push(spec.fpi_token.clone());
    tokens.extend_from_slice(sentence.tokens());
    Sentence::new(tokens)
}

/// Span-masks a single sentence; no reordering.
pub fn perturb_rsm(sentence: &Sentence, spec: &PerturbSpec, rng: &mut Rng) -> Sentence {
    let masker = SpanMasker {
        rate: spec.rsm_mask_rate,
        lambda: spec.rsm_lambda,
        mask_token: &spec.mask_token,
    };
    Sentence::new(masker.mask(sentence.tokens(), rng).tokens)
}

pub fn perturb(sentence: &Sentence, spec: &PerturbSpec, rng: &mut Rng) -> Sentence {
    match spec.kind {
        PerturbKind::Fpi => perturb_fpi(sentence, spec),
        PerturbKind::Rsm => perturb_rsm(sentence, spec, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(s: &str) -> Sentence {
        Sentence::parse(s)
    }

    fn numbered(n: usize) -> Sentence {
        Sentence::parse(&(0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" "))
    }

    fn pair(src: &str, tgt: &str) -> ParallelPair {
        ParallelPair::new(sent(src), sent(tgt)).unwrap()
    }

    #[test]
    fn budget_rounds_up_without_float_noise() {
        assert_eq!(noise_budget(0.35, 50), 18);
        assert_eq!(noise_budget(0.07, 100), 7);
        assert_eq!(noise_budget(0.10, 10), 1);
        assert_eq!(noise_budget(0.0, 10), 0);
        assert_eq!(noise_budget(1.0, 3), 3);
    }

    #[test]
    fn zero_rate_no_permute_is_identity() {
        let doc = Document::new(vec![sent("a b c"), sent("d e")]).unwrap();
        let spec = NoiseSpec {
            mask_rate: 0.0,
            permute_sentences: false,
            ..Default::default()
        };
        assert_eq!(bart_noise(&doc, &spec, &mut Rng::new(1)), doc);
        let p = make_denoising_pair(&doc, &spec, &mut Rng::new(1));
        assert_eq!(p.source, p.target);
    }

    #[test]
    fn coverage_is_exactly_the_budget() {
        let mask = default_mask_token();
        let masker = SpanMasker {
            rate: 0.35,
            lambda: 3.5,
            mask_token: &mask,
        };
        let mut rng = Rng::new(3);
        for n in 1..60 {
            let s = numbered(n);
            let out = masker.mask(s.tokens(), &mut rng);
            assert_eq!(out.covered, noise_budget(0.35, n));
            let kept = out.tokens.iter().filter(|t| **t != mask).count();
            assert_eq!(kept, n - out.covered);
            // surviving tokens keep their relative order
            let survivors: Vec<_> = out.tokens.iter().filter(|t| **t != mask).collect();
            assert!(survivors.windows(2).all(|w| {
                let a: usize = w[0].as_str()[1..].parse().unwrap();
                let b: usize = w[1].as_str()[1..].parse().unwrap();
                a < b
            }));
        }
    }

    #[test]
    fn adjacent_masks_collapse() {
        let mask = default_mask_token();
        let masker = SpanMasker {
            rate: 1.0,
            lambda: 2.0,
            mask_token: &mask,
        };
        let out = masker.mask(numbered(20).tokens(), &mut Rng::new(8));
        assert_eq!(out.tokens, vec![mask]);
        assert_eq!(out.covered, 20);
    }

    #[test]
    fn fpi_prepends() {
        let out = perturb_fpi(&sent("a b c"), &PerturbSpec::fpi());
        assert_eq!(out.to_string(), "<ins> a b c");
    }

    #[test]
    fn rsm_zero_rate_identity_and_mask_token() {
        let spec = PerturbSpec {
            rsm_mask_rate: 0.0,
            ..PerturbSpec::rsm()
        };
        let s = numbered(12);
        assert_eq!(perturb_rsm(&s, &spec, &mut Rng::new(2)), s);

        let spec = PerturbSpec {
            mask_token: Token::new("[M]").unwrap(),
            ..PerturbSpec::rsm()
        };
        let out = perturb_rsm(&s, &spec, &mut Rng::new(2));
        assert!(out.iter().all(|t| t == "[M]" || t.starts_with('w')));
        assert!(out.iter().any(|t| t == "[M]"));
    }

    #[test]
    fn adapt_zero_rate_identity() {
        let spec = AdaptSpec {
            word_noise_rate: 0.0,
            ..Default::default()
        };
        let p = pair("a b c", "x y");
        assert_eq!(adapt_source(&p, &spec, &mut Rng::new(0)).pair, p);
    }

    #[test]
    fn adapt_delete_only_removes_one() {
        let spec = AdaptSpec {
            noise_ops: NoiseOps::only(NoiseOp::Delete),
            ..Default::default()
        };
        let p = ParallelPair::new(numbered(10), sent("t")).unwrap();
        let out = adapt_source(&p, &spec, &mut Rng::new(4));
        assert_eq!(out.pair.source.len(), 9);
        assert_eq!(out.pair.target, p.target);
    }

    #[test]
    fn adapt_single_token_never_permutes() {
        let spec = AdaptSpec {
            word_noise_rate: 1.0,
            ..Default::default()
        };
        let p = pair("solo", "t");
        for seed in 0..200 {
            let out = adapt_source(&p, &spec, &mut Rng::new(seed));
            assert!(out.edits.iter().all(|&(_, op)| op != NoiseOp::Permute));
            assert!(!out.pair.source.is_empty());
        }
        let permute_only = AdaptSpec {
            word_noise_rate: 1.0,
            noise_ops: NoiseOps::only(NoiseOp::Permute),
            ..Default::default()
        };
        let out = adapt_source(&p, &permute_only, &mut Rng::new(0));
        assert_eq!(out.pair, p);
        assert!(out.edits.is_empty());
    }

    #[test]
    fn adapt_permute_swaps_neighbours() {
        let spec = AdaptSpec {
            noise_ops: NoiseOps::only(NoiseOp::Permute),
            ..Default::default()
        };
        let p = ParallelPair::new(numbered(10), sent("t")).unwrap();
        let out = adapt_source(&p, &spec, &mut Rng::new(12));
        let mut a: Vec<_> = out.pair.source.iter().collect();
        let mut b: Vec<_> = p.source.iter().collect();
        let diffs = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        assert_eq!(diffs, 2);
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn full_delete_keeps_a_mask() {
        let spec = AdaptSpec {
            word_noise_rate: 1.0,
            noise_ops: NoiseOps::only(NoiseOp::Delete),
            ..Default::default()
        };
        let out = adapt_source(&pair("a b", "t"), &spec, &mut Rng::new(0));
        assert_eq!(out.pair.source.to_string(), "<mask>");
    }

    #[test]
    fn noisy_count_rounding() {
        let spec = AdaptSpec::default();
        assert_eq!(noisy_count(1000, &spec), 100);
        assert_eq!(noisy_count(5, &spec), 1);
        assert_eq!(noisy_count(4, &spec), 0);
        let dup = AdaptSpec {
            mix_mode: MixMode::Duplicate,
            ..Default::default()
        };
        assert_eq!(noisy_count(1000, &dup), 111);
    }

    #[test]
    fn mix_extremes() {
        let clean: Vec<_> = (0..50).map(|i| pair(&format!("s{i}"), &format!("t{i}"))).collect();
        let noisy: Vec<_> = (0..50).map(|i| pair(&format!("n{i}"), &format!("t{i}"))).collect();

        let none = AdaptSpec {
            mix_noisy: 0,
            mix_clean: 1,
            ..Default::default()
        };
        let out = mix_corpora(noisy.clone(), clean.clone(), &none, &mut Rng::new(1)).unwrap();
        let mut got: Vec<_> = out.iter().map(|m| m.pair.source.to_string()).collect();
        let mut want: Vec<_> = clean.iter().map(|p| p.source.to_string()).collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);

        let all = AdaptSpec {
            mix_noisy: 1,
            mix_clean: 0,
            ..Default::default()
        };
        let out = mix_corpora(noisy.clone(), clean.clone(), &all, &mut Rng::new(1)).unwrap();
        assert!(out
            .iter()
            .all(|m| m.noisy && m.pair.source.to_string().starts_with('n')));

        assert!(mix_corpora(noisy[..3].to_vec(), clean, &all, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn adapt_corpus_matches_explicit_mix() {
        let clean: Vec<_> = (0..40)
            .map(|i| ParallelPair::new(numbered(8 + i % 5), sent("t")).unwrap())
            .collect();
        let spec = AdaptSpec {
            seed: 21,
            mix_noisy: 1,
            mix_clean: 3,
            ..Default::default()
        };
        let noisy: Vec<_> = clean
            .iter()
            .enumerate()
            .map(|(i, p)| adapt_source(p, &spec, &mut Rng::for_stream(spec.seed, i as u64)).pair)
            .collect();
        let explicit = mix_corpora(
            noisy,
            clean.clone(),
            &spec,
            &mut Rng::for_stream(spec.seed, CORPUS_STREAM),
        )
        .unwrap();
        assert_eq!(adapt_corpus(clean, &spec).unwrap(), explicit);
    }

    #[test]
    fn spec_validation() {
        assert!(NoiseSpec {
            mask_rate: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(NoiseSpec {
            poisson_lambda: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AdaptSpec {
            mix_noisy: 0,
            mix_clean: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}

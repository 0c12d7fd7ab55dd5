mod common;

use common::{random_words, sentence_of};
use noisemt_core::hup::{evaluate, evaluate_with, judge, Denominator, HupCase, HupTally, HupThresholds};
use noisemt_core::{Rng, Sentence};

/// Mutates `base` by replacing each token with a foreign one with probability `p`.
fn corrupt(rng: &mut Rng, base: &[String], p: f64, foreign: &str) -> Vec<String> {
    base.iter()
        .map(|w| {
            if rng.unit() < p {
                format!("{foreign}{}", rng.below(50))
            } else {
                w.clone()
            }
        })
        .collect()
}

fn labeled_cases(seed: u64, n: usize) -> Vec<HupCase> {
    let mut rng = Rng::new(seed);
    (0..n)
        .map(|_| {
            let len = 3 + rng.below(15);
            let reference = random_words(&mut rng, "r", 40, len);
            let (pc, pp) = (rng.unit(), rng.unit());
            let clean = corrupt(&mut rng, &reference, pc, "c");
            let pert = corrupt(&mut rng, &clean, pp, "p");
            HupCase::new(sentence_of(&reference), sentence_of(&clean), sentence_of(&pert)).unwrap()
        })
        .collect()
}

#[test]
fn verdicts_match_oracle_labels() {
    let cases = labeled_cases(200, 200);
    let th = HupThresholds::default();
    let mut positives = 0;
    let mut eligible = 0;
    for c in &cases {
        let rc = common::sentence_bleu(&c.trans_clean, &c.reference);
        let pc = common::sentence_bleu(&c.trans_perturbed, &c.trans_clean);
        let want = rc > 5.0 && pc < 3.0;
        let v = judge(c, th);
        assert!((v.bleu_ref_clean - rc).abs() < 1e-9);
        assert!((v.bleu_pert_clean - pc).abs() < 1e-9);
        assert_eq!(v.is_hallucination, want, "{c:?}");
        positives += usize::from(want);
        eligible += usize::from(rc > 5.0);
    }
    // the generator must exercise both labels
    assert!((10..=190).contains(&positives), "{positives}");
    let r = evaluate(&cases, th, Denominator::All).unwrap();
    assert_eq!(r.n_hallucinated, positives);
    assert_eq!(r.n_eligible, eligible);
    assert!((r.hup_score - 100.0 * positives as f64 / 200.0).abs() < 1e-12);
}

#[test]
fn constructed_ten_percent_set() {
    let mut rng = Rng::new(201);
    let cases: Vec<HupCase> = (0..100)
        .map(|i| {
            let reference = random_words(&mut rng, "w", 30, 12);
            let pert = if i % 10 == 0 {
                random_words(&mut rng, "z", 30, 12)
            } else {
                reference.clone()
            };
            HupCase::new(sentence_of(&reference), sentence_of(&reference), sentence_of(&pert)).unwrap()
        })
        .collect();
    let r = evaluate(&cases, HupThresholds::default(), Denominator::All).unwrap();
    assert_eq!(r.hup_score, 10.0);
    assert_eq!(r.n_eligible, 100);
    let e = evaluate(&cases, HupThresholds::default(), Denominator::Eligible).unwrap();
    assert_eq!(e.hup_score, 10.0);
}

#[test]
fn report_is_order_invariant_and_mergeable() {
    let cases = labeled_cases(202, 150);
    let th = HupThresholds::default();
    let base = evaluate(&cases, th, Denominator::All).unwrap();
    let mut idx: Vec<usize> = (0..cases.len()).collect();
    Rng::new(3).shuffle(&mut idx);
    let shuffled: Vec<HupCase> = idx.iter().map(|&i| cases[i].clone()).collect();
    let again = evaluate(&shuffled, th, Denominator::All).unwrap();
    assert_eq!(base.n_hallucinated, again.n_hallucinated);
    assert!((base.bleu_clean - again.bleu_clean).abs() < 1e-9);

    let mut left = HupTally::default();
    let mut right = HupTally::default();
    for (i, c) in cases.iter().enumerate() {
        let v = judge(c, th);
        if i < 70 {
            left.push(c, &v)
        } else {
            right.push(c, &v)
        }
    }
    assert_eq!(left.merge(right).report(th, Denominator::All).unwrap(), base);
}

#[test]
fn score_is_monotone_in_thresholds() {
    let cases = labeled_cases(203, 200);
    let mut prev = f64::INFINITY;
    for adequacy in [0.0, 5.0, 20.0, 50.0, 90.0] {
        let s = evaluate(
            &cases,
            HupThresholds {
                adequacy,
                collapse: 3.0,
            },
            Denominator::All,
        )
        .unwrap()
        .hup_score;
        assert!(s <= prev);
        prev = s;
    }
    let mut prev = -1.0;
    for collapse in [0.0, 3.0, 10.0, 40.0, 101.0] {
        let s = evaluate(
            &cases,
            HupThresholds {
                adequacy: 5.0,
                collapse,
            },
            Denominator::All,
        )
        .unwrap()
        .hup_score;
        assert!(s >= prev);
        prev = s;
    }
}

#[test]
fn per_case_callback_sees_every_case_in_order() {
    let cases = labeled_cases(204, 30);
    let mut seen = vec![];
    evaluate_with(&cases, HupThresholds::default(), Denominator::All, |i, c, _| {
        seen.push((i, c.reference.clone()))
    })
    .unwrap();
    let want: Vec<(usize, Sentence)> = cases.iter().map(|c| c.reference.clone()).enumerate().collect();
    assert_eq!(seen, want);
}

#[test]
fn empty_input_is_an_error() {
    assert!(evaluate(&[], HupThresholds::default(), Denominator::All).is_err());
}

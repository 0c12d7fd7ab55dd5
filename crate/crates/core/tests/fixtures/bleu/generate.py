"""Regenerates the BLEU parity fixture.

Writes 200 hypotheses and two reference sets over a small vocabulary, then
records sacrebleu's corpus scores (whitespace tokenization, no smoothing,
no lowercasing) in expected.json.

    pip install sacrebleu==2.6.0
    python generate.py
"""
import json
import random

import sacrebleu

rng = random.Random(20240501)
vocab = [f"w{i}" for i in range(60)]


def edit(tokens):
    out = []
    for t in tokens:
        r = rng.random()
        if r < 0.12:
            continue
        if r < 0.25:
            out.append(rng.choice(vocab))
        else:
            out.append(t)
        if rng.random() < 0.05:
            out.append(rng.choice(vocab))
    return out or [rng.choice(vocab)]


hyps, ref0, ref1 = [], [], []
for _ in range(200):
    base = [rng.choice(vocab) for _ in range(rng.randint(3, 30))]
    ref0.append(base)
    ref1.append(edit(base))
    hyps.append(edit(base))


def dump(name, rows):
    with open(name, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(" ".join(r) + "\n")


dump("hyp.txt", hyps)
dump("ref0.txt", ref0)
dump("ref1.txt", ref1)

H = [" ".join(h) for h in hyps]
R0 = [" ".join(r) for r in ref0]
R1 = [" ".join(r) for r in ref1]


def score(refs):
    b = sacrebleu.corpus_bleu(H, refs, tokenize="none", smooth_method="none", force=True)
    return {
        "score": b.score,
        "precisions": b.precisions,
        "bp": b.bp,
        "sys_len": b.sys_len,
        "ref_len": b.ref_len,
        "counts": b.counts,
        "totals": b.totals,
    }


expected = {
    "scorer": f"sacrebleu {sacrebleu.__version__}",
    "single_ref": score([R0]),
    "multi_ref": score([R0, R1]),
}
with open("expected.json", "w") as f:
    json.dump(expected, f, indent=2)
    f.write("\n")

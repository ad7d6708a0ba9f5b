#!/usr/bin/env python3
"""Regenerates tests/data/rouge_frozen.json from rouge_score and NLTK.

The C++ tests compare against the frozen file, so Python is only needed
when the case list changes.
"""
import json
import random
import sys
from pathlib import Path

from nltk.stem import porter
from rouge_score import rouge_scorer, tokenize

WORDS = [
    "caresses", "ponies", "ties", "caress", "cats", "feed", "agreed", "plastered", "bled",
    "motoring", "sing", "conflated", "troubled", "sized", "hopping", "tanned", "falling",
    "hissing", "fizzed", "failing", "filing", "happy", "sky", "relational", "conditional",
    "rational", "valenci", "hesitanci", "digitizer", "conformabli", "radicalli", "differentli",
    "vileli", "analogousli", "vietnamization", "predication", "operator", "feudalism",
    "decisiveness", "hopefulness", "callousness", "formaliti", "sensitiviti", "sensibiliti",
    "triplicate", "formative", "formalize", "electriciti", "electrical", "hopeful", "goodness",
    "revival", "allowance", "inference", "airliner", "gyroscopic", "adjustable", "defensible",
    "irritant", "replacement", "adjustment", "dependent", "adoption", "homologou", "communism",
    "activate", "angulariti", "homologous", "effective", "bowdlerize", "probate", "rate",
    "cease", "controll", "roll", "generalization", "generalizations", "oscillators", "dying",
    "lying", "flies", "flying", "reviewers", "reviewer", "recommend", "recommendation",
    "rejection", "accepted", "acceptance", "experiments", "experimental", "novelty", "novel",
    "clarity", "baselines", "baseline", "paper", "papers", "rebuttal", "authors", "concerns",
    "addressed", "meta", "reviews", "summarization", "controllable", "structure", "sentences",
    "mice", "news", "ours", "this", "was", "has", "analysis", "crisis", "skies", "innings",
    "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed", "generous",
    "generously", "fluently", "bleed", "really", "only", "ugly", "early", "sensational",
    "traditional", "reference", "references", "conference", "workshop", "resubmission",
]

EXTRA_TEXTS = [
    ("The paper proposes a novel method; reviewers agree it is well-written.",
     "Reviewers agree the paper is well written and novel."),
    ("I recommend rejection.", "I recommend acceptance."),
    ("R1 rating score: 6, R2 rating score: 3.", "rating score 6 and 3"),
    ("", "non empty reference"),
    ("non empty candidate", ""),
    ("!!! ???", "..."),
    ("The the the the", "the"),
    ("Experiments on ImageNet-1k show 2.5% gains over BERT-base.",
     "The experiments show gains over the BERT base model on imagenet 1k."),
    ("AC DISAGREEMENT: the AC disagrees with R3.", "the ac disagrees with reviewer three"),
    ("Generalization generalizations generalized generalize", "generalizing general generally"),
]


def main(out: Path) -> None:
    rnd = random.Random(0)
    stemmer = porter.PorterStemmer("NLTK_EXTENSIONS")
    scorer = rouge_scorer.RougeScorer(["rouge1", "rouge2", "rougeL"], use_stemmer=True)
    pairs = list(EXTRA_TEXTS)
    for _ in range(60):
        a = " ".join(rnd.choice(WORDS[:40] + WORDS[-60:]) for _ in range(rnd.randint(1, 14)))
        b = " ".join(rnd.choice(WORDS[:40] + WORDS[-60:]) for _ in range(rnd.randint(1, 14)))
        pairs.append((a, b))
    cases = []
    for cand, ref in pairs:
        s = scorer.score(ref, cand)
        cases.append({
            "candidate": cand,
            "reference": ref,
            "candidate_tokens": tokenize.tokenize(cand, stemmer),
            "scores": {k: [v.precision, v.recall, v.fmeasure] for k, v in s.items()},
        })
    stems = {w: stemmer.stem(w) for w in WORDS}
    out.write_text(json.dumps({"stems": stems, "cases": cases}, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "tests/data/rouge_frozen.json")

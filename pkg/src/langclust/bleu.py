"""Tokenized, case-sensitive corpus BLEU with the classic multi-reference
script semantics: per-sentence clipped n-gram counts aggregated at corpus
level, geometric mean of p1..p4, multiplicative brevity penalty."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

MAX_ORDER = 4


@dataclass
class BleuReport:
    bleu: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    @property
    def ratio(self) -> float:
        return self.hyp_len / self.ref_len if self.ref_len else 0.0

    def summary_line(self) -> str:
        p = "/".join(f"{100.0 * v:.1f}" for v in self.precisions)
        return (f"BLEU = {self.bleu:.2f}, {p} "
                f"(BP={self.brevity_penalty:.3f}, ratio={self.ratio:.3f}, "
                f"hyp_len={self.hyp_len}, ref_len={self.ref_len})")

    def to_json(self) -> str:
        return json.dumps({"bleu": self.bleu, "precisions": list(self.precisions),
                           "brevity_penalty": self.brevity_penalty,
                           "hyp_len": self.hyp_len, "ref_len": self.ref_len})

    @classmethod
    def from_dict(cls, obj) -> "BleuReport":
        return cls(obj["bleu"], tuple(obj["precisions"]), obj["brevity_penalty"],
                   obj["hyp_len"], obj["ref_len"])


def _ngrams(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hypotheses, references) -> BleuReport:
    """Corpus BLEU over parallel lists of token sequences (one reference each).

    Tokens are compared as-is (case preserved). If any n-gram precision is
    zero the score is zero; no smoothing is applied.
    """
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = list(hyp)
        ref = list(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_counts = _ngrams(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngrams(ref, n)
            totals[n - 1] += sum(hyp_counts.values())
            for gram, count in hyp_counts.items():
                matches[n - 1] += min(count, ref_counts.get(gram, 0))

    precisions = tuple(m / t if t > 0 else 0.0 for m, t in zip(matches, totals))
    if hyp_len == 0:
        return BleuReport(0.0, precisions, 0.0, hyp_len, ref_len)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    if min(precisions) == 0.0:
        bleu = 0.0
    else:
        bleu = bp * math.exp(sum(math.log(p) for p in precisions) / MAX_ORDER) * 100.0
    return BleuReport(bleu, precisions, bp, hyp_len, ref_len)

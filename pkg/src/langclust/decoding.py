"""Beam search with the GNMT-style length penalty, plus plain greedy decoding.

Hypotheses are ranked by score = log P(y|x) / lp(|y|) with
lp(n) = ((5 + n) / 6) ** alpha, where |y| counts every generated token
including the end-of-sequence token. Expansions compete for beam slots with
EOS included, so a hypothesis whose best continuation is EOS leaves the
beam as finished; with beam_size=1 this reproduces greedy argmax decoding
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class BeamConfig:
    beam_size: int = 6
    alpha: float = 1.1
    max_decode_len: int = 48

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.max_decode_len < 1:
            raise ValueError("max_decode_len must be >= 1")


def length_penalty(n: int, alpha: float) -> float:
    return ((5.0 + n) / 6.0) ** alpha


def greedy_core(step_logprobs, bos_id: int, eos_id: int, max_len: int) -> list[int]:
    """Argmax decoding; returns content ids without BOS/EOS."""
    seq = [bos_id]
    for _ in range(max_len):
        lp = step_logprobs(np.array([seq]))[0]
        nxt = int(lp.argmax())
        if nxt == eos_id:
            break
        seq.append(nxt)
    return seq[1:]


def beam_search_core(step_logprobs, bos_id: int, eos_id: int, cfg: BeamConfig) -> list[int]:
    """Best-scoring hypothesis under the length-penalized log-probability.

    ``step_logprobs(prefixes)`` maps an [n, t] int array of BOS-prefixed
    sequences to [n, V] next-token log-probabilities. The top ``beam_size``
    expansions survive each step; those ending in EOS (or hitting the length
    budget) are finished, the rest stay live. Early stopping only fires when
    no live beam could still beat the best finished score, so a beam wide
    enough to hold every prefix makes the search exhaustive.
    """
    live_seqs = [[bos_id]]
    live_logp = np.zeros(1)
    finished: list[tuple[float, tuple[int, ...]]] = []

    for step in range(1, cfg.max_decode_len + 1):
        logp = step_logprobs(np.array(live_seqs, dtype=np.int64))
        total = live_logp[:, None] + logp
        order = np.argsort(-total, axis=None, kind="stable")[: cfg.beam_size]
        lp_here = length_penalty(step, cfg.alpha)

        next_seqs, next_logp = [], []
        for idx in order:
            i, w = divmod(int(idx), total.shape[1])
            if not np.isfinite(total[i, w]):
                continue
            content = tuple(live_seqs[i][1:])
            if w == eos_id:
                finished.append((total[i, w] / lp_here, content))
            elif step == cfg.max_decode_len:
                finished.append((total[i, w] / lp_here, content + (w,)))
            else:
                next_seqs.append(live_seqs[i] + [w])
                next_logp.append(total[i, w])
        finished.sort(key=lambda f: (-f[0], f[1]))
        del finished[cfg.beam_size:]

        if not next_seqs:
            break
        live_seqs = next_seqs
        live_logp = np.array(next_logp)

        if finished:
            # cumulative logp never increases and lp is monotone in n, so the
            # best reachable score divides by the largest future penalty
            best_done = max(f[0] for f in finished)
            lp_bound = max(length_penalty(step + 1, cfg.alpha),
                           length_penalty(cfg.max_decode_len, cfg.alpha))
            if live_logp.max() / lp_bound <= best_done:
                break

    if not finished:
        return live_seqs[0][1:]
    finished.sort(key=lambda f: (-f[0], f[1]))
    return list(finished[0][1])

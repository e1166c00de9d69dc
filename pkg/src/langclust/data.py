"""Corpus ingestion, per-language up-sampling, and token-budget batching.

Corpus files are UTF-8, one pair per line, "source<TAB>target", both sides
pre-tokenized with spaces. A manifest file lists one corpus per line as
"lang_code<TAB>path<TAB>direction" with direction to_pivot or from_pivot.
Dev/test files are found from a train manifest by the naming convention
".train." -> ".dev." / ".test." in the corpus path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bpe import SubwordCodec

log = logging.getLogger(__name__)

DIRECTIONS = ("to_pivot", "from_pivot")


@dataclass
class ParallelCorpus:
    lang_code: str
    direction: str
    pairs: list[tuple[list[int], list[int]]]

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")

    def __len__(self):
        return len(self.pairs)


@dataclass
class MultilingualBatch:
    """One group of examples per language; groups share a source-token budget."""

    groups: dict[str, list[tuple[list[int], list[int]]]]
    tokens_per_lang: int

    def examples(self):
        """(lang_code, src_ids, tgt_ids) triples, languages in sorted order."""
        for code in sorted(self.groups):
            for src, tgt in self.groups[code]:
                yield code, src, tgt


def read_manifest(path) -> list[tuple[str, str, str]]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{i}: expected lang<TAB>path<TAB>direction")
            code, corpus_path, direction = parts
            if direction not in DIRECTIONS:
                raise ValueError(f"{path}:{i}: unknown direction {direction!r}")
            rows.append((code, corpus_path, direction))
    return rows


def read_corpus_text(path) -> list[tuple[str, str]]:
    """Raw (source, target) sentence strings from a corpus file."""
    pairs = []
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{i}: missing tab separator")
            src, tgt = line.split("\t", 1)
            if not src.strip() or not tgt.strip():
                raise ValueError(f"{path}:{i}: empty source or target sentence")
            pairs.append((src, tgt))
    return pairs


def load_corpus(path, lang_code: str, direction: str, codec: SubwordCodec) -> ParallelCorpus:
    """Read a corpus file and encode both sides to subword ids."""
    text_pairs = read_corpus_text(path)
    if not text_pairs:
        log.warning("corpus file %s is empty", path)
    pairs = [(codec.encode_sentence(s), codec.encode_sentence(t)) for s, t in text_pairs]
    log.info("loaded %s: %d pairs (%s, %s)", path, len(pairs), lang_code, direction)
    return ParallelCorpus(lang_code, direction, pairs)


def subsample(corpora: list[ParallelCorpus], fraction: float, seed: int) -> list[ParallelCorpus]:
    """Keep a seeded fraction of each corpus (without replacement), for the
    reduced-data clustering-stability experiments."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if fraction == 1.0:
        return list(corpora)
    out = []
    for idx, corpus in enumerate(corpora):
        rng = np.random.default_rng([seed, idx])
        keep = max(1, int(round(fraction * len(corpus.pairs))))
        chosen = sorted(rng.choice(len(corpus.pairs), size=keep, replace=False).tolist())
        out.append(ParallelCorpus(corpus.lang_code, corpus.direction,
                                  [corpus.pairs[i] for i in chosen]))
    return out


def upsample(corpora: list[ParallelCorpus], seed: int) -> list[ParallelCorpus]:
    """Resample every corpus with replacement to the largest corpus size."""
    if not corpora:
        raise ValueError("upsample needs at least one corpus")
    target = max(len(c) for c in corpora)
    out = []
    for idx, corpus in enumerate(corpora):
        if len(corpus) == target:
            out.append(corpus)
            continue
        rng = np.random.default_rng([seed, idx])
        picks = rng.integers(0, len(corpus.pairs), size=target)
        out.append(ParallelCorpus(corpus.lang_code, corpus.direction,
                                  [corpus.pairs[i] for i in picks]))
    return out


def _greedy_groups(pairs, order, budget):
    groups = []
    cur: list = []
    cur_tokens = 0
    for idx in order:
        t = len(pairs[idx][0])
        if t > budget and not cur:
            log.warning("pair with %d source tokens exceeds budget %d; kept as its own group",
                        t, budget)
            groups.append([pairs[idx]])
            continue
        if cur and cur_tokens + t > budget:
            groups.append(cur)
            cur, cur_tokens = [], 0
            if t > budget:
                log.warning("pair with %d source tokens exceeds budget %d; kept as its own group",
                            t, budget)
                groups.append([pairs[idx]])
                continue
        cur.append(pairs[idx])
        cur_tokens += t
    if cur:
        groups.append(cur)
    return groups


def _quota_groups(pairs, order, num_groups):
    """Split into exactly ``num_groups`` nonempty groups of ~equal token mass."""
    total = sum(len(pairs[i][0]) for i in order)
    groups = []
    cur: list = []
    acc = 0
    pos = 0
    for j in range(num_groups):
        target = total * (j + 1) / num_groups
        while pos < len(order):
            remaining_groups = num_groups - j - 1
            if len(order) - pos <= remaining_groups:
                break
            cur.append(pairs[order[pos]])
            acc += len(pairs[order[pos]][0])
            pos += 1
            if acc >= target:
                break
        groups.append(cur)
        cur = []
    # any leftovers join the last group
    while pos < len(order):
        groups[-1].append(pairs[order[pos]])
        pos += 1
    if any(not g for g in groups):
        raise ValueError("not enough pairs to form the requested number of groups")
    return groups


def make_batches(corpora: list[ParallelCorpus], tokens_per_lang: int, seed: int,
                 epochs: int | None = None):
    """Yield MultilingualBatch objects; every batch covers every language.

    Per epoch each language's pairs are shuffled (seeded) and greedily
    packed into groups of about ``tokens_per_lang`` source tokens; the
    language with the most groups fixes the batch count and the others are
    split into the same number of groups by token quota, so every pair
    appears exactly once per epoch per language. Requires up-sampled
    corpora (equal pair counts).
    """
    if not corpora:
        raise ValueError("make_batches needs at least one corpus")
    sizes = {len(c) for c in corpora}
    if len(sizes) != 1:
        raise ValueError("make_batches requires up-sampled corpora of equal size")
    epoch = 0
    while epochs is None or epoch < epochs:
        per_lang = {}
        for idx, corpus in enumerate(corpora):
            rng = np.random.default_rng([seed, epoch, idx])
            order = rng.permutation(len(corpus.pairs)).tolist()
            per_lang[corpus.lang_code] = (corpus, order)
        greedy = {code: _greedy_groups(c.pairs, order, tokens_per_lang)
                  for code, (c, order) in per_lang.items()}
        num_groups = max(len(g) for g in greedy.values())
        final = {}
        for code, (corpus, order) in per_lang.items():
            if len(greedy[code]) == num_groups:
                final[code] = greedy[code]
            else:
                final[code] = _quota_groups(corpus.pairs, order, num_groups)
        for i in range(num_groups):
            yield MultilingualBatch({code: final[code][i] for code in final}, tokens_per_lang)
        epoch += 1

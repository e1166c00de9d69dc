"""Joint byte-pair encoding over all languages: learn, apply, desegment.

Words are sequences of symbols; the final symbol of every word carries the
end-of-word marker so merges never cross word boundaries and desegmentation
can restore the original spacing. Merges are learned from word frequencies
pooled across every corpus, so training on two corpora separately
concatenated or together yields the same table.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

WORD_END = "</w>"

RESERVED = ("<pad>", "<s>", "</s>", "<unk>")
PAD, BOS, EOS, UNK = range(4)


@dataclass
class MergeTable:
    """Ordered BPE merges; each (left, right) pair creates symbol left+right."""

    merges: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.merges)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for left, right in self.merges:
                f.write(f"{left} {right}\n")

    @classmethod
    def load(cls, path) -> "MergeTable":
        merges = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                left, right = line.split(" ")
                merges.append((left, right))
        return cls(merges)


def _word_symbols(word: str) -> tuple[str, ...]:
    chars = list(word)
    chars[-1] = chars[-1] + WORD_END
    return tuple(chars)


def _merge_symbols(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    left, right = pair
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i < n - 1 and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def learn_bpe(corpora, num_merges: int) -> MergeTable:
    """Learn up to ``num_merges`` merges from pooled word frequencies.

    ``corpora`` is an iterable of corpora, each an iterable of
    whitespace-tokenized sentences (strings). At every step the most
    frequent adjacent symbol pair wins; ties go to the lexicographically
    smallest (left, right) pair so the table is reproducible.
    """
    if num_merges < 1:
        raise ValueError("num_merges must be positive")
    word_freqs: Counter = Counter()
    for corpus in corpora:
        for sentence in corpus:
            word_freqs.update(sentence.split())
    if not word_freqs:
        raise ValueError("cannot learn BPE from empty corpora")

    words = {w: _word_symbols(w) for w in word_freqs}
    merges: list[tuple[str, str]] = []
    for _ in range(num_merges):
        pair_counts: Counter = Counter()
        for w, symbols in words.items():
            freq = word_freqs[w]
            for i in range(len(symbols) - 1):
                pair_counts[(symbols[i], symbols[i + 1])] += freq
        if not pair_counts:
            break
        best_count = max(pair_counts.values())
        best = min(p for p, c in pair_counts.items() if c == best_count)
        merges.append(best)
        words = {w: _merge_symbols(s, best) if best[0] in s else s
                 for w, s in words.items()}
    return MergeTable(merges)


def apply_bpe(word: str, merges: MergeTable) -> list[str]:
    """Segment one word by replaying the merge table in learned order."""
    if not word:
        raise ValueError("cannot segment an empty word")
    symbols = _word_symbols(word)
    for pair in merges.merges:
        if len(symbols) == 1:
            break
        if pair[0] in symbols:
            symbols = _merge_symbols(symbols, pair)
    return list(symbols)


def desegment(symbols) -> str:
    """Rejoin subword symbols into space-separated words (inverse of apply_bpe)."""
    words = []
    buf: list[str] = []
    for s in symbols:
        if s.endswith(WORD_END):
            buf.append(s[: -len(WORD_END)])
            words.append("".join(buf))
            buf = []
        else:
            buf.append(s)
    if buf:
        words.append("".join(buf))
    return " ".join(words)


class Vocabulary:
    """Bijection symbol <-> id; reserved ids, then language tags, then subwords."""

    def __init__(self, subword_symbols, lang_codes):
        self.lang_codes = sorted(lang_codes)
        tags = [f"<{c}>" for c in self.lang_codes]
        self._symbols = list(RESERVED) + tags + list(subword_symbols)
        self._ids = {}
        for i, s in enumerate(self._symbols):
            if s in self._ids:
                raise ValueError(f"duplicate symbol in vocabulary: {s!r}")
            self._ids[s] = i

    def __len__(self):
        return len(self._symbols)

    @property
    def pad_id(self):
        return PAD

    @property
    def bos_id(self):
        return BOS

    @property
    def eos_id(self):
        return EOS

    @property
    def unk_id(self):
        return UNK

    def id_of(self, symbol: str) -> int:
        return self._ids.get(symbol, UNK)

    def symbol_of(self, idx: int) -> str:
        return self._symbols[idx]

    def lang_tag_id(self, code: str) -> int:
        tag = f"<{code}>"
        if tag not in self._ids or code not in self.lang_codes:
            raise KeyError(f"language {code!r} not registered in vocabulary")
        return self._ids[tag]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for i, s in enumerate(self._symbols):
                f.write(f"{s}\t{i}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        symbols = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                sym, idx = line.rstrip("\n").split("\t")
                if int(idx) != len(symbols):
                    raise ValueError(f"vocabulary file has non-contiguous ids at {sym!r}")
                symbols.append(sym)
        if tuple(symbols[:4]) != RESERVED:
            raise ValueError("vocabulary file does not start with the reserved symbols")
        langs = []
        rest = 4
        for s in symbols[4:]:
            if s.startswith("<") and s.endswith(">") and 2 <= len(s) - 2 <= 3 and s[1:-1].isalnum():
                langs.append(s[1:-1])
                rest += 1
            else:
                break
        vocab = cls.__new__(cls)
        vocab.lang_codes = langs
        vocab._symbols = symbols
        vocab._ids = {s: i for i, s in enumerate(symbols)}
        return vocab


def build_vocabulary(merges: MergeTable, corpora, lang_codes) -> Vocabulary:
    """Collect every subword symbol produced by segmenting ``corpora``."""
    seen: set[str] = set()
    cache: dict[str, list[str]] = {}
    for corpus in corpora:
        for sentence in corpus:
            for word in sentence.split():
                syms = cache.get(word)
                if syms is None:
                    syms = apply_bpe(word, merges)
                    cache[word] = syms
                seen.update(syms)
    return Vocabulary(sorted(seen), lang_codes)


class SubwordCodec:
    """MergeTable + Vocabulary bundled for sentence-level encode/decode."""

    def __init__(self, merges: MergeTable, vocab: Vocabulary):
        self.merges = merges
        self.vocab = vocab
        self._word_cache: dict[str, list[int]] = {}

    def encode_word(self, word: str) -> list[int]:
        ids = self._word_cache.get(word)
        if ids is None:
            ids = [self.vocab.id_of(s) for s in apply_bpe(word, self.merges)]
            self._word_cache[word] = ids
        return ids

    def encode_sentence(self, sentence: str) -> list[int]:
        ids: list[int] = []
        for word in sentence.split():
            ids.extend(self.encode_word(word))
        return ids

    def decode_ids(self, ids) -> str:
        symbols = [self.vocab.symbol_of(i) for i in ids if i >= 4 + len(self.vocab.lang_codes)]
        return desegment(symbols)

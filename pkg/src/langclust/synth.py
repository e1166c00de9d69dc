"""Synthetic 6-language translation harness with a planted 3-family partition.

A seeded probabilistic grammar generates a pivot corpus (about 200 word
types, sentences of 3-12 tokens). Six synthetic languages derive from it in
three families of two dialects each:

  family A ("aa", "ab"): vocabulary-permutation dialects: plain word-for-word
      substitution over a private form set, the two dialects' lexica being
      permutations of each other. They agree on 80% of the mapping; the
      divergent 20% (content words only) is a cycle within the same form
      set, so those surface forms mean different things in the two dialects
      and only the language tag can disambiguate.
  family B ("ba", "bb"): fresh word forms disjoint from every other family,
      plus whole-sentence word-order reversal; dialects agree on 80% of the
      mapping, the divergent images again permuted within the form set.
  family C ("ca", "cb"): token-splitting morphology over fresh stems; half
      the vocabulary (a fixed per-word rule) maps to stem + suffix particle,
      the rest to a bare stem. Dialects share the rule and 80% of the stem
      assignment.

Within a family the dialects therefore share at least 80% of their surface
vocabulary by construction; across families (and against the pivot) the
vocabularies are disjoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cluster import ClusterAssignment, TaxonomyTable

PIVOT_CODE = "en"
FAMILY_OF = {"aa": "FamilyA", "ab": "FamilyA",
             "ba": "FamilyB", "bb": "FamilyB",
             "ca": "FamilyC", "cb": "FamilyC"}
LANG_CODES = sorted(FAMILY_OF)

_CONSONANTS = "bdfghjklmnprstvz"
_VOWELS = "aeiou"

_POS_SIZES = {"det": 4, "pron": 8, "prep": 10, "conj": 3, "adv": 20,
              "adj": 30, "verb": 45, "noun": 80}
_NUM_SUFFIXES = 8
_SHARED_FRACTION = 0.8


def _make_words(rng: np.random.Generator, count: int, taken: set[str],
                syllables=(2, 3)) -> list[str]:
    words = []
    while len(words) < count:
        n = int(rng.integers(syllables[0], syllables[1] + 1))
        w = "".join(_CONSONANTS[rng.integers(len(_CONSONANTS))]
                    + _VOWELS[rng.integers(len(_VOWELS))] for _ in range(n))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


class _Grammar:
    def __init__(self, rng: np.random.Generator, taken: set[str]):
        self.pos = {name: _make_words(rng, size, taken)
                    for name, size in _POS_SIZES.items()}
        self.vocab = [w for words in self.pos.values() for w in words]

    def _pick(self, rng, pos):
        words = self.pos[pos]
        return words[rng.integers(len(words))]

    def _noun_phrase(self, rng):
        if rng.random() < 0.2:
            return [self._pick(rng, "pron")]
        out = [self._pick(rng, "det")]
        if rng.random() < 0.45:
            out.append(self._pick(rng, "adj"))
        out.append(self._pick(rng, "noun"))
        return out

    def _clause(self, rng):
        out = self._noun_phrase(rng)
        out.append(self._pick(rng, "verb"))
        if rng.random() < 0.8:
            out.extend(self._noun_phrase(rng))
        if rng.random() < 0.3:
            out.append(self._pick(rng, "prep"))
            out.extend(self._noun_phrase(rng))
        if rng.random() < 0.25:
            out.append(self._pick(rng, "adv"))
        return out

    def sentence(self, rng, min_len=3, max_len=12):
        for _ in range(50):
            out = self._clause(rng)
            if rng.random() < 0.15:
                out = out + [self._pick(rng, "conj")] + self._clause(rng)
            if min_len <= len(out) <= max_len:
                return out
        return out[:max_len]


def _cycle_mapping(mapping: dict, keys: list) -> dict:
    """Reassign the images of ``keys`` cyclically (k_i gets k_{i+1}'s image)."""
    out = dict(mapping)
    images = [mapping[k] for k in keys]
    for i, k in enumerate(keys):
        out[k] = images[(i + 1) % len(keys)]
    return out


@dataclass
class SyntheticHarness:
    seed: int
    pivot_sentences: list[list[str]]
    translations: dict[str, list[list[str]]]
    lexicons: dict[str, set[str]]
    planted: ClusterAssignment
    splits: dict[str, list[int]]

    @property
    def lang_codes(self):
        return LANG_CODES

    def taxonomy(self) -> TaxonomyTable:
        return TaxonomyTable(dict(FAMILY_OF))

    def pairs(self, code: str, split: str, direction: str = "to_pivot"):
        """(source, target) sentence-string pairs for one language and split."""
        out = []
        for i in self.splits[split]:
            lang = " ".join(self.translations[code][i])
            pivot = " ".join(self.pivot_sentences[i])
            out.append((lang, pivot) if direction == "to_pivot" else (pivot, lang))
        return out

    def write(self, out_dir) -> dict:
        """Write corpora, manifests, taxonomy, and the planted partition."""
        out_dir = Path(out_dir)
        corpora = out_dir / "corpora"
        corpora.mkdir(parents=True, exist_ok=True)
        manifests = {}
        for direction, tag in (("to_pivot", "many_to_one"), ("from_pivot", "one_to_many")):
            for split in ("train", "dev", "test"):
                rows = []
                for code in LANG_CODES:
                    if direction == "to_pivot":
                        name = f"{code}-{PIVOT_CODE}.{split}.tsv"
                    else:
                        name = f"{PIVOT_CODE}-{code}.{split}.tsv"
                    path = corpora / name
                    with open(path, "w", encoding="utf-8") as f:
                        for src, tgt in self.pairs(code, split, direction):
                            f.write(f"{src}\t{tgt}\n")
                    rows.append(f"{code}\t{path}\t{direction}")
                mpath = out_dir / f"manifest.{tag}.{split}.tsv"
                with open(mpath, "w", encoding="utf-8") as f:
                    f.write("\n".join(rows) + "\n")
                manifests[(tag, split)] = str(mpath)
        self.taxonomy().save(out_dir / "taxonomy.tsv")
        with open(out_dir / "planted.json", "w", encoding="utf-8") as f:
            f.write(self.planted.to_json() + "\n")
        return manifests


def build_synthetic_harness(seed: int, num_sentences: int = 3000) -> SyntheticHarness:
    """Generate the corpus, the six languages, and the planted partition."""
    rng = np.random.default_rng([seed, 2024])
    taken: set[str] = set()
    grammar = _Grammar(rng, taken)
    vocab = grammar.vocab

    seen = set()
    sentences = []
    attempts = 0
    while len(sentences) < num_sentences and attempts < num_sentences * 40:
        attempts += 1
        s = grammar.sentence(rng)
        key = tuple(s)
        if key in seen:
            continue
        seen.add(key)
        sentences.append(s)

    n_div = int(round((1.0 - _SHARED_FRACTION) * len(vocab)))
    # dialects diverge on content words only: function words are the
    # high-frequency backbone both dialects share, which keeps dialect
    # embeddings close while still disagreeing on 20% of the vocabulary
    content = [w for pos in ("adj", "noun", "verb", "adv") for w in grammar.pos[pos]]

    def divergent_keys():
        idx = rng.choice(len(content), size=n_div, replace=False)
        return [content[i] for i in sorted(idx.tolist())]

    # family A: word-for-word substitution; dialect lexica are permutations
    # of each other over a private form set
    forms_a = _make_words(rng, len(vocab), taken)
    map_aa = dict(zip(vocab, forms_a))
    map_ab = _cycle_mapping(map_aa, divergent_keys())

    # family B: fresh forms + word-order reversal
    forms_b = _make_words(rng, len(vocab), taken)
    map_ba = dict(zip(vocab, forms_b))
    map_bb = _cycle_mapping(map_ba, divergent_keys())

    # family C: fresh stems, half the words split into stem + suffix particle
    stems = _make_words(rng, len(vocab), taken)
    suffixes = _make_words(rng, _NUM_SUFFIXES, taken, syllables=(1, 1))
    stem_ca = dict(zip(vocab, stems))
    stem_cb = _cycle_mapping(stem_ca, divergent_keys())
    split_flag = {w: bool(rng.random() < 0.5) for w in vocab}
    suffix_of = {w: suffixes[int(rng.integers(_NUM_SUFFIXES))] for w in vocab}

    def render_a(tokens, mapping):
        return [mapping[t] for t in tokens]

    def render_b(tokens, mapping):
        return [mapping[t] for t in tokens][::-1]

    def render_c(tokens, stem_map):
        out = []
        for t in tokens:
            out.append(stem_map[t])
            if split_flag[t]:
                out.append(suffix_of[t])
        return out

    translations = {
        "aa": [render_a(s, map_aa) for s in sentences],
        "ab": [render_a(s, map_ab) for s in sentences],
        "ba": [render_b(s, map_ba) for s in sentences],
        "bb": [render_b(s, map_bb) for s in sentences],
        "ca": [render_c(s, stem_ca) for s in sentences],
        "cb": [render_c(s, stem_cb) for s in sentences],
    }
    lexicons = {code: {w for sent in sents for w in sent}
                for code, sents in translations.items()}

    order = rng.permutation(len(sentences)).tolist()
    n_dev = max(1, len(sentences) // 20)
    splits = {
        "dev": sorted(order[:n_dev]),
        "test": sorted(order[n_dev: 2 * n_dev]),
        "train": sorted(order[2 * n_dev:]),
    }

    family_index = {"FamilyA": 0, "FamilyB": 1, "FamilyC": 2}
    planted = ClusterAssignment(
        3, {code: family_index[FAMILY_OF[code]] for code in LANG_CODES}, "family")
    return SyntheticHarness(seed, sentences, translations, lexicons, planted, splits)


def type_overlap(a: set[str], b: set[str]) -> float:
    """Jaccard overlap of two vocabularies."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def load_planted(path) -> ClusterAssignment:
    with open(path, encoding="utf-8") as f:
        return ClusterAssignment.from_json(f.read())

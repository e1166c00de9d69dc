"""BPE learning/applying/desegmenting, vocabulary files, and the codec."""

from collections import Counter

import numpy as np
import pytest

from langclust.bpe import (MergeTable, SubwordCodec, Vocabulary, WORD_END, apply_bpe,
                           build_vocabulary, desegment, learn_bpe)

TOY = ["low"] * 5 + ["lower"] * 2 + ["newest"] * 6 + ["widest"] * 3


def toy_corpus():
    return [[" ".join(TOY)]]


def brute_force_pair_counts(word_freqs, segmentations):
    counts = Counter()
    for word, freq in word_freqs.items():
        syms = segmentations[word]
        for i in range(len(syms) - 1):
            counts[(syms[i], syms[i + 1])] += freq
    return counts


def test_single_letter_corpus_no_merges():
    table = learn_bpe([["a a a"]], 10)
    assert table.merges == []


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        learn_bpe([[]], 10)
    with pytest.raises(ValueError):
        learn_bpe([[""]], 10)


def test_first_merge_is_most_frequent_pair():
    # brute-force adjacent-pair count over the pooled word frequencies
    word_freqs = Counter(TOY)
    seg = {w: tuple(list(w[:-1]) + [w[-1] + WORD_END]) for w in word_freqs}
    counts = brute_force_pair_counts(word_freqs, seg)
    best_count = max(counts.values())
    best = min(p for p, c in counts.items() if c == best_count)
    table = learn_bpe(toy_corpus(), 1)
    assert table.merges[0] == best


def test_full_replay_matches_recorded_choices():
    # replaying merges in order reproduces each step's most frequent pair
    table = learn_bpe(toy_corpus(), 8)
    word_freqs = Counter(TOY)
    seg = {w: tuple(list(w[:-1]) + [w[-1] + WORD_END]) for w in word_freqs}
    for merge in table.merges:
        counts = brute_force_pair_counts(word_freqs, seg)
        best_count = max(counts.values())
        assert merge == min(p for p, c in counts.items() if c == best_count)
        new_seg = {}
        for w, syms in seg.items():
            out = []
            i = 0
            while i < len(syms):
                if i < len(syms) - 1 and (syms[i], syms[i + 1]) == merge:
                    out.append(syms[i] + syms[i + 1])
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            new_seg[w] = tuple(out)
        seg = new_seg


def test_pooled_counting_equals_concatenation():
    c1 = ["low low lower", "newest widest"]
    c2 = ["newest newest newest", "low wide wide"]
    separate = learn_bpe([c1, c2], 20)
    pooled = learn_bpe([c1 + c2], 20)
    assert separate.merges == pooled.merges


def test_merge_prefix_monotonicity():
    small = learn_bpe(toy_corpus(), 3)
    large = learn_bpe(toy_corpus(), 12)
    assert large.merges[: len(small.merges)] == small.merges


def test_apply_single_char():
    table = MergeTable([])
    assert apply_bpe("x", table) == ["x" + WORD_END]


def test_apply_empty_word_rejected():
    with pytest.raises(ValueError):
        apply_bpe("", MergeTable([]))


def test_apply_matches_manual_replay():
    table = learn_bpe(toy_corpus(), 6)
    for word in ("newest", "lowest", "low"):
        syms = tuple(list(word[:-1]) + [word[-1] + WORD_END])
        for left, right in table.merges:
            out = []
            i = 0
            while i < len(syms):
                if i < len(syms) - 1 and syms[i] == left and syms[i + 1] == right:
                    out.append(left + right)
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            syms = tuple(out)
        assert apply_bpe(word, table) == list(syms)


def test_roundtrip_random_words():
    rng = np.random.default_rng(0)
    letters = "abcdefgh"
    words = ["".join(rng.choice(list(letters), size=rng.integers(1, 12)))
             for _ in range(1000)]
    table = learn_bpe([[" ".join(words)]], 200)
    for w in words:
        assert desegment(apply_bpe(w, table)) == w


def test_desegment_empty():
    assert desegment([]) == ""


def test_desegment_multi_word():
    table = learn_bpe(toy_corpus(), 6)
    sentence = "newest low widest lower"
    syms = []
    for w in sentence.split():
        syms.extend(apply_bpe(w, table))
    assert desegment(syms) == sentence


def test_unseen_characters_pass_through():
    table = learn_bpe(toy_corpus(), 6)
    assert desegment(apply_bpe("zq", table)) == "zq"


def test_determinism():
    a = learn_bpe(toy_corpus(), 10).merges
    b = learn_bpe(toy_corpus(), 10).merges
    assert a == b


def test_merge_table_file_roundtrip(tmp_path):
    table = learn_bpe(toy_corpus(), 8)
    path = tmp_path / "bpe.merges"
    table.save(path)
    loaded = MergeTable.load(path)
    assert loaded.merges == table.merges
    text = path.read_text(encoding="utf-8").splitlines()
    assert all(len(line.split(" ")) == 2 for line in text)


class TestVocabulary:
    def test_reserved_ids_lowest(self):
        vocab = Vocabulary(["aa", "bb"], ["de", "ar"])
        assert vocab.pad_id == 0 and vocab.bos_id == 1
        assert vocab.eos_id == 2 and vocab.unk_id == 3
        assert vocab.id_of("<ar>") == 4
        assert vocab.id_of("<de>") == 5
        assert vocab.id_of("aa") == 6

    def test_bijection(self):
        vocab = Vocabulary(["x", "y", "z"], ["aa"])
        ids = [vocab.id_of(s) for s in ("x", "y", "z")]
        assert len(set(ids)) == 3
        for s in ("x", "y", "z"):
            assert vocab.symbol_of(vocab.id_of(s)) == s

    def test_duplicate_symbol_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary(["x", "x"], ["aa"])

    def test_unknown_maps_to_unk(self):
        vocab = Vocabulary(["x"], ["aa"])
        assert vocab.id_of("nope") == vocab.unk_id

    def test_lang_tag_lookup(self):
        vocab = Vocabulary(["x"], ["aa", "bb"])
        assert vocab.lang_tag_id("aa") == 4
        with pytest.raises(KeyError):
            vocab.lang_tag_id("zz")

    def test_file_roundtrip(self, tmp_path):
        table = learn_bpe(toy_corpus(), 6)
        vocab = build_vocabulary(table, toy_corpus(), ["aa", "bb"])
        path = tmp_path / "vocab.tsv"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.lang_codes == ["aa", "bb"]
        assert len(loaded) == len(vocab)
        for i in range(len(vocab)):
            assert loaded.symbol_of(i) == vocab.symbol_of(i)


def test_codec_sentence_roundtrip():
    table = learn_bpe(toy_corpus(), 6)
    vocab = build_vocabulary(table, toy_corpus(), ["aa"])
    codec = SubwordCodec(table, vocab)
    sentence = "newest widest low"
    ids = codec.encode_sentence(sentence)
    assert codec.decode_ids(ids) == sentence
    assert all(i >= 4 + 1 for i in ids)  # no reserved/tag ids in content

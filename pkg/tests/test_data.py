"""Corpus loading, up-sampling, subsampling, and multilingual batching."""

import logging

import numpy as np
import pytest

from langclust.bpe import SubwordCodec, build_vocabulary, learn_bpe
from langclust.data import (MultilingualBatch, ParallelCorpus, load_corpus, make_batches,
                            read_manifest, subsample, upsample)


@pytest.fixture
def codec():
    corpus = [["ba na na split", "ba ba ba na", "split na ba"]]
    merges = learn_bpe(corpus, 20)
    return SubwordCodec(merges, build_vocabulary(merges, corpus, ["xx", "yy"]))


def make_pairs(rng, n, src_len=(3, 10)):
    out = []
    for _ in range(n):
        ls = int(rng.integers(*src_len))
        lt = int(rng.integers(*src_len))
        out.append((rng.integers(5, 50, ls).tolist(), rng.integers(5, 50, lt).tolist()))
    return out


class TestLoadCorpus:
    def test_empty_file_warns(self, tmp_path, codec, caplog):
        path = tmp_path / "empty.tsv"
        path.write_text("", encoding="utf-8")
        with caplog.at_level(logging.WARNING):
            corpus = load_corpus(path, "xx", "to_pivot", codec)
        assert len(corpus) == 0
        assert any("empty" in r.message for r in caplog.records)

    def test_three_line_file(self, tmp_path, codec):
        path = tmp_path / "c.tsv"
        path.write_text("ba na\tna ba\nna\tba\nsplit na\tba ba\n", encoding="utf-8")
        corpus = load_corpus(path, "xx", "to_pivot", codec)
        assert len(corpus) == 3
        src, tgt = corpus.pairs[0]
        assert codec.decode_ids(src) == "ba na"
        assert codec.decode_ids(tgt) == "na ba"

    def test_missing_tab_names_line(self, tmp_path, codec):
        path = tmp_path / "bad.tsv"
        path.write_text("ba na\tna\nno tab here\n", encoding="utf-8")
        with pytest.raises(ValueError, match=":2"):
            load_corpus(path, "xx", "to_pivot", codec)

    def test_unseen_character_passes_through_unk_free(self, tmp_path):
        corpus_text = [["ba na q7", "na ba"]]
        merges = learn_bpe(corpus_text, 10)
        vocab = build_vocabulary(merges, corpus_text, ["xx"])
        codec = SubwordCodec(merges, vocab)
        path = tmp_path / "crafted.tsv"
        path.write_text("q7 ba\tna na\n", encoding="utf-8")
        corpus = load_corpus(path, "xx", "to_pivot", codec)
        src, _ = corpus.pairs[0]
        assert vocab.unk_id not in src
        assert codec.decode_ids(src) == "q7 ba"

    def test_bad_direction_rejected(self):
        with pytest.raises(ValueError):
            ParallelCorpus("xx", "sideways", [])


def test_read_manifest(tmp_path):
    m = tmp_path / "manifest.tsv"
    m.write_text("aa\t/data/aa.tsv\tto_pivot\nbb\t/data/bb.tsv\tfrom_pivot\n",
                 encoding="utf-8")
    rows = read_manifest(m)
    assert rows == [("aa", "/data/aa.tsv", "to_pivot"), ("bb", "/data/bb.tsv", "from_pivot")]
    bad = tmp_path / "bad.tsv"
    bad.write_text("aa\t/x\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_manifest(bad)


class TestUpsample:
    def test_sizes_equalize(self):
        rng = np.random.default_rng(0)
        a = ParallelCorpus("aa", "to_pivot", make_pairs(rng, 10))
        b = ParallelCorpus("bb", "to_pivot", make_pairs(rng, 5))
        out = upsample([a, b], seed=1)
        assert [len(c) for c in out] == [10, 10]

    def test_largest_unchanged(self):
        rng = np.random.default_rng(1)
        a = ParallelCorpus("aa", "to_pivot", make_pairs(rng, 10))
        b = ParallelCorpus("bb", "to_pivot", make_pairs(rng, 5))
        out = upsample([a, b], seed=1)
        assert out[0] is a

    def test_single_corpus_unchanged(self):
        rng = np.random.default_rng(2)
        a = ParallelCorpus("aa", "to_pivot", make_pairs(rng, 7))
        assert upsample([a], seed=3)[0] is a

    def test_single_pair_repeats(self):
        rng = np.random.default_rng(3)
        a = ParallelCorpus("aa", "to_pivot", make_pairs(rng, 100))
        b = ParallelCorpus("bb", "to_pivot", make_pairs(rng, 1))
        out = upsample([a, b], seed=4)
        assert len(out[1]) == 100
        assert all(p == b.pairs[0] for p in out[1].pairs)

    def test_balance_ratio_one(self):
        rng = np.random.default_rng(4)
        corpora = [ParallelCorpus(f"l{i}", "to_pivot", make_pairs(rng, int(rng.integers(3, 40))))
                   for i in range(5)]
        sizes = {len(c) for c in upsample(corpora, seed=5)}
        assert len(sizes) == 1

    def test_seed_determinism(self):
        rng = np.random.default_rng(5)
        corpora = [ParallelCorpus("aa", "to_pivot", make_pairs(rng, 9)),
                   ParallelCorpus("bb", "to_pivot", make_pairs(rng, 4))]
        one = upsample(corpora, seed=6)[1].pairs
        two = upsample(corpora, seed=6)[1].pairs
        assert one == two


def test_subsample_fraction():
    rng = np.random.default_rng(6)
    a = ParallelCorpus("aa", "to_pivot", make_pairs(rng, 100))
    out = subsample([a], 0.2, seed=7)[0]
    assert len(out) == 20
    assert subsample([a], 1.0, seed=7)[0] is a
    with pytest.raises(ValueError):
        subsample([a], 0.0, seed=7)


class TestMakeBatches:
    def test_single_language_big_budget_one_batch(self):
        rng = np.random.default_rng(7)
        corpus = ParallelCorpus("aa", "to_pivot", make_pairs(rng, 20))
        batches = list(make_batches([corpus], tokens_per_lang=10_000, seed=0, epochs=1))
        assert len(batches) == 1
        assert len(batches[0].groups["aa"]) == 20

    def test_every_batch_covers_every_language(self):
        rng = np.random.default_rng(8)
        corpora = upsample([ParallelCorpus("aa", "to_pivot", make_pairs(rng, 40)),
                            ParallelCorpus("bb", "to_pivot", make_pairs(rng, 25))], seed=1)
        for batch in make_batches(corpora, tokens_per_lang=40, seed=2, epochs=2):
            assert set(batch.groups) == {"aa", "bb"}
            assert all(batch.groups.values())

    def test_epoch_coverage_exact_multiset(self):
        rng = np.random.default_rng(9)
        corpora = upsample([ParallelCorpus("aa", "to_pivot", make_pairs(rng, 30)),
                            ParallelCorpus("bb", "to_pivot", make_pairs(rng, 30))], seed=1)
        batches = list(make_batches(corpora, tokens_per_lang=50, seed=3, epochs=1))
        for corpus in corpora:
            emitted = [tuple(map(tuple, p)) for b in batches for p in b.groups[corpus.lang_code]]
            original = [tuple(map(tuple, p)) for p in corpus.pairs]
            assert sorted(emitted) == sorted(original)

    def test_group_token_counts_within_band(self):
        rng = np.random.default_rng(10)
        corpora = upsample(
            [ParallelCorpus(f"l{i}", "to_pivot", make_pairs(rng, 60)) for i in range(3)],
            seed=2)
        budget = 60
        for batch in make_batches(corpora, tokens_per_lang=budget, seed=4, epochs=1):
            for code, group in batch.groups.items():
                tokens = sum(len(src) for src, _ in group)
                assert 0.5 * budget <= tokens <= 1.5 * budget, (code, tokens)

    def test_oversize_pair_kept_with_warning(self, caplog):
        rng = np.random.default_rng(11)
        pairs = make_pairs(rng, 5) + [(list(range(100)), [1, 2])]
        corpus = ParallelCorpus("aa", "to_pivot", pairs)
        with caplog.at_level(logging.WARNING):
            batches = list(make_batches([corpus], tokens_per_lang=30, seed=5, epochs=1))
        assert any("exceeds budget" in r.message for r in caplog.records)
        emitted = [p for b in batches for p in b.groups["aa"]]
        assert len(emitted) == 6

    def test_seeded_determinism(self):
        rng = np.random.default_rng(12)
        corpora = upsample([ParallelCorpus("aa", "to_pivot", make_pairs(rng, 25)),
                            ParallelCorpus("bb", "to_pivot", make_pairs(rng, 25))], seed=0)

        def stream(seed):
            return [[(code, tuple(map(tuple, g))) for code, g in sorted(b.groups.items())]
                    for b in make_batches(corpora, 40, seed=seed, epochs=2)]

        assert stream(9) == stream(9)
        assert stream(9) != stream(10)

    def test_unequal_sizes_rejected(self):
        rng = np.random.default_rng(13)
        a = ParallelCorpus("aa", "to_pivot", make_pairs(rng, 10))
        b = ParallelCorpus("bb", "to_pivot", make_pairs(rng, 5))
        with pytest.raises(ValueError, match="up-sampled"):
            next(make_batches([a, b], 40, seed=0))

    def test_examples_iterator_sorted_by_language(self):
        batch = MultilingualBatch({"bb": [([1], [2])], "aa": [([3], [4])]}, 10)
        codes = [code for code, _, _ in batch.examples()]
        assert codes == ["aa", "bb"]

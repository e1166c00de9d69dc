"""End-to-end experiment protocol: train a universal tagged model, extract
language embeddings, cluster, train one model per cluster, decode, compare.

Every artifact lands in a run directory named by the config hash, and the
run manifest (manifest.json) records checkpoints, embedding exports,
cluster assignments, and BLEU reports so that each stage can be re-entered
from the CLI or from tests.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .bleu import BleuReport, corpus_bleu
from .bpe import SubwordCodec, Vocabulary, build_vocabulary, learn_bpe
from .cluster import (ClusterAssignment, LanguageEmbeddingSet, TaxonomyTable,
                      agglomerative_cluster, cluster_by_family, cut_dendrogram,
                      elbow_optimal_k, random_clusters)
from .data import ParallelCorpus, make_batches, read_corpus_text, read_manifest, upsample
from .decoding import BeamConfig
from .languages import default_taxonomy
from .model import ModelConfig, TransformerModel
from .optim import LrSchedule
from .reference_results import REFERENCE_LABEL, reference_bleu
from .tensor import precision as tensor_precision
from .training import fit

log = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")


@dataclass
class ExperimentConfig:
    manifest: str = ""
    direction: str = "many_to_one"
    # model (desk-scale defaults)
    d_model: int = 32
    d_ff: int = 128
    num_layers: int = 2
    num_heads: int = 2
    max_len: int = 64
    dropout: float = 0.0
    # data
    bpe_merges: int = 400
    tokens_per_lang: int = 512
    data_fraction: float = 1.0
    # training
    train_steps: int = 3000
    cluster_train_steps: int = 0  # 0 = same as train_steps
    warmup_steps: int = 400
    lr_scale: float = 1.0
    clip_norm: float = 5.0
    precision: str = "float32"  # training precision; gradient checks use float64
    seed: int = 0
    # clustering
    clustering_method: str = "embedding"
    k_override: int = 0  # 0 = elbow
    random_restarts: int = 3
    taxonomy: str = ""  # path; empty = shipped 23-language table
    # decoding
    beam_size: int = 6
    alpha: float = 1.1
    max_decode_len: int = 48
    run_root: str = "runs"

    def config_hash(self) -> str:
        text = "\n".join(f"{k}={v}" for k, v in sorted(asdict(self).items()))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]

    def to_file(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for k, v in sorted(asdict(self).items()):
                f.write(f"{k}={v}\n")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        with open(path, encoding="utf-8") as f:
            for i, line in enumerate(f, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{i}: expected key=value")
                key, value = line.split("=", 1)
                key, value = key.strip(), value.strip()
                if key not in types:
                    raise ValueError(f"{path}:{i}: unknown config key {key!r}")
                kind = types[key]
                if kind == "int":
                    kwargs[key] = int(value)
                elif kind == "float":
                    kwargs[key] = float(value)
                else:
                    kwargs[key] = value
        return cls(**kwargs)

    def model_config(self, vocab_size: int) -> ModelConfig:
        return ModelConfig(d_model=self.d_model, d_ff=self.d_ff,
                           num_layers=self.num_layers, num_heads=self.num_heads,
                           vocab_size=vocab_size, lang_emb_dim=self.d_model,
                           max_len=self.max_len, dropout=self.dropout)

    def beam_config(self) -> BeamConfig:
        return BeamConfig(self.beam_size, self.alpha, self.max_decode_len)

    def schedule(self) -> LrSchedule:
        return LrSchedule(self.d_model, self.warmup_steps, self.lr_scale)


@dataclass
class PreparedData:
    codec: SubwordCodec
    lang_codes: list[str]
    train: dict[str, ParallelCorpus]
    eval_texts: dict[str, dict[str, list[tuple[str, str]]]]  # split -> code -> pairs


def _split_path(train_path: str, split: str) -> str:
    if split == "train":
        return train_path
    if ".train." not in train_path:
        raise ValueError(f"cannot derive {split} path from {train_path!r} "
                         "(expected '.train.' in the corpus file name)")
    return train_path.replace(".train.", f".{split}.")


def _subsample_texts(pairs, fraction: float, rng: np.random.Generator):
    keep = max(1, int(round(fraction * len(pairs))))
    idx = sorted(rng.choice(len(pairs), size=keep, replace=False).tolist())
    return [pairs[i] for i in idx]


def prepare_data(cfg: ExperimentConfig, workdir: Path) -> PreparedData:
    """Load manifest corpora, learn joint BPE, encode the training pairs."""
    rows = read_manifest(cfg.manifest)
    if not rows:
        raise ValueError(f"manifest {cfg.manifest} lists no corpora")
    texts = {}
    directions = {}
    for i, (code, path, direction) in enumerate(rows):
        pairs = read_corpus_text(path)
        if cfg.data_fraction < 1.0:
            pairs = _subsample_texts(pairs, cfg.data_fraction,
                                     np.random.default_rng([cfg.seed, 77, i]))
        texts[code] = pairs
        directions[code] = direction

    pooled = [[s for pair in pairs for s in pair] for pairs in texts.values()]
    merges = learn_bpe(pooled, cfg.bpe_merges)
    vocab = build_vocabulary(merges, pooled, sorted(texts))
    codec = SubwordCodec(merges, vocab)
    workdir.mkdir(parents=True, exist_ok=True)
    merges.save(workdir / "bpe.merges")
    vocab.save(workdir / "vocab.tsv")

    train = {}
    for code, pairs in texts.items():
        encoded = [(codec.encode_sentence(s), codec.encode_sentence(t)) for s, t in pairs]
        train[code] = ParallelCorpus(code, directions[code], encoded)

    eval_texts: dict[str, dict] = {"dev": {}, "test": {}}
    for code, path, direction in rows:
        for split in ("dev", "test"):
            eval_texts[split][code] = read_corpus_text(_split_path(path, split))
    return PreparedData(codec, sorted(texts), train, eval_texts)


def _train_on(cfg: ExperimentConfig, data: PreparedData, codes, steps: int, seed,
              checkpoint_steps=(), on_checkpoint=None) -> tuple[TransformerModel, list[float]]:
    with tensor_precision(cfg.precision):
        corpora = upsample([data.train[c] for c in codes], seed=_mix(seed, 1))
        batches = make_batches(corpora, cfg.tokens_per_lang, seed=_mix(seed, 2))
        model = TransformerModel(cfg.model_config(len(data.codec.vocab)), codes,
                                 seed=_mix(seed, 3))
        hook = (lambda step: on_checkpoint(model, step)) if on_checkpoint else None
        losses = fit(model, batches, steps, cfg.schedule(), clip_norm=cfg.clip_norm,
                     checkpoint_steps=checkpoint_steps, on_checkpoint=hook)
    return model, losses


def _mix(seed, salt: int) -> int:
    if isinstance(seed, int):
        return seed * 1000003 + salt
    return _mix(int(seed), salt)


def run_universal(cfg: ExperimentConfig, data: PreparedData, workdir: Path) -> dict:
    """Train one tagged model over all languages; export embeddings at the
    final step and at two late-stage checkpoints (80% and 90%)."""
    workdir.mkdir(parents=True, exist_ok=True)
    steps = cfg.train_steps
    late = sorted({max(1, round(steps * 0.8)), max(1, round(steps * 0.9)), steps})
    exports = {}

    def export(model, step):
        embeds = model.extract_language_embeddings()
        path = workdir / f"embeddings.step{step}.tsv"
        embeds.save(path)
        exports[step] = str(path)

    model, losses = _train_on(cfg, data, data.lang_codes, steps, cfg.seed,
                              checkpoint_steps=late, on_checkpoint=export)
    ckpt = workdir / "universal.npz"
    model.save(ckpt, vocab_path=str(workdir.parent / "vocab.tsv"))
    np.savetxt(workdir / "loss.txt", np.array(losses))
    final = str(workdir / f"embeddings.step{steps}.tsv")
    return {"checkpoint": str(ckpt), "embeddings": final,
            "late_embeddings": [exports[s] for s in late], "losses": losses}


def run_clustering(cfg: ExperimentConfig, embeds: LanguageEmbeddingSet | None = None,
                   codes=None, seed: int | None = None) -> ClusterAssignment:
    """Produce a ClusterAssignment with the configured method."""
    method = cfg.clustering_method
    if method == "embedding":
        if embeds is None:
            raise ValueError("embedding clustering requires an embedding export")
        dendrogram = agglomerative_cluster(embeds)
        k = cfg.k_override or elbow_optimal_k(embeds, dendrogram)
        return cut_dendrogram(dendrogram, k)
    if method == "family":
        if codes is None:
            raise ValueError("family clustering requires the language codes")
        taxonomy = TaxonomyTable.load(cfg.taxonomy) if cfg.taxonomy else default_taxonomy()
        return cluster_by_family(codes, taxonomy)
    if method == "random":
        if codes is None:
            raise ValueError("random clustering requires the language codes")
        if cfg.k_override:
            k = cfg.k_override
        elif embeds is not None:
            dendrogram = agglomerative_cluster(embeds)
            k = elbow_optimal_k(embeds, dendrogram)
        else:
            raise ValueError("random clustering needs k_override or embeddings to pick K")
        return random_clusters(codes, k, cfg.seed if seed is None else seed)
    raise ValueError(f"unknown clustering method {method!r}")


def run_cluster_training(cfg: ExperimentConfig, data: PreparedData,
                         assignment: ClusterAssignment, workdir: Path,
                         seed: int | None = None) -> dict[int, str]:
    """One independent model per cluster, trained only on its languages."""
    workdir.mkdir(parents=True, exist_ok=True)
    base_seed = cfg.seed if seed is None else seed
    checkpoints = {}
    steps = cfg.cluster_train_steps or cfg.train_steps
    for idx, codes in enumerate(assignment.clusters()):
        model, losses = _train_on(cfg, data, codes, steps, _mix(base_seed, 100 + idx))
        path = workdir / f"cluster{idx}.npz"
        model.save(path)
        checkpoints[idx] = str(path)
        log.info("cluster %d (%s): final loss %.4f", idx, ",".join(codes), losses[-1])
    return checkpoints


def decode_corpus(model: TransformerModel, codec: SubwordCodec, text_pairs,
                  lang_code: str, beam_cfg: BeamConfig) -> tuple[list, list]:
    """Beam-decode raw (source, target) text pairs; returns token lists for BLEU."""
    hyps, refs = [], []
    limit = model.config.max_len - 1
    for src_text, tgt_text in text_pairs:
        ids = codec.encode_sentence(src_text)
        if len(ids) > limit:
            log.warning("truncating %d-token source to %d", len(ids), limit)
            ids = ids[:limit]
        out = model.translate(ids, lang_code, beam_cfg)
        hyps.append(codec.decode_ids(out).split())
        refs.append(tgt_text.split())
    return hyps, refs


def evaluate_system(cfg: ExperimentConfig, data: PreparedData,
                    assignment: ClusterAssignment | None,
                    checkpoints: dict[int, str], split: str = "test") -> dict[str, BleuReport]:
    """BLEU per language for one system; assignment=None means one model for all."""
    beam_cfg = cfg.beam_config()
    reports = {}
    models = {}
    with tensor_precision(cfg.precision):
        for code in data.lang_codes:
            idx = 0 if assignment is None else assignment.assignment[code]
            if idx not in models:
                if idx not in checkpoints or not Path(checkpoints[idx]).exists():
                    log.warning("missing checkpoint for cluster %s; marking %s missing",
                                idx, code)
                    models[idx] = None
                else:
                    models[idx] = TransformerModel.load(checkpoints[idx])
            model = models[idx]
            if model is None:
                reports[code] = None
                continue
            hyps, refs = decode_corpus(model, data.codec, data.eval_texts[split][code],
                                       code, beam_cfg)
            reports[code] = corpus_bleu(hyps, refs)
    return reports


def aggregate_random(per_seed: list[dict[str, BleuReport]]) -> dict[str, BleuReport | None]:
    """Mean BLEU per language over random-clustering restarts."""
    out = {}
    for code in per_seed[0]:
        cells = [r[code] for r in per_seed if r.get(code) is not None]
        if not cells:
            out[code] = None
            continue
        mean = float(np.mean([c.bleu for c in cells]))
        out[code] = BleuReport(mean, cells[0].precisions, cells[0].brevity_penalty,
                               cells[0].hyp_len, cells[0].ref_len)
    return out


SYSTEM_ORDER = ("Universal", "Individual", "Random", "Family", "Embedding")


def render_table(bleu: dict[str, dict[str, BleuReport | None]],
                 direction: str | None = None, include_reference: bool = False) -> str:
    """Language x system comparison table; best desk-scale cell per language
    is marked '*', missing cells are rendered explicitly."""
    systems = [s for s in SYSTEM_ORDER if s in bleu]
    systems += sorted(s for s in bleu if s not in systems)
    langs = sorted({code for reports in bleu.values() for code in reports})
    width = max(10, *(len(s) + 2 for s in systems))
    head = "lang".ljust(6) + "".join(s.rjust(width) for s in systems)
    lines = [head, "-" * len(head)]
    for code in langs:
        cells = {s: bleu[s].get(code) for s in systems}
        scores = {s: c.bleu for s, c in cells.items() if c is not None}
        best = max(scores.values()) if scores else None
        row = code.ljust(6)
        for s in systems:
            c = cells[s]
            if c is None:
                row += "missing".rjust(width)
            else:
                mark = "*" if best is not None and c.bleu == best else ""
                row += f"{c.bleu:.2f}{mark}".rjust(width)
        lines.append(row)
    means = []
    for s in systems:
        vals = [c.bleu for c in bleu[s].values() if c is not None]
        means.append(float(np.mean(vals)) if vals else None)
    lines.append("mean".ljust(6) + "".join(
        ("missing" if m is None else f"{m:.2f}").rjust(width) for m in means))
    if include_reference and direction:
        ref_lines = []
        for s in systems:
            vals = [(code, reference_bleu(direction, s, code)) for code in langs]
            vals = [(c, v) for c, v in vals if v is not None]
            if vals:
                ref_lines.append(f"  {s}: " + "  ".join(f"{c}={v:.2f}" for c, v in vals))
        if ref_lines:
            lines.append("")
            lines.append(REFERENCE_LABEL + ":")
            lines.extend(ref_lines)
    return "\n".join(lines)


def cluster_training_plan(cfg: ExperimentConfig, assignment: ClusterAssignment) -> list[dict]:
    """The per-cluster training inputs, for config-equivalence checks:
    K=1 reproduces the universal plan, K=n the individual baseline."""
    steps = cfg.cluster_train_steps or cfg.train_steps
    return [{"languages": codes, "steps": steps,
             "tokens_per_lang": cfg.tokens_per_lang,
             "total_batch_tokens": cfg.tokens_per_lang * len(codes)}
            for codes in assignment.clusters()]


class RunManifest:
    """JSON ledger of one run directory; every stage appends to it."""

    def __init__(self, path: Path, config: ExperimentConfig):
        self.path = Path(path)
        self.data = {"config_hash": config.config_hash(),
                     "config": asdict(config),
                     "universal": None, "assignments": {}, "systems": {}, "bleu": {}}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                self.data = json.load(f)

    def update(self, **entries):
        self.data.update(entries)
        self.save()

    def save(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump(self.data, f, indent=2, default=str)

    def record_bleu(self, split: str, system: str, reports: dict[str, BleuReport | None]):
        table = self.data["bleu"].setdefault(split, {})
        table[system] = {code: (None if r is None else json.loads(r.to_json()))
                         for code, r in reports.items()}
        self.save()

    def bleu_tables(self, split: str) -> dict[str, dict[str, BleuReport | None]]:
        out = {}
        for system, reports in self.data["bleu"].get(split, {}).items():
            out[system] = {code: (None if obj is None else BleuReport.from_dict(obj))
                           for code, obj in reports.items()}
        return out


def run_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.run_root) / cfg.config_hash()

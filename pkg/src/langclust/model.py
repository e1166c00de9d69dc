"""Encoder-decoder transformer with a per-language embedding added to every
source token embedding.

The language tag is injected on the encoder side only, after the sqrt(d)
embedding scaling, together with the sinusoidal positional encoding:
layer-0 input = tok_emb * sqrt(d_model) + lang_emb + pos_enc. Pre-norm
residual blocks; the decoder is causally masked and padding never enters
attention keys or the loss.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import tensor as T
from .cluster import LanguageEmbeddingSet
from .data import MultilingualBatch
from .decoding import BeamConfig, beam_search_core, greedy_core
from .tensor import Tensor, no_grad

CHECKPOINT_VERSION = 1


@dataclass
class ModelConfig:
    d_model: int = 256
    d_ff: int = 1024
    num_layers: int = 2
    num_heads: int = 4
    vocab_size: int = 0
    lang_emb_dim: int = 256
    max_len: int = 64
    dropout: float = 0.0

    def __post_init__(self):
        if self.d_model % self.num_heads != 0:
            raise ValueError(f"d_model {self.d_model} not divisible by num_heads {self.num_heads}")
        if self.lang_emb_dim != self.d_model:
            raise ValueError("lang_emb_dim must equal d_model (language embedding is "
                             "summed onto token embeddings)")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")


def sinusoidal_positions(max_len: int, d_model: int) -> np.ndarray:
    pos = np.arange(max_len)[:, None].astype(np.float64)
    dim = np.arange(0, d_model, 2).astype(np.float64)
    angle = pos / np.power(10000.0, dim / d_model)
    out = np.zeros((max_len, d_model), dtype=np.float64)
    out[:, 0::2] = np.sin(angle)
    out[:, 1::2] = np.cos(angle[:, : d_model // 2])
    return out


class TransformerModel:
    """All trainable parameters plus forward passes for training and decoding."""

    def __init__(self, config: ModelConfig, lang_codes, seed: int = 0,
                 pad_id: int = 0, bos_id: int = 1, eos_id: int = 2):
        if config.vocab_size < 1:
            raise ValueError("config.vocab_size must be set")
        if not lang_codes:
            raise ValueError("at least one language must be registered")
        self.config = config
        self.lang_codes = sorted(lang_codes)
        self._lang_index = {c: i for i, c in enumerate(self.lang_codes)}
        self.pad_id = pad_id
        self.bos_id = bos_id
        self.eos_id = eos_id
        self.pos = sinusoidal_positions(config.max_len, config.d_model).astype(T.DTYPE)
        self.params: dict[str, Tensor] = {}
        self._dropout_rng = np.random.default_rng([seed, 1])
        self._attn_probe: list | None = None
        self._init_params(np.random.default_rng([seed, 0]))

    # -- parameters ----------------------------------------------------------

    def _add(self, name: str, data) -> None:
        self.params[name] = Tensor(np.asarray(data, dtype=T.DTYPE), requires_grad=True)

    def _init_params(self, rng: np.random.Generator) -> None:
        cfg = self.config
        d, f, v = cfg.d_model, cfg.d_ff, cfg.vocab_size

        def mat(shape):
            s = math.sqrt(1.0 / shape[0])
            return rng.uniform(-s, s, size=shape)

        self._add("tok_emb", rng.uniform(-0.1, 0.1, size=(v, d)))
        self._add("lang_emb", rng.uniform(-0.1, 0.1, size=(len(self.lang_codes), d)))
        for side, blocks in (("enc", ("self", "ff")), ("dec", ("self", "cross", "ff"))):
            for layer in range(cfg.num_layers):
                p = f"{side}{layer}"
                for j, block in enumerate(blocks, 1):
                    self._add(f"{p}_ln{j}_g", np.ones(d))
                    self._add(f"{p}_ln{j}_b", np.zeros(d))
                    if block == "ff":
                        self._add(f"{p}_ff_w1", mat((d, f)))
                        self._add(f"{p}_ff_b1", np.zeros(f))
                        self._add(f"{p}_ff_w2", mat((f, d)))
                        self._add(f"{p}_ff_b2", np.zeros(d))
                    else:
                        for w in ("wq", "wk", "wv", "wo"):
                            self._add(f"{p}_{block}_{w}", mat((d, d)))
                        for b in ("bq", "bk", "bv", "bo"):
                            self._add(f"{p}_{block}_{b}", np.zeros(d))
            self._add(f"{side}_ln_g", np.ones(d))
            self._add(f"{side}_ln_b", np.zeros(d))
        self._add("out_w", mat((d, v)))
        self._add("out_b", np.zeros(v))

    def lang_row(self, code: str) -> int:
        if code not in self._lang_index:
            raise KeyError(f"language {code!r} not registered with this model")
        return self._lang_index[code]

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def check_finite(self) -> bool:
        return all(p.check_finite() for p in self.params.values())

    # -- forward building blocks ----------------------------------------------

    def _ln(self, x, prefix):
        return T.layer_norm_affine(x, self.params[prefix + "_g"], self.params[prefix + "_b"])

    def _attention(self, q_in, kv_in, mask, prefix):
        cfg = self.config
        n, tq, d = q_in.shape
        tk = kv_in.shape[1]
        h, dh = cfg.num_heads, cfg.d_model // cfg.num_heads
        p = self.params
        q = T.linear(q_in, p[prefix + "_wq"], p[prefix + "_bq"])
        k = T.linear(kv_in, p[prefix + "_wk"], p[prefix + "_bk"])
        v = T.linear(kv_in, p[prefix + "_wv"], p[prefix + "_bv"])
        qh = q.reshape(n, tq, h, dh).transpose(0, 2, 1, 3)
        kh = k.reshape(n, tk, h, dh).transpose(0, 2, 1, 3)
        vh = v.reshape(n, tk, h, dh).transpose(0, 2, 1, 3)
        scores = (qh @ kh.transpose(0, 1, 3, 2)) * (dh ** -0.5)
        if mask is not None:
            scores = scores + mask
        weights = T.softmax(scores, axis=-1)
        if self._attn_probe is not None:
            self._attn_probe.append(weights.data)
        out = (weights @ vh).transpose(0, 2, 1, 3).reshape(n, tq, d)
        return T.linear(out, p[prefix + "_wo"], p[prefix + "_bo"])

    def _ffn(self, x, prefix):
        p = self.params
        h = T.relu(T.linear(x, p[prefix + "_w1"], p[prefix + "_b1"]))
        return T.linear(h, p[prefix + "_w2"], p[prefix + "_b2"])

    def _maybe_dropout(self, x, train):
        if train and self.config.dropout > 0.0:
            return T.dropout(x, self.config.dropout, self._dropout_rng)
        return x

    def _embed_source(self, src: np.ndarray, lang_rows: np.ndarray | None):
        n, s = src.shape
        d = self.config.d_model
        x = T.embedding(self.params["tok_emb"], src) * math.sqrt(d)
        if lang_rows is not None:
            lang = T.embedding(self.params["lang_emb"], lang_rows).reshape(n, 1, d)
            x = x + lang
        return x + self.pos[None, :s, :]

    def _embed_target(self, tgt: np.ndarray):
        s = tgt.shape[1]
        x = T.embedding(self.params["tok_emb"], tgt) * math.sqrt(self.config.d_model)
        return x + self.pos[None, :s, :]

    def _encoder_stack(self, x, src_key_mask, train=False):
        for i in range(self.config.num_layers):
            p = f"enc{i}"
            h = self._ln(x, f"{p}_ln1")
            x = x + self._maybe_dropout(self._attention(h, h, src_key_mask, f"{p}_self"), train)
            x = x + self._maybe_dropout(self._ffn(self._ln(x, f"{p}_ln2"), f"{p}_ff"), train)
        return self._ln(x, "enc_ln")

    def _decoder_stack(self, y, enc_out, src_key_mask, causal_mask, train=False):
        for i in range(self.config.num_layers):
            p = f"dec{i}"
            h = self._ln(y, f"{p}_ln1")
            y = y + self._maybe_dropout(self._attention(h, h, causal_mask, f"{p}_self"), train)
            y = y + self._maybe_dropout(
                self._attention(self._ln(y, f"{p}_ln2"), enc_out, src_key_mask, f"{p}_cross"),
                train)
            y = y + self._maybe_dropout(self._ffn(self._ln(y, f"{p}_ln3"), f"{p}_ff"), train)
        return self._ln(y, "dec_ln")

    def _logits(self, dec_out):
        return T.linear(dec_out, self.params["out_w"], self.params["out_b"])

    # -- training ----------------------------------------------------------------

    def loss(self, batch: MultilingualBatch, train: bool = True) -> Tensor:
        """Mean negative token log-likelihood with teacher forcing; padding
        positions carry zero weight."""
        arrays = collate_batch(batch, self.pad_id, self.bos_id, self.eos_id,
                               self.config.max_len, self._lang_index)
        x = self._embed_source(arrays["src"], arrays["lang_rows"])
        x = self._maybe_dropout(x, train)
        enc = self._encoder_stack(x, arrays["src_key_mask"], train)
        y = self._maybe_dropout(self._embed_target(arrays["tgt_in"]), train)
        dec = self._decoder_stack(y, enc, arrays["src_key_mask"], arrays["causal_mask"], train)
        n, t, d = dec.shape
        # project only the real target positions through the output layer
        live = np.flatnonzero(arrays["tgt_weight"].reshape(-1) > 0.0)
        flat = T.take_rows(dec.reshape(n * t, d), live)
        logits = self._logits(flat)
        return T.cross_entropy(logits, arrays["tgt_out"].reshape(-1)[live])

    # -- inference ------------------------------------------------------------------

    def encode(self, src_ids, lang_code: str | None) -> np.ndarray:
        """Encoder hidden states [len, d_model] for one id sequence.

        ``lang_code=None`` runs the tag-free path (no language vector added).
        """
        src_ids = list(src_ids)
        if not src_ids:
            raise ValueError("cannot encode an empty sequence")
        if len(src_ids) > self.config.max_len:
            raise ValueError(f"sequence of {len(src_ids)} tokens exceeds max_len "
                             f"{self.config.max_len}")
        rows = None if lang_code is None else np.array([self.lang_row(lang_code)])
        with no_grad():
            x = self._embed_source(np.array([src_ids]), rows)
            return self._encoder_stack(x, None).data[0]

    def source_embedding(self, src_ids, lang_code: str | None) -> np.ndarray:
        """Layer-0 encoder input [len, d_model] (before any attention block)."""
        rows = None if lang_code is None else np.array([self.lang_row(lang_code)])
        with no_grad():
            return self._embed_source(np.array([list(src_ids)]), rows).data[0]

    def _decode_logprobs(self, prefixes: np.ndarray, enc_data: np.ndarray,
                         src_key_mask) -> np.ndarray:
        n, t = prefixes.shape
        enc = Tensor(np.broadcast_to(enc_data, (n,) + enc_data.shape[1:]).copy())
        causal = causal_mask(t)
        with no_grad():
            y = self._embed_target(prefixes)
            dec = self._decoder_stack(y, enc, src_key_mask, causal)
            logits = self._logits(dec).data[:, -1, :]
        shifted = logits - logits.max(axis=1, keepdims=True)
        return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

    def translate(self, src_ids, lang_code: str, cfg: BeamConfig,
                  greedy: bool = False) -> list[int]:
        """Decode one source id sequence (EOS appended internally); returns
        content token ids without BOS/EOS."""
        src = np.array([list(src_ids) + [self.eos_id]])
        rows = np.array([self.lang_row(lang_code)])
        with no_grad():
            enc = self._encoder_stack(self._embed_source(src, rows), None)

        def step_fn(prefixes):
            return self._decode_logprobs(prefixes, enc.data, None)

        if greedy:
            return greedy_core(step_fn, self.bos_id, self.eos_id, cfg.max_decode_len)
        return beam_search_core(step_fn, self.bos_id, self.eos_id, cfg)

    def extract_language_embeddings(self) -> LanguageEmbeddingSet:
        """Copy of the language-embedding table, rows ordered by language code."""
        return LanguageEmbeddingSet(list(self.lang_codes), self.params["lang_emb"].data.copy())

    # -- persistence -------------------------------------------------------------------

    def save(self, path, vocab_path: str | None = None) -> None:
        meta = {
            "format_version": CHECKPOINT_VERSION,
            "config": asdict(self.config),
            "lang_codes": self.lang_codes,
            "special_ids": [self.pad_id, self.bos_id, self.eos_id],
            "vocab_path": vocab_path,
        }
        arrays = {f"param/{k}": p.data for k, p in self.params.items()}
        arrays["meta"] = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path) -> "TransformerModel":
        with np.load(path) as archive:
            meta = json.loads(bytes(archive["meta"]).decode("utf-8"))
            if meta["format_version"] != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta['format_version']}")
            model = cls(ModelConfig(**meta["config"]), meta["lang_codes"],
                        pad_id=meta["special_ids"][0], bos_id=meta["special_ids"][1],
                        eos_id=meta["special_ids"][2])
            model.vocab_path = meta.get("vocab_path")
            for key in archive.files:
                if key.startswith("param/"):
                    name = key[len("param/"):]
                    model.params[name].data = archive[key].astype(T.DTYPE)
        return model


def causal_mask(t: int) -> np.ndarray:
    """[1, 1, t, t] additive mask: position i may attend to positions <= i."""
    m = np.zeros((t, t), dtype=T.DTYPE)
    m[np.triu_indices(t, k=1)] = -1e9
    return m[None, None, :, :]


def key_padding_mask(real: np.ndarray) -> np.ndarray:
    """[n, 1, 1, s] additive mask hiding padded key positions."""
    return np.where(real, T.DTYPE(0.0), T.DTYPE(-1e9))[:, None, None, :]


def collate_batch(batch: MultilingualBatch, pad_id: int, bos_id: int, eos_id: int,
                  max_len: int, lang_index: dict[str, int]) -> dict:
    """Pad a MultilingualBatch into dense arrays for the forward pass."""
    examples = list(batch.examples())
    if not examples:
        raise ValueError("empty batch")
    for code, src, tgt in examples:
        if len(src) + 1 > max_len or len(tgt) + 1 > max_len:
            raise ValueError(f"pair of lengths ({len(src)}, {len(tgt)}) exceeds max_len {max_len}")
        if code not in lang_index:
            raise KeyError(f"language {code!r} not registered with this model")
    n = len(examples)
    s = max(len(src) for _, src, _ in examples) + 1
    t = max(len(tgt) for _, _, tgt in examples) + 1
    src_arr = np.full((n, s), pad_id, dtype=np.int64)
    tgt_in = np.full((n, t), pad_id, dtype=np.int64)
    tgt_out = np.full((n, t), pad_id, dtype=np.int64)
    src_real = np.zeros((n, s), dtype=bool)
    tgt_weight = np.zeros((n, t), dtype=T.DTYPE)
    lang_rows = np.zeros(n, dtype=np.int64)
    for i, (code, src, tgt) in enumerate(examples):
        ls, lt = len(src) + 1, len(tgt) + 1
        src_arr[i, :ls] = src + [eos_id]
        src_real[i, :ls] = True
        tgt_in[i, :lt] = [bos_id] + tgt
        tgt_out[i, :lt] = tgt + [eos_id]
        tgt_weight[i, :lt] = 1.0
        lang_rows[i] = lang_index[code]
    return {
        "src": src_arr,
        "tgt_in": tgt_in,
        "tgt_out": tgt_out,
        "tgt_weight": tgt_weight,
        "lang_rows": lang_rows,
        "src_key_mask": key_padding_mask(src_real),
        "causal_mask": causal_mask(t),
    }

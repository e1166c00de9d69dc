"""Step-count sweep: when does embedding clustering lock onto the families?"""
import shutil
import sys
import time
from pathlib import Path

import numpy as np

from langclust.cluster import (agglomerative_cluster, cut_dendrogram, elbow_optimal_k,
                               rand_index)
from langclust.data import make_batches, upsample
from langclust.experiment import ExperimentConfig, prepare_data
from langclust.model import TransformerModel
from langclust.synth import build_synthetic_harness
from langclust.tensor import precision
from langclust.training import fit

seed = int(sys.argv[1])
steps = int(sys.argv[2]) if len(sys.argv) > 2 else 800
budget = int(sys.argv[3]) if len(sys.argv) > 3 else 512
dm = int(sys.argv[4]) if len(sys.argv) > 4 else 32
dff = int(sys.argv[5]) if len(sys.argv) > 5 else 128

work = Path(f"/tmp/sweep{seed}_{budget}")
shutil.rmtree(work, ignore_errors=True)
h = build_synthetic_harness(seed)
manifests = h.write(work / "data")
cfg = ExperimentConfig(manifest=manifests[("many_to_one", "train")], d_model=dm, d_ff=dff,
                       train_steps=steps, tokens_per_lang=budget,
                       warmup_steps=min(400, steps // 2), seed=seed,
                       run_root=str(work / "runs"))
data = prepare_data(cfg, work / "runs")

marks = sorted({steps // 8 * i for i in range(1, 9)} | {steps})
results = {}

def snapshot(model, step):
    embeds = model.extract_language_embeddings()
    dend = agglomerative_cluster(embeds)
    k = elbow_optimal_k(embeds, dend)
    cut = cut_dendrogram(dend, k)
    results[step] = (k, rand_index(cut, h.planted), cut.clusters())

t0 = time.time()
with precision(cfg.precision):
    corpora = upsample([data.train[c] for c in data.lang_codes], seed=1)
    batches = make_batches(corpora, cfg.tokens_per_lang, seed=2)
    model = TransformerModel(cfg.model_config(len(data.codec.vocab)), data.lang_codes, seed=seed)
    losses = fit(model, batches, steps, cfg.schedule(), checkpoint_steps=marks,
                 on_checkpoint=lambda step: snapshot(model, step), log_every=0)
dt = time.time() - t0
print(f"seed={seed} budget={budget}: {steps} steps in {dt:.0f}s ({dt/steps*1000:.0f} ms/step)")
for step in marks:
    k, ri, clusters = results[step]
    loss = np.mean(losses[max(0, step - 40):step])
    print(f"  step {step:4d} loss {loss:6.3f}  K={k} rand={ri:.2f} {clusters if ri < 1 else ''}")

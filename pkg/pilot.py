"""Pilot run: check family recovery + timing before pinning acceptance configs."""
import shutil
import time
from pathlib import Path

import numpy as np

from langclust.cluster import (agglomerative_cluster, cut_dendrogram, elbow_optimal_k,
                               rand_index, wcss)
from langclust.experiment import ExperimentConfig, prepare_data, run_universal
from langclust.synth import build_synthetic_harness

t0 = time.time()
seed = int(__import__("sys").argv[1]) if len(__import__("sys").argv) > 1 else 0
steps = int(__import__("sys").argv[2]) if len(__import__("sys").argv) > 2 else 800

work = Path(f"/tmp/pilot{seed}")
shutil.rmtree(work, ignore_errors=True)
h = build_synthetic_harness(seed)
manifests = h.write(work / "data")
print(f"harness: {time.time()-t0:.1f}s")

cfg = ExperimentConfig(manifest=manifests[("many_to_one", "train")],
                       train_steps=steps, warmup_steps=min(400, steps // 2),
                       seed=seed, run_root=str(work / "runs"))
t1 = time.time()
data = prepare_data(cfg, work / "runs")
print(f"prepare (vocab={len(data.codec.vocab)}): {time.time()-t1:.1f}s")

t1 = time.time()
result = run_universal(cfg, data, work / "runs" / "universal")
print(f"universal {steps} steps: {time.time()-t1:.1f}s  "
      f"loss first/last: {result['losses'][0]:.3f}/{np.mean(result['losses'][-50:]):.3f}")

from langclust.cluster import LanguageEmbeddingSet
for path in result["late_embeddings"]:
    embeds = LanguageEmbeddingSet.load(path)
    dend = agglomerative_cluster(embeds)
    curve = [wcss(embeds, cut_dendrogram(dend, k)) for k in range(1, 6)]
    k = elbow_optimal_k(embeds, dend)
    cut = cut_dendrogram(dend, k)
    ri = rand_index(cut, h.planted)
    print(f"{Path(path).name}: K={k} rand_index={ri:.3f} clusters={cut.clusters()}")
    print("   wcss curve:", " ".join(f"{w:.4f}" for w in curve))
    print("   heights:", " ".join(f"{m[2]:.3f}" for m in dend.merges))
print(f"total: {time.time()-t0:.1f}s")

"""End-to-end pilot: criterion-9-style comparison on one harness seed."""
import shutil
import sys
import time
from pathlib import Path

import numpy as np

from langclust.cluster import (LanguageEmbeddingSet, agglomerative_cluster, cut_dendrogram,
                               elbow_optimal_k, rand_index, random_clusters)
from langclust.experiment import (ExperimentConfig, evaluate_system, prepare_data,
                                  render_table, run_cluster_training, run_universal)
from langclust.synth import build_synthetic_harness

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
t0 = time.time()
work = Path(f"/tmp/e2e{seed}")
shutil.rmtree(work, ignore_errors=True)
h = build_synthetic_harness(seed)
manifests = h.write(work / "data")
cfg = ExperimentConfig(manifest=manifests[("many_to_one", "train")],
                       train_steps=800, cluster_train_steps=400,
                       warmup_steps=400, seed=seed, max_decode_len=32,
                       run_root=str(work / "runs"))
run = Path(cfg.run_root) / cfg.config_hash()
data = prepare_data(cfg, run)
print(f"prep {time.time()-t0:.0f}s vocab={len(data.codec.vocab)}")

uni = run_universal(cfg, data, run / "universal")
print(f"universal done {time.time()-t0:.0f}s final loss {np.mean(uni['losses'][-50:]):.3f}")

embeds = LanguageEmbeddingSet.load(uni["embeddings"])
partitions = []
for p in uni["late_embeddings"]:
    e = LanguageEmbeddingSet.load(p)
    d = agglomerative_cluster(e)
    partitions.append(cut_dendrogram(d, elbow_optimal_k(e, d)))
print("late partitions:", [p.clusters() for p in partitions])
print("rand vs planted:", [round(rand_index(p, h.planted), 2) for p in partitions])

assignment = partitions[-1]
emb_ckpts = run_cluster_training(cfg, data, assignment, run / "emb_clusters")
print(f"embedding clusters trained {time.time()-t0:.0f}s")

rand_reports = []
for rs in range(3):
    ra = random_clusters(data.lang_codes, assignment.k, seed=1000 * seed + rs)
    ckpts = run_cluster_training(cfg, data, ra, run / f"rand{rs}", seed=cfg.seed + 7 + rs)
    rand_reports.append((ra, ckpts))
    print(f"random {rs} ({ra.clusters()}) trained {time.time()-t0:.0f}s")

bleu = {}
bleu["Universal"] = evaluate_system(cfg, data, None, {0: uni["checkpoint"]}, split="dev")
print(f"universal eval {time.time()-t0:.0f}s")
bleu["Embedding"] = evaluate_system(cfg, data, assignment, emb_ckpts, split="dev")
print(f"embedding eval {time.time()-t0:.0f}s")
rand_means = []
for i, (ra, ckpts) in enumerate(rand_reports):
    r = evaluate_system(cfg, data, ra, ckpts, split="dev")
    bleu[f"Random:{i}"] = r
    rand_means.append(np.mean([v.bleu for v in r.values()]))
    print(f"random {i} eval {time.time()-t0:.0f}s")

print(render_table(bleu))
m_u = np.mean([v.bleu for v in bleu["Universal"].values()])
m_e = np.mean([v.bleu for v in bleu["Embedding"].values()])
m_r = float(np.mean(rand_means))
print(f"\nmeans: Universal={m_u:.2f} Embedding={m_e:.2f} Random(3)={m_r:.2f}")
print(f"criterion direction: E>=U {m_e >= m_u}, E>=R {m_e >= m_r}")
print(f"total {time.time()-t0:.0f}s")

"""Language clustering workbench for multilingual NMT.

Train a universal tagged translation model, extract per-language
embeddings, cluster languages (by embedding, family taxonomy, or at
random), train one model per cluster, and compare BLEU across systems.
"""

from .bleu import BleuReport, corpus_bleu
from .bpe import (MergeTable, SubwordCodec, Vocabulary, apply_bpe,
                  build_vocabulary, desegment, learn_bpe)
from .cluster import (ClusterAssignment, Dendrogram, LanguageEmbeddingSet,
                      TaxonomyTable, agglomerative_cluster, cluster_by_family,
                      cosine_distance, cut_dendrogram, detect_knee,
                      elbow_optimal_k, rand_index, random_clusters, wcss)
from .data import (MultilingualBatch, ParallelCorpus, load_corpus, make_batches,
                   read_manifest, subsample, upsample)
from .decoding import BeamConfig, beam_search_core, greedy_core, length_penalty
from .experiment import (ExperimentConfig, PreparedData, RunManifest,
                         cluster_training_plan, evaluate_system, prepare_data,
                         render_table, run_cluster_training, run_clustering,
                         run_universal)
from .languages import ETHNOLOGUE_FAMILY, IWSLT23_CODES, default_taxonomy
from .model import ModelConfig, TransformerModel
from .optim import AdamState, LrSchedule, adam_step, clip_global_norm, noam_lr
from .synth import SyntheticHarness, build_synthetic_harness, type_overlap
from .tensor import Tensor, no_grad
from .training import DivergenceError, fit
from .viz import emit_dendrogram

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

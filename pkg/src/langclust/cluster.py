"""Language clustering: agglomerative dendrograms, elbow-based K selection,
family-taxonomy partitions, random partitions, and partition comparison.

Average linkage is computed from the original cosine distance matrix (the
Lance-Williams update for unweighted average linkage), so inter-cluster
distance is always the mean pairwise distance over the two member sets.
Ties are broken toward the smallest (node_a, node_b) pair, node ids being
assigned in creation order (leaves first), which makes every result
deterministic and permutation-stable up to node relabeling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

METHODS = ("embedding", "family", "random")
LINKAGES = ("average", "single", "complete")
METRICS = ("cosine", "euclidean")


@dataclass
class LanguageEmbeddingSet:
    """One embedding row per language code; codes must be unique."""

    codes: list[str]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if len(self.codes) != len(set(self.codes)):
            raise ValueError("duplicate language codes in embedding set")
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.codes):
            raise ValueError(f"embedding matrix shape {self.matrix.shape} does not match "
                             f"{len(self.codes)} codes")

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for code, row in zip(self.codes, self.matrix):
                f.write(code + "\t" + "\t".join(f"{float(v):.17g}" for v in row) + "\n")

    @classmethod
    def load(cls, path) -> "LanguageEmbeddingSet":
        codes, rows = [], []
        with open(path, encoding="utf-8") as f:
            for line in f:
                parts = line.rstrip("\n").split("\t")
                codes.append(parts[0])
                rows.append([float(v) for v in parts[1:]])
        return cls(codes, np.array(rows, dtype=np.float64))


@dataclass
class Dendrogram:
    """Agglomerative merge tree: leaves 0..n-1 are ``labels``, internal nodes
    n..2n-2 are created in merge order."""

    labels: list[str]
    merges: list[tuple[int, int, float, int]]

    @property
    def n_leaves(self):
        return len(self.labels)

    def to_json(self) -> str:
        return json.dumps({"labels": self.labels,
                           "merges": [[a, b, h, nid] for a, b, h, nid in self.merges]},
                          indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Dendrogram":
        obj = json.loads(text)
        merges = [(int(a), int(b), float(h), int(nid)) for a, b, h, nid in obj["merges"]]
        return cls(list(obj["labels"]), merges)

    def leaf_members(self) -> dict[int, list[int]]:
        """Leaf index sets for every node id, leaves included."""
        members = {i: [i] for i in range(self.n_leaves)}
        for a, b, _, nid in self.merges:
            members[nid] = members[a] + members[b]
        return members


@dataclass
class ClusterAssignment:
    """Partition of language codes into K clusters, tagged with its method."""

    k: int
    assignment: dict[str, int]
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown clustering method {self.method!r}")
        used = set(self.assignment.values())
        if used != set(range(self.k)):
            raise ValueError(f"assignment must use every cluster index in [0, {self.k})")

    def clusters(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.k)]
        for code in sorted(self.assignment):
            out[self.assignment[code]].append(code)
        return out

    def to_json(self) -> str:
        return json.dumps({"method": self.method, "K": self.k,
                           "clusters": self.clusters()}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ClusterAssignment":
        obj = json.loads(text)
        assignment = {}
        for idx, group in enumerate(obj["clusters"]):
            for code in group:
                assignment[code] = idx
        return cls(int(obj["K"]), assignment, obj["method"])


@dataclass
class TaxonomyTable:
    """Total mapping lang_code -> family name."""

    families: dict[str, str] = field(default_factory=dict)

    def family_of(self, code: str) -> str:
        if code not in self.families:
            raise KeyError(f"language {code!r} missing from taxonomy")
        return self.families[code]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for code in sorted(self.families):
                f.write(f"{code}\t{self.families[code]}\n")

    @classmethod
    def load(cls, path) -> "TaxonomyTable":
        families = {}
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                code, family = line.split("\t")
                families[code] = family
        return cls(families)


# -- distances ------------------------------------------------------------------


def cosine_distance(u, v) -> float:
    """1 - cos(u, v), in [0, 2]; both vectors must be nonzero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"vector shapes differ: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine distance undefined for zero vectors")
    return float(np.clip(1.0 - (u @ v) / (nu * nv), 0.0, 2.0))


def distance_matrix(embeds: LanguageEmbeddingSet, metric: str = "cosine") -> np.ndarray:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    x = embeds.matrix
    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0.0):
            bad = [embeds.codes[i] for i in np.flatnonzero(norms == 0.0)]
            raise ValueError(f"zero embedding rows for {bad}; cannot use cosine distance")
        unit = x / norms[:, None]
        d = np.clip(1.0 - unit @ unit.T, 0.0, 2.0)
    else:
        diff = x[:, None, :] - x[None, :, :]
        d = np.sqrt((diff * diff).sum(axis=-1))
    np.fill_diagonal(d, 0.0)
    return d


# -- agglomerative clustering -----------------------------------------------------


def agglomerative_cluster(embeds: LanguageEmbeddingSet, linkage: str = "average",
                          metric: str = "cosine") -> Dendrogram:
    """Bottom-up clustering; returns the full merge tree over the languages."""
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    n = len(embeds.codes)
    if n < 2:
        raise ValueError("agglomerative clustering needs at least 2 languages")
    base = distance_matrix(embeds, metric)

    # distances between active nodes, keyed by (smaller id, larger id)
    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = base[i, j]
    sizes = {i: 1 for i in range(n)}
    active = set(range(n))
    merges: list[tuple[int, int, float, int]] = []
    next_id = n

    for _ in range(n - 1):
        best_pair = min(dist, key=lambda p: (dist[p], p))
        height = dist[best_pair]
        a, b = best_pair
        new_id = next_id
        next_id += 1
        merges.append((a, b, height, new_id))
        active.discard(a)
        active.discard(b)
        for k in active:
            da = dist.pop((min(a, k), max(a, k)))
            db = dist.pop((min(b, k), max(b, k)))
            if linkage == "average":
                d = (sizes[a] * da + sizes[b] * db) / (sizes[a] + sizes[b])
            elif linkage == "single":
                d = min(da, db)
            else:
                d = max(da, db)
            dist[(k, new_id)] = d
        del dist[best_pair]
        sizes[new_id] = sizes[a] + sizes[b]
        active.add(new_id)
    return Dendrogram(list(embeds.codes), merges)


def cut_dendrogram(dendrogram: Dendrogram, k: int) -> ClusterAssignment:
    """Undo the last k-1 merges; connected components become the clusters."""
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"K must be in [1, {n}], got {k}")
    parent = list(range(2 * n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, _, nid in dendrogram.merges[: n - k]:
        parent[find(a)] = nid
        parent[find(b)] = nid

    roots: dict[int, list[int]] = {}
    for leaf in range(n):
        roots.setdefault(find(leaf), []).append(leaf)
    # deterministic cluster indices: order components by their smallest leaf
    ordered = sorted(roots.values(), key=lambda leaves: leaves[0])
    assignment = {}
    for idx, leaves in enumerate(ordered):
        for leaf in leaves:
            assignment[dendrogram.labels[leaf]] = idx
    return ClusterAssignment(k, assignment, "embedding")


# -- elbow method ------------------------------------------------------------------


def wcss(embeds: LanguageEmbeddingSet, assignment: ClusterAssignment) -> float:
    """Within-cluster sum of squares on L2-normalized embedding rows."""
    norms = np.linalg.norm(embeds.matrix, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero embedding rows; cannot normalize")
    unit = embeds.matrix / norms[:, None]
    total = 0.0
    labels = np.array([assignment.assignment[c] for c in embeds.codes])
    for idx in range(assignment.k):
        rows = unit[labels == idx]
        if rows.size == 0:
            continue
        centroid = rows.mean(axis=0)
        total += float(((rows - centroid) ** 2).sum())
    return total


def detect_knee(values, ks=None) -> int:
    """Interior point of a curve with maximum perpendicular distance from the
    chord joining its endpoints; ties go to the smallest k."""
    values = np.asarray(values, dtype=np.float64)
    if ks is None:
        ks = np.arange(1, len(values) + 1)
    ks = np.asarray(ks, dtype=np.float64)
    if len(values) < 3:
        raise ValueError("knee detection needs at least 3 points")
    x1, y1 = ks[0], values[0]
    x2, y2 = ks[-1], values[-1]
    chord = np.hypot(x2 - x1, y2 - y1)
    if chord == 0.0:
        return int(ks[1])
    best_k, best_d = None, -1.0
    for x, y in zip(ks[1:-1], values[1:-1]):
        d = abs((y2 - y1) * x - (x2 - x1) * y + x2 * y1 - y2 * x1) / chord
        if d > best_d + 1e-12:
            best_k, best_d = int(x), d
    return best_k


def elbow_optimal_k(embeds: LanguageEmbeddingSet, dendrogram: Dendrogram,
                    k_max: int | None = None) -> int:
    """Optimal cluster count: knee of the WCSS-vs-K curve along dendrogram cuts."""
    n = dendrogram.n_leaves
    if k_max is None:
        k_max = n - 1
    if k_max > n:
        raise ValueError(f"k_max {k_max} exceeds number of languages {n}")
    if k_max < 3:
        raise ValueError("elbow method needs k_max >= 3 (no interior point otherwise)")
    curve = [wcss(embeds, cut_dendrogram(dendrogram, k)) for k in range(1, k_max + 1)]
    return detect_knee(curve, ks=range(1, k_max + 1))


# -- taxonomy / random / comparison ------------------------------------------------


def cluster_by_family(codes, taxonomy: TaxonomyTable) -> ClusterAssignment:
    """One cluster per distinct family among ``codes``."""
    codes = list(codes)
    families = {code: taxonomy.family_of(code) for code in codes}
    names = sorted(set(families.values()))
    index = {name: i for i, name in enumerate(names)}
    assignment = {code: index[fam] for code, fam in families.items()}
    return ClusterAssignment(len(names), assignment, "family")


def random_clusters(codes, k: int, seed: int) -> ClusterAssignment:
    """Seeded uniform assignment, redrawn until every cluster is nonempty."""
    codes = sorted(codes)
    if k > len(codes):
        raise ValueError(f"K={k} exceeds number of languages {len(codes)}")
    rng = np.random.default_rng(seed)
    while True:
        draw = rng.integers(0, k, size=len(codes))
        if len(set(draw.tolist())) == k:
            break
    return ClusterAssignment(k, {c: int(g) for c, g in zip(codes, draw)}, "random")


def rand_index(a: ClusterAssignment, b: ClusterAssignment) -> float:
    """Fraction of language pairs the two partitions agree on (together/apart)."""
    codes = sorted(a.assignment)
    if set(codes) != set(b.assignment):
        raise ValueError("partitions cover different language sets")
    n = len(codes)
    if n < 2:
        return 1.0
    agree = 0
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            together_a = a.assignment[codes[i]] == a.assignment[codes[j]]
            together_b = b.assignment[codes[i]] == b.assignment[codes[j]]
            agree += together_a == together_b
            total += 1
    return agree / total

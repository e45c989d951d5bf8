"""IVF_FLAT vector index: k-means clustered inverted lists with exact rerank.

Three similarity metrics (cosine, inner product, Euclidean). Brute-force scan
lives alongside as the correctness oracle; ``search`` with ``nprobe == nlist``
must reproduce it exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Hashable, Optional, Sequence, Union

import numpy as np

from .errors import InputError


class Metric(str, Enum):
    COSINE = "cosine"
    IP = "ip"
    L2 = "l2"

    @property
    def descending(self) -> bool:
        """True when larger scores are better."""
        return self is not Metric.L2

    @classmethod
    def parse(cls, value: Union[str, "Metric"]) -> "Metric":
        if isinstance(value, Metric):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            raise InputError(f"unknown metric {value!r}; expected cosine, ip or l2") from None


def similarity(a: np.ndarray, b: np.ndarray, metric: Union[str, Metric]) -> float:
    metric = Metric.parse(metric)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if metric is Metric.COSINE:
        na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
        if na == 0.0 or nb == 0.0:
            raise InputError("cosine similarity is undefined for a zero vector")
        return float(np.dot(a, b) / (na * nb))
    if metric is Metric.IP:
        return float(np.dot(a, b))
    return float(np.linalg.norm(a - b))


def _score_block(vectors: np.ndarray, query: np.ndarray, metric: Metric) -> np.ndarray:
    """Scores for a (n, dim) block against one query; shared by IVF and brute force."""
    if metric is Metric.COSINE:
        norms = np.linalg.norm(vectors, axis=1)
        qn = float(np.linalg.norm(query))
        if qn == 0.0 or np.any(norms == 0.0):
            raise InputError("cosine similarity is undefined for a zero vector")
        return vectors @ query / (norms * qn)
    if metric is Metric.IP:
        return vectors @ query
    return np.linalg.norm(vectors - query, axis=1)


def _rank(ids: list, scores: np.ndarray, k: int, metric: Metric) -> list[tuple[Hashable, float]]:
    order = sorted(range(len(ids)), key=lambda i: (-scores[i] if metric.descending else scores[i], ids[i]))
    return [(ids[i], float(scores[i])) for i in order[:k]]


def brute_force_search(items: Sequence[tuple[Hashable, np.ndarray]], query: np.ndarray,
                       k: int, metric: Union[str, Metric]) -> list[tuple[Hashable, float]]:
    """Exact top-k scan; the ordering oracle for the IVF index."""
    metric = Metric.parse(metric)
    if k < 1:
        raise InputError("k must be >= 1")
    if not items:
        return []
    ids = [i for i, _ in items]
    matrix = np.asarray([v for _, v in items], dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    if matrix.shape[1] != query.shape[0]:
        raise InputError(f"query dim {query.shape[0]} does not match items dim {matrix.shape[1]}")
    scores = _score_block(matrix, query, metric)
    return _rank(ids, scores, k, metric)


@dataclass
class BuildReport:
    iterations: int = 0
    warnings: list[str] = field(default_factory=list)


def default_nlist(n_items: int) -> int:
    return max(1, math.ceil(math.sqrt(n_items)))


def default_nprobe(nlist: int) -> int:
    return max(1, math.ceil(nlist / 4))


def _kmeans_pp_init(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    centroids = np.empty((k, data.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = data[first]
    closest = np.sum((data - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centroids[j] = data[idx]
        closest = np.minimum(closest, np.sum((data - centroids[j]) ** 2, axis=1))
    return centroids


def _kmeans(data: np.ndarray, k: int, seed: int, max_iter: int = 50,
            tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray, int]:
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(data, k, rng)
    assign = np.zeros(data.shape[0], dtype=np.int64)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        dists = np.linalg.norm(data[:, None, :] - centroids[None, :, :], axis=2)
        assign = np.argmin(dists, axis=1)
        new_centroids = centroids.copy()
        for j in range(k):
            members = data[assign == j]
            if len(members):
                new_centroids[j] = members.mean(axis=0)
            else:
                # re-seed an empty cluster from the largest cluster's farthest member
                sizes = np.bincount(assign, minlength=k)
                big = int(np.argmax(sizes))
                candidates = np.where(assign == big)[0]
                far = candidates[int(np.argmax(dists[candidates, big]))]
                new_centroids[j] = data[far]
                assign[far] = j
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < tol:
            break
    dists = np.linalg.norm(data[:, None, :] - centroids[None, :, :], axis=2)
    assign = np.argmin(dists, axis=1)
    return centroids, assign, iterations


@dataclass
class IvfFlatIndex:
    metric: Metric
    nlist: int
    dim: int
    seed: int
    centroids: np.ndarray
    lists: list[list[tuple[Hashable, np.ndarray]]]
    report: BuildReport = field(default_factory=BuildReport)

    def __len__(self) -> int:
        return sum(len(lst) for lst in self.lists)

    def search(self, query: np.ndarray, k: int, nprobe: Optional[int] = None) -> list[tuple[Hashable, float]]:
        if k < 1:
            raise InputError("k must be >= 1")
        nprobe = default_nprobe(self.nlist) if nprobe is None else nprobe
        if not 1 <= nprobe <= self.nlist:
            raise InputError(f"nprobe must be in [1, {self.nlist}], got {nprobe}")
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dim,):
            raise InputError(f"query dim {query.shape} does not match index dim {self.dim}")

        if self.metric is Metric.L2:
            centroid_rank = np.argsort(np.linalg.norm(self.centroids - query, axis=1), kind="stable")
        else:
            # probe clusters by directional affinity; stored vectors stay raw
            qn = float(np.linalg.norm(query))
            if self.metric is Metric.COSINE and qn == 0.0:
                raise InputError("cosine similarity is undefined for a zero vector")
            centroid_rank = np.argsort(-(self.centroids @ query), kind="stable")

        candidates: list[tuple[Hashable, np.ndarray]] = []
        for cluster in centroid_rank[:nprobe]:
            candidates.extend(self.lists[int(cluster)])
        if not candidates:
            return []
        ids = [i for i, _ in candidates]
        matrix = np.asarray([v for _, v in candidates], dtype=np.float64)
        scores = _score_block(matrix, query, self.metric)
        return _rank(ids, scores, k, self.metric)

    # -- persistence ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "metric": self.metric.value,
            "nlist": self.nlist,
            "dim": self.dim,
            "seed": self.seed,
            "centroids": self.centroids.tolist(),
            "lists": [
                [{"id": item_id, "vector": vec.tolist()} for item_id, vec in lst]
                for lst in self.lists
            ],
        }

    def save(self, path: Union[str, Path]):
        Path(path).write_text(json.dumps(self.to_json()), encoding="utf-8")

    @classmethod
    def from_json(cls, doc: dict) -> "IvfFlatIndex":
        return cls(
            metric=Metric.parse(doc["metric"]),
            nlist=int(doc["nlist"]),
            dim=int(doc["dim"]),
            seed=int(doc["seed"]),
            centroids=np.asarray(doc["centroids"], dtype=np.float64),
            lists=[
                [(entry["id"], np.asarray(entry["vector"], dtype=np.float64)) for entry in lst]
                for lst in doc["lists"]
            ],
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "IvfFlatIndex":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def build_index(items: Sequence[tuple[Hashable, np.ndarray]], nlist: Optional[int] = None,
                metric: Union[str, Metric] = Metric.IP, seed: int = 42) -> IvfFlatIndex:
    """Cluster items with seeded k-means++ and bucket them into inverted lists."""
    metric = Metric.parse(metric)
    if not items:
        raise InputError("cannot build an index over zero items")
    ids = [i for i, _ in items]
    if len(set(ids)) != len(ids):
        raise InputError("item ids must be unique")
    matrix = np.asarray([v for _, v in items], dtype=np.float64)
    if matrix.ndim != 2:
        raise InputError("all vectors must share one dimension")
    dim = matrix.shape[1]

    report = BuildReport()
    nlist = default_nlist(len(items)) if nlist is None else nlist
    if nlist < 1:
        raise InputError("nlist must be >= 1")
    if nlist > len(items):
        report.warnings.append(f"nlist {nlist} clamped to item count {len(items)}")
        nlist = len(items)

    # cosine clusters in normalized space; ip/l2 cluster raw
    if metric is Metric.COSINE:
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise InputError("cosine index cannot contain zero vectors")
        cluster_space = matrix / norms
    else:
        cluster_space = matrix

    centroids, assign, iterations = _kmeans(cluster_space, nlist, seed)
    report.iterations = iterations

    lists: list[list[tuple[Hashable, np.ndarray]]] = [[] for _ in range(nlist)]
    for idx, cluster in enumerate(assign):
        lists[int(cluster)].append((ids[idx], matrix[idx]))
    return IvfFlatIndex(metric=metric, nlist=nlist, dim=dim, seed=seed,
                        centroids=centroids, lists=lists, report=report)

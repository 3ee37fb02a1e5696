"""Activity embeddings learned from trace context (skip-gram, negative sampling).

Each activity is mapped to a dense vector such that activities occurring
amid the same neighbours end up pointing in similar directions. Distances
between events are ``1 - cos`` of their activities' vectors.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from logprivacy import kernels
from logprivacy.eventlog import EventLog

logger = logging.getLogger(__name__)

MODEL_FORMAT = "logprivacy-embedding"
MODEL_VERSION = 1


class UnknownActivityError(KeyError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    dimension: int = 16
    window: int = 2
    negative_samples: int = 5
    epochs: int = 50
    learning_rate: float = 0.025
    min_learning_rate: float = 0.0001
    seed: int = 0
    # which matrix serves as the activity vector: "input" or "average" of input+context
    vectors: str = "input"

    def __post_init__(self):
        for name in ("dimension", "window", "negative_samples", "epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.dimension > 1024:
            raise ValueError("dimension must be at most 1024")
        if not self.learning_rate > 0 or not self.min_learning_rate > 0:
            raise ValueError("learning rates must be positive")
        if self.vectors not in ("input", "average"):
            raise ValueError("vectors must be 'input' or 'average'")


@dataclass
class EmbeddingModel:
    labels: tuple[str, ...]
    input_vectors: np.ndarray
    context_vectors: np.ndarray
    vectors: str = "input"
    _index: dict[str, int] = field(init=False, repr=False)
    _distances: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self._index = {l: i for i, l in enumerate(self.labels)}

    @property
    def dimension(self) -> int:
        return self.input_vectors.shape[1]

    @property
    def actvec(self) -> np.ndarray:
        if self.vectors == "average":
            return (self.input_vectors + self.context_vectors) / 2.0
        return self.input_vectors

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownActivityError(f"activity {label!r} is not in the embedding vocabulary") from None

    def vector(self, label: str) -> np.ndarray:
        return self.actvec[self.index(label)]

    def covers(self, labels) -> bool:
        return all(l in self._index for l in labels)

    def distance_matrix(self) -> np.ndarray:
        """Cached |A| x |A| table of event distances, symmetric with a zero diagonal."""
        if self._distances is None:
            vecs = self.actvec
            n = len(self.labels)
            table = np.zeros((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    table[i, j] = table[j, i] = 1.0 - cosine(vecs[i], vecs[j])
            table.setflags(write=False)
            self._distances = table
        return self._distances

    def scaled(self, factor: float) -> "EmbeddingModel":
        return EmbeddingModel(self.labels, self.input_vectors * factor,
                              self.context_vectors * factor, self.vectors)

    # -- persistence ----------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "dimension": self.dimension,
            "vectors": self.vectors,
            "labels": list(self.labels),
            "input_vectors": self.input_vectors.tolist(),
            "context_vectors": self.context_vectors.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "EmbeddingModel":
        doc = json.loads(text)
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError("not an embedding model file")
        if doc.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')}")
        dim = doc["dimension"]
        shape = (len(doc["labels"]), dim)
        w_in = np.array(doc["input_vectors"], dtype=float).reshape(shape)
        w_out = np.array(doc["context_vectors"], dtype=float).reshape(shape)
        return cls(tuple(doc["labels"]), w_in, w_out, doc.get("vectors", "input"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "EmbeddingModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label"] + [f"v_{i + 1}" for i in range(self.dimension)])
        for label, vec in zip(self.labels, self.actvec):
            w.writerow([label] + [repr(float(x)) for x in vec])
        return buf.getvalue()


def cosine(v1, v2) -> float:
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != v2.shape:
        raise ValueError("vectors differ in dimension")
    n1 = math.sqrt(float(np.dot(v1, v1)))
    n2 = math.sqrt(float(np.dot(v2, v2)))
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("cosine is undefined for a zero vector")
    return min(1.0, max(-1.0, float(np.dot(v1, v2)) / (n1 * n2)))


def event_distance(model: EmbeddingModel, a1: str, a2: str) -> float:
    return float(model.distance_matrix()[model.index(a1), model.index(a2)])


def training_pairs(sequences: Sequence[Sequence[int]], window: int) -> np.ndarray:
    """All (center, context) index pairs within ``window`` positions."""
    pairs = []
    for seq in sequences:
        n = len(seq)
        for i in range(n):
            for j in range(max(0, i - window), min(n, i + window + 1)):
                if j != i:
                    pairs.append((seq[i], seq[j]))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def train_act2vec(log: EventLog, config: TrainConfig = TrainConfig()) -> EmbeddingModel:
    if not log.traces:
        raise ValueError("cannot train on an empty log")
    labels = log.labels
    index = log.activity_index
    seqs = [[index[a] for a in t.activities] for t in log.traces]
    n, dim = len(labels), config.dimension
    if n == 1:
        warnings.warn("log has a single activity; its embedding is degenerate", stacklevel=2)

    rng = np.random.default_rng(config.seed)
    w_in = (rng.random((n, dim)) - 0.5) / dim
    w_out = np.zeros((n, dim))

    pairs = training_pairs(seqs, config.window)
    counts = np.bincount([a for s in seqs for a in s], minlength=n).astype(float)
    noise = counts ** 0.75
    noise /= noise.sum()

    total = max(1, len(pairs) * config.epochs)
    step = 0
    for _ in range(config.epochs):
        order = rng.permutation(len(pairs))
        centers = np.ascontiguousarray(pairs[order, 0])
        contexts = np.ascontiguousarray(pairs[order, 1])
        negatives = rng.choice(n, size=(len(pairs), config.negative_samples), p=noise).astype(np.int64)
        step = kernels.sgns_epoch(w_in, w_out, centers, contexts, negatives,
                                  config.learning_rate, config.min_learning_rate, step, total)
    logger.debug("trained %d activities on %d pairs x %d epochs", n, len(pairs), config.epochs)
    return EmbeddingModel(labels, w_in, w_out, config.vectors)


"""Trace distances used to choose where a privacy-violating trace is merged.

Two measures are offered: plain Levenshtein distance over activity labels,
and a directed embedding distance that sums positionwise event distances and
charges a per-event penalty for events that would have to be added
(``rho_add``) or removed (``rho_remove``) when merging a source trace into a
target trace.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from logprivacy import kernels
from logprivacy.embedding import EmbeddingModel
from logprivacy.eventlog import Trace


@dataclass(frozen=True)
class Penalties:
    rho_add: float = 2.0
    rho_remove: float = 3.0

    def __post_init__(self):
        if not self.rho_add > 1:
            raise ValueError("rho_add must exceed 1")
        if not self.rho_remove > self.rho_add:
            raise ValueError("rho_remove must exceed rho_add")


@dataclass(frozen=True)
class DistanceMeasure:
    """``kind`` is ``"levenshtein"`` or ``"embedding"``.

    With ``flip=True`` the embedding distance is evaluated with source and
    target swapped; this exists for sensitivity runs only.
    """

    kind: str = "levenshtein"
    model: EmbeddingModel | None = None
    penalties: Penalties = Penalties()
    flip: bool = False

    def __post_init__(self):
        if self.kind not in ("levenshtein", "embedding"):
            raise ValueError(f"unknown distance measure {self.kind!r}")
        if self.kind == "embedding" and self.model is None:
            raise ValueError("embedding measure needs a model")

    @classmethod
    def levenshtein(cls) -> "DistanceMeasure":
        return cls("levenshtein")

    @classmethod
    def embedding(cls, model: EmbeddingModel, penalties: Penalties = Penalties(),
                  flip: bool = False) -> "DistanceMeasure":
        return cls("embedding", model, penalties, flip)

    @property
    def name(self) -> str:
        return self.kind

    def __call__(self, target: Sequence[str], source: Sequence[str]) -> float:
        return self.prepare([target])(source)[0]

    def many(self, source: Sequence[str], targets: Sequence[Sequence[str]]) -> list:
        """Distances from ``source`` to each target (merge-into direction)."""
        return self.prepare(targets)(source)

    def prepare(self, targets: Sequence[Sequence[str]]):
        """Encode ``targets`` once; returns ``source -> list of distances``."""
        if self.kind == "levenshtein":
            return _LevenshteinBatch(targets)
        return _EmbeddingBatch(self, targets)


class _LevenshteinBatch:
    def __init__(self, targets):
        self.codes: dict[str, int] = {}
        flat = [self.codes.setdefault(x, len(self.codes)) for t in targets for x in t]
        self.flat = np.array(flat, dtype=np.int64)
        self.offsets = np.zeros(len(targets) + 1, dtype=np.int64)
        np.cumsum([len(t) for t in targets], out=self.offsets[1:])

    def __call__(self, source):
        # labels unseen in the targets get fresh codes; they match nothing
        codes = self.codes
        src = np.array([codes.get(x, -1 - i) for i, x in enumerate(source)], dtype=np.int64)
        return kernels.levenshtein_many(src, self.flat, self.offsets).tolist()


class _EmbeddingBatch:
    def __init__(self, measure, targets):
        model = measure.model
        self.model = model
        self.table = model.distance_matrix()
        self.penalties = measure.penalties
        self.flip = measure.flip
        lens = np.array([len(t) for t in targets], dtype=np.int64)
        self.lens = lens
        self.flat = np.array([model.index(a) for t in targets for a in t], dtype=np.int64)
        self.starts = np.concatenate([[0], np.cumsum(lens)[:-1]]).astype(np.int64)

    def __call__(self, source):
        src = np.array([self.model.index(a) for a in source], dtype=np.int64)
        n = len(src)
        j = np.arange(n)
        mask = j[None, :] < np.minimum(self.lens, n)[:, None]
        pos = np.where(mask, self.starts[:, None] + j[None, :], 0)
        vals = np.where(mask, self.table[self.flat[pos], src[None, :]], 0.0)
        # sorted rows: the sum depends only on the multiset of terms
        vals.sort(axis=1)
        shared = vals.sum(axis=1)
        gap = self.lens - n
        rho_longer, rho_shorter = self.penalties.rho_add, self.penalties.rho_remove
        if self.flip:
            rho_longer, rho_shorter = rho_shorter, rho_longer
        penalty = np.where(gap > 0, gap * rho_longer, -gap * rho_shorter)
        return (shared + penalty).tolist()


def _activities(trace) -> tuple:
    return trace.activities if isinstance(trace, Trace) else tuple(trace)


def levenshtein(t1, t2) -> int:
    a, b = _activities(t1), _activities(t2)
    codes: dict[str, int] = {}
    ia = np.array([codes.setdefault(x, len(codes)) for x in a], dtype=np.int64)
    ib = np.array([codes.setdefault(x, len(codes)) for x in b], dtype=np.int64)
    return int(kernels.levenshtein(ia, ib))


def levenshtein_many(source: Sequence[str], targets: Sequence[Sequence[str]]) -> list[int]:
    return _LevenshteinBatch(targets)(source)


def embedding_trace_distance(target, source, model: EmbeddingModel,
                             penalties: Penalties = Penalties()) -> float:
    """Cost of merging ``source`` into ``target``.

    Positionwise event distances over the shared length, plus ``rho_add``
    per event ``target`` has beyond ``source`` and ``rho_remove`` per event
    of ``source`` beyond ``target``.
    """
    measure = DistanceMeasure.embedding(model, penalties)
    return measure(_activities(target), _activities(source))


def rank_candidates(source: Sequence[str], candidates: Sequence[Sequence[str]],
                    counts: Sequence[int], measure: DistanceMeasure,
                    prepared=None) -> tuple[int, float]:
    """Index and distance of the best candidate sequence.

    Ties go to the higher count, then to the earlier position. ``prepared``
    is an optional ``measure.prepare(candidates)`` result to reuse.
    """
    if not candidates:
        raise ValueError("no candidates to merge into")
    dists = (prepared or measure.prepare(candidates))(source)
    best = min(range(len(candidates)), key=lambda i: (dists[i], -counts[i], i))
    return best, dists[best]


def nearest_trace(source: Trace, candidates: Sequence[Trace], measure: DistanceMeasure) -> Trace:
    """The candidate closest to ``source``.

    Ties are broken by how many candidates share the winner's activity
    sequence, then by list order.
    """
    if not candidates:
        raise ValueError("no candidates to merge into")
    freq = Counter(c.activities for c in candidates)
    seqs = [c.activities for c in candidates]
    best, _ = rank_candidates(source.activities, seqs, [freq[s] for s in seqs], measure)
    return candidates[best]

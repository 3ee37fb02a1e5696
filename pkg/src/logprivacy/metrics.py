"""Utility of an anonymized log relative to its original.

Control-flow: behavioural appropriateness (eventually-follows/precedes
labels per activity pair) and the truly sampled score (directly-follows
frequencies after size adjustment). Time: the relative error of total trace
duration. Also diagnostics of the embedding distance and of how
concentrated each activity's successors are.
"""
from __future__ import annotations

import statistics
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from logprivacy.embedding import EmbeddingModel, event_distance
from logprivacy.eventlog import EventLog, total_duration

ALWAYS, SOMETIMES, NEVER = "always", "sometimes", "never"


class MetricError(ValueError):
    pass


class ZeroDurationWarning(UserWarning):
    """The original log has zero total duration; an absolute error is returned."""


@dataclass
class DFMatrix:
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_log(cls, log: EventLog) -> "DFMatrix":
        counts: Counter = Counter()
        for t in log.traces:
            acts = t.activities
            counts.update(zip(acts, acts[1:]))
        return cls(counts)


@dataclass
class MetricReport:
    behavioural_appropriateness: float
    truly_sampled_score: float
    total_duration_error: float
    event_distance_avg: float | None = None
    event_distance_stdev: float | None = None
    top_x_follower_share: dict[int, float] = field(default_factory=dict)


def _relation_labels(log: EventLog, universe: Iterable[str]):
    """Eventually-follows and -precedes labels for every ordered pair.

    Returns two dicts keyed by ``(a, b)``; the label is ``None`` when ``a``
    does not occur in ``log``.
    """
    universe = list(universe)
    containing: Counter = Counter()
    follows: Counter = Counter()  # traces where some b occurs after some a
    precedes: Counter = Counter()  # traces where some b occurs before some a
    for t in log.traces:
        first: dict[str, int] = {}
        last: dict[str, int] = {}
        for i, a in enumerate(t.activities):
            first.setdefault(a, i)
            last[a] = i
        containing.update(first.keys())
        for a in first:
            for b in first:
                if a == b:
                    continue
                if last[b] > first[a]:
                    follows[a, b] += 1
                if first[b] < last[a]:
                    precedes[a, b] += 1

    def label(n, total):
        if total == 0:
            return None
        return ALWAYS if n == total else NEVER if n == 0 else SOMETIMES

    fol, pre = {}, {}
    for a in universe:
        for b in universe:
            if a != b:
                fol[a, b] = label(follows[a, b], containing[a])
                pre[a, b] = label(precedes[a, b], containing[a])
    return fol, pre


def behavioural_appropriateness(original: EventLog, anonymized: EventLog) -> float:
    if not original.traces:
        raise MetricError("original log is empty")
    universe = original.labels
    n = len(universe)
    if n < 2:
        return 1.0
    fo, po = _relation_labels(original, universe)
    fa, pa = _relation_labels(anonymized, universe)
    matches = sum(fo[p] == fa[p] for p in fo) + sum(po[p] == pa[p] for p in po)
    return matches / (2 * n * (n - 1))


def truly_sampled_score(original: EventLog, anonymized: EventLog, epsilon: float = 0.1) -> float:
    """Percentage of the original directly-follows relations that are truly sampled.

    With ``s`` the ratio of directly-follows totals, a relation counted ``c``
    times originally is truly sampled when its anonymized count lies within
    ``epsilon * s * c`` of ``s * c``; when ``s * c < 1`` an anonymized count
    of at most 1 suffices.
    """
    orig = DFMatrix.from_log(original)
    if orig.total == 0:
        raise MetricError("original log has no directly-follows pairs")
    anon = DFMatrix.from_log(anonymized)
    if anon.total == 0:
        return 0.0
    scale = anon.total / orig.total
    hits = 0
    for rel, c in orig.counts.items():
        expected = scale * c
        got = anon.counts.get(rel, 0)
        if expected < 1:
            hits += got <= 1
        else:
            hits += abs(got - expected) <= epsilon * expected
    return 100.0 * hits / len(orig.counts)


def total_duration_error(original: EventLog, anonymized: EventLog) -> float:
    before = total_duration(original)
    after = total_duration(anonymized)
    if before == 0:
        warnings.warn("original log has zero total duration", ZeroDurationWarning, stacklevel=2)
        return abs(after - before)
    return abs(after - before) / before


def event_distance_stats(model: EmbeddingModel) -> tuple[float, float]:
    """Mean and population standard deviation over distinct activity pairs."""
    if len(model.labels) < 2:
        raise MetricError("need at least two activities")
    dists = [event_distance(model, a, b) for a, b in combinations(model.labels, 2)]
    return statistics.fmean(dists), statistics.pstdev(dists)


def top_x_follower_share(log: EventLog, xs: Iterable[int] = (1, 2, 3)) -> dict[int, float]:
    """Median (over activities) share of the ``x`` most frequent successors, in percent."""
    followers: dict[str, Counter] = defaultdict(Counter)
    for (a, b), c in DFMatrix.from_log(log).counts.items():
        followers[a][b] += c
    if not followers:
        raise MetricError("no activity has a directly-following successor")
    out = {}
    for x in xs:
        shares = []
        for succ in followers.values():
            ranked = sorted(succ.values(), reverse=True)
            shares.append(sum(ranked[:x]) / sum(ranked))
        out[x] = 100.0 * statistics.median(shares)
    return out


def evaluate(original: EventLog, anonymized: EventLog, epsilon: float = 0.1,
             model: EmbeddingModel | None = None, xs: Iterable[int] = (1, 2, 3)) -> MetricReport:
    report = MetricReport(
        behavioural_appropriateness=behavioural_appropriateness(original, anonymized),
        truly_sampled_score=truly_sampled_score(original, anonymized, epsilon),
        total_duration_error=total_duration_error(original, anonymized),
    )
    if model is not None:
        report.event_distance_avg, report.event_distance_stdev = event_distance_stats(model)
    try:
        report.top_x_follower_share = top_x_follower_share(original, xs)
    except MetricError:
        pass
    return report

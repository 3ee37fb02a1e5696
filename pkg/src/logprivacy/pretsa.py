"""Prefix-tree event log sanitization.

Traces are stored in a prefix tree whose nodes record the cases passing
through them and each case's event duration at that depth. The loop finds
a node that breaks k-anonymity or t-closeness, pulls its cases out of the
tree and re-inserts each one relabelled as the closest remaining variant,
until no node violates either guarantee.

Traces that *end* at a node form their own group: a variant followed by fewer
than ``k`` cases is a violation even when the node itself holds enough cases.
"""
from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterator, Mapping, Sequence

import numpy as np

from logprivacy.distance import DistanceMeasure, rank_candidates
from logprivacy.eventlog import EventLog, event_durations, trace_from_durations

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrivacyParams:
    k: int = 2
    t_close: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0.0 <= self.t_close <= 1.0:
            raise ValueError("t_close must lie in [0, 1]")


class TreeNode:
    __slots__ = ("activity", "depth", "parent", "children", "bag", "ending", "_emd")

    def __init__(self, activity: str | None, depth: int, parent: "TreeNode | None"):
        self.activity = activity
        self.depth = depth
        self.parent = parent
        self.children: dict[str, TreeNode] = {}
        self.bag: dict[str, float] = {}  # case id -> duration at this depth
        self.ending: set[str] = set()
        self._emd: float | None = None

    @property
    def trace_ids(self) -> set[str]:
        return set(self.bag)

    @property
    def sensitive_bag(self) -> list[float]:
        return list(self.bag.values())

    def ordered_children(self) -> list["TreeNode"]:
        return sorted(self.children.values(), key=lambda c: (-len(c.bag), c.activity))

    def __repr__(self):
        return f"TreeNode({self.activity!r}, depth={self.depth}, traces={len(self.bag)})"


class PrefixTree:
    def __init__(self):
        self.root = TreeNode(None, 0, None)
        self.cases: dict[str, tuple[tuple[str, ...], list[float], datetime]] = {}

    def __len__(self):
        return len(self.cases)

    def insert(self, case_id: str, activities: Sequence[str], durations: Sequence[float],
               start: datetime) -> None:
        node = self.root
        for depth, (act, dur) in enumerate(zip(activities, durations), start=1):
            child = node.children.get(act)
            if child is None:
                child = node.children[act] = TreeNode(act, depth, node)
            child.bag[case_id] = dur
            child._emd = None
            node = child
        node.ending.add(case_id)
        self.cases[case_id] = (tuple(activities), list(durations), start)

    def remove(self, case_id: str):
        """Take a case out of every node on its path; returns its stored record."""
        record = self.cases.pop(case_id)
        node = self.root
        path = []
        for act in record[0]:
            node = node.children[act]
            path.append(node)
        node.ending.discard(case_id)
        for node in reversed(path):
            del node.bag[case_id]
            node._emd = None
            if not node.bag:
                del node.parent.children[node.activity]
        return record

    def path(self, activities: Sequence[str]) -> list[TreeNode]:
        node, out = self.root, []
        for act in activities:
            node = node.children[act]
            out.append(node)
        return out

    def nodes(self) -> Iterator[TreeNode]:
        """Depth-first, most populated child first; the root is skipped."""
        stack = list(reversed(self.root.ordered_children()))
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.ordered_children()))

    def variant_counts(self) -> dict[tuple[str, ...], int]:
        counts: dict[tuple[str, ...], int] = {}
        for seq, _, _ in self.cases.values():
            counts[seq] = counts.get(seq, 0) + 1
        return counts


def build_prefix_tree(log: EventLog) -> PrefixTree:
    if not log.has_durations:
        log = event_durations(log)
    tree = PrefixTree()
    for t in log.traces:
        tree.insert(t.case_id, t.activities, t.durations, t.events[0].timestamp)
    return tree


def overall_bags(log: EventLog) -> dict[str, np.ndarray]:
    """Sorted durations of every event, per activity."""
    if not log.has_durations:
        log = event_durations(log)
    bags: dict[str, list[float]] = {}
    for t in log.traces:
        for e in t.events:
            bags.setdefault(e.activity, []).append(e.duration)
    return {a: np.sort(np.array(v, dtype=float)) for a, v in bags.items()}


def emd_normalized(p, q) -> float:
    """1-D earth mover's distance between two samples, divided by their joint range."""
    p = np.sort(np.asarray(p, dtype=float))
    q = np.sort(np.asarray(q, dtype=float))
    if p.size == 0 or q.size == 0:
        raise ValueError("earth mover's distance needs two nonempty samples")
    support = np.unique(np.concatenate([p, q]))
    span = support[-1] - support[0]
    if span == 0:
        return 0.0
    edges = support[:-1]
    cdf_p = np.searchsorted(p, edges, side="right") / p.size
    cdf_q = np.searchsorted(q, edges, side="right") / q.size
    emd = float(np.sum(np.abs(cdf_p - cdf_q) * np.diff(support)))
    return min(1.0, max(0.0, emd / span))


def _node_emd(node: TreeNode, overall: Mapping[str, np.ndarray]) -> float:
    if node._emd is None:
        node._emd = emd_normalized(overall[node.activity], list(node.bag.values()))
    return node._emd


def violates(node: TreeNode, params: PrivacyParams, overall: Mapping[str, np.ndarray]) -> bool:
    if len(node.bag) < params.k:
        return True
    # normalized EMD never exceeds 1
    if params.t_close >= 1.0:
        return False
    return _node_emd(node, overall) > params.t_close


def find_violation(tree: PrefixTree, params: PrivacyParams,
                   overall: Mapping[str, np.ndarray]) -> tuple[TreeNode, bool] | None:
    """First violation in depth-first order as ``(node, ends_only)``.

    ``ends_only`` marks a too-small group of cases ending at ``node``.
    """
    k = params.k
    check_t = params.t_close < 1.0
    stack = list(reversed(tree.root.ordered_children()))
    while stack:
        node = stack.pop()
        if len(node.bag) < k or (check_t and _node_emd(node, overall) > params.t_close):
            return node, False
        if 0 < len(node.ending) < k:
            return node, True
        children = node.children
        if len(children) == 1:
            stack.extend(children.values())
        elif children:
            stack.extend(reversed(node.ordered_children()))
    return None


def merge_trace(tree: PrefixTree, case_id: str, durations: Sequence[float],
                target: Sequence[str], start: datetime) -> list[float]:
    """Insert a case relabelled as ``target``; returns its new durations.

    Shared positions keep the case's own durations; positions it lacks take
    the median duration of the target node at that depth; surplus events
    are dropped.
    """
    target = tuple(target)
    path = tree.path(target)
    merged = []
    for i, node in enumerate(path):
        if i < len(durations):
            merged.append(durations[i])
        else:
            merged.append(round(statistics.median(node.bag.values()), 6))
    tree.insert(case_id, target, merged, start)
    return merged


@dataclass(frozen=True)
class Merge:
    source: tuple[str, ...]
    target: tuple[str, ...]
    distance: float
    traces: int


@dataclass
class AnonymizationReport:
    merges: list[Merge] = field(default_factory=list)
    truncated: int = 0
    dropped: int = 0
    iterations: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def merged_traces(self) -> int:
        return sum(m.traces for m in self.merges)


def _truncate_or_drop(tree, pulled, depth, params, input_variants, report):
    """Fallback when no case is left to merge into.

    Each case is cut back to its longest prefix that (a) is shorter than
    ``depth``, (b) is itself an input variant and (c) is shared by at least
    ``k`` of the pulled cases. Cases without such a prefix are dropped.
    """
    for cid, (seq, durs, start) in pulled.items():
        keep = 0
        for n in range(min(len(seq), depth - 1), 0, -1):
            prefix = seq[:n]
            if prefix in input_variants and sum(
                1 for s, _, _ in pulled.values() if s[:n] == prefix
            ) >= params.k:
                keep = n
                break
        if keep:
            tree.insert(cid, seq[:keep], durs[:keep], start)
            if keep < len(seq):
                report.truncated += 1
        else:
            report.dropped += 1


def anonymize(log: EventLog, params: PrivacyParams,
              measure: DistanceMeasure | None = None) -> tuple[EventLog, AnonymizationReport]:
    measure = measure or DistanceMeasure.levenshtein()
    if not log.has_durations:
        log = event_durations(log)
    report = AnonymizationReport()
    if len(log) < params.k:
        report.dropped = len(log)
        report.warnings.append(f"log has {len(log)} traces, fewer than k={params.k}")
        logger.warning(report.warnings[-1])
        return EventLog(()), report
    if measure.kind == "embedding" and not measure.model.covers(log.labels):
        raise ValueError("embedding model does not cover every activity of the log")

    tree = build_prefix_tree(log)
    overall = overall_bags(log)
    # candidate order for tie-breaks: first appearance in the input
    input_variants: dict[tuple[str, ...], int] = {}
    for t in log.traces:
        input_variants.setdefault(t.activities, len(input_variants))
    case_order = {t.case_id: i for i, t in enumerate(log.traces)}

    while True:
        hit = find_violation(tree, params, overall)
        if hit is None:
            break
        report.iterations += 1
        node, ends_only = hit
        ids = node.ending if ends_only else node.bag.keys()
        pulled = {cid: tree.remove(cid) for cid in sorted(ids, key=case_order.__getitem__)}

        remaining = tree.variant_counts()
        if not remaining:
            _truncate_or_drop(tree, pulled, node.depth + (1 if ends_only else 0),
                              params, input_variants, report)
            continue

        candidates = sorted(remaining, key=input_variants.__getitem__)
        counts = [remaining[c] for c in candidates]
        groups: dict[tuple[str, ...], list[str]] = {}
        for cid, (seq, _, _) in pulled.items():
            groups.setdefault(seq, []).append(cid)
        prepared = measure.prepare(candidates)
        for seq, cids in groups.items():
            best, dist = rank_candidates(seq, candidates, counts, measure, prepared)
            target = candidates[best]
            for cid in cids:
                _, durs, start = pulled[cid]
                merge_trace(tree, cid, durs, target, start)
            report.merges.append(Merge(seq, target, float(dist), len(cids)))

    traces = []
    for t in log.traces:
        if t.case_id in tree.cases:
            seq, durs, start = tree.cases[t.case_id]
            traces.append(trace_from_durations(t.case_id, seq, durs, start))
    return EventLog(tuple(traces)), report


def privacy_violations(anonymized: EventLog, params: PrivacyParams,
                       overall: Mapping[str, np.ndarray],
                       original: EventLog | None = None) -> list[str]:
    """Describe every way ``anonymized`` breaks the guarantees (empty if none).

    ``overall`` holds the reference duration samples per activity, normally
    :func:`overall_bags` of the original log. With ``original`` given, output
    variants absent from the original are reported too.
    """
    problems = []
    if not anonymized.traces:
        return problems
    tree = build_prefix_tree(anonymized)
    for node in tree.nodes():
        if len(node.bag) < params.k:
            problems.append(f"{node!r} holds fewer than k={params.k} traces")
        d = emd_normalized(overall[node.activity], list(node.bag.values()))
        if d > params.t_close:
            problems.append(f"{node!r} has EMD {d:.4f} > t={params.t_close}")
    for seq, n in tree.variant_counts().items():
        if n < params.k:
            problems.append(f"variant {seq} has {n} < k={params.k} traces")
    if original is not None:
        known = {t.activities for t in original.traces}
        for seq in tree.variant_counts():
            if seq not in known:
                problems.append(f"variant {seq} does not occur in the original log")
    return problems

"""Parameter sweep: anonymize a log over a (measure, k, t) grid and score each run."""
from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone

from logprivacy.distance import DistanceMeasure, Penalties
from logprivacy.embedding import EmbeddingModel, TrainConfig, train_act2vec
from logprivacy.eventlog import EventLog, event_durations, variants
from logprivacy.metrics import (
    behavioural_appropriateness,
    total_duration_error,
    truly_sampled_score,
)
from logprivacy.pretsa import (
    AnonymizationReport,
    PrivacyParams,
    anonymize,
    overall_bags,
    privacy_violations,
)

logger = logging.getLogger(__name__)

MEASURES = ("levenshtein", "embedding")


@dataclass
class SweepConfig:
    k_values: list[int] = field(default_factory=lambda: [2 ** i for i in range(1, 9)])
    t_values: list[float] = field(default_factory=lambda: [0.1, 0.25, 0.5, 0.75, 1.0])
    measures: list[str] = field(default_factory=lambda: list(MEASURES))
    train_config: TrainConfig = field(default_factory=TrainConfig)
    penalties: Penalties = field(default_factory=Penalties)
    flip: bool = False
    epsilon: float = 0.1
    jobs: int = 1

    def __post_init__(self):
        if not self.k_values or not self.t_values or not self.measures:
            raise ValueError("k_values, t_values and measures must be nonempty")
        for m in self.measures:
            if m not in MEASURES:
                raise ValueError(f"unknown measure {m!r}")

    @property
    def seed(self) -> int:
        return self.train_config.seed


@dataclass
class SweepRow:
    log: str
    measure: str
    k: int
    t_close: float
    behavioural_appropriateness: float | None = None
    truly_sampled_score: float | None = None
    total_duration_error: float | None = None
    merges: int = 0
    merged_traces: int = 0
    truncated: int = 0
    dropped: int = 0
    iterations: int = 0
    output_traces: int = 0
    output_variants: int = 0
    violations: int = 0
    error: str = ""
    wall_time: float = 0.0
    report: AnonymizationReport | None = field(default=None, repr=False, compare=False)


# wall_time is kept out of the results file so reruns are byte-identical;
# the full report is only available in memory
RESULT_COLUMNS = [f.name for f in fields(SweepRow) if f.name not in ("wall_time", "report")]


@dataclass
class SweepResult:
    rows: list[SweepRow]
    model: EmbeddingModel | None
    trained_at: str | None
    training_seconds: float


def _run_setting(log_name, log, measure, k, t_close, epsilon):
    row = SweepRow(log_name, measure.kind, k, t_close)
    start = time.perf_counter()
    try:
        params = PrivacyParams(k, t_close)
        out, report = anonymize(log, params, measure)
        row.report = report
        row.merges = len(report.merges)
        row.merged_traces = report.merged_traces
        row.truncated = report.truncated
        row.dropped = report.dropped
        row.iterations = report.iterations
        row.output_traces = len(out)
        row.output_variants = len(variants(out))
        # postcondition check on the output: guarantees plus no new variants
        row.violations = len(privacy_violations(out, params, overall_bags(log), original=log))
        row.behavioural_appropriateness = behavioural_appropriateness(log, out)
        row.truly_sampled_score = truly_sampled_score(log, out, epsilon)
        row.total_duration_error = total_duration_error(log, out)
    except Exception as exc:  # one bad setting must not sink the sweep
        logger.exception("setting %s k=%s t=%s failed", measure.kind, k, t_close)
        row.error = f"{type(exc).__name__}: {exc}"
    row.wall_time = time.perf_counter() - start
    return row


def _run_task(args):
    return _run_setting(*args)


def run_sweep(log: EventLog, config: SweepConfig = SweepConfig(), log_name: str = "log",
              model: EmbeddingModel | None = None) -> SweepResult:
    """Run every (measure, k, t) setting; rows come back in that order.

    The embedding model, when needed and not supplied, is trained once on the
    original log and shared by all settings.
    """
    log = event_durations(log)
    trained_at, training_seconds = None, 0.0
    if "embedding" in config.measures and model is None:
        trained_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        t0 = time.perf_counter()
        model = train_act2vec(log, config.train_config)
        training_seconds = time.perf_counter() - t0
        logger.info("embedding trained in %.2fs", training_seconds)

    tasks = []
    for name in config.measures:
        if name == "embedding":
            measure = DistanceMeasure.embedding(model, config.penalties, config.flip)
        else:
            measure = DistanceMeasure.levenshtein()
        for k in config.k_values:
            for t_close in config.t_values:
                tasks.append((log_name, log, measure, k, t_close, config.epsilon))

    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            rows = list(pool.map(_run_task, tasks))
    else:
        rows = []
        for task in tasks:
            rows.append(_run_task(task))
            r = rows[-1]
            logger.info("%s k=%d t=%.2f: %.2fs", r.measure, r.k, r.t_close, r.wall_time)
    order = {m: i for i, m in enumerate(config.measures)}
    rows.sort(key=lambda r: (order[r.measure], r.k, r.t_close))
    return SweepResult(rows, model, trained_at, training_seconds)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[SweepRow], columns=RESULT_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(getattr(r, c)) for c in columns])
    return buf.getvalue()


def timings_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["log", "measure", "k", "t_close", "wall_time"])
    if result.trained_at is not None:
        w.writerow([result.rows[0].log if result.rows else "", "embedding-training", "", "",
                    repr(result.training_seconds)])
    for r in result.rows:
        w.writerow([r.log, r.measure, r.k, repr(r.t_close), repr(r.wall_time)])
    if result.trained_at is not None:
        w.writerow(["# embedding trained at", result.trained_at, "", "", ""])
    return buf.getvalue()


def compare_measures(rows: list[SweepRow]) -> list[dict]:
    """Per (k, t): does the embedding measure keep at least the Levenshtein truly sampled score?"""
    by_key: dict[tuple, dict[str, SweepRow]] = {}
    for r in rows:
        by_key.setdefault((r.log, r.k, r.t_close), {})[r.measure] = r
    out = []
    for (log, k, t), pair in by_key.items():
        if "embedding" not in pair or "levenshtein" not in pair:
            continue
        emb, lev = pair["embedding"], pair["levenshtein"]
        if emb.truly_sampled_score is None or lev.truly_sampled_score is None:
            better = ""
        else:
            better = "yes" if emb.truly_sampled_score >= lev.truly_sampled_score else "no"
        out.append({
            "log": log, "k": k, "t_close": t,
            "embedding_tss": emb.truly_sampled_score, "levenshtein_tss": lev.truly_sampled_score,
            "embedding_ba": emb.behavioural_appropriateness,
            "levenshtein_ba": lev.behavioural_appropriateness,
            "embedding_tss_at_least_levenshtein": better,
        })
    return out


def comparison_to_csv(comparison: list[dict]) -> str:
    buf = io.StringIO()
    if not comparison:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(comparison[0]), lineterminator="\n")
    w.writeheader()
    for row in comparison:
        w.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values

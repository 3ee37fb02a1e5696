"""In-memory event logs: parsing, serialization, variants and statistics.

An event log is a set of traces; each trace is the timestamp-ordered list of
events sharing a case id. Logs are immutable once built. The per-event
duration (gap to the previous event of the same trace) is the sensitive
attribute used downstream and is filled in by :func:`event_durations`.
"""
from __future__ import annotations

import csv
import gzip
import io
import math
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from typing import Iterable, NamedTuple, Sequence


class LogError(ValueError):
    """Raised for malformed or inconsistent log data."""


class Activity(NamedTuple):
    label: str
    index: int


@dataclass(frozen=True)
class Event:
    case_id: str
    activity: str
    timestamp: datetime
    duration: float | None = None


@dataclass(frozen=True)
class Trace:
    case_id: str
    events: tuple[Event, ...]

    def __post_init__(self):
        if not self.events:
            raise LogError(f"trace {self.case_id!r} has no events")

    def __len__(self) -> int:
        return len(self.events)

    @property
    def activities(self) -> tuple[str, ...]:
        return tuple(e.activity for e in self.events)

    @property
    def durations(self) -> tuple[float, ...]:
        return tuple(e.duration for e in self.events)


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...] = ()
    activities: tuple[Activity, ...] = field(default=(), compare=False)

    def __post_init__(self):
        seen = set()
        for t in self.traces:
            if t.case_id in seen:
                raise LogError(f"duplicate case id {t.case_id!r}")
            seen.add(t.case_id)
        if not self.activities:
            labels: dict[str, int] = {}
            for t in self.traces:
                for e in t.events:
                    labels.setdefault(e.activity, len(labels))
            object.__setattr__(
                self, "activities", tuple(Activity(l, i) for l, i in labels.items())
            )

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a.label for a in self.activities)

    @property
    def activity_index(self) -> dict[str, int]:
        return {a.label: a.index for a in self.activities}

    @property
    def has_durations(self) -> bool:
        return all(e.duration is not None for t in self.traces for e in t.events)

    @classmethod
    def from_sequences(
        cls,
        sequences: Iterable[Sequence[str]],
        start: datetime | None = None,
        gaps: Iterable[Sequence[float]] | None = None,
    ) -> "EventLog":
        """Build a log from plain activity sequences.

        Case ids are ``"0", "1", ...``. Without ``gaps`` every event is one
        minute after its predecessor.
        """
        start = start or datetime(2020, 1, 1, tzinfo=timezone.utc)
        gaps = list(gaps) if gaps is not None else None
        traces = []
        for n, seq in enumerate(sequences):
            ts = start
            events = []
            for i, act in enumerate(seq):
                if i:
                    ts = ts + timedelta(seconds=gaps[n][i] if gaps else 60)
                events.append(Event(str(n), act, ts))
            traces.append(Trace(str(n), tuple(events)))
        return cls(tuple(traces))


class Variant(NamedTuple):
    sequence: tuple[str, ...]
    count: int


@dataclass(frozen=True)
class LogStats:
    cases: int
    variants: int
    avg_cases_per_variant: float
    max_cases_per_variant: int

    def row(self) -> str:
        return (
            f"{self.cases:,} & {self.variants:,} & "
            f"{self.avg_cases_per_variant:.1f} & {self.max_cases_per_variant:,}"
        )


# -- timestamps ---------------------------------------------------------------

_FRACTION = re.compile(r"\.(\d+)")


def parse_iso_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    # fromisoformat (3.10) wants exactly 3 or 6 fraction digits
    s = _FRACTION.sub(lambda m: "." + (m.group(1) + "000000")[:6], s, count=1)
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _format_timestamp(ts: datetime) -> str:
    return ts.isoformat(timespec="microseconds")


def _sorted_events(events: list[Event]) -> tuple[Event, ...]:
    # list.sort is stable: equal timestamps keep input order
    return tuple(sorted(events, key=lambda e: e.timestamp))


# -- XES ----------------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attr(elem: ET.Element, key: str) -> str | None:
    for child in elem:
        if child.get("key") == key:
            return child.get("value")
    return None


def parse_xes(data: bytes) -> EventLog:
    """Parse an XES document (optionally gzip-compressed).

    Only ``concept:name`` and ``time:timestamp`` are read; other attributes,
    extensions, globals and classifiers are ignored.
    """
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise LogError(f"malformed XES at line {line}, column {col}: {exc}") from None
    if _local(root.tag) != "log":
        raise LogError(f"expected <log> root element, got <{_local(root.tag)}>")

    traces = []
    for n, trace_el in enumerate(el for el in root if _local(el.tag) == "trace"):
        case_id = _attr(trace_el, "concept:name")
        if case_id is None:
            raise LogError(f"trace #{n} has no concept:name")
        events = []
        for m, ev in enumerate(el for el in trace_el if _local(el.tag) == "event"):
            act = _attr(ev, "concept:name")
            ts = _attr(ev, "time:timestamp")
            if act is None or ts is None:
                missing = "concept:name" if act is None else "time:timestamp"
                raise LogError(f"event #{m} of trace {case_id!r} lacks {missing}")
            try:
                events.append(Event(case_id, act, parse_iso_timestamp(ts)))
            except ValueError:
                raise LogError(
                    f"bad timestamp {ts!r} in event #{m} of trace {case_id!r}"
                ) from None
        if not events:
            raise LogError(f"trace {case_id!r} has no events")
        traces.append(Trace(case_id, _sorted_events(events)))
    return EventLog(tuple(traces))


def write_xes(log: EventLog) -> bytes:
    root = ET.Element("log", {"xes.version": "1.0", "xmlns": "http://www.xes-standard.org/"})
    ET.SubElement(root, "extension", {"name": "Concept", "prefix": "concept",
                                      "uri": "http://www.xes-standard.org/concept.xesext"})
    ET.SubElement(root, "extension", {"name": "Time", "prefix": "time",
                                      "uri": "http://www.xes-standard.org/time.xesext"})
    for t in log.traces:
        tr = ET.SubElement(root, "trace")
        ET.SubElement(tr, "string", {"key": "concept:name", "value": t.case_id})
        for e in t.events:
            ev = ET.SubElement(tr, "event")
            ET.SubElement(ev, "string", {"key": "concept:name", "value": e.activity})
            ET.SubElement(ev, "date", {"key": "time:timestamp",
                                       "value": _format_timestamp(e.timestamp)})
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


# -- CSV ----------------------------------------------------------------------


@dataclass(frozen=True)
class CsvColumns:
    """Column mapping for CSV logs.

    ``timestamp_format`` is a :func:`datetime.strptime` pattern (``%Y``,
    ``%m``, ``%d``, ``%H``, ``%M``, ``%S``, ``%f``, ``%z``, ...). ``None``
    means ISO-8601. Timestamps without a zone are read as UTC.
    """

    case: str = "case"
    activity: str = "activity"
    timestamp: str = "timestamp"
    timestamp_format: str | None = None


def parse_csv(data: bytes, columns: CsvColumns = CsvColumns()) -> EventLog:
    text = data.decode("utf-8-sig")
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise LogError("CSV has no header row")
    for col in (columns.case, columns.activity, columns.timestamp):
        if col not in reader.fieldnames:
            raise LogError(f"CSV column {col!r} not found (have {reader.fieldnames})")

    grouped: dict[str, list[Event]] = {}
    for rownum, row in enumerate(reader, start=2):
        raw = row[columns.timestamp]
        try:
            if columns.timestamp_format is None:
                ts = parse_iso_timestamp(raw)
            else:
                ts = datetime.strptime(raw.strip(), columns.timestamp_format)
                if ts.tzinfo is None:
                    ts = ts.replace(tzinfo=timezone.utc)
        except (ValueError, TypeError):
            raise LogError(f"row {rownum}: cannot parse timestamp {raw!r}") from None
        case = row[columns.case]
        grouped.setdefault(case, []).append(Event(case, row[columns.activity], ts))
    return EventLog(tuple(Trace(c, _sorted_events(evs)) for c, evs in grouped.items()))


def write_csv(log: EventLog) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "activity", "timestamp"])
    for t in log.traces:
        for e in t.events:
            w.writerow([t.case_id, e.activity, _format_timestamp(e.timestamp)])
    return buf.getvalue().encode("utf-8")


def read_log(path, columns: CsvColumns = CsvColumns()) -> EventLog:
    """Load a log from disk, picking the format from the file name."""
    path = str(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if path.endswith((".csv", ".csv.gz")):
        if data[:2] == b"\x1f\x8b":
            data = gzip.decompress(data)
        return parse_csv(data, columns)
    return parse_xes(data)


def write_log(log: EventLog, path) -> None:
    path = str(path)
    data = write_csv(log) if path.endswith(".csv") else write_xes(log)
    if path.endswith(".gz"):
        data = gzip.compress(data, mtime=0)
    with open(path, "wb") as fh:
        fh.write(data)


# -- derived views ------------------------------------------------------------


def variants(log: EventLog) -> list[Variant]:
    counts = Counter(t.activities for t in log.traces)
    return [Variant(seq, c) for seq, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


def log_stats(log: EventLog) -> LogStats:
    if not log.traces:
        raise LogError("statistics of an empty log are undefined")
    vs = variants(log)
    return LogStats(
        cases=len(log),
        variants=len(vs),
        avg_cases_per_variant=len(log) / len(vs),
        max_cases_per_variant=vs[0].count,
    )


def event_durations(log: EventLog) -> EventLog:
    """Annotate every event with the seconds elapsed since its predecessor.

    The first event of each trace gets duration 0.
    """
    traces = []
    for t in log.traces:
        prev = t.events[0].timestamp
        events = []
        for e in t.events:
            events.append(replace(e, duration=(e.timestamp - prev).total_seconds()))
            prev = e.timestamp
        traces.append(Trace(t.case_id, tuple(events)))
    return EventLog(tuple(traces), log.activities)


def trace_from_durations(
    case_id: str, activities: Sequence[str], durations: Sequence[float], start: datetime
) -> Trace:
    """Rebuild a trace whose timestamps reproduce the given durations."""
    ts = start
    events = []
    for i, (act, d) in enumerate(zip(activities, durations)):
        if i:
            ts = ts + timedelta(seconds=d)
        events.append(Event(case_id, act, ts, 0.0 if i == 0 else float(d)))
    return Trace(case_id, tuple(events))


def total_duration(log: EventLog) -> float:
    return math.fsum(
        (t.events[-1].timestamp - t.events[0].timestamp).total_seconds() for t in log.traces
    )

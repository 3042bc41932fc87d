"""Event logs: reading and writing, prefix extraction, noise, simulation."""

from __future__ import annotations

import csv
import io
import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from .errors import LogFormatError

NOISE_OPS = ("insert", "delete", "swap")


@dataclass(frozen=True)
class Trace:
    case_id: str
    events: tuple
    timestamps: tuple | None = None
    next_activity: str | None = None  # held-out activity after a prefix
    true_state: tuple | None = None  # marking the case is really in (simulated logs)
    states: tuple | None = None  # vertex after each event (simulated logs)
    complete: bool = True  # False when a simulation hit max_len

    def __len__(self):
        return len(self.events)


@dataclass(frozen=True)
class EventLog:
    traces: tuple
    dropped: int = 0  # cases discarded by the operation that produced this log

    def __len__(self):
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    @property
    def alphabet(self) -> frozenset:
        return frozenset(a for t in self.traces for a in t.events)


@dataclass(frozen=True)
class NoiseSpec:
    operations_per_case: int
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.operations_per_case <= 3:
            raise ValueError("operations_per_case must be in 0..3")


# -- reading / writing --------------------------------------------------------


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 timestamp; naive values are taken as UTC."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _build(rows):
    # rows: (case, activity, timestamp or None, input order)
    cases = {}
    for row in rows:
        cases.setdefault(row[0], []).append(row)
    traces = []
    for case, evs in cases.items():
        if all(e[2] is not None for e in evs):
            evs.sort(key=lambda e: (e[2], e[3]))
            ts = tuple(e[2] for e in evs)
        else:
            ts = None
        traces.append(Trace(case, tuple(e[1] for e in evs), ts))
    return EventLog(tuple(traces))


def read_log(data, format: str = "csv", lifecycle_filter: bool = True) -> EventLog:
    """Read a csv (case_id, activity, timestamp[, lifecycle]) or XES-subset log.

    Events of a case are sorted by timestamp, ties keep input order. With
    ``lifecycle_filter`` only completion events are kept when lifecycle
    information is present.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    if format == "csv":
        return _read_csv(data, lifecycle_filter)
    if format in ("xes", "xes-subset"):
        return _read_xes(data, lifecycle_filter)
    raise ValueError(f"unsupported log format {format!r}")


def _read_csv(text, lifecycle_filter):
    reader = csv.DictReader(io.StringIO(text))
    cols = reader.fieldnames or []
    missing = [c for c in ("case_id", "activity", "timestamp") if c not in cols]
    if missing:
        raise LogFormatError(f"csv log is missing column(s) {missing}")
    has_life = "lifecycle" in cols
    rows = []
    for i, rec in enumerate(reader):
        line = i + 2
        if has_life and lifecycle_filter and (rec["lifecycle"] or "").strip().lower() not in ("", "complete"):
            continue
        act = rec["activity"]
        if not act:
            raise LogFormatError(f"row {line}: empty activity")
        raw = (rec["timestamp"] or "").strip()
        try:
            ts = parse_timestamp(raw) if raw else None
        except ValueError:
            raise LogFormatError(f"row {line}: unparseable timestamp {raw!r}") from None
        rows.append((rec["case_id"], act, ts, i))
    return _build(rows)


def _read_xes(text, lifecycle_filter):
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise LogFormatError(f"malformed XES: {exc}") from None

    def attrs(el):
        out = {}
        for child in el:
            key = child.get("key")
            if key is not None:
                out[key] = child.get("value")
        return out

    rows = []
    order = 0
    for ti, trace in enumerate(x for x in root if x.tag.rsplit("}", 1)[-1] == "trace"):
        case = attrs(trace).get("concept:name", f"trace_{ti}")
        for ev in (x for x in trace if x.tag.rsplit("}", 1)[-1] == "event"):
            a = attrs(ev)
            order += 1
            if lifecycle_filter and a.get("lifecycle:transition", "complete").lower() != "complete":
                continue
            if not a.get("concept:name"):
                raise LogFormatError(f"event {order} of trace {case!r} has no concept:name")
            raw = a.get("time:timestamp")
            try:
                ts = parse_timestamp(raw) if raw else None
            except ValueError:
                raise LogFormatError(f"event {order}: unparseable timestamp {raw!r}") from None
            rows.append((case, a["concept:name"], ts, order))
    return _build(rows)


def write_log(log: EventLog) -> bytes:
    """csv with columns case_id, activity, timestamp (empty when unknown)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case_id", "activity", "timestamp"])
    for t in log.traces:
        for i, a in enumerate(t.events):
            ts = t.timestamps[i].isoformat() if t.timestamps else ""
            w.writerow([t.case_id, a, ts])
    return buf.getvalue().encode("utf-8")


# -- prefixes and noise -------------------------------------------------------


def make_prefixes(log: EventLog, min_len: int = 3, seed: int = 0) -> EventLog:
    """Cut every case at a uniform length in ``[min_len, len(case)]``.

    The event after the cut is kept as ``next_activity`` (None when the whole
    case was kept). Cases shorter than ``min_len`` are dropped and counted.
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    rng = random.Random(seed)
    out = []
    dropped = 0
    for t in log.traces:
        if len(t.events) < min_len:
            dropped += 1
            continue
        m = rng.randint(min_len, len(t.events))
        nxt = t.events[m] if m < len(t.events) else None
        out.append(
            replace(
                t,
                events=t.events[:m],
                timestamps=t.timestamps[:m] if t.timestamps else None,
                next_activity=nxt,
                states=t.states[:m] if t.states else None,
                true_state=t.states[m - 1] if t.states else t.true_state,
            )
        )
    return EventLog(tuple(out), dropped)


def _apply_op(rng, events, alphabet, ops):
    while True:
        op = rng.choice(ops)
        if op == "insert":
            pos = rng.randint(0, len(events))
            return events[:pos] + [rng.choice(alphabet)] + events[pos:]
        if op == "delete" and len(events) >= 2:
            pos = rng.randrange(len(events))
            return events[:pos] + events[pos + 1 :]
        if op == "swap":
            spots = [i for i in range(len(events) - 1) if events[i] != events[i + 1]]
            if spots:
                i = rng.choice(spots)
                events = list(events)
                events[i], events[i + 1] = events[i + 1], events[i]
                return events
        # operation not applicable to this trace: draw again


def inject_noise(log: EventLog, spec: NoiseSpec, alphabet=None) -> EventLog:
    """Apply ``spec.operations_per_case`` random edits to every case.

    Each edit is drawn uniformly from insert (a random activity of
    ``alphabet``, by default the log's own, at a random position), delete (a
    random event) and swap (two different consecutive events). An edit that
    cannot apply, such as a swap on a trace of identical events, is redrawn.
    """
    if spec.operations_per_case == 0:
        return log
    rng = random.Random(spec.seed)
    alpha = sorted(alphabet if alphabet is not None else log.alphabet)
    if not alpha:
        raise ValueError("empty alphabet for insert noise")
    out = []
    for t in log.traces:
        if len(t.events) < 3:
            raise ValueError(f"case {t.case_id!r} has {len(t.events)} events; noise needs at least 3")
        ev = list(t.events)
        for _ in range(spec.operations_per_case):
            ev = _apply_op(rng, ev, alpha, NOISE_OPS)
        out.append(replace(t, events=tuple(ev), timestamps=None, states=None))
    return EventLog(tuple(out), log.dropped)


# -- simulation ---------------------------------------------------------------


def simulate_log(graph, n_cases: int, seed: int = 0, max_len: int = 200) -> EventLog:
    """Uniform random walks over ``graph`` from its initial vertex.

    A walk stops at a vertex without outgoing edges; walks reaching
    ``max_len`` events are kept with ``complete=False``. The vertex after each
    event is recorded in ``states``.
    """
    rng = random.Random(seed)
    out_edges = {v: sorted(graph.out_edges(v)) for v in graph.vertices}
    traces = []
    for i in range(n_cases):
        v = graph.initial
        events, states = [], []
        while out_edges[v] and len(events) < max_len:
            a, v = rng.choice(out_edges[v])
            events.append(a)
            states.append(v)
        traces.append(
            Trace(
                f"case_{i}",
                tuple(events),
                states=tuple(states),
                true_state=v,
                complete=not out_edges[v],
            )
        )
    return EventLog(tuple(traces))

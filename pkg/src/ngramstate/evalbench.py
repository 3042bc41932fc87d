"""Accuracy evaluation and throughput benchmark.

Accuracy follows a simple protocol. Simulate a log on the model, cut every
case at a random length of at least three events, optionally add noise, and
compute the state of each prefix. A case counts as correct when that state
enables the activity that actually came next.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .errors import StateSpaceExceeded
from .fixtures import get_fixture
from .index import build_index
from .logio import NoiseSpec, inject_noise, make_prefixes, simulate_log
from .net import WorkflowNet, normalize_mixed_xor_splits
from .query import compute_state, next_enabled_activities
from .reach import build_complete_reach_graph_oracle, build_reach_graph
from .replay import token_replay

REPLAY = "TokenR"


@dataclass
class AccuracyReport:
    model: str
    noise: int
    total: int  # cases with a known next activity
    correct: dict = field(default_factory=dict)  # method -> correct cases

    @property
    def ratios(self) -> dict:
        return {m: (c / self.total if self.total else 1.0) for m, c in self.correct.items()}

    def as_dict(self):
        d = asdict(self)
        d["ratios"] = self.ratios
        return d


class _Enabled:
    """Memoized next-enabled sets per marking."""

    def __init__(self, net):
        self.net = net
        self.cache = {}

    def __call__(self, m):
        s = self.cache.get(m)
        if s is None:
            s = self.cache[m] = next_enabled_activities(self.net, m)
        return s


def accuracy(net: WorkflowNet, markings, log, valid=None, enabled=None) -> tuple:
    """(correct, total) over cases of ``log`` that have a next activity.

    ``markings[i]`` is the state computed for ``log.traces[i]``; ``valid[i]``
    (optional) marks states that are usable at all, e.g. reachable ones.
    """
    enabled = enabled or _Enabled(net)
    correct = total = 0
    for i, t in enumerate(log.traces):
        if t.next_activity is None:
            continue
        total += 1
        if valid is not None and not valid[i]:
            continue
        if t.next_activity in enabled(markings[i]):
            correct += 1
    return correct, total


def _prepare(model):
    if isinstance(model, str):
        return model, normalize_mixed_xor_splits(get_fixture(model))
    return "model", normalize_mixed_xor_splits(model)


def run_eval(
    model,
    ns=(3, 5, 10),
    noise_levels=(0, 1, 2, 3),
    n_cases: int = 1000,
    seed: int = 0,
    selector: str = "lex",
    replay: bool = True,
    oracle_cap: int = 200_000,
) -> list:
    """Accuracy of n-gram state computation (and the replay baseline) per noise level."""
    name, net = _prepare(model)
    graph = build_reach_graph(net)
    try:
        reachable = build_complete_reach_graph_oracle(net, oracle_cap).vertices
    except StateSpaceExceeded:
        reachable = None
    log = simulate_log(graph, n_cases, seed=seed)
    prefixes = make_prefixes(log, min_len=3, seed=seed + 1)
    indexes = {n: build_index(graph, n) for n in ns}
    enabled = _Enabled(net)
    reports = []
    for k in noise_levels:
        noisy = inject_noise(prefixes, NoiseSpec(k, seed + 100 + k))
        report = AccuracyReport(name, k, 0)
        for n in ns:
            idx = indexes[n]
            ms = [compute_state(idx, t.events, selector=selector, seed=seed + i).chosen for i, t in enumerate(noisy.traces)]
            report.correct[f"{n}-gram"], report.total = accuracy(net, ms, noisy, enabled=enabled)
        if replay:
            results = [token_replay(net, t.events, reachable) for t in noisy.traces]
            valid = [r.reachable if r.reachable is not None else r.is_safe for r in results]
            ms = [r.marking if v else () for r, v in zip(results, valid)]
            report.correct[REPLAY], report.total = accuracy(net, ms, noisy, valid, enabled)
        reports.append(report)
    return reports


# -- throughput ---------------------------------------------------------------


@dataclass
class BenchReport:
    model: str
    n: int
    graph_vertices: int
    index_entries: int
    graph_build_s: float
    index_build_s: float
    queries: int
    mean_s: float
    median_s: float
    p99_s: float
    cases_per_s: float
    per_worker: dict = field(default_factory=dict)  # workers -> aggregate cases/s

    def as_dict(self):
        return asdict(self)


def _timed_queries(index, prefixes, count):
    lat = []
    clock = time.perf_counter
    k = len(prefixes)
    t0 = clock()
    for i in range(count):
        p = prefixes[i % k]
        s = clock()
        compute_state(index, p)
        lat.append(clock() - s)
    return lat, clock() - t0


def _worker(args):
    index, prefixes, count = args
    for p in prefixes[: min(len(prefixes), 1000)]:
        compute_state(index, p)
    _, wall = _timed_queries(index, prefixes, count)
    return count, wall


def bench(
    model,
    n: int = 3,
    n_cases: int = 1000,
    seed: int = 0,
    min_queries: int = 100_000,
    workers=(1,),
    log=None,
) -> BenchReport:
    """Offline build times and online per-case latency of ``compute_state``.

    One untimed pass over the prefixes warms caches, then at least
    ``min_queries`` queries are timed, cycling the prefixes. With worker
    counts other than 1 the timed phase is repeated in that many processes
    sharing nothing but a copy of the immutable index.
    """
    name, net = _prepare(model)
    t0 = time.perf_counter()
    graph = build_reach_graph(net)
    t1 = time.perf_counter()
    index = build_index(graph, n)
    t2 = time.perf_counter()
    if log is None:
        log = make_prefixes(simulate_log(graph, n_cases, seed=seed), min_len=3, seed=seed + 1)
    prefixes = [t.events for t in log.traces] or [()]
    for p in prefixes:
        compute_state(index, p)
    count = max(min_queries, len(prefixes))
    lat, wall = _timed_queries(index, prefixes, count)
    lat.sort()
    report = BenchReport(
        model=name,
        n=n,
        graph_vertices=len(graph.vertices),
        index_entries=len(index),
        graph_build_s=t1 - t0,
        index_build_s=t2 - t1,
        queries=count,
        mean_s=statistics.fmean(lat),
        median_s=lat[len(lat) // 2],
        p99_s=lat[min(len(lat) - 1, int(len(lat) * 0.99))],
        cases_per_s=count / wall,
    )
    for w in workers:
        if w == 1:
            report.per_worker[1] = report.cases_per_s
            continue
        share = max(1, count // w)
        start = time.perf_counter()
        with ProcessPoolExecutor(max_workers=w) as pool:
            done = sum(c for c, _ in pool.map(_worker, [(index, prefixes, share)] * w))
        report.per_worker[w] = done / (time.perf_counter() - start)
    return report

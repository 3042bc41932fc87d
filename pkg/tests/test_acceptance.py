"""Acceptance criteria, one test per criterion.

Every test records a ``PASS``/``FAIL`` line (printed in the pytest terminal
summary, or by running this file directly). Tolerances are pinned here.

Criterion 1 compares against the index table exactly as printed. That table
contradicts its own model (see ``published_tables``), so the literal check is an
expected failure; the corrected table is checked as 1b.
"""

import math
import time

import pytest
from oracles import graph_language, observable_language, path_targets, walks
from published_tables import CORRECTED, PRINTED, index_as_names

from ngramstate import (
    build_complete_reach_graph_oracle,
    build_index,
    build_reach_graph,
    compute_state,
    estimate_k_complexity,
    fire,
    next_enabled_activities,
    simulate_log,
    token_replay,
)
from ngramstate.evalbench import REPLAY, bench, run_eval
from ngramstate.fixtures import (
    RUNNING_EXAMPLE_FIRINGS,
    SYNTHETIC,
    SYNTHETIC_K,
    ambiguous_example,
    policy_example,
    random_sound_net,
    running_example,
)

RESULTS = []

SEED = 2024
N_CASES = 1000
NS = (3, 5, 10)
NOISE_GAP = 0.2  # criterion 5: n-gram minus replay, absolute
K10_N3_CEILING = 0.9  # criterion 4: raw K10 accuracy with 3-grams must stay below
MIN_CASES_PER_S = 10_000  # criterion 7
THROUGHPUT_QUERIES = 100_000


def record(cid, ok, detail, status=None):
    RESULTS.append(f"{cid:4s} {status or ('PASS' if ok else 'FAIL')}  {detail}")
    return ok


@pytest.fixture(scope="module")
def evaluation():
    start = time.perf_counter()
    out = {name: run_eval(name, ns=NS, noise_levels=(0, 1, 2, 3), n_cases=N_CASES, seed=SEED) for name in SYNTHETIC}
    return out, time.perf_counter() - start


@pytest.mark.xfail(strict=True, reason="printed table lists wrong values for grams ending in 'Register payment'")
def test_c1_index_table_as_published():
    start = time.perf_counter()
    idx = build_index(build_reach_graph(running_example()), 3)
    got = index_as_names(idx)
    elapsed = time.perf_counter() - start
    differ = sorted(g for g in set(got) | set(PRINTED) if got.get(g) != PRINTED.get(g))
    ok = got == PRINTED and elapsed < 1.0
    record(
        "C1",
        ok,
        f"3-gram index vs table as printed: {len(got)} grams built, {len(PRINTED)} printed, "
        f"{len(differ)} grams differ (all end in 'Register payment'); {elapsed:.3f}s",
    )
    assert ok


def test_c1b_index_table_corrected():
    start = time.perf_counter()
    idx = build_index(build_reach_graph(running_example()), 3)
    got = index_as_names(idx)
    elapsed = time.perf_counter() - start
    no_ship_2gram = not any(len(g) > 1 and g[-1] == "Ship order" for g in got)
    ok = got == CORRECTED and no_ship_2gram and elapsed < 1.0
    record("C1b", ok, f"3-gram index == corrected table ({len(got)} grams), no 2-gram ends in Ship order; {elapsed:.3f}s")
    assert ok


def test_c2_running_firing_markings():
    from test_net import RUNNING_MARKINGS

    start = time.perf_counter()
    net = running_example()
    m = net.initial_marking
    seen = [net.marking_names(m)]
    for t in RUNNING_EXAMPLE_FIRINGS:
        m = fire(net, m, t)
        seen.append(net.marking_names(m))
    elapsed = time.perf_counter() - start
    ok = seen == RUNNING_MARKINGS and len(seen) == 12 and elapsed < 1.0
    record("C2", ok, f"{len(seen)} markings reproduced in order; {elapsed:.4f}s")
    assert ok


def test_c3_worked_query():
    net = running_example()
    idx = build_index(build_reach_graph(net), 3)
    ans = compute_state(idx, ["Register order", "Issue invoice", "Check stock", "Collect from stock"])
    enabled = next_enabled_activities(net, ans.chosen)
    ok = (
        net.marking_names(ans.chosen) == ("8", "10")
        and ans.gram_len_used == 3
        and enabled == {"Register payment", "Ship order"}
    )
    record("C3", ok, f"state {net.format_marking(ans.chosen)} at gram length {ans.gram_len_used}; enables {sorted(enabled)}")
    assert ok


def test_c4_raw_accuracy(evaluation):
    results, elapsed = evaluation
    bad = []
    cells = []
    for name, reps in results.items():
        raw = reps[0].ratios
        for n in NS:
            r = raw[f"{n}-gram"]
            cells.append(f"{name}/{n}={r:.2f}")
            if SYNTHETIC_K[name] <= n and r != 1.0:
                bad.append((name, n, r))
    k10 = results["K10"][0].ratios["3-gram"]
    ok = not bad and k10 < K10_N3_CEILING and elapsed < 120
    record("C4", ok, f"raw accuracy 1.00 where K<=n ({'ok' if not bad else bad}); K10 3-gram {k10:.2f} < {K10_N3_CEILING}; eval {elapsed:.1f}s")
    RESULTS.append("       " + " ".join(cells))
    assert ok


def test_c5_noise_dominance(evaluation):
    results, _ = evaluation
    worst = (math.inf, None)
    for name, reps in results.items():
        for rep in reps[1:]:
            rr = rep.ratios
            for n in NS:
                gap = rr[f"{n}-gram"] - rr[REPLAY]
                if gap < worst[0]:
                    worst = (gap, f"{name} noise-{rep.noise} {n}-gram {rr[f'{n}-gram']:.2f} vs replay {rr[REPLAY]:.2f}")
    ok = worst[0] >= NOISE_GAP
    record("C5", ok, f"smallest n-gram minus replay gap {worst[0]:.2f} >= {NOISE_GAP} ({worst[1]})")
    assert ok


def test_ngram_accuracy_non_increasing_in_noise(evaluation):
    # replay is exempt: at noise 1 it is already near zero, and two edits can cancel
    results, _ = evaluation
    for name, reps in results.items():
        for n in NS:
            vals = [r.ratios[f"{n}-gram"] for r in reps]
            assert all(a >= b for a, b in zip(vals, vals[1:])), (name, n, vals)


def test_c6_unreachable_markings():
    net = running_example()
    reach = build_complete_reach_graph_oracle(net).vertices
    r = token_replay(net, ["Register order", "Check stock", "Collect from stock", "Register payment"], reach)
    larger = r.reachable is False and all(len(r.marking) > len(m) for m in reach)
    inv = ambiguous_example()
    inv_reach = build_complete_reach_graph_oracle(inv).vertices
    log = simulate_log(build_reach_graph(inv), N_CASES, seed=SEED)
    bad = sum(not token_replay(inv, t.events, inv_reach).reachable for t in log.traces)
    ok = larger and bad >= 1
    record(
        "C6",
        ok,
        f"non-fitting prefix -> {net.format_marking(r.marking)} (unreachable, larger than every reachable marking); "
        f"invoice net: {bad}/{N_CASES} fitting cases end unreachable ({100 * bad / N_CASES:.1f}%)",
    )
    assert ok


def test_c7_throughput():
    rep = bench("K5", n=5, n_cases=N_CASES, seed=SEED, min_queries=THROUGHPUT_QUERIES)
    ok = rep.cases_per_s >= MIN_CASES_PER_S
    record(
        "C7",
        ok,
        f"{rep.cases_per_s:,.0f} cases/s single worker over {rep.queries:,} queries "
        f"(mean {rep.mean_s * 1e6:.1f}us, p99 {rep.p99_s * 1e6:.1f}us); threshold {MIN_CASES_PER_S:,}",
    )
    assert ok


def test_c8_oracle_equivalence():
    start = time.perf_counter()
    nets = {name: make() for name, make in SYNTHETIC.items()}
    nets.update({f"random-{s}": random_sound_net(s) for s in range(50)})
    problems = []
    checked_walks = 0
    for name, net in nets.items():
        g = build_reach_graph(net)
        depth = 6 if name == "K10" else 8
        if graph_language(g, depth) != observable_language(net, depth):
            problems.append(f"{name}: language")
        n = 3 if name == "K10" else 4
        full = build_index(g, n, prune=False)
        if {k: set(v) for k, v in full.grams()} != {k: set(v) for k, v in path_targets(g, n).items()}:
            problems.append(f"{name}: unpruned index")
        k = estimate_k_complexity(g)
        if k.finite and k.value <= max(NS):
            n = min(x for x in NS if x >= k.value)
            idx = build_index(g, n)
            cases = walks(g, 8 if name == "K10" else 12)
            if name == "K10":
                sim = simulate_log(g, N_CASES, seed=SEED)
                cases |= {(t.events[:j], t.states[j - 1]) for t in sim.traces for j in range(1, len(t.events) + 1)}
            for seq, end in cases:
                checked_walks += 1
                if compute_state(idx, seq).chosen != end:
                    problems.append(f"{name}: walk {seq}")
                    break
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 300
    record("C8", ok, f"{len(nets)} nets, {checked_walks:,} fitting walks checked, problems: {problems or 'none'}; {elapsed:.1f}s")
    assert ok


def test_c9_policy_economy():
    net = policy_example()
    sizes = {p: len(build_reach_graph(net, p).vertices) for p in ("mixed", "eager", "lazy")}
    ok = sizes["mixed"] < sizes["eager"] and sizes["mixed"] < sizes["lazy"]
    record("C9", ok, f"vertices mixed={sizes['mixed']} eager={sizes['eager']} lazy={sizes['lazy']}")
    assert ok


def test_c10_out_of_scope():
    record("C10", True, "full-scale real-life log results are out of scope (not run)", status="SKIP")
    pytest.skip("full-scale real-life log results are out of scope")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-rN"]))

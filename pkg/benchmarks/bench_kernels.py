"""Throughput of the batch query backends: numba, numpy and scalar python.

    python3 benchmarks/bench_kernels.py [--fixture K10] [--n 10] [--cases 1000] [--repeat 5]

Numba compilation happens in a warm-up call and is not timed. Each backend
answers the same prefix batch; results are checked for equality first.
"""

import argparse
import statistics
import time

from ngramstate import build_index, build_reach_graph, make_prefixes, simulate_log
from ngramstate._kernels import HAVE_NUMBA, batch_query, encode_index
from ngramstate.fixtures import get_fixture


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", default="K10")
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--cases", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    graph = build_reach_graph(get_fixture(args.fixture))
    t0 = time.perf_counter()
    index = build_index(graph, args.n)
    print(f"{args.fixture} n={args.n}: {len(index.entries):,} entries, index built in {time.perf_counter() - t0:.2f}s")
    log = make_prefixes(simulate_log(graph, args.cases, seed=args.seed), seed=args.seed + 1)
    prefixes = [t.events for t in log.traces]
    enc = encode_index(index)

    backends = ["numpy", "python"]
    if HAVE_NUMBA:
        backends.insert(0, "numba")
        t0 = time.perf_counter()
        batch_query(index, prefixes[:2], backend="numba", encoded=enc)
        print(f"numba warm-up (compile or cache load): {time.perf_counter() - t0:.2f}s")
    else:
        print("numba not importable; skipping that backend")

    reference = None
    for backend in backends:
        out = batch_query(index, prefixes, backend=backend, encoded=enc)
        if reference is None:
            reference = out
        elif out != reference:
            raise SystemExit(f"{backend} disagrees with {backends[0]}")
        times = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            batch_query(index, prefixes, backend=backend, encoded=enc)
            times.append(time.perf_counter() - t0)
        best = min(times)
        print(
            f"{backend:>6}: {len(prefixes) / best:>12,.0f} cases/s "
            f"(best {best * 1e3:.2f}ms, median {statistics.median(times) * 1e3:.2f}ms, {len(prefixes)} cases)"
        )


if __name__ == "__main__":
    main()

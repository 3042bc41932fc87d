"""Command line: build, query, eval, bench."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .errors import NgramStateError
from .fixtures import NAMED, SYNTHETIC, get_fixture
from .index import DEFAULT_CAP_ENTRIES, build_index, deserialize_index, estimate_k_complexity, serialize_index
from .logio import read_log
from .net import load_net, normalize_mixed_xor_splits
from .query import SELECTORS, compute_state
from .reach import build_reach_graph


def _load_model(args):
    if getattr(args, "model", None):
        net = load_net(args.model)
    else:
        net = get_fixture(args.fixture or "running")
    return normalize_mixed_xor_splits(net)


def _emit(args, rows, columns):
    if args.format == "jsonl":
        for r in rows:
            print(json.dumps(r, sort_keys=True, ensure_ascii=False))
        return
    widths = [max(len(c), *(len(_cell(r.get(c))) for r in rows)) for c in columns]
    print("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip())
    for r in rows:
        print("  ".join(_cell(r.get(c)).ljust(w) for c, w in zip(columns, widths)).rstrip())


def _cell(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return f"{v:.2f}" if v <= 1.0 else f"{v:.4g}"
    return "" if v is None else str(v)


def _names(index, m):
    return [index.place_names[p] for p in m] if index.place_names else list(m)


def cmd_build(args):
    net = _load_model(args)
    graph = build_reach_graph(net)
    index = build_index(graph, args.n, prune=not args.no_prune, cap_entries=args.cap_entries)
    if args.out:
        Path(args.out).write_bytes(serialize_index(index))
    if args.graph_dot:
        Path(args.graph_dot).write_text(graph.to_dot())
    if args.dump:
        sys.stdout.write(index.to_text())
        return 0
    k = estimate_k_complexity(graph)
    row = {
        "vertices": len(graph.vertices),
        "edges": len(graph.edges),
        "entries": len(index),
        "n": args.n,
        "k_complexity": "inf" if not k.finite else (f">={k.value}" if k.capped else k.value),
        "out": args.out,
    }
    _emit(args, [row], ["vertices", "edges", "entries", "n", "k_complexity", "out"])
    return 0


def cmd_query(args):
    index = deserialize_index(Path(args.index).read_bytes())
    ans = compute_state(index, args.activities, selector=args.selector, seed=args.seed)
    row = {
        "state": "{" + ", ".join(map(str, _names(index, ans.chosen))) + "}",
        "candidates": " ".join("{" + ", ".join(map(str, _names(index, m))) + "}" for m in ans.markings),
        "gram_len": ans.gram_len_used,
        "filtered": ans.filtered_events,
    }
    if args.format == "jsonl":
        row["state"] = _names(index, ans.chosen)
        row["candidates"] = [_names(index, m) for m in ans.markings]
    _emit(args, [row], ["state", "gram_len", "filtered", "candidates"])
    return 0


def cmd_eval(args):
    from .evalbench import run_eval

    models = [args.model] if args.model else (args.fixture or list(SYNTHETIC))
    rows = []
    columns = ["model", "noise", "cases"]
    for model in models:
        target = load_net(model) if args.model else model
        for rep in run_eval(
            target,
            ns=tuple(args.n),
            noise_levels=tuple(args.noise),
            n_cases=args.cases,
            seed=args.seed,
            selector=args.selector,
            replay=not args.no_replay,
        ):
            row = {"model": rep.model if not args.model else Path(model).stem, "noise": rep.noise, "cases": rep.total}
            for method, ratio in rep.ratios.items():
                row[method] = ratio
                if method not in columns:
                    columns.append(method)
            rows.append(row)
    _emit(args, rows, columns)
    return 0


def cmd_bench(args):
    from .evalbench import bench

    target = load_net(args.model) if args.model else (args.fixture or "K5")
    log = None
    if args.log:
        fmt = "xes" if args.log.endswith(".xes") else "csv"
        log = read_log(Path(args.log).read_bytes(), fmt)
    rep = bench(target, n=args.n, seed=args.seed, min_queries=args.queries, workers=tuple(args.workers), log=log)
    row = rep.as_dict()
    per_worker = row.pop("per_worker")
    if args.format == "jsonl":
        row["per_worker"] = {str(k): v for k, v in per_worker.items()}
        print(json.dumps(row, sort_keys=True))
        return 0
    for k, v in row.items():
        print(f"{k:16s}{_cell(v) if not isinstance(v, float) or v > 1 else f'{v:.3e}'}")
    for w, v in per_worker.items():
        print(f"workers={w:<8d}{v:,.0f} cases/s")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ngramstate", description="State computation for ongoing process cases.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def model_opts(sp, multi=False):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--model", help="model file (.json native format or .pnml)")
        if multi:
            g.add_argument("--fixture", action="append", choices=sorted(NAMED), help="built-in model (repeatable)")
        else:
            g.add_argument("--fixture", choices=sorted(NAMED), help="built-in model")

    def fmt(sp):
        sp.add_argument("--format", choices=("table", "jsonl"), default="table")

    b = sub.add_parser("build", help="build the reachability graph and n-gram index")
    model_opts(b)
    b.add_argument("--n", type=int, default=3)
    b.add_argument("--out", help="write the binary index here")
    b.add_argument("--graph-dot", help="write the reachability graph as DOT here")
    b.add_argument("--dump", action="store_true", help="print the index as text instead of a summary")
    b.add_argument("--no-prune", action="store_true", help="keep extending deterministic grams")
    b.add_argument("--cap-entries", type=int, default=DEFAULT_CAP_ENTRIES)
    fmt(b)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="state of a trace prefix")
    q.add_argument("--index", required=True)
    q.add_argument("activities", nargs="*")
    q.add_argument("--selector", choices=SELECTORS, default="lex")
    q.add_argument("--seed", type=int, default=0)
    fmt(q)
    q.set_defaults(func=cmd_query)

    e = sub.add_parser("eval", help="accuracy on simulated logs with noise")
    model_opts(e, multi=True)
    e.add_argument("--n", type=int, nargs="+", default=[3, 5, 10])
    e.add_argument("--noise", type=int, nargs="+", choices=range(4), default=[0, 1, 2, 3])
    e.add_argument("--cases", type=int, default=1000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--selector", choices=SELECTORS, default="lex")
    e.add_argument("--no-replay", action="store_true", help="skip the token-replay baseline")
    fmt(e)
    e.set_defaults(func=cmd_eval)

    be = sub.add_parser("bench", help="build times and query throughput")
    model_opts(be)
    be.add_argument("--n", type=int, default=3)
    be.add_argument("--log", help="csv or xes log of prefixes to query (default: simulated)")
    be.add_argument("--queries", type=int, default=100_000)
    be.add_argument("--workers", type=int, nargs="+", default=[1])
    be.add_argument("--seed", type=int, default=0)
    fmt(be)
    be.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NgramStateError as exc:
        print(f"error [{exc.module}]: {exc}", file=sys.stderr)
        return 2
    except (OSError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

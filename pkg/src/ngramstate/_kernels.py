"""Batch query kernels over an integer-encoded n-gram index.

Labels get codes 1..L (0 marks an unmodeled event). A reversed gram
``(c0, c1, ..., c_{m-1})`` is encoded as ``sum(c_i * B**i)`` with ``B = L + 1``,
which keeps grams of different lengths apart. Keys are sorted and looked up
with binary search; values are CSR rows of marking ids, numbered in
canonical marking order so the first id of a row is the lexicographic minimum.

The compiled kernel uses numba when it is importable and
``NGRAMSTATE_DISABLE_NUMBA`` is not set; the numpy path is vectorized across
cases. Both give identical results, including the random selector, which
consumes pre-drawn uniforms.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

try:  # pragma: no cover - import guard
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


from .errors import UnknownActivityError

BACKENDS = ("numba", "numpy", "python")


def default_backend() -> str:
    if os.environ.get("NGRAMSTATE_DISABLE_NUMBA", "").strip() not in ("", "0") or not HAVE_NUMBA:
        return "numpy"
    return "numba"


@dataclass(frozen=True)
class EncodedIndex:
    n: int
    base: int
    code: dict  # label -> 1..L
    keys: np.ndarray  # int64, sorted
    offsets: np.ndarray  # int64, len(keys) + 1
    values: np.ndarray  # int64 marking ids
    markings: tuple  # marking id -> marking
    initial_id: int


def encode_index(index) -> EncodedIndex:
    labels = sorted(index.labels | {a for k in index.entries for a in k})
    code = {a: i + 1 for i, a in enumerate(labels)}
    base = len(labels) + 1
    if base ** index.n >= 2**62:
        raise OverflowError(f"{len(labels)} labels with n={index.n} do not fit 64-bit gram codes")
    all_m = {index.initial}
    for ms in index.entries.values():
        all_m.update(ms)
    markings = tuple(sorted(all_m))
    mid = {m: i for i, m in enumerate(markings)}
    rows = []
    for key, ms in index.entries.items():
        k = 0
        p = 1
        for a in key:
            k += code[a] * p
            p *= base
        rows.append((k, [mid[m] for m in ms]))
    rows.sort()
    keys = np.array([k for k, _ in rows], dtype=np.int64)
    lens = np.array([len(v) for _, v in rows], dtype=np.int64)
    offsets = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum(lens, out=offsets[1:])
    values = np.array([x for _, v in rows for x in v], dtype=np.int64)
    return EncodedIndex(index.n, base, code, keys, offsets, values, markings, mid[index.initial])


def encode_prefixes(enc: EncodedIndex, prefixes, labels):
    """Flat code array plus CSR offsets; labels outside ``labels`` get code 0."""
    code = {a: c for a, c in enc.code.items() if a in labels}
    flat = []
    offsets = [0]
    for p in prefixes:
        flat.extend(code.get(a, 0) for a in p)
        offsets.append(len(flat))
    return np.array(flat, dtype=np.int64), np.array(offsets, dtype=np.int64)


@njit(cache=True)
def _query_numba(codes, case_off, n, base, keys, offsets, values, initial_id, uniforms, use_random):
    ncases = case_off.shape[0] - 1
    chosen = np.empty(ncases, dtype=np.int64)
    used_out = np.zeros(ncases, dtype=np.int64)
    filtered_out = np.zeros(ncases, dtype=np.int64)
    tail = np.empty(n, dtype=np.int64)
    nkeys = keys.shape[0]
    for c in range(ncases):
        got = 0
        filt = 0
        i = case_off[c + 1] - 1
        while i >= case_off[c] and got < n:
            x = codes[i]
            if x > 0:
                tail[got] = x
                got += 1
            else:
                filt += 1
            i -= 1
        filtered_out[c] = filt
        if got == 0:
            chosen[c] = initial_id
            continue
        key = 0
        p = 1
        best = -1
        used = 0
        for j in range(got):
            key += tail[j] * p
            p *= base
            pos = np.searchsorted(keys, key)
            if pos >= nkeys or keys[pos] != key:
                break
            best = pos
            used = j + 1
            if offsets[pos + 1] - offsets[pos] == 1:
                break
        if best < 0:
            chosen[c] = -1
            continue
        used_out[c] = used
        width = offsets[best + 1] - offsets[best]
        k = 0
        if use_random and width > 1:
            k = int(uniforms[c] * width)
            if k >= width:
                k = width - 1
        chosen[c] = values[offsets[best] + k]
    return chosen, used_out, filtered_out


def _query_numpy(codes, case_off, n, base, keys, offsets, values, initial_id, uniforms, use_random):
    ncases = case_off.shape[0] - 1
    lens = np.diff(case_off)
    case_of = np.repeat(np.arange(ncases), lens)
    modeled = codes > 0
    # rank of each modeled event counted from the end of its case (0 = last)
    cum = np.cumsum(modeled)
    total_before = np.concatenate(([0], cum))[case_off[:-1]]
    total = cum[case_off[1:] - 1] - total_before if codes.size else np.zeros(ncases, dtype=np.int64)
    total = np.where(lens > 0, total, 0)
    rank = total[case_of] - (cum - total_before[case_of])
    sel = modeled & (rank < n)
    tail = np.zeros((ncases, n), dtype=np.int64)
    tail[case_of[sel], rank[sel]] = codes[sel]
    got = np.minimum(total, n)

    # unmodeled events after the earliest inspected modeled event
    unmod_cum = np.concatenate(([0], np.cumsum(~modeled)))
    first = np.full(ncases, -1, dtype=np.int64)
    edge = modeled & (rank == n - 1)
    first[case_of[edge]] = np.nonzero(edge)[0]
    start = np.where(first >= 0, first, case_off[:-1])
    filtered = unmod_cum[case_off[1:]] - unmod_cum[start]

    key = np.zeros(ncases, dtype=np.int64)
    best = np.full(ncases, -1, dtype=np.int64)
    used = np.zeros(ncases, dtype=np.int64)
    active = got > 0
    p = 1
    for j in range(n):
        if not active.any():
            break
        key = key + tail[:, j] * p
        p *= base
        pos = np.searchsorted(keys, key)
        pos_c = np.minimum(pos, max(len(keys) - 1, 0))
        found = active & (pos < len(keys))
        if len(keys):
            found &= keys[pos_c] == key
        best = np.where(found, pos_c, best)
        used = np.where(found, j + 1, used)
        width = offsets[pos_c + 1] - offsets[pos_c] if len(keys) else np.zeros(ncases, dtype=np.int64)
        active = found & (width > 1) & (j + 1 < got)

    chosen = np.full(ncases, -1, dtype=np.int64)
    chosen[got == 0] = initial_id
    hit = best >= 0
    b = best[hit]
    width = offsets[b + 1] - offsets[b]
    k = np.zeros_like(b)
    if use_random:
        k = np.minimum((uniforms[hit] * width).astype(np.int64), width - 1)
    chosen[hit] = values[offsets[b] + k]
    return chosen, used, filtered


def batch_query(index, prefixes, *, selector="lex", seed=None, backend=None, encoded=None):
    """Answer many prefixes at once; returns (chosen markings, gram lengths, filtered counts)."""
    backend = backend or default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if selector not in ("lex", "random"):
        raise ValueError(f"unknown selector {selector!r}")
    prefixes = list(prefixes)
    if backend == "python":
        import random

        from .query import compute_state

        rng = random.Random(seed)
        out = [compute_state(index, p, selector=selector, rng=rng) for p in prefixes]
        return [a.chosen for a in out], [a.gram_len_used for a in out], [a.filtered_events for a in out]
    enc = encoded or encode_index(index)
    codes, case_off = encode_prefixes(enc, prefixes, index.labels)
    uniforms = np.random.default_rng(seed).random(len(prefixes))
    fn = _query_numba if backend == "numba" else _query_numpy
    chosen, used, filtered = fn(
        codes, case_off, enc.n, enc.base, enc.keys, enc.offsets, enc.values,
        enc.initial_id, uniforms, selector == "random",
    )
    bad = np.nonzero(chosen < 0)[0]
    if bad.size:
        p = prefixes[int(bad[0])]
        last = next(a for a in reversed(p) if a in index.labels)
        raise UnknownActivityError(
            f"activity {last!r} belongs to the model but labels no edge of the reachability graph"
        )
    ms = enc.markings
    return [ms[i] for i in chosen.tolist()], used.tolist(), filtered.tolist()

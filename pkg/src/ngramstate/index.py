"""n-gram index over a pure reachability graph, and K-complexity.

An index maps every sequence of at most ``n`` consecutive edge labels to the
set of markings that a path spelling it can end in. Grams are grown backward
from their last label; with pruning (the default) a gram whose value is a
single marking is not extended, since any longer gram ending in it can only
point to the same marking.

Keys are stored reversed (last label first), so growing a gram backward is a
key extension. The public API takes grams in natural order.
"""

from __future__ import annotations

import math
import struct
import zlib
from collections import deque
from dataclasses import dataclass, field

from .errors import IndexCapExceeded, IndexFormatError
from .reach import ReachGraph

DEFAULT_CAP_ENTRIES = 50_000_000
MAGIC = b"NGIX"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class NGramIndex:
    n: int
    entries: dict  # reversed gram -> tuple of markings, sorted
    initial: tuple
    labels: frozenset  # observable labels of the model
    place_names: tuple = ()
    pruned: bool = True
    _by_len: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        counts = {}
        for k in self.entries:
            counts[len(k)] = counts.get(len(k), 0) + 1
        object.__setattr__(self, "_by_len", counts)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, gram):
        return tuple(reversed(gram)) in self.entries

    def lookup(self, gram):
        """Markings for ``gram`` (natural order), or None when no path spells it."""
        return self.entries.get(tuple(reversed(gram)))

    def grams(self):
        """(gram, markings) pairs in natural order, sorted by length then labels."""
        items = sorted(self.entries.items(), key=lambda kv: (len(kv[0]), kv[0][::-1]))
        return [(k[::-1], v) for k, v in items]

    def count_by_length(self) -> dict:
        return dict(sorted(self._by_len.items()))

    def format_marking(self, m) -> str:
        if self.place_names:
            return "{" + ", ".join(self.place_names[p] for p in m) + "}"
        return "{" + ", ".join(map(str, m)) + "}"

    def to_text(self) -> str:
        """Debug dump, one gram per line: ``<a, b>`` TAB comma-separated markings."""
        lines = []
        for gram, ms in self.grams():
            lines.append("<" + ", ".join(gram) + ">\t" + ", ".join(self.format_marking(m) for m in ms))
        return "\n".join(lines) + ("\n" if lines else "")

    def __eq__(self, other):
        if not isinstance(other, NGramIndex):
            return NotImplemented
        return (self.n, self.entries, self.initial, self.labels, self.place_names, self.pruned) == (
            other.n,
            other.entries,
            other.initial,
            other.labels,
            other.place_names,
            other.pruned,
        )

    __hash__ = None


def lookup(index: NGramIndex, gram):
    return index.lookup(gram)


def build_index(
    graph: ReachGraph,
    n: int,
    prune: bool = True,
    cap_entries: int = DEFAULT_CAP_ENTRIES,
    labels=None,
) -> NGramIndex:
    """Build the n-gram index of ``graph`` by backward growth of grams.

    Each pending gram carries the set of (first-edge source, last-edge target)
    vertex pairs of the paths spelling it; extending by a label ``x`` follows
    the ``x``-labelled edges entering the sources. Pair sets are deduplicated,
    so cycles do not blow up the enumeration.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not graph.vertices:
        raise ValueError("graph has no vertices")
    entries = {}
    level = {}
    for s, a, t in graph.edges:
        level.setdefault((a,), set()).add((s, t))
    length = 1
    while level:
        grow = {}
        for key in sorted(level):
            pairs = level[key]
            value = tuple(sorted({t for _, t in pairs}))
            entries[key] = value
            if len(entries) > cap_entries:
                raise IndexCapExceeded(len(entries), cap_entries)
            if length >= n or (prune and len(value) == 1):
                continue
            for s, t in pairs:
                for x, s2 in graph.in_edges(s):
                    grow.setdefault(key + (x,), set()).add((s2, t))
        level = grow
        length += 1
    return NGramIndex(
        n=n,
        entries=entries,
        initial=graph.initial,
        labels=frozenset(labels) if labels is not None else graph.labels,
        place_names=graph.place_names,
        pruned=prune,
    )


# -- K-complexity -------------------------------------------------------------


@dataclass(frozen=True)
class KComplexityReport:
    value: float  # int K, or math.inf
    saturated_at: int | None  # gram length at which every gram became deterministic
    reason: str = ""
    capped: bool = False  # True when K exceeds the cap (value is then a lower bound)

    @property
    def finite(self) -> bool:
        return not math.isinf(self.value)


def estimate_k_complexity(graph: ReachGraph, cap: int = 64) -> KComplexityReport:
    """Smallest gram length that identifies the state of every fitting case.

    Two backward paths with equal labels and different end vertices form a
    pair; the longest chain of such pairs is the longest ambiguous gram. The
    value is infinite when the chain can grow forever (a cycle in the pair
    graph, e.g. a loop inside a parallel branch) or when one of the paths can
    start at the initial vertex, since then a whole trace is ambiguous.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    by_label = {}
    for s, a, t in graph.edges:
        by_label.setdefault(a, []).append((s, t))
    start = set()
    for a, es in by_label.items():
        for i, (s1, t1) in enumerate(es):
            for s2, t2 in es[i + 1 :]:
                if t1 != t2:
                    start.add((s1, s2) if s1 <= s2 else (s2, s1))
    if not start:
        return KComplexityReport(1, 1, "every label identifies its target")

    def succ(pair):
        u, v = pair
        ins_v = {}
        for x, v2 in graph.in_edges(v):
            ins_v.setdefault(x, []).append(v2)
        out = set()
        for x, u2 in graph.in_edges(u):
            for v2 in ins_v.get(x, ()):
                out.add((u2, v2) if u2 <= v2 else (v2, u2))
        return out

    init = graph.initial
    nodes = {}
    queue = deque(sorted(start))
    for p in start:
        nodes[p] = None
    while queue:
        p = queue.popleft()
        if init in p:
            return KComplexityReport(math.inf, None, "an ambiguous gram can span a whole trace")
        nxt = succ(p)
        nodes[p] = nxt
        for q in nxt:
            if q not in nodes:
                nodes[q] = None
                queue.append(q)

    # longest path over the pair graph, detecting cycles (iterative DFS)
    depth = {}
    state = {}
    for root in sorted(start):
        if root in state:
            continue
        stack = [(root, iter(sorted(nodes[root])))]
        state[root] = 1
        while stack:
            p, it = stack[-1]
            q = next(it, None)
            if q is None:
                depth[p] = 1 + max((depth[c] for c in nodes[p]), default=0)
                state[p] = 2
                stack.pop()
                continue
            st = state.get(q)
            if st == 1:
                return KComplexityReport(math.inf, None, "ambiguity survives arbitrarily long grams (cycle)")
            if st is None:
                state[q] = 1
                stack.append((q, iter(sorted(nodes[q]))))
    k = 1 + max(depth[p] for p in start)
    if k > cap:
        return KComplexityReport(cap, None, f"K exceeds the cap of {cap}", capped=True)
    return KComplexityReport(k, k, "all grams of this length are deterministic")


# -- binary format ------------------------------------------------------------


def _pack_str(s: str) -> bytes:
    b = s.encode("utf-8")
    return struct.pack("<I", len(b)) + b


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise IndexFormatError("index stream is truncated")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out

    def string(self):
        (size,) = self.take("<I")
        if self.pos + size > len(self.data):
            raise IndexFormatError("index stream is truncated")
        raw = self.data[self.pos : self.pos + size]
        self.pos += size
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise IndexFormatError("bad string in index stream") from None

    def marking(self):
        (k,) = self.take("<H")
        return self.take(f"<{k}I") if k else ()


def serialize_index(index: NGramIndex) -> bytes:
    """Binary form: magic, version, n, dictionaries, initial marking, entries, CRC32 trailer."""
    labels = sorted(index.labels | {a for k in index.entries for a in k})
    code = {a: i for i, a in enumerate(labels)}
    out = [MAGIC, struct.pack("<HHB", FORMAT_VERSION, index.n, int(index.pruned))]
    out.append(struct.pack("<I", len(index.place_names)))
    out.extend(_pack_str(p) for p in index.place_names)
    out.append(struct.pack("<I", len(labels)))
    for a in labels:
        out.append(_pack_str(a) + struct.pack("<B", a in index.labels))
    out.append(struct.pack("<H", len(index.initial)) + struct.pack(f"<{len(index.initial)}I", *index.initial))
    out.append(struct.pack("<Q", len(index.entries)))
    for key in sorted(index.entries):
        value = index.entries[key]
        out.append(struct.pack(f"<H{len(key)}I", len(key), *(code[a] for a in key)))
        out.append(struct.pack("<I", len(value)))
        for m in value:
            out.append(struct.pack(f"<H{len(m)}I", len(m), *m))
    body = b"".join(out)
    return body + struct.pack("<I", zlib.crc32(body))


def deserialize_index(data: bytes) -> NGramIndex:
    data = bytes(data)
    if len(data) < len(MAGIC) + 4 or data[: len(MAGIC)] != MAGIC:
        raise IndexFormatError("not an n-gram index file (bad magic)")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise IndexFormatError("index stream is corrupt or truncated (checksum mismatch)")
    r = _Reader(body)
    r.pos = len(MAGIC)
    version, n, pruned = r.take("<HHB")
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"unsupported index format version {version} (expected {FORMAT_VERSION})")
    (n_places,) = r.take("<I")
    places = tuple(r.string() for _ in range(n_places))
    (n_labels,) = r.take("<I")
    labels, model_labels = [], set()
    for _ in range(n_labels):
        a = r.string()
        (flag,) = r.take("<B")
        labels.append(a)
        if flag:
            model_labels.add(a)
    initial = r.marking()
    (n_entries,) = r.take("<Q")
    entries = {}
    try:
        for _ in range(n_entries):
            key = tuple(labels[c] for c in r.marking())
            (k,) = r.take("<I")
            entries[key] = tuple(r.marking() for _ in range(k))
    except IndexError:
        raise IndexFormatError("label code out of range") from None
    if r.pos != len(body):
        raise IndexFormatError("trailing bytes after the entry table")
    return NGramIndex(n, entries, tuple(initial), frozenset(model_labels), places, bool(pruned))

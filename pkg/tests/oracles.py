"""Brute-force reference computations used by the tests.

These work directly on place-name sets and plain path enumeration, sharing no
code with the package beyond reading net/graph attributes.
"""

from collections import deque


def _token_moves(net, marking):
    """(transition, next marking) for every enabled transition, on frozensets of place names."""
    out = []
    for t in net.transitions:
        pre = {s for s, d in net.arcs if d == t.id}
        post = {d for s, d in net.arcs if s == t.id}
        if pre <= marking:
            out.append((t, frozenset((marking - pre) | post)))
    return out


def observable_language(net, max_len):
    """All observable label sequences of length <= max_len firable from the source."""
    source = net.places[net.source]
    start = (frozenset([source]), ())
    seen = {start}
    queue = deque([start])
    langs = {()}
    moves = {}
    while queue:
        m, seq = queue.popleft()
        if m not in moves:
            moves[m] = _token_moves(net, m)
        for t, m2 in moves[m]:
            if t.silent:
                nxt = (m2, seq)
            else:
                if len(seq) == max_len:
                    continue
                nxt = (m2, seq + (t.label,))
                langs.add(nxt[1])
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return langs


def graph_language(graph, max_len):
    out = {()}
    frontier = {(graph.initial, ())}
    for _ in range(max_len):
        nxt = set()
        for v, seq in frontier:
            for a, w in graph.out_edges(v):
                nxt.add((w, seq + (a,)))
        out |= {s for _, s in nxt}
        frontier = nxt
    return out


def path_targets(graph, max_len):
    """label sequence -> set of final targets, over all paths of 1..max_len edges from any vertex."""
    out = {}
    frontier = {(v, (), None) for v in graph.vertices}
    for _ in range(max_len):
        nxt = set()
        for v, seq, _ in frontier:
            for a, w in graph.out_edges(v):
                nxt.add((w, seq + (a,), w))
        for _, seq, w in nxt:
            out.setdefault(seq, set()).add(w)
        frontier = nxt
    return out


def walks(graph, max_len):
    """Every (labels, end vertex) of walks from the initial vertex with 1..max_len edges."""
    out = set()
    frontier = {((), graph.initial)}
    for _ in range(max_len):
        nxt = set()
        for seq, v in frontier:
            for a, w in graph.out_edges(v):
                nxt.add((seq + (a,), w))
        out |= nxt
        frontier = nxt
    return out


def brute_k(graph, max_len):
    """Smallest m such that the last m labels of every walk (<= max_len) fix its end vertex."""
    ws = walks(graph, max_len)
    for m in range(1, max_len + 1):
        groups = {}
        for seq, v in ws:
            groups.setdefault(seq[-m:], set()).add(v)
        if all(len(g) == 1 for g in groups.values()):
            return m
    return None


def closure_labels(net, place_names):
    """Labels of observable transitions enabled somewhere in the silent closure."""
    start = frozenset(place_names)
    seen = {start}
    queue = deque([start])
    labels = set()
    while queue:
        m = queue.popleft()
        for t, m2 in _token_moves(net, m):
            if t.silent:
                if m2 not in seen:
                    seen.add(m2)
                    queue.append(m2)
            else:
                labels.add(t.label)
    return labels


def reachable_name_sets(net):
    source = net.places[net.source]
    start = frozenset([source])
    seen = {start}
    queue = deque([start])
    while queue:
        m = queue.popleft()
        for _, m2 in _token_moves(net, m):
            if m2 not in seen:
                seen.add(m2)
                queue.append(m2)
    return seen


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]

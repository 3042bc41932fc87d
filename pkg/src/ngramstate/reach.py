"""Pure reachability graph construction.

Silent transitions are traversed with a mixed policy: silent transitions that
hang off a decision point (an XOR-split place) are only fired when an
observable transition needs them, every other silent transition is fired as
soon as it is enabled. Vertices therefore sit *before* decision points.

Exploration works on integer bitmask markings; the public functions accept and
return canonical :data:`~ngramstate.net.Marking` tuples.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from .errors import SafenessError, SilentLivelockError, StateSpaceExceeded
from .net import Marking, WorkflowNet, fire_mask, from_mask, to_mask

log = logging.getLogger(__name__)

DEFAULT_VERTEX_CAP = 1_000_000
POLICIES = ("mixed", "eager", "lazy")


@dataclass(frozen=True)
class ReachGraph:
    """Pure reachability graph: vertices are markings, edges carry activity labels."""

    vertices: tuple
    edges: tuple  # (source marking, label, target marking), sorted
    initial: Marking
    place_names: tuple = ()
    _out: dict = field(default=None, repr=False, compare=False)
    _in: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        out = {v: [] for v in self.vertices}
        inc = {v: [] for v in self.vertices}
        for s, a, t in self.edges:
            out[s].append((a, t))
            inc[t].append((a, s))
        object.__setattr__(self, "_out", out)
        object.__setattr__(self, "_in", inc)

    def out_edges(self, v: Marking) -> list:
        return self._out[v]

    def in_edges(self, v: Marking) -> list:
        return self._in[v]

    @property
    def labels(self) -> frozenset:
        return frozenset(a for _, a, _ in self.edges)

    def format_marking(self, m: Marking) -> str:
        if self.place_names:
            return "[" + ", ".join(self.place_names[p] for p in m) + "]"
        return "[" + ", ".join(map(str, m)) + "]"

    def to_text(self) -> str:
        """One edge per line: source TAB label TAB target."""
        lines = [f"{self.format_marking(s)}\t{a}\t{self.format_marking(t)}" for s, a, t in self.edges]
        return "\n".join(lines) + ("\n" if lines else "")

    def to_dot(self) -> str:
        ids = {v: f"v{i}" for i, v in enumerate(self.vertices)}
        out = ["digraph reach {", "  rankdir=LR;"]
        for v in self.vertices:
            shape = "doublecircle" if v == self.initial else "ellipse"
            name = self.format_marking(v).replace('"', '\\"')
            out.append(f'  {ids[v]} [label="{name}", shape={shape}];')
        for s, a, t in self.edges:
            label = a.replace('"', '\\"')
            out.append(f'  {ids[s]} -> {ids[t]} [label="{label}"];')
        out.append("}")
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class CompleteReachGraph:
    """All reachable markings and every single-transition move (silent ones included)."""

    vertices: frozenset
    edges: frozenset  # (source marking, transition id, target marking)
    initial: Marking


# -- silent advancement -------------------------------------------------------


def _adv_lazy_mask(net: WorkflowNet, mask: int) -> int:
    steps = 0
    fired = True
    while fired:
        fired = False
        for t in net.lazy_silent:
            pre = net.pre_mask[t]
            if mask & pre == pre:
                mask = fire_mask(net, mask, t)
                fired = True
                steps += 1
                if steps > net.silent_step_bound:
                    raise SilentLivelockError(
                        f"silent advancement did not settle after {steps} firings (silent loop?)"
                    )
    return mask


def adv_lazy(net: WorkflowNet, m: Marking) -> Marking:
    """Fire every enabled silent transition that is not behind a decision point, to a fixpoint."""
    return from_mask(_adv_lazy_mask(net, to_mask(m)))


def _silent_closure(net: WorkflowNet, origin: int):
    """BFS over silent firings from ``origin``.

    Returns the visit order and the successor lists of the silent move graph.
    """
    order = [origin]
    succ = {origin: []}
    queue = deque([origin])
    bound = net.silent_step_bound
    silent = net.silent
    pre_mask = net.pre_mask
    while queue:
        m = queue.popleft()
        nxt = succ[m]
        for t in silent:
            pre = pre_mask[t]
            if m & pre == pre:
                m2 = fire_mask(net, m, t)
                nxt.append(m2)
                if m2 not in succ:
                    succ[m2] = []
                    order.append(m2)
                    queue.append(m2)
                    if len(order) > bound:
                        raise SilentLivelockError(
                            f"silent closure exceeded {bound} markings; the net may contain a silent live-lock"
                        )
    return order, succ


def silent_closure(net: WorkflowNet, m: Marking) -> list:
    """All markings reachable from ``m`` by firing silent transitions only (``m`` first)."""
    order, _ = _silent_closure(net, to_mask(m))
    return [from_mask(x) for x in order]


def _popcount(x):
    return bin(x).count("1")


def _rank(origin):
    def key(k):
        adv = k & ~origin
        return (_popcount(adv), from_mask(adv), from_mask(k))

    return key


def _descendants(succ, start, cache):
    if start in cache:
        return cache[start]
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in succ[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    cache[start] = seen
    return seen


def _rollback(succ, origin, candidates, advanced, cache):
    # candidates: closure markings enabling the transition, in BFS order
    best = None
    key = _rank(origin)
    for k in candidates:
        if k == advanced or advanced in _descendants(succ, k, cache):
            if best is None or key(k) < key(best):
                best = k
    return best


def _eager_pairs(net: WorkflowNet, origin: int) -> set:
    """(observable transition, minimally advanced marking) pairs reachable from ``origin``."""
    order, succ = _silent_closure(net, origin)
    pre_mask = net.pre_mask
    if len(order) == 1:
        return {(t, origin) for t in net.observable if origin & pre_mask[t] == pre_mask[t]}
    enabling = {}
    for m in order:
        for t in net.observable:
            pre = pre_mask[t]
            if m & pre == pre:
                enabling.setdefault(t, []).append(m)
    pairs = set()
    cache = {}
    for t, ms in enabling.items():
        if len(ms) == 1:
            pairs.add((t, ms[0]))
            continue
        for c in ms:
            pairs.add((t, _rollback(succ, origin, ms, c, cache)))
    return pairs


def adv_eager(net: WorkflowNet, m: Marking) -> list:
    """Observable transitions reachable from ``m`` through silent moves.

    Returns sorted ``(transition_id, marking)`` pairs where the marking is the
    smallest advancement of ``adv_lazy(m)`` that enables the transition:
    branches advanced but not needed for it are rolled back.
    """
    origin = _adv_lazy_mask(net, to_mask(m))
    pairs = _eager_pairs(net, origin)
    return sorted((net.transitions[t].id, from_mask(mr)) for t, mr in pairs)


def rollbk(net: WorkflowNet, advanced: Marking, origin: Marking, transition_id: str) -> Marking:
    """Undo the silent advancement of ``advanced`` that ``transition_id`` does not need.

    Candidates are the markings silently reachable from ``origin`` that enable
    the transition and from which ``advanced`` is still silently reachable.
    The one whose advanced-token set is smallest wins (ties: lexicographic on
    place ids).
    """
    t = net.tid(transition_id)
    o = to_mask(origin)
    a = to_mask(advanced)
    order, succ = _silent_closure(net, o)
    if a not in succ:
        raise ValueError(
            f"{net.format_marking(advanced)} is not silently reachable from {net.format_marking(origin)}"
        )
    pre = net.pre_mask[t]
    if a & pre != pre:
        raise ValueError(f"{transition_id!r} is not enabled in {net.format_marking(advanced)}")
    candidates = [k for k in order if k & pre == pre]
    best = _rollback(succ, o, candidates, a, {})
    if best is None:  # pragma: no cover - advanced itself always qualifies
        raise RuntimeError("rollback found no enabling marking")
    return from_mask(best)


# -- graph construction -------------------------------------------------------


def _quiescent(net, mask):
    order, succ = _silent_closure(net, mask)
    dead = [m for m in order if not succ[m]]
    return dead or order


def build_reach_graph(
    net: WorkflowNet,
    policy: str = "mixed",
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> ReachGraph:
    """Worklist construction of the pure reachability graph of ``net``.

    ``policy="mixed"`` is the lazy-at-decision-points graph used for indexing.
    ``"eager"`` (fire every silent transition as soon as possible, one vertex
    per resulting marking) and ``"lazy"`` (fire silent transitions only when an
    observable one needs them) exist for comparison.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if not net.is_normalized():
        raise ValueError("net has mixed XOR-splits; call normalize_mixed_xor_splits first")

    source = 1 << net.source
    initial = _adv_lazy_mask(net, source) if policy == "mixed" else source
    seen = {initial}
    queue = deque([initial])
    edges = set()
    labels = [t.label for t in net.transitions]
    while queue:
        v = queue.popleft()
        for t, mr in sorted(_eager_pairs(net, v)):
            fired = fire_mask(net, mr, t)
            if policy == "mixed":
                targets = [_adv_lazy_mask(net, fired)]
            elif policy == "lazy":
                targets = [fired]
            else:
                targets = _quiescent(net, fired)
            for w in targets:
                edges.add((v, labels[t], w))
                if w not in seen:
                    seen.add(w)
                    if len(seen) > vertex_cap:
                        raise StateSpaceExceeded(
                            f"reachability graph exceeded {vertex_cap} vertices; model intractable or unsound"
                        )
                    queue.append(w)
    conv = {m: from_mask(m) for m in seen}
    vertices = tuple(sorted(conv.values()))
    edge_list = tuple(sorted((conv[s], a, conv[t]) for s, a, t in edges))
    log.debug("built %s graph: %d vertices, %d edges", policy, len(vertices), len(edge_list))
    return ReachGraph(vertices, edge_list, conv[initial], net.places)


def build_complete_reach_graph_oracle(net: WorkflowNet, cap: int = 200_000) -> CompleteReachGraph:
    """Brute-force BFS over every transition from ``{source}``."""
    start = (net.source,)
    seen = {start}
    queue = deque([start])
    edges = set()
    all_t = range(len(net.transitions))
    while queue:
        m = queue.popleft()
        mset = set(m)
        for t in all_t:
            if net.pre[t] <= mset:
                rest = mset - net.pre[t]
                if rest & net.post[t]:
                    raise SafenessError(net.transitions[t].id, [net.places[p] for p in rest & net.post[t]])
                m2 = tuple(sorted(rest | net.post[t]))
                edges.add((m, net.transitions[t].id, m2))
                if m2 not in seen:
                    seen.add(m2)
                    if len(seen) > cap:
                        raise StateSpaceExceeded(f"oracle exceeded {cap} markings")
                    queue.append(m2)
    return CompleteReachGraph(frozenset(seen), frozenset(edges), start)


def reachable_markings(net: WorkflowNet, cap: int = 200_000) -> frozenset:
    return build_complete_reach_graph_oracle(net, cap).vertices


def soundness_issues(net: WorkflowNet, cap: int = 200_000) -> list:
    """Soundness violations visible in the explicit state space (empty list if none)."""
    try:
        oracle = build_complete_reach_graph_oracle(net, cap)
    except SafenessError as exc:
        return [f"not 1-safe: {exc}"]
    issues = []
    final = (net.sink,)
    fired = {t for _, t, _ in oracle.edges}
    for t in net.transitions:
        if t.id not in fired:
            issues.append(f"dead transition {t.id!r}")
    for m in oracle.vertices:
        if net.sink in m and m != final:
            issues.append(f"improper completion at {net.format_marking(m)}")
    back = {v: [] for v in oracle.vertices}
    for s, _, t in oracle.edges:
        back[t].append(s)
    can_finish = {final} if final in oracle.vertices else set()
    queue = deque(can_finish)
    while queue:
        x = queue.popleft()
        for y in back[x]:
            if y not in can_finish:
                can_finish.add(y)
                queue.append(y)
    for m in sorted(oracle.vertices - can_finish):
        issues.append(f"no option to complete from {net.format_marking(m)}")
    return issues

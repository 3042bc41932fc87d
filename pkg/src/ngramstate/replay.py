"""Token-based replay baseline.

A small reconstruction of replay with artificial tokens, used only as a point
of comparison. Each event fires a transition carrying its label. Silent
transitions are fired first if a shortest silent path (BFS) enables one;
otherwise the missing input tokens are created and the transition fires
anyway. Because of those artificial tokens the resulting marking can hold
several tokens in a place or be unreachable altogether.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

from .errors import SilentLivelockError
from .net import WorkflowNet


@dataclass(frozen=True)
class ReplayResult:
    marking: tuple  # sorted place ids, repeated once per token
    missing_tokens_added: int
    consumed_artificially: int  # events that could only fire on inserted tokens
    skipped_events: int  # events whose label is not in the model
    reachable: bool | None = None  # set when reachable markings are supplied

    @property
    def is_safe(self) -> bool:
        return len(set(self.marking)) == len(self.marking)


def _key(c: Counter):
    return tuple(sorted(c.elements()))


def _enabled(net, c, t):
    return all(c[p] > 0 for p in net.pre[t])


def _fire(net, c, t):
    out = c.copy()
    for p in net.pre[t]:
        out[p] -= 1
        if out[p] == 0:
            del out[p]
    for p in net.post[t]:
        out[p] += 1
    return out


def _advance(net, c):
    steps = 0
    fired = True
    while fired:
        fired = False
        for t in net.lazy_silent:
            if _enabled(net, c, t):
                c = _fire(net, c, t)
                fired = True
                steps += 1
                if steps > net.silent_step_bound:
                    raise SilentLivelockError("silent advancement did not settle during replay")
    return c


def _silent_paths(net, c, targets):
    """Shortest silent firing path from ``c`` to a marking enabling each target transition."""
    found = {t: (0, c) for t in targets if _enabled(net, c, t)}
    if len(found) == len(targets):
        return found
    seen = {_key(c)}
    queue = deque([(c, 0)])
    while queue and len(found) < len(targets):
        m, d = queue.popleft()
        for s in net.silent:
            if not _enabled(net, m, s):
                continue
            m2 = _fire(net, m, s)
            k = _key(m2)
            if k in seen:
                continue
            seen.add(k)
            if len(seen) > net.silent_step_bound:
                return found
            for t in targets:
                if t not in found and _enabled(net, m2, t):
                    found[t] = (d + 1, m2)
            queue.append((m2, d + 1))
    return found


def token_replay(net: WorkflowNet, prefix, reachable_markings=None) -> ReplayResult:
    """Replay ``prefix`` from the initial marking with the missing-token heuristic.

    Among transitions sharing the event's label the one needing the fewest
    inserted tokens fires, then the one with the shortest silent path, then
    the smallest transition id. Unmodeled labels are skipped and counted.
    After every firing, silent transitions that are not behind a choice are
    fired as far as possible.
    """
    by_label = {}
    for t in net.observable:
        by_label.setdefault(net.transitions[t].label, []).append(t)
    c = _advance(net, Counter({net.source: 1}))
    added = forced = skipped = 0
    for a in prefix:
        ts = by_label.get(a)
        if not ts:
            skipped += 1
            continue
        paths = _silent_paths(net, c, ts)
        options = []
        for t in ts:
            tid = net.transitions[t].id
            if t in paths:
                d, m = paths[t]
                options.append((0, d, tid, t, m))
            else:
                missing = sum(1 for p in net.pre[t] if c[p] == 0)
                options.append((missing, 0, tid, t, c))
        missing, _, _, t, m = min(options, key=lambda o: o[:3])
        if missing:
            m = m.copy()
            for p in net.pre[t]:
                if m[p] == 0:
                    m[p] = 1
            added += missing
            forced += 1
        c = _advance(net, _fire(net, m, t))
    marking = _key(c)
    reachable = None
    if reachable_markings is not None:
        reachable = len(set(marking)) == len(marking) and marking in reachable_markings
    return ReplayResult(marking, added, forced, skipped, reachable)

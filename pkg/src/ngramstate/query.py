"""Online state computation for ongoing cases.

Only the last ``n`` modeled events of a prefix are looked at, so the cost of
a query does not depend on how long the case already is.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import UnknownActivityError
from .index import NGramIndex
from .net import Marking, WorkflowNet, to_mask
from .reach import _silent_closure

SELECTORS = ("lex", "random")


@dataclass(frozen=True)
class StateAnswer:
    markings: tuple  # candidates at the least ambiguous gram length, sorted
    chosen: Marking
    gram_len_used: int
    filtered_events: int  # unmodeled events skipped in the inspected tail


def compute_state(
    index: NGramIndex,
    prefix,
    *,
    selector: str = "lex",
    seed=None,
    rng: random.Random | None = None,
    initial: Marking | None = None,
    labels=None,
) -> StateAnswer:
    """Marking(s) a case with the given activity prefix is in.

    Events whose label is not in the model are skipped. The ending gram is
    grown backward while the answer is ambiguous, up to ``index.n`` labels;
    when a longer gram is missing (pruned, or spelled by no model path because
    of noise) the last match is kept. ``selector="lex"`` picks the smallest
    candidate, ``"random"`` draws one with ``rng`` or ``random.Random(seed)``.
    """
    if labels is None:
        labels = index.labels
    n = index.n
    tail = []
    filtered = 0
    i = len(prefix) - 1
    while i >= 0 and len(tail) < n:
        a = prefix[i]
        if a in labels:
            tail.append(a)
        else:
            filtered += 1
        i -= 1
    if not tail:
        m0 = index.initial if initial is None else initial
        return StateAnswer((m0,), m0, 0, filtered)

    entries = index.entries
    key = (tail[0],)
    best = entries.get(key)
    if best is None:
        raise UnknownActivityError(
            f"activity {tail[0]!r} belongs to the model but labels no edge of the reachability graph"
        )
    used = 1
    while len(best) > 1 and used < len(tail):
        key = key + (tail[used],)
        value = entries.get(key)
        if value is None:
            break
        best = value
        used += 1
    if len(best) == 1 or selector == "lex":
        chosen = best[0]
    elif selector == "random":
        chosen = (rng or random.Random(seed)).choice(best)
    else:
        raise ValueError(f"unknown selector {selector!r}; expected one of {SELECTORS}")
    return StateAnswer(best, chosen, used, filtered)


def next_enabled_activities(net: WorkflowNet, m: Marking) -> frozenset:
    """Labels of observable transitions enabled anywhere in the silent closure of ``m``."""
    order, _ = _silent_closure(net, to_mask(m))
    out = set()
    for t in net.observable:
        pre = net.pre_mask[t]
        for x in order:
            if x & pre == pre:
                out.add(net.transitions[t].label)
                break
    return frozenset(out)


def compute_states(index: NGramIndex, prefixes, *, selector="lex", seed=None, backend=None):
    """Batch form of :func:`compute_state` over many prefixes.

    Returns ``(chosen, gram_len_used, filtered_events)`` lists. ``backend`` is
    ``"numba"``, ``"numpy"`` or ``"python"``; by default the compiled kernel
    is used unless ``NGRAMSTATE_DISABLE_NUMBA=1``.
    """
    from . import _kernels

    return _kernels.batch_query(index, prefixes, selector=selector, seed=seed, backend=backend)

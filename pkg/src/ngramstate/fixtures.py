"""Fixture nets: the running order-to-cash example, the ambiguous invoice net,
the traversal-policy example, the five synthetic evaluation models and a
generator of small random block-structured sound nets.

The synthetic models are authored here (only their shape is known): what
matters is their K-complexity, which the test-suite checks.
"""

from __future__ import annotations

import random

from .net import Transition, WorkflowNet, normalize_mixed_xor_splits


class NetBuilder:
    """Incremental construction helper; places and transitions keep insertion order."""

    def __init__(self):
        self.places = []
        self.transitions = []
        self.arcs = []
        self._n = 0

    def place(self, pid=None):
        if pid is None:
            self._n += 1
            pid = f"p{self._n}"
        self.places.append(pid)
        return pid

    def act(self, tid, label=None, pre=(), post=()):
        self.transitions.append(Transition(tid, label or tid, False))
        self._wire(tid, pre, post)
        return tid

    def tau(self, tid=None, pre=(), post=()):
        if tid is None:
            tid = f"tau{len(self.transitions) + 1}"
        self.transitions.append(Transition(tid, None, True))
        self._wire(tid, pre, post)
        return tid

    def _wire(self, tid, pre, post):
        self.arcs.extend((p, tid) for p in pre)
        self.arcs.extend((tid, p) for p in post)

    def build(self) -> WorkflowNet:
        return WorkflowNet(self.places, self.transitions, self.arcs)


def running_example() -> WorkflowNet:
    """Order-to-cash net with a loop inside a parallel branch (places "1".."13")."""
    b = NetBuilder()
    for i in range(1, 14):
        b.place(str(i))
    b.act("Register order", pre=["1"], post=["2", "9"])
    b.act("Check stock", pre=["2"], post=["3"])
    b.tau("t1", pre=["3"], post=["4"])
    b.tau("t2", pre=["3"], post=["5"])
    b.act("Contact supplier", pre=["4"], post=["6"])
    b.tau("t3", pre=["6"], post=["4"])
    b.tau("t4", pre=["6"], post=["8"])
    b.act("Collect from stock", pre=["5"], post=["7"])
    b.tau("t5", pre=["7"], post=["8"])
    b.act("Issue invoice", pre=["9"], post=["10"])
    b.tau("t6", pre=["10"], post=["11"])
    b.tau("t7", pre=["10"], post=["12"])
    b.act("Register payment", pre=["11"], post=["12"])
    b.act("Ship order", pre=["8", "12"], post=["13"])
    return b.build()


# firing sequence replaying the order-to-cash trace on the running example
RUNNING_EXAMPLE_FIRINGS = (
    "Register order",
    "Check stock",
    "Issue invoice",
    "t1",
    "Contact supplier",
    "t6",
    "Register payment",
    "t3",
    "Contact supplier",
    "t4",
    "Ship order",
)


def ambiguous_example() -> WorkflowNet:
    """Invoice net where two transitions share the label "Notify"."""
    b = NetBuilder()
    for i in range(1, 9):
        b.place(str(i))
    b.act("Register invoice", pre=["1"], post=["2", "6"])
    b.act("Notify_a", "Notify", pre=["2"], post=["3"])
    b.act("Post invoice", pre=["3"], post=["5"])
    b.tau("t2", pre=["5"], post=["4"])
    b.act("Notify_b", "Notify", pre=["4"], post=["5"])
    b.tau("t4", pre=["5"], post=["2"])
    b.tau("t5", pre=["5"], post=["7"])
    b.act("Pay invoice", pre=["6", "7"], post=["8"])
    return b.build()


def policy_example() -> WorkflowNet:
    """Silent XOR-split over three activities followed by a silent AND block."""
    b = NetBuilder()
    for i in range(1, 15):
        b.place(str(i))
    b.act("So", pre=["1"], post=["2"])
    for tid, mid, label, out in (("s1", "3", "A", "6"), ("s2", "4", "B", "7"), ("s3", "5", "C", "8")):
        b.tau(tid, pre=["2"], post=[mid])
        b.act(label, pre=[mid], post=[out])
        b.tau(f"j{tid[1]}", pre=[out], post=["9"])
    b.tau("split", pre=["9"], post=["10", "11"])
    b.act("D", pre=["10"], post=["12"])
    b.act("E", pre=["11"], post=["13"])
    b.tau("join", pre=["12", "13"], post=["14"])
    return b.build()


def mixed_split_example() -> WorkflowNet:
    """One XOR-split feeding two silent and two observable transitions."""
    b = NetBuilder()
    for p in ("i", "x", "a", "b", "o"):
        b.place(p)
    b.act("S", pre=["i"], post=["x"])
    b.act("A", pre=["x"], post=["o"])
    b.act("B", pre=["x"], post=["o"])
    b.tau("u1", pre=["x"], post=["a"])
    b.tau("u2", pre=["x"], post=["b"])
    b.act("C", pre=["a"], post=["o"])
    b.act("D", pre=["b"], post=["o"])
    return b.build()


def sequence_fixture(k: int = 3) -> WorkflowNet:
    """Plain sequence of ``k`` activities."""
    b = NetBuilder()
    prev = b.place("i")
    for j in range(k):
        nxt = b.place("o" if j == k - 1 else None)
        b.act(f"a{j + 1}", pre=[prev], post=[nxt])
        prev = nxt
    return b.build()


def seq_fixture() -> WorkflowNet:
    """Sequential process with two decision points."""
    b = NetBuilder()
    i, p1, p2, p3, p4, p5, p6, o = (b.place(x) for x in ("i", "p1", "p2", "p3", "p4", "p5", "p6", "o"))
    b.act("Start", pre=[i], post=[p1])
    b.act("A", pre=[p1], post=[p2])
    b.act("B", pre=[p1], post=[p2])
    b.act("C", pre=[p2], post=[p3])
    b.act("D", pre=[p3], post=[p4])
    for x in ("E", "F", "G"):
        b.act(x, pre=[p4], post=[p5])
    b.act("H", pre=[p5], post=[p6])
    b.act("End", pre=[p6], post=[o])
    return b.build()


def loop_fixture() -> WorkflowNet:
    """Variant of :func:`seq_fixture` with two silent loop-backs."""
    b = NetBuilder()
    i, p1, p2, p3, p4, q4, p5, p6, q6, o = (
        b.place(x) for x in ("i", "p1", "p2", "p3", "p4", "q4", "p5", "p6", "q6", "o")
    )
    b.act("Start", pre=[i], post=[p1])
    b.act("A", pre=[p1], post=[p2])
    b.act("B", pre=[p1], post=[p2])
    b.act("C", pre=[p2], post=[p3])
    b.act("D", pre=[p3], post=[p4])
    b.tau("redo_cd", pre=[p4], post=[p2])
    b.tau("skip_cd", pre=[p4], post=[q4])
    for x in ("E", "F", "G"):
        b.act(x, pre=[q4], post=[p5])
    b.act("H", pre=[p5], post=[p6])
    b.tau("redo_efgh", pre=[p6], post=[q4])
    b.tau("skip_efgh", pre=[p6], post=[q6])
    b.act("End", pre=[q6], post=[o])
    return b.build()


def parallel_fixture(branch_lengths) -> WorkflowNet:
    """Start, a silent AND-split into branches of the given lengths, a silent AND-join, End."""
    b = NetBuilder()
    i, s, j, o = b.place("i"), b.place("s"), b.place("j"), b.place("o")
    b.act("Start", pre=[i], post=[s])
    heads, tails = [], []
    for bi, length in enumerate(branch_lengths):
        prev = b.place(f"b{bi + 1}_0")
        heads.append(prev)
        for k in range(length):
            nxt = b.place(f"b{bi + 1}_{k + 1}")
            b.act(f"{chr(ord('A') + bi)}{k + 1}", pre=[prev], post=[nxt])
            prev = nxt
        tails.append(prev)
    b.tau("and_split", pre=[s], post=heads)
    b.tau("and_join", pre=tails, post=[j])
    b.act("End", pre=[j], post=[o])
    return b.build()


def k3_fixture() -> WorkflowNet:
    return parallel_fixture((2, 2))


def k5_fixture() -> WorkflowNet:
    return parallel_fixture((2, 2, 2))


def k10_fixture() -> WorkflowNet:
    return parallel_fixture((3, 2, 2, 2, 2))


SYNTHETIC = {
    "Seq": seq_fixture,
    "Loop": loop_fixture,
    "K3": k3_fixture,
    "K5": k5_fixture,
    "K10": k10_fixture,
}

# K-complexity each synthetic model is authored to have
SYNTHETIC_K = {"Seq": 1, "Loop": 1, "K3": 3, "K5": 5, "K10": 10}

NAMED = {
    "running": running_example,
    "ambiguous": ambiguous_example,
    "policy": policy_example,
    "mixed-split": mixed_split_example,
    **SYNTHETIC,
}


def fixtures() -> dict:
    """The five synthetic evaluation models, by name."""
    return {name: make() for name, make in SYNTHETIC.items()}


def get_fixture(name: str) -> WorkflowNet:
    try:
        return NAMED[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(NAMED)}") from None


# -- random block-structured nets -------------------------------------------


def _random_tree(rng, budget, labels, depth=0):
    """Process tree with at most ``budget`` leaves; returns (tree, leaves used)."""
    if budget <= 1 or depth >= 4 or (depth > 0 and rng.random() < 0.3):
        if rng.random() < 0.1 and labels:
            return ("act", rng.choice(labels)), 1  # reuse a label now and then
        name = f"a{len(labels) + 1}"
        labels.append(name)
        return ("act", name), 1
    op = rng.choice(("seq", "seq", "xor", "and", "loop"))
    if op == "loop":
        body, used = _random_tree(rng, budget - 1, labels, depth + 1)
        name = f"a{len(labels) + 1}"
        labels.append(name)
        # body starts with an activity so the loop cannot spin silently
        return ("loop", ("seq", [("act", name), body])), used + 1
    if op == "xor" and rng.random() < 0.25:
        child, used = _random_tree(rng, budget, labels, depth + 1)
        return ("xor", [child, ("tau",)]), used
    k = rng.randint(2, 3)
    children = []
    left = budget
    for c in range(k):
        if left <= 0:
            break
        share = max(1, left // (k - c))
        child, used = _random_tree(rng, share, labels, depth + 1)
        children.append(child)
        left -= used
    if len(children) == 1:
        return children[0], budget - left
    return (op, children), budget - left


def _emit(b, tree, src, dst):
    kind = tree[0]
    if kind == "act":
        tid = f"t{len(b.transitions) + 1}"
        b.act(tid, tree[1], pre=[src], post=[dst])
    elif kind == "tau":
        b.tau(pre=[src], post=[dst])
    elif kind == "seq":
        prev = src
        kids = tree[1]
        for k, child in enumerate(kids):
            nxt = dst if k == len(kids) - 1 else b.place()
            _emit(b, child, prev, nxt)
            prev = nxt
    elif kind == "xor":
        for child in tree[1]:
            if child[0] in ("act", "tau"):
                _emit(b, child, src, dst)
            else:
                a, z = b.place(), b.place()
                b.tau(pre=[src], post=[a])
                _emit(b, child, a, z)
                b.tau(pre=[z], post=[dst])
    elif kind == "and":
        heads, tails = [], []
        for child in tree[1]:
            a, z = b.place(), b.place()
            _emit(b, child, a, z)
            heads.append(a)
            tails.append(z)
        b.tau(pre=[src], post=heads)
        b.tau(pre=tails, post=[dst])
    elif kind == "loop":
        a, z = b.place(), b.place()
        b.tau(pre=[src], post=[a])
        _emit(b, tree[1], a, z)
        b.tau(pre=[z], post=[a])
        b.tau(pre=[z], post=[dst])
    else:  # pragma: no cover
        raise ValueError(kind)


def random_sound_net(seed: int, max_transitions: int = 12) -> WorkflowNet:
    """Small random sound net built from a process tree, normalized.

    The block structure guarantees soundness; the transition count stays
    within ``max_transitions`` (trees are redrawn until they fit).
    """
    rng = random.Random(seed)
    for _ in range(1000):
        labels = []
        tree, _ = _random_tree(rng, rng.randint(2, 6), labels)
        b = NetBuilder()
        src = b.place("source")
        dst = b.place("sink")
        # explicit start and end activities keep source and sink unique
        a, z = b.place(), b.place()
        b.act("t_start", "start", pre=[src], post=[a])
        _emit(b, tree, a, z)
        b.act("t_end", "end", pre=[z], post=[dst])
        net = normalize_mixed_xor_splits(b.build())
        if len(net.transitions) <= max_transitions:
            return net
    raise RuntimeError("could not draw a net within the transition budget")  # pragma: no cover

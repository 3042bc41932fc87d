import pytest
from conftest import M
from oracles import closure_labels, walks

from ngramstate import (
    UnknownActivityError,
    build_index,
    compute_state,
    next_enabled_activities,
)
from ngramstate.fixtures import SYNTHETIC_K

WORKED = ["Register order", "Issue invoice", "Check stock", "Collect from stock"]


def test_worked_example(o2c, o2c_index):
    ans = compute_state(o2c_index, WORKED)
    assert ans.chosen == M(o2c, "8", "10")
    assert ans.markings == (M(o2c, "8", "10"),)
    assert ans.gram_len_used == 3
    assert ans.filtered_events == 0


def test_empty_prefix(o2c, o2c_index):
    ans = compute_state(o2c_index, [])
    assert ans.chosen == M(o2c, "1") and ans.gram_len_used == 0
    ans = compute_state(o2c_index, ["noise", "more noise"])
    assert ans.chosen == M(o2c, "1") and ans.filtered_events == 2


def test_unmodeled_events_are_skipped(o2c, o2c_index):
    ans = compute_state(o2c_index, ["X", "Register order"])
    assert ans.chosen == M(o2c, "2", "9")
    assert ans.filtered_events == 1
    ans = compute_state(o2c_index, ["Register order", "X", "Issue invoice", "Y", "Check stock", "Collect from stock"])
    # only the inspected tail is scanned: "X" lies before the third modeled event
    assert ans.chosen == M(o2c, "8", "10") and ans.filtered_events == 1


def test_next_enabled(o2c, invoice):
    assert next_enabled_activities(o2c, M(o2c, "8", "10")) == {"Register payment", "Ship order"}
    assert next_enabled_activities(o2c, M(o2c, "13")) == frozenset()
    m = M(invoice, "5", "6")
    assert next_enabled_activities(invoice, m) == closure_labels(invoice, ("5", "6"))
    assert next_enabled_activities(invoice, m) == {"Notify", "Pay invoice"}


def test_next_enabled_matches_oracle_everywhere(graphs):
    for name, (net, g) in graphs.items():
        if name == "K10":
            continue
        for v in g.vertices:
            assert next_enabled_activities(net, v) == closure_labels(net, net.marking_names(v)), (name, v)


def test_ambiguous_prefix(invoice):
    from ngramstate import build_reach_graph

    idx = build_index(build_reach_graph(invoice), 5)
    ans = compute_state(idx, ["Register invoice", "Notify", "Post invoice", "Notify"])
    assert {M(invoice, "5", "6"), M(invoice, "3", "6")} <= set(ans.markings)
    assert ans.chosen == min(ans.markings)


class CountingSeq:
    def __init__(self, items):
        self.items = list(items)
        self.reads = 0

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        self.reads += 1
        return self.items[i]


@pytest.mark.parametrize("length", [10, 1000, 100_000])
def test_reads_only_the_tail(o2c_index, length):
    body = ["Register order"] + ["Contact supplier"] * (length - 1)
    seq = CountingSeq(body)
    compute_state(o2c_index, seq)
    assert seq.reads <= o2c_index.n
    noisy = CountingSeq(["Register order"] + ["junk", "Contact supplier"] * length)
    ans = compute_state(o2c_index, noisy)
    assert noisy.reads == o2c_index.n + ans.filtered_events


@pytest.mark.parametrize("name", ["Seq", "Loop", "K3", "K5"])
def test_fitting_walks_find_true_state(graphs, name):
    net, g = graphs[name]
    n = max(SYNTHETIC_K[name], 3)
    idx = build_index(g, n)
    for seq, end in walks(g, 12):
        assert compute_state(idx, seq).chosen == end, seq


def test_selectors(o2c, o2c_index):
    prefix = ["Check stock"]
    lex = [compute_state(o2c_index, prefix).chosen for _ in range(5)]
    assert len(set(lex)) == 1 and lex[0] == min(o2c_index.lookup(prefix))
    a = [compute_state(o2c_index, prefix, selector="random", seed=s).chosen for s in range(30)]
    b = [compute_state(o2c_index, prefix, selector="random", seed=s).chosen for s in range(30)]
    assert a == b
    assert len(set(a)) > 1
    with pytest.raises(ValueError):
        compute_state(o2c_index, prefix, selector="best")


def test_dead_model_label(o2c_index):
    labels = set(o2c_index.labels) | {"Archive order"}
    with pytest.raises(UnknownActivityError, match="Archive order"):
        compute_state(o2c_index, ["Register order", "Archive order"], labels=labels)

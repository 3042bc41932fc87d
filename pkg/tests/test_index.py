import math

import pytest
from conftest import M
from oracles import brute_k, path_targets
from published_tables import CORRECTED, PRINTED, index_as_names

from ngramstate import (
    IndexCapExceeded,
    IndexFormatError,
    build_index,
    build_reach_graph,
    deserialize_index,
    estimate_k_complexity,
    lookup,
    serialize_index,
)
from ngramstate.fixtures import SYNTHETIC_K, sequence_fixture
from ngramstate.index import FORMAT_VERSION


def test_order_to_cash_index_matches_corrected_table(o2c_index):
    got = index_as_names(o2c_index)
    assert got == CORRECTED
    assert len(got) == 39
    assert not any(len(g) > 1 and g[-1] == "Ship order" for g in got)


def test_printed_table_differs_only_in_payment_rows(o2c_index):
    got = index_as_names(o2c_index)
    wrong = {g for g in PRINTED if PRINTED[g] != got.get(g)}
    assert wrong == {
        ("Register order", "Register payment"),
        ("Check stock", "Register payment"),
        ("Collect from stock", "Register payment"),
        ("Contact supplier", "Register payment"),
    }
    assert len(PRINTED) == 35


def test_table_lookups(o2c, o2c_index):
    assert lookup(o2c_index, ["Register order", "Check stock"]) == (M(o2c, "3", "9"),)
    assert o2c_index.lookup(["Issue invoice", "Check stock", "Collect from stock"]) == (M(o2c, "8", "10"),)
    assert o2c_index.lookup(["Ship order"]) == (M(o2c, "13"),)
    assert o2c_index.lookup(["Unknown"]) is None
    assert ["Register order"] in o2c_index


def test_path_graph_prunes_at_one():
    g = build_reach_graph(sequence_fixture(3))
    idx = build_index(g, 5)
    assert len(idx) == 3
    assert all(len(k) == 1 and len(v) == 1 for k, v in idx.entries.items())


def _brute_pruned(targets, n):
    """Pruned index derived from brute-force path grouping."""
    out = {}
    for gram in sorted(targets, key=len):
        if len(gram) > n:
            continue
        if any(gram[-j:] in out and len(out[gram[-j:]]) == 1 for j in range(1, len(gram))):
            continue
        out[gram] = frozenset(targets[gram])
    return out


def test_policy_example_index_vs_brute_force(policy_net):
    g = build_reach_graph(policy_net)
    targets = path_targets(g, 2)
    full = build_index(g, 2, prune=False)
    assert {k: frozenset(v) for k, v in full.grams()} == {k: frozenset(v) for k, v in targets.items()}
    pruned = build_index(g, 2)
    assert {k: frozenset(v) for k, v in pruned.grams()} == _brute_pruned(targets, 2)


def test_unpruned_and_pruned_vs_brute_force(graphs):
    for name, (net, g) in graphs.items():
        n = 3 if name == "K10" else 4
        targets = path_targets(g, n)
        full = build_index(g, n, prune=False)
        assert {k: frozenset(v) for k, v in full.grams()} == {k: frozenset(v) for k, v in targets.items()}, name
        pruned = build_index(g, n)
        assert {k: frozenset(v) for k, v in pruned.grams()} == _brute_pruned(targets, n), name
        assert len(pruned) <= len(full)


def test_monotone_and_pruning_soundness(graphs):
    for name, (net, g) in graphs.items():
        idx = build_index(g, 5 if name != "K10" else 4)
        for key, value in idx.entries.items():
            if len(key) > 1:
                parent = idx.entries[key[:-1]]
                assert set(value) <= set(parent)
                assert len(parent) > 1, "extended a deterministic gram"
            assert list(value) == sorted(value)


def test_completeness(graphs):
    for name, (net, g) in graphs.items():
        n = 3
        idx = build_index(g, n)
        for gram, ends in path_targets(g, n).items():
            for m in range(len(gram), 0, -1):
                v = idx.lookup(gram[-m:])
                if v is not None and (m == len(gram) or len(v) == 1):
                    assert set(ends) <= set(v)
                    if m < len(gram):
                        assert set(v) == set(ends)
                    break
            else:
                pytest.fail(f"{name}: no entry covers {gram}")


def test_entry_cap(o2c_graph):
    with pytest.raises(IndexCapExceeded) as exc:
        build_index(o2c_graph, 3, cap_entries=10)
    assert exc.value.cap == 10


def test_bad_arguments(o2c_graph):
    with pytest.raises(ValueError):
        build_index(o2c_graph, 0)


def test_serialization_roundtrip(o2c, o2c_index):
    blob = serialize_index(o2c_index)
    assert blob[:4] == b"NGIX"
    back = deserialize_index(blob)
    assert back == o2c_index
    assert back.lookup(["Issue invoice", "Check stock", "Collect from stock"]) == (M(o2c, "8", "10"),)
    assert index_as_names(back) == CORRECTED


def test_deserialize_errors(o2c_index):
    blob = serialize_index(o2c_index)
    with pytest.raises(IndexFormatError):
        deserialize_index(blob[:-7])
    with pytest.raises(IndexFormatError):
        deserialize_index(b"XXXX" + blob[4:])
    flipped = bytearray(blob)
    flipped[40] ^= 0xFF
    with pytest.raises(IndexFormatError):
        deserialize_index(bytes(flipped))
    import struct
    import zlib

    body = bytearray(blob[:-4])
    struct.pack_into("<H", body, 4, FORMAT_VERSION + 1)
    with pytest.raises(IndexFormatError, match="version"):
        deserialize_index(bytes(body) + struct.pack("<I", zlib.crc32(bytes(body))))


def test_text_dump(o2c_index):
    lines = o2c_index.to_text().splitlines()
    assert len(lines) == 39
    assert "<Issue invoice, Check stock, Collect from stock>\t{8, 10}" in lines


@pytest.mark.parametrize("name", sorted(SYNTHETIC_K))
def test_k_complexity_of_fixtures(graphs, name):
    report = estimate_k_complexity(graphs[name][1])
    assert report.value == SYNTHETIC_K[name]
    assert report.saturated_at == SYNTHETIC_K[name]


def test_k_complexity_matches_walk_oracle(graphs):
    for name in ("Seq", "Loop", "K3", "K5", "policy", "mixed-split"):
        g = graphs[name][1]
        assert estimate_k_complexity(g).value == brute_k(g, 12), name


def test_k_complexity_infinite(graphs):
    assert math.isinf(estimate_k_complexity(graphs["running"][1]).value)
    assert math.isinf(estimate_k_complexity(graphs["ambiguous"][1]).value)
    assert not estimate_k_complexity(graphs["running"][1]).finite


def test_k_complexity_cap(graphs):
    report = estimate_k_complexity(graphs["K10"][1], cap=5)
    assert report.capped and report.value == 5 and report.saturated_at is None
    with pytest.raises(ValueError):
        estimate_k_complexity(graphs["K10"][1], cap=0)


def test_index_with_n_at_least_k_is_deterministic_on_walks(graphs):
    from oracles import walks

    for name in ("K3", "K5"):
        g = graphs[name][1]
        k = SYNTHETIC_K[name]
        idx = build_index(g, k)
        for seq, end in walks(g, 10):
            v = None
            for m in range(1, min(k, len(seq)) + 1):
                got = idx.lookup(seq[-m:])
                if got is None:
                    break
                v = got
                if len(got) == 1:
                    break
            assert v == (end,)

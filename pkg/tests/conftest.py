import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ngramstate import build_index, build_reach_graph, normalize_mixed_xor_splits  # noqa: E402
from ngramstate.fixtures import NAMED, ambiguous_example, policy_example, running_example  # noqa: E402


@pytest.fixture(scope="session")
def o2c():
    return running_example()


@pytest.fixture(scope="session")
def o2c_graph(o2c):
    return build_reach_graph(o2c)


@pytest.fixture(scope="session")
def o2c_index(o2c_graph):
    return build_index(o2c_graph, 3)


@pytest.fixture(scope="session")
def invoice():
    return ambiguous_example()


@pytest.fixture(scope="session")
def policy_net():
    return policy_example()


@pytest.fixture(scope="session")
def graphs():
    """Reachability graph of every named fixture."""
    out = {}
    for name, make in NAMED.items():
        net = normalize_mixed_xor_splits(make())
        out[name] = (net, build_reach_graph(net))
    return out


def M(net, *names):
    """Marking from place names."""
    return net.marking(*names)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

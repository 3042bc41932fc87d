"""Map ongoing process cases to markings of a workflow net via an n-gram index."""

from .errors import (
    IndexCapExceeded,
    IndexFormatError,
    LogFormatError,
    NetParseError,
    NetStructureError,
    NgramStateError,
    NotEnabledError,
    SafenessError,
    SilentLivelockError,
    StateSpaceExceeded,
    UnknownActivityError,
)
from .index import (
    KComplexityReport,
    NGramIndex,
    build_index,
    deserialize_index,
    estimate_k_complexity,
    lookup,
    serialize_index,
)
from .logio import EventLog, NoiseSpec, Trace, inject_noise, make_prefixes, read_log, simulate_log, write_log
from .net import (
    Transition,
    WorkflowNet,
    enabled_transitions,
    fire,
    input_places,
    input_transitions,
    load_net,
    normalize_mixed_xor_splits,
    output_places,
    output_transitions,
    parse_net,
    serialize_net,
)
from .query import StateAnswer, compute_state, compute_states, next_enabled_activities
from .reach import (
    CompleteReachGraph,
    ReachGraph,
    adv_eager,
    adv_lazy,
    build_complete_reach_graph_oracle,
    build_reach_graph,
    rollbk,
    soundness_issues,
)
from .replay import ReplayResult, token_replay

__version__ = "0.1.0"

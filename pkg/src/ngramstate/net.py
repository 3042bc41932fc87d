"""Labeled workflow nets: data model, parsing, normalization and token game.

Places and transitions keep the string ids of the source document. Internally
each place gets an integer id in document order, and a marking is the sorted
tuple of the integer ids of the marked places (the nets handled here are
1-safe, so a set is enough). The bitmask form (``1 << place``) is used by the
exploration code in :mod:`ngramstate.reach`.
"""

from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import NetParseError, NetStructureError, NotEnabledError, SafenessError

log = logging.getLogger(__name__)

Marking = tuple  # tuple[int, ...], sorted ascending, duplicate-free


@dataclass(frozen=True)
class Transition:
    id: str
    label: str | None
    silent: bool


class WorkflowNet:
    """Immutable labeled workflow net with a unique source and sink place."""

    def __init__(
        self,
        places: Sequence[str],
        transitions: Sequence[Transition],
        arcs: Iterable[tuple[str, str]],
    ):
        self.places = tuple(places)
        self.transitions = tuple(transitions)
        self.place_index = {}
        for i, p in enumerate(self.places):
            if p in self.place_index:
                raise NetStructureError(f"duplicate place id {p!r}", [p])
            self.place_index[p] = i
        self.transition_index = {}
        for i, t in enumerate(self.transitions):
            if t.id in self.transition_index or t.id in self.place_index:
                raise NetStructureError(f"duplicate node id {t.id!r}", [t.id])
            if not t.silent and not t.label:
                raise NetStructureError(f"observable transition {t.id!r} has no label", [t.id])
            self.transition_index[t.id] = i

        pre = [set() for _ in self.transitions]
        post = [set() for _ in self.transitions]
        arc_list = []
        seen = set()
        for src, dst in arcs:
            if (src, dst) in seen:
                continue
            seen.add((src, dst))
            if src in self.place_index and dst in self.transition_index:
                pre[self.transition_index[dst]].add(self.place_index[src])
            elif src in self.transition_index and dst in self.place_index:
                post[self.transition_index[src]].add(self.place_index[dst])
            else:
                unknown = [x for x in (src, dst) if x not in self.place_index and x not in self.transition_index]
                if unknown:
                    raise NetStructureError(f"arc {src!r}->{dst!r} references unknown node(s) {unknown}", unknown)
                raise NetStructureError(f"arc {src!r}->{dst!r} does not connect a place and a transition", [src, dst])
            arc_list.append((src, dst))
        self.arcs = tuple(arc_list)
        self.pre = tuple(frozenset(s) for s in pre)
        self.post = tuple(frozenset(s) for s in post)
        self.pre_mask = tuple(_mask(s) for s in self.pre)
        self.post_mask = tuple(_mask(s) for s in self.post)

        place_in = [set() for _ in self.places]
        place_out = [set() for _ in self.places]
        for t in range(len(self.transitions)):
            for p in self.pre[t]:
                place_out[p].add(t)
            for p in self.post[t]:
                place_in[p].add(t)
        self.place_pre = tuple(frozenset(s) for s in place_in)
        self.place_post = tuple(frozenset(s) for s in place_out)

        self._check_workflow_structure()

        self.silent = tuple(t for t, tr in enumerate(self.transitions) if tr.silent)
        self.observable = tuple(t for t, tr in enumerate(self.transitions) if not tr.silent)
        # silent transitions that do not sit behind a choice: fired eagerly
        self.lazy_silent = tuple(
            t for t in self.silent if all(len(self.place_post[p]) == 1 for p in self.pre[t])
        )
        self.labels = frozenset(self.transitions[t].label for t in self.observable)
        self.silent_step_bound = max(len(self.transitions) * len(self.places) * 4, 64)

    def _check_workflow_structure(self):
        sources = [p for p in range(len(self.places)) if not self.place_pre[p]]
        sinks = [p for p in range(len(self.places)) if not self.place_post[p]]
        if len(sources) != 1:
            names = [self.places[p] for p in sources]
            raise NetStructureError(f"expected exactly one source place, found {names}", names)
        if len(sinks) != 1:
            names = [self.places[p] for p in sinks]
            raise NetStructureError(f"expected exactly one sink place, found {names}", names)
        self.source, self.sink = sources[0], sinks[0]
        if self.source == self.sink:
            raise NetStructureError(
                f"place {self.places[self.source]!r} is both source and sink", [self.places[self.source]]
            )
        n_places = len(self.places)
        # nodes: places 0..P-1, transitions P..P+T-1
        succ = [[] for _ in range(n_places + len(self.transitions))]
        pred = [[] for _ in range(n_places + len(self.transitions))]
        for t in range(len(self.transitions)):
            for p in self.pre[t]:
                succ[p].append(n_places + t)
                pred[n_places + t].append(p)
            for p in self.post[t]:
                succ[n_places + t].append(p)
                pred[p].append(n_places + t)
        fwd = _reach_nodes(self.source, succ)
        bwd = _reach_nodes(self.sink, pred)
        bad = [i for i in range(len(succ)) if i not in fwd or i not in bwd]
        if bad:
            names = [self.places[i] if i < n_places else self.transitions[i - n_places].id for i in bad]
            raise NetStructureError(f"nodes not on a path from source to sink: {names}", names)

    # -- id helpers ---------------------------------------------------------

    def marking(self, *place_ids: str) -> Marking:
        """Canonical marking from place ids, e.g. ``net.marking("3", "10")``."""
        try:
            return tuple(sorted(self.place_index[p] for p in place_ids))
        except KeyError as exc:
            raise KeyError(f"unknown place {exc.args[0]!r}") from None

    def marking_names(self, m: Marking) -> tuple[str, ...]:
        return tuple(self.places[p] for p in m)

    def format_marking(self, m: Marking) -> str:
        return "{" + ", ".join(self.marking_names(m)) + "}"

    def tid(self, transition_id: str) -> int:
        try:
            return self.transition_index[transition_id]
        except KeyError:
            raise KeyError(f"unknown transition {transition_id!r}") from None

    def pid(self, place_id: str) -> int:
        try:
            return self.place_index[place_id]
        except KeyError:
            raise KeyError(f"unknown place {place_id!r}") from None

    def label(self, t: int) -> str | None:
        return self.transitions[t].label

    @property
    def initial_marking(self) -> Marking:
        return (self.source,)

    @property
    def final_marking(self) -> Marking:
        return (self.sink,)

    def is_normalized(self) -> bool:
        return not _mixed_split_places(self)

    def __eq__(self, other):
        if not isinstance(other, WorkflowNet):
            return NotImplemented
        return (self.places, self.transitions, frozenset(self.arcs)) == (
            other.places,
            other.transitions,
            frozenset(other.arcs),
        )

    def __hash__(self):
        return hash((self.places, self.transitions))

    def __repr__(self):
        return (
            f"WorkflowNet({len(self.places)} places, {len(self.observable)} observable + "
            f"{len(self.silent)} silent transitions)"
        )


def _mask(places: Iterable[int]) -> int:
    m = 0
    for p in places:
        m |= 1 << p
    return m


def to_mask(m: Marking) -> int:
    return _mask(m)


def from_mask(mask: int) -> Marking:
    out = []
    p = 0
    while mask:
        if mask & 1:
            out.append(p)
        mask >>= 1
        p += 1
    return tuple(out)


def _reach_nodes(start, succ):
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in succ[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


# -- token game ---------------------------------------------------------------


def input_places(net: WorkflowNet, transition_id: str) -> frozenset[str]:
    return frozenset(net.places[p] for p in net.pre[net.tid(transition_id)])


def output_places(net: WorkflowNet, transition_id: str) -> frozenset[str]:
    return frozenset(net.places[p] for p in net.post[net.tid(transition_id)])


def input_transitions(net: WorkflowNet, place_id: str) -> frozenset[str]:
    return frozenset(net.transitions[t].id for t in net.place_pre[net.pid(place_id)])


def output_transitions(net: WorkflowNet, place_id: str) -> frozenset[str]:
    return frozenset(net.transitions[t].id for t in net.place_post[net.pid(place_id)])


def enabled_transitions(net: WorkflowNet, m: Marking) -> frozenset[str]:
    mask = _mask(m)
    return frozenset(
        net.transitions[t].id
        for t in range(len(net.transitions))
        if net.pre_mask[t] & mask == net.pre_mask[t]
    )


def fire_mask(net: WorkflowNet, mask: int, t: int) -> int:
    """Fire transition index ``t`` on a bitmask marking (no enablement check)."""
    rest = mask & ~net.pre_mask[t]
    clash = rest & net.post_mask[t]
    if clash:
        raise SafenessError(net.transitions[t].id, [net.places[p] for p in from_mask(clash)])
    return rest | net.post_mask[t]


def fire(net: WorkflowNet, m: Marking, transition_id: str) -> Marking:
    """Fire ``transition_id`` in ``m``: remove its input tokens, add its output tokens."""
    t = net.tid(transition_id)
    mask = _mask(m)
    if net.pre_mask[t] & mask != net.pre_mask[t]:
        missing = sorted(net.pre[t] - set(m))
        raise NotEnabledError(transition_id, [net.places[p] for p in missing])
    return from_mask(fire_mask(net, mask, t))


# -- normalization ------------------------------------------------------------


def _mixed_split_places(net):
    out = []
    for p in range(len(net.places)):
        outs = net.place_post[p]
        if len(outs) > 1:
            kinds = {net.transitions[t].silent for t in outs}
            if len(kinds) == 2:
                out.append(p)
    return out


def normalize_mixed_xor_splits(net: WorkflowNet) -> WorkflowNet:
    """Route observable outputs of mixed XOR-splits through a fresh silent step.

    For a place whose output transitions are partly silent and partly
    observable, every arc ``p -> t`` with ``t`` observable becomes
    ``p -> tau -> p' -> t``. New nodes are appended, so existing place ids keep
    their integer ids. Nets without mixed splits are returned unchanged.
    """
    mixed = _mixed_split_places(net)
    if not mixed:
        return net
    used = set(net.places) | set(net.transition_index)

    def fresh(base):
        name, k = base, 1
        while name in used:
            k += 1
            name = f"{base}_{k}"
        used.add(name)
        return name

    places = list(net.places)
    transitions = list(net.transitions)
    rerouted = {}
    for p in mixed:
        pname = net.places[p]
        for t in sorted(net.place_post[p]):
            tr = net.transitions[t]
            if tr.silent:
                continue
            new_place = fresh(f"{pname}>{tr.id}")
            new_silent = fresh(f"tau:{pname}>{tr.id}")
            places.append(new_place)
            transitions.append(Transition(new_silent, None, True))
            rerouted[(pname, tr.id)] = (new_silent, new_place)
    arcs = []
    for src, dst in net.arcs:
        if (src, dst) in rerouted:
            s, q = rerouted[(src, dst)]
            arcs.extend([(src, s), (s, q), (q, dst)])
        else:
            arcs.append((src, dst))
    return WorkflowNet(places, transitions, arcs)


# -- parsing / serialization --------------------------------------------------


def parse_net(document: bytes | str, format: str = "native-json") -> WorkflowNet:
    """Parse a model document. ``format`` is ``native-json`` or ``pnml``."""
    if format in ("native-json", "json"):
        return _parse_native(document)
    if format == "pnml":
        return _parse_pnml(document)
    raise ValueError(f"unsupported model format {format!r}")


def load_net(path: str | Path, format: str | None = None) -> WorkflowNet:
    path = Path(path)
    if format is None:
        format = "pnml" if path.suffix.lower() == ".pnml" else "native-json"
    return parse_net(path.read_bytes(), format)


def _parse_native(document):
    try:
        data = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise NetParseError(f"malformed JSON model: {exc}") from None
    if not isinstance(data, dict):
        raise NetParseError("model document must be a JSON object")
    try:
        places = [str(p["id"]) for p in data["places"]]
        transitions = []
        for t in data["transitions"]:
            tid = str(t["id"])
            label = t.get("label")
            silent = t.get("silent")
            if silent is None:
                silent = label is None
            elif not isinstance(silent, bool):
                raise NetParseError(f"transition {tid!r}: 'silent' must be a boolean")
            if not silent and not label:
                raise NetParseError(f"observable transition {tid!r} has no label")
            transitions.append(Transition(tid, None if label is None else str(label), silent))
        arcs = [(str(a["from"]), str(a["to"])) for a in data["arcs"]]
    except (KeyError, TypeError) as exc:
        raise NetParseError(f"malformed model document: missing or invalid field {exc}") from None
    return WorkflowNet(places, transitions, arcs)


def serialize_net(net: WorkflowNet) -> bytes:
    doc = {
        "places": [{"id": p} for p in net.places],
        "transitions": [
            {"id": t.id, **({"label": t.label} if t.label is not None else {}), "silent": t.silent}
            for t in net.transitions
        ],
        "arcs": [{"from": s, "to": d} for s, d in net.arcs],
    }
    return json.dumps(doc, indent=1, ensure_ascii=False).encode("utf-8")


_PNML_CORE = {"pnml", "net", "page", "place", "transition", "arc", "name", "text", "toolspecific"}
_INVISIBLE_MARKERS = {"$invisible$", "invisible"}


def _local(tag):
    return tag.rsplit("}", 1)[-1]


def _parse_pnml(document):
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise NetParseError(f"malformed PNML: {exc}") from None
    places, transitions, arcs = [], [], []
    ignored = set()
    for el in root.iter():
        tag = _local(el.tag)
        if tag == "place":
            places.append(el.get("id"))
        elif tag == "transition":
            label = None
            silent = False
            for child in el:
                ctag = _local(child.tag)
                if ctag == "name":
                    for text in child:
                        if _local(text.tag) == "text" and text.text:
                            label = text.text.strip()
                elif ctag == "toolspecific" and child.get("activity") in _INVISIBLE_MARKERS:
                    silent = True
            if label is None:
                silent = True
            transitions.append(Transition(el.get("id"), label, silent))
        elif tag == "arc":
            arcs.append((el.get("source"), el.get("target")))
        elif tag not in _PNML_CORE:
            ignored.add(tag)
    if ignored:
        log.warning("PNML elements outside the supported subset were ignored: %s", sorted(ignored))
    if any(x is None for x in places) or any(t.id is None for t in transitions):
        raise NetParseError("PNML place/transition without id")
    if any(s is None or d is None for s, d in arcs):
        raise NetParseError("PNML arc without source/target")
    if not places:
        raise NetParseError("PNML document contains no places")
    return WorkflowNet(places, transitions, arcs)

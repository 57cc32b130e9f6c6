"""Cost transducers: model, JSON format, run semantics and desk-scale oracles."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterator, Sequence

from .errors import (
    AmbiguityError,
    DocumentError,
    SizeBoundExceeded,
    TransducerFormatError,
)
from .group_core import Group, IntGroup, group_from_spec

EMPTY_MARKER = "ε"


@dataclass(frozen=True)
class Transition:
    src: Hashable
    symbol: str
    weight: object
    marker: str
    dst: Hashable


@dataclass(frozen=True)
class OutputTuple:
    """An output ``((marker, position), ...)`` with 1-based positions, and its weight."""

    entries: tuple
    weight: object

    def __len__(self):
        return len(self.entries)


@dataclass
class CostTransducer:
    group: Group
    alphabet: tuple
    markers: tuple
    empty_marker: str
    states: tuple
    initial: Hashable
    finals: frozenset
    transitions: tuple
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        self.markers = tuple(self.markers)
        self.states = tuple(self.states)
        self.finals = frozenset(self.finals)
        self.transitions = tuple(self.transitions)
        if len(set(self.states)) != len(self.states):
            raise TransducerFormatError("duplicate state", "states")
        sset = set(self.states)
        if self.initial not in sset:
            raise TransducerFormatError(f"unknown state {self.initial!r}", "initial")
        for f in self.finals:
            if f not in sset:
                raise TransducerFormatError(f"unknown state {f!r}", "finals")
        if self.empty_marker not in self.markers:
            self.markers = self.markers + (self.empty_marker,)
        aset, mset = set(self.alphabet), set(self.markers)
        for k, tr in enumerate(self.transitions):
            where = f"transitions[{k}]"
            if tr.src not in sset:
                raise TransducerFormatError(f"unknown state {tr.src!r}", where + ".from")
            if tr.dst not in sset:
                raise TransducerFormatError(f"unknown state {tr.dst!r}", where + ".to")
            if tr.symbol not in aset:
                raise TransducerFormatError(f"symbol {tr.symbol!r} not in alphabet", where + ".symbol")
            if tr.marker not in mset:
                raise TransducerFormatError(f"marker {tr.marker!r} not declared", where + ".marker")

    # -- indexing ---------------------------------------------------------
    @property
    def state_index(self) -> dict:
        if self._index is None:
            self._index = {q: i for i, q in enumerate(self.states)}
        return self._index

    def by_source_symbol(self) -> dict:
        """``(src, symbol) -> [transition index]`` in declaration order."""
        out = defaultdict(list)
        for k, tr in enumerate(self.transitions):
            out[tr.src, tr.symbol].append(k)
        return out

    def size(self) -> int:
        return len(self.states) + len(self.transitions)

    def check_document(self, doc: Sequence[str]) -> None:
        aset = set(self.alphabet)
        for i, a in enumerate(doc, start=1):
            if a not in aset:
                raise DocumentError(f"symbol {a!r} at position {i} is not in the alphabet", position=i)

    def output_of(self, run: Sequence[int]) -> tuple:
        em = self.empty_marker
        return tuple(
            (self.transitions[k].marker, i)
            for i, k in enumerate(run, start=1)
            if self.transitions[k].marker != em
        )

    def weight_of(self, run: Sequence[int]):
        return self.group.total(self.transitions[k].weight for k in run)

    # -- JSON ----------------------------------------------------------------
    def to_json(self) -> dict:
        g = self.group
        return {
            "group": g.spec(),
            "alphabet": list(self.alphabet),
            "markers": list(self.markers),
            "empty_marker": self.empty_marker,
            "states": list(self.states),
            "initial": self.initial,
            "finals": sorted(self.finals, key=self.state_index.get),
            "transitions": [
                {"from": t.src, "symbol": t.symbol, "weight": g.to_json(t.weight), "marker": t.marker, "to": t.dst}
                for t in self.transitions
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CostTransducer":
        if not isinstance(obj, dict):
            raise TransducerFormatError("top level must be an object")
        for key in ("alphabet", "states", "initial", "finals", "transitions"):
            if key not in obj:
                raise TransducerFormatError("missing field", key)
        try:
            group = group_from_spec(obj.get("group", "int"))
        except ValueError as exc:
            raise TransducerFormatError(str(exc), "group") from None
        empty = obj.get("empty_marker", EMPTY_MARKER)
        states = [_hashable(q) for q in obj["states"]]
        trs = []
        if not isinstance(obj["transitions"], list):
            raise TransducerFormatError("must be a list", "transitions")
        for k, t in enumerate(obj["transitions"]):
            where = f"transitions[{k}]"
            if not isinstance(t, dict):
                raise TransducerFormatError("must be an object", where)
            for key in ("from", "symbol", "to"):
                if key not in t:
                    raise TransducerFormatError("missing field", f"{where}.{key}")
            try:
                w = group.from_json(t.get("weight", 0 if group.dim in (None, 1) else [0] * group.dim))
            except (ValueError, OverflowError) as exc:
                raise TransducerFormatError(str(exc), f"{where}.weight") from None
            trs.append(Transition(_hashable(t["from"]), t["symbol"], w, t.get("marker", empty), _hashable(t["to"])))
        return cls(
            group=group,
            alphabet=obj["alphabet"],
            markers=obj.get("markers", ()),
            empty_marker=empty,
            states=states,
            initial=_hashable(obj["initial"]),
            finals=[_hashable(q) for q in obj["finals"]],
            transitions=trs,
        )


def _hashable(v):
    return tuple(v) if isinstance(v, list) else v


def load_transducer(path) -> CostTransducer:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TransducerFormatError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from None
    return CostTransducer.from_json(obj)


def load_document(path, transducer: CostTransducer | None = None) -> str:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    # a single trailing newline is an editor artifact, not content
    if text.endswith("\n"):
        text = text[:-1]
    if transducer is not None:
        transducer.check_document(text)
    return text


def make_transducer(transitions, initial=0, finals=(), group: Group | None = None,
                    empty_marker: str = EMPTY_MARKER, states=None, alphabet=None) -> CostTransducer:
    """Convenience constructor from ``(src, symbol, weight, marker, dst)`` tuples."""
    trs = [t if isinstance(t, Transition) else Transition(*t) for t in transitions]
    if states is None:
        seen = {initial: None}
        for t in trs:
            seen.setdefault(t.src)
            seen.setdefault(t.dst)
        for f in finals:
            seen.setdefault(f)
        states = list(seen)
    if alphabet is None:
        alphabet = sorted({t.symbol for t in trs})
    markers = [empty_marker] + sorted({t.marker for t in trs} - {empty_marker})
    return CostTransducer(group or IntGroup(), alphabet, markers, empty_marker, states, initial, finals, trs)


# ---------------------------------------------------------------------------
# normalization


def _fresh_state(states, base="q_f"):
    taken = set(states)
    name, k = base, 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return name


def normalize_single_final(T: CostTransducer) -> CostTransducer:
    """Add a fresh final state ``q_f`` without outgoing transitions.

    Every transition into a former final state is duplicated into ``q_f``;
    the former finals stay in the automaton as ordinary states.
    """
    qf = _fresh_state(T.states)
    extra = [Transition(t.src, t.symbol, t.weight, t.marker, qf) for t in T.transitions if t.dst in T.finals]
    return CostTransducer(
        T.group, T.alphabet, T.markers, T.empty_marker,
        T.states + (qf,), T.initial, frozenset([qf]), T.transitions + tuple(extra),
    )


def is_normalized(T: CostTransducer) -> bool:
    if len(T.finals) != 1:
        return False
    (qf,) = T.finals
    return qf != T.initial and all(t.src != qf for t in T.transitions)


def trim(T: CostTransducer) -> CostTransducer:
    """Drop states that are not both accessible and co-accessible."""
    fwd = {T.initial}
    stack = [T.initial]
    succ, pred = defaultdict(list), defaultdict(list)
    for t in T.transitions:
        succ[t.src].append(t.dst)
        pred[t.dst].append(t.src)
    while stack:
        for r in succ[stack.pop()]:
            if r not in fwd:
                fwd.add(r)
                stack.append(r)
    bwd = set(T.finals)
    stack = list(bwd)
    while stack:
        for r in pred[stack.pop()]:
            if r not in bwd:
                bwd.add(r)
                stack.append(r)
    keep = fwd & bwd | {T.initial}
    return CostTransducer(
        T.group, T.alphabet, T.markers, T.empty_marker,
        [q for q in T.states if q in keep], T.initial, T.finals & keep,
        [t for t in T.transitions if t.src in keep and t.dst in keep],
    )


# ---------------------------------------------------------------------------
# brute-force semantics


def accepting_runs(T: CostTransducer, doc: Sequence[str], max_runs: int = 1_000_000) -> Iterator[tuple]:
    """All accepting runs as tuples of transition indices (DFS with co-reachability pruning)."""
    n = len(doc)
    T.check_document(doc)
    idx = T.by_source_symbol()
    # alive[i] = states from which the suffix doc[i:] can be accepted
    alive = [set() for _ in range(n + 1)]
    alive[n] = set(T.finals)
    for i in range(n - 1, -1, -1):
        a = doc[i]
        alive[i] = {t.src for t in T.transitions if t.symbol == a and t.dst in alive[i + 1]}
    if T.initial not in alive[0]:
        return
    count = 0
    run: list[int] = []

    def dfs(q, i):
        nonlocal count
        if i == n:
            count += 1
            if count > max_runs:
                raise SizeBoundExceeded(f"more than {max_runs} accepting runs")
            yield tuple(run)
            return
        nxt = alive[i + 1]
        for k in idx.get((q, doc[i]), ()):
            r = T.transitions[k].dst
            if r in nxt:
                run.append(k)
                yield from dfs(r, i + 1)
                run.pop()

    yield from dfs(T.initial, 0)


def brute_force_outputs(T: CostTransducer, doc: Sequence[str], max_len: int = 12,
                        max_runs: int = 1_000_000) -> set:
    """The exact output set with weights, by scanning every accepting run.

    Raises :class:`AmbiguityError` when two runs give one output two weights.
    """
    if len(doc) > max_len:
        raise SizeBoundExceeded(f"document length {len(doc)} exceeds the oracle bound {max_len}")
    seen: dict = {}
    g = T.group
    for run in accepting_runs(T, doc, max_runs):
        out = T.output_of(run)
        w = T.weight_of(run)
        if out in seen:
            prev_run, prev_w = seen[out]
            if not g.eq(prev_w, w):
                raise AmbiguityError(
                    "".join(doc) if all(isinstance(a, str) for a in doc) else tuple(doc),
                    [T.transitions[k] for k in prev_run],
                    [T.transitions[k] for k in run],
                )
            continue
        seen[out] = (run, w)
    return {OutputTuple(out, w) for out, (_, w) in seen.items()}


def brute_force_runs(T: CostTransducer, doc: Sequence[str], max_runs: int = 1_000_000) -> list:
    """Multiset of ``(output, weight)`` over accepting runs, sorted by ``repr``."""
    res = [(T.output_of(r), T.weight_of(r)) for r in accepting_runs(T, doc, max_runs)]
    res.sort(key=repr)
    return res


# ---------------------------------------------------------------------------
# unambiguity


def check_unambiguous(T: CostTransducer, max_len: int = 8):
    """``True``, or a witness ``(document, run1, run2)`` of two accepting runs with equal output.

    Two runs with the same output read the same symbols and emit the same
    marker at every position, so it suffices to explore pairs of runs moving
    in lockstep on (symbol, marker) and flag when they first differ.
    """
    by_src = defaultdict(list)
    for k, t in enumerate(T.transitions):
        by_src[t.src].append(k)
    start = (T.initial, T.initial, False)
    layer = {start: None}
    parents = [layer]
    for _ in range(max_len):
        nxt = {}
        for (p1, p2, div) in layer:
            for k1 in by_src[p1]:
                t1 = T.transitions[k1]
                for k2 in by_src[p2]:
                    t2 = T.transitions[k2]
                    if t1.symbol != t2.symbol or t1.marker != t2.marker:
                        continue
                    key = (t1.dst, t2.dst, div or k1 != k2)
                    if key not in nxt:
                        nxt[key] = ((p1, p2, div), k1, k2)
        if not nxt:
            break
        parents.append(nxt)
        for key in nxt:
            if key[2] and key[0] in T.finals and key[1] in T.finals:
                return _witness(T, parents, key)
        layer = nxt
    return True


def _witness(T, parents, key):
    run1, run2 = [], []
    for depth in range(len(parents) - 1, 0, -1):
        prev, k1, k2 = parents[depth][key]
        run1.append(T.transitions[k1])
        run2.append(T.transitions[k2])
        key = prev
    run1.reverse()
    run2.reverse()
    doc = "".join(t.symbol for t in run1)
    return doc, run1, run2

"""Ranked enumeration of s-to-t paths and of transducer outputs.

Two enumerators share the implicit heap from :mod:`rankenum.eppstein`:

* :func:`enumerate_simple` pops cursors from a small auxiliary heap that
  holds one entry per non-empty bucket, where a bucket collects the
  discovered cursors whose last D_G edge is the same;
* :func:`enumerate_epoch` emits answers in doubling epochs, and during
  each epoch selects and sorts the answers of the next one in paced steps.

Both break weight ties by discovery order, so they emit the same sequence.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .eppstein import EppsteinDag, Navigator, PathCursor, build_eppstein_dag
from .errors import InvalidArgument
from .group_core import GeneratorBasis, extend_basis
from .nsum_sort.sorter import NSumSorter
from .product_dag import LabeledWeightedDag, ShortestPathTree, build_product_dag, prune, shortest_path_tree
from .transducer import CostTransducer, is_normalized, normalize_single_final

ROOT_BUCKET = -1
ALGORITHMS = ("simple", "epoch")


@dataclass
class EnumStats:
    outputs: int = 0
    aux_size: int = 0
    aux_max: int = 0
    aux_bound: int = 0
    moves: int = 0
    label_items: int = 0
    epochs: int = 0
    epoch: int = 0
    underruns: int = 0
    select_units: int = 0
    sort_units: int = 0
    sorter_fallbacks: int = 0
    epoch_log: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["epoch_log"] = list(self.epoch_log)
        return d


# ---------------------------------------------------------------------------
# simple enumerator


def enumerate_simple(D: EppsteinDag, limit: int | None = None, stats: EnumStats | None = None,
                     nav: Navigator | None = None, check: bool = False) -> Iterator[PathCursor]:
    """Cursors in non-decreasing weight order, ties by discovery order.

    The auxiliary heap holds ``(acc, seq, bucket)`` for the head of every
    non-empty bucket, so its size never exceeds ``|edges(D_G)| + 1``.
    With ``check`` set, each append verifies that its bucket stays sorted.
    """
    if D.empty or (limit is not None and limit <= 0):
        return
    nav = nav or Navigator(D)
    stats = stats if stats is not None else EnumStats()
    stats.aux_bound = D.num_edges + 1
    root = nav.root()
    buckets: dict[int, deque] = {ROOT_BUCKET: deque([root])}
    aux = [(root.acc, 0, ROOT_BUCKET)]
    seq = 1
    emitted = 0
    push, pop = heapq.heappush, heapq.heappop
    while aux:
        stats.aux_size = len(aux)
        if stats.aux_size > stats.aux_max:
            stats.aux_max = stats.aux_size
        _, _, b = pop(aux)
        L = buckets[b]
        c = L.popleft()
        if L:
            h = L[0]
            push(aux, (h.acc, h.seq, b))
        else:
            del buckets[b]
        yield c
        emitted += 1
        stats.outputs += 1
        if limit is not None and emitted >= limit:
            break
        for eid, child in nav.expand(c):
            child.seq = seq
            seq += 1
            L = buckets.get(eid)
            if L is None:
                buckets[eid] = deque([child])
                push(aux, (child.acc, child.seq, eid))
            else:
                if check and child.acc < L[-1].acc:
                    raise AssertionError(f"bucket {eid} out of order")
                L.append(child)
    stats.moves += nav.moves


# ---------------------------------------------------------------------------
# selection


def select_steps(nav: Navigator, k: int):
    """Best-first selection of the ``k`` smallest cursors.

    Yields one work unit per pop; returns the selected cursors in preorder
    of their discovery tree, so the result is not sorted by weight.
    """
    if k <= 0 or nav.D.empty:
        return []
    root = nav.root()
    heap = [(root.acc, 0, root)]
    seq = 1
    picked: list[PathCursor] = []
    while heap and len(picked) < k:
        _, _, c = heapq.heappop(heap)
        picked.append(c)
        kids = nav.expand(c)
        for _, child in kids:
            child.seq = seq
            seq += 1
            heapq.heappush(heap, (child.acc, child.seq, child))
        # one unit for the pop, one per cursor move and push
        yield 1 + len(kids)
    return _preorder(picked)


def _preorder(picked: list) -> list:
    index = {id(c): i for i, c in enumerate(picked)}
    kids: list[list] = [[] for _ in picked]
    for i, c in enumerate(picked[1:], start=1):
        kids[index[id(c.parent)]].append(i)
    out, stack = [], [0]
    while stack:
        i = stack.pop()
        out.append(picked[i])
        stack.extend(reversed(kids[i]))
    return out


def select_k_smallest(D: EppsteinDag, k: int, nav: Navigator | None = None) -> list:
    """The ``k`` smallest r-paths of D_G (ties by discovery order), unsorted."""
    gen = select_steps(nav or Navigator(D), k)
    while True:
        try:
            next(gen)
        except StopIteration as stop:
            return stop.value


# ---------------------------------------------------------------------------
# epoch enumerator


def path_coefficients(D: EppsteinDag):
    """Per-sidetrack coefficient deltas, the source's tree vector and the basis.

    The coefficient vector of a path counts how often each distinct edge
    weight occurs on it; evaluating it on the basis gives the path weight.
    """
    G, tree = D.G, D.tree
    uniq, wid = np.unique(G.weight, axis=0, return_inverse=True)
    wid = np.asarray(wid, dtype=np.int64).reshape(-1)
    t = uniq.shape[0]
    basis = GeneratorBasis(G.group, tuple(G.group.from_array(uniq)))
    A = kernels.tree_coeff_kernel(G.num_nodes, tree.tree_edge, G.dst, wid, t).astype(np.int64)
    side = D.side
    coeffs = A[G.dst[side]] - A[G.src[side]]
    coeffs[np.arange(side.shape[0]), wid[side]] += 1
    return coeffs, A[G.s].copy(), basis


def _job(nav: Navigator, K: int, ext_basis: GeneratorBasis, sorter: NSumSorter, log: dict):
    cur = yield from select_steps(nav, K)
    log["selected"] = len(cur)
    if not cur:
        return []
    alpha = np.vstack([c.alpha for c in cur])
    seq = np.fromiter((c.seq + 1 for c in cur), dtype=np.int64, count=len(cur)).reshape(-1, 1)
    perm = yield from sorter.steps(np.hstack([alpha, seq]), ext_basis, assume_distinct=True)
    rep = sorter.reports[-1]
    log["backend"] = rep.backend_used
    log["comparisons"] = rep.comparisons
    log["fallback"] = rep.fallback
    return [cur[p] for p in perm]


def enumerate_epoch(D: EppsteinDag, limit: int | None = None, stats: EnumStats | None = None,
                    sorter: NSumSorter | None = None, slack: float = 2.0) -> Iterator[PathCursor]:
    """Cursors in the same order as :func:`enumerate_simple`, emitted in doubling epochs.

    With ``n = |V|``, epoch 1 emits ranks ``1..n`` and epoch ``i > 1`` emits
    ``(2^(i-2) n, 2^(i-1) n]``. While epoch ``i`` runs, the ``2^i n``
    smallest paths are selected and sorted, a bounded number of work units
    per emitted answer; if that work is not done when the epoch ends it is
    finished on the spot and counted as an underrun.
    """
    if D.empty or (limit is not None and limit <= 0):
        return
    if slack <= 0:
        raise InvalidArgument("slack must be positive")
    stats = stats if stats is not None else EnumStats()
    sorter = sorter or NSumSorter()
    coeffs, base_alpha, basis = path_coefficients(D)
    ext_basis = extend_basis(basis)
    nav = Navigator(D, coeffs=coeffs, base_alpha=base_alpha)
    n = max(1, D.G.num_nodes)

    def run(gen):
        units = 0
        while True:
            try:
                units += next(gen)
            except StopIteration as stop:
                return stop.value, units

    first_log = {"epoch": 0, "target": n}
    ranked, units = run(_job(nav, n, ext_basis, sorter, first_log))
    first_log["units"] = units
    stats.epoch_log.append(first_log)
    per_unit = units / max(1.0, n * math.log2(n + 1))
    emitted = 0
    lo, hi = 0, n
    epoch = 1
    while True:
        exhausted = len(ranked) < hi
        hi = min(hi, len(ranked))
        stop_at = hi if limit is None else min(hi, limit)
        K = 2 * n * (1 << (epoch - 1))  # 2^epoch * n
        background = None
        log = {"epoch": epoch, "target": K}
        if not exhausted and stop_at == hi and (limit is None or limit > hi):
            background = _job(nav, K, ext_basis, sorter, log)
            est = per_unit * K * math.log2(K + 1)
            quota = max(1, math.ceil(slack * est / max(1, hi - lo)))
        done_units = 0
        result = None
        stats.epochs += 1
        stats.epoch = epoch
        for r in range(lo, stop_at):
            c = ranked[r]
            yield c
            emitted += 1
            stats.outputs += 1
            if background is not None:
                spent = 0
                while spent < quota:
                    try:
                        spent += next(background)
                    except StopIteration as stop:
                        result = stop.value
                        background = None
                        break
                done_units += spent
        if limit is not None and emitted >= limit:
            break
        if exhausted or stop_at < hi:
            break
        if background is not None:
            stats.underruns += 1
            log["underrun"] = True
            result, extra = run(background)
            done_units += extra
        log["units"] = done_units
        stats.epoch_log.append(log)
        stats.select_units += log.get("selected", 0)
        if log.get("fallback"):
            stats.sorter_fallbacks += 1
        per_unit = max(per_unit, done_units / max(1.0, K * math.log2(K + 1)))
        ranked = result
        lo, hi = hi, K
        epoch += 1
    stats.moves += nav.moves


# ---------------------------------------------------------------------------
# transducer facade


@dataclass
class Prepared:
    """Everything built before the first answer."""

    transducer: CostTransducer       # as given
    normalized: CostTransducer
    document: str
    G: LabeledWeightedDag
    tree: ShortestPathTree | None
    D: EppsteinDag
    orig_tid: np.ndarray             # transition id in ``normalized`` -> id in ``transducer``

    def run_of(self, nav: Navigator, c: PathCursor) -> tuple:
        tids = self.G.edge_tid[nav.edges(c)]
        return tuple(int(v) for v in self.orig_tid[tids])


@dataclass(frozen=True)
class Ranked:
    rank: int
    weight: object
    entries: tuple
    cursor: PathCursor | None = field(default=None, repr=False, compare=False)
    source: object = field(default=None, repr=False, compare=False)

    def run(self) -> tuple:
        """Transition indices (into the input transducer) of the accepting run."""
        if self.cursor is None:
            return ()
        prep, nav = self.source
        return prep.run_of(nav, self.cursor)

    def to_json(self, group) -> dict:
        return {"rank": self.rank, "weight": group.to_json(self.weight),
                "tuple": [[m, p] for m, p in self.entries]}


def preprocess(T: CostTransducer, doc: Sequence[str]) -> Prepared:
    """Normalize, build the product DAG, prune it, and build the implicit heap."""
    doc = "".join(doc)
    T.check_document(doc)
    if is_normalized(T):
        Tn = T
        orig = np.arange(len(T.transitions), dtype=np.int64)
    else:
        Tn = normalize_single_final(T)
        base = len(T.transitions)
        dup = [k for k, t in enumerate(T.transitions) if t.dst in T.finals]
        orig = np.concatenate([np.arange(base, dtype=np.int64), np.asarray(dup, dtype=np.int64)])
    G = prune(build_product_dag(Tn, doc))
    tree = None if G.is_empty else shortest_path_tree(G)
    D = build_eppstein_dag(G, tree)
    return Prepared(T, Tn, doc, G, tree, D, orig)


def enumerate_transducer(T: CostTransducer, doc: Sequence[str], algorithm: str = "simple",
                         limit: int | None = None, stats: EnumStats | None = None,
                         sorter: NSumSorter | None = None, slack: float = 2.0,
                         prepared: Prepared | None = None) -> Iterator[Ranked]:
    """Outputs of ``T`` on ``doc`` by non-decreasing weight, as :class:`Ranked` items.

    ``T`` must be unambiguous; this is not re-checked here (see
    :func:`rankenum.transducer.check_unambiguous`).
    """
    if algorithm not in ALGORITHMS:
        raise InvalidArgument(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if limit is not None and limit <= 0:
        return
    stats = stats if stats is not None else EnumStats()
    prep = prepared or preprocess(T, doc)
    group = T.group
    if len(prep.document) == 0:
        # the product DAG has no edges; only the empty run exists
        if T.initial in T.finals:
            stats.outputs += 1
            yield Ranked(1, group.zero(), ())
        return
    D = prep.D
    if D.empty:
        return
    if algorithm == "simple":
        nav = Navigator(D)
        it = enumerate_simple(D, limit, stats, nav)
    else:
        it = enumerate_epoch(D, limit, stats, sorter, slack)
        nav = Navigator(D)
    counter = [0]
    for rank, c in enumerate(it, start=1):
        yield Ranked(rank, nav.weight(c), nav.label(c, counter), c, (prep, nav))
    stats.label_items += counter[0]


def ranked_outputs(T: CostTransducer, doc: Sequence[str], **kw) -> list:
    return list(enumerate_transducer(T, doc, **kw))


__all__ = [
    "ALGORITHMS",
    "EnumStats",
    "Prepared",
    "Ranked",
    "enumerate_epoch",
    "enumerate_simple",
    "enumerate_transducer",
    "path_coefficients",
    "preprocess",
    "ranked_outputs",
    "select_k_smallest",
    "select_steps",
]

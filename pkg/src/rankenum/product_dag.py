"""The weighted, labeled product DAG of a transducer and a document."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .errors import InvalidArgument, NoPaths, PreconditionError
from .group_core import Group, IntGroup
from .transducer import CostTransducer, is_normalized

NO_LABEL = -1
# path weights are accumulated in int64; keep a wide margin
WEIGHT_LIMIT = 2**60


@dataclass
class LabeledWeightedDag:
    """Edges are parallel arrays; node ids are topological.

    Edge ids are a topological edge order: every edge leaving ``v`` has a
    larger id than every edge entering ``v``. Product DAGs order edges by
    (layer, transition); :func:`dag_from_edges` sorts them by source.

    ``label_marker[e]`` indexes ``markers`` (``-1`` for an unlabeled edge) and
    ``label_pos[e]`` is the 1-based document position of the label.
    """

    group: Group
    num_nodes: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    label_marker: np.ndarray
    label_pos: np.ndarray
    s: int
    t: int
    markers: list
    max_path_len: int
    node_state: np.ndarray | None = None
    node_pos: np.ndarray | None = None
    edge_tid: np.ndarray | None = None
    state_names: tuple | None = None

    @property
    def num_edges(self) -> int:
        return int(self.src.shape[0])

    @property
    def is_empty(self) -> bool:
        return self.num_nodes == 0

    def edge_label(self, e: int):
        m = int(self.label_marker[e])
        return None if m < 0 else (self.markers[m], int(self.label_pos[e]))

    def edge_weight(self, e: int):
        return self.group.from_row(self.weight[e])

    def node_name(self, v: int):
        if self.node_state is None:
            return v
        q = int(self.node_state[v])
        return (self.state_names[q] if self.state_names else q, int(self.node_pos[v]))

    def size(self) -> int:
        return self.num_nodes + self.num_edges


@dataclass
class ShortestPathTree:
    dist: np.ndarray
    tree_edge: np.ndarray
    tnext: np.ndarray
    beta_head: np.ndarray
    _labels: dict = field(default_factory=dict, repr=False)

    def distance(self, group: Group, v: int):
        return group.from_row(self.dist[v])


def _require_engine_group(group: Group):
    if group.dim is None:
        raise InvalidArgument(
            f"group {group.spec()!r} has no fixed-width form; the enumeration engine needs int or lex:K"
        )


def _check_magnitude(weight: np.ndarray, max_path_len: int):
    if weight.size == 0:
        return
    mx = int(np.abs(weight).max())
    if mx * (max_path_len + 1) > WEIGHT_LIMIT:
        raise OverflowError("edge weights too large: path sums could overflow int64")


def build_product_dag(T: CostTransducer, doc: Sequence[str]) -> LabeledWeightedDag:
    """Node ``(q, i)`` gets id ``i*|Q| + index(q)``; edges are ordered by (layer, transition)."""
    if not is_normalized(T):
        raise PreconditionError("transducer must have a single final state without outgoing transitions")
    _require_engine_group(T.group)
    T.check_document(doc)
    Q = len(T.states)
    n = len(doc)
    sidx = T.state_index
    sym_code = {a: k for k, a in enumerate(T.alphabet)}
    codes = np.fromiter((sym_code[a] for a in doc), dtype=np.int64, count=n)

    trs = T.transitions
    nt = len(trs)
    t_src = np.fromiter((sidx[t.src] for t in trs), dtype=np.int64, count=nt)
    t_dst = np.fromiter((sidx[t.dst] for t in trs), dtype=np.int64, count=nt)
    t_sym = np.fromiter((sym_code[t.symbol] for t in trs), dtype=np.int64, count=nt)
    by_sym_tid = np.argsort(t_sym, kind="stable").astype(np.int64)
    by_sym_start = np.zeros(len(T.alphabet) + 1, np.int64)
    np.cumsum(np.bincount(t_sym, minlength=len(T.alphabet)), out=by_sym_start[1:])

    src, dst, tid, pos = kernels.product_edges_kernel(codes, Q, by_sym_start, by_sym_tid, t_src, t_dst)

    markers = [m for m in T.markers if m != T.empty_marker]
    mcode = {m: k for k, m in enumerate(markers)}
    t_marker = np.array([mcode.get(t.marker, NO_LABEL) for t in trs], dtype=np.int32)
    wtab = T.group.to_array([t.weight for t in trs])
    weight = wtab[tid]
    _check_magnitude(weight, n)
    label_marker = t_marker[tid]

    (qf,) = T.finals
    num_nodes = Q * (n + 1)
    node_ids = np.arange(num_nodes, dtype=np.int64)
    return LabeledWeightedDag(
        group=T.group,
        num_nodes=num_nodes,
        src=src,
        dst=dst,
        weight=np.ascontiguousarray(weight, dtype=np.int64),
        label_marker=np.ascontiguousarray(label_marker, dtype=np.int32),
        label_pos=pos,
        s=sidx[T.initial],
        t=n * Q + sidx[qf],
        markers=markers,
        max_path_len=n,
        node_state=(node_ids % Q).astype(np.int32),
        node_pos=(node_ids // Q).astype(np.int32),
        edge_tid=tid,
        state_names=T.states,
    )


def dag_from_edges(num_nodes: int, edges, s: int, t: int, group: Group | None = None) -> LabeledWeightedDag:
    """Generic DAG from ``(u, v, weight, label)`` with ``u < v``; ``label`` is ``None`` or ``(marker, pos)``."""
    group = group or IntGroup()
    _require_engine_group(group)
    edges = list(edges)
    for u, v, *_ in edges:
        if not (0 <= u < v < num_nodes):
            raise InvalidArgument(f"edge ({u}, {v}) is not forward in topological numbering")
    order = sorted(range(len(edges)), key=lambda k: edges[k][0])
    edges = [edges[k] for k in order]
    markers: list = []
    mcode: dict = {}
    lm, lp = [], []
    for _, _, _, lab in edges:
        if lab is None:
            lm.append(NO_LABEL)
            lp.append(0)
        else:
            m, p = lab
            if m not in mcode:
                mcode[m] = len(markers)
                markers.append(m)
            lm.append(mcode[m])
            lp.append(p)
    m = len(edges)
    weight = group.to_array([e[2] for e in edges]) if m else np.zeros((0, group.dim), np.int64)
    _check_magnitude(weight, num_nodes)
    return LabeledWeightedDag(
        group=group,
        num_nodes=num_nodes,
        src=np.array([e[0] for e in edges], dtype=np.int64),
        dst=np.array([e[1] for e in edges], dtype=np.int64),
        weight=np.ascontiguousarray(weight, dtype=np.int64),
        label_marker=np.array(lm, dtype=np.int32),
        label_pos=np.array(lp, dtype=np.int32),
        s=s,
        t=t,
        markers=markers,
        max_path_len=num_nodes,
    )


def prune(G: LabeledWeightedDag) -> LabeledWeightedDag:
    """Keep nodes that lie on some s-to-t path; ids are compacted in order."""
    if G.is_empty:
        return G
    fwd, bwd = kernels.reach_kernel(G.num_nodes, G.src, G.dst, G.s, G.t)
    keep = fwd & bwd
    if not keep[G.t]:
        return _empty_like(G)
    new_id = np.cumsum(keep) - 1
    ekeep = keep[G.src] & keep[G.dst]
    return LabeledWeightedDag(
        group=G.group,
        num_nodes=int(keep.sum()),
        src=new_id[G.src[ekeep]],
        dst=new_id[G.dst[ekeep]],
        weight=np.ascontiguousarray(G.weight[ekeep]),
        label_marker=G.label_marker[ekeep],
        label_pos=G.label_pos[ekeep],
        s=int(new_id[G.s]),
        t=int(new_id[G.t]),
        markers=G.markers,
        max_path_len=G.max_path_len,
        node_state=None if G.node_state is None else G.node_state[keep],
        node_pos=None if G.node_pos is None else G.node_pos[keep],
        edge_tid=None if G.edge_tid is None else G.edge_tid[ekeep],
        state_names=G.state_names,
    )


def _empty_like(G: LabeledWeightedDag) -> LabeledWeightedDag:
    k = G.weight.shape[1] if G.weight.ndim == 2 else (G.group.dim or 1)
    return LabeledWeightedDag(
        group=G.group, num_nodes=0,
        src=np.zeros(0, np.int64), dst=np.zeros(0, np.int64), weight=np.zeros((0, k), np.int64),
        label_marker=np.zeros(0, np.int32), label_pos=np.zeros(0, np.int32),
        s=-1, t=-1, markers=G.markers, max_path_len=G.max_path_len,
        node_state=None if G.node_state is None else G.node_state[:0],
        node_pos=None if G.node_pos is None else G.node_pos[:0],
        edge_tid=None if G.edge_tid is None else G.edge_tid[:0],
        state_names=G.state_names,
    )


def shortest_path_tree(G: LabeledWeightedDag) -> ShortestPathTree:
    if G.is_empty:
        raise NoPaths("graph has no s-to-t path")
    dist, tree = kernels.sp_tree_kernel(G.num_nodes, G.src, G.dst, G.weight, G.t)
    if tree[G.s] < 0 and G.s != G.t:
        raise NoPaths("sink not reachable from source")
    labeled = G.label_marker >= 0
    head, tnext = kernels.beta_kernel(G.num_nodes, tree, G.dst, labeled)
    return ShortestPathTree(dist=dist, tree_edge=tree, tnext=tnext, beta_head=head)


def tree_path_label(G: LabeledWeightedDag, T: ShortestPathTree, v: int, stop: int = -1) -> list:
    """Labels on the tree path from ``v`` until node ``stop`` (or the sink)."""
    out = []
    h = int(T.beta_head[v])
    stop_head = -1 if stop < 0 else int(T.beta_head[stop])
    while h >= 0 and h != stop_head:
        e = int(T.tree_edge[h])
        out.append(G.edge_label(e))
        h = int(T.beta_head[T.tnext[h]])
    return out


def iter_paths(G: LabeledWeightedDag, limit: int | None = None) -> Iterator[tuple]:
    """DFS over all s-to-t paths as ``(weight, labels, edges)``; a test oracle."""
    if G.is_empty:
        return
    out_edges: dict = {}
    for e in range(G.num_edges):
        out_edges.setdefault(int(G.src[e]), []).append(e)
    g = G.group
    count = 0
    stack: list = []

    def dfs(v, w):
        nonlocal count
        if v == G.t:
            count += 1
            if limit is not None and count > limit:
                raise OverflowError(f"more than {limit} paths")
            labels = tuple(lab for lab in (G.edge_label(e) for e in stack) if lab is not None)
            yield w, labels, tuple(stack)
        for e in out_edges.get(v, ()):
            stack.append(e)
            yield from dfs(int(G.dst[e]), g.add(w, G.edge_weight(e)))
            stack.pop()

    yield from dfs(G.s, g.zero())


def count_paths(G: LabeledWeightedDag) -> int:
    if G.is_empty:
        return 0
    cnt = [0] * G.num_nodes
    cnt[G.t] = 1
    src, dst = G.src.tolist(), G.dst.tolist()
    for e in range(len(src) - 1, -1, -1):
        cnt[src[e]] += cnt[dst[e]]
    return cnt[G.s]


def to_dot(G: LabeledWeightedDag, tree: ShortestPathTree | None = None) -> str:
    lines = ["digraph G {", "  rankdir=LR;"]
    for v in range(G.num_nodes):
        name = G.node_name(v)
        shape = "doublecircle" if v == G.t else ("box" if v == G.s else "ellipse")
        lines.append(f'  n{v} [label="{name}", shape={shape}];')
    tree_edges = set() if tree is None else {int(e) for e in tree.tree_edge if e >= 0}
    for e in range(G.num_edges):
        lab = G.edge_label(e)
        text = f"{G.edge_weight(e)}" + ("" if lab is None else f" / {lab[0]}@{lab[1]}")
        style = ", style=bold" if e in tree_edges else ""
        lines.append(f'  n{G.src[e]} -> n{G.dst[e]} [label="{text}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"

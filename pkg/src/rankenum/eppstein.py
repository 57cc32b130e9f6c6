"""Implicit heap of all s-to-t paths via sidetrack edges.

Each D_G node stands for one sidetrack edge (an edge off the shortest-path
tree). Two kinds of nodes exist:

* heap nodes, from persistent leftist heaps ``H_T(v)`` holding the cheapest
  sidetrack leaving each node on the tree path from ``v`` to the sink;
* list nodes, one per remaining sidetrack, chained per source in
  non-decreasing ``delta`` order.

Out-edges of a node use four slots: 0 and 1 are the heap children, 2 is the
next sidetrack of the same source, 3 is the cross edge into the heap of the
sidetrack's target. The distinguished root ``r`` (node id ``-1``) has a
single cross edge into ``H_T(s)``.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AtRoot, BranchOutOfRange, NoPaths
from .group_core import LexGroup, unwrap
from .product_dag import LabeledWeightedDag, ShortestPathTree, shortest_path_tree

ROOT = -1
SLOT_LEFT, SLOT_RIGHT, SLOT_NEXT, SLOT_CROSS = 0, 1, 2, 3
ROOT_EDGE = 3  # (ROOT + 1) * 4 + SLOT_CROSS


def dg_edge_id(node: int, slot: int) -> int:
    return (node + 1) * 4 + slot


class PathCursor:
    """One r-path of D_G, hence one s-to-t path of G.

    ``frame`` is the cursor whose last node is the previous induced node, so
    cursors form two persistent chains: ``parent`` (one D_G edge back) and
    ``frame`` (one induced node back). ``acc`` is the sum of the ``delta``
    values of the induced nodes.
    """

    __slots__ = ("parent", "node", "owner", "frame", "depth", "acc", "seq", "alpha")

    def __init__(self, parent, node, owner, frame, depth, acc, seq=-1, alpha=None):
        self.parent = parent
        self.node = node
        self.owner = owner
        self.frame = frame
        self.depth = depth
        self.acc = acc
        self.seq = seq
        self.alpha = alpha

    def __repr__(self):
        return f"PathCursor(node={self.node}, depth={self.depth}, acc={self.acc!r})"


@dataclass
class EppsteinDag:
    G: LabeledWeightedDag
    tree: ShortestPathTree | None
    delta: np.ndarray          # (E, k) per graph edge
    side: np.ndarray           # sidetrack edge ids sorted by (src, delta, id)
    list_next: np.ndarray      # next index in side with the same source, or -1
    is_head: np.ndarray        # side[j] is the first sidetrack of its source
    cross: np.ndarray          # heap root of H_T(dst(side[j])) or -1
    root_T: np.ndarray         # per graph node, root heap node of H_T(v) or -1
    hitem: np.ndarray          # heap node -> index into side
    hleft: np.ndarray
    hright: np.ndarray

    # -- sizes -----------------------------------------------------------------
    @property
    def empty(self) -> bool:
        return self.G.is_empty

    @property
    def num_heap_nodes(self) -> int:
        return int(self.hitem.shape[0])

    @property
    def num_sidetracks(self) -> int:
        return int(self.side.shape[0])

    @property
    def num_nodes(self) -> int:
        if self.empty:
            return 0
        return 1 + self.num_heap_nodes + int((~self.is_head).sum())

    @property
    def num_edges(self) -> int:
        if self.empty:
            return 0
        hit = self.hitem
        n = int((self.hleft >= 0).sum() + (self.hright >= 0).sum())
        n += int((self.list_next[hit] >= 0).sum() + (self.cross[hit] >= 0).sum())
        tail = ~self.is_head
        n += int((self.list_next[tail] >= 0).sum() + (self.cross[tail] >= 0).sum())
        return n + int(self.root_T[self.G.s] >= 0)

    def d_st(self):
        return self.G.group.from_row(self.tree.dist[self.G.s])

    # -- node accessors ----------------------------------------------------------
    def side_index(self, x: int) -> int:
        nh = self.num_heap_nodes
        return int(self.hitem[x]) if x < nh else x - nh

    def sidetrack_edge(self, x: int) -> int:
        return int(self.side[self.side_index(x)])

    def node_delta(self, x: int):
        if x == ROOT:
            return self.G.group.zero()
        return self.G.group.from_row(self.delta[self.sidetrack_edge(x)])

    def children(self, x: int) -> list:
        """``[(slot, child node)]`` in slot order."""
        if x == ROOT:
            r = int(self.root_T[self.G.s]) if not self.empty else -1
            return [(SLOT_CROSS, r)] if r >= 0 else []
        nh = self.num_heap_nodes
        out = []
        if x < nh:
            j = int(self.hitem[x])
            if self.hleft[x] >= 0:
                out.append((SLOT_LEFT, int(self.hleft[x])))
            if self.hright[x] >= 0:
                out.append((SLOT_RIGHT, int(self.hright[x])))
        else:
            j = x - nh
        if self.list_next[j] >= 0:
            out.append((SLOT_NEXT, nh + int(self.list_next[j])))
        if self.cross[j] >= 0:
            out.append((SLOT_CROSS, int(self.cross[j])))
        return out

    def edge_weight(self, x: int, slot: int, y: int):
        """Weight of the D_G edge: ``delta(y)`` for cross edges, ``delta(y) - delta(x)`` otherwise."""
        g = self.G.group
        if slot == SLOT_CROSS:
            return self.node_delta(y)
        return g.sub(self.node_delta(y), self.node_delta(x))

    # -- cursors -----------------------------------------------------------------
    def navigator(self) -> "Navigator":
        return Navigator(self)


def build_eppstein_dag(G: LabeledWeightedDag, tree: ShortestPathTree | None = None) -> EppsteinDag:
    k = G.weight.shape[1] if G.weight.ndim == 2 else 1
    if G.is_empty:
        z64, z32 = np.zeros(0, np.int64), np.zeros(0, np.int32)
        return EppsteinDag(G, tree, np.zeros((0, k), np.int64), z64, z64, np.zeros(0, bool), z32,
                           z32, z32, z32, z32)
    if tree is None:
        tree = shortest_path_tree(G)
    E = G.num_edges
    delta = kernels.delta_kernel(G.src, G.dst, G.weight, tree.dist)
    is_tree = np.zeros(E, bool)
    te = tree.tree_edge
    is_tree[te[te >= 0]] = True
    side_e = np.nonzero(~is_tree)[0].astype(np.int64)
    dcols = [delta[side_e, c] for c in range(k - 1, -1, -1)]
    # lexsort: last key is primary -> (src, delta..., edge id)
    order = np.lexsort([side_e] + dcols + [G.src[side_e]])
    side = side_e[order]
    S = side.shape[0]
    ssrc = G.src[side]
    is_head = np.ones(S, bool)
    if S > 1:
        is_head[1:] = ssrc[1:] != ssrc[:-1]
    list_next = np.arange(1, S + 1, dtype=np.int64)
    if S:
        tail_of_group = np.ones(S, bool)
        tail_of_group[:-1] = is_head[1:]
        list_next[tail_of_group] = -1

    # global heap keys: rank by (delta, edge id)
    gorder = np.lexsort([side] + [delta[side, c] for c in range(k - 1, -1, -1)])
    grank = np.empty(S, np.int64)
    grank[gorder] = np.arange(S, dtype=np.int64)
    head_key = np.full(G.num_nodes, -1, np.int64)
    head_item = np.full(G.num_nodes, -1, np.int32)
    heads = np.nonzero(is_head)[0]
    head_key[ssrc[heads]] = grank[heads]
    head_item[ssrc[heads]] = heads.astype(np.int32)
    node_order = np.arange(G.num_nodes - 1, -1, -1, dtype=np.int64)
    root_T, _hkey, hitem, hleft, hright = kernels.leftist_kernel(
        G.num_nodes, tree.tnext, head_key, head_item, node_order
    )
    cross = root_T[G.dst[side]] if S else np.zeros(0, np.int32)
    return EppsteinDag(G, tree, delta, side, list_next, is_head, cross.astype(np.int32), root_T,
                       hitem, hleft, hright)


# ---------------------------------------------------------------------------
# navigation


class Navigator:
    """Fast cursor moves over an :class:`EppsteinDag`.

    Arrays are read through memoryviews, which index to plain Python ints
    without materializing lists; this keeps memory flat on big documents.
    """

    def __init__(self, D: EppsteinDag, coeffs: np.ndarray | None = None, base_alpha=None):
        self.D = D
        G = D.G
        self.group = G.group
        base = unwrap(G.group)
        self.k = G.weight.shape[1]
        self.nh = D.num_heap_nodes
        self.hitem = memoryview(np.ascontiguousarray(D.hitem, dtype=np.int64))
        self.hleft = memoryview(np.ascontiguousarray(D.hleft, dtype=np.int64))
        self.hright = memoryview(np.ascontiguousarray(D.hright, dtype=np.int64))
        self.list_next = memoryview(np.ascontiguousarray(D.list_next, dtype=np.int64))
        self.cross = memoryview(np.ascontiguousarray(D.cross, dtype=np.int64))
        self.side = memoryview(np.ascontiguousarray(D.side, dtype=np.int64))
        self.dst = memoryview(np.ascontiguousarray(G.dst, dtype=np.int64))
        sdelta = np.ascontiguousarray(D.delta[D.side], dtype=np.int64)
        if isinstance(base, LexGroup):
            k = self.k
            mv = memoryview(sdelta)
            self._delta = lambda j: tuple(mv[j, c] for c in range(k))
            self.add = lambda a, b: tuple(map(operator.add, a, b))
            self.zero = (0,) * k
        else:
            mv = memoryview(sdelta.reshape(-1))
            self._delta = mv.__getitem__
            self.add = operator.add
            self.zero = 0
        self.root_node = int(D.root_T[G.s]) if not D.empty else -1
        self.s = G.s
        # coefficient tracking for the epoch enumerator
        self.coeffs = coeffs
        self.base_alpha = base_alpha
        self.moves = 0

    # cursor construction ------------------------------------------------------
    def root(self) -> PathCursor:
        if self.D.empty:
            raise NoPaths("no s-to-t path")
        return PathCursor(None, ROOT, self.s, None, 0, self.zero, 0, self.base_alpha)

    def side_of(self, x: int) -> int:
        return self.hitem[x] if x < self.nh else x - self.nh

    def _make(self, parent: PathCursor, slot: int, y: int) -> PathCursor:
        j = self.side_of(y)
        if slot == SLOT_CROSS:
            frame = parent
            owner = self.s if parent.node == ROOT else self.dst[self.side[self.side_of(parent.node)]]
            depth = parent.depth + 1
        else:
            frame = parent.frame
            owner = parent.owner
            depth = parent.depth
        if frame is None or frame.node == ROOT:
            acc = self._delta(j)
            fa = self.base_alpha
        else:
            acc = self.add(frame.acc, self._delta(j))
            fa = frame.alpha
        alpha = None
        if self.coeffs is not None:
            alpha = fa + self.coeffs[j]
        return PathCursor(parent, y, owner, frame, depth, acc, -1, alpha)

    def expand(self, c: PathCursor) -> list:
        """Children of ``c`` as ``[(dg_edge_id, child)]``, in slot order."""
        self.moves += 1
        x = c.node
        out = []
        if x == ROOT:
            if self.root_node >= 0:
                out.append((ROOT_EDGE, self._make(c, SLOT_CROSS, self.root_node)))
            return out
        base = (x + 1) * 4
        if x < self.nh:
            j = self.hitem[x]
            y = self.hleft[x]
            if y >= 0:
                out.append((base, self._make(c, SLOT_LEFT, y)))
            y = self.hright[x]
            if y >= 0:
                out.append((base + 1, self._make(c, SLOT_RIGHT, y)))
        else:
            j = x - self.nh
        y = self.list_next[j]
        if y >= 0:
            out.append((base + 2, self._make(c, SLOT_NEXT, self.nh + y)))
        y = self.cross[j]
        if y >= 0:
            out.append((base + 3, self._make(c, SLOT_CROSS, y)))
        return out

    def child(self, c: PathCursor, branch: int) -> PathCursor:
        kids = self.expand(c)
        if not 0 <= branch < len(kids):
            raise BranchOutOfRange(f"branch {branch} out of range (out-degree {len(kids)})")
        return kids[branch][1]

    @staticmethod
    def parent(c: PathCursor) -> PathCursor:
        if c.parent is None:
            raise AtRoot("root cursor has no parent")
        return c.parent

    # reconstruction ------------------------------------------------------------
    def induced(self, c: PathCursor) -> list:
        """``[(owner, sidetrack edge id)]`` for the induced nodes, first to last."""
        chain = []
        while c is not None and c.node != ROOT:
            chain.append((c.owner, self.side[self.side_of(c.node)]))
            c = c.frame
        chain.reverse()
        return chain

    def weight(self, c: PathCursor):
        D = self.D
        g = self.group
        d = g.from_row(D.tree.dist[self.s])
        if c.node == ROOT:
            return d
        return g.add(d, c.acc)

    def label(self, c: PathCursor, counter: list | None = None) -> tuple:
        """The output tuple of the path, in time linear in its length.

        ``counter[0]`` (if given) is increased once per appended label item.
        """
        G = self.D.G
        tree = self.D.tree
        head = tree.beta_head
        tnext = tree.tnext
        te = tree.tree_edge
        markers, lm, lp = G.markers, G.label_marker, G.label_pos
        out = []
        v = self.s
        for owner, e in self.induced(c):
            u = int(G.src[e])
            stop = int(head[u])
            h = int(head[owner])
            while h >= 0 and h != stop:
                te_h = int(te[h])
                out.append((markers[lm[te_h]], int(lp[te_h])))
                h = int(head[tnext[h]])
            m = int(lm[e])
            if m >= 0:
                out.append((markers[m], int(lp[e])))
            v = int(G.dst[e])
        h = int(head[v])
        while h >= 0:
            te_h = int(te[h])
            out.append((markers[lm[te_h]], int(lp[te_h])))
            h = int(head[tnext[h]])
        if counter is not None:
            counter[0] += len(out)
        return tuple(out)

    def edges(self, c: PathCursor) -> list:
        """The full s-to-t edge sequence (for tests)."""
        G = self.D.G
        te = self.D.tree.tree_edge
        out = []
        v = self.s
        for _, e in self.induced(c):
            u = int(G.src[e])
            while v != u:
                out.append(int(te[v]))
                v = int(G.dst[te[v]])
            out.append(int(e))
            v = int(G.dst[e])
        while v != G.t:
            out.append(int(te[v]))
            v = int(G.dst[te[v]])
        return out


# functional surface ----------------------------------------------------------


def cursor_root(D: EppsteinDag, nav: Navigator | None = None) -> PathCursor:
    return (nav or Navigator(D)).root()


def cursor_child(D: EppsteinDag, c: PathCursor, branch: int, nav: Navigator | None = None) -> PathCursor:
    return (nav or Navigator(D)).child(c, branch)


def cursor_parent(c: PathCursor) -> PathCursor:
    return Navigator.parent(c)

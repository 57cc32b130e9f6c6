import numpy as np
import pytest

from rankenum.eppstein import (
    ROOT,
    SLOT_CROSS,
    Navigator,
    build_eppstein_dag,
    cursor_child,
    cursor_parent,
    cursor_root,
)
from rankenum.errors import AtRoot, BranchOutOfRange, NoPaths
from rankenum.group_core import IntGroup, LexGroup
from rankenum.product_dag import dag_from_edges, iter_paths, prune, shortest_path_tree

from helpers import random_dag


def all_cursors(nav):
    out, stack = [], [nav.root()]
    while stack:
        c = stack.pop()
        out.append(c)
        stack.extend(ch for _, ch in nav.expand(c))
    return out


def dg_nodes(D):
    nh = D.num_heap_nodes
    return [ROOT] + list(range(nh)) + [nh + j for j in np.nonzero(~D.is_head)[0].tolist()]


@pytest.mark.parametrize("group", [IntGroup(), LexGroup(2)])
def test_r_paths_biject_with_st_paths(rng, group):
    for _ in range(25):
        G = prune(random_dag(rng, n=int(rng.integers(2, 10)), group=group))
        D = build_eppstein_dag(G)
        nav = D.navigator()
        curs = all_cursors(nav)
        paths = {edges: w for w, _, edges in iter_paths(G)}
        got = {}
        for c in curs:
            e = tuple(nav.edges(c))
            assert e not in got
            got[e] = nav.weight(c)
        assert got == paths


def test_heap_order_and_degree(rng):
    for _ in range(25):
        G = prune(random_dag(rng, n=10))
        D = build_eppstein_dag(G)
        g = G.group
        total = 0
        for x in dg_nodes(D):
            kids = D.children(x)
            assert len(kids) <= 4
            total += len(kids)
            for slot, y in kids:
                if slot != SLOT_CROSS:
                    assert g.le(D.node_delta(x), D.node_delta(y))
                assert g.le(g.zero(), D.edge_weight(x, slot, y))
        assert total == D.num_edges
        assert D.num_nodes == len(dg_nodes(D))


def test_tree_heaps_hold_path_heads(rng):
    for _ in range(25):
        G = prune(random_dag(rng, n=10))
        D = build_eppstein_dag(G)
        tree = D.tree
        head_of = {int(G.src[D.side[j]]): j for j in np.nonzero(D.is_head)[0].tolist()}
        for v in range(G.num_nodes):
            exp, u = set(), v
            while u >= 0:
                if u in head_of:
                    exp.add(head_of[u])
                u = int(tree.tnext[u])
            got, stack = set(), [int(D.root_T[v])] if D.root_T[v] >= 0 else []
            while stack:
                x = stack.pop()
                got.add(int(D.hitem[x]))
                stack.extend(int(y) for y in (D.hleft[x], D.hright[x]) if y >= 0)
            assert got == exp


def test_labels_match_edge_labels(rng):
    for _ in range(25):
        G = prune(random_dag(rng, n=9))
        D = build_eppstein_dag(G)
        nav = D.navigator()
        counter = [0]
        for c in all_cursors(nav):
            exp = tuple(G.edge_label(e) for e in nav.edges(c) if G.label_marker[e] >= 0)
            before = counter[0]
            assert nav.label(c, counter) == exp
            assert counter[0] - before == len(exp)


def test_root_weight_is_distance(rng):
    for _ in range(10):
        G = prune(random_dag(rng))
        D = build_eppstein_dag(G)
        assert D.navigator().weight(cursor_root(D)) == min(w for w, *_ in iter_paths(G))
        assert D.d_st() == shortest_path_tree(G).distance(G.group, G.s)


def test_cursor_api():
    G = dag_from_edges(3, [(0, 1, 0, None), (1, 2, 0, None), (0, 2, 3, ("a", 1))], 0, 2)
    D = build_eppstein_dag(G)
    nav = Navigator(D)
    r = cursor_root(D, nav)
    with pytest.raises(AtRoot):
        cursor_parent(r)
    c = cursor_child(D, r, 0, nav)
    assert cursor_parent(c) is r
    assert nav.weight(c) == 3
    with pytest.raises(BranchOutOfRange):
        cursor_child(D, c, 0, nav)
    with pytest.raises(BranchOutOfRange):
        cursor_child(D, r, 1, nav)


def test_empty_dag():
    G = prune(dag_from_edges(3, [(0, 1, 0, None)], 0, 2))
    D = build_eppstein_dag(G)
    assert D.empty and D.num_edges == 0 and D.num_nodes == 0
    with pytest.raises(NoPaths):
        Navigator(D).root()


def test_single_path():
    G = dag_from_edges(2, [(0, 1, 7, ("x", 1))], 0, 1)
    D = build_eppstein_dag(G)
    nav = D.navigator()
    assert len(all_cursors(nav)) == 1
    assert nav.label(nav.root()) == (("x", 1),)

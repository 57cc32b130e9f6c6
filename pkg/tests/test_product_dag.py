import numpy as np
import pytest

from rankenum.errors import InvalidArgument, NoPaths, PreconditionError
from rankenum.fixtures import chain_transducer, random_document, random_transducer, regex_spanner
from rankenum.group_core import BigIntGroup, IntGroup, LexGroup
from rankenum.product_dag import (
    build_product_dag,
    count_paths,
    dag_from_edges,
    iter_paths,
    prune,
    shortest_path_tree,
    to_dot,
    tree_path_label,
)
from rankenum.transducer import brute_force_outputs, make_transducer, normalize_single_final

from helpers import random_dag


def test_needs_normalized_transducer():
    with pytest.raises(PreconditionError):
        build_product_dag(regex_spanner(), "ab")


def test_layered_structure_and_size_bounds(rng):
    for _ in range(30):
        T = normalize_single_final(random_transducer(rng))
        doc = random_document(rng, T, 8)
        G = build_product_dag(T, doc)
        Q, n = len(T.states), len(doc)
        assert G.num_nodes <= Q * (n + 1)
        assert G.num_edges <= len(T.transitions) * n
        assert np.all(G.node_pos[G.dst] == G.node_pos[G.src] + 1)
        assert np.all(G.src < G.dst)
        # topological edge order: layer of the source never decreases
        assert np.all(np.diff(G.node_pos[G.src]) >= 0)
        assert np.all(G.label_pos == G.node_pos[G.src] + 1)


def test_path_count_equals_run_count(rng):
    from rankenum.transducer import accepting_runs

    for _ in range(30):
        T = normalize_single_final(random_transducer(rng))
        doc = random_document(rng, T, 7)
        G = prune(build_product_dag(T, doc))
        assert count_paths(G) == sum(1 for _ in accepting_runs(T, doc))


def test_prune_keeps_exactly_useful_nodes(rng):
    for _ in range(30):
        T = normalize_single_final(random_transducer(rng))
        doc = random_document(rng, T, 7)
        G = build_product_dag(T, doc)
        P = prune(G)
        if P.is_empty:
            assert count_paths(G) == 0
            continue
        used = set()
        for _, _, edges in iter_paths(P):
            for e in edges:
                used.update((int(P.src[e]), int(P.dst[e])))
        assert used == set(range(P.num_nodes)) or P.num_nodes == 1
        assert sorted(w for w, *_ in iter_paths(P)) == sorted(w for w, *_ in iter_paths(G))


def test_shortest_path_tree_matches_dfs(rng):
    for _ in range(40):
        G = random_dag(rng)
        tree = shortest_path_tree(G)
        # d(v) by brute force over every v-to-t path
        for v in range(G.num_nodes):
            sub = dag_from_edges(
                G.num_nodes,
                [(int(G.src[e]), int(G.dst[e]), int(G.weight[e, 0]), None) for e in range(G.num_edges)],
                v, G.t,
            ) if v != G.t else None
            if sub is None:
                assert tree.distance(G.group, v) == 0
                continue
            ws = [w for w, *_ in iter_paths(sub)]
            if ws:
                assert tree.distance(G.group, v) == min(ws)


def test_tree_ties_pick_smallest_edge_id():
    G = dag_from_edges(3, [(0, 1, 1, None), (0, 1, 1, ("a", 1)), (1, 2, 0, None), (0, 2, 1, None)], 0, 2)
    tree = shortest_path_tree(G)
    assert int(tree.tree_edge[0]) == 0


def test_lex_distances():
    g = LexGroup(2)
    G = dag_from_edges(3, [(0, 1, (0, 5), None), (1, 2, (0, 0), None), (0, 2, (1, -9), None)], 0, 2, g)
    tree = shortest_path_tree(G)
    assert tree.distance(g, 0) == (0, 5)


def test_tree_path_label(rng):
    G = dag_from_edges(4, [(0, 1, 0, ("a", 1)), (1, 2, 0, None), (2, 3, 0, ("b", 3))], 0, 3)
    tree = shortest_path_tree(G)
    assert tree_path_label(G, tree, 0) == [("a", 1), ("b", 3)]
    assert tree_path_label(G, tree, 0, stop=2) == [("a", 1)]


def test_empty_graph():
    G = dag_from_edges(3, [(0, 1, 0, None)], 0, 2)
    P = prune(G)
    assert P.is_empty and P.num_edges == 0
    with pytest.raises(NoPaths):
        shortest_path_tree(P)


def test_rejects_backward_edges_and_unbounded_groups():
    with pytest.raises(InvalidArgument):
        dag_from_edges(3, [(1, 0, 0, None)], 0, 2)
    with pytest.raises(InvalidArgument):
        dag_from_edges(3, [(0, 1, 0, None)], 0, 2, BigIntGroup())


def test_weight_magnitude_guard():
    T = normalize_single_final(make_transducer([(0, "a", 2**59, "ε", 0)], 0, [0]))
    with pytest.raises(OverflowError):
        build_product_dag(T, "aaaa")


def test_dot_export():
    T = normalize_single_final(chain_transducer())
    G = prune(build_product_dag(T, "ab"))
    dot = to_dot(G, shortest_path_tree(G))
    assert dot.startswith("digraph") and dot.rstrip().endswith("}")
    assert dot.count("->") == G.num_edges


def test_dag_paths_match_transducer_outputs(rng):
    for _ in range(20):
        T0 = random_transducer(rng)
        T = normalize_single_final(T0)
        doc = random_document(rng, T, 6)
        G = prune(build_product_dag(T, doc))
        got = {(w if isinstance(w, int) else w, labels) for w, labels, _ in iter_paths(G)}
        exp = {(o.weight, o.entries) for o in brute_force_outputs(T0, doc)}
        assert got == exp

"""Shared generators for the test suite."""

from rankenum.group_core import IntGroup
from rankenum.product_dag import dag_from_edges


def random_dag(rng, n=12, p=0.3, w=5, group=None):
    group = group or IntGroup()
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p or v == u + 1:
                wt = group.random(rng, w)
                lab = ("m", v) if rng.random() < 0.5 else None
                edges.append((u, v, wt, lab))
                if rng.random() < 0.15:  # parallel edge
                    edges.append((u, v, group.random(rng, w), None))
    return dag_from_edges(n, edges, 0, n - 1, group)

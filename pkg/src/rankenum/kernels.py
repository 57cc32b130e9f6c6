"""Array kernels for the enumeration engine and the sorter.

Every function here is plain Python over numpy arrays, decorated with
:func:`rankenum._accel.jit`. Graph kernels assume node ids are a topological
order (every edge goes from a smaller to a larger id) and that edge ids are
a topological edge order (edges leaving ``v`` come after edges entering
``v``); the product construction and ``dag_from_edges`` guarantee both.
"""

from __future__ import annotations

import numpy as np

from ._accel import jit


def _product_edges_np(doc, num_states, by_sym_start, by_sym_tid, t_src, t_dst):
    lo = by_sym_start[doc]
    cnt = by_sym_start[doc + 1] - lo
    total = int(cnt.sum())
    layer = np.repeat(np.arange(doc.shape[0], dtype=np.int64), cnt)
    first = np.cumsum(cnt) - cnt
    j = np.repeat(lo - first, cnt) + np.arange(total, dtype=np.int64)
    t = by_sym_tid[j]
    base = layer * num_states
    return (base + t_src[t], base + num_states + t_dst[t], t.astype(np.int32), (layer + 1).astype(np.int32))


def _delta_np(src, dst, w, dist):
    return w + dist[dst] - dist[src]


@jit(fallback=_product_edges_np)
def product_edges_kernel(doc, num_states, by_sym_start, by_sym_tid, t_src, t_dst):
    """Edges of the layered product graph, ordered by (layer, transition index).

    ``doc`` holds symbol codes; ``by_sym_tid[by_sym_start[a]:by_sym_start[a+1]]``
    are the transitions reading symbol ``a`` in increasing index order.
    Returns (src, dst, tid, pos) with 1-based positions.
    """
    n = doc.shape[0]
    total = 0
    for i in range(n):
        a = doc[i]
        total += by_sym_start[a + 1] - by_sym_start[a]
    src = np.empty(total, np.int64)
    dst = np.empty(total, np.int64)
    tid = np.empty(total, np.int32)
    pos = np.empty(total, np.int32)
    k = 0
    for i in range(n):
        a = doc[i]
        base = i * num_states
        for j in range(by_sym_start[a], by_sym_start[a + 1]):
            t = by_sym_tid[j]
            src[k] = base + t_src[t]
            dst[k] = base + num_states + t_dst[t]
            tid[k] = t
            pos[k] = i + 1
            k += 1
    return src, dst, tid, pos


@jit
def reach_kernel(num_nodes, src, dst, s, t):
    """Forward reachability from ``s`` and backward reachability to ``t``."""
    fwd = np.zeros(num_nodes, np.bool_)
    bwd = np.zeros(num_nodes, np.bool_)
    fwd[s] = True
    bwd[t] = True
    m = src.shape[0]
    for e in range(m):
        if fwd[src[e]]:
            fwd[dst[e]] = True
    for e in range(m - 1, -1, -1):
        if bwd[dst[e]]:
            bwd[src[e]] = True
    return fwd, bwd


@jit
def sp_tree_kernel(num_nodes, src, dst, w, t):
    """Shortest distances to ``t`` under lexicographic order on rows of ``w``.

    One reverse sweep over the edges. Updating on ``<=`` while edge ids
    decrease leaves the smallest edge id among equally short choices.
    """
    k = w.shape[1]
    dist = np.zeros((num_nodes, k), np.int64)
    tree = np.full(num_nodes, -1, np.int64)
    seen = np.zeros(num_nodes, np.bool_)
    seen[t] = True
    cand = np.empty(k, np.int64)
    for e in range(src.shape[0] - 1, -1, -1):
        v = dst[e]
        if not seen[v]:
            continue
        u = src[e]
        for j in range(k):
            cand[j] = w[e, j] + dist[v, j]
        take = not seen[u]
        if not take:
            take = True
            for j in range(k):
                if cand[j] != dist[u, j]:
                    take = cand[j] < dist[u, j]
                    break
        if take:
            for j in range(k):
                dist[u, j] = cand[j]
            tree[u] = e
            seen[u] = True
    return dist, tree


@jit
def beta_kernel(num_nodes, tree, dst, labeled):
    """``head[v]``: nearest node on the tree path from ``v`` whose tree edge is labeled, or -1.

    Returns also ``tnext[v]``, the tree successor of ``v``.
    """
    head = np.full(num_nodes, -1, np.int64)
    tnext = np.full(num_nodes, -1, np.int64)
    for v in range(num_nodes - 1, -1, -1):
        e = tree[v]
        if e < 0:
            continue
        nv = dst[e]
        tnext[v] = nv
        head[v] = v if labeled[e] else head[nv]
    return head, tnext


@jit(fallback=_delta_np)
def delta_kernel(src, dst, w, dist):
    """``delta(e) = w(e) + d(dst) - d(src)`` row by row."""
    m, k = w.shape
    out = np.empty((m, k), np.int64)
    for e in range(m):
        for j in range(k):
            out[e, j] = w[e, j] + dist[dst[e], j] - dist[src[e], j]
    return out


@jit
def leftist_kernel(num_nodes, tnext, head_key, head_item, order):
    """Persistent leftist heaps ``H_T(v) = insert(H_T(tnext[v]), head of v)``.

    ``order`` lists nodes so that ``tnext[v]`` comes before ``v``. Keys are
    distinct integers. Returns (root, key, item, left, right) where heap nodes
    are indices into the last four arrays and -1 means empty.
    """
    cap = max(16, 2 * num_nodes)
    key = np.empty(cap, np.int64)
    item = np.empty(cap, np.int32)
    left = np.empty(cap, np.int32)
    right = np.empty(cap, np.int32)
    rank = np.empty(cap, np.int32)
    root = np.full(num_nodes, -1, np.int32)
    spine = np.empty(64, np.int32)
    size = 0
    for oi in range(order.shape[0]):
        v = order[oi]
        nv = tnext[v]
        base = -1 if nv < 0 else root[nv]
        if head_key[v] < 0:
            root[v] = base
            continue
        if size + 66 >= cap:
            cap *= 2
            key = _grow64(key, cap)
            item = _grow32(item, cap)
            left = _grow32(left, cap)
            right = _grow32(right, cap)
            rank = _grow32(rank, cap)
        x = head_key[v]
        # walk the right spine while the heap root is smaller than x
        depth = 0
        h = base
        while h >= 0 and key[h] < x:
            spine[depth] = h
            depth += 1
            h = right[h]
        nd = size
        size += 1
        key[nd] = x
        item[nd] = head_item[v]
        left[nd] = h
        right[nd] = -1
        rank[nd] = 1
        child = nd
        for d in range(depth - 1, -1, -1):
            old = spine[d]
            cp = size
            size += 1
            key[cp] = key[old]
            item[cp] = item[old]
            l = left[old]
            rl = 0 if l < 0 else rank[l]
            rc = rank[child]
            if rl >= rc:
                left[cp] = l
                right[cp] = child
                rank[cp] = rc + 1
            else:
                left[cp] = child
                right[cp] = l
                rank[cp] = rl + 1
            child = cp
        root[v] = child
    return root, key[:size].copy(), item[:size].copy(), left[:size].copy(), right[:size].copy()


@jit
def _grow64(a, cap):
    b = np.empty(cap, np.int64)
    b[: a.shape[0]] = a
    return b


@jit
def _grow32(a, cap):
    b = np.empty(cap, np.int32)
    b[: a.shape[0]] = a
    return b


@jit
def tree_coeff_kernel(num_nodes, tree, dst, wid, t):
    """Per node, how often each distinct edge weight occurs on its tree path."""
    A = np.zeros((num_nodes, t), np.int32)
    for v in range(num_nodes - 1, -1, -1):
        e = tree[v]
        if e < 0:
            continue
        nv = dst[e]
        for j in range(t):
            A[v, j] = A[nv, j]
        A[v, wid[e]] += 1
    return A


@jit
def radix_argsort(cols):
    """Stable LSD radix argsort of rows of non-negative keys.

    ``cols`` has shape (L, N) of uint64; column 0 is the most significant.
    Uses 16-bit digits and skips digits that are zero in every row.
    """
    L, N = cols.shape
    perm = np.arange(N).astype(np.int64)
    tmp = np.empty(N, np.int64)
    count = np.empty(65537, np.int64)
    for c in range(L - 1, -1, -1):
        col = cols[c]
        mx = np.uint64(0)
        for i in range(N):
            if col[i] > mx:
                mx = col[i]
        shift = np.uint64(0)
        while shift < np.uint64(64) and (mx >> shift) > np.uint64(0):
            count[:] = 0
            for i in range(N):
                d = np.int64((col[perm[i]] >> shift) & np.uint64(0xFFFF))
                count[d + 1] += 1
            for d in range(65536):
                count[d + 1] += count[d]
            for i in range(N):
                p = perm[i]
                d = np.int64((col[p] >> shift) & np.uint64(0xFFFF))
                tmp[count[d]] = p
                count[d] += 1
            perm, tmp = tmp, perm
            shift += np.uint64(16)
    return perm


@jit
def lex_sorted_check(rows, perm):
    """Index of the first descent in ``rows[perm]`` (lexicographic), or -1."""
    k = rows.shape[1]
    for i in range(perm.shape[0] - 1):
        a = perm[i]
        b = perm[i + 1]
        for j in range(k):
            if rows[a, j] != rows[b, j]:
                if rows[a, j] > rows[b, j]:
                    return i
                break
    return -1

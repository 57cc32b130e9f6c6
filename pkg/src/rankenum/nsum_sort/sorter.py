"""Sorting n-sums: baseline comparison sort, radix for small integers, and
the randomized rounding sorter with verify-and-restart."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Sequence

import numpy as np

from ..errors import Infeasible, InvalidArgument, PreconditionError
from ..group_core import (
    BigIntGroup,
    CountingGroup,
    GeneratorBasis,
    IntGroup,
    LexGroup,
    NSum,
    eval_many,
    extend_basis,
    unwrap,
)
from .lp import InequalitySystem, solve_feasibility
from .rounding import argsort_int_keys, floor_keys, radix_argsort_columns

BACKENDS = ("auto", "baseline", "radix", "rounding")


@dataclass
class SortParams:
    """Tunables of the rounding sorter.

    ``c`` is the sampling exponent (sample probability ``1/log^c N``);
    the bucket stride is ``ceil(log^stride_exp N)`` unless ``stride`` is set.
    ``budget`` is the per-attempt comparison cap in units of ``t*N``.
    """

    c: float = 1.0
    stride_exp: float | None = None
    stride: int | None = None
    sample_scale: float = 1.0
    attempts: int = 3
    budget: float = 64.0
    small_threshold: int = 4096
    phase2_labels: bool = False

    def bucket_stride(self, N: int) -> int:
        if self.stride is not None:
            return max(1, int(self.stride))
        e = self.c + 3 if self.stride_exp is None else self.stride_exp
        return max(1, math.ceil(math.log2(max(N, 2)) ** e))


@dataclass
class SortReport:
    comparisons: int = 0
    restarts: int = 0
    backend_used: str = ""
    fallback: bool = False
    fallback_reason: str = ""
    inversions: int = 0
    buckets: int = 0
    max_bucket: int = 0
    stragglers: int = 0
    lp_rows: int = 0
    attempts: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["attempts"] = list(self.attempts)
        return d


class _BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# input handling


def as_coeff_matrix(sums, t: int | None = None) -> tuple[np.ndarray, int]:
    """``(coefficients (N, t) int64, n)`` from NSums or an integer array."""
    if isinstance(sums, np.ndarray):
        A = np.asarray(sums, dtype=np.int64)
        if A.ndim != 2:
            raise InvalidArgument("coefficient array must be two-dimensional")
        n = int(A.sum(axis=1).max()) if A.shape[0] else 0
        return A, n
    sums = list(sums)
    if not sums:
        return np.zeros((0, t or 0), np.int64), 0
    tt = sums[0].t
    n = sums[0].n
    for s in sums:
        if not isinstance(s, NSum):
            raise InvalidArgument(f"expected NSum, got {type(s).__name__}")
        if s.t != tt:
            raise InvalidArgument("n-sums over different bases")
    return np.array([s.coeffs for s in sums], dtype=np.int64).reshape(len(sums), tt), n


@dataclass
class Dedup:
    unique: np.ndarray     # distinct rows in first-occurrence order
    first: np.ndarray      # index of the first occurrence of each unique row
    inverse: np.ndarray    # row -> unique id
    counts: np.ndarray

    def multiplicity(self) -> dict:
        return {tuple(int(v) for v in self.unique[u]): int(self.counts[u]) for u in range(len(self.first))}


def dedup_vectors(coeffs) -> Dedup:
    """Merge identical coefficient vectors using a stable radix sort of the rows."""
    A, _ = as_coeff_matrix(coeffs)
    N = A.shape[0]
    if N == 0:
        z = np.zeros(0, np.int64)
        return Dedup(A, z, z, z)
    shifted = (A - A.min(axis=0)).astype(np.uint64)
    order = radix_argsort_columns(shifted.T)
    S = A[order]
    new_group = np.ones(N, bool)
    new_group[1:] = np.any(S[1:] != S[:-1], axis=1)
    gid_sorted = np.cumsum(new_group) - 1
    # stable sort -> first member of each group has the smallest index
    first_by_gid = order[new_group]
    rank = np.argsort(first_by_gid, kind="stable")
    relabel = np.empty_like(rank)
    relabel[rank] = np.arange(rank.shape[0])
    inverse = np.empty(N, np.int64)
    inverse[order] = relabel[gid_sorted]
    first = first_by_gid[rank]
    counts = np.bincount(inverse, minlength=first.shape[0])
    return Dedup(A[first], first, inverse, counts)


# ---------------------------------------------------------------------------
# helpers shared by the backends


def _value_rows(values, group) -> np.ndarray | None:
    """Values as an int64 matrix when the group has a fixed width, else None."""
    g = unwrap(group)
    if isinstance(g, IntGroup):
        return np.asarray(values, dtype=np.int64).reshape(-1, 1)
    if isinstance(g, LexGroup):
        try:
            return np.asarray(values, dtype=np.int64).reshape(-1, g.length)
        except OverflowError:
            return None
    return None


def _cmp_sort(idx, vals, cg):
    return sorted(idx, key=cmp_to_key(lambda a, b: cg.cmp(vals[a], vals[b])))


def _is_sorted(perm, vals, cg, strict=False) -> bool:
    cmp = cg.cmp
    for a, b in zip(perm, perm[1:]):
        c = cmp(vals[a], vals[b])
        if c > 0 or (strict and c == 0):
            return False
    return True


def verify_and_retry(sums, basis: GeneratorBasis, perm, attempts: int = 3, seed: int = 0,
                     report: SortReport | None = None) -> list:
    """Return ``perm`` if it sorts ``sums``; otherwise re-sort (bounded retries, then baseline)."""
    A, n = as_coeff_matrix(sums)
    vals = eval_many(A, basis)
    cg = CountingGroup(unwrap(basis.group))
    perm = list(perm)
    ok = len(perm) == len(vals) and sorted(perm) == list(range(len(vals))) and _is_sorted(perm, vals, cg)
    rep = report if report is not None else SortReport()
    rep.comparisons += cg.comparisons
    if ok:
        return perm
    rep.restarts += 1
    return sort_nsums(A, basis, backend="rounding", seed=seed + 1, report=rep,
                      params=SortParams(attempts=attempts))


# ---------------------------------------------------------------------------
# public entry point


def sort_nsums(sums, basis: GeneratorBasis, backend: str = "auto", seed: int = 0,
               params: SortParams | None = None, report: SortReport | None = None,
               assume_distinct: bool = False) -> list:
    """Stable 0-based permutation putting the evaluated sums in non-decreasing order."""
    if backend not in BACKENDS:
        raise InvalidArgument(f"unknown backend {backend!r}")
    params = params or SortParams()
    A, n = as_coeff_matrix(sums, basis.t)
    if A.shape[1] != basis.t:
        raise InvalidArgument(f"coefficient vectors have {A.shape[1]} entries, basis has {basis.t}")
    report = report if report is not None else SortReport()
    N = A.shape[0]
    if N == 0:
        report.backend_used = backend
        return []
    if backend == "auto":
        backend = _choose_backend(A, basis, params)
    if backend == "baseline":
        report.backend_used = "baseline"
        return _baseline(A, basis, report)
    if backend == "radix":
        report.backend_used = "radix"
        return sort_radix_smallints(A, basis, n)
    report.backend_used = "rounding"
    return _rounding(A, basis, n, seed, params, report, assume_distinct)


def _choose_backend(A, basis, params) -> str:
    N = A.shape[0]
    if N < params.small_threshold:
        return "baseline"
    g = unwrap(basis.group)
    if isinstance(g, IntGroup) and _radix_ok(A, basis):
        return "radix"
    if g.dim is None:
        return "baseline"
    return "rounding"


def _baseline(A, basis, report) -> list:
    vals = eval_many(A, basis)
    cg = CountingGroup(unwrap(basis.group))
    perm = _cmp_sort(range(len(vals)), vals, cg)
    report.comparisons += cg.comparisons
    return perm


def _radix_ok(A, basis) -> bool:
    N = A.shape[0]
    n = int(A.sum(axis=1).max()) if N else 0
    limit = (N + n + 2) ** 2
    return all(abs(int(g)) <= limit for g in basis.generators)


def sort_radix_smallints(sums, basis: GeneratorBasis, n: int | None = None) -> list:
    """Evaluate as bounded integers and radix sort (integer groups, small generators)."""
    A, n0 = as_coeff_matrix(sums, basis.t)
    g = unwrap(basis.group)
    if not isinstance(g, BigIntGroup):
        raise PreconditionError("radix backend needs an integer group")
    if A.shape[0] == 0:
        return []
    if not _radix_ok(A, basis):
        raise PreconditionError("generator magnitudes exceed the radix bit budget")
    gens = np.asarray([int(x) for x in basis.generators], dtype=np.int64)
    vals = A @ gens
    shifted = (vals - vals.min()).astype(np.uint64)
    return radix_argsort_columns(shifted.reshape(1, -1)).tolist()


# ---------------------------------------------------------------------------
# the rounding sorter


def _rounding(A, basis, n, seed, params, report, assume_distinct) -> list:
    base = unwrap(basis.group)
    if assume_distinct:
        ext_A, ext_basis, dd = A, basis, None
    else:
        dd = dedup_vectors(A)
        k = np.arange(1, dd.unique.shape[0] + 1, dtype=np.int64).reshape(-1, 1)
        ext_A = np.hstack([dd.unique, k])
        ext_basis = extend_basis(GeneratorBasis(base, basis.generators))
    vals = eval_many(ext_A, ext_basis)
    cg = CountingGroup(unwrap(ext_basis.group))
    rng = np.random.default_rng(seed)
    N = ext_A.shape[0]
    t = ext_A.shape[1]
    cap = int(params.budget * t * max(N, 1))
    perm = None
    if N < 2:
        perm = list(range(N))
    for attempt in range(params.attempts if perm is None else 0):
        start = cg.comparisons
        info = {"attempt": attempt}
        try:
            cand = _attempt(ext_A, vals, cg, rng, params, report, info, cap)
        except _BudgetExceeded:
            info["result"] = "budget"
            report.attempts.append(info)
            report.restarts += 1
            continue
        except Infeasible:
            info["result"] = "lp-infeasible"
            report.attempts.append(info)
            report.restarts += 1
            continue
        ok = _is_sorted(cand, vals, cg, strict=True)
        info["comparisons"] = cg.comparisons - start
        info["result"] = "ok" if ok else "unsorted"
        report.attempts.append(info)
        if ok:
            perm = cand
            break
        report.restarts += 1
    if perm is None:
        report.fallback = True
        report.fallback_reason = report.attempts[-1]["result"] if report.attempts else "no attempts"
        perm = _cmp_sort(range(N), vals, cg)
    report.comparisons += cg.comparisons
    if dd is None:
        return list(perm)
    # expand duplicates in original index order
    members = np.argsort(dd.inverse, kind="stable")
    starts = np.zeros(dd.first.shape[0] + 1, np.int64)
    np.cumsum(dd.counts, out=starts[1:])
    out = []
    for u in perm:
        out.extend(members[starts[u]:starts[u + 1]].tolist())
    # distinct vectors may still share a value; restore index order inside such runs
    orig = eval_many(A, basis)
    bcg = CountingGroup(base)
    lo = 0
    for k in range(1, len(out) + 1):
        if k == len(out) or bcg.cmp(orig[out[k - 1]], orig[out[k]]) != 0:
            if k - lo > 1:
                out[lo:k] = sorted(out[lo:k])
            lo = k
    report.comparisons += bcg.comparisons
    return out


def _diff_values(rows: np.ndarray | None, vals, group, I, J) -> list:
    if rows is not None:
        D = rows[I] - rows[J]
        if D.shape[1] == 1:
            return D[:, 0].tolist()
        return [tuple(r) for r in D.tolist()]
    return [group.sub(vals[i], vals[j]) for i, j in zip(I, J)]


def _sorted_sample(I, J, A, vals, rows, cg, with_labels: bool):
    """Sort the difference vectors ``A[I] - A[J]`` by value; return rows and signs."""
    g = cg.base
    dv = _diff_values(rows, vals, g, I, J)
    order = _cmp_sort(range(len(dv)), dv, cg)
    H = A[I] - A[J]
    Hs = H[order]
    zero = g.zero()
    labels = np.array([cg.cmp(dv[k], zero) for k in order], dtype=np.int64) if with_labels else None
    consec = np.array([cg.cmp(dv[a], dv[b]) for a, b in zip(order, order[1:])], dtype=np.int64)
    return Hs, labels, consec


def _add_sign_rows(S: InequalitySystem, H: np.ndarray, signs: np.ndarray):
    S.add_le_block(H[signs < 0])
    S.add_eq_block(H[signs == 0])
    S.add_le_block(-H[signs > 0])


def _rational_keys(A: np.ndarray, gt) -> list:
    """Exact integer keys ``den * <g~, a_i>`` for every row, with ``den`` clearing all denominators."""
    from fractions import Fraction

    den = 1
    for v in gt:
        den = den * Fraction(v).denominator // math.gcd(den, Fraction(v).denominator)
    num = [int(Fraction(v) * den) for v in gt]
    if max(abs(x) for x in num) * int(np.abs(A).sum(axis=1).max()) < 2**62:
        P = (A @ np.asarray(num, dtype=np.int64)).tolist()
    else:
        P = list(A.astype(object).dot(np.asarray(num, dtype=object)))
    b = max(max(abs(p).bit_length() for p in P), den.bit_length(), 1)
    return floor_keys([(p, den) for p in P], b)


def _attempt(A, vals, cg, rng, params: SortParams, report: SortReport, info: dict, cap: int) -> list:
    N, t = A.shape
    start = cg.comparisons
    rows = _value_rows(vals, cg.base)
    logN = math.log2(max(N, 4))
    p = 1.0 / logN ** params.c
    s_size = max(2, math.ceil(params.sample_scale * t * N / logN ** params.c))
    cmp = cg.cmp

    def over_budget():
        if cg.comparisons - start > cap:
            raise _BudgetExceeded()

    # ---- phase 1: sample, sort the sample, bucket everything -------------------
    mn = mx = 0
    for i in range(1, N):
        if cmp(vals[i], vals[mn]) < 0:
            mn = i
        if cmp(vals[i], vals[mx]) > 0:
            mx = i
    mask = rng.random(N) < p
    mask[mn] = mask[mx] = True
    Y = _cmp_sort(np.nonzero(mask)[0].tolist(), vals, cg)
    m = len(Y) - 1
    B = params.bucket_stride(N)
    nb = max(1, m // B)
    bounds = [Y[j * B] for j in range(nb)]
    info["sample"] = len(Y)
    info["stride"] = B
    bucket = np.zeros(N, np.int64)
    if nb > 1:
        I = rng.integers(0, N, size=s_size)
        J = rng.integers(0, N - 1, size=s_size)
        J = J + (J >= I)
        Hs, labels, consec = _sorted_sample(I, J, A, vals, rows, cg, with_labels=True)
        S = InequalitySystem(t)
        Yi = np.asarray(Y, dtype=np.int64)
        S.add_le_block(A[Yi[:-1]] - A[Yi[1:]])
        _add_sign_rows(S, Hs, labels)
        _add_sign_rows(S, Hs[:-1] - Hs[1:], consec)
        report.lp_rows += S.num_rows
        gt = solve_feasibility(S)
        keys = _rational_keys(A, gt)
        order = argsort_int_keys(keys)
        bkeys = [keys[b] for b in bounds]
        # provisional buckets by a merge along the sorted keys
        j = 0
        for i in order.tolist():
            while j + 1 < nb and keys[i] >= bkeys[j + 1]:
                j += 1
            bucket[i] = j
        # repair against true comparisons
        straggle = 0

        def member(i, j):
            if j < 0 or j >= nb:
                return False
            if j > 0 and cmp(vals[i], vals[bounds[j]]) < 0:
                return False
            if j + 1 < nb and cmp(vals[i], vals[bounds[j + 1]]) >= 0:
                return False
            return True

        for i in range(N):
            j = int(bucket[i])
            if member(i, j):
                continue
            if member(i, j - 1):
                bucket[i] = j - 1
            elif member(i, j + 1):
                bucket[i] = j + 1
            else:
                straggle += 1
                lo, hi = 0, nb - 1
                while lo < hi:  # last boundary <= x_i
                    mid = (lo + hi + 1) // 2
                    if cmp(vals[bounds[mid]], vals[i]) <= 0:
                        lo = mid
                    else:
                        hi = mid - 1
                bucket[i] = lo
            over_budget()
        report.stragglers += straggle
    sizes = np.bincount(bucket, minlength=nb)
    report.buckets = nb
    report.max_bucket = int(sizes.max())
    info["buckets"] = nb

    # ---- phase 2: order within buckets ------------------------------------------------
    members = np.argsort(bucket, kind="stable")
    starts = np.zeros(nb + 1, np.int64)
    np.cumsum(sizes, out=starts[1:])
    eligible = members[sizes[bucket[members]] >= 2]
    if eligible.shape[0] >= 2:
        I = eligible[rng.integers(0, eligible.shape[0], size=s_size)]
        bi = bucket[I]
        off = rng.integers(0, sizes[bi] - 1)
        # pick a different member of the same bucket
        rank_i = np.empty(N, np.int64)
        rank_i[members] = np.arange(N) - np.repeat(starts[:-1], sizes)
        off = off + (off >= rank_i[I])
        J = members[starts[bi] + off]
        Hs, labels, consec = _sorted_sample(I, J, A, vals, rows, cg, with_labels=params.phase2_labels)
        S = InequalitySystem(t)
        _add_sign_rows(S, Hs[:-1] - Hs[1:], consec)
        if labels is not None:
            _add_sign_rows(S, Hs, labels)
        report.lp_rows += S.num_rows
        gt2 = solve_feasibility(S)
        keys2 = _rational_keys(A, gt2)
        order = argsort_int_keys(keys2, bucket).tolist()
    else:
        order = members.tolist()

    # insertion sort inside each bucket with true comparisons
    out = order
    inv = 0
    pos = 0
    for j in range(nb):
        lo = pos
        hi = pos + int(sizes[j])
        for a in range(lo + 1, hi):
            x = out[a]
            b = a
            while b > lo and cmp(vals[out[b - 1]], vals[x]) > 0:
                out[b] = out[b - 1]
                b -= 1
                inv += 1
            out[b] = x
            if inv & 1023 == 0:
                over_budget()
        pos = hi
        over_budget()
    report.inversions += inv
    info["inversions"] = inv
    return out


# ---------------------------------------------------------------------------
# stepwise interface for paced callers


class NSumSorter:
    """Configured sorter handle; ``steps`` yields work units and returns the permutation."""

    def __init__(self, backend: str = "auto", seed: int = 0, params: SortParams | None = None):
        if backend not in BACKENDS:
            raise InvalidArgument(f"unknown backend {backend!r}")
        self.backend = backend
        self.seed = seed
        self.params = params or SortParams()
        self.reports: list[SortReport] = []

    def __call__(self, sums, basis, assume_distinct=False) -> list:
        rep = SortReport()
        perm = sort_nsums(sums, basis, self.backend, self.seed, self.params, rep, assume_distinct)
        self.reports.append(rep)
        return perm

    def steps(self, sums, basis, assume_distinct=False, chunk: int = 256):
        A, _ = as_coeff_matrix(sums, basis.t)
        backend = self.backend
        if backend == "auto":
            backend = _choose_backend(A, basis, self.params) if A.shape[0] else "baseline"
        if backend != "baseline":
            rep = SortReport()
            perm = sort_nsums(A, basis, backend, self.seed, self.params, rep, assume_distinct)
            self.reports.append(rep)
            yield max(1, rep.comparisons)
            return perm
        rep = SortReport(backend_used="baseline")
        vals = eval_many(A, basis)
        cg = CountingGroup(unwrap(basis.group))
        perm = yield from merge_sort_steps(list(range(len(vals))), vals, cg, chunk)
        rep.comparisons = cg.comparisons
        self.reports.append(rep)
        return perm


def merge_sort_steps(items: list, vals: Sequence, cg: CountingGroup, chunk: int = 256):
    """Stable bottom-up merge sort; yields comparison counts roughly every ``chunk`` comparisons."""
    n = len(items)
    src = list(items)
    width = 1
    pending = 0
    cmp = cg.cmp
    while width < n:
        dst = []
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j = lo, mid
            while i < mid and j < hi:
                if cmp(vals[src[j]], vals[src[i]]) < 0:
                    dst.append(src[j])
                    j += 1
                else:
                    dst.append(src[i])
                    i += 1
                pending += 1
                if pending >= chunk:
                    yield pending
                    pending = 0
            dst.extend(src[i:mid])
            dst.extend(src[j:hi])
        src = dst
        width *= 2
    if pending:
        yield pending
    return src

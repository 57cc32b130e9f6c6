"""Exact feasibility of homogeneous integer systems.

A system holds rows ``h`` with one of three senses:
``<x, h> <= -1``, ``<x, h> = 0`` or ``<x, h> >= 1`` (stored as ``<x, -h> <= -1``).
Any returned point is checked against every row with exact integer
arithmetic before it leaves this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import Infeasible

_INT64_SAFE = 2**62


@dataclass
class InequalitySystem:
    t: int
    le_rows: list = field(default_factory=list)   # <x, h> <= -1
    eq_rows: list = field(default_factory=list)   # <x, h> = 0

    def add_le(self, h):
        self.le_rows.append(np.asarray(h, dtype=np.int64))

    def add_ge(self, h):
        self.le_rows.append(-np.asarray(h, dtype=np.int64))

    def add_eq(self, h):
        self.eq_rows.append(np.asarray(h, dtype=np.int64))

    def add_le_block(self, H):
        self.le_rows.extend(np.asarray(H, dtype=np.int64).reshape(-1, self.t))

    def add_eq_block(self, H):
        self.eq_rows.extend(np.asarray(H, dtype=np.int64).reshape(-1, self.t))

    def matrices(self):
        def stack(rows):
            if not rows:
                return np.zeros((0, self.t), np.int64)
            return np.unique(np.vstack(rows), axis=0)

        le = stack(self.le_rows)
        eq = stack(self.eq_rows)
        if eq.shape[0]:
            eq = eq[np.any(eq != 0, axis=1)]
        return le, eq

    @property
    def num_rows(self) -> int:
        return len(self.le_rows) + len(self.eq_rows)

    def facet_complexity(self) -> int:
        """Largest encoding length (bits) of one row."""
        le, eq = self.matrices()
        best = 1
        for M in (le, eq):
            if M.shape[0]:
                bits = np.ceil(np.log2(np.abs(M).astype(np.float64) + 1)).sum(axis=1) + M.shape[1] + 1
                best = max(best, int(bits.max()))
        return best

    def satisfied_by(self, x) -> bool:
        return check_point(self, x)


def _as_int_scaled(x):
    """``x`` (rationals) as integer numerators over one common denominator."""
    fr = [Fraction(v) for v in x]
    den = 1
    for f in fr:
        den = den * f.denominator // math.gcd(den, f.denominator)
    return [int(f * den) for f in fr], den


def _matvec_exact(M: np.ndarray, v: list) -> list:
    if M.shape[0] == 0:
        return []
    bound = int(np.abs(M).sum(axis=1).max()) * max((abs(a) for a in v), default=0)
    if bound < _INT64_SAFE:
        return (M @ np.asarray(v, dtype=np.int64)).tolist()
    Mo = M.astype(object)
    return list(Mo.dot(np.asarray(v, dtype=object)))


def check_point(S: InequalitySystem, x) -> bool:
    le, eq = S.matrices()
    num, den = _as_int_scaled(x)
    if any(r != 0 for r in _matvec_exact(eq, num)):
        return False
    return all(r <= -den for r in _matvec_exact(le, num))


# ---------------------------------------------------------------------------
# equality handling


def integer_nullspace(eq: np.ndarray, t: int) -> np.ndarray:
    """Integer basis (columns) of ``{x : eq @ x = 0}``, exact."""
    import sympy

    if eq.shape[0] == 0:
        return np.eye(t, dtype=np.int64)
    chosen: list[int] = []
    # pick a candidate row basis numerically, then confirm exactly
    rank = np.linalg.matrix_rank(eq.astype(np.float64))
    chosen = _pivot_rows(eq.astype(np.float64), rank)
    while True:
        M = sympy.Matrix(eq[chosen].tolist()) if chosen else sympy.zeros(1, t)
        basis = M.nullspace()
        cols = []
        for v in basis:
            den = sympy.ilcm(*[sympy.fraction(e)[1] for e in v]) if len(v) else 1
            col = [int(e * den) for e in v]
            g = 0
            for a in col:
                g = math.gcd(g, a)
            cols.append([a // g for a in col] if g else col)
        Nm = np.array(cols, dtype=object).T if cols else np.zeros((t, 0), dtype=object)
        if Nm.shape[1] == 0:
            return np.zeros((t, 0), np.int64)
        R = eq.astype(object).dot(Nm)
        bad = [i for i in range(eq.shape[0]) if any(v != 0 for v in R[i])]
        if not bad:
            return np.array(Nm.tolist(), dtype=np.int64)
        chosen.append(bad[0])


def _pivot_rows(A: np.ndarray, rank: int):
    """Indices of ``rank`` rows that are (numerically) independent."""
    import scipy.linalg

    if rank == 0:
        return []
    _, _, piv = scipy.linalg.qr(A.T, pivoting=True, mode="economic")
    return sorted(int(p) for p in piv[:rank])


# ---------------------------------------------------------------------------
# solvers


def solve_feasibility(S: InequalitySystem, method: str = "auto", margin: float = 4.0) -> tuple:
    """A rational point satisfying every row of ``S`` exactly, as a tuple of Fractions.

    ``auto`` tries a floating-point LP with a safety margin, rounds to a
    dyadic grid and verifies exactly; if that fails it runs an exact
    cutting-plane loop. ``fm`` runs exact Fourier-Motzkin elimination.
    Raises :class:`Infeasible` when no point exists.
    """
    if method == "fm":
        x = fourier_motzkin(S)
        assert check_point(S, x)
        return x
    le, eq = S.matrices()
    t = S.t
    N = integer_nullspace(eq, t)
    r = N.shape[1]
    if r == 0:
        if le.shape[0]:
            raise Infeasible("equalities force x = 0, which violates a strict row")
        return tuple(Fraction(0) for _ in range(t))
    A = _reduce(le, N)
    y = None
    if method in ("auto", "float") and A.shape[0]:
        y = _float_then_round(A, margin)
    elif not A.shape[0]:
        y = [Fraction(0)] * r
    if y is None:
        if method == "float":
            raise Infeasible("floating-point LP found no verifiable point")
        y = _cutting_plane(A)
    num, den = _as_int_scaled(y)
    xnum = [sum(int(N[i, j]) * num[j] for j in range(r)) for i in range(t)]
    x = tuple(Fraction(v, den) for v in xnum)
    if not check_point(S, x):  # pragma: no cover - guarded by construction
        raise AssertionError("feasibility point failed exact verification")
    return x


def _reduce(le: np.ndarray, N: np.ndarray) -> np.ndarray:
    if le.shape[0] == 0:
        return np.zeros((0, N.shape[1]), dtype=object)
    bound = int(np.abs(le).sum(axis=1).max()) * int(np.abs(N).max())
    if bound < _INT64_SAFE:
        return le @ N
    return le.astype(object).dot(N.astype(object))


def _verify_reduced(A: np.ndarray, num: list, den: int) -> bool:
    if A.dtype != object:
        vals = _matvec_exact(A, num)
    else:
        vals = list(A.dot(np.asarray(num, dtype=object)))
    return all(v <= -den for v in vals)


def _float_then_round(A: np.ndarray, margin: float):
    from scipy.optimize import linprog

    Af = A.astype(np.float64)
    scale = float(np.abs(Af).max()) or 1.0
    r = A.shape[1]
    res = linprog(np.zeros(r), A_ub=Af / scale, b_ub=np.full(A.shape[0], -margin / scale),
                  bounds=[(-1e12, 1e12)] * r, method="highs")
    # a reported infeasibility may be an artifact of the box bounds; let the exact path decide
    if res.status != 0 or res.x is None:
        return None
    yf = res.x
    for K in (0, 4, 8, 16, 24, 32, 48):
        num = [int(round(v * (1 << K))) for v in yf]
        if _verify_reduced(A, num, 1 << K):
            return [Fraction(v, 1 << K) for v in num]
    return None


def _cutting_plane(A: np.ndarray, max_rounds: int = 400):
    """Exact simplex on a growing subset of rows until every row holds."""
    m, r = A.shape
    rows = [[int(v) for v in A[i]] for i in range(m)]
    # seed with rows of largest norm (the tightest directions) plus a spread sample
    norms = sorted(range(m), key=lambda i: -sum(abs(v) for v in rows[i]))
    work = set(norms[: 2 * r + 2]) | set(range(0, m, max(1, m // (4 * r + 4))))
    for _ in range(max_rounds):
        W = sorted(work)
        y = exact_phase1([rows[i] for i in W], r)
        num, den = _as_int_scaled(y)
        vals = _matvec_exact(A, num) if A.dtype != object else list(A.dot(np.asarray(num, dtype=object)))
        bad = [i for i, v in enumerate(vals) if v > -den]
        if not bad:
            return y
        bad.sort(key=lambda i: -vals[i])
        work.update(bad[: 4 * r + 4])
    raise RuntimeError("cutting-plane loop did not converge")


def exact_phase1(rows: list, r: int) -> list:
    """A point ``y`` with ``<row, y> <= -1`` for every row, by phase-1 simplex.

    Free variables are split as ``y = p - q`` with ``p, q >= 0``. Each row
    becomes ``-<row, p> + <row, q> - s + a = 1`` with slack ``s`` and
    artificial ``a``; Bland's rule guarantees termination. Raises
    :class:`Infeasible` when the artificial sum cannot reach zero.
    """
    m = len(rows)
    nvar = 2 * r + 2 * m
    one, zero = Fraction(1), Fraction(0)
    T = []
    for i, h in enumerate(rows):
        row = [Fraction(-v) for v in h] + [Fraction(v) for v in h] + [zero] * (2 * m) + [one]
        row[2 * r + i] = -one
        row[2 * r + m + i] = one
        T.append(row)
    basis = [2 * r + m + i for i in range(m)]
    # objective: minimize the artificial sum, expressed in non-basic columns
    cost = [zero] * (nvar + 1)
    for row in T:
        for j in range(nvar + 1):
            cost[j] -= row[j]
    for j in range(2 * r + m, nvar):
        cost[j] += 1
    while True:
        enter = next((j for j in range(nvar) if cost[j] < 0), -1)
        if enter < 0:
            break
        leave, best = -1, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave < 0:  # cannot happen in phase 1 (objective bounded below by 0)
            raise RuntimeError("unbounded phase-1 objective")
        piv = T[leave][enter]
        prow = [v / piv if v else zero for v in T[leave]]
        T[leave] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for row in T + [cost]:
            if row is prow:
                continue
            f = row[enter]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        basis[leave] = enter
    if -cost[-1] != 0:
        raise Infeasible("linear system is infeasible")
    x = [zero] * nvar
    for i, j in enumerate(basis):
        x[j] = T[i][-1]
    return [x[i] - x[r + i] for i in range(r)]


def fourier_motzkin(S: InequalitySystem, max_rows: int = 20000) -> tuple:
    """Exact Fourier-Motzkin elimination with back-substitution (small systems)."""
    le, eq = S.matrices()
    t = S.t
    # each constraint: (coeffs, rhs) meaning <coeffs, x> <= rhs
    cons = [([Fraction(int(v)) for v in h], Fraction(-1)) for h in le]
    for h in eq:
        cons.append(([Fraction(int(v)) for v in h], Fraction(0)))
        cons.append(([Fraction(-int(v)) for v in h], Fraction(0)))
    stages = []
    for k in range(t - 1, -1, -1):
        pos, neg, rest = [], [], []
        for c in cons:
            (pos if c[0][k] > 0 else neg if c[0][k] < 0 else rest).append(c)
        stages.append((k, pos, neg))
        new = list(rest)
        for a, ra in pos:
            for b, rb in neg:
                la, lb = -b[k], a[k]
                coeffs = [la * a[i] + lb * b[i] for i in range(t)]
                new.append((coeffs, la * ra + lb * rb))
        cons = _dedup(new)
        if len(cons) > max_rows:
            raise RuntimeError("Fourier-Motzkin row blow-up")
    for _, rhs in cons:
        if rhs < 0:  # 0 <= rhs must hold with all variables eliminated
            raise Infeasible("linear system is infeasible")
    x = [Fraction(0)] * t
    for k, pos, neg in reversed(stages):
        lo, hi = None, None
        for a, ra in pos:
            v = (ra - sum(a[i] * x[i] for i in range(t) if i != k)) / a[k]
            hi = v if hi is None or v < hi else hi
        for b, rb in neg:
            v = (rb - sum(b[i] * x[i] for i in range(t) if i != k)) / b[k]
            lo = v if lo is None or v > lo else lo
        if lo is not None and hi is not None:
            x[k] = _simple_between(lo, hi)
        elif lo is not None:
            x[k] = Fraction(math.ceil(lo))
        elif hi is not None:
            x[k] = Fraction(math.floor(hi))
    return tuple(x)


def _simple_between(lo: Fraction, hi: Fraction) -> Fraction:
    if lo > hi:
        raise Infeasible("empty interval in back-substitution")
    c = Fraction(math.ceil(lo))
    if c <= hi:
        return c
    return (lo + hi) / 2


def _dedup(cons):
    """Keep the tightest constraint per direction (rows scaled to a unit pivot)."""
    best = {}
    for coeffs, rhs in cons:
        nz = [abs(c) for c in coeffs if c != 0]
        piv = nz[0] if nz else Fraction(1)
        key = tuple(c / piv for c in coeffs)
        r = rhs / piv
        if key not in best or r < best[key][1]:
            best[key] = (list(key), r)
    return list(best.values())


def bit_length(x) -> int:
    """Largest numerator/denominator bit length in a rational vector."""
    return max((max(abs(Fraction(v).numerator).bit_length(), Fraction(v).denominator.bit_length()) for v in x),
               default=0)

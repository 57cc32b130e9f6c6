"""Ordered abelian groups, generator bases and n-sums.

Three reference groups are provided:

* :class:`IntGroup`     -- 64-bit integers, additions checked for overflow;
* :class:`BigIntGroup`  -- Python integers, unbounded;
* :class:`LexGroup`     -- fixed-length integer vectors, lexicographic order.

Group values are plain Python objects (``int`` or ``tuple`` of ``int``), so
they hash, print and serialize without wrappers. ``group.key(v)`` returns a
Python-comparable key consistent with the group order; for every group here
it is the value itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class Group:
    kind: str = "abstract"
    #: number of int64 columns used by the array-backed engine, or None
    dim: int | None = None

    def zero(self):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def cmp(self, a, b) -> int:
        raise NotImplementedError

    def le(self, a, b) -> bool:
        return self.cmp(a, b) <= 0

    def lt(self, a, b) -> bool:
        return self.cmp(a, b) < 0

    def eq(self, a, b) -> bool:
        return self.cmp(a, b) == 0

    def key(self, a):
        return a

    def scale(self, k: int, a):
        """``k`` copies of ``a`` (``k`` may be negative), by doubling."""
        if k < 0:
            return self.scale(-k, self.neg(a))
        acc, base = self.zero(), a
        while k:
            if k & 1:
                acc = self.add(acc, base)
            k >>= 1
            if k:
                base = self.add(base, base)
        return acc

    def total(self, values: Iterable):
        acc = self.zero()
        for v in values:
            acc = self.add(acc, v)
        return acc

    # serialization -----------------------------------------------------
    def spec(self) -> str:
        return self.kind

    def from_json(self, obj):
        raise NotImplementedError

    def to_json(self, value):
        raise NotImplementedError

    # array bridge for the numeric engine --------------------------------
    def to_array(self, values: Sequence) -> np.ndarray:
        raise NotImplementedError(f"group {self.spec()!r} has no int64 array form")

    def from_row(self, row):
        raise NotImplementedError

    def from_array(self, arr: np.ndarray) -> list:
        raise NotImplementedError

    def random(self, rng: np.random.Generator, bound: int = 100):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.spec() == other.spec()

    def __hash__(self):
        return hash(self.spec())

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec()}>"


def _check_int(value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidArgument(f"expected an integer group value, got {value!r}")
    return int(value)


class BigIntGroup(Group):
    kind = "bigint"

    def zero(self):
        return 0

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def sub(self, a, b):
        return a - b

    def cmp(self, a, b):
        return (a > b) - (a < b)

    def scale(self, k, a):
        return k * a

    def from_json(self, obj):
        return _check_int(obj)

    def to_json(self, value):
        return int(value)

    def random(self, rng, bound=100):
        return int(rng.integers(-bound, bound + 1))


class IntGroup(BigIntGroup):
    """Machine integers; any result outside int64 raises ``OverflowError``."""

    kind = "int"
    dim = 1

    @staticmethod
    def _checked(v: int) -> int:
        if v < INT64_MIN or v > INT64_MAX:
            raise OverflowError(f"int64 overflow: {v}")
        return v

    def add(self, a, b):
        return self._checked(a + b)

    def neg(self, a):
        return self._checked(-a)

    def sub(self, a, b):
        return self._checked(a - b)

    def scale(self, k, a):
        return self._checked(k * a)

    def from_json(self, obj):
        return self._checked(_check_int(obj))

    def to_array(self, values):
        return np.asarray([int(v) for v in values], dtype=np.int64).reshape(-1, 1)

    def from_row(self, row):
        return int(row[0])

    def from_array(self, arr):
        return np.asarray(arr, dtype=np.int64).reshape(-1, 1)[:, 0].tolist()


class LexGroup(Group):
    """Integer vectors of fixed length under lexicographic order.

    With ``checked=True`` every coordinate stays in int64, which is what the
    array engine needs; ``checked=False`` gives the unbounded variant.
    """

    kind = "lex"

    def __init__(self, dim: int, checked: bool = True):
        if dim < 1:
            raise InvalidArgument("lexicographic group needs dim >= 1")
        self.dim = dim if checked else None
        self.length = dim
        self.checked = checked
        self._zero = (0,) * dim

    def spec(self):
        return f"lex:{self.length}" if self.checked else f"biglex:{self.length}"

    def _wrap(self, t):
        if self.checked:
            for v in t:
                if v < INT64_MIN or v > INT64_MAX:
                    raise OverflowError(f"int64 overflow in coordinate: {v}")
        return t

    def zero(self):
        return self._zero

    def add(self, a, b):
        return self._wrap(tuple(x + y for x, y in zip(a, b)))

    def neg(self, a):
        return self._wrap(tuple(-x for x in a))

    def sub(self, a, b):
        return self._wrap(tuple(x - y for x, y in zip(a, b)))

    def scale(self, k, a):
        return self._wrap(tuple(k * x for x in a))

    def cmp(self, a, b):
        return (a > b) - (a < b)

    def from_json(self, obj):
        if not isinstance(obj, (list, tuple)) or len(obj) != self.length:
            raise InvalidArgument(f"expected an integer array of length {self.length}, got {obj!r}")
        return self._wrap(tuple(_check_int(v) for v in obj))

    def to_json(self, value):
        return [int(v) for v in value]

    def to_array(self, values):
        if not self.checked:
            return super().to_array(values)
        return np.asarray([list(v) for v in values], dtype=np.int64).reshape(-1, self.length)

    def from_row(self, row):
        return tuple(int(v) for v in row)

    def from_array(self, arr):
        return [tuple(r) for r in np.asarray(arr, dtype=np.int64).reshape(-1, self.length).tolist()]

    def random(self, rng, bound=100):
        return tuple(int(v) for v in rng.integers(-bound, bound + 1, size=self.length))


def group_from_spec(spec: str) -> Group:
    """Parse ``int``, ``bigint``, ``lex:K`` or ``biglex:K``."""
    if not isinstance(spec, str):
        raise InvalidArgument(f"group kind must be a string, got {spec!r}")
    s = spec.strip().lower()
    if s in ("int", "int64"):
        return IntGroup()
    if s in ("bigint", "integer"):
        return BigIntGroup()
    for prefix, checked in (("lex:", True), ("biglex:", False)):
        if s.startswith(prefix):
            try:
                dim = int(s[len(prefix):])
            except ValueError:
                break
            return LexGroup(dim, checked=checked)
    raise InvalidArgument(f"unknown group kind {spec!r}")


def extended_group(group: Group) -> Group:
    """The group G x Z (lexicographic), as used by :func:`distinctify`."""
    if isinstance(group, IntGroup):
        return LexGroup(2)
    if isinstance(group, BigIntGroup):
        return LexGroup(2, checked=False)
    if isinstance(group, LexGroup):
        return LexGroup(group.length + 1, checked=group.checked)
    raise InvalidArgument(f"cannot extend group {group!r}")


def embed_extended(group: Group, value, extra: int = 0):
    if isinstance(group, LexGroup):
        return tuple(value) + (extra,)
    return (value, extra)


class CountingGroup(Group):
    """Delegating wrapper that counts comparisons and additions.

    One instance per sorting/enumeration session; not shared globally.
    """

    def __init__(self, base: Group):
        self.base = base
        self.kind = base.kind
        self.dim = base.dim
        self.comparisons = 0
        self.additions = 0

    def spec(self):
        return self.base.spec()

    def reset(self):
        self.comparisons = 0
        self.additions = 0

    def zero(self):
        return self.base.zero()

    def add(self, a, b):
        self.additions += 1
        return self.base.add(a, b)

    def neg(self, a):
        return self.base.neg(a)

    def sub(self, a, b):
        self.additions += 1
        return self.base.sub(a, b)

    def scale(self, k, a):
        return self.base.scale(k, a)

    def cmp(self, a, b):
        self.comparisons += 1
        return self.base.cmp(a, b)

    def key(self, a):
        return self.base.key(a)

    def from_json(self, obj):
        return self.base.from_json(obj)

    def to_json(self, value):
        return self.base.to_json(value)

    def to_array(self, values):
        return self.base.to_array(values)

    def from_row(self, row):
        return self.base.from_row(row)

    def from_array(self, arr):
        return self.base.from_array(arr)

    def random(self, rng, bound=100):
        return self.base.random(rng, bound)

    def __eq__(self, other):
        return self.base == (other.base if isinstance(other, CountingGroup) else other)

    def __hash__(self):
        return hash(self.base)


def unwrap(group: Group) -> Group:
    while isinstance(group, CountingGroup):
        group = group.base
    return group


# ---------------------------------------------------------------------------
# generator bases and n-sums


@dataclass(frozen=True)
class GeneratorBasis:
    group: Group
    generators: tuple

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise InvalidArgument("a generator basis needs at least one generator")

    @property
    def t(self) -> int:
        return len(self.generators)


@dataclass(frozen=True)
class NSum:
    """Coefficient vector of ``sum_i coeffs[i] * g_i`` with ``sum(coeffs) <= n``.

    ``signed=True`` admits the difference vectors used by the sorter, whose
    coefficients range over ``[-2n, 2n]``.
    """

    coeffs: tuple
    n: int
    signed: bool = False

    def __post_init__(self):
        coeffs = tuple(int(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if self.signed:
            if any(abs(a) > 2 * self.n for a in coeffs):
                raise InvalidArgument(f"difference coefficient outside [-2n, 2n]: {coeffs}")
            return
        if any(a < 0 or a > self.n for a in coeffs):
            raise InvalidArgument(f"coefficient outside [0, {self.n}]: {coeffs}")
        if sum(coeffs) > self.n:
            raise InvalidArgument(f"coefficients sum to more than {self.n}: {coeffs}")

    @property
    def t(self) -> int:
        return len(self.coeffs)


class PrecomputeTable:
    """All multiples ``k * g_i`` for ``1 <= k <= n``; lookups are 1-based."""

    def __init__(self, basis: GeneratorBasis, n: int):
        if n < 1:
            raise InvalidArgument(f"table bound must be >= 1, got {n}")
        self.basis = basis
        self.n = n
        g = basis.group
        rows = [list(basis.generators)]
        for _ in range(1, n):
            prev = rows[-1]
            rows.append([g.add(p, gi) for p, gi in zip(prev, basis.generators)])
        self._rows = rows

    def __getitem__(self, ki):
        k, i = ki
        if not (1 <= k <= self.n and 1 <= i <= self.basis.t):
            raise KeyError(ki)
        return self._rows[k - 1][i - 1]

    def __len__(self):
        return self.n * self.basis.t

    def as_dict(self) -> dict:
        return {(k, i): self[k, i] for k in range(1, self.n + 1) for i in range(1, self.basis.t + 1)}


def build_precompute_table(basis: GeneratorBasis, n: int) -> PrecomputeTable:
    return PrecomputeTable(basis, n)


def nsum_eval(s: NSum, table: PrecomputeTable):
    """Value of ``s`` using one table lookup and one addition per generator."""
    basis = table.basis
    if s.t != basis.t:
        raise InvalidArgument(f"n-sum has {s.t} coefficients, basis has {basis.t}")
    g = basis.group
    acc = g.zero()
    for i, a in enumerate(s.coeffs, start=1):
        if a == 0:
            continue
        if abs(a) > table.n:
            raise InvalidArgument(f"coefficient {a} exceeds table bound {table.n}")
        v = table[abs(a), i]
        acc = g.add(acc, v) if a > 0 else g.sub(acc, v)
    return acc


def direct_eval(s: NSum, basis: GeneratorBasis):
    """Reference evaluation by repeated addition (test oracle)."""
    g = basis.group
    acc = g.zero()
    for a, gi in zip(s.coeffs, basis.generators):
        for _ in range(abs(a)):
            acc = g.add(acc, gi) if a > 0 else g.sub(acc, gi)
    return acc


def extend_basis(basis: GeneratorBasis) -> GeneratorBasis:
    base = unwrap(basis.group)
    ext = extended_group(base)
    gens = [embed_extended(base, g, 0) for g in basis.generators]
    gens.append(embed_extended(base, base.zero(), 1))
    return GeneratorBasis(ext, tuple(gens))


def distinctify(
    sums: Sequence[NSum],
    basis: GeneratorBasis,
    index: Sequence[int] | None = None,
) -> tuple[list[NSum], GeneratorBasis]:
    """Append a tie-breaking coefficient so all sums evaluate to distinct values.

    The k-th input (1-based, or ``index[k-1]`` when given) gains coefficient
    ``k`` on the extra generator ``(0, 1)`` of ``G x Z``. Indices must be
    distinct positive integers.
    """
    if not sums:
        return [], extend_basis(basis)
    n = sums[0].n
    for s in sums:
        if s.t != basis.t:
            raise InvalidArgument(f"n-sum with {s.t} coefficients over a basis of {basis.t}")
        if s.n != n:
            raise InvalidArgument("all n-sums must share the same bound n")
    if index is None:
        index = range(1, len(sums) + 1)
    index = [int(k) for k in index]
    if len(index) != len(sums):
        raise InvalidArgument("index length does not match number of sums")
    if len(set(index)) != len(index) or min(index) < 1:
        raise InvalidArgument("tie-break indices must be distinct and positive")
    bound = n + max(index)
    out = [NSum(s.coeffs + (k,), bound) for s, k in zip(sums, index)]
    return out, extend_basis(basis)


def all_nsums(t: int, n: int):
    """Every coefficient vector of an n-sum over t generators (small cases)."""
    for coeffs in itertools.product(range(n + 1), repeat=t):
        if sum(coeffs) <= n:
            yield NSum(coeffs, n)


def eval_many(coeffs: np.ndarray, basis: GeneratorBasis) -> list:
    """Vectorized evaluation of many coefficient rows.

    Uses an int64 matrix product for array-backed groups (with an exact
    magnitude pre-check) and Python integers otherwise.
    """
    coeffs = np.asarray(coeffs)
    g = unwrap(basis.group)
    if coeffs.size == 0:
        return []
    if g.dim is not None:
        gen = g.to_array(basis.generators)
        bound = int(np.abs(coeffs).sum(axis=1).max()) * int(np.abs(gen).max(initial=0))
        if bound <= INT64_MAX:
            return g.from_array(coeffs.astype(np.int64) @ gen)
    gens = list(basis.generators)
    rows = coeffs.tolist()
    out = []
    if isinstance(g, LexGroup):
        L = g.length
        for r in rows:
            out.append(g._wrap(tuple(sum(a * gen[j] for a, gen in zip(r, gens)) for j in range(L))))
    else:
        for r in rows:
            out.append(sum(a * gi for a, gi in zip(r, gens)))
    return out


__all__ = [
    "Group",
    "IntGroup",
    "BigIntGroup",
    "LexGroup",
    "CountingGroup",
    "GeneratorBasis",
    "NSum",
    "PrecomputeTable",
    "build_precompute_table",
    "nsum_eval",
    "direct_eval",
    "distinctify",
    "extend_basis",
    "extended_group",
    "group_from_spec",
    "eval_many",
    "unwrap",
]

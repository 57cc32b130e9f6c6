from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankenum.errors import Infeasible, InvalidArgument, PreconditionError
from rankenum.group_core import BigIntGroup, GeneratorBasis, IntGroup, LexGroup, NSum, eval_many
from rankenum.nsum_sort import (
    InequalitySystem,
    NSumSorter,
    SortParams,
    SortReport,
    argsort_int_keys,
    dedup_vectors,
    floor_keys,
    fourier_motzkin,
    merge_sort_steps,
    round_and_radix_sort,
    solve_feasibility,
    sort_nsums,
    sort_radix_smallints,
    verify_and_retry,
)
from rankenum.nsum_sort.lp import check_point, integer_nullspace


def stable_baseline(A, basis):
    vals = eval_many(A, basis)
    return sorted(range(len(vals)), key=lambda i: (vals[i], i))


def random_instance(rng, N, t=3, n=None, group=None, gens=None):
    n = n or N
    A = rng.multinomial(n, [1 / (t + 1)] * (t + 1), size=N)[:, :t]
    if gens is None:
        gens = tuple(int(x) for x in rng.integers(-10**6, 10**6, size=t))
    return A, GeneratorBasis(group or IntGroup(), gens)


# -- sorter backends -----------------------------------------------------------


@pytest.mark.parametrize("backend", ["baseline", "rounding", "auto"])
def test_backends_sort_stably(rng, backend):
    for N in (1, 2, 50, 600):
        A, basis = random_instance(rng, N, n=6)  # few distinct vectors: many duplicates
        params = SortParams(small_threshold=0)
        assert sort_nsums(A, basis, backend, params=params) == stable_baseline(A, basis)


def test_radix_backend(rng):
    A, basis = random_instance(rng, 3000, gens=(3, -7, 11), n=40)
    assert sort_nsums(A, basis, "radix") == stable_baseline(A, basis)
    rep = SortReport()
    assert sort_nsums(A, basis, "auto", params=SortParams(small_threshold=100), report=rep) == stable_baseline(A, basis)
    assert rep.backend_used == "radix"


def test_radix_rejects_large_generators(rng):
    A, basis = random_instance(rng, 10, gens=(10**12, 1, 2))
    with pytest.raises(PreconditionError):
        sort_radix_smallints(A, basis)
    with pytest.raises(PreconditionError):
        sort_radix_smallints(A, GeneratorBasis(LexGroup(1), ((1,), (2,), (3,))))


def test_near_ties_in_lex_groups(rng):
    # first coordinates cancel often; the order is decided by the second
    g = LexGroup(2)
    gens = ((1, 5), (1, -3), (-2, 1), (0, 1))
    A, basis = random_instance(rng, 5000, t=4, gens=gens, group=g)
    rep = SortReport()
    assert sort_nsums(A, basis, "rounding", report=rep, seed=3) == stable_baseline(A, basis)
    assert rep.comparisons > 0


def test_rounding_with_real_buckets(rng):
    A, basis = random_instance(rng, 20000)
    rep = SortReport()
    perm = sort_nsums(A, basis, "rounding", params=SortParams(stride=64), report=rep)
    assert perm == stable_baseline(A, basis)
    assert rep.buckets > 1 and rep.lp_rows > 0


def test_budget_fallback_is_reported(rng):
    A, basis = random_instance(rng, 5000)
    rep = SortReport()
    perm = sort_nsums(A, basis, "rounding", params=SortParams(budget=0.01, attempts=2), report=rep)
    assert perm == stable_baseline(A, basis)
    assert rep.fallback and rep.fallback_reason == "budget"
    assert rep.restarts == 2


def test_bigint_group_uses_baseline():
    basis = GeneratorBasis(BigIntGroup(), (2**70, -(2**69), 1))
    A = np.array([[1, 0, 0], [0, 2, 0], [0, 0, 5], [1, 2, 0]])
    rep = SortReport()
    perm = sort_nsums(A, basis, params=SortParams(small_threshold=0), report=rep)
    assert perm == [1, 3, 2, 0] or perm == stable_baseline(A, basis)
    assert perm == stable_baseline(A, basis)
    assert rep.backend_used == "baseline"


def test_nsum_inputs_and_validation():
    basis = GeneratorBasis(IntGroup(), (4, 1))
    sums = [NSum((1, 0), 2), NSum((0, 1), 2), NSum((0, 2), 2)]
    assert sort_nsums(sums, basis) == [1, 2, 0]
    with pytest.raises(InvalidArgument):
        sort_nsums(sums, basis, backend="quick")
    with pytest.raises(InvalidArgument):
        sort_nsums(np.zeros((2, 3), np.int64), basis)
    assert sort_nsums([], basis) == []


def test_seed_determinism(rng):
    A, basis = random_instance(rng, 6000)
    r1, r2 = SortReport(), SortReport()
    p1 = sort_nsums(A, basis, "rounding", seed=5, report=r1)
    p2 = sort_nsums(A, basis, "rounding", seed=5, report=r2)
    assert p1 == p2 and r1.comparisons == r2.comparisons


def test_verify_and_retry(rng):
    A, basis = random_instance(rng, 300)
    good = stable_baseline(A, basis)
    assert verify_and_retry(A, basis, good) == good
    rep = SortReport()
    assert verify_and_retry(A, basis, list(reversed(good)), report=rep) == good
    assert rep.restarts >= 1


def test_dedup_vectors():
    A = np.array([[1, 2], [0, 0], [1, 2], [3, 1], [0, 0], [1, 2]])
    d = dedup_vectors(A)
    assert d.unique.tolist() == [[1, 2], [0, 0], [3, 1]]
    assert d.first.tolist() == [0, 1, 3]
    assert d.inverse.tolist() == [0, 1, 0, 2, 1, 0]
    assert d.multiplicity() == {(1, 2): 3, (0, 0): 2, (3, 1): 1}


def test_merge_sort_steps_yields_units():
    from rankenum.group_core import CountingGroup

    vals = [5, 3, 3, 9, 1, 3]
    cg = CountingGroup(IntGroup())
    gen = merge_sort_steps(list(range(6)), vals, cg, chunk=2)
    units = 0
    while True:
        try:
            units += next(gen)
        except StopIteration as stop:
            perm = stop.value
            break
    assert perm == [4, 1, 2, 5, 0, 3]
    assert units == cg.comparisons


def test_sorter_steps_non_baseline(rng):
    A, basis = random_instance(rng, 5000)
    s = NSumSorter(backend="rounding")
    gen = s.steps(A, basis)
    chunks = []
    while True:
        try:
            chunks.append(next(gen))
        except StopIteration as stop:
            perm = stop.value
            break
    assert len(chunks) == 1
    assert perm == stable_baseline(A, basis)


# -- rounding --------------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-10**6, 10**6), st.integers(1, 10**6)), min_size=2, max_size=30))
def test_floor_keys_preserve_order(pairs):
    keys = floor_keys(pairs)
    fr = [Fraction(p, q) for p, q in pairs]
    for i in range(len(pairs)):
        for j in range(len(pairs)):
            if fr[i] < fr[j]:
                assert keys[i] < keys[j]
            elif fr[i] == fr[j]:
                assert keys[i] == keys[j]


def test_floor_keys_accept_fractions_and_reject_bad_denominators():
    a, b = floor_keys([Fraction(1, 3), (2, 6)])
    assert a == b
    with pytest.raises(ValueError):
        floor_keys([(1, 0)])


def test_argsort_int_keys_wide_and_stable():
    keys = [2**100, -(2**90), 5, 5, 2**100 - 1, -(2**90)]
    assert argsort_int_keys(keys).tolist() == [1, 5, 2, 3, 4, 0]
    assert argsort_int_keys(keys, np.array([0, 1, 1, 1, 1, 1])).tolist() == [0, 1, 5, 2, 3, 4]
    assert argsort_int_keys(keys, np.array([1, 0, 0, 0, 0, 0])).tolist() == [1, 5, 2, 3, 4, 0]
    vals = [Fraction(3, 7), Fraction(-1, 2), Fraction(3, 7), Fraction(0)]
    assert round_and_radix_sort(vals).tolist() == [1, 3, 0, 2]


# -- linear feasibility -------------------------------------------------------------


def random_system(rng, t, m, feasible=True):
    x = rng.integers(-20, 21, size=t)
    S = InequalitySystem(t)
    rows = rng.integers(-9, 10, size=(m, t))
    for h in rows:
        v = int(h @ x)
        if v < 0:
            S.add_le(h)
        elif v > 0:
            S.add_ge(h)
        else:
            S.add_eq(h)
    if not feasible:
        h = rows[0]
        S.add_le(h)
        S.add_ge(h)
    return S


@pytest.mark.parametrize("method", ["auto", "exact", "fm"])
def test_feasible_systems_are_solved_exactly(rng, method):
    # elimination blows up quickly; keep its instances small
    t_hi, m_hi = (4, 12) if method == "fm" else (5, 30)
    for _ in range(25):
        t = int(rng.integers(1, t_hi))
        S = random_system(rng, t, int(rng.integers(1, m_hi)))
        x = solve_feasibility(S, method=method)
        assert all(isinstance(v, Fraction) for v in x)
        assert check_point(S, x)


@pytest.mark.parametrize("method", ["auto", "exact", "fm"])
def test_infeasible_systems_raise(rng, method):
    for _ in range(10):
        S = random_system(rng, 3, 12, feasible=False)
        with pytest.raises(Infeasible):
            solve_feasibility(S, method=method)


def test_equalities_forcing_zero():
    S = InequalitySystem(2)
    S.add_eq([1, 0])
    S.add_eq([0, 1])
    S.add_le([1, 1])
    with pytest.raises(Infeasible):
        solve_feasibility(S)
    S2 = InequalitySystem(2)
    S2.add_eq([1, -1])
    assert solve_feasibility(S2) == (Fraction(0), Fraction(0))


def test_integer_nullspace():
    eq = np.array([[1, -1, 0], [2, -2, 0]])
    N = integer_nullspace(eq, 3)
    assert N.shape == (3, 2)
    assert not np.any(eq @ N)


def test_fm_matches_on_tight_system():
    S = InequalitySystem(2)
    S.add_le([-1, 0])      # x >= 1
    S.add_le([1, -1])      # y >= x + 1
    S.add_le([0, 1])       # y <= -1 ... infeasible together
    with pytest.raises(Infeasible):
        fourier_motzkin(S)

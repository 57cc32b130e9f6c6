"""Sorting sums of few generators: baseline, radix and the rounding sorter."""

from .lp import InequalitySystem, fourier_motzkin, solve_feasibility
from .rounding import argsort_int_keys, floor_keys, round_and_radix_sort
from .sorter import (
    BACKENDS,
    Dedup,
    NSumSorter,
    SortParams,
    SortReport,
    dedup_vectors,
    merge_sort_steps,
    sort_nsums,
    sort_radix_smallints,
    verify_and_retry,
)

__all__ = [
    "BACKENDS",
    "Dedup",
    "InequalitySystem",
    "NSumSorter",
    "SortParams",
    "SortReport",
    "argsort_int_keys",
    "dedup_vectors",
    "floor_keys",
    "fourier_motzkin",
    "merge_sort_steps",
    "round_and_radix_sort",
    "solve_feasibility",
    "sort_nsums",
    "sort_radix_smallints",
    "verify_and_retry",
]

"""Ranked enumeration of the outputs of unambiguous weighted transducers.

Weights live in an ordered abelian group (machine integers or integer
vectors under lexicographic order). Outputs come out by non-decreasing
weight through an implicit heap of s-to-t paths in the product DAG.
"""

from ._accel import backend_name
from .enumerate import EnumStats, Ranked, enumerate_transducer, preprocess, ranked_outputs
from .group_core import BigIntGroup, GeneratorBasis, IntGroup, LexGroup, NSum, group_from_spec
from .nsum_sort import SortParams, SortReport, sort_nsums
from .transducer import (
    CostTransducer,
    Transition,
    brute_force_outputs,
    check_unambiguous,
    load_document,
    load_transducer,
    make_transducer,
)

__version__ = "0.1.0"

__all__ = [
    "BigIntGroup",
    "CostTransducer",
    "EnumStats",
    "GeneratorBasis",
    "IntGroup",
    "LexGroup",
    "NSum",
    "Ranked",
    "SortParams",
    "SortReport",
    "Transition",
    "backend_name",
    "brute_force_outputs",
    "check_unambiguous",
    "enumerate_transducer",
    "group_from_spec",
    "load_document",
    "load_transducer",
    "make_transducer",
    "preprocess",
    "ranked_outputs",
    "sort_nsums",
    "__version__",
]

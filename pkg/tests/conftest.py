import numpy as np
import pytest

from rankenum.enumerate import preprocess


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def outputs_of(T, doc, **kw):
    from rankenum.enumerate import enumerate_transducer

    return [(r.weight, r.entries) for r in enumerate_transducer(T, doc, **kw)]


def expected_sorted(T, doc):
    from rankenum.transducer import brute_force_outputs

    return sorted((o.weight, o.entries) for o in brute_force_outputs(T, doc))


def prepared(T, doc):
    return preprocess(T, doc)

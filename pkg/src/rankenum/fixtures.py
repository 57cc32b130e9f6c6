"""Small hand-built transducers used by tests, examples and the CLI demos."""

from __future__ import annotations

import numpy as np

from .group_core import Group, IntGroup, LexGroup
from .transducer import EMPTY_MARKER, CostTransducer, Transition, check_unambiguous

OPEN_X, CLOSE_X, OPEN_Y, CLOSE_Y = "⊢x", "⊣x", "⊢y", "⊣y"
_BRACKETS = (OPEN_X, CLOSE_X, OPEN_Y, CLOSE_Y)
# letters allowed in each phase of  (c+b)* ⊢x (a+b)* ⊣x a* ⊢y a* ⊣y c*
_PHASE_LETTERS = ("cb", "ab", "a", "a", "c")


def regex_spanner(span_weight: int = 0) -> CostTransducer:
    """Two-variable spanner for ``(c+b)* ⊢x (a+b)* ⊣x a* ⊢y a* ⊣y c*``.

    State ``k`` means ``k`` brackets have been emitted. Brackets are attached
    to the letter that follows them, so all brackets between two letters form
    one combined marker such as ``"⊣x⊢y"``. Letters read inside a span cost
    ``span_weight``.
    """
    trs = []
    markers = {EMPTY_MARKER}
    for p in range(5):
        for q in range(p, 5):
            marker = "".join(_BRACKETS[p:q]) or EMPTY_MARKER
            markers.add(marker)
            for a in _PHASE_LETTERS[q]:
                w = span_weight if q in (1, 3) else 0
                trs.append(Transition(p, a, w, marker, q))
    return CostTransducer(IntGroup(), "abc", sorted(markers), EMPTY_MARKER, range(5), 0, [4], trs)


def encode_spans(x: tuple, y: tuple) -> tuple:
    """Marker tuple for the span pair ``(x, y)`` under the bracket encoding."""
    at: dict[int, str] = {}
    for pos, br in ((x[0], OPEN_X), (x[1] + 1, CLOSE_X), (y[0], OPEN_Y), (y[1] + 1, CLOSE_Y)):
        at[pos] = at.get(pos, "") + br
    return tuple(sorted(at.items(), key=lambda kv: kv[0]))


def encode_span_tuple(x: tuple, y: tuple) -> tuple:
    return tuple((m, p) for p, m in encode_spans(x, y))


def decode_span_tuple(entries) -> dict:
    """Inverse of :func:`encode_span_tuple`: ``{"x": (i, j), "y": (i, j)}``."""
    opened, spans = {}, {}
    for marker, pos in entries:
        for k in range(0, len(marker), 2):
            br = marker[k:k + 2]
            var = br[1]
            if br[0] == "⊢":
                opened[var] = pos
            else:
                spans[var] = (opened.pop(var), pos - 1)
    return spans


def annotation_transducer(weight: int = 1) -> CostTransducer:
    """One state; every letter may be marked γ, δ or left empty.

    Non-empty marks cost ``weight`` each, so outputs with fewer marks rank first.
    """
    trs = []
    for a in "abc":
        trs.append(Transition(0, a, 0, EMPTY_MARKER, 0))
        trs.append(Transition(0, a, weight, "γ", 0))
        trs.append(Transition(0, a, weight, "δ", 0))
    return CostTransducer(IntGroup(), "abc", [EMPTY_MARKER, "γ", "δ"], EMPTY_MARKER, [0], 0, [0], trs)


def email_transducer(mistake_weight: int = 1) -> CostTransducer:
    """Marks ``w+ @ w+ . w+`` factors (``w`` in {a, b}) with open/at/close markers.

    Reading a letter where the ``@`` should be is allowed at cost
    ``mistake_weight`` and marked ``at~``, which keeps the transducer
    unambiguous: the output pins down where the substitution happened.
    """
    W = "ab"
    trs = []
    for x in "ab@.":
        trs.append(Transition(0, x, 0, EMPTY_MARKER, 0))
        trs.append(Transition(4, x, 0, EMPTY_MARKER, 4))
    for w in W:
        trs.append(Transition(0, w, 0, "open", 1))
        trs.append(Transition(1, w, 0, EMPTY_MARKER, 1))
        trs.append(Transition(1, w, mistake_weight, "at~", 2))
        trs.append(Transition(2, w, 0, EMPTY_MARKER, 2))
        trs.append(Transition(3, w, 0, EMPTY_MARKER, 3))
        trs.append(Transition(3, w, 0, "close", 4))
    trs.append(Transition(1, "@", 0, "at", 2))
    trs.append(Transition(2, ".", 0, EMPTY_MARKER, 3))
    return CostTransducer(IntGroup(), "ab@.", [EMPTY_MARKER, "open", "at", "at~", "close"], EMPTY_MARKER,
                          range(5), 0, [4], trs)


def parallel_empty_transducer() -> CostTransducer:
    """Two parallel ε-marked transitions on ``a``: ambiguous on document ``"a"``."""
    trs = [Transition(0, "a", 1, EMPTY_MARKER, 1), Transition(0, "a", 2, EMPTY_MARKER, 1)]
    return CostTransducer(IntGroup(), "a", [EMPTY_MARKER], EMPTY_MARKER, [0, 1], 0, [1], trs)


def chain_transducer(num_states: int = 4, alphabet: str = "ab", weights=(0, 1, 2, 3)) -> CostTransducer:
    """A fixed span-like transducer for benchmarks: ``skip* open body* close skip*``.

    With ``num_states=4`` the states are: before, inside, after-close, and an
    optional gap state that lets a second, costlier close happen.
    """
    trs = []
    w0, w1, w2, w3 = weights
    for a in alphabet:
        trs.append(Transition(0, a, w0, EMPTY_MARKER, 0))
        trs.append(Transition(0, a, w1, "open", 1))
        trs.append(Transition(1, a, w0, EMPTY_MARKER, 1))
        trs.append(Transition(1, a, w2, "close", 2))
        trs.append(Transition(2, a, w0, EMPTY_MARKER, 2))
        if num_states >= 4:
            trs.append(Transition(1, a, w3, "close2", 3))
            trs.append(Transition(3, a, w0, EMPTY_MARKER, 3))
    states = list(range(max(3, min(num_states, 4))))
    finals = [2, 3] if num_states >= 4 else [2]
    return CostTransducer(IntGroup(), alphabet, [EMPTY_MARKER, "open", "close", "close2"], EMPTY_MARKER,
                          states, 0, finals, trs)


def random_transducer(rng: np.random.Generator, max_states: int = 5, alphabet: str = "abc",
                      weight_range: int = 3, group: Group | None = None, density: float = 0.5,
                      num_markers: int = 2, extra: int = 0, check_len: int = 10) -> CostTransducer:
    """A random unambiguous transducer.

    The base automaton is deterministic over (symbol, marker) pairs, which is
    unambiguous by construction. ``extra`` additional random transitions are
    then kept only if :func:`check_unambiguous` still passes up to ``check_len``.
    """
    group = group or IntGroup()
    nq = int(rng.integers(1, max_states + 1))
    sigma = alphabet[: int(rng.integers(1, len(alphabet) + 1))]
    markers = [EMPTY_MARKER] + [f"m{k}" for k in range(1, num_markers + 1)]

    def weight():
        if isinstance(group, LexGroup):
            return tuple(int(v) for v in rng.integers(-weight_range, weight_range + 1, size=group.length))
        return int(rng.integers(-weight_range, weight_range + 1))

    trs = []
    for q in range(nq):
        for a in sigma:
            for m in markers:
                if rng.random() < density / len(markers) * 2:
                    trs.append(Transition(q, a, weight(), m, int(rng.integers(nq))))
    finals = [q for q in range(nq) if rng.random() < 0.5] or [int(rng.integers(nq))]
    T = CostTransducer(group, sigma, markers, EMPTY_MARKER, range(nq), 0, finals, trs)
    for _ in range(extra):
        t = Transition(int(rng.integers(nq)), sigma[int(rng.integers(len(sigma)))], weight(),
                       markers[int(rng.integers(len(markers)))], int(rng.integers(nq)))
        cand = CostTransducer(group, sigma, markers, EMPTY_MARKER, range(nq), 0, finals, T.transitions + (t,))
        if check_unambiguous(cand, check_len) is True:
            T = cand
    return T


def random_document(rng: np.random.Generator, T: CostTransducer, max_len: int = 10, min_len: int = 1) -> str:
    n = int(rng.integers(min_len, max_len + 1))
    sigma = T.alphabet
    return "".join(sigma[int(k)] for k in rng.integers(len(sigma), size=n))

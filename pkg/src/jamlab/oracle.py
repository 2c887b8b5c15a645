"""Exact expected durations by enumerating every arrival order.

Arrival times are i.i.d., so all N! orders are equally likely and the time
of the J-th arrival has mean H_N - H_{N-J}.  The pmf of the trailing-blocked
count r = N - J therefore determines the mean duration exactly.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .errors import CapacityError
from .lattice import Model
from .sim import replay
from .theory import harmonic

DEFAULT_LIMIT = 9


def exact_trailing_pmf(model: Model, limit: int = DEFAULT_LIMIT) -> dict[int, Fraction]:
    N = model.N
    if N > limit:
        raise CapacityError(f"exact oracle enumerates N! orders and is limited to N <= {limit}; model has N = {N}", limit)
    if N == 0:
        return {}
    g = model.graph
    indptr, indices = g.indptr, g.indices
    counts: dict[int, int] = {}
    buf = np.empty(N, dtype=np.int64)
    for perm in itertools.permutations(range(N)):
        buf[:] = perm
        _, _, last = replay(buf, N, indptr, indices, N)
        r = N - 1 - last
        counts[r] = counts.get(r, 0) + 1
    total = math.factorial(N)
    return {r: Fraction(c, total) for r, c in sorted(counts.items())}


def expected_from_pmf(pmf: dict[int, Fraction], N: int) -> Fraction:
    hn = harmonic(N)
    return sum((w * (hn - harmonic(r)) for r, w in pmf.items()), Fraction(0))


def exact_expected_duration(model: Model, limit: int = DEFAULT_LIMIT) -> Fraction:
    pmf = exact_trailing_pmf(model, limit)
    return expected_from_pmf(pmf, model.N)

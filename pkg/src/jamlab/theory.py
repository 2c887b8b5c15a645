"""Closed-form predictors for mean RSA durations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

EXACT_HARMONIC_CAP = 10_000


@dataclass(frozen=True)
class KnownConstants:
    p_dimer_1d: float = math.exp(-2.0)
    p_annihilation_1d: float = math.exp(-1.0)
    variance_bound: float = math.pi ** 2 / 6


CONSTANTS = KnownConstants()

NAMED_P = {
    "dimer-1d": CONSTANTS.p_dimer_1d,
    "monomer-excl-1d": CONSTANTS.p_dimer_1d,
    "anni-pair": CONSTANTS.p_annihilation_1d,
    "annihilation-1d": CONSTANTS.p_annihilation_1d,
    "monomer": 1.0,
}


_HARMONIC = [Fraction(0)]


def _harmonic_prefix(m: int) -> Fraction:
    while len(_HARMONIC) <= m:
        _HARMONIC.append(_HARMONIC[-1] + Fraction(1, len(_HARMONIC)))
    return _HARMONIC[m]


def harmonic(m: int) -> Fraction:
    """Exact H_m = 1 + 1/2 + ... + 1/m, with H_0 = 0."""
    if m < 0:
        raise DomainError(f"harmonic number needs m >= 0, got {m}")
    if m > EXACT_HARMONIC_CAP:
        raise DomainError(f"exact harmonic numbers are capped at m = {EXACT_HARMONIC_CAP}; use harmonic_float")
    return _harmonic_prefix(m)


def harmonic_float(m: int) -> float:
    if m < 0:
        raise DomainError(f"harmonic number needs m >= 0, got {m}")
    return math.fsum(1.0 / i for i in range(1, m + 1))


def _check_p(p: float) -> None:
    if not p > 0:
        raise DomainError(f"p must be > 0 (the asymptotic formula assumes a positive blocking limit), got {p}")
    if p > 1:
        raise DomainError(f"p is a probability, got {p}")


def asymptotic_prediction(N: int, p: float) -> float:
    """H_N + ln p, the large-N mean termination time.

    ``N`` is the number of config instances actually present, so free
    boundaries (fewer than k*n instances) are handled by the caller.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    _check_p(p)
    return harmonic_float(N) + math.log(p)


def independent_model_mean(N: int, p: float) -> float:
    """Mean of the last arrival time when each arrival succeeds independently with probability p.

    Sums p(1-p)^r (H_N - H_r) over r = 0..N-1.  The weights total
    1 - (1-p)^N, so the all-blocked event contributes nothing.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    _check_p(p)
    if p == 1.0:
        return harmonic_float(N)
    r = np.arange(N)
    h = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, N + 1))))
    tail = h[N] - h[r]
    weights = p * np.exp(r * math.log1p(-p))
    return float(math.fsum(weights * tail))

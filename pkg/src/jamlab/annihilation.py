"""The one-dimensional annihilating particle process.

All n sites of a line start occupied.  Each adjacent pair carries a rate-1
clock; when it rings on a doubly occupied pair, one of the two particles,
chosen by a fair coin, is removed.  T_n is the time at which no two
occupied sites are adjacent, and F_n(t) = P(T_n < t).

Conditioning on the first removal (rate n - 1) gives

    F_n(t) = int_0^t sum_{r=1}^{n-1} F_r(t-s) F_{n-1-r}(t-s) e^{-(n-1)s} ds,

and every F_n is an exponential polynomial.  The same functions are the
coefficients of the closed-form generating function

    sum_n F_n(t) y^n = y / (1 - y + y * exp(-t + y(e^{-t} - 1))).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from . import theory
from .errors import CapacityError
from .expoly import ExpPoly, integrate_conv, moment_integral, tail_integral
from .lattice import FREE, TORUS, ConfigType, Model, Region
from .rng import RngSpec, exponentials
from .sim import map_replications
from .stats import StatSummary
from .theory import harmonic

EXACT_N_CAP = 64

ONE = ExpPoly.const(1)


def _check_cap(n: int) -> None:
    if n > EXACT_N_CAP:
        raise CapacityError(f"exact annihilation results are limited to n <= {EXACT_N_CAP}, got n = {n}", EXACT_N_CAP)


def f_table(max_n: int) -> list[ExpPoly]:
    """[F_0, F_1, ..., F_max_n] from the first-removal recursion."""
    if max_n < 0:
        raise ValueError(f"n must be >= 0, got {max_n}")
    _check_cap(max_n)
    table = [ONE, ONE]
    for n in range(2, max_n + 1):
        s = ExpPoly()
        for r in range(1, n):
            s = s + table[r] * table[n - 1 - r]
        table.append(integrate_conv(s, n - 1))
    return table[: max_n + 1]


def f_recursive(n: int) -> ExpPoly:
    return f_table(n)[n]


@dataclass(frozen=True)
class SeriesGF:
    """Truncated power series in y with exponential-polynomial coefficients."""

    order: int
    coefficients: tuple[ExpPoly, ...]

    def __getitem__(self, n: int) -> ExpPoly:
        return self.coefficients[n]


def f_from_gf(max_n: int) -> SeriesGF:
    """Coefficients y^0..y^max_n of y / (1 - y(1 - g)) with g = e^{-t} exp(y(e^{-t} - 1))."""
    if max_n < 0:
        raise ValueError(f"max_n must be >= 0, got {max_n}")
    _check_cap(max_n)
    e1 = ExpPoly.exp(1)
    # g_j = e^{-t} (e^{-t} - 1)^j / j!
    g = []
    power = ONE
    fact = 1
    for j in range(max_n):
        if j:
            power = power * (e1 - 1)
            fact *= j
        g.append(e1 * power * Fraction(1, fact))
    # h(y) = 1 - y + y*g(y): h_0 = 1, h_1 = g_0 - 1, h_{j+1} = g_j
    h = [ONE]
    if max_n >= 1:
        h.append(g[0] - 1)
    h.extend(g[1:max_n])
    # reciprocal of h, needed through y^{max_n - 1}
    inv = [ONE]
    for m in range(1, max_n):
        s = ExpPoly()
        for i in range(1, min(m, len(h) - 1) + 1):
            s = s + h[i] * inv[m - i]
        inv.append(-s)
    coeffs = [ExpPoly()] + inv[:max_n]
    return SeriesGF(max_n, tuple(coeffs))


def mean_stop_time(n: int) -> Fraction:
    """E[T_n] = integral_0^inf (1 - F_n(t)) dt, exactly."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return tail_integral(f_recursive(n))


@dataclass(frozen=True)
class IdentityCheck:
    n: int
    mean: Fraction
    shifted: Fraction
    harmonic: Fraction

    @property
    def lhs(self) -> Fraction:
        return self.mean + self.shifted

    @property
    def ok(self) -> bool:
        return self.lhs == self.harmonic


def check_harmonic_identity(n: int, table: list[ExpPoly] | None = None) -> IdentityCheck:
    """int (1 - F_n) dt + int e^{-t} (1 - F_{n-1}) dt  against  H_{n-1}."""
    if n < 2:
        raise ValueError(f"the identity needs n >= 2, got {n}")
    table = table if table is not None and len(table) > n else f_table(n)
    mean = tail_integral(table[n])
    shifted = moment_integral(ExpPoly.exp(1) * (ONE - table[n - 1]))
    return IdentityCheck(n, mean, shifted, harmonic(n - 1))


# -- Monte Carlo ------------------------------------------------------------

@njit(cache=True, nogil=True)
def _annihilate(n, waits, picks, coins):
    occ = np.ones(n, np.bool_)
    if n < 2:
        return 0.0, occ
    # active[0:m] lists doubly occupied pairs i = (i, i+1); pos[i] is its slot or -1
    active = np.arange(n - 1)
    pos = np.arange(n - 1)
    m = n - 1
    t = 0.0
    step = 0
    while m > 0:
        t += waits[step] / m
        slot = min(int(picks[step] * m), m - 1)
        pair = active[slot]
        site = pair + 1 if coins[step] else pair
        step += 1
        occ[site] = False
        for p in (site - 1, site):
            if 0 <= p < n - 1 and pos[p] >= 0:
                k = pos[p]
                last = active[m - 1]
                active[k] = last
                pos[last] = k
                pos[p] = -1
                m -= 1
    return t, occ


def simulate_annihilation(n: int, rng: RngSpec) -> tuple[float, np.ndarray]:
    """One realisation: (stopping time T_n, final occupancy)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    # every effective event removes a particle, so at most n - 1 events
    steps = max(n - 1, 0)
    gen = rng.generator()
    waits = exponentials(gen, steps)
    picks = gen.random(steps)
    coins = gen.random(steps) < 0.5
    t, occ = _annihilate(n, waits, picks, coins)
    return float(t), occ


def sample_stop_times(n: int, reps: int, seed: int, workers: int | None = None) -> np.ndarray:
    return map_replications(lambda i: simulate_annihilation(n, RngSpec(seed, i))[0], reps, workers)


def estimate_stop_time(n: int, reps: int, seed: int, workers: int | None = None) -> StatSummary:
    if reps < 2:
        raise ValueError(f"reps must be >= 2, got {reps}")
    return StatSummary.from_samples(sample_stop_times(n, reps, seed, workers))


def empirical_cdf(samples: np.ndarray, ts) -> np.ndarray:
    """Fraction of samples strictly below each t."""
    s = np.sort(np.asarray(samples))
    return np.searchsorted(s, np.asarray(ts, dtype=float), side="left") / s.size


# -- RSA formulation ----------------------------------------------------------

HOLE_LEFT = ConfigType.make("hole-left", [(0,), (1,)], [(0,)])
HOLE_RIGHT = ConfigType.make("hole-right", [(0,), (1,)], [(1,)])


def build_rsa_model(n: int, boundary: str = TORUS) -> Model:
    """Annihilation recast as RSA of holes: each adjacent particle pair may gain a hole at either end."""
    if boundary == TORUS:
        region = Region.torus((n,))
    elif boundary == FREE:
        region = Region.box((n,))
    else:
        raise ValueError(f"boundary must be 'torus' or 'free', got {boundary!r}")
    return Model(region, (HOLE_LEFT, HOLE_RIGHT), name="anni-pair")


def rsa_mean_prediction(n: int) -> float:
    """Asymptotic mean duration of ``build_rsa_model(n)`` on a torus.

    Each pair is one arrival slot with p = e^-1, but the two hole configs
    give it total rate 2, so the line-process asymptote H_n + ln p is halved.
    """
    return 0.5 * theory.asymptotic_prediction(n, theory.CONSTANTS.p_annihilation_1d)

"""Event-driven Monte Carlo for random sequential adsorption.

Every config instance gets one unit-rate exponential arrival time.  Arrivals
are processed in time order; an arrival succeeds unless an earlier successful
instance blocks it.  The run terminates at the last successful arrival.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from . import theory
from .lattice import TORUS, Model
from .rng import RngSpec, exponentials
from .stats import StatSummary

DEFAULT_HORIZON = 30.0


# -- kernels ----------------------------------------------------------------

@njit(cache=True, nogil=True)
def replay(order, count, indptr, indices, n_inst):
    """Process the first ``count`` arrivals of ``order``.

    Returns (success mask, blocked-by-a-success mask, position of the last
    success or -1).
    """
    blocked = np.zeros(n_inst, np.bool_)
    success = np.zeros(n_inst, np.bool_)
    last = -1
    for pos in range(count):
        c = order[pos]
        if blocked[c]:
            continue
        success[c] = True
        last = pos
        for e in range(indptr[c], indptr[c + 1]):
            blocked[indices[e]] = True
    return success, blocked, last


@njit(cache=True, nogil=True)
def _duration(times, indptr, indices):
    order = np.argsort(times, kind="mergesort")
    _, _, last = replay(order, order.size, indptr, indices, times.size)
    return times[order[last]]


@njit(cache=True, nogil=True)
def _ghost_unblocked(times, horizon, ghost, indptr, indices):
    order = np.argsort(times, kind="mergesort")
    count = np.searchsorted(times[order], horizon, side="left")
    _, blocked, _ = replay(order, count, indptr, indices, times.size)
    return not blocked[ghost]


# -- results ----------------------------------------------------------------

@dataclass
class RunResult:
    duration: float
    success_count: int
    blocked_count: int
    trailing_blocked: int
    jammed: np.ndarray
    per_type_successes: list[int]
    arrival_times: np.ndarray = field(repr=False)
    success: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.success_count + self.blocked_count


@dataclass(frozen=True)
class SweepRow:
    model_name: str
    n: int
    k: int
    N: int
    reps: int
    seed: int
    mean: float
    stderr: float
    variance: float
    prediction: float | None

    @property
    def delta(self) -> float | None:
        return None if self.prediction is None else self.mean - self.prediction


# -- parallel replication driver -------------------------------------------

def default_workers() -> int:
    env = os.environ.get("JAMLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def map_replications(fn: Callable[[int], float], reps: int, workers: int | None = None) -> np.ndarray:
    """``[fn(0), ..., fn(reps - 1)]`` as a float array, computed in chunks.

    Results are placed by replication index, so the output does not depend on
    the number of workers.
    """
    workers = default_workers() if workers is None else max(1, workers)
    out = np.empty(reps, dtype=np.float64)

    def run_chunk(bounds):
        lo, hi = bounds
        for i in range(lo, hi):
            out[i] = fn(i)

    if workers == 1 or reps < 2 * workers:
        run_chunk((0, reps))
        return out
    edges = np.linspace(0, reps, workers * 4 + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run_chunk, chunks))
    return out


# -- operations -------------------------------------------------------------

def run_rsa(model: Model, rng: RngSpec) -> RunResult:
    N, n = model.N, model.n
    if N == 0:
        return RunResult(
            0.0, 0, 0, 0, np.zeros(n, dtype=bool), [0] * model.k,
            np.zeros(0), np.zeros(0, dtype=bool),
        )
    g = model.graph
    times = exponentials(rng.generator(), N)
    order = np.argsort(times, kind="stable")
    success, _, last = replay(order, N, g.indptr, g.indices, N)
    succ_count = int(success.sum())
    jammed = np.zeros(n, dtype=bool)
    occ_ptr, occ_idx = model.occupancy_csr
    for i in np.flatnonzero(success):
        jammed[occ_idx[occ_ptr[i]:occ_ptr[i + 1]]] = True
    per_type = np.bincount(model.type_indices[success], minlength=model.k).tolist()
    return RunResult(
        duration=float(times[order[last]]),
        success_count=succ_count,
        blocked_count=N - succ_count,
        trailing_blocked=N - 1 - last,
        jammed=jammed,
        per_type_successes=per_type,
        arrival_times=times,
        success=success,
    )


def sample_durations(model: Model, reps: int, seed: int, workers: int | None = None) -> np.ndarray:
    N = model.N
    if N == 0:
        return np.zeros(reps)
    g = model.graph
    indptr, indices = g.indptr, g.indices

    def one(i):
        times = exponentials(RngSpec(seed, i).generator(), N)
        return _duration(times, indptr, indices)

    return map_replications(one, reps, workers)


def estimate_mean_duration(model: Model, reps: int, seed: int, workers: int | None = None) -> StatSummary:
    if reps < 2:
        raise ValueError(f"reps must be >= 2 for a variance estimate, got {reps}")
    return StatSummary.from_samples(sample_durations(model, reps, seed, workers))


def ghost_index(model: Model, tagged_type: int) -> int:
    if not 0 <= tagged_type < model.k:
        raise ValueError(f"tagged_type must be in 0..{model.k - 1}, got {tagged_type}")
    idx = model.instance_at(tagged_type, 0)
    if idx is None:
        raise ValueError(f"no instance of type {tagged_type} at the origin site")
    return idx


def sibling_indices(model: Model, ghost: int) -> list[int]:
    """Other-type instances at the ghost's anchor with the same footprint.

    These share the ghost's arrival slot (e.g. the two outcomes of one
    annihilation pair), so a ghost that has not arrived withholds them too.
    """
    c = model.instances[ghost]
    return [
        i for i, o in enumerate(model.instances)
        if i != ghost and o.anchor == c.anchor and o.footprint == c.footprint
    ]


def sample_unblocked(
    model: Model,
    tagged_type: int,
    t_horizon: float,
    reps: int,
    seed: int,
    workers: int | None = None,
    withhold_siblings: bool = True,
) -> np.ndarray:
    if model.region.boundary != TORUS:
        raise ValueError("estimate_p needs a torus region; a free boundary makes it anchor-dependent")
    if not t_horizon > 0:
        raise ValueError(f"t_horizon must be > 0, got {t_horizon}")
    ghost = ghost_index(model, tagged_type)
    withheld = np.array([ghost] + (sibling_indices(model, ghost) if withhold_siblings else []), dtype=np.int64)
    N = model.N
    g = model.graph
    indptr, indices = g.indptr, g.indices
    horizon = float(t_horizon)

    def one(i):
        times = exponentials(RngSpec(seed, i).generator(), N)
        times[withheld] = np.inf
        return float(_ghost_unblocked(times, horizon, ghost, indptr, indices))

    return map_replications(one, reps, workers)


def estimate_p(
    model: Model,
    tagged_type: int = 0,
    t_horizon: float = DEFAULT_HORIZON,
    reps: int = 10_000,
    seed: int = 0,
    workers: int | None = None,
    withhold_siblings: bool = True,
) -> StatSummary:
    """Estimate p_i(t_horizon): the chance a never-arriving tagged config is still unblocked.

    The tagged config sits at site 0 of a torus and is removed from the
    arrival pool.  With ``withhold_siblings`` (the default) co-located
    configs sharing its footprint are removed as well; models without such
    siblings are unaffected.  Without it, a sibling that always arrives can
    force the estimate to zero.
    """
    if reps < 2:
        raise ValueError(f"reps must be >= 2, got {reps}")
    return StatSummary.from_samples(
        sample_unblocked(model, tagged_type, t_horizon, reps, seed, workers, withhold_siblings)
    )


def sweep(
    family: Callable[[int], Model],
    sizes: Sequence[int],
    reps: int,
    seed: int,
    p: float | None = None,
    p_reps: int = 10_000,
    workers: int | None = None,
) -> list[SweepRow]:
    """Mean duration against the asymptotic prediction over a range of sizes.

    With ``p=None`` the blocking probability is estimated once, on the
    largest member of the family (which must be a torus).
    """
    if not sizes:
        raise ValueError("sizes must be nonempty")
    if p is None:
        p = estimate_p(family(max(sizes)), 0, DEFAULT_HORIZON, p_reps, seed, workers).mean
    rows = []
    for n in sizes:
        model = family(n)
        s = estimate_mean_duration(model, reps, seed, workers)
        pred = theory.asymptotic_prediction(model.N, p) if model.N > 0 and p > 0 else None
        rows.append(SweepRow(model.name, model.n, model.k, model.N, reps, seed, s.mean, s.stderr, s.variance, pred))
    return rows

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StatSummary:
    """Replication count, mean, unbiased variance and range of a scalar sample."""

    count: int
    mean: float
    variance: float
    min: float
    max: float

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return math.nan
        return math.sqrt(self.variance / self.count)

    @property
    def m2(self) -> float:
        return self.variance * (self.count - 1) if self.count > 1 else 0.0

    @classmethod
    def from_samples(cls, samples) -> StatSummary:
        x = np.asarray(samples, dtype=np.float64)
        if x.size == 0:
            raise ValueError("cannot summarise an empty sample")
        var = float(x.var(ddof=1)) if x.size > 1 else 0.0
        return cls(int(x.size), float(x.mean()), var, float(x.min()), float(x.max()))

    def merge(self, other: StatSummary) -> StatSummary:
        # pairwise update of Chan, Golub and LeVeque
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        var = m2 / (n - 1) if n > 1 else 0.0
        return StatSummary(n, mean, var, min(self.min, other.min), max(self.max, other.max))

    def as_dict(self) -> dict:
        return {
            "reps": self.count,
            "mean": self.mean,
            "stderr": self.stderr,
            "variance": self.variance,
            "min": self.min,
            "max": self.max,
        }

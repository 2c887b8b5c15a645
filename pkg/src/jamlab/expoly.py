"""Exact exponential polynomials  f(t) = sum c[a, b] * t**b * exp(-a*t).

Coefficients are Fractions and rates/powers nonnegative integers, so sums,
products, the convolution integral and improper integrals all stay exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import DomainError

Scalar = Union[int, Fraction]


class ExpPoly:
    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Scalar] | Iterable[tuple[tuple[int, int], Scalar]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, int], Fraction] = {}
        for (a, b), c in items:
            if a < 0 or b < 0:
                raise ValueError(f"rate and power must be nonnegative, got ({a}, {b})")
            acc[(a, b)] = acc.get((a, b), Fraction(0)) + Fraction(c)
        self._terms = {k: v for k, v in sorted(acc.items()) if v != 0}

    @classmethod
    def const(cls, c: Scalar) -> ExpPoly:
        return cls({(0, 0): c})

    @classmethod
    def exp(cls, rate: int, coef: Scalar = 1, power: int = 0) -> ExpPoly:
        return cls({(rate, power): coef})

    @property
    def terms(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExpPoly.const(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __repr__(self):
        return f"ExpPoly({self.format()})"

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExpPoly.const(other)
        return ExpPoly(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExpPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExpPoly({k: v * other for k, v in self._terms.items()})
        acc: dict[tuple[int, int], Fraction] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                key = (a1 + a2, b1 + b2)
                acc[key] = acc.get(key, Fraction(0)) + c1 * c2
        return ExpPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = ExpPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def constant_part(self) -> ExpPoly:
        return ExpPoly({k: v for k, v in self._terms.items() if k[0] == 0})

    def __call__(self, t: float) -> float:
        return self.eval(t)

    def eval(self, t: float) -> float:
        return math.fsum(float(c) * t ** b * math.exp(-a * t) for (a, b), c in self._terms.items())

    def format(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c} * t^{b} * exp(-{a} t)" for (a, b), c in self._terms.items())


def add(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    return f + g


def mul(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    return f * g


def evaluate(f: ExpPoly, t: float) -> float:
    return f.eval(t)


def integrate_conv(g: ExpPoly, rate: int) -> ExpPoly:
    """exp(-rate*t) * integral_0^t g(u) exp(rate*u) du, in closed form."""
    acc: list[tuple[tuple[int, int], Fraction]] = []
    for (a, b), c in g:
        lam = rate - a
        if lam == 0:
            acc.append(((rate, b + 1), c / (b + 1)))
            continue
        # integral_0^t u^b e^{lam u} du
        #   = e^{lam t} sum_j (-1)^j b!/(b-j)! t^{b-j} / lam^{j+1}  -  (-1)^b b! / lam^{b+1}
        falling = 1
        for j in range(b + 1):
            acc.append(((a, b - j), c * (-1) ** j * falling / Fraction(lam) ** (j + 1)))
            falling *= b - j
        acc.append(((rate, 0), -c * (-1) ** b * math.factorial(b) / Fraction(lam) ** (b + 1)))
    return ExpPoly(acc)


def moment_integral(f: ExpPoly) -> Fraction:
    """integral_0^inf f(t) dt; requires every term to decay (rate > 0)."""
    total = Fraction(0)
    for (a, b), c in f:
        if a == 0:
            raise DomainError("integral diverges: f has a non-decaying term")
        total += c * math.factorial(b) / Fraction(a) ** (b + 1)
    return total


def tail_integral(f: ExpPoly) -> Fraction:
    """integral_0^inf (1 - f(t)) dt for an f whose non-decaying part is exactly 1."""
    if f.constant_part() != ExpPoly.const(1):
        raise DomainError(f"tail integral diverges: constant part is {f.constant_part().format()}, expected 1")
    return moment_integral(ExpPoly.const(1) - f)

"""Truncated float power series with tracked remainder order.

Lightweight counterpart of the symbolic series used by the Taylor
consistency sweep: coefficients are floats, `rem` is the first power at
which the series is unknown, and every operation propagates `rem` so
downstream consumers never read past what the source data determines.
Powers may be negative (frame components carry 1/t poles).
"""

from __future__ import annotations

_ZERO_TOL = 0.0  # keep exact zeros only when structurally zero


class FloatSeries:
    __slots__ = ("c", "rem")

    def __init__(self, coeffs: dict, rem: int):
        self.rem = int(rem)
        self.c = {int(p): float(v) for p, v in coeffs.items() if p < rem and v != 0.0}

    @staticmethod
    def from_pairs(pairs, rem: int) -> "FloatSeries":
        return FloatSeries({p: v for p, v in pairs}, rem)

    @staticmethod
    def const(v: float, rem: int = 10**6) -> "FloatSeries":
        return FloatSeries({0: v}, rem)

    def lead(self) -> int:
        return min(self.c) if self.c else self.rem

    def coeff(self, p: int) -> float:
        return self.c.get(p, 0.0)

    def shift(self, k: int) -> "FloatSeries":
        return FloatSeries({p + k: v for p, v in self.c.items()}, self.rem + k)

    def __add__(self, other):
        if not isinstance(other, FloatSeries):
            other = FloatSeries.const(float(other))
        rem = min(self.rem, other.rem)
        c = dict(self.c)
        for p, v in other.c.items():
            c[p] = c.get(p, 0.0) + v
        return FloatSeries({p: v for p, v in c.items() if p < rem}, rem)

    def __neg__(self):
        return FloatSeries({p: -v for p, v in self.c.items()}, self.rem)

    def __sub__(self, other):
        if not isinstance(other, FloatSeries):
            other = FloatSeries.const(float(other))
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, FloatSeries):
            return FloatSeries({p: v * float(other) for p, v in self.c.items()}, self.rem)
        rem = min(self.rem + other.lead(), other.rem + self.lead())
        c: dict = {}
        for p1, v1 in self.c.items():
            for p2, v2 in other.c.items():
                p = p1 + p2
                if p < rem:
                    c[p] = c.get(p, 0.0) + v1 * v2
        return FloatSeries(c, rem)

    __rmul__ = __mul__

    def inverse(self) -> "FloatSeries":
        lead = self.lead()
        if lead >= self.rem:
            raise ValueError("cannot invert: no known leading term")
        c0 = self.c[lead]
        n_rel = self.rem - lead
        x = FloatSeries({p - lead: v / c0 for p, v in self.c.items() if p != lead}, n_rel)
        acc = FloatSeries({0: 1.0}, n_rel)
        term = FloatSeries({0: 1.0}, n_rel)
        for _ in range(1, n_rel):
            term = term * (-x)
            acc = acc + term
        return FloatSeries({p - lead: v / c0 for p, v in acc.c.items()}, n_rel - lead)

    def sqrt(self) -> "FloatSeries":
        lead = self.lead()
        if lead >= self.rem or lead % 2 != 0:
            raise ValueError("sqrt needs a known even-order leading term")
        c0 = self.c[lead]
        if c0 <= 0.0:
            raise ValueError("sqrt needs a positive leading coefficient")
        n_rel = self.rem - lead
        x = FloatSeries({p - lead: v / c0 for p, v in self.c.items() if p != lead}, n_rel)
        acc = FloatSeries({0: 1.0}, n_rel)
        term = FloatSeries({0: 1.0}, n_rel)
        binom = 1.0
        for m in range(1, n_rel):
            binom *= (0.5 - (m - 1)) / m
            term = term * x
            acc = acc + binom * term
        root = c0**0.5
        return FloatSeries({p + lead // 2: root * v for p, v in acc.c.items()}, n_rel + lead // 2)

    def eval(self, t: float) -> float:
        return sum(v * t**p for p, v in self.c.items())

    def __repr__(self):
        terms = " + ".join(f"{v:.6g}*t^{p}" for p, v in sorted(self.c.items()))
        return f"FloatSeries({terms or '0'} + O(t^{self.rem}))"

"""Truncated series in the nome q with exponents on the lattice (1/8)Z.

A :class:`FracSeries` stores coefficients keyed by the integer numerator of
the exponent over :data:`DENOM`, together with a truncation order: the
series is only trusted for exponents strictly below that order.  All
arithmetic propagates the truncation order conservatively.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, NamedTuple

DENOM = 8


class LatticeError(ValueError):
    """An exponent does not lie on the (1/8)Z lattice."""


class TruncationError(ArithmeticError):
    """The truncation order is too low for the requested tolerance."""


def to_numerator(exponent) -> int:
    e = Fraction(exponent)
    num = e * DENOM
    if num.denominator != 1:
        raise LatticeError(f"exponent {exponent} is not a multiple of 1/{DENOM}")
    return int(num)


class SeriesValue(NamedTuple):
    value: complex
    tail: float


class FracSeries:
    """Truncated q-series with exact (or complex) coefficients.

    Parameters
    ----------
    coeffs : mapping
        ``{exponent_numerator: coefficient}``; the exponent of a key ``k``
        is ``k / 8``.
    order : rational
        Truncation order.  Terms with exponent ``>= order`` are dropped.
    """

    __slots__ = ("_coeffs", "_order")

    def __init__(self, coeffs: Mapping[int, Number], order):
        order = Fraction(order)
        limit = order * DENOM
        clean = {}
        for k, c in coeffs.items():
            if not isinstance(k, int):
                raise LatticeError(f"exponent key {k!r} must be an integer numerator")
            if k < limit and c != 0:
                clean[k] = c
        self._coeffs = dict(sorted(clean.items()))
        self._order = order

    @classmethod
    def from_exponents(cls, terms: Mapping, order) -> "FracSeries":
        """Build from ``{rational exponent: coefficient}``."""
        out: dict[int, Number] = {}
        for e, c in terms.items():
            k = to_numerator(e)
            out[k] = out.get(k, 0) + c
        return cls(out, order)

    @classmethod
    def constant(cls, c, order) -> "FracSeries":
        return cls({0: c}, order)

    @property
    def order(self) -> Fraction:
        return self._order

    @property
    def coeffs(self) -> dict[int, Number]:
        return dict(self._coeffs)

    def items(self) -> Iterable[tuple[Fraction, Number]]:
        for k, c in self._coeffs.items():
            yield Fraction(k, DENOM), c

    def __getitem__(self, exponent):
        return self._coeffs.get(to_numerator(exponent), 0)

    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def valuation(self) -> Fraction:
        """Smallest exponent present; the truncation order for the zero series."""
        if not self._coeffs:
            return self._order
        return Fraction(next(iter(self._coeffs)), DENOM)

    def truncate(self, order) -> "FracSeries":
        return FracSeries(self._coeffs, min(Fraction(order), self._order))

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, FracSeries):
            return other
        if isinstance(other, Number):
            return FracSeries.constant(other, self._order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._coeffs)
        for k, c in other._coeffs.items():
            out[k] = out.get(k, 0) + c
        return FracSeries(out, min(self._order, other._order))

    __radd__ = __add__

    def __neg__(self):
        return FracSeries({k: -c for k, c in self._coeffs.items()}, self._order)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return FracSeries({k: c * other for k, c in self._coeffs.items()}, self._order)
        if not isinstance(other, FracSeries):
            return NotImplemented
        # a known below Na with valuation va, b below Nb with vb:
        # a*b is known below min(Na + vb, Nb + va), capped at min(Na, Nb).
        order = min(
            self._order + other.valuation,
            other._order + self.valuation,
            self._order,
            other._order,
        )
        limit = order * DENOM
        out: dict[int, Number] = {}
        for ka, ca in self._coeffs.items():
            for kb, cb in other._coeffs.items():
                k = ka + kb
                if k < limit:
                    out[k] = out.get(k, 0) + ca * cb
        return FracSeries(out, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, FracSeries):
            return self * other.reciprocal()
        if isinstance(other, int):
            other = Fraction(other)
        return self * (1 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = FracSeries.constant(1, self._order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def qd(self) -> "FracSeries":
        """The operator q d/dq, term by term."""
        return FracSeries(
            {k: c * Fraction(k, DENOM) for k, c in self._coeffs.items()}, self._order
        )

    def reciprocal(self) -> "FracSeries":
        if not self._coeffs:
            raise ZeroDivisionError("reciprocal of a series with zero leading coefficient")
        v = next(iter(self._coeffs))
        c0 = self._coeffs[v]
        if c0 == 0:
            raise ZeroDivisionError("reciprocal of a series with zero leading coefficient")
        c0 = Fraction(c0) if isinstance(c0, int) else c0
        # 1/s = q^(-v) * 1/u with u = q^(-v) s a unit known below order - v
        n_terms = int((self._order - Fraction(v, DENOM)) * DENOM)
        new_order = min(self._order, self._order - 2 * Fraction(v, DENOM))
        u = [(k - v, c) for k, c in self._coeffs.items() if k != v]
        inv: dict[int, Number] = {0: 1 / c0}
        for n in range(1, n_terms):
            acc = 0
            for k, c in u:
                if k > n:
                    break
                b = inv.get(n - k)
                if b is not None:
                    acc += c * b
            if acc != 0:
                inv[n] = -acc / c0
        return FracSeries({k - v: c for k, c in inv.items()}, new_order)

    def log_derivative(self) -> "FracSeries":
        """q d/dq log s = (q ds/dq) / s."""
        return self.qd() * self.reciprocal()

    # comparison / display ----------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, FracSeries):
            return NotImplemented
        return self._order == other._order and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self._order, tuple(self._coeffs.items())))

    def __repr__(self):
        return f"FracSeries({format_terms(self)}, order={self._order})"

    # evaluation ----------------------------------------------------------

    def period(self) -> int:
        """Smallest P > 0 such that the series is invariant under tau -> tau + P."""
        g = DENOM
        for k in self._coeffs:
            g = math.gcd(g, k)
        return DENOM // g if g else 1

    def evaluate(self, tau: complex, tol: float | None = None) -> SeriesValue:
        return eval_series(self, tau, tol)


def format_terms(s: FracSeries) -> str:
    """``"0:1, 1:240, 2:2160"`` style listing of exponent:coefficient pairs."""
    parts = []
    for e, c in s.items():
        parts.append(f"{e}:{c}")
    return ", ".join(parts) if parts else "0"


def eval_series(s: FracSeries, tau, tol: float | None = None) -> SeriesValue:
    """Evaluate ``s`` at ``q = exp(2 pi i tau)`` with a geometric tail estimate.

    The tail bound is ``|c_last q^e_last| * |q|^gap / (1 - |q|)`` where
    ``gap`` is the distance from the last stored exponent to the truncation
    order.  Raises :class:`TruncationError` if it exceeds ``tol``.
    """
    tau = complex(getattr(tau, "value", tau))
    if tau.imag <= 0:
        raise ValueError(f"tau={tau} is not in the upper half-plane")
    period = s.period()
    tau = complex(math.fmod(tau.real, period), tau.imag)
    abs_q = math.exp(-2 * math.pi * tau.imag)
    base = 2j * math.pi * tau / DENOM
    total = 0j
    last = None
    for k, c in s._coeffs.items():
        term = complex(c) * cmath.exp(base * k) if k else complex(c)
        total += term
        last = (k, c)
    if last is None:
        tail = 0.0
    else:
        k, c = last
        gap = float(s.order) - k / DENOM
        tail = abs(complex(c)) * abs_q ** (k / DENOM) * abs_q**gap / (1 - abs_q)
    if tol is not None and tail > tol:
        raise TruncationError(
            f"insufficient truncation order {s.order}: tail bound {tail:.3g} > {tol:.3g}"
        )
    return SeriesValue(total, tail)

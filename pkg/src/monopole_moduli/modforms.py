"""Eisenstein series, theta constants and the Weierstrass invariants of tau.

Series are built with exact rational coefficients (see :mod:`.series`) and
only converted to floating point when evaluated at a point of the upper
half-plane.  Conventions: ``q = exp(2 pi i tau)``, theta constants carry
``q^(n^2/2)`` so that theta_2 lives on the (1/8)Z exponent lattice.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .series import FracSeries, TruncationError, eval_series

DEFAULT_ORDER = Fraction(30)
DEFAULT_TOL = 1e-12

# closed forms of zeta(4), zeta(6)
ZETA4 = math.pi**4 / 90
ZETA6 = math.pi**6 / 945

EISENSTEIN_B = {1: -24, 2: 240, 3: -504}


class DegenerateCurveError(ArithmeticError):
    """The Weierstrass discriminant vanishes (cusp / split curve)."""


@dataclass(frozen=True)
class Tau:
    """A point of the upper half-plane."""

    value: complex
    purely_imaginary: bool = False

    def __post_init__(self):
        v = complex(self.value)
        object.__setattr__(self, "value", v)
        if not v.imag > 0:
            raise ValueError(f"tau={v} is not in the upper half-plane")
        if self.purely_imaginary and v.real != 0:
            raise ValueError(f"tau={v} flagged purely imaginary but has real part")

    @classmethod
    def imag(cls, rho: float) -> "Tau":
        """``tau = i * rho``."""
        return cls(complex(0.0, float(rho)), purely_imaginary=True)

    @property
    def rho(self) -> float:
        if not self.purely_imaginary:
            raise ValueError("rho is only defined on the imaginary axis")
        return self.value.imag

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.value)

    @property
    def abs_q(self) -> float:
        return math.exp(-2 * math.pi * self.value.imag)


def as_tau(tau) -> Tau:
    if isinstance(tau, Tau):
        return tau
    tau = complex(tau)
    return Tau(tau, purely_imaginary=(tau.real == 0))


@dataclass(frozen=True)
class WeierstrassInvariants:
    g2: complex
    g3: complex

    @property
    def discriminant(self):
        return self.g2**3 - 27 * self.g3**2

    @property
    def nonsingular(self) -> bool:
        return self.discriminant != 0

    @property
    def j(self):
        d = self.discriminant
        if d == 0:
            raise DegenerateCurveError("discriminant g2^3 - 27 g3^2 vanishes")
        return 1728 * self.g2**3 / d

    @property
    def I(self):
        if self.g2 == 0:
            raise DegenerateCurveError("g2 = 0, I is undefined")
        return 27 * self.g3**2 / self.g2**3

    def scaled(self, m) -> "WeierstrassInvariants":
        """Invariants of the lattice m*Lambda: (m^-4 g2, m^-6 g3)."""
        return WeierstrassInvariants(self.g2 / m**4, self.g3 / m**6)


def _divisor_sigma(n: int, k: int) -> int:
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**k
            e = n // d
            if e != d:
                total += e**k
        d += 1
    return total


@lru_cache(maxsize=64)
def eisenstein_q(i: int, order=DEFAULT_ORDER) -> FracSeries:
    """E_{2i} as an exact q-series, ``1 + b_i sum sigma_{2i-1}(n) q^n``."""
    if i not in EISENSTEIN_B:
        raise ValueError(f"Eisenstein index must be 1, 2 or 3, got {i}")
    order = Fraction(order)
    if order <= 0:
        raise ValueError("order must be positive")
    b = EISENSTEIN_B[i]
    n_max = math.ceil(order)
    coeffs = {0: 1}
    for n in range(1, n_max):
        coeffs[8 * n] = b * _divisor_sigma(n, 2 * i - 1)
    return FracSeries(coeffs, order)


@lru_cache(maxsize=64)
def theta_q(which: int, order=DEFAULT_ORDER) -> FracSeries:
    """Theta constants theta_2, theta_3, theta_4 as q-series.

    theta_2 has exponents (n + 1/2)^2 / 2, theta_3 and theta_4 have n^2 / 2
    (theta_4 with the sign (-1)^n).
    """
    if which not in (2, 3, 4):
        raise ValueError(f"theta index must be 2, 3 or 4, got {which}")
    order = Fraction(order)
    if order <= 0:
        raise ValueError("order must be positive")
    limit = order * 8
    coeffs: dict[int, int] = {}
    n = 0
    while True:
        if which == 2:
            # n and -n-1 give the same exponent (2n+1)^2 / 8
            k = (2 * n + 1) ** 2
            if k >= limit:
                break
            coeffs[k] = 2
        else:
            k = 4 * n * n
            if k >= limit:
                break
            sign = (-1) ** n if which == 4 else 1
            coeffs[k] = sign * (1 if n == 0 else 2)
        n += 1
    return FracSeries(coeffs, order)


@lru_cache(maxsize=16)
def discriminant_q(order=DEFAULT_ORDER) -> FracSeries:
    """(E4^3 - E6^2) / 1728 = q - 24 q^2 + ..., computed exactly.

    Used instead of g2^3 - 27 g3^2 in floating point, which cancels
    catastrophically near the cusp.
    """
    e4 = eisenstein_q(2, order)
    e6 = eisenstein_q(3, order)
    return (e4**3 - e6 * e6) / 1728


def eisenstein(i: int, tau, order=DEFAULT_ORDER, tol=DEFAULT_TOL) -> complex:
    return eval_series(eisenstein_q(i, order), as_tau(tau).value, tol).value


def theta(which: int, tau, order=DEFAULT_ORDER, tol=DEFAULT_TOL) -> complex:
    return eval_series(theta_q(which, order), as_tau(tau).value, tol).value


def g_invariants_tau(tau, order=DEFAULT_ORDER, tol=DEFAULT_TOL) -> WeierstrassInvariants:
    """g2 = 120 zeta(4) E4 and g3 = 280 zeta(6) E6 for the lattice (1, tau)."""
    e4 = eisenstein(2, tau, order, tol)
    e6 = eisenstein(3, tau, order, tol)
    return WeierstrassInvariants(120 * ZETA4 * e4, 280 * ZETA6 * e6)


def one_minus_I(tau, order=DEFAULT_ORDER, tol=DEFAULT_TOL) -> complex:
    """1 - I = Delta / g2^3 = 1728 * disc / E4^3, accurate near the cusp."""
    t = as_tau(tau).value
    d = eval_series(discriminant_q(order), t, None).value
    e4 = eval_series(eisenstein_q(2, order), t, tol).value
    return 1728 * d / e4**3


def j_and_I(tau, order=DEFAULT_ORDER, tol=DEFAULT_TOL) -> tuple[complex, complex]:
    """Klein's j = 1728 g2^3 / Delta and I = 27 g3^2 / g2^3 at tau."""
    t = as_tau(tau).value
    e4 = eval_series(eisenstein_q(2, order), t, tol).value
    e6 = eval_series(eisenstein_q(3, order), t, tol).value
    d = 1728 * eval_series(discriminant_q(order), t, None).value
    if d == 0:
        raise DegenerateCurveError(f"discriminant vanishes at tau={t}")
    # 27 g3^2 / g2^3 reduces to E6^2 / E4^3 with the zeta normalisations above
    return 1728 * e4**3 / d, e6 * e6 / e4**3


def cusp_constants(tau, order=DEFAULT_ORDER) -> dict:
    """Measured constants of the expansion of 1 - I near the cusp.

    ``(1 - I) j / 27`` is identically 64; ``(1 - I) / (27 q)`` tends to 64
    as q -> 0 (not 2^12 3^3).
    """
    t = as_tau(tau)
    j, _ = j_and_I(t, order)
    om = one_minus_I(t, order)
    return {
        "q": t.q,
        "one_minus_I_times_j_over_27": om * j / 27,
        "one_minus_I_over_27q": om / (27 * t.q),
        "printed_leading_constant": 2**12 * 3**3,
    }


def sl2_apply(matrix, tau: complex) -> complex:
    (a, b), (c, d) = matrix
    return (a * tau + b) / (c * tau + d)


def quasi_modularity_check(tau, matrix, order=DEFAULT_ORDER, tol=DEFAULT_TOL) -> dict:
    """Residuals of the weight-2 (anomalous), weight-4 and weight-6 laws.

    E2(g tau) - (c tau + d)^2 E2(tau) - 12/(2 pi i) c (c tau + d), and
    E_k(g tau) - (c tau + d)^k E_k(tau) for k = 4, 6.
    """
    (a, b), (c, d) = matrix
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant 1")
    t = as_tau(tau).value
    cz = c * t + d
    if cz == 0:
        raise ValueError("c tau + d vanishes")
    image = sl2_apply(matrix, t)
    if image.imag <= 0:
        raise ValueError("image point is not in the upper half-plane")
    try:
        lhs = [eval_series(eisenstein_q(i, order), image, tol).value for i in (1, 2, 3)]
    except TruncationError as exc:
        raise TruncationError(f"image point {image} too close to the real axis: {exc}") from exc
    rhs = [eval_series(eisenstein_q(i, order), t, tol).value for i in (1, 2, 3)]
    anomaly = 12 / (2j * math.pi) * c * cz
    return {
        "E2": abs(lhs[0] - cz**2 * rhs[0] - anomaly),
        "E4": abs(lhs[1] - cz**4 * rhs[1]),
        "E6": abs(lhs[2] - cz**6 * rhs[2]),
    }


def theta_log_derivatives(tau, order=DEFAULT_ORDER, tol=DEFAULT_TOL):
    """For theta_2, theta_3, theta_4 return pairs (D theta/theta, D(D theta/theta)).

    D is q d/dq; the pairs are evaluated numerically from the separately
    summed series theta, D theta, D^2 theta.
    """
    t = as_tau(tau).value
    out = []
    for which in (2, 3, 4):
        s = theta_q(which, order)
        ds = s.qd()
        d2s = ds.qd()
        th = eval_series(s, t, tol).value
        dth = eval_series(ds, t, None).value
        d2th = eval_series(d2s, t, None).value
        ld = dth / th
        out.append((ld, d2th / th - ld * ld))
    return out

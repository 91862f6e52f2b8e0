"""Spectral curves of SU(2) monopoles and the Bianchi IX metric on the
reduced 2-monopole moduli space.

The k = 2 curve is ``eta^2 = r1 zeta^3 - r2 zeta^2 - r1 zeta``.  Its
Weierstrass form and the scale-free invariant I tie (r1, r2) to a purely
imaginary tau = i rho; the real Halphen triple Omega(rho) built from theta
constants gives the metric coefficients a^2, b^2, c^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from scipy.optimize import bisect

from . import modforms
from .moduli import halphen_field
from .modforms import DEFAULT_ORDER, DegenerateCurveError, Tau, WeierstrassInvariants

RHO_BRACKET = (1.0, 60.0)
R_BRACKET = (1e-60, 1e6)
MAX_ITER = 200


class SignatureError(ArithmeticError):
    """A squared metric coefficient is not positive."""


class ConvergenceError(RuntimeError):
    pass


def _exact(x):
    return Fraction(x) if isinstance(x, int) else x


def dimensions(k: int) -> tuple[int, int, int]:
    """(dim M_k, dim of the reduced moduli M_k^0, genus of the spectral curve)."""
    if k < 1:
        raise ValueError("charge k must be a positive integer")
    return 4 * k - 1, 4 * k - 4, (k - 1) ** 2


@dataclass(frozen=True)
class SpectralCurve2:
    r1: float
    r2: float

    def __post_init__(self):
        if self.r1 < 0:
            raise ValueError("r1 must be non-negative")

    @property
    def degenerate(self) -> bool:
        return self.r1 == 0

    @property
    def ratio(self):
        if self.r2 == 0:
            raise ZeroDivisionError("r = r1/r2 undefined for r2 = 0")
        return _exact(self.r1) / self.r2

    def to_curve(self) -> "SpectralCurveK":
        return SpectralCurveK.from_k2(self.r1, self.r2)


@dataclass(frozen=True)
class SpectralCurveK:
    """eta^k + a_1(zeta) eta^(k-1) + ... + a_k(zeta) = 0.

    ``a[i-1]`` lists the coefficients of a_i in increasing powers of zeta,
    padded to length 2i + 1.
    """

    k: int
    a: tuple

    def __post_init__(self):
        if len(self.a) != self.k:
            raise ValueError("need exactly k coefficient polynomials")
        padded = []
        for i, coeffs in enumerate(self.a, start=1):
            coeffs = list(coeffs)
            if len(coeffs) > 2 * i + 1 and any(coeffs[2 * i + 1:]):
                raise ValueError(f"a_{i} has degree above {2 * i}")
            coeffs = (coeffs + [0] * (2 * i + 1))[: 2 * i + 1]
            padded.append(tuple(coeffs))
        object.__setattr__(self, "a", tuple(padded))

    @classmethod
    def from_k2(cls, r1, r2) -> "SpectralCurveK":
        # eta^2 - (r1 zeta^3 - r2 zeta^2 - r1 zeta) = 0
        return cls(2, ((0, 0, 0), (0, r1, r2, -r1, 0)))

    @classmethod
    def line(cls, slope) -> "SpectralCurveK":
        """The k = 1 curve eta = slope * zeta."""
        return cls(1, ((0, -slope, 0),))

    def product(self, other: "SpectralCurveK") -> "SpectralCurveK":
        """Union of two curves: the product of their polynomials in eta."""
        A = [(1,)] + [c for c in self.a]
        B = [(1,)] + [c for c in other.a]
        k = self.k + other.k
        out = []
        for i in range(1, k + 1):
            poly = [0] * (2 * i + 1)
            for j in range(0, i + 1):
                l = i - j
                if j > self.k or l > other.k:
                    continue
                for m, x in enumerate(A[j]):
                    for n, y in enumerate(B[l]):
                        poly[m + n] += x * y
            out.append(tuple(poly))
        return SpectralCurveK(k, tuple(out))

    def mirror(self) -> "SpectralCurveK":
        """Image under (eta, zeta) -> (-conj(eta)/conj(zeta)^2, -1/conj(zeta)).

        After clearing powers of zeta the coefficients become
        a'_{i,n} = (-1)^(i+n) conj(a_{i, 2i-n}).
        """
        out = []
        for i, coeffs in enumerate(self.a, start=1):
            out.append(tuple((-1) ** (i + n) * complex(coeffs[2 * i - n]).conjugate()
                             for n in range(2 * i + 1)))
        return SpectralCurveK(self.k, tuple(out))


def real_structure_check(curve: SpectralCurveK, tol: float = 1e-12):
    """Is the curve invariant under the real structure?  Returns (ok, residuals)."""
    m = curve.mirror()
    res = [abs(complex(x) - y) for a, b in zip(curve.a, m.a) for x, y in zip(a, b)]
    return all(r <= tol for r in res), res


def components_real(curves, tol: float = 1e-12) -> bool:
    """Does the real structure permute the given components among themselves?"""
    for c in curves:
        img = c.mirror()
        if not any(d.k == img.k and all(
                abs(complex(x) - y) <= tol for a, b in zip(d.a, img.a) for x, y in zip(a, b))
                for d in curves):
            return False
    return True


def degenerate_curve(r2):
    """r1 = 0: eta^2 = -r2 zeta^2 splits into eta = +/- i sqrt(r2) zeta."""
    if r2 < 0:
        raise ValueError("r2 must be non-negative")
    s = math.sqrt(r2)
    return SpectralCurveK.line(1j * s), SpectralCurveK.line(-1j * s)


# Weierstrass data ----------------------------------------------------------


def weierstrass_from_r(c: SpectralCurve2) -> WeierstrassInvariants:
    """Lattice invariants g2 = 12 m^2 + 4, g3 = 8 m^3 + 4 m with m = r2 / (3 r1)."""
    if c.r1 == 0:
        raise DegenerateCurveError("r1 = 0: the curve splits into two k=1 curves")
    m = _exact(c.r2) / (3 * _exact(c.r1))
    return WeierstrassInvariants(12 * m**2 + 4, 8 * m**3 + 4 * m)


def one_minus_I_of_ratio(r):
    """1 - I = 27 r^4 (1/4 + r^2) / (1 + 3 r^2)^3."""
    r = _exact(r)
    r2 = r * r
    return 27 * r2 * r2 * (Fraction(1, 4) + r2) / (1 + 3 * r2) ** 3


def I_from_r(c: SpectralCurve2):
    if c.r1 == 0:
        return Fraction(1) if isinstance(c.r2, (int, Fraction)) else 1.0
    if c.r2 == 0:
        return Fraction(0) if isinstance(c.r1, (int, Fraction)) else 0.0
    return 1 - one_minus_I_of_ratio(c.ratio)


def tau_from_r(c: SpectralCurve2, tol: float = 1e-12, order=DEFAULT_ORDER) -> Tau:
    """The tau = i rho, rho >= 1, whose I(tau) matches the curve's I.

    Bisection on log(1 - I), which is monotone on the imaginary axis above i.
    """
    if c.r1 <= 0 or c.r2 <= 0:
        raise ValueError("need r1 > 0 and r2 > 0")
    target = float(one_minus_I_of_ratio(c.ratio))
    if not 0 < target <= 1:
        raise ValueError(f"I = {1 - target} outside [0, 1)")
    log_target = math.log(target)

    def f(rho):
        return math.log(modforms.one_minus_I(Tau.imag(rho), order).real) - log_target

    lo, hi = RHO_BRACKET
    if f(lo) <= 0:
        # I at or below I(i) = 0 to working precision
        return Tau.imag(lo)
    if f(hi) > 0:
        raise ConvergenceError(f"I = 1 - {target:.3g} too close to 1 for rho <= {hi}")
    try:
        rho = bisect(f, lo, hi, xtol=1e-15, maxiter=MAX_ITER)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc
    tau = Tau.imag(rho)
    I_tau = modforms.j_and_I(tau, order)[1].real
    I_target = 1 - target
    if abs(I_tau - I_target) >= tol:
        raise ConvergenceError(f"round trip |I(tau) - I| = {abs(I_tau - I_target):.3g} >= {tol}")
    return tau


def r_params_from_tau(tau, order=DEFAULT_ORDER) -> SpectralCurve2:
    """(r1, r2) on the real section from tau = i rho, rho >= 1.

    r solves 1 - I(r) = 1 - I(tau); the scale follows from
    g2(tau) = (64/3) r2^2 (1 + 3 r^2).
    """
    tau = modforms.as_tau(tau)
    if not tau.purely_imaginary or tau.rho < 1:
        raise ValueError("tau must be i*rho with rho >= 1")
    target = modforms.one_minus_I(tau, order).real
    log_target = math.log(target)

    def f(log_r):
        return math.log(one_minus_I_of_ratio(math.exp(log_r))) - log_target

    lo, hi = (math.log(x) for x in R_BRACKET)
    if f(hi) < 0:
        r = math.exp(hi)  # tau = i, I = 0: the r -> infinity end of the bracket
    else:
        try:
            r = math.exp(bisect(f, lo, hi, xtol=1e-15, maxiter=MAX_ITER))
        except (RuntimeError, ValueError) as exc:
            raise ConvergenceError(str(exc)) from exc
    g2 = modforms.g_invariants_tau(tau, order).g2.real
    radicand = 3 * g2 / (64 * (1 + 3 * r * r))
    if radicand < 0:
        raise ConvergenceError("negative radicand for r2")
    r2 = math.sqrt(radicand)
    return SpectralCurve2(r * r2, r2)


# Omega triple and metric ---------------------------------------------------


@dataclass(frozen=True)
class OmegaPoint:
    O1: float
    O2: float
    O3: float
    rho: float | None = None

    def __post_init__(self):
        if len({self.O1, self.O2, self.O3}) < 3:
            raise ValueError("Omega_i must be pairwise distinct")
        if self.rho is not None and self.rho <= 0:
            raise ValueError("rho must be positive")

    def __iter__(self):
        return iter((self.O1, self.O2, self.O3))


def _theta_omega(rho, order):
    # d/drho log theta(i rho) = -2 pi (D theta / theta), D = q d/dq
    pairs = modforms.theta_log_derivatives(Tau.imag(rho), order)
    first = [(-2 * math.pi * ld).real for ld, _ in pairs]
    second = [(4 * math.pi**2 * dld).real for _, dld in pairs]
    return first, second


def fit_omega_scale(rho_lo: float = 1.0, rho_hi: float = 2.0, n: int = 20,
                    order=DEFAULT_ORDER) -> float:
    """Least-squares k with Omega_i = k d/drho log theta_{i+1}(i rho) solving
    Omega_i' = Omega_i (Omega_j + Omega_k) - Omega_j Omega_k."""
    num = den = 0.0
    step = (rho_hi - rho_lo) / (n - 1)
    for m in range(n):
        first, second = _theta_omega(rho_lo + m * step, order)
        for d, qv in zip(second, halphen_field(first)):
            num += d * qv
            den += qv * qv
    return num / den


@lru_cache(maxsize=4)
def omega_scale(order=DEFAULT_ORDER) -> float:
    """The fitted scale, computed once and reused."""
    return fit_omega_scale(order=order)


def omega_from_theta(rho: float, order=DEFAULT_ORDER) -> OmegaPoint:
    if rho <= 0:
        raise ValueError("rho must be positive")
    k = omega_scale(order)
    first, _ = _theta_omega(rho, order)
    return OmegaPoint(*(k * x for x in first), rho=rho)


def omega_theta_residual(rho: float, order=DEFAULT_ORDER, scale: float | None = None) -> float:
    """max_i |Omega_i' - (Omega_i (Omega_j + Omega_k) - Omega_j Omega_k)|.

    ``scale`` overrides the fitted constant k.
    """
    k = omega_scale(order) if scale is None else scale
    first, second = _theta_omega(rho, order)
    O = [k * x for x in first]
    return max(abs(k * d - h) for d, h in zip(second, halphen_field(O)))


@dataclass
class BianchiFrame:
    rho: float | None
    a2: float
    b2: float
    c2: float
    abc2: float
    positive: bool
    selfdual_residuals: tuple | None = None
    orientation: str = "-"

    def as_row(self) -> dict:
        return {"a2": self.a2, "b2": self.b2, "c2": self.c2, "abc2": self.abc2}


def metric_coefficients(p):
    O1, O2, O3 = (_exact(x) for x in p)
    if 0 in (O1, O2, O3):
        raise ZeroDivisionError("some Omega_i vanishes")
    return O2 * O3 / O1, O3 * O1 / O2, O1 * O2 / O3


def selfdual_residual(p, orientation: str = "-", roots: str = "signed"):
    """Residuals of 2 a'/a = b^2 + c^2 - a^2 - 2bc and its cyclic images.

    The derivatives come from the real Halphen field through
    a^2 = O2 O3 / O1 etc.; ``orientation="-"`` reverses rho.  With
    ``roots="signed"`` the roots satisfy bc = O1, ca = O2, ab = O3
    (abc = +sqrt(O1 O2 O3)); ``roots="positive"`` takes a, b, c > 0.
    """
    if orientation not in ("+", "-"):
        raise ValueError("orientation must be '+' or '-'")
    O = [_exact(x) for x in p]
    sq = metric_coefficients(O)
    if any(s <= 0 for s in sq):
        raise SignatureError(f"non-positive squared coefficient in {sq}")
    dO = halphen_field(O)
    logd = [dO[i] / O[i] for i in range(3)]
    sign = -1 if orientation == "-" else 1
    out = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        # d log a_i^2 = d log O_j + d log O_k - d log O_i
        lhs = sign * (logd[j] + logd[k] - logd[i])
        cross = O[i] if roots == "signed" else abs(O[i])
        rhs = sq[j] + sq[k] - sq[i] - 2 * cross
        out.append(lhs - rhs)
    return tuple(out)


def metric_from_omega(p, orientation: str = "-") -> BianchiFrame:
    a2, b2, c2 = metric_coefficients(p)
    O1, O2, O3 = (_exact(x) for x in p)
    positive = a2 > 0 and b2 > 0 and c2 > 0
    res = selfdual_residual(p, orientation) if positive else None
    return BianchiFrame(rho=getattr(p, "rho", None), a2=a2, b2=b2, c2=c2,
                        abc2=O1 * O2 * O3, positive=positive,
                        selfdual_residuals=res, orientation=orientation)


def asymptotic_report(rho: float, order=DEFAULT_ORDER) -> dict:
    """Metric data at rho next to the leading-order forms near the cusp."""
    q = math.exp(-2 * math.pi * rho)
    p = omega_from_theta(rho, order)
    frame = metric_from_omega(p)
    k = omega_scale(order)
    q4 = q**0.25
    # displayed Omega asymptotics substituted into a^2 = O2 O3 / O1 etc.
    disp = (-q4 / 4, -2 * q4, 2 * q4)
    disp_metric = metric_coefficients(disp)
    report = {
        "rho": rho,
        "q": q,
        "omega": tuple(p),
        "a2": frame.a2, "b2": frame.b2, "c2": frame.c2, "abc2": frame.abc2,
        "b2_over_c2": frame.b2 / frame.c2,
        "isometry_gauge": abs(frame.b2 / frame.c2 - 1),
        "omega_scale": k,
        "omega_leading": (-k * math.pi / 4, -2 * k * math.pi * q**0.5, 2 * k * math.pi * q**0.5),
        "displayed_omega": disp,
        "displayed_metric": {"drho2": 4 * q4, "sigma1": q4**3, "sigma2": 1 / (4 * q4),
                             "sigma3": 1 / (4 * q4)},
        "displayed_omega_substituted": {"abc2": disp[0] * disp[1] * disp[2],
                                        "a2": disp_metric[0], "b2": disp_metric[1],
                                        "c2": disp_metric[2]},
    }
    if rho >= 1:
        curve = r_params_from_tau(Tau.imag(rho), order)
        report["r1"] = curve.r1
        report["r2"] = curve.r2
        report["prefactor_pi_over_r1"] = math.pi / curve.r1
    return report


def real_section_omega(T) -> OmegaPoint:
    """Omega_j = i T_j for a purely imaginary T_H point."""
    return OmegaPoint(*((1j * complex(x)).real for x in T))

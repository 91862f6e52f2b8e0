"""Integration of the Ramanujan, Darboux-Halphen and real Halphen flows.

R and H flows run along the imaginary axis tau = i s; the chain rule
d/ds = i d/dtau is applied to the field, so the state stays complex while
the parameter is real.  The Omega flow runs in real rho.

The integrator is the Dormand-Prince 5(4) embedded pair, propagating the
fifth-order solution, with the local error per unit step (max norm) held
below ``tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import moduli, monopole
from .modforms import DEFAULT_ORDER

FIELDS = ("R", "H", "omega")

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
ORDER = 5

SAFETY = 0.9
MAX_GROWTH = 5.0
MIN_SHRINK = 0.2


@dataclass
class FlowResult:
    """Trajectory samples ``(parameter, state)`` plus step statistics."""

    field: str
    samples: list
    status: str = "ok"
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0
    endpoint_error: float | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def endpoint(self):
        return self.samples[-1]

    def to_dict(self) -> dict:
        s, y = self.endpoint
        return {
            "field": self.field,
            "status": self.status,
            "message": self.message,
            "endpoint_param": s,
            "endpoint_state": [_jsonable(v) for v in y],
            "endpoint_error": self.endpoint_error,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "evaluations": self.evaluations,
        }


def _jsonable(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def vector_field(name: str) -> Callable:
    """The right-hand side d(state)/d(parameter) as a numpy function."""
    if name == "R":
        return lambda s, y: 1j * np.array(moduli.ramanujan_field(y))
    if name == "H":
        return lambda s, y: 1j * np.array(moduli.halphen_field(y))
    if name == "omega":
        # Omega = i T, tau = i rho  =>  dOmega/drho = H(Omega)
        return lambda s, y: np.array(moduli.halphen_field(y))
    raise ValueError(f"unknown field {name!r}; choose from {FIELDS}")


def oracle(name: str, order=DEFAULT_ORDER) -> Callable:
    """Closed-form solution as a function of the flow parameter."""
    if name == "R":
        return lambda s: np.array(moduli.ramanujan_solution(complex(0, s), order), dtype=complex)
    if name == "H":
        return lambda s: np.array(moduli.halphen_solution_theta(complex(0, s), order), dtype=complex)
    if name == "omega":
        return lambda s: np.array(tuple(monopole.omega_from_theta(s, order)), dtype=float)
    raise ValueError(f"unknown field {name!r}; choose from {FIELDS}")


def _domain_measure(name: str, y) -> float:
    """Zero on the boundary of the field's domain, scale-normalised."""
    if name == "R":
        _, t2, t3 = y
        size = abs(t2) ** 3 + 27 * abs(t3) ** 2
        return abs(t2**3 - 27 * t3**2) / size if size else 0.0
    a, b, c = y
    size = abs(a) + abs(b) + abs(c)
    return min(abs(a - b), abs(b - c), abs(a - c)) / size if size else 0.0


def _dp_step(f, s, y, h):
    k = []
    for i in range(7):
        yi = y + h * sum(a * kk for a, kk in zip(_A[i], k)) if i else y
        k.append(f(s + _C[i] * h, yi))
    k = np.array(k)
    return y + h * (_B5 @ k), h * ((_B5 - _B4) @ k)


def integrate(name: str, start: Sequence, p0: float, p1: float, tol: float = 1e-10,
              reference: Callable | None = None, cap: float = 1e8,
              fixed_steps: int | None = None, domain_eps: float = 1e-12,
              max_steps: int = 100000) -> FlowResult:
    """Integrate ``name`` from ``start`` at parameter ``p0`` to ``p1``.

    Parameters
    ----------
    name : {"R", "H", "omega"}
    start : state triple
    p0, p1 : float
        Parameter interval; s with tau = i s for R/H, rho for omega.
        Either direction is allowed.
    tol : float
        Bound on the local error per unit step.
    reference : callable, optional
        Closed-form solution; when given the endpoint deviation is recorded.
    cap : float
        State norm treated as blow-up.
    fixed_steps : int, optional
        Take this many equal steps instead of adapting.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p0 == p1:
        raise ValueError("empty parameter interval")
    f = vector_field(name)
    dtype = float if name == "omega" else complex
    y = np.array(start, dtype=dtype)
    if y.shape != (3,):
        raise ValueError("start state must be a triple")
    watch_domain = _domain_measure(name, y) > domain_eps
    span = abs(p1 - p0)
    d = 1.0 if p1 > p0 else -1.0
    res = FlowResult(name, [(float(p0), tuple(y))])
    s = float(p0)

    def fail(status, msg):
        res.status = status
        res.message = msg
        return res

    if fixed_steps is not None:
        h = span / fixed_steps
        for n in range(fixed_steps):
            y, _ = _dp_step(f, s, y, d * h)
            res.evaluations += 7
            s = p0 + d * h * (n + 1)
            if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > cap:
                return fail("blowup", f"state norm exceeded {cap:g} near s={s:.6g}")
            res.accepted += 1
            res.samples.append((s, tuple(y)))
    else:
        h = span / 100
        while d * (p1 - s) > 0:
            if res.accepted + res.rejected >= max_steps:
                return fail("max_steps", f"step budget {max_steps} exhausted at s={s:.6g}")
            last = abs(p1 - s) <= h
            h = min(h, abs(p1 - s))
            y_new, err = _dp_step(f, s, y, d * h)
            res.evaluations += 7
            finite = np.all(np.isfinite(y_new)) and np.all(np.isfinite(err))
            e = float(np.max(np.abs(err))) / h if finite else math.inf
            if e <= tol:
                s = float(p1) if last else s + d * h
                y = y_new
                res.accepted += 1
                res.samples.append((s, tuple(y)))
                if np.max(np.abs(y)) > cap:
                    return fail("blowup", f"state norm exceeded {cap:g} at s={s:.6g}")
                if watch_domain and _domain_measure(name, y) <= domain_eps:
                    return fail("domain_exit", f"left the domain at s={s:.6g}")
            else:
                res.rejected += 1
            if e == 0:
                factor = MAX_GROWTH
            elif math.isinf(e):
                factor = MIN_SHRINK
            else:
                factor = min(MAX_GROWTH, max(MIN_SHRINK, SAFETY * (tol / e) ** (1 / ORDER)))
            h *= factor
            if h < 1e-14 * span:
                return fail("blowup", f"step size collapsed near s={s:.6g} (singularity)")
    if reference is not None:
        ref = np.asarray(reference(s))
        res.endpoint_error = float(np.max(np.abs(np.asarray(res.samples[-1][1]) - ref)))
    return res


def integrate_oracle(name: str, p0: float, p1: float, tol: float = 1e-10,
                     order=DEFAULT_ORDER, **kw) -> FlowResult:
    """Start on the closed-form solution at ``p0`` and compare at the end."""
    sol = oracle(name, order)
    return integrate(name, sol(p0), p0, p1, tol, reference=sol, **kw)


@dataclass
class ScanResult:
    max_residual: float
    h: float
    richardson: bool
    residuals: list = field(default_factory=list)


def residual_scan(name_or_field, solution: Callable, grid: Sequence[float], h: float = 1e-4,
                  richardson: bool = True) -> ScanResult:
    """max over ``grid`` of |field(solution(s)) - d/ds solution(s)|.

    The derivative is a centred difference with step ``h``; with
    ``richardson`` the h and h/2 differences are combined to cancel the
    h^2 term.  ``name_or_field`` is a field name or a callable (s, y) -> dy/ds.
    """
    f = vector_field(name_or_field) if isinstance(name_or_field, str) else name_or_field

    def central(s, step):
        return (np.asarray(solution(s + step)) - np.asarray(solution(s - step))) / (2 * step)

    out = []
    for s in grid:
        deriv = central(s, h)
        if richardson:
            deriv = (4 * central(s, h / 2) - deriv) / 3
        y = np.asarray(solution(s))
        out.append(float(np.max(np.abs(np.asarray(f(s, y)) - deriv))))
    return ScanResult(max(out) if out else 0.0, h, richardson, out)

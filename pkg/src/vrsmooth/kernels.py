"""Kernel densities and the scalar functionals built from them.

Every functional is computed by adaptive Gauss-Kronrod quadrature
(``scipy.integrate.quad``) with absolute tolerance ``QUAD_TOL``.  Closed
forms, where available, are kept alongside as cross-check oracles so that
the quadrature path stays the single authoritative route.

The central quantities are the moment functionals ``nu_moment`` (integrals
of ``s^i K(s)^j``), the overlap functional ``overlap_c`` (inner product of
two shifted copies of ``K``), and the two derived overlap curves ``c_delta``
and ``d_delta`` that control how much variance a three-point combination of
local fits can remove.  ``nu_tilde`` gives the moments of the effective
kernel of such a combination and ``tau`` the variance factor of the
generalised (unequally anchored) combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .combine import coeffs_a, coeffs_b

QUAD_TOL = 1e-11

#: truncation radius for integrals against the normal density; the tail mass
#: beyond +-12 is below 1e-30 and invisible at QUAD_TOL
NORMAL_RADIUS = 12.0

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Kernel:
    """A symmetric probability density used for local weighting.

    ``radius`` is the support radius for compact kernels and the effective
    truncation radius used in quadrature for unbounded ones.
    """

    name: str
    pdf: Callable[[np.ndarray], np.ndarray]
    radius: float
    compact: bool

    def __call__(self, u):
        return self.pdf(np.asarray(u, dtype=float))


def _uniform_pdf(u):
    return np.where(np.abs(u) < 1.0, 0.5, 0.0)


def _epanechnikov_pdf(u):
    return np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u), 0.0)


def _normal_pdf(u):
    return np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


UNIFORM = Kernel("uniform", _uniform_pdf, 1.0, True)
EPANECHNIKOV = Kernel("epanechnikov", _epanechnikov_pdf, 1.0, True)
NORMAL = Kernel("normal", _normal_pdf, NORMAL_RADIUS, False)

KERNELS = {k.name: k for k in (UNIFORM, EPANECHNIKOV, NORMAL)}


def get_kernel(name: str) -> Kernel:
    try:
        return KERNELS[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown kernel {name!r}; expected one of {sorted(KERNELS)}"
        ) from None


def make_kernel(name, pdf, radius, compact=True, checks=True) -> Kernel:
    """Wrap a user-supplied symmetric density as a :class:`Kernel`.

    The evaluator must accept numpy arrays.  With ``checks`` on, the density
    (unit mass), symmetry and nonnegativity are validated numerically.
    """
    k = Kernel(name, pdf, float(radius), bool(compact))
    if checks:
        mass = _quad(lambda s: float(pdf(s)), -k.radius, k.radius)
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"density integrates to {mass!r}, not 1")
        u = np.linspace(0.0, k.radius, 257)
        if not np.allclose(k(u), k(-u), rtol=0.0, atol=1e-12):
            raise ValueError("density is not symmetric")
        if np.any(k(np.linspace(-k.radius, k.radius, 513)) < 0):
            raise ValueError("density takes negative values")
    return k


def _quad(f, lo, hi, breakpoints=()):
    pts = sorted(p for p in set(breakpoints) if lo < p < hi)
    val, _err = quad(f, lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL,
                     limit=400, points=pts or None)
    return val


@lru_cache(maxsize=None)
def nu_moment(kernel: Kernel, i: int, j: int) -> float:
    """Moment functional: integral of ``s^i K(s)^j`` over the support.

    Odd ``i`` returns exactly 0 by symmetry.  Supported range is
    ``0 <= i <= 4`` and ``1 <= j <= 3``.
    """
    if not (isinstance(i, int) and isinstance(j, int)):
        raise ValueError("moment orders must be integers")
    if not (0 <= i <= 4 and 1 <= j <= 3):
        raise ValueError(f"unsupported moment order (i={i}, j={j})")
    if i % 2 == 1:
        return 0.0
    pdf, R = kernel.pdf, kernel.radius
    return _quad(lambda s: s**i * float(pdf(s)) ** j, -R, R)


@lru_cache(maxsize=None)
def overlap_c(kernel: Kernel, a: float, delta: float) -> float:
    """Overlap integral of ``K(t - a*delta)`` with ``K(t + a*delta)``.

    Equals ``nu_moment(kernel, 0, 2)`` at zero separation and vanishes for
    compact kernels once the copies are ``2*radius`` apart.
    """
    c = abs(a * delta)
    pdf, R = kernel.pdf, kernel.radius
    if kernel.compact:
        lo, hi = c - R, R - c
        if lo >= hi:
            return 0.0
    else:
        lo, hi = -R, R
    return _quad(lambda t: float(pdf(t - c)) * float(pdf(t + c)), lo, hi)


@lru_cache(maxsize=None)
def c_delta(kernel: Kernel, delta: float) -> float:
    """First-order overlap curve: variance removed by the basic combination.

    Three-term form ``1.5*C(0,d) - 2*C(0.5,d) + 0.5*C(1,d)``; it agrees with
    the squared-difference form :func:`c_delta_quadform` and is nonnegative,
    reaching ``1.5 * nu_02`` once a compact kernel's copies separate fully.
    """
    nu02 = nu_moment(kernel, 0, 2)
    return 1.5 * nu02 - 2.0 * overlap_c(kernel, 0.5, delta) \
        + 0.5 * overlap_c(kernel, 1.0, delta)


def c_delta_quadform(kernel: Kernel, delta: float) -> float:
    """Cross-check oracle for :func:`c_delta`.

    Integrates ``{K(x) - K(x+d)/2 - K(x-d)/2}^2`` directly.
    """
    pdf, R = kernel.pdf, kernel.radius
    d = float(delta)
    lo, hi = -R - d, R + d

    def f(x):
        return (float(pdf(x)) - 0.5 * float(pdf(x + d)) - 0.5 * float(pdf(x - d))) ** 2

    return _quad(f, lo, hi, breakpoints=(-R, R, -R - d, R - d, -R + d, R + d))


@lru_cache(maxsize=None)
def d_delta(kernel: Kernel, delta: float) -> float:
    """Second-order overlap curve: extra variance removed by two-sided averaging.

    Nonnegative, zero at ``delta = 0``, and equal to ``(5/8) * nu_02`` for
    compact kernels once ``delta >= 2 / (sqrt(2) - 1)``.
    """
    nu02 = nu_moment(kernel, 0, 2)
    half = delta / 2.0
    bracket = (
        4.0 * (1.0 + _SQRT2) * overlap_c(kernel, _SQRT2 - 1.0, half)
        + (3.0 + 2.0 * _SQRT2) * overlap_c(kernel, 2.0 - _SQRT2, half)
        + 2.0 * overlap_c(kernel, _SQRT2, half)
        + 4.0 * (1.0 - _SQRT2) * overlap_c(kernel, _SQRT2 + 1.0, half)
        + (3.0 - 2.0 * _SQRT2) * overlap_c(kernel, _SQRT2 + 2.0, half)
    )
    return nu02 - c_delta(kernel, delta) / 4.0 - bracket / 16.0


@lru_cache(maxsize=None)
def nu_tilde(kernel: Kernel, l: int, r: float, delta: float) -> float:
    """Moment of the effective kernel of the three-point combination.

    Integrates ``{sum_i A_i(r) K(s + i*delta)}^l`` for ``l`` in {2, 3}.  For
    ``l = 2`` the value equals ``nu_02 - r^2(1 - r^2) * c_delta`` analytically;
    this function always takes the quadrature route so the identity stays an
    independent check.
    """
    if l not in (2, 3):
        raise ValueError(f"l must be 2 or 3, got {l}")
    a0, a1, a2 = coeffs_a(r)
    pdf, R = kernel.pdf, kernel.radius
    d = float(delta)

    def f(s):
        return (a0 * float(pdf(s)) + a1 * float(pdf(s + d))
                + a2 * float(pdf(s + 2.0 * d))) ** l

    lo, hi = -R - 2.0 * d, R
    pts = (-R, R, -R - d, R - d, -R - 2.0 * d, R - 2.0 * d)
    return _quad(f, lo, hi, breakpoints=pts)


@lru_cache(maxsize=None)
def tau(kernel: Kernel, delta: float, r: float, k: float) -> float:
    """Variance factor of the generalised combination with anchor spacing ``k``.

    The three underlying fits sit at lags ``0``, ``k*delta`` and
    ``(k+1)*delta``; ``k = 1`` recovers the equally spaced case and is
    excluded (use :func:`nu_tilde` with ``l = 2`` instead).
    """
    b0, b1, b2 = coeffs_b(r, k)
    nu02 = nu_moment(kernel, 0, 2)
    half = delta / 2.0
    return (
        nu02 * (b0 * b0 + b1 * b1 + b2 * b2)
        + 2.0 * b0 * b1 * overlap_c(kernel, k, half)
        + 2.0 * b0 * b2 * overlap_c(kernel, k + 1.0, half)
        + 2.0 * b1 * b2 * overlap_c(kernel, 1.0, half)
    )


@dataclass(frozen=True)
class KernelFunctionals:
    """The four moment functionals used throughout the asymptotic formulas."""

    nu20: float
    nu02: float
    nu21: float
    nu03: float


def functionals(kernel: Kernel) -> KernelFunctionals:
    return KernelFunctionals(
        nu20=nu_moment(kernel, 2, 1),
        nu02=nu_moment(kernel, 0, 2),
        nu21=nu_moment(kernel, 2, 2),
        nu03=nu_moment(kernel, 0, 3),
    )


# ---------------------------------------------------------------------------
# closed forms (cross-check oracles, not the primary computation path)

#: exact values of (nu20, nu02, nu21, nu03) per built-in kernel
CLOSED_MOMENTS = {
    "uniform": (1.0 / 3.0, 0.5, 1.0 / 6.0, 0.25),
    "epanechnikov": (0.2, 0.6, 3.0 / 35.0, 27.0 / 70.0),
    "normal": (
        1.0,
        1.0 / (2.0 * math.sqrt(math.pi)),
        1.0 / (4.0 * math.sqrt(math.pi)),
        1.0 / (2.0 * math.pi * math.sqrt(3.0)),
    ),
}


def closed_autocorrelation(name: str, lag: float) -> float:
    """Exact overlap of two copies of a built-in kernel separated by ``lag``."""
    z = abs(float(lag))
    if name == "uniform":
        return 0.25 * (2.0 - z) if z < 2.0 else 0.0
    if name == "epanechnikov":
        if z >= 2.0:
            return 0.0
        return (3.0 / 160.0) * (2.0 - z) ** 3 * (z * z + 6.0 * z + 4.0)
    if name == "normal":
        return math.exp(-z * z / 4.0) / (2.0 * math.sqrt(math.pi))
    raise ValueError(f"no closed autocorrelation for kernel {name!r}")

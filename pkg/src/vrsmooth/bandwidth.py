"""Oracle bandwidths, constant-factor adjustments and relative efficiencies.

The optimal local bandwidth of the plain estimator depends on the curvature
``m''(x)``, the design density ``f(x)``, the noise level and the kernel
moments.  The variance-reduced estimators inherit it through a constant
multiplier that involves only the kernel and the bin width, which is also
the ratio behind their asymptotic relative efficiency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCurvatureError
from .kernels import Kernel, c_delta, d_delta, nu_moment


@dataclass(frozen=True)
class LocalOracle:
    """Pointwise truth needed by the bandwidth formulas."""

    m2: float
    f: float
    sigma2: float
    n: int

    def __post_init__(self):
        if self.f <= 0.0:
            raise ValueError(f"design density must be positive, got {self.f}")
        if self.sigma2 < 0.0:
            raise ValueError(f"noise variance must be nonnegative, got {self.sigma2}")
        if self.n < 1:
            raise ValueError(f"sample size must be positive, got {self.n}")


def variance_factor(kernel: Kernel, variant: str, delta: float = 0.0,
                    r: float | None = None) -> float:
    """Asymptotic variance constant of an estimator variant.

    ``nu_02`` for the plain fit, reduced by the overlap curves for the
    combined variants.  Must stay positive for every admissible input; a
    nonpositive value indicates an internal inconsistency.
    """
    nu02 = nu_moment(kernel, 0, 2)
    v = variant.lower()
    if v == "ll":
        out = nu02
    elif v == "q":
        if r is None:
            raise ValueError("variant 'q' needs an explicit shift parameter r")
        out = nu02 - r * r * (1.0 - r * r) * c_delta(kernel, delta)
    elif v in ("plus", "minus"):
        out = nu02 - c_delta(kernel, delta) / 4.0
    elif v == "avg":
        out = nu02 - c_delta(kernel, delta) / 4.0 - d_delta(kernel, delta) / 2.0
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if out <= 0.0:
        raise RuntimeError(
            f"variance factor {out!r} is not positive for "
            f"variant={variant!r}, delta={delta!r}"
        )
    return out


def h0_local(oracle: LocalOracle, kernel: Kernel) -> float:
    """Pointwise bandwidth minimising the leading mean squared error."""
    if oracle.m2 == 0.0:
        raise DegenerateCurvatureError(
            "zero curvature: the optimal bandwidth is unbounded")
    if oracle.sigma2 == 0.0:
        raise ValueError("noiseless oracle has no variance-bias trade-off")
    nu02 = nu_moment(kernel, 0, 2)
    nu20 = nu_moment(kernel, 2, 1)
    num = oracle.sigma2 * nu02
    den = oracle.n * oracle.f * oracle.m2**2 * nu20**2
    return (num / den) ** 0.2


def adjust_h(h0: float, kernel: Kernel, delta: float, variant: str,
             r: float | None = None) -> float:
    """Rescale a plain-estimator bandwidth for a variance-reduced variant.

    The multiplier ``(V / nu_02)^(1/5)`` is the same for local and global
    (integrated) criteria, and never exceeds one.
    """
    if h0 <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {h0}")
    nu02 = nu_moment(kernel, 0, 2)
    factor = (variance_factor(kernel, variant, delta, r) / nu02) ** 0.2
    return factor * h0


def amse(oracle: LocalOracle, kernel: Kernel, variant: str,
         delta: float = 0.0, r: float | None = None) -> float:
    """Optimal leading-order mean squared error at the oracle point."""
    if oracle.m2 == 0.0:
        raise DegenerateCurvatureError(
            "zero curvature: the optimal bandwidth is unbounded")
    if oracle.sigma2 == 0.0:
        raise ValueError("noiseless oracle has no variance-bias trade-off")
    nu20 = nu_moment(kernel, 2, 1)
    v = variance_factor(kernel, variant, delta, r)
    base = (oracle.m2**2 * nu20**2 * oracle.sigma2**4 / oracle.f**4) ** 0.2
    return 1.25 * base * v**0.8 * oracle.n ** (-0.8)


def gamma_q(kernel: Kernel, delta: float) -> float:
    """Efficiency of the optimal-shift combination relative to the plain fit."""
    nu02 = nu_moment(kernel, 0, 2)
    return (variance_factor(kernel, "plus", delta) / nu02) ** (-0.8)


def gamma_a(kernel: Kernel, delta: float) -> float:
    """Efficiency of the averaged combination relative to the plain fit."""
    nu02 = nu_moment(kernel, 0, 2)
    return (variance_factor(kernel, "avg", delta) / nu02) ** (-0.8)


def h0_global(n: int, kernel: Kernel, m2, f, sigma2: float,
              npts: int = 2001) -> float:
    """Global bandwidth minimising the integrated leading-order error.

    ``m2`` and ``f`` are callables on [0, 1]; the curvature integral is
    computed by the trapezoid rule on ``npts`` points.
    """
    if sigma2 <= 0.0:
        raise ValueError("noise variance must be positive for a global bandwidth")
    xs = np.linspace(0.0, 1.0, npts)
    curv = np.trapezoid(np.asarray(m2(xs)) ** 2 * np.asarray(f(xs)), xs)
    if curv <= 0.0:
        raise DegenerateCurvatureError(
            "zero integrated curvature: the optimal bandwidth is unbounded")
    nu02 = nu_moment(kernel, 0, 2)
    nu20 = nu_moment(kernel, 2, 1)
    return (sigma2 * nu02 / (n * nu20**2 * curv)) ** 0.2

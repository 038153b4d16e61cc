"""One-sided confidence intervals and coverage-accuracy diagnostics.

The studentised estimators are asymptotically standard normal under
undersmoothing, giving one-sided intervals whose half-width scale involves
the local residual variance, the design density estimate and the variance
constant of the chosen estimator.  The expansion of the coverage error has
two leading terms, of orders ``(n h^5)^(1/2)`` and ``(n h)^(-1/2)``; the
ratio of the optimised coverage errors of the plain and combined intervals
reduces to a pure kernel-functional expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .bandwidth import variance_factor
from .errors import SingularDesignError, SingularRatioError
from .estimators import estimate_curve
from .kernels import Kernel, nu_moment, nu_tilde
from .smoother import Dataset, SmootherConfig, local_linear, sigma_hat_sq, w_ijk


def z_quantile(beta: float) -> float:
    """Standard normal quantile."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {beta}")
    return float(ndtri(beta))


def _phi(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class IntervalResult:
    """One-sided interval ``(lower, inf)`` for the regression level."""

    lower: float
    beta: float
    half_width_scale: float


@dataclass(frozen=True)
class CoveragePrediction:
    """Two-term expansion of the coverage probability of a one-sided interval."""

    leading: float
    h2_term: float
    nh_term: float

    @property
    def prediction(self) -> float:
        return self.leading + self.h2_term + self.nh_term


def interval(data: Dataset, cfg: SmootherConfig, x: float, beta: float,
             variant: str = "ll", r: float | None = None,
             delta: float = 0.0) -> IntervalResult:
    """One-sided confidence interval at ``x`` from the chosen estimator.

    The combined variants use their own (smaller) variance constant, with
    the bin width already adjusted for the boundary, so their intervals are
    never wider than the plain one on the same data.
    """
    z = z_quantile(beta)
    s2 = sigma_hat_sq(data, cfg, x)
    w010 = w_ijk(data, cfg, x, 0, 1, 0)
    if variant.lower() == "ll":
        value = local_linear(data, cfg, x)
        nu = nu_moment(cfg.kernel, 0, 2)
    else:
        vals, effs = estimate_curve(data, cfg, variant, delta=delta, r=r,
                                    points=np.array([float(x)]))
        value = float(vals[0])
        if math.isnan(value):
            raise SingularDesignError(
                f"singular smoothing window at a grid point of x={x!r}")
        nu = variance_factor(cfg.kernel, variant, float(effs[0]), r)
    scale = math.sqrt(s2 / w010) * math.sqrt(nu) / math.sqrt(data.n * cfg.h)
    return IntervalResult(lower=value - z * scale, beta=beta,
                          half_width_scale=scale)


def coverage_prediction(kernel: Kernel, n: int, h: float, beta: float,
                        m2: float, f: float, sigma: float, v3: float,
                        variant: str = "ll", r: float | None = None,
                        delta: float = 0.0) -> CoveragePrediction:
    """Predicted coverage of the one-sided interval, term by term.

    The ``h2_term`` carries the smoothing-bias effect and vanishes at the
    level whose quantile squares to 3; the ``nh_term`` carries the third
    conditional moment ``v3`` and vanishes for symmetric noise.
    """
    z = z_quantile(beta)
    phi = _phi(z)
    v = variant.lower()
    if v == "ll":
        nu2 = nu_moment(kernel, 0, 2)
        nu3 = nu_moment(kernel, 0, 3)
    elif v in ("q", "plus", "minus"):
        rr = {"plus": math.sqrt(0.5), "minus": -math.sqrt(0.5)}.get(v, r)
        if rr is None:
            raise ValueError("variant 'q' needs an explicit shift parameter r")
        nu2 = nu_tilde(kernel, 2, rr, delta)
        nu3 = nu_tilde(kernel, 3, rr, delta)
    else:
        raise ValueError(f"no coverage expansion for variant {variant!r}")
    nu21 = nu_moment(kernel, 2, 2)
    h2 = (math.sqrt(n * h**5) * 0.25 * nu21 / math.sqrt(nu2) / sigma
          * math.sqrt(f) * m2 * (z * z - 3.0) * phi)
    nh = (-1.0 / math.sqrt(n * h) / 6.0 * nu2 ** (-1.5) / sigma**3
          / math.sqrt(f) * v3 * (nu3 * (z * z - 1.0) - 3.0 * nu2**2 * z * z)
          * phi)
    return CoveragePrediction(leading=beta, h2_term=h2, nh_term=nh)


def ratio_brackets(kernel: Kernel, delta: float, r: float,
                   beta: float) -> tuple[float, float]:
    """The two bracket terms entering the coverage-accuracy ratio."""
    z2 = z_quantile(beta) ** 2
    nu02 = nu_moment(kernel, 0, 2)
    nu03 = nu_moment(kernel, 0, 3)
    nt02 = nu_tilde(kernel, 2, r, delta)
    nt03 = nu_tilde(kernel, 3, r, delta)
    num = nu03 * (z2 - 1.0) - 3.0 * nu02**2 * z2
    den = nt03 * (z2 - 1.0) - 3.0 * nt02**2 * z2
    return num, den


def sign_conditions_hold(kernel: Kernel, delta: float, r: float, beta: float,
                         m2: float) -> tuple[bool, bool]:
    """Whether each optimised coverage error has the sign structure that
    makes the accuracy ratio meaningful at a point with curvature ``m2``."""
    z2 = z_quantile(beta) ** 2
    num, den = ratio_brackets(kernel, delta, r, beta)
    lead = m2 * (z2 - 3.0)
    if lead == 0.0:
        return False, False
    return num / lead < 0.0, den / lead < 0.0


def coverage_ratio(kernel: Kernel, delta: float, r: float,
                   beta: float) -> float:
    """Ratio of optimised one-sided coverage errors, plain over combined.

    Values above one mean the combined interval attains a smaller coverage
    error at its own best bandwidth.  Computed unconditionally from kernel
    functionals; see :func:`sign_conditions_hold` for the pointwise premise.
    """
    num, den = ratio_brackets(kernel, delta, r, beta)
    scale = nu_moment(kernel, 0, 2) ** 2
    if abs(den) <= 1e-9 * scale or abs(num) <= 1e-9 * scale:
        raise SingularRatioError(
            f"coverage-error bracket vanishes near beta={beta!r}, delta={delta!r}")
    frac = num / den
    if frac <= 0.0:
        raise SingularRatioError(
            f"coverage-error brackets have opposite signs at beta={beta!r}, "
            f"delta={delta!r}")
    nt02 = nu_tilde(kernel, 2, r, delta)
    nu02 = nu_moment(kernel, 0, 2)
    return frac ** (5.0 / 6.0) * (nt02 / nu02) ** (4.0 / 3.0)

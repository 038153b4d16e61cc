"""Combination coefficients, grid geometry and the boundary-aware bin width.

A variance-reduced estimate at ``x`` combines three local fits at equally
spaced points ``alpha_j = x - (r + 1 - j) * omega``, ``j = 0, 1, 2``, with
spacing ``omega = delta * h``.  The coefficients depend only on the shift
parameter ``r`` and satisfy the moment conditions that keep the leading
bias unchanged while reproducing quadratics exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

#: shift magnitude maximising the variance reduction factor r^2 (1 - r^2)
R_OPTIMAL = math.sqrt(0.5)

#: how far (in units of omega) the widest grid point of the two-sided
#: estimators reaches from x; drives the boundary bin-width rule
BOUNDARY_REACH = 1.0 + R_OPTIMAL

VARIANTS = ("ll", "q", "plus", "minus", "avg")


def coeffs_a(r: float) -> tuple[float, float, float]:
    """Quadratic-interpolation coefficients ``(A_0, A_1, A_2)`` for shift ``r``.

    They sum to one and annihilate the first and second centred moments of
    the grid, so any quadratic is reproduced exactly.
    """
    if not -1.0 < r < 1.0:
        raise ValueError(f"shift parameter must satisfy |r| < 1, got {r}")
    return r * (r - 1.0) / 2.0, 1.0 - r * r, r * (r + 1.0) / 2.0


def coeffs_b(r: float, k: float) -> tuple[float, float, float]:
    """Coefficients for the generalised grid with anchor spacing ``k != 1``.

    The grid points sit at offsets ``(-(k + r), -r, 1 - r)`` times the bin
    width, so the pairwise gaps are ``k``, ``k + 1`` and ``1``; the
    coefficients again sum to one and kill the first two moments, and reduce
    to :func:`coeffs_a` as ``k`` approaches 1.
    """
    if k <= 0.0 or k == 1.0:
        raise ValueError(f"anchor spacing must be positive and != 1, got {k}")
    return (
        r * (r - 1.0) / (k * (k + 1.0)),
        -(r + k) * (r - 1.0) / k,
        r * (r + k) / (k + 1.0),
    )


@dataclass(frozen=True)
class GridOffsets:
    """The three evaluation points around ``x`` and their spacing."""

    alpha: tuple[float, float, float]
    omega: float


def grid_offsets(x: float, r: float, delta: float, h: float) -> GridOffsets:
    """Evaluation points ``alpha_j = x - (r + 1 - j) * delta * h``."""
    if h <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    if delta < 0.0:
        raise ValueError(f"bin width must be nonnegative, got {delta}")
    omega = delta * h
    return GridOffsets(
        alpha=tuple(x - (r + 1.0 - j) * omega for j in range(3)),
        omega=omega,
    )


def boundary_delta(x: float, delta: float, h: float,
                   reach: float = BOUNDARY_REACH) -> float:
    """Bin width actually usable at ``x`` on the unit interval.

    Shrinks ``delta`` so that every grid point within ``reach * omega`` of
    ``x`` stays inside [0, 1]; at the boundary itself the width collapses to
    zero and the combined estimator degenerates to the plain local fit.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if h <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return min(delta, x / (reach * h), (1.0 - x) / (reach * h))


@dataclass(frozen=True)
class CombinerSpec:
    """A single three-point combination: shift, bin width and coefficients."""

    r: float
    delta: float
    variant: str

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return coeffs_a(self.r)


def resolve_variant(variant: str, r: float | None = None,
                    delta: float = 0.0) -> tuple[tuple[float, CombinerSpec], ...]:
    """Decompose an estimator variant into weighted combinations.

    Returns an empty tuple for the plain local linear fit, one weighted
    :class:`CombinerSpec` for the single-combination variants, and the two
    half-weighted mirror combinations for the averaged estimator.
    """
    v = variant.lower()
    if v == "ll":
        return ()
    if v == "q":
        if r is None:
            raise ValueError("variant 'q' needs an explicit shift parameter r")
        return ((1.0, CombinerSpec(float(r), delta, "q")),)
    if v == "plus":
        return ((1.0, CombinerSpec(R_OPTIMAL, delta, "plus")),)
    if v == "minus":
        return ((1.0, CombinerSpec(-R_OPTIMAL, delta, "minus")),)
    if v == "avg":
        return (
            (0.5, CombinerSpec(R_OPTIMAL, delta, "plus")),
            (0.5, CombinerSpec(-R_OPTIMAL, delta, "minus")),
        )
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")

"""Benchmark scenarios: regression functions, designs and noise models.

Three test regressions on the unit interval (a bimodal bump mixture, a
steep peak on a linear trend, and a fast sine), three covariate designs
(uniform and two truncated normals) and homoscedastic Gaussian noise whose
base level is matched to each regression's scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from .smoother import Dataset


@dataclass(frozen=True)
class Regression:
    """A smooth test function with its first two derivatives."""

    name: str
    m: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    sigma0: float


def _bump(x, a, c):
    return np.exp(-a * (x - c) ** 2)


def _bimodal(x):
    return 0.3 * _bump(x, 16.0, 0.25) + 0.7 * _bump(x, 64.0, 0.75)


def _bimodal_d1(x):
    return (0.3 * -32.0 * (x - 0.25) * _bump(x, 16.0, 0.25)
            + 0.7 * -128.0 * (x - 0.75) * _bump(x, 64.0, 0.75))


def _bimodal_d2(x):
    u, v = x - 0.25, x - 0.75
    return (0.3 * (1024.0 * u * u - 32.0) * _bump(x, 16.0, 0.25)
            + 0.7 * (16384.0 * v * v - 128.0) * _bump(x, 64.0, 0.75))


def _linpeak(x):
    return 2.0 - 5.0 * x + 5.0 * _bump(x, 400.0, 0.5)


def _linpeak_d1(x):
    return -5.0 + 5.0 * -800.0 * (x - 0.5) * _bump(x, 400.0, 0.5)


def _linpeak_d2(x):
    u = x - 0.5
    return 5.0 * (640000.0 * u * u - 800.0) * _bump(x, 400.0, 0.5)


def _sine(x):
    return np.sin(5.0 * np.pi * x)


def _sine_d1(x):
    return 5.0 * np.pi * np.cos(5.0 * np.pi * x)


def _sine_d2(x):
    return -25.0 * np.pi**2 * np.sin(5.0 * np.pi * x)


REGRESSIONS = {
    "bimodal": Regression("bimodal", _bimodal, _bimodal_d1, _bimodal_d2, 0.1),
    "linear_peak": Regression("linear_peak", _linpeak, _linpeak_d1, _linpeak_d2,
                              math.sqrt(0.5)),
    "sine": Regression("sine", _sine, _sine_d1, _sine_d2, 0.5),
}


@dataclass(frozen=True)
class Design:
    """A covariate distribution on the unit interval."""

    name: str
    mu: float | None  # None marks the uniform design
    sd: float | None

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.mu is None:
            return np.ones_like(x)
        a = ndtr((0.0 - self.mu) / self.sd)
        b = ndtr((1.0 - self.mu) / self.sd)
        z = (x - self.mu) / self.sd
        return np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * self.sd) / (b - a)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        if self.mu is None:
            return u
        # inverse-CDF restricted to (0, 1)
        a = ndtr((0.0 - self.mu) / self.sd)
        b = ndtr((1.0 - self.mu) / self.sd)
        return self.mu + self.sd * ndtri(a + u * (b - a))


DESIGNS = {
    "uniform01": Design("uniform01", None, None),
    "trunc_normal_a": Design("trunc_normal_a", 0.5, 0.5),
    "trunc_normal_b": Design("trunc_normal_b", 0.0, 1.0),
}


@dataclass(frozen=True)
class Scenario:
    """Regression, design and noise level of one simulation setting."""

    regression: Regression
    design: Design
    noise_k: float = 1.0

    def __post_init__(self):
        if self.noise_k < 0.0:
            raise ValueError(f"noise multiplier must be nonnegative, got {self.noise_k}")

    @property
    def sigma(self) -> float:
        return self.noise_k * self.regression.sigma0

    @property
    def label(self) -> str:
        return f"{self.regression.name}/{self.design.name}/k={self.noise_k:g}"


def get_scenario(regression: str, design: str = "uniform01",
                 noise_k: float = 1.0) -> Scenario:
    try:
        reg = REGRESSIONS[regression]
    except KeyError:
        raise ValueError(
            f"unknown regression {regression!r}; expected one of {sorted(REGRESSIONS)}"
        ) from None
    try:
        des = DESIGNS[design]
    except KeyError:
        raise ValueError(
            f"unknown design {design!r}; expected one of {sorted(DESIGNS)}"
        ) from None
    return Scenario(reg, des, float(noise_k))


def sample(scenario: Scenario, n: int, rng: np.random.Generator) -> Dataset:
    """Draw ``n`` observations: covariates first, then one noise vector.

    The draw order is part of the reproducibility contract for a given
    generator state.
    """
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    xs = scenario.design.sample(rng, n)
    noise = rng.standard_normal(n)
    ys = scenario.regression.m(xs) + scenario.sigma * noise
    return Dataset(xs, ys)

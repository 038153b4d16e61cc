"""Exception types raised by the numeric layers.

Argument-validation problems raise plain ``ValueError``; the classes here
mark conditions that depend on the data or on the requested configuration.
"""


class VRSmoothError(Exception):
    """Base class for vrsmooth-specific failures."""


class SingularDesignError(VRSmoothError):
    """Unridged local fit with a numerically singular normal equation."""


class EmptyWindowError(VRSmoothError):
    """No kernel mass in the smoothing window at the requested point."""


class DegenerateCurvatureError(VRSmoothError):
    """Zero curvature supplied to a bandwidth rule; the optimum is unbounded."""


class SingularRatioError(VRSmoothError):
    """Coverage-accuracy ratio undefined: a bracket term vanishes."""


class ConfigError(VRSmoothError):
    """Invalid simulation or reporting configuration."""

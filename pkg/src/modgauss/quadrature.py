"""Adaptive quadrature for complex integrands on finite and half-infinite ranges.

The heavy lifting is done by :func:`scipy.integrate.quad_vec` (adaptive
Gauss-Kronrod).  This module adds the tolerance bookkeeping and the
exponential-tail truncation used by every integral in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad_vec

from .errors import QuadratureError


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for adaptive quadrature.

    Attributes
    ----------
    abs_tol, rel_tol
        Target absolute and relative error of the integral.
    max_subdivisions
        Upper bound on the number of subintervals.
    truncation_threshold
        Integrand magnitude below which a decaying tail is cut off.
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_subdivisions: int = 2000
    truncation_threshold: float = 1e-18

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")
        if not self.truncation_threshold > 0:
            raise ValueError("truncation_threshold must be positive")


DEFAULT_CONFIG = QuadratureConfig()


def integrate(f: Callable[[float], complex], a: float, b: float,
              cfg: QuadratureConfig = DEFAULT_CONFIG,
              points=None) -> tuple[complex, float]:
    """Integrate ``f`` over ``[a, b]``; return ``(value, error_estimate)``.

    Raises :class:`QuadratureError` when the estimate exceeds the tolerance.
    """
    value, err, info = quad_vec(f, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                limit=cfg.max_subdivisions, points=points,
                                full_output=True)
    value = complex(value)
    # status 2 means the rounding-error floor was reached; the estimate
    # below decides whether the result is still acceptable.
    if info.status == 1 or not np.isfinite(value):
        raise QuadratureError(
            f"quadrature on [{a}, {b}] failed (status {info.status}, error {err:.3g})")
    if err > max(cfg.abs_tol, cfg.rel_tol * abs(value)) * 10:
        raise QuadratureError(f"error estimate {err:.3g} above tolerance on [{a}, {b}]")
    return value, float(err)


def truncation_point(envelope: Callable[[float], float], start: float,
                     threshold: float) -> float:
    """Smallest point of the doubling sequence ``start * 2**k`` where ``envelope < threshold``."""
    s = max(start, 1.0)
    for _ in range(200):
        if envelope(s) < threshold:
            return s
        s *= 2.0
    raise QuadratureError("integrand does not decay; cannot truncate the range")


def integrate_decaying(f: Callable[[float], complex], rate: float, scale: float,
                       cfg: QuadratureConfig = DEFAULT_CONFIG,
                       breakpoints=(1.0, 4.0)) -> tuple[complex, float]:
    """Integrate ``f`` over ``[0, inf)`` for ``|f(s)| <= scale * exp(-rate * s)``.

    The range is cut at the first point where the envelope falls below
    ``cfg.truncation_threshold``; the analytic tail bound ``envelope / rate`` is
    added to the returned error estimate.
    """
    if rate <= 0:
        raise QuadratureError("decay rate must be positive")

    def envelope(s):
        return scale * math.exp(-rate * s)

    cut = truncation_point(envelope, 8.0 / rate, cfg.truncation_threshold)
    pts = [p for p in breakpoints if p < cut]
    value, err = integrate(f, 0.0, cut, cfg, points=pts or None)
    return value, err + envelope(cut) / rate

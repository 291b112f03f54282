"""The function Upsilon that builds every beta-ensemble limiting function.

``upsilon_quadrature`` evaluates the defining Barnes-G / log-Gamma / Binet
integral expression; the ``upsilon_closed_*`` functions are the finite closed
forms available when beta/2 is an integer, the reciprocal of an integer, or a
general rational.  They are computed independently and serve as oracles for
one another.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import special

from .errors import DomainError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_decaying
from .specfun import (
    LOG_2PI,
    _log_barnes_g_continued,
    _log_gamma_continued,
    binet_phi,
    log_barnes_g,
    log_gamma,
)


@dataclass(frozen=True)
class BetaParam:
    """Dyson index ``beta`` with an optional rational form ``beta/2 = p/q``.

    The rational form must match ``beta/2`` to double precision (``beta = 2/3``
    is stored as the nearest float, so exact equality is impossible).
    """

    beta: float
    p: Optional[int] = None
    q: Optional[int] = None

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if (self.p is None) != (self.q is None):
            raise ValueError("p and q must be given together")
        if self.p is not None:
            if self.p < 1 or self.q < 1:
                raise ValueError("p and q must be positive integers")
            if abs(self.p / self.q - self.beta / 2) > 4e-16 * self.beta:
                raise ValueError(f"p/q = {self.p}/{self.q} does not equal beta/2")

    @classmethod
    def of(cls, beta) -> "BetaParam":
        """Build from a number, detecting rational values of beta/2 with denominator <= 64."""
        if isinstance(beta, BetaParam):
            return beta
        if isinstance(beta, Fraction):
            half = beta / 2
            return cls(float(beta), half.numerator, half.denominator)
        beta = float(beta)
        half = Fraction(beta / 2).limit_denominator(64)
        if abs(half.numerator / half.denominator - beta / 2) <= 4e-16 * beta:
            return cls(beta, half.numerator, half.denominator)
        return cls(beta)

    @property
    def half(self) -> float:
        """beta' = beta / 2."""
        return self.beta / 2.0

    @property
    def rational(self) -> Optional[tuple[int, int]]:
        return None if self.p is None else (self.p, self.q)


def _scalar(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("argument must be finite")
    return z


def _cexpm1(w):
    """Accurate ``exp(w) - 1`` for complex arrays."""
    x, y = w.real, w.imag
    return (np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2) + 1j * np.exp(x) * np.sin(y)


def _kernel_ratio(s, z, bp):
    """``(e^{-sz} - 1) / (e^{s bp} - 1)`` without overflow or cancellation."""
    s = np.asarray(s, dtype=float)
    out = np.empty(s.shape, dtype=complex)
    small = s * bp <= 30.0
    ss = s[small]
    out[small] = _cexpm1(-ss * z) / np.expm1(ss * bp)
    sb = s[~small]
    damp = np.exp(-sb * bp)
    out[~small] = (np.exp(-sb * (z + bp)) - damp) / (1.0 - damp)
    return out


def upsilon_integral(z, beta, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """The Binet-kernel integral ``int_0^inf phi(s)(e^{-sz}-1)/(e^{s beta/2}-1) ds``."""
    z = _scalar(z)
    bp = BetaParam.of(beta).half
    if z == 0:
        return 0j
    rate = min(z.real + bp, bp)
    # |integrand| <= (1/12) * (e^{-s(Re z+bp)} + e^{-s bp}) / (1 - e^{-s bp}) for s >= 1.
    scale = (1.0 / 6.0) / (-math.expm1(-bp)) * max(1.0, math.exp(-z.real))
    value, _ = integrate_decaying(lambda s: binet_phi(s) * _kernel_ratio(s, z, bp),
                                  rate, scale, cfg)
    return value


def upsilon_quadrature(z, beta, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """Upsilon(z) from its Barnes-G / log-Gamma / Binet-integral expression.

    Defined for ``Re z > -beta/2``.
    """
    z = _scalar(z)
    bp = BetaParam.of(beta).half
    if z.real <= -bp:
        raise DomainError(f"Upsilon requires Re(z) > -beta/2 = {-bp}")
    if z == 0:
        return 0j
    w = z / bp
    return (bp * log_barnes_g(w, cfg) - (z - 0.5) * log_gamma(w + 1.0)
            + upsilon_integral(z, beta, cfg) + z * z / (2.0 * bp) + 0.5 * z)


def _check_strip(z: complex, bound: float):
    if z.real <= -bound:
        raise DomainError(f"Re(z) must exceed {-bound}")


def upsilon_closed_integer(z, halfbeta: int) -> complex:
    """Closed form of Upsilon when beta/2 is a positive integer ``halfbeta``."""
    z = _scalar(z)
    k = int(halfbeta)
    if k != halfbeta or k < 1:
        raise DomainError("halfbeta must be a positive integer")
    _check_strip(z, k)
    if z == 0:
        return 0j
    beta = 2.0 * k
    out = (z / beta) * LOG_2PI + (z * z / beta) * math.log(k)
    out -= (2.0 / beta) * complex(_log_barnes_g_continued(z))
    m = np.arange(1, k)
    if m.size:
        terms = (m / k) * (special.loggamma(m / k) - _log_gamma_continued((m + z) / k))
        out += math.fsum(terms.real) + 1j * math.fsum(terms.imag)
    return complex(out)


def upsilon_closed_inv_integer(z, q: int) -> complex:
    """Closed form of Upsilon when beta/2 = 1/q."""
    z = _scalar(z)
    q = int(q)
    if q < 1:
        raise DomainError("q must be a positive integer")
    _check_strip(z, 1.0 / q)
    if z == 0:
        return 0j
    out = z * ((0.5 - 0.5 * q) * math.log(1.0 / q) + 0.5 * LOG_2PI)
    out -= complex(log_barnes_g(q * z)) / q
    m = np.arange(1, q)
    if m.size:
        terms = (m / q - 1.0) * (special.loggamma(m / q) - log_gamma(m / q + z))
        out += math.fsum(terms.real) + 1j * math.fsum(terms.imag)
    return complex(out)


def upsilon_closed_rational(z, p: int, q: int) -> complex:
    """Closed form of Upsilon when beta/2 = p/q (double sum over l and m)."""
    z = _scalar(z)
    p, q = int(p), int(q)
    if p < 1 or q < 1:
        raise DomainError("p and q must be positive integers")
    _check_strip(z, p / q)
    if z == 0:
        return 0j
    out = z * ((0.5 - 0.5 * q) * math.log(1.0 / q) + 0.5 * LOG_2PI)
    parts = []
    for l in range(p):
        parts.append(-(complex(log_barnes_g((z + l) * q / p))
                       - complex(log_barnes_g(l * q / p))) / q)
        for m in range(1, q):
            parts.append((m / q - 1.0) * (complex(log_gamma(m / q + l / p))
                                          - complex(log_gamma(m / q + (z + l) / p))))
    out += math.fsum(c.real for c in parts) + 1j * math.fsum(c.imag for c in parts)
    return complex(out)


def upsilon_closed(z, beta) -> complex:
    """Dispatch to the most specific closed form for a rational beta."""
    b = BetaParam.of(beta)
    if b.rational is None:
        raise DomainError("closed forms need a rational beta/2")
    p, q = b.rational
    if q == 1:
        return upsilon_closed_integer(z, p)
    if p == 1:
        return upsilon_closed_inv_integer(z, q)
    return upsilon_closed_rational(z, p, q)


def upsilon_shifted(z, delta, beta, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """``Upsilon_delta(z) = Upsilon(z + delta) - Upsilon(delta)``."""
    z, delta = _scalar(z), _scalar(delta)
    bp = BetaParam.of(beta).half
    if delta.real <= -bp or (z + delta).real <= -bp:
        raise DomainError("both delta and z + delta must satisfy Re > -beta/2")
    if z == 0:
        return 0j
    return upsilon_quadrature(z + delta, beta, cfg) - upsilon_quadrature(delta, beta, cfg)


def upsilon_gue(z, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """GUE limiting function ``log(Gamma(1/2)/Gamma((z+1)/2) * G(1/2)^2 / G((z+1)/2)^2)``."""
    z = _scalar(z)
    if z.real <= -1:
        raise DomainError("upsilon_gue requires Re(z) > -1")
    if z == 0:
        return 0j
    w = 0.5 * (z + 1.0)
    log_g_half = complex(log_barnes_g(-0.5, cfg))
    return (0.5 * math.log(math.pi) - complex(log_gamma(w))
            + 2.0 * log_g_half - 2.0 * complex(log_barnes_g(w - 1.0, cfg)))

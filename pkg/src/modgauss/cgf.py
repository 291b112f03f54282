"""Exact finite-n log-Mellin transforms and their mod-Gaussian expansions.

Each statistic is the logarithm of a random determinant (or characteristic
polynomial) whose Mellin transform is a finite product of Gamma ratios.  The
transforms here are sums of log-Gamma differences; nothing is ever
exponentiated, so ``n`` can be as large as memory allows.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from .errors import DomainError
from .upsilon import BetaParam, upsilon_gue, upsilon_quadrature

LOG2 = math.log(2.0)


class Kind(str, enum.Enum):
    GUE = "GUE"
    LAGUERRE = "Laguerre"
    GRAM = "Gram"
    JACOBI = "Jacobi"
    CIRCULAR = "Circular"
    CIRCULAR_JACOBI = "CircularJacobi"


def _floor_product(n: int, tau: float) -> int:
    # Round first so that e.g. 100 * 0.29 = 28.999999999999996 gives 29.
    return math.floor(round(n * tau, 9))


@dataclass(frozen=True)
class EnsembleSpec:
    """An ensemble together with its size and parameters."""

    kind: Kind
    n: int
    beta: BetaParam = field(default_factory=lambda: BetaParam.of(2))
    tau1: Optional[float] = None
    tau2: Optional[float] = None
    delta: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "beta", BetaParam.of(self.beta))
        object.__setattr__(self, "delta", complex(self.delta))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        if self.kind is Kind.GUE and self.beta.beta != 2:
            raise DomainError("GUE has beta = 2")
        if self.kind is Kind.JACOBI:
            if self.tau1 is None or self.tau2 is None or self.tau1 <= 0 or self.tau2 <= 0:
                raise DomainError("Jacobi needs tau1, tau2 > 0")
            if self.n1 < 1 or self.n2 < 1:
                raise DomainError("floor(n*tau1) and floor(n*tau2) must be at least 1")
        if self.kind is Kind.CIRCULAR and self.delta != 0:
            raise DomainError("Circular has delta = 0; use CircularJacobi")
        if self.kind is Kind.CIRCULAR_JACOBI and self.delta.real <= -1.0 / 3.0:
            raise DomainError("CircularJacobi needs Re(delta) > -1/3")

    @property
    def n1(self) -> int:
        return _floor_product(self.n, self.tau1)

    @property
    def n2(self) -> int:
        return _floor_product(self.n, self.tau2)

    def with_n(self, n: int) -> "EnsembleSpec":
        return EnsembleSpec(self.kind, n, self.beta, self.tau1, self.tau2, self.delta)


@dataclass(frozen=True)
class Expansion:
    """Mod-Gaussian data of a centered statistic ``X_n = log|det| - mu``.

    ``E[exp(z X_n)] ~ exp(t_n z^2 / 2) * exp(log_psi(z))`` on ``strip``.
    ``degenerate`` marks ``t_n <= 0``, where the asymptotics carry no meaning.
    """

    mu: float
    t_n: float
    log_psi: Callable[[complex], complex]
    strip: tuple[float, float]
    degenerate: bool = False


# ---------------------------------------------------------------------------
# log-Gamma differences

_STIRLING = [special.bernoulli(2 * k)[-1] / (2 * k * (2 * k - 1)) for k in range(1, 10)]


def _clog1p(w):
    """Complex ``log(1 + w)`` accurate for small ``|w|``."""
    x, y = w.real, w.imag
    return 0.5 * np.log1p(2.0 * x + x * x + y * y) + 1j * np.arctan2(y, 1.0 + x)


def _cexpm1(w):
    x, y = w.real, w.imag
    return (np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2) + 1j * np.exp(x) * np.sin(y)


def lgamma_diff(a, z) -> np.ndarray:
    """Elementwise ``log Gamma(a + z) - log Gamma(a)`` for ``Re a > 0``.

    Large ``|a|`` uses the difference of two Stirling series written with
    ``log1p``/``expm1`` so that no digits are lost when ``|z| << a``.
    """
    a = np.asarray(a)
    a = a.astype(complex) if np.iscomplexobj(a) else a.astype(float)
    z = complex(z)
    out = np.empty(a.shape, dtype=complex)
    big = (a.real >= 25.0) & (np.abs(a) >= 4.0 * abs(z))
    small = ~big
    if np.any(small):
        out[small] = special.loggamma(a[small] + z) - special.loggamma(a[small])
    if np.any(big):
        ab = a[big]
        lw = _clog1p(z / ab)
        val = (ab + z - 0.5) * lw + z * (np.log(ab) - 1.0)
        for k, c in enumerate(_STIRLING, start=1):
            val += c * ab ** (1 - 2 * k) * _cexpm1((1 - 2 * k) * lw)
        out[big] = val
    return out


def _csum(terms) -> complex:
    terms = np.asarray(terms, dtype=complex)
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def _as_z(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("z must be finite")
    return z


def gamma_ratio_sum(z, n: int, beta, shift: complex = 0.0) -> complex:
    """Exact ``sum_{k=1}^n [log Gamma(beta' k + shift + z) - log Gamma(beta' k + shift)]``."""
    z = _as_z(z)
    bp = BetaParam.of(beta).half
    k = np.arange(1, int(n) + 1, dtype=float)
    if shift == 0:
        return _csum(lgamma_diff(bp * k, z))
    base = bp * k + shift
    return _csum(special.loggamma(base + z) - special.loggamma(base))


# ---------------------------------------------------------------------------
# exact transforms

def log_mellin_gue(z, n: int) -> complex:
    """log E|det W|^z for the n x n GUE (modulus of the determinant)."""
    z = _as_z(z)
    if z.real <= -1:
        raise DomainError("GUE transform requires Re(z) > -1")
    if z == 0:
        return 0j
    a = 0.5 + np.arange(1, int(n) + 1) // 2
    return 0.5 * n * z * LOG2 + _csum(lgamma_diff(a, 0.5 * z))


def log_mellin_laguerre(z, n: int, beta) -> complex:
    """log E|det|^z for the beta-Laguerre ensemble."""
    z = _as_z(z)
    bp = BetaParam.of(beta).half
    if z.real <= -bp:
        raise DomainError("Laguerre transform requires Re(z) > -beta/2")
    if z == 0:
        return 0j
    return n * z * LOG2 + gamma_ratio_sum(z, n, beta)


def log_mellin_gram(z, n: int, beta) -> complex:
    """log E|det|^z for the uniform Gram ensemble."""
    z = _as_z(z)
    bp = BetaParam.of(beta).half
    if z.real <= -bp:
        raise DomainError("Gram transform requires Re(z) > -beta/2")
    if z == 0 or n == 1:
        return 0j
    tail = lgamma_diff(np.array([bp * n]), z)[0]
    return gamma_ratio_sum(z, n, beta) - n * tail


def log_mellin_jacobi(z, spec: EnsembleSpec) -> complex:
    """log E|det|^z for the beta-Jacobi ensemble with floor(n tau_1), floor(n tau_2)."""
    z = _as_z(z)
    if spec.kind is not Kind.JACOBI:
        raise DomainError("spec must be a Jacobi ensemble")
    bp = spec.beta.half
    if z.real <= -bp:
        raise DomainError("Jacobi transform requires Re(z) > -beta/2")
    if z == 0:
        return 0j
    k = np.arange(1, spec.n1 + 1, dtype=float)
    return _csum(lgamma_diff(bp * k, z) - lgamma_diff(bp * (spec.n2 + k), z))


def log_mellin_circular_jacobi(z, spec: EnsembleSpec) -> complex:
    """log E|det(Id - U)|^z for the (deformed) beta-circular ensemble."""
    z = _as_z(z)
    if spec.kind not in (Kind.CIRCULAR, Kind.CIRCULAR_JACOBI):
        raise DomainError("spec must be Circular or CircularJacobi")
    if z.real <= -1.0 / 3.0:
        raise DomainError("circular transform requires Re(z) > -1/3")
    if z == 0:
        return 0j
    d = spec.delta
    base = spec.beta.half * np.arange(spec.n, dtype=float) + 1.0
    if d == 0:
        return _csum(lgamma_diff(base, z) - 2.0 * lgamma_diff(base, 0.5 * z))
    if d.imag == 0:
        half = 2.0 * lgamma_diff(base + d.real, 0.5 * z)
    else:
        half = lgamma_diff(base + d, 0.5 * z) + lgamma_diff(base + d.conjugate(), 0.5 * z)
    return _csum(lgamma_diff(base + 2.0 * d.real, z) - half)


def log_mellin(z, spec: EnsembleSpec) -> complex:
    """Dispatch to the exact transform of ``spec``."""
    kind = spec.kind
    if kind is Kind.GUE:
        return log_mellin_gue(z, spec.n)
    if kind is Kind.LAGUERRE:
        return log_mellin_laguerre(z, spec.n, spec.beta)
    if kind is Kind.GRAM:
        return log_mellin_gram(z, spec.n, spec.beta)
    if kind is Kind.JACOBI:
        return log_mellin_jacobi(z, spec)
    return log_mellin_circular_jacobi(z, spec)


def strip_of(spec: EnsembleSpec) -> tuple[float, float]:
    """Open strip ``(c, d)`` of real parts on which the transform is analytic."""
    if spec.kind is Kind.GUE:
        return (-1.0, math.inf)
    if spec.kind in (Kind.CIRCULAR, Kind.CIRCULAR_JACOBI):
        return (-1.0 / 3.0, math.inf)
    return (-spec.beta.half, math.inf)


# ---------------------------------------------------------------------------
# asymptotics

def gamma_ratio_expansion(z, n: int, beta) -> complex:
    """Closed approximation of :func:`gamma_ratio_sum` with an O((|z|+|z|^2+|z|^3)/n) error.

    ``z((1/2 - 1/beta) log n + n log(beta n / 2) - n) + (z^2/beta) log n + Upsilon(z)``,
    valid for ``Re z > -beta/2`` and ``|z| < (beta/8) n^(1/6)``.
    """
    z = _as_z(z)
    b = BetaParam.of(beta)
    if z.real <= -b.half:
        raise DomainError("z outside the strip Re(z) > -beta/2")
    if abs(z) >= b.beta / 8.0 * n ** (1.0 / 6.0):
        raise DomainError("z outside the window |z| < (beta/8) n^(1/6)")
    if z == 0:
        return 0j
    logn = math.log(n)
    lin = (0.5 - 1.0 / b.beta) * logn + n * math.log(b.half * n) - n
    return z * lin + z * z / b.beta * logn + upsilon_quadrature(z, b)


def _eps(x: float, y: float) -> float:
    return x * math.log1p(y / x)


def expansion_for(spec: EnsembleSpec) -> Expansion:
    """Centering, variance parameter and limiting function of ``spec``."""
    n = spec.n
    logn = math.log(n)
    beta = spec.beta.beta
    strip = strip_of(spec)
    kind = spec.kind

    if kind is Kind.GUE:
        mu = 0.5 * math.log(2 * math.pi) - 0.5 * n + 0.5 * n * logn
        t_n = 0.5 * math.log(n / 2.0)
        log_psi = upsilon_gue
    elif kind is Kind.LAGUERRE:
        mu = (0.5 - 1.0 / beta) * logn - n + n * math.log(beta * n)
        t_n = 2.0 / beta * logn
        log_psi = lambda z, b=spec.beta: upsilon_quadrature(z, b)
    elif kind is Kind.GRAM:
        mu = (0.5 - 1.0 / beta) * logn - n + 1.0 / beta
        t_n = 2.0 / beta * logn
        log_psi = lambda z, b=spec.beta: upsilon_quadrature(z, b) - complex(z) ** 2 / b.beta
    elif kind is Kind.JACOBI:
        t1, t2 = spec.tau1, spec.tau2
        n1, n2 = spec.n1, spec.n2
        c = math.log(t1 * t2 / (t1 + t2))
        mu = (0.5 - 1.0 / beta) * (logn + c) - _eps(n1, n2) - _eps(n2, n1)
        t_n = 2.0 / beta * logn
        log_psi = lambda z, b=spec.beta: upsilon_quadrature(z, b) + complex(z) ** 2 / b.beta * c
    else:
        d = spec.delta
        mu = 2.0 * d.real / beta * logn
        t_n = logn / beta
        log_psi = lambda z, s=spec: _log_psi_circular(z, s)
    return Expansion(mu=mu, t_n=t_n, log_psi=log_psi, strip=strip, degenerate=t_n <= 0)


def _log_psi_circular(z, spec: EnsembleSpec) -> complex:
    z = _as_z(z)
    if z.real <= -1.0 / 3.0:
        raise DomainError("circular limiting function requires Re(z) > -1/3")
    if z == 0:
        return 0j
    b = spec.beta
    c = 1.0 - b.half
    d = spec.delta
    dc = d.conjugate()
    u = lambda w: upsilon_quadrature(w, b)
    return (u(c + d) - u(c + d + 0.5 * z) + u(c + dc) - u(c + dc + 0.5 * z)
            - u(c + d + dc) + u(c + d + dc + z))


def psi_n(z, spec: EnsembleSpec, expansion: Optional[Expansion] = None) -> complex:
    """Finite-n residue ``E[exp(z X_n)] exp(-t_n z^2 / 2)`` of the centered statistic."""
    z = _as_z(z)
    exp_ = expansion or expansion_for(spec)
    return complex(np.exp(log_mellin(z, spec) - z * exp_.mu - 0.5 * exp_.t_n * z * z))

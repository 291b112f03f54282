"""Special-function kernels: log-Gamma, digamma, log-Barnes-G and the Binet kernel.

Values are principal-branch logarithms on the right half-plane.  Functions
accept Python scalars or array-likes; scalar input gives a Python ``complex``
(or ``float`` for :func:`binet_phi`).
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate, integrate_decaying

# zeta'(-1) to 20 significant digits.
ZETA_PRIME_MINUS_ONE = -0.16542114370045092921
LOG_2PI = math.log(2.0 * math.pi)

# Taylor coefficients of the Binet kernel, phi(s) = sum_k B_{2k+2} s^{2k} / (2k+2)!.
# The series converges for |s| < 2*pi; at the crossover s = 1 the twelfth
# term is below 1e-19.
_PHI_CROSSOVER = 1.0
_PHI_SERIES = np.array([special.bernoulli(2 * k + 2)[-1] / math.factorial(2 * k + 2)
                        for k in range(12)])


def binet_phi(s):
    """Binet kernel ``phi(s) = (1/2 - 1/s + 1/(e^s - 1)) / s`` for ``s >= 0``.

    Below ``s = 1`` the Bernoulli-number power series is summed instead of the
    closed form, which cancels catastrophically near the origin.
    """
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise DomainError("binet_phi requires s >= 0")
    small = arr < _PHI_CROSSOVER
    out = np.empty_like(arr)
    x2 = arr[small] ** 2
    # Horner in s^2, highest degree first.
    out[small] = np.polyval(_PHI_SERIES[::-1], x2)
    big = arr[~small]
    with np.errstate(over="ignore"):
        out[~small] = (0.5 - 1.0 / big + 1.0 / np.expm1(big)) / big
    return float(out) if out.ndim == 0 else out


def _complex_input(z):
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument must be finite")
    return arr


def _wrap(out: np.ndarray):
    return complex(out) if out.ndim == 0 else out


def log_gamma(z):
    """Principal-branch ``log Gamma(z)`` for ``Re z > 0``."""
    arr = _complex_input(z)
    if np.any(arr.real <= 0):
        raise DomainError("log_gamma requires Re(z) > 0")
    return _wrap(special.loggamma(arr))


def digamma(z):
    """Digamma function ``Psi(z)`` for ``Re z > 0``."""
    arr = _complex_input(z)
    if np.any(arr.real <= 0):
        raise DomainError("digamma requires Re(z) > 0")
    return _wrap(special.psi(arr))


def _log_gamma_continued(w):
    """log Gamma continued to ``Re w > -m`` by the upward recurrence, principal logs."""
    w = np.asarray(w, dtype=complex)
    flat = np.atleast_1d(w)
    shift = np.maximum(0, np.floor(1.0 - flat.real)).astype(int)
    out = np.asarray(special.loggamma(flat + shift))
    for j in range(int(shift.max(initial=0))):
        mask = shift > j
        out[mask] -= np.log(flat[mask] + j)
    return out.reshape(w.shape)


def _log_barnes_g_integral(z: complex, cfg: QuadratureConfig) -> complex:
    """log G(1+z) from the integral representation, for ``Re z >= 1``.

    The kernel ``log(1 + z^2/s^2)`` is split into ``log(s^2 + z^2) - 2 log s``;
    the second piece integrates to ``zeta'(-1)`` against ``s/(e^{2 pi s}-1)``,
    which leaves a smooth integrand at the origin.
    """
    z2 = z * z

    def kernel(s):
        return np.log(s * s + z2) * (s / np.expm1(2.0 * math.pi * s))

    scale = abs(math.log(abs(z) + 1.0)) * 2 + 40.0
    value, _ = integrate_decaying(kernel, 2.0 * math.pi - 0.5, scale, cfg)
    return (0.5 * z2 * np.log(z) - 0.75 * z2 + 0.5 * z * LOG_2PI
            - value + ZETA_PRIME_MINUS_ONE)


def log_barnes_g(z, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Principal-branch ``log G(1+z)`` for ``Re z > -1``.

    For ``Re z >= 1`` the integral representation is used directly; closer to
    the imaginary axis the functional equation ``G(w+1) = G(w) Gamma(w)`` moves
    the argument into that region first.
    """
    arr = _complex_input(z)
    if np.any(arr.real <= -1):
        raise DomainError("log_barnes_g requires Re(z) > -1")
    out = np.empty(arr.shape, dtype=complex)
    for idx, zz in np.ndenumerate(arr):
        out[idx] = _log_barnes_g_scalar(complex(zz), cfg)
    return _wrap(out)


def _log_barnes_g_scalar(z: complex, cfg: QuadratureConfig) -> complex:
    if z == 0:
        return 0j
    steps = max(0, math.ceil(1.0 - z.real))
    value = _log_barnes_g_integral(z + steps, cfg)
    for j in range(1, steps + 1):
        value -= complex(special.loggamma(z + j))
    return value


def log_barnes_g_asymptotic(z, terms: int = 8):
    """Large-``|z|`` expansion of ``log G(1+z)`` with Bernoulli corrections.

    Leading part: ``z^2/2 log z - 3 z^2/4 + z/2 log 2 pi - log(z)/12 + zeta'(-1)``;
    corrections ``sum_k B_{2k+2} / (4k(k+1) z^{2k})``.  Independent of the
    quadrature route and used to cross-check it.
    """
    z = np.asarray(z, dtype=complex)
    logz = np.log(z)
    out = (0.5 * z * z * logz - 0.75 * z * z + 0.5 * z * LOG_2PI
           - logz / 12.0 + ZETA_PRIME_MINUS_ONE)
    for k in range(1, terms + 1):
        b = special.bernoulli(2 * k + 2)[-1]
        out = out + b / (4.0 * k * (k + 1)) * z ** (-2 * k)
    return _wrap(out)


def _log_barnes_g_continued(z, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """log G(1+z) continued to ``Re z > -m`` by repeated functional-equation steps."""
    arr = np.asarray(z, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    for idx, zz in np.ndenumerate(arr):
        zz = complex(zz)
        steps = max(0, math.floor(-zz.real) + 1) if zz.real <= -1 else 0
        value = _log_barnes_g_scalar(zz + steps, cfg)
        for j in range(1, steps + 1):
            value -= complex(_log_gamma_continued(zz + j))
        out[idx] = value
    return _wrap(out)


def abel_plana_sum(f: Callable, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """Evaluate ``sum_{k=0}^{n-1} f(k)`` through the Abel-Plana formula.

    ``f`` must be holomorphic on the strip ``0 <= Re w <= n`` with growth
    ``o(exp(2 pi |Im w|))`` and must accept complex numpy arrays.  Each
    integral is computed by adaptive quadrature under ``cfg``.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    n = int(n)
    g = lambda s: f(np.asarray(s, dtype=complex))

    body, _ = integrate(g, 0.0, float(n), cfg)

    def edge(x0):
        def kernel(s):
            s = np.asarray(s, dtype=float)
            num = g(x0 + 1j * s) - g(x0 - 1j * s)
            with np.errstate(over="ignore"):
                return num / np.expm1(2.0 * math.pi * s)
        # The weight decays like exp(-2 pi s); the caller guarantees f grows slower.
        value, _ = integrate(kernel, 0.0, 40.0, cfg, points=[1.0, 5.0])
        return value

    f0 = complex(g(0.0))
    fn = complex(g(float(n)))
    return complex(body + 0.5 * f0 - 0.5 * fn + 1j * edge(0.0) - 1j * edge(float(n)))

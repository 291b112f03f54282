"""Quantitative predictions derived from a mod-Gaussian expansion.

Gaussian tails up to the normality scale, precise moderate deviations,
Berry-Esseen bounds with an explicit constant, and local-limit window
probabilities for the normalized statistic ``Y_n = X_n / sqrt(t_n)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy import special

from .cgf import Expansion
from .errors import DomainError, ZoneError


class Regime(str, enum.Enum):
    CLT = "CLT"
    MDP_UPPER = "MDP_upper"
    MDP_LOWER = "MDP_lower"
    LLT = "LLT"


@dataclass(frozen=True)
class TailPrediction:
    probability: float
    regime: Regime
    leading_term: float
    correction: float


@dataclass(frozen=True)
class ZoneOfControl:
    """Constants ``(gamma, D, v, w, K1, K2)`` of a zone of control.

    The bound ``|psi_n(i xi) - 1| <= K1 |xi|^v exp(K2 |xi|^w)`` is assumed on
    ``|xi| <= D t_n^gamma``.
    """

    gamma: float
    D: float
    v: float
    w: float
    K1: float
    K2: float

    def check(self) -> None:
        """Raise :class:`ZoneError` unless the admissibility conditions hold."""
        if self.D <= 0 or self.K1 <= 0 or self.K2 <= 0 or self.v < 1:
            raise ZoneError("need D, K1, K2 > 0 and v >= 1")
        if self.w < 2:
            raise ZoneError("need w >= 2")
        upper = math.inf if self.w == 2 else 1.0 / (self.w - 2.0)
        if not (-0.5 < self.gamma <= upper):
            raise ZoneError(f"gamma = {self.gamma} outside (-1/2, {upper}]")
        if self.w > 2:
            d_max = (1.0 / (4.0 * self.K2)) ** (1.0 / (self.w - 2.0))
            if self.D > d_max * (1 + 1e-12):
                raise ZoneError(f"D = {self.D} exceeds {d_max}")
        if self.gamma > (self.v - 1.0) / 2.0:
            raise ZoneError("gamma must not exceed (v - 1)/2")

    @classmethod
    def for_beta(cls, beta: float, K1: float = 1.0, preset: str = "proof") -> "ZoneOfControl":
        """Zone for beta-ensembles.

        ``preset="proof"`` uses ``K2 = 8/beta^2``; ``preset="theorem"`` uses
        ``K2 = 8/beta^2 + 9/beta + 4``.  Both take ``v = 1, w = 3, gamma = 0``
        and ``D = 1/(4 K2)``.
        """
        if preset == "proof":
            k2 = 8.0 / beta ** 2
        elif preset == "theorem":
            k2 = 8.0 / beta ** 2 + 9.0 / beta + 4.0
        else:
            raise ValueError(f"unknown preset {preset!r}")
        return cls(gamma=0.0, D=1.0 / (4.0 * k2), v=1.0, w=3.0, K1=K1, K2=k2)

    @classmethod
    def for_gue(cls, K: float = 1.0, preset: str = "proof") -> "ZoneOfControl":
        """GUE zone.

        ``"proof"``: ``K1 = K (3 + K) e^K``, ``K2 = 1``, ``D = 1/4``;
        ``"theorem"``: ``K1 = (3 + K) e^(7/4 + 3K)``, ``D = 1/22``.
        """
        if preset == "proof":
            return cls(gamma=0.0, D=0.25, v=1.0, w=3.0, K1=K * (3 + K) * math.exp(K), K2=1.0)
        if preset == "theorem":
            return cls(gamma=0.0, D=1.0 / 22.0, v=1.0, w=3.0,
                       K1=(3 + K) * math.exp(1.75 + 3 * K), K2=1.0)
        raise ValueError(f"unknown preset {preset!r}")


def clt_tail(y: float) -> float:
    """``P[N(0,1) >= y]``."""
    return float(special.ndtr(-y))


def _psi_real(exp: Expansion, x: float) -> float:
    return math.exp(complex(exp.log_psi(x)).real)


def mdp_probability(exp: Expansion, x: float) -> TailPrediction:
    """Moderate-deviation estimate of ``P[X_n >= t_n x]`` (``x > 0``) or ``P[X_n <= t_n x]`` (``x < 0``)."""
    x = float(x)
    c, d = exp.strip
    if x == 0 or not (c < x < d):
        raise DomainError(f"x must be nonzero and inside the strip ({c}, {d})")
    t = exp.t_n
    leading = math.exp(-0.5 * t * x * x) / (abs(x) * math.sqrt(2.0 * math.pi * t))
    corr = _psi_real(exp, x)
    regime = Regime.MDP_UPPER if x > 0 else Regime.MDP_LOWER
    return TailPrediction(min(1.0, max(0.0, leading * corr)), regime, leading, corr)


def berry_esseen_constant(D: float, v: float, K1: float) -> float:
    """``C(D, v, K1) = 3/(2 pi) * (2^(v-1) Gamma(v/2) K1 + (7/D) sqrt(pi/2))``."""
    return 3.0 / (2.0 * math.pi) * (2.0 ** (v - 1.0) * math.gamma(v / 2.0) * K1
                                    + 7.0 / D * math.sqrt(math.pi / 2.0))


def berry_esseen_bound(exp: Expansion, zone: ZoneOfControl) -> float:
    """Kolmogorov-distance bound ``C(D, v, K1) t_n^-(gamma + 1/2)`` for ``Y_n``."""
    zone.check()
    if exp.t_n <= 0:
        raise DomainError("t_n must be positive")
    return berry_esseen_constant(zone.D, zone.v, zone.K1) * exp.t_n ** (-(zone.gamma + 0.5))


def llt_window_probability(exp: Expansion, a: float, b: float, delta_exp: float,
                           zone: ZoneOfControl | None = None) -> float:
    """Predicted ``P[Y_n in t_n^(-delta_exp) (a, b)]``, i.e. ``(b - a) / (sqrt(2 pi) t_n^delta_exp)``.

    With a ``zone`` the exponent must lie in ``[0, gamma + 1/2)``; without one
    the ensemble-level range ``[0, 3/2)`` is accepted.
    """
    if not a < b:
        raise DomainError("need a < b")
    upper = zone.gamma + 0.5 if zone is not None else 1.5
    if not (0.0 <= delta_exp < upper):
        raise DomainError(f"delta_exp must lie in [0, {upper})")
    if exp.t_n <= 0:
        raise DomainError("t_n must be positive")
    return (b - a) / (math.sqrt(2.0 * math.pi) * exp.t_n ** delta_exp)


def calibrate_k1(specs, zone: ZoneOfControl, n_xi: int = 400) -> float:
    """Smallest ``K1`` making the zone-of-control inequality hold for every spec.

    For each ensemble the exact residue ``psi_n(i xi)`` is evaluated on
    ``0 < xi <= D t_n^gamma`` and ``|psi_n(i xi) - 1| / (|xi|^v exp(K2 |xi|^w))``
    is maximized.
    """
    from .cgf import expansion_for, psi_n  # local import keeps module load light

    worst = 0.0
    for spec in specs:
        exp_ = expansion_for(spec)
        top = zone.D * exp_.t_n ** zone.gamma
        for xi in (top * f for f in _grid(n_xi)):
            val = abs(psi_n(1j * xi, spec, exp_) - 1.0)
            worst = max(worst, val / (xi ** zone.v * math.exp(zone.K2 * xi ** zone.w)))
    return worst


def _grid(n: int):
    return [(i + 1) / n for i in range(n)]

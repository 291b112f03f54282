"""Mod-Gaussian asymptotics and exact Monte Carlo for random-matrix log-determinants."""
from .cgf import EnsembleSpec, Expansion, Kind, expansion_for, log_mellin, psi_n
from .errors import DomainError, QuadratureError, UnsupportedParameter, ZoneError
from .quadrature import QuadratureConfig
from .sampler import MCResult, RngStream, mc_run
from .upsilon import BetaParam, upsilon_quadrature

__all__ = [
    "BetaParam", "DomainError", "EnsembleSpec", "Expansion", "Kind", "MCResult",
    "QuadratureConfig", "QuadratureError", "RngStream", "UnsupportedParameter", "ZoneError",
    "expansion_for", "log_mellin", "mc_run", "psi_n", "upsilon_quadrature",
]
__version__ = "0.1.0"

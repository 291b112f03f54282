"""Exact Monte Carlo samplers built on Bartlett-type factorizations.

Every statistic is a sum of independent log-factors (log chi, log Gamma, log
Beta or log|1 - gamma_k| for deformed Verblunsky coefficients).  A factor
model lists the factors of an ensemble, draws them, and reports their
log-Mellin transforms.  For large ``n`` the harness can replace the bulk of
the factors by a single draw from their exact aggregated law (see
:mod:`modgauss.exactlaw`); the leading factors, which carry the non-Gaussian
shape, are still sampled one by one.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .cgf import EnsembleSpec, Kind, expansion_for, lgamma_diff, strip_of
from .errors import DomainError, UnsupportedParameter
from .exactlaw import TabulatedLaw, invert_characteristic_function

LOG2 = math.log(2.0)


@dataclass
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        self.generator = np.random.Generator(np.random.PCG64(ss))


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


# ---------------------------------------------------------------------------
# factor models

class _Neumaier:
    """Vectorized compensated summation over the factor axis."""

    def __init__(self, size: int):
        self.s = np.zeros(size)
        self.c = np.zeros(size)

    def add(self, x: np.ndarray) -> None:
        t = self.s + x
        big = np.abs(self.s) >= np.abs(x)
        self.c += np.where(big, (self.s - t) + x, (x - t) + self.s)
        self.s = t

    def total(self) -> np.ndarray:
        return self.s + self.c


def _log_beta(gen, a: float, b: float, size: int) -> np.ndarray:
    ga = gen.standard_gamma(a, size)
    gb = gen.standard_gamma(b, size)
    return np.log(ga) - np.log(ga + gb)


def _log_one_minus(r2: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """``log|1 - r e^{i theta}|`` from ``r^2`` and ``theta``."""
    r = np.sqrt(r2)
    return 0.5 * np.log1p(r2 - 2.0 * r * np.cos(theta))


class FactorModel:
    """Independent log-factors of one ensemble, listed in sampling-priority order.

    Index 0 is the factor furthest from Gaussian; :meth:`draw` and
    :meth:`log_mellin` take arrays of indices into that order.
    """

    def __init__(self, spec: EnsembleSpec):
        self.spec = spec
        kind = spec.kind
        bp = spec.beta.half
        n = spec.n
        if kind is Kind.GUE:
            self.a = 0.5 + np.arange(1, n + 1) // 2
        elif kind is Kind.LAGUERRE:
            self.a = bp * np.arange(1, n + 1)
        elif kind is Kind.GRAM:
            # k = n, n-1, ..., 2: first shape parameter beta'(n-k+1) ascending.
            k = np.arange(n, 1, -1)
            self.a = bp * (n - k + 1)
            self.b = bp * (k - 1)
        elif kind is Kind.JACOBI:
            self.a = bp * np.arange(1, spec.n1 + 1)
            self.b = np.full(spec.n1, bp * spec.n2)
        else:
            d = spec.delta
            if d.imag != 0 or d.real < 0:
                raise UnsupportedParameter("sampling needs a real delta >= 0")
            # k' = n-1-k; k' = 0 is the coefficient on the unit circle.
            self.a = bp * np.arange(n)
            self.delta = d.real
        self.size = len(self.a)
        # proposal / acceptance tallies of the Verblunsky rejection step
        self.proposed = 0
        self.accepted = 0

    # -- transforms ---------------------------------------------------------
    def log_mellin(self, idx: np.ndarray, z) -> complex:
        """Sum over ``idx`` of the factors' log E[exp(z log factor)]."""
        idx = np.asarray(idx, dtype=int)
        if idx.size == 0:
            return 0j
        kind = self.spec.kind
        a = self.a[idx]
        if kind is Kind.GUE:
            terms = 0.5 * z * LOG2 + lgamma_diff(a, 0.5 * z)
        elif kind is Kind.LAGUERRE:
            terms = z * LOG2 + lgamma_diff(a, z)
        elif kind in (Kind.GRAM, Kind.JACOBI):
            terms = lgamma_diff(a, z) - lgamma_diff(a + self.b[idx], z)
        else:
            base = a + 1.0
            d = self.delta
            terms = lgamma_diff(base + 2 * d, z) - 2.0 * lgamma_diff(base + d, 0.5 * z)
        return complex(np.sum(terms))

    def log_cf(self, idx: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return np.array([self.log_mellin(idx, 1j * x) for x in np.atleast_1d(xi)])

    def moments(self, idx: np.ndarray) -> tuple[float, float]:
        """Mean and variance of the sum over ``idx`` from the transform's derivatives."""
        kind = self.spec.kind
        a = self.a[np.asarray(idx, dtype=int)]
        if kind is Kind.GUE:
            return (float(np.sum(0.5 * LOG2 + 0.5 * special.psi(a))),
                    float(np.sum(0.25 * special.polygamma(1, a))))
        if kind is Kind.LAGUERRE:
            return (float(np.sum(LOG2 + special.psi(a))),
                    float(np.sum(special.polygamma(1, a))))
        if kind in (Kind.GRAM, Kind.JACOBI):
            s = a + self.b[np.asarray(idx, dtype=int)]
            return (float(np.sum(special.psi(a) - special.psi(s))),
                    float(np.sum(special.polygamma(1, a) - special.polygamma(1, s))))
        base = a + 1.0
        d = self.delta
        mean = np.sum(special.psi(base + 2 * d) - special.psi(base + d))
        var = np.sum(special.polygamma(1, base + 2 * d) - 0.5 * special.polygamma(1, base + d))
        return float(mean), float(var)

    # -- draws --------------------------------------------------------------
    def draw(self, idx: np.ndarray, gen: np.random.Generator, size: int,
             acc: Optional[_Neumaier] = None) -> np.ndarray:
        """Sum over ``idx`` of independent factor draws, ``size`` samples."""
        acc = acc or _Neumaier(size)
        kind = self.spec.kind
        for i in np.asarray(idx, dtype=int):
            a = float(self.a[i])
            if kind is Kind.GUE:
                acc.add(0.5 * (LOG2 + np.log(gen.standard_gamma(a, size))))
            elif kind is Kind.LAGUERRE:
                acc.add(LOG2 + np.log(gen.standard_gamma(a, size)))
            elif kind in (Kind.GRAM, Kind.JACOBI):
                acc.add(_log_beta(gen, a, float(self.b[i]), size))
            else:
                acc.add(self._draw_verblunsky(a, gen, size))
        return acc.total()

    def _draw_verblunsky(self, b: float, gen: np.random.Generator, size: int) -> np.ndarray:
        """log|1 - gamma| for a deformed Verblunsky coefficient with radial exponent ``b``."""
        d = self.delta
        out = np.empty(size)
        todo = np.arange(size)
        while todo.size:
            m = todo.size
            r2 = np.ones(m) if b == 0 else -np.expm1(np.log(gen.random(m)) / b)
            theta = gen.uniform(-math.pi, math.pi, m)
            val = _log_one_minus(r2, theta)
            if d == 0:
                out[todo] = val
                break
            # Accept with probability |1 - gamma|^(2 delta) / 2^(2 delta).
            ok = np.log(gen.random(m)) < 2.0 * d * (val - LOG2)
            self.proposed += m
            self.accepted += int(np.count_nonzero(ok))
            out[todo[ok]] = val[ok]
            todo = todo[~ok]
        return out


# ---------------------------------------------------------------------------
# single-statistic samplers (every factor drawn explicitly)

def _sample(spec: EnsembleSpec, rng, size: Optional[int]):
    model = FactorModel(spec)
    m = 1 if size is None else int(size)
    if model.size == 0:
        vals = np.zeros(m)
    else:
        vals = model.draw(np.arange(model.size), _gen(rng), m)
    return float(vals[0]) if size is None else vals


def sample_log_det_gue(n: int, rng, size: Optional[int] = None):
    """Draw(s) of log|det W| for the n x n GUE."""
    return _sample(EnsembleSpec(Kind.GUE, n), rng, size)


def sample_log_det_laguerre(n: int, beta, rng, size: Optional[int] = None):
    """Draw(s) of log det for the beta-Laguerre ensemble."""
    return _sample(EnsembleSpec(Kind.LAGUERRE, n, beta), rng, size)


def sample_log_det_gram(n: int, beta, rng, size: Optional[int] = None):
    """Draw(s) of log det for the uniform Gram ensemble (0 when n = 1)."""
    return _sample(EnsembleSpec(Kind.GRAM, n, beta), rng, size)


def sample_log_det_jacobi(spec: EnsembleSpec, rng, size: Optional[int] = None):
    """Draw(s) of log det for the beta-Jacobi ensemble."""
    if spec.kind is not Kind.JACOBI:
        raise DomainError("spec must be a Jacobi ensemble")
    return _sample(spec, rng, size)


def sample_log_charpoly_circular_jacobi(spec: EnsembleSpec, rng, size: Optional[int] = None):
    """Draw(s) of log|det(Id - U)| for the (deformed) circular ensemble, real delta >= 0."""
    if spec.kind not in (Kind.CIRCULAR, Kind.CIRCULAR_JACOBI):
        raise DomainError("spec must be Circular or CircularJacobi")
    return _sample(spec, rng, size)


# ---------------------------------------------------------------------------
# Monte Carlo harness

@dataclass
class MCResult:
    n_samples: int
    mean: float
    variance: float
    empirical_laplace: list
    kolmogorov_distance: float
    tail_counts: list
    window_counts: list

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MCResult":
        return cls(
            n_samples=int(d["n_samples"]), mean=d["mean"], variance=d["variance"],
            empirical_laplace=[tuple(r) for r in d["empirical_laplace"]],
            kolmogorov_distance=d["kolmogorov_distance"],
            tail_counts=[tuple(r) for r in d["tail_counts"]],
            window_counts=[(tuple(w), c) for w, c in d["window_counts"]],
        )


CHUNK_SIZE = 1 << 16
KS_EXACT_LIMIT = 1 << 24
_KS_EDGES = np.linspace(-12.0, 12.0, (1 << 22) + 1)


@dataclass
class _Plan:
    model: FactorModel
    head: np.ndarray
    tail_law: Optional[TabulatedLaw]
    mu: float
    scale: float
    t_n: float
    z_grid: tuple
    thresholds: tuple
    windows: tuple
    stratified: bool
    keep_samples: bool


def _choose_head(model: FactorModel, exact_factors) -> int:
    if exact_factors is None:
        return model.size
    if exact_factors == "auto":
        return model.size if model.size <= 256 else 16
    return min(int(exact_factors), model.size)


def build_plan(spec: EnsembleSpec, n_samples: int, z_grid, thresholds, windows,
               exact_factors="auto", stratified: bool = False) -> _Plan:
    model = FactorModel(spec)
    exp_ = expansion_for(spec)
    j = _choose_head(model, exact_factors)
    head = np.arange(j)
    tail_law = None
    if j < model.size:
        rest = np.arange(j, model.size)
        mean, var = model.moments(rest)
        tail_law = invert_characteristic_function(lambda xi: model.log_cf(rest, xi),
                                                  mean, math.sqrt(var))
    scale = math.sqrt(exp_.t_n) if exp_.t_n > 0 else 1.0
    return _Plan(model, head, tail_law, exp_.mu, scale, exp_.t_n, tuple(z_grid),
                 tuple(thresholds), tuple(tuple(w) for w in windows), stratified,
                 n_samples <= KS_EXACT_LIMIT)


def _welford(x: np.ndarray) -> tuple[int, float, float]:
    m = float(np.mean(x))
    return x.size, m, float(np.sum((x - m) ** 2))


def _merge(acc, part):
    n1, m1, q1 = acc
    n2, m2, q2 = part
    if n1 == 0:
        return part
    n = n1 + n2
    d = m2 - m1
    return n, m1 + d * n2 / n, q1 + q2 + d * d * n1 * n2 / n


def _run_chunk(plan: _Plan, seed: int, chunk: int, size: int) -> dict:
    gen = RngStream(seed, chunk).generator
    model = plan.model
    acc = _Neumaier(size)
    if plan.tail_law is not None:
        if plan.stratified:
            u = (gen.permutation(size) + gen.random(size)) / size
        else:
            u = gen.random(size)
        acc.add(plan.tail_law.sample(u))
    stat = model.draw(plan.head, gen, size, acc) if plan.head.size else acc.total()
    x = stat - plan.mu
    y = x / plan.scale
    out = {
        "x": _welford(x),
        "laplace": [_welford(np.exp(z * x)) for z in plan.z_grid],
        "tails": [int(np.count_nonzero(y >= thr)) for thr in plan.thresholds],
        "windows": [int(np.count_nonzero((y > a * plan.t_n ** -d) & (y < b * plan.t_n ** -d)))
                    if plan.t_n > 0 else int(np.count_nonzero((y > a) & (y < b)))
                    for a, b, d in plan.windows],
    }
    if plan.keep_samples:
        out["y"] = y
    else:
        out["hist"] = np.histogram(y, bins=_KS_EDGES)[0]
        out["below"] = int(np.count_nonzero(y < _KS_EDGES[0]))
    return out


def _kolmogorov_exact(y: np.ndarray) -> float:
    y = np.sort(y)
    n = y.size
    cdf = special.ndtr(y)
    hi = np.arange(1, n + 1) / n - cdf
    lo = cdf - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


def _kolmogorov_binned(hist: np.ndarray, below: int, n: int) -> float:
    cum = (below + np.concatenate(([0], np.cumsum(hist)))) / n
    return float(np.max(np.abs(cum - special.ndtr(_KS_EDGES))))


def mc_run(spec: EnsembleSpec, n_samples: int, z_grid: Sequence[float] = (),
           thresholds: Sequence[float] = (), windows: Sequence = (), seed: int = 0,
           *, exact_factors="auto", stratified: bool = False, workers: int = 1,
           chunk_size: int = CHUNK_SIZE) -> MCResult:
    """Sample the centered statistic ``n_samples`` times and summarize.

    Samples are generated in fixed chunks of ``chunk_size``, chunk ``c`` using
    the stream ``(seed, c)``; partial summaries are merged in chunk order, so
    the result does not depend on ``workers``.

    ``exact_factors`` is the number of leading factors drawn individually;
    the remaining ones are drawn from their exact aggregated law.  ``None``
    draws every factor, ``"auto"`` keeps 16 factors once there are more than
    256.  ``stratified`` stratifies the uniforms feeding the aggregated draw.

    Laplace values are of the centered ``X = stat - mu``; tail thresholds and
    windows refer to ``Y = X / sqrt(t_n)``, windows ``(a, b, d)`` meaning
    ``Y in t_n^(-d) (a, b)``.
    """
    if int(n_samples) != n_samples or n_samples < 1:
        raise DomainError("n_samples must be a positive integer")
    c, d = strip_of(spec)
    for z in z_grid:
        if not c < z < d:
            raise DomainError(f"z = {z} outside the strip ({c}, {d})")
    plan = build_plan(spec, n_samples, z_grid, thresholds, windows, exact_factors, stratified)
    sizes = [min(chunk_size, n_samples - i) for i in range(0, n_samples, chunk_size)]
    args = [(plan, seed, k, s) for k, s in enumerate(sizes)]
    summary = _Summary(plan, n_samples)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            for part in pool.map(_run_chunk_star, args):
                summary.add(part)
    else:
        for a in args:
            summary.add(_run_chunk(*a))
    return summary.result()


def _run_chunk_star(args):
    return _run_chunk(*args)


class _Summary:
    """Merges chunk summaries in chunk order without keeping the chunks around."""

    def __init__(self, plan: _Plan, n: int):
        self.plan, self.n = plan, n
        self.xs = (0, 0.0, 0.0)
        self.lap = [(0, 0.0, 0.0) for _ in plan.z_grid]
        self.tails = [0] * len(plan.thresholds)
        self.wins = [0] * len(plan.windows)
        self.ys, self.hist, self.below = [], None, 0

    def add(self, p: dict) -> None:
        self.xs = _merge(self.xs, p["x"])
        self.lap = [_merge(a, b) for a, b in zip(self.lap, p["laplace"])]
        self.tails = [a + b for a, b in zip(self.tails, p["tails"])]
        self.wins = [a + b for a, b in zip(self.wins, p["windows"])]
        if self.plan.keep_samples:
            self.ys.append(p["y"])
        else:
            self.hist = p["hist"] if self.hist is None else self.hist + p["hist"]
            self.below += p["below"]

    def result(self) -> MCResult:
        plan, n = self.plan, self.n
        var = self.xs[2] / (n - 1) if n > 1 else 0.0
        laplace = []
        for z, (m, mean, q) in zip(plan.z_grid, self.lap):
            se = math.sqrt(q / (m - 1) / m) if m > 1 else 0.0
            laplace.append((float(z), mean, se))
        if plan.keep_samples:
            dk = _kolmogorov_exact(np.concatenate(self.ys))
        else:
            dk = _kolmogorov_binned(self.hist, self.below, n)
        return MCResult(
            n_samples=n, mean=self.xs[1], variance=var, empirical_laplace=laplace,
            kolmogorov_distance=min(1.0, max(0.0, dk)),
            tail_counts=[(float(t), c) for t, c in zip(plan.thresholds, self.tails)],
            window_counts=[(tuple(float(v) for v in w), c) for w, c in zip(plan.windows, self.wins)],
        )

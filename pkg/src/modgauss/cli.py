"""Command-line harness: limiting-function tables, expansion sweeps, Monte Carlo checks.

Every command writes CSV (fixed column order) or JSON to ``--out`` (default
stdout).  Monte Carlo commands exit with status 0 exactly when all tolerance
gates pass.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from .cgf import (EnsembleSpec, Kind, expansion_for, gamma_ratio_expansion, gamma_ratio_sum,
                  psi_n)
from .errors import ModGaussError, UnsupportedParameter
from .predict import (ZoneOfControl, berry_esseen_bound, clt_tail, llt_window_probability,
                      mdp_probability)
from .sampler import mc_run
from .upsilon import BetaParam

# Frozen calibration of K1 for beta = 2 Laguerre, n in {1e2, 1e4}
# (see predict.calibrate_k1 and tests/test_acceptance.py).
DEFAULT_K1 = 0.5126108740668065

KIND_NAMES = {k.value.lower(): k for k in Kind}


@dataclass
class ExperimentConfig:
    spec: EnsembleSpec
    n_list: list
    z_grid: list
    n_samples: int = 100_000
    seed: int = 0
    output_format: str = "csv"
    output_path: str = "-"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.n_list:
            raise click.UsageError("at least one --n is required")
        if self.n_samples < 1:
            raise click.UsageError("--samples must be at least 1")

    def spec_for(self, n: int) -> EnsembleSpec:
        return self.spec.with_n(n)


def _cnum(s: str) -> complex:
    return complex(s.replace(" ", "").replace("i", "j"))


def _fmt_complex(c: complex):
    c = complex(c)
    return c.real if c.imag == 0 else [c.real, c.imag]


def _emit(cfg: ExperimentConfig, command: str, columns: list, rows: list, extra: dict):
    if cfg.output_format == "json":
        doc = {"command": command, "config": _config_dict(cfg), "columns": columns,
               "rows": [dict(zip(columns, r)) for r in rows]}
        doc.update(extra)
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([json.dumps(v) if isinstance(v, (list, tuple)) else v for v in r])
        text = buf.getvalue()
    if cfg.output_path == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _config_dict(cfg: ExperimentConfig) -> dict:
    s = cfg.spec
    return {
        "ensemble": s.kind.value, "beta": s.beta.beta, "n_list": list(cfg.n_list),
        "z_grid": [_fmt_complex(z) for z in cfg.z_grid], "tau1": s.tau1, "tau2": s.tau2,
        "delta": [s.delta.real, s.delta.imag], "n_samples": cfg.n_samples, "seed": cfg.seed,
        **cfg.extra,
    }


def _common(f):
    opts = [
        click.option("--ensemble", type=click.Choice(sorted(KIND_NAMES), case_sensitive=False),
                     default="laguerre", show_default=True),
        click.option("--beta", type=float, multiple=True, help="Dyson index (repeatable where noted)."),
        click.option("--n", "n_list", type=int, multiple=True, help="Matrix size; repeatable."),
        click.option("--tau1", type=float, default=None),
        click.option("--tau2", type=float, default=None),
        click.option("--delta-re", type=float, default=0.0, show_default=True),
        click.option("--delta-im", type=float, default=0.0, show_default=True),
        click.option("--samples", type=int, default=100_000, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                     show_default=True),
        click.option("--out", type=click.Path(dir_okay=False, allow_dash=True), default="-",
                     show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _make_cfg(ensemble, beta, n_list, tau1, tau2, delta_re, delta_im, samples, seed, fmt, out,
              z_grid=(0.0,), beta_index=0, **extra) -> ExperimentConfig:
    kind = KIND_NAMES[ensemble.lower()]
    b = beta[beta_index] if beta else 2.0
    delta = complex(delta_re, delta_im)
    if kind is Kind.CIRCULAR and delta != 0:
        kind = Kind.CIRCULAR_JACOBI
    n0 = n_list[0] if n_list else 1
    try:
        spec = EnsembleSpec(kind, n0, BetaParam.of(b), tau1, tau2, delta)
    except ModGaussError as exc:
        raise click.UsageError(str(exc))
    return ExperimentConfig(spec, list(n_list), list(z_grid), samples, seed, fmt, out, extra)


@click.group()
def main():
    """Mod-Gaussian limit theorems for random-matrix log-determinants."""


# ---------------------------------------------------------------------------

@main.command("psi-table")
@_common
@click.option("--z", "z_list", multiple=True, default=("0.5",), show_default=True,
              help="Evaluation point (complex allowed, e.g. 0.3+0.2j); repeatable.")
def psi_table(z_list, **kw):
    """Tabulate psi_n(z) against the limiting function psi(z)."""
    cfg = _make_cfg(z_grid=[_cnum(z) for z in z_list], **kw)
    rows = []
    try:
        for n in cfg.n_list:
            spec = cfg.spec_for(n)
            exp_ = expansion_for(spec)
            for z in cfg.z_grid:
                pn = psi_n(z, spec, exp_)
                pl = complex(np.exp(exp_.log_psi(z)))
                rows.append([n, _fmt_complex(z), _fmt_complex(pn), _fmt_complex(pl), abs(pn - pl)])
    except ModGaussError as exc:
        raise click.UsageError(str(exc))
    _emit(cfg, "psi-table", ["n", "z", "psi_n", "psi_limit", "abs_diff"], rows, {})


@main.command("verify-expansion")
@_common
@click.option("--z", "z_list", multiple=True, default=("0.5",), show_default=True)
@click.option("--stability-factor", type=float, default=3.0, show_default=True,
              help="Gate: max/min normalized error across n per (beta, z).")
def verify_expansion(z_list, stability_factor, **kw):
    """Sweep the remainder of the Gamma-ratio expansion over beta, z and n."""
    betas = kw["beta"] or (2.0,)
    cfg = _make_cfg(z_grid=[_cnum(z) for z in z_list], **kw)
    cols = ["beta", "z", "n", "exact", "approx", "abs_err", "normalized_err", "status"]
    rows, summary, ok = [], [], True
    for b in betas:
        for z in cfg.z_grid:
            normed = []
            for n in cfg.n_list:
                try:
                    approx = gamma_ratio_expansion(z, n, b)
                except ModGaussError as exc:
                    rows.append([b, _fmt_complex(z), n, None, None, None, None, f"skipped: {exc}"])
                    continue
                exact = gamma_ratio_sum(z, n, b)
                err = abs(exact - approx)
                az = abs(z)
                ne = n * err / (az + az ** 2 + az ** 3) if az else 0.0
                normed.append(ne)
                rows.append([b, _fmt_complex(z), n, _fmt_complex(exact), _fmt_complex(approx),
                             err, ne, "ok"])
            if normed and min(normed) > 0:
                ratio = max(normed) / min(normed)
            else:
                ratio = 1.0 if normed else math.nan
            stable = bool(normed) and ratio < stability_factor
            ok &= stable
            summary.append({"beta": b, "z": _fmt_complex(z), "max_normalized_err": max(normed, default=None),
                            "spread": ratio, "stable": stable})
    for s in summary:
        rows.append([s["beta"], s["z"], "summary", None, None, None, s["max_normalized_err"],
                     "stable" if s["stable"] else "unstable"])
    _emit(cfg, "verify-expansion", cols, rows, {"gates_passed": ok})
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------------------
# Monte Carlo commands

def _mc_options(f):
    f = click.option("--exact-factors", type=int, default=None,
                     help="Factors drawn individually (default: all up to 256, else 16).")(f)
    f = click.option("--workers", type=int, default=1, show_default=True)(f)
    return f


def _run(cfg, n, **kw):
    spec = cfg.spec_for(n)
    ef = kw.pop("exact_factors")
    try:
        return spec, mc_run(spec, cfg.n_samples, seed=cfg.seed,
                            exact_factors="auto" if ef is None else ef, **kw)
    except UnsupportedParameter as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


def _finish(cfg, command, cols, rows, results, ok):
    extra = {"gates_passed": ok,
             "mc_results": [{"n": n, "result": r.to_dict()} for n, r in results]}
    _emit(cfg, command, cols, rows, extra)
    sys.exit(0 if ok else 1)


def _prep(kw):
    if not kw.get("n_list"):
        raise click.UsageError("at least one --n is required")
    return kw


@main.command("mc-clt")
@_common
@_mc_options
@click.option("--y", "ys", type=float, multiple=True, default=(1.0, 2.0), show_default=True)
@click.option("--lo", type=float, default=0.9, show_default=True)
@click.option("--hi", type=float, default=1.1, show_default=True)
def mc_clt(ys, lo, hi, exact_factors, workers, **kw):
    """Gaussian tail P[X >= y sqrt(t_n)] against the empirical tail."""
    cfg = _make_cfg(**_prep(kw), tol_lo=lo, tol_hi=hi)
    rows, results, ok = [], [], True
    for n in cfg.n_list:
        spec, r = _run(cfg, n, thresholds=list(ys), exact_factors=exact_factors, workers=workers)
        results.append((n, r))
        for y, c in r.tail_counts:
            p = c / r.n_samples
            se = math.sqrt(p * (1 - p) / r.n_samples)
            pred = clt_tail(y)
            ratio = p / pred
            good = lo <= ratio <= hi
            ok &= good
            rows.append([n, y, p, se, pred, ratio, good])
    _finish(cfg, "mc-clt", ["n", "y", "empirical", "std_err", "predicted", "ratio", "pass"],
            rows, results, ok)


@main.command("mc-berry-esseen")
@_common
@_mc_options
@click.option("--k1", type=float, default=DEFAULT_K1, show_default=True)
@click.option("--zone-preset", type=click.Choice(["proof", "theorem"]), default="proof",
              show_default=True)
@click.option("--min-decrease", type=float, default=1.5, show_default=True,
              help="Gate: d_Kol(first n) / d_Kol(last n) must reach this factor.")
def mc_berry_esseen(k1, zone_preset, min_decrease, exact_factors, workers, **kw):
    """Empirical Kolmogorov distance against the Berry-Esseen bound."""
    cfg = _make_cfg(**_prep(kw), k1=k1, zone_preset=zone_preset, min_decrease=min_decrease)
    spec0 = cfg.spec
    if spec0.kind is Kind.GUE:
        zone = ZoneOfControl.for_gue(preset=zone_preset)
        zone = ZoneOfControl(zone.gamma, zone.D, zone.v, zone.w, k1, zone.K2)
    else:
        zone = ZoneOfControl.for_beta(spec0.beta.beta, K1=k1, preset=zone_preset)
    rows, results, ok, dists = [], [], True, []
    for n in cfg.n_list:
        spec, r = _run(cfg, n, exact_factors=exact_factors, workers=workers)
        results.append((n, r))
        bound = berry_esseen_bound(expansion_for(spec), zone)
        good = r.kolmogorov_distance <= bound
        ok &= good
        dists.append(r.kolmogorov_distance)
        rows.append([n, r.kolmogorov_distance, bound, good])
    decrease = dists[0] / dists[-1] if len(dists) > 1 and dists[-1] > 0 else None
    if decrease is not None:
        ok &= decrease >= min_decrease
    cfg.extra["observed_decrease"] = decrease
    _finish(cfg, "mc-berry-esseen", ["n", "d_kol", "bound", "pass"], rows, results, ok)


@main.command("mc-mdp")
@_common
@_mc_options
@click.option("--x", "xs", type=float, multiple=True, default=(0.3,), show_default=True)
@click.option("--lo", type=float, default=0.7, show_default=True)
@click.option("--hi", type=float, default=1.4, show_default=True)
@click.option("--stratified/--plain", default=True, show_default=True)
def mc_mdp(xs, lo, hi, stratified, exact_factors, workers, **kw):
    """Moderate-deviation tail P[X >= t_n x] against the empirical tail."""
    cfg = _make_cfg(**_prep(kw), tol_lo=lo, tol_hi=hi, stratified=stratified)
    rows, results, ok = [], [], True
    for n in cfg.n_list:
        spec = cfg.spec_for(n)
        exp_ = expansion_for(spec)
        thresholds = [x * math.sqrt(exp_.t_n) for x in xs]
        spec, r = _run(cfg, n, thresholds=thresholds, stratified=stratified,
                       exact_factors=exact_factors, workers=workers)
        results.append((n, r))
        for x, (_, c) in zip(xs, r.tail_counts):
            count = c if x > 0 else r.n_samples - c
            p = count / r.n_samples
            se = math.sqrt(p * (1 - p) / r.n_samples)
            pred = mdp_probability(exp_, x)
            ratio = p / pred.probability
            good = lo <= ratio <= hi
            ok &= good
            rows.append([n, x, p, se, pred.probability, pred.correction, ratio, good])
    _finish(cfg, "mc-mdp", ["n", "x", "empirical", "std_err", "predicted", "psi_x", "ratio", "pass"],
            rows, results, ok)


@main.command("mc-llt")
@_common
@_mc_options
@click.option("--a", type=float, default=-1.0, show_default=True)
@click.option("--b", type=float, default=1.0, show_default=True)
@click.option("--delta-exp", type=float, default=0.5, show_default=True)
@click.option("--rel-tol", type=float, default=0.05, show_default=True)
def mc_llt(a, b, delta_exp, rel_tol, exact_factors, workers, **kw):
    """Window probability P[Y in t_n^-delta (a, b)] against the local limit prediction."""
    cfg = _make_cfg(**_prep(kw), a=a, b=b, delta_exp=delta_exp, rel_tol=rel_tol)
    rows, results, ok = [], [], True
    for n in cfg.n_list:
        spec = cfg.spec_for(n)
        exp_ = expansion_for(spec)
        pred = llt_window_probability(exp_, a, b, delta_exp)
        spec, r = _run(cfg, n, windows=[(a, b, delta_exp)], exact_factors=exact_factors,
                       workers=workers)
        results.append((n, r))
        (_, c), = r.window_counts
        p = c / r.n_samples
        se = math.sqrt(p * (1 - p) / r.n_samples)
        rel = abs(p / pred - 1.0)
        good = rel <= rel_tol
        ok &= good
        rows.append([n, a, b, delta_exp, p, se, pred, rel, good])
    _finish(cfg, "mc-llt", ["n", "a", "b", "delta_exp", "empirical", "std_err", "predicted",
                            "rel_err", "pass"], rows, results, ok)


@main.command("mc-laplace")
@_common
@_mc_options
@click.option("--z", "zs", type=float, multiple=True, default=(0.25, 0.5), show_default=True)
@click.option("--sigma", type=float, default=3.0, show_default=True)
@click.option("--max-outliers", type=int, default=0, show_default=True,
              help="Gates allowed between --sigma and --outlier-sigma.")
@click.option("--outlier-sigma", type=float, default=4.0, show_default=True)
def mc_laplace(zs, sigma, max_outliers, outlier_sigma, exact_factors, workers, **kw):
    """Empirical E[exp(z X)] against the exact transform."""
    from .cgf import log_mellin

    cfg = _make_cfg(**_prep(kw), z_grid=list(zs))
    rows, results, outliers, hard_fail = [], [], 0, False
    for n in cfg.n_list:
        spec = cfg.spec_for(n)
        exp_ = expansion_for(spec)
        spec, r = _run(cfg, n, z_grid=list(zs), exact_factors=exact_factors, workers=workers)
        results.append((n, r))
        for z, v, se in r.empirical_laplace:
            exact = float(np.exp(log_mellin(z, spec) - z * exp_.mu).real)
            score = (v - exact) / se if se > 0 else math.inf
            if abs(score) > outlier_sigma:
                hard_fail = True
            elif abs(score) > sigma:
                outliers += 1
            rows.append([n, z, v, se, exact, score, abs(score) <= sigma])
    ok = not hard_fail and outliers <= max_outliers
    _finish(cfg, "mc-laplace", ["n", "z", "empirical", "std_err", "exact", "z_score", "pass"],
            rows, results, ok)


if __name__ == "__main__":
    main()

"""The oracle suite behind ``wishart-outage validate``.

Each check compares an analytic quantity with an independent oracle and
reports ``{"name", "value", "tolerance", "passed"}``; ``passed`` means
``value <= tolerance``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import presets
from .maxeig_cdf import SeriesConfig, WishartParams, cdf_max_eig_curve, params_from_gaussian, series_Qk
from .mimo_outage import (
    aligned_channel,
    large_k_outage,
    outage_probability,
    params_by_reparameterisation,
    wishart_params_from_channel,
)
from .oracles import (
    McConfig,
    QuadConfig,
    hermitian_interval_volume,
    prop1_experiment,
    quad_Qk,
    sample_max_eig,
)
from .specfun import hyp1f1_int


def hyp1f1_rational(a: int, b: int, x: Fraction) -> float:
    """``1F1(a; b; x)`` summed exactly in rationals until the tail is below 1e-20."""
    term = Fraction(1)
    total = Fraction(1)
    n = 0
    while True:
        term = term * (a + n) * x / ((b + n) * (n + 1))
        total += term
        n += 1
        if n > abs(x) and abs(term) < Fraction(1, 10**20) * abs(total):
            return float(total)


def _check(name: str, value: float, tolerance: float) -> dict:
    value = float(value)
    return {"name": name, "value": value, "tolerance": float(tolerance),
            "passed": bool(math.isfinite(value) and value <= tolerance)}


def _series_vs_mc(upsilon, psi, mc: McConfig, series: SeriesConfig) -> float:
    grid = np.linspace(0.1, 40.0, 100)
    params = params_from_gaussian(upsilon, psi)
    f = np.array([r.value for r in cdf_max_eig_curve(params, grid, series)])
    ecdf = sample_max_eig(upsilon, psi, mc)
    return float(np.max(np.abs(ecdf(grid) - f)))


def run_suite(mc: McConfig | None = None, series: SeriesConfig | None = None) -> list[dict]:
    mc = mc or McConfig()
    series = series or SeriesConfig()
    checks = []

    # series against quadrature of the matrix integral
    sets = [params_from_gaussian(presets.UPSILON_REF, presets.PSI_REF),
            WishartParams(0.5, 2.0, 1.0, 1.0, 0.5, 0.5)]
    worst = 0.0
    for params in sets:
        for k in presets.QUADCHECK_K:
            for x in presets.QUADCHECK_X:
                q = quad_Qk(k, x, params, QuadConfig(rel_tol=1e-8))
                worst = max(worst, abs(series_Qk(k, x, params) - q) / q)
    checks.append(_check("series_vs_quadrature_rel", worst, 1e-4))

    # analytic CDF against sampling
    checks.append(_check("cdf_vs_mc_supnorm",
                         _series_vs_mc(presets.UPSILON_REF, presets.PSI_REF, mc, series), 5e-3))
    checks.append(_check("rayleigh_vs_mc_supnorm",
                         _series_vs_mc(np.zeros((2, 2)), presets.PSI_REF, mc, series), 5e-3))

    # both parameter paths, several K
    worst = 0.0
    for k in (0.0, 0.5, 1.0, 2.0, 1000.0):
        ch = presets.reference_channel(k)
        a = wishart_params_from_channel(ch)
        b = params_by_reparameterisation(ch)
        for name in ("sigma1", "sigma2", "mu", "eta"):
            va, vb = getattr(a, name), getattr(b, name)
            worst = max(worst, abs(va - vb) / max(abs(va), 1e-300))
    checks.append(_check("dual_path_parameters_rel", worst, 1e-9))

    # 1F1: the Kummer-transformed evaluation against an exact rational series,
    # and the contiguous relation in b
    worst = 0.0
    for a, b in ((1, 1), (1, 3), (2, 5), (4, 9), (7, 7)):
        for x in (Fraction(1, 2), Fraction(3), Fraction(25, 2)):
            ref = hyp1f1_rational(a, b, -x)
            worst = max(worst, abs(hyp1f1_int(a, b, float(-x)) - ref) / abs(ref))
    checks.append(_check("hyp1f1_kummer_rel", worst, 1e-12))
    worst = 0.0
    for a, b in ((1, 2), (2, 5), (3, 4), (5, 11)):
        for z in (-30.0, -4.0, 0.7, 9.0, 35.0):
            t = (b * (b - 1) * hyp1f1_int(a, b - 1, z), b * (1 - b - z) * hyp1f1_int(a, b, z),
                 z * (b - a) * hyp1f1_int(a, b + 1, z))
            worst = max(worst, abs(sum(t)) / max(abs(v) for v in t))
    checks.append(_check("hyp1f1_recurrence_rel", worst, 1e-12))

    # volume of the Hermitian interval {0 < Y < I}
    vol = hermitian_interval_volume()
    checks.append(_check("hermitian_interval_volume_rel", abs(vol["total"] - math.pi / 12) / (math.pi / 12), 1e-2))

    # large-K approximation
    ch = presets.reference_channel(1000.0)
    crit = max(abs(large_k_outage(aligned_channel(ch, a), 4.0) - 0.5)
               for a in ("given", "leading", "least"))
    checks.append(_check("large_k_critical_point", crit, 0.0))
    grid = np.linspace(3.5, 4.5, 21)
    gap = max(abs(outage_probability(ch, x).value - large_k_outage(ch, x)) for x in grid)
    checks.append(_check("large_k_vs_exact_supnorm", gap, 0.05))

    # convergence of the normalised statistic
    ks = dict(prop1_experiment(ch, [1e3, 1e4], McConfig(100_000, mc.seed, mc.n_workers)))
    checks.append(_check("prop1_ks_k1e3", ks[1e3], 0.05))
    checks.append(_check("prop1_ks_k1e4", ks[1e4], 0.02))
    return checks

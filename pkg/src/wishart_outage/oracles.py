"""Independent ground truth for the analytic CDF.

* :func:`sample_max_eig` draws the Wishart ensemble directly and returns an
  :class:`EmpiricalCdf` of ``lambda_max``.
* :func:`quad_Qk` integrates the matrix integral ``Q_k`` over
  ``0 < Y < I_2`` numerically, split into the regions ``y11 + y22 < 1`` and
  ``y11 + y22 > 1``.
* :func:`prop1_experiment` measures how fast the centred and scaled
  ``lambda_max`` of a strong-LoS Rician channel approaches a standard normal.

Random streams are keyed by ``(seed, block index)``, with a fixed block
size, so a draw does not depend on how many workers produced it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import cmatrix2 as cm
from .errors import BudgetExceeded, DomainError
from .maxeig_cdf import WishartParams
from .specfun import std_normal_cdf

BLOCK_SIZE = 1 << 16
THREADS_ENV = "WISHART_OUTAGE_THREADS"


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 1_000_000
    seed: int = 20240101
    n_workers: int = 0  # 0: take WISHART_OUTAGE_THREADS or 1

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise DomainError("n_samples must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def workers(self) -> int:
        return self.n_workers if self.n_workers > 0 else default_workers()


class EmpiricalCdf:
    """Right-continuous ECDF ``F(x) = #{samples <= x} / n``."""

    def __init__(self, samples):
        self.sorted_samples = np.sort(np.asarray(samples, dtype=np.float64).ravel())
        self.n = self.sorted_samples.size
        if self.n == 0:
            raise DomainError("an empirical CDF needs at least one sample")

    def __call__(self, x):
        idx = np.searchsorted(self.sorted_samples, x, side="right")
        return idx / self.n

    def quantile(self, q):
        return np.quantile(self.sorted_samples, q)

    def mean(self) -> float:
        return float(np.mean(self.sorted_samples))

    def dkw_band(self, delta: float = 1e-3) -> float:
        """Dvoretzky-Kiefer-Wolfowitz half-width at confidence ``1 - delta``."""
        return math.sqrt(math.log(2.0 / delta) / (2.0 * self.n))


# ---------------------------------------------------------------------------
# Monte Carlo


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(block)])))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circular complex Gaussians: variance 1/2 per real component."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def _blocks(n_samples: int):
    n_blocks = -(-n_samples // BLOCK_SIZE)
    for b in range(n_blocks):
        yield b, min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE)


def _run_blocks(fn, mc: McConfig) -> np.ndarray:
    blocks = list(_blocks(mc.n_samples))
    if mc.workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(mc.workers) as pool:
            parts = list(pool.map(lambda bs: fn(*bs), blocks))
    else:
        parts = [fn(b, size) for b, size in blocks]
    return np.concatenate(parts)


def sample_gaussian_matrices(upsilon, psi: cm.Herm2, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` draws of ``X = Upsilon + G Psi^{1/2}`` with ``G`` i.i.d. ``CN(0, 1)``."""
    root = cm.psd_sqrt(psi).to_array()
    g = complex_normal(rng, (size, 2, 2))
    return cm.as_cmat2(upsilon)[None] + g @ root


def sample_max_eig(upsilon, psi: cm.Herm2, mc: McConfig | None = None) -> EmpiricalCdf:
    """Monte-Carlo ECDF of ``lambda_max(X^H X)``, ``X ~ CN(Upsilon, I (x) Psi)``."""
    mc = mc or McConfig()
    upsilon = cm.as_cmat2(upsilon)
    psi.check_psd()

    def block(b, size):
        x = sample_gaussian_matrices(upsilon, psi, _block_rng(mc.seed, b), size)
        return cm.max_eig_gram_batch(x)

    return EmpiricalCdf(_run_blocks(block, mc))


def sample_channel_max_eig(h_bar, t_corr: cm.Herm2, k_factor: float, mc: McConfig) -> np.ndarray:
    """Draws of ``lambda_max(H^H H)`` for the Rician channel model (unsorted)."""
    h_bar = cm.as_cmat2(h_bar)
    root = cm.psd_sqrt(t_corr).to_array()
    los = math.sqrt(k_factor / (k_factor + 1.0)) * h_bar
    scat = math.sqrt(1.0 / (k_factor + 1.0))

    def block(b, size):
        rng = _block_rng(mc.seed, b)
        h = los[None] + scat * (complex_normal(rng, (size, 2, 2)) @ root)
        return cm.max_eig_gram_batch(h)

    return _run_blocks(block, mc)


def empirical_sup_diff(ecdf: EmpiricalCdf, analytic, grid) -> float:
    """``max_x |F_hat(x) - F(x)|`` over ``grid``."""
    grid = np.asarray(grid, dtype=np.float64)
    f = np.array([analytic(g) for g in grid], dtype=np.float64)
    return float(np.max(np.abs(ecdf(grid) - f)))


def ks_distance_normal(z) -> float:
    """Kolmogorov-Smirnov distance of a sample to the standard normal."""
    z = np.sort(np.asarray(z, dtype=np.float64))
    n = z.size
    cdf = std_normal_cdf(z)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


# ---------------------------------------------------------------------------
# quadrature of Q_k


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-5
    max_evals: int = 100_000_000

    def __post_init__(self):
        if not 1e-8 <= self.rel_tol <= 1e-2:
            raise DomainError("rel_tol must lie in [1e-8, 1e-2]")


def disc_integral(k: int, a1sq: float, a2sq: float, y11, y22, radius2):
    """Integral of ``(a1sq y11 + a2sq y22 + 2 Re[conj(al1) al2 y12])^k`` over ``|y12|^2 < radius2``.

    Writing ``y12 = r exp(i theta)``, the binomial expansion in
    ``cos(theta + phase)`` leaves only even powers after the angular
    integral, ``int cos^{2p} = 2 pi C(2p, p) / 4^p``; the radial integral of
    ``r^{2p+1}`` is then elementary.
    """
    lin = a1sq * y11 + a2sq * y22
    ab = a1sq * a2sq
    out = np.zeros(np.broadcast(lin, radius2).shape)
    for p in range(k // 2 + 1):
        coef = 2.0 * math.pi * math.comb(k, 2 * p) * math.comb(2 * p, p) * ab**p / (2 * p + 2)
        out = out + coef * lin ** (k - 2 * p) * radius2 ** (p + 1)
    return out


def _triangle_rule(n: int):
    """Collapsed Gauss-Legendre rule on ``{u, v > 0, u + v < 1}``."""
    g, w = np.polynomial.legendre.leggauss(n)
    g = 0.5 * (g + 1.0)
    w = 0.5 * w
    s, t = np.meshgrid(g, g, indexing="ij")
    ws, wt = np.meshgrid(w, w, indexing="ij")
    u = s
    v = (1.0 - s) * t
    return u.ravel(), v.ravel(), (ws * wt * (1.0 - s)).ravel()


def _region_sum(k, x, params: WishartParams, region: int, n: int) -> float:
    u, v, w = _triangle_rule(n)
    if region == 1:
        y11, y22 = u, v
        rad2 = u * v
    else:
        y11, y22 = 1.0 - u, 1.0 - v
        rad2 = u * v  # (1 - y11)(1 - y22)
    expo = np.exp(-x * params.sigma1 * y11 - x * params.sigma2 * y22)
    f = expo * disc_integral(k, params.a1sq, params.a2sq, y11, y22, rad2)
    return float(np.sum(w * f))


def quad_region(k: int, x: float, params: WishartParams, region: int,
                qc: QuadConfig | None = None) -> float:
    """``P1`` (``region=1``, ``y11 + y22 < 1``) or ``P2`` (``region=2``) by adaptive quadrature.

    The tensor rule is doubled until two successive estimates agree to
    ``rel_tol``.

    Raises
    ------
    BudgetExceeded
        If ``max_evals`` integrand evaluations pass before agreement.
    """
    qc = qc or QuadConfig()
    if region not in (1, 2):
        raise DomainError("region must be 1 or 2")
    if k < 0 or x < 0:
        raise DomainError("need k >= 0 and x >= 0")
    n = 12
    evals = n * n
    prev = _region_sum(k, x, params, region, n)
    while True:
        n *= 2
        evals += n * n
        if evals > qc.max_evals:
            raise BudgetExceeded(f"quadrature exceeded {qc.max_evals} evaluations")
        cur = _region_sum(k, x, params, region, n)
        if abs(cur - prev) <= 0.01 * qc.rel_tol * abs(cur):
            return cur
        prev = cur


def quad_Qk(k: int, x: float, params: WishartParams, qc: QuadConfig | None = None) -> float:
    """``Q_k(x) = int_{0<Y<I} etr(-x Sigma Y) (alpha^H Y alpha)^k dY`` as ``P1 + P2``."""
    return quad_region(k, x, params, 1, qc) + quad_region(k, x, params, 2, qc)


def hermitian_interval_volume(n_points: int = 1 << 20, seed: int = 7) -> dict:
    """Quasi-random estimate of the volume of ``{0 < Y < I_2}`` and its two halves.

    Points are scrambled Sobol in the box ``(0,1)^2 x (-1/2,1/2)^2`` of
    ``(y11, y22, Re y12, Im y12)``, which contains the whole region.
    """
    pts = qmc.Sobol(d=4, scramble=True, seed=seed).random(n_points)
    y11, y22 = pts[:, 0], pts[:, 1]
    r2 = (pts[:, 2] - 0.5) ** 2 + (pts[:, 3] - 0.5) ** 2
    pd = r2 < y11 * y22
    below = r2 < (1.0 - y11) * (1.0 - y22)
    inside = pd & below
    r1 = inside & (y11 + y22 < 1.0)
    r2_ = inside & (y11 + y22 > 1.0)
    return {
        "total": float(np.mean(inside)),
        "region1": float(np.mean(r1)),
        "region2": float(np.mean(r2_)),
    }


# ---------------------------------------------------------------------------
# large-K convergence


def prop1_experiment(channel, k_list, mc: McConfig | None = None) -> list[tuple[float, float]]:
    """KS distance to ``N(0, 1)`` of ``sqrt(K / (8 v^H T v)) (lambda_max - 4)`` for each ``K``.

    ``channel`` is a :class:`~wishart_outage.mimo_outage.ChannelSpec`; only its
    ``h_bar`` and ``t_corr`` are used, ``K`` comes from ``k_list``.
    """
    from .mimo_outage import los_direction

    mc = mc or McConfig(n_samples=100_000)
    k_list = [float(k) for k in k_list]
    if any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise DomainError("k_list must be increasing")
    if any(k < 10 for k in k_list):
        raise DomainError("every K in k_list must be >= 10")
    v = los_direction(channel.h_bar)
    vtv = channel.t_corr.quad_form(v)
    out = []
    for i, k in enumerate(k_list):
        sub = McConfig(mc.n_samples, (mc.seed + 7919 * (i + 1)) % 2**64, mc.n_workers)
        lam = sample_channel_max_eig(channel.h_bar, channel.t_corr, k, sub)
        z = math.sqrt(k / (8.0 * vtv)) * (lam - 4.0)
        out.append((k, ks_distance_normal(z)))
    return out

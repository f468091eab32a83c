"""Outage probability of a 2x2 MIMO-MRC link over a correlated Rician channel.

The channel is ``H = sqrt(K/(K+1)) H_bar + sqrt(1/(K+1)) G T^{1/2}`` with a
rank-one line-of-sight part ``H_bar`` (``H_bar^H H_bar = 4 v v^H``), transmit
correlation ``T`` and ``G`` i.i.d. ``CN(0, 1)``. Beamforming along the
leading eigenvector of ``H^H H`` gives received SNR ``gamma_bar lambda_max``,
so the outage probability at threshold ``gamma_th`` is the CDF of
``lambda_max`` at ``gamma_th / gamma_bar``.

For large ``K`` the statistic ``sqrt(K / (8 v^H T v)) (lambda_max - 4)`` is
close to standard normal, which gives the closed-form approximation in
:func:`large_k_outage`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import cmatrix2 as cm
from .errors import DomainError, SelfCheckFailed
from .maxeig_cdf import (
    CdfResult,
    SeriesConfig,
    WishartParams,
    cdf_max_eig_curve,
    cdf_max_eig_direct,
    params_from_gaussian,
)
from .specfun import std_normal_cdf

NORM_TOL = 1e-6
DUAL_PATH_RTOL = 1e-9
METHODS = ("auto", "series", "direct")
# "auto" uses the series while this many terms are expected to suffice
SERIES_AUTO_KMAX = 60


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Rician channel ``(H_bar, T, K)`` normalised to ``tr(H_bar^H H_bar) = 4``, ``tr(T) = 2``.

    With ``normalization="strict"`` a violation of either trace by more than
    ``1e-6`` is an error. With ``"lenient"`` both matrices are rescaled to the
    normalisation and a :class:`UserWarning` is issued.

    ``allow_singular_t`` admits a rank-deficient ``T``; such a channel can be
    sampled but has no exact series (``Psi^{-1}`` does not exist).
    """

    h_bar: np.ndarray
    t_corr: cm.Herm2
    k_factor: float
    normalization: str = "strict"
    allow_singular_t: bool = field(default=False, compare=False)

    def __post_init__(self):
        h = cm.as_cmat2(self.h_bar)
        t = self.t_corr
        if not isinstance(t, cm.Herm2):
            t = cm.Herm2.from_array(t)
        k = float(self.k_factor)
        if not math.isfinite(k) or k < 0.0:
            raise DomainError(f"k_factor must be finite and >= 0, got {self.k_factor}")
        if self.normalization not in ("strict", "lenient"):
            raise DomainError("normalization must be 'strict' or 'lenient'")

        h_power = float(np.sum(np.abs(h) ** 2))
        if h_power <= 0.0:
            raise DomainError("h_bar must be non-zero")
        if t.trace <= 0.0:
            raise DomainError("t_corr must have positive trace")
        off_h = abs(h_power - 4.0) > NORM_TOL
        off_t = abs(t.trace - 2.0) > NORM_TOL
        if off_h or off_t:
            if self.normalization == "strict":
                raise DomainError(
                    f"channel not normalised: tr(H_bar^H H_bar) = {h_power:.9g} (want 4), "
                    f"tr(T) = {t.trace:.9g} (want 2)"
                )
            warnings.warn(
                f"rescaling channel to tr(H_bar^H H_bar) = 4 and tr(T) = 2 "
                f"(were {h_power:.9g} and {t.trace:.9g})",
                UserWarning,
                stacklevel=3,
            )
            h = h * (2.0 / math.sqrt(h_power))
            t = t.scaled(2.0 / t.trace)

        eig = cm.herm_eigen(t)
        if eig.lam_min < -cm.PSD_RTOL * t.trace:
            raise DomainError("t_corr must be positive semi-definite")
        if not self.allow_singular_t and eig.lam_min <= 1e-12 * t.trace:
            raise DomainError("t_corr must be positive definite")
        cm.rank1_factor(cm.gram(h))  # raises RankError unless rank one
        h.setflags(write=False)
        object.__setattr__(self, "h_bar", h)
        object.__setattr__(self, "t_corr", t)
        object.__setattr__(self, "k_factor", k)

    def with_k(self, k_factor: float) -> "ChannelSpec":
        return ChannelSpec(self.h_bar, self.t_corr, k_factor, self.normalization,
                           self.allow_singular_t)


@dataclass(frozen=True)
class OutageQuery:
    """Normalised SNR threshold ``gamma_th / gamma_bar``."""

    gamma_th_over_gamma_bar: float

    def __post_init__(self):
        g = float(self.gamma_th_over_gamma_bar)
        if not math.isfinite(g) or g <= 0.0:
            raise DomainError(f"threshold ratio must be finite and > 0, got {g}")
        object.__setattr__(self, "gamma_th_over_gamma_bar", g)


@dataclass(frozen=True)
class CurvePoint:
    x: float
    value: float
    terms_used: int
    last_term_mag: float
    converged: bool
    large_k_value: float | None = None
    method: str = "series"


def _threshold(q) -> float:
    if isinstance(q, OutageQuery):
        return q.gamma_th_over_gamma_bar
    return OutageQuery(q).gamma_th_over_gamma_bar


# ---------------------------------------------------------------------------
# parameters


def los_direction(h_bar) -> np.ndarray:
    """Vector ``v`` with ``H_bar^H H_bar = 4 v v^H`` (unit norm for a normalised channel)."""
    lam, alpha = cm.rank1_factor(cm.gram(h_bar))
    return math.sqrt(lam / 4.0) * alpha


def params_by_reparameterisation(ch: ChannelSpec) -> WishartParams:
    """Parameters from the closed-form re-parameterisation in ``K``, ``T`` and ``H_bar``."""
    k = ch.k_factor
    eig = cm.herm_eigen(ch.t_corr)
    lam = np.array([eig.lam_max, eig.lam_min])
    sigma1, sigma2 = (k + 1.0) / lam
    if k == 0.0:
        return WishartParams.central(sigma1, sigma2)
    m = cm.gram(ch.h_bar).to_array()
    t_inv = ch.t_corr.inverse().to_array()
    eta = k * float(np.trace(t_inv @ m).real)
    mu = k * (k + 1.0) * float(np.trace(t_inv @ m @ t_inv).real)
    u = eig.unitary
    lam_inv = np.diag(1.0 / lam)
    r = lam_inv @ u.conj().T @ m @ u @ lam_inv
    alpha = cm.herm_eigen(cm.Herm2.from_array(0.5 * (r + r.conj().T), atol=1e-10)).u_max
    a1, a2 = abs(alpha[0]) ** 2, abs(alpha[1]) ** 2
    return WishartParams(sigma1, sigma2, mu, eta, a1 / (a1 + a2), a2 / (a1 + a2))


def wishart_params_from_channel(ch: ChannelSpec) -> WishartParams:
    """Map a channel to :class:`WishartParams`, computed two ways and cross-checked.

    The first path builds ``Upsilon = sqrt(K/(K+1)) H_bar`` and
    ``Psi = T/(K+1)`` and reduces them with :func:`params_from_gaussian`; the
    second applies the closed-form re-parameterisation in ``K``, ``T`` and
    ``H_bar`` directly.

    Raises
    ------
    SelfCheckFailed
        If the two paths differ by more than ``1e-9`` relative.
    """
    if ch.allow_singular_t and cm.herm_eigen(ch.t_corr).lam_min <= 1e-12 * ch.t_corr.trace:
        raise DomainError("the exact distribution needs a non-singular T")
    k = ch.k_factor
    upsilon = math.sqrt(k / (k + 1.0)) * ch.h_bar
    psi = ch.t_corr.scaled(1.0 / (k + 1.0))
    a = params_from_gaussian(upsilon, psi)
    b = params_by_reparameterisation(ch)
    for name in ("sigma1", "sigma2", "mu", "eta"):
        va, vb = getattr(a, name), getattr(b, name)
        if not math.isclose(va, vb, rel_tol=DUAL_PATH_RTOL, abs_tol=1e-300):
            raise SelfCheckFailed(f"{name}: {va!r} (Gaussian path) vs {vb!r} (direct path)")
    if a.mu > 0.0 and a.sigma1 != a.sigma2:
        for name in ("a1sq", "a2sq"):
            va, vb = getattr(a, name), getattr(b, name)
            if abs(va - vb) > DUAL_PATH_RTOL:
                raise SelfCheckFailed(f"{name}: {va!r} (Gaussian path) vs {vb!r} (direct path)")
    return a


# ---------------------------------------------------------------------------
# exact outage


def series_terms_estimate(params: WishartParams) -> int:
    """Number of k-terms after which the series tail is below ~1e-13.

    Each term is bounded by the Poisson weight ``exp(-m) m^k / k!`` with
    ``m = mu (a1sq / sigma1 + a2sq / sigma2)``, whatever ``x``.
    """
    m = params.mu * (params.a1sq / params.sigma1 + params.a2sq / params.sigma2)
    return int(math.ceil(m + 8.0 * math.sqrt(m) + 20.0))


def _resolve_method(params: WishartParams, method: str) -> str:
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    if method == "auto":
        return "series" if series_terms_estimate(params) <= SERIES_AUTO_KMAX else "direct"
    return method


def _direct_result(params: WishartParams, x: float) -> CdfResult:
    return CdfResult(cdf_max_eig_direct(params, x), 0, 0.0, True)


def outage_probability(ch: ChannelSpec, q, cfg: SeriesConfig | None = None,
                       method: str = "auto") -> CdfResult:
    """Exact outage probability ``P(lambda_max < gamma_th / gamma_bar)``.

    ``method="series"`` sums the k-series; ``"direct"`` uses deterministic
    quadrature; ``"auto"`` picks the series unless it would need more than
    ``SERIES_AUTO_KMAX`` terms (strong line of sight). Direct results report
    ``terms_used = 0``.
    """
    x = _threshold(q)
    params = wishart_params_from_channel(ch)
    if _resolve_method(params, method) == "direct":
        return _direct_result(params, x)
    return cdf_max_eig_curve(params, [x], cfg)[0]


def outage_sweep(ch: ChannelSpec, grid, cfg: SeriesConfig | None = None,
                 include_large_k: bool = False, method: str = "auto") -> list[CurvePoint]:
    """Exact outage (and optionally the large-K approximation) over a threshold grid.

    Non-converged points are flagged in :attr:`CurvePoint.converged`; they do
    not raise.
    """
    xs = np.array([_threshold(q) for q in grid], dtype=np.float64)
    if xs.size == 0:
        raise DomainError("grid must not be empty")
    if np.any(np.diff(xs) <= 0.0):
        raise DomainError("grid must be strictly increasing")
    params = wishart_params_from_channel(ch)
    chosen = _resolve_method(params, method)
    if chosen == "series":
        results = cdf_max_eig_curve(params, xs, cfg)
    else:
        results = [_direct_result(params, float(x)) for x in xs]
    out = []
    for x, r in zip(xs, results):
        lk = large_k_outage(ch, float(x)) if include_large_k else None
        out.append(CurvePoint(float(x), r.value, r.terms_used, r.last_term_mag, r.converged,
                              lk, chosen))
    return out


# ---------------------------------------------------------------------------
# large-K analysis


def large_k_outage(ch: ChannelSpec, q) -> float:
    """Gaussian approximation ``Phi((x - 4) / sqrt(8 v^H T v / K))`` for large ``K``."""
    x = _threshold(q)
    if ch.k_factor <= 0.0:
        raise DomainError("the large-K approximation needs k_factor > 0")
    v = los_direction(ch.h_bar)
    scale = math.sqrt(8.0 * ch.t_corr.quad_form(v) / ch.k_factor)
    return float(std_normal_cdf((x - 4.0) / scale))


def alignment_bounds(ch: ChannelSpec) -> tuple[float, float, float]:
    """``(lambda_min(T), lambda_max(T), v^H T v)``; the last always lies between the first two."""
    eig = cm.herm_eigen(ch.t_corr)
    v = los_direction(ch.h_bar)
    val = ch.t_corr.quad_form(v) / float(np.vdot(v, v).real)
    return eig.lam_min, eig.lam_max, min(max(val, eig.lam_min), eig.lam_max)


def align_los(ch: ChannelSpec, v) -> ChannelSpec:
    """Copy of ``ch`` whose line-of-sight direction is the unit vector ``v``.

    The receive-side direction of ``H_bar`` is kept, so the new mean is
    ``2 w v^H`` with ``w`` the unit left vector of the old one.
    """
    v = np.asarray(v, dtype=np.complex128)
    nv = float(np.linalg.norm(v))
    if v.shape != (2,) or nv == 0.0:
        raise DomainError("v must be a non-zero 2-vector")
    v = v / nv
    w = ch.h_bar @ los_direction(ch.h_bar)
    w = w / np.linalg.norm(w)
    return ChannelSpec(2.0 * np.outer(w, v.conj()), ch.t_corr, ch.k_factor, ch.normalization,
                       ch.allow_singular_t)


def aligned_channel(ch: ChannelSpec, alignment: str) -> ChannelSpec:
    """``alignment`` is ``"leading"`` or ``"least"`` (eigenvector of ``T``) or ``"given"``."""
    if alignment == "given":
        return ch
    eig = cm.herm_eigen(ch.t_corr)
    if alignment == "leading":
        return align_los(ch, eig.u_max)
    if alignment == "least":
        return align_los(ch, eig.u_min)
    raise DomainError("alignment must be 'leading', 'least' or 'given'")

"""CDF of the largest eigenvalue of a 2x2 correlated non-central Wishart matrix.

The matrix is ``W = X^H X`` with ``X ~ CN(Upsilon, I_2 (x) Psi)`` and a
rank-one mean ``Upsilon``. Its law enters only through six scalars, bundled
in :class:`WishartParams`:

* ``sigma1 <= sigma2``: eigenvalues of ``Psi^{-1}``,
* ``mu``: the single non-zero eigenvalue of ``Sigma U^H Upsilon^H Upsilon U Sigma``
  (equivalently ``tr(Psi^{-1} Upsilon^H Upsilon Psi^{-1})``),
* ``eta = tr(Psi^{-1} Upsilon^H Upsilon)``,
* ``a1sq, a2sq``: squared moduli of the unit vector ``alpha`` in that factorisation.

The CDF is the power series::

    F(x) = (s1 s2)^2 x^4 exp(-s1 x - eta) sum_k (x mu)^k / (k+1)! [I_k(x) + J_k(x)]

with finite double sums ``I_k`` (the part of the matrix integral over
``y11 + y22 < 1``) and ``J_k`` (the part over ``y11 + y22 > 1``), both built
from ``1F1`` values with integer parameters.

Numerics
--------
Every ``1F1`` is evaluated in the scaled form ``exp(-max(z, 0)) 1F1(a; b; z)``.
The factor ``exp(-s1 x)`` is folded into the brackets, and every term is
assembled in log-magnitude before exponentiation, so nothing overflows for
large ``x``, ``eta`` or ``k``. The term tuples ``(k, p, j, ...)`` and their
factorial coefficients depend only on ``k``; they are generated once per
``k`` and cached as flat index arrays. One evaluation over an ``x`` grid then
costs a handful of array operations per ``k``.

When ``x mu`` is large (Rician factor of several hundred) the series needs
far more terms than is practical. :func:`cdf_max_eig_direct` evaluates the
same probability by deterministic quadrature over the first column of ``X``
conditioned on which the event is a closed-form hypoexponential probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special as sc

from . import cmatrix2 as cm
from .errors import DomainError, RankError
from .specfun import hyp1f1_scaled, ln_factorial

K_CAP = 512
# J-sum coefficient layouts; see coeff_a3 / coeff_a4 and _plan_for_k
A4_READINGS = ("swapped", "qsum", "moved")
DEFAULT_A4_READING = "swapped"


@dataclass(frozen=True)
class WishartParams:
    """Scalar parameters that fix the law of the largest eigenvalue."""

    sigma1: float
    sigma2: float
    mu: float
    eta: float
    a1sq: float
    a2sq: float

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "mu", "eta", "a1sq", "a2sq"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if not 0.0 < self.sigma1 <= self.sigma2:
            raise DomainError(f"need 0 < sigma1 <= sigma2, got {self.sigma1}, {self.sigma2}")
        if self.mu < 0.0 or self.eta < 0.0:
            raise DomainError("mu and eta must be non-negative")
        if (self.mu == 0.0) != (self.eta == 0.0):
            raise DomainError("mu and eta must vanish together")
        if not (0.0 <= self.a1sq <= 1.0 and 0.0 <= self.a2sq <= 1.0):
            raise DomainError("a1sq and a2sq must lie in [0, 1]")
        if abs(self.a1sq + self.a2sq - 1.0) > 1e-12:
            raise DomainError("a1sq + a2sq must equal 1")

    @classmethod
    def central(cls, sigma1: float, sigma2: float) -> "WishartParams":
        return cls(sigma1, sigma2, 0.0, 0.0, 1.0, 0.0)

    @property
    def mean_column(self) -> np.ndarray:
        """Mean of the non-central column of ``X`` in the frame where ``Psi`` is diagonal."""
        return math.sqrt(self.mu) * np.array(
            [math.sqrt(self.a1sq) / self.sigma1, math.sqrt(self.a2sq) / self.sigma2]
        )


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy of the k-series.

    ``k_max`` is the highest ``k`` summed. With ``auto_extend`` the limit is
    raised to ``ceil(2 x mu) + 16`` where needed, never beyond 512.
    """

    k_max: int = 64
    rel_tol: float = 1e-12
    track_diagnostics: bool = False
    auto_extend: bool = True

    def __post_init__(self):
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise DomainError("k_max must be a positive integer")
        if not 0.0 < self.rel_tol <= 1e-3:
            raise DomainError("rel_tol must lie in (0, 1e-3]")


@dataclass(frozen=True)
class CdfResult:
    value: float
    terms_used: int
    last_term_mag: float
    converged: bool
    terms: tuple = field(default=(), repr=False)


# ---------------------------------------------------------------------------
# parameter extraction


def params_from_gaussian(upsilon, psi: cm.Herm2, rank_tol: float = cm.RANK1_TOL) -> WishartParams:
    """Reduce ``(Upsilon, Psi)`` to :class:`WishartParams`.

    Raises
    ------
    DomainError
        If ``Psi`` is singular or not positive definite.
    RankError
        If ``Upsilon^H Upsilon`` is not numerically rank one.
    """
    upsilon = cm.as_cmat2(upsilon)
    eig = cm.herm_eigen(psi)
    if eig.lam_min <= 1e-14 * abs(psi.trace) or eig.lam_min <= 0.0:
        raise DomainError("Psi must be positive definite")
    sigma1, sigma2 = 1.0 / eig.lam_max, 1.0 / eig.lam_min
    u = eig.unitary
    m = cm.gram(upsilon)
    m_arr = m.to_array()
    psi_inv = psi.inverse().to_array()
    eta = float(np.trace(psi_inv @ m_arr).real)

    sig = np.diag([sigma1, sigma2])
    r = sig @ u.conj().T @ m_arr @ u @ sig
    mu, alpha = cm.rank1_factor(cm.Herm2.from_array(0.5 * (r + r.conj().T), atol=1e-10), rank_tol)
    mu_check = float(np.trace(psi_inv @ m_arr @ psi_inv).real)
    if not math.isclose(mu, mu_check, rel_tol=1e-9, abs_tol=1e-300):
        raise RankError(f"mu = {mu} disagrees with tr(Theta Psi^-1) = {mu_check}")
    if mu == 0.0:
        return WishartParams.central(sigma1, sigma2)
    a1 = abs(alpha[0]) ** 2
    a2 = abs(alpha[1]) ** 2
    s = a1 + a2
    return WishartParams(sigma1, sigma2, mu, max(eta, 0.0), a1 / s, a2 / s)


# ---------------------------------------------------------------------------
# coefficients


def _check_kpj(k, p, j):
    if not (k >= 0 and 0 <= p <= k // 2 and 0 <= j <= k - 2 * p):
        raise DomainError(f"index out of range: k={k}, p={p}, j={j}")
    return k - p - j


def _alpha_log_power(params: WishartParams, c: int, pj: int) -> float:
    out = 0.0
    for base, e in ((params.a1sq, c), (params.a2sq, pj)):
        if e:
            if base == 0.0:
                return -math.inf
            out += e * math.log(base)
    return out


def coeff_a1(k, p, j, params: WishartParams) -> float:
    c = _check_kpj(k, p, j)
    lg = _alpha_log_power(params, c, p + j) - (
        ln_factorial(j) + ln_factorial(p) + ln_factorial(p + 1) + ln_factorial(c - p)
    )
    return math.exp(lg)


def coeff_a2(k, p, j, params: WishartParams) -> float:
    c = _check_kpj(k, p, j)
    lg = (
        _alpha_log_power(params, c, p + j)
        + math.log(p + 1)
        - ln_factorial(j + p + 2)
        - ln_factorial(c + 2)
    )
    return math.exp(lg)


def coeff_a3(k, p, j, l, q, params: WishartParams) -> float:
    """Coefficient printed as ``a3``; independent of ``q`` (kept for the signature)."""
    c = _check_kpj(k, p, j)
    if not 0 <= l <= p + 1:
        raise DomainError(f"l={l} outside [0, {p + 1}]")
    lg = (
        _alpha_log_power(params, c, p + j)
        + math.log(p + 1)
        + ln_factorial(j + l)
        - ln_factorial(j)
        - ln_factorial(l)
        - ln_factorial(p + 1 - l)
        - ln_factorial(c + 2)
    )
    return (-1) ** l * math.exp(lg)


def coeff_a4(k, p, j, l, q, params: WishartParams) -> float:
    """Coefficient printed as ``a4``; carries ``q`` although its printed sum does not."""
    c = _check_kpj(k, p, j)
    if not 0 <= l <= p + 1:
        raise DomainError(f"l={l} outside [0, {p + 1}]")
    if q < 0:
        raise DomainError("q must be non-negative")
    lg = (
        _alpha_log_power(params, c, p + j)
        + ln_factorial(j + l)
        + ln_factorial(p + q + 1)
        - ln_factorial(j)
        - ln_factorial(l)
        - ln_factorial(p)
        - ln_factorial(q)
        - ln_factorial(p + 1 - l)
        - ln_factorial(c + q + 2)
    )
    return (-1) ** l * math.exp(lg)


# ---------------------------------------------------------------------------
# term plans
#
# Every term of e^{-s1 x} (I_k + J_k) has the form
#   sign * exp(logc) * a1sq^pa * a2sq^pb * s^ps * [e^{-z1}] * T[t1] * T[t2]
# with s = x s2, z1 = x s1, zd = x (s2 - s1) and T the scaled 1F1 tables at
# argument z1 (kind 0), zd (kind 1) or s (kind 2).

_Z1, _ZD, _S = 0, 1, 2
FAM_I, FAM_J = 0, 1


@dataclass(frozen=True)
class _KPlan:
    logc: np.ndarray
    sign: np.ndarray
    pa: np.ndarray
    pb: np.ndarray
    ps: np.ndarray
    ez1: np.ndarray
    t1: tuple  # (kind, a, b) arrays
    t2: tuple  # (kind, a, b) arrays; a = 0 means the factor is 1
    fam: np.ndarray


def _lf(n):
    return ln_factorial(np.asarray(n, dtype=np.int64))


def _expand(counts):
    """Owner index and local offset for ragged ranges ``range(counts[i])``."""
    counts = np.asarray(counts, dtype=np.int64)
    owner = np.repeat(np.arange(counts.size), counts)
    starts = np.cumsum(counts) - counts
    return owner, np.arange(owner.size) - starts[owner]


def _pm(v):
    return np.where(v % 2 == 0, 1.0, -1.0)


# plans grow like k^4 (about 9e5 terms at k = 80), so only small ones are kept
_PLAN_CACHE_MAX_K = 48


def _plan_for_k(k: int, reading: str) -> _KPlan:
    if k <= _PLAN_CACHE_MAX_K:
        return _cached_plan(k, reading)
    return _build_plan(k, reading)


@lru_cache(maxsize=None)
def _cached_plan(k: int, reading: str) -> _KPlan:
    return _build_plan(k, reading)


def _build_plan(k: int, reading: str) -> _KPlan:
    if reading not in A4_READINGS:
        raise DomainError(f"unknown a4 reading {reading!r}")
    # all (p, j) with 0 <= p <= k/2 and 0 <= j <= k - 2p
    pp, jj = _expand(k - 2 * np.arange(k // 2 + 1) + 1)
    cc = k - pp - jj
    nn = jj + pp + 1
    lf = _lf
    blocks = []  # (owner, logc, sign, ps, ez1, t1, t2, fam)

    def add(owner, logc, sign, ps, ez1, t1, t2, fam):
        size = owner.size
        full = lambda v: np.broadcast_to(np.asarray(v), (size,))
        blocks.append((owner, full(logc), full(sign), full(ps), full(ez1),
                       tuple(full(v) for v in t1), tuple(full(v) for v in t2), full(fam)))

    base = -(lf(jj) + lf(pp) + lf(pp + 1) + lf(cc - pp))  # a1 without alpha powers
    one = np.arange(pp.size)
    # I_k head: a1 n! / s^{n+1} * 1F1(1; c+3; z1) / (c+2)
    add(one, base + lf(nn) - np.log(cc + 2.0), 1.0, -(nn + 1), False,
        (_Z1, 1, cc + 3), (_Z1, 0, 0), FAM_I)
    # I_k tail, i = 0..n
    o, i = _expand(nn + 1)
    c, n = cc[o], nn[o]
    add(o, base[o] + lf(n) + lf(c + 1) - lf(c + i + 2), -1.0, i - n - 1, True,
        (_ZD, c + 2, c + i + 3), (_Z1, 0, 0), FAM_I)
    # J_k first term
    add(one, np.log(pp + 1.0) - lf(jj + pp + 2) - lf(cc + 2), 1.0, 0, False,
        (_Z1, pp + 2, cc + 3), (_S, pp + 2, jj + pp + 3), FAM_J)
    # single l sum, l = 0..p+1
    ol, l = _expand(pp + 2)
    p, j, c = pp[ol], jj[ol], cc[ol]
    log_a3 = np.log(p + 1.0) + lf(j + l) - lf(j) - lf(l) - lf(p + 1 - l) - lf(c + 2)
    # double (l, q) sum, q = 0..j+l
    ow, q = _expand(jj[ol] + l + 1)
    od = ol[ow]
    ld = l[ow]
    p2, j2, c2 = pp[od], jj[od], cc[od]
    sgn_lq = _pm(ld)
    log_a4 = (lf(j2 + ld) + lf(p2 + q + 1) - lf(j2) - lf(ld) - lf(p2) - lf(q)
              - lf(p2 + 1 - ld) - lf(c2 + q + 2))
    log_a3_lq = (np.log(p2 + 1.0) + lf(j2 + ld) - lf(j2) - lf(ld) - lf(p2 + 1 - ld)
                 - lf(c2 + 2))
    t_double = (_ZD, c2 - p2 + 1, c2 + q + 3)
    ps_double = q - j2 - ld - 1
    if reading == "swapped":
        add(od, log_a4, sgn_lq, ps_double, True, t_double, (_Z1, 0, 0), FAM_J)
        add(ol, log_a3, -_pm(l), -(j + l + 1), False, (_Z1, p + 2, c + 3), (_Z1, 0, 0), FAM_J)
    elif reading == "qsum":
        add(od, log_a3_lq, sgn_lq, ps_double, True, t_double, (_Z1, 0, 0), FAM_J)
        add(od, log_a4, -sgn_lq, -(j2 + ld + 1), False, (_Z1, p2 + 2, c2 + 3), (_Z1, 0, 0), FAM_J)
    else:  # "moved"
        qfac = lf(p2 + q + 1) - lf(q) - lf(c2 + q + 2)
        add(od, log_a3_lq + qfac, sgn_lq, ps_double, True, t_double, (_Z1, 0, 0), FAM_J)
        log_a4_noq = lf(j + l) - lf(j) - lf(l) - lf(p) - lf(p + 1 - l)
        add(ol, log_a4_noq, -_pm(l), -(j + l + 1), False, (_Z1, p + 2, c + 3), (_Z1, 0, 0), FAM_J)

    owner = np.concatenate([b[0] for b in blocks])
    cat = lambda f: np.concatenate([f(b) for b in blocks])
    pa = cc[owner]
    return _KPlan(
        logc=cat(lambda b: b[1]).astype(np.float64),
        sign=cat(lambda b: b[2]).astype(np.float64),
        pa=pa.astype(np.int64),
        pb=(pp + jj)[owner].astype(np.int64),
        ps=cat(lambda b: b[3]).astype(np.float64),
        ez1=cat(lambda b: b[4]).astype(bool),
        t1=tuple(cat(lambda b, m=m: b[5][m]).astype(np.int64) for m in range(3)),
        t2=tuple(cat(lambda b, m=m: b[6][m]).astype(np.int64) for m in range(3)),
        fam=cat(lambda b: b[7]).astype(np.int64),
    )


_KEY_BASE = 1 << 21


def _table_keys(t):
    kind, a, b = t
    return np.where(a > 0, (kind * _KEY_BASE + a) * _KEY_BASE + b, -1)


class _Tables:
    """Scaled 1F1 values for every (kind, a, b) needed by a set of plans."""

    def __init__(self, plans, z1, zd, s):
        codes = [_table_keys(t) for pl in plans for t in (pl.t1, pl.t2)]
        keys = np.unique(np.concatenate(codes)) if codes else np.zeros(0, dtype=np.int64)
        self.keys = keys[keys >= 0]
        nx = z1.size
        table = np.ones((nx, self.keys.size + 1))
        if self.keys.size:
            kind, rest = np.divmod(self.keys, _KEY_BASE * _KEY_BASE)
            a, b = np.divmod(rest, _KEY_BASE)
            zs = np.stack([z1, zd, s])  # (3, nx)
            table[:, 1:] = hyp1f1_scaled(a[None, :], b[None, :], zs[kind].T)
        self.table = table

    def lookup(self, t):
        code = _table_keys(t)
        idx = np.searchsorted(self.keys, code) + 1
        return np.where(code < 0, 0, idx)


def _log_alpha_powers(plan: _KPlan, params: WishartParams) -> np.ndarray:
    out = np.zeros(plan.pa.size)
    for base, e in ((params.a1sq, plan.pa), (params.a2sq, plan.pb)):
        nz = e > 0
        if base == 0.0:
            out[nz] = -np.inf
        else:
            out[nz] += e[nz] * math.log(base)
    return out


_BRACKET_CHUNK = 1 << 21  # elements per (x, term) block


def _bracket_terms(plan, params, tables, idx1, idx2, log_s, z1, extra_log):
    """Per-x sums of the plan's I and J terms, each multiplied by ``exp(extra_log)``.

    Returns ``(i_sum, j_sum, j_abs)`` where ``j_abs`` is the sum of the
    absolute J terms, used to bound the rounding error of ``j_sum``.
    """
    logc = plan.logc + _log_alpha_powers(plan, params)
    is_j = plan.fam == FAM_J
    nx = log_s.size
    i_sum, j_sum, j_abs = np.zeros(nx), np.zeros(nx), np.zeros(nx)
    step = max(1, _BRACKET_CHUNK // max(nx, 1))
    for lo in range(0, logc.size, step):
        sl = slice(lo, lo + step)
        log_mag = (
            logc[None, sl]
            + plan.ps[None, sl] * log_s[:, None]
            - np.where(plan.ez1[None, sl], z1[:, None], 0.0)
            + extra_log[:, None]
        )
        vals = np.exp(log_mag) * tables.table[:, idx1[sl]] * tables.table[:, idx2[sl]]
        signed = plan.sign[None, sl] * vals
        jm = is_j[sl]
        i_sum += signed[:, ~jm].sum(axis=1)
        j_sum += signed[:, jm].sum(axis=1)
        j_abs += vals[:, jm].sum(axis=1)
    return i_sum, j_sum, j_abs


# The closed form of J_k is a full-square term minus a triangle, which cancels
# badly once x s1 is large. Where the rounding bound says so, J_k is instead
# integrated directly over {y11 + y22 > 1}, where the integrand is positive.
_J_CANCEL_LIMIT = 1e-12


def _needs_region2(j_abs, scale):
    return j_abs * (128 * np.finfo(float).eps) > _J_CANCEL_LIMIT * scale


@lru_cache(maxsize=256)
def _unit_gauss(n: int):
    g, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (g + 1.0), 0.5 * w


@lru_cache(maxsize=256)
def _disc_log_coeffs(k: int) -> np.ndarray:
    p = np.arange(k // 2 + 1)
    return (math.log(2.0 * math.pi) + _lf(k) - _lf(k - 2 * p) - 2.0 * _lf(p) - np.log(2.0 * p + 2.0))


def _log_region2(k: int, x, params: WishartParams) -> np.ndarray:
    """``log(exp(s1 x) P2)`` with ``P2`` the region-two part of ``Q_k(x)``.

    With ``y11 = 1 - u`` and ``y22 = u + w`` the region becomes the triangle
    ``u, w > 0, u + w < 1`` and the exponential factor ``exp(-zd u - s w)``
    decays away from its corner, so a Gauss-Legendre product rule truncated
    where that factor drops below ``exp(-k - 50)`` converges quickly. The
    disc integral is accumulated in log form because every term is positive.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    s = x * params.sigma2
    zd = x * (params.sigma2 - params.sigma1)
    reach = k + 50.0 + 8.0 * math.sqrt(k + 1.0)
    n = int(math.ceil(min(reach, float(s.max())) / 3.0)) + k // 2 + 16
    g, w = _unit_gauss(n)
    with np.errstate(divide="ignore"):
        lu = np.where(zd > 0.0, np.minimum(1.0, reach / np.where(zd > 0.0, zd, 1.0)), 1.0)
        u = lu[:, None, None] * g[None, :, None]  # (nx, n, 1)
        lw = np.minimum(1.0 - u, reach / s[:, None, None])
        ww = lw * g[None, None, :]
        log_wt = np.log(lw * w[None, None, :] * (lu[:, None, None] * w[None, :, None]))
        lin = params.a1sq * (1.0 - u) + params.a2sq * (u + ww)
        rad = u * (1.0 - u - ww)
        ab = params.a1sq * params.a2sq
        lc = _disc_log_coeffs(k)
        lc = lc + np.arange(lc.size) * math.log(ab) if ab > 0.0 else lc[:1]
        lc_max = float(lc.max())
        c = np.exp(lc - lc_max)
        # D_k = sum_p c_p lin^(k-2p) rad^(p+1) is homogeneous in (lin^2, rad);
        # scaling both by m = max(lin^2, rad) keeps every power below one
        m = np.maximum(lin * lin, rad)
        a_sq = lin * lin / m
        b_r = rad / m
        if k % 2:
            head = lin / np.sqrt(m)
        else:
            head = 1.0
        # homogeneous Horner: sum_p c_p b_r^p a_sq^(top - p)
        top = lc.size - 1
        poly = np.full(lin.shape, c[-1])
        a_pow = a_sq
        for cp in c[-2::-1]:
            poly = poly * b_r + cp * a_pow
            a_pow = a_pow * a_sq
        if k // 2 > top:
            poly = poly * a_sq ** (k // 2 - top)
        log_d = (lc_max + np.log(rad) + (k / 2.0) * np.log(m) + np.log(poly * head))
        log_f = log_d - zd[:, None, None] * u - s[:, None, None] * ww + log_wt
    log_f = log_f.reshape(x.size, -1)
    peak = log_f.max(axis=1)
    return peak + np.log(np.exp(log_f - peak[:, None]).sum(axis=1))


def _stable_J(k, x, params, j_sum, j_abs, scale, extra_log):
    """Replace closed-form J sums whose rounding error could exceed
    ``1e-12 * scale`` by the region-two integral."""
    bad = np.flatnonzero(_needs_region2(j_abs, scale))
    if bad.size:
        j_sum = j_sum.copy()
        shift = math.log(math.pi) + ln_factorial(k)
        xb = x[bad]
        j_sum[bad] = np.exp(extra_log[bad] + _log_region2(k, xb, params)
                            - xb * params.sigma1 - shift)
    return j_sum


def _scaled_IJ(k: int, x, params: WishartParams, reading: str = DEFAULT_A4_READING):
    """``exp(-s1 x) I_k(x)`` and ``exp(-s1 x) J_k(x)`` on an array of ``x > 0``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(x <= 0.0):
        raise DomainError("I_k and J_k need x > 0")
    z1 = x * params.sigma1
    s = x * params.sigma2
    zd = x * (params.sigma2 - params.sigma1)
    plan = _plan_for_k(k, reading)
    tables = _Tables([plan], z1, zd, s)
    i1, i2 = tables.lookup(plan.t1), tables.lookup(plan.t2)
    zero = np.zeros_like(x)
    i_part, j_part, j_abs = _bracket_terms(plan, params, tables, i1, i2, np.log(s), z1, zero)
    if reading == DEFAULT_A4_READING:
        j_part = _stable_J(k, x, params, j_part, j_abs, np.abs(i_part) + np.abs(j_part), zero)
    return i_part, j_part


def calI(k: int, x: float, params: WishartParams) -> float:
    """The finite double sum ``I_k(x)`` (unscaled)."""
    if k < 0:
        raise DomainError("k must be non-negative")
    i_part, _ = _scaled_IJ(k, x, params)
    return float(i_part[0] * math.exp(x * params.sigma1))


def calJ(k: int, x: float, params: WishartParams, reading: str = DEFAULT_A4_READING) -> float:
    """The finite sum ``J_k(x)`` (unscaled); ``reading`` selects the coefficient layout."""
    if k < 0:
        raise DomainError("k must be non-negative")
    _, j_part = _scaled_IJ(k, x, params, reading)
    return float(j_part[0] * math.exp(x * params.sigma1))


def series_Qk(k: int, x, params: WishartParams, reading: str = DEFAULT_A4_READING):
    """``pi k! exp(-s1 x) (I_k + J_k)``, the series side of the matrix-integral identity."""
    i_part, j_part = _scaled_IJ(k, x, params, reading)
    out = math.pi * math.exp(ln_factorial(k)) * (i_part + j_part)
    return float(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# the series


def _effective_kmax(cfg: SeriesConfig, x: np.ndarray, mu: float) -> np.ndarray:
    kmax = np.full(x.shape, int(cfg.k_max), dtype=np.int64)
    if cfg.auto_extend:
        guard = np.ceil(2.0 * x * mu).astype(np.int64) + 16
        kmax = np.minimum(np.maximum(kmax, guard), K_CAP)
    return kmax


def cdf_max_eig_curve(params: WishartParams, x, cfg: SeriesConfig | None = None,
                      reading: str = DEFAULT_A4_READING) -> list[CdfResult]:
    """Evaluate the series on an array of thresholds; one :class:`CdfResult` each."""
    cfg = cfg or SeriesConfig()
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(~np.isfinite(x)) or np.any(x < 0.0):
        raise DomainError("x must be finite and non-negative")
    nx = x.size
    value = np.zeros(nx)
    terms_used = np.ones(nx, dtype=np.int64)
    last = np.zeros(nx)
    converged = np.ones(nx, dtype=bool)
    history = [[] for _ in range(nx)]

    pos = np.flatnonzero(x > 0.0)
    if pos.size:
        xp = x[pos]
        kmax = _effective_kmax(cfg, xp, params.mu)
        if params.mu == 0.0:
            kmax[:] = 0
        z1 = xp * params.sigma1
        zd = xp * (params.sigma2 - params.sigma1)
        s = xp * params.sigma2
        log_s = np.log(s)
        log_pref0 = 2.0 * math.log(params.sigma1 * params.sigma2) + 4.0 * np.log(xp) - params.eta
        log_xmu = np.log(xp * params.mu) if params.mu > 0.0 else np.full(xp.size, -np.inf)

        partial = np.zeros(xp.size)
        quiet = np.zeros(xp.size, dtype=np.int64)
        done = np.zeros(xp.size, dtype=bool)
        used = np.zeros(xp.size, dtype=np.int64)
        last_t = np.zeros(xp.size)

        k_plan = 0
        tables = None
        plans = {}
        k = 0
        while not np.all(done):
            active = np.flatnonzero(~done)
            if k > k_plan or tables is None:
                # windows of plans, short once the plans get large
                k_next = max(2 * k_plan, 16, k) if k < 32 else k + 3
                k_plan = int(min(k_next, kmax[active].max()))
                plans = {kk: _plan_for_k(kk, reading) for kk in range(k, k_plan + 1)}
                tables = _Tables(plans.values(), z1, zd, s)
                lookups = {kk: (tables.lookup(pl.t1), tables.lookup(pl.t2)) for kk, pl in plans.items()}
            plan = plans[k]
            i1, i2 = lookups[k]
            extra = log_pref0 + (k * log_xmu if k else 0.0) - ln_factorial(k + 1)
            ti, tj, tj_abs = _bracket_terms(plan, params, _Sub(tables, active), i1, i2,
                                            log_s[active], z1[active], extra[active])
            if reading == DEFAULT_A4_READING:
                scale = np.maximum(np.abs(partial[active] + ti), np.abs(ti))
                tj = _stable_J(k, xp[active], params, tj, tj_abs, scale, extra[active])
            t = ti + tj
            partial[active] += t
            used[active] = k + 1
            last_t[active] = np.abs(t)
            if cfg.track_diagnostics:
                for ai, tv in zip(active, t):
                    history[pos[ai]].append(float(tv))
            small = np.abs(t) <= cfg.rel_tol * np.abs(partial[active])
            small |= (t == 0.0) & (partial[active] == 0.0)
            quiet[active] = np.where(small, quiet[active] + 1, 0)
            finished = quiet[active] >= 2
            at_cap = (k >= kmax[active]) & ~finished
            done[active[finished | at_cap]] = True
            converged[pos[active[at_cap]]] = params.mu == 0.0
            k += 1

        value[pos] = partial
        terms_used[pos] = used
        last[pos] = last_t

    value = np.clip(np.nan_to_num(value, nan=0.0), 0.0, 1.0)
    return [
        CdfResult(float(value[i]), int(terms_used[i]), float(last[i]), bool(converged[i]),
                  tuple(history[i]))
        for i in range(nx)
    ]


class _Sub:
    """Row view of a :class:`_Tables` restricted to the active thresholds."""

    def __init__(self, tables: _Tables, rows: np.ndarray):
        self.table = tables.table[rows]


def cdf_max_eig(params: WishartParams, x: float, cfg: SeriesConfig | None = None,
                reading: str = DEFAULT_A4_READING) -> CdfResult:
    """``P(lambda_max <= x)`` by the truncated k-series.

    The sum stops at the first ``k`` after which two consecutive terms are
    below ``rel_tol`` relative to the partial sum, or at the effective
    ``k_max`` (then ``converged`` is ``False``). The value is clamped to
    ``[0, 1]``; ``x = 0`` gives exactly 0.
    """
    return cdf_max_eig_curve(params, [x], cfg, reading)[0]


# ---------------------------------------------------------------------------
# conditional-Gaussian quadrature


def _mapped_gauss(lo: float, hi: float, center: float, width: float, n: int):
    """Gauss-Legendre nodes on ``[lo, hi]`` clustered at ``center`` by a sinh map."""
    g, w = np.polynomial.legendre.leggauss(n)
    width = max(width, 1e-300)
    c = min(max(center, lo), hi)
    a, b = math.asinh((lo - c) / width), math.asinh((hi - c) / width)
    xi = 0.5 * (b - a) * g + 0.5 * (b + a)
    y = c + width * np.sinh(xi)
    wy = 0.5 * (b - a) * w * width * np.cosh(xi)
    return y, wy


def _conditional_prob(rho2, h, x, omega1, omega2):
    """``P(c2^H (x I - c c^H)^{-1} c2 < 1)`` for ``c2 ~ CN(0, diag(omega))``."""
    gap = x - rho2
    tr = (omega1 + omega2) / x + rho2 * h / (x * gap)
    det = omega1 * omega2 / (x * gap)
    disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
    beta_max = 0.5 * (tr + disc)
    lam1 = 1.0 / beta_max
    d = disc / det
    # 1 - P(beta1 E1 + beta2 E2 > 1), written for small lam1 and near-equal rates
    return -np.expm1(-lam1) - lam1 * np.exp(-lam1) * sc.exprel(-d)


def direct_node_count(params: WishartParams) -> int:
    """Nodes per axis for :func:`cdf_max_eig_direct`; more as the law concentrates."""
    if params.eta <= 60.0:
        return 48
    if params.eta <= 200.0:
        return 64
    return 96


def cdf_max_eig_direct(params: WishartParams, x: float, n_nodes: int | None = None) -> float:
    """``P(lambda_max <= x)`` by quadrature, valid for any ``mu``.

    With ``Psi`` diagonalised, ``W = c1 c1^H + c2 c2^H`` where
    ``c1 ~ CN(m, Psi)`` carries the rank-one mean and ``c2 ~ CN(0, Psi)``.
    Given ``c1`` (with ``|c1|^2 < x``) the event ``W < x I`` is
    ``c2^H (x I - c1 c1^H)^{-1} c2 < 1``, a weighted sum of two unit
    exponentials. What remains is the expectation over ``c1``: the global
    phase is integrated in closed form (a Bessel ``I0``) and the other three
    coordinates by Gauss-Legendre rules clustered around the mean.
    ``n_nodes`` defaults to :func:`direct_node_count`.
    """
    x = float(x)
    if n_nodes is None:
        n_nodes = direct_node_count(params)
    elif n_nodes < 8:
        raise DomainError("n_nodes must be at least 8")
    if x < 0.0 or not math.isfinite(x):
        raise DomainError("x must be finite and non-negative")
    if x == 0.0:
        return 0.0
    s1, s2 = params.sigma1, params.sigma2
    om1, om2 = 1.0 / s1, 1.0 / s2
    m1, m2 = params.mean_column
    m_norm = math.hypot(m1, m2)
    spread = math.sqrt(0.5 * om1)

    root_x = math.sqrt(x)
    rho_c = min(m_norm, root_x)
    # g drops from 1 to 0 over |c1|^2 in (x - few * om1, x); give that edge its own panel
    edge = 0.5 * om1 / root_x
    split = root_x - 40.0 * edge
    if split > 0.25 * root_x:
        rho_a, w_a = _mapped_gauss(0.0, split, min(rho_c, split), spread, n_nodes)
        rho_b, w_b = _mapped_gauss(split, root_x, root_x, edge, n_nodes)
        rho, w_rho = np.concatenate([rho_a, rho_b]), np.concatenate([w_a, w_b])
    else:
        rho, w_rho = _mapped_gauss(0.0, root_x, rho_c, spread, n_nodes)
    t0 = math.atan2(m2, m1) if m_norm > 0 else math.pi / 4
    w_t = min(math.pi, spread / max(m_norm, spread))
    t, w_t_ = _mapped_gauss(0.0, 0.5 * math.pi, t0, w_t, n_nodes)
    w_phi = min(math.pi, spread / max(m_norm * math.sin(t0) * math.cos(t0), spread))
    phi, w_phi_ = _mapped_gauss(-math.pi, math.pi, 0.0, w_phi, n_nodes)

    R = rho[:, None, None]
    T = t[None, :, None]
    P = phi[None, None, :]
    ct, st = np.cos(T), np.sin(T)
    q = s1 * ct**2 + s2 * st**2
    h = om1 * ct**2 + om2 * st**2
    wa = s1 * m1 * ct
    wb = s2 * m2 * st
    w_abs = np.sqrt(np.maximum(wa**2 + wb**2 + 2.0 * wa * wb * np.cos(P), 0.0))
    m_pm = s1 * m1**2 + s2 * m2**2
    arg = 2.0 * R * w_abs
    log_dens = (
        math.log(2.0 / (math.pi * om1 * om2))
        - R**2 * q
        - m_pm
        + arg
        + np.log(sc.i0e(arg))
        + 3.0 * np.log(R)
        + np.log(st * ct)
    )
    g = _conditional_prob(R**2, h, x, om1, om2)
    integrand = np.exp(log_dens) * g
    val = np.einsum("ijk,i,j,k->", integrand, w_rho, w_t_, w_phi_)
    return float(min(max(val, 0.0), 1.0))

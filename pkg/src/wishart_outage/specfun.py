"""Scalar special functions: 1F1 with integer parameters, log-factorials, Phi.

The confluent hypergeometric function is only ever needed with positive
integer parameters ``a <= b``. For a non-negative argument its power series
has positive terms, so it is summed directly; a negative argument goes through
Kummer's transformation ``1F1(a; b; x) = exp(x) 1F1(b - a; b; -x)`` first.

:func:`hyp1f1_scaled` is the workhorse of the CDF engine. It returns
``exp(-max(x, 0)) * 1F1(a; b; x)``, which stays in ``[0, 1]`` for every
``1 <= a <= b`` and therefore never overflows.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

from .errors import DomainError, NonConvergence

HYP1F1_MAX_ABS_X = 1e4
HYP1F1_MAX_TERMS = 10_000
# above this the plain series would overflow before scaling
_DIRECT_SERIES_LIMIT = 600.0

_LNFACT_TABLE_SIZE = 4096
_LNFACT = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, _LNFACT_TABLE_SIZE)))))


def ln_factorial(n):
    """``log(n!)`` from a cumulative log-sum table (``lgamma`` past the table)."""
    if np.ndim(n) == 0:
        n = int(n)
        if n < 0:
            raise DomainError("ln_factorial needs n >= 0")
        if n < _LNFACT_TABLE_SIZE:
            return float(_LNFACT[n])
        return math.lgamma(n + 1.0)
    n = np.asarray(n, dtype=np.int64)
    if np.any(n < 0):
        raise DomainError("ln_factorial needs n >= 0")
    if np.all(n < _LNFACT_TABLE_SIZE):
        return _LNFACT[n]
    return sc.gammaln(n + 1.0)


def _check_int_params(a, b):
    if int(a) != a or int(b) != b:
        raise DomainError("hyp1f1_int takes integer parameters only")
    a, b = int(a), int(b)
    if a < 0 or b < 1 or b < a:
        raise DomainError(f"need 0 <= a <= b and b >= 1, got a={a}, b={b}")
    return a, b


def _series_positive(a: int, b: int, x: float, rel_tol: float) -> float:
    """Unscaled ascending series for ``x >= 0``."""
    term = 1.0
    total = 1.0
    quiet = 0
    for n in range(HYP1F1_MAX_TERMS):
        term *= (a + n) * x / ((b + n) * (n + 1.0))
        total += term
        if term <= rel_tol * total:
            quiet += 1
            if quiet == 3:
                return total
        else:
            quiet = 0
    raise NonConvergence(f"1F1({a};{b};{x}) did not converge in {HYP1F1_MAX_TERMS} terms")


def _scaled_poisson(a: int, b: int, x: float, rel_tol: float) -> float:
    """``exp(-x) 1F1(a; b; x)`` for large positive ``x``.

    Uses ``exp(-x) 1F1(a; b; x) = E[(a)_N / (b)_N]`` with ``N ~ Poisson(x)``
    and sums the Poisson weights over a window around the mode.
    """
    width = 40.0 * math.sqrt(x) + 50.0
    n_lo = max(0, int(x - width))
    n_hi = int(x + width) + 1
    n = np.arange(n_lo, n_hi, dtype=np.float64)
    log_w = -x + n * math.log(x) - sc.gammaln(n + 1.0)
    log_r = sc.gammaln(a + n) - sc.gammaln(b + n) + math.lgamma(b) - (math.lgamma(a) if a > 0 else 0.0)
    if a == 0:
        log_r = np.where(n == 0, 0.0, -np.inf)
    return float(np.sum(np.exp(log_w + log_r)))


def hyp1f1_int(a, b, x, rel_tol: float = 1e-16) -> float:
    """Confluent hypergeometric ``1F1(a; b; x)`` for integer ``0 <= a <= b``.

    Parameters
    ----------
    a, b : int
        Integer parameters with ``b >= a`` and ``b >= 1``.
    x : float
        Argument, ``|x| <= 1e4``.

    Raises
    ------
    DomainError
        For parameters or arguments outside the supported range.
    NonConvergence
        If the series needs more than 10 000 terms.
    OverflowError
        If the value itself exceeds the float range (large positive ``x``);
        use :func:`hyp1f1_scaled` there.
    """
    a, b = _check_int_params(a, b)
    x = float(x)
    if not math.isfinite(x) or abs(x) > HYP1F1_MAX_ABS_X:
        raise DomainError(f"|x| must be <= {HYP1F1_MAX_ABS_X:g}, got {x}")
    if a == 0 or x == 0.0:
        return 1.0
    if x > 0.0:
        if x <= _DIRECT_SERIES_LIMIT:
            return _series_positive(a, b, x, rel_tol)
        log_val = x + math.log(_scaled_poisson(a, b, x, rel_tol))
        return math.exp(log_val)
    # Kummer: 1F1(a; b; x) = e^x 1F1(b-a; b; -x) = scaled(b-a, b, -x)
    return hyp1f1_scaled_scalar(b - a, b, -x, rel_tol)


def hyp1f1_scaled_scalar(a, b, x, rel_tol: float = 1e-16) -> float:
    """``exp(-max(x, 0)) * 1F1(a; b; x)`` for one set of arguments."""
    a, b = _check_int_params(a, b)
    x = float(x)
    if not math.isfinite(x) or abs(x) > HYP1F1_MAX_ABS_X:
        raise DomainError(f"|x| must be <= {HYP1F1_MAX_ABS_X:g}, got {x}")
    if x < 0.0:
        return hyp1f1_scaled_scalar(b - a, b, -x, rel_tol)
    if a == 0:
        return math.exp(-x)
    if x <= _DIRECT_SERIES_LIMIT:
        return _series_positive(a, b, x, rel_tol) * math.exp(-x)
    return _scaled_poisson(a, b, x, rel_tol)


_BLOCK = 16


def hyp1f1_scaled(a, b, x, rel_tol: float = 1e-16) -> np.ndarray:
    """Vectorised ``exp(-max(x, 0)) * 1F1(a; b; x)``.

    ``a``, ``b`` and ``x`` broadcast against each other; ``a`` and ``b`` must
    be integers with ``0 <= a <= b``. All terms are summed in one pass with a
    shrinking active set, using the same three-quiet-terms stopping rule as the
    scalar routine.
    """
    a, b, x = np.broadcast_arrays(
        np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64), np.asarray(x, dtype=np.float64)
    )
    if np.any(a < 0) or np.any(b < 1) or np.any(b < a):
        raise DomainError("need 0 <= a <= b and b >= 1")
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > HYP1F1_MAX_ABS_X):
        raise DomainError(f"|x| must be <= {HYP1F1_MAX_ABS_X:g}")
    shape = x.shape
    # Kummer moves every argument onto the non-negative axis
    neg = x < 0.0
    a = np.where(neg, b - a, a).ravel()
    b = b.ravel()
    z = np.abs(x).ravel()
    out = np.empty(z.shape, dtype=np.float64)

    big = z > _DIRECT_SERIES_LIMIT
    for idx in np.flatnonzero(big):
        out[idx] = _scaled_poisson(int(a[idx]), int(b[idx]), float(z[idx]), rel_tol)

    idx = np.flatnonzero(~big)
    if idx.size:
        af = a[idx].astype(np.float64)
        bf = b[idx].astype(np.float64)
        zf = z[idx]
        term = np.ones(idx.size)
        total = np.ones(idx.size)
        quiet = np.zeros(idx.size, dtype=np.int64)
        active = np.arange(idx.size)
        n = 0
        while active.size:
            # a block of terms per compaction of the active set; entries that
            # finish inside a block are frozen by the mask
            t, tot, q = term[active], total[active], quiet[active]
            aa, bb, zz = af[active], bf[active], zf[active]
            for _ in range(_BLOCK):
                if n >= HYP1F1_MAX_TERMS:
                    raise NonConvergence("vectorised 1F1 series did not converge")
                live = q < 3
                step = t * (aa + n) * zz / ((bb + n) * (n + 1.0))
                t = np.where(live, step, t)
                tot = np.where(live, tot + step, tot)
                small = step <= rel_tol * tot
                q = np.where(live, np.where(small, q + 1, 0), q)
                n += 1
            term[active], total[active], quiet[active] = t, tot, q
            active = active[q < 3]
        out[idx] = total * np.exp(-zf)
    return out.reshape(shape)


def std_normal_cdf(z):
    """Standard normal CDF through ``Phi(z) = erfc(-z / sqrt(2)) / 2``."""
    if np.ndim(z) == 0:
        return float(0.5 * sc.erfc(-float(z) / math.sqrt(2.0)))
    return 0.5 * sc.erfc(-np.asarray(z, dtype=np.float64) / math.sqrt(2.0))

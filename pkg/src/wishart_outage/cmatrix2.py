"""Closed-form linear algebra for 2x2 complex matrices.

General complex matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and
dtype ``complex128``. Hermitian matrices get their own small value type,
:class:`Herm2`, which stores only the two real diagonal entries and the upper
off-diagonal entry, so Hermitian symmetry holds by construction.

Nothing here calls into LAPACK: every eigenvalue, eigenvector and square root
is written out explicitly for the 2x2 case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RankError

PSD_RTOL = 1e-12
RANK1_TOL = 1e-9


def _check_finite_complex(z, name: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return z


def as_cmat2(x) -> np.ndarray:
    """Validate and copy ``x`` into a finite complex 2x2 array."""
    a = np.array(x, dtype=np.complex128)
    if a.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    return a


@dataclass(frozen=True)
class Herm2:
    """Hermitian 2x2 matrix ``[[d1, o], [conj(o), d2]]``."""

    d1: float
    d2: float
    o: complex = 0j

    def __post_init__(self):
        for name in ("d1", "d2"):
            v = getattr(self, name)
            if isinstance(v, complex):
                if v.imag != 0.0:
                    raise DomainError(f"{name} must be real for a Hermitian matrix")
                v = v.real
            v = float(v)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "o", _check_finite_complex(self.o, "o"))

    @classmethod
    def from_array(cls, a, atol: float = 1e-12) -> "Herm2":
        """Build from a 2x2 array, checking Hermitian symmetry to ``atol`` (scaled)."""
        a = as_cmat2(a)
        scale = max(1.0, float(np.max(np.abs(a))))
        if abs(a[0, 1] - np.conj(a[1, 0])) > atol * scale:
            raise DomainError("matrix is not Hermitian")
        if abs(a[0, 0].imag) > atol * scale or abs(a[1, 1].imag) > atol * scale:
            raise DomainError("Hermitian matrix must have a real diagonal")
        o = 0.5 * (a[0, 1] + np.conj(a[1, 0]))
        return cls(float(a[0, 0].real), float(a[1, 1].real), complex(o))

    @classmethod
    def psd(cls, d1, d2, o=0j, tol: float | None = None) -> "Herm2":
        """Constructor for contexts that require positive semi-definiteness."""
        h = cls(d1, d2, o)
        h.check_psd(tol)
        return h

    @classmethod
    def identity(cls) -> "Herm2":
        return cls(1.0, 1.0, 0j)

    def check_psd(self, tol: float | None = None) -> "Herm2":
        if tol is None:
            tol = PSD_RTOL * max(abs(self.trace), 1e-300)
        if self.d1 < -tol or self.d2 < -tol or self.det < -tol * max(1.0, abs(self.trace)):
            raise DomainError(
                f"matrix is not positive semi-definite (d1={self.d1}, d2={self.d2}, det={self.det})"
            )
        return self

    @property
    def trace(self) -> float:
        return self.d1 + self.d2

    @property
    def det(self) -> float:
        return self.d1 * self.d2 - (self.o.real * self.o.real + self.o.imag * self.o.imag)

    @property
    def max_abs(self) -> float:
        return max(abs(self.d1), abs(self.d2), abs(self.o))

    def to_array(self) -> np.ndarray:
        return np.array([[self.d1, self.o], [self.o.conjugate(), self.d2]], dtype=np.complex128)

    def scaled(self, c: float) -> "Herm2":
        return Herm2(c * self.d1, c * self.d2, c * self.o)

    def quad_form(self, v) -> float:
        """Return ``v^H A v`` for a complex 2-vector ``v``."""
        v0, v1 = complex(v[0]), complex(v[1])
        val = (
            self.d1 * abs(v0) ** 2
            + self.d2 * abs(v1) ** 2
            + 2.0 * (v0.conjugate() * self.o * v1).real
        )
        return float(val)

    def inverse(self) -> "Herm2":
        d = self.det
        if d == 0.0:
            raise DomainError("matrix is singular")
        return Herm2(self.d2 / d, self.d1 / d, -self.o / d)


@dataclass(frozen=True)
class EigenPair2:
    """Ordered eigen-decomposition of a :class:`Herm2`."""

    lam_max: float
    lam_min: float
    u_max: np.ndarray
    u_min: np.ndarray

    @property
    def unitary(self) -> np.ndarray:
        """Matrix whose columns are ``u_max`` and ``u_min``."""
        return np.column_stack([self.u_max, self.u_min])

    def reconstruct(self) -> np.ndarray:
        u = self.unitary
        return (u * np.array([self.lam_max, self.lam_min])) @ u.conj().T


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # largest-modulus component made real and non-negative (first one wins ties)
    k = 0 if abs(v[0]) >= abs(v[1]) else 1
    if v[k] == 0:
        return v
    return v * (abs(v[k]) / v[k])


def herm_eigen(a: Herm2) -> EigenPair2:
    """Eigenvalues and unit eigenvectors of a Hermitian 2x2 matrix.

    The discriminant is formed as ``(d1 - d2)**2 + 4|o|**2`` so it never
    suffers from the cancellation in ``tr**2 - 4 det``. The smaller-magnitude
    eigenvalue comes from ``det / lam`` for the same reason.
    """
    d1, d2, o = a.d1, a.d2, a.o
    tr = d1 + d2
    ao = abs(o)
    root = math.hypot(d1 - d2, 2.0 * ao)
    if tr >= 0.0:
        lam_max = 0.5 * (tr + root)
        lam_min = a.det / lam_max if lam_max != 0.0 else 0.5 * (tr - root)
    else:
        lam_min = 0.5 * (tr - root)
        lam_max = a.det / lam_min
    lam_min = min(lam_min, lam_max)

    if ao == 0.0:
        if d1 >= d2:
            u_max = np.array([1.0, 0.0], dtype=np.complex128)
        else:
            u_max = np.array([0.0, 1.0], dtype=np.complex128)
    else:
        # pick the eigenvector form whose second entry has no cancellation
        if d1 >= d2:
            v = np.array([0.5 * ((d1 - d2) + root), o.conjugate()], dtype=np.complex128)
        else:
            v = np.array([o, 0.5 * ((d2 - d1) + root)], dtype=np.complex128)
        # exact power-of-two rescale so subnormal entries do not overflow
        e = math.frexp(max(abs(v[0]), abs(v[1])))[1]
        v = np.ldexp(v.real, -e) + 1j * np.ldexp(v.imag, -e)
        u_max = v / math.hypot(abs(v[0]), abs(v[1]))
    u_max = _fix_phase(u_max)
    u_min = _fix_phase(np.array([-np.conj(u_max[1]), np.conj(u_max[0])], dtype=np.complex128))
    return EigenPair2(float(lam_max), float(lam_min), u_max, u_min)


def gram(x) -> Herm2:
    """Return ``X^H X`` as a :class:`Herm2`."""
    x = as_cmat2(x)
    c0, c1 = x[:, 0], x[:, 1]
    d1 = float(np.sum(c0.real**2 + c0.imag**2))
    d2 = float(np.sum(c1.real**2 + c1.imag**2))
    o = complex(np.vdot(c0, c1))
    return Herm2.psd(d1, d2, o, tol=PSD_RTOL * max(d1 + d2, 1e-300) * 4)


def rank1_factor(a: Herm2, tol: float = RANK1_TOL) -> tuple[float, np.ndarray]:
    """Factor a rank-one PSD matrix as ``mu * alpha alpha^H``.

    Returns ``mu`` (the leading eigenvalue) and the unit vector ``alpha``.
    The zero matrix factors as ``mu = 0`` with ``alpha = e1``.

    Raises
    ------
    RankError
        If ``lam_min / lam_max > tol``.
    """
    a.check_psd(PSD_RTOL * max(abs(a.trace), 1e-300) * 4)
    e = herm_eigen(a)
    if e.lam_max <= 0.0:
        return 0.0, np.array([1.0, 0.0], dtype=np.complex128)
    ratio = e.lam_min / e.lam_max
    if ratio > tol:
        raise RankError(
            f"matrix is not rank one: lam_min/lam_max = {ratio:.3e} exceeds {tol:.1e}"
        )
    return e.lam_max, e.u_max


def psd_sqrt(a: Herm2) -> Herm2:
    """Hermitian PSD square root through the eigen-decomposition."""
    a.check_psd()
    e = herm_eigen(a)
    s_max = math.sqrt(max(e.lam_max, 0.0))
    s_min = math.sqrt(max(e.lam_min, 0.0))
    u, w = e.u_max, e.u_min
    d1 = s_max * abs(u[0]) ** 2 + s_min * abs(w[0]) ** 2
    d2 = s_max * abs(u[1]) ** 2 + s_min * abs(w[1]) ** 2
    o = s_max * u[0] * np.conj(u[1]) + s_min * w[0] * np.conj(w[1])
    return Herm2(float(d1), float(d2), complex(o))


def max_eig_gram(x) -> float:
    """Largest eigenvalue of ``X^H X``; never negative."""
    return max(herm_eigen(gram(x)).lam_max, 0.0)


def max_eig_gram_batch(x: np.ndarray) -> np.ndarray:
    """Vectorised ``max_eig_gram`` over an array of shape ``(..., 2, 2)``."""
    x = np.asarray(x)
    c0 = x[..., :, 0]
    c1 = x[..., :, 1]
    w11 = np.sum(c0.real**2 + c0.imag**2, axis=-1)
    w22 = np.sum(c1.real**2 + c1.imag**2, axis=-1)
    w12 = np.sum(np.conj(c0) * c1, axis=-1)
    return 0.5 * (w11 + w22 + np.hypot(w11 - w22, 2.0 * np.abs(w12)))


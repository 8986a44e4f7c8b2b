"""Jacobi elliptic functions and the complete elliptic integral K.

Everything here uses the *parameter* convention ``m = k**2`` (the squared
modulus).  Negative parameters are supported through the reciprocal-modulus
style reduction to a parameter in ``(0, 1/2)``, which is what the Larmor
vector needs when the polarization pushes ``(1 - 2 eps**2)`` below zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_ITER = 24
AGM_TOL = 1e-16


class DomainError(ValueError):
    """Raised for arguments outside the supported real domain."""


@dataclass(frozen=True)
class EllipticParameter:
    m: float

    def __post_init__(self):
        m = float(self.m)
        if not math.isfinite(m) or abs(m) >= 1.0:
            raise DomainError(f"elliptic parameter m={self.m!r} outside (-1, 1)")
        object.__setattr__(self, "m", m)

    def __float__(self):
        return self.m


@dataclass(frozen=True)
class JacobiTriple:
    u: float
    sn: float
    cn: float
    dn: float


def _check_m(m) -> float:
    if isinstance(m, EllipticParameter):
        return m.m
    return EllipticParameter(m).m


def _agm_sequence(m: float):
    """Descending Landen / AGM sequences (a_n, c_n) for 0 <= m < 1."""
    a, b, c = 1.0, math.sqrt(1.0 - m), math.sqrt(m)
    a_seq, c_seq = [a], [c]
    for _ in range(MAX_ITER):
        if abs(c) <= AGM_TOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
    return a_seq, c_seq


def complete_k(m) -> float:
    """Quarter period K(m) via the arithmetic-geometric mean.

    >>> complete_k(0.0) == math.pi / 2
    True
    """
    m = _check_m(m)
    if m < 0.0:
        m1 = -m / (1.0 - m)
        return complete_k(m1) / math.sqrt(1.0 - m)
    a_seq, _ = _agm_sequence(m)
    return math.pi / (2.0 * a_seq[-1])


def _sncndn_positive(u: np.ndarray, m: float):
    """sn, cn, dn for 0 <= m < 1 and an array of arguments."""
    if m == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    a_seq, c_seq = _agm_sequence(m)
    n = len(a_seq) - 1
    phi = (2.0**n) * a_seq[n] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c_seq[j] / a_seq[j] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn > 0 for m < 1, so the square root branch is the right one and keeps
    # dn**2 + m*sn**2 = 1 to rounding.
    dn = np.sqrt(1.0 - m * sn * sn)
    return sn, cn, dn


def sncndn(u, m):
    """Vectorized Jacobi functions; returns arrays ``(sn, cn, dn)``.

    ``u`` may be a scalar or an array; ``m`` is a scalar parameter in (-1, 1).
    """
    m = _check_m(m)
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("non-finite argument u")
    if m >= 0.0:
        return _sncndn_positive(u, m)
    mu = -m
    m1 = mu / (1.0 + mu)
    scale = math.sqrt(1.0 + mu)
    sn1, cn1, dn1 = _sncndn_positive(u * scale, m1)
    return sn1 / (scale * dn1), cn1 / dn1, 1.0 / dn1


def jacobi(u: float, m) -> JacobiTriple:
    """sn, cn, dn at a single point ``(u, m)``."""
    u = float(u)
    sn, cn, dn = sncndn(u, m)
    return JacobiTriple(u=u, sn=float(sn), cn=float(cn), dn=float(dn))

"""Hadamard stored energy W(F) = mu/2 |F|^2 + h(det F) with a quartic double well.

Matrices are plain ``(2, 2)`` numpy arrays. All functions are pure.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "MaterialParams",
    "DiagonalStrain",
    "h_value",
    "h_prime",
    "h_second",
    "energy",
    "piola",
    "eshelby",
    "excess",
    "cof",
    "rank_one",
    "h_convexification_interval",
]


@dataclass(frozen=True)
class MaterialParams:
    """Shear modulus ``mu`` and the two well bottoms ``d1 < d2`` of h."""

    mu: float
    d1: float = 1.0
    d2: float = 3.0

    def __post_init__(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.d1) and np.isfinite(self.d2)):
            raise DomainError("material parameters must be finite")
        if self.mu < 0:
            raise DomainError(f"mu must be nonnegative, got {self.mu}")
        if not 0 < self.d1 < self.d2:
            raise DomainError(f"need 0 < d1 < d2, got d1={self.d1}, d2={self.d2}")

    def with_mu(self, mu):
        return MaterialParams(mu, self.d1, self.d2)


@dataclass(frozen=True)
class DiagonalStrain:
    """Principal stretches in a shared diagonal frame."""

    eps1: float
    eps2: float

    def __post_init__(self):
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise DomainError("principal stretches must be positive")

    @property
    def det(self):
        return self.eps1 * self.eps2

    def as_matrix(self):
        return np.diag([self.eps1, self.eps2]).astype(float)


def _check_det(d):
    if np.any(np.asarray(d) <= 0):
        raise DomainError("determinant must be positive")


def h_value(d, p):
    """Quartic double well (d - d1)^2 (d - d2)^2; accepts scalars or arrays."""
    _check_det(d)
    return (d - p.d1) ** 2 * (d - p.d2) ** 2


def h_prime(d, p):
    _check_det(d)
    return 2.0 * (d - p.d1) * (d - p.d2) * (2.0 * d - p.d1 - p.d2)


def h_second(d, p):
    _check_det(d)
    a = d - p.d1
    b = d - p.d2
    return 2.0 * (a * a + 4.0 * a * b + b * b)


# The raw polynomial forms below skip the d > 0 check. The hydrostatic
# polyconvexity analysis and root finders evaluate h on the whole real line.
def _h(d, p):
    return (d - p.d1) ** 2 * (d - p.d2) ** 2


def _hp(d, p):
    return 2.0 * (d - p.d1) * (d - p.d2) * (2.0 * d - p.d1 - p.d2)


def _hpp(d, p):
    a = d - p.d1
    b = d - p.d2
    return 2.0 * (a * a + 4.0 * a * b + b * b)


def cof(F):
    """Cofactor matrix of a 2x2 matrix, so that cof(F) : H is the linearised det."""
    F = np.asarray(F, dtype=float)
    return np.array([[F[1, 1], -F[1, 0]], [-F[0, 1], F[0, 0]]])


def rank_one(a, n):
    return np.outer(np.asarray(a, dtype=float), np.asarray(n, dtype=float))


def _det(F):
    return F[0, 0] * F[1, 1] - F[0, 1] * F[1, 0]


def energy(F, p):
    F = np.asarray(F, dtype=float)
    d = _det(F)
    if d <= 0:
        raise DomainError(f"det F = {d} is not positive")
    return 0.5 * p.mu * float(np.sum(F * F)) + float(_h(d, p))


def piola(F, p):
    """First Piola-Kirchhoff stress P = mu F + h'(det F) cof F."""
    F = np.asarray(F, dtype=float)
    d = _det(F)
    if d <= 0:
        raise DomainError(f"det F = {d} is not positive")
    return p.mu * F + _hp(d, p) * cof(F)


def eshelby(F, p):
    """Energy-momentum tensor W(F) I - F^T P(F)."""
    F = np.asarray(F, dtype=float)
    return energy(F, p) * np.eye(2) - F.T @ piola(F, p)


def excess(F, H, p):
    """Weierstrass excess W(F+H) - W(F) - <P(F), H>."""
    F = np.asarray(F, dtype=float)
    H = np.asarray(H, dtype=float)
    return energy(F + H, p) - energy(F, p) - float(np.sum(piola(F, p) * H))


def h_convexification_interval(p):
    """Interval on which h differs from its convex hull.

    For the equal-depth quartic both wells sit at h = 0, so the common tangent
    is the zero line and the interval is exactly [d1, d2].
    """
    return (p.d1, p.d2)

"""Primary jump set of the quartic Hadamard material and its Weierstrass points.

In the shared diagonal frame a jump pair is F+ = diag(eps_plus, eps0),
F- = diag(eps_minus, eps0), rank-one connected across the normal e1 with
amplitude a = (eps_plus - eps_minus) e1. For the quartic well the two
determinants d+/- = eps0 * eps+/- are the roots of

    (d - d1)(d - d2) = -mu / (4 eps0^2).
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import NoWPoint, OutsideDomain
from .material import DiagonalStrain, energy, h_prime, h_value, piola
from .numerics import minimize_bounded, real_roots_cubic
from .verdict import PcxStatus, PcxVerdict

__all__ = [
    "JumpPair",
    "WPoint",
    "jump_pair",
    "jump_set_curve",
    "weierstrass_ok",
    "w_point",
    "w_point_existence_threshold",
    "w_point_pcx_check",
    "w_point_pcx_threshold",
    "jump_residuals",
    "material_jump_residuals",
    "jump_expansion",
]

_W_SLACK = 1e-12


@dataclass(frozen=True)
class JumpPair:
    eps0: float
    eps_plus: float
    eps_minus: float
    mu: float

    @property
    def d_plus(self):
        return self.eps0 * self.eps_plus

    @property
    def d_minus(self):
        return self.eps0 * self.eps_minus

    @property
    def f_plus(self):
        return DiagonalStrain(self.eps_plus, self.eps0)

    @property
    def f_minus(self):
        return DiagonalStrain(self.eps_minus, self.eps0)

    @property
    def amplitude(self):
        """Rank-one connection a, with F+ - F- = a (x) e1."""
        return np.array([self.eps_plus - self.eps_minus, 0.0])

    @property
    def weierstrass_ok(self):
        return weierstrass_ok(self)


@dataclass(frozen=True)
class WPoint:
    eps0: float
    eps_minus: float
    mu: float

    @property
    def alpha0(self):
        return self.eps0 + self.eps_minus

    @property
    def d_plus(self):
        return self.eps0 * self.eps0

    @property
    def d_minus(self):
        return self.eps0 * self.eps_minus

    def coordinates(self):
        """The three W-points in the principal-stretch plane."""
        return [(self.eps0, self.eps_minus), (self.eps_minus, self.eps0), (self.eps0, self.eps0)]


def jump_pair(eps0, p):
    if eps0 <= 0:
        raise OutsideDomain("eps0 must be positive")
    disc = (p.d2 - p.d1) ** 2 - p.mu / eps0**2
    if disc < 0:
        raise OutsideDomain(
            f"no jump pair at eps0={eps0:g}: need eps0 >= sqrt(mu)/(d2-d1) = {math.sqrt(p.mu) / (p.d2 - p.d1):g}"
        )
    s = math.sqrt(disc)
    return JumpPair(
        eps0=float(eps0),
        eps_plus=(p.d1 + p.d2 + s) / (2.0 * eps0),
        eps_minus=(p.d1 + p.d2 - s) / (2.0 * eps0),
        mu=p.mu,
    )


def jump_set_curve(p, eps0_range, n_samples):
    lo, hi = eps0_range
    if n_samples <= 0 or not hi > lo:
        return []
    return [jump_pair(e, p) for e in np.linspace(lo, hi, int(n_samples))]


def weierstrass_ok(pair):
    """Corollary of the Weierstrass condition: eps0 >= eps_plus and eps0 >= eps_minus."""
    return bool(pair.eps0 + _W_SLACK >= pair.eps_plus and pair.eps0 + _W_SLACK >= pair.eps_minus)


def jump_expansion(eps0, p):
    """First-order small-mu expansion of (eps_plus, eps_minus)."""
    corr = p.mu / (4.0 * eps0**3 * (p.d2 - p.d1))
    return p.d2 / eps0 - corr, p.d1 / eps0 + corr


def jump_residuals(pair, p):
    """Scalar jump relations: (eps0 [h'] + mu [eps], [h] - <h'> [d])."""
    dp, dm = pair.d_plus, pair.d_minus
    hp_p, hp_m = h_prime(dp, p), h_prime(dm, p)
    r1 = pair.eps0 * (hp_p - hp_m) + p.mu * (pair.eps_plus - pair.eps_minus)
    r2 = (h_value(dp, p) - h_value(dm, p)) - 0.5 * (hp_p + hp_m) * (dp - dm)
    return float(r1), float(r2)


def material_jump_residuals(pair, p):
    """Re-derive the four jump conditions from the stored energy itself.

    Returns the max-norms of [P] n, [P^T] a and the Maxwell scalar
    [W] - <{P}, [F]>, all evaluated with :func:`binodal.material.piola`.
    """
    Fp = pair.f_plus.as_matrix()
    Fm = pair.f_minus.as_matrix()
    n = np.array([1.0, 0.0])
    a = pair.amplitude
    Pp, Pm = piola(Fp, p), piola(Fm, p)
    dP = Pp - Pm
    traction = float(np.max(np.abs(dP @ n)))
    transposed = float(np.max(np.abs(dP.T @ a)))
    maxwell = energy(Fp, p) - energy(Fm, p) - float(np.sum(0.5 * (Pp + Pm) * (Fp - Fm)))
    return traction, transposed, float(abs(maxwell))


def _wpoint_cubic(p):
    # -4 d (d - d1)(d - d2) - mu
    return (-4.0, 4.0 * (p.d1 + p.d2), -4.0 * p.d1 * p.d2, -p.mu)


def w_point_existence_threshold(p):
    """Largest mu for which the W-point cubic has a root in (d1, d2)."""
    s = p.d1 + p.d2
    d = (s + math.sqrt(s * s - 3.0 * p.d1 * p.d2)) / 3.0
    return -4.0 * d * (d - p.d1) * (d - p.d2)


def w_point(p):
    roots = [r for r in real_roots_cubic(*_wpoint_cubic(p)) if p.d1 < r <= p.d2 * (1 + 1e-15)]
    if not roots:
        raise NoWPoint(f"no W-point for mu={p.mu:g} (existence threshold {w_point_existence_threshold(p):g})")
    d = min(max(roots), p.d2)
    eps0 = math.sqrt(d)
    return WPoint(eps0=eps0, eps_minus=(p.d1 + p.d2 - d) / eps0, mu=p.mu)


def _w_phi(wp, p):
    a0 = wp.alpha0
    e0 = wp.eps0

    def phi(d):
        return (d - p.d1) ** 2 * (d - p.d2) ** 2 + p.mu * (d + a0 * d / (2.0 * e0) - 2.0 * a0 * np.sqrt(d))

    return phi


def w_point_pcx_check(p, gap_tol=1e-9, n_grid=256):
    """Polyconvexity of the W-points with the only admissible constant m.

    The W-points are polyconvex iff the minimum of
    phi(d) = h(d) + mu (d + alpha0 d / (2 eps0) - 2 alpha0 sqrt(d)) over
    [alpha0^2 / 4, alpha0^2] is attained at d = eps0^2.
    """
    wp = w_point(p)
    a0 = wp.alpha0
    phi = _w_phi(wp, p)
    rhs = float(h_value(wp.eps0**2, p) - p.mu * wp.eps0 * (wp.eps0 / 2.0 + 1.5 * wp.eps_minus))
    d_min, phi_min = minimize_bounded(phi, a0 * a0 / 4.0, a0 * a0, n_grid=n_grid, vectorized=True)
    gap = phi_min - rhs
    m = -p.mu * a0 / (2.0 * wp.eps0)
    if gap < -gap_tol:
        return PcxVerdict(PcxStatus.NOT_POLYCONVEX, m, witness_delta=d_min, gap=gap)
    return PcxVerdict(PcxStatus.POLYCONVEX, m, witness_delta=None, gap=gap)


def w_point_pcx_threshold(p, atol=1e-5):
    """Largest mu below which the W-points are polyconvex, by bisection on the verdict.

    Only ``d1`` and ``d2`` of ``p`` are used.
    """
    lo, hi = 0.0, w_point_existence_threshold(p)
    # at the existence threshold the W-point is degenerate; step just inside
    hi_inner = hi * (1.0 - 1e-9)
    if w_point_pcx_check(p.with_mu(hi_inner)).status is PcxStatus.POLYCONVEX:
        return hi
    hi = hi_inner
    while hi - lo > atol:
        mid = 0.5 * (lo + hi)
        if w_point_pcx_check(p.with_mu(mid)).status is PcxStatus.POLYCONVEX:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

"""Secondary jump set: strains F0 from which a rank-two laminate nucleates.

A simple laminate of the jump pair F+/- with volume fraction lambda has the
average Fbar = diag(eps_bar, eps0), eps_bar = lambda eps_plus + (1 - lambda)
eps_minus. In the diagonal case the nucleating strain is
F0 = diag(eps_bar, d0 / eps_bar), rank-one connected to Fbar across e2.
Traction continuity and the Maxwell relation between F0 and the laminate
give two scalar equations for (eps_bar, d0) at each eps0.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .errors import (
    BinodalError,
    DomainError,
    LambdaOutOfRange,
    NoConvergence,
    OutsideDomain,
    OutsideWindow,
)
from .jumpset import jump_pair, w_point
from .material import energy, h_prime, h_value, piola
from .numerics import Bracket, Tolerance, find_root, newton2

__all__ = [
    "SecondaryPoint",
    "SecondaryCurve",
    "traction_residual",
    "maxwell_residual",
    "solve_secondary",
    "solve_secondary_at_lambda",
    "secondary_curve",
    "secondary_eps0_range",
    "asymptotic_secondary",
    "asymptotic_y_at_x",
    "asymptotic_gap",
    "material_secondary_residuals",
]

log = logging.getLogger(__name__)

LAMBDA_SLACK = 1e-9
NEWTON_TOL = Tolerance(abs=1e-12, rel=1e-12, max_iter=60)
RESIDUAL_MAX = 1e-9
N_CONTINUATION = 400
_TRIVIAL = 1e-6
NEAR_DEGENERATE = 1e-3


@dataclass(frozen=True)
class SecondaryPoint:
    eps0: float
    eps_bar: float
    d0: float
    lam: float
    eps_plus: float
    eps_minus: float
    mu: float

    @property
    def x0(self):
        return self.eps_bar

    @property
    def y0(self):
        return self.d0 / self.eps_bar


@dataclass
class SecondaryCurve:
    """Continuation result.

    ``points`` runs from the W-point end to the bisector crossing and
    ``mirror`` is its reflection (y0, x0). ``full`` keeps every converged
    point in increasing lambda, before truncation.
    """

    points: List[SecondaryPoint]
    mirror: List[Tuple[float, float]]
    crossing: Optional[SecondaryPoint]
    full: List[SecondaryPoint] = field(default_factory=list)

    @property
    def hydrostatic_intersection(self):
        """Stretch eps at which the curve meets the bisector, or nan."""
        return self.crossing.x0 if self.crossing is not None else math.nan


def _laminate_terms(eps0, eps_bar, p):
    pair = jump_pair(eps0, p)
    ep, em = pair.eps_plus, pair.eps_minus
    mid = 0.5 * (ep + em)
    # second diagonal entry of the averaged laminate stress, divided by mu
    b = eps0 + (ep * em - mid * eps_bar) / eps0
    return ep, em, mid, b


def traction_residual(eps0, eps_bar, d0, p):
    """d0/eps_bar - [eps0 + (eps_plus eps_minus - <eps> eps_bar)/eps0 - h'(d0) eps_bar / mu]."""
    if p.mu <= 0:
        raise DomainError("the secondary system needs mu > 0")
    if eps_bar <= 0 or d0 <= 0:
        raise DomainError("eps_bar and d0 must be positive")
    _, _, _, b = _laminate_terms(eps0, eps_bar, p)
    return d0 / eps_bar - (b - h_prime(d0, p) * eps_bar / p.mu)


def maxwell_residual(eps0, eps_bar, d0, p):
    """Energy balance between F0 and the laminate, divided by mu."""
    if p.mu <= 0:
        raise DomainError("the secondary system needs mu > 0")
    if eps_bar <= 0 or d0 <= 0:
        raise DomainError("eps_bar and d0 must be positive")
    ep, em, mid, b = _laminate_terms(eps0, eps_bar, p)
    lhs = (
        0.5 * (eps_bar**2 + d0**2 / eps_bar**2)
        + h_value(d0, p) / p.mu
        - (eps_bar - em) * mid
        - 0.5 * (em**2 + eps0**2)
        - p.mu / (16.0 * eps0**4)
    )
    rhs = (d0 / eps_bar - eps0) * b
    return lhs - rhs


def secondary_eps0_range(p):
    """Window of eps0 on which the small-mu limit curve is defined."""
    lo = (p.d2**2 - (p.d2 - p.d1) ** 2) ** 0.25
    return lo, math.sqrt(p.d2)


def _asymptotic_parts(eps0, p):
    e4 = eps0**4
    s = math.sqrt(max(p.d2**2 - e4, 0.0))
    dbar = p.d2 - s
    x0 = dbar / eps0
    delta = (e4 * (p.d2 - p.d1) - 2.0 * (p.d2**2 - e4) * dbar) / (4.0 * eps0**2 * (p.d2 - p.d1) ** 2 * dbar**2)
    return x0, delta


def asymptotic_secondary(eps0, p, slack=1e-12):
    """First-order small-mu approximation (x0, y0) of the secondary jump set."""
    lo, hi = secondary_eps0_range(p)
    if not (lo * (1 - slack) <= eps0 <= hi * (1 + slack)):
        raise OutsideWindow(f"eps0={eps0:g} outside [{lo:g}, {hi:g}]")
    x0, delta = _asymptotic_parts(min(eps0, hi), p)
    return x0, (p.d1 + p.mu * delta) / x0


def asymptotic_y_at_x(x0, p):
    """Height of the limit curve above the abscissa x0.

    Inverts x0(eps0) exactly: eps0 is the positive root of
    eps^3 + x0^2 eps - 2 d2 x0 = 0.
    """
    lo, hi = secondary_eps0_range(p)
    g = lambda e: e**3 + x0 * x0 * e - 2.0 * p.d2 * x0
    eps0 = find_root(g, Bracket(lo * (1 - 1e-9), hi * (1 + 1e-9)))
    return asymptotic_secondary(eps0, p, slack=1e-8)[1]


def _check_point(eps0, eps_bar, d0, p):
    pair = jump_pair(eps0, p)
    if not (np.isfinite(eps_bar) and np.isfinite(d0)) or eps_bar <= 0 or d0 <= 0:
        raise NoConvergence(f"non-physical iterate at eps0={eps0:g}")
    res = max(abs(traction_residual(eps0, eps_bar, d0, p)), abs(maxwell_residual(eps0, eps_bar, d0, p)))
    if res > RESIDUAL_MAX:
        raise NoConvergence(f"residual {res:.2e} at eps0={eps0:g}")
    if abs(d0 / eps_bar - eps0) < _TRIVIAL:
        # the degenerate laminate F0 = Fbar solves both equations trivially
        raise NoConvergence(f"collapsed onto the degenerate solution at eps0={eps0:g}")
    lam = (eps_bar - pair.eps_minus) / (pair.eps_plus - pair.eps_minus)
    if not (-LAMBDA_SLACK <= lam <= 1 + LAMBDA_SLACK):
        raise LambdaOutOfRange(f"lambda={lam:.6g} at eps0={eps0:g}", lam=lam)
    return SecondaryPoint(float(eps0), float(eps_bar), float(d0), float(lam), pair.eps_plus, pair.eps_minus, p.mu)


def solve_secondary(eps0, p, seed=None):
    """Solve traction and Maxwell for (eps_bar, d0) at a given eps0.

    Parameters
    ----------
    seed : tuple, optional
        Starting (eps_bar, d0). Defaults to the small-mu limit curve.

    Raises
    ------
    NoConvergence
        Newton failed or landed on the degenerate solution F0 = Fbar.
    LambdaOutOfRange
        Converged, but the volume fraction leaves [0, 1].
    """
    if p.mu <= 0:
        raise DomainError("the secondary system needs mu > 0")
    if seed is None:
        lo, hi = secondary_eps0_range(p)
        x0, y0 = asymptotic_secondary(min(max(eps0, lo), hi), p)
        seed = (x0, x0 * y0)
    try:
        jump_pair(eps0, p)
    except OutsideDomain as exc:
        raise LambdaOutOfRange(str(exc)) from exc

    def F(eb, d0):
        return traction_residual(eps0, eb, d0, p), maxwell_residual(eps0, eb, d0, p)

    try:
        eb, d0 = newton2(F, seed, NEWTON_TOL)
    except (BinodalError, ArithmeticError) as exc:
        raise NoConvergence(f"Newton failed at eps0={eps0:g}: {exc}") from exc
    return _check_point(eps0, eb, d0, p)


def solve_secondary_at_lambda(lam, p, seed):
    """Solve the same system for (eps0, d0) at a prescribed volume fraction.

    ``seed`` is a starting (eps0, d0). This is the parametrisation used for
    continuation: near the W-point eps0 is a poor parameter because the
    branch can fold back in eps0 while lambda stays monotone.
    """
    if p.mu <= 0:
        raise DomainError("the secondary system needs mu > 0")

    def F(e, d0):
        try:
            pair = jump_pair(e, p)
        except OutsideDomain:
            return math.nan, math.nan
        eb = lam * pair.eps_plus + (1.0 - lam) * pair.eps_minus
        if eb <= 0 or d0 <= 0:
            return math.nan, math.nan
        return traction_residual(e, eb, d0, p), maxwell_residual(e, eb, d0, p)

    try:
        e, d0 = newton2(F, seed, NEWTON_TOL)
        pair = jump_pair(e, p)
    except (BinodalError, ArithmeticError) as exc:
        raise NoConvergence(f"Newton failed at lambda={lam:g}: {exc}") from exc
    eb = lam * pair.eps_plus + (1.0 - lam) * pair.eps_minus
    return _check_point(e, eb, d0, p)


def _try(lam, p, seed):
    try:
        pt = solve_secondary_at_lambda(lam, p, seed)
    except (NoConvergence, LambdaOutOfRange, DomainError):
        return None
    # next to the lambda = 0 end the branch meets F0 = F-, where the system
    # is degenerate; those points are replaced by the exact endpoint
    if abs(pt.y0 - pt.eps0) < NEAR_DEGENERATE:
        return None
    return pt


def _w_endpoint(p):
    """Exact limit of the nontrivial branch at the W-point: lambda = 1, F0 = diag(eps0, eps_minus)."""
    wp = w_point(p)
    pair = jump_pair(wp.eps0, p)
    return SecondaryPoint(wp.eps0, wp.eps0, wp.d_minus, 1.0, pair.eps_plus, pair.eps_minus, p.mu)


def _march(p, start, step, max_halvings=8):
    """Continue from the W end towards lambda = 0 in decrements of ``step``.

    A failed step is retried at half the size, up to ``max_halvings`` times,
    and the step grows back after each success.
    """
    track = [start]
    h = step
    while track[-1].lam - h > 0:
        prev = track[-1]
        lam = prev.lam - h
        if len(track) >= 2:
            a = track[-2]
            t = (lam - prev.lam) / (prev.lam - a.lam)
            seed = (prev.eps0 + t * (prev.eps0 - a.eps0), prev.d0 + t * (prev.d0 - a.d0))
        else:
            seed = (prev.eps0, prev.d0)
        pt = _try(lam, p, seed)
        if pt is None:
            pt = _try(lam, p, (prev.eps0, prev.d0))
        if pt is None:
            if h > step / 2**max_halvings:
                h *= 0.5
                continue
            break
        track.append(pt)
        h = min(2.0 * h, step)
    return track


def _lambda_zero_endpoint(p, pts):
    """Point where the branch meets F0 = F- (lambda = 0).

    eps0 is extrapolated to lambda = 0 by a quadratic through the last few
    points; there the exact solution is eps_bar = eps_minus, d0 = d_minus.
    """
    tail = pts[-4:]
    if len(tail) < 3:
        return None
    lam = np.array([q.lam for q in tail])
    e = np.array([q.eps0 for q in tail])
    e_star = float(np.polyval(np.polyfit(lam, e, 2), 0.0))
    try:
        pair = jump_pair(e_star, p)
    except OutsideDomain:
        return None
    return SecondaryPoint(e_star, pair.eps_minus, pair.d_minus, 0.0, pair.eps_plus, pair.eps_minus, p.mu)


def _bisector_crossing(p, pts):
    """First crossing of x0 = y0 walking from the W end, refined in lambda."""
    g = [pt.x0 - pt.y0 for pt in pts]
    for i in range(len(pts) - 1):
        if g[i] == 0.0:
            return i, pts[i]
        if g[i] * g[i + 1] < 0:
            a, b = pts[i], pts[i + 1]

            def fn(lam):
                s = a if abs(lam - a.lam) < abs(lam - b.lam) else b
                pt = solve_secondary_at_lambda(lam, p, (s.eps0, s.d0))
                return pt.x0 - pt.y0

            try:
                lam_star = find_root(fn, Bracket(b.lam, a.lam), Tolerance(1e-14, 1e-14, 200))
                return i, solve_secondary_at_lambda(lam_star, p, (a.eps0, a.d0))
            except BinodalError as exc:
                log.warning("bisector refinement failed: %s", exc)
                return i, a if abs(g[i]) < abs(g[i + 1]) else b
    return None, None


def secondary_curve(p, n_samples=N_CONTINUATION):
    """Trace the diagonal secondary jump set by continuation in lambda.

    Starts from the exact W-point end (lambda = 1) and steps lambda down on
    a uniform grid of ``n_samples`` values, each solve seeded by secant
    extrapolation, until the branch gets close to F0 = F-. The curve is
    closed with the exact lambda = 0 end state. The part from the W-point to
    the bisector crossing is returned together with its mirror image.

    Raises
    ------
    NoWPoint
        If the W-point does not exist.
    NoConvergence
        If the continuation cannot leave the W end.
    """
    if p.mu <= 0:
        raise DomainError("the secondary system needs mu > 0")
    n_samples = max(int(n_samples), 3)
    step = 1.0 / (n_samples - 1)
    wend = _w_endpoint(p)
    track = _march(p, wend, step)
    if len(track) < 2:
        raise NoConvergence(f"continuation could not leave the W-point at mu={p.mu:g}")
    lend = _lambda_zero_endpoint(p, track)
    if lend is not None:
        track.append(lend)
    else:
        log.warning("lambda = 0 end not reached, last lambda %.3g", track[-1].lam)
    log.info("secondary curve: %d points, lambda down to %.3g", len(track), track[-1].lam)

    i, crossing = _bisector_crossing(p, track)
    branch = track if crossing is None else track[: i + 1] + [crossing]
    branch = [q for q in branch if q.x0 >= q.y0 - 1e-12]
    mirror = [(q.y0, q.x0) for q in branch]
    return SecondaryCurve(points=branch, mirror=mirror, crossing=crossing, full=track[::-1])


def asymptotic_gap(points, p):
    """Largest vertical distance from the limit curve at matched abscissa x0.

    Points whose x0 falls outside the range of the limit curve are skipped.
    """
    lo, hi = secondary_eps0_range(p)
    x_lo = _asymptotic_parts(lo, p)[0]
    x_hi = _asymptotic_parts(hi, p)[0]
    gaps = [abs(q.y0 - asymptotic_y_at_x(q.x0, p)) for q in points if x_lo <= q.x0 <= x_hi]
    return max(gaps) if gaps else math.nan


def material_secondary_residuals(point, p):
    """Check a secondary point against the stored energy directly.

    Builds F+/-, the laminate average Fbar and F0 = diag(eps_bar, y0),
    and returns max-norms of the jump conditions of the underlying pair,
    of (P(F0) - Pbar) e2, of (P(F0) - Pbar)^T b with b = F0 e2 - Fbar e2,
    and of the Maxwell balance W(F0) - Wbar - <(P(F0) + Pbar)/2, F0 - Fbar>.
    """
    lam = point.lam
    Fp = np.diag([point.eps_plus, point.eps0])
    Fm = np.diag([point.eps_minus, point.eps0])
    Fbar = lam * Fp + (1.0 - lam) * Fm
    F0 = np.diag([point.x0, point.y0])
    Pp, Pm, P0 = piola(Fp, p), piola(Fm, p), piola(F0, p)
    Pbar = lam * Pp + (1.0 - lam) * Pm
    Wbar = lam * energy(Fp, p) + (1.0 - lam) * energy(Fm, p)
    e2 = np.array([0.0, 1.0])
    b = (F0 - Fbar) @ e2
    dP = P0 - Pbar
    # the pair itself: [P] e1 = 0 and Maxwell between F+ and F-
    pair_trac = float(np.max(np.abs((Pp - Pm) @ np.array([1.0, 0.0]))))
    pair_maxwell = abs(energy(Fp, p) - energy(Fm, p) - float(np.sum(0.5 * (Pp + Pm) * (Fp - Fm))))
    traction = float(np.max(np.abs(dP @ e2)))
    transposed = float(np.max(np.abs(dP.T @ b)))
    maxwell = abs(energy(F0, p) - Wbar - float(np.sum(0.5 * (P0 + Pbar) * (F0 - Fbar))))
    return {
        "pair_traction": pair_trac,
        "pair_maxwell": float(pair_maxwell),
        "traction": traction,
        "transposed": transposed,
        "maxwell": float(maxwell),
    }

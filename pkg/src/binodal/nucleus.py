"""Circular nucleus of the d2-phase in an infinite d1-phase matrix.

Outside the unit inclusion the radial profile eta(r) of an energy-neutral
equilibrium is integrated in the compact variables x = 1/r^2, v = eta / r,
for which

    v'' = -v'^2 v h''(D) / (mu + v^2 h''(D)),    D = v^2 - 2 x v v',

with v(1) = eps0, v'(1) = (eps0 - eps_minus) / 2 taken from the W-point.
The far-field hydrostatic stretch is eps_inf = v(0).
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, TailTooShort
from .jumpset import WPoint, w_point
from .material import MaterialParams, _h, _hp, _hpp
from .numerics import Tolerance, integrate_ode

__all__ = [
    "NucleusSolution",
    "HydroQWCurve",
    "BinodalCurves",
    "solve_nucleus",
    "nucleus_rhs",
    "eps_inf_asymptotic",
    "eta_profile_asymptotic",
    "nondegeneracy",
    "binodal_curves",
    "qw_hydrostatic",
    "qw_hydrostatic_asymptotic",
    "qw_formula",
    "qw_gap",
]

ODE_TOL = Tolerance(abs=1e-13, rel=1e-12, max_iter=200)
N_SAMPLES = 501
TAIL_R = (20.0, 100.0)
N_TAIL = 41


@dataclass(frozen=True)
class NucleusSolution:
    """Sampled exterior profile.

    ``x``, ``v``, ``v_prime`` hold a uniform grid on [0, 1] in ascending x.
    ``tail_*`` hold extra samples at x = 1/r^2 for r in [20, 100], used to
    extract the far-field decay.
    """

    x: np.ndarray
    v: np.ndarray
    v_prime: np.ndarray
    tail_x: np.ndarray
    tail_v: np.ndarray
    tail_v_prime: np.ndarray
    eps_inf: float
    w_point: WPoint
    params: MaterialParams

    @property
    def mu(self):
        return self.params.mu

    @property
    def samples(self):
        return list(zip(self.x.tolist(), self.v.tolist(), self.v_prime.tolist()))

    @property
    def eta_prime(self):
        return self.v - 2.0 * self.x * self.v_prime

    @property
    def det(self):
        """Determinant eta' eta / r along the profile."""
        return self.v * self.eta_prime


@dataclass(frozen=True)
class HydroQWCurve:
    eps: np.ndarray
    qw: np.ndarray
    w: np.ndarray
    d: np.ndarray

    @property
    def points(self):
        return list(zip(self.eps.tolist(), self.qw.tolist(), self.w.tolist(), self.d.tolist()))


@dataclass(frozen=True)
class BinodalCurves:
    """Curve (v, eta') from r = 1 to r = infinity, and its reflection."""

    curve: np.ndarray
    mirror: np.ndarray


def nucleus_rhs(p):
    """Right-hand side of the first-order system for (v, v').

    Returns nan once mu + v^2 h''(D) is no longer positive, so the adaptive
    integrator collapses its step there instead of crossing the singularity.
    """
    mu = p.mu

    def rhs(x, y):
        v, vp = y
        D = v * v - 2.0 * x * v * vp
        H = _hpp(D, p)
        den = mu + v * v * H
        if not den > 0:
            return np.array([vp, math.nan])
        return np.array([vp, -vp * vp * v * H / den])

    return rhs


def solve_nucleus(p, n_samples=N_SAMPLES, tol=ODE_TOL):
    """Integrate the compact profile equation from x = 1 down to x = 0.

    Raises
    ------
    NoWPoint
        If the W-point, which supplies the inclusion data, does not exist.
    StepUnderflow
        If ellipticity (mu + v^2 h'' > 0) is lost along the profile.
    """
    if n_samples < 2:
        raise DomainError("need at least two samples")
    wp = w_point(p)
    xs = np.linspace(0.0, 1.0, int(n_samples))
    r_tail = np.geomspace(TAIL_R[0], TAIL_R[1], N_TAIL)
    x_tail = 1.0 / r_tail**2
    y0 = np.array([wp.eps0, 0.5 * (wp.eps0 - wp.eps_minus)])
    traj = integrate_ode(nucleus_rhs(p), 1.0, 0.0, y0, tol, x_eval=np.concatenate([xs, x_tail]))
    order = np.argsort(traj.x)
    x_all, y_all = traj.x[order], traj.y[order]

    def pick(targets):
        idx = np.searchsorted(x_all, targets)
        idx = np.clip(idx, 0, len(x_all) - 1)
        if not np.allclose(x_all[idx], targets, rtol=0, atol=1e-15):
            raise RuntimeError("integrator missed a requested abscissa")
        return y_all[idx]

    yg = pick(xs)
    yt = pick(np.sort(x_tail))
    return NucleusSolution(
        x=xs,
        v=yg[:, 0].copy(),
        v_prime=yg[:, 1].copy(),
        tail_x=np.sort(x_tail),
        tail_v=yt[:, 0].copy(),
        tail_v_prime=yt[:, 1].copy(),
        eps_inf=float(yg[0, 0]),
        w_point=wp,
        params=p,
    )


def eps_inf_asymptotic(p):
    """First-order small-mu far-field stretch."""
    r1 = math.sqrt(p.d1)
    return r1 + p.mu / (2.0 * _hpp(p.d1, p) * r1) * math.log(math.sqrt(p.d2) / r1)


def eta_profile_asymptotic(r, p):
    """First-order small-mu profile eta(r) and its derivative, for r >= 1."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0):
        raise DomainError("the exterior profile is defined for r >= 1")
    d1, d2 = p.d1, p.d2
    c0 = d2 - d1
    c1 = 0.5 * math.log(math.sqrt(d2))
    c2 = -(d2 - d1) * _hpp(d1, p) / (4.0 * d2 * _hpp(d2, p))
    k = _hpp(d1, p)
    S = np.sqrt(d1 * r * r + c0)
    Sp = d1 * r / S
    L = np.log(S / r)
    corr = ((c1 * r * r + c2) / S - r * r / (2.0 * S) * L) / k
    dcorr = (
        2.0 * c1 * r / S
        - (c1 * r * r + c2) * Sp / S**2
        - (r / S - r**3 * d1 / (2.0 * S**3)) * L
        - r * r / (2.0 * S) * (Sp / S - 1.0 / r)
    ) / k
    return S + p.mu * corr, Sp + p.mu * dcorr


def nondegeneracy(p, sol):
    """Far-field limit of r (eta(r) - eps_inf r), from a least-squares tail fit.

    eta - eps_inf r is fitted on r in [20, 100] with the odd inverse powers
    1/r, 1/r^3, 1/r^5 and the 1/r coefficient is returned.
    """
    x = sol.tail_x
    m = (x >= 1.0 / TAIL_R[1] ** 2 * (1 - 1e-12)) & (x <= 1.0 / TAIL_R[0] ** 2 * (1 + 1e-12))
    if m.sum() < 4:
        raise TailTooShort("profile has too few samples with 20 <= r <= 100")
    r = 1.0 / np.sqrt(x[m])
    g = (sol.tail_v[m] - sol.eps_inf) * r
    A = np.column_stack([1.0 / r, 1.0 / r**3, 1.0 / r**5])
    coef, *_ = np.linalg.lstsq(A, g, rcond=None)
    return float(coef[0])


def binodal_curves(p, sol):
    """Strain pairs (eta/r, eta') met outside the nucleus, and their mirror image."""
    order = np.argsort(-sol.x)
    c = np.column_stack([sol.v[order], sol.eta_prime[order]])
    return BinodalCurves(curve=c, mirror=c[:, ::-1].copy())


def qw_formula(eta, eta_prime, R, p):
    """Quasiconvex envelope at (eta(R)/R) I from the energy-momentum balance.

    QW = mu d - h'(d) d - mu eta'^2 / 2 + (h'(d) + mu/2) eta^2 / R^2 + h(d)
    with d = eta' eta / R.
    """
    d = eta_prime * eta / R
    hp = _hp(d, p)
    return p.mu * d - hp * d - 0.5 * p.mu * eta_prime**2 + (hp + 0.5 * p.mu) * (eta / R) ** 2 + _h(d, p), d


def _w_hydro(eps, p):
    return p.mu * eps * eps + _h(eps * eps, p)


def _qw_from_v(v, eta_prime, p):
    # eta / R = v; R itself only enters through that ratio
    d = eta_prime * v
    hp = _hp(d, p)
    qw = p.mu * d - hp * d - 0.5 * p.mu * eta_prime**2 + (hp + 0.5 * p.mu) * v * v + _h(d, p)
    return qw, d


def qw_hydrostatic(p, sol):
    """QW(eps I) along eps = eta(R)/R for 1 <= R < infinity, with W(eps I) alongside."""
    m = sol.x > 0
    order = np.argsort(-sol.x[m])
    v = sol.v[m][order]
    etap = sol.eta_prime[m][order]
    qw, d = _qw_from_v(v, etap, p)
    return HydroQWCurve(eps=v, qw=qw, w=_w_hydro(v, p), d=d)


def qw_hydrostatic_asymptotic(p, n_samples=N_SAMPLES):
    """The same envelope evaluated on the first-order profile, on the grid x = 1/R^2."""
    x = np.linspace(0.0, 1.0, int(n_samples))[1:][::-1]
    R = 1.0 / np.sqrt(x)
    eta, etap = eta_profile_asymptotic(R, p)
    v = eta / R
    qw, d = _qw_from_v(v, etap, p)
    return HydroQWCurve(eps=v, qw=qw, w=_w_hydro(v, p), d=d)


def qw_gap(a, b):
    """Largest |QW_a - QW_b| at matched eps over the overlap of the two curves."""
    o = np.argsort(b.eps)
    lo, hi = b.eps[o][0], b.eps[o][-1]
    m = (a.eps >= lo) & (a.eps <= hi)
    if not m.any():
        return math.nan
    return float(np.max(np.abs(a.qw[m] - np.interp(a.eps[m], b.eps[o], b.qw[o]))))

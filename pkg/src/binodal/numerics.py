"""Small numerical kernels shared by the rest of the package.

Root bracketing delegates to :func:`scipy.optimize.brentq`; the minimiser,
the damped Newton solver and the Dormand-Prince integrator are local because
their failure modes are part of the contract (step underflow flags a
singular ODE, a singular Jacobian flags a bifurcation, ...).
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateLeadingCoefficient,
    MaxIterations,
    NoSignChange,
    SingularJacobian,
    StepUnderflow,
)

__all__ = [
    "Tolerance",
    "Bracket",
    "DEFAULT_TOL",
    "find_root",
    "minimize_bounded",
    "newton2",
    "Trajectory",
    "integrate_ode",
    "real_roots_cubic",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_SQRT_EPS = math.sqrt(np.finfo(float).eps)


@dataclass(frozen=True)
class Tolerance:
    abs: float = 1e-12
    rel: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs > 0 and self.rel > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}]")


def find_root(f, b, tol=DEFAULT_TOL):
    """Root of a scalar function inside a sign-changing bracket (Brent's method)."""
    if not isinstance(b, Bracket):
        b = Bracket(*b)
    flo, fhi = f(b.lo), f(b.hi)
    if flo == 0:
        return b.lo
    if fhi == 0:
        return b.hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({b.lo})={flo:g} and f({b.hi})={fhi:g} have the same sign")
    try:
        x, info = brentq(f, b.lo, b.hi, xtol=tol.abs, rtol=max(tol.rel, 4 * np.finfo(float).eps),
                         maxiter=tol.max_iter, full_output=True, disp=False)
    except RuntimeError as exc:  # pragma: no cover - brentq only raises on disp=True
        raise MaxIterations(str(exc)) from exc
    if not info.converged:
        raise MaxIterations(f"Brent's method did not converge in {tol.max_iter} iterations")
    if abs(f(x)) > tol.abs:
        # the x-tolerance was met first; tighten to machine precision so the
        # residual bound holds as well
        x, info = brentq(f, b.lo, b.hi, xtol=tol.abs * 1e-3, rtol=4 * np.finfo(float).eps,
                         maxiter=tol.max_iter, full_output=True, disp=False)
    return x


def _golden(f, a, b, fa_fb_tol):
    tol = fa_fb_tol
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol * (1.0 + abs(c) + abs(d)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def minimize_bounded(f, lo, hi, tol=DEFAULT_TOL, n_grid=256, vectorized=False):
    """Global minimum of ``f`` on [lo, hi] by grid scan plus golden-section refinement.

    Every discrete local minimum of the grid is refined inside its two
    neighbouring cells, so a shallow secondary well is not lost to the grid
    spacing. The search is heuristic-global and exact-local: wells narrower
    than the grid spacing can be missed. Ties go to the leftmost point.

    Returns ``(argmin, min)``.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    n_grid = max(int(n_grid), 3)
    xs = np.linspace(lo, hi, n_grid)
    if vectorized:
        fs = np.asarray(f(xs), dtype=float)
    else:
        fs = np.array([f(x) for x in xs], dtype=float)
    fs = np.where(np.isnan(fs), np.inf, fs)

    best_x, best_f = xs[int(np.argmin(fs))], float(np.min(fs))
    interior = (fs[1:-1] <= fs[:-2]) & (fs[1:-1] <= fs[2:])
    candidates = list(np.nonzero(interior)[0] + 1)
    if fs[0] < fs[1]:
        candidates.append(0)
    if fs[-1] < fs[-2]:
        candidates.append(n_grid - 1)

    scalar = (lambda x: float(f(np.array([x]))[0])) if vectorized else f
    gtol = max(tol.rel, 1e-10)
    for i in sorted(candidates):
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, n_grid - 1)]
        x, fx = _golden(scalar, a, b, gtol)
        if fx < best_f or (fx == best_f and x < best_x):
            best_x, best_f = x, fx
    # constant functions: keep the leftmost grid point
    if best_f == fs[0]:
        best_x = xs[0]
    return float(best_x), float(best_f)


def _fd_jacobian(F, z, fz):
    J = np.empty((2, 2))
    for j in range(2):
        h = _SQRT_EPS * max(1.0, abs(z[j]))
        zp = z.copy()
        zp[j] += h
        J[:, j] = (np.asarray(F(*zp), dtype=float) - fz) / h
    return J


def newton2(F, seed, tol=DEFAULT_TOL):
    """Damped Newton iteration for a 2x2 nonlinear system ``F(x, y) = (f1, f2)``.

    Forward-difference Jacobian, backtracking (halve the step while the
    residual max-norm does not decrease, at most 30 halvings).
    """
    z = np.array(seed, dtype=float)
    fz = np.asarray(F(*z), dtype=float)
    norm = float(np.max(np.abs(fz)))
    for _ in range(tol.max_iter):
        if norm <= tol.abs:
            return float(z[0]), float(z[1])
        J = _fd_jacobian(F, z, fz)
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e14:
            raise SingularJacobian(f"Jacobian is singular near {tuple(z)}")
        step = np.linalg.solve(J, -fz)
        t = 1.0
        for _ in range(31):
            trial = z + t * step
            with np.errstate(all="ignore"):
                try:
                    ft = np.asarray(F(*trial), dtype=float)
                except ArithmeticError:
                    ft = np.full(2, np.nan)
                except ValueError:
                    ft = np.full(2, np.nan)
            nt = float(np.max(np.abs(ft)))
            if np.isfinite(nt) and nt < norm:
                break
            t *= 0.5
        else:
            # no decrease along the Newton direction; accept only if already converged
            raise MaxIterations(f"line search failed at {tuple(z)} (residual {norm:.3g})")
        z, fz, norm = trial, ft, nt
    if norm <= tol.abs:
        return float(z[0]), float(z[1])
    raise MaxIterations(f"Newton did not converge in {tol.max_iter} iterations (residual {norm:.3g})")


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    """Samples of an ODE solution. ``y[i]`` is the state at ``x[i]``."""

    x: np.ndarray
    y: np.ndarray
    n_steps: int = 0
    n_rejected: int = 0


def _dp_step(rhs, x, y, h, k1):
    k = np.empty((7, y.size))
    k[0] = k1
    for i in range(1, 7):
        yi = y + h * (np.asarray(_A[i]) @ k[:i])
        k[i] = rhs(x + _C[i] * h, yi)
    y5 = y + h * (_B5 @ k)
    err = h * (_E @ k)
    return y5, err, k[6]


def integrate_ode(rhs, x0, x1, y0, tol=DEFAULT_TOL, x_eval=None, h0=None):
    """Adaptive Dormand-Prince 5(4) integration of ``y' = rhs(x, y)`` from x0 to x1.

    The local error of each accepted step satisfies
    ``|err_i| <= tol.abs + tol.rel * max(|y_i|, |y_new_i|)`` component-wise.
    ``x0 > x1`` integrates backwards. If ``x_eval`` is given, steps are
    clipped so that the solution is computed exactly at those abscissae
    (they must lie between x0 and x1); otherwise every accepted step is
    returned. Both endpoints are always included.

    Raises :class:`StepUnderflow` if the step falls below
    ``1e-14 * |x1 - x0|``.
    """
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    span = x1 - x0
    if span == 0:
        return Trajectory(np.array([x0]), y[None, :].copy())
    direction = 1.0 if span > 0 else -1.0
    length = abs(span)
    h_min = 1e-14 * length

    targets = None
    if x_eval is not None:
        targets = np.unique(np.asarray(x_eval, dtype=float))
        if direction < 0:
            targets = targets[::-1]
        inside = (targets - x0) * direction > 0
        targets = targets[inside & ((x1 - targets) * direction > 0)]
        targets = list(targets) + [x1]

    def f(x, yy):
        return np.asarray(rhs(x, yy), dtype=float)

    xs = [x0]
    ys = [y.copy()]
    x = x0
    k1 = f(x, y)
    if h0 is None:
        h = min(0.01 * length, length)
    else:
        h = min(abs(h0), length)
    n_steps = n_rejected = 0
    ti = 0
    max_steps = max(tol.max_iter, 1) * 1000
    while (x1 - x) * direction > 0:
        if n_steps + n_rejected > max_steps:
            raise MaxIterations(f"ODE integration exceeded {max_steps} steps")
        next_stop = targets[ti] if targets is not None else x1
        remaining = abs(next_stop - x)
        hit = h >= remaining
        step = remaining if hit else h
        if step < h_min and not hit:
            raise StepUnderflow(f"step size {step:.3g} below minimum at x={x:.12g}", x=x)
        with np.errstate(all="ignore"):
            y_new, err, k7 = _dp_step(f, x, y, direction * step, k1)
            scale = tol.abs + tol.rel * np.maximum(np.abs(y), np.abs(y_new))
            ratio = float(np.max(np.abs(err) / scale))
        if not np.isfinite(ratio) or not np.all(np.isfinite(y_new)):
            n_rejected += 1
            h = step * 0.2
            if h < h_min:
                raise StepUnderflow(f"non-finite right-hand side near x={x:.12g}", x=x)
            continue
        if ratio <= 1.0:
            x = next_stop if hit else x + direction * step
            y = y_new
            k1 = k7
            n_steps += 1
            if targets is None or hit:
                xs.append(x)
                ys.append(y.copy())
                if targets is not None:
                    ti += 1
            grow = 5.0 if ratio == 0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            h = step * grow if not hit else max(h, step)
        else:
            n_rejected += 1
            h = step * max(0.2, 0.9 * ratio ** -0.2)
            if h < h_min:
                raise StepUnderflow(f"step size {h:.3g} below minimum at x={x:.12g}", x=x)
    return Trajectory(np.array(xs), np.array(ys), n_steps, n_rejected)


def real_roots_cubic(c3, c2, c1, c0):
    """Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending.

    Roots come from the companion-matrix eigenvalues and are polished by
    Newton's method. A repeated root is listed once per multiplicity.
    """
    if c3 == 0 or not np.isfinite(c3):
        raise DegenerateLeadingCoefficient("leading coefficient must be a nonzero finite number")
    coeffs = np.array([c3, c2, c1, c0], dtype=float)
    raw = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(raw)))) if raw.size else 1.0
    poly = np.poly1d(coeffs)
    dpoly = poly.deriv()

    real = []
    for z in raw:
        if abs(z.imag) <= 1e-6 * scale:
            real.append(z.real)
    real.sort()

    polished = []
    for r in real:
        x = r
        for _ in range(50):
            fx, dfx = poly(x), dpoly(x)
            if dfx == 0:
                break
            dx = fx / dfx
            if abs(poly(x - dx)) >= abs(fx):
                break
            x -= dx
            if abs(dx) <= 1e-16 * max(1.0, abs(x)):
                break
        polished.append(float(x))

    # eigenvalues of a near-multiple root can scatter; merge clusters into one value
    out = []
    i = 0
    while i < len(polished):
        j = i + 1
        while j < len(polished) and abs(polished[j] - polished[i]) <= 1e-6 * scale:
            j += 1
        val = float(np.mean(polished[i:j]))
        out.extend([val] * (j - i))
        i = j
    # a complex pair flagged as a spurious double root: keep it only if it really is a root
    return [r for r in out if abs(poly(r)) <= 1e-8 * float(np.max(np.abs(coeffs))) * max(1.0, abs(r)) ** 3]

"""Carre-du-champ calculus for 1-D diffusion operators Lu = sigma*u'' + X*u'.

Bilinear form, Hessian and iterated form are computed from their
defining brackets by finite differences; the pointwise curvature
functional and the curvature-dimension constant use the exact
minimization of the underlying quadratic. Closed 1-D forms exist for
all of these and live in the test oracles, not here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._fd import deriv1, deriv2
from .errors import ArgumentError, DomainError

__all__ = [
    "Diffusion1D", "SampledFunction",
    "gamma", "hessian", "gamma2", "ricci_N", "be_constant",
    "invariant_density", "intrinsic_diameter",
    "p_bochner_residual", "improved_be_check",
]

# margin conventions for degenerate-gradient exclusion windows
EPS_GRAD = 1e-8
_END_MARGIN = 4  # nodes dropped at interval ends for 4th-order chains


def _vectorize(fn: Callable) -> Callable:
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(fn(x), dtype=float)
        if out.shape != x.shape:
            out = np.broadcast_to(out, x.shape).astype(float)
        return out
    return wrapped


@dataclass(frozen=True)
class Diffusion1D:
    """Lu = sigma(x) u'' + X(x) u' on [x_lo, x_hi], or on a circle of
    circumference x_hi - x_lo when ``circle`` is set.

    sigma and drift must be evaluable at any point of the domain (and
    a finite-difference step beyond it); sigma must stay positive.
    """

    x_lo: float
    x_hi: float
    sigma: Callable
    drift: Callable
    circle: bool = False

    def __post_init__(self):
        if not self.x_hi > self.x_lo:
            raise DomainError("domain must have positive length")
        object.__setattr__(self, "sigma", _vectorize(self.sigma))
        object.__setattr__(self, "drift", _vectorize(self.drift))
        probe = np.linspace(self.x_lo, self.x_hi, 101)
        if np.min(self.sigma(probe)) <= 0.0:
            raise DomainError("sigma must be positive on the domain")

    @classmethod
    def interval(cls, x_lo: float, x_hi: float, sigma=None, drift=None) -> "Diffusion1D":
        return cls(x_lo, x_hi,
                   sigma if sigma is not None else (lambda x: np.ones_like(x)),
                   drift if drift is not None else (lambda x: np.zeros_like(x)))

    @classmethod
    def on_circle(cls, circumference: float, sigma=None, drift=None) -> "Diffusion1D":
        return cls(0.0, circumference,
                   sigma if sigma is not None else (lambda x: np.ones_like(x)),
                   drift if drift is not None else (lambda x: np.zeros_like(x)),
                   circle=True)

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo


@dataclass(frozen=True)
class SampledFunction:
    """Nodal samples of a scalar function on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise ArgumentError("grid and values must be 1-D arrays of equal length")
        if len(self.grid) < 5:
            raise ArgumentError("a sampled function needs at least 5 nodes")
        if np.any(np.diff(self.grid) <= 0.0):
            raise ArgumentError("grid must be strictly increasing")

    @classmethod
    def from_callable(cls, fn: Callable, grid) -> "SampledFunction":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, _vectorize(fn)(grid))

    def __len__(self) -> int:
        return len(self.grid)


def _same_grid(*fns: SampledFunction) -> np.ndarray:
    g0 = fns[0].grid
    for f in fns[1:]:
        if len(f.grid) != len(g0) or not np.array_equal(f.grid, g0):
            raise ArgumentError("sampled functions must share one grid")
    return g0


def _d1(op: Diffusion1D, vals: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return deriv1(vals, grid, periodic=op.circle, circumference=op.length)


def _d2(op: Diffusion1D, vals: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return deriv2(vals, grid, periodic=op.circle, circumference=op.length)


def apply_operator(op: Diffusion1D, f: SampledFunction) -> SampledFunction:
    """Lf = sigma f'' + X f' by finite differences on f's grid."""
    x = f.grid
    vals = op.sigma(x) * _d2(op, f.values, x) + op.drift(x) * _d1(op, f.values, x)
    return SampledFunction(x, vals)


def gamma(op: Diffusion1D, f: SampledFunction, g: SampledFunction) -> SampledFunction:
    """Gamma(f,g) = sigma * f' * g', central differences in the interior.

    Agrees with the defining bracket (1/2)(L(fg) - f Lg - g Lf) to O(h^2).
    """
    x = _same_grid(f, g)
    vals = op.sigma(x) * _d1(op, f.values, x) * _d1(op, g.values, x)
    return SampledFunction(x, vals)


def hessian(op: Diffusion1D, f: SampledFunction, a: SampledFunction,
            b: SampledFunction) -> SampledFunction:
    """H_f(a,b) = (1/2)(Gamma(a, Gamma(f,b)) + Gamma(b, Gamma(f,a))
    - Gamma(f, Gamma(a,b))), evaluated as written."""
    _same_grid(f, a, b)
    t1 = gamma(op, a, gamma(op, f, b))
    t2 = gamma(op, b, gamma(op, f, a))
    t3 = gamma(op, f, gamma(op, a, b))
    return SampledFunction(f.grid, 0.5 * (t1.values + t2.values - t3.values))


def gamma2(op: Diffusion1D, f: SampledFunction) -> SampledFunction:
    """Gamma_2(f,f) = (1/2) L(Gamma(f,f)) - Gamma(f, Lf), evaluated as
    the defining bracket by finite differences."""
    if len(f) < 7:
        raise ArgumentError("gamma2 needs at least 7 nodes to resolve four derivatives")
    g = gamma(op, f, f)
    lf = apply_operator(op, f)
    vals = 0.5 * apply_operator(op, g).values - gamma(op, f, lf).values
    return SampledFunction(f.grid, vals)


def _coeffs_at(op: Diffusion1D, x: float):
    """sigma, sigma', sigma'', X, X' at a point, differentiating the
    callables themselves."""
    scale = max(1.0, abs(x))
    h1 = 6e-6 * scale   # first-derivative step ~ cbrt(eps)
    h2 = 1e-4 * scale   # second-derivative step ~ eps^(1/4)
    s = float(op.sigma(np.array(x)))
    sp = float((op.sigma(np.array(x + h1)) - op.sigma(np.array(x - h1))) / (2 * h1))
    spp = float((op.sigma(np.array(x + h2)) - 2 * s + op.sigma(np.array(x - h2))) / h2**2)
    Xv = float(op.drift(np.array(x)))
    Xp = float((op.drift(np.array(x + h1)) - op.drift(np.array(x - h1))) / (2 * h1))
    return s, sp, spp, Xv, Xp


def ricci_N(op: Diffusion1D, N: float, x: float) -> float:
    """Dimensional curvature at x per unit Gamma: the exact minimum over
    the free second derivative h = phi''(x) of

        Gamma_2(phi,phi)(x) - (1/N) (L phi)^2(x),  Gamma(phi)(x) = 1.

    The minimized expression is a quadratic A h^2 + B h + C; its minimum
    C - B^2/(4A) is returned in closed form (no search).
    """
    if not (N > 1.0):
        raise DomainError("dimension parameter N must satisfy N > 1 (or be infinite)")
    s, sp, spp, Xv, Xp = _coeffs_at(op, x)
    if math.isinf(N):
        A = s * s
        B = math.sqrt(s) * sp
        C = 0.5 * spp + Xv * sp / (2 * s) - Xp
    else:
        A = s * s * (N - 1.0) / N
        B = math.sqrt(s) * (N * sp - 2.0 * Xv) / N
        C = 0.5 * spp + Xv * sp / (2 * s) - Xp - Xv * Xv / (N * s)
    return C - B * B / (4.0 * A)


def be_constant(op: Diffusion1D, N: float, resolution: int = 2001) -> float:
    """Largest k (up to grid resolution) with curvature >= k everywhere:
    the infimum of ricci_N over a dense grid."""
    inset = 2e-4 * max(1.0, abs(op.x_lo), abs(op.x_hi))
    xs = np.linspace(op.x_lo + inset, op.x_hi - inset, resolution)
    return min(ricci_N(op, N, float(x)) for x in xs)


def invariant_density(op: Diffusion1D, resolution: int = 2001) -> SampledFunction:
    """rho = exp(int (X - sigma')/sigma), normalized to rho(x_lo) = 1.

    Cumulative per-cell 3-point Gauss-Legendre quadrature of the
    integrand; sigma' by central differencing of the callable.
    """
    x = np.linspace(op.x_lo, op.x_hi, resolution)
    h1 = 6e-6 * max(1.0, abs(op.x_lo), abs(op.x_hi))

    def integrand(t):
        sp = (op.sigma(t + h1) - op.sigma(t - h1)) / (2 * h1)
        return (op.drift(t) - sp) / op.sigma(t)

    # 3-point Gauss-Legendre on each cell
    half = 0.5 * (x[1:] - x[:-1])
    mid = 0.5 * (x[1:] + x[:-1])
    nodes = math.sqrt(3.0 / 5.0)
    cell = half * (5.0 * integrand(mid - nodes * half)
                   + 8.0 * integrand(mid)
                   + 5.0 * integrand(mid + nodes * half)) / 9.0
    log_rho = np.concatenate(([0.0], np.cumsum(cell)))
    return SampledFunction(x, np.exp(log_rho))


def summation_by_parts_residual(op: Diffusion1D, f: SampledFunction,
                                h: SampledFunction) -> float:
    """| sum Gamma(f,h) rho w + sum f Lh rho w - [f sigma h' rho] | for a
    smooth test pair: the discrete integration-by-parts defect of the
    invariant measure. The boundary bracket is the 1-D endpoint
    evaluation. O(grid spacing) for smooth data."""
    x = _same_grid(f, h)
    rho_s = invariant_density(op)
    rho = np.interp(x, rho_s.grid, rho_s.values)
    w = np.empty_like(x)
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    g = gamma(op, f, h).values
    lh = apply_operator(op, h).values
    hp = _d1(op, h.values, x)
    boundary = (f.values[-1] * op.sigma(x[-1]) * hp[-1] * rho[-1]
                - f.values[0] * op.sigma(x[0]) * hp[0] * rho[0])
    if op.circle:
        boundary = 0.0
    return float(abs(np.sum(g * rho * w) + np.sum(f.values * lh * rho * w) - boundary))


def intrinsic_diameter(op: Diffusion1D, resolution: int = 4001) -> float:
    """int sigma^(-1/2) over the interval; half of the closed loop
    integral for a circle (antipodal distance)."""
    x = np.linspace(op.x_lo, op.x_hi, resolution)
    half = 0.5 * (x[1:] - x[:-1])
    mid = 0.5 * (x[1:] + x[:-1])
    nodes = math.sqrt(3.0 / 5.0)

    def g(t):
        return op.sigma(t) ** -0.5

    total = float(np.sum(half * (5.0 * g(mid - nodes * half) + 8.0 * g(mid)
                                 + 5.0 * g(mid + nodes * half)) / 9.0))
    return 0.5 * total if op.circle else total


def _interior_mask(op: Diffusion1D, grid: np.ndarray, gvals: np.ndarray) -> np.ndarray:
    """Evaluation subgrid: drop nodes with Gamma(u) < EPS_GRAD plus a 3h
    margin around them, and the outermost nodes of an interval."""
    n = len(grid)
    mask = np.ones(n, dtype=bool)
    if not op.circle:
        mask[:_END_MARGIN] = False
        mask[-_END_MARGIN:] = False
    degenerate = np.flatnonzero(gvals < EPS_GRAD)
    for i in degenerate:
        lo = max(0, i - 3)
        hi = min(n, i + 4)
        mask[lo:hi] = False
    return mask


def _p_quantities(op: Diffusion1D, u: SampledFunction, p: float):
    """Shared assembly: Gamma(u), A_u, L_p u and the mask where defined."""
    g = gamma(op, u, u).values
    mask = _interior_mask(op, u.grid, g)
    if not np.any(g > EPS_GRAD):
        raise ArgumentError("Gamma(u) vanishes everywhere on the grid")
    if not np.any(mask):
        raise ArgumentError("no usable nodes after excluding the degenerate set")
    gsafe = np.where(g > 0.0, g, np.nan)
    hu = hessian(op, u, u, u).values
    au = hu / gsafe
    lu = apply_operator(op, u).values
    lpu = gsafe ** (0.5 * (p - 2.0)) * (lu + (p - 2.0) * au)
    return g, gsafe, au, lpu, mask


def p_bochner_residual(op: Diffusion1D, u: SampledFunction, p: float) -> float:
    """Max defect of the nonlinear Bochner identity

        (1/p) Lin_p(Gamma(u)^{p/2})
          = Gamma(u)^{(p-2)/2} (Gamma(L_p u, u) - (p-2) L_p u A_u)
            + Gamma(u)^{p-2} (Gamma_2(u) + p(p-2) A_u^2),

    where Lin_p is the linearization of L_p at u (drop-in L plus the
    (p-2) Hessian correction), everything assembled by finite
    differences. Converges to 0 at O(h) or better for smooth data.
    """
    pv = float(p)
    g, gsafe, au, lpu, mask = _p_quantities(op, u, pv)
    x = u.grid

    gp = SampledFunction(x, gsafe ** (0.5 * pv))
    lin = gsafe ** (0.5 * (pv - 2.0)) * (
        apply_operator(op, gp).values
        + (pv - 2.0) * hessian(op, gp, u, u).values / gsafe)
    lhs = lin / pv

    lpu_s = SampledFunction(x, np.where(np.isfinite(lpu), lpu, 0.0))
    g2 = gamma2(op, u).values
    rhs = (gsafe ** (0.5 * (pv - 2.0))
           * (gamma(op, lpu_s, u).values - (pv - 2.0) * lpu * au)
           + gsafe ** (pv - 2.0) * (g2 + pv * (pv - 2.0) * au**2))

    resid = np.abs(lhs - rhs)
    return float(np.nanmax(resid[mask]))


def improved_be_check(op: Diffusion1D, u: SampledFunction, p: float, n: float,
                      tol: float = 1e-6):
    """Pointwise check of the dimensional self-improvement inequality

        Gamma(u)^{p-2} (Gamma_2(u) + p(p-2) A_u^2)
          >= (L_p u)^2 / n + n/(n-1) (L_p u / n - (p-1) Gamma(u)^{(p-2)/2} A_u)^2

    on the non-degenerate subgrid. Returns (holds, min margin).

    The inequality is guaranteed when the operator satisfies the
    curvature-dimension condition with zero lower bound and dimension
    at most n. n = 1 selects the stronger one-dimensional variant with
    right-hand side (L_p u)^2 (the two agree in 1-D since
    L_p u = (p-1) Gamma(u)^{(p-2)/2} A_u identically); n = infinity
    takes the dimensionless limit.
    """
    nv = float(n)
    if nv < 1.0:
        raise DomainError("dimension parameter n must be >= 1")
    pv = float(p)
    g, gsafe, au, lpu, mask = _p_quantities(op, u, pv)
    g2 = gamma2(op, u).values
    lhs = gsafe ** (pv - 2.0) * (g2 + pv * (pv - 2.0) * au**2)
    shear = (pv - 1.0) * gsafe ** (0.5 * (pv - 2.0)) * au
    if nv == 1.0:
        rhs = lpu**2
    elif math.isinf(nv):
        rhs = shear**2
    else:
        rhs = lpu**2 / nv + nv / (nv - 1.0) * (lpu / nv - shear) ** 2
    margin = float(np.nanmin((lhs - rhs)[mask]))
    return margin >= -tol, margin

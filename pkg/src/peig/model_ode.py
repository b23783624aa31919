"""One-dimensional comparison model: solve, locate the first maximum,
and trace how it moves with the start point.

The second-order equation for the profile w,

    (w'|w'|^(p-2))' - T w'|w'|^(p-2) + lam * w|w|^(p-2) = 0,
    w(a) = -1, w'(a) = 0,

is integrated as the first-order system in (w, phi) with
phi = w'|w'|^(p-2), which keeps the right-hand side continuous
through the degenerate points w' = 0:

    w'   = |phi|^(q-2) phi          (q conjugate to p),
    phi' = T phi - lam * w|w|^(p-2).

Two drift branches are supported: T identically zero, and the radial
branch T(t) = -(n-1)/t for finite n.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ArgumentError,
    DomainError,
    HorizonError,
    IntegrationFailureError,
    NumericalError,
    RangeError,
)
from .ptrig import PExponent, pi_p

__all__ = [
    "Branch",
    "ModelProblem",
    "ModelSolution",
    "solve_model",
    "first_max",
    "delta_m_curves",
    "find_a_for_max",
    "energy_identity_residual",
    "dense_residual",
]

# interior residual bound enforced after every integration
_RESIDUAL_TOL = 1e-7
# absolute rounding allowance per step: dense-output evaluations carry
# a few dozen ulp, which the per-unit-time normalization would blow up
# on the micro-steps the solver takes around corners
_ROUND_FLOOR = 2e-12
# 5-point Gauss-Legendre nodes/weights on [-1, 1]
_GL_NODES = np.array([-0.906179845938664, -0.538469310105683, 0.0,
                      0.538469310105683, 0.906179845938664])
_GL_WEIGHTS = np.array([0.236926885056189, 0.478628670499366,
                        0.568888888888889, 0.478628670499366,
                        0.236926885056189])


class Branch(enum.Enum):
    """Drift branch of the model equation."""

    T_ZERO = "zero"
    T_RADIAL = "radial"


def _coerce_p(p) -> PExponent:
    return p if isinstance(p, PExponent) else PExponent(float(p))


@dataclass(frozen=True)
class ModelProblem:
    """Data for one model solve.

    n plays a role only on the radial branch; the zero branch is the
    n = inf member of the family. a is where the profile starts from
    its minimum value -1 with vanishing derivative.
    """

    p: PExponent
    lam: float
    n: float = math.inf
    a: float = 0.0
    branch: Branch = Branch.T_ZERO

    def __post_init__(self):
        object.__setattr__(self, "p", _coerce_p(self.p))
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise DomainError(f"lam must be positive and finite, got {self.lam}")
        if not self.n > 1.0:
            raise DomainError(f"n must lie in (1, inf], got {self.n}")
        if not (self.a >= 0.0 and math.isfinite(self.a)):
            raise DomainError(f"start point a must be finite and >= 0, got {self.a}")
        if self.branch is Branch.T_RADIAL and not math.isfinite(self.n):
            raise ArgumentError("the radial branch needs finite n; "
                                "use branch=T_ZERO for n = inf")

    @property
    def alpha(self) -> float:
        """Time-scaling rate (lam / (p-1))^(1/p)."""
        return (self.lam / (self.p.p - 1.0)) ** (1.0 / self.p.p)

    def drift(self, t):
        if self.branch is Branch.T_ZERO:
            return np.zeros_like(np.asarray(t, dtype=float))
        return -(self.n - 1.0) / np.asarray(t, dtype=float)


@dataclass(frozen=True)
class ModelSolution:
    """Integrated profile plus the first-maximum data when it was reached.

    b, delta, m_max are None when phi has no sign change before t_end.
    """

    problem: ModelProblem
    grid: np.ndarray
    w: np.ndarray
    phi: np.ndarray
    b: float | None
    delta: float | None
    m_max: float | None
    dense: object = field(repr=False, compare=False, default=None)


def _launch_state(prob: ModelProblem, tau0: float) -> tuple[float, float]:
    """Series start a short step past a.

    Balancing phi' = T phi + lam near the start gives phi ~ b1*tau with
    b1 = lam/n for the radial branch launched at the singular point
    t = 0, and b1 = lam otherwise. Two series terms hold the equation
    residual at the junction below 1e-9; for the radial branch away
    from 0 the first drift correction is carried explicitly.
    """
    p, q, lam = prob.p.p, prob.p.q, prob.lam
    if prob.branch is Branch.T_RADIAL and prob.a == 0.0:
        neff, tcorr = prob.n, 0.0
    elif prob.branch is Branch.T_RADIAL:
        neff, tcorr = 1.0, -(prob.n - 1.0) / prob.a
    else:
        neff, tcorr = 1.0, 0.0
    b1 = lam / neff
    c1 = b1 ** (q - 1.0) / q
    b2 = -lam * (p - 1.0) * c1 / (q + neff)
    c2 = (q - 1.0) * b1 ** (q - 2.0) * b2 / (2.0 * q)
    phi0 = b1 * tau0 + b2 * tau0 ** (q + 1.0) + 0.5 * tcorr * b1 * tau0**2
    w0 = (-1.0 + c1 * tau0**q + c2 * tau0 ** (2.0 * q)
          + 0.5 * (q - 1.0) * tcorr * b1 ** (q - 1.0) * tau0 ** (q + 1.0) / (q + 1.0))
    return w0, phi0


def _rhs(prob: ModelProblem):
    p, q, lam = prob.p.p, prob.p.q, prob.lam
    radial = prob.branch is Branch.T_RADIAL
    nm1 = prob.n - 1.0

    def f(t, y):
        w, phi = y
        dw = np.sign(phi) * np.abs(phi) ** (q - 1.0)
        dphi = -lam * np.sign(w) * np.abs(w) ** (p - 1.0)
        if radial:
            dphi = dphi - (nm1 / t) * phi
        return (dw, dphi)

    return f


def dense_residual(sol: ModelSolution) -> float:
    """Defect of the integrated system, per unit time.

    Each accepted solver step is split into two 5-point Gauss panels
    evaluated on the dense output; the defect compares the increment of
    (w, phi) against the integrated right-hand side. Steps on which w
    or phi changes sign are skipped: |w|^(p-1) and |phi|^(q-1) lose
    smoothness at those corners and fixed-order panels cannot certify
    them, while the crossing times themselves are pinned by bisection.
    The first accepted step is skipped as well: it absorbs the launch
    series' truncation mismatch, and for strongly attracting radial
    drifts the interpolant rings across that transient even though the
    attraction collapses the mismatch at the step's end.
    """
    prob = sol.problem
    p, q, lam = prob.p.p, prob.p.q, prob.lam
    t = sol.grid[1:]  # solver steps; grid[0] is the prepended start
    if len(t) < 2 or sol.dense is None:
        raise ArgumentError("solution carries no dense output to check")
    lo, hi = t[:-1], t[1:]
    dt = hi - lo
    # two panels per step -> 10 nodes per step
    mid = 0.5 * (lo + hi)
    panels = [(lo, mid), (mid, hi)]
    int_w = np.zeros_like(dt)
    int_phi = np.zeros_like(dt)
    for plo, phi_hi in panels:
        half = 0.5 * (phi_hi - plo)
        center = 0.5 * (phi_hi + plo)
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            ts = center + half * node
            wv, pv = sol.dense(ts)
            fw = np.sign(pv) * np.abs(pv) ** (q - 1.0)
            fp = -lam * np.sign(wv) * np.abs(wv) ** (p - 1.0)
            if prob.branch is Branch.T_RADIAL:
                fp = fp - ((prob.n - 1.0) / ts) * pv
            int_w += weight * half * fw
            int_phi += weight * half * fp
    w_lo, phi_lo = sol.dense(lo)
    w_hi, phi_hi_v = sol.dense(hi)
    defect_w = np.maximum(np.abs(w_hi - w_lo - int_w) - _ROUND_FLOOR, 0.0) / dt
    defect_phi = np.maximum(np.abs(phi_hi_v - phi_lo - int_phi)
                            - _ROUND_FLOOR, 0.0) / dt
    crossing = (w_lo * w_hi <= 0.0) | (phi_lo * phi_hi_v <= 0.0)
    # one-step margin: the cusp degrades the panels on neighbors too
    keep = ~(crossing | np.roll(crossing, 1) | np.roll(crossing, -1))
    keep[0] = False
    if not np.any(keep):
        raise NumericalError("every solver step straddles a sign change")
    return float(max(defect_w[keep].max(), defect_phi[keep].max()))


def solve_model(prob: ModelProblem, t_end: float) -> ModelSolution:
    """Integrate the model system on [a, t_end].

    High-order adaptive integration from a two-term series launch; the
    defect of the result is checked against 1e-7 before returning. The
    first-maximum fields are filled when phi crosses zero downward
    inside the horizon, refined by bisection on the dense output to
    time tolerance 1e-10.
    """
    if not t_end > prob.a:
        raise ArgumentError(f"t_end must exceed a = {prob.a}, got {t_end}")
    tau0 = 1e-6
    if prob.branch is Branch.T_RADIAL and 0.0 < prob.a < 1e-3:
        tau0 = prob.a * 1e-3  # keep the drift correction small at launch
    t0 = prob.a + tau0
    y0 = _launch_state(prob, tau0)

    def crossing(t, y):
        return y[1]

    crossing.direction = -1.0

    raw = solve_ivp(_rhs(prob), (t0, t_end), y0, method="DOP853",
                    rtol=1e-12, atol=1e-14, dense_output=True,
                    events=crossing)
    if raw.status == -1:
        raise IntegrationFailureError(
            f"integration stalled: {raw.message}", last_time=float(raw.t[-1]))

    grid = np.concatenate(([prob.a], raw.t))
    w = np.concatenate(([-1.0], raw.y[0]))
    phi = np.concatenate(([0.0], raw.y[1]))

    b = delta = m_max = None
    if len(raw.t_events[0]) > 0:
        b = _refine_crossing(raw.sol, float(raw.t_events[0][0]), t0, t_end)
        delta = b - prob.a
        m_max = float(raw.sol(b)[0])

    sol = ModelSolution(problem=prob, grid=grid, w=w, phi=phi,
                        b=b, delta=delta, m_max=m_max, dense=raw.sol)
    res = dense_residual(sol)
    if res > _RESIDUAL_TOL:
        raise NumericalError(
            f"dense-output defect {res:.3e} exceeds {_RESIDUAL_TOL:.1e}")
    return sol


def _refine_crossing(dense, t_guess: float, t_lo: float, t_hi: float) -> float:
    """Bisect phi on the dense output around the event time."""
    width = 1e-4
    lo = max(t_lo, t_guess - width)
    hi = min(t_hi, t_guess + width)
    while dense(lo)[1] <= 0.0 and lo > t_lo:
        lo = max(t_lo, lo - width)
    while dense(hi)[1] > 0.0 and hi < t_hi:
        hi = min(t_hi, hi + width)
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if dense(mid)[1] > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def first_max(prob: ModelProblem) -> tuple[float, float, float]:
    """Time, offset and value of the first maximum of the profile.

    The horizon is grown geometrically until the derivative's first
    sign change is captured.
    """
    horizon = prob.a + 4.0 * pi_p(prob.p) / prob.alpha
    for _ in range(12):
        sol = solve_model(prob, horizon)
        if sol.b is not None:
            return sol.b, sol.delta, sol.m_max
        horizon = prob.a + 2.0 * (horizon - prob.a)
    raise HorizonError(
        f"no derivative sign change found up to t = {horizon:.3e}")


def delta_m_curves(p, lam: float, n: float, a_grid) -> np.ndarray:
    """Table with one row (a, delta(a), m(a)) per start point.

    The zero branch stands in for n = inf; otherwise rows use the
    radial branch at the given n.
    """
    a_grid = np.asarray(a_grid, dtype=float)
    if a_grid.ndim != 1 or len(a_grid) == 0:
        raise ArgumentError("a_grid must be a nonempty 1-D array")
    if np.any(np.diff(a_grid) <= 0.0) or a_grid[0] < 0.0:
        raise ArgumentError("a_grid must be increasing with a_grid[0] >= 0")
    branch = Branch.T_ZERO if not math.isfinite(n) else Branch.T_RADIAL
    rows = np.empty((len(a_grid), 3))
    for i, a in enumerate(a_grid):
        prob = ModelProblem(p=p, lam=lam, n=n, a=float(a), branch=branch)
        _, delta, m = first_max(prob)
        rows[i] = (a, delta, m)
    return rows


def find_a_for_max(p, lam: float, n: float, target_max: float) -> float:
    """Start point whose profile maximum equals target_max.

    Uses the monotone growth of the maximum in a. Returns math.inf
    when the target is within 1e-8 of 1, the supremum that is never
    attained at finite a.
    """
    if target_max >= 1.0 - 1e-8:
        return math.inf

    def m_of(a: float) -> float:
        prob = ModelProblem(p=p, lam=lam, n=n, a=a, branch=Branch.T_RADIAL)
        return first_max(prob)[2]

    m0 = m_of(0.0)
    if target_max < m0 - 1e-12:
        raise RangeError(
            f"target maximum {target_max} lies below the attainable "
            f"minimum m(0) = {m0:.8f}")
    if abs(m0 - target_max) <= 1e-8:
        return 0.0

    lo, hi = 0.0, 1.0
    while m_of(hi) < target_max:
        lo, hi = hi, 2.0 * hi
        if hi > 1e9:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        m_mid = m_of(mid)
        if abs(m_mid - target_max) <= 1e-8:
            return mid
        if m_mid < target_max:
            lo = mid
        else:
            hi = mid
    raise NumericalError("bisection on the start point failed to converge")


def energy_identity_residual(sol: ModelSolution) -> float:
    """Sup-norm defect of |w'|^p + (lam/(p-1)) |w|^p = lam/(p-1).

    The identity characterizes the zero-drift branch, where the system
    has this first integral; |w'|^p equals |phi|^q.
    """
    if sol.problem.branch is not Branch.T_ZERO:
        raise ArgumentError("the energy identity holds on the zero "
                            "branch only")
    p, q, lam = sol.problem.p.p, sol.problem.p.q, sol.problem.lam
    ratio = lam / (p - 1.0)
    energy = np.abs(sol.phi) ** q + ratio * np.abs(sol.w) ** p - ratio
    return float(np.max(np.abs(energy)))

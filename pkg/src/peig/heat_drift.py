"""Heat flow with drift and the modulus-of-continuity comparison.

The flow is v_t = v'' + X v' with reflecting ends (or periodic closure)
on a 1-D mesh, stepped by Crank-Nicolson in increment form so constants
are bit-exact fixed points. A modulus candidate is a separable barrier
C e^{-rate t} w(s) built from the model eigenfunction on a slightly
wider interval; the comparison evolves both and reports the worst
violation of

    v(y, t) - v(x, t) <= 2 phi(d(x, y) / 2, t)

over all times and node pairs. For a passing candidate the defect stays
at discretization level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve, solve_banded

from .eigensolve import Mesh1D, MeshKind
from .errors import ArgumentError, NumericalError, PreconditionError, RangeError
from .nonsym import model_eigenpair


@dataclass(frozen=True)
class HeatState:
    """Nodal values of the evolving function at one instant."""

    mesh: Mesh1D
    v: np.ndarray
    t: float

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "v", v)
        if v.shape != self.mesh.nodes.shape:
            raise ArgumentError("values must match the mesh nodes")
        if not np.all(np.isfinite(v)):
            raise ArgumentError("heat state must be finite")
        if self.t < 0.0:
            raise ArgumentError("time must be nonnegative")


@dataclass(frozen=True)
class ModulusCandidate:
    """Separable barrier phi(s, t) = coefficient * exp(-rate*t) * w(s),
    with the profile w given by samples on an increasing grid starting
    at separation zero. ``be_a`` is the convexity constant entering the
    supersolution inequality the barrier is checked against."""

    coefficient: float
    rate: float
    s_grid: np.ndarray
    profile: np.ndarray
    be_a: float

    def __post_init__(self):
        s = np.asarray(self.s_grid, dtype=float)
        w = np.asarray(self.profile, dtype=float)
        object.__setattr__(self, "s_grid", s)
        object.__setattr__(self, "profile", w)
        if s.ndim != 1 or s.shape != w.shape or len(s) < 9:
            raise ArgumentError("profile needs at least 9 matched samples")
        if s[0] != 0.0 or np.any(np.diff(s) <= 0.0):
            raise ArgumentError("separation grid must increase from zero")

    def value(self, s, t: float) -> np.ndarray:
        """phi(s, t), linearly interpolated in the separation variable."""
        return (self.coefficient * math.exp(-self.rate * t)
                * np.interp(s, self.s_grid, self.profile))


def eigen_modulus(D_wide: float, be_a: float, K: int = 2001) -> ModulusCandidate:
    """Barrier built from the first model eigenfunction on a widened
    interval [-D_wide/2, D_wide/2]: rate = its eigenvalue, profile = its
    increasing half. Used with D_wide above the flow domain's diameter
    so the profile covers every node-pair separation with room to
    spare, decaying strictly slower than the flow."""
    K = K + 1 if K % 2 == 0 else K  # odd node count puts a node at 0
    lam, s, w = model_eigenpair(D_wide, be_a, K)
    mid = K // 2
    s_half = s[mid:].copy()
    w_half = w[mid:].copy()
    # the mode is odd, so its center values are exact zeros; the
    # eigensolver leaves rounding noise there instead
    s_half[0] = 0.0
    w_half[0] = 0.0
    return ModulusCandidate(coefficient=1.0, rate=lam, s_grid=s_half,
                            profile=w_half, be_a=be_a)


def fit_initial_modulus(candidate: ModulusCandidate,
                        state: HeatState) -> ModulusCandidate:
    """Rescale the barrier so it is the tightest multiple dominating the
    state: the new coefficient is the maximum over node pairs of
    (v(y) - v(x)) / (2 phi_unit(d/2)). The fitted barrier touches the
    worst pair exactly."""
    w2 = 2.0 * math.exp(-candidate.rate * state.t) * np.interp(
        _pair_half_distance(state.mesh), candidate.s_grid, candidate.profile)
    diff = state.v[:, None] - state.v[None, :]
    mask = w2 > 0.0
    if not np.any(mask):
        raise ArgumentError("profile vanishes at every pair separation")
    c = float(np.max(diff[mask] / w2[mask]))
    if c <= 0.0:
        raise ArgumentError("state is constant; any positive barrier works")
    return replace(candidate, coefficient=c)


def _pair_half_distance(mesh: Mesh1D) -> np.ndarray:
    d = np.abs(mesh.nodes[:, None] - mesh.nodes[None, :])
    if mesh.kind is MeshKind.CIRCLE:
        d = np.minimum(d, mesh.length - d)
    return 0.5 * d


def _flux_bands(mesh: Mesh1D, drift):
    """Length-K lower/upper conductances of u'' + X u', with zero rows
    where the band leaves the domain. The operator applied in flux form
    lo*(v_{i-1} - v_i) + up*(v_{i+1} - v_i) annihilates constants
    exactly for any value, not only to rounding."""
    x_vals = (drift(mesh.nodes) if callable(drift)
              else np.asarray(drift, dtype=float))
    if x_vals.shape != mesh.nodes.shape:
        raise ArgumentError("drift samples must match the mesh nodes")
    h = mesh.h
    lo = 1.0 / h**2 - x_vals / (2.0 * h)
    up = 1.0 / h**2 + x_vals / (2.0 * h)
    if np.any(lo <= 0.0) or np.any(up <= 0.0):
        raise ArgumentError("drift too strong for this mesh: |X| h / 2 "
                            "reaches its diffusion scale, refine the mesh")
    if mesh.kind is MeshKind.INTERVAL:
        lo[0] = 0.0
        up[0] = 2.0 / h**2
        lo[-1] = 2.0 / h**2
        up[-1] = 0.0
    return lo, up


def _make_stepper(mesh: Mesh1D, drift, dt: float):
    """Crank-Nicolson stepper in increment form:

        (I - dt/2 A)(v_new - v) = dt A v,

    so a zero right-hand side (constants) yields a bit-exact zero
    increment. The left-hand factorization is cached across steps.
    """
    lo, up = _flux_bands(mesh, drift)
    K = len(mesh.nodes)
    circle = mesh.kind is MeshKind.CIRCLE

    def apply_A(v: np.ndarray) -> np.ndarray:
        if circle:
            return lo * (np.roll(v, 1) - v) + up * (np.roll(v, -1) - v)
        out = np.zeros_like(v)
        out[1:] += lo[1:] * (v[:-1] - v[1:])
        out[:-1] += up[:-1] * (v[1:] - v[:-1])
        return out

    if circle:
        M = np.zeros((K, K))
        idx = np.arange(K)
        M[idx, idx] = 1.0 + 0.5 * dt * (lo + up)
        M[idx, (idx - 1) % K] = -0.5 * dt * lo
        M[idx, (idx + 1) % K] = -0.5 * dt * up
        try:
            lu = lu_factor(M)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("time-step factorization failed") from exc

        def advance(v: np.ndarray) -> np.ndarray:
            return v + lu_solve(lu, dt * apply_A(v))
    else:
        ab = np.zeros((3, K))
        ab[0, 1:] = -0.5 * dt * up[:-1]
        ab[1] = 1.0 + 0.5 * dt * (lo + up)
        ab[2, :-1] = -0.5 * dt * lo[1:]

        def advance(v: np.ndarray) -> np.ndarray:
            rhs = dt * apply_A(v)
            try:
                delta = solve_banded((1, 1), ab, rhs)
            except np.linalg.LinAlgError as exc:
                raise NumericalError("banded time-step solve failed") from exc
            return v + delta

    return advance


def step(state: HeatState, dt: float, drift) -> HeatState:
    """One Crank-Nicolson step of v_t = v'' + X v'. Unconditionally
    stable; constants are exact fixed points."""
    if not dt > 0.0:
        raise ArgumentError("time step must be positive")
    advance = _make_stepper(state.mesh, drift, dt)
    return HeatState(mesh=state.mesh, v=advance(state.v), t=state.t + dt)


def evolve(state: HeatState, dt: float, drift, steps: int,
           snapshot_every: int = 1) -> list[HeatState]:
    """Advance the flow a fixed number of Crank-Nicolson steps with one
    cached factorization, returning snapshots every ``snapshot_every``
    steps with the initial state first."""
    if not dt > 0.0:
        raise ArgumentError("time step must be positive")
    if steps < 1 or snapshot_every < 1:
        raise ArgumentError("step counts must be positive")
    advance = _make_stepper(state.mesh, drift, dt)
    out = [state]
    v, t = state.v, state.t
    for k in range(1, steps + 1):
        v = advance(v)
        t = state.t + k * dt
        if k % snapshot_every == 0 or k == steps:
            out.append(HeatState(mesh=state.mesh, v=v, t=t))
    return out


def _check_candidate(candidate: ModulusCandidate):
    """Grid checks of the barrier's standing conditions (ii)-(iv); (i)
    depends on the state and is checked at comparison time. The
    separable form makes all three time-independent."""
    w = candidate.profile
    s = candidate.s_grid
    wmax = np.max(np.abs(w))
    if candidate.coefficient <= 0.0 or np.any(np.diff(w) <= 0.0):
        raise PreconditionError(
            "barrier slope must be strictly positive in the separation "
            "variable", condition="(iii) strictly increasing barrier")
    if candidate.coefficient * w[0] < -1e-12 * wmax:
        raise PreconditionError(
            "barrier is negative at zero separation",
            condition="(iv) nonnegative at zero separation")
    wp = np.gradient(w, s, edge_order=2)
    wpp = np.gradient(wp, s, edge_order=2)
    resid = -candidate.rate * w - wpp + candidate.be_a * s * wp
    scale = (np.max(np.abs(candidate.rate * w)) + np.max(np.abs(wpp))
             + np.max(np.abs(candidate.be_a * s * wp)))
    # profiles sampled from second-order eigensolves carry nodal
    # roughness that differentiates to O(h), so the gate scales with
    # the profile grid spacing rather than its square; the second term
    # floors it at the rounding granularity of the second difference,
    # which is what remains when the residual is analytically zero
    slack = (np.max(np.diff(s)) * scale
             + 64.0 * np.finfo(float).eps * wmax / np.min(np.diff(s)) ** 2)
    worst = float(np.min(resid[1:-1]))
    if worst < -slack:
        raise PreconditionError(
            "barrier fails the supersolution inequality by %.3e "
            "(allowed slack %.3e)" % (-worst, slack),
            condition="(ii) supersolution inequality")


def modulus_defect_series(state: HeatState, candidate: ModulusCandidate,
                          drift, t_end: float,
                          dt: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Evolve the state to t_end and record the comparison defect
    max_{x,y} v(y,t) - v(x,t) - 2 phi(d(x,y)/2, t) at every accepted
    time, the initial instant included. Returns (times, defects).

    Preconditions (i)-(iv) are grid-checked first and a violation
    raises a precondition error naming the failed condition.
    """
    mesh = state.mesh
    if dt is None:
        dt = mesh.h
    if not dt > 0.0:
        raise ArgumentError("time step must be positive")
    if t_end < state.t:
        raise ArgumentError("t_end lies before the state's time")
    _check_candidate(candidate)

    half_d = _pair_half_distance(mesh)
    if np.max(half_d) > candidate.s_grid[-1] + 1e-12:
        raise ArgumentError("barrier profile does not cover the largest "
                            "node-pair separation")
    w2 = 2.0 * candidate.coefficient * np.interp(
        half_d, candidate.s_grid, candidate.profile)

    v = state.v
    t = state.t
    defect = float(np.max(v[:, None] - v[None, :]
                          - math.exp(-candidate.rate * t) * w2))
    if defect > 1e-9 * (np.max(v) - np.min(v) + np.max(w2)):
        raise PreconditionError(
            "barrier does not dominate the initial state (defect %.3e)"
            % defect, condition="(i) initial modulus")

    advance = _make_stepper(mesh, drift, dt)
    steps = max(1, int(math.ceil((t_end - t) / dt - 1e-12)))
    times = [t]
    defects = [defect]
    for _ in range(steps):
        v = advance(v)
        t += dt
        times.append(t)
        defects.append(float(np.max(
            v[:, None] - v[None, :] - math.exp(-candidate.rate * t) * w2)))
    return np.array(times), np.array(defects)


def modulus_comparison(state: HeatState, candidate: ModulusCandidate,
                       drift, t_end: float, dt: float | None = None) -> float:
    """Largest comparison defect seen at any accepted time up to t_end,
    the initial instant included. A correct barrier keeps the defect at
    discretization level, order h + dt."""
    _, defects = modulus_defect_series(state, candidate, drift, t_end, dt)
    return float(np.max(defects))


def decay_rate(trajectory: Sequence[HeatState]) -> float:
    """Least-squares decay rate of a single evolving mode: the slope of
    log ||v(t) - mean v(t)|| against t, sign-flipped. Subtracting each
    snapshot's own mean removes the conserved constant component, so
    the fit sees the slowest nonconstant mode whatever the weights."""
    if len(trajectory) < 10:
        raise ArgumentError("need at least 10 snapshots, got %d"
                            % len(trajectory))
    t = np.array([s.t for s in trajectory])
    if np.any(np.diff(t) <= 0.0):
        raise ArgumentError("snapshot times must increase")
    mesh = trajectory[0].mesh
    total = float(np.sum(mesh.weights))
    norms = np.empty(len(trajectory))
    vmax = 0.0
    for k, snap in enumerate(trajectory):
        if snap.mesh is not mesh and not np.array_equal(
                snap.mesh.nodes, mesh.nodes):
            raise ArgumentError("snapshots live on different meshes")
        centered = snap.v - np.sum(mesh.weights * snap.v) / total
        norms[k] = math.sqrt(float(np.sum(mesh.weights * centered**2)))
        vmax = max(vmax, float(np.max(np.abs(snap.v))))
    if np.any(norms <= 1e-13 * (vmax + 1.0)):
        raise RangeError("trajectory is already constant; no decay rate "
                         "to measure")
    slope = np.polyfit(t, np.log(norms), 1)[0]
    return float(-slope)

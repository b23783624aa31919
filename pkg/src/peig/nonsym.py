"""Complex spectra of drift diffusion operators on a line or circle.

The operator is u'' + X u' with reflecting (Neumann) ends on an
interval, or periodic closure on a circle. Its eigenvalues are reported
as decay rates: the negatives of the matrix eigenvalues, so the
constant mode sits at zero and every other mode has positive real part.
On an interval any drift is the derivative of a potential and the
spectrum is provably real; on a circle a drift with nonzero mean is not
a gradient and decay rates genuinely leave the real axis. Both cases
are bounded below by the eigenvalue of the symmetrizable model operator
with matching convexity constant, which is what ``verify_bound``
certifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .eigensolve import Mesh1D, MeshKind
from .errors import ArgumentError, NumericalError, PreconditionError
from .gamma_calculus import Diffusion1D, be_constant, intrinsic_diameter

_ZERO_MODE_TOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Every decay rate of a discretized drift operator, sorted by real
    part (ties by imaginary part). Exactly one entry is the constant
    mode at zero; construction fails if none is found."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex)
        order = np.lexsort((ev.imag, ev.real))
        object.__setattr__(self, "eigenvalues", ev[order])
        if len(ev) == 0:
            raise ArgumentError("a spectrum needs at least one eigenvalue")
        if np.min(np.abs(ev)) > _ZERO_MODE_TOL:
            raise NumericalError(
                "no eigenvalue within %.0e of zero: the constant mode is "
                "missing, so the assembly or eigensolve is suspect"
                % _ZERO_MODE_TOL)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def principal(self) -> complex:
        """Nontrivial decay rate of minimal real part; among conjugate
        partners the one with nonnegative imaginary part."""
        ev = self.eigenvalues
        rest = np.delete(ev, int(np.argmin(np.abs(ev))))
        if len(rest) == 0:
            raise ArgumentError("spectrum has only the constant mode")
        order = np.lexsort((-np.sign(rest.imag), np.abs(rest.imag), rest.real))
        return complex(rest[order[0]])


def assemble_neumann(mesh: Mesh1D, drift) -> np.ndarray:
    """Second-order collocation matrix of u -> u'' + X u' on the mesh.

    Interior rows use central differences; reflecting ends come from a
    mirrored ghost node, which also cancels the drift term in the
    boundary rows. On a circle every row is interior with wraparound.

    Constants must be annihilated exactly, not merely to rounding, so
    the superdiagonal entry is re-rounded to make the three entries of
    each row sum to zero in exact arithmetic:
        s = fl(lo + up), up' = s - lo (exact: both are multiples of
        lo's ulp and the difference is back in lo's range), diag = -s.
    Every partial sum of {lo, up', -s} is then representable and any
    summation order returns exactly zero.
    """
    K = len(mesh.nodes)
    if K < 10:
        raise ArgumentError("need at least 10 nodes to assemble, got %d" % K)
    x_vals = drift(mesh.nodes) if callable(drift) else np.asarray(drift, dtype=float)
    if x_vals.shape != mesh.nodes.shape:
        raise ArgumentError("drift samples must match the mesh nodes")
    h = mesh.h
    lo = 1.0 / h**2 - x_vals / (2.0 * h)
    up = 1.0 / h**2 + x_vals / (2.0 * h)
    if np.any(lo <= 0.0) or np.any(up <= 0.0):
        raise ArgumentError("drift too strong for this mesh: |X| h / 2 "
                            "reaches its diffusion scale, refine the mesh")
    row_sum = lo + up
    up = row_sum - lo

    A = np.zeros((K, K))
    idx = np.arange(K)
    if mesh.kind is MeshKind.CIRCLE:
        A[idx, (idx - 1) % K] = lo
        A[idx, idx] = -row_sum
        A[idx, (idx + 1) % K] = up
    else:
        A[idx[1:-1], idx[1:-1] - 1] = lo[1:-1]
        A[idx[1:-1], idx[1:-1]] = -row_sum[1:-1]
        A[idx[1:-1], idx[1:-1] + 1] = up[1:-1]
        A[0, 0] = -2.0 / h**2
        A[0, 1] = 2.0 / h**2
        A[K - 1, K - 2] = 2.0 / h**2
        A[K - 1, K - 1] = -2.0 / h**2
    return A


def _is_wraparound(A: np.ndarray) -> bool:
    return A[0, -1] != 0.0 or A[-1, 0] != 0.0


def spectrum(A: np.ndarray) -> Spectrum:
    """All K decay rates of an assembled operator, backward-stably.

    A tridiagonal matrix whose sub/super products are positive is
    diagonally similar to a symmetric one (off-diagonal sqrt(lo*up)),
    so its full spectrum comes from the symmetric tridiagonal
    eigensolver: exact realness, and fast enough to run thousands of
    nodes inside a property test. Wraparound or sign-degenerate
    matrices fall back to the dense nonsymmetric eigensolver.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ArgumentError("operator must be a square matrix")
    K = A.shape[0]
    if not _is_wraparound(A):
        sub = A[np.arange(1, K), np.arange(K - 1)]
        sup = A[np.arange(K - 1), np.arange(1, K)]
        band_nonzeros = (np.count_nonzero(np.diag(A))
                         + np.count_nonzero(sub) + np.count_nonzero(sup))
        band_only = np.count_nonzero(A) == band_nonzeros
        if band_only and np.all(sub * sup > 0.0):
            try:
                vals = eigh_tridiagonal(
                    np.diag(A), np.sqrt(sub * sup), eigvals_only=True)
            except np.linalg.LinAlgError as exc:
                raise NumericalError("tridiagonal eigensolve failed") from exc
            return Spectrum(eigenvalues=-vals.astype(complex))
    try:
        vals = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("dense eigensolve did not converge") from exc
    return Spectrum(eigenvalues=-vals)


def random_trig_drift(seed: int, period: float = 2.0 * math.pi,
                      harmonics: int = 5):
    """Seeded random drift built from the first few Fourier modes of the
    given period, coefficients uniform on [-1, 1]. Periodic by
    construction, so it closes up on a circle of that circumference."""
    if harmonics < 1:
        raise ArgumentError(f"need at least one harmonic, got {harmonics}")
    if not period > 0.0:
        raise ArgumentError(f"period must be positive, got {period}")
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1.0, 1.0, harmonics)
    d = rng.uniform(-1.0, 1.0, harmonics)
    freq = 2.0 * math.pi / period

    def drift(x):
        return sum(c[k] * np.cos(k * freq * x) + d[k] * np.sin(k * freq * x)
                   for k in range(harmonics))

    return drift


def be_infinity_constant(drift, domain) -> float:
    """Largest k such that the unit-diffusion operator with this drift
    is k-convex in the curvature-dimension sense with no dimension
    bound: the infimum of -X' over the domain, up to grid resolution.

    ``domain`` is a (lo, hi) pair for an interval, or a Diffusion1D
    whose interval and closure kind are reused.
    """
    if isinstance(domain, Diffusion1D):
        op = Diffusion1D(domain.x_lo, domain.x_hi,
                         lambda x: np.ones_like(x), drift,
                         circle=domain.circle)
    else:
        lo, hi = domain
        op = Diffusion1D.interval(float(lo), float(hi), drift=drift)
    return be_constant(op, math.inf)


def model_eigenpair(D: float, a: float, K: int = 4000):
    """(eigenvalue, s grid, eigenfunction samples) for the smallest
    nonzero reflecting mode of w'' - a s w' on [-D/2, D/2]: the sharp
    comparison object for any drift operator with convexity constant a
    on a domain of intrinsic diameter D.

    The operator is symmetric under the weight exp(-a s^2 / 2), so the
    value is the second-smallest eigenvalue of the weighted stiffness /
    mass pencil, reduced to a symmetric tridiagonal problem by diagonal
    scaling. The eigenfunction is checked to be odd and nondecreasing;
    both follow from the even weight and the sign structure of the
    weighted flux, so a violation flags a numerical breakdown. It is
    returned sup-normalized, increasing, so its endpoint values are -1
    and 1.
    """
    if not D > 0.0:
        raise ArgumentError("diameter must be positive")
    if K < 50:
        raise ArgumentError("need at least 50 nodes, got %d" % K)
    s = np.linspace(-D / 2.0, D / 2.0, K)
    h = D / (K - 1)
    # weights of the symmetrizing measure, scaled to a max of 1 so the
    # strongly convex / strongly concave regimes stay in float range
    log_rho = -a * s**2 / 2.0
    rho = np.exp(log_rho - log_rho.max())
    rho_cell = 0.5 * (rho[:-1] + rho[1:])
    m = rho * h
    m[0] *= 0.5
    m[-1] *= 0.5

    diag = np.concatenate(([rho_cell[0]],
                           rho_cell[:-1] + rho_cell[1:],
                           [rho_cell[-1]])) / (h * m)
    off = -rho_cell / (h * np.sqrt(m[:-1] * m[1:]))
    vals, vecs = eigh_tridiagonal(diag, off, select="i",
                                  select_range=(0, 1))
    # the constant mode lands at zero up to the eigensolver's backward
    # error, which scales with the matrix norm at large K
    zero_tol = max(_ZERO_MODE_TOL * max(1.0, abs(vals[1])),
                   np.finfo(float).eps * math.sqrt(K) * np.max(diag))
    if abs(vals[0]) > zero_tol:
        raise NumericalError("constant mode of the model pencil is off "
                             "zero by %.3e" % vals[0])
    w = vecs[:, 1] / np.sqrt(m)
    if w[-1] < w[0]:
        w = -w
    wmax = np.max(np.abs(w))
    if np.max(np.abs(w + w[::-1])) > 1e-6 * wmax:
        raise NumericalError("model eigenfunction lost its odd symmetry")
    if np.min(np.diff(w)) < -1e-12 * wmax:
        raise NumericalError("model eigenfunction is not nondecreasing")
    return float(vals[1]), s, w / wmax


def model_eigenvalue(D: float, a: float, K: int = 4000) -> float:
    """Smallest nonzero reflecting eigenvalue of w'' - a s w' on
    [-D/2, D/2]; see model_eigenpair for the construction."""
    return model_eigenpair(D, a, K)[0]


def verify_bound(op: Diffusion1D, K: int = 4000) -> dict:
    """Certify the spectral chain for a unit-diffusion drift operator:

        Re(principal decay rate) >= model eigenvalue >= pi^2/D^2 + a/2,

    with a the convexity constant of the drift and D the intrinsic
    diameter. Returns a report dict; a failed inequality is an outcome
    (``model_bound_holds`` / ``explicit_bound_holds``), not an error.
    Tolerances are 1e-4 relative, matched to the default mesh.
    """
    probe = np.linspace(op.x_lo, op.x_hi, 257)
    if np.max(np.abs(op.sigma(probe) - 1.0)) > 1e-12:
        raise PreconditionError(
            "the spectral chain is certified for unit diffusion only",
            condition="unit diffusion coefficient")

    a = be_constant(op, math.inf)
    D = intrinsic_diameter(op)
    lam_bar = model_eigenvalue(D, a)
    explicit = math.pi**2 / D**2 + a / 2.0

    if op.circle:
        mesh = Mesh1D.circle(op.length, K)
    else:
        mesh = Mesh1D.interval(op.x_lo, op.x_hi, K)
    spec = spectrum(assemble_neumann(mesh, op.drift))
    lam1 = spec.principal

    tol_model = 1e-4 * abs(lam_bar)
    tol_explicit = 1e-4 * max(abs(lam_bar), abs(explicit))
    return {
        "a": float(a),
        "diameter": float(D),
        "model_eigenvalue": float(lam_bar),
        "explicit_bound": float(explicit),
        "principal_re": float(lam1.real),
        "principal_im": float(lam1.imag),
        "margin_vs_model": float(lam1.real - lam_bar),
        "margin_vs_explicit": float(lam_bar - explicit),
        "model_bound_holds": bool(lam1.real >= lam_bar - tol_model),
        "explicit_bound_holds": bool(lam_bar >= explicit - tol_explicit),
    }

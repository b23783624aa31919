"""Command-line front end: configured runs, artifacts, verdicts.

Each subcommand assembles its config from dataclass defaults, an
optional JSON config document, and explicit flags (flags win), runs one
experiment, writes CSV/JSON artifacts atomically into the output
directory next to rendered figures, and prints one line per check.

Exit codes: 0 every check passed, 1 a check failed, 2 usage error,
3 numerical failure. Identical config and seed give byte-identical
data artifacts; the run report additionally records the wall-clock
duration and is reproducible up to that field.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import ClassVar, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import eigh_tridiagonal

from . import plotting
from .errors import (
    ArgumentError,
    ConvergenceError,
    DomainError,
    HorizonError,
    IntegrationFailureError,
    NumericalError,
    PreconditionError,
    RangeError,
    UsageError,
)
from .eigensolve import Mesh1D, MeshKind, principal_eigenpair, sharpness_tube
from .gamma_calculus import (
    Diffusion1D,
    SampledFunction,
    be_constant,
    intrinsic_diameter,
    invariant_density,
    ricci_N,
    summation_by_parts_residual,
)
from .heat_drift import (
    HeatState,
    decay_rate,
    eigen_modulus,
    evolve,
    fit_initial_modulus,
    modulus_defect_series,
)
from .model_ode import Branch, ModelProblem, delta_m_curves, first_max, solve_model
from .nonsym import (
    assemble_neumann,
    be_infinity_constant,
    model_eigenvalue,
    random_trig_drift,
    spectrum,
    verify_bound,
)
from .ptrig import pi_p, sin_p, sin_p_prime

OUTDIR_ENV = "PEIG_OUTDIR"


# ---------------------------------------------------------------------------
# expression strings

_EXPR_NAMES = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "arctan": np.arctan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "abs": np.abs, "sign": np.sign, "pi": math.pi, "e": math.e,
}


def compile_expression(text: str, field: str):
    """Turn a one-variable arithmetic expression into a callable that
    maps an array to an array of the same shape.

    The variable may be written ``x`` or ``s``; besides it, only basic
    arithmetic and the usual transcendental names are available, so a
    config file cannot smuggle in anything but a formula.
    """
    try:
        code = compile(text, f"<{field}>", "eval")
    except SyntaxError as exc:
        raise UsageError(f"{field}: cannot parse {text!r}: {exc.msg}") from None
    for name in code.co_names:
        if name not in _EXPR_NAMES and name not in ("x", "s"):
            raise UsageError(f"{field}: unknown name {name!r} in {text!r}")

    def fn(x):
        arr = np.asarray(x, dtype=float)
        env = {"__builtins__": {}, "x": arr, "s": arr, **_EXPR_NAMES}
        out = np.asarray(eval(code, env), dtype=float)  # names whitelisted above
        return np.broadcast_to(out, arr.shape).copy()

    try:
        fn(np.linspace(0.25, 0.75, 5))
    except Exception as exc:
        raise UsageError(f"{field}: cannot evaluate {text!r}: {exc}") from None
    return fn


# ---------------------------------------------------------------------------
# artifact writers

def _write_atomic(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _format_cell(v) -> str:
    # repr of a Python float is the shortest round-trip form, which is
    # both readable and byte-stable across runs
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_table(path, names: Sequence[str], columns: Sequence) -> str:
    cols = [np.atleast_1d(np.asarray(c)) for c in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*cols):
        writer.writerow([_format_cell(v) for v in row])
    _write_atomic(Path(path), buf.getvalue().encode("utf-8"))
    return str(path)


def emit_plotdata(series, path) -> str:
    """Write a plot-ready table: two or three named columns (for
    example a curve, or re/im point pairs), comma-separated with `.`
    decimals and one header line naming the columns. Byte output is
    deterministic for fixed inputs.

    ``series`` maps column names to equal-length nonempty 1-D arrays.
    """
    names = list(series)
    if not 2 <= len(names) <= 3:
        raise ArgumentError(
            f"plot data needs two or three columns, got {len(names)}")
    cols = [np.atleast_1d(np.asarray(series[n])) for n in names]
    if len(cols[0]) == 0:
        raise ArgumentError("plot data series is empty")
    if any(len(c) != len(cols[0]) for c in cols):
        raise ArgumentError("plot data columns differ in length")
    return _write_table(path, names, cols)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        # strict JSON has no Infinity/NaN literals
        return float(obj) if math.isfinite(obj) else str(float(obj))
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _write_json(path, payload) -> str:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    _write_atomic(Path(path), text.encode("utf-8"))
    return str(path)


# ---------------------------------------------------------------------------
# configs

def _usage(command: str, message: str) -> UsageError:
    return UsageError(f"{command}: {message}")


def _check_positive(command: str, **fields) -> None:
    for name, value in fields.items():
        if not (isinstance(value, (int, float)) and value > 0
                and math.isfinite(value)):
            raise _usage(command, f"{name} must be positive and finite, "
                                  f"got {value!r}")


def _check_int(command: str, name: str, value, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _usage(command, f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise _usage(command, f"{name} must be at least {minimum}, got {value}")


def _check_seed(command: str, seed, required: bool) -> None:
    if seed is None:
        if required:
            raise _usage(command, "this run draws random numbers; "
                                  "an explicit --seed is required")
        return
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise _usage(command, f"seed must be an integer, got {seed!r}")


def _as_float_tuple(command: str, name: str, value) -> tuple:
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise _usage(command, f"{name} must be a list of numbers, "
                              f"got {value!r}") from None


@dataclass(frozen=True)
class PTrigConfig:
    command: ClassVar[str] = "ptrig"
    p_values: tuple = (1.2, 1.5, 2.0, 3.0, 7.0)
    samples: int = 513
    tol_identity: float = 1e-8
    tol_half_period: float = 1e-10
    outdir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "p_values",
                           _as_float_tuple(self.command, "p_values", self.p_values))
        if not self.p_values:
            raise _usage(self.command, "p_values must not be empty")
        for p in self.p_values:
            if not p > 1.0:
                raise _usage(self.command, f"every p must exceed 1, got {p}")
        _check_int(self.command, "samples", self.samples, 3)
        _check_positive(self.command, tol_identity=self.tol_identity,
                        tol_half_period=self.tol_half_period)


@dataclass(frozen=True)
class GammaConfig:
    command: ClassVar[str] = "gamma"
    sigma: str = "1"
    drift: str = "0"
    kind: str = "interval"
    lo: float = -1.0
    hi: float = 1.0
    circumference: float = 2.0 * math.pi
    dims: tuple = (2.0, 5.0, 20.0)
    resolution: int = 2001
    tol_sbp: float = 2e-3
    outdir: str | None = None

    def __post_init__(self):
        if self.kind not in ("interval", "circle"):
            raise _usage(self.command, f"kind must be interval or circle, "
                                       f"got {self.kind!r}")
        if self.kind == "interval" and not self.hi > self.lo:
            raise _usage(self.command, f"need hi > lo, got [{self.lo}, {self.hi}]")
        if self.kind == "circle":
            _check_positive(self.command, circumference=self.circumference)
        object.__setattr__(self, "dims",
                           _as_float_tuple(self.command, "dims", self.dims))
        for N in self.dims:
            if not N > 1.0:
                raise _usage(self.command, f"every dimension bound must exceed 1, "
                                           f"got {N}")
        _check_int(self.command, "resolution", self.resolution, 101)
        _check_positive(self.command, tol_sbp=self.tol_sbp)


@dataclass(frozen=True)
class ModelConfig:
    command: ClassVar[str] = "model"
    p: float = 2.0
    lam: float = 1.0
    n: float | str = 3.0
    a: float = 0.0
    branch: str = "auto"
    samples: int = 400
    a_grid: tuple = (0.0, 6.0, 13)
    tol_closed_form: float = 1e-6
    outdir: str | None = None

    def __post_init__(self):
        _check_positive(self.command, p=self.p, lam=self.lam,
                        tol_closed_form=self.tol_closed_form)
        if not self.p > 1.0:
            raise _usage(self.command, f"p must exceed 1, got {self.p}")
        n = self.n
        if isinstance(n, str):
            if n.strip().lower() in ("inf", "infinity"):
                n = math.inf
            else:
                try:
                    n = float(n)
                except ValueError:
                    raise _usage(self.command,
                                 f"n must be a number or 'inf', got {n!r}") from None
        object.__setattr__(self, "n", float(n))
        if not self.n > 1.0:
            raise _usage(self.command, f"n must lie in (1, inf], got {self.n}")
        if not (self.a >= 0.0 and math.isfinite(self.a)):
            raise _usage(self.command, f"a must be finite and >= 0, got {self.a}")
        if self.branch not in ("auto", "zero", "radial"):
            raise _usage(self.command, f"branch must be auto, zero or radial, "
                                       f"got {self.branch!r}")
        if self.branch == "radial" and not math.isfinite(self.n):
            raise _usage(self.command, "the radial branch needs finite n")
        _check_int(self.command, "samples", self.samples, 16)
        grid = _as_float_tuple(self.command, "a_grid", self.a_grid)
        if grid:
            if len(grid) != 3:
                raise _usage(self.command,
                             "a_grid must be (start, stop, count) or empty")
            if not grid[1] >= grid[0] >= 0.0:
                raise _usage(self.command, f"a_grid must satisfy 0 <= start "
                                           f"<= stop, got {grid}")
            if grid[2] != int(grid[2]) or int(grid[2]) < 2:
                raise _usage(self.command, "a_grid count must be an integer >= 2")
        object.__setattr__(self, "a_grid", grid)

    @property
    def resolved_branch(self) -> Branch:
        if self.branch == "zero":
            return Branch.T_ZERO
        if self.branch == "radial":
            return Branch.T_RADIAL
        return Branch.T_ZERO if self.a == 0.0 else Branch.T_RADIAL


@dataclass(frozen=True)
class EigConfig:
    command: ClassVar[str] = "eig"
    p: float = 2.0
    kind: str = "interval"
    length: float = math.pi
    drift: str = "0"
    K: int = 1000
    seed: int | None = None
    tol_bound: float = 1e-3
    tol_residual: float = 1e-7
    outdir: str | None = None

    def __post_init__(self):
        if not self.p > 1.0:
            raise _usage(self.command, f"p must exceed 1, got {self.p}")
        if self.kind not in ("interval", "circle"):
            raise _usage(self.command, f"kind must be interval or circle, "
                                       f"got {self.kind!r}")
        _check_positive(self.command, length=self.length,
                        tol_bound=self.tol_bound, tol_residual=self.tol_residual)
        _check_int(self.command, "K", self.K, 50)
        # descent restarts draw random profiles, so replay needs a seed
        _check_seed(self.command, self.seed, required=True)


@dataclass(frozen=True)
class TubeConfig:
    command: ClassVar[str] = "tube"
    p: float = 2.0
    dim: int = 3
    diameter: float = math.pi
    ratios: tuple = (0.6, 0.8, 0.95)
    K: int = 400
    seed: int | None = None
    tol_closed_mesh: float = 5e-3
    outdir: str | None = None

    def __post_init__(self):
        if not self.p > 1.0:
            raise _usage(self.command, f"p must exceed 1, got {self.p}")
        _check_int(self.command, "dim", self.dim, 2)
        _check_positive(self.command, diameter=self.diameter,
                        tol_closed_mesh=self.tol_closed_mesh)
        ratios = _as_float_tuple(self.command, "ratios", self.ratios)
        if len(ratios) < 2:
            raise _usage(self.command, "need at least two ratios")
        for r in ratios:
            if not 0.0 < r < 1.0:
                raise _usage(self.command, f"ratios are circle-diameter "
                                           f"fractions in (0, 1), got {r}")
        if any(b <= a for a, b in zip(ratios, ratios[1:])):
            raise _usage(self.command, "ratios must increase strictly")
        object.__setattr__(self, "ratios", ratios)
        _check_int(self.command, "K", self.K, 50)
        _check_seed(self.command, self.seed, required=True)


@dataclass(frozen=True)
class NonsymConfig:
    command: ClassVar[str] = "nonsym"
    drift: str = "-s"
    kind: str = "interval"
    lo: float = -1.0
    hi: float = 1.0
    circumference: float = 2.0 * math.pi
    K: int = 2000
    seed: int | None = None
    harmonics: int = 5
    outdir: str | None = None

    def __post_init__(self):
        if self.kind not in ("interval", "circle"):
            raise _usage(self.command, f"kind must be interval or circle, "
                                       f"got {self.kind!r}")
        if self.kind == "interval" and not self.hi > self.lo:
            raise _usage(self.command, f"need hi > lo, got [{self.lo}, {self.hi}]")
        if self.kind == "circle":
            _check_positive(self.command, circumference=self.circumference)
        _check_int(self.command, "K", self.K, 50)
        _check_int(self.command, "harmonics", self.harmonics, 1)
        _check_seed(self.command, self.seed, required=(self.drift == "random"))


@dataclass(frozen=True)
class HeatConfig:
    command: ClassVar[str] = "heat"
    drift: str = "0"
    kind: str = "interval"
    lo: float = -1.0
    hi: float = 1.0
    circumference: float = 2.0 * math.pi
    K: int = 501
    v0: str = "eigenfunction"
    dt: float | None = None
    t_end: float | None = None
    seed: int | None = None
    snapshots: int = 12
    widen: float = 1.2
    tol_decay: float = 0.02
    outdir: str | None = None

    def __post_init__(self):
        if self.kind not in ("interval", "circle"):
            raise _usage(self.command, f"kind must be interval or circle, "
                                       f"got {self.kind!r}")
        if self.kind == "interval" and not self.hi > self.lo:
            raise _usage(self.command, f"need hi > lo, got [{self.lo}, {self.hi}]")
        if self.kind == "circle":
            _check_positive(self.command, circumference=self.circumference)
        _check_int(self.command, "K", self.K, 50)
        if self.dt is not None:
            _check_positive(self.command, dt=self.dt)
        if self.t_end is not None:
            _check_positive(self.command, t_end=self.t_end)
        _check_int(self.command, "snapshots", self.snapshots, 10)
        if not self.widen > 1.0:
            raise _usage(self.command, f"widen must exceed 1 so the barrier "
                                       f"covers the domain, got {self.widen}")
        _check_positive(self.command, tol_decay=self.tol_decay)
        _check_seed(self.command, self.seed, required=(self.v0 == "random"))


@dataclass(frozen=True)
class VerifyAllConfig:
    command: ClassVar[str] = "verify-all"
    outdir: str | None = None


ExperimentConfig = (PTrigConfig | GammaConfig | ModelConfig | EigConfig
                    | TubeConfig | NonsymConfig | HeatConfig | VerifyAllConfig)

_CONFIG_TYPES = {cls.command: cls for cls in (
    PTrigConfig, GammaConfig, ModelConfig, EigConfig, TubeConfig,
    NonsymConfig, HeatConfig, VerifyAllConfig)}


@dataclass(frozen=True)
class RunReport:
    """One experiment's inputs echo, named outputs, and verdicts.

    Every verdict key names the theorem-level check it instantiates;
    its value is the pass/fail. Output values are scalars or paths
    relative to the run's output directory.
    """

    command: str
    config: dict
    outputs: dict
    verdicts: dict
    duration_seconds: float

    @property
    def all_pass(self) -> bool:
        return all(self.verdicts.values())


# ---------------------------------------------------------------------------
# shared runner helpers

def _mesh_for(kind: str, lo: float, hi: float, circumference: float,
              K: int, density=None) -> Mesh1D:
    if kind == "circle":
        return Mesh1D.circle(circumference, K, density=density)
    return Mesh1D.interval(lo, hi, K, density=density)


def _op_for(kind: str, lo: float, hi: float, circumference: float,
            sigma=None, drift=None) -> Diffusion1D:
    if kind == "circle":
        return Diffusion1D.on_circle(circumference, sigma=sigma, drift=drift)
    return Diffusion1D.interval(lo, hi, sigma=sigma, drift=drift)


def _drift_callable(cfg) -> tuple:
    """(callable, description) for a drift config field; the string
    'random' selects the seeded trigonometric family."""
    if cfg.drift == "random":
        period = (cfg.circumference if cfg.kind == "circle"
                  else cfg.hi - cfg.lo)
        fn = random_trig_drift(cfg.seed, period=period, harmonics=cfg.harmonics)
        return fn, f"random(seed={cfg.seed}, harmonics={cfg.harmonics})"
    return compile_expression(cfg.drift, "drift"), cfg.drift


def _principal_mode(mesh: Mesh1D, drift) -> tuple[float, np.ndarray]:
    """Slowest nonconstant mode of the drift generator on the mesh.

    Interval drifts are gradients, so the generator symmetrizes to a
    tridiagonal pencil and the mode is real; on a circle the principal
    pair may be complex and the real part is returned.
    """
    A = assemble_neumann(mesh, drift)
    K = len(mesh.nodes)
    if mesh.kind is MeshKind.INTERVAL:
        sub = np.diag(A, -1)
        sup = np.diag(A, 1)
        d = np.diag(A).copy()
        e = np.sqrt(sub * sup)
        vals, vecs = eigh_tridiagonal(d, e, select="i",
                                      select_range=(K - 2, K - 2))
        scale = np.cumprod(np.concatenate(([1.0], np.sqrt(sup / sub))))
        rate = -float(vals[0])
        u = vecs[:, 0] / scale
    else:
        w, V = np.linalg.eig(A)
        rates = -w
        keep = np.abs(rates) > 1e-8 * max(1.0, float(np.max(rates.real)))
        idx = np.lexsort((np.abs(rates.imag), rates.real))
        idx = idx[keep[idx]]
        rate = float(rates[idx[0]].real)
        u = np.real(V[:, idx[0]])
    u = u / np.max(np.abs(u))
    if u[np.argmax(np.abs(u))] < 0.0:
        u = -u
    return rate, u


# ---------------------------------------------------------------------------
# subcommand runners: (config, outdir) -> (outputs, verdicts)

def _run_ptrig(cfg: PTrigConfig, outdir: Path):
    outputs = {}
    worst_identity = 0.0
    curves = {}
    tgrid_unit = np.linspace(0.0, 2.0, cfg.samples)
    for p in cfg.p_values:
        pip = pi_p(p)
        t = tgrid_unit * pip
        s = sin_p(t, p)
        ds = sin_p_prime(t, p)
        worst_identity = max(worst_identity, float(np.max(np.abs(
            np.abs(s) ** p + np.abs(ds) ** p - 1.0))))
        tag = f"{p:g}".replace(".", "_")
        fname = f"sin_p{tag}.csv"
        emit_plotdata({"t": t, "sin_p": s, "dsin_p": ds}, outdir / fname)
        outputs[f"samples_p{tag}_csv"] = fname
        curves[f"p={p:g}"] = s
    emit_plotdata({"p": np.array(cfg.p_values),
                   "pi_p": np.array([pi_p(p) for p in cfg.p_values])},
                  outdir / "pi_values.csv")
    outputs["pi_values_csv"] = "pi_values.csv"
    outputs["identity_residual"] = worst_identity
    outputs["pi_2_minus_pi"] = pi_p(2.0) - math.pi
    plotting.line_figure(outdir / "ptrig.png", tgrid_unit, curves,
                         xlabel="t / half-period", ylabel="sin_p(t)")
    outputs["figure"] = "ptrig.png"
    verdicts = {
        "p-trig pythagorean identity":
            worst_identity <= cfg.tol_identity,
        "half-period matches the classical value at p = 2":
            abs(pi_p(2.0) - math.pi) <= cfg.tol_half_period,
    }
    return outputs, verdicts


def _run_gamma(cfg: GammaConfig, outdir: Path):
    sigma = compile_expression(cfg.sigma, "sigma")
    drift = compile_expression(cfg.drift, "drift")
    op = _op_for(cfg.kind, cfg.lo, cfg.hi, cfg.circumference,
                 sigma=sigma, drift=drift)

    be_vals = [be_constant(op, N, resolution=cfg.resolution)
               for N in sorted(cfg.dims)]
    be_inf = be_constant(op, math.inf, resolution=cfg.resolution)
    ladder = be_vals + [be_inf]
    slack = 1e-9 * (1.0 + max(abs(v) for v in ladder))
    monotone = all(b >= a - slack for a, b in zip(ladder, ladder[1:]))

    # smooth test pair for the integration-by-parts defect; periodic
    # factors on a circle so the boundary bracket really vanishes
    x = np.linspace(op.x_lo, op.x_hi, 801)
    L = op.length
    if cfg.kind == "circle":
        f = SampledFunction(x, np.sin(2.0 * math.pi * x / L))
        g = SampledFunction(x, np.cos(4.0 * math.pi * x / L))
    else:
        f = SampledFunction(x, np.sin(math.pi * (x - op.x_lo) / L))
        g = SampledFunction(x, np.cos(0.7 * math.pi * (x - op.x_lo) / L))
    sbp = summation_by_parts_residual(op, f, g)

    rho = invariant_density(op, resolution=cfg.resolution)
    emit_plotdata({"x": rho.grid, "density": rho.values},
                  outdir / "density.csv")
    inset = 1e-3 * L
    xc = np.linspace(op.x_lo + inset, op.x_hi - inset, 401)
    curv = np.array([ricci_N(op, math.inf, float(xi)) for xi in xc])
    emit_plotdata({"x": xc, "curvature": curv}, outdir / "curvature.csv")

    outputs = {
        "density_csv": "density.csv",
        "curvature_csv": "curvature.csv",
        "intrinsic_diameter": intrinsic_diameter(op),
        "sbp_residual": sbp,
        "be_constant_inf": be_inf,
    }
    for N, v in zip(sorted(cfg.dims), be_vals):
        outputs[f"be_constant_N{N:g}"] = v
    plotting.line_figure(outdir / "gamma.png", xc, {None: curv},
                         xlabel="x", ylabel="curvature lower bound")
    outputs["figure"] = "gamma.png"
    verdicts = {
        "curvature constant nondecreasing in the dimension bound": monotone,
        "weighted integration by parts closes": sbp <= cfg.tol_sbp,
    }
    return outputs, verdicts


def _run_model(cfg: ModelConfig, outdir: Path):
    branch = cfg.resolved_branch
    prob = ModelProblem(cfg.p, cfg.lam, n=cfg.n, a=cfg.a, branch=branch)
    b, delta, m = first_max(prob)
    sol = solve_model(prob, b)
    t = np.linspace(sol.grid[0], sol.grid[-1], cfg.samples)
    w, phi = sol.dense(t)
    q = prob.p.q
    dw = np.sign(phi) * np.abs(phi) ** (q - 1.0)
    emit_plotdata({"t": t, "w": w, "dw": dw}, outdir / "profile.csv")

    flat = pi_p(cfg.p) / prob.alpha
    outputs = {
        "profile_csv": "profile.csv",
        "branch": branch.value,
        "first_max_location": b,
        "distance_to_first_max": delta,
        "first_max_value": m,
        "flat_half_period": flat,
    }
    if branch is Branch.T_ZERO:
        verdicts = {
            "first max at the flat half-period with value one":
                (abs(delta - flat) <= cfg.tol_closed_form * max(1.0, flat)
                 and abs(m - 1.0) <= cfg.tol_closed_form),
        }
    else:
        verdicts = {
            "first max strictly beyond the flat half-period": delta > flat,
        }

    if cfg.a_grid and math.isfinite(cfg.n):
        a0, a1, count = cfg.a_grid
        grid = np.linspace(a0, a1, int(count))
        table = delta_m_curves(cfg.p, cfg.lam, cfg.n, grid)
        emit_plotdata({"a": table[:, 0], "delta": table[:, 1],
                       "m": table[:, 2]}, outdir / "delta_m.csv")
        outputs["delta_m_csv"] = "delta_m.csv"
        slack = 1e-9 * max(1.0, float(np.max(table[:, 1])))
        verdicts["start-point curve stays above the flat half-period"] = \
            bool(np.all(table[:, 1] > flat))
        verdicts["distance to first max nonincreasing in the start point"] = \
            bool(np.all(np.diff(table[:, 1]) <= slack))
        plotting.line_figure(outdir / "model_delta_m.png", table[:, 0],
                             {"delta(a)": table[:, 1], "m(a)": table[:, 2]},
                             xlabel="start point a", ylabel="value")
        outputs["curve_figure"] = "model_delta_m.png"

    plotting.line_figure(outdir / "model_profile.png", t,
                         {"w": w, "w'": dw}, xlabel="t", ylabel="profile")
    outputs["figure"] = "model_profile.png"
    return outputs, verdicts


def _run_eig(cfg: EigConfig, outdir: Path):
    drift = compile_expression(cfg.drift, "drift")
    if cfg.kind == "circle":
        nodes = np.linspace(0.0, cfg.length, cfg.K, endpoint=False)
        X = drift(nodes)
        closing = np.trapezoid(np.append(X, X[0]),
                               np.append(nodes, cfg.length))
        if abs(closing) > 1e-8 * (1.0 + float(np.max(np.abs(X))) * cfg.length):
            raise _usage(cfg.command,
                         "a circle drift must integrate to zero over the "
                         "period to define a weighted eigenproblem; "
                         "non-gradient drifts belong to the nonsym subcommand")
        log_rho = cumulative_trapezoid(X, nodes, initial=0.0)
        mesh = Mesh1D.circle(cfg.length, cfg.K,
                             density=np.exp(log_rho - np.max(log_rho)))
        diam = 0.5 * cfg.length
    else:
        half = 0.5 * cfg.length
        nodes = np.linspace(-half, half, cfg.K)
        X = drift(nodes)
        log_rho = cumulative_trapezoid(X, nodes, initial=0.0)
        mesh = Mesh1D.interval(-half, half, cfg.K,
                               density=np.exp(log_rho - np.max(log_rho)))
        diam = cfg.length

    result = principal_eigenpair(mesh, cfg.p, seed=cfg.seed)
    bound = (cfg.p - 1.0) * pi_p(cfg.p) ** cfg.p / diam ** cfg.p

    emit_plotdata({"x": mesh.nodes, "u": result.u},
                  outdir / "eigenfunction.csv")
    outputs = {
        "eigenfunction_csv": "eigenfunction.csv",
        "eigenvalue": result.lam,
        "residual": result.residual,
        "iterations": result.iterations,
        "sharp_bound": bound,
        "ratio_to_bound": result.lam / bound,
    }
    plotting.line_figure(outdir / "eigenfunction.png", mesh.nodes,
                         {None: result.u}, xlabel="x", ylabel="u")
    outputs["figure"] = "eigenfunction.png"
    verdicts = {
        "sharp lower bound by intrinsic diameter":
            result.lam >= bound * (1.0 - cfg.tol_bound),
        "certified eigenpair residual":
            result.residual <= cfg.tol_residual,
    }
    return outputs, verdicts


def _run_tube(cfg: TubeConfig, outdir: Path):
    dprimes = [r * cfg.diameter / math.pi for r in cfg.ratios]
    rows = sharpness_tube(cfg.p, cfg.dim, cfg.diameter, dprimes,
                          K=cfg.K, seed=cfg.seed)
    bound = (cfg.p - 1.0) * pi_p(cfg.p) ** cfg.p / cfg.diameter ** cfg.p
    _write_table(outdir / "tube_table.csv",
                 ("Dprime", "lam_closed", "lam_mesh", "gap"),
                 (rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]))
    emit_plotdata({"ratio": np.array(cfg.ratios), "gap": rows[:, 3]},
                  outdir / "tube_gap.csv")
    rel_mesh = np.max(np.abs(rows[:, 2] - rows[:, 1]) / rows[:, 1])
    outputs = {
        "table_csv": "tube_table.csv",
        "gap_csv": "tube_gap.csv",
        "interval_bound": bound,
        "smallest_gap": float(np.min(rows[:, 3])),
        "mesh_vs_closed_rel": float(rel_mesh),
    }
    plotting.line_figure(outdir / "tube_gap.png", np.array(cfg.ratios),
                         {None: rows[:, 3]}, xlabel="circle share of the diameter",
                         ylabel="relative gap above the bound", logy=True)
    outputs["figure"] = "tube_gap.png"
    verdicts = {
        "factor eigenvalues stay above the interval bound":
            bool(np.all(rows[:, 1] > bound) and np.all(rows[:, 2] > bound)),
        "gap closes as the circle factor fills the diameter":
            bool(np.all(np.diff(rows[:, 3]) < 0.0)),
        "closed form matches the mesh eigensolve":
            rel_mesh <= cfg.tol_closed_mesh,
    }
    return outputs, verdicts


def _run_nonsym(cfg: NonsymConfig, outdir: Path):
    drift, drift_desc = _drift_callable(cfg)
    op = _op_for(cfg.kind, cfg.lo, cfg.hi, cfg.circumference, drift=drift)
    report = dict(verify_bound(op, K=cfg.K))
    mesh = _mesh_for(cfg.kind, cfg.lo, cfg.hi, cfg.circumference, cfg.K)
    sp = spectrum(assemble_neumann(mesh, drift))
    emit_plotdata({"re": sp.eigenvalues.real, "im": sp.eigenvalues.imag},
                  outdir / "spectrum.csv")
    outputs = {"spectrum_csv": "spectrum.csv", "drift": drift_desc, **report}
    plotting.scatter_figure(outdir / "spectrum.png", sp.eigenvalues.real,
                            sp.eigenvalues.imag, xlabel="re", ylabel="im")
    outputs["figure"] = "spectrum.png"
    verdicts = {
        "principal real part above the model eigenvalue":
            bool(report["model_bound_holds"]),
        "model eigenvalue above the explicit bound":
            bool(report["explicit_bound_holds"]),
    }
    return outputs, verdicts


def _run_heat(cfg: HeatConfig, outdir: Path):
    drift = compile_expression(cfg.drift, "drift")
    mesh = _mesh_for(cfg.kind, cfg.lo, cfg.hi, cfg.circumference, cfg.K)
    if cfg.kind == "circle":
        domain = Diffusion1D.on_circle(cfg.circumference, drift=drift)
        diam = 0.5 * cfg.circumference
    else:
        domain = (cfg.lo, cfg.hi)
        diam = cfg.hi - cfg.lo

    if cfg.v0 == "eigenfunction":
        mode_rate, v0 = _principal_mode(mesh, drift)
    elif cfg.v0 == "random":
        rng = np.random.default_rng(cfg.seed)
        v0 = rng.standard_normal(cfg.K)
        v0 = v0 / np.max(np.abs(v0))
        mode_rate = None
    else:
        v0 = compile_expression(cfg.v0, "v0")(mesh.nodes)
        mode_rate = None
    state = HeatState(mesh, v0, 0.0)

    be_a = be_infinity_constant(drift, domain)
    lam_bar = model_eigenvalue(diam, be_a)
    explicit = math.pi ** 2 / diam ** 2 + 0.5 * be_a
    dt = mesh.h if cfg.dt is None else cfg.dt
    t_end = 5.0 / lam_bar if cfg.t_end is None else cfg.t_end

    outputs = {
        "drift": cfg.drift,
        "be_constant": be_a,
        "model_eigenvalue": lam_bar,
        "explicit_bound": explicit,
        "dt": dt,
        "t_end": t_end,
    }
    if mode_rate is not None:
        outputs["initial_mode_rate"] = mode_rate
    verdicts = {}

    candidate = fit_initial_modulus(eigen_modulus(cfg.widen * diam, be_a),
                                    state)
    gate = 5.0 * (mesh.h + dt)
    try:
        times, defects = modulus_defect_series(state, candidate, drift,
                                               t_end, dt)
    except PreconditionError as exc:
        outputs["modulus_failure"] = str(exc)
        verdicts["modulus of continuity comparison"] = False
    else:
        emit_plotdata({"t": times, "defect": defects}, outdir / "defect.csv")
        outputs["defect_csv"] = "defect.csv"
        outputs["defect_max"] = float(np.max(defects))
        outputs["defect_gate"] = gate
        verdicts["modulus of continuity comparison"] = \
            float(np.max(defects)) <= gate
        plotting.line_figure(outdir / "heat_defect.png", times,
                             {None: defects}, xlabel="t",
                             ylabel="comparison defect")
        outputs["defect_figure"] = "heat_defect.png"

    steps = max(1, int(math.ceil(t_end / dt - 1e-12)))
    every = max(1, steps // (cfg.snapshots - 1))
    traj = evolve(state, dt, drift, steps, snapshot_every=every)
    t_col = np.concatenate([np.full(cfg.K, s.t) for s in traj])
    x_col = np.concatenate([mesh.nodes for _ in traj])
    v_col = np.concatenate([s.v for s in traj])
    emit_plotdata({"t": t_col, "x": x_col, "v": v_col},
                  outdir / "snapshots.csv")
    outputs["snapshots_csv"] = "snapshots.csv"
    shown = traj[:: max(1, len(traj) // 6)]
    plotting.line_figure(outdir / "heat_snapshots.png", mesh.nodes,
                         {f"t={s.t:.3g}": s.v for s in shown},
                         xlabel="x", ylabel="v")
    outputs["figure"] = "heat_snapshots.png"

    try:
        rate = decay_rate(traj)
    except RangeError:
        rate = None
        outputs["decay_rate"] = None
    else:
        outputs["decay_rate"] = rate
        slack = 1e-9 * max(1.0, abs(lam_bar))
        verdicts["decay chain: rate above model above explicit"] = (
            rate >= lam_bar * (1.0 - cfg.tol_decay) - slack
            and lam_bar >= explicit - slack)
    return outputs, verdicts


_VERIFY_ALL_BATTERY = (
    PTrigConfig(),
    GammaConfig(drift="-1.2*x", lo=-2.0, hi=2.0, resolution=1001),
    ModelConfig(p=2.0, lam=1.0, n=3.0, a=0.8, a_grid=(0.0, 6.0, 13)),
    EigConfig(p=2.0, kind="interval", length=math.pi, K=800, seed=0),
    TubeConfig(p=2.0, dim=3, diameter=math.pi, ratios=(0.7, 0.9), K=300,
               seed=0),
    NonsymConfig(drift="-s", kind="interval", lo=-1.0, hi=1.0, K=2000),
    HeatConfig(drift="-s", kind="interval", lo=-1.0, hi=1.0, K=401,
               v0="eigenfunction"),
)


def _run_verify_all(cfg: VerifyAllConfig, outdir: Path):
    outputs = {}
    verdicts = {}
    for sub in _VERIFY_ALL_BATTERY:
        sub_dir = outdir / sub.command
        report = run(dataclasses.replace(sub, outdir=str(sub_dir)))
        outputs[f"{sub.command}_report"] = f"{sub.command}/report.json"
        for name, ok in report.verdicts.items():
            verdicts[f"{sub.command}: {name}"] = ok
    return outputs, verdicts


_RUNNERS = {
    "ptrig": _run_ptrig,
    "gamma": _run_gamma,
    "model": _run_model,
    "eig": _run_eig,
    "tube": _run_tube,
    "nonsym": _run_nonsym,
    "heat": _run_heat,
    "verify-all": _run_verify_all,
}


def run(config: ExperimentConfig) -> RunReport:
    """Run one configured experiment, write its artifacts, and return
    the report. The report is also written to report.json in the output
    directory; every write lands atomically (temp file plus rename)."""
    outdir = Path(config.outdir or os.environ.get(OUTDIR_ENV) or "peig-out")
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    outputs, verdicts = _RUNNERS[config.command](config, outdir)
    report = RunReport(
        command=config.command,
        config=dataclasses.asdict(config),
        outputs=outputs,
        verdicts=verdicts,
        duration_seconds=time.perf_counter() - start,
    )
    _write_json(outdir / "report.json", dataclasses.asdict(report))
    return report


# ---------------------------------------------------------------------------
# argument parsing

def _float_list(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peig",
        description="Sharp principal-eigenvalue experiments: p-trig tables, "
                    "curvature reports, model profiles, eigensolves, "
                    "sharpness tubes, drift spectra, and heat-flow "
                    "comparisons.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config document; flags override its "
                             "scalar fields")
    common.add_argument("--outdir", metavar="DIR",
                        help=f"output directory (default: ${OUTDIR_ENV} "
                             "or ./peig-out)")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("ptrig", parents=[common],
                       help="p-trigonometric sample tables and identities")
    q.add_argument("--p-values", type=_float_list)
    q.add_argument("--samples", type=int)
    q.add_argument("--tol-identity", type=float)
    q.add_argument("--tol-half-period", type=float)

    q = sub.add_parser("gamma", parents=[common],
                       help="curvature and integration-by-parts report for "
                            "a diffusion operator")
    q.add_argument("--sigma")
    q.add_argument("--drift")
    q.add_argument("--kind", choices=("interval", "circle"))
    q.add_argument("--lo", type=float)
    q.add_argument("--hi", type=float)
    q.add_argument("--circumference", type=float)
    q.add_argument("--dims", type=_float_list)
    q.add_argument("--resolution", type=int)
    q.add_argument("--tol-sbp", type=float)

    q = sub.add_parser("model", parents=[common],
                       help="model profile and the start-point curve")
    q.add_argument("--p", type=float)
    q.add_argument("--lam", type=float)
    q.add_argument("--n")
    q.add_argument("--a", type=float)
    q.add_argument("--branch", choices=("auto", "zero", "radial"))
    q.add_argument("--samples", type=int)
    q.add_argument("--a-grid", type=_float_list)
    q.add_argument("--tol-closed-form", type=float)

    q = sub.add_parser("eig", parents=[common],
                       help="principal eigenpair of the weighted p-operator")
    q.add_argument("--p", type=float)
    q.add_argument("--kind", choices=("interval", "circle"))
    q.add_argument("--length", type=float)
    q.add_argument("--drift")
    q.add_argument("--K", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--tol-bound", type=float)
    q.add_argument("--tol-residual", type=float)

    q = sub.add_parser("tube", parents=[common],
                       help="sharpness table for circle-factor products")
    q.add_argument("--p", type=float)
    q.add_argument("--dim", type=int)
    q.add_argument("--diameter", type=float)
    q.add_argument("--ratios", type=_float_list)
    q.add_argument("--K", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--tol-closed-mesh", type=float)

    q = sub.add_parser("nonsym", parents=[common],
                       help="drift spectrum and the model eigenvalue bound")
    q.add_argument("--drift",
                   help="expression in x (or s), or 'random' with --seed")
    q.add_argument("--kind", choices=("interval", "circle"))
    q.add_argument("--lo", type=float)
    q.add_argument("--hi", type=float)
    q.add_argument("--circumference", type=float)
    q.add_argument("--K", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--harmonics", type=int)

    q = sub.add_parser("heat", parents=[common],
                       help="drift heat flow with the modulus comparison")
    q.add_argument("--drift")
    q.add_argument("--kind", choices=("interval", "circle"))
    q.add_argument("--lo", type=float)
    q.add_argument("--hi", type=float)
    q.add_argument("--circumference", type=float)
    q.add_argument("--K", type=int)
    q.add_argument("--v0",
                   help="eigenfunction, random (needs --seed), or an "
                        "expression in x")
    q.add_argument("--dt", type=float)
    q.add_argument("--t-end", type=float)
    q.add_argument("--seed", type=int)
    q.add_argument("--snapshots", type=int)
    q.add_argument("--widen", type=float)
    q.add_argument("--tol-decay", type=float)

    sub.add_parser("verify-all", parents=[common],
                   help="run the whole battery with canned configurations")
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, the JSON config document, and flags into one
    validated config; unknown document keys are rejected."""
    cls = _CONFIG_TYPES[args.command]
    field_names = {f.name for f in dataclasses.fields(cls)}
    values = {}
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("the config document must be a JSON object")
        for key, val in doc.items():
            if key not in field_names:
                raise UsageError(f"unknown config key {key!r} for "
                                 f"'{args.command}'")
            if isinstance(val, list):
                val = tuple(val)
            values[key] = val
    for name in field_names:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return cls(**values)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        report = run(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ArgumentError, DomainError, RangeError) as exc:
        print(f"usage error ({args.command}): {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"check precondition failed ({args.command}): {exc}",
              file=sys.stderr)
        return 1
    except (ConvergenceError, IntegrationFailureError, HorizonError,
            NumericalError) as exc:
        print(f"numerical error ({args.command}): {exc}", file=sys.stderr)
        return 3

    for name, ok in report.verdicts.items():
        print(f"[{report.command}] {name}: {'PASS' if ok else 'FAIL'}")
    failed = sum(not ok for ok in report.verdicts.values())
    where = Path(config.outdir or os.environ.get(OUTDIR_ENV) or "peig-out")
    if failed:
        print(f"[{report.command}] {failed} of {len(report.verdicts)} "
              f"checks failed (report: {where / 'report.json'})")
        return 1
    print(f"[{report.command}] all checks passed "
          f"(report: {where / 'report.json'})")
    return 0


if __name__ == "__main__":  # pragma: no cover - console entry
    raise SystemExit(main())

"""Scalar and vector fields on extended space ``(t, x, y, z)`` and the
Madelung quantities built from them.

Two backends share one small interface (``value``, ``gradient``,
``laplacian``):

* :class:`AnalyticField` wraps a parsed expression; derivatives are exact
  (symbolic).
* :class:`GridField` holds uniformly spaced samples stored as time slices.
  Spatial derivatives use second-order central stencils plus one Richardson
  level; off-node values come from cubic-spline interpolation in space and
  linear interpolation in time.

All fields are immutable once built.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import sympy as sp
from scipy.interpolate import NdBSpline, make_interp_spline

from .errors import (
    AllNodal,
    DomainBoundary,
    GridFormatError,
    QuantumPotentialSingular,
    UndefinedPhase,
)
from .expr import COORDS, Expression

log = logging.getLogger(__name__)

NODE_TOL = 1e-10
MIN_DIFF_SAMPLES = 5


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0
    mass: float = 1.0
    charge: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "charge", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be strictly positive")


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box in extended space."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 4 or len(hi) != 4 or any(a > b for a, b in zip(lo, hi)):
            raise ValueError("box needs 4 (lo <= hi) bounds")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unbounded(cls) -> "Box":
        return cls((-np.inf,) * 4, (np.inf,) * 4)

    def contains(self, p, pad: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= np.asarray(self.lo) + pad) and np.all(p <= np.asarray(self.hi) - pad))


def as_point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (4,):
        raise ValueError(f"expected an extended point (t, x, y, z), got shape {p.shape}")
    return p


class ScalarField:
    """Interface shared by all scalar fields."""

    def value(self, p) -> float:
        raise NotImplementedError

    def gradient(self, p) -> np.ndarray:
        """Partial derivatives ``(d/dt, d/dx, d/dy, d/dz)``."""
        raise NotImplementedError

    def laplacian(self, p) -> float:
        """Spatial Laplacian."""
        raise NotImplementedError

    def sample(self, grid: "GridSpec") -> np.ndarray:
        pts = grid.points()
        out = np.array([self.value(p) for p in pts.reshape(-1, 4)])
        return out.reshape(grid.shape)

    def __call__(self, p) -> float:
        return self.value(p)


class AnalyticField(ScalarField):
    """Field given by a closed-form expression in ``t, x, y, z``."""

    def __init__(self, expression):
        if isinstance(expression, Expression):
            self.expr = expression
        elif isinstance(expression, sp.Basic):
            self.expr = Expression.from_sympy(expression)
        else:
            self.expr = Expression.parse(expression)

    def __repr__(self):
        return f"AnalyticField({self.expr.source!r})"

    @property
    def sym(self) -> sp.Expr:
        return self.expr.sym

    @cached_property
    def _grad_func(self):
        return sp.lambdify(COORDS, [sp.diff(self.sym, v) for v in COORDS], modules="numpy")

    @cached_property
    def _lap_func(self):
        lap = sum(sp.diff(self.sym, v, 2) for v in COORDS[1:])
        return sp.lambdify(COORDS, lap, modules="numpy")

    def value(self, p) -> float:
        return float(self.expr.func(*as_point(p)))

    def gradient(self, p) -> np.ndarray:
        return np.array(self._grad_func(*as_point(p)), dtype=float)

    def laplacian(self, p) -> float:
        return float(self._lap_func(*as_point(p)))

    def sample(self, grid: "GridSpec") -> np.ndarray:
        axes = np.meshgrid(*grid.axes(), indexing="ij")
        return np.broadcast_to(np.asarray(self.expr.func(*axes), dtype=float), grid.shape).copy()


def constant_field(value: float) -> AnalyticField:
    return AnalyticField(sp.nsimplify(value) if float(value).is_integer() else sp.Float(value))


class SumField(ScalarField):
    """Linear combination ``sum(c_k * f_k)`` of arbitrary fields."""

    def __init__(self, terms):
        self.terms = [(float(c), f) for c, f in terms]

    def value(self, p) -> float:
        return sum(c * f.value(p) for c, f in self.terms)

    def gradient(self, p) -> np.ndarray:
        return sum(c * f.gradient(p) for c, f in self.terms)

    def laplacian(self, p) -> float:
        return sum(c * f.laplacian(p) for c, f in self.terms)


def combine(terms) -> ScalarField:
    """Linear combination of fields; collapses to one symbolic field when possible."""
    terms = [(c, f) for c, f in terms if c != 0]
    if not terms:
        return constant_field(0)
    if all(isinstance(f, AnalyticField) for _, f in terms):
        return AnalyticField(sum(sp.nsimplify(c) * f.sym for c, f in terms))
    return SumField(terms)


# --------------------------------------------------------------------------
# grid backend


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid layout: origin, spacing and sample count per axis ``(t, x, y, z)``."""

    origin: tuple
    spacing: tuple
    counts: tuple

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        spacing = tuple(float(v) for v in self.spacing)
        counts = tuple(int(v) for v in self.counts)
        if not (len(origin) == len(spacing) == len(counts) == 4):
            raise GridFormatError("grid header needs 4 entries per row (t, x, y, z)")
        if any(not h > 0 for h in spacing):
            raise GridFormatError("grid spacing must be > 0 on every axis")
        if any(n < 1 for n in counts):
            raise GridFormatError("grid counts must be >= 1")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "counts", counts)

    @property
    def shape(self) -> tuple:
        return self.counts

    def axes(self) -> list:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.counts)]

    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    @property
    def box(self) -> Box:
        hi = [o + h * (n - 1) for o, h, n in zip(self.origin, self.spacing, self.counts)]
        return Box(self.origin, hi)


def _first_derivative(f: np.ndarray, axis: int, h: float, richardson: bool) -> np.ndarray:
    n = f.shape[axis]
    if n == 1:
        return np.zeros_like(f)
    out = np.gradient(f, h, axis=axis, edge_order=2)
    if richardson and n >= 5:
        f = np.moveaxis(f, axis, 0)
        o = np.moveaxis(out, axis, 0)
        d_h = (f[3:-1] - f[1:-3]) / (2 * h)
        d_2h = (f[4:] - f[:-4]) / (4 * h)
        o[2:-2] = (4 * d_h - d_2h) / 3
        # fourth-order one-sided rows keep the edges at the Richardson order
        o[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
        o[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
        o[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
        o[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return out


def _second_derivative(f: np.ndarray, axis: int, h: float, richardson: bool) -> np.ndarray:
    n = f.shape[axis]
    if n == 1:
        return np.zeros_like(f)
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    # second-order one-sided closures
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    if richardson and n >= 5:
        d_h = out[2:-2].copy()
        d_2h = (f[4:] - 2 * f[2:-2] + f[:-4]) / (4 * h**2)
        out[2:-2] = (4 * d_h - d_2h) / 3
        out[0] = (35 * f[0] - 104 * f[1] + 114 * f[2] - 56 * f[3] + 11 * f[4]) / (12 * h**2)
        out[1] = (11 * f[0] - 20 * f[1] + 6 * f[2] + 4 * f[3] - f[4]) / (12 * h**2)
        out[-1] = (35 * f[-1] - 104 * f[-2] + 114 * f[-3] - 56 * f[-4] + 11 * f[-5]) / (12 * h**2)
        out[-2] = (11 * f[-1] - 20 * f[-2] + 6 * f[-3] + 4 * f[-4] - f[-5]) / (12 * h**2)
    return np.moveaxis(out, 0, axis)


class GridField(ScalarField):
    """Field sampled on a uniform grid.

    ``samples`` has shape ``(nt, nx, ny, nz)``.  Axes with a single sample are
    treated as constant directions.  Spatial axes that are differentiated need
    at least five samples.
    """

    def __init__(self, grid: GridSpec, samples, richardson: bool = True):
        samples = np.asarray(samples, dtype=float)
        if samples.shape != grid.shape:
            raise GridFormatError(f"samples shape {samples.shape} does not match header {grid.shape}")
        if not np.all(np.isfinite(samples)):
            raise GridFormatError("grid samples must be finite")
        for k in range(1, 4):
            if 1 < grid.counts[k] < MIN_DIFF_SAMPLES:
                raise GridFormatError(
                    f"axis {'txyz'[k]} has {grid.counts[k]} samples; need 1 or >= {MIN_DIFF_SAMPLES}"
                )
        self.grid = grid
        self.samples = samples
        self.samples.setflags(write=False)
        self.richardson = richardson

    @classmethod
    def from_field(cls, f: ScalarField, grid: GridSpec, richardson: bool = True) -> "GridField":
        return cls(grid, f.sample(grid), richardson=richardson)

    def __repr__(self):
        return f"GridField(counts={self.grid.counts})"

    # derived node arrays ---------------------------------------------------
    @cached_property
    def node_gradient(self) -> np.ndarray:
        """Spatial first derivatives on the nodes, shape ``(3, nt, nx, ny, nz)``."""
        return np.stack(
            [_first_derivative(self.samples, k, self.grid.spacing[k], self.richardson) for k in (1, 2, 3)]
        )

    @cached_property
    def node_laplacian(self) -> np.ndarray:
        return sum(_second_derivative(self.samples, k, self.grid.spacing[k], self.richardson) for k in (1, 2, 3))

    @cached_property
    def _coeffs(self):
        return self._spline(self.samples)

    @cached_property
    def _grad_coeffs(self):
        return [self._spline(g) for g in self.node_gradient]

    @cached_property
    def _lap_coeffs(self):
        return self._spline(self.node_laplacian)

    @cached_property
    def _active(self) -> list:
        return [k for k in (1, 2, 3) if self.grid.counts[k] > 1]

    def _spline(self, arr):
        """Per time slice, a not-a-knot tensor cubic spline over the sampled spatial axes."""
        axes = self.grid.axes()
        shape = [self.grid.counts[k] for k in self._active]
        out = []
        for s in arr:
            c = s.reshape(shape)
            if not self._active:
                out.append(float(c))
                continue
            knots = []
            for ax, k in enumerate(self._active):
                spl = make_interp_spline(axes[k], c, k=3, axis=ax)
                knots.append(spl.t)
                c = np.moveaxis(spl.c, 0, ax)
            out.append(NdBSpline(tuple(knots), c, 3))
        return out

    # interpolation ---------------------------------------------------------
    def _locate(self, p):
        p = as_point(p)
        g = self.grid
        idx = (p - np.asarray(g.origin)) / np.asarray(g.spacing)
        tol = 1e-9
        for k in range(4):
            if g.counts[k] == 1:
                idx[k] = 0.0
            elif idx[k] < -tol or idx[k] > g.counts[k] - 1 + tol:
                raise DomainBoundary(f"evaluation outside grid along axis {'txyz'[k]}", p)
        idx = np.clip(idx, 0, np.asarray(g.counts) - 1)
        return p, idx

    def _slice_values(self, coeffs, p, idx):
        nt = len(coeffs)
        k = 0 if nt == 1 else min(int(np.floor(idx[0])), nt - 2)
        lo, hi = self.grid.box.lo, self.grid.box.hi
        xs = np.array([[np.clip(p[a], lo[a], hi[a]) for a in self._active]])
        ev = lambda s: s if isinstance(s, float) else float(s(xs)[0])
        v0 = ev(coeffs[k])
        v1 = v0 if nt == 1 else ev(coeffs[k + 1])
        return v0, v1, idx[0] - k

    def _interp(self, coeffs, p, idx) -> float:
        v0, v1, w = self._slice_values(coeffs, p, idx)
        return float((1 - w) * v0 + w * v1)

    def _time_slope(self, coeffs, p, idx) -> float:
        if len(coeffs) == 1:
            return 0.0
        v0, v1, _ = self._slice_values(coeffs, p, idx)
        return float((v1 - v0) / self.grid.spacing[0])

    def value(self, p) -> float:
        p, idx = self._locate(p)
        return self._interp(self._coeffs, p, idx)

    def gradient(self, p) -> np.ndarray:
        p, idx = self._locate(p)
        out = np.zeros(4)
        out[0] = self._time_slope(self._coeffs, p, idx)
        for k in range(3):
            if self.grid.counts[k + 1] > 1:
                out[k + 1] = self._interp(self._grad_coeffs[k], p, idx)
        return out

    def laplacian(self, p) -> float:
        p, idx = self._locate(p)
        return self._interp(self._lap_coeffs, p, idx)

    def sample(self, grid: GridSpec) -> np.ndarray:
        if grid == self.grid:
            return np.array(self.samples)
        return super().sample(grid)


# --------------------------------------------------------------------------
# vector potential


@dataclass(frozen=True)
class VectorField:
    """Three scalar components; used for the magnetic vector potential."""

    components: tuple

    def __post_init__(self):
        if len(self.components) != 3:
            raise ValueError("a vector field needs exactly 3 components")

    @classmethod
    def zero(cls) -> "VectorField":
        z = constant_field(0)
        return cls((z, z, z))

    @classmethod
    def from_expressions(cls, exprs) -> "VectorField":
        return cls(tuple(AnalyticField(e) for e in exprs))

    def value(self, p) -> np.ndarray:
        return np.array([c.value(p) for c in self.components])

    def jacobian(self, p) -> np.ndarray:
        """``J[i, K] = d A_i / d x^K`` with ``K`` over ``(t, x, y, z)``."""
        return np.array([c.gradient(p) for c in self.components])

    def divergence(self, p) -> float:
        J = self.jacobian(p)
        return float(J[0, 1] + J[1, 2] + J[2, 3])

    def curl(self, p) -> np.ndarray:
        J = self.jacobian(p)
        return np.array([J[2, 2] - J[1, 3], J[0, 3] - J[2, 1], J[1, 1] - J[0, 2]])

    @property
    def is_zero(self) -> bool:
        return all(isinstance(c, AnalyticField) and c.sym == 0 for c in self.components)


def gauge_residual(A: VectorField, point) -> float:
    """Coulomb-gauge residual ``div A`` at ``point``."""
    return A.divergence(point)


# --------------------------------------------------------------------------
# Madelung representation


@dataclass(frozen=True)
class MadelungState:
    """Amplitude ``R >= 0`` and phase action ``S`` of a wave function.

    ``node_tol`` is the absolute amplitude below which a point is nodal and its
    phase is undefined.  Grid states also carry ``phase_defined``, a boolean
    node mask (``False`` marks an undefined phase).
    """

    R: ScalarField
    S: ScalarField
    node_tol: float = NODE_TOL
    phase_defined: np.ndarray | None = field(default=None, compare=False)

    def is_nodal(self, p) -> bool:
        return self.R.value(p) < self.node_tol

    def phase_samples(self) -> np.ndarray:
        """Grid phase with ``nan`` at nodal samples (grid states only)."""
        if not isinstance(self.S, GridField):
            raise TypeError("phase_samples needs a grid-backed state")
        out = np.array(self.S.samples)
        if self.phase_defined is not None:
            out[~self.phase_defined] = np.nan
        return out

    def recompose(self, hbar: float = 1.0) -> np.ndarray:
        if not isinstance(self.R, GridField):
            raise TypeError("recompose needs a grid-backed state")
        return self.R.samples * np.exp(1j * self.S.samples / hbar)


def _unwrap_from_corner(phase: np.ndarray) -> np.ndarray:
    # Each axis is unwrapped on the sub-slab where all earlier axes sit at index
    # 0, last axis first, so every line starts from an already unwrapped sample.
    out = np.array(phase, dtype=float)
    for axis in reversed(range(out.ndim)):
        if out.shape[axis] < 2:
            continue
        sl = tuple(0 if k < axis else slice(None) for k in range(out.ndim))
        out[sl] = np.unwrap(out[sl], axis=0)
    return out


def madelung_decompose(psi, grid: GridSpec, consts: Constants = Constants(),
                       node_tol: float = NODE_TOL, richardson: bool = True) -> MadelungState:
    """Split gridded ``psi`` into ``R = |psi|`` and ``S = hbar * arg(psi)``.

    The phase is unwrapped axis by axis starting from the grid corner.  Samples
    with ``|psi| < node_tol * max|psi|`` are nodal: their phase is marked
    undefined in ``phase_defined``.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != grid.shape:
        raise GridFormatError(f"psi shape {psi.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(psi)):
        raise GridFormatError("psi samples must be finite")
    R = np.abs(psi)
    rmax = R.max()
    if rmax <= np.finfo(float).tiny:
        raise AllNodal("every sample of psi is nodal")
    tol = node_tol * rmax
    defined = R >= tol
    S = consts.hbar * _unwrap_from_corner(np.angle(psi))
    return MadelungState(
        R=GridField(grid, R, richardson=richardson),
        S=GridField(grid, S, richardson=richardson),
        node_tol=tol,
        phase_defined=defined,
    )


class QuantumPotentialField(ScalarField):
    """``V_Q = -(hbar^2 / 2m) * Laplacian(R) / R`` as a field.

    Analytic amplitudes give a symbolic ``V_Q`` (its derivatives are exact);
    grid amplitudes give a grid of node values.  Evaluation at a nodal point
    raises :class:`QuantumPotentialSingular`.
    """

    def __init__(self, state: MadelungState, consts: Constants = Constants()):
        self.state = state
        self.consts = consts
        coef = consts.hbar**2 / (2 * consts.mass)
        R = state.R
        if isinstance(R, AnalyticField):
            lap = sum(sp.diff(R.sym, v, 2) for v in COORDS[1:])
            vq = -sp.nsimplify(coef) * lap / R.sym
            if sp.count_ops(vq) < 200:
                vq = sp.simplify(vq)
            self.inner: ScalarField = AnalyticField(vq)
        elif isinstance(R, GridField):
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = -coef * R.node_laplacian / R.samples
            nodal = R.samples < state.node_tol
            if np.any(nodal):
                # keep the spline finite; nodal points are rejected on evaluation
                vals = np.where(nodal, 0.0, vals)
            self.inner = GridField(R.grid, vals, richardson=R.richardson)
        else:
            raise TypeError(f"unsupported amplitude backend {type(R).__name__}")

    def _check(self, p):
        if self.state.R.value(p) < self.state.node_tol:
            raise QuantumPotentialSingular("amplitude R vanishes (nodal point)", p)

    def value(self, p) -> float:
        self._check(p)
        return self.inner.value(p)

    def gradient(self, p) -> np.ndarray:
        self._check(p)
        return self.inner.gradient(p)

    def laplacian(self, p) -> float:
        self._check(p)
        return self.inner.laplacian(p)

    def sample(self, grid: GridSpec) -> np.ndarray:
        return self.inner.sample(grid)


def quantum_potential(state: MadelungState, consts: Constants, point) -> float:
    """Quantum potential at one point."""
    return QuantumPotentialField(state, consts).value(point)


def velocity_field(state: MadelungState, A: VectorField | None, consts: Constants, point) -> np.ndarray:
    """Bohmian velocity ``(grad S - (e/c) A) / m``."""
    if state.is_nodal(point):
        raise UndefinedPhase("phase S is undefined at a nodal point", point)
    grad_s = state.S.gradient(point)[1:]
    a = np.zeros(3) if A is None else A.value(point)
    return (grad_s - consts.charge / consts.c * a) / consts.mass


def continuity_residual(rho: ScalarField, v: VectorField, region: GridSpec,
                        richardson: bool = False) -> np.ndarray:
    """``|d rho/dt + div(rho v)|`` sampled on the nodes of ``region``.

    Derivatives are finite differences of the sampled density and flux, so the
    residual of an exact solution shrinks with the grid spacing.
    """
    r = rho.sample(region)
    flux = [r * comp.sample(region) for comp in v.components]
    out = np.zeros(region.shape)
    if region.counts[0] > 1:
        if region.counts[0] < 3:
            raise GridFormatError("time derivative needs at least 3 time slices")
        out += np.gradient(r, region.spacing[0], axis=0, edge_order=2)
    for k in range(3):
        n = region.counts[k + 1]
        if n == 1:
            continue
        if n < 3:
            raise GridFormatError(f"axis {'xyz'[k]} needs at least 3 samples")
        out += _first_derivative(flux[k], k + 1, region.spacing[k + 1], richardson and n >= 5)
    return np.abs(out)


# --------------------------------------------------------------------------
# grid files


def save_grid(path, grid: GridSpec, samples) -> None:
    """Write a grid as ``.npz`` (binary) or CSV text, chosen by suffix.

    CSV layout::

        # qhdgeom grid v1
        origin,t0,x0,y0,z0
        spacing,dt,dx,dy,dz
        count,nt,nx,ny,nz
        components,1            (2 for complex samples: real,imag)
        <one sample per line, row-major over (t, x, y, z)>
    """
    path = Path(path)
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise GridFormatError("samples shape does not match grid")
    if path.suffix == ".npz":
        np.savez(path, origin=grid.origin, spacing=grid.spacing, counts=grid.counts, samples=samples)
        return
    is_complex = np.iscomplexobj(samples)
    fmt = lambda v: format(float(v), ".17g")
    lines = [
        "# qhdgeom grid v1",
        "origin," + ",".join(fmt(v) for v in grid.origin),
        "spacing," + ",".join(fmt(v) for v in grid.spacing),
        "count," + ",".join(str(n) for n in grid.counts),
        f"components,{2 if is_complex else 1}",
    ]
    flat = samples.reshape(-1)
    if is_complex:
        lines += [f"{fmt(v.real)},{fmt(v.imag)}" for v in flat]
    else:
        lines += [fmt(v) for v in flat]
    path.write_text("\n".join(lines) + "\n")


def load_grid(path) -> tuple[GridSpec, np.ndarray]:
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as data:
            try:
                grid = GridSpec(tuple(data["origin"]), tuple(data["spacing"]), tuple(data["counts"]))
                samples = np.array(data["samples"])
            except KeyError as exc:
                raise GridFormatError(f"{path}: missing array {exc}") from None
        if samples.shape != grid.shape:
            raise GridFormatError(f"{path}: samples do not match header")
        return grid, samples
    rows = [ln.strip() for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    header = {}
    for ln in rows[:4]:
        key, _, rest = ln.partition(",")
        header[key] = rest.split(",")
    try:
        grid = GridSpec(
            tuple(float(v) for v in header["origin"]),
            tuple(float(v) for v in header["spacing"]),
            tuple(int(v) for v in header["count"]),
        )
        ncomp = int(header["components"][0])
    except (KeyError, ValueError, IndexError) as exc:
        raise GridFormatError(f"{path}: bad header ({exc})") from None
    body = rows[4:]
    if len(body) != int(np.prod(grid.counts)):
        raise GridFormatError(f"{path}: expected {int(np.prod(grid.counts))} samples, found {len(body)}")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body])
    if data.shape[1] != ncomp:
        raise GridFormatError(f"{path}: expected {ncomp} column(s)")
    samples = data[:, 0] + 1j * data[:, 1] if ncomp == 2 else data[:, 0]
    return grid, samples.reshape(grid.shape)

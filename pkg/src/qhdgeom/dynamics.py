"""Geodesic and Newton-Bohm trajectories.

All integrators use fixed-step classical RK4.  Geodesics are stored with
``x = (x^0, x^1, x^2, x^3)`` and ``y = dx/dtau``; Newton trajectories reuse
the same layout with ``param = t``, ``x = (t, r)`` and ``y = (1, v)`` so every
flavor shares one CSV format.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .connection import christoffel_from, kropina_spray_from, riemann_spray
from .errors import (
    DomainBoundary,
    InvalidInitial,
    KropinaSingular,
    MetricNotPositiveDefinite,
    NonMonotoneTime,
    NoOverlap,
    QuantumPotentialSingular,
)
from .fields import as_point
from .geometry import EPS_BETA, check_positive_definite, metric_and_derivatives

STATUSES = ("completed", "hit_node", "left_domain", "beta_singular")


@dataclass
class Trajectory:
    param: np.ndarray
    x: np.ndarray
    y: np.ndarray
    status: str = "completed"
    flavor: str = "kropina"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.param = np.asarray(self.param, dtype=float).reshape(-1)
        self.x = np.asarray(self.x, dtype=float).reshape(-1, 4)
        self.y = np.asarray(self.y, dtype=float).reshape(-1, 4)
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if not (len(self.param) == len(self.x) == len(self.y)):
            raise ValueError("param, x and y must have the same length")

    def __len__(self):
        return len(self.param)

    @property
    def t(self) -> np.ndarray:
        return self.x[:, 0]

    @property
    def r(self) -> np.ndarray:
        return self.x[:, 1:]


# --------------------------------------------------------------------------
# conserved quantities


def finsler_F(field, x, y) -> float:
    a = field.metric(x)
    return float(y @ a @ y / y[0])


def riemann_alpha(field, x, y) -> float:
    a = field.metric(x)
    return float(np.sqrt(y @ a @ y))


def _drift(values) -> float:
    values = np.asarray(values)
    if len(values) == 0:
        return 0.0
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))


# --------------------------------------------------------------------------
# RK4 driver


def _rk4_step(f, u, h):
    k1 = f(u)
    k2 = f(u + 0.5 * h * k1)
    k3 = f(u + 0.5 * h * k2)
    k4 = f(u + h * k3)
    return u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


_STOP = {
    DomainBoundary: "left_domain",
    QuantumPotentialSingular: "hit_node",
    KropinaSingular: "beta_singular",
}


def _run(f, u0, h, n_steps, *, check=None, stop_time=None, p0=0.0):
    """Integrate ``du/dp = f(u)``; returns params, states, status, last error."""
    params = [p0]
    states = [np.array(u0, dtype=float)]
    u = states[0]
    for n in range(1, n_steps + 1):
        if stop_time is not None and u[0] >= stop_time - 1e-12 * max(1.0, abs(stop_time)):
            break
        try:
            u = _rk4_step(f, u, h)
            if not np.all(np.isfinite(u)):
                raise KropinaSingular("state became non-finite", u[:4])
            if check is not None:
                check(u)
        except tuple(_STOP) as exc:
            status = next(v for k, v in _STOP.items() if isinstance(exc, k))
            return np.array(params), np.array(states), status, exc
        params.append(p0 + n * h)
        states.append(u)
    return np.array(params), np.array(states), "completed", None


def _prepare_geodesic(field, x0, y0, normalize):
    x0 = as_point(x0)
    y0 = as_point(y0)
    if not y0[0] > EPS_BETA * np.linalg.norm(y0):
        raise InvalidInitial(f"initial y^0 = {y0[0]:.3g} must be positive", x0)
    domain = getattr(field, "domain", None)
    if domain is not None and not domain.contains(x0):
        raise InvalidInitial("initial point lies outside the domain", x0)
    try:
        a = check_positive_definite(field.metric(x0), x0)
    except (MetricNotPositiveDefinite, QuantumPotentialSingular, DomainBoundary) as exc:
        raise InvalidInitial(f"initial point is not admissible ({type(exc).__name__})", x0) from exc
    if normalize is None:
        pass
    elif normalize == "F":
        y0 = y0 / (y0 @ a @ y0 / y0[0])
    elif normalize == "alpha":
        y0 = y0 / np.sqrt(y0 @ a @ y0)
    else:
        raise ValueError(f"unknown normalization {normalize!r}")
    return x0, y0


def _geodesic(field, x0, y0, h, n_steps, spray, flavor, conserved, normalize, stop_time):
    x0, y0 = _prepare_geodesic(field, x0, y0, normalize)

    def f(u):
        x, y = u[:4], u[4:]
        a, d = metric_and_derivatives(field, x)
        check_positive_definite(a, x)
        return np.concatenate([y, -2.0 * spray(a, christoffel_from(a, d), y)])

    def check(u):
        if not u[4] > EPS_BETA * np.linalg.norm(u[4:]):
            raise KropinaSingular("y^0 left the forward cone", u[:4])

    params, states, status, exc = _run(f, np.concatenate([x0, y0]), h, n_steps,
                                       check=check, stop_time=stop_time)
    xs, ys = states[:, :4], states[:, 4:]
    q = [conserved(field, x, y) for x, y in zip(xs, ys)]
    info = {
        "step": h,
        "n_steps": len(params) - 1,
        "normalize": normalize,
        "conserved": "F" if conserved is finsler_F else "alpha",
        "drift": _drift(q),
    }
    if exc is not None:
        info["stop_reason"] = str(exc)
    return Trajectory(params, xs, ys, status=status, flavor=flavor, info=info)


def integrate_finsler_geodesic(field, x0, y0, h: float, n_steps: int, *,
                               normalize: str | None = None, stop_time: float | None = None) -> Trajectory:
    """Kropina geodesic ``x'' + 2 G(x, x') = 0``.

    ``field`` is any metric field (a :class:`~qhdgeom.scenario.Scenario` or a
    :class:`~qhdgeom.geometry.MatrixField`).  ``normalize`` may be ``"F"`` or
    ``"alpha"`` to rescale ``y0`` to unit length first.  ``stop_time`` ends the
    run once ``x^0`` reaches it.
    """
    return _geodesic(field, x0, y0, h, n_steps, kropina_spray_from, "kropina",
                     finsler_F, normalize, stop_time)


def integrate_riemann_geodesic(field, x0, y0, h: float, n_steps: int, *,
                               normalize: str | None = None, stop_time: float | None = None) -> Trajectory:
    """Geodesic of the associated metric ``a``; conserves ``alpha(x, x')``."""
    return _geodesic(field, x0, y0, h, n_steps, lambda a, g, y: riemann_spray(g, y), "riemann",
                     riemann_alpha, normalize, stop_time)


def integrate_newton(scenario, t0: float, r0, v0, h: float, n_steps: int, *,
                     stop_time: float | None = None) -> Trajectory:
    """``M r'' = e E + (e/c) v x B - grad(V + V_Q)`` with RK4 in physical time."""
    r0 = np.asarray(r0, dtype=float).reshape(3)
    v0 = np.asarray(v0, dtype=float).reshape(3)
    x0 = np.concatenate([[t0], r0])
    scenario.check_domain(x0)

    def f(u):
        return np.concatenate([[1.0], u[4:], scenario.acceleration(u[0], u[1:4], u[4:])])

    u0 = np.concatenate([x0, v0])
    params, states, status, exc = _run(f, u0, h, n_steps, stop_time=stop_time, p0=t0)
    xs = states[:, :4]
    ys = np.concatenate([np.ones((len(states), 1)), states[:, 4:]], axis=1)
    info = {"step": h, "n_steps": len(params) - 1}
    if exc is not None:
        info["stop_reason"] = str(exc)
    # the integrator carries t as a state; pin it to the exact parameter grid
    xs[:, 0] = params
    return Trajectory(params, xs, ys, status=status, flavor="newton", info=info)


# --------------------------------------------------------------------------
# physical-time comparison


@dataclass
class TimePath:
    """Spatial path ``r(t)`` with velocity ``v(t)`` and a C1 interpolant."""

    t: np.ndarray
    r: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self._spline = CubicHermiteSpline(self.t, self.r, self.v, axis=0)

    def __call__(self, t) -> np.ndarray:
        return self._spline(t)

    def velocity(self, t) -> np.ndarray:
        return self._spline.derivative()(t)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])


def reparametrize_by_time(traj: Trajectory) -> TimePath:
    """Re-express a trajectory with ``t = x^0`` as the parameter.

    ``v = (dx^i/dtau) / (dx^0/dtau)``; the interpolant is the cubic Hermite
    spline through ``(t, r, v)``.
    """
    y0 = traj.y[:, 0]
    if len(traj) < 2:
        raise NonMonotoneTime("need at least two samples to reparametrize")
    bad = np.flatnonzero(~(y0 > 0))
    if bad.size:
        raise NonMonotoneTime("dx^0/dtau <= 0 along the trajectory", traj.x[bad[0]])
    t = traj.x[:, 0]
    if not np.all(np.diff(t) > 0):
        k = int(np.flatnonzero(~(np.diff(t) > 0))[0])
        raise NonMonotoneTime("x^0 is not strictly increasing", traj.x[k + 1])
    return TimePath(t.copy(), traj.x[:, 1:].copy(), traj.y[:, 1:] / y0[:, None])


def trajectory_deviation(path_a: TimePath, path_b: TimePath, window=None) -> float:
    """Max over the shared time window of ``|r_A(t) - r_B(t)|``.

    Both paths are evaluated on the union of their sample times inside the
    window.
    """
    lo = max(path_a.t[0], path_b.t[0])
    hi = min(path_a.t[-1], path_b.t[-1])
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    if not hi > lo:
        raise NoOverlap(f"time windows do not overlap (lo={lo:.6g}, hi={hi:.6g})")
    grid = np.union1d(path_a.t, path_b.t)
    grid = np.concatenate([[lo], grid[(grid > lo) & (grid < hi)], [hi]])
    diff = path_a(grid) - path_b(grid)
    return float(np.max(np.linalg.norm(diff, axis=1)))


def observed_order(run, h: float) -> float:
    """RK4 convergence order from end states at steps ``h``, ``h/2``, ``h/4``.

    ``run(h)`` must return the final state at a fixed parameter value.
    """
    u1, u2, u3 = (np.asarray(run(s)) for s in (h, h / 2, h / 4))
    return float(np.log2(np.max(np.abs(u1 - u2)) / np.max(np.abs(u2 - u3))))

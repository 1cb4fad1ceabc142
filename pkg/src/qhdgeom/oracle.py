"""Brute-force verifiers.

Nothing here reuses the closed forms it is meant to check: Hessians and sprays
come from finite differences of ``F^2`` itself, and the Euler-Lagrange residual
is computed straight from the time-dependent Lagrangian
``L = (1/2) m_ij v^i v^j + (e/c) A_i v^i - (e phi + V + V_Q)``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainBoundary, KropinaSingular
from .fields import Box, as_point

GAP_FLOOR = 1e-30
PROBE_REL_STEP = 1e-4


@dataclass
class OracleReport:
    quantity: str
    analytic: object
    oracle: object
    gap: float
    steps: list = field(default_factory=list)
    passed: bool | None = None
    tolerance: float | None = None
    point: list | None = None

    @classmethod
    def compare(cls, quantity, analytic, oracle, *, steps=(), tolerance=None, point=None) -> "OracleReport":
        gap = relative_gap(analytic, oracle)
        return cls(
            quantity=quantity,
            analytic=np.asarray(analytic).tolist(),
            oracle=np.asarray(oracle).tolist(),
            gap=gap,
            steps=[float(s) for s in steps],
            passed=None if tolerance is None else bool(gap < tolerance),
            tolerance=tolerance,
            point=None if point is None else [float(v) for v in np.ravel(point)],
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def relative_gap(analytic, oracle, floor: float = GAP_FLOOR) -> float:
    """``max|analytic - oracle| / max(max|analytic|, floor)`` (max norms for arrays)."""
    a = np.asarray(analytic, dtype=float)
    o = np.asarray(oracle, dtype=float)
    return float(np.max(np.abs(a - o)) / max(float(np.max(np.abs(a))), floor))


def _probe_step(y) -> float:
    # power of two keeps y +- h exactly representable for short-mantissa y
    h = PROBE_REL_STEP * float(np.linalg.norm(y))
    return float(2.0 ** np.round(np.log2(h)))


def _hessian(f, y, h) -> np.ndarray:
    """Central second differences of a vectorised ``f`` at ``y`` with step ``h``.

    Evaluated in extended precision: at the fixed relative step the stencil
    cancellation would otherwise leave ~1e-6 roundoff.  Returns ``longdouble``.
    """
    y = np.asarray(y, dtype=np.longdouble)
    h = np.longdouble(h)
    n = y.size
    E = np.eye(n, dtype=np.longdouble) * h
    pts = [y]
    for i in range(n):
        pts += [y + E[i], y - E[i]]
    for i in range(n):
        for j in range(i + 1, n):
            pts += [y + E[i] + E[j], y + E[i] - E[j], y - E[i] + E[j], y - E[i] - E[j]]
    vals = f(np.array(pts))
    f0 = vals[0]
    H = np.empty((n, n), dtype=np.longdouble)
    k = 1
    for i in range(n):
        H[i, i] = (vals[k] - 2 * f0 + vals[k + 1]) / h**2
        k += 2
    for i in range(n):
        for j in range(i + 1, n):
            pp, pm, mp, mm = vals[k:k + 4]
            H[i, j] = H[j, i] = (pp - pm - mp + mm) / (4 * h**2)
            k += 4
    return H


def _half_F2(a):
    a = np.asarray(a, dtype=np.longdouble)

    def f(Y):
        Y = np.atleast_2d(Y)
        F = np.einsum("ni,ij,nj->n", Y, a, Y) / Y[:, 0]
        return 0.5 * F**2
    return f


def fd_hessian_F2(geom, sample, *, quadratic: bool = False) -> np.ndarray:
    """``(1/2) d^2 F^2 / dy^I dy^J`` by central differences plus one Richardson level.

    With ``quadratic=True`` the probed function is the Riemannian
    ``alpha^2 / 2`` instead of the Kropina ``F^2 / 2`` (test hook: its Hessian
    is ``a`` itself).
    """
    x, y = sample.x, sample.y
    a = geom.metric(x)
    h = _probe_step(y)
    if quadratic:
        al = np.asarray(a, dtype=np.longdouble)
        f = lambda Y: 0.5 * np.einsum("ni,ij,nj->n", np.atleast_2d(Y), al, np.atleast_2d(Y))
    else:
        if not y[0] - 3 * h > 0:
            raise KropinaSingular("Hessian probes would cross beta <= 0", x)
        f = _half_F2(a)
    H_h = _hessian(f, y, h)
    H_h2 = _hessian(f, y, h / 2)
    return ((4 * H_h2 - H_h) / 3).astype(float)


def fd_spray(field, x, y, *, rel_step: float = 1e-3, length: float = 1.0) -> np.ndarray:
    """Finsler spray from ``F`` alone:

    ``G^I = (1/4) g^IJ (d^2 F^2/dx^K dy^J y^K - dF^2/dx^J)``

    with every derivative taken by central differences (Richardson in ``x``).
    """
    x = as_point(x)
    y = as_point(y)

    def F2(xp, Y):
        a = field.metric(xp)
        Y = np.atleast_2d(Y)
        return (np.einsum("ni,ij,nj->n", Y, a, Y) / Y[:, 0]) ** 2

    # nested differences amplify roundoff, so both steps are longer than the
    # Hessian probe; Richardson keeps truncation below 1e-7
    hy = 8 * _probe_step(y)
    if not y[0] - 3 * hy > 0:
        raise KropinaSingular("spray probes would cross beta <= 0", x)
    hx = rel_step * length
    a0 = field.metric(x)
    g = ((4 * _hessian(_half_F2(a0), y, hy / 2) - _hessian(_half_F2(a0), y, hy)) / 3).astype(float)

    def grad_y(xp):
        # central first derivative of F^2 in y, Richardson-extrapolated
        E = np.eye(4)
        pts = np.concatenate([y + hy * E, y - hy * E, y + 2 * hy * E, y - 2 * hy * E])
        v = F2(xp, pts).reshape(4, 4)
        d1 = (v[0] - v[1]) / (2 * hy)
        d2 = (v[2] - v[3]) / (4 * hy)
        return (4 * d1 - d2) / 3

    dF2_dx = np.empty(4)
    mixed = np.empty((4, 4))  # mixed[K, J] = d^2 F^2 / dx^K dy^J
    for k in range(4):
        e = np.zeros(4)
        e[k] = hx
        f_p, f_m = F2(x + e, y)[0], F2(x - e, y)[0]
        f_p2, f_m2 = F2(x + 2 * e, y)[0], F2(x - 2 * e, y)[0]
        dF2_dx[k] = (4 * (f_p - f_m) / (2 * hx) - (f_p2 - f_m2) / (4 * hx)) / 3
        g_p, g_m = grad_y(x + e), grad_y(x - e)
        g_p2, g_m2 = grad_y(x + 2 * e), grad_y(x - 2 * e)
        mixed[k] = (4 * (g_p - g_m) / (2 * hx) - (g_p2 - g_m2) / (4 * hx)) / 3
    rhs = mixed.T @ y - dF2_dx
    return 0.25 * np.linalg.solve(g, rhs)


def euler_lagrange_residual(scenario, path) -> np.ndarray:
    """``d/dt dL/dv - dL/dx`` along a time-parametrised path, shape ``(n, 3)``.

    The acceleration comes from differentiating a cubic spline through the
    sampled velocities, so the check is independent of any spray.
    """
    e, c = scenario.consts.charge, scenario.consts.c
    M = scenario.mass_matrix
    t, r, v = path.t, path.r, path.v
    acc = CubicSpline(t, v, axis=0).derivative()(t)
    out = np.empty_like(r)
    U = scenario.potential_energy
    for n in range(len(t)):
        x = np.concatenate([[t[n]], r[n]])
        dU = U.gradient(x)[1:]
        J = scenario.A.jacobian(x)
        dA_dt, Js = J[:, 0], J[:, 1:]
        out[n] = M @ acc[n] + e / c * (dA_dt + Js @ v[n] - Js.T @ v[n]) + dU
    return out


@dataclass
class DirectionalDerivative:
    value: object
    observed_order: float
    estimates: list
    steps: list


def fd_directional(f, x, direction, h: float | None = None, *, domain: Box | None = None) -> DirectionalDerivative:
    """Directional derivative of ``f`` (scalar or array valued).

    Central differences at ``h, h/2, h/4`` are combined by two Richardson
    levels.  ``observed_order`` is ``log2`` of the ratio of successive
    differences of the raw estimates; it is ``nan`` when those differences are
    at roundoff level (the stencil is exact for the function).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(direction, dtype=float)
    if h is None:
        h = 1e-2 * max(1.0, float(np.max(np.abs(x))))
    if domain is not None:
        for s in (h, -h):
            if not domain.contains(x + s * u):
                raise DomainBoundary("derivative stencil leaves the domain", x)
    steps = [h, h / 2, h / 4]
    est = [(np.asarray(f(x + s * u), dtype=float) - np.asarray(f(x - s * u), dtype=float)) / (2 * s) for s in steps]
    r1 = [(4 * est[1] - est[0]) / 3, (4 * est[2] - est[1]) / 3]
    value = (16 * r1[1] - r1[0]) / 15
    d1 = float(np.max(np.abs(est[0] - est[1])))
    d2 = float(np.max(np.abs(est[1] - est[2])))
    scale = max(float(np.max(np.abs(est[2]))), 1.0)
    noise = 1e3 * np.finfo(float).eps * scale
    order = float(np.log2(d1 / d2)) if d1 > noise and d2 > noise else float("nan")
    value = float(value) if np.ndim(value) == 0 else value
    return DirectionalDerivative(value=value, observed_order=order,
                                 estimates=[np.asarray(e).tolist() for e in est], steps=steps)

"""Zermelo navigation data ``(h, W)`` of the Kropina structure.

``e^kappa = 4 / a^00``, ``h = e^kappa a`` and ``W^I = a^I0 / 2``; ``W`` is
``h``-unit and ``F(y) = |y|_h^2 / (2 h(y, W))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConformalSignError, WindNotUnit, WindSingular
from .fields import as_point
from .geometry import B_LOW, check_beta, check_positive_definite

UNIT_TOL = 1e-10
INVERSE_UNIT_TOL = 1e-8
TOL_KILLING = 1e-8
WIND_FLOOR = 1e-14


@dataclass(frozen=True)
class NavigationData:
    x: np.ndarray
    kappa: float
    h: np.ndarray
    W: np.ndarray

    @property
    def conformal_factor(self) -> float:
        return float(np.exp(self.kappa))

    @property
    def W_lower(self) -> np.ndarray:
        return self.h @ self.W

    @property
    def wind_norm(self) -> float:
        return float(np.sqrt(self.W @ self.h @ self.W))

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "kappa": self.kappa,
            "h": self.h.reshape(-1).tolist(),
            "W": self.W.tolist(),
        }


def navigation_from_matrix(a, x=None) -> NavigationData:
    a = np.asarray(a, dtype=float)
    x = np.zeros(4) if x is None else as_point(x)
    inv = np.linalg.inv(a)
    b2 = inv[0, 0]
    # sign first: a^00 <= 0 already rules out positivity, but the conformal
    # factor is the quantity the user has to fix by regauging
    if not 4.0 / b2 > 0:
        raise ConformalSignError(f"e^kappa = 4/a^00 = {4.0 / b2:.6g} is not positive", x)
    check_positive_definite(a, x)
    ek = 4.0 / b2
    h = ek * a
    W = 0.5 * inv[:, 0]
    nav = NavigationData(x=x, kappa=float(np.log(ek)), h=h, W=W)
    if abs(nav.wind_norm - 1.0) >= UNIT_TOL:
        raise AssertionError(f"|W|_h = {nav.wind_norm!r} is not 1")
    return nav


def navigation_data(field, x) -> NavigationData:
    x = as_point(x)
    return navigation_from_matrix(field.metric(x), x)


def inverse_navigation(h, W, tol: float = INVERSE_UNIT_TOL):
    """Recover ``(a, b, kappa)`` from ``(h, W)``.

    ``e^kappa b^2 = 4`` holds for every ``kappa`` once ``|W|_h = 1``, so the
    scale is fixed by the normalisation ``b_0 = 1``: ``e^kappa = 2 W_0``.
    """
    h = np.asarray(h, dtype=float)
    W = np.asarray(W, dtype=float)
    norm2 = float(W @ h @ W)
    if abs(np.sqrt(max(norm2, 0.0)) - 1.0) > tol:
        raise WindNotUnit(f"|W|_h = {np.sqrt(max(norm2, 0.0)):.12g}, expected 1")
    W_low = h @ W
    ek = 2.0 * W_low[0]
    if not ek > 0:
        raise ConformalSignError(f"recovered e^kappa = {ek:.6g} is not positive")
    a = h / ek
    b = 2.0 * W_low / ek
    return a, b, float(np.log(ek))


def zermelo_diagnostics(a, nav: NavigationData, y) -> dict:
    y = np.asarray(y, dtype=float)
    check_beta(y, nav.x)
    F = float(y @ a @ y / y[0])
    u = y / F - nav.W
    indicatrix = abs(float(np.sqrt(u @ nav.h @ u)) - 1.0)
    solved = float(y @ nav.h @ y) / (2.0 * float(y @ nav.h @ nav.W))
    return {
        "F": F,
        "indicatrix_residual": indicatrix,
        "solved_form_gap": abs(F - solved) / abs(F),
    }


def zermelo_condition_residual(geom, nav: NavigationData, y) -> float:
    """``| |y/F - W|_h - 1 |``, maxed with the relative gap to the solved form."""
    d = zermelo_diagnostics(geom.metric(nav.x), nav, y)
    return max(d["indicatrix_residual"], d["solved_form_gap"])


# --------------------------------------------------------------------------
# the quantum wind in terms of potentials


def _wind_inputs(scenario, x):
    x = as_point(x)
    e, c = scenario.consts.charge, scenario.consts.c
    U, A = scenario._potentials(scenario.check_domain(x), derivs=False)
    return x, e, c, float(U), np.asarray(A, dtype=float)


def quantum_wind(scenario, x) -> np.ndarray:
    """``W = (-1, (e/c) M^-1 A) / ((e^2/c^2) A.M^-1.A + 2(e phi + V + V_Q))``.

    For ``M = m I`` this is ``(-1, (e/mc) A) / ((e^2/mc^2)|A|^2 + 2(e phi + V + V_Q))``.
    """
    x, e, c, U, A = _wind_inputs(scenario, x)
    MiA = np.linalg.solve(scenario.mass_matrix, A)
    denom = (e / c) ** 2 * float(A @ MiA) + 2.0 * U
    scale = max(abs(2.0 * U), (e / c) ** 2 * float(A @ MiA), 1.0)
    if abs(denom) <= WIND_FLOOR * scale:
        raise WindSingular("wind denominator vanishes", x)
    return np.concatenate([[-1.0], (e / c) * MiA]) / denom


def quantum_wind_magnetic_limit(scenario, x) -> np.ndarray:
    """``(-m c^2 / (e^2 |A|^2), (c/e) A / |A|^2)`` for ``(e^2/mc^2)|A|^2 >> 2U``."""
    x, e, c, _, A = _wind_inputs(scenario, x)
    m = scenario.consts.mass
    A2 = float(A @ A)
    if A2 == 0:
        raise WindSingular("vector potential vanishes", x)
    return np.concatenate([[-m * c**2 / (e**2 * A2)], (c / e) * A / A2])


def quantum_wind_quantum_limit(scenario, x) -> np.ndarray:
    """``(m/hbar^2) (R / lap R, 0, 0, 0)`` when ``|V_Q|`` dominates."""
    x = as_point(x)
    if scenario.state is None:
        raise ValueError("the quantum limit needs the amplitude R")
    lap = scenario.state.R.laplacian(x)
    if lap == 0:
        raise WindSingular("lap R vanishes", x)
    k = scenario.consts.mass / scenario.consts.hbar**2
    return np.array([k * scenario.state.R.value(x) / lap, 0.0, 0.0, 0.0])


# --------------------------------------------------------------------------
# Killing condition


@dataclass
class KillingReport:
    is_killing: bool
    max_time_gradient: float
    max_space_gradient: np.ndarray
    tol: float

    def to_dict(self) -> dict:
        return {
            "is_killing": self.is_killing,
            "max_time_gradient": self.max_time_gradient,
            "max_space_gradient": self.max_space_gradient.tolist(),
            "tol": self.tol,
        }


def killing_check(Q, points, tol: float = TOL_KILLING) -> KillingReport:
    """The wind is Killing iff ``Q`` is constant: ``dQ/dt = 0`` and ``dQ/dx^j = 0``.

    ``Q`` is a scalar field, or a neutral scenario (its ``potential_energy`` is used).
    """
    if hasattr(Q, "potential_energy"):
        if not Q.is_neutral:
            raise ValueError("the Killing criterion applies to neutral scenarios")
        Q = Q.potential_energy
    grads = np.array([Q.gradient(as_point(p)) for p in points]).reshape(-1, 4)
    if len(grads) == 0:
        raise ValueError("no sample points")
    mx = np.max(np.abs(grads), axis=0)
    return KillingReport(
        is_killing=bool(mx[0] < tol and np.all(mx[1:] < tol)),
        max_time_gradient=float(mx[0]),
        max_space_gradient=mx[1:],
        tol=tol,
    )


__all__ = [
    "B_LOW",
    "NavigationData",
    "navigation_data",
    "navigation_from_matrix",
    "inverse_navigation",
    "zermelo_condition_residual",
    "zermelo_diagnostics",
    "quantum_wind",
    "quantum_wind_magnetic_limit",
    "quantum_wind_quantum_limit",
    "KillingReport",
    "killing_check",
]

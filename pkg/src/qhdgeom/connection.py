"""Levi-Civita connection of the associated metric and the geodesic sprays.

Christoffel tables are ``(4, 4, 4)`` arrays indexed ``G[I, J, K]`` for
``Gamma^I_JK``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import as_point
from .geometry import B_LOW, check_beta, check_positive_definite, metric_and_derivatives

S_TOL = 1e-10


def christoffel_from(a, d) -> np.ndarray:
    """``Gamma^I_JK = (1/2) a^IL (d_J a_KL + d_K a_JL - d_L a_JK)``.

    ``d[K, I, J] = d a_IJ / d x^K``.
    """
    d = 0.5 * (d + d.transpose(0, 2, 1))
    # low[L, J, K] = d_J a_KL + d_K a_JL - d_L a_JK
    low = d.transpose(2, 0, 1) + d.transpose(2, 1, 0) - d
    inv = np.linalg.inv(a)
    gamma = 0.5 * np.einsum("il,ljk->ijk", inv, low)
    return 0.5 * (gamma + gamma.transpose(0, 2, 1))


def christoffel(field, x) -> np.ndarray:
    x = as_point(x)
    a, d = metric_and_derivatives(field, x)
    check_positive_definite(a, x)
    return christoffel_from(a, d)


@dataclass
class EMCrossCheck:
    """Closed-form Christoffel table next to the numeric one."""

    table: np.ndarray
    numeric: np.ndarray
    deviation: np.ndarray
    sign: int
    max_deviation_by_sign: dict

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviation))


def _em_closed_form(a, d, e_over_c, A, dA, sign):
    inv = np.linalg.inv(a)
    J = dA[:, 1:]  # J[i, j] = d A_i / d x^j
    D = J + J.T
    F = sign * field_strength(J)
    da00 = d[:, 0, 0]
    k = e_over_c / 4
    G = np.zeros((4, 4, 4))
    G[0, 0, 0] = 0.5 * (inv[0, 0] * da00[0] - inv[0, 1:] @ da00[1:])
    G[1:, 0, 0] = 0.5 * (inv[1:, 0] * da00[0] - inv[1:, 1:] @ da00[1:])
    G[0, 1:, 0] = G[0, 0, 1:] = 0.5 * inv[0, 0] * da00[1:] + k * (inv[0, 1:] @ F)
    Gi_j0 = 0.5 * np.outer(inv[1:, 0], da00[1:]) + k * inv[1:, 1:] @ F
    G[1:, 1:, 0] = Gi_j0
    G[1:, 0, 1:] = Gi_j0
    # spatial a_ij are constant here, so the spatial Levi-Civita symbols vanish
    G[0, 1:, 1:] = inv[0, 0] * k * D
    # printed with a^00; Levi-Civita gives a^i0 here
    G[1:, 1:, 1:] = k * inv[1:, 0][:, None, None] * D[None, :, :]
    return G


def field_strength(J) -> np.ndarray:
    """``F_ij = d_i A_j - d_j A_i`` from ``J[i, j] = d A_i / d x^j``."""
    return J.T - J


def christoffel_analytic_em(scenario, x) -> EMCrossCheck:
    """Evaluate the published electromagnetic Christoffel formulas.

    Uses ``D_ij = d_i A_j + d_j A_i`` and substitutes ``sign * F_ij`` for the
    field strength, trying both signs; the reported table is the sign closest
    to :func:`christoffel`.  The in-text definition
    ``dA_i/dx^j - dA_j/dx^i`` corresponds to ``sign = -1``.  Requires a
    constant mass matrix.
    """
    x = as_point(x)
    a, d = metric_and_derivatives(scenario, x)
    check_positive_definite(a, x)
    numeric = christoffel_from(a, d)
    e_over_c = scenario.consts.charge / scenario.consts.c
    A = scenario.A.value(x)
    dA = scenario.A.jacobian(x)
    tables = {s: _em_closed_form(a, d, e_over_c, A, dA, s) for s in (+1, -1)}
    devs = {s: float(np.max(np.abs(t - numeric))) for s, t in tables.items()}
    best = min(devs, key=lambda s: (devs[s], -s))
    return EMCrossCheck(
        table=tables[best],
        numeric=numeric,
        deviation=np.abs(tables[best] - numeric),
        sign=best,
        max_deviation_by_sign=devs,
    )


def beta_quantities(field, x, gamma=None) -> tuple[np.ndarray, np.ndarray]:
    """``r_IJ`` and ``s_IJ`` of ``b = (1, 0, 0, 0)``.

    ``b_I|J = -Gamma^0_IJ``; ``s`` must vanish because ``b`` is closed.
    """
    if gamma is None:
        gamma = christoffel(field, x)
    cov = -gamma[0]
    r = 0.5 * (cov + cov.T)
    s = 0.5 * (cov - cov.T)
    if np.max(np.abs(s)) >= S_TOL:
        raise AssertionError(f"s_IJ should vanish, max |s| = {np.max(np.abs(s)):.3g}")
    return r, s


def riemann_spray(gamma, y) -> np.ndarray:
    """``G^I = (1/2) Gamma^I_JK y^J y^K``."""
    y = np.asarray(y, dtype=float)
    return 0.5 * np.einsum("ijk,j,k->i", gamma, y, y)


def kropina_spray_from(a, gamma, y) -> np.ndarray:
    """Spray of ``F = alpha^2 / beta`` for the closed one-form ``b = (1, 0, 0, 0)``.

    General form with the ``s`` terms kept::

        G = Gbar - alpha^2/(2 beta) s^I_0
              - beta/(b^2 alpha^2) (alpha^2/beta s_0 + r_00) y
              + 1/(2 b^2) (alpha^2/beta s_0 + r_00) b^I
    """
    y = np.asarray(y, dtype=float)
    check_beta(y)
    inv = np.linalg.inv(a)
    b_up = inv[:, 0]
    b2 = inv[0, 0]
    cov = -gamma[0]
    r = 0.5 * (cov + cov.T)
    s = 0.5 * (cov - cov.T)
    alpha2 = float(y @ a @ y)
    beta = float(B_LOW @ y)
    r00 = float(y @ r @ y)
    s0 = float(b_up @ s @ y)
    s_up0 = inv @ s @ y
    bracket = alpha2 / beta * s0 + r00
    return (
        riemann_spray(gamma, y)
        - alpha2 / (2 * beta) * s_up0
        - beta / (b2 * alpha2) * bracket * y
        + bracket / (2 * b2) * b_up
    )


def kropina_spray(field, x, y) -> np.ndarray:
    x = as_point(x)
    check_beta(y, x)
    a, d = metric_and_derivatives(field, x)
    check_positive_definite(a, x)
    return kropina_spray_from(a, christoffel_from(a, d), y)


def kropina_spray_components(a, gamma, y) -> np.ndarray:
    """Component forms as printed for ``s = 0``.

    ``G^0 = Gbar^0 + (beta y^0/(b^2 alpha^2) - 1/(2 b^2)) Gamma^0_JK y^J y^K`` and
    ``G^i = Gbar^i + beta y^i/(b^2 alpha^2) Gamma^0_JK y^J y^K``.  These drop the
    ``b^I`` term of the general formula (``b^0 / (2 b^2) = 1/2`` and
    ``b^i = a^i0``), so they agree with :func:`kropina_spray_from` only when
    ``b^2 = 1`` and ``a^i0 = 0``.
    """
    y = np.asarray(y, dtype=float)
    inv = np.linalg.inv(a)
    b2 = inv[0, 0]
    alpha2 = float(y @ a @ y)
    beta = y[0]
    g0yy = float(y @ gamma[0] @ y)
    G = riemann_spray(gamma, y)
    G[0] += (beta * y[0] / (b2 * alpha2) - 1 / (2 * b2)) * g0yy
    G[1:] += beta * y[1:] / (b2 * alpha2) * g0yy
    return G

"""Associated Riemannian metric and the Kropina structure ``F = alpha^2 / beta``.

The one-form is fixed to ``b = (1, 0, 0, 0)`` so ``beta(y) = y^0``.  Functions
suffixed ``_at`` work on a bare metric matrix; the others take a
:class:`KropinaGeometry` and a :class:`TangentSample`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainBoundary, KropinaSingular, MetricNotPositiveDefinite
from .fields import Box, as_point

EPS_BETA = 1e-9
B_LOW = np.array([1.0, 0.0, 0.0, 0.0])


# --------------------------------------------------------------------------
# metric fields


class MatrixField:
    """Metric field from a callable ``x -> 4x4``.

    Without ``dfunc`` the derivatives are central differences with one
    Richardson level, step ``rel_step * length``.
    """

    def __init__(self, func, dfunc=None, *, domain: Box | None = None,
                 rel_step: float = 1e-4, length: float = 1.0):
        self.func = func
        self.dfunc = dfunc
        self.domain = Box.unbounded() if domain is None else domain
        self.step = rel_step * length

    def metric(self, x) -> np.ndarray:
        x = as_point(x)
        if not self.domain.contains(x):
            raise DomainBoundary("point outside the metric domain", x)
        return np.array(self.func(x), dtype=float)

    def metric_derivatives(self, x) -> np.ndarray:
        x = as_point(x)
        if self.dfunc is not None:
            return np.array(self.dfunc(x), dtype=float)
        h = self.step
        d = np.empty((4, 4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = 1.0
            if not (self.domain.contains(x + 2 * h * e) and self.domain.contains(x - 2 * h * e)):
                raise DomainBoundary("derivative stencil leaves the domain", x)
            d_h = (self.metric(x + h * e) - self.metric(x - h * e)) / (2 * h)
            d_2h = (self.metric(x + 2 * h * e) - self.metric(x - 2 * h * e)) / (4 * h)
            d[k] = (4 * d_h - d_2h) / 3
        return d

    def metric_and_derivatives(self, x):
        return self.metric(x), self.metric_derivatives(x)


class ConstantMetric(MatrixField):
    def __init__(self, a):
        a = np.array(a, dtype=float)
        if a.shape != (4, 4):
            raise ValueError("metric must be 4x4")
        self.a = a
        super().__init__(lambda x: a, lambda x: np.zeros((4, 4, 4)))


def metric_and_derivatives(field, x):
    if hasattr(field, "metric_and_derivatives"):
        return field.metric_and_derivatives(x)
    return field.metric(x), field.metric_derivatives(x)


# --------------------------------------------------------------------------
# positivity and inversion


def check_positive_definite(a, point=None) -> np.ndarray:
    """Return ``a`` if it is symmetric positive definite.

    Raises :class:`MetricNotPositiveDefinite` naming the first leading
    principal minor that is not positive.
    """
    a = np.asarray(a, dtype=float)
    try:
        np.linalg.cholesky(a)
        return a
    except np.linalg.LinAlgError:
        pass
    minor = next((k for k in range(1, a.shape[0] + 1) if not np.linalg.det(a[:k, :k]) > 0), a.shape[0])
    raise MetricNotPositiveDefinite("associated metric is not positive definite", point, minor=minor)


def assemble_associated_metric(scenario, x) -> np.ndarray:
    """``a_IJ(x)``: ``a_00 = -(e phi + V + V_Q)``, ``a_0i = (e/2c) A_i``, ``a_ij = m_ij / 2``."""
    x = as_point(x)
    return check_positive_definite(scenario.metric(x), x)


def inverse_metric(a, point=None) -> tuple[np.ndarray, float]:
    """Inverse ``a^IJ`` and ``b^2 = a^00`` (the squared alpha-norm of ``beta``)."""
    a = check_positive_definite(a, point)
    inv = np.linalg.inv(a)
    inv = 0.5 * (inv + inv.T)
    return inv, float(inv[0, 0])


# --------------------------------------------------------------------------
# Kropina structure


@dataclass(frozen=True)
class TangentSample:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_point(self.x))
        object.__setattr__(self, "y", as_point(self.y))


class KropinaGeometry:
    """The pair ``(a_IJ, b_I = (1, 0, 0, 0))`` over a metric field."""

    b = B_LOW

    def __init__(self, field):
        self.field = field

    @classmethod
    def from_matrix(cls, a) -> "KropinaGeometry":
        return cls(ConstantMetric(a))

    def metric(self, x) -> np.ndarray:
        x = as_point(x)
        return check_positive_definite(self.field.metric(x), x)


def check_beta(y, point=None) -> None:
    y = np.asarray(y, dtype=float)
    if not y[0] > EPS_BETA * np.linalg.norm(y):
        raise KropinaSingular(f"beta = y^0 = {y[0]:.3g} is not positive (forward time required)", point)


def kropina_F_at(a, y) -> float:
    y = np.asarray(y, dtype=float)
    check_beta(y)
    return float(y @ a @ y / y[0])


def fundamental_tensor_at(a, y) -> np.ndarray:
    """Closed form of ``(1/2) d^2 F^2 / dy dy`` for ``F = alpha^2 / y^0``."""
    y = np.asarray(y, dtype=float)
    check_beta(y)
    ay = a @ y
    alpha2 = float(y @ ay)
    beta = y[0]
    # rho = alpha/beta, alpha_I = (a y)_I / alpha; powers of alpha folded in
    r2 = alpha2 / beta**2
    b = B_LOW
    g = (
        2 * r2 * a
        + 3 * r2**2 * np.outer(b, b)
        - 4 * (alpha2 / beta**3) * (np.outer(b, ay) + np.outer(ay, b))
        + 4 / beta**2 * np.outer(ay, ay)
    )
    return 0.5 * (g + g.T)


def det_identity_terms(a, y) -> dict:
    """Both sides of the determinant identity for ``g``.

    ``published`` is ``24 (alpha/beta)^8 (1 + d^2) det a`` with
    ``d^2 = (3/2) a^IJ u_I u_J``; ``corrected`` is ``8 (alpha/beta)^8 (1 + d^2) det a``
    with ``d^2 = a^IJ u_I u_J``, where ``u_I = alpha_I - (alpha/beta) b_I``.
    """
    y = np.asarray(y, dtype=float)
    check_beta(y)
    inv = np.linalg.inv(a)
    alpha = float(np.sqrt(y @ a @ y))
    ratio = alpha / y[0]
    u = a @ y / alpha - ratio * B_LOW
    q = float(u @ inv @ u)
    det_a = float(np.linalg.det(a))
    return {
        "det_g": float(np.linalg.det(fundamental_tensor_at(a, y))),
        "published": 24 * ratio**8 * (1 + 1.5 * q) * det_a,
        "corrected": 8 * ratio**8 * (1 + q) * det_a,
    }


def kropina_F(geom: KropinaGeometry, sample: TangentSample) -> float:
    """``F(x, y) = a_IJ y^I y^J / y^0``."""
    check_beta(sample.y, sample.x)
    return kropina_F_at(geom.metric(sample.x), sample.y)


def fundamental_tensor(geom: KropinaGeometry, sample: TangentSample) -> np.ndarray:
    check_beta(sample.y, sample.x)
    return fundamental_tensor_at(geom.metric(sample.x), sample.y)


def det_identity_gap(geom: KropinaGeometry, sample: TangentSample, form: str = "published") -> float:
    """Relative gap ``|det g - RHS| / |det g|`` of the determinant identity.

    ``form="published"`` uses the constant 24 and ``d^2`` coefficient 3/2 as
    printed; these do not hold (at ``a = I``, ``y = e_0`` the right side is 24
    while ``det g = 8``).  ``form="corrected"`` uses 8 and coefficient 1, which
    equals the exact ``8 b^2 (alpha/beta)^10 det a``.
    """
    if form not in ("published", "corrected"):
        raise ValueError(f"unknown form {form!r}")
    check_beta(sample.y, sample.x)
    terms = det_identity_terms(geom.metric(sample.x), sample.y)
    return abs(terms["det_g"] - terms[form]) / abs(terms["det_g"])


# --------------------------------------------------------------------------
# component formulas kept as cross-checks


def fundamental_tensor_components(a, y) -> np.ndarray:
    """Expanded component formulas for general ``a`` (charged particle).

    ``g_00 = a_00^2 + 4 (a_0i y^i) T / (y^0)^3 + 3 T^2 / (y^0)^4`` with
    ``T = a_ij y^i y^j``, and the matching ``g_0i``, ``g_ij`` expressions.
    """
    y = np.asarray(y, dtype=float)
    check_beta(y)
    y0, ys = y[0], y[1:]
    a00, a0, aS = a[0, 0], a[0, 1:], a[1:, 1:]
    T = float(ys @ aS @ ys)
    aSy = aS @ ys
    a0y = float(a0 @ ys)
    g = np.empty((4, 4))
    g[0, 0] = a00**2 + 4 * a0y * T / y0**3 + 3 * T**2 / y0**4
    g[0, 1:] = g[1:, 0] = 2 * a0 * (a00 - T / y0**2) - 4 * aSy / y0**2 * (T / y0 + a0y)
    g[1:, 1:] = (
        4 * np.outer(a0, a0)
        + 4 * np.outer(aSy, aSy) / y0**2
        + 4 * (np.outer(aSy, a0) + np.outer(a0, aSy)) / y0
        + 2 * (T / y0**2 + 2 * a0y / y0 + a00) * aS
    )
    return g


def fundamental_tensor_neutral(Q: float, m: float, y) -> np.ndarray:
    """Neutral particle (``a = diag(-Q, m/2, m/2, m/2)``) component forms."""
    y = np.asarray(y, dtype=float)
    check_beta(y)
    y0, ys = y[0], y[1:]
    T = 0.5 * m * float(ys @ ys)
    g = np.empty((4, 4))
    g[0, 0] = Q**2 + 3 * T**2 / y0**4
    g[0, 1:] = g[1:, 0] = -2 * m * ys * T / y0**3
    g[1:, 1:] = m * np.eye(3) * (-Q + T / y0**2) + m**2 * np.outer(ys, ys) / y0**2
    return g

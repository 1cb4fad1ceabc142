"""Immutable physical scenario: potentials, wave-function data and constants.

A :class:`Scenario` is also a *metric field*: it provides the associated
Riemannian metric ``a_IJ(x)`` on extended space and its partial derivatives,
which is all the geometry, connection and zermelo modules need.
"""

from __future__ import annotations

import logging
from functools import cached_property

import numpy as np
import sympy as sp

from .errors import DomainBoundary, QuantumPotentialSingular
from .expr import COORDS
from .fields import (
    AnalyticField,
    Box,
    Constants,
    MadelungState,
    QuantumPotentialField,
    ScalarField,
    VectorField,
    as_point,
    combine,
    constant_field,
)

log = logging.getLogger(__name__)

TOL_GAUGE = 1e-8


def _as_field(f) -> ScalarField:
    if f is None:
        return constant_field(0)
    if isinstance(f, ScalarField):
        return f
    return AnalyticField(f)


class Scenario:
    """Description of one quantum-hydrodynamic setting.

    Parameters
    ----------
    V, phi : scalar fields (or expression strings) for the external and
        electric potentials.
    A : vector potential; ``None`` means no magnetic field.
    state : Madelung amplitude/phase; ``V_Q`` is derived from it.
    VQ : direct quantum-potential field, used instead of ``state``.
    mass_matrix : constant symmetric positive definite 3x3 matrix; defaults
        to ``mass * I``.
    """

    def __init__(self, V=None, phi=None, A: VectorField | None = None, *,
                 state: MadelungState | None = None, VQ=None,
                 consts: Constants = Constants(), mass_matrix=None,
                 domain: Box | None = None, name: str = "scenario"):
        if (state is None) == (VQ is None):
            raise ValueError("give exactly one of state (R, S) or a direct VQ field")
        self.name = name
        self.consts = consts
        self.V = _as_field(V)
        self.phi = _as_field(phi)
        self.A = VectorField.zero() if A is None else A
        self.state = state
        self.VQ = QuantumPotentialField(state, consts) if state is not None else _as_field(VQ)
        mm = consts.mass * np.eye(3) if mass_matrix is None else np.array(mass_matrix, dtype=float)
        if mm.shape != (3, 3) or not np.allclose(mm, mm.T, rtol=0, atol=1e-14):
            raise ValueError("mass matrix must be a symmetric 3x3 matrix")
        try:
            np.linalg.cholesky(mm)
        except np.linalg.LinAlgError:
            raise ValueError("mass matrix must be positive definite") from None
        self.mass_matrix = 0.5 * (mm + mm.T)
        self.mass_matrix.setflags(write=False)
        self.domain = Box.unbounded() if domain is None else domain

    def __repr__(self):
        return f"Scenario({self.name!r})"

    # potentials -------------------------------------------------------------
    @property
    def is_neutral(self) -> bool:
        """No electromagnetic coupling (``phi == 0`` and ``A == 0``)."""
        return (isinstance(self.phi, AnalyticField) and self.phi.sym == 0) and self.A.is_zero

    @cached_property
    def potential_energy(self) -> ScalarField:
        """``U = e*phi + V + V_Q``; equals ``Q`` for a neutral particle."""
        return combine([(self.consts.charge, self.phi), (1.0, self.V), (1.0, self.VQ)])

    def check_domain(self, x) -> np.ndarray:
        x = as_point(x)
        if not self.domain.contains(x):
            raise DomainBoundary("point outside the scenario domain", x)
        return x

    def check_gauge(self, points, tol: float = TOL_GAUGE) -> float:
        """Largest ``|div A|`` over ``points``; warns above ``tol``."""
        worst = max((abs(self.A.divergence(p)) for p in points), default=0.0)
        if worst > tol:
            log.warning("vector potential violates the Coulomb gauge: max |div A| = %.3g", worst)
        return worst

    # fast path for fully analytic scenarios ---------------------------------
    @cached_property
    def _compiled(self):
        inner_vq = self.VQ.inner if isinstance(self.VQ, QuantumPotentialField) else self.VQ
        fields = [self.phi, self.V, inner_vq, *self.A.components]
        if not all(isinstance(f, AnalyticField) for f in fields):
            return None
        e = sp.nsimplify(self.consts.charge)
        u = e * self.phi.sym + self.V.sym + inner_vq.sym
        comps = [u] + [f.sym for f in self.A.components]
        exprs = list(comps) + [sp.diff(c, v) for c in comps for v in COORDS]
        return sp.lambdify(COORDS, exprs, modules="numpy")

    def _check_nodal(self, x):
        if self.state is not None and self.state.R.value(x) < self.state.node_tol:
            raise QuantumPotentialSingular("amplitude R vanishes (nodal point)", x)

    def _potentials(self, x, derivs: bool):
        """``(U, A)`` and optionally ``(dU, dA)`` at ``x``."""
        func = self._compiled
        if func is not None:
            self._check_nodal(x)
            vals = np.array(func(*x), dtype=float)
            U, A = vals[0], vals[1:4]
            if not derivs:
                return U, A
            d = vals[4:].reshape(4, 4)
            return U, A, d[0], d[1:]
        U = self.potential_energy.value(x)
        A = self.A.value(x)
        if not derivs:
            return U, A
        return U, A, self.potential_energy.gradient(x), self.A.jacobian(x)

    # metric field interface -------------------------------------------------
    def metric(self, x) -> np.ndarray:
        """Associated metric ``a_IJ(x)`` (no positivity check)."""
        x = self.check_domain(x)
        U, A = self._potentials(x, derivs=False)
        return self._assemble(U, A)

    def _assemble(self, U, A):
        k = self.consts.charge / (2 * self.consts.c)
        a = np.empty((4, 4))
        a[0, 0] = -U
        a[0, 1:] = a[1:, 0] = k * A
        a[1:, 1:] = 0.5 * self.mass_matrix
        return a

    def metric_derivatives(self, x) -> np.ndarray:
        """``d[K, I, J] = d a_IJ / d x^K``."""
        x = self.check_domain(x)
        _, _, dU, dA = self._potentials(x, derivs=True)
        k = self.consts.charge / (2 * self.consts.c)
        d = np.zeros((4, 4, 4))
        d[:, 0, 0] = -dU
        d[:, 0, 1:] = k * dA.T
        d[:, 1:, 0] = k * dA.T
        return d

    def metric_and_derivatives(self, x):
        x = self.check_domain(x)
        U, A, dU, dA = self._potentials(x, derivs=True)
        k = self.consts.charge / (2 * self.consts.c)
        d = np.zeros((4, 4, 4))
        d[:, 0, 0] = -dU
        d[:, 0, 1:] = k * dA.T
        d[:, 1:, 0] = k * dA.T
        return self._assemble(U, A), d

    # forces for the Newton form -------------------------------------------
    def acceleration(self, t: float, r, v) -> np.ndarray:
        """``M^-1 [e E + (e/c) v x B - grad(V + V_Q)]``."""
        x = self.check_domain(np.concatenate([[t], r]))
        e, c = self.consts.charge, self.consts.c
        # dU = e grad(phi) + grad(V + V_Q), so -dU already holds the electrostatic force
        _, _, dU, J = self._potentials(x, derivs=True)
        dA_dt = J[:, 0]
        B = np.array([J[2, 2] - J[1, 3], J[0, 3] - J[2, 1], J[1, 1] - J[0, 2]])
        force = -dU[1:] - e / c * dA_dt + e / c * np.cross(v, B)
        return np.linalg.solve(self.mass_matrix, force)

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_spd, random_tangent
from qhdgeom import (
    Constants,
    KropinaGeometry,
    Scenario,
    TangentSample,
    VectorField,
    assemble_associated_metric,
    det_identity_gap,
    fundamental_tensor,
    inverse_metric,
    kropina_F,
)
from qhdgeom.errors import KropinaSingular, MetricNotPositiveDefinite, QuantumPotentialSingular
from qhdgeom.fields import AnalyticField, MadelungState
from qhdgeom.geometry import (
    check_positive_definite,
    det_identity_terms,
    fundamental_tensor_at,
    fundamental_tensor_components,
    fundamental_tensor_neutral,
    kropina_F_at,
)
from qhdgeom.oracle import fd_hessian_F2, relative_gap

I4 = np.eye(4)
ORIGIN = np.zeros(4)


def geom(a):
    return KropinaGeometry.from_matrix(a)


# associated metric -------------------------------------------------------------

def test_neutral_unit_metric(constant_q):
    np.testing.assert_array_equal(assemble_associated_metric(constant_q, [0, 1, 2, 3]), I4)


@pytest.mark.parametrize("m, Q", [(2.0, -1.0), (1.0, -0.3), (3.5, -2.0)])
def test_neutral_determinant(m, Q):
    sc = Scenario(V=str(Q), VQ="0", consts=Constants(mass=m))
    a = assemble_associated_metric(sc, ORIGIN)
    assert np.linalg.det(a) == pytest.approx(-m**3 * Q / 8, rel=1e-13)


def test_charged_determinant():
    e, c, m = 1.5, 2.0, 1.2
    sc = Scenario(V="-3 + 0.1*x", phi="0.2*y", A=VectorField.from_expressions(["0.3", "-0.4*z", "0.5"]),
                  VQ="0.1", consts=Constants(mass=m, charge=e, c=c))
    p = np.array([0.0, 0.3, -0.2, 0.7])
    a = assemble_associated_metric(sc, p)
    A = sc.A.value(p)
    U = e * 0.2 * p[2] + (-3 + 0.1 * p[1]) + 0.1
    expected = -(m**3 / 8) * (e**2 / (2 * m * c**2) * (A @ A) + U)
    assert np.linalg.det(a) == pytest.approx(expected, rel=1e-12)
    assert np.array_equal(a, a.T)


def test_metric_not_positive_definite_names_minor():
    sc = Scenario(V="0.5", VQ="0")
    with pytest.raises(MetricNotPositiveDefinite) as info:
        assemble_associated_metric(sc, ORIGIN)
    assert info.value.minor == 1
    assert info.value.point == (0.0, 0.0, 0.0, 0.0)


def test_metric_minor_from_vector_potential():
    # a_00 > 0 but the 2x2 minor fails: a_00 * m/2 < (e A_1 / 2c)^2
    sc = Scenario(V="-0.1", VQ="0", A=VectorField.from_expressions(["2", "0", "0"]))
    with pytest.raises(MetricNotPositiveDefinite) as info:
        assemble_associated_metric(sc, ORIGIN)
    assert info.value.minor == 2


def test_nodal_point_propagates():
    sc = Scenario(V="-1", state=MadelungState(AnalyticField("x^2"), AnalyticField("0")))
    with pytest.raises(QuantumPotentialSingular):
        assemble_associated_metric(sc, ORIGIN)


# Kropina function -----------------------------------------------------------------

@pytest.mark.parametrize("y, F", [((1, 2, 0, 0), 5.0), ((2, 4, 0, 0), 10.0), ((1, 0, 0, 0), 1.0)])
def test_kropina_F_examples(y, F):
    assert kropina_F(geom(I4), TangentSample(ORIGIN, y)) == F


@pytest.mark.parametrize("y0", [0.0, -1.0, 1e-12])
def test_kropina_singular(y0):
    with pytest.raises(KropinaSingular):
        kropina_F(geom(I4), TangentSample(ORIGIN, (y0, 1, 0, 0)))


# fundamental tensor ---------------------------------------------------------------

def test_fundamental_tensor_identity_metric():
    s = TangentSample(ORIGIN, (1, 0, 0, 0))
    g = fundamental_tensor(geom(I4), s)
    np.testing.assert_allclose(g, np.diag([1.0, 2, 2, 2]), atol=1e-15)
    assert s.y @ g @ s.y == pytest.approx(1.0)
    np.testing.assert_allclose(fd_hessian_F2(geom(I4), s), np.diag([1.0, 2, 2, 2]), atol=1e-7)


def test_zero_homogeneity_example():
    y = np.array([1.0, 0.3, -0.4, 0.8])
    np.testing.assert_allclose(fundamental_tensor_at(I4, 2 * y), fundamental_tensor_at(I4, y), rtol=1e-14)


def test_hessian_oracle_random(rng):
    for _ in range(200):
        a = random_spd(rng)
        y = random_tangent(rng)
        s = TangentSample(ORIGIN, y)
        assert relative_gap(fundamental_tensor(geom(a), s), fd_hessian_F2(geom(a), s)) < 1e-6


def test_expanded_components_match_closed_form(rng):
    for _ in range(100):
        a = random_spd(rng)
        y = random_tangent(rng)
        assert relative_gap(fundamental_tensor_at(a, y), fundamental_tensor_components(a, y)) < 1e-12


@given(st.floats(-3.0, -0.1), st.floats(0.5, 4.0),
       arrays(float, 3, elements=st.floats(-3, 3)), st.floats(0.2, 3.0))
def test_neutral_components_match_closed_form(Q, m, ys, y0):
    a = np.diag([-Q, m / 2, m / 2, m / 2])
    y = np.concatenate([[y0], ys])
    assert relative_gap(fundamental_tensor_at(a, y), fundamental_tensor_neutral(Q, m, y)) < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_g_positive_definite_when_a_is(seed):
    rng = np.random.default_rng(seed)
    a = random_spd(rng)
    y = random_tangent(rng, y0_min=0.01)
    check_positive_definite(a)
    np.linalg.cholesky(fundamental_tensor_at(a, y))


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 2.0, 7.0]))
def test_homogeneity_and_euler(seed, lam):
    rng = np.random.default_rng(seed)
    a = random_spd(rng)
    y = random_tangent(rng)
    F = kropina_F_at(a, y)
    g = fundamental_tensor_at(a, y)
    assert abs(kropina_F_at(a, lam * y) - lam * F) <= 1e-10 * lam * F
    assert relative_gap(g, fundamental_tensor_at(a, lam * y)) < 1e-10
    assert abs(y @ g @ y - F**2) <= 1e-10 * F**2


# determinant identity -------------------------------------------------------------

@pytest.mark.xfail(strict=True, reason="printed constant 24 and d^2 coefficient 3/2 do not hold; "
                                       "see det_identity_gap docstring and the decisions ledger")
def test_det_identity_published_example():
    assert det_identity_gap(geom(I4), TangentSample(ORIGIN, (1, 0, 0, 0))) < 1e-12


def test_det_identity_published_gap_value():
    # det g = 8 while 24 (alpha/beta)^8 (1 + d^2) det a = 24
    assert det_identity_gap(geom(I4), TangentSample(ORIGIN, (1, 0, 0, 0))) == pytest.approx(2.0, abs=1e-14)


def test_det_identity_corrected_example():
    t = det_identity_terms(I4, (1, 0, 0, 0))
    assert t["det_g"] == pytest.approx(8.0, abs=1e-13)
    assert det_identity_gap(geom(I4), TangentSample(ORIGIN, (1, 0, 0, 0)), form="corrected") < 1e-12


def test_det_identity_corrected_random(rng):
    for _ in range(300):
        a = random_spd(rng)
        y = random_tangent(rng)
        s = TangentSample(ORIGIN, y)
        assert det_identity_gap(geom(a), s, form="corrected") < 1e-8
        # left side from the Hessian oracle as well
        det_fd = np.linalg.det(fd_hessian_F2(geom(a), s))
        assert abs(det_fd - det_identity_terms(a, y)["corrected"]) / abs(det_fd) < 1e-5


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 2.0, 7.0]))
def test_det_identity_gap_scale_invariant(seed, lam):
    rng = np.random.default_rng(seed)
    a = random_spd(rng)
    y = random_tangent(rng)
    for form in ("published", "corrected"):
        g1 = det_identity_gap(geom(a), TangentSample(ORIGIN, y), form=form)
        g2 = det_identity_gap(geom(a), TangentSample(ORIGIN, lam * y), form=form)
        assert g2 == pytest.approx(g1, rel=1e-8, abs=1e-12)


def test_det_identity_unknown_form():
    with pytest.raises(ValueError):
        det_identity_gap(geom(I4), TangentSample(ORIGIN, (1, 0, 0, 0)), form="other")


# inverse metric -------------------------------------------------------------------

def test_inverse_no_em(constant_q):
    inv, b2 = inverse_metric(constant_q.metric(ORIGIN))
    np.testing.assert_allclose(inv, I4, atol=1e-15)
    assert b2 == 1.0


def test_inverse_no_em_formula():
    m, Q = 3.0, -0.7
    sc = Scenario(V=str(Q), VQ="0", consts=Constants(mass=m))
    inv, b2 = inverse_metric(sc.metric(ORIGIN))
    expected = -1 / Q * np.diag([1, -2 / m * Q, -2 / m * Q, -2 / m * Q])
    np.testing.assert_allclose(inv, expected, rtol=1e-14)


@pytest.mark.parametrize("a, b2", [(np.diag([2.0, 1, 1, 1]), 0.5), (I4, 1.0)])
def test_b_squared(a, b2):
    assert inverse_metric(a)[1] == pytest.approx(b2, rel=1e-15)


def test_inverse_random(rng):
    for _ in range(100):
        a = random_spd(rng)
        inv, b2 = inverse_metric(a)
        np.testing.assert_allclose(inv @ a, I4, atol=1e-12)
        assert b2 > 0


def test_inverse_rejects_indefinite():
    with pytest.raises(MetricNotPositiveDefinite):
        inverse_metric(np.diag([1.0, -1, 1, 1]))

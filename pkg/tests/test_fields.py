import numpy as np
import pytest
from hypothesis import given, strategies as st

from qhdgeom import (
    Constants,
    GridField,
    GridSpec,
    MadelungState,
    VectorField,
    continuity_residual,
    gauge_residual,
    load_grid,
    madelung_decompose,
    quantum_potential,
    save_grid,
    velocity_field,
)
from qhdgeom.errors import (
    AllNodal,
    DomainBoundary,
    GridFormatError,
    QuantumPotentialSingular,
    UndefinedPhase,
)
from qhdgeom.fields import AnalyticField, QuantumPotentialField

ONE = Constants()


def line_grid(n=41, h=0.1, x0=-2.0):
    return GridSpec((0, x0, 0, 0), (1, h, 1, 1), (1, n, 1, 1))


def cube_grid(n=9, h=0.25):
    o = -(n - 1) * h / 2
    return GridSpec((0, o, o, o), (1, h, h, h), (1, n, n, n))


# madelung_decompose ---------------------------------------------------------

def test_constant_phase_state():
    g = cube_grid(5)
    st_ = madelung_decompose(np.full(g.shape, (1 + 1j) / np.sqrt(2)), g)
    np.testing.assert_allclose(st_.R.samples, 1.0, atol=1e-15)
    np.testing.assert_allclose(st_.S.samples, np.pi / 4, atol=1e-15)


def test_unit_wavefunction():
    g = cube_grid(5)
    st_ = madelung_decompose(np.ones(g.shape, dtype=complex), g)
    assert np.all(st_.R.samples == 1.0) and np.all(st_.S.samples == 0.0)


def test_node_is_flagged():
    g = line_grid(11)
    psi = np.ones(g.shape, dtype=complex)
    psi[0, 5, 0, 0] = 0.0
    st_ = madelung_decompose(psi, g)
    assert not st_.phase_defined[0, 5, 0, 0]
    assert st_.phase_defined.sum() == 10
    assert np.isnan(st_.phase_samples()[0, 5, 0, 0])


def test_all_nodal():
    g = line_grid(11)
    with pytest.raises(AllNodal):
        madelung_decompose(np.zeros(g.shape, dtype=complex), g)


def test_non_finite_psi_rejected():
    g = line_grid(11)
    psi = np.ones(g.shape, dtype=complex)
    psi[0, 3, 0, 0] = np.nan
    with pytest.raises(GridFormatError):
        madelung_decompose(psi, g)


def test_phase_is_unwrapped_along_axes():
    g = cube_grid(9, 0.5)
    pts = g.points()
    k = np.array([3.0, -2.0, 2.5])
    phase = pts[..., 1:] @ k
    st_ = madelung_decompose(np.exp(1j * phase), g)
    S = st_.S.samples
    # unwrapped phase equals the true one up to a single 2*pi*n offset
    off = S - phase
    np.testing.assert_allclose(off, off.flat[0], atol=1e-12)
    assert abs(off.flat[0] / (2 * np.pi) - round(off.flat[0] / (2 * np.pi))) < 1e-12


@given(st.floats(0.1, 3.0), st.floats(-3, 3))
def test_recompose_round_trip(amp, k):
    g = line_grid(21)
    x = g.points()[..., 1]
    psi = amp * np.exp(-x**2) * np.exp(1j * k * x)
    st_ = madelung_decompose(psi, g, ONE)
    np.testing.assert_allclose(st_.recompose(), psi, rtol=1e-12, atol=1e-14)


# quantum potential ------------------------------------------------------------

def test_constant_amplitude_has_no_quantum_potential():
    s = MadelungState(AnalyticField("3"), AnalyticField("0"))
    assert quantum_potential(s, ONE, [0, 0.4, 1, 2]) == 0.0


def test_gaussian_quantum_potential_at_origin():
    s = MadelungState(AnalyticField("exp(-(x^2 + y^2 + z^2)/2)"), AnalyticField("0"))
    assert quantum_potential(s, ONE, [0, 0, 0, 0]) == pytest.approx(1.5, abs=1e-14)


@pytest.mark.parametrize("x", np.linspace(-4, 4, 17))
def test_harmonic_ground_state_total_potential(x):
    s = MadelungState(AnalyticField("exp(-0.5*x^2)"), AnalyticField("0"))
    V = AnalyticField("0.5*x^2")
    p = [0, x, 0.3, -0.2]
    assert abs(V.value(p) + quantum_potential(s, ONE, p) - 0.5) < 1e-8


def test_stationary_eigenstate_has_no_force():
    # 3D isotropic first excited state along x: R = x exp(-r^2/2) has a node at x = 0
    s = MadelungState(AnalyticField("x*exp(-(x^2+y^2+z^2)/2)"), AnalyticField("0"))
    total = QuantumPotentialField(s, ONE)
    V = AnalyticField("(x^2+y^2+z^2)/2")
    for p in ([0, 0.7, 0.2, -0.4], [1.3, 1.1, 0.5, 0.9], [0.2, 0.01, -2.0, 0.3]):
        grad = V.gradient(p) + total.gradient(p)
        assert np.max(np.abs(grad)) < 1e-12
    with pytest.raises(QuantumPotentialSingular):
        total.value([0, 0.0, 0.3, 0.1])


def test_quantum_potential_scales_with_constants():
    s = MadelungState(AnalyticField("exp(-(x^2 + y^2 + z^2)/2)"), AnalyticField("0"))
    c = Constants(hbar=2.0, mass=1.0)
    assert quantum_potential(s, c, [0, 0, 0, 0]) == pytest.approx(6.0, abs=1e-13)


def _grid_vq_error(h, richardson):
    n = int(round(8 / h)) + 1
    g = line_grid(n, h, -4.0)
    x = g.points()[..., 1]
    st_ = madelung_decompose(np.exp(-0.5 * x**2).astype(complex), g, richardson=richardson)
    vq = QuantumPotentialField(st_, ONE)
    p = [0, 0.5, 0, 0]
    return abs(vq.value(p) - (0.5 - 0.5 * 0.5**2))


def test_grid_quantum_potential_converges_second_order():
    e1, e2 = _grid_vq_error(0.1, False), _grid_vq_error(0.05, False)
    assert 3.5 < e1 / e2 < 4.5


def test_grid_quantum_potential_richardson_fourth_order():
    e1, e2 = _grid_vq_error(0.2, True), _grid_vq_error(0.1, True)
    assert 12 < e1 / e2 < 20
    assert e2 < 1e-4


def test_grid_quantum_potential_rejects_nodes():
    g = line_grid(41, 0.1, -2.0)
    x = g.points()[..., 1]
    st_ = madelung_decompose((x * np.exp(-x**2)).astype(complex), g)
    with pytest.raises(QuantumPotentialSingular):
        QuantumPotentialField(st_, ONE).value([0, 0.0, 0, 0])


# velocity field -----------------------------------------------------------------

def test_plane_wave_velocity():
    s = MadelungState(AnalyticField("1"), AnalyticField("0.5*x - 2*z"))
    v = velocity_field(s, None, Constants(mass=2.0), [0, 1, 2, 3])
    np.testing.assert_allclose(v, [0.25, 0, -1.0])


def test_constant_phase_is_at_rest():
    s = MadelungState(AnalyticField("1"), AnalyticField("7"))
    assert np.all(velocity_field(s, None, ONE, [0, 1, 2, 3]) == 0)


def test_vector_potential_cancels_plane_wave():
    c = Constants(charge=2.0, c=3.0)
    s = MadelungState(AnalyticField("1"), AnalyticField("0.4*x + 0.1*y"))
    A = VectorField.from_expressions([str(0.4 * 3 / 2), str(0.1 * 3 / 2), "0"])
    np.testing.assert_allclose(velocity_field(s, A, c, [0, 0.3, 0.1, 0]), 0, atol=1e-15)


def test_velocity_undefined_at_node():
    s = MadelungState(AnalyticField("x"), AnalyticField("y"))
    with pytest.raises(UndefinedPhase):
        velocity_field(s, None, ONE, [0, 0, 1, 1])


# continuity ---------------------------------------------------------------------

def test_continuity_uniform_flow():
    g = GridSpec((0, 0, 0, 0), (0.1, 0.1, 0.1, 0.1), (5, 6, 6, 6))
    v = VectorField.from_expressions(["1", "2", "-1"])
    assert np.max(continuity_residual(AnalyticField("1"), v, g)) < 1e-13


def test_continuity_linear_density():
    g = GridSpec((0, 0, 0, 0), (1, 0.1, 1, 1), (1, 8, 1, 1))
    res = continuity_residual(AnalyticField("1 + x"), VectorField.from_expressions(["1", "0", "0"]), g)
    np.testing.assert_allclose(res, 1.0, atol=1e-12)


def _packet_residual(h):
    rho = AnalyticField("exp(-x^2/(1+t^2))/sqrt(1+t^2)")
    v = VectorField.from_expressions(["x*t/(1+t^2)", "0", "0"])
    n = int(round(4 / h)) + 1
    g = GridSpec((0.2, -2, 0, 0), (h, h, 1, 1), (n, n, 1, 1))
    return float(np.max(continuity_residual(rho, v, g)))


def test_continuity_free_packet_converges():
    e1, e2 = _packet_residual(0.1), _packet_residual(0.05)
    assert 3.0 < e1 / e2 < 5.0


# gauge ----------------------------------------------------------------------------

@pytest.mark.parametrize("comps, expected", [
    (["-y/2", "x/2", "0"], 0.0),
    (["x", "0", "0"], 1.0),
    (["0", "0", "0"], 0.0),
])
def test_gauge_residual(comps, expected):
    assert gauge_residual(VectorField.from_expressions(comps), [0, 0.3, -0.2, 0.5]) == expected


# grid backend -------------------------------------------------------------------

def test_grid_spec_validation():
    with pytest.raises(GridFormatError):
        GridSpec((0, 0, 0, 0), (1, 0, 1, 1), (1, 5, 1, 1))
    with pytest.raises(GridFormatError):
        GridSpec((0, 0, 0), (1, 1, 1), (1, 5, 1))
    with pytest.raises(GridFormatError):
        GridField(GridSpec((0, 0, 0, 0), (1, 0.1, 1, 1), (1, 3, 1, 1)), np.zeros((1, 3, 1, 1)))


def test_grid_field_matches_analytic_cubic():
    g = cube_grid(11, 0.2)
    f = AnalyticField("x^3 - 2*x*y + z^2")
    gf = GridField.from_field(f, g)
    p = [0, 0.13, -0.27, 0.31]
    assert gf.value(p) == pytest.approx(f.value(p), abs=1e-10)
    np.testing.assert_allclose(gf.gradient(p)[1:], f.gradient(p)[1:], atol=1e-10)
    assert gf.laplacian(p) == pytest.approx(f.laplacian(p), abs=1e-9)


def test_grid_time_interpolation_is_linear():
    g = GridSpec((0, -1, 0, 0), (0.5, 0.25, 1, 1), (3, 9, 1, 1))
    f = AnalyticField("t*x")
    gf = GridField.from_field(f, g)
    assert gf.value([0.3, 0.5, 0, 0]) == pytest.approx(0.15, abs=1e-12)
    assert gf.gradient([0.3, 0.5, 0, 0])[0] == pytest.approx(0.5, abs=1e-12)


def test_grid_outside_domain():
    gf = GridField.from_field(AnalyticField("x"), line_grid(11))
    with pytest.raises(DomainBoundary):
        gf.value([0, 5.0, 0, 0])


@pytest.mark.parametrize("suffix", [".csv", ".npz"])
def test_grid_file_round_trip(tmp_path, suffix):
    g = GridSpec((0, -1, 0.5, 0), (0.1, 0.25, 0.5, 1), (2, 5, 3, 1))
    rng = np.random.default_rng(3)
    data = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    save_grid(tmp_path / f"psi{suffix}", g, data)
    g2, d2 = load_grid(tmp_path / f"psi{suffix}")
    assert g2 == g
    assert np.array_equal(d2, data)


def test_grid_csv_header_mismatch(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("origin,0,0,0,0\nspacing,1,1,1,1\ncount,1,2,1,1\ncomponents,1\n1.0\n")
    with pytest.raises(GridFormatError):
        load_grid(p)

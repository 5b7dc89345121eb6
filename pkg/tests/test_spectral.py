import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import basis
from mhdshock.errors import ParityError
from mhdshock.spectral import PARITIES, ModalField, SpectralGrid, parity_mul, radial_derivative

G = SpectralGrid(9, 8, 6, 0.4, 1.3, 2.0)


@pytest.mark.parametrize("p", PARITIES)
def test_round_trip(p):
    rng = np.random.default_rng(0)
    c = rng.normal(size=G.eshape) * G.mode_mask(p)
    v = G.synthesize(c, p)
    assert np.max(np.abs(G.analyze(v, p) - c)) <= 1e-13
    assert G.parity_defect(v, p) <= 1e-13


def test_unit_mode_synthesises_basis_function():
    c = np.zeros(G.eshape)
    c[2, 3] = 1.0
    assert np.max(np.abs(G.synthesize(c, "sc") - basis(G, 2, 3, 1, 0))) <= 1e-13


def test_transverse_derivatives_exact():
    Z, E = G.zeta_of(G.y2)[:, None], G.eta_of(G.y3)[None, :]
    v = np.cos(2 * np.pi * Z) * np.sin(3 * np.pi * E)
    d, p = G.d2(v, "cs")
    assert p == "ss"
    want = -(2 * np.pi / (2 * G.theta0)) * np.sin(2 * np.pi * Z) * np.sin(3 * np.pi * E)
    assert np.max(np.abs(d - want)) <= 1e-12
    d, p = G.d3(v, "cs")
    assert p == "cc"
    assert np.max(np.abs(d - (3 * np.pi / 2) * np.cos(2 * np.pi * Z) * np.cos(3 * np.pi * E))) <= 1e-12


def test_point_evaluation():
    Z = G.zeta_of(G.y2)[:, None]
    E = G.eta_of(G.y3)[None, :]
    v = np.cos(2 * np.pi * Z) * np.sin(3 * np.pi * E)
    y2, y3 = np.array([0.1, -0.2]), np.array([0.3, 0.5])
    got = G.eval_points(G.analyze(v, "cs"), "cs", y2, y3)
    want = np.cos(2 * np.pi * G.zeta_of(y2)) * np.sin(3 * np.pi * G.eta_of(y3))
    assert np.allclose(got, want, atol=1e-13)


def test_parity_algebra_and_mismatch():
    assert parity_mul("sc", "cs") == "ss"
    assert parity_mul("sc", "sc") == "cc"
    a = ModalField(G, "sc", np.broadcast_to(basis(G, 1, 0, 1, 0), G.shape).copy())
    b = ModalField(G, "cs", np.broadcast_to(basis(G, 0, 1, 0, 1), G.shape).copy())
    assert (a * b).parity == "ss"
    with pytest.raises(ParityError):
        a + b
    with pytest.raises(ParityError):
        a / b
    # an identically zero field is parity-neutral
    assert (a + 0 * b.values).parity == "sc"


def test_radial_derivative_fourth_order():
    err = []
    for n in (17, 33, 65):
        y = np.linspace(1.0, 2.0, n)
        err.append(np.max(np.abs(radial_derivative(np.sin(3 * y), y[1] - y[0]) - 3 * np.cos(3 * y))))
    assert err[0] / err[1] > 14 and err[1] / err[2] > 14


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(PARITIES))
def test_projection_idempotent(seed, p):
    v = np.random.default_rng(seed).normal(size=G.eshape)
    once = G.project(v, p)
    assert np.max(np.abs(G.project(once, p) - once)) <= 1e-12

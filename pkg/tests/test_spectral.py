import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from willmore_lab import spectral
from willmore_lab.errors import UnsupportedOrder
from willmore_lab.spectral import TorusGrid


def test_grid_validation():
    for bad in [(7, 8), (8, 6), (0, 8), (9, 10)]:
        with pytest.raises(ValueError):
            TorusGrid(*bad)
    g = TorusGrid.parse("32x16")
    assert g.shape == (32, 16) and str(g) == "32x16"
    assert TorusGrid.parse("24") == TorusGrid(24, 24)


def test_grid_nodes_are_uniform_and_periodic():
    g = TorusGrid(16, 8)
    assert np.allclose(np.diff(g.theta), 2 * np.pi / 16)
    assert g.theta[0] == 0.0 and g.theta[-1] + 2 * np.pi / 16 == pytest.approx(2 * np.pi)
    assert g.cell_area * 16 * 8 == pytest.approx(4 * np.pi**2)


def test_resolvable_modes():
    g = TorusGrid(16, 8)
    assert g.resolves(7, 3) and not g.resolves(8, 0) and not g.resolves(0, -4)


@given(m=st.integers(-7, 7), n=st.integers(-7, 7), ph=st.floats(0, 6.3))
def test_pure_mode_derivatives_exact(m, n, ph):
    g = TorusGrid(16, 16)
    T, P = g.mesh()
    h = np.cos(m * T + n * P + ph)
    s = np.sin(m * T + n * P + ph)
    assert np.abs(spectral.diff(g, h, 1, 0) + m * s).max() < 1e-12
    assert np.abs(spectral.diff(g, h, 0, 1) + n * s).max() < 1e-12
    assert np.abs(spectral.diff(g, h, 2, 0) + m * m * h).max() < 1e-11
    assert np.abs(spectral.diff(g, h, 1, 1) + m * n * h).max() < 1e-11
    assert np.abs(spectral.laplacian(g, h) + (m * m + n * n) * h).max() < 1e-11


def test_integrate_exact_for_trig_polynomials():
    g = TorusGrid(8, 8)
    T, P = g.mesh()
    assert spectral.integrate(g, np.cos(T) ** 2) == pytest.approx(2 * np.pi**2, abs=1e-13)
    assert abs(spectral.integrate(g, np.cos(3 * T + P))) < 1e-13


def test_sobolev_examples():
    g = TorusGrid(32, 32)
    h = spectral.trig_mode(g, 1, 0)
    assert spectral.sobolev_norm(g, h, 0) == pytest.approx(np.sqrt(2 * np.pi**2), rel=1e-14)
    assert spectral.sobolev_norm(g, h, 2) == pytest.approx(np.sqrt(8 * np.pi**2), rel=1e-14)
    assert spectral.sobolev_norm(g, h, -1) == pytest.approx(np.sqrt(np.pi**2), rel=1e-14)
    for s in (-1, 0, 1, 2):
        assert spectral.sobolev_norm(g, np.zeros(g.shape), s) == 0.0
    with pytest.raises(UnsupportedOrder):
        spectral.sobolev_norm(g, h, 3)


def test_sobolev_vector_fields_sum_componentwise():
    g = TorusGrid(16, 16)
    a, b = spectral.trig_mode(g, 1, 2), spectral.trig_mode(g, 3, 0, 0.5)
    both = spectral.sobolev_norm(g, np.stack([a, b], -1), 1)
    assert both**2 == pytest.approx(spectral.sobolev_norm(g, a, 1) ** 2 + spectral.sobolev_norm(g, b, 1) ** 2)


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_sobolev_norm_matches_l2_and_gradient(coeffs):
    g = TorusGrid(16, 16)
    T, P = g.mesh()
    h = sum(c * np.cos(k * T + (k % 3) * P + 0.1 * k) for k, c in enumerate(coeffs))
    l2 = np.sqrt(spectral.integrate(g, h * h))
    grad = spectral.integrate(g, spectral.diff(g, h, 1, 0) ** 2 + spectral.diff(g, h, 0, 1) ** 2)
    assert spectral.sobolev_norm(g, h, 0) == pytest.approx(l2, rel=1e-10, abs=1e-12)
    assert spectral.sobolev_norm(g, h, 1) ** 2 == pytest.approx(l2**2 + grad, rel=1e-10, abs=1e-12)
    # monotone in the order
    norms = [spectral.sobolev_norm(g, h, s) for s in (-1, 0, 1, 2)]
    assert all(a <= b * (1 + 1e-12) + 1e-14 for a, b in zip(norms, norms[1:]))


def test_sup_norm():
    g = TorusGrid(8, 8)
    assert spectral.sup_norm(np.full(g.shape, -2.5)) == 2.5
    assert spectral.sup_norm(spectral.trig_mode(g, 1, 0)) == pytest.approx(1.0)
    assert spectral.sup_norm(np.zeros(g.shape)) == 0.0
    v = np.zeros(g.shape + (4,))
    v[1, 2] = [3.0, 4.0, 0.0, 0.0]
    assert spectral.sup_norm(v) == 5.0


def test_interpolation_exact_for_band_limited():
    g = TorusGrid(16, 16)
    T, P = g.mesh()
    field = np.cos(2 * T - P) + 0.3 * np.sin(T + 3 * P)
    rng = np.random.default_rng(0)
    th, ph = rng.uniform(0, 2 * np.pi, (2, 50))
    exact = np.cos(2 * th - ph) + 0.3 * np.sin(th + 3 * ph)
    assert np.abs(spectral.trig_interpolate(g, field, th, ph) - exact).max() < 1e-13
    nodes = np.sort(rng.uniform(0, 2 * np.pi, 20))
    res = spectral.trig_resample(g, field, nodes, nodes[::-1])
    assert np.abs(res - (np.cos(2 * nodes[:, None] - nodes[None, ::-1])
                         + 0.3 * np.sin(nodes[:, None] + 3 * nodes[None, ::-1]))).max() < 1e-13


def test_refinement_invariance_of_integrals():
    for n in (16, 32):
        g = TorusGrid(n, n)
        T, P = g.mesh()
        val = spectral.integrate(g, (1 + 0.3 * np.cos(T + 2 * P)) ** 2)
        assert val == pytest.approx(4 * np.pi**2 * (1 + 0.045), rel=1e-14)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from willmore_lab import moebius, torus
from willmore_lab.errors import PoleSingularity
from willmore_lab.moebius import ConformalCenter

from conftest import CLIFFORD_W, random_unit


def ball_point(seed, rmax=0.95):
    rng = np.random.default_rng(seed)
    return random_unit(rng, ()) * rmax * rng.uniform() ** 0.25


seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_inverse_is_minus_v(seed):
    v = ball_point(seed)
    x = random_unit(np.random.default_rng(seed + 1), (50,))
    x = x[np.linalg.norm(x - v, axis=-1) > 1e-3]
    y = moebius.apply_F(v, x)
    assert np.abs(np.linalg.norm(y, axis=-1) - 1).max() <= 1e-12
    assert np.abs(moebius.apply_F(-v, y) - x).max() <= 1e-9


@given(seeds)
def test_differential_is_conformal(seed):
    rng = np.random.default_rng(seed)
    v = ball_point(seed, 0.9)
    x = random_unit(rng, ())
    scale, Q = moebius.differential_F(v, x)
    assert np.abs(Q @ Q - np.eye(4)).max() <= 1e-12
    assert np.abs(Q.T @ Q - np.eye(4)).max() <= 1e-12
    # compare with a central difference along a tangent direction
    w = rng.normal(size=4)
    w -= (w @ x) * x
    w /= np.linalg.norm(w)
    h = 1e-6
    fd = (moebius.apply_F(v, (x + h * w) / np.linalg.norm(x + h * w))
          - moebius.apply_F(v, (x - h * w) / np.linalg.norm(x - h * w))) / (2 * h)
    assert np.abs(fd - scale * Q @ w).max() <= 1e-5 * max(1.0, scale)
    assert np.linalg.norm(fd) == pytest.approx(scale, rel=1e-5)


def test_scale_example():
    v = np.array([0.5, 0, 0, 0])
    assert moebius.conformal_factor(v, np.array([-1.0, 0, 0, 0])) == pytest.approx(1 / 3, abs=1e-14)
    assert moebius.conformal_factor(v, np.array([1.0, 0, 0, 0])) == pytest.approx(3.0, abs=1e-14)
    assert moebius.apply_F(v, np.array([1.0, 0, 0, 0])) == pytest.approx([1, 0, 0, 0], abs=1e-15)
    assert moebius.StereographicFrame.from_center(np.array([0, 1 / 3, 0, 0])).lam == pytest.approx(2.0)


def test_decompose_check_samples():
    rng = np.random.default_rng(7)
    for r in (0.1, 0.5, 0.9):
        v = r * random_unit(rng, ())
        x = random_unit(rng, (1000,))
        x = x[1 + x @ (v / r) > 1e-6]
        assert moebius.decompose_check(v, x).max() <= 1e-10


@given(seeds)
def test_pushforward_normal(seed):
    rng = np.random.default_rng(seed)
    v = ball_point(seed, 0.9)
    x = random_unit(rng, ())
    w1, w2 = rng.normal(size=(2, 4))
    N = np.linalg.svd(np.stack([x, w1, w2]))[2][-1]  # unit, orthogonal to x, w1, w2
    scale, Q = moebius.differential_F(v, x)
    n = moebius.pushforward_normal(v, x, N)
    y = moebius.apply_F(v, x)
    assert abs(np.linalg.norm(n) - 1) <= 1e-12
    assert abs(n @ y) <= 1e-10
    for w in (w1, w2):
        w = w - (w @ x) * x
        assert abs(n @ (Q @ w)) <= 1e-10 * np.linalg.norm(w)


def test_pushforward_normal_continuous_along_surface(clifford64):
    geom = torus.compute_geometry(clifford64)
    n = moebius.pushforward_normal([0.3, 0.2, -0.1, 0.4], clifford64.points, geom.N)
    jump = np.linalg.norm(np.roll(n, 1, axis=0) - n, axis=-1).max()
    assert jump < 0.5


def test_center_validation_and_pole():
    with pytest.raises(ValueError):
        ConformalCenter([1.0, 0, 0, 0])
    with pytest.raises(ValueError):
        ConformalCenter([0.1, 0.2, 0.3])
    v = np.array([0.6, 0, 0, 0])
    x = np.array([[0.0, 1, 0, 0], v])
    with pytest.raises(PoleSingularity) as err:
        moebius.apply_F(v, x)
    assert err.value.index == (1,)
    with pytest.raises(PoleSingularity):
        moebius.stereographic(v, np.array([-1.0, 0, 0, 0]))


def test_identity_center_is_trivial(clifford64):
    assert moebius.transform_immersion(np.zeros(4), clifford64) is clifford64
    assert moebius.adapted_transform(np.zeros(4), clifford64) is clifford64


def test_clustering_map():
    s = np.linspace(-np.pi, np.pi, 101)[1:-1]
    for k in (1.0, 0.3, 0.02):
        mu = moebius.clustering_map(s, k)
        assert np.all(np.diff(mu) > 0)
        h = 1e-7
        slope = (moebius.clustering_map(h, k) - moebius.clustering_map(-h, k)) / (2 * h)
        assert slope == pytest.approx(k, rel=1e-8)
    assert np.allclose(moebius.clustering_map(s, 1.0), s, atol=1e-15)


@pytest.mark.parametrize("r", [0.3, 0.6, 0.9])
def test_willmore_invariance(r, corpus64):
    rng = np.random.default_rng(int(r * 10))
    for name in ("clifford", "mixed", "ambient"):
        f = corpus64[name]
        W0 = torus.willmore_energy(torus.compute_geometry(f))
        v = r * random_unit(rng, ())
        fv = moebius.adapted_transform(v, f)
        W = torus.willmore_energy(torus.compute_geometry(fv))
        assert abs(W - W0) <= 1e-6, (name, W - W0)


def test_tracefree_density_invariant_clifford(clifford64):
    v = np.array([0.15, -0.1, 0.05, 0.2])
    fv = moebius.transform_immersion(v, clifford64)
    g0, g1 = torus.compute_geometry(clifford64), torus.compute_geometry(fv)
    lhs = g1.tracefree_sq * g1.dA
    rhs = g0.tracefree_sq * g0.dA
    assert np.abs(lhs - rhs).max() <= 1e-9


def test_pole_adapted_describes_same_surface(clifford64):
    v = np.array([0.99, 0, 0.0, 0.0])
    g = moebius.pole_adapted(clifford64, v)
    assert g is not clifford64
    # every resampled point lies on the Clifford torus
    p = g.points
    assert np.abs(p[..., 0] ** 2 + p[..., 1] ** 2 - 0.5).max() <= 1e-12
    A = torus.area(torus.compute_geometry(g))
    assert A == pytest.approx(CLIFFORD_W, abs=1e-10)
    assert moebius.pole_adapted(clifford64, np.array([0.0, 0, 0, 0.1]), kappa=1.0) is clifford64

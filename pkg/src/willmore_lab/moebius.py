"""The conformal maps F_v(x) = (1-|v|^2)(x-v)/|x-v|^2 - v of S^3, v in the open 4-ball.

All point functions broadcast over leading axes: ``x`` may be a single
4-vector or any ``(..., 4)`` array.
"""
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import PoleSingularity
from .torus import Immersion, project_to_sphere

POLE_TOL = 1e-14
INTERIOR_MARGIN = 1e-9


@dataclass(frozen=True)
class ConformalCenter:
    v: tuple

    def __post_init__(self):
        v = tuple(float(c) for c in np.asarray(self.v, dtype=float).ravel())
        if len(v) != 4:
            raise ValueError("conformal center must be a 4-vector")
        if np.linalg.norm(v) > 1.0 - INTERIOR_MARGIN:
            raise ValueError(f"|v| = {np.linalg.norm(v):.12g} is not in the open unit ball")
        object.__setattr__(self, "v", v)

    @property
    def array(self):
        return np.array(self.v)

    @property
    def norm(self):
        return float(np.linalg.norm(self.v))


def _as_v(v):
    if isinstance(v, ConformalCenter):
        return v.array
    return ConformalCenter(v).array


def _offset(v, x):
    d = np.asarray(x, dtype=float) - v
    d2 = np.einsum("...i,...i", d, d)
    bad = np.argwhere(np.atleast_1d(d2) < POLE_TOL)
    if bad.size:
        idx = tuple(int(i) for i in bad[0]) if np.ndim(d2) else None
        raise PoleSingularity(f"|x - v|^2 < {POLE_TOL:g} at index {idx}", index=idx)
    return d, d2


def apply_F(v, x):
    v = _as_v(v)
    d, d2 = _offset(v, x)
    y = (1.0 - v @ v) * d / d2[..., None] - v
    return project_to_sphere(y)


def differential_F(v, x):
    """DF_v(x) = scale * Q with Q the reflection w -> w - 2<w, x-v>(x-v)/|x-v|^2.

    Returns ``(scale, Q)`` with Q as a ``(..., 4, 4)`` matrix.
    """
    v = _as_v(v)
    d, d2 = _offset(v, x)
    scale = (1.0 - v @ v) / d2
    Q = np.eye(4) - 2.0 * d[..., :, None] * d[..., None, :] / d2[..., None, None]
    return scale, Q


def reflect(v, x, w):
    """Q_{x,v}(w) without forming the matrix."""
    v = _as_v(v)
    d, d2 = _offset(v, x)
    return w - 2.0 * (np.einsum("...i,...i", w, d) / d2)[..., None] * d


def pushforward_normal(v, x, N):
    """DF_v N / |DF_v N|; the positive scale drops out, leaving Q N."""
    n = reflect(v, x, np.asarray(N, dtype=float))
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def conformal_factor(v, x):
    """(1-|v|^2)/|x-v|^2, the linear stretch of F_v at x."""
    v = _as_v(v)
    _, d2 = _offset(v, x)
    return (1.0 - v @ v) / d2


@dataclass(frozen=True)
class StereographicFrame:
    """Pole direction v/|v| and dilation lambda = (1+|v|)/(1-|v|).

    F_v factors as G^-1 o (lambda *) o G with G the stereographic
    projection from -v/|v| onto the hyperplane orthogonal to v.
    """

    pole: np.ndarray
    lam: float

    @classmethod
    def from_center(cls, v):
        v = _as_v(v)
        r = float(np.linalg.norm(v))
        # F_0 is the identity; any pole gives lambda = 1
        pole = v / r if r > 0 else np.array([1.0, 0.0, 0.0, 0.0])
        return cls(pole, (1.0 + r) / (1.0 - r))


def stereographic(v, x):
    """G_v(x) = 2 (x - <x,p> p) / (1 + <x,p>), p = v/|v|."""
    p = StereographicFrame.from_center(v).pole
    x = np.asarray(x, dtype=float)
    c = np.einsum("...i,i", x, p)
    bad = np.argwhere(np.atleast_1d(1.0 + c) < POLE_TOL)
    if bad.size:
        raise PoleSingularity("stereographic projection hit its pole -v/|v|",
                              index=tuple(int(i) for i in bad[0]) if np.ndim(c) else None)
    return 2.0 * (x - c[..., None] * p) / (1.0 + c)[..., None]


def stereographic_inv(v, y):
    p = StereographicFrame.from_center(v).pole
    y = np.asarray(y, dtype=float)
    yy = np.einsum("...i,...i", y, y)[..., None]
    return 4.0 * y / (4.0 + yy) + (4.0 - yy) / (4.0 + yy) * p


def decompose_check(v, x):
    """|F_v(x) - G^-1(lambda G(x))|, the residual of the stereographic factorization."""
    lam = StereographicFrame.from_center(v).lam
    direct = apply_F(v, x)
    factored = stereographic_inv(v, lam * stereographic(v, x))
    return np.linalg.norm(direct - factored, axis=-1)


def transform_immersion(v, f):
    """Node-wise F_v; the derivative cache is recomputed spectrally from the new points."""
    v = _as_v(v)
    if not np.any(v):
        return f
    return Immersion(f.grid, apply_F(v, f.points))


# --- pole-adapted parametrization --------------------------------------------------
#
# Near the conformal boundary F_v stretches a neighbourhood of the pole
# preimage by ~1/(1-|v|), which a uniform parameter grid cannot resolve.
# Integrals over Sigma_v do not depend on the parametrization, so we
# re-sample Sigma through an orientation-preserving circle-Moebius
# clustering centred on the node closest to v/|v|.


def clustering_map(s, kappa):
    """Monotone analytic map of the circle fixing 0 with slope ``kappa`` there."""
    return 2.0 * np.arctan2(kappa * np.sin(s / 2.0), np.cos(s / 2.0))


def pole_distance(f, v):
    """(min over nodes of |f - v|, node index attaining it); ``v`` is any 4-vector."""
    v = np.asarray(v.array if isinstance(v, ConformalCenter) else v, dtype=float)
    d = np.linalg.norm(f.points - v, axis=-1)
    idx = np.unravel_index(int(np.argmin(d)), d.shape)
    return float(d[idx]), idx


def default_kappa(f, v):
    d, _ = pole_distance(f, v)
    return min(1.0, float(np.sqrt(d)))


def adapted_nodes(f, v, kappa, n_theta=None, n_phi=None):
    """Clustered parameter nodes (theta, phi) centred on the node nearest v."""
    _, (i, j) = pole_distance(f, v)
    grid = f.grid
    n_theta = n_theta or grid.n_theta
    n_phi = n_phi or grid.n_phi
    s_t = spectral.TWO_PI * np.arange(n_theta) / n_theta
    s_p = spectral.TWO_PI * np.arange(n_phi) / n_phi
    return grid.theta[i] + clustering_map(s_t, kappa), grid.phi[j] + clustering_map(s_p, kappa)


def adapted_points(f, v, kappa, n_theta=None, n_phi=None):
    """Points of Sigma at clustered nodes, interpolated from the original grid.

    Always resample from ``f`` itself: the clustered field is no longer band
    limited, so resampling it a second time would alias.
    """
    theta, phi = adapted_nodes(f, _as_v(v), kappa, n_theta, n_phi)
    return project_to_sphere(spectral.trig_resample(f.grid, f.points, theta, phi))


def pole_adapted(f, v, kappa=None):
    """The same surface as ``f`` re-sampled with nodes clustered at the pole preimage.

    Returns ``f`` itself when no clustering is needed (kappa >= 1).
    """
    v = _as_v(v)
    if kappa is None:
        kappa = default_kappa(f, v)
    if kappa >= 1.0:
        return f
    return Immersion(f.grid, adapted_points(f, v, kappa))


def adapted_transform(v, f, kappa=None):
    """Sigma_v = F_v(Sigma), parametrized for spectral resolution near the pole."""
    v = _as_v(v)
    if not np.any(v):
        return f
    return transform_immersion(v, pole_adapted(f, v, kappa))

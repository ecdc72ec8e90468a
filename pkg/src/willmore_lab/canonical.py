"""The canonical family Sigma_(v,t): conformal image F_v(Sigma) followed by the
normal-exponential (parallel surface) map at signed distance t.

Level sets of the distance function are never extracted. Both area routes
below integrate over Sigma_v itself, and each bounds the true area of
Sigma_(v,t) from above:

* ``canonical_area_hk`` integrates J_t over the points of Sigma_v that have
  not reached a focal point by time t (there J_t > 0).
* ``canonical_area_pushforward`` measures the image of P_{v,t} with
  multiplicity, which equals the integral of |J_t|.

Sign convention: J_t = det(cos t + sin t S) with S the shape operator for the
normal -N. The parallel map cos t x + sin t N then has Jacobian J_t, so H is
negated before it is passed to ``hk_jacobian``.
"""
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from . import moebius, spectral
from .errors import DegenerateCloud, EmptyCloud, WillmoreLabError
from .moebius import ConformalCenter
from .torus import compute_geometry, willmore_energy

FIVE_PI = 5.0 * np.pi
DEFAULT_RADII = (0.0, 0.3, 0.6, 0.9, 0.95, 0.99)
DEFAULT_DIRECTIONS = 12
DEFAULT_T_STEPS = 64


@dataclass(frozen=True)
class ConformalParam:
    v: ConformalCenter
    t: float

    def __post_init__(self):
        if not isinstance(self.v, ConformalCenter):
            object.__setattr__(self, "v", ConformalCenter(self.v))
        if abs(self.t) > np.pi:
            raise ValueError(f"|t| must be <= pi, got {self.t}")


def parallel_map(v, t, x, N):
    """P_{v,t}(x) = cos t F_v(x) + sin t Q_{x,v} N."""
    return np.cos(t) * moebius.apply_F(v, x) + np.sin(t) * moebius.reflect(v, x, N)


def hk_jacobian(H, tracefree_sq, t):
    """Signed Jacobian of the normal flow at distance t.

    (1 + H^2/4) - (H/2 cos t - sin t)^2 - sin^2 t |A0|^2 / 2. The last term is
    sin^2 t (k1 - k2)^2 / 4 written through (k1 - k2)^2 = 2 |A0|^2.
    """
    H = np.asarray(H, dtype=float)
    return (1.0 + H**2 / 4) - (H / 2 * np.cos(t) - np.sin(t)) ** 2 \
        - 0.5 * np.sin(t) ** 2 * np.asarray(tracefree_sq, dtype=float)


def hk_density(H, tracefree_sq, t):
    """J_t on points whose normal geodesic has not yet met a focal point, else 0.

    J_t = (cos t + k1 sin t)(cos t + k2 sin t) with k = H/2 +- sqrt(|A0|^2 / 2).
    Each factor changes sign once on (0, pi) and once on (-pi, 0), so a point
    is pre-focal at time t exactly when both factors are positive there. Past
    the second focal point J_t turns positive again; those points are dropped.
    """
    H = np.asarray(H, dtype=float)
    r = np.sqrt(np.maximum(np.asarray(tracefree_sq, dtype=float), 0.0) / 2.0)
    c, s = np.cos(t), np.sin(t)
    f1 = c + s * (H / 2 + r)
    f2 = c + s * (H / 2 - r)
    return np.where((f1 > 0) & (f2 > 0), hk_jacobian(H, tracefree_sq, t), 0.0)


def _t_array(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > np.pi + 1e-12):
        raise ValueError("t must lie in [-pi, pi]")
    return t


def conformal_geometry(v, f):
    """(Sigma_v, its geometry), using the pole-adapted parametrization."""
    fv = moebius.adapted_transform(v, f)
    return fv, compute_geometry(fv)


def hk_area_from_geometry(geom, t):
    t = _t_array(t)
    ts = np.atleast_1d(t)
    out = np.empty(ts.shape)
    for k, tk in enumerate(ts.ravel()):
        J = hk_density(-geom.H, geom.tracefree_sq, tk)
        out.flat[k] = spectral.integrate(geom.grid, J * geom.dA)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def canonical_area_hk(v, t, f):
    """Integral of the pre-focal Jacobian J_t over Sigma_v. ``t`` may be an array."""
    _, geom = conformal_geometry(v, f)
    return hk_area_from_geometry(geom, t)


def canonical_area_pushforward(v, t, f):
    """Area of P_{v,t}(Sigma) with multiplicity, from the spectrally differentiated image."""
    t = _t_array(t)
    fa = moebius.pole_adapted(f, moebius._as_v(v))
    N = compute_geometry(fa).N
    grid = f.grid
    out = []
    for tk in np.atleast_1d(t).ravel():
        P = parallel_map(v, tk, fa.points, N)
        Pt = spectral.diff(grid, P, 1, 0)
        Pp = spectral.diff(grid, P, 0, 1)
        E = np.einsum("...i,...i", Pt, Pt)
        F = np.einsum("...i,...i", Pt, Pp)
        G = np.einsum("...i,...i", Pp, Pp)
        out.append(spectral.integrate(grid, np.sqrt(np.maximum(E * G - F**2, 0.0))))
    out = np.array(out)
    return out.reshape(t.shape) if t.ndim else float(out[0])


# --- sweeps ------------------------------------------------------------------------


def default_t_grid(steps=DEFAULT_T_STEPS):
    """``steps`` uniform values on the circle [-pi, pi); t = 0 is included for even steps."""
    return -np.pi + 2.0 * np.pi * np.arange(steps) / steps


def shoemake(u):
    """Uniform map from the unit cube [0,1)^3 to S^3."""
    u = np.atleast_2d(u)
    a, b = np.sqrt(1.0 - u[:, 0]), np.sqrt(u[:, 0])
    t1, t2 = 2 * np.pi * u[:, 1], 2 * np.pi * u[:, 2]
    return np.stack([a * np.sin(t1), a * np.cos(t1), b * np.sin(t2), b * np.cos(t2)], axis=-1)


def halton_directions(count=DEFAULT_DIRECTIONS):
    """Deterministic low-discrepancy directions: unscrambled Halton points, skipping the origin."""
    u = qmc.Halton(d=3, scramble=False).random(count + 1)[1:]
    return shoemake(u)


def random_directions(count, seed):
    x = np.random.default_rng(seed).normal(size=(count, 4))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@dataclass
class SweepTable:
    radii: np.ndarray
    directions: np.ndarray
    t_grid: np.ndarray
    area: np.ndarray  # (radius, direction, t); NaN where masked
    status: np.ndarray  # same shape, "ok" | "proxy>5pi" | "masked"
    failures: list = field(default_factory=list)
    willmore: float = float("nan")

    def argmax(self):
        """(radius index, direction index, t index) of the largest unmasked cell.

        Cells within 1e-12 (relative) of the maximum count as ties; among ties
        the smallest |t| wins, then the first index.
        """
        a = np.where(np.isnan(self.area), -np.inf, self.area)
        top = a.max()
        ties = np.argwhere(a >= top - 1e-12 * max(abs(top), 1.0))
        key = [(abs(self.t_grid[k]), i, j, k) for i, j, k in ties]
        _, i, j, k = min(key)
        return int(i), int(j), int(k)

    def max_value(self):
        return float(self.area[self.argmax()])

    def exceedances(self):
        """Cells with |v| >= 0.95 whose proxy area exceeds 5 pi."""
        return [
            (float(self.radii[i]), j, float(self.t_grid[k]), float(self.area[i, j, k]))
            for i, j, k in np.argwhere(self.status == "proxy>5pi")
        ]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "dirIndex", "t", "area", "status"])
        for i, r in enumerate(self.radii):
            for j in range(len(self.directions)):
                for k, t in enumerate(self.t_grid):
                    a = self.area[i, j, k]
                    w.writerow([repr(float(r)), j, repr(float(t)),
                                "" if np.isnan(a) else repr(float(a)), self.status[i, j, k]])
        return buf.getvalue()

    def summary(self):
        i, j, k = self.argmax()
        v = self.radii[i] * self.directions[j]
        return {
            "argmax": {
                "radius": float(self.radii[i]),
                "dirIndex": j,
                "v": [float(c) + 0.0 for c in v],
                "t": float(self.t_grid[k]),
                "area": float(self.area[i, j, k]),
            },
            "willmore": self.willmore,
            "maskedCells": int(np.sum(self.status == "masked")),
            "proxyExceedances5pi": len(self.exceedances()),
            "failures": self.failures,
        }

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"


def sweep(f, radii=DEFAULT_RADII, directions=None, t_grid=None, willmore=None):
    """Tabulate canonical_area_hk over radii x directions x t.

    A cell whose transform or geometry fails is masked (NaN) and logged;
    cells with |v| >= 0.95 above 5 pi are kept but flagged.
    """
    radii = np.asarray(radii, dtype=float)
    directions = halton_directions() if directions is None else np.asarray(directions, float)
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if willmore is None:
        willmore = willmore_energy(compute_geometry(f))
    shape = (len(radii), len(directions), len(t_grid))
    area = np.full(shape, np.nan)
    status = np.full(shape, "masked", dtype=object)
    failures = []
    base_row = None
    for i, r in enumerate(radii):
        for j, d in enumerate(directions):
            if r == 0.0 and base_row is not None:
                area[i, j] = base_row  # F_0 is the identity for every direction
            else:
                try:
                    _, geom = conformal_geometry(r * d, f)
                    area[i, j] = hk_area_from_geometry(geom, t_grid)
                except (WillmoreLabError, ValueError) as exc:
                    failures.append({"radius": float(r), "dirIndex": j,
                                     "error": type(exc).__name__, "message": str(exc)})
                    continue
                if r == 0.0:
                    base_row = area[i, j].copy()
            status[i, j] = "ok"
            if r >= 0.95:
                status[i, j][area[i, j] > FIVE_PI] = "proxy>5pi"
    return SweepTable(radii, directions, t_grid, area, status.astype(str), failures, float(willmore))


# --- conformal boundary diagnostics -------------------------------------------------


def geodesic_sphere_fit(points, weights=None):
    """Fit the geodesic sphere {<x, w> = c} to points on S^3.

    Weighted least squares of <x, w> - c over unit w: c is the weighted mean
    of <x, w> and w the smallest principal direction of the weighted
    covariance. The sign of w is chosen so that c >= 0.

    Returns (w, c, rms residual).
    """
    X = np.asarray(points, dtype=float).reshape(-1, 4)
    if len(X) < 5:
        raise DegenerateCloud(f"need at least 5 points, got {len(X)}")
    wts = np.ones(len(X)) if weights is None else np.asarray(weights, float).ravel()
    wts = wts / wts.sum()
    mean = wts @ X
    Y = X - mean
    cov = (Y * wts[:, None]).T @ Y
    evals, evecs = np.linalg.eigh(cov)
    if evals[1] <= 1e-12 * max(evals[-1], 1e-300):
        raise DegenerateCloud("points are rank deficient: the fitted sphere is not unique")
    w = evecs[:, 0]
    c = float(mean @ w)
    if c < 0 or (c == 0 and w[np.argmax(np.abs(w))] < 0):
        w, c = -w, -c
    rms = float(np.sqrt(max(evals[0], 0.0)))
    return w, c, rms


def sphere_samples(w, c, count=4096):
    """Fibonacci points on the geodesic sphere {<x, w> = c}."""
    w = np.asarray(w, dtype=float)
    rho = np.sqrt(max(1.0 - c * c, 0.0))
    # orthonormal basis of w-perp from the QR of [w | I]
    Q, _ = np.linalg.qr(np.column_stack([w, np.eye(4)]))
    B = Q[:, 1:4]
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    r = np.sqrt(1.0 - z * z)
    ang = np.pi * (3.0 - np.sqrt(5.0)) * k
    s2 = np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=-1)
    return c * w + rho * s2 @ B.T


def _tree(points):
    # unbalanced, non-compact trees build and query far faster on strongly clustered clouds
    return cKDTree(points, balanced_tree=False, compact_nodes=False)


def hausdorff_distance(A, B):
    """Symmetric discrete Hausdorff distance in the chordal metric of R^4."""
    A = np.asarray(A, dtype=float).reshape(-1, 4)
    B = np.asarray(B, dtype=float).reshape(-1, 4)
    if len(A) == 0 or len(B) == 0:
        raise EmptyCloud("Hausdorff distance needs two nonempty point sets")
    dab, _ = _tree(B).query(A)
    dba, _ = _tree(A).query(B)
    return float(max(dab.max(), dba.max()))


def distance_to_sphere(points, w, c):
    """Chordal distance from points of R^4 to the geodesic sphere {<x, w> = c}."""
    X = np.asarray(points, dtype=float).reshape(-1, 4)
    w = np.asarray(w, dtype=float)
    a = X @ w
    perp = np.linalg.norm(X - a[:, None] * w, axis=1)
    return np.sqrt((a - c) ** 2 + (perp - np.sqrt(max(1.0 - c * c, 0.0))) ** 2)


def hausdorff_to_sphere(points, w, c, count=20000):
    """Hausdorff distance from a point cloud to a geodesic sphere.

    Cloud-to-sphere distances are exact; the sphere side is sampled.
    """
    X = np.asarray(points, dtype=float).reshape(-1, 4)
    if len(X) == 0:
        raise EmptyCloud("empty point cloud")
    d_sphere, _ = _tree(X).query(sphere_samples(w, c, count))
    return float(max(distance_to_sphere(X, w, c).max(), d_sphere.max()))


def dense_conformal_samples(v, f, upsample=4):
    """Points of Sigma_v for set-distance diagnostics.

    The image of a small neighbourhood of the pole preimage spreads over a
    whole sphere, so two clustering strengths are combined: kappa covers the
    bulk and kappa^2 the region blown up the most.
    """
    v = moebius._as_v(v)
    n_t, n_p = upsample * f.grid.n_theta, upsample * f.grid.n_phi
    k0 = moebius.default_kappa(f, v)
    kappas = (k0, k0 * k0) if k0 < 1.0 else (1.0,)
    pts = [moebius.adapted_points(f, v, k, n_t, n_p) for k in kappas]
    return moebius.apply_F(v, np.concatenate([q.reshape(-1, 4) for q in pts]))


def conformal_boundary_row(v, f, upsample=4, sphere_count=20000):
    """Area of Sigma_v, its area-weighted sphere fit, and Hausdorff distance to that sphere."""
    v = moebius._as_v(v)
    fv, geom = conformal_geometry(v, f)
    a = spectral.integrate(geom.grid, geom.dA)
    # area weights: the clustered nodes would otherwise dominate the fit
    w, c, rms = geodesic_sphere_fit(fv.points, weights=geom.dA)
    hd = hausdorff_to_sphere(dense_conformal_samples(v, f, upsample), w, c, sphere_count)
    return {"area": a, "w": w, "c": c, "sphereFitResidual": rms, "hausdorff": hd}


def area_comparison_check(v, pairs, f, tol=1e-6):
    """Check AreaHK(v,t) <= (sin t / sin tau)^2 AreaHK(v,tau) for 0 < tau <= t < pi.

    Returns one dict per pair with lhs, rhs and a ``violated`` flag.
    """
    pairs = [(float(a), float(b)) for a, b in pairs]
    for tau, t in pairs:
        if not 0.0 < tau <= t < np.pi:
            raise ValueError(f"need 0 < tau <= t < pi, got ({tau}, {t})")
    ts = sorted({x for p in pairs for x in p})
    _, geom = conformal_geometry(v, f)
    vals = dict(zip(ts, np.atleast_1d(hk_area_from_geometry(geom, np.array(ts)))))
    out = []
    for tau, t in pairs:
        lhs = float(vals[t])
        rhs = float((np.sin(t) / np.sin(tau)) ** 2 * vals[tau])
        out.append({"tau": tau, "t": t, "lhs": lhs, "rhs": rhs, "violated": lhs > rhs + tol})
    return out

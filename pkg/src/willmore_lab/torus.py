"""Immersed tori in S^3 sampled on a periodic grid, and their geometry.

Conventions
-----------
* The unit normal N is tangent to S^3 and orthogonal to the surface. Its
  orientation is the one that reproduces n = (-phi, psi) on the Clifford
  torus, i.e. det[f, f_theta, f_phi, N] < 0.
* A_ij = <d_ij f, N>, H = g^ij A_ij, and K = 1 + det(g^-1 A) (Gauss equation
  in S^3). On the Clifford torus the principal curvatures are +1 and -1.
"""
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import spectral
from .errors import DegenerateImmersion, ResolutionError
from .spectral import TorusGrid

SPHERE_TOL = 1e-12
DET_TOL = 1e-14
COMPONENTS = ("normal", "tangent-theta", "tangent-phi", "ambient")


def project_to_sphere(points):
    points = np.asarray(points, dtype=float)
    return points / np.linalg.norm(points, axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class Immersion:
    """Grid samples of a map S^1 x S^1 -> S^3 with a spectral derivative cache.

    The cache holds ``t, p, tt, tp, pp`` (theta / phi derivatives) and is
    always recomputed from ``points``.
    """

    grid: TorusGrid
    points: np.ndarray
    derivatives: dict = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.shape != self.grid.shape + (4,):
            raise ValueError(f"points must have shape {self.grid.shape + (4,)}, got {pts.shape}")
        drift = np.max(np.abs(np.linalg.norm(pts, axis=-1) - 1.0))
        if drift > SPHERE_TOL:
            raise ValueError(f"points leave S^3 by {drift:.3e}; project them first")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        cache = spectral.derivative_cache(self.grid, pts)
        for arr in cache.values():
            arr.setflags(write=False)
        object.__setattr__(self, "derivatives", cache)

    @classmethod
    def from_points(cls, grid, points):
        """Build an immersion after radial projection onto S^3."""
        return cls(grid, project_to_sphere(points))

    @property
    def f_t(self):
        return self.derivatives["t"]

    @property
    def f_p(self):
        return self.derivatives["p"]

    def metric(self):
        ft, fp = self.f_t, self.f_p
        E = np.einsum("...i,...i", ft, ft)
        F = np.einsum("...i,...i", ft, fp)
        G = np.einsum("...i,...i", fp, fp)
        return E, F, G

    def evaluate(self, theta, phi, rel_tol=1e-15):
        """Trigonometric interpolant at arbitrary parameters, projected to S^3."""
        return project_to_sphere(spectral.trig_interpolate(self.grid, self.points, theta, phi, rel_tol))

    def flat(self):
        return self.points.reshape(-1, 4)


def clifford_points(theta, phi):
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    return np.stack([np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)], axis=-1) / np.sqrt(2.0)


def clifford_frame(theta, phi):
    """(f0, f0_theta, f0_phi, n) evaluated at the given parameters."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    s = 1.0 / np.sqrt(2.0)
    z = np.zeros_like(theta)
    f0 = clifford_points(theta, phi)
    ft = s * np.stack([-np.sin(theta), np.cos(theta), z, z], axis=-1)
    fp = s * np.stack([z, z, -np.sin(phi), np.cos(phi)], axis=-1)
    n = s * np.stack([-np.cos(theta), -np.sin(theta), np.cos(phi), np.sin(phi)], axis=-1)
    return f0, ft, fp, n


def clifford_immersion(grid):
    """f0(theta, phi) = (cos theta, sin theta, cos phi, sin phi) / sqrt 2."""
    T, P = grid.mesh()
    return Immersion(grid, clifford_points(T, P))


# --- perturbations -----------------------------------------------------------------


@dataclass(frozen=True)
class Mode:
    """amplitude * cos(m theta + n phi + phase) along one direction field.

    ``ambient`` modes push along the fixed coordinate axis ``axis`` of R^4.
    """

    component: str
    m: int
    n: int
    amplitude: float
    phase: float = 0.0
    axis: int = 0

    def __post_init__(self):
        if self.component not in COMPONENTS:
            raise ValueError(f"component must be one of {COMPONENTS}, got {self.component!r}")
        if not 0 <= self.axis < 4:
            raise ValueError(f"ambient axis must be in 0..3, got {self.axis}")

    def profile(self, theta, phi):
        return self.amplitude * np.cos(self.m * theta + self.n * phi + self.phase)

    def to_dict(self):
        d = {"component": self.component, "m": self.m, "n": self.n,
             "amplitude": self.amplitude, "phase": self.phase}
        if self.component == "ambient":
            d["axis"] = self.axis
        return d


@dataclass(frozen=True)
class PerturbationSpec:
    modes: tuple = ()

    @classmethod
    def from_dict(cls, data):
        modes = data.get("modes", []) if isinstance(data, dict) else data
        return cls(tuple(Mode(**m) for m in modes))

    def to_dict(self):
        return {"modes": [m.to_dict() for m in self.modes]}

    def scaled(self, factor):
        return PerturbationSpec(tuple(replace(m, amplitude=m.amplitude * factor) for m in self.modes))

    def check_resolvable(self, grid):
        for mode in self.modes:
            if not grid.resolves(mode.m, mode.n):
                raise ResolutionError(
                    f"mode ({mode.m}, {mode.n}) is not resolvable on grid {grid}"
                )

    def with_conformal_gauge(self):
        """Add the tangential modes that keep a Clifford perturbation conformal to first order.

        For a normal displacement z the linearized Cauchy-Riemann system
        v1_theta - v2_phi = 2 z, v1_phi + v2_theta = 0 is solved mode by
        mode. The (0, 0) normal mode changes the conformal class and gets
        no companion.
        """
        extra = []
        for mode in self.modes:
            if mode.component != "normal" or (mode.m, mode.n) == (0, 0):
                continue
            k2 = mode.m**2 + mode.n**2
            if mode.m:
                extra.append(Mode("tangent-theta", mode.m, mode.n,
                                  2.0 * mode.m * mode.amplitude / k2, mode.phase - np.pi / 2))
            if mode.n:
                extra.append(Mode("tangent-phi", mode.m, mode.n,
                                  2.0 * mode.n * mode.amplitude / k2, mode.phase + np.pi / 2))
        return PerturbationSpec(self.modes + tuple(extra))


def _direction_fields(base):
    out = {"tangent-theta": base.f_t, "tangent-phi": base.f_p}
    out["normal"] = unit_normal(base)
    return out


def perturbation_field(base, spec):
    """Sum of the modes of ``spec`` as an R^4-valued grid field (before projection)."""
    spec.check_resolvable(base.grid)
    T, P = base.grid.mesh()
    total = np.zeros(base.grid.shape + (4,))
    dirs = None
    for mode in spec.modes:
        prof = mode.profile(T, P)
        if mode.component == "ambient":
            total[..., mode.axis] += prof
            continue
        if dirs is None:
            dirs = _direction_fields(base)
        total += prof[..., None] * dirs[mode.component]
    return total


def perturb_immersion(base, spec):
    """Radial projection of base + modes back onto S^3."""
    if not spec.modes:
        return base
    f = Immersion.from_points(base.grid, base.points + perturbation_field(base, spec))
    _check_metric(f)
    return f


def perturbed_clifford(grid, spec):
    return perturb_immersion(clifford_immersion(grid), spec)


def perturbed_clifford_points(spec, theta, phi):
    """Closed form of perturbed_clifford at arbitrary parameters (for dense sampling)."""
    f0, ft, fp, n = clifford_frame(theta, phi)
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    dirs = {"normal": n, "tangent-theta": ft, "tangent-phi": fp}
    x = f0.copy()
    for mode in spec.modes:
        prof = mode.profile(theta, phi)
        if mode.component == "ambient":
            x[..., mode.axis] += prof
        else:
            x += prof[..., None] * dirs[mode.component]
    return project_to_sphere(x)


# --- geometry ----------------------------------------------------------------------


def _cofactor_normal(f, ft, fp):
    """Generalized cross product of three vectors in R^4 (not normalized)."""
    M = np.stack([f, ft, fp], axis=-2)  # (..., 3, 4)
    cols = [np.delete(M, i, axis=-1) for i in range(4)]
    return np.stack([(-1) ** (3 + i) * np.linalg.det(c) for i, c in enumerate(cols)], axis=-1)


def unit_normal(f):
    C = -_cofactor_normal(f.points, f.f_t, f.f_p)
    norm = np.linalg.norm(C, axis=-1, keepdims=True)
    if np.any(norm <= DET_TOL):
        raise DegenerateImmersion("normal undefined: f, f_theta, f_phi are linearly dependent")
    return C / norm


def _check_metric(f):
    E, F, G = f.metric()
    det = E * G - F**2
    bad = np.argwhere(det <= DET_TOL)
    if bad.size:
        i, j = bad[0]
        raise DegenerateImmersion(f"det g = {det[i, j]:.3e} at node ({i}, {j})")
    return E, F, G, det


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    grid: TorusGrid
    g: np.ndarray  # (..., 2, 2)
    N: np.ndarray
    A: np.ndarray  # (..., 2, 2)
    H: np.ndarray
    K: np.ndarray
    a_norm_sq: np.ndarray
    tracefree_sq: np.ndarray
    dA: np.ndarray

    @property
    def shape_operator(self):
        return np.linalg.solve(self.g, self.A)

    def principal_curvatures(self):
        """Eigenvalues of g^-1 A in ascending order."""
        S = self.shape_operator
        tr = S[..., 0, 0] + S[..., 1, 1]
        det = np.linalg.det(S)
        disc = np.sqrt(np.maximum(tr**2 / 4 - det, 0.0))
        return tr / 2 - disc, tr / 2 + disc


def pointwise_curvatures(x, xt, xp, xtt, xtp, xpp):
    """Metric, normal and curvatures from position and derivatives at any set of points.

    Returns a dict with E, F, G, det, N, Att, Atp, App, H, K, a_norm_sq.
    """
    E = np.einsum("...i,...i", xt, xt)
    F = np.einsum("...i,...i", xt, xp)
    G = np.einsum("...i,...i", xp, xp)
    det = E * G - F**2
    C = -_cofactor_normal(x, xt, xp)
    N = C / np.linalg.norm(C, axis=-1, keepdims=True)
    Att = np.einsum("...i,...i", xtt, N)
    Atp = np.einsum("...i,...i", xtp, N)
    App = np.einsum("...i,...i", xpp, N)
    # g^-1 A written out for the 2x2 case
    S11 = (G * Att - F * Atp) / det
    S12 = (G * Atp - F * App) / det
    S21 = (E * Atp - F * Att) / det
    S22 = (E * App - F * Atp) / det
    return dict(
        E=E, F=F, G=G, det=det, N=N, Att=Att, Atp=Atp, App=App,
        H=S11 + S22, K=1.0 + S11 * S22 - S12 * S21,
        a_norm_sq=S11**2 + 2 * S12 * S21 + S22**2,
    )


def compute_geometry(f):
    _check_metric(f)
    unit_normal(f)  # raises on a degenerate frame
    d = f.derivatives
    q = pointwise_curvatures(f.points, d["t"], d["p"], d["tt"], d["tp"], d["pp"])
    E, F, G = q["E"], q["F"], q["G"]
    g = np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)
    A = np.stack([np.stack([q["Att"], q["Atp"]], -1), np.stack([q["Atp"], q["App"]], -1)], -2)
    H = q["H"]
    return SurfaceGeometry(
        grid=f.grid, g=g, N=q["N"], A=A, H=H, K=q["K"],
        a_norm_sq=q["a_norm_sq"], tracefree_sq=q["a_norm_sq"] - H**2 / 2, dA=np.sqrt(q["det"]),
    )


def intrinsic_gauss_curvature(f):
    """Gauss curvature from the metric alone (Brioschi formula).

    Independent of the normal and of A; used to check the Gauss equation.
    """
    E, F, G = f.metric()
    grid = f.grid
    D = lambda x, a, b: spectral.diff(grid, x, a, b)
    Eu, Ev, Evv = D(E, 1, 0), D(E, 0, 1), D(E, 0, 2)
    Fu, Fv, Fuv = D(F, 1, 0), D(F, 0, 1), D(F, 1, 1)
    Gu, Gv, Guu = D(G, 1, 0), D(G, 0, 1), D(G, 2, 0)
    m1 = np.stack([
        np.stack([-Evv / 2 + Fuv - Guu / 2, Eu / 2, Fu - Ev / 2], -1),
        np.stack([Fv - Gu / 2, E, F], -1),
        np.stack([Gv / 2, F, G], -1),
    ], -2)
    z = np.zeros_like(E)
    m2 = np.stack([
        np.stack([z, Ev / 2, Gu / 2], -1),
        np.stack([Ev / 2, E, F], -1),
        np.stack([Gu / 2, F, G], -1),
    ], -2)
    return (np.linalg.det(m1) - np.linalg.det(m2)) / (E * G - F**2) ** 2


def willmore_energy(geom):
    """Integral of (1 + H^2/4) dA."""
    return spectral.integrate(geom.grid, (1.0 + geom.H**2 / 4) * geom.dA)


def area(geom):
    return spectral.integrate(geom.grid, geom.dA)


def total_gauss_curvature(geom):
    return spectral.integrate(geom.grid, geom.K * geom.dA)


def tracefree_energy(geom):
    return spectral.integrate(geom.grid, geom.tracefree_sq * geom.dA)


def ambient_second_form_energy(geom):
    """Integral of |A|^2 + 2: the full second fundamental form of f in R^4."""
    return spectral.integrate(geom.grid, (geom.a_norm_sq + 2.0) * geom.dA)


def mean_curvature_norm(geom, p=2):
    """||H||_{L^p(dmu)} for p in {1, 2}."""
    if p == 1:
        return spectral.integrate(geom.grid, np.abs(geom.H) * geom.dA)
    return float(np.sqrt(spectral.integrate(geom.grid, geom.H**2 * geom.dA)))


def mean_curvature_vector(f, geom):
    """H N - 2 f: the mean curvature vector of the surface viewed in R^4."""
    return geom.H[..., None] * geom.N - 2.0 * f.points


# --- files -------------------------------------------------------------------------


def dumps_surface(f):
    rows = ",\n    ".join(
        "[" + ", ".join(format(x, ".17g") for x in p) + "]" for p in f.flat()
    )
    return (
        "{\n"
        f'  "nTheta": {f.grid.n_theta},\n'
        f'  "nPhi": {f.grid.n_phi},\n'
        f'  "points": [\n    {rows}\n  ]\n'
        "}\n"
    )


def save_surface(path, f):
    Path(path).write_text(dumps_surface(f))


def loads_surface(text):
    data = json.loads(text)
    grid = TorusGrid(int(data["nTheta"]), int(data["nPhi"]))
    pts = np.asarray(data["points"], dtype=float).reshape(grid.shape + (4,))
    return Immersion(grid, pts)


def load_surface(path):
    return loads_surface(Path(path).read_text())


def load_perturbation(path):
    return PerturbationSpec.from_dict(json.loads(Path(path).read_text()))

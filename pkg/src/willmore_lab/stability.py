"""Linearized stability around the Clifford torus f0.

Pipeline for a surface f near f0:

1. rotate f into optimal position (orthogonal Procrustes over SO(4));
2. split h = f - f0 = v1 f0_theta + v2 f0_phi + z n + w f0;
3. write f*g = e^{2u} (a dth^2 + 2b dth dph + c dph^2), ac - b^2 = 1/4;
4. measure Sobolev distances, curvature and moduli gaps.
"""
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import least_squares

from . import spectral
from .errors import KernelObstruction, NotGraphLike, SingularCovariance
from .torus import (
    _check_metric,
    Immersion,
    area,
    clifford_frame,
    compute_geometry,
    mean_curvature_norm,
    willmore_energy,
)

CLIFFORD_W = 2.0 * np.pi**2
KERNEL_TOL = 1e-10

# Regression constants calibrated on the reference corpus (see scripts/calibrate_constants.py)
WEAK_Z_CONSTANT = 0.5
MODULI_AREA_CONSTANT = 0.1


def so4_basis():
    """The six elementary skew matrices E_ij = e_i e_j^T - e_j e_i^T, i < j."""
    out = []
    for i in range(4):
        for j in range(i + 1, 4):
            A = np.zeros((4, 4))
            A[i, j], A[j, i] = 1.0, -1.0
            out.append(((i, j), A))
    return out


def _clifford_fields(grid):
    return clifford_frame(*grid.mesh())


def cross_covariance(f):
    """M = integral of f0 f^T over d(theta) d(phi)."""
    f0 = _clifford_fields(f.grid)[0]
    return np.einsum("ija,ijb->ab", f0, f.points) * f.grid.cell_area


def procrustes_objective(R, f):
    f0 = _clifford_fields(f.grid)[0]
    diff = np.einsum("ab,ijb->ija", R, f.points) - f0
    return spectral.integrate(f.grid, np.einsum("...i,...i", diff, diff))


def rotate(R, f):
    return Immersion.from_points(f.grid, np.einsum("ab,ijb->ija", R, f.points))


def rotation_normalize(f, rtol=1e-10):
    """R in SO(4) minimizing the integral of |R f - f0|^2, and R f.

    The maximizer of tr(R C), C = M^T, is V diag(1, 1, 1, det) U^T for the SVD
    C = U S V^T; the sign flip sits on the smallest singular direction.
    """
    C = cross_covariance(f).T
    U, S, Vt = np.linalg.svd(C)
    if S[-1] <= rtol * S[0]:
        raise SingularCovariance(f"cross-covariance is singular (singular values {S})")
    D = np.eye(4)
    D[3, 3] = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ D @ U.T
    return R, rotate(R, f)


def balance_residuals(f):
    """The six integrals of <E_ij f, f0>; all vanish at a Procrustes optimum."""
    f0 = _clifford_fields(f.grid)[0]
    return {
        ij: spectral.integrate(f.grid, np.einsum("ab,ijb,ija->ij", A, f.points, f0))
        for ij, A in so4_basis()
    }


# --- deviation from f0 ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DeviationDecomposition:
    grid: spectral.TorusGrid
    h: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    z: np.ndarray
    w: np.ndarray

    def reconstruct(self):
        _, ft, fp, n = _clifford_fields(self.grid)
        f0 = _clifford_fields(self.grid)[0]
        return (self.v1[..., None] * ft + self.v2[..., None] * fp
                + self.z[..., None] * n + self.w[..., None] * f0)


def decompose_deviation(f):
    """Pointwise coordinates of h = f - f0 in the frame {f0_theta, f0_phi, n, f0}.

    |f0_theta|^2 = |f0_phi|^2 = 1/2, hence the factors 2.
    """
    f0, ft, fp, n = _clifford_fields(f.grid)
    cos_angle = np.einsum("...i,...i", f.points, f0)
    if np.min(cos_angle) <= 0.0:
        i, j = np.unravel_index(int(np.argmin(cos_angle)), cos_angle.shape)
        raise NotGraphLike(f"<f, f0> = {cos_angle[i, j]:.3g} <= 0 at node ({i}, {j})")
    h = f.points - f0
    dot = lambda a: np.einsum("...i,...i", h, a)
    return DeviationDecomposition(f.grid, h, 2.0 * dot(ft), 2.0 * dot(fp), dot(n), dot(f0))


# --- conformal structure ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConformalStructure:
    a: float
    b: float
    c: float
    u: np.ndarray
    defect: float

    @property
    def psi(self):
        return np.exp(2.0 * self.u) - 1.0

    def moduli_gap(self):
        return abs(self.a - 0.5) + abs(self.b) + abs(self.c - 0.5)


def _abc(x, y):
    """Upper half-plane coordinates of the flat metrics with ac - b^2 = 1/4."""
    return 1.0 / (2.0 * y), x / (2.0 * y), (x * x + y * y) / (2.0 * y)


def extract_conformal_structure(f):
    """u from e^{4u}/4 = det g, then the determinant-1/4 constant metric nearest e^{-2u} g.

    The pointwise least-squares problem reduces to fitting the mean of
    e^{-2u} g, since the Frobenius error splits into variance plus bias.
    """
    E, F, G, det = _check_metric(f)
    u = 0.25 * np.log(4.0 * det)
    s = np.exp(-2.0 * u)
    gh = np.stack([s * E, s * F, s * G])
    mean = gh.reshape(3, -1).mean(axis=1)

    def resid(p):
        a, b, c = _abc(*p)
        return np.array([mean[0] - a, np.sqrt(2.0) * (mean[1] - b), mean[2] - c])

    # start from the mean rescaled to determinant 1/4
    m = mean / (2.0 * np.sqrt(max(mean[0] * mean[2] - mean[1] ** 2, 1e-300)))
    y0 = 1.0 / (2.0 * m[0])
    sol = least_squares(resid, [m[1] / m[0], y0], bounds=([-np.inf, 1e-12], [np.inf, np.inf]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    a, b, c = _abc(*sol.x)
    pointwise = (gh[0] - a) ** 2 + 2.0 * (gh[1] - b) ** 2 + (gh[2] - c) ** 2
    return ConformalStructure(float(a), float(b), float(c), u, float(np.sqrt(pointwise.mean())))


# --- the operator Delta + 2 on the flat torus --------------------------------------


def _kernel_mask(grid):
    kt, kp = grid.wavenumbers
    return (kt[:, None] ** 2 + kp[None, :] ** 2) == 2


def kernel_project(grid, z):
    """(P_N z, z - P_N z) with N = Ker(Delta + 2) = span{cos/sin theta x cos/sin phi}."""
    coeffs = spectral.fft2(np.asarray(z, dtype=float))
    proj = spectral.ifft2_real(np.where(_kernel_mask(grid), coeffs, 0.0))
    return proj, z - proj


def helmholtz(grid, z):
    """(Delta + 2) z."""
    return spectral.laplacian(grid, z) + 2.0 * z


def solve_helmholtz(grid, rhs):
    """The solution in N-perp of (Delta + 2) z = rhs, mode by mode."""
    rhs = np.asarray(rhs, dtype=float)
    proj, _ = kernel_project(grid, rhs)
    obstruction = spectral.sobolev_norm(grid, proj, 0)
    if obstruction > KERNEL_TOL:
        raise KernelObstruction(f"rhs has a kernel component of L2 norm {obstruction:.3e}")
    kt, kp = grid.wavenumbers
    symbol = 2.0 - kt[:, None] ** 2 - kp[None, :] ** 2
    mask = _kernel_mask(grid)
    coeffs = spectral.fft2(rhs)
    return spectral.ifft2_real(np.where(mask, 0.0, coeffs / np.where(mask, 1.0, symbol)))


def spectral_gap_constant(grid):
    """max over resolved |k|^2 != 2 of (1 + |k|^2) / |2 - |k|^2|.

    The sharp constant in ||z||_{W^{1,2}} <= G ||(Delta + 2) z||_{W^{-1,2}} on N-perp.
    """
    k2 = np.subtract(spectral.mode_weights(grid), 1.0)
    ok = ~_kernel_mask(grid)
    return float(np.max((1.0 + k2[ok]) / np.abs(2.0 - k2[ok])))


def gap_ratio(grid, z):
    return spectral.sobolev_norm(grid, z, 1) / spectral.sobolev_norm(grid, helmholtz(grid, z), -1)


# --- residual diagnostics ---------------------------------------------------------


def cr_residual(dec, cs, f=None):
    """Residuals of the Cauchy-Riemann system satisfied by (v1, v2).

    r1 = v1_th - v2_ph - [e^{2u}(a - c) + 2z - |h_th|^2 + |h_ph|^2]
    r2 = v1_ph + v2_th - [2 e^{2u} b - 2 h_th . h_ph]
    Both vanish identically when f is conformally parametrized.
    """
    grid = dec.grid
    d = lambda x, a, b: spectral.diff(grid, x, a, b)
    h_t, h_p = d(dec.h, 1, 0), d(dec.h, 0, 1)
    e2u = np.exp(2.0 * cs.u)
    ht2 = np.einsum("...i,...i", h_t, h_t)
    hp2 = np.einsum("...i,...i", h_p, h_p)
    htp = np.einsum("...i,...i", h_t, h_p)
    r1 = d(dec.v1, 1, 0) - d(dec.v2, 0, 1) - (e2u * (cs.a - cs.c) + 2.0 * dec.z - ht2 + hp2)
    r2 = d(dec.v1, 0, 1) + d(dec.v2, 1, 0) - (2.0 * e2u * cs.b - 2.0 * htp)
    return r1, r2


def weak_z_residual(dec, cs, test_modes):
    """For k = cos(m theta + n phi): integral of grad k . grad z - (2 + psi) k z."""
    grid = dec.grid
    T, P = grid.mesh()
    z_t = spectral.diff(grid, dec.z, 1, 0)
    z_p = spectral.diff(grid, dec.z, 0, 1)
    out = []
    for m, n in test_modes:
        k = np.cos(m * T + n * P)
        k_t, k_p = -m * np.sin(m * T + n * P), -n * np.sin(m * T + n * P)
        integrand = k_t * z_t + k_p * z_p - (2.0 + cs.psi) * k * dec.z
        out.append(spectral.integrate(grid, integrand))
    return out


def test_function_norm(grid, m, n):
    return spectral.sobolev_norm(grid, spectral.trig_mode(grid, m, n), 1)


# --- reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    willmore: float
    delta: float
    distW22: float
    distW12: float
    hL2: float
    hL1: float
    uInf: float
    moduliGap: float
    areaGap: float
    conformalDefect: float
    a: float
    b: float
    c: float
    ratioW22toHL2: float = None
    ratioW22toDelta: float = None

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _ratio(num, den):
    return num / den if den > 1e-10 else None


def stability_report(f_raw):
    """Procrustes normalization, decomposition, conformal structure and norms of one surface."""
    _, f = rotation_normalize(f_raw)
    dec = decompose_deviation(f)
    cs = extract_conformal_structure(f)
    geom = compute_geometry(f)
    W = willmore_energy(geom)
    delta = float(np.sqrt(max(W - CLIFFORD_W, 0.0)))
    w22 = spectral.sobolev_norm(f.grid, dec.h, 2)
    hl2 = mean_curvature_norm(geom, 2)
    return StabilityReport(
        willmore=W,
        delta=delta,
        distW22=w22,
        distW12=spectral.sobolev_norm(f.grid, dec.h, 1),
        hL2=hl2,
        hL1=mean_curvature_norm(geom, 1),
        uInf=spectral.sup_norm(cs.u),
        moduliGap=cs.moduli_gap(),
        areaGap=abs(area(geom) - CLIFFORD_W),
        conformalDefect=cs.defect,
        a=cs.a, b=cs.b, c=cs.c,
        ratioW22toHL2=_ratio(w22, hl2),
        ratioW22toDelta=_ratio(w22, delta),
    )


def loglog_slope(x, y):
    """Least-squares slope of log y against log x over the positive pairs."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])

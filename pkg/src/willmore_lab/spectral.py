"""Fourier calculus on the flat torus S^1 x S^1 = [0, 2pi)^2.

Fields are numpy arrays whose first two axes run over the (theta, phi)
lattice; any trailing axes (e.g. the four components of an immersion) are
carried along untouched.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import UnsupportedOrder

TWO_PI = 2.0 * np.pi
FOUR_PI_SQ = 4.0 * np.pi**2


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic lattice theta_i = 2 pi i / n_theta, phi_j = 2 pi j / n_phi."""

    n_theta: int
    n_phi: int

    def __post_init__(self):
        for name in ("n_theta", "n_phi"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n!r}")

    @classmethod
    def parse(cls, text):
        """Parse ``"128x64"`` (or a bare ``"128"`` for a square grid)."""
        parts = str(text).lower().split("x")
        if len(parts) == 1:
            parts = parts * 2
        if len(parts) != 2:
            raise ValueError(f"grid must look like NxM, got {text!r}")
        return cls(int(parts[0]), int(parts[1]))

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    @property
    def theta(self):
        return TWO_PI * np.arange(self.n_theta) / self.n_theta

    @property
    def phi(self):
        return TWO_PI * np.arange(self.n_phi) / self.n_phi

    def mesh(self):
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    @property
    def cell_area(self):
        """Coordinate area d(theta) d(phi) carried by each node."""
        return FOUR_PI_SQ / (self.n_theta * self.n_phi)

    @cached_property
    def wavenumbers(self):
        """Integer wavenumbers (k_theta, k_phi) in numpy FFT ordering."""
        kt = np.fft.fftfreq(self.n_theta, 1.0 / self.n_theta)
        kp = np.fft.fftfreq(self.n_phi, 1.0 / self.n_phi)
        return kt, kp

    def resolves(self, m, n):
        return abs(m) < self.n_theta // 2 and abs(n) < self.n_phi // 2

    def __str__(self):
        return f"{self.n_theta}x{self.n_phi}"


def _expand(symbol, ndim):
    return symbol.reshape(symbol.shape + (1,) * (ndim - 2))


def _first_symbol(n):
    k = np.fft.fftfreq(n, 1.0 / n)
    sym = 1j * k
    sym[n // 2] = 0.0  # Nyquist mode has no real-valued derivative
    return sym


def _second_symbol(n):
    k = np.fft.fftfreq(n, 1.0 / n)
    return -(k**2) + 0j


def _check(grid, field):
    if field.shape[:2] != grid.shape:
        raise ValueError(f"field of shape {field.shape} does not live on grid {grid}")


def fft2(field):
    return np.fft.fft2(field, axes=(0, 1))


def ifft2_real(coeffs):
    return np.fft.ifft2(coeffs, axes=(0, 1)).real


def derivative_symbol(grid, order_theta, order_phi):
    """Fourier multiplier of d^a/dtheta^a d^b/dphi^b for a, b in {0, 1, 2}."""
    table = {0: lambda n: np.ones(n, dtype=complex), 1: _first_symbol, 2: _second_symbol}
    st = table[order_theta](grid.n_theta)
    sp = table[order_phi](grid.n_phi)
    return st[:, None] * sp[None, :]


def diff(grid, field, order_theta=0, order_phi=0, coeffs=None):
    """Spectral partial derivative of a real field."""
    field = np.asarray(field)
    _check(grid, field)
    if coeffs is None:
        coeffs = fft2(field)
    sym = _expand(derivative_symbol(grid, order_theta, order_phi), field.ndim)
    return ifft2_real(coeffs * sym)


def derivative_cache(grid, field):
    """All derivatives up to order two, sharing one forward transform."""
    coeffs = fft2(field)
    return {
        name: diff(grid, field, a, b, coeffs=coeffs)
        for name, (a, b) in {
            "t": (1, 0),
            "p": (0, 1),
            "tt": (2, 0),
            "tp": (1, 1),
            "pp": (0, 2),
        }.items()
    }


def laplacian(grid, field):
    """Flat Laplacian d^2/dtheta^2 + d^2/dphi^2."""
    coeffs = fft2(field)
    sym = derivative_symbol(grid, 2, 0) + derivative_symbol(grid, 0, 2)
    return ifft2_real(coeffs * _expand(sym, np.ndim(field)))


def integrate(grid, field):
    """Trapezoidal rule for the integral over d(theta) d(phi).

    Spectrally accurate for smooth periodic integrands and exact for
    trigonometric polynomials resolved by the grid.
    """
    field = np.asarray(field)
    _check(grid, field)
    return float(np.sum(field) * grid.cell_area)


def fourier_coefficients(grid, field):
    """h_k = (1/4pi^2) * integral of h exp(-i k.x), in numpy FFT ordering."""
    field = np.asarray(field)
    _check(grid, field)
    return fft2(field) / (grid.n_theta * grid.n_phi)


def mode_weights(grid):
    kt, kp = grid.wavenumbers
    return 1.0 + kt[:, None] ** 2 + kp[None, :] ** 2


def sobolev_norm(grid, field, s):
    """H^s norm (4 pi^2 sum (1+|k|^2)^s |h_k|^2)^(1/2); vector fields sum componentwise.

    s = -1 is the spectral dual of the W^{1,2} norm.
    """
    if s not in (-1, 0, 1, 2):
        raise UnsupportedOrder(f"Sobolev order must be one of -1, 0, 1, 2; got {s!r}")
    coeffs = fourier_coefficients(grid, field)
    power = np.abs(coeffs) ** 2
    if power.ndim > 2:
        power = power.reshape(grid.shape + (-1,)).sum(axis=-1)
    return float(np.sqrt(FOUR_PI_SQ * np.sum(mode_weights(grid) ** s * power)))


def sup_norm(field):
    """Max over nodes of |field| (Euclidean norm per node for vector fields)."""
    field = np.asarray(field, dtype=float)
    if field.ndim > 2:
        field = np.linalg.norm(field.reshape(field.shape[:2] + (-1,)), axis=-1)
    return float(np.max(np.abs(field))) if field.size else 0.0


def trig_mode(grid, m, n, phase=0.0):
    """cos(m theta + n phi + phase) sampled on the grid."""
    T, P = grid.mesh()
    return np.cos(m * T + n * P + phase)


def trig_interpolate(grid, field, theta, phi, rel_tol=1e-15, chunk=65536):
    """Evaluate the trigonometric interpolant of ``field`` at scattered points.

    Coefficients below ``rel_tol`` times the largest one are dropped, so
    band-limited fields are evaluated exactly and cheaply.
    """
    field = np.asarray(field)
    _check(grid, field)
    coeffs = fourier_coefficients(grid, field)
    flat = coeffs.reshape(grid.shape + (-1,))
    mag = np.abs(flat).max(axis=-1)
    keep = mag > rel_tol * mag.max() if mag.max() > 0 else np.zeros_like(mag, dtype=bool)
    ii, jj = np.nonzero(keep)
    kt, kp = grid.wavenumbers
    kt_sel, kp_sel = kt[ii], kp[jj]
    c_sel = flat[ii, jj]
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    shape = theta.shape
    theta, phi = theta.ravel(), phi.ravel()
    out = np.empty((theta.size, flat.shape[-1]))
    for start in range(0, theta.size, chunk):
        sl = slice(start, start + chunk)
        phase = np.exp(1j * (np.outer(theta[sl], kt_sel) + np.outer(phi[sl], kp_sel)))
        out[sl] = (phase @ c_sel).real
    return out.reshape(shape + field.shape[2:])


def trig_resample(grid, field, theta_nodes, phi_nodes):
    """Interpolant of ``field`` on the tensor grid theta_nodes x phi_nodes.

    Separable evaluation (two dense matrix products), so arbitrary 1-D node
    sets cost O(n^3) rather than O(n^4).
    """
    field = np.asarray(field)
    _check(grid, field)
    coeffs = fourier_coefficients(grid, field)
    kt, kp = grid.wavenumbers
    Et = np.exp(1j * np.outer(np.asarray(theta_nodes, float), kt))
    Ep = np.exp(1j * np.outer(np.asarray(phi_nodes, float), kp))
    flat = coeffs.reshape(grid.shape + (-1,))
    out = np.einsum("ik,klc,jl->ijc", Et, flat, Ep, optimize=True).real
    return out.reshape((len(Et), len(Ep)) + field.shape[2:])

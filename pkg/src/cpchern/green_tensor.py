"""Reflection Green tensor of a conducting sheet, evaluated at the atom.

For an atom at height ``z0`` above the sheet (Gaussian units, c = 1)

    G_xx =  (i/2) w^2 int_0^inf dk k/k_z e^{2 i k_z z0} (r_ss - (k_z/w)^2 r_pp)
    G_xy =  (i/2) w   int_0^inf dk k     e^{2 i k_z z0} (r_ps + r_sp)

with ``G_yy = G_xx`` and ``G_yx = -G_xy``.  The k integral is never done in k
directly: below the light cone it is rewritten in k_z, which removes the
inverse square-root endpoint singularity, and above it in
``kappa = -i k_z``.  On the imaginary frequency axis the natural variable is
``q = sqrt(xi^2 + k^2)`` and the integrand is real.

Every routine takes ``dz_order``: the n-th derivative with respect to z0,
obtained by differentiating under the integral (a factor ``(2 i k_z)^n``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conductivity import ConductivityTensor
from .constants import ALPHA
from .numerics import (
    DEFAULT_SPEC,
    QuadratureSpec,
    adaptive_quad,
    semi_infinite_quad,
    upper_incomplete_gamma,
)
from .reflection import reflection_poles, sheet_coefficients, sheet_couplings

__all__ = [
    "GreenPair",
    "green_real_freq",
    "green_imag_axis",
    "green_nondispersive_closed",
    "green_farfield",
    "green_kpar_direct",
    "green_from_sigma_real",
    "green_real_freq_split",
]


@dataclass(frozen=True)
class GreenPair:
    """``(G_xx, G_xy)`` at the source point; ``G_yy = G_xx``, ``G_yx = -G_xy``."""

    xx: complex
    xy: complex

    @property
    def yy(self):
        return self.xx

    @property
    def yx(self):
        return -self.xy

    def tensor(self) -> np.ndarray:
        """In-plane 2x2 block ``[[xx, xy], [yx, yy]]``."""
        return np.array([[self.xx, self.xy], [-self.xy, self.xx]])


def _check_height(z0):
    if not z0 > 0:
        raise ValueError("z0 must be positive")


def _guided_mode_breaks(s, h, k0):
    """Positions in kappa of sheet modes lying close to the evanescent branch."""
    breaks = []
    for lam in reflection_poles(s, h):
        kappa = -1j * lam * k0
        if kappa.real > 0 and abs(kappa.imag) <= kappa.real:
            width = abs(kappa.imag)
            breaks.append(kappa.real)
            for m in (1.0, 10.0):
                if width > 0:
                    breaks.extend([kappa.real - m * width, kappa.real + m * width])
    return [b for b in breaks if b > 0]


def green_real_freq_split(sigma: ConductivityTensor, omega: float, z0: float,
                          spec: QuadratureSpec = DEFAULT_SPEC,
                          dz_order: int = 0) -> tuple[GreenPair, GreenPair]:
    """Propagating (k < omega) and evanescent (k > omega) parts of the real-frequency tensor."""
    _check_height(z0)
    if not omega > 0:
        raise ValueError("omega must be positive")
    s, h = sheet_couplings(sigma)
    s, h = complex(s), complex(h)
    if s == 0 and h == 0:
        return GreenPair(0j, 0j), GreenPair(0j, 0j)
    k0 = float(omega)
    n = dz_order

    def coefficients(lam):
        if s == 0:
            zero = np.zeros_like(lam)
            return sheet_coefficients(zero, zero, h)
        return sheet_coefficients(s / lam, s * lam, h)

    def propagating(kz):
        lam = kz / k0
        r_ss, r_sp, r_pp = coefficients(lam.astype(complex))
        phase = np.exp(2j * kz * z0) * (2j * kz) ** n
        return np.stack([phase * (r_ss - lam * lam * r_pp), phase * kz * 2.0 * r_sp])

    def evanescent(kappa):
        lam = 1j * kappa / k0
        r_ss, r_sp, r_pp = coefficients(lam)
        weight = np.exp(-2.0 * kappa * z0) * (-2.0 * kappa) ** n
        return np.stack([weight * (r_ss - lam * lam * r_pp), weight * kappa * 2.0 * r_sp])

    prop, _ = adaptive_quad(propagating, 0.0, k0, spec)
    breaks = _guided_mode_breaks(s, h, k0) + [k0]
    if s != 0:
        breaks.append(abs(s) * k0)
    evan, _ = semi_infinite_quad(evanescent, 1.0 / (2.0 * z0), spec, points=breaks)
    # dk k/k_z = -dk_z below the light cone and dk k/k_z = -i dkappa above it
    propagating = GreenPair(complex(0.5j * k0**2 * prop[0]), complex(0.5j * k0 * prop[1]))
    evanescent = GreenPair(complex(0.5 * k0**2 * evan[0]), complex(0.5j * k0 * evan[1]))
    return propagating, evanescent


def green_from_sigma_real(sigma: ConductivityTensor, omega: float, z0: float,
                          spec: QuadratureSpec = DEFAULT_SPEC, dz_order: int = 0) -> GreenPair:
    """Real-frequency Green tensor of a sheet with given local conductivity."""
    prop, evan = green_real_freq_split(sigma, omega, z0, spec, dz_order)
    return GreenPair(prop.xx + evan.xx, prop.xy + evan.xy)


def green_real_freq(surface, omega: float, z0: float, spec: QuadratureSpec = DEFAULT_SPEC,
                    dz_order: int = 0) -> GreenPair:
    """Green tensor at real frequency ``omega`` for any surface model."""
    return green_from_sigma_real(surface.sigma_real(omega), omega, z0, spec, dz_order)


def green_imag_axis(surface, xi: float, z0: float, spec: QuadratureSpec = DEFAULT_SPEC,
                    dz_order: int = 0) -> GreenPair:
    """Green tensor at imaginary frequency ``i xi``; the result is real.

    With ``q = sqrt(xi^2 + k^2)`` running over ``[xi, inf)``:

        G_xx = -(xi^2/2) int dq e^{-2 q z0} r_ss + (1/2) int dq q^2 e^{-2 q z0} r_pp
        G_xy = -xi int dq q e^{-2 q z0} r_sp

    At ``xi = 0`` the analytic limit is used: ``s/lam -> 0`` while
    ``s*lam -> 2 pi alpha q d(sigma_xx)/d(xi)``.
    """
    _check_height(z0)
    if not xi >= 0:
        raise ValueError("xi must be non-negative")
    sigma = surface.sigma_imag(xi)
    s, h = sheet_couplings(sigma)
    s, h = float(np.real(s)), float(np.real(h))
    static_b = 2.0 * np.pi * ALPHA * surface.xx_imag_slope() if xi == 0 else 0.0
    if s == 0 and h == 0 and static_b == 0:
        return GreenPair(0.0, 0.0)
    n = dz_order

    def integrand(p):
        q = xi + p
        if xi == 0:
            a = np.zeros_like(q)
            b = static_b * q
        else:
            a = s * xi / q
            b = s * q / xi
        r_ss, r_sp, r_pp = sheet_coefficients(a, b, h)
        weight = np.exp(-2.0 * q * z0) * (-2.0 * q) ** n
        xx = weight * (-0.5 * xi * xi * r_ss.real + 0.5 * q * q * r_pp.real)
        xy = weight * (-xi * q * r_sp.real)
        return np.stack([xx, xy])

    value, _ = semi_infinite_quad(integrand, 1.0 / (2.0 * z0), spec)
    return GreenPair(float(value[0]), float(value[1]))


def _hall_factors(C: int):
    ca = C * ALPHA
    return ca * ca / (1.0 + ca * ca), ca / (1.0 + ca * ca)


def green_nondispersive_closed(C: int, xi, z0: float, dz_order: int = 0) -> GreenPair:
    """Closed form for the quantized Hall sheet at imaginary frequency.

    ``xi`` may be an array.  ``dz_order=1`` gives the z0-derivative.
    """
    _check_height(z0)
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("xi must be non-negative")
    if dz_order not in (0, 1):
        raise ValueError("dz_order must be 0 or 1")
    diag, off = _hall_factors(C)
    x = 2.0 * xi * z0
    decay = np.exp(-x)
    gamma3 = upper_incomplete_gamma(3, x)
    if dz_order == 0:
        xx = xi**2 / (4.0 * z0) * decay + gamma3 / (16.0 * z0**3)
        xy = (xi**2 / (2.0 * z0) + xi / (4.0 * z0**2)) * decay
    else:
        xx = (-xi**2 / (4.0 * z0**2) - xi**3 / z0) * decay - 3.0 * gamma3 / (16.0 * z0**4)
        xy = (-xi**2 / (2.0 * z0**2) - xi / (2.0 * z0**3)
              - xi**3 / z0 - xi**2 / (2.0 * z0**2)) * decay
    xx, xy = diag * xx, off * xy
    if xi.ndim == 0:
        return GreenPair(float(xx), float(xy))
    return GreenPair(xx, xy)


def green_farfield(C: int, xi: float, z0: float) -> GreenPair:
    """Exponential form of the quantized-Hall Green tensor used for far-field work."""
    _check_height(z0)
    diag, off = _hall_factors(C)
    decay = np.exp(-2.0 * xi * z0)
    xx = diag * (xi**2 / (2.0 * z0) + xi / (4.0 * z0**2) + 1.0 / (8.0 * z0**3)) * decay
    xy = off * (xi**2 / (2.0 * z0) + xi / (4.0 * z0**2)) * decay
    return GreenPair(float(xx), float(xy))


def green_kpar_direct(sigma: ConductivityTensor, omega: complex, z0: float,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> GreenPair:
    """Integrate the k_par representation literally at a complex frequency.

    Meant for frequencies off the real axis (``Im omega > 0``), where
    ``k_z = sqrt(omega^2 - k^2)`` never vanishes along the path.  It shares no
    change of variables with :func:`green_imag_axis` and serves as an
    independent route to the same numbers.
    """
    _check_height(z0)
    omega = complex(omega)
    if not omega.imag > 0:
        raise ValueError("green_kpar_direct needs Im(omega) > 0")
    s, h = sheet_couplings(sigma)
    s, h = complex(s), complex(h)

    def integrand(k):
        kz = np.sqrt(omega * omega - k * k + 0j)
        kz = np.where(kz.imag < 0, -kz, kz)
        lam = kz / omega
        r_ss, r_sp, r_pp = sheet_coefficients(s / lam, s * lam, h)
        phase = np.exp(2j * kz * z0)
        xx = k / kz * phase * (r_ss - lam * lam * r_pp)
        xy = k * phase * 2.0 * r_sp
        return np.stack([xx, xy])

    value, _ = semi_infinite_quad(integrand, 1.0 / (2.0 * z0), spec, points=[abs(omega)])
    return GreenPair(complex(0.5j * omega**2 * value[0]), complex(0.5j * omega * value[1]))

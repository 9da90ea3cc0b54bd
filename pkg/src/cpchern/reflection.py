"""Reflection matrix of a conducting sheet in vacuum (Gaussian units, c = 1).

A sheet at z = 0 carrying the surface current ``K = sigma . E_par`` reflects a
plane wave of in-plane wavenumber ``k_par`` with coefficients that depend only
on the dimensionless couplings

    s = 2 pi sigma_xx / c = 2 pi alpha sigma_xx / (e^2/hbar),
    h = 2 pi sigma_xy / c = 2 pi alpha sigma_xy / (e^2/hbar),

and on ``lam = k_z / (omega / c)``.  Solving the boundary conditions (E_par
continuous, jump of H_par fixed by K) gives, with ``D = (1 + s/lam)(1 + s lam) + h^2``,

    r_ss = -[(s/lam)(1 + s lam) + h^2] / D
    r_pp = [s lam + s^2 + h^2] / D
    r_sp = r_ps = -h / D.

The s/p basis is ``s = k_hat x z_hat`` and ``p_(+-) = (k_par z_hat -+ k_z k_hat) / k``,
the one in which the reflection Green tensor takes the form used in
:mod:`cpchern.green_tensor`.  For ``sigma = (0, C e^2/h)`` these reduce to
``r_ss = -r_pp = -(C alpha)^2/(1 + (C alpha)^2)``, ``r_sp = -C alpha/(1 + (C alpha)^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conductivity import ConductivityTensor, FrequencyArgument
from .constants import ALPHA

__all__ = [
    "ReflectionMatrix",
    "KinematicPoint",
    "sheet_couplings",
    "sheet_coefficients",
    "reflection_matrix",
    "reflection_nondispersive",
    "reflection_poles",
]


@dataclass(frozen=True)
class ReflectionMatrix:
    ss: complex
    sp: complex
    ps: complex
    pp: complex

    def as_array(self) -> np.ndarray:
        return np.array([[self.ss, self.sp], [self.ps, self.pp]])


@dataclass(frozen=True)
class KinematicPoint:
    """A (frequency, in-plane wavenumber) pair with the physical branch of k_z."""

    freq: FrequencyArgument
    k_par: float

    def __post_init__(self):
        if not self.k_par >= 0:
            raise ValueError("k_par must be non-negative")
        if self.freq.value == 0 and self.k_par == 0:
            raise ValueError("omega = 0 needs k_par > 0")

    @property
    def k_z(self) -> complex:
        """Normal wavenumber with Im k_z >= 0 (and k_z >= 0 when propagating)."""
        if self.freq.kind == "imag":
            return 1j * np.sqrt(self.freq.value**2 + self.k_par**2)
        w = self.freq.value
        if self.k_par <= w:
            return complex(np.sqrt(w * w - self.k_par**2))
        return 1j * np.sqrt(self.k_par**2 - w * w)

    @property
    def lam(self) -> complex:
        """``k_z / (omega/c)``; infinite for omega = 0."""
        k0 = self.freq.complex_value
        if k0 == 0:
            return complex(np.inf)
        return self.k_z / k0


def sheet_couplings(sigma: ConductivityTensor):
    """Return ``(s, h)`` for a conductivity tensor in units of e^2/hbar."""
    scale = 2.0 * np.pi * ALPHA
    return scale * np.asarray(sigma.xx), scale * np.asarray(sigma.xy)


def sheet_coefficients(s_over_lam, s_times_lam, h):
    """Core formulas in terms of ``a = s/lam`` and ``b = s*lam``.

    Passing ``a`` and ``b`` separately keeps the limits finite: ``lam -> 0``
    with ``s != 0`` is ``a = inf`` (handled here), and ``omega -> 0`` on the
    imaginary axis is ``a = 0`` with ``b`` set by the static polarizability.
    Returns ``(r_ss, r_sp, r_pp)``; ``r_ps`` equals ``r_sp``.
    """
    a = np.asarray(s_over_lam, dtype=complex)
    b = np.asarray(s_times_lam, dtype=complex)
    h = np.asarray(h, dtype=complex)
    a, b, h = np.broadcast_arrays(a, b, h)
    cone = np.isinf(a)
    a_f = np.where(cone, 0.0, a)
    denom = (1.0 + a_f) * (1.0 + b) + h * h
    r_ss = -(a_f * (1.0 + b) + h * h) / denom
    r_pp = (b + a_f * b + h * h) / denom
    r_sp = -h / denom
    if np.any(cone):
        # lam -> 0 at fixed s != 0: the sheet screens the grazing s wave completely.
        r_ss = np.where(cone, -1.0, r_ss)
        r_pp = np.where(cone, 0.0, r_pp)
        r_sp = np.where(cone, 0.0, r_sp)
    return _scalar(r_ss), _scalar(r_sp), _scalar(r_pp)


def _scalar(x):
    return x.item() if np.ndim(x) == 0 else x


def reflection_matrix(sigma: ConductivityTensor, point: KinematicPoint) -> ReflectionMatrix:
    s, h = sheet_couplings(sigma)
    s = complex(s)
    lam = point.lam
    if s == 0:
        a, b = 0.0, 0.0
    elif np.isinf(lam):
        raise ValueError("omega = 0 with sigma_xx != 0 needs the static limit; "
                         "use sheet_coefficients with s*lam supplied directly")
    elif lam == 0:
        a, b = np.inf, 0.0
    else:
        a, b = s / lam, s * lam
    r_ss, r_sp, r_pp = sheet_coefficients(a, b, h)
    return ReflectionMatrix(r_ss, r_sp, r_sp, r_pp)


def reflection_nondispersive(C: int) -> ReflectionMatrix:
    ca = C * ALPHA
    diag = ca * ca / (1.0 + ca * ca)
    off = -ca / (1.0 + ca * ca)
    return ReflectionMatrix(-diag, off, off, diag)


def reflection_poles(s: complex, h: complex):
    """Roots in ``lam`` of ``(lam + s)(1 + s lam) + h^2 lam = 0``.

    These are the guided modes of the sheet; on the evanescent branch
    ``lam = i kappa / k0`` a root close to the positive imaginary axis makes
    the k_par integrand sharply peaked.
    """
    s = complex(s)
    h = complex(h)
    if s == 0:
        return np.array([], dtype=complex)
    return np.roots([s, 1.0 + s * s + h * h, s])

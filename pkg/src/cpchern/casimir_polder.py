"""Casimir-Polder shifts and forces of a circularly polarized two-level atom.

Natural units c = hbar = 1 throughout.  Lengths, frequencies and energies are
whatever the caller uses for the surface (``t`` for the lattice model,
``omega10`` for a quantized Hall sheet).  The dipole moment enters only as
``mu**2``, an energy times a length cubed.

The transition dipole is ``mu10 = mu (1, +-i, 0)/sqrt(2)`` (right / left) with
``mu01 = conj(mu10)``.  Contracting a dipole pair ``(p, q)`` with the in-plane
Green tensor ``[[G_xx, G_xy], [-G_xy, G_xx]]`` needs just two numbers,

    P = p_x q_x + p_y q_y      (symmetric part,  multiplies G_xx)
    Q = p_x q_y - p_y q_x      (antisymmetric part, multiplies G_xy)

and every shift below is written in terms of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conductivity import QuantizedHallSurface
from .constants import ALPHA
from .green_tensor import GreenPair, green_imag_axis, green_nondispersive_closed, green_real_freq
from .numerics import DEFAULT_SPEC, QuadratureSpec, semi_infinite_quad

__all__ = [
    "TwoLevelAtom",
    "ResonantComponents",
    "Nondimensional",
    "CpResult",
    "resonant_shift",
    "resonant_shift_components",
    "nonresonant_shift",
    "farfield_shift",
    "farfield_force",
    "farfield_force_zero",
    "repulsion_window",
    "force_numeric",
    "transition_rate",
    "nondimensionalize",
    "slope_sign_changes",
    "detrended_correlation",
]

_POLARIZATIONS = {"right": 1, "left": -1}


@dataclass(frozen=True)
class TwoLevelAtom:
    """Two-level atom with a circular transition dipole about the surface normal."""

    mu: float
    omega10: float
    polarization: str = "right"

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.omega10 > 0:
            raise ValueError("omega10 must be positive")
        if self.polarization not in _POLARIZATIONS:
            raise ValueError("polarization must be 'right' or 'left'")

    @property
    def handedness(self) -> int:
        """+1 for right, -1 for left circular polarization."""
        return _POLARIZATIONS[self.polarization]

    @property
    def dipole10(self) -> np.ndarray:
        """``<1|mu|0>`` as an in-plane (x, y) vector."""
        return self.mu * np.array([1.0, 1j * self.handedness]) / np.sqrt(2.0)

    @property
    def dipole01(self) -> np.ndarray:
        return self.dipole10.conj()


@dataclass(frozen=True)
class ResonantComponents:
    """Additive pieces of the resonant shift, dimensional and in units of R10."""

    term_xx: float
    term_xy: float
    term_xx_nd: float
    term_xy_nd: float

    @property
    def total(self) -> float:
        return self.term_xx + self.term_xy

    @property
    def total_nd(self) -> float:
        return self.term_xx_nd + self.term_xy_nd


@dataclass(frozen=True)
class Nondimensional:
    eta: float
    delta_omega_tilde: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class CpResult:
    resonant_shift: float
    nonresonant_shift: float
    force: float
    z0: float


def _pair_weights(p, q):
    P = p[0] * q[0] + p[1] * q[1]
    Q = p[0] * q[1] - p[1] * q[0]
    return P, Q


def _check_height(z0):
    if not z0 > 0:
        raise ValueError("z0 must be positive")


def _check_state(state):
    if state not in ("upper", "lower"):
        raise ValueError("state must be 'upper' or 'lower'")


def _resonant_from_green(atom: TwoLevelAtom, g: GreenPair) -> tuple[float, float]:
    """``-(1/2) mu10_a (G_ab + G*_ba) mu01_b`` split into its G_xx and G_xy parts."""
    p, q = atom.dipole10, atom.dipole01
    P, Q = _pair_weights(p, q)
    # G_ab + G*_ba contracted: P (G_xx + G_xx*) + Q (G_xy - G_xy*)
    term_xx = -0.5 * (P * (g.xx + np.conj(g.xx)))
    term_xy = -0.5 * (Q * (g.xy - np.conj(g.xy)))
    return float(np.real(term_xx)), float(np.real(term_xy))


def resonant_shift_components(atom: TwoLevelAtom, surface, z0: float,
                              spec: QuadratureSpec = DEFAULT_SPEC) -> ResonantComponents:
    """The two additive parts of the resonant shift of the upper state.

    ``term_xx = -mu^2 Re G_xx`` and ``term_xy = -+mu^2 Im G_xy`` (upper sign for
    right polarization).  The ``_nd`` fields divide by ``R10 = 4 w^3 mu^2 / 3``.
    """
    _check_height(z0)
    g = green_real_freq(surface, atom.omega10, z0, spec)
    term_xx, term_xy = _resonant_from_green(atom, g)
    rate = transition_rate(atom)
    return ResonantComponents(term_xx, term_xy, term_xx / rate, term_xy / rate)


def resonant_shift(atom: TwoLevelAtom, surface, z0: float,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Resonant shift ``-mu^2 (Re G_xx +- Im G_xy)`` of the excited state at ``omega10``."""
    return resonant_shift_components(atom, surface, z0, spec).total


def _nonresonant(atom, surface, z0, state, spec, dz_order, closed_form):
    if state == "lower":
        p, q, w = atom.dipole01, atom.dipole10, -atom.omega10
    else:
        p, q, w = atom.dipole10, atom.dipole01, atom.omega10
    P, Q = _pair_weights(p, q)
    # (1/pi) int dxi [w P G_xx - xi (Q/i) G_xy] / (w^2 + xi^2); P and Q/i are real.
    P, Q_over_i = float(np.real(P)), float(np.real(Q / 1j))
    if closed_form and not isinstance(surface, QuantizedHallSurface):
        raise ValueError("closed_form needs a QuantizedHallSurface")

    def integrand(xis):
        if closed_form:
            g = green_nondispersive_closed(surface.C, xis, z0, dz_order)
            gxx, gxy = g.xx, g.xy
        else:
            gxx = np.empty(xis.size)
            gxy = np.empty(xis.size)
            for i, xi in enumerate(xis):
                g = green_imag_axis(surface, float(xi), z0, spec, dz_order)
                gxx[i], gxy[i] = g.xx, g.xy
        denom = w * w + xis * xis
        return np.stack([w * P * gxx / denom, -xis * Q_over_i * gxy / denom])

    scale = min(1.0 / (2.0 * z0), atom.omega10)
    value, _ = semi_infinite_quad(integrand, scale, spec)
    return float(value.sum() / np.pi)


def nonresonant_shift(atom: TwoLevelAtom, surface, z0: float, state: str = "lower",
                      spec: QuadratureSpec = DEFAULT_SPEC, closed_form: bool = False) -> float:
    """Nonresonant (van der Waals) shift from the imaginary-frequency integral.

    For the lower state with right polarization this is
    ``-(mu^2/pi) int dxi (w G_xx(i xi) + xi G_xy(i xi)) / (w^2 + xi^2)``.
    The upper state follows from the same contraction with ``w -> -w`` and the
    dipole order swapped, which for a circular dipole flips the sign of both
    terms.  ``closed_form=True`` (quantized Hall surfaces only) replaces the
    inner Green quadrature with its closed form.
    """
    _check_height(z0)
    _check_state(state)
    return _nonresonant(atom, surface, z0, state, spec, 0, closed_form)


def _hall_factor(atom: TwoLevelAtom, C: int) -> tuple[float, float]:
    ca = atom.handedness * C * ALPHA
    return ca, ca / (1.0 + ca * ca)


def farfield_shift(atom: TwoLevelAtom, C: int, z0: float) -> float:
    """Leading far-field nonresonant shift of the lower state (valid for z0 >> 1/omega10)."""
    _check_height(z0)
    ca, pref = _hall_factor(atom, C)
    w = atom.omega10
    return -(atom.mu**2 / (4.0 * np.pi * w)) * pref * (ca / z0**4 + 1.0 / (w * z0**5))


def farfield_force(atom: TwoLevelAtom, C: int, z0: float) -> float:
    """``-d(farfield_shift)/dz0``; positive values are repulsive."""
    _check_height(z0)
    ca, pref = _hall_factor(atom, C)
    w = atom.omega10
    return -(atom.mu**2 / (4.0 * np.pi * w)) * pref * (4.0 * ca / z0**5 + 5.0 / (w * z0**6))


def farfield_force_zero(atom: TwoLevelAtom, C: int) -> float | None:
    """Separation where the far-field force changes sign, or None if it never does."""
    ca, _ = _hall_factor(atom, C)
    if ca >= 0:
        return None
    return 5.0 / (4.0 * abs(ca) * atom.omega10)


def repulsion_window(atom: TwoLevelAtom, C: int) -> tuple[float, float] | None:
    """Far-field separations ``(1/omega10, 5/(4|C| alpha omega10))`` with a repulsive force.

    Exists only when the Hall response and the dipole handedness have opposite
    signs.  Returns None when that fails or when the window is empty.
    """
    upper = farfield_force_zero(atom, C)
    lower = 1.0 / atom.omega10
    if upper is None or upper <= lower:
        return None
    return lower, upper


def force_numeric(atom: TwoLevelAtom, surface, z0: float, state: str = "lower",
                  channel: str = "nonresonant", method: str = "analytic",
                  spec: QuadratureSpec = DEFAULT_SPEC, closed_form: bool = False) -> float:
    """Casimir-Polder force ``-d(shift)/dz0`` from the full quadrature.

    ``method="analytic"`` differentiates under the integrals; ``method="fd"``
    uses a five-point central difference with step ``1e-4 z0``.
    ``closed_form`` is passed on to :func:`nonresonant_shift`.
    """
    _check_height(z0)
    _check_state(state)
    if channel not in ("resonant", "nonresonant"):
        raise ValueError("channel must be 'resonant' or 'nonresonant'")
    if channel == "resonant" and state != "upper":
        raise ValueError("only the upper state has a resonant channel")
    if method == "analytic":
        if channel == "nonresonant":
            return -_nonresonant(atom, surface, z0, state, spec, 1, closed_form)
        g = green_real_freq(surface, atom.omega10, z0, spec, dz_order=1)
        return -sum(_resonant_from_green(atom, g))
    if method != "fd":
        raise ValueError("method must be 'analytic' or 'fd'")

    def shift(z):
        if channel == "nonresonant":
            return nonresonant_shift(atom, surface, z, state, spec, closed_form)
        return resonant_shift(atom, surface, z, spec)

    h = 1e-4 * z0
    deriv = (-shift(z0 + 2 * h) + 8 * shift(z0 + h)
             - 8 * shift(z0 - h) + shift(z0 - 2 * h)) / (12.0 * h)
    return -deriv


def transition_rate(atom: TwoLevelAtom) -> float:
    """Free-space spontaneous emission rate ``R10 = 4 omega10^3 mu^2 / 3``."""
    return 4.0 * atom.omega10**3 * atom.mu**2 / 3.0


def nondimensionalize(atom: TwoLevelAtom, shift: float, z0: float) -> Nondimensional:
    """``eta = 2 omega10 z0`` and ``shift / R10``."""
    return Nondimensional(2.0 * atom.omega10 * z0, shift / transition_rate(atom))


def slope_sign_changes(values) -> int:
    """Number of sign changes of the discrete slope of a sampled curve."""
    slope = np.sign(np.diff(np.asarray(values, dtype=float)))
    slope = slope[slope != 0]
    return int(np.count_nonzero(slope[1:] != slope[:-1]))


def detrended_correlation(a, b, window: int) -> float:
    """Pearson correlation of two series after removing a moving average.

    ``window`` should span about one oscillation period so the moving average
    keeps only the smooth trend.  Edges where the window does not fit are
    dropped.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if window < 2 or window >= a.size:
        raise ValueError("window must be between 2 and len(series) - 1")
    kernel = np.ones(window) / window
    trim = slice(window // 2, a.size - (window - 1 - window // 2))
    da = a[trim] - np.convolve(a, kernel, mode="valid")
    db = b[trim] - np.convolve(b, kernel, mode="valid")
    return float(np.corrcoef(da, db)[0, 1])

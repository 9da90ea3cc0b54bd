"""Qi-Wu-Zhang two-band lattice model of a Chern insulator.

The Bloch Hamiltonian is ``H(k) = d(k) . sigma`` with

    d_x = t sin(k_x a),  d_y = t sin(k_y a),  d_z = t cos(k_x a) + t cos(k_y a) + u

and bands ``+-|d(k)|``.  Everything here works with ``hbar = 1`` so the
velocity operator is simply ``dH/dk``.

Sign convention: ``berry_curvature`` and ``chern_number`` are oriented so that
the DC Hall conductance returned by :mod:`cpchern.conductivity` equals
``C e^2/h``.  With that orientation ``u = +t`` gives ``C = +1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


class GaplessModelError(ValueError):
    """The requested operation needs a gapped spectrum."""


@dataclass(frozen=True)
class QwzModel:
    t: float = 1.0
    u: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("hopping t must be positive")
        if not self.a > 0:
            raise ValueError("lattice constant a must be positive")

    @property
    def is_gapped(self) -> bool:
        tol = 1e-12 * self.t
        return all(abs(self.u - c) > tol for c in (0.0, 2 * self.t, -2 * self.t))

    def require_gap(self):
        if not self.is_gapped:
            raise GaplessModelError(
                f"band touching: u = {self.u} is a phase boundary (0, +-2t)")

    def gap(self, grid_n: int = 512) -> float:
        """Direct gap ``2 min_k |d(k)|`` estimated on a ``grid_n`` mesh."""
        d = bloch_vector(self, bz_grid(self, grid_n))
        return 2.0 * float(d.energy.min())


@dataclass(frozen=True)
class BlochVector:
    d_x: np.ndarray
    d_y: np.ndarray
    d_z: np.ndarray

    @property
    def energy(self):
        """Upper-band energy ``|d(k)|``; the lower band is its negative."""
        return np.sqrt(self.d_x**2 + self.d_y**2 + self.d_z**2)

    def as_array(self) -> np.ndarray:
        return np.stack([self.d_x, self.d_y, self.d_z], axis=-1)


def bz_grid(model: QwzModel, grid_n: int) -> np.ndarray:
    """Uniform periodic mesh on ``(-pi/a, pi/a]^2``, shape ``(n, n, 2)``."""
    k = (-np.pi + 2.0 * np.pi * (np.arange(grid_n) + 1) / grid_n) / model.a
    kx, ky = np.meshgrid(k, k, indexing="ij")
    return np.stack([kx, ky], axis=-1)


def _split(k):
    k = np.asarray(k, dtype=float)
    return k[..., 0], k[..., 1]


def bloch_vector(model: QwzModel, k) -> BlochVector:
    kx, ky = _split(k)
    t, a = model.t, model.a
    return BlochVector(t * np.sin(kx * a), t * np.sin(ky * a),
                       t * np.cos(kx * a) + t * np.cos(ky * a) + model.u)


def bloch_gradient(model: QwzModel, k):
    """Return ``(dd/dk_x, dd/dk_y)`` as arrays with a trailing axis of 3."""
    kx, ky = _split(k)
    t, a = model.t, model.a
    zero = np.zeros_like(kx)
    ddx = np.stack([t * a * np.cos(kx * a), zero, -t * a * np.sin(kx * a)], axis=-1)
    ddy = np.stack([zero, t * a * np.cos(ky * a), -t * a * np.sin(ky * a)], axis=-1)
    return ddx, ddy


def to_matrix(vec) -> np.ndarray:
    """Map a vector with a trailing axis of 3 onto ``vec . sigma``."""
    return np.einsum("...i,ijk->...jk", np.asarray(vec), PAULI)


def hamiltonian(model: QwzModel, k) -> np.ndarray:
    return to_matrix(bloch_vector(model, k).as_array())


def velocity_matrix(model: QwzModel, k, direction: str) -> np.ndarray:
    """Velocity operator ``dH/dk_direction`` (hbar = 1) in the orbital basis."""
    ddx, ddy = bloch_gradient(model, k)
    if direction == "x":
        return to_matrix(ddx)
    if direction == "y":
        return to_matrix(ddy)
    raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")


def berry_curvature(model: QwzModel, k):
    """Lower-band Berry curvature, oriented so that its BZ integral over 2 pi is C.

    Computed from the solid-angle density ``d . (d_x d x d_y d) / (2 |d|^3)``.
    """
    d = bloch_vector(model, k)
    energy = d.energy
    if np.any(energy <= 0):
        raise GaplessModelError("Berry curvature is undefined where |d(k)| = 0")
    ddx, ddy = bloch_gradient(model, k)
    triple = np.einsum("...i,...i->...", d.as_array(), np.cross(ddx, ddy))
    return -0.5 * triple / energy**3


def lower_band_states(model: QwzModel, grid_n: int) -> np.ndarray:
    """Lower-band eigenvectors on :func:`bz_grid`, shape ``(n, n, 2)``.

    The phase of each vector is whatever the eigensolver returns.
    """
    _, vecs = np.linalg.eigh(hamiltonian(model, bz_grid(model, grid_n)))
    return vecs[..., :, 0]


def plaquette_chern(states: np.ndarray) -> int:
    """Lattice field-strength Chern number of a periodic mesh of band states.

    ``states`` has shape ``(n, n, m)``.  Link variables are normalised overlaps
    between neighbours, and each plaquette contributes the principal argument
    of the product around it, so the result is independent of the phases of
    the individual states.
    """
    def link(axis):
        shifted = np.roll(states, -1, axis=axis)
        overlap = np.einsum("...i,...i->...", states.conj(), shifted)
        return overlap / np.abs(overlap)

    ux = link(0)
    uy = link(1)
    loop = ux * np.roll(uy, -1, axis=0) * np.roll(ux, -1, axis=1).conj() * uy.conj()
    flux = np.angle(loop).sum()
    # Orientation chosen to agree with the Kubo Hall conductance.
    value = flux / (2.0 * np.pi)
    return int(np.rint(value))


@lru_cache(maxsize=32)
def chern_number(model: QwzModel, grid_n: int = 64) -> int:
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    model.require_gap()
    return plaquette_chern(lower_band_states(model, grid_n))

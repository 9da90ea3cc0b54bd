"""Sheet conductivity of the Chern insulator.

Conductances are expressed in units of ``e^2/hbar`` (so the quantized Hall
value ``C e^2/h`` is ``C / 2 pi``), and frequencies in the energy units of the
lattice model (``hbar = 1``).

The dispersive response is the zero-temperature interband Kubo formula for the
two-band QWZ model,

    sigma_ab(z) = i/A sum_k sum_{m != n} (f_m - f_n)/(E_n - E_m)
                  <m|v_a|n><n|v_b|m> / (z + E_m - E_n),

with ``z = omega + i*eta`` on the real axis and ``z = i*xi`` on the imaginary
axis.  There is no intraband term for an insulator at T = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .lattice_model import (
    QwzModel,
    bloch_gradient,
    bloch_vector,
    bz_grid,
    chern_number,
    hamiltonian,
    to_matrix,
)

__all__ = [
    "FrequencyArgument",
    "ConductivityTensor",
    "kubo_sigma",
    "sigma_imag_axis",
    "sigma_nondispersive",
    "kubo_sigma_batch",
    "xx_imag_slope",
    "extrapolate_broadening",
    "QwzSurface",
    "QuantizedHallSurface",
    "ConstantSheet",
    "SurfaceModel",
]

DEFAULT_BROADENING = 1e-2  # in units of t


@dataclass(frozen=True)
class FrequencyArgument:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("real", "imag"):
            raise ValueError("kind must be 'real' or 'imag'")
        if not self.value >= 0:
            raise ValueError("frequency must be non-negative")

    @classmethod
    def real(cls, omega: float) -> "FrequencyArgument":
        return cls("real", float(omega))

    @classmethod
    def imag(cls, xi: float) -> "FrequencyArgument":
        return cls("imag", float(xi))

    @property
    def complex_value(self) -> complex:
        return complex(self.value) if self.kind == "real" else 1j * self.value


@dataclass(frozen=True)
class ConductivityTensor:
    """In-plane conductivity in units of e^2/hbar.

    ``yy = xx`` and ``yx = -xy`` by the fourfold symmetry of the model, so only
    two components are stored.  Fields may hold arrays when a batch of
    frequencies is evaluated at once.  ``coarse_grid`` flags a real-axis
    evaluation inside the absorption band whose k-mesh cannot resolve the
    broadening.
    """

    xx: complex
    xy: complex
    coarse_grid: bool = False

    @property
    def yy(self):
        return self.xx

    @property
    def yx(self):
        return -self.xy

    def __add__(self, other):
        return ConductivityTensor(self.xx + other.xx, self.xy + other.xy,
                                  self.coarse_grid or other.coarse_grid)

    def scaled(self, factor) -> "ConductivityTensor":
        return ConductivityTensor(factor * self.xx, factor * self.xy, self.coarse_grid)


@dataclass(frozen=True)
class _KuboWeights:
    gap: np.ndarray          # E_upper - E_lower per k-point
    w_xx: np.ndarray         # |<l|v_x|u>|^2 / gap
    w_xy: np.ndarray         # <l|v_x|u><u|v_y|l> / gap
    norm: float              # 1 / (N^2 a^2): the BZ measure d^2k / (2 pi)^2
    resolution: float        # max |grad gap| * mesh spacing


@lru_cache(maxsize=16)
def _kubo_weights(model: QwzModel, grid_n: int) -> _KuboWeights:
    model.require_gap()
    k = bz_grid(model, grid_n)
    d = bloch_vector(model, k)
    energy = d.energy
    h = hamiltonian(model, k)
    eye = np.eye(2)
    lower = 0.5 * (eye - h / energy[..., None, None])
    upper = 0.5 * (eye + h / energy[..., None, None])
    ddx, ddy = bloch_gradient(model, k)
    vx, vy = to_matrix(ddx), to_matrix(ddy)
    m_xx = np.einsum("...ij,...jk,...kl,...li->...", lower, vx, upper, vx).real
    m_xy = np.einsum("...ij,...jk,...kl,...li->...", lower, vx, upper, vy)
    gap = 2.0 * energy
    dvec = d.as_array()
    grad = 2.0 * np.hypot(np.einsum("...i,...i->...", dvec, ddx),
                          np.einsum("...i,...i->...", dvec, ddy)) / energy
    spacing = 2.0 * np.pi / (grid_n * model.a)
    return _KuboWeights(
        gap=gap.ravel(),
        w_xx=(m_xx / gap).ravel(),
        w_xy=(m_xy / gap).ravel(),
        norm=1.0 / (grid_n**2 * model.a**2),
        resolution=float(grad.max() * spacing),
    )


def _chunks(n_z, n_k, budget=4_000_000):
    step = max(1, budget // max(n_k, 1))
    for start in range(0, n_z, step):
        yield slice(start, min(n_z, start + step))


def _kubo_complex(weights: _KuboWeights, z: np.ndarray):
    """Kubo sums at complex frequencies ``z`` (upper half plane)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    xx = np.empty(z.shape, dtype=complex)
    xy = np.empty(z.shape, dtype=complex)
    gap = weights.gap[None, :]
    for sl in _chunks(z.size, weights.gap.size):
        zz = z[sl][:, None]
        res = 1.0 / (zz - gap)
        anti = 1.0 / (zz + gap)
        xx[sl] = 1j * weights.norm * (weights.w_xx * (res + anti)).sum(axis=1)
        xy[sl] = 1j * weights.norm * (weights.w_xy * res
                                      + weights.w_xy.conj() * anti).sum(axis=1)
    return xx, xy


def _kubo_imag(weights: _KuboWeights, xi: np.ndarray):
    """Kubo sums at ``z = i xi``, written in manifestly real form."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xx = np.empty(xi.shape)
    xy = np.empty(xi.shape)
    gap = weights.gap[None, :]
    re_w = weights.w_xy.real
    im_w = weights.w_xy.imag
    for sl in _chunks(xi.size, weights.gap.size):
        x = xi[sl][:, None]
        denom = 2.0 / (x * x + gap * gap)
        xx[sl] = weights.norm * (weights.w_xx * x * denom).sum(axis=1)
        xy[sl] = weights.norm * ((x * re_w + gap * im_w) * denom).sum(axis=1)
    return xx, xy


def _in_band(weights: _KuboWeights, omega: float, broadening: float) -> bool:
    lo = weights.gap.min() - 5.0 * broadening
    hi = weights.gap.max() + 5.0 * broadening
    return lo <= omega <= hi


def kubo_sigma(model: QwzModel, freq: FrequencyArgument, broadening: float | None = None,
               grid_n: int = 256) -> ConductivityTensor:
    """Interband Kubo conductivity at one real or imaginary frequency."""
    if grid_n < 32:
        raise ValueError("grid_n must be at least 32")
    if freq.kind == "imag":
        return sigma_imag_axis(model, freq.value, grid_n)
    eta = DEFAULT_BROADENING * model.t if broadening is None else float(broadening)
    if not eta > 0:
        raise ValueError("broadening must be positive on the real axis")
    weights = _kubo_weights(model, grid_n)
    xx, xy = _kubo_complex(weights, freq.value + 1j * eta)
    coarse = bool(weights.resolution > eta and _in_band(weights, freq.value, eta))
    return ConductivityTensor(complex(xx[0]), complex(xy[0]), coarse)


def kubo_sigma_batch(model: QwzModel, omegas, broadening: float | None = None,
                     grid_n: int = 256) -> ConductivityTensor:
    """Real-axis Kubo conductivity for an array of frequencies."""
    eta = DEFAULT_BROADENING * model.t if broadening is None else float(broadening)
    if not eta > 0:
        raise ValueError("broadening must be positive on the real axis")
    weights = _kubo_weights(model, grid_n)
    omegas = np.asarray(omegas, dtype=float)
    xx, xy = _kubo_complex(weights, omegas.ravel() + 1j * eta)
    coarse = bool(weights.resolution > eta
                  and any(_in_band(weights, w, eta) for w in omegas.ravel()))
    return ConductivityTensor(xx.reshape(omegas.shape), xy.reshape(omegas.shape), coarse)


def sigma_imag_axis(model: QwzModel, xi, grid_n: int = 256) -> ConductivityTensor:
    """Conductivity at imaginary frequency ``i xi``; both components are real.

    ``xi`` may be a scalar or an array.
    """
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0):
        raise ValueError("xi must be non-negative")
    xx, xy = _kubo_imag(_kubo_weights(model, grid_n), xi_arr.ravel())
    if xi_arr.ndim == 0:
        return ConductivityTensor(complex(xx[0]), complex(xy[0]))
    return ConductivityTensor(xx.reshape(xi_arr.shape), xy.reshape(xi_arr.shape))


def xx_imag_slope(model: QwzModel, grid_n: int = 256) -> float:
    """``d sigma_xx(i xi) / d xi`` at ``xi = 0``; sets the static sheet polarizability."""
    w = _kubo_weights(model, grid_n)
    return float(w.norm * (2.0 * w.w_xx / w.gap**2).sum())


def sigma_nondispersive(C: int) -> ConductivityTensor:
    """Quantized Hall sheet: ``xx = 0``, ``xy = C e^2/h``."""
    return ConductivityTensor(0.0, C / (2.0 * np.pi))


def extrapolate_broadening(model: QwzModel, omega: float, broadening: float | None = None,
                           grid_n: int = 256, order: int = 1) -> ConductivityTensor:
    """Two-point Richardson extrapolation of the real-axis result to zero broadening.

    Uses ``eta`` and ``eta/2``; ``order`` is the leading power of ``eta`` in
    the error (1 for Lorentzian tails, 2 for the DC Hall response).
    """
    eta = DEFAULT_BROADENING * model.t if broadening is None else float(broadening)
    coarse = kubo_sigma(model, FrequencyArgument.real(omega), eta, grid_n)
    fine = kubo_sigma(model, FrequencyArgument.real(omega), eta / 2, grid_n)
    w = 2.0**order
    return ConductivityTensor((w * fine.xx - coarse.xx) / (w - 1),
                              (w * fine.xy - coarse.xy) / (w - 1),
                              coarse.coarse_grid or fine.coarse_grid)


# --- surface models --------------------------------------------------------

@dataclass(frozen=True)
class QwzSurface:
    """Dispersive Chern-insulator sheet described by the QWZ model.

    ``hall=False`` drops the Hall response, giving a reciprocal sheet with the
    same longitudinal conductivity.
    """

    model: QwzModel = QwzModel()
    broadening: float | None = None
    grid_n: int = 256
    hall: bool = True

    def __post_init__(self):
        self.model.require_gap()
        if self.broadening is not None and not self.broadening > 0:
            raise ValueError("broadening must be positive")

    @classmethod
    def with_chern(cls, C: int, t: float = 1.0, **kwargs) -> "QwzSurface":
        """The ``u = +-t`` surface whose DC Hall conductance is ``C e^2/h``."""
        if C not in (1, -1):
            raise ValueError("the u = +-t QWZ model realises C = +-1 only")
        model = QwzModel(t=t, u=t)
        if chern_number(model) != C:
            model = QwzModel(t=t, u=-t)
        return cls(model=model, **kwargs)

    @property
    def eta(self) -> float:
        return DEFAULT_BROADENING * self.model.t if self.broadening is None else self.broadening

    def sigma_real(self, omega: float) -> ConductivityTensor:
        return self._filter(_sigma_real_cached(self.model, self.eta, self.grid_n, float(omega)))

    def sigma_imag(self, xi) -> ConductivityTensor:
        return self._filter(sigma_imag_axis(self.model, xi, self.grid_n))

    def xx_imag_slope(self) -> float:
        return xx_imag_slope(self.model, self.grid_n)

    def _filter(self, sigma):
        if self.hall:
            return sigma
        return ConductivityTensor(sigma.xx, 0.0 * np.asarray(sigma.xy), sigma.coarse_grid)


@lru_cache(maxsize=256)
def _sigma_real_cached(model, eta, grid_n, omega):
    return kubo_sigma(model, FrequencyArgument.real(omega), eta, grid_n)


@dataclass(frozen=True)
class QuantizedHallSurface:
    """Nondispersive sheet with vanishing longitudinal and quantized Hall response."""

    C: int

    def sigma_real(self, omega: float) -> ConductivityTensor:
        return sigma_nondispersive(self.C)

    def sigma_imag(self, xi) -> ConductivityTensor:
        xi = np.asarray(xi, dtype=float)
        sigma = sigma_nondispersive(self.C)
        if xi.ndim == 0:
            return sigma
        return ConductivityTensor(np.full(xi.shape, sigma.xx), np.full(xi.shape, sigma.xy))

    def xx_imag_slope(self) -> float:
        return 0.0


@dataclass(frozen=True)
class ConstantSheet:
    """Frequency-independent sheet with arbitrary (xx, xy); a test reference."""

    xx: complex = 0.0
    xy: complex = 0.0

    def sigma_real(self, omega: float) -> ConductivityTensor:
        return ConductivityTensor(self.xx, self.xy)

    def sigma_imag(self, xi) -> ConductivityTensor:
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 0:
            return ConductivityTensor(self.xx, self.xy)
        return ConductivityTensor(np.full(xi.shape, self.xx), np.full(xi.shape, self.xy))

    def xx_imag_slope(self) -> float:
        return 0.0


SurfaceModel = Union[QwzSurface, QuantizedHallSurface, ConstantSheet]

"""Casimir-Polder interaction of a circularly polarized two-level atom with a Chern insulator."""

from .casimir_polder import (
    TwoLevelAtom,
    farfield_force,
    farfield_shift,
    force_numeric,
    nondimensionalize,
    nonresonant_shift,
    repulsion_window,
    resonant_shift,
    resonant_shift_components,
)
from .conductivity import ConductivityTensor, QuantizedHallSurface, QwzSurface, kubo_sigma
from .green_tensor import GreenPair, green_imag_axis, green_real_freq
from .lattice_model import QwzModel, chern_number
from .numerics import QuadratureSpec

__version__ = "0.1.0"

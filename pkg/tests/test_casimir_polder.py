import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cpchern.casimir_polder import (
    TwoLevelAtom,
    detrended_correlation,
    farfield_force,
    farfield_force_zero,
    farfield_shift,
    force_numeric,
    nondimensionalize,
    nonresonant_shift,
    repulsion_window,
    resonant_shift,
    resonant_shift_components,
    slope_sign_changes,
    transition_rate,
)
from cpchern.conductivity import ConstantSheet, QuantizedHallSurface, QwzSurface
from cpchern.constants import ALPHA, C_SI
from cpchern.green_tensor import green_nondispersive_closed, green_real_freq

RIGHT = TwoLevelAtom(mu=1.0, omega10=1.0)
LEFT = TwoLevelAtom(mu=1.0, omega10=1.0, polarization="left")
ZERO = ConstantSheet(0.0, 0.0)


def lower_state_oracle(C, z0, sign=1):
    """Lower-state shift with scipy doing the frequency integral over the closed-form tensor."""
    def f(xi):
        g = green_nondispersive_closed(C, xi, z0)
        return (g.xx + sign * xi * g.xy) / (1 + xi * xi)
    val = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=400)[0]
    return -val / np.pi


def test_atom_validation_and_dipole():
    atom = TwoLevelAtom(mu=2.5, omega10=1.3, polarization="left")
    assert np.vdot(atom.dipole10, atom.dipole10).real == pytest.approx(2.5**2)
    assert atom.handedness == -1 and RIGHT.handedness == 1
    np.testing.assert_allclose(RIGHT.dipole10, np.array([1, 1j]) / np.sqrt(2))
    with pytest.raises(ValueError):
        TwoLevelAtom(mu=0.0, omega10=1.0)
    with pytest.raises(ValueError):
        TwoLevelAtom(mu=1.0, omega10=-1.0)
    with pytest.raises(ValueError):
        TwoLevelAtom(mu=1.0, omega10=1.0, polarization="linear")


def test_zero_surface_gives_zero_everywhere():
    assert resonant_shift(RIGHT, ZERO, 1.0) == 0.0
    assert nonresonant_shift(RIGHT, ZERO, 1.0) == 0.0
    assert force_numeric(RIGHT, ZERO, 1.0) == 0.0
    assert farfield_shift(RIGHT, 0, 5.0) == 0.0


@pytest.mark.parametrize("atom", [RIGHT, LEFT, TwoLevelAtom(2.0, 1.9)])
def test_resonant_shift_formula(atom):
    surface = QwzSurface.with_chern(-1)
    z0 = 0.7
    g = green_real_freq(surface, atom.omega10, z0)
    expected = -atom.mu**2 * (g.xx.real + atom.handedness * g.xy.imag)
    parts = resonant_shift_components(atom, surface, z0)
    assert parts.total == pytest.approx(expected, rel=1e-13, abs=0)
    assert parts.term_xx == pytest.approx(-atom.mu**2 * g.xx.real, rel=1e-13, abs=0)
    assert resonant_shift(atom, surface, z0) == parts.term_xx + parts.term_xy
    scale = 0.75 / atom.omega10**3
    assert parts.term_xx_nd == pytest.approx(-scale * g.xx.real, rel=1e-13, abs=0)
    assert parts.term_xy_nd == pytest.approx(-scale * atom.handedness * g.xy.imag, rel=1e-13, abs=0)


def test_resonant_reciprocal_has_no_xy_term():
    parts = resonant_shift_components(TwoLevelAtom(1.0, 1.9), QwzSurface(hall=False), 0.4)
    assert parts.term_xy == 0.0 and parts.term_xx != 0.0


def test_resonant_nd_independent_of_mu():
    surface = QwzSurface.with_chern(1)
    a = resonant_shift_components(TwoLevelAtom(0.3, 1.0), surface, 2.0)
    b = resonant_shift_components(TwoLevelAtom(7.0, 1.0), surface, 2.0)
    assert a.total_nd == pytest.approx(b.total_nd, rel=1e-13, abs=0)


def test_resonant_shift_oscillates_for_hall_and_frequency_matched_case():
    surface = QwzSurface.with_chern(1)
    atom = TwoLevelAtom(1.0, 1.0)
    eta = np.linspace(1, 30, 600)
    curve = [resonant_shift_components(atom, surface, e / 2).total_nd for e in eta]
    assert slope_sign_changes(curve) >= 3


def test_fig2b_components_are_antiphase():
    surface = QwzSurface.with_chern(-1)
    atom = TwoLevelAtom(1.0, 1.9)
    eta = np.linspace(1, 30, 600)
    parts = [resonant_shift_components(atom, surface, e / (2 * 1.9)) for e in eta]
    xx = [p.term_xx_nd for p in parts]
    xy = [p.term_xy_nd for p in parts]
    # one period in eta is 2 pi; 600 points over 29 gives ~130 samples per period
    assert detrended_correlation(xx, xy, 130) < 0


def test_lower_state_matches_oracle():
    for C in (1, -1):
        for z0 in (0.3, 2.0, 15.0):
            got = nonresonant_shift(RIGHT, QuantizedHallSurface(C), z0)
            assert got == pytest.approx(lower_state_oracle(C, z0), rel=1e-9, abs=0)


def test_closed_form_and_quadrature_paths_agree():
    surface = QuantizedHallSurface(-1)
    for z0 in (0.2, 3.0):
        a = nonresonant_shift(RIGHT, surface, z0, closed_form=True)
        b = nonresonant_shift(RIGHT, surface, z0)
        assert a == pytest.approx(b, rel=1e-9, abs=0)
    with pytest.raises(ValueError):
        nonresonant_shift(RIGHT, QwzSurface.with_chern(1), 1.0, closed_form=True)


@pytest.mark.parametrize("C", [1, -1, 2])
@pytest.mark.parametrize("z0", [0.5, 4.0, 40.0])
def test_left_right_equals_chern_flip(C, z0):
    left = nonresonant_shift(LEFT, QuantizedHallSurface(C), z0)
    right = nonresonant_shift(RIGHT, QuantizedHallSurface(-C), z0)
    assert left == pytest.approx(right, rel=1e-10, abs=0)
    assert farfield_shift(LEFT, C, z0) == pytest.approx(farfield_shift(RIGHT, -C, z0), rel=1e-15, abs=0)


def test_upper_state_is_sign_flipped_lower_state():
    for surface in (QuantizedHallSurface(-1), QwzSurface.with_chern(1)):
        lower = nonresonant_shift(TwoLevelAtom(1.0, 1.9), surface, 1.5)
        upper = nonresonant_shift(TwoLevelAtom(1.0, 1.9), surface, 1.5, state="upper")
        assert upper == pytest.approx(-lower, rel=1e-12, abs=0)


@pytest.mark.parametrize("C", [1, -1])
def test_far_field_convergence(C):
    for z0, tol in ((20.0, 0.05), (100.0, 0.01)):
        full = nonresonant_shift(RIGHT, QuantizedHallSurface(C), z0)
        far = farfield_shift(RIGHT, C, z0)
        assert abs(full - far) <= tol * abs(far)


@settings(max_examples=25, deadline=None)
@given(z0=st.floats(0.05, 500.0), C=st.integers(1, 4))
def test_lower_state_binding_when_hall_matches_handedness(z0, C):
    assert nonresonant_shift(RIGHT, QuantizedHallSurface(C), z0, closed_form=True) < 0
    assert nonresonant_shift(LEFT, QuantizedHallSurface(-C), z0, closed_form=True) < 0


def test_farfield_shift_structure():
    z0 = 1e6
    for C in (1, -1):
        assert farfield_shift(RIGHT, C, z0) < 0
    # C = -1: the two terms cancel at z0 = 1/(alpha omega10)
    assert farfield_shift(RIGHT, -1, 1 / ALPHA) == pytest.approx(0.0, abs=1e-20)
    assert farfield_shift(RIGHT, -1, 0.5 / ALPHA) > 0


@pytest.mark.parametrize("C", [1, -1, 2, -2])
def test_topological_signature(C):
    ca = C * ALPHA
    limit = -(1 / (4 * np.pi)) * ca**2 / (1 + ca**2)
    z0 = 1e18
    assert farfield_shift(RIGHT, C, z0) * z0**4 == pytest.approx(limit, rel=1e-10, abs=0)
    assert farfield_shift(RIGHT, -C, z0) * z0**4 == pytest.approx(limit, rel=1e-10, abs=0)


def test_farfield_force_is_derivative():
    for C in (1, -1):
        for z0 in (3.0, 50.0, 400.0):
            h = 1e-3 * z0
            fd = -(farfield_shift(RIGHT, C, z0 + h) - farfield_shift(RIGHT, C, z0 - h)) / (2 * h)
            fd4 = (-farfield_shift(RIGHT, C, z0 + 2 * h) + 8 * farfield_shift(RIGHT, C, z0 + h)
                   - 8 * farfield_shift(RIGHT, C, z0 - h) + farfield_shift(RIGHT, C, z0 - 2 * h))
            fd4 = -fd4 / (12 * h)
            assert farfield_force(RIGHT, C, z0) == pytest.approx(fd4, rel=1e-8, abs=0)
            assert farfield_force(RIGHT, C, z0) == pytest.approx(fd, rel=1e-5, abs=0)


def test_force_sign_and_zero():
    zero = farfield_force_zero(RIGHT, -1)
    assert zero == pytest.approx(5 / (4 * ALPHA), rel=1e-12, abs=0)
    assert farfield_force(RIGHT, -1, zero) == pytest.approx(0.0, abs=1e-30)
    assert farfield_force(RIGHT, -1, 0.99 * zero) > 0
    assert farfield_force(RIGHT, -1, 1.01 * zero) < 0
    assert farfield_force_zero(RIGHT, 1) is None
    assert farfield_force_zero(LEFT, 1) == pytest.approx(zero)
    z = np.logspace(0, 6, 400)
    assert np.all(np.array([farfield_force(RIGHT, 1, x) for x in z]) < 0)


def test_repulsion_window():
    assert repulsion_window(RIGHT, 0) is None
    assert repulsion_window(RIGHT, 1) is None
    assert repulsion_window(LEFT, -1) is None
    low, high = repulsion_window(RIGHT, -1)
    assert low == 1.0 and high == pytest.approx(5 / (4 * ALPHA))
    assert repulsion_window(RIGHT, -2)[1] == pytest.approx(high / 2)
    assert repulsion_window(TwoLevelAtom(1.0, 1.0), -200) is None


def test_strontium_window_in_metres():
    wavelength = 707.202e-9
    omega = 2 * np.pi * C_SI / wavelength
    length = C_SI / omega
    low, high = repulsion_window(TwoLevelAtom(1.0, 1.0), -1)
    assert float(f"{low * length:.2g}") == 1.1e-7
    assert float(f"{high * length:.2g}") == 1.9e-5
    assert 2 * np.pi * C_SI / omega == pytest.approx(wavelength, rel=1e-12, abs=0)


def test_force_numeric_inside_and_outside_window():
    surface = QuantizedHallSurface(-1)
    assert force_numeric(RIGHT, surface, 10.0) > 0
    assert force_numeric(RIGHT, surface, 3 / ALPHA) < 0
    assert force_numeric(RIGHT, QuantizedHallSurface(1), 10.0) < 0


def test_force_analytic_matches_finite_difference():
    rng = np.random.default_rng(17)
    for z0 in rng.uniform(0.5, 60.0, 6):
        for C in (1, -1):
            surface = QuantizedHallSurface(C)
            a = force_numeric(RIGHT, surface, z0)
            b = force_numeric(RIGHT, surface, z0, method="fd")
            assert a == pytest.approx(b, rel=1e-5, abs=0)


def test_force_on_dispersive_surface_both_channels():
    surface = QwzSurface.with_chern(1)
    atom = TwoLevelAtom(1.0, 1.9)
    for channel, state in (("nonresonant", "lower"), ("resonant", "upper")):
        a = force_numeric(atom, surface, 1.2, state, channel)
        b = force_numeric(atom, surface, 1.2, state, channel, method="fd")
        assert a == pytest.approx(b, rel=1e-5, abs=0)
    with pytest.raises(ValueError):
        force_numeric(atom, surface, 1.0, "lower", "resonant")
    with pytest.raises(ValueError):
        force_numeric(atom, surface, 1.0, method="spline")


def test_nondimensionalize():
    atom = TwoLevelAtom(mu=0.4, omega10=2.0)
    nd = nondimensionalize(atom, transition_rate(atom), 1 / (2 * atom.omega10))
    assert nd.eta == 1.0 and nd.delta_omega_tilde == 1.0
    assert transition_rate(atom) == pytest.approx(4 * 8 * 0.16 / 3)
    with pytest.raises(ValueError):
        nondimensionalize(atom, 1.0, 0.0)


def test_slope_sign_changes():
    assert slope_sign_changes(np.exp(-np.linspace(0, 5, 50))) == 0
    assert slope_sign_changes(np.sin(np.linspace(0, 4 * np.pi, 400))) == 4
    assert slope_sign_changes([1, 2, 2, 3]) == 0


def test_detrended_correlation():
    x = np.linspace(10, 10 + 20 * np.pi, 2000)
    trend = 1 / (1 + x)
    a = trend + 0.1 * np.sin(x)
    b = trend - 0.05 * np.sin(x)
    assert detrended_correlation(a, b, 200) < -0.99
    assert detrended_correlation(a, a, 200) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        detrended_correlation(a, b, 1)

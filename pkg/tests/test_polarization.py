import math

import numpy as np
import pytest

from macrobell.polarization import (
    BasisTransform,
    apply_transform,
    beam_transform_matrix,
    half_wave_plate,
    identify_bell_state,
    pi_phase_on_bh,
    polarization_rotator,
    quarter_wave_plate,
    retarder_jones,
    sector_matrix,
    unitarity_defect,
)
from macrobell.states import BellLabel, build_bell_state, geometric_ratio


# -- Jones matrices -----------------------------------------------------------


def test_retarder_unitarity_battery():
    rng = np.random.default_rng(77)
    for _ in range(30):
        j = retarder_jones(float(rng.uniform(-90, 90)), float(rng.uniform(0, 2 * math.pi)))
        assert unitarity_defect(j) < 1e-14


def test_half_wave_plate_matrix():
    t = math.radians(17.0)
    want = np.array([[math.cos(2 * t), math.sin(2 * t)],
                     [math.sin(2 * t), -math.cos(2 * t)]])
    assert np.allclose(half_wave_plate(17.0).jones, want, atol=1e-15)


def test_quarter_wave_plate_at_zero():
    assert np.allclose(quarter_wave_plate(0.0).jones, np.diag([1.0, 1.0j]), atol=1e-15)


def test_rotator_matrix():
    phi = math.radians(30.0)
    c, s = math.cos(phi), math.sin(phi)
    assert np.allclose(polarization_rotator(30.0).jones,
                       np.array([[c, s], [-s, c]]), atol=1e-15)


def test_pi_phase_matrix():
    tr = pi_phase_on_bh()
    assert tr.target == "b"
    assert np.allclose(tr.jones, np.diag([-1.0, 1.0]))


def test_transform_validation():
    with pytest.raises(ValueError):
        BasisTransform("x", "c", np.eye(2, dtype=complex))
    with pytest.raises(ValueError):
        BasisTransform("x", "a", np.array([[1.0, 0.0], [0.0, 2.0]], dtype=complex))


# -- sector lift ---------------------------------------------------------------


def test_sector_matrix_unitary_battery():
    rng = np.random.default_rng(8)
    for n in range(7):
        j = retarder_jones(float(rng.uniform(-90, 90)), float(rng.uniform(0, 2 * math.pi)))
        u = sector_matrix(j, n)
        assert np.max(np.abs(u.conj().T @ u - np.eye(n + 1))) < 1e-12


def test_sector_matrix_identity():
    assert np.allclose(sector_matrix(np.eye(2, dtype=complex), 5), np.eye(6), atol=1e-15)


def test_sector_matrix_single_photon_is_jones():
    # sector basis is |k photons in H> ascending, i.e. (V, H) order for n = 1
    j = retarder_jones(25.0, 1.1)
    u = sector_matrix(j, 1)
    assert np.allclose(u, j[::-1, ::-1], atol=1e-14)


def test_beam_transform_conserves_photon_number():
    d = 5
    t = beam_transform_matrix(retarder_jones(33.0, 0.7), d - 1).tocoo()
    total = lambda idx: idx // d + idx % d
    assert np.all(total(t.row) == total(t.col))


# -- Bell-family relations --------------------------------------------------------


def test_pi_phase_swaps_psi_states():
    st = build_bell_state(BellLabel.PSI_MINUS, 0.5, 10)
    out = apply_transform(st, pi_phase_on_bh())
    ref = build_bell_state(BellLabel.PSI_PLUS, 0.5, 10)
    assert 1.0 - out.fidelity(ref) < 1e-12
    assert out.table is not None  # stays on the paired subspace
    assert identify_bell_state(out) is BellLabel.PSI_PLUS
    back = apply_transform(out, pi_phase_on_bh())
    assert 1.0 - back.fidelity(st) < 1e-12


def test_qwp45_maps_psi_plus_to_phi_plus():
    gamma, n_max = 0.4, 14
    st = build_bell_state(BellLabel.PSI_PLUS, gamma, n_max)
    out = apply_transform(st, quarter_wave_plate(45.0))
    ref = build_bell_state(BellLabel.PHI_PLUS, gamma, n_max)
    tail = geometric_ratio(gamma) ** (n_max + 1)
    assert 1.0 - out.fidelity(ref) <= 10.0 * tail + 1e-9


def test_rotator45_maps_psi_plus_to_phi_minus():
    gamma, n_max = 0.4, 14
    st = build_bell_state(BellLabel.PSI_PLUS, gamma, n_max)
    out = apply_transform(st, polarization_rotator(45.0))
    ref = build_bell_state(BellLabel.PHI_MINUS, gamma, n_max)
    tail = geometric_ratio(gamma) ** (n_max + 1)
    assert 1.0 - out.fidelity(ref) <= 10.0 * tail + 1e-9


def test_identify_round_trip():
    for label in BellLabel:
        st = build_bell_state(label, 0.35, 8)
        assert identify_bell_state(st) is label


def test_generic_transform_preserves_norm():
    st = build_bell_state(BellLabel.PSI_MINUS, 0.3, 10)
    out = apply_transform(st, half_wave_plate(13.0, target="a"))
    assert out.norm_sq() == pytest.approx(st.norm_sq(), rel=1e-10)
    assert out.vector is not None  # leaves the paired subspaces

import math

import numpy as np
import pytest

import rydsim.pulses as P
from rydsim._spaces import SymmetricSpace
from rydsim.dynamics import propagate_state
from rydsim.protocols import (ArpParams, GateParams, StirapParams, U_CNOT,
                              cnot, measure_chi, phase_error_sweep,
                              pi_pulse_baseline, pi_pulse_baseline_exact,
                              ramsey, ramsey_reference, rotation_matrix,
                              run_double_arp, run_double_stirap,
                              single_arp_error, single_qubit_gate,
                              single_stirap_error, wrap_phase)
from rydsim.statespace import FIVE_LEVEL, build_basis

TWO_PI = 2 * math.pi

FAST = dict(snapshots=2, step_divisor=200)


class TestMicrowaveRotation:
    """Closed-form resonant rotation on the auxiliary pair."""

    def run(self, theta, phi, start_level="r0"):
        space = SymmetricSpace(FIVE_LEVEL, [1])
        sched = P.microwave_rotation(theta, phi, TWO_PI * 10.0)
        psi0 = np.zeros(space.dimension, complex)
        psi0[space.singly_excited_index(start_level)] = 1.0
        if theta == 0.0:
            return psi0
        trace = propagate_state(space, sched, psi0, 2, step_divisor=2000)
        return trace.states[-1]

    def test_pi_pulse_full_transfer_with_phase(self):
        space = SymmetricSpace(FIVE_LEVEL, [1])
        out = self.run(math.pi, 0.7)
        amp = out[space.singly_excited_index("r1")]
        assert abs(amp) ** 2 == pytest.approx(1.0, abs=1e-9)
        assert amp == pytest.approx(-1j * np.exp(1j * 0.7), abs=1e-7)

    def test_half_pulse_even_split(self):
        space = SymmetricSpace(FIVE_LEVEL, [1])
        out = self.run(math.pi / 2, 0.0)
        p0 = abs(out[space.singly_excited_index("r0")]) ** 2
        p1 = abs(out[space.singly_excited_index("r1")]) ** 2
        assert p0 == pytest.approx(0.5, abs=1e-9)
        assert p1 == pytest.approx(0.5, abs=1e-9)

    def test_zero_angle_identity(self):
        space = SymmetricSpace(FIVE_LEVEL, [1])
        out = self.run(0.0, 0.0)
        assert abs(out[space.singly_excited_index("r0")]) == 1.0


@pytest.mark.parametrize("n", [1, 4, 5, 10])
def test_pi_baseline_matches_closed_form(n):
    sim = pi_pulse_baseline(n, 5, TWO_PI * 1.0)
    assert sim == pytest.approx(pi_pulse_baseline_exact(n, 5), abs=1e-6)


def test_pi_baseline_optimum_is_exact():
    assert pi_pulse_baseline_exact(5, 5) == pytest.approx(0.0, abs=1e-15)


def test_pi_baseline_rejects_bad_arguments():
    with pytest.raises(ValueError):
        pi_pulse_baseline(0, 5, 1.0)
    with pytest.raises(ValueError):
        pi_pulse_baseline(1, 5, -1.0)


class TestDoubleSequences:

    def test_stirap_compensation_small_phase(self):
        res = run_double_stirap(2, switch_detuning=True, **FAST)
        assert abs(wrap_phase(res.ground_phase)) < 0.05
        assert res.ground_population > 0.999

    def test_stirap_uncompensated_depends_on_n(self):
        p1 = run_double_stirap(1, switch_detuning=False, **FAST).ground_phase
        p2 = run_double_stirap(2, switch_detuning=False, **FAST).ground_phase
        delta = abs(wrap_phase(p1 - p2))
        assert delta > 0.1

    def test_arp_compensation_small_phase(self):
        res = run_double_arp(2, invert_phase=True, snapshots=2)
        assert abs(wrap_phase(res.ground_phase)) < 0.05
        assert res.ground_population > 0.999

    def test_arp_uncompensated_depends_on_n(self):
        p1 = run_double_arp(1, invert_phase=False, snapshots=2).ground_phase
        p2 = run_double_arp(2, invert_phase=False, snapshots=2).ground_phase
        assert abs(wrap_phase(p1 - p2)) > 0.1

    def test_zero_amplitude_is_free_evolution(self):
        params = StirapParams(omega1=0.0, omega2=0.0, t1=3.5, t2=5.5,
                              tau=1.0, delta=TWO_PI * 200)
        res = run_double_stirap(2, params, switch_detuning=True, **FAST)
        assert res.ground_population == pytest.approx(1.0, abs=1e-12)
        assert res.ground_phase == pytest.approx(0.0, abs=1e-12)

    def test_rejects_zero_atoms(self):
        with pytest.raises(ValueError):
            run_double_stirap(0)


def test_single_transfer_errors_are_small():
    assert single_stirap_error(3) < 1e-2
    assert single_arp_error(3) < 1e-3


def test_phase_sweep_identical_pulses_is_noise_level():
    err = phase_error_sweep(1, 1.0, "stirap")
    assert err < 1e-6
    with pytest.raises(ValueError):
        phase_error_sweep(1, 0.0, "stirap")
    with pytest.raises(ValueError):
        phase_error_sweep(1, 1.0, "other")


def test_phase_sweep_mismatch_grows_error():
    err_matched = phase_error_sweep(2, 1.0, "stirap", step_divisor=200)
    err_off = phase_error_sweep(2, 1.05, "stirap", step_divisor=200)
    assert err_off > 10 * max(err_matched, 1e-9)


class TestChiCalibration:

    def test_chi_is_reproducible_and_finite(self):
        params = StirapParams.default()
        chi_a = measure_chi(1, params)
        chi_b = measure_chi(1, params)
        assert chi_a == chi_b
        assert -math.pi <= chi_a <= math.pi

    def test_chi_depends_on_atom_number(self):
        params = StirapParams.default()
        assert measure_chi(1, params) != pytest.approx(
            measure_chi(2, params), abs=1e-3)


class TestSingleQubitGate:

    def test_identity_rotation_returns_input(self):
        a, b = 0.6, 0.8
        rep = single_qubit_gate(1, (a, b), 0.0, 0.0)
        assert rep.fidelity > 0.999

    def test_pi_rotation_transfers_population(self):
        rep = single_qubit_gate(1, (1.0, 0.0), math.pi, 0.0)
        assert abs(rep.logical_matrix[1, 0]) ** 2 == pytest.approx(1.0, abs=1e-3)
        assert rep.population_error < 1e-3

    def test_half_rotation_splits_population(self):
        rep = single_qubit_gate(1, (1.0, 0.0), math.pi / 2, 0.0)
        col = rep.logical_matrix[:, 0]
        assert abs(col[0]) ** 2 == pytest.approx(0.5, abs=1e-3)
        assert abs(col[1]) ** 2 == pytest.approx(0.5, abs=1e-3)

    def test_matrix_matches_target_rotation_at_n1(self):
        theta, phi = 0.9, 0.4
        rep = single_qubit_gate(1, (1.0, 0.0), theta, phi)
        assert np.max(np.abs(rep.logical_matrix
                             - rotation_matrix(theta, phi))) < 5e-3

    def test_rejects_unnormalized_input(self):
        with pytest.raises(ValueError):
            single_qubit_gate(1, (1.0, 1.0), 0.0, 0.0)


class TestRamsey:

    def test_full_and_null_fringe(self):
        assert ramsey(1, 0.0) == pytest.approx(1.0, abs=1e-2)
        assert ramsey(1, math.pi) == pytest.approx(0.0, abs=1e-2)

    def test_reference_composition(self):
        for phi in (0.0, math.pi / 3, math.pi):
            assert ramsey_reference(phi) == pytest.approx(
                math.cos(phi / 2) ** 2, abs=1e-12)

    def test_unswitched_detuning_breaks_fringe(self):
        phi = math.pi / 2
        dev = abs(ramsey(2, phi, switch_detuning=False)
                  - ramsey_reference(phi))
        assert dev > 5e-2


def test_cnot_single_atom_pairs_matches_target():
    rep = cnot(1, 1, step_divisor=128, trim_spectators=False)
    assert rep.fidelity > 0.99
    # factor the global phase from the largest element, then compare
    idx = np.unravel_index(np.argmax(np.abs(rep.logical_matrix)),
                           rep.logical_matrix.shape)
    phase = rep.logical_matrix[idx] / U_CNOT[idx]
    phase /= abs(phase)
    assert np.max(np.abs(rep.logical_matrix / phase - U_CNOT)) < 0.05


def test_logical_encoding_states_are_orthonormal():
    from rydsim.protocols import LogicalEncoding
    enc = LogicalEncoding([2], GateParams.default())
    states = enc.states_as_statevectors()
    labels = list(states)
    for i, a in enumerate(labels):
        for b in labels[i:]:
            ov = states[a].overlap(states[b])
            expected = 1.0 if a == b else 0.0
            assert abs(ov) == pytest.approx(expected, abs=1e-12)

import math

import numpy as np
import pytest

import rydsim.pulses as P
from rydsim._spaces import FullSpace, SymmetricSpace
from rydsim.dynamics import (IntegrationError, hamiltonian_at,
                             propagate_schrodinger, propagate_state)
from rydsim.statespace import (FIVE_LEVEL, THREE_LEVEL, TWO_LEVEL, StateVector,
                               build_basis)

TWO_PI = 2 * math.pi


def constant_stirap_schedule(omega1, omega2, delta, duration=10.0):
    return P.PulseSchedule(
        terms=(P.DriveTerm(P.RectEnvelope(omega1, 0.0, duration), ("0", "e")),
               P.DriveTerm(P.RectEnvelope(omega2, 0.0, duration), ("e", "r"))),
        shifts=(P.LevelShift("e", P.DetuningProfile(P.CONSTANT, delta0=delta)),),
        t_start=0.0, t_end=duration)


class TestTwoAtomStirapModel:
    """The 8x8 two-atom ladder model with both beams on."""

    def setup_method(self):
        self.basis = build_basis(THREE_LEVEL, [2])
        self.o1, self.o2, self.d = TWO_PI * 30, TWO_PI * 40, TWO_PI * 200
        self.sched = constant_stirap_schedule(self.o1, self.o2, self.d)

    def explicit_matrix(self):
        o1, o2, d = self.o1, self.o2, self.d
        return 0.5 * np.array([
            [0,  o1, 0,  o1, 0,      0,  0,  0],
            [o1, -2 * d, o2, 0, o1,  0,  0,  0],
            [0,  o2, 0,  0,  0,      o1, 0,  0],
            [o1, 0,  0,  -2 * d, o1, 0,  o2, 0],
            [0,  o1, 0,  o1, -4 * d, o2, 0,  o2],
            [0,  0,  o1, 0,  o2, -2 * d, 0,  0],
            [0,  0,  0,  o2, 0,      0,  0,  o1],
            [0,  0,  0,  0,  o2,     0,  o1, -2 * d]], dtype=complex)

    def test_matrix_matches_elementwise(self):
        h = hamiltonian_at(self.basis, self.sched, 5.0)
        assert np.allclose(h, self.explicit_matrix(), atol=1e-12)

    def test_amplitude_equations_term_by_term(self):
        # the coupled-amplitude system for (a00, a0e, a0r, ae0, aee, aer,
        # ar0, are), checked against -i H a on random states
        idx = {"".join(c): i for i, c in enumerate(self.basis.configurations)}
        o1, o2, d = self.o1, self.o2, self.d
        rng = np.random.default_rng(3)
        h = hamiltonian_at(self.basis, self.sched, 1.0)
        for _ in range(5):
            a = rng.normal(size=8) + 1j * rng.normal(size=8)
            adot = -1j * (h @ a)
            g = lambda s: a[idx[s]]
            expect = {
                "00": -1j * (o1 / 2 * g("0e") + o1 / 2 * g("e0")),
                "e0": -1j * (-d * g("e0") + o1 / 2 * g("00")
                             + o1 / 2 * g("ee") + o2 / 2 * g("r0")),
                "0e": -1j * (-d * g("0e") + o1 / 2 * g("00")
                             + o1 / 2 * g("ee") + o2 / 2 * g("0r")),
                "0r": -1j * (o1 / 2 * g("er") + o2 / 2 * g("0e")),
                "r0": -1j * (o1 / 2 * g("re") + o2 / 2 * g("e0")),
                "ee": -1j * (-2 * d * g("ee") + o1 / 2 * g("0e")
                             + o1 / 2 * g("e0") + o2 / 2 * g("er")
                             + o2 / 2 * g("re")),
                "re": -1j * (-d * g("re") + o1 / 2 * g("r0")
                             + o2 / 2 * g("ee")),
                "er": -1j * (-d * g("er") + o1 / 2 * g("0r")
                             + o2 / 2 * g("ee")),
            }
            for label, value in expect.items():
                assert adot[idx[label]] == pytest.approx(value, abs=1e-12)

    def test_hermitian_at_random_times(self):
        for t in (0.3, 4.4, 9.1):
            h = hamiltonian_at(self.basis, self.sched, t)
            assert np.max(np.abs(h - h.conj().T)) < 1e-12

    def test_zero_drive_gives_diagonal(self):
        sched = constant_stirap_schedule(0.0, 0.0, self.d)
        h = hamiltonian_at(self.basis, sched, 5.0)
        assert np.allclose(h, np.diag(np.diag(h)))


def test_chirped_two_level_model_three_amplitudes():
    # two atoms, ground/rydberg only: couplings omega/2 and a shared
    # time-dependent -delta(t) on every singly-excited configuration
    basis = build_basis(TWO_LEVEL, [2])
    omega, alpha = TWO_PI * 2.0, TWO_PI * 1.0
    env = P.GaussianEnvelope(omega, 0.0, 1.0)
    sched = P.PulseSchedule(
        terms=(P.DriveTerm(env, ("0", "r")),),
        shifts=(P.LevelShift("r", P.DetuningProfile(P.LINEAR_CHIRP,
                                                    rate=alpha, origin=0.0),
                             window=env.support),),
        t_start=env.support[0], t_end=env.support[1])
    idx = {"".join(c): i for i, c in enumerate(basis.configurations)}
    rng = np.random.default_rng(5)
    for t in (-2.0, 0.0, 1.7):
        h = hamiltonian_at(basis, sched, t)
        om_t = env.value(t)
        delta_t = alpha * t
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        adot = -1j * (h @ a)
        g = lambda s: a[idx[s]]
        assert adot[idx["00"]] == pytest.approx(
            -1j * (om_t / 2 * g("0r") + om_t / 2 * g("r0")), abs=1e-12)
        assert adot[idx["r0"]] == pytest.approx(
            -1j * (-delta_t * g("r0") + om_t / 2 * g("00")), abs=1e-12)
        assert adot[idx["0r"]] == pytest.approx(
            -1j * (-delta_t * g("0r") + om_t / 2 * g("00")), abs=1e-12)


def test_five_level_single_atom_model():
    # single atom with qubit levels, intermediate level, two rydberg levels:
    # four drives, a complex rotation amplitude, and -delta on the
    # intermediate level only
    basis = build_basis(FIVE_LEVEL, [1])
    o1, o2, oR, d = TWO_PI * 30, TWO_PI * 40, TWO_PI * 10, TWO_PI * 200
    oG = TWO_PI * 5 * np.exp(1j * 0.8)
    dur = 4.0
    sched = P.PulseSchedule(
        terms=(P.DriveTerm(P.RectEnvelope(o1, 0, dur), ("0", "e")),
               P.DriveTerm(P.RectEnvelope(o2, 0, dur), ("e", "r0")),
               P.DriveTerm(P.RectEnvelope(oR, 0, dur), ("1", "r1")),
               P.DriveTerm(P.RectEnvelope(abs(oG), 0, dur,
                                          carrier_phase=float(np.angle(oG))),
                           ("r0", "r1"))),
        shifts=(P.LevelShift("e", P.DetuningProfile(P.CONSTANT, delta0=d)),),
        t_start=0.0, t_end=dur)
    idx = {c[0]: i for i, c in enumerate(basis.configurations)}
    h = hamiltonian_at(basis, sched, 1.0)
    rng = np.random.default_rng(11)
    a = rng.normal(size=5) + 1j * rng.normal(size=5)
    adot = -1j * (h @ a)
    g = lambda s: a[idx[s]]
    assert adot[idx["0"]] == pytest.approx(-1j * (o1 / 2) * g("e"), abs=1e-12)
    assert adot[idx["1"]] == pytest.approx(-1j * (oR / 2) * g("r1"), abs=1e-12)
    assert adot[idx["e"]] == pytest.approx(
        -1j * (-d * g("e") + o1 / 2 * g("0") + o2 / 2 * g("r0")), abs=1e-12)
    assert adot[idx["r0"]] == pytest.approx(
        -1j * (o2 / 2 * g("e") + np.conj(oG) / 2 * g("r1")), abs=1e-12)
    assert adot[idx["r1"]] == pytest.approx(
        -1j * (oR / 2 * g("1") + oG / 2 * g("r0")), abs=1e-12)


def test_hamiltonian_at_outside_window_raises():
    basis = build_basis(TWO_LEVEL, [1])
    sched = P.microwave_rotation(math.pi, 0.0, TWO_PI, transition=("0", "r"))
    with pytest.raises(ValueError):
        hamiltonian_at(basis, sched, 100.0)


def test_hamiltonian_at_rejects_unknown_transition():
    basis = build_basis(TWO_LEVEL, [1])
    sched = P.microwave_rotation(math.pi, 0.0, TWO_PI, transition=("x", "y"))
    with pytest.raises(ValueError):
        hamiltonian_at(basis, sched, sched.t_start)


class TestPropagation:

    def test_resonant_pi_pulse_inverts(self):
        omega = TWO_PI * 1.0
        dur = math.pi / omega
        sched = P.PulseSchedule(
            terms=(P.DriveTerm(P.RectEnvelope(omega, 0, dur), ("0", "r")),),
            t_start=0.0, t_end=dur)
        basis = build_basis(TWO_LEVEL, [1])
        psi0 = StateVector(np.array([1.0, 0.0], complex), basis)
        trace = propagate_schrodinger(basis, sched, psi0, 3,
                                      step_divisor=1000)
        assert trace.final_ground_population() == pytest.approx(0.0, abs=1e-10)
        assert trace.norm_drift < 1e-8

    def test_zero_drive_leaves_state_and_detuning_rotates_phase(self):
        basis = build_basis(TWO_LEVEL, [1])
        delta = TWO_PI * 3.0
        dur = 1.0
        sched = P.PulseSchedule(
            terms=(P.DriveTerm(P.RectEnvelope(0.0, 0, dur), ("0", "r")),),
            shifts=(P.LevelShift("r", P.DetuningProfile(P.CONSTANT,
                                                        delta0=delta)),),
            t_start=0.0, t_end=dur)
        amps = np.array([1.0, 1.0], complex) / math.sqrt(2)
        trace = propagate_schrodinger(basis, sched, StateVector(amps, basis),
                                      5, step_divisor=500)
        final = trace.states[-1]
        assert final[0] == pytest.approx(amps[0], abs=1e-9)
        # H = -delta |r><r| so the excited amplitude advances as e^{+i delta t}
        assert final[1] == pytest.approx(amps[1] * np.exp(1j * delta * dur),
                                         abs=1e-8)

    def test_collective_oscillation_enhancement(self):
        omega = TWO_PI * 1.0
        space = SymmetricSpace(TWO_LEVEL, [4])
        dur = 0.8
        sched = P.PulseSchedule(
            terms=(P.DriveTerm(P.RectEnvelope(omega, 0, dur), ("0", "r")),),
            t_start=0.0, t_end=dur)
        psi0 = np.zeros(space.dimension, complex)
        psi0[space.ground_index] = 1.0
        trace = propagate_state(space, sched, psi0, 41, step_divisor=1000)
        predicted = np.cos(math.sqrt(4) * omega * trace.times / 2) ** 2
        assert np.max(np.abs(trace.ground_population - predicted)) < 1e-8

    def test_symmetric_space_matches_full_basis(self):
        sched = P.double_stirap(TWO_PI * 30, TWO_PI * 40, 3.5, 5.5, 1.0,
                                TWO_PI * 200, switch_detuning=True)
        times = np.linspace(sched.t_start, sched.t_end, 9)
        for n in (2, 3):
            basis = build_basis(THREE_LEVEL, [n])
            full0 = np.zeros(basis.dimension, complex)
            full0[basis.all_ground_index] = 1.0
            tr_full = propagate_schrodinger(
                basis, sched, StateVector(full0, basis), times,
                step_divisor=64)
            space = SymmetricSpace(THREE_LEVEL, [n])
            sym0 = np.zeros(space.dimension, complex)
            sym0[space.ground_index] = 1.0
            tr_sym = propagate_state(space, sched, sym0, times,
                                     step_divisor=64)
            assert np.max(np.abs(tr_sym.ground_amplitude
                                 - tr_full.ground_amplitude)) < 1e-9

    def test_unnormalized_initial_state_rejected(self):
        basis = build_basis(TWO_LEVEL, [1])
        sched = P.microwave_rotation(math.pi, 0.0, TWO_PI,
                                     transition=("0", "r"))
        with pytest.raises(ValueError):
            propagate_schrodinger(basis, sched,
                                  StateVector(np.array([2.0, 0.0]), basis), 3)

    def test_undersampled_run_raises_integration_error(self):
        # a detuned drive keeps the shifted level populated, so coarse
        # steps visibly damp the norm and must trip the drift check
        sched = P.PulseSchedule(
            terms=(P.DriveTerm(P.RectEnvelope(TWO_PI * 5, 0, 10.0),
                               ("0", "r")),),
            shifts=(P.LevelShift("r", P.DetuningProfile(
                P.CONSTANT, delta0=TWO_PI * 5)),),
            t_start=0.0, t_end=10.0)
        space = SymmetricSpace(TWO_LEVEL, [1])
        psi0 = np.array([1.0, 0.0], complex)
        with pytest.raises(IntegrationError):
            propagate_state(space, sched, psi0, 3, step_divisor=3)

import math

import numpy as np
import pytest

import rydsim.pulses as P

TWO_PI = 2 * math.pi


def test_gaussian_peak_and_width_points():
    env = P.GaussianEnvelope(peak=TWO_PI * 2.0, center=1.5, tau=0.7)
    assert env.value(1.5) == pytest.approx(TWO_PI * 2.0)
    assert env.value(1.5 + 0.7) == pytest.approx(TWO_PI * 2.0 * math.exp(-0.5))
    lo, hi = env.support
    assert env.value(hi + 1e-6) == 0.0
    assert env.value(lo - 1e-6) == 0.0


def test_gaussian_rejects_bad_width():
    with pytest.raises(ValueError):
        P.GaussianEnvelope(peak=1.0, center=0.0, tau=0.0)
    with pytest.raises(ValueError):
        P.GaussianEnvelope(peak=-1.0, center=0.0, tau=1.0)


def test_single_stirap_centers_forward_and_mirrored():
    fwd = P.single_stirap(TWO_PI * 30, TWO_PI * 40, 3.5, 5.5, 1.0,
                          TWO_PI * 200)
    centers = sorted(t.envelope.center for t in fwd.terms)
    assert centers == [-5.5, -3.5]
    pump = next(t for t in fwd.terms if t.transition == ("0", "e"))
    stokes = next(t for t in fwd.terms if t.transition == ("e", "r"))
    assert pump.envelope.center == -3.5
    assert stokes.envelope.center == -5.5

    rev = P.single_stirap(TWO_PI * 30, TWO_PI * 40, 3.5, 5.5, 1.0,
                          TWO_PI * 200, mirrored=True)
    assert sorted(t.envelope.center for t in rev.terms) == [3.5, 5.5]


def test_single_stirap_rejects_bad_timing():
    with pytest.raises(ValueError):
        P.single_stirap(1.0, 1.0, 5.5, 3.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        P.single_stirap(1.0, 1.0, 3.5, 5.5, 0.0, 0.0)


def test_double_stirap_mirror_symmetry():
    sched = P.double_stirap(TWO_PI * 30, TWO_PI * 40, 3.5, 5.5, 1.0,
                            TWO_PI * 200, switch_detuning=True)
    centers = sorted(t.envelope.center for t in sched.terms)
    assert centers == [-5.5, -3.5, 3.5, 5.5]
    assert centers == sorted(-c for c in centers)


def test_double_stirap_detuning_switch():
    delta = TWO_PI * 200
    switched = P.double_stirap(TWO_PI * 30, TWO_PI * 40, 3.5, 5.5, 1.0,
                               delta, switch_detuning=True)
    assert P.shift_value(switched, "e", 0, -1.0) == pytest.approx(delta)
    assert P.shift_value(switched, "e", 0, +1.0) == pytest.approx(-delta)

    constant = P.double_stirap(TWO_PI * 30, TWO_PI * 40, 3.5, 5.5, 1.0,
                               delta, switch_detuning=False)
    assert P.shift_value(constant, "e", 0, -1.0) == pytest.approx(delta)
    assert P.shift_value(constant, "e", 0, +1.0) == pytest.approx(delta)


def test_double_stirap_peak_amplitudes_at_centers():
    sched = P.double_stirap(TWO_PI * 30, TWO_PI * 40, 3.5, 5.5, 1.0,
                            TWO_PI * 200, switch_detuning=True)
    for t_peak in (-3.5, 3.5):
        entries = {tr: amp for tr, amp, _, _ in P.evaluate(sched, t_peak)}
        assert abs(entries[("0", "e")]) == pytest.approx(TWO_PI * 30, rel=1e-9)


def test_double_arp_phase_inversion():
    sched = P.double_arp(TWO_PI * 2, 1.0, TWO_PI * 1.0, 8.0, invert_phase=True)
    first, second = sorted(sched.terms, key=lambda t: t.envelope.center)
    ratio = (np.exp(1j * second.envelope.carrier_phase)
             / np.exp(1j * first.envelope.carrier_phase))
    assert ratio == pytest.approx(-1.0)

    plain = P.double_arp(TWO_PI * 2, 1.0, TWO_PI * 1.0, 8.0, invert_phase=False)
    assert all(t.envelope.carrier_phase == 0.0 for t in plain.terms)


def test_double_arp_chirp_zero_at_each_center():
    for invert in (True, False):
        sched = P.double_arp(TWO_PI * 2, 1.0, TWO_PI * 1.0, 8.0,
                             invert_phase=invert)
        for center in (-4.0, 4.0):
            assert P.shift_value(sched, "r", 0, center) == pytest.approx(0.0)


def test_double_arp_sweep_directions():
    # plain: time-mirrored second sweep; inverted: full phase-profile
    # inversion flips the second sweep forward again
    alpha = TWO_PI * 1.0
    plain = P.double_arp(TWO_PI * 2, 1.0, alpha, 8.0, invert_phase=False)
    assert plain.shifts[0].profile.rate == pytest.approx(alpha)
    assert plain.shifts[1].profile.rate == pytest.approx(-alpha)
    inverted = P.double_arp(TWO_PI * 2, 1.0, alpha, 8.0, invert_phase=True)
    assert inverted.shifts[1].profile.rate == pytest.approx(alpha)


def test_double_arp_rejects_overlapping_pulses():
    with pytest.raises(ValueError):
        P.double_arp(TWO_PI * 2, 1.0, TWO_PI * 1.0, 5.9, invert_phase=True)


def test_microwave_rotation_zero_angle_is_inert():
    sched = P.microwave_rotation(0.0, 0.0, TWO_PI * 10, start=2.0)
    assert P.evaluate(sched, 2.0) == []


def test_microwave_rotation_rejects_bad_arguments():
    with pytest.raises(ValueError):
        P.microwave_rotation(math.pi, 0.0, 0.0)
    with pytest.raises(ValueError):
        P.microwave_rotation(-1.0, 0.0, TWO_PI)


def test_evaluate_sums_overlapping_terms():
    env1 = P.RectEnvelope(TWO_PI * 1.0, 0.0, 1.0, carrier_phase=0.0)
    env2 = P.RectEnvelope(TWO_PI * 2.0, 0.0, 1.0, carrier_phase=math.pi / 2)
    sched = P.PulseSchedule(
        terms=(P.DriveTerm(env1, ("0", "r")), P.DriveTerm(env2, ("0", "r"))),
        t_start=0.0, t_end=1.0)
    [(transition, amp, det, target)] = P.evaluate(sched, 0.5)
    assert transition == ("0", "r")
    assert amp == pytest.approx(TWO_PI * (1.0 + 2.0j))
    assert det == 0.0


def test_evaluate_outside_window_raises():
    sched = P.microwave_rotation(math.pi, 0.0, TWO_PI * 10)
    with pytest.raises(ValueError):
        P.evaluate(sched, -1.0)


def test_schedule_rejects_envelope_outside_window():
    env = P.GaussianEnvelope(1.0, center=0.0, tau=1.0)
    with pytest.raises(ValueError):
        P.PulseSchedule(terms=(P.DriveTerm(env, ("0", "r")),),
                        t_start=-1.0, t_end=1.0)


def test_zero_amplitude_schedule_evaluates_to_nothing():
    sched = P.single_stirap(0.0, 0.0, 3.5, 5.5, 1.0, TWO_PI * 200)
    assert P.evaluate(sched, -3.5) == []


def test_evaluate_is_continuous_for_gaussians():
    sched = P.single_stirap(TWO_PI * 30, TWO_PI * 40, 3.5, 5.5, 1.0, 0.0)
    ts = np.linspace(-6.0, -3.0, 200)
    amps = []
    for t in ts:
        entries = {tr: a for tr, a, _, _ in P.evaluate(sched, t)}
        amps.append(entries.get(("0", "e"), 0.0))
    diffs = np.abs(np.diff(np.asarray(amps)))
    assert diffs.max() < TWO_PI * 1.0  # no jumps at this sampling density

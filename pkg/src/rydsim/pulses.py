"""Declarative time-dependent drive schedules.

All times are in microseconds and all frequencies are angular (rad/us);
configuration files quote plain frequencies nu = omega / 2pi in MHz and are
converted exactly once at parse time.

A schedule holds two kinds of entries:

* :class:`DriveTerm` -- an envelope on one transition of one ensemble.
* :class:`LevelShift` -- a rotating-frame diagonal shift: every atom sitting
  in the named level contributes ``-delta(t)`` to the Hamiltonian diagonal
  while the shift's window is active.

Keeping the diagonal as explicit level shifts (rather than a per-beam
attribute) avoids double counting when two beams share one frame, and lets
chirped pulses carry frames that reset per pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._spaces import ALL_ENSEMBLES

__all__ = [
    "GaussianEnvelope",
    "RectEnvelope",
    "DetuningProfile",
    "DriveTerm",
    "LevelShift",
    "PulseSchedule",
    "single_stirap",
    "double_stirap",
    "double_arp",
    "microwave_rotation",
    "pi_pulse",
    "merge_schedules",
    "evaluate",
]

GAUSS_SUPPORT_SIGMAS = 5.0  # envelope < 4e-6 of peak outside +-5 tau


@dataclass(frozen=True)
class GaussianEnvelope:
    """peak * exp(-(t - center)^2 / (2 tau^2)), truncated at +-5 tau."""

    peak: float          # angular Rabi frequency, rad/us
    center: float        # us
    tau: float           # us
    carrier_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError(f"Gaussian width must be positive, got {self.tau}")
        if self.peak < 0:
            raise ValueError(f"peak Rabi frequency must be >= 0, got {self.peak}")

    @property
    def support(self) -> tuple[float, float]:
        half = GAUSS_SUPPORT_SIGMAS * self.tau
        return (self.center - half, self.center + half)

    def value(self, t: float) -> float:
        lo, hi = self.support
        if t < lo or t > hi:
            return 0.0
        u = (t - self.center) / self.tau
        return self.peak * math.exp(-0.5 * u * u)


@dataclass(frozen=True)
class RectEnvelope:
    """Constant amplitude on [start, start + duration]."""

    amplitude: float     # angular Rabi frequency, rad/us
    start: float         # us
    duration: float      # us
    carrier_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError(f"duration must be >= 0, got {self.duration}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")

    @property
    def support(self) -> tuple[float, float]:
        return (self.start, self.start + self.duration)

    def value(self, t: float) -> float:
        if self.duration == 0.0:
            return 0.0
        return self.amplitude if self.start <= t <= self.start + self.duration else 0.0


CONSTANT = "constant"
SIGN_SWITCH = "sign_switch"
LINEAR_CHIRP = "linear_chirp"


@dataclass(frozen=True)
class DetuningProfile:
    """Time dependence of a rotating-frame detuning."""

    kind: str
    delta0: float = 0.0       # rad/us (constant / sign_switch)
    switch_time: float = 0.0  # us (sign_switch)
    rate: float = 0.0         # rad/us^2 (linear_chirp)
    origin: float = 0.0       # us (linear_chirp)

    def __post_init__(self) -> None:
        if self.kind not in (CONSTANT, SIGN_SWITCH, LINEAR_CHIRP):
            raise ValueError(f"unknown detuning profile kind {self.kind!r}")

    def value(self, t: float) -> float:
        if self.kind == CONSTANT:
            return self.delta0
        if self.kind == SIGN_SWITCH:
            return self.delta0 if t < self.switch_time else -self.delta0
        return self.rate * (t - self.origin)

    def max_abs(self, lo: float, hi: float) -> float:
        if self.kind in (CONSTANT, SIGN_SWITCH):
            return abs(self.delta0)
        return max(abs(self.rate * (lo - self.origin)),
                   abs(self.rate * (hi - self.origin)))


@dataclass(frozen=True)
class DriveTerm:
    """One envelope driving `transition` = (lower, upper) on `target`.

    The Hamiltonian element from the lower- to the upper-level configuration
    is envelope(t) * exp(i carrier_phase) / 2 (conjugated on the reverse).
    """

    envelope: GaussianEnvelope | RectEnvelope
    transition: tuple[str, str]
    target: int = ALL_ENSEMBLES

    def __post_init__(self) -> None:
        a, b = self.transition
        if a == b:
            raise ValueError("transition must connect two distinct levels")


@dataclass(frozen=True)
class LevelShift:
    """Diagonal -delta(t) per atom in `level`, active on `window`."""

    level: str
    profile: DetuningProfile
    target: int = ALL_ENSEMBLES
    window: tuple[float, float] = (-math.inf, math.inf)


@dataclass(frozen=True)
class PulseSchedule:
    terms: tuple[DriveTerm, ...]
    shifts: tuple[LevelShift, ...] = ()
    t_start: float = 0.0
    t_end: float = 0.0

    def __post_init__(self) -> None:
        if self.t_start >= self.t_end:
            raise ValueError(
                f"empty schedule window [{self.t_start}, {self.t_end}]")
        eps = 1e-9
        for term in self.terms:
            lo, hi = term.envelope.support
            if lo < self.t_start - eps or hi > self.t_end + eps:
                raise ValueError(
                    f"envelope support [{lo}, {hi}] exceeds the schedule "
                    f"window [{self.t_start}, {self.t_end}]")

    def shifted(self, dt: float) -> "PulseSchedule":
        """Translate the whole schedule in time by dt."""
        terms = tuple(replace(t, envelope=_shift_envelope(t.envelope, dt))
                      for t in self.terms)
        shifts = tuple(replace(s,
                               profile=_shift_profile(s.profile, dt),
                               window=(s.window[0] + dt, s.window[1] + dt))
                       for s in self.shifts)
        return PulseSchedule(terms, shifts, self.t_start + dt, self.t_end + dt)


def _shift_envelope(env, dt):
    if isinstance(env, GaussianEnvelope):
        return replace(env, center=env.center + dt)
    return replace(env, start=env.start + dt)


def _shift_profile(p: DetuningProfile, dt: float) -> DetuningProfile:
    if p.kind == SIGN_SWITCH:
        return replace(p, switch_time=p.switch_time + dt)
    if p.kind == LINEAR_CHIRP:
        return replace(p, origin=p.origin + dt)
    return p


def merge_schedules(*schedules: PulseSchedule) -> PulseSchedule:
    terms = tuple(t for s in schedules for t in s.terms)
    shifts = tuple(sh for s in schedules for sh in s.shifts)
    return PulseSchedule(terms, shifts,
                         min(s.t_start for s in schedules),
                         max(s.t_end for s in schedules))


# -- constructors -----------------------------------------------------------

def single_stirap(omega1: float, omega2: float, t1: float, t2: float,
                  tau: float, delta: float, time_origin: float = 0.0, *,
                  mirrored: bool = False,
                  pump_transition: tuple[str, str] = ("0", "e"),
                  stokes_transition: tuple[str, str] = ("e", "r"),
                  detuned_level: str | None = None,
                  target: int = ALL_ENSEMBLES,
                  amplitude_scale: float = 1.0) -> PulseSchedule:
    """One adiabatic-passage fragment of two Gaussian pulses.

    Forward order puts the stokes pulse (omega2, center origin - t2) before
    the pump (omega1, center origin - t1); `mirrored` reflects both centers
    through the origin, which reverses the transfer direction.  The
    intermediate level (pump upper level by default) is shifted by -delta
    while the fragment is active.
    """
    if tau <= 0:
        raise ValueError(f"pulse width must be positive, got {tau}")
    if t2 <= t1:
        raise ValueError(f"need t2 > t1, got t1={t1}, t2={t2}")

    sgn = 1.0 if mirrored else -1.0
    pump = GaussianEnvelope(amplitude_scale * omega1, time_origin + sgn * t1, tau)
    stokes = GaussianEnvelope(amplitude_scale * omega2, time_origin + sgn * t2, tau)
    window = (min(pump.support[0], stokes.support[0]),
              max(pump.support[1], stokes.support[1]))
    level = detuned_level if detuned_level is not None else pump_transition[1]
    shift = LevelShift(level, DetuningProfile(CONSTANT, delta0=delta),
                       target=target, window=window)
    return PulseSchedule(
        terms=(DriveTerm(pump, pump_transition, target),
               DriveTerm(stokes, stokes_transition, target)),
        shifts=(shift,),
        t_start=window[0], t_end=window[1])


def double_stirap(omega1: float, omega2: float, t1: float, t2: float,
                  tau: float, delta: float, switch_detuning: bool, *,
                  pump_transition: tuple[str, str] = ("0", "e"),
                  stokes_transition: tuple[str, str] = ("e", "r"),
                  target: int = ALL_ENSEMBLES,
                  reverse_amplitude_scale: float = 1.0) -> PulseSchedule:
    """Forward fragment on t < 0 plus its time mirror on t > 0.

    With `switch_detuning` the intermediate-level shift flips sign at t = 0;
    otherwise it stays at +delta throughout.
    """
    fwd = single_stirap(omega1, omega2, t1, t2, tau, delta,
                        pump_transition=pump_transition,
                        stokes_transition=stokes_transition, target=target)
    rev = single_stirap(omega1, omega2, t1, t2, tau, delta, mirrored=True,
                        pump_transition=pump_transition,
                        stokes_transition=stokes_transition, target=target,
                        amplitude_scale=reverse_amplitude_scale)
    window = (fwd.t_start, rev.t_end)
    if switch_detuning:
        profile = DetuningProfile(SIGN_SWITCH, delta0=delta, switch_time=0.0)
    else:
        profile = DetuningProfile(CONSTANT, delta0=delta)
    shift = LevelShift(pump_transition[1], profile, target=target, window=window)
    return PulseSchedule(terms=fwd.terms + rev.terms, shifts=(shift,),
                         t_start=window[0], t_end=window[1])


def double_arp(omega0: float, tau: float, alpha: float, separation: float,
               invert_phase: bool, *,
               transition: tuple[str, str] = ("0", "r"),
               target: int = ALL_ENSEMBLES,
               second_amplitude_scale: float = 1.0) -> PulseSchedule:
    """Two chirped Gaussian pulses centered at -+ separation / 2.

    Each pulse carries its own linear chirp crossing zero at the pulse
    center and active only over the pulse support.  The plain double
    sequence is the time mirror of the first pass (the second sweep runs
    downward), so the two transfer phases add and the returned ground
    amplitude carries an atom-number-dependent phase.  `invert_phase`
    inverts the second pulse's entire drive-phase profile, which flips its
    sweep back to the forward direction and adds pi to the carrier; the
    return pass then undoes the first pass's phase exactly.  A bare carrier
    flip alone could not do this: for complete transfers it only adds a
    constant pi to the returned phase.
    """
    if tau <= 0:
        raise ValueError(f"pulse width must be positive, got {tau}")
    if separation < 6 * tau:
        raise ValueError(
            f"pulse separation {separation} violates the sequential-pulse "
            f"assumption (need >= {6 * tau})")

    c1, c2 = -separation / 2.0, separation / 2.0
    env1 = GaussianEnvelope(omega0, c1, tau)
    env2 = GaussianEnvelope(second_amplitude_scale * omega0, c2, tau,
                            carrier_phase=math.pi if invert_phase else 0.0)
    upper = transition[1]
    rate2 = alpha if invert_phase else -alpha
    shifts = (
        LevelShift(upper, DetuningProfile(LINEAR_CHIRP, rate=alpha, origin=c1),
                   target=target, window=env1.support),
        LevelShift(upper, DetuningProfile(LINEAR_CHIRP, rate=rate2, origin=c2),
                   target=target, window=env2.support),
    )
    return PulseSchedule(
        terms=(DriveTerm(env1, transition, target),
               DriveTerm(env2, transition, target)),
        shifts=shifts,
        t_start=env1.support[0], t_end=env2.support[1])


def microwave_rotation(theta: float, phi: float, omega3: float,
                       start: float = 0.0, *,
                       transition: tuple[str, str] = ("r0", "r1"),
                       target: int = ALL_ENSEMBLES) -> PulseSchedule:
    """Resonant rectangular rotation of angle theta about axis phi.

    The propagator on the driven pair mixes the two levels with amplitudes
    cos(theta/2) on the diagonal and -i e^(-+ i phi) sin(theta/2) off it.
    """
    if omega3 <= 0:
        raise ValueError(f"Rabi frequency must be positive, got {omega3}")
    if theta < 0:
        raise ValueError(f"rotation angle must be >= 0, got {theta}")
    duration = theta / omega3
    env = RectEnvelope(omega3, start, duration, carrier_phase=phi)
    return PulseSchedule(terms=(DriveTerm(env, transition, target),),
                         t_start=start,
                         t_end=start + max(duration, 1e-12))


def pi_pulse(transition: tuple[str, str], omega: float, start: float,
             carrier_phase: float = 0.0,
             target: int = ALL_ENSEMBLES) -> PulseSchedule:
    """Resonant rectangular pi pulse (duration pi / omega)."""
    return microwave_rotation(math.pi, carrier_phase, omega, start,
                              transition=transition, target=target)


# -- evaluation --------------------------------------------------------------

def evaluate(schedule: PulseSchedule, t: float):
    """Active drives at time t.

    Returns a list of (transition, complex Rabi amplitude, detuning value,
    target) with one entry per (transition, target) pair, amplitudes summed
    over overlapping terms.  The detuning value is the summed shift currently
    acting on the transition's upper level for that target.
    """
    if t < schedule.t_start or t > schedule.t_end:
        raise ValueError(
            f"time {t} outside the schedule window "
            f"[{schedule.t_start}, {schedule.t_end}]")

    sums: dict[tuple[tuple[str, str], int], complex] = {}
    for term in schedule.terms:
        amp = term.envelope.value(t)
        if amp == 0.0:
            continue
        key = (term.transition, term.target)
        sums[key] = sums.get(key, 0.0) + amp * np.exp(1j * term.envelope.carrier_phase)

    out = []
    for (transition, target), amp in sums.items():
        out.append((transition, complex(amp),
                    shift_value(schedule, transition[1], target, t), target))
    return out


def shift_value(schedule: PulseSchedule, level: str, target: int, t: float) -> float:
    """Summed detuning acting on `level` of `target` at time t."""
    total = 0.0
    for sh in schedule.shifts:
        if sh.level != level:
            continue
        if not (sh.target == ALL_ENSEMBLES or target == ALL_ENSEMBLES
                or sh.target == target):
            continue
        if sh.window[0] <= t <= sh.window[1]:
            total += sh.profile.value(t)
    return total

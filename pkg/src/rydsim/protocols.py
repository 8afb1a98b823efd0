"""Named experiments and gates built from compensated pulse sequences.

Sign conventions.  With couplings entering the Hamiltonian as +Omega/2, a
resonant pi pulse with carrier phase 0 maps |x> -> -i|y>; with carrier phase
pi it maps |x> -> +i|y>.  The gate builders fix carriers so the composed
sequences close:

* five-pulse gate: pulse 1 uses carrier pi (+i), pulse 5 carrier 0 (-i) and
  the microwave runs at phi + pi/2, which makes the logical action exactly
  the rotation R(theta, phi) with mixing amplitudes cos(theta/2) and
  -i e^(-+ i phi) sin(theta/2); two sequential gates then reproduce the
  standard two-rotation interference.
* seven-pulse gate: every pi-type pulse (optical and microwave) uses carrier
  pi (+i), which reproduces the target two-qubit matrix without a residual
  relative phase between the blocks.

Forward transfers use +delta, reverse transfers -delta, extending the
double-sequence compensation rule into the gate context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import pulses as P
from ._spaces import ALL_ENSEMBLES, SymmetricSpace
from .dynamics import DecayRates, EvolutionTrace, propagate_master, propagate_state
from .statespace import (FIVE_LEVEL, THREE_LEVEL, TWO_LEVEL, StateVector,
                         build_basis, symmetric_singly_excited)

TWO_PI = 2.0 * math.pi

# Step divisors tuned so the acceptance tolerances (norm drift < 1e-8,
# metric shifts < 10% of tolerance under step halving) hold with margin.
# The chirped sequences see the collectively enhanced crossing, which the
# schedule's nominal frequency scale underestimates, hence the larger value.
SEQUENCE_DIVISOR = 320
ARP_DIVISOR = 400
GATE_DIVISOR = 256
BASELINE_DIVISOR = 2000

__all__ = [
    "StirapParams",
    "ArpParams",
    "GateParams",
    "blocked_spectator_phase",
    "trim_pump_for_blocked_spectators",
    "SequenceSummary",
    "GateReport",
    "LogicalEncoding",
    "U_CNOT",
    "run_double_stirap",
    "run_double_arp",
    "single_stirap_error",
    "single_arp_error",
    "pi_pulse_baseline",
    "pi_pulse_baseline_exact",
    "measure_chi",
    "single_qubit_gate",
    "ramsey",
    "ramsey_reference",
    "rotation_matrix",
    "cnot",
    "phase_error_sweep",
]


@dataclass(frozen=True)
class StirapParams:
    """Two-photon adiabatic transfer parameters (angular frequencies)."""

    omega1: float
    omega2: float
    t1: float
    t2: float
    tau: float
    delta: float

    @classmethod
    def default(cls) -> "StirapParams":
        return cls(omega1=TWO_PI * 30.0, omega2=TWO_PI * 40.0,
                   t1=3.5, t2=5.5, tau=1.0, delta=TWO_PI * 200.0)


@dataclass(frozen=True)
class ArpParams:
    """Chirped single-photon passage parameters."""

    omega0: float
    tau: float
    alpha: float
    separation: float = 8.0

    @classmethod
    def default(cls) -> "ArpParams":
        return cls(omega0=TWO_PI * 2.0, tau=1.0, alpha=TWO_PI * 1.0,
                   separation=8.0)


@dataclass(frozen=True)
class GateParams:
    """Pulse parameters shared by the one- and two-qubit gate sequences."""

    stirap: StirapParams
    omega_pi: float = TWO_PI * 10.0
    omega_mw: float = TWO_PI * 10.0
    gap: float = 0.5

    @classmethod
    def default(cls) -> "GateParams":
        return cls(stirap=StirapParams.default())


@dataclass
class SequenceSummary:
    """Trace plus the end-of-sequence ground-state numbers."""

    trace: EvolutionTrace
    ground_population: float
    ground_phase: float


@dataclass
class GateReport:
    """Logical-basis reconstruction of one protocol run."""

    final_state: StateVector
    logical_matrix: np.ndarray
    fidelity: float
    ground_phase_final: float
    population_error: float


U_CNOT = np.array([[1j, 0, 0, 0],
                   [0, 1j, 0, 0],
                   [0, 0, 0, -1],
                   [0, 0, -1, 0]], dtype=np.complex128)


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """Resonant two-level rotation R(theta, phi)."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -1j * np.exp(-1j * phi) * s],
                     [-1j * np.exp(1j * phi) * s, c]], dtype=np.complex128)


def wrap_phase(phi: float) -> float:
    """Map an angle to (-pi, pi]."""
    out = math.remainder(phi, TWO_PI)
    return out if out != -math.pi else math.pi


# -- double sequences --------------------------------------------------------

def run_double_stirap(n_atoms: int, params: StirapParams | None = None,
                      switch_detuning: bool = True, *,
                      snapshots: int = 2000,
                      step_divisor: int = SEQUENCE_DIVISOR) -> SequenceSummary:
    """Forward + mirrored transfer of the whole ensemble, starting all-ground."""
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    p = params or StirapParams.default()
    schedule = P.double_stirap(p.omega1, p.omega2, p.t1, p.t2, p.tau, p.delta,
                               switch_detuning)
    space = SymmetricSpace(THREE_LEVEL, [n_atoms])
    psi0 = np.zeros(space.dimension, dtype=np.complex128)
    psi0[space.ground_index] = 1.0
    trace = propagate_state(space, schedule, psi0, snapshots,
                            step_divisor=step_divisor)
    return SequenceSummary(trace=trace,
                           ground_population=trace.final_ground_population(),
                           ground_phase=trace.final_ground_phase())


def run_double_arp(n_atoms: int, params: ArpParams | None = None,
                   invert_phase: bool = True, *,
                   snapshots: int = 2000,
                   step_divisor: int = ARP_DIVISOR) -> SequenceSummary:
    """Two chirped passes on the ground <-> Rydberg pair, starting all-ground."""
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    p = params or ArpParams.default()
    schedule = P.double_arp(p.omega0, p.tau, p.alpha, p.separation, invert_phase)
    space = SymmetricSpace(TWO_LEVEL, [n_atoms])
    psi0 = np.zeros(space.dimension, dtype=np.complex128)
    psi0[space.ground_index] = 1.0
    trace = propagate_state(space, schedule, psi0, snapshots,
                            step_divisor=step_divisor)
    return SequenceSummary(trace=trace,
                           ground_population=trace.final_ground_population(),
                           ground_phase=trace.final_ground_phase())


# -- single-transfer errors ----------------------------------------------------

def single_stirap_error(n_atoms: int, params: StirapParams | None = None,
                        rates: DecayRates | None = None, *,
                        step_divisor: int = SEQUENCE_DIVISOR) -> float:
    """1 - population of the symmetric singly-excited Rydberg state after
    one forward transfer; decay included when rates are given."""
    p = params or StirapParams.default()
    schedule = P.single_stirap(p.omega1, p.omega2, p.t1, p.t2, p.tau, p.delta)
    if rates is None:
        space = SymmetricSpace(THREE_LEVEL, [n_atoms])
        psi0 = np.zeros(space.dimension, dtype=np.complex128)
        psi0[space.ground_index] = 1.0
        trace = propagate_state(space, schedule, psi0, 2,
                                step_divisor=step_divisor)
        target = space.singly_excited_index("r")
        return 1.0 - float(np.abs(trace.states[-1, target]) ** 2)
    basis = build_basis(THREE_LEVEL, [n_atoms])
    psi0 = np.zeros(basis.dimension, dtype=np.complex128)
    psi0[basis.all_ground_index] = 1.0
    rho0 = np.outer(psi0, psi0.conj())
    from .statespace import DensityMatrix
    trace = propagate_master(basis, schedule, DensityMatrix(rho0, basis),
                             rates, 2, step_divisor=step_divisor)
    target = symmetric_singly_excited(basis, "r").amplitudes
    final = trace.states[-1]
    return 1.0 - float(np.real(target.conj() @ final @ target))


def single_arp_error(n_atoms: int, params: ArpParams | None = None, *,
                     step_divisor: int = ARP_DIVISOR) -> float:
    """1 - transferred population after one chirped pass."""
    p = params or ArpParams.default()
    env = P.GaussianEnvelope(p.omega0, 0.0, p.tau)
    shift = P.LevelShift("r", P.DetuningProfile(P.LINEAR_CHIRP, rate=p.alpha,
                                                origin=0.0),
                         window=env.support)
    schedule = P.PulseSchedule(terms=(P.DriveTerm(env, ("0", "r")),),
                               shifts=(shift,),
                               t_start=env.support[0], t_end=env.support[1])
    space = SymmetricSpace(TWO_LEVEL, [n_atoms])
    psi0 = np.zeros(space.dimension, dtype=np.complex128)
    psi0[space.ground_index] = 1.0
    trace = propagate_state(space, schedule, psi0, 2, step_divisor=step_divisor)
    target = space.singly_excited_index("r")
    return 1.0 - float(np.abs(trace.states[-1, target]) ** 2)


def pi_pulse_baseline(n_atoms: int, n_opt: int, omega: float, *,
                      step_divisor: int = BASELINE_DIVISOR) -> float:
    """Excitation error of a resonant pulse with area tuned for n_opt atoms.

    A rectangular pulse of duration pi / (sqrt(n_opt) omega) drives the
    collective ground <-> singly-excited transition; the collectively
    enhanced rate makes the transfer complete only at n = n_opt.
    """
    if n_atoms < 1 or n_opt < 1:
        raise ValueError("atom counts must be >= 1")
    if omega <= 0:
        raise ValueError("Rabi frequency must be positive")
    duration = math.pi / (math.sqrt(n_opt) * omega)
    env = P.RectEnvelope(omega, 0.0, duration)
    schedule = P.PulseSchedule(terms=(P.DriveTerm(env, ("0", "r")),),
                               t_start=0.0, t_end=duration)
    space = SymmetricSpace(TWO_LEVEL, [n_atoms])
    psi0 = np.zeros(space.dimension, dtype=np.complex128)
    psi0[space.ground_index] = 1.0
    trace = propagate_state(space, schedule, psi0, 2, step_divisor=step_divisor)
    target = space.singly_excited_index("r")
    return 1.0 - float(np.abs(trace.states[-1, target]) ** 2)


def pi_pulse_baseline_exact(n_atoms: int, n_opt: int) -> float:
    """Closed-form error 1 - sin^2((pi/2) sqrt(n / n_opt))."""
    return 1.0 - math.sin(0.5 * math.pi * math.sqrt(n_atoms / n_opt)) ** 2


# -- gate building blocks ------------------------------------------------------

def _fwd_stirap(cursor: float, p: StirapParams, rydberg_level: str,
                target: int, delta_sign: float = 1.0) -> P.PulseSchedule:
    origin = cursor + p.t2 + 5.0 * p.tau
    return P.single_stirap(p.omega1, p.omega2, p.t1, p.t2, p.tau,
                           delta_sign * p.delta, origin,
                           stokes_transition=("e", rydberg_level),
                           target=target)


def _rev_stirap(cursor: float, p: StirapParams, rydberg_level: str,
                target: int, delta_sign: float = -1.0) -> P.PulseSchedule:
    origin = cursor - p.t1 + 5.0 * p.tau
    return P.single_stirap(p.omega1, p.omega2, p.t1, p.t2, p.tau,
                           delta_sign * p.delta, origin, mirrored=True,
                           stokes_transition=("e", rydberg_level),
                           target=target)


def _gate_fragments(theta: float, phi: float, params: GateParams,
                    start: float, switch_detuning: bool,
                    target: int = ALL_ENSEMBLES) -> tuple[list[P.PulseSchedule], float]:
    """Five-pulse single-qubit sequence starting at `start`."""
    g = params.gap
    frags = []
    cur = start
    p1 = P.pi_pulse(("1", "r1"), params.omega_pi, cur,
                    carrier_phase=math.pi, target=target)
    frags.append(p1)
    cur = p1.t_end + g
    f2 = _fwd_stirap(cur, params.stirap, "r0", target, delta_sign=+1.0)
    frags.append(f2)
    cur = f2.t_end + g
    mw = P.microwave_rotation(theta, phi + math.pi / 2.0, params.omega_mw,
                              cur, transition=("r0", "r1"), target=target)
    frags.append(mw)
    cur = mw.t_end + g
    f4 = _rev_stirap(cur, params.stirap, "r0", target,
                     delta_sign=(-1.0 if switch_detuning else +1.0))
    frags.append(f4)
    cur = f4.t_end + g
    p5 = P.pi_pulse(("1", "r1"), params.omega_pi, cur,
                    carrier_phase=0.0, target=target)
    frags.append(p5)
    return frags, p5.t_end


@lru_cache(maxsize=None)
def blocked_spectator_phase(params: StirapParams, scale: float = 1.0, *,
                            step_divisor: int = GATE_DIVISOR) -> float:
    """Phase a blockade-frozen ground atom gains during one forward pass.

    A companion atom parked in the undriven Rydberg level blocks the
    transfer, so the remaining ground atom only sees the far-detuned pump
    leg and acquires a light-shift phase, wrapped to (-pi, pi].  `scale`
    multiplies the pump amplitude.
    """
    space = SymmetricSpace(FIVE_LEVEL, [2])
    p = params
    frag = P.single_stirap(scale * p.omega1, p.omega2, p.t1, p.t2, p.tau,
                           p.delta, stokes_transition=("e", "r0"))
    idx = space.singly_excited_index("r1")
    psi0 = np.zeros(space.dimension, dtype=np.complex128)
    psi0[idx] = 1.0
    trace = propagate_state(space, frag, psi0, 2, step_divisor=step_divisor)
    amp = trace.states[-1, idx]
    if abs(amp) < 0.999:
        raise RuntimeError("blocked population leaked during calibration")
    return float(np.angle(amp))


@lru_cache(maxsize=None)
def trim_pump_for_blocked_spectators(params: StirapParams, *,
                                     step_divisor: int = GATE_DIVISOR) -> StirapParams:
    """Scale the pump so blocked spectators gain no net phase per pass.

    Sequences whose transfers are blocked during an odd number of passes
    leave each exposed ground atom with one uncompensated light-shift
    phase; trimming the pump amplitude until that phase is a multiple of
    2 pi removes it for every atom count at once.  The trim is a fraction
    of a percent at the reference parameters.
    """
    def wrapped(scale: float) -> float:
        return blocked_spectator_phase(params, round(scale, 12),
                                       step_divisor=step_divisor)

    s0, s1 = 1.0, 1.002
    f0, f1 = wrapped(s0), wrapped(s1)
    for _ in range(25):
        if abs(f1) < 1e-9:
            break
        slope = (f1 - f0) / (s1 - s0)
        s0, f0 = s1, f1
        s1 = s1 - f1 / slope
        f1 = wrapped(s1)
    else:
        raise RuntimeError("spectator-phase trim did not converge")
    return StirapParams(omega1=round(s1, 12) * params.omega1,
                        omega2=params.omega2, t1=params.t1, t2=params.t2,
                        tau=params.tau, delta=params.delta)


@lru_cache(maxsize=None)
def measure_chi(n_atoms: int, params: StirapParams,
                step_divisor: int = GATE_DIVISOR) -> float:
    """Transfer phase of one forward positive-detuning pass on n atoms.

    Calibrated once per (n, params): the all-ground state is driven to the
    symmetric singly-excited Rydberg state and the transferred amplitude's
    phase is recorded.  Logical states are dressed with this phase so gate
    sequences close without knowing it analytically.
    """
    space = SymmetricSpace(FIVE_LEVEL, [n_atoms])
    schedule = _fwd_stirap(0.0, params, "r0", ALL_ENSEMBLES, delta_sign=+1.0)
    psi0 = np.zeros(space.dimension, dtype=np.complex128)
    psi0[space.ground_index] = 1.0
    trace = propagate_state(space, schedule, psi0, 2, step_divisor=step_divisor)
    amp = trace.states[-1, space.singly_excited_index("r0")]
    if abs(amp) < 0.5:
        raise RuntimeError(
            f"calibration transfer failed (|amp| = {abs(amp):.3f}); "
            f"parameters are not adiabatic enough")
    return float(np.angle(amp))


class LogicalEncoding:
    """Logical and auxiliary collective states for one or two ensembles.

    The singly-excited states are dressed with the calibrated transfer
    phase, one per ensemble, so that sequence outputs project cleanly.
    """

    def __init__(self, atom_counts, params: GateParams,
                 step_divisor: int = GATE_DIVISOR):
        self.atom_counts = tuple(int(n) for n in atom_counts)
        self.params = params
        self.space = SymmetricSpace(FIVE_LEVEL, self.atom_counts)
        self.chi = tuple(measure_chi(n, params.stirap, step_divisor)
                         for n in self.atom_counts)

    def _occ(self, ensemble_levels: tuple[str, ...]):
        """Occupation state with one designated atom per ensemble ('0' = none)."""
        occs = []
        for e, level in enumerate(ensemble_levels):
            occ = [0] * len(FIVE_LEVEL.levels)
            n = self.atom_counts[e]
            if level == "0":
                occ[0] = n
            else:
                occ[0] = n - 1
                occ[FIVE_LEVEL.position(level)] = 1
            occs.append(tuple(occ))
        return self.space.index[tuple(occs)]

    def logical_index(self, bits: tuple[str, ...]) -> int:
        """Index of the undressed configuration for logical bits '0'/'1'."""
        return self._occ(tuple("1" if b == "1" else "0" for b in bits))

    def dressing(self, bits: tuple[str, ...]) -> complex:
        phase = 0.0
        for e, b in enumerate(bits):
            if b == "1":
                phase += self.chi[e]
        return complex(np.exp(1j * phase))

    def logical_vector(self, bits) -> np.ndarray:
        vec = np.zeros(self.space.dimension, dtype=np.complex128)
        vec[self.logical_index(tuple(bits))] = self.dressing(tuple(bits))
        return vec

    def project(self, amplitudes: np.ndarray) -> np.ndarray:
        """Amplitudes on the logical basis (length 2 or 4)."""
        n_q = len(self.atom_counts)
        labels = [("0",), ("1",)] if n_q == 1 else \
            [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
        return np.array([np.vdot(self.logical_vector(b), amplitudes)
                         for b in labels])

    def states_as_statevectors(self) -> dict[str, StateVector]:
        """Full-basis logical and auxiliary states for a single ensemble."""
        if len(self.atom_counts) != 1:
            raise ValueError("full-basis export is defined per ensemble")
        basis = build_basis(FIVE_LEVEL, self.atom_counts)
        out = {}
        for level in ("0", "1", "r0", "r1"):
            vec = np.zeros(self.space.dimension, dtype=np.complex128)
            vec[self._occ((level,))] = (1.0 if level == "0"
                                        else np.exp(1j * self.chi[0]))
            out[level] = StateVector(self.space.expand(vec, basis), basis)
        return out


def _apply_sequence(space: SymmetricSpace, psi0: np.ndarray,
                    fragments: list[P.PulseSchedule],
                    step_divisor: int) -> tuple[np.ndarray, float]:
    schedule = P.merge_schedules(*fragments)
    trace = propagate_state(space, schedule, psi0, 2, step_divisor=step_divisor)
    return trace.states[-1], trace.norm_drift


# -- single-qubit gate and interference check ---------------------------------

def _run_single_qubit(encoding: LogicalEncoding, a: complex, b: complex,
                      theta: float, phi: float, switch_detuning: bool,
                      step_divisor: int, repeats: list | None = None):
    """Propagate the five-pulse sequence (optionally several back to back)."""
    params = encoding.params
    frags, end = _gate_fragments(theta, phi, params, 0.0, switch_detuning)
    if repeats:
        for theta2, phi2 in repeats:
            more, end = _gate_fragments(theta2, phi2, params,
                                        end + params.gap, switch_detuning)
            frags.extend(more)
    psi0 = (a * encoding.logical_vector(("0",))
            + b * encoding.logical_vector(("1",)))
    final, drift = _apply_sequence(encoding.space, psi0, frags, step_divisor)
    return final, drift


def single_qubit_gate(n_atoms: int, amplitudes: tuple[complex, complex],
                      theta: float, phi: float,
                      params: GateParams | None = None, *,
                      switch_detuning: bool = True,
                      step_divisor: int = GATE_DIVISOR) -> GateReport:
    """Five-pulse arbitrary rotation on the ensemble qubit.

    Order: pi (1 <-> r1), forward transfer 0 -> r0 at +delta, resonant
    rotation on r0 <-> r1, reverse transfer at -delta, pi (r1 -> 1).  The
    logical action is R(theta, phi).
    """
    a, b = amplitudes
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-9:
        raise ValueError("input amplitudes must be normalized")
    params = params or GateParams.default()
    enc = LogicalEncoding([n_atoms], params, step_divisor)

    final, _ = _run_single_qubit(enc, a, b, theta, phi, switch_detuning,
                                 step_divisor)
    out = enc.project(final)

    columns = []
    for basis_amp in ((1.0, 0.0), (0.0, 1.0)):
        fin, _ = _run_single_qubit(enc, *basis_amp, theta=theta, phi=phi,
                                   switch_detuning=switch_detuning,
                                   step_divisor=step_divisor)
        columns.append(enc.project(fin))
    logical_matrix = np.column_stack(columns)

    target = rotation_matrix(theta, phi) @ np.array([a, b])
    fidelity = float(np.abs(np.vdot(target, out)) ** 2)
    population_error = 1.0 - float(np.sum(np.abs(out) ** 2))

    basis = build_basis(FIVE_LEVEL, [n_atoms])
    final_state = StateVector(enc.space.expand(final, basis), basis)
    g_amp = final[enc.space.ground_index]
    return GateReport(final_state=final_state, logical_matrix=logical_matrix,
                      fidelity=fidelity,
                      ground_phase_final=float(np.angle(g_amp)),
                      population_error=population_error)


def ramsey(n_atoms: int, phi: float, params: GateParams | None = None, *,
           switch_detuning: bool = True,
           step_divisor: int = GATE_DIVISOR) -> float:
    """Population of the logical one state after two pi/2 rotations.

    The second rotation's phase is `phi`; both gates run in one continuous
    schedule so residual excitations propagate physically between them.
    """
    params = params or GateParams.default()
    enc = LogicalEncoding([n_atoms], params, step_divisor)
    final, _ = _run_single_qubit(enc, 1.0, 0.0, math.pi / 2.0, 0.0,
                                 switch_detuning, step_divisor,
                                 repeats=[(math.pi / 2.0, phi)])
    out = enc.project(final)
    return float(abs(out[1]) ** 2)


def ramsey_reference(phi: float) -> float:
    """Two-rotation composition on a bare two-level system."""
    v = rotation_matrix(math.pi / 2.0, phi) @ \
        rotation_matrix(math.pi / 2.0, 0.0) @ np.array([1.0, 0.0])
    return float(abs(v[1]) ** 2)


# -- CNOT ----------------------------------------------------------------------

def _cnot_fragments(params: GateParams) -> list[P.PulseSchedule]:
    """Seven-pulse amplitude-swap sequence (control = 0, target = 1).

    The closing transfer on the control addresses r1 because the shared
    microwave pi has swapped the control excitation from r0 to r1.
    """
    g = params.gap
    p = params.stirap
    frags = []
    cur = 0.0
    f1 = _fwd_stirap(cur, p, "r0", target=0, delta_sign=+1.0)
    frags.append(f1)
    cur = f1.t_end + g
    p2 = P.pi_pulse(("1", "r1"), params.omega_pi, cur, carrier_phase=math.pi,
                    target=1)
    frags.append(p2)
    cur = p2.t_end + g
    f3 = _fwd_stirap(cur, p, "r0", target=1, delta_sign=+1.0)
    frags.append(f3)
    cur = f3.t_end + g
    mw = P.microwave_rotation(math.pi, math.pi, params.omega_mw, cur,
                              transition=("r0", "r1"), target=ALL_ENSEMBLES)
    frags.append(mw)
    cur = mw.t_end + g
    f5 = _rev_stirap(cur, p, "r0", target=1, delta_sign=-1.0)
    frags.append(f5)
    cur = f5.t_end + g
    p6 = P.pi_pulse(("1", "r1"), params.omega_pi, cur, carrier_phase=math.pi,
                    target=1)
    frags.append(p6)
    cur = p6.t_end + g
    f7 = _rev_stirap(cur, p, "r1", target=0, delta_sign=-1.0)
    frags.append(f7)
    return frags


def cnot(n_control: int, n_target: int, params: GateParams | None = None, *,
         input_amplitudes=None, trim_spectators: bool = True,
         step_divisor: int = GATE_DIVISOR) -> GateReport:
    """Seven-pulse CNOT between two blockaded ensembles.

    The 4x4 logical matrix is reconstructed by propagating the four logical
    basis states; fidelity is the process overlap |tr(U+ M)|^2 / 16 against
    the target matrix, which is insensitive to a global phase.  With
    `trim_spectators` (default) the pump amplitude is calibrated so that
    target atoms frozen by blockade during a single unpaired transfer pick
    up no net phase; this matters for target ensembles larger than one atom.
    """
    params = params or GateParams.default()
    if trim_spectators:
        params = GateParams(
            stirap=trim_pump_for_blocked_spectators(
                params.stirap, step_divisor=step_divisor),
            omega_pi=params.omega_pi, omega_mw=params.omega_mw,
            gap=params.gap)
    enc = LogicalEncoding([n_control, n_target], params, step_divisor)
    frags = _cnot_fragments(params)
    schedule = P.merge_schedules(*frags)

    labels = [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
    columns = []
    finals = []
    for bits in labels:
        psi0 = enc.logical_vector(bits)
        trace = propagate_state(enc.space, schedule, psi0, 2,
                                step_divisor=step_divisor)
        final = trace.states[-1]
        finals.append(final)
        columns.append(enc.project(final))
    logical_matrix = np.column_stack(columns)
    fidelity = float(np.abs(np.trace(U_CNOT.conj().T @ logical_matrix)) ** 2 / 16.0)

    if input_amplitudes is None:
        input_amplitudes = (1.0, 0.0, 0.0, 0.0)
    amps_in = np.asarray(input_amplitudes, dtype=np.complex128)
    psi0 = sum(amps_in[k] * enc.logical_vector(labels[k]) for k in range(4))
    trace = propagate_state(enc.space, schedule, psi0, 2,
                            step_divisor=step_divisor)
    final = trace.states[-1]
    out = enc.project(final)
    population_error = 1.0 - float(np.sum(np.abs(out) ** 2))

    basis = build_basis(FIVE_LEVEL, [n_control, n_target])
    final_state = StateVector(enc.space.expand(final, basis), basis)
    g_amp = final[enc.space.ground_index]
    return GateReport(final_state=final_state, logical_matrix=logical_matrix,
                      fidelity=fidelity,
                      ground_phase_final=float(np.angle(g_amp)),
                      population_error=population_error)


# -- robustness sweep ----------------------------------------------------------

def phase_error_sweep(n_atoms: int, ratio: float, mode: str,
                      stirap: StirapParams | None = None,
                      arp: ArpParams | None = None, *,
                      step_divisor: int | None = None) -> float:
    """|final ground phase| of a compensated double sequence whose second
    fragment's amplitudes are scaled by `ratio`."""
    if ratio <= 0:
        raise ValueError("amplitude ratio must be positive")
    if step_divisor is None:
        step_divisor = SEQUENCE_DIVISOR if mode == "stirap" else ARP_DIVISOR
    if mode == "stirap":
        p = stirap or StirapParams.default()
        schedule = P.double_stirap(p.omega1, p.omega2, p.t1, p.t2, p.tau,
                                   p.delta, switch_detuning=True,
                                   reverse_amplitude_scale=ratio)
        space = SymmetricSpace(THREE_LEVEL, [n_atoms])
    elif mode == "arp":
        p = arp or ArpParams.default()
        schedule = P.double_arp(p.omega0, p.tau, p.alpha, p.separation,
                                invert_phase=True,
                                second_amplitude_scale=ratio)
        space = SymmetricSpace(TWO_LEVEL, [n_atoms])
    else:
        raise ValueError(f"unknown mode {mode!r} (expected 'stirap' or 'arp')")
    psi0 = np.zeros(space.dimension, dtype=np.complex128)
    psi0[space.ground_index] = 1.0
    trace = propagate_state(space, schedule, psi0, 2, step_divisor=step_divisor)
    return abs(wrap_phase(trace.final_ground_phase()))

"""Derived quantities: unwrapped phases, Poisson loading, blockade estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .dynamics import EvolutionTrace

__all__ = [
    "UndefinedPhaseError",
    "PhaseRecord",
    "SweepResult",
    "BlockadeEstimate",
    "unwrap_phase",
    "lenient_phase_series",
    "poisson_loading",
    "poisson_average",
    "blockade_estimate",
]

PHASE_MAGNITUDE_THRESHOLD = 1e-6


class UndefinedPhaseError(ValueError):
    """Ground amplitude too small for a well-defined phase."""

    def __init__(self, time: float, magnitude: float):
        super().__init__(
            f"ground amplitude magnitude {magnitude:.3e} at t = {time:.6f} us "
            f"is below {PHASE_MAGNITUDE_THRESHOLD}; the phase is undefined "
            f"there -- restrict phase reporting to the final time")
        self.time = time
        self.magnitude = magnitude


@dataclass
class PhaseRecord:
    """Unwrapped ground-amplitude phase, zero at the first sample."""

    times: np.ndarray
    phase: np.ndarray
    chi: float | None = None  # transfer phase from a calibration run, if any


def unwrap_phase(trace: EvolutionTrace,
                 threshold: float = PHASE_MAGNITUDE_THRESHOLD) -> PhaseRecord:
    """Continuous ground-state phase over a trace.

    Every sample must have ground amplitude magnitude above `threshold`,
    otherwise the phase is ill-defined mid-trace and an error names the
    first offending time.
    """
    mags = np.abs(trace.ground_amplitude)
    bad = np.nonzero(mags < threshold)[0]
    if bad.size:
        k = int(bad[0])
        raise UndefinedPhaseError(float(trace.times[k]), float(mags[k]))
    phase = np.unwrap(np.angle(trace.ground_amplitude))
    return PhaseRecord(times=trace.times.copy(), phase=phase - phase[0])


def lenient_phase_series(times: np.ndarray, amplitudes: np.ndarray,
                         threshold: float = PHASE_MAGNITUDE_THRESHOLD) -> np.ndarray:
    """Unwrapped phase tolerating low-magnitude gaps.

    Samples below `threshold` carry the last defined value; unwrapping
    resumes across each gap relative to the last defined sample.  Used for
    trace serialization where transfers empty the ground state mid-run.
    """
    amps = np.asarray(amplitudes)
    out = np.zeros(amps.size, dtype=np.float64)
    last_phase = 0.0
    have_ref = False
    offset = 0.0
    for k in range(amps.size):
        if abs(amps[k]) < threshold:
            out[k] = last_phase
            continue
        raw = float(np.angle(amps[k]))
        if not have_ref:
            offset = -raw
            have_ref = True
            value = 0.0
        else:
            value = raw + offset
            while value - last_phase > math.pi:
                value -= 2.0 * math.pi
                offset -= 2.0 * math.pi
            while value - last_phase < -math.pi:
                value += 2.0 * math.pi
                offset += 2.0 * math.pi
        out[k] = value
        last_phase = value
    return out


@dataclass
class SweepResult:
    """One metric sampled along one axis."""

    axis_name: str
    axis_values: np.ndarray
    metric_name: str
    metric_values: np.ndarray
    metadata: dict

    def __post_init__(self) -> None:
        if len(self.axis_values) != len(self.metric_values):
            raise ValueError("axis and metric lengths differ")


def poisson_loading(mean: float, count: int) -> float:
    """Probability of loading exactly `count` atoms at mean number `mean`."""
    if mean <= 0:
        raise ValueError(f"mean atom number must be positive, got {mean}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    return math.exp(count * math.log(mean) - mean - math.lgamma(count + 1))


def poisson_average(metric: Mapping[int, float] | Callable[[int], float],
                    mean: float, n_max: int) -> float:
    """Loading-statistics average of a per-atom-number metric.

    Averages over N = 1..n_max with renormalized weights; empty loads
    (N = 0) are register defects, excluded here and reported separately via
    poisson_loading(mean, 0).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    get = metric.__getitem__ if isinstance(metric, Mapping) else metric
    weights = np.array([poisson_loading(mean, n) for n in range(1, n_max + 1)])
    values = np.array([float(get(n)) for n in range(1, n_max + 1)])
    return float(np.dot(weights, values) / np.sum(weights))


@dataclass
class BlockadeEstimate:
    """Interaction strength vs collective coupling at one separation."""

    c6: float              # MHz * um^6
    separation: float      # um
    interaction: float     # MHz
    collective_rabi: float  # sqrt(N) * nu, MHz
    ratio: float

    @property
    def blockaded(self) -> bool:
        return self.ratio > 10.0


def blockade_estimate(c6: float, separation: float, rabi_mhz: float,
                      n_atoms: int) -> BlockadeEstimate:
    """V = C6 / R^6 compared with the collectively enhanced Rabi frequency."""
    if separation <= 0:
        raise ValueError(f"separation must be positive, got {separation}")
    if n_atoms < 1:
        raise ValueError("atom count must be >= 1")
    v = c6 / separation ** 6
    coll = math.sqrt(n_atoms) * rabi_mhz
    return BlockadeEstimate(c6=c6, separation=separation, interaction=v,
                            collective_rabi=coll,
                            ratio=v / coll if coll > 0 else math.inf)

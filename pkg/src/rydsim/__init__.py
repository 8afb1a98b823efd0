"""Collective dynamics of Rydberg-blockaded atomic ensembles.

Simulates phase-compensated double adiabatic-passage sequences and the
ensemble one- and two-qubit gate protocols built on them, with pure-state
and density-matrix propagation.
"""

from .statespace import (FIVE_LEVEL, THREE_LEVEL, TWO_LEVEL, CollectiveBasis,
                         DensityMatrix, LevelScheme, StateVector, build_basis,
                         symmetric_singly_excited)
from .pulses import (DetuningProfile, DriveTerm, GaussianEnvelope, LevelShift,
                     PulseSchedule, RectEnvelope, double_arp, double_stirap,
                     evaluate, microwave_rotation, single_stirap)
from .dynamics import (DecayRates, EvolutionTrace, IntegrationError,
                       hamiltonian_at, lindblad_apply, propagate_master,
                       propagate_schrodinger)
from .protocols import (ArpParams, GateParams, GateReport, LogicalEncoding,
                        SequenceSummary, StirapParams, U_CNOT, cnot,
                        measure_chi, phase_error_sweep, pi_pulse_baseline,
                        pi_pulse_baseline_exact, ramsey, ramsey_reference,
                        run_double_arp, run_double_stirap, single_qubit_gate)
from .analysis import (BlockadeEstimate, PhaseRecord, SweepResult,
                       UndefinedPhaseError, blockade_estimate, poisson_average,
                       poisson_loading, unwrap_phase)

__version__ = "0.1.0"

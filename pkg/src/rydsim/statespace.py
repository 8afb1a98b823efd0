"""Blockade-restricted collective bases for one or two atomic ensembles.

Each atom carries one label from a :class:`LevelScheme`.  A collective
configuration assigns a label to every atom; perfect blockade removes every
configuration holding more than one Rydberg excitation across all ensembles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "LevelScheme",
    "CollectiveBasis",
    "StateVector",
    "DensityMatrix",
    "build_basis",
    "symmetric_singly_excited",
    "TWO_LEVEL",
    "THREE_LEVEL",
    "FIVE_LEVEL",
]


@dataclass(frozen=True)
class LevelScheme:
    """Single-atom level structure split into ground and Rydberg manifolds."""

    ground_levels: tuple[str, ...]
    rydberg_levels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.ground_levels or not self.rydberg_levels:
            raise ValueError("ground_levels and rydberg_levels must be nonempty")
        labels = self.ground_levels + self.rydberg_levels
        if len(set(labels)) != len(labels):
            raise ValueError(f"level labels must be unique, got {labels}")

    @property
    def levels(self) -> tuple[str, ...]:
        """All labels in canonical order: ground levels first."""
        return self.ground_levels + self.rydberg_levels

    def is_rydberg(self, label: str) -> bool:
        return label in self.rydberg_levels

    def position(self, label: str) -> int:
        """Index of a label in the canonical order."""
        try:
            return self.levels.index(label)
        except ValueError:
            raise ValueError(f"unknown level label {label!r}") from None


# Schemes used by the shipped protocols.
TWO_LEVEL = LevelScheme(("0",), ("r",))
THREE_LEVEL = LevelScheme(("0", "e"), ("r",))
FIVE_LEVEL = LevelScheme(("0", "1", "e"), ("r0", "r1"))


Configuration = tuple  # per-atom level labels, length = total atom count


@dataclass
class CollectiveBasis:
    """Ordered, indexed set of blockade-allowed configurations."""

    scheme: LevelScheme
    atom_counts: tuple[int, ...]
    configurations: list[Configuration]
    index: dict[Configuration, int] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.configurations)

    @property
    def n_total(self) -> int:
        return sum(self.atom_counts)

    def ensemble_positions(self, ensemble: int) -> range:
        """Atom indices belonging to one ensemble."""
        start = sum(self.atom_counts[:ensemble])
        return range(start, start + self.atom_counts[ensemble])

    def rydberg_count(self, config: Configuration) -> int:
        return sum(1 for lab in config if self.scheme.is_rydberg(lab))

    def count_in_level(self, config: Configuration, level: str,
                       ensemble: int | None = None) -> int:
        if ensemble is None:
            return sum(1 for lab in config if lab == level)
        return sum(1 for i in self.ensemble_positions(ensemble)
                   if config[i] == level)

    def all_ground(self) -> Configuration:
        return tuple(self.scheme.ground_levels[0] for _ in range(self.n_total))

    @property
    def all_ground_index(self) -> int:
        return self.index[self.all_ground()]


def build_basis(scheme: LevelScheme, atom_counts: list[int] | tuple[int, ...]) -> CollectiveBasis:
    """Enumerate all configurations with at most one Rydberg excitation.

    Configurations are ordered lexicographically in the scheme's canonical
    level order (ground levels first), so basis layouts are reproducible.
    """
    counts = tuple(int(n) for n in atom_counts)
    if len(counts) not in (1, 2):
        raise ValueError("atom_counts must have length 1 or 2")
    if any(n < 1 for n in counts):
        raise ValueError(f"atom counts must be positive, got {counts}")

    n_total = sum(counts)
    ryd = set(scheme.rydberg_levels)
    configs = [
        c for c in product(scheme.levels, repeat=n_total)
        if sum(1 for lab in c if lab in ryd) <= 1
    ]
    index = {c: k for k, c in enumerate(configs)}
    return CollectiveBasis(scheme=scheme, atom_counts=counts,
                           configurations=configs, index=index)


@dataclass
class StateVector:
    """Complex amplitudes over a collective basis."""

    amplitudes: np.ndarray
    basis: CollectiveBasis

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.basis.dimension,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, "
                f"expected ({self.basis.dimension},)")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def ground_amplitude(self) -> complex:
        return complex(self.amplitudes[self.basis.all_ground_index])

    def population(self, config: Configuration) -> float:
        return float(abs(self.amplitudes[self.basis.index[config]]) ** 2)

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class DensityMatrix:
    """Complex matrix over basis x basis."""

    entries: np.ndarray
    basis: CollectiveBasis

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=np.complex128)
        dim = self.basis.dimension
        if self.entries.shape != (dim, dim):
            raise ValueError(
                f"density matrix has shape {self.entries.shape}, "
                f"expected ({dim}, {dim})")

    @classmethod
    def from_pure(cls, psi: StateVector) -> "DensityMatrix":
        return cls(np.outer(psi.amplitudes, psi.amplitudes.conj()), psi.basis)

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


def symmetric_singly_excited(basis: CollectiveBasis, level: str,
                             ensemble: int = 0) -> StateVector:
    """Equal superposition with one atom of `ensemble` in `level`.

    All other atoms (in every ensemble) sit in the first ground level.
    """
    if level not in basis.scheme.levels:
        raise ValueError(f"unknown level label {level!r}")
    if not 0 <= ensemble < len(basis.atom_counts):
        raise ValueError(f"ensemble index {ensemble} out of range")

    n = basis.atom_counts[ensemble]
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    base = list(basis.all_ground())
    for pos in basis.ensemble_positions(ensemble):
        config = list(base)
        config[pos] = level
        amps[basis.index[tuple(config)]] = 1.0 / math.sqrt(n)
    return StateVector(amps, basis)

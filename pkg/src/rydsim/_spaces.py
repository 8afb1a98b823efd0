"""State-space backends for the propagation engine.

Two interchangeable backends expose the same small interface:

* :class:`FullSpace` works on the distinguishable-atom configuration basis.
* :class:`SymmetricSpace` works on the permutation-symmetric occupation
  sector, which is exponentially smaller and is the one the drive terms
  actually explore when every pulse addresses a whole ensemble and the
  initial state is symmetric.  Protocol runners use it for speed; its
  equivalence to the full basis is covered by tests.

Interface required by the engine:
  dimension, ground_index, coupling(x, y, target), level_counts(level, target)
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np

from .statespace import CollectiveBasis, LevelScheme, build_basis

ALL_ENSEMBLES = -1


def _target_list(target: int, n_ensembles: int) -> list[int]:
    if target == ALL_ENSEMBLES:
        return list(range(n_ensembles))
    if not 0 <= target < n_ensembles:
        raise ValueError(f"ensemble index {target} out of range")
    return [target]


class FullSpace:
    """Engine backend over the distinguishable-atom basis."""

    def __init__(self, basis: CollectiveBasis):
        self.basis = basis
        self.scheme = basis.scheme
        self.atom_counts = basis.atom_counts

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def ground_index(self) -> int:
        return self.basis.all_ground_index

    def coupling(self, x: str, y: str, target: int = ALL_ENSEMBLES):
        """Directed entries (to, from, 1.0) flipping one atom x -> y."""
        if x not in self.scheme.levels or y not in self.scheme.levels or x == y:
            raise ValueError(f"invalid transition ({x!r}, {y!r})")
        rows, cols, vals = [], [], []
        positions = [p for e in _target_list(target, len(self.atom_counts))
                     for p in self.basis.ensemble_positions(e)]
        for i, config in enumerate(self.basis.configurations):
            for pos in positions:
                if config[pos] != x:
                    continue
                flipped = config[:pos] + (y,) + config[pos + 1:]
                j = self.basis.index.get(flipped)
                if j is not None:  # flips into removed configs are absent
                    rows.append(j)
                    cols.append(i)
                    vals.append(1.0)
        return (np.asarray(rows, dtype=np.int64),
                np.asarray(cols, dtype=np.int64),
                np.asarray(vals, dtype=np.float64))

    def level_counts(self, level: str, target: int = ALL_ENSEMBLES) -> np.ndarray:
        if level not in self.scheme.levels:
            raise ValueError(f"unknown level label {level!r}")
        ensembles = _target_list(target, len(self.atom_counts))
        out = np.zeros(self.dimension, dtype=np.float64)
        for i, config in enumerate(self.basis.configurations):
            out[i] = sum(self.basis.count_in_level(config, level, e)
                         for e in ensembles)
        return out

    def singly_excited_index(self, level: str, ensemble: int = 0):
        """Full-basis amplitude vector of the symmetric singly-excited state."""
        from .statespace import symmetric_singly_excited
        return symmetric_singly_excited(self.basis, level, ensemble).amplitudes


class SymmetricSpace:
    """Engine backend over per-ensemble occupation numbers.

    A state is a tuple (one entry per ensemble) of occupation tuples aligned
    with ``scheme.levels``; at most one Rydberg excitation exists across all
    ensembles.  Uniform drives act with bosonic matrix elements
    sqrt(n_x (n_y + 1)).
    """

    def __init__(self, scheme: LevelScheme, atom_counts: list[int] | tuple[int, ...]):
        counts = tuple(int(n) for n in atom_counts)
        if len(counts) not in (1, 2) or any(n < 1 for n in counts):
            raise ValueError(f"bad atom counts {counts}")
        self.scheme = scheme
        self.atom_counts = counts
        self.levels = scheme.levels
        self._ryd = [scheme.position(l) for l in scheme.rydberg_levels]

        self.states = self._enumerate()
        self.index = {s: k for k, s in enumerate(self.states)}

    # -- construction ------------------------------------------------------

    def _ensemble_occs(self, n: int, ryd_level: int | None) -> list[tuple[int, ...]]:
        """Occupations of n atoms: all ground, or one atom in ryd_level."""
        g = len(self.scheme.ground_levels)
        n_ground = n if ryd_level is None else n - 1
        occs = []
        for combo in self._compositions(n_ground, g):
            occ = [0] * len(self.levels)
            occ[:g] = combo
            if ryd_level is not None:
                occ[ryd_level] = 1
            occs.append(tuple(occ))
        return occs

    @staticmethod
    def _compositions(n: int, k: int) -> list[tuple[int, ...]]:
        if k == 1:
            return [(n,)]
        out = []
        for first in range(n, -1, -1):
            for rest in SymmetricSpace._compositions(n - first, k - 1):
                out.append((first,) + rest)
        return out

    def _enumerate(self):
        per_ground = [self._ensemble_occs(n, None) for n in self.atom_counts]
        states = [tuple(combo) for combo in _product_lists(per_ground)]
        for holder in range(len(self.atom_counts)):
            for rl in self._ryd:
                if self.atom_counts[holder] < 1:
                    continue
                parts = [
                    self._ensemble_occs(self.atom_counts[e], rl if e == holder else None)
                    for e in range(len(self.atom_counts))
                ]
                states.extend(tuple(combo) for combo in _product_lists(parts))
        return sorted(set(states))

    # -- engine interface --------------------------------------------------

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def ground_index(self) -> int:
        return self.index[self._ground_state()]

    def _ground_state(self):
        occs = []
        for n in self.atom_counts:
            occ = [0] * len(self.levels)
            occ[0] = n
            occs.append(tuple(occ))
        return tuple(occs)

    def coupling(self, x: str, y: str, target: int = ALL_ENSEMBLES):
        ix, iy = self.scheme.position(x), self.scheme.position(y)
        if ix == iy:
            raise ValueError("transition must connect distinct levels")
        rows, cols, vals = [], [], []
        for i, state in enumerate(self.states):
            for e in _target_list(target, len(self.atom_counts)):
                occ = state[e]
                if occ[ix] == 0:
                    continue
                new_occ = list(occ)
                new_occ[ix] -= 1
                new_occ[iy] += 1
                new_state = state[:e] + (tuple(new_occ),) + state[e + 1:]
                j = self.index.get(new_state)
                if j is None:
                    continue
                rows.append(j)
                cols.append(i)
                vals.append(math.sqrt(occ[ix] * (occ[iy] + 1)))
        return (np.asarray(rows, dtype=np.int64),
                np.asarray(cols, dtype=np.int64),
                np.asarray(vals, dtype=np.float64))

    def level_counts(self, level: str, target: int = ALL_ENSEMBLES) -> np.ndarray:
        il = self.scheme.position(level)
        out = np.zeros(self.dimension, dtype=np.float64)
        for i, state in enumerate(self.states):
            out[i] = sum(state[e][il]
                         for e in _target_list(target, len(self.atom_counts)))
        return out

    # -- helpers -----------------------------------------------------------

    def singly_excited_index(self, level: str, ensemble: int = 0) -> int:
        """Index of the state with one atom of `ensemble` in `level`."""
        il = self.scheme.position(level)
        state = list(self._ground_state())
        occ = list(state[ensemble])
        occ[0] -= 1
        occ[il] += 1
        state[ensemble] = tuple(occ)
        key = tuple(state)
        if key not in self.index:
            raise ValueError(f"no singly-excited state for level {level!r}")
        return self.index[key]

    def occupation_index(self, occs) -> int:
        return self.index[tuple(tuple(o) for o in occs)]

    def multiplicity(self, state) -> int:
        m = 1
        for e, occ in enumerate(state):
            m *= math.factorial(self.atom_counts[e]) // math.prod(
                math.factorial(k) for k in occ)
        return m

    def expand(self, amplitudes: np.ndarray, basis: CollectiveBasis) -> np.ndarray:
        """Map symmetric amplitudes onto the full configuration basis."""
        if basis.scheme != self.scheme or basis.atom_counts != self.atom_counts:
            raise ValueError("basis does not match this symmetric space")
        full = np.zeros(basis.dimension, dtype=np.complex128)
        for amp, state in zip(amplitudes, self.states):
            if amp == 0:
                continue
            weight = amp / math.sqrt(self.multiplicity(state))
            for config in self._configs_of(state):
                full[basis.index[config]] = weight
        return full

    def _configs_of(self, state):
        per_ens = []
        for e, occ in enumerate(state):
            labels = []
            for il, k in enumerate(occ):
                labels.extend([self.levels[il]] * k)
            per_ens.append(sorted(set(permutations(labels))))
        for combo in _product_lists(per_ens):
            yield tuple(lab for part in combo for lab in part)


def _product_lists(lists):
    """Cartesian product of a list of lists, yielding tuples."""
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product_lists(lists[1:]):
            yield (head,) + rest


def full_space_for(scheme: LevelScheme, atom_counts) -> FullSpace:
    return FullSpace(build_basis(scheme, atom_counts))

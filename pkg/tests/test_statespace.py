import math
from itertools import product

import numpy as np
import pytest

from rydsim.statespace import (FIVE_LEVEL, THREE_LEVEL, TWO_LEVEL, LevelScheme,
                               build_basis, symmetric_singly_excited)

SCHEMES = [TWO_LEVEL, THREE_LEVEL, FIVE_LEVEL,
           LevelScheme(("0", "1", "e"), ("r",))]


def brute_force_count(scheme, n_total):
    ryd = set(scheme.rydberg_levels)
    return sum(1 for c in product(scheme.levels, repeat=n_total)
               if sum(lab in ryd for lab in c) <= 1)


def formula(scheme, n_total):
    g, r = len(scheme.ground_levels), len(scheme.rydberg_levels)
    return g ** n_total + r * n_total * g ** (n_total - 1)


@pytest.mark.parametrize("scheme", SCHEMES)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dimension_formula_matches_enumeration(scheme, n):
    basis = build_basis(scheme, [n])
    assert basis.dimension == formula(scheme, n)
    assert basis.dimension == brute_force_count(scheme, n)


@pytest.mark.parametrize("counts", [(1, 1), (2, 1), (2, 2)])
def test_two_ensemble_dimbased_on_total(counts):
    basis = build_basis(FIVE_LEVEL, counts)
    assert basis.dimension == formula(FIVE_LEVEL, sum(counts))


def test_known_dimensions():
    assert build_basis(THREE_LEVEL, [2]).dimension == 8
    assert build_basis(TWO_LEVEL, [2]).dimension == 3
    assert build_basis(FIVE_LEVEL, [1]).dimension == 5
    assert build_basis(THREE_LEVEL, [4]).dimension == 48


def test_two_atom_configuration_order():
    basis = build_basis(THREE_LEVEL, [2])
    got = ["".join(c) for c in basis.configurations]
    assert got == ["00", "0e", "0r", "e0", "ee", "er", "r0", "re"]


def test_arp_two_atom_configurations():
    basis = build_basis(TWO_LEVEL, [2])
    assert ["".join(c) for c in basis.configurations] == ["00", "0r", "r0"]


@pytest.mark.parametrize("scheme", SCHEMES)
def test_index_is_identity_on_positions(scheme):
    basis = build_basis(scheme, [3])
    for k, config in enumerate(basis.configurations):
        assert basis.index[config] == k


@pytest.mark.parametrize("counts", [(3,), (2, 2)])
def test_blockade_constraint_joint(counts):
    basis = build_basis(FIVE_LEVEL, counts)
    for config in basis.configurations:
        assert basis.rydberg_count(config) <= 1


def test_build_basis_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_basis(THREE_LEVEL, [0])
    with pytest.raises(ValueError):
        build_basis(THREE_LEVEL, [])
    with pytest.raises(ValueError):
        build_basis(THREE_LEVEL, [1, 1, 1])
    with pytest.raises(ValueError):
        LevelScheme((), ("r",))
    with pytest.raises(ValueError):
        LevelScheme(("0", "0"), ("r",))
    with pytest.raises(ValueError):
        LevelScheme(("0",), ("0",))


def test_symmetric_singly_excited_single_atom():
    basis = build_basis(TWO_LEVEL, [1])
    sv = symmetric_singly_excited(basis, "r")
    assert sv.amplitudes[basis.index[("r",)]] == pytest.approx(1.0)
    assert sv.norm() == pytest.approx(1.0)


def test_symmetric_singly_excited_two_atoms():
    basis = build_basis(THREE_LEVEL, [2])
    sv = symmetric_singly_excited(basis, "e")
    amp = 1.0 / math.sqrt(2.0)
    assert sv.amplitudes[basis.index[("e", "0")]] == pytest.approx(amp)
    assert sv.amplitudes[basis.index[("0", "e")]] == pytest.approx(amp)
    assert np.count_nonzero(sv.amplitudes) == 2


def test_symmetric_singly_excited_three_atoms():
    basis = build_basis(THREE_LEVEL, [3])
    sv = symmetric_singly_excited(basis, "r")
    nonzero = sv.amplitudes[np.abs(sv.amplitudes) > 0]
    assert nonzero.size == 3
    assert np.allclose(nonzero, 1.0 / math.sqrt(3.0))
    assert sv.norm() == pytest.approx(1.0)


def test_symmetric_singly_excited_second_ensemble():
    basis = build_basis(FIVE_LEVEL, [1, 2])
    sv = symmetric_singly_excited(basis, "r1", ensemble=1)
    assert sv.norm() == pytest.approx(1.0)
    assert sv.amplitudes[basis.index[("0", "r1", "0")]] == pytest.approx(1 / math.sqrt(2))


def test_symmetric_singly_excited_rejects_unknown_level():
    basis = build_basis(THREE_LEVEL, [2])
    with pytest.raises(ValueError):
        symmetric_singly_excited(basis, "x")
    with pytest.raises(ValueError):
        symmetric_singly_excited(basis, "r", ensemble=1)

from math import sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpod_holonomy.errors import ArityMismatch, DecoupledSystem, InvalidOrder, SpectralAnomaly
from mpod_holonomy.fock import enumerate_layer, layer_size
from mpod_holonomy.mpod import (CouplingPoint, DegeneracyTable, bright_dimension, build_hamiltonian,
                                dark_dimension_closed_form, dark_dimension_discrepancy,
                                dark_dimension_oracle, decompose, spectrum)

couplings = st.lists(st.complex_numbers(min_magnitude=0.3, max_magnitude=2.0), min_size=1, max_size=5)


def brute_dark_count(n, arms, rng):
    if n == 0:
        return 1
    k = rng.uniform(0.5, 2, arms) * np.exp(2j * np.pi * rng.random(arms))
    h = build_hamiltonian(enumerate_layer(n, arms + 1), CouplingPoint(k))
    eps = np.linalg.norm(k)
    return int(np.sum(np.abs(np.linalg.eigvalsh(h)) < 1e-8 * eps))


def test_single_photon_tripod_matrix():
    basis = enumerate_layer(1, 4)
    h = build_hamiltonian(basis, CouplingPoint([1, 1, 1]))
    centre = basis.index_of("0001")
    expect = np.zeros((4, 4))
    for occ in ("1000", "0100", "0010"):
        expect[centre, basis.index_of(occ)] = expect[basis.index_of(occ), centre] = 1
    assert np.array_equal(h, expect)


def test_two_photon_matrix_elements_at_third_arm_point():
    kappa = 0.7
    basis = enumerate_layer(2, 4)
    h = build_hamiltonian(basis, CouplingPoint([0, 0, kappa]))
    bra = basis.vector("0011").conj()
    assert bra @ h @ basis.vector("1010") == 0
    assert bra @ h @ basis.vector("0020") == pytest.approx(sqrt(2) * kappa, abs=1e-15)


def test_generic_tripod_ladder():
    dec = spectrum(2, CouplingPoint([0.4 + 0.3j, 1.1, -0.8j]))
    eps = dec.energy_scale
    assert dec.orders == (-2, -1, 0, 1, 2)
    assert [lv.multiplicity for lv in dec.levels] == [1, 2, 4, 2, 1]
    assert [lv.energy for lv in dec.levels] == pytest.approx([-2 * eps, -eps, 0, eps, 2 * eps])


@pytest.mark.parametrize("arms", [1, 2, 3, 5])
def test_single_photon_ladder(arms):
    dec = spectrum(1, CouplingPoint(np.linspace(0.5, 1.5, arms)))
    assert dec.multiplicities() == ({-1: 1, 1: 1} if arms == 1 else {-1: 1, 0: arms - 1, 1: 1})


def test_decoupled_point_raises():
    with pytest.raises(DecoupledSystem):
        spectrum(2, CouplingPoint([0, 0, 0]))


def test_arity_and_order_errors():
    with pytest.raises(ArityMismatch):
        build_hamiltonian(enumerate_layer(2, 3), CouplingPoint([1, 1, 1]))
    with pytest.raises(ArityMismatch):
        CouplingPoint([])
    with pytest.raises(InvalidOrder):
        spectrum(1, CouplingPoint([1, 1])).level(2)
    with pytest.raises(InvalidOrder):
        bright_dimension(2, 3, 0)


def test_non_ladder_matrix_is_rejected():
    h = np.diag([0.0, 0.5])
    with pytest.raises(SpectralAnomaly):
        decompose(h, CouplingPoint([1.0]))


@pytest.mark.parametrize("n, arms, d", [(2, 3, 4), (1, 3, 2), (1, 5, 4), (3, 3, 6), (0, 4, 1)])
def test_dark_dimension_oracle_values(n, arms, d):
    assert dark_dimension_oracle(n, arms) == d


def test_closed_form_dark_count():
    assert dark_dimension_closed_form(3, 3) == 6
    assert dark_dimension_closed_form(1, 4) == 3
    assert dark_dimension_closed_form(2, 3) == 3
    assert dark_dimension_discrepancy(2, 3) == {"photon_number": 2, "arms": 3, "oracle": 4,
                                                "closed_form": 3, "difference": 1}


@pytest.mark.parametrize("n, arms, k, d", [(2, 3, 1, 2), (3, 3, 1, 4), (4, 3, 4, 1), (3, 5, 3, 1)])
def test_bright_dimension_values(n, arms, k, d):
    assert bright_dimension(n, arms, k) == d == bright_dimension(n, arms, -k)


def test_coordinate_shift():
    p = CouplingPoint.from_polar([1.0, 2.0], [0.0, 0.5])
    assert p.shifted("r2", 0.5).couplings[1] == pytest.approx(2.5 * np.exp(0.5j))
    assert p.shifted("theta1", 1.0).couplings[0] == pytest.approx(np.exp(1j))
    with pytest.raises(ArityMismatch):
        p.shifted("r3", 0.1)


@given(st.integers(0, 6), st.integers(1, 6))
def test_oracle_table_is_symmetric_and_complete(n, arms):
    table = DegeneracyTable.from_oracle(n, arms)
    assert table.is_symmetric()
    assert table.is_complete()
    assert table.total == layer_size(n, arms + 1)


@given(st.integers(0, 8), st.integers(2, 6))
def test_closed_form_agrees_for_odd_and_misses_one_for_even(n, arms):
    assert dark_dimension_discrepancy(n, arms)["difference"] == (1 if n % 2 == 0 else 0)


@given(st.integers(0, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_oracle_matches_brute_force_diagonalization(n, arms, seed):
    assert dark_dimension_oracle(n, arms) == brute_dark_count(n, arms, np.random.default_rng(seed))


@given(st.integers(0, 3), couplings)
def test_decomposition_invariants(n, ks):
    point = CouplingPoint(ks)
    basis = enumerate_layer(n, point.arms + 1)
    h = build_hamiltonian(basis, point)
    assert np.linalg.norm(h - h.conj().T) == 0
    dec = decompose(h, point)
    assert dec.dim == basis.dim
    frames = np.hstack([lv.frame for lv in dec.levels])
    assert np.allclose(frames.conj().T @ frames, np.eye(basis.dim), atol=1e-10)
    for lv in dec.levels:
        assert np.linalg.norm(h @ lv.frame - lv.energy * lv.frame) <= 1e-8 * dec.energy_scale
    assert DegeneracyTable.from_spectrum(n, point.arms, dec).entries == \
        DegeneracyTable.from_oracle(n, point.arms).entries


@given(st.integers(0, 5), st.integers(1, 5))
def test_table_csv_round_trip(n, arms):
    table = DegeneracyTable.from_oracle(n, arms)
    text = table.to_csv()
    assert text.splitlines()[0] == "N,M,n,dimension"
    (back,) = DegeneracyTable.parse_csv(text)
    assert back == table

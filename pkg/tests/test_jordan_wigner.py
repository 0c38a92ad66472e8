from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hubbard_qsim.jordan_wigner import (OrbitalIndex, Spin, all_orbitals, annihilation_op, creation_op,
                                        d_local, d_string, hermitian_probe, jw_string_length,
                                        number_op, orbital_of_qubit, qubit_index, t_local, t_string,
                                        total_number)
from hubbard_qsim.pauli import to_dense

from oracles import fock_annihilation, mode


class TestIndexing:
    def test_qubit_map(self):
        assert qubit_index(1, "up") == 0
        assert qubit_index(1, "down") == 1
        assert qubit_index(3, Spin.DOWN) == 5

    @given(st.integers(0, 60))
    def test_inverse_map(self, q):
        assert orbital_of_qubit(q).qubit == q

    def test_spin_aliases(self):
        assert Spin.parse("↓") is Spin.DOWN and Spin.parse("u") is Spin.UP
        with pytest.raises(ValueError):
            Spin.parse("sideways")

    def test_site_out_of_range(self):
        with pytest.raises(ValueError):
            creation_op(OrbitalIndex(3, "up"), 2)

    def test_string_length(self):
        assert jw_string_length(OrbitalIndex(1, "up"), OrbitalIndex(3, "up")) == 4


class TestFockOracle:
    """Every operator against explicit occupation-basis matrices."""

    @pytest.mark.parametrize("L_c", [1, 2, 3])
    def test_annihilation_matches_fock(self, L_c):
        n = 2 * L_c
        for orb in all_orbitals(L_c):
            assert np.allclose(to_dense(annihilation_op(orb, L_c)), fock_annihilation(orb.qubit, n))

    def test_occupied_count_convention_is_a_gauge(self):
        for q in range(4):
            std = fock_annihilation(q, 4, count="occupied")
            assert np.allclose(fock_annihilation(q, 4), (-1) ** q * std)

    def test_number_is_projector_on_one(self):
        n = to_dense(number_op(OrbitalIndex(1, "up"), 1))
        assert np.allclose(n, np.diag([0, 1, 0, 1]))

    def test_probes(self):
        orb = OrbitalIndex(2, "down")
        c = fock_annihilation(orb.qubit, 4)
        assert np.allclose(to_dense(hermitian_probe(orb, "X", 2)), c + c.conj().T)
        assert np.allclose(to_dense(hermitian_probe(orb, "Y", 2)), 1j * (c - c.conj().T))
        with pytest.raises(ValueError):
            hermitian_probe(orb, "Z", 2)

    def test_hopping_and_pairing_strings(self):
        L = 3
        c = {(i, s): fock_annihilation(mode(i, s), 2 * L) for i in (1, 2, 3) for s in ("up", "down")}
        hop = c[1, "up"].conj().T @ c[3, "up"]
        assert np.allclose(to_dense(t_string(1, 3, "up", L)), hop + hop.conj().T)
        pair = c[1, "down"].conj().T @ c[2, "up"].conj().T
        assert np.allclose(to_dense(d_string(1, 2, "down", L)), pair + pair.conj().T)
        on = c[2, "up"].conj().T @ c[2, "down"].conj().T
        assert np.allclose(to_dense(d_local(2, L)), on + on.conj().T)
        assert np.allclose(to_dense(t_local(2, "down", L)), c[2, "down"].conj().T @ c[2, "down"])

    def test_string_order_enforced(self):
        with pytest.raises(ValueError):
            t_string(2, 1, "up", 2)

    def test_total_number_spectrum(self):
        w = np.linalg.eigvalsh(to_dense(total_number(2)))
        assert sorted(set(np.round(w).astype(int))) == [0, 1, 2, 3, 4]


class TestAnticommutation:
    @pytest.mark.parametrize("L_c", [1, 2, 3])
    def test_canonical_relations(self, L_c):
        ops = {o: to_dense(annihilation_op(o, L_c)) for o in all_orbitals(L_c)}
        eye = np.eye(1 << (2 * L_c))
        for a, b in itertools.product(ops, repeat=2):
            ca, cb = ops[a], ops[b]
            assert np.abs(ca @ cb + cb @ ca).max() <= 1e-12
            assert np.abs(ca @ cb.conj().T + cb.conj().T @ ca - (a == b) * eye).max() <= 1e-12

    @given(st.integers(1, 3), st.data())
    def test_pauli_level_relations(self, L_c, data):
        orbs = all_orbitals(L_c)
        a = data.draw(st.sampled_from(orbs))
        b = data.draw(st.sampled_from(orbs))
        ca, cdb = annihilation_op(a, L_c), creation_op(b, L_c)
        anti = ca * cdb + cdb * ca
        expected = 1.0 if a == b else 0.0
        assert abs(anti.coefficient("I" * 2 * L_c) - expected) < 1e-14
        assert len([t for t in anti.terms if abs(t.coefficient) > 1e-14]) == (1 if a == b else 0)

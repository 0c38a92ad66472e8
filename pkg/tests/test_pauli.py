from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hubbard_qsim.pauli import (DenseLimitError, DimensionError, PauliSum, PauliTerm, anticommutes,
                                anticommutator, commutator, kron_dense, multiply, pauli_decompose,
                                to_dense)

from oracles import pauli_matrix

labels = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))
coeffs = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def same_width(n):
    return st.text("IXYZ", min_size=n, max_size=n)


@st.composite
def sums(draw, n):
    items = draw(st.lists(st.tuples(same_width(n), coeffs), max_size=5))
    return PauliSum.from_dict(dict(items), n_qubits=n)


class TestPauliTerm:
    def test_label_round_trip(self):
        t = PauliTerm.from_label("ZXI")
        assert t.letters == ("I", "X", "Z")
        assert t.label == "ZXI"
        assert t.support == (1, 2)

    def test_rejects_bad_letter(self):
        with pytest.raises(ValueError):
            PauliTerm.from_label("XQ")

    def test_single_qubit_products(self):
        # X Y = i Z and cyclic permutations
        xy = multiply(PauliTerm.from_label("X"), PauliTerm.from_label("Y"))
        assert xy.label == "Z" and xy.coefficient == 1j
        zy = multiply(PauliTerm.from_label("Z"), PauliTerm.from_label("Y"))
        assert zy.label == "X" and zy.coefficient == -1j

    def test_width_mismatch(self):
        with pytest.raises(DimensionError):
            multiply(PauliTerm.from_label("X"), PauliTerm.from_label("XX"))

    @given(labels, st.data())
    def test_product_matches_dense(self, a, data):
        b = data.draw(same_width(len(a)))
        p = multiply(PauliTerm.from_label(a), PauliTerm.from_label(b))
        assert np.allclose(p.coefficient * pauli_matrix(p.label), pauli_matrix(a) @ pauli_matrix(b))

    @given(labels, st.data())
    def test_anticommutation_flag(self, a, data):
        b = data.draw(same_width(len(a)))
        A, B = pauli_matrix(a), pauli_matrix(b)
        assert anticommutes(PauliTerm.from_label(a), PauliTerm.from_label(b)) == np.allclose(A @ B, -B @ A)

    @given(labels)
    def test_kron_matches_bitmask(self, a):
        t = PauliTerm.from_label(a, 0.5 - 1j)
        assert np.allclose(kron_dense(t), to_dense(t))
        assert np.allclose(to_dense(t), (0.5 - 1j) * pauli_matrix(a))


class TestPauliSum:
    def test_canonical_merge_and_drop(self):
        s = PauliSum.from_dict({"XZ": 1.0}) + PauliSum.from_dict({"XZ": -1.0 + 1e-16})
        assert s.is_zero()

    def test_coefficient_lookup(self):
        s = PauliSum.from_dict({"XZ": 2.0, "II": -1})
        assert s.coefficient("XZ") == 2 and s.coefficient("ZZ") == 0

    def test_serialize(self):
        s = PauliSum.from_dict({"XI": 0.5})
        assert s.serialize() == "0.5+0i  XI"

    def test_dense_limit(self, monkeypatch):
        monkeypatch.setenv("HUBBARD_QSIM_DENSE_LIMIT", "2")
        with pytest.raises(DenseLimitError):
            to_dense(PauliSum.identity(3))

    def test_commutator_xy(self):
        c = commutator(PauliTerm.from_label("X"), PauliTerm.from_label("Y"))
        assert c == PauliSum.from_dict({"Z": 2j})
        assert anticommutator(PauliTerm.from_label("X"), PauliTerm.from_label("Y")).is_zero()

    @given(st.integers(1, 3).flatmap(lambda n: st.tuples(sums(n), sums(n))))
    def test_algebra_matches_dense(self, pair):
        a, b = pair
        A, B = to_dense(a), to_dense(b)
        assert np.allclose(to_dense(a + b), A + B)
        assert np.allclose(to_dense(a * b), A @ B)
        assert np.allclose(to_dense(commutator(a, b)), A @ B - B @ A)
        assert np.allclose(to_dense(a.adjoint()), A.conj().T)

    @given(st.integers(1, 3).flatmap(sums))
    def test_decompose_round_trip(self, a):
        assert pauli_decompose(to_dense(a)).allclose(a)

    @given(st.integers(1, 3).flatmap(sums))
    def test_hermitian_iff_real(self, a):
        herm = np.allclose(to_dense(a), to_dense(a).conj().T, atol=1e-12)
        assert a.is_hermitian(1e-12) == herm

    def test_equality_and_hash(self):
        a = PauliSum.from_dict({"XY": 1, "ZZ": 2})
        b = PauliSum.from_dict({"ZZ": 2, "XY": 1})
        assert a == b and hash(a) == hash(b)

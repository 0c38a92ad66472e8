from __future__ import annotations

import json

import pytest

from hubbard_qsim.hamiltonian import parse_geometry
from hubbard_qsim.resources import REFERENCE_ROWS, count_resources, format_table


class TestClosedForms:
    @pytest.mark.parametrize("geom", list(REFERENCE_ROWS))
    def test_formula_columns(self, geom):
        r = count_resources(parse_geometry(geom))
        n, hilbert, qubits, corr, sqg, isw, _ = REFERENCE_ROWS[geom]
        assert (r.n_orbitals, r.qubits, r.correlators, r.csqg_to_tune, r.iswap_to_tune) == (n, qubits, corr, sqg, isw)
        assert r.hilbert_dim == 2 ** n
        if hilbert < 1e15:
            assert r.hilbert_dim == hilbert
        else:
            assert r.hilbert_dim == pytest.approx(hilbert, rel=0.05)

    @pytest.mark.parametrize("geom,count", [("2x2", 96), ("3x3", 336), ("4x4", 768)])
    def test_2d_hopping_matches(self, geom, count):
        r = count_resources(parse_geometry(geom))
        assert r.hopping_gates_per_step == count and r.hopping_flag == "match"

    @pytest.mark.parametrize("geom,single", [("1d:2", 20), ("1d:3", 40), ("1d:4", 60),
                                             ("2x2x2", 368), ("3x3x3", 2520), ("4x4x4", 9792)])
    def test_other_rows_flagged(self, geom, single):
        r = count_resources(parse_geometry(geom))
        assert r.hopping_gates_per_step == single
        assert r.hopping_gates_per_step_double_core == REFERENCE_ROWS[geom][6]
        assert r.hopping_flag.startswith("differs")

    def test_emitted_tuning_within_closed_form(self):
        # each emitted set is bounded by the closed-form tuning budget
        for geom in REFERENCE_ROWS:
            r = count_resources(parse_geometry(geom))
            assert r.csqg_types_emitted <= r.csqg_to_tune
            assert r.iswap_slots_emitted <= r.iswap_to_tune

    def test_unreferenced_geometry(self):
        r = count_resources(parse_geometry("1d:6"))
        assert r.reference_hopping is None and r.hopping_flag == ""

    def test_serialization(self):
        r = count_resources(parse_geometry("2x2"))
        d = json.loads(r.to_json())
        assert d["qubits"] == 9 and d["hopping_flag"] == "match"
        assert d["block_gates"]["kin"]["total"] == 96

    def test_table_alignment(self):
        text = format_table([count_resources(parse_geometry(g)) for g in ("2x2", "4x4")])
        lines = text.splitlines()
        assert len(lines) == 3 and len({len(l) for l in lines}) == 1

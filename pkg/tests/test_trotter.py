from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hubbard_qsim.hamiltonian import parse_geometry
from hubbard_qsim.trotter import (RUTH_A, RUTH_B, FactorCache, ScheduleError, error_metric, evolve_split,
                                  make_schedule, power_law_fit, ruth_step, sweep, trotter_error, ts_step,
                                  two_block_ruth, worst_case_spec)

from oracles import expm


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


class TestSchedules:
    def test_ts2_layout(self):
        s = ts_step()
        assert [g for g, _ in s.factors] == ["Z", "S", "Z", "KD", "Z", "S", "Z"]
        assert s.totals() == {"Z": 1.0, "S": 1.0, "KD": 1.0}

    @pytest.mark.parametrize("n_T", [1, 2, 5])
    def test_totals_are_one(self, n_T):
        for s in (ts_step(1.0, n_T), ruth_step(1.0, n_T)):
            for v in s.totals().values():
                assert v == pytest.approx(1.0)

    def test_ruth_coefficients_sum(self):
        assert sum(RUTH_A) == pytest.approx(1) and sum(RUTH_B) == pytest.approx(1)

    def test_ts2_symmetric(self):
        f = ts_step().factors
        assert f == f[::-1]

    def test_merged(self):
        s = ts_step(1.0, 2).merged()
        assert len(s) == 13 and s.totals() == pytest.approx(ts_step(1.0, 2).totals())

    def test_ruth_nesting_must_permute(self):
        with pytest.raises(ScheduleError):
            ruth_step(1.0, 1, ("Z", "Z", "S"))

    @pytest.mark.parametrize("bad", [dict(dt=0.0), dict(dt=1.0, n_T=0)])
    def test_invalid_step(self, bad):
        with pytest.raises(ScheduleError):
            ts_step(**bad)

    def test_unknown_scheme(self):
        with pytest.raises(ScheduleError):
            make_schedule("leapfrog")


class TestOrders:
    def _local_errors(self, schedule, ops, dts):
        errs = []
        for dt in dts:
            u = np.eye(ops["A"].shape[0], dtype=complex)
            for g, c in schedule.factors:
                u = expm(ops[g], c * dt) @ u
            errs.append(np.linalg.norm(u - expm(ops["A"] + ops["B"], dt)))
        return errs

    def test_two_block_ruth_is_third_order(self):
        rng = np.random.default_rng(7)
        ops = {"A": random_hermitian(rng, 6), "B": random_hermitian(rng, 6)}
        e1, e2 = self._local_errors(two_block_ruth(), ops, [0.02, 0.01])
        assert 14 < e1 / e2 < 18  # local error O(dt^4)

    def test_ts2_global_second_order(self):
        spec = parse_geometry("1d:2", U=4.0, mu_p=1.0, delta_s=1.5)
        r1, r2 = (trotter_error(spec, dt, 1.0, "ts2") for dt in (0.02, 0.01))
        # epsilon is quadratic in the operator error, so fourth power of dt
        assert 14 < r1.epsilon / r2.epsilon < 18


class TestErrorMetric:
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4))
    def test_matches_trace_formula(self, seed, k):
        rng = np.random.default_rng(seed)
        d = 1 << k
        a, b = random_unitary(rng, d), random_unitary(rng, d)
        direct = 1 - abs(np.trace(a @ b.conj().T)) ** 2 / d ** 2
        assert error_metric(a, b) == pytest.approx(direct, abs=1e-12)
        assert 0 <= error_metric(a, b) <= 1

    @given(st.integers(0, 2**32 - 1), st.floats(-np.pi, np.pi))
    def test_global_phase_invisible(self, seed, phi):
        u = random_unitary(np.random.default_rng(seed), 4)
        assert error_metric(np.exp(1j * phi) * u, u) < 1e-14

    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            error_metric(np.eye(2), np.eye(4))
        with pytest.raises(ValueError):
            error_metric(np.eye(4), np.eye(4), L_c=2)


@pytest.fixture(scope="module")
def cache():
    return FactorCache(worst_case_spec())


class TestWorstCase:
    """Frozen values of the 2x2 worst-case study (tau = 3)."""

    def test_frozen_ts2(self, cache):
        row = trotter_error(worst_case_spec(), 0.01, 3.0, "ts2", cache)
        assert row.epsilon == pytest.approx(3.5703663017509737e-06, rel=1e-6)
        assert row.n_factors == 7 * 300

    def test_frozen_ruth(self, cache):
        row = trotter_error(worst_case_spec(), 0.01, 3.0, "ruth", cache)
        assert row.epsilon == pytest.approx(2.4412312135343363e-11, rel=1e-4)

    def test_commuting_case_exact(self):
        spec = parse_geometry("2x2", t=0.0, U=8.0, mu_p=1.0, M_p=0.5)
        rows = sweep(spec, [0.3, 0.1, 0.03], ("ts2", "ruth"))
        assert max(r.epsilon for r in rows) <= 1e-12

    def test_compiled_matches_exact_factors(self):
        spec = parse_geometry("1d:2", U=8.0, mu_p=3.0, M_p=3.0, delta_s=3.0)
        exact, compiled = FactorCache(spec), FactorCache(spec, mode="compiled")
        sched = ts_step()
        diff = np.linalg.norm(evolve_split(exact, sched, 0.01) - evolve_split(compiled, sched, 0.01))
        assert diff <= 1e-6

    def test_compiled_needs_spec(self):
        with pytest.raises(ScheduleError):
            FactorCache(None, operators={}, mode="compiled")

    def test_power_law_fit(self):
        x = np.array([0.1, 0.01, 0.001])
        slope, r2 = power_law_fit(x, 3 * x ** 4)
        assert slope == pytest.approx(4) and r2 == pytest.approx(1)

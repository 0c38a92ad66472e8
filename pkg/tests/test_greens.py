from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hubbard_qsim.greens import (CorrelationSeries, LehmannOracle, Probe, all_pairs, all_probes,
                                 correlation_circuit, evolution_unitary, fd_moments, fornberg_weights,
                                 heisenberg_C, kernel_moments, measure_C, measure_series, nambu_from_probes,
                                 retarded_fourier, retarded_from_poles, retarded_kernel,
                                 retarded_moment_series, run_pipeline, spectral_peaks, sum_rule_error)
from hubbard_qsim.hamiltonian import build_full, parse_geometry
from hubbard_qsim.jordan_wigner import OrbitalIndex, all_orbitals
from hubbard_qsim.simulator import circuit_unitary, exact_unitary, gibbs_state

from oracles import expm, fock_annihilation, hubbard_fock

UP1, DN1, UP2 = OrbitalIndex(1, "up"), OrbitalIndex(1, "down"), OrbitalIndex(2, "up")


def scipy_gibbs(H, beta):
    import scipy.linalg
    r = scipy.linalg.expm(-beta * H)
    return r / np.trace(r)


@pytest.fixture(scope="module")
def system():
    H = hubbard_fock((2,), U=4.0)
    return parse_geometry("1d:2", U=4.0), H, scipy_gibbs(H, 2.0)


@pytest.fixture(scope="module")
def pipeline():
    spec = parse_geometry("1d:2", U=4.0, delta_s=0.8)
    taus = np.arange(0, 1.01, 0.5)
    rho = gibbs_state(build_full(spec), 2.0)
    return spec, taus, measure_series(spec, rho, all_pairs(2), taus)


class TestMeasureC:
    def test_tau_zero_diagonal(self, system):
        spec, H, rho = system
        p = Probe(UP1, "X")
        assert measure_C(rho, p, p, np.eye(16), 2) == pytest.approx(2 + 0j, abs=1e-14)

    def test_probe_measures_zero(self):
        from hubbard_qsim.simulator import QuantumState, run_circuit
        rho = np.eye(16) / 16
        p = Probe(UP2, "Y")
        start = QuantumState(np.kron(np.diag([1, 0]), rho), 5, mixed=True)
        out = run_circuit(correlation_circuit(p, p, 2, np.eye(16)), start)
        assert out.qubit_probability(4, 0) == pytest.approx(1.0)

    @pytest.mark.parametrize("tau", [0.0, 0.35, 1.7])
    def test_against_fock_heisenberg(self, system, tau):
        spec, H, rho = system
        u = expm(H, tau)
        for mu, nu in itertools.product(all_probes(2)[:4], all_probes(2)[2:6]):
            c_nu = fock_annihilation(nu.orbital.qubit, 4)
            c_mu = fock_annihilation(mu.orbital.qubit, 4)
            s_nu = c_nu + c_nu.conj().T if nu.kind == "X" else 1j * (c_nu - c_nu.conj().T)
            s_mu = c_mu + c_mu.conj().T if mu.kind == "X" else 1j * (c_mu - c_mu.conj().T)
            ref = 2 * np.trace(rho @ u.conj().T @ s_nu @ u @ s_mu)
            assert measure_C(rho, mu, nu, u, 2) == pytest.approx(ref, abs=1e-10)

    def test_maximally_mixed_disjoint(self):
        rho = np.eye(16) / 16
        assert abs(measure_C(rho, Probe(UP1, "X"), Probe(UP2, "Y"), np.eye(16), 2)) < 1e-14

    @given(st.integers(0, 63), st.floats(0, 3))
    def test_bounded(self, k, tau):
        spec = parse_geometry("1d:2", U=4.0)
        rho = gibbs_state(build_full(spec), 0.5)
        mu, nu = all_pairs(2)[k]
        val = measure_C(rho, mu, nu, exact_unitary(build_full(spec), tau), 2)
        assert abs(val.real) <= 2 + 1e-12 and abs(val.imag) <= 2 + 1e-12

    def test_fused_equals_gate_level(self):
        u = exact_unitary(build_full(parse_geometry("1d:2", U=4.0)), 0.4)
        mu, nu = Probe(DN1, "Y"), Probe(UP2, "X")
        for imag in (False, True):
            a = circuit_unitary(correlation_circuit(mu, nu, 2, u, imag))
            b = circuit_unitary(correlation_circuit(mu, nu, 2, u, imag, fused=True))
            assert np.allclose(a, b)

    def test_bad_density(self):
        with pytest.raises(ValueError):
            measure_C(np.eye(4), Probe(UP1, "X"), Probe(UP1, "X"), np.eye(16), 2)

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            Probe(UP1, "Z")


class TestEvolution:
    def test_ts2_close_to_exact(self):
        spec = parse_geometry("1d:2", U=4.0, mu_p=1.0, delta_s=0.5)
        a = evolution_unitary(spec, 1.0, "ts2", 0.01)
        b = evolution_unitary(spec, 1.0)
        assert np.linalg.norm(a - b) < 1e-3

    def test_compiled_branch_agrees(self):
        spec = parse_geometry("1d:2", U=4.0, mu_p=1.0, delta_s=0.5)
        a = evolution_unitary(spec, 0.5, "ts2", 0.01, mode="exact")
        b = evolution_unitary(spec, 0.5, "ts2", 0.01, mode="compiled")
        assert np.linalg.norm(a - b) < 1e-6


class TestNambu:
    def test_against_fermionic_oracle(self, pipeline):
        spec, taus, series = pipeline
        oracle = LehmannOracle(spec, 2.0)
        for i, j in [(UP1, UP1), (UP1, DN1), (DN1, UP2)]:
            got, ref = nambu_from_probes(series, i, j), oracle.nambu(i, j, taus)
            for comp in ref:
                assert np.allclose(got[comp], ref[comp], atol=1e-10)

    def test_against_fock_expm(self, pipeline):
        spec, taus, series = pipeline
        H = hubbard_fock((2,), U=4.0, delta_s=0.8)
        rho = scipy_gibbs(H, 2.0)
        c = fock_annihilation(UP1.qubit, 4)
        got = nambu_from_probes(series, UP1, UP1)["cc+"]
        for k, tau in enumerate(taus):
            u = expm(H, tau)
            ref = np.trace(rho @ u.conj().T @ c @ u @ c.conj().T)
            assert got[k] == pytest.approx(ref, abs=1e-10)

    def test_sum_rule(self, pipeline):
        spec, taus, series = pipeline
        for o in all_orbitals(2):
            comps = nambu_from_probes(series, o, o)
            assert abs(comps["cc+"][0] + comps["c+c"][0] - 1) < 1e-10

    def test_anomalous_vanish_without_pairing(self):
        spec = parse_geometry("1d:2", U=4.0)
        taus = [0.0, 0.7]
        series = measure_series(spec, gibbs_state(build_full(spec), 2.0), all_pairs(2), taus)
        comps = nambu_from_probes(series, UP1, DN1)
        assert np.abs(comps["cc"]).max() <= 1e-10 and np.abs(comps["c+c+"]).max() <= 1e-10

    def test_incomplete_probe_set(self, pipeline):
        spec, taus, series = pipeline
        partial = dict(list(series.items())[:5])
        with pytest.raises(KeyError):
            nambu_from_probes(partial, UP2, UP2)


class TestMoments:
    def test_fornberg_exact_on_polynomials(self):
        offsets = np.arange(-3, 4)
        for order in range(4):
            w = fornberg_weights(order, offsets)
            for p in range(len(offsets)):
                expected = float(np.prod(range(1, p + 1))) if p == order else 0.0
                assert np.dot(w, offsets.astype(float) ** p) == pytest.approx(expected, abs=1e-9)
        with pytest.raises(ValueError):
            fornberg_weights(3, [0, 1, 2])

    def test_fd_against_lehmann(self):
        spec = parse_geometry("1d:2", U=4.0)
        oracle = LehmannOracle(spec, 2.0)
        taus = np.arange(9) * 0.01
        for mu, nu in all_pairs(2)[::5]:
            fwd = CorrelationSeries(mu, nu, taus, oracle.probe_C(mu, nu, taus))
            back = CorrelationSeries(nu, mu, taus, oracle.probe_C(nu, mu, taus))
            fd = fd_moments(fwd, back, 2)
            ex = oracle.moments(mu, nu, 2)
            assert np.allclose(fd, ex, atol=1e-4)

    def test_diagonal_moments_real_up_to_phase(self):
        oracle = LehmannOracle(parse_geometry("1d:2", U=4.0), 2.0)
        p = Probe(UP1, "Y")
        m = oracle.moments(p, p, 4)
        assert m[0] == pytest.approx(2)
        for s, v in enumerate(m):
            assert abs((1j ** s * v).imag) < 1e-10

    def test_resolution_guard(self):
        taus = np.arange(3) * 0.1
        s = CorrelationSeries(Probe(UP1, "X"), Probe(UP1, "X"), taus, np.ones(3))
        with pytest.raises(ValueError):
            fd_moments(s, None, 2)


class TestRetarded:
    def test_fourier_of_single_pole(self):
        e, eta = 0.7, 0.1
        omega = np.linspace(-3, 3, 31)
        z = 1j * (omega - e) - eta
        errs = []
        for h in (0.05, 0.025):
            taus = np.arange(0, 20 + h / 2, h)
            ref = -1j * (np.exp(z * taus[-1]) - 1) / z
            errs.append(np.abs(retarded_fourier(np.exp(-1j * e * taus), taus, omega, eta) - ref).max())
        assert errs[0] < 1e-3 * 7.5  # relative to the peak height 1/eta
        assert 3.5 < errs[0] / errs[1] < 4.5  # linear interpolation is second order

    def test_moment_series_tail(self):
        e = np.array([-1.0, 0.5, 2.0])
        w = np.array([0.3, 0.5, 0.2])
        omega = np.array([40.0, -60.0])
        series = retarded_moment_series(kernel_moments(e, w, 8), omega, 0.05)
        assert np.allclose(series, retarded_from_poles(e, w, omega, 0.05), rtol=1e-9)

    def test_eta_must_be_positive(self):
        with pytest.raises(ValueError):
            retarded_from_poles(np.zeros(1), np.ones(1), [0.0], 0.0)
        with pytest.raises(ValueError):
            retarded_fourier(np.ones(3), np.arange(3.0), [0.0], -1.0)

    @pytest.mark.parametrize("U", [0.0, 4.0])
    def test_spectral_positivity(self, U):
        oracle = LehmannOracle(parse_geometry("1d:2", U=U), 1.0)
        omega = np.linspace(-8, 8, 161)
        for o in all_orbitals(2):
            assert np.imag(oracle.retarded(o, o, omega)).max() <= 1e-8

    def test_large_eta_flat(self):
        oracle = LehmannOracle(parse_geometry("1d:2", U=4.0), 1.0)
        eta = 10 * 8.0
        g = oracle.retarded(UP1, UP1, np.linspace(-6, 6, 25), eta)
        assert np.abs(g).max() <= 2 / eta
        assert np.ptp(np.abs(g)) < 0.05 * np.abs(g).max()

    def test_free_peaks(self):
        oracle = LehmannOracle(parse_geometry("1d:2", U=0.0), 1.0)
        omega = np.linspace(-3, 3, 601)
        peaks = spectral_peaks(omega, oracle.retarded(UP1, UP1, omega))
        assert np.allclose(peaks, [-1, 1], atol=0.05)


class TestPipeline:
    def test_sum_rule_and_shapes(self):
        spec = parse_geometry("1d:2", U=4.0)
        series, data = run_pipeline(spec, 2.0, np.arange(0, 0.21, 0.05), np.linspace(-2, 2, 5))
        assert sum_rule_error(data) < 1e-10
        assert len(series) == 64 and len(data.retarded) == 16
        assert data.retarded[(UP1, UP1)].shape == (5,)

    def test_sum_rule_needs_tau_zero(self):
        spec = parse_geometry("1d:2", U=4.0)
        _, data = run_pipeline(spec, 2.0, [0.1, 0.2], [0.0], method="oracle")
        with pytest.raises(ValueError):
            sum_rule_error(data)

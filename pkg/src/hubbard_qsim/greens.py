"""Probe correlation functions, Nambu components, moments and G^R.

Conventions
-----------
``C_{mu nu}(tau) = 2 Tr[rho U^dag s_nu U s_mu]`` with ``U = exp(-i H tau)``,
i.e. twice ``<s_nu(tau) s_mu(0)>``. The circuit reads the real part as
``2(P0 - P1)`` of the probe qubit and the imaginary part from the same
circuit with a ``-pi/2`` phase on the probe before the last Hadamard.

With ``c = (X - iY)/2`` for the probe operators ``X = c + c^dag`` and
``Y = i(c - c^dag)``, writing ``AB = <A_i(tau) B_j(0)> = C_{B_j, A_i}/2``:

==============  ======================================
``<c c^dag>``   ``(XX + YY + i XY - i YX) / 4``
``<c^dag c>``   ``(XX + YY - i XY + i YX) / 4``
``<c c>``       ``(XX - YY - i XY - i YX) / 4``
``<c^dag c^dag>`` ``(XX - YY + i XY + i YX) / 4``
==============  ======================================
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import find_peaks

from .compiler import compile_controlled_probe
from .gates import Circuit, Gate
from .hamiltonian import ClusterSpec, build_blocks
from .jordan_wigner import OrbitalIndex, all_orbitals, annihilation_op, creation_op, hermitian_probe
from .pauli import to_dense
from .simulator import QuantumState, eigh, gibbs_state, run_circuit, system_branch

COMPONENTS = ("cc+", "c+c", "cc", "c+c+")
DEFAULT_ETA = 0.05
DEFAULT_TAU_MAX = 50.0
DEFAULT_TAU_STEP = 0.05


@dataclass(frozen=True, order=True)
class Probe:
    orbital: OrbitalIndex
    kind: str

    def __post_init__(self):
        if self.kind not in ("X", "Y"):
            raise ValueError(f"probe kind must be X or Y, got {self.kind!r}")

    def __str__(self):
        return f"{self.kind}{self.orbital}"


def all_probes(L_c: int) -> list[Probe]:
    return [Probe(o, k) for o in all_orbitals(L_c) for k in ("X", "Y")]


@lru_cache(maxsize=None)
def _probe_dense(orbital: OrbitalIndex, kind: str, L_c: int) -> np.ndarray:
    m = to_dense(hermitian_probe(orbital, kind, L_c))
    m.flags.writeable = False
    return m


def probe_matrix(p: Probe, L_c: int) -> np.ndarray:
    return _probe_dense(p.orbital, p.kind, L_c)


# ---------------------------------------------------------------- evolution

def evolution_unitary(spec: ClusterSpec, tau: float, evolution: str = "exact", dt: float = 0.01,
                      mode: str = "exact", _cache: dict | None = None) -> np.ndarray:
    """System propagator for time ``tau``: exact, or a power of one split step."""
    from .trotter import FactorCache, evolve_split, make_schedule

    cache = _cache if _cache is not None else {}
    if evolution == "exact":
        if "eig" not in cache:
            cache["eig"] = eigh(build_blocks(spec).full)
        w, v = cache["eig"]
        return (v * np.exp(-1j * w * tau)) @ v.conj().T
    if tau == 0:
        return np.eye(1 << spec.n_qubits, dtype=complex)
    n_steps = max(1, int(round(abs(tau) / dt)))
    step = tau / n_steps
    key = (evolution, mode, round(step, 14))
    if key not in cache:
        fc = FactorCache(spec, mode=mode)
        cache[key] = evolve_split(fc, make_schedule(evolution), step)
    return np.linalg.matrix_power(cache[key], n_steps)


# ---------------------------------------------------------------- circuits

@lru_cache(maxsize=None)
def _fused_probe(orbital: OrbitalIndex, kind: str, L_c: int) -> Gate:
    circ = compile_controlled_probe(orbital, kind, L_c)
    return Gate("unitary", tuple(range(2 * L_c)), True, payload=system_branch(circ), tag=f"probe {kind}")


def _probe_gates(p: Probe, L_c: int, fused: bool) -> tuple[Gate, ...]:
    if fused:
        return (_fused_probe(p.orbital, p.kind, L_c),)
    return compile_controlled_probe(p.orbital, p.kind, L_c).gates


def correlation_circuit(mu: Probe, nu: Probe, L_c: int, u_tau: np.ndarray,
                        imaginary: bool = False, tau: float | None = None, fused: bool = False) -> Circuit:
    """Hadamard-test circuit for ``U^dag s_nu U s_mu``; ``u_tau`` is the placeholder ``c-U``.

    ``fused`` replaces each compiled probe sub-circuit by its controlled unitary.
    """
    n = 2 * L_c
    ctrl = (n,)
    system = tuple(range(n))
    gates: list[Gate] = [Gate("h", ctrl, False)]
    gates += _probe_gates(mu, L_c, fused)
    gates.append(Gate("unitary", system, True, payload=u_tau, tag="U"))
    gates += _probe_gates(nu, L_c, fused)
    gates.append(Gate("unitary", system, True, payload=u_tau.conj().T, tag="Udag"))
    if imaginary:
        gates.append(Gate("rz-n", ctrl, False, np.pi / 2))
    gates.append(Gate("h", ctrl, False))
    return Circuit(n, tuple(gates), f"corr {mu} {nu}", tau)


def _with_probe(rho: np.ndarray) -> np.ndarray:
    zero = np.zeros((2, 2))
    zero[0, 0] = 1
    return np.kron(zero, rho)


def measure_C(rho: np.ndarray, mu: Probe, nu: Probe, u_tau: np.ndarray, L_c: int) -> complex:
    """Circuit estimate ``2(P0 - P1)`` of the real and imaginary tests."""
    n = 2 * L_c
    if rho.shape != (1 << n, 1 << n):
        raise ValueError(f"density matrix must be {1 << n}-dimensional")
    start = QuantumState(_with_probe(rho), n + 1, mixed=True)
    out = []
    for imag in (False, True):
        circ = correlation_circuit(mu, nu, L_c, u_tau, imag, fused=True)
        if imag:  # the two tests share everything up to the closing phase and Hadamard
            final = run_circuit(Circuit(n, circ.gates[-2:]), shared)
        else:
            shared = run_circuit(Circuit(n, circ.gates[:-1]), start)
            final = run_circuit(Circuit(n, circ.gates[-1:]), shared)
        p0 = final.qubit_probability(n, 0)
        out.append(2 * (2 * p0 - 1))
    return complex(out[0], out[1])


def heisenberg_C(rho: np.ndarray, mu: Probe, nu: Probe, u_tau: np.ndarray, L_c: int) -> complex:
    """Dense oracle ``2 Tr[rho U^dag s_nu U s_mu]``."""
    sm, sn = probe_matrix(mu, L_c), probe_matrix(nu, L_c)
    return complex(2 * np.trace(rho @ u_tau.conj().T @ sn @ u_tau @ sm))


@dataclass
class CorrelationSeries:
    mu: Probe
    nu: Probe
    taus: np.ndarray
    values: np.ndarray


def measure_series(spec: ClusterSpec, rho: np.ndarray, pairs: Iterable[tuple[Probe, Probe]],
                   taus: Sequence[float], evolution: str = "exact", dt: float = 0.01,
                   method: str = "circuit", mode: str = "exact") -> dict[tuple[Probe, Probe], CorrelationSeries]:
    """Correlation series for each probe pair; propagators are shared across pairs."""
    taus = np.asarray(taus, dtype=float)
    pairs = list(pairs)
    vals = {p: np.zeros(len(taus), dtype=complex) for p in pairs}
    measure = measure_C if method == "circuit" else heisenberg_C
    cache: dict = {}
    for k, tau in enumerate(taus):
        u = evolution_unitary(spec, tau, evolution, dt, mode, cache)
        for mu, nu in pairs:
            vals[(mu, nu)][k] = measure(rho, mu, nu, u, spec.L_c)
    return {p: CorrelationSeries(p[0], p[1], taus, v) for p, v in vals.items()}


def all_pairs(L_c: int) -> list[tuple[Probe, Probe]]:
    probes = all_probes(L_c)
    return list(itertools.product(probes, probes))


# ---------------------------------------------------------------- Nambu transform

def nambu_from_probes(series: dict[tuple[Probe, Probe], CorrelationSeries], i: OrbitalIndex,
                      j: OrbitalIndex) -> dict[str, np.ndarray]:
    """Normal and anomalous correlators ``<a_i(tau) b_j(0)>`` from the four probe series."""

    def g(a: str, b: str) -> np.ndarray:
        key = (Probe(j, b), Probe(i, a))
        if key not in series:
            raise KeyError(f"missing probe series for mu={key[0]}, nu={key[1]}")
        return series[key].values / 2

    xx, yy, xy, yx = g("X", "X"), g("Y", "Y"), g("X", "Y"), g("Y", "X")
    return {
        "cc+": (xx + yy + 1j * xy - 1j * yx) / 4,
        "c+c": (xx + yy - 1j * xy + 1j * yx) / 4,
        "cc": (xx - yy - 1j * xy - 1j * yx) / 4,
        "c+c+": (xx - yy + 1j * xy + 1j * yx) / 4,
    }


def retarded_kernel(nambu: dict[str, np.ndarray]) -> np.ndarray:
    """``F(tau) = <{c_i(tau), c_j^dag}>`` from the normal components."""
    return nambu["cc+"] + np.conj(nambu["c+c"])


# ---------------------------------------------------------------- exact oracle

class LehmannOracle:
    """Eigendecomposition of the cluster Hamiltonian and thermal weights."""

    def __init__(self, spec: ClusterSpec, beta: float):
        self.spec = spec
        self.beta = beta
        self.L_c = spec.L_c
        self.E, self.V = eigh(build_blocks(spec).full)
        w = np.exp(-beta * (self.E - self.E.min()))
        self.p = w / w.sum()
        self.rho = (self.V * self.p) @ self.V.conj().T

    def _eig_basis(self, m: np.ndarray) -> np.ndarray:
        return self.V.conj().T @ m @ self.V

    def weights(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``A[m, n] = p_n <n|a|m><m|b|n>`` so ``<a(tau) b> = sum A e^{-i(E_m - E_n) tau}``."""
        ae, be = self._eig_basis(a), self._eig_basis(b)
        return self.p[None, :] * ae.T * be

    def correlator(self, a: np.ndarray, b: np.ndarray, taus) -> np.ndarray:
        A = self.weights(a, b)
        gap = self.E[:, None] - self.E[None, :]
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        return np.array([np.sum(A * np.exp(-1j * gap * t)) for t in taus])

    def probe_C(self, mu: Probe, nu: Probe, taus) -> np.ndarray:
        return 2 * self.correlator(probe_matrix(nu, self.L_c), probe_matrix(mu, self.L_c), taus)

    def moments(self, mu: Probe, nu: Probe, s_max: int) -> list[complex]:
        """``C^(s) = 2 (-i)^s sum_{mn} A[m, n] (E_m - E_n)^s``."""
        A = 2 * self.weights(probe_matrix(nu, self.L_c), probe_matrix(mu, self.L_c))
        gap = self.E[:, None] - self.E[None, :]
        return [complex(((-1j) ** s) * np.sum(A * gap ** s)) for s in range(s_max + 1)]

    def nambu(self, i: OrbitalIndex, j: OrbitalIndex, taus) -> dict[str, np.ndarray]:
        L = self.L_c
        ci, cj = to_dense(annihilation_op(i, L)), to_dense(annihilation_op(j, L))
        cdi, cdj = to_dense(creation_op(i, L)), to_dense(creation_op(j, L))
        return {
            "cc+": self.correlator(ci, cdj, taus),
            "c+c": self.correlator(cdi, cj, taus),
            "cc": self.correlator(ci, cj, taus),
            "c+c+": self.correlator(cdi, cdj, taus),
        }

    def poles(self, i: OrbitalIndex, j: OrbitalIndex) -> tuple[np.ndarray, np.ndarray]:
        """Energies and weights of ``F(tau) = sum_k w_k exp(-i e_k tau)``."""
        L = self.L_c
        ci, cdj = to_dense(annihilation_op(i, L)), to_dense(creation_op(j, L))
        cdi, cj = to_dense(creation_op(i, L)), to_dense(annihilation_op(j, L))
        gap = self.E[:, None] - self.E[None, :]
        A1 = self.weights(ci, cdj)
        A2 = np.conj(self.weights(cdi, cj))  # conjugation flips the sign of the frequency
        e = np.concatenate([gap.ravel(), -gap.ravel()])
        w = np.concatenate([A1.ravel(), A2.ravel()])
        keep = np.abs(w) > 1e-14
        return e[keep], w[keep]

    def retarded(self, i: OrbitalIndex, j: OrbitalIndex, omega, eta: float = DEFAULT_ETA) -> np.ndarray:
        _check_eta(eta)
        e, w = self.poles(i, j)
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        return np.array([np.sum(w / (om - e + 1j * eta)) for om in omega])


# ---------------------------------------------------------------- moments

def fornberg_weights(order: int, offsets: Sequence[float]) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at 0 on ``offsets``."""
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    if order >= n:
        raise ValueError("stencil too small for the requested derivative")
    # solve the Vandermonde moment conditions sum w_k x_k^p = p! delta_{p,order}
    V = np.vander(x, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = factorial(order)
    return np.linalg.solve(V, rhs)


def fd_moments(forward: CorrelationSeries, partner: CorrelationSeries | None, s_max: int,
               half_width: int = 4) -> list[complex]:
    """Central finite-difference moments at ``tau = 0``.

    Negative times come from ``C_{mu nu}(-tau) = conj C_{nu mu}(tau)``
    (stationary state), so ``partner`` is the swapped-pair series.
    """
    partner = partner if partner is not None else forward
    taus = forward.taus
    if len(taus) <= half_width or not np.isclose(taus[0], 0):
        raise ValueError("series must start at tau=0 with enough samples")
    h = taus[1] - taus[0]
    if not np.allclose(np.diff(taus[: half_width + 1]), h):
        raise ValueError("series grid must be uniform")
    if 2 * half_width < s_max:
        raise ValueError("s_max beyond grid resolution")
    pos = forward.values[: half_width + 1]
    neg = np.conj(partner.values[1: half_width + 1])[::-1]
    samples = np.concatenate([neg, pos])
    offsets = np.arange(-half_width, half_width + 1)
    out = []
    for s in range(s_max + 1):
        w = fornberg_weights(s, offsets)
        out.append(complex(np.dot(w, samples) / h ** s))
    return out


# ---------------------------------------------------------------- retarded GF

def _check_eta(eta: float):
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")


def retarded_fourier(F: np.ndarray, taus: np.ndarray, omega, eta: float = DEFAULT_ETA) -> np.ndarray:
    """``-i int_0^T exp((i w - eta) tau) F(tau) dtau`` with ``F`` linear between samples.

    The exponential is integrated exactly on each interval (Filon rule), so
    accuracy does not degrade for fast phase rotation at large ``|w|``.
    """
    _check_eta(eta)
    taus = np.asarray(taus, dtype=float)
    F = np.asarray(F, dtype=complex)
    h = np.diff(taus)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(len(omega), dtype=complex)
    for k, om in enumerate(omega):
        z = 1j * om - eta
        ea = np.exp(z * taus[:-1])
        zh = z * h
        # int_0^h e^{z s} ds and int_0^h s e^{z s} ds / h, written to stay stable for small zh
        small = np.abs(zh) < 1e-3
        i0 = np.where(small, h * (1 + zh / 2 + zh ** 2 / 6), (np.exp(zh) - 1) / np.where(small, 1, z))
        i1 = np.where(small, h * (0.5 + zh / 3 + zh ** 2 / 8),
                      ((zh - 1) * np.exp(zh) + 1) / np.where(small, 1, z ** 2 * h))
        seg = ea * (F[:-1] * (i0 - i1) + F[1:] * i1)
        out[k] = -1j * seg.sum()
    return out


def retarded_moment_series(moments: Sequence[complex], omega, eta: float = DEFAULT_ETA) -> np.ndarray:
    """Truncated ``-i sum_s F^(s) / (eta - i w)^{s+1}``; converges only for large ``|w|``."""
    _check_eta(eta)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    z = eta - 1j * omega
    return np.array([-1j * sum(m / zz ** (s + 1) for s, m in enumerate(moments)) for zz in z])


def retarded_from_poles(energies: np.ndarray, weights: np.ndarray, omega, eta: float = DEFAULT_ETA) -> np.ndarray:
    """Resummed moment series: each pole's geometric series gives ``w / (w - e + i eta)``."""
    _check_eta(eta)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    return np.array([np.sum(weights / (om - energies + 1j * eta)) for om in omega])


def kernel_moments(energies: np.ndarray, weights: np.ndarray, s_max: int) -> list[complex]:
    return [complex(np.sum(weights * (-1j * energies) ** s)) for s in range(s_max + 1)]


def spectral_peaks(omega: np.ndarray, G: np.ndarray, rel_prominence: float = 0.1) -> np.ndarray:
    """Maxima of ``-Im G / pi`` whose prominence exceeds ``rel_prominence`` of the tallest one.

    The prominence cut discards ripples left by truncating the time window.
    """
    A = -np.imag(np.asarray(G)) / np.pi
    idx, _ = find_peaks(A, prominence=rel_prominence * max(A.max(), 0.0) or None)
    return np.asarray(omega)[idx]


# ---------------------------------------------------------------- pipeline

@dataclass
class GreensData:
    taus: np.ndarray
    omega: np.ndarray
    eta: float
    nambu: dict[tuple[OrbitalIndex, OrbitalIndex], dict[str, np.ndarray]] = field(default_factory=dict)
    retarded: dict[tuple[OrbitalIndex, OrbitalIndex], np.ndarray] = field(default_factory=dict)


def run_pipeline(spec: ClusterSpec, beta: float, taus: Sequence[float], omega: Sequence[float],
                 eta: float = DEFAULT_ETA, evolution: str = "exact", dt: float = 0.01,
                 method: str = "circuit") -> tuple[dict, GreensData]:
    """Gibbs state, every probe pair, Nambu components and Fourier-route ``G^R``."""
    _check_eta(eta)
    rho = gibbs_state(build_blocks(spec).full, beta)
    series = measure_series(spec, rho, all_pairs(spec.L_c), taus, evolution, dt, method)
    data = GreensData(np.asarray(taus, float), np.asarray(omega, float), eta)
    for i, j in itertools.product(all_orbitals(spec.L_c), repeat=2):
        comps = nambu_from_probes(series, i, j)
        data.nambu[(i, j)] = comps
        data.retarded[(i, j)] = retarded_fourier(retarded_kernel(comps), data.taus, data.omega, eta)
    return series, data


def sum_rule_error(data: GreensData) -> float:
    """Largest deviation of ``<c c^dag> + <c^dag c>`` from 1 at ``tau = 0`` on the diagonal."""
    if not np.isclose(data.taus[0], 0):
        raise ValueError("series must include tau = 0")
    err = 0.0
    for (i, j), comps in data.nambu.items():
        if i == j:
            err = max(err, abs(comps["cc+"][0] + comps["c+c"][0] - 1))
    return err

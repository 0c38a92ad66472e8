"""Dense state-vector and density-matrix backend plus exact oracles.

Amplitude index bit ``q`` is qubit ``q``; the probe qubit is the most
significant bit (index ``n_system``), so a controlled block matrix reads
``blockdiag(I, U)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gates import Circuit, Gate
from .pauli import DenseLimitError, PauliSum, dense_limit, to_dense


class StateError(ValueError):
    """Invalid quantum state or gate target."""


def controlled_matrix(u: np.ndarray) -> np.ndarray:
    """``|0><0| x I + |1><1| x u`` with the control as the high bit."""
    d = u.shape[0]
    out = np.eye(2 * d, dtype=complex)
    out[d:, d:] = u
    return out


def gate_operator(gate: Gate, n_system: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Local matrix and the qubits it acts on (low bit first)."""
    m = gate.matrix()
    if gate.controlled:
        return controlled_matrix(m), gate.targets + (n_system,)
    return m, gate.targets


def apply_matrix(array: np.ndarray, matrix: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply a ``2^k`` matrix on ``qubits`` to the leading ``2^n`` axis of ``array``.

    Extra trailing axes are treated as a batch, so a unitary can be pushed
    through many columns at once.
    """
    k = len(qubits)
    if any(q < 0 or q >= n for q in qubits):
        raise StateError(f"targets {tuple(qubits)} outside {n}-qubit register")
    batch = array.shape[1:]
    psi = array.reshape((2,) * n + batch)
    # tensor axis a corresponds to qubit n-1-a; local matrix index is MSB-first too
    axes = [n - 1 - q for q in reversed(qubits)]
    mat = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(mat, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(array.shape)


@dataclass
class QuantumState:
    """Pure vector or density matrix on ``n`` qubits."""

    data: np.ndarray
    n: int
    mixed: bool = False

    def __post_init__(self):
        d = 1 << self.n
        self.data = np.asarray(self.data, dtype=complex)
        want = (d, d) if self.mixed else (d,)
        if self.data.shape != want:
            raise StateError(f"expected shape {want}, got {self.data.shape}")

    @classmethod
    def zero(cls, n: int) -> "QuantumState":
        v = np.zeros(1 << n, dtype=complex)
        v[0] = 1
        return cls(v, n)

    @classmethod
    def from_density(cls, rho: np.ndarray) -> "QuantumState":
        n = rho.shape[0].bit_length() - 1
        return cls(rho, n, mixed=True)

    def check(self, tol: float = 1e-12) -> None:
        if self.mixed:
            rho = self.data
            if np.abs(rho - rho.conj().T).max() > tol:
                raise StateError("density matrix not Hermitian")
            if abs(np.trace(rho) - 1) > tol:
                raise StateError("density matrix trace differs from 1")
            if np.linalg.eigvalsh(rho).min() < -1e-10:
                raise StateError("density matrix has negative eigenvalues")
        elif abs(np.linalg.norm(self.data) - 1) > tol:
            raise StateError("state vector not normalized")

    def probabilities(self) -> np.ndarray:
        if self.mixed:
            return np.real(np.diag(self.data)).copy()
        return np.abs(self.data) ** 2

    def qubit_probability(self, q: int, value: int = 0) -> float:
        idx = np.arange(1 << self.n)
        mask = ((idx >> q) & 1) == value
        return float(self.probabilities()[mask].sum())

    def to_json(self) -> str:
        flat = self.data.reshape(-1)
        return json.dumps({"n": self.n, "mixed": self.mixed,
                           "amplitudes": [[float(z.real), float(z.imag)] for z in flat]})

    @classmethod
    def from_json(cls, text: str) -> "QuantumState":
        d = json.loads(text)
        arr = np.array([complex(re, im) for re, im in d["amplitudes"]])
        dim = 1 << d["n"]
        if d["mixed"]:
            arr = arr.reshape(dim, dim)
        return cls(arr, d["n"], d["mixed"])


def _check_size(n: int):
    if n > dense_limit():
        raise DenseLimitError(f"{n} qubits exceeds dense limit {dense_limit()}")


def apply_gate(state: QuantumState, gate: Gate, n_system: int | None = None) -> QuantumState:
    """Return a new state with ``gate`` applied; the probe is qubit ``state.n - 1``."""
    n_system = state.n - 1 if n_system is None else n_system
    m, qubits = gate_operator(gate, n_system)
    if state.mixed:
        rho = apply_matrix(state.data, m, qubits, state.n)
        rho = apply_matrix(rho.conj().T, m, qubits, state.n).conj().T
        return QuantumState(rho, state.n, True)
    return QuantumState(apply_matrix(state.data, m, qubits, state.n), state.n)


def run_circuit(circuit: Circuit, state: QuantumState) -> QuantumState:
    if state.n != circuit.n_total:
        raise StateError(f"state has {state.n} qubits, circuit needs {circuit.n_total}")
    for g in circuit.gates:
        state = apply_gate(state, g, circuit.n_system)
    return state


def _apply_fast(array: np.ndarray, gate: Gate, n_system: int) -> np.ndarray:
    """Gate application that touches only the probe-1 half for controlled gates."""
    if not gate.controlled:
        m, qubits = gate_operator(gate, n_system)
        return apply_matrix(array, m, qubits, n_system + 1)
    half = 1 << n_system
    out = array.copy()
    out[half:] = apply_matrix(array[half:], gate.matrix(), gate.targets, n_system)
    return out


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    n = circuit.n_total
    _check_size(n)
    u = np.eye(1 << n, dtype=complex)
    for g in circuit.gates:
        u = _apply_fast(u, g, circuit.n_system)
    return u


def system_branch(circuit: Circuit) -> np.ndarray:
    """Block of the circuit unitary acting on the system when the probe is ``|1>``.

    Valid only when the probe stays diagonal (controlled gates and probe
    ``rz-n`` phases), which holds for every compiled block circuit.
    """
    n = circuit.n_system
    _check_size(n)
    u = np.eye(1 << n, dtype=complex)
    phase = 1.0 + 0j
    for g in circuit.gates:
        if g.controlled:
            u = apply_matrix(u, g.matrix(), g.targets, n)
        elif g.kind == "rz-n":
            phase *= np.exp(-1j * g.theta)
        else:
            d = 1 << n
            return circuit_unitary(circuit)[d:, d:]
    return phase * u


def _hermitian_matrix(H: PauliSum | np.ndarray) -> np.ndarray:
    if isinstance(H, PauliSum):
        _check_size(H.n_qubits)
        return to_dense(H)
    return np.asarray(H, dtype=complex)


def eigh(H: PauliSum | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = _hermitian_matrix(H)
    return np.linalg.eigh((m + m.conj().T) / 2)


def exact_unitary(H: PauliSum | np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` via eigendecomposition."""
    w, v = eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def gibbs_state(H: PauliSum | np.ndarray, beta: float) -> np.ndarray:
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    w, v = eigh(H)
    p = np.exp(-beta * (w - w.min()))
    p /= p.sum()
    return (v * p) @ v.conj().T

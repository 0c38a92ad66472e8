"""Argument checks shared by the estimator facade and the CLI."""
from __future__ import annotations

import numpy as np

from .hamiltonian import ClusterSpec, parse_geometry


def check_cluster(cluster, **params) -> ClusterSpec:
    """Accept a ``ClusterSpec`` or a geometry string."""
    if isinstance(cluster, ClusterSpec):
        return cluster.with_params(**params) if params else cluster
    if isinstance(cluster, str):
        return parse_geometry(cluster, **params)
    raise TypeError(f"cluster must be a ClusterSpec or geometry string, got {type(cluster).__name__}")


def check_positive(value: float, name: str, allow_zero: bool = False) -> float:
    value = float(value)
    ok = value >= 0 if allow_zero else value > 0
    if not (np.isfinite(value) and ok):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value}")
    return value


def check_choice(value: str, options, name: str) -> str:
    if value not in options:
        raise ValueError(f"{name} must be one of {tuple(options)}, got {value!r}")
    return value


def check_grid(values, name: str, uniform: bool = False, start_zero: bool = False) -> np.ndarray:
    """1-D finite increasing grid."""
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size < 2 or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} needs at least two finite points")
    step = np.diff(arr)
    if np.any(step <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    if uniform and not np.allclose(step, step[0], rtol=1e-9, atol=1e-12):
        raise ValueError(f"{name} must be uniformly spaced")
    if start_zero and abs(arr[0]) > 1e-12:
        raise ValueError(f"{name} must start at 0")
    return arr


def check_density_matrix(rho, n_qubits: int, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    d = 1 << n_qubits
    if rho.shape != (d, d):
        raise ValueError(f"density matrix must be {d}x{d}, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def check_unitary(u, tol: float = 1e-10) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > tol:
        raise ValueError("matrix is not unitary")
    return u

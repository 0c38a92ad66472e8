"""Operator splitting over the three non-commuting groups and its error metric.

Groups (each exponentiated exactly):

* ``Z``  = int - local - af   (diagonal)
* ``KD`` = kin - d_pair       (the two commute)
* ``S``  = -s_pair

A schedule is a list of ``(group, c)`` in time order; factor ``(g, c)`` is
``exp(-i c dt H_g)``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .hamiltonian import ClusterSpec, HamiltonianBlocks, build_blocks
from .pauli import PauliSum
from .simulator import eigh, exact_unitary

GROUPS = ("Z", "KD", "S")
SCHEMES = ("ts2", "ruth")

# third-order two-operator splitting; operator product written left to right
RUTH_A = (7 / 24, 3 / 4, -1 / 24)
RUTH_B = (2 / 3, -2 / 3, 1.0)


class ScheduleError(ValueError):
    """Invalid splitting request."""


@dataclass(frozen=True)
class SplitSchedule:
    factors: tuple[tuple[str, float], ...]
    scheme: str
    n_T: int = 1

    def totals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for g, c in self.factors:
            out[g] = out.get(g, 0.0) + c
        return out

    def __len__(self):
        return len(self.factors)

    def merged(self) -> "SplitSchedule":
        """Fuse neighbouring factors of the same group."""
        out: list[list] = []
        for g, c in self.factors:
            if out and out[-1][0] == g:
                out[-1][1] += c
            else:
                out.append([g, c])
        return SplitSchedule(tuple((g, c) for g, c in out), self.scheme, self.n_T)


def group_operators(blocks: HamiltonianBlocks) -> dict[str, PauliSum]:
    return {"Z": blocks.z_block, "KD": blocks.kd_block, "S": blocks.s_block}


def _check(dt: float, n_T: int = 1):
    if not dt > 0:
        raise ScheduleError(f"dt must be positive, got {dt}")
    if n_T < 1:
        raise ScheduleError(f"n_T must be >= 1, got {n_T}")


def ts_step(dt: float = 1.0, n_T: int = 1, groups: Sequence[str] = GROUPS) -> SplitSchedule:
    """Symmetric second-order step ``Z/4 S/2 Z/4 KD Z/4 S/2 Z/4``, ``n_T`` times.

    Coefficients are fractions of ``dt``; each of the ``n_T`` repetitions
    covers ``dt / n_T``. With fewer groups the same pattern collapses.
    """
    _check(dt, n_T)
    groups = tuple(groups)
    if len(groups) == 1:
        one = ((groups[0], 1.0),)
    elif len(groups) == 2:
        a, b = groups
        one = ((a, 0.5), (b, 1.0), (a, 0.5))
    else:
        z, kd, s = "Z", "KD", "S"
        one = ((z, .25), (s, .5), (z, .25), (kd, 1.0), (z, .25), (s, .5), (z, .25))
    scale = 1.0 / n_T
    factors = tuple((g, c * scale) for _ in range(n_T) for g, c in one)
    return SplitSchedule(factors, "ts2", n_T)


def _ruth(a: Callable[[float], list], b: Callable[[float], list], c: float) -> list:
    written = [(a, RUTH_A[0]), (b, RUTH_B[0]), (a, RUTH_A[1]), (b, RUTH_B[1]), (a, RUTH_A[2]), (b, RUTH_B[2])]
    out = []
    for fn, k in reversed(written):  # rightmost factor acts first
        out.extend(fn(c * k))
    return out


def ruth_step(dt: float = 1.0, n_T: int = 1, nesting: tuple[str, str, str] = ("Z", "S", "KD")) -> SplitSchedule:
    """Recursive third-order scheme.

    Outer split ``A = nesting[0]``, ``B = rest``; ``B`` is split again with
    ``A = nesting[1]``, ``B = nesting[2]``.
    """
    _check(dt, n_T)
    outer, inner_a, inner_b = nesting
    if sorted(nesting) != sorted(GROUPS):
        raise ScheduleError(f"nesting must permute {GROUPS}")

    def leaf(g):
        return lambda c: [(g, c)]

    inner = lambda c: _ruth(leaf(inner_a), leaf(inner_b), c)  # noqa: E731
    one = _ruth(leaf(outer), inner, 1.0)
    scale = 1.0 / n_T
    factors = tuple((g, c * scale) for _ in range(n_T) for g, c in one)
    return SplitSchedule(factors, "ruth", n_T)


def two_block_ruth(dt: float = 1.0) -> SplitSchedule:
    """Plain two-group variant on groups ``A`` and ``B``."""
    _check(dt)
    return SplitSchedule(tuple(_ruth(lambda c: [("A", c)], lambda c: [("B", c)], 1.0)), "ruth")


def make_schedule(scheme: str, n_T: int = 1, **kw) -> SplitSchedule:
    if scheme == "ts2":
        return ts_step(1.0, n_T, **kw)
    if scheme == "ruth":
        return ruth_step(1.0, n_T, **kw)
    raise ScheduleError(f"unknown scheme {scheme!r}; expected {SCHEMES}")


class FactorCache:
    """Exact or compiled factor unitaries, keyed by ``(group, c dt)``."""

    def __init__(self, spec: ClusterSpec | None = None, operators: dict[str, PauliSum] | None = None,
                 mode: str = "exact"):
        if mode not in ("exact", "compiled"):
            raise ScheduleError(f"mode must be exact or compiled, got {mode!r}")
        if mode == "compiled" and spec is None:
            raise ScheduleError("compiled mode needs a cluster spec")
        self.spec = spec
        self.mode = mode
        if operators is None:
            operators = group_operators(build_blocks(spec))
        self.operators = operators
        self._eig = {}
        self._cache: dict[tuple[str, float], np.ndarray] = {}

    def dim(self) -> int:
        return 1 << next(iter(self.operators.values())).n_qubits

    def factor(self, group: str, t: float) -> np.ndarray:
        key = (group, round(t, 15))
        if key not in self._cache:
            self._cache[key] = self._build(group, t)
        return self._cache[key]

    def _build(self, group: str, t: float) -> np.ndarray:
        if self.mode == "compiled":
            from .compiler import compile_group
            from .simulator import system_branch
            return system_branch(compile_group(self.spec, group, t))
        if group not in self._eig:
            self._eig[group] = eigh(self.operators[group])
        w, v = self._eig[group]
        return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve_split(cache: FactorCache, schedule: SplitSchedule, dt: float) -> np.ndarray:
    """Product of the schedule's factors for one step of length ``dt``."""
    u = np.eye(cache.dim(), dtype=complex)
    for g, c in schedule.factors:
        if g not in cache.operators:
            raise ScheduleError(f"schedule references unknown group {g!r}")
        u = cache.factor(g, c * dt) @ u
    return u


def error_metric(u_ts: np.ndarray, u_exact: np.ndarray, L_c: int | None = None) -> float:
    """``1 - |Tr(U_ts U^dagger)|^2 / d^2`` evaluated as an eigenvalue variance.

    For unitary ``W = U_ts U^dagger`` with eigenvalues ``l_k``,
    ``1 - |mean l|^2 = mean |l - mean l|^2``, which avoids the cancellation
    of the direct formula when the error is near machine precision.
    """
    if u_ts.shape != u_exact.shape:
        raise ValueError(f"dimension mismatch {u_ts.shape} vs {u_exact.shape}")
    d = u_ts.shape[0]
    if L_c is not None and d != 4 ** L_c:
        raise ValueError(f"expected dimension 4^{L_c}, got {d}")
    lam = np.linalg.eigvals(u_ts @ u_exact.conj().T)
    eps = float(np.mean(np.abs(lam - lam.mean()) ** 2))
    return min(max(eps, 0.0), 1.0)


@dataclass(frozen=True)
class SweepRow:
    dtau: float
    scheme: str
    epsilon: float
    n_factors: int
    wall_ms: float


def trotter_error(spec: ClusterSpec, dtau: float, tau: float = 3.0, scheme: str = "ts2",
                  cache: FactorCache | None = None, exact: np.ndarray | None = None) -> SweepRow:
    """Error of ``N`` steps of size ``tau/N`` with ``N = round(tau/dtau)``."""
    start = time.perf_counter()
    n_steps = max(1, int(round(tau / dtau)))
    step = tau / n_steps
    cache = cache or FactorCache(spec)
    schedule = make_schedule(scheme)
    u_step = evolve_split(cache, schedule, step)
    u_ts = np.linalg.matrix_power(u_step, n_steps)
    if exact is None:
        full = sum(cache.operators.values(), PauliSum.zero(spec.n_qubits))
        exact = exact_unitary(full, tau)
    eps = error_metric(u_ts, exact)
    wall = (time.perf_counter() - start) * 1e3
    return SweepRow(step, scheme, eps, len(schedule) * n_steps, wall)


def sweep(spec: ClusterSpec, dtaus: Sequence[float], schemes: Sequence[str] = SCHEMES,
          tau: float = 3.0, mode: str = "exact") -> list[SweepRow]:
    cache = FactorCache(spec, mode=mode)
    full = sum(cache.operators.values(), PauliSum.zero(spec.n_qubits))
    exact = exact_unitary(full, tau)
    rows = []
    for scheme in schemes:
        for dt in dtaus:
            rows.append(trotter_error(spec, dt, tau, scheme, cache, exact))
    return rows


def power_law_fit(dtaus: Sequence[float], eps: Sequence[float]) -> tuple[float, float]:
    """Slope and R^2 of ``log eps`` against ``log dtau``."""
    x, y = np.log(np.asarray(dtaus)), np.log(np.asarray(eps))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1 - resid.var() / y.var()
    return float(slope), float(r2)


def worst_case_spec() -> ClusterSpec:
    """2x2 worst-case parameter set used for the splitting-error study."""
    return ClusterSpec(2, (2, 2), t=1.0, U=8.0, mu_p=3.0, M_p=3.0, delta_s=3.0, delta_d=3.0)

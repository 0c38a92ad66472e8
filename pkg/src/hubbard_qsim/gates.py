"""Gate set, circuits and their JSON form.

Rotation matrices carry their scalar prefactors explicitly so the global
phase of a controlled branch is physical. Every kind is expressed in the
convention ``sigma_x = X``, ``sigma_y = -Y``, ``sigma_z = -Z``:

==========  ==============================================
``rz-n``    ``exp(-i t n)  = diag(1, e^{-i t})``
``rx``      ``exp(-i t X)``
``ry``      ``exp(-i t sigma_y) = exp(+i t Y)``
``ru``      ``e^{i t/2} exp(-i t/2 sigma_y)``
==========  ==============================================
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SQRT2 = np.sqrt(2.0)
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)

FIXED_1Q = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2,
    "j": np.array([[1, -1j], [1, 1j]], dtype=complex) / SQRT2,
    "jdag": np.array([[1, 1], [1j, -1j]], dtype=complex) / SQRT2,
}
ROTATIONS = ("rz-n", "rx", "ry", "ru")
FIXED_2Q = ("iswap+", "iswap-", "swap")
KINDS = tuple(FIXED_1Q) + ROTATIONS + FIXED_2Q + ("unitary",)
INVERSE_KIND = {"h": "h", "j": "jdag", "jdag": "j", "iswap+": "iswap-", "iswap-": "iswap+",
                "swap": "swap"}


class GateError(ValueError):
    """Malformed gate or circuit."""


def rotation_matrix(kind: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    if kind == "rz-n":
        return np.diag([1.0, np.exp(-1j * theta)])
    if kind == "rx":
        return c * _I2 - 1j * s * _X
    if kind == "ry":
        return c * _I2 + 1j * s * _Y
    if kind == "ru":
        return np.exp(0.5j * theta) * (np.cos(theta / 2) * _I2 + 1j * np.sin(theta / 2) * _Y)
    raise GateError(f"{kind!r} is not a rotation")


def iswap_matrix(sign: int) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[1, 1] = m[2, 2] = 0
    m[1, 2] = m[2, 1] = 1j * sign
    return m


SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """One gate. ``targets[0]`` is the low bit of the local matrix index.

    ``controlled`` gates are conditioned on the probe qubit, which sits just
    above the system register. Uncontrolled single-qubit gates may target the
    probe itself (index ``n_system``).
    """

    kind: str
    targets: tuple[int, ...]
    controlled: bool = True
    theta: float | None = None
    payload: np.ndarray | None = field(default=None, compare=False, repr=False)
    tag: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind not in KINDS:
            raise GateError(f"unknown gate kind {self.kind!r}")
        arity = len(self.targets)
        if self.kind in FIXED_2Q and arity != 2:
            raise GateError(f"{self.kind} needs 2 targets")
        if (self.kind in FIXED_1Q or self.kind in ROTATIONS) and arity != 1:
            raise GateError(f"{self.kind} needs 1 target")
        if len(set(self.targets)) != arity:
            raise GateError(f"repeated target in {self.targets}")
        if self.kind in ROTATIONS:
            if self.theta is None or not np.isfinite(self.theta):
                raise GateError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "theta", float(self.theta))
        if self.kind == "unitary":
            if self.payload is None or self.payload.shape != (2 ** arity, 2 ** arity):
                raise GateError("unitary gate needs a matching square payload")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in FIXED_2Q

    @property
    def name(self) -> str:
        return ("c-" if self.controlled else "") + self.kind

    def matrix(self) -> np.ndarray:
        """Uncontrolled local matrix on ``targets``."""
        if self.kind in FIXED_1Q:
            return FIXED_1Q[self.kind]
        if self.kind in ROTATIONS:
            return rotation_matrix(self.kind, self.theta)
        if self.kind == "iswap+":
            return iswap_matrix(+1)
        if self.kind == "iswap-":
            return iswap_matrix(-1)
        if self.kind == "swap":
            return SWAP
        return self.payload

    def inverse(self) -> "Gate":
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.targets, self.controlled, -self.theta, tag=self.tag)
        if self.kind == "unitary":
            return Gate("unitary", self.targets, self.controlled,
                        payload=self.payload.conj().T, tag=self.tag)
        return Gate(INVERSE_KIND[self.kind], self.targets, self.controlled, tag=self.tag)

    def to_dict(self) -> dict:
        if self.kind == "unitary":
            raise GateError("placeholder unitaries are not serializable")
        d: dict = {"kind": self.name, "targets": list(self.targets)}
        if self.theta is not None:
            d["theta"] = self.theta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        name = d["kind"]
        controlled = name.startswith("c-")
        kind = name[2:] if controlled else name
        return cls(kind, tuple(d["targets"]), controlled, d.get("theta"))


def c(kind: str, *targets: int, theta: float | None = None, tag: str = "") -> Gate:
    """Shorthand for a controlled gate."""
    return Gate(kind, targets, True, theta, tag=tag)


@dataclass(frozen=True)
class Circuit:
    n_system: int
    gates: tuple[Gate, ...] = ()
    label: str = ""
    dt: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            limit = self.n_system + (0 if g.controlled else 1)
            if any(t < 0 or t >= limit for t in g.targets):
                raise GateError(f"gate {g.name} targets {g.targets} outside register")

    @property
    def n_total(self) -> int:
        return self.n_system + 1

    @property
    def control(self) -> int:
        return self.n_system

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_system != self.n_system:
            raise GateError("cannot concatenate circuits on different registers")
        return Circuit(self.n_system, self.gates + other.gates, self.label or other.label, self.dt)

    def extended(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(self.n_system, self.gates + tuple(gates), self.label, self.dt)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_system, tuple(g.inverse() for g in reversed(self.gates)),
                       self.label, self.dt)

    def relabel(self, label: str) -> "Circuit":
        return Circuit(self.n_system, self.gates, label, self.dt)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.name] = out.get(g.name, 0) + 1
        return dict(sorted(out.items()))

    def count_sqg(self) -> int:
        return sum(1 for g in self.gates if not g.is_two_qubit)

    def count_2q(self) -> int:
        return sum(1 for g in self.gates if g.is_two_qubit)

    def to_dict(self) -> dict:
        return {"n_system": self.n_system, "dt": self.dt, "label": self.label,
                "gates": [g.to_dict() for g in self.gates]}

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        return cls(int(d["n_system"]), tuple(Gate.from_dict(g) for g in d["gates"]),
                   d.get("label", ""), d.get("dt"))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class AdjacencyViolation:
    index: int
    gate: str
    targets: tuple[int, ...]


def validate_adjacency(circuit: Circuit) -> list[AdjacencyViolation]:
    """Two-qubit gates must act on neighbouring chain indices; empty list means ok."""
    bad = []
    for k, g in enumerate(circuit.gates):
        if g.is_two_qubit and abs(g.targets[0] - g.targets[1]) != 1:
            bad.append(AdjacencyViolation(k, g.name, g.targets))
    return bad


def _same_slot(a: Gate, b: Gate) -> bool:
    return a.controlled == b.controlled and a.targets == b.targets


def cancel_trivial_pairs(circuit: Circuit, atol: float = 1e-12) -> Circuit:
    """Drop adjacent gate/inverse pairs and zero-angle rotations (repeated to a fixed point)."""
    out: list[Gate] = []
    for g in circuit.gates:
        if g.kind in ROTATIONS and abs(g.theta) <= atol:
            continue
        if out and _same_slot(out[-1], g):
            prev = out[-1]
            if prev.kind in ROTATIONS and prev.kind == g.kind:
                merged = prev.theta + g.theta
                out.pop()
                if abs(merged) > atol:
                    out.append(Gate(g.kind, g.targets, g.controlled, merged, tag=g.tag))
                continue
            if prev.kind != "unitary" and prev.kind not in ROTATIONS and INVERSE_KIND[prev.kind] == g.kind:
                out.pop()
                continue
        out.append(g)
    return Circuit(circuit.n_system, tuple(out), circuit.label, circuit.dt)


def sequence(n_system: int, gates: Sequence[Gate], label: str = "", dt: float | None = None) -> Circuit:
    return Circuit(n_system, tuple(gates), label, dt)

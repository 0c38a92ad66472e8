"""Cluster geometry and the six Hamiltonian blocks.

``H' = kin + int - s_pair - d_pair - local - af`` with open boundaries and
row-major site labels ``1 + x + Lx*y + Lx*Ly*z``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .jordan_wigner import SPINS, Spin, d_local, d_string, t_local, t_string
from .pauli import PauliSum, commutator, to_dense


class GeometryError(ValueError):
    """Geometry string or extent cannot describe a supported cluster."""


class UnsupportedGeometryError(GeometryError):
    """Operation defined only for a subset of geometries."""


BLOCK_NAMES = ("local", "af", "int", "kin", "s_pair", "d_pair")
# sign with which each block enters the full cluster Hamiltonian
BLOCK_SIGNS = {"local": -1, "af": -1, "int": 1, "kin": 1, "s_pair": -1, "d_pair": -1}


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    axis: int  # 0 = x, 1 = y, 2 = z

    @property
    def span(self) -> int:
        return self.j - self.i


@dataclass(frozen=True)
class ClusterSpec:
    dims: int
    extent: tuple[int, ...]
    t: float = 1.0
    U: float = 8.0
    mu_p: float = 0.0
    M_p: float = 0.0
    delta_s: float = 0.0
    delta_d: float = 0.0
    boundary: str = "open"
    n_clusters: int = field(default=1, compare=False)

    def __post_init__(self):
        extent = tuple(int(e) for e in self.extent)
        object.__setattr__(self, "extent", extent)
        if self.dims not in (1, 2, 3):
            raise GeometryError(f"dims must be 1, 2 or 3, got {self.dims}")
        if len(extent) != self.dims:
            raise GeometryError(f"extent {extent} does not match dims={self.dims}")
        if any(e < 1 for e in extent):
            raise GeometryError(f"extents must be positive, got {extent}")
        if self.dims > 1 and any(e == 1 for e in extent):
            raise GeometryError(
                f"degenerate extent {extent}: use a lower-dimensional geometry instead"
            )
        if self.boundary != "open":
            raise GeometryError("only open boundaries are supported")
        for name in ("t", "U", "mu_p", "M_p", "delta_s", "delta_d"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @property
    def L_c(self) -> int:
        return int(np.prod(self.extent))

    @property
    def n_qubits(self) -> int:
        return 2 * self.L_c

    @property
    def label(self) -> str:
        if self.dims == 1:
            return f"1d:{self.extent[0]}"
        return "x".join(str(e) for e in self.extent)

    def with_params(self, **kw) -> "ClusterSpec":
        return replace(self, **kw)

    def position(self, site: int) -> tuple[int, ...]:
        """Integer grid coordinates of a 1-based site label."""
        k = site - 1
        coords = []
        for e in self.extent:
            coords.append(k % e)
            k //= e
        return tuple(coords)

    def site_of(self, coords: tuple[int, ...]) -> int:
        k, stride = 0, 1
        for c, e in zip(coords, self.extent):
            k += c * stride
            stride *= e
        return k + 1

    def af_sign(self, site: int) -> int:
        """Checkerboard phase ``exp(i Q.R)`` with ``Q`` all pi."""
        return -1 if sum(self.position(site)) % 2 else 1

    @cached_property
    def bonds(self) -> tuple[Bond, ...]:
        out = []
        for site in range(1, self.L_c + 1):
            pos = self.position(site)
            for axis in range(self.dims):
                if pos[axis] + 1 < self.extent[axis]:
                    nb = list(pos)
                    nb[axis] += 1
                    out.append(Bond(site, self.site_of(tuple(nb)), axis))
        return tuple(sorted(out, key=lambda b: (b.i, b.j)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["extent"] = list(self.extent)
        d.pop("boundary")
        d.pop("n_clusters")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ClusterSpec":
        known = {"dims", "extent", "t", "U", "mu_p", "M_p", "delta_s", "delta_d", "boundary"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown cluster fields: {sorted(unknown)}")
        if "extent" not in data:
            raise ValueError("cluster spec needs an 'extent'")
        kw = dict(data)
        kw.setdefault("dims", len(kw["extent"]))
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "ClusterSpec":
        return cls.from_dict(json.loads(text))


_GEOM_1D = re.compile(r"^1d:(\d+)$")
_GEOM_ND = re.compile(r"^\d+(x\d+){1,2}$")


def parse_geometry(text: str, **params) -> ClusterSpec:
    """``"1d:4"``, ``"2x2"``, ``"2x2x2"`` or a path to a JSON cluster file."""
    s = text.strip().lower()
    m = _GEOM_1D.match(s)
    if m:
        return ClusterSpec(1, (int(m.group(1)),), **params)
    if _GEOM_ND.match(s):
        extent = tuple(int(p) for p in s.split("x"))
        return ClusterSpec(len(extent), extent, **params)
    path = Path(text)
    if path.suffix == ".json" and path.exists():
        data = json.loads(path.read_text())
        data.update({k: v for k, v in params.items()})
        return ClusterSpec.from_dict(data)
    raise GeometryError(f"cannot parse geometry {text!r}")


def build_local(spec: ClusterSpec) -> PauliSum:
    out = PauliSum.zero(spec.n_qubits)
    if spec.mu_p == 0:
        return out
    for i in range(1, spec.L_c + 1):
        for s in SPINS:
            out = out + spec.mu_p * t_local(i, s, spec.L_c)
    return out


def build_af(spec: ClusterSpec) -> PauliSum:
    out = PauliSum.zero(spec.n_qubits)
    if spec.M_p == 0:
        return out
    for i in range(1, spec.L_c + 1):
        w = spec.M_p * spec.af_sign(i)
        out = out + w * (t_local(i, Spin.UP, spec.L_c) - t_local(i, Spin.DOWN, spec.L_c))
    return out


def build_int(spec: ClusterSpec) -> PauliSum:
    out = PauliSum.zero(spec.n_qubits)
    if spec.U == 0:
        return out
    for i in range(1, spec.L_c + 1):
        out = out + spec.U * (t_local(i, Spin.UP, spec.L_c) * t_local(i, Spin.DOWN, spec.L_c))
    return out


def build_kin(spec: ClusterSpec) -> PauliSum:
    out = PauliSum.zero(spec.n_qubits)
    if spec.t == 0:
        return out
    for b in spec.bonds:
        for s in SPINS:
            out = out + (-spec.t) * t_string(b.i, b.j, s, spec.L_c)
    return out


def build_s_pair(spec: ClusterSpec) -> PauliSum:
    out = PauliSum.zero(spec.n_qubits)
    if spec.delta_s == 0:
        return out
    for i in range(1, spec.L_c + 1):
        out = out + spec.delta_s * d_local(i, spec.L_c)
    return out


def d_wave_sign(bond: Bond) -> int:
    return 1 if bond.axis == 0 else -1


def build_d_pair(spec: ClusterSpec) -> PauliSum:
    if spec.dims != 2:
        raise UnsupportedGeometryError("d-wave pairing is defined only for 2D clusters")
    out = PauliSum.zero(spec.n_qubits)
    if spec.delta_d == 0:
        return out
    for b in spec.bonds:
        w = spec.delta_d * d_wave_sign(b) / 2
        out = out + w * (d_string(b.i, b.j, Spin.UP, spec.L_c) - d_string(b.i, b.j, Spin.DOWN, spec.L_c))
    return out


@dataclass(frozen=True)
class HamiltonianBlocks:
    local: PauliSum
    af: PauliSum
    int: PauliSum
    kin: PauliSum
    s_pair: PauliSum
    d_pair: PauliSum

    def __getitem__(self, name: str) -> PauliSum:
        if name not in BLOCK_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def items(self):
        return [(name, self[name]) for name in BLOCK_NAMES]

    @property
    def n_qubits(self) -> int:
        return self.local.n_qubits

    def signed(self, name: str) -> PauliSum:
        return BLOCK_SIGNS[name] * self[name]

    @property
    def z_block(self) -> PauliSum:
        return self.int - self.local - self.af

    @property
    def kd_block(self) -> PauliSum:
        return self.kin - self.d_pair

    @property
    def s_block(self) -> PauliSum:
        return -1 * self.s_pair

    @property
    def full(self) -> PauliSum:
        return self.kin + self.int - self.s_pair - self.d_pair - self.local - self.af


def build_blocks(spec: ClusterSpec) -> HamiltonianBlocks:
    """All six blocks; the d-wave block is zero outside two dimensions."""
    d = build_d_pair(spec) if spec.dims == 2 else PauliSum.zero(spec.n_qubits)
    return HamiltonianBlocks(
        local=build_local(spec), af=build_af(spec), int=build_int(spec),
        kin=build_kin(spec), s_pair=build_s_pair(spec), d_pair=d,
    )


def ignored_fields(spec: ClusterSpec) -> list[str]:
    """Parameters that have no effect on this geometry."""
    return ["delta_d"] if spec.dims != 2 and spec.delta_d != 0 else []


def build_full(spec: ClusterSpec) -> PauliSum:
    return build_blocks(spec).full


@dataclass(frozen=True)
class CommutatorTable:
    names: tuple[str, ...]
    norms: np.ndarray

    def is_zero(self, a: str, b: str, tol: float = 1e-12) -> bool:
        return bool(self.norms[self.names.index(a), self.names.index(b)] <= tol)

    def pattern(self, tol: float = 1e-12) -> np.ndarray:
        return self.norms > tol


def commutator_table(spec: ClusterSpec) -> CommutatorTable:
    """Frobenius norms of the dense pairwise commutators of the six blocks."""
    blocks = build_blocks(spec)
    dense = {name: to_dense(op) for name, op in blocks.items()}
    k = len(BLOCK_NAMES)
    norms = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            A, B = dense[BLOCK_NAMES[a]], dense[BLOCK_NAMES[b]]
            norms[a, b] = norms[b, a] = np.linalg.norm(A @ B - B @ A)
    return CommutatorTable(BLOCK_NAMES, norms)


def symbolic_commutator(blocks: HamiltonianBlocks, a: str, b: str) -> PauliSum:
    return commutator(blocks[a], blocks[b])

"""Resource counts: closed forms alongside counts taken from emitted circuits."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .compiler import compile_hopping, compile_interaction, compile_local_af, compile_s_pair, compile_d_pair
from .gates import Circuit
from .hamiltonian import ClusterSpec

# reference rows: label -> (n, 2^n, qubits, correlators, sqg tune, iswap tune, hopping/step)
REFERENCE_ROWS = {
    "1d:2": (4, 16, 5, 64, 28, 6, 24),
    "1d:3": (6, 64, 7, 144, 42, 10, 48),
    "1d:4": (8, 256, 9, 256, 56, 14, 72),
    "2x2": (8, 256, 9, 256, 56, 14, 96),
    "3x3": (18, 262144, 19, 1296, 126, 34, 336),
    "4x4": (32, 4294967296, 33, 4096, 224, 62, 768),
    "2x2x2": (16, 65536, 17, 1024, 112, 30, 416),
    "3x3x3": (54, 1.8e16, 55, 11664, 378, 106, 2736),
    "4x4x4": (128, 3.4e38, 129, 65536, 896, 254, 10368),
}


@dataclass(frozen=True)
class ResourceReport:
    geometry: str
    dims: int
    L_c: int
    n_orbitals: int
    hilbert_dim: int
    qubits: int
    correlators: int
    csqg_to_tune: int
    iswap_to_tune: int
    csqg_types_emitted: int
    iswap_slots_emitted: int
    hopping_gates_per_step: int
    hopping_gates_per_step_double_core: int
    block_gates: dict = field(default_factory=dict)
    reference_hopping: int | None = None

    @property
    def hopping_flag(self) -> str:
        if self.reference_hopping is None:
            return ""
        if self.reference_hopping == self.hopping_gates_per_step:
            return "match"
        if self.reference_hopping == self.hopping_gates_per_step_double_core:
            return "differs (matches double-core count)"
        return "differs"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hopping_flag"] = self.hopping_flag
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _tuning(circuits: list[Circuit]) -> tuple[int, int]:
    sqg = set()
    pairs = set()
    for c in circuits:
        for g in c.gates:
            if not g.controlled:
                continue
            if g.is_two_qubit:
                pairs.add((g.kind, tuple(sorted(g.targets))))
            else:
                sqg.add((g.kind, g.targets[0]))
    return len(sqg), len(pairs)


def count_resources(spec: ClusterSpec, dt: float = 0.01) -> ResourceReport:
    """Closed-form counts plus per-step gate counts from the template emitters."""
    n = spec.n_qubits
    hop = compile_hopping(spec, dt, method="template", style="single")
    hop2 = compile_hopping(spec, dt, method="template", style="double")
    blocks = {
        "local+af": compile_local_af(spec, dt),
        "int": compile_interaction(spec, dt),
        "kin": hop,
        "s_pair": compile_s_pair(spec, dt),
    }
    if spec.dims == 2:
        blocks["d_pair"] = compile_d_pair(spec, dt, method="template")
    sqg_types, iswap_slots = _tuning(list(blocks.values()))
    block_gates = {k: {"c-sqg": c.count_sqg(), "c-iswap": c.count_2q(), "total": len(c)}
                   for k, c in blocks.items()}
    ref = REFERENCE_ROWS.get(spec.label)
    return ResourceReport(
        geometry=spec.label, dims=spec.dims, L_c=spec.L_c, n_orbitals=n,
        hilbert_dim=2 ** n, qubits=n + 1, correlators=4 * n * n,
        csqg_to_tune=7 * n, iswap_to_tune=2 * n - 2,
        csqg_types_emitted=sqg_types, iswap_slots_emitted=iswap_slots,
        hopping_gates_per_step=len(hop), hopping_gates_per_step_double_core=len(hop2),
        block_gates=block_gates,
        reference_hopping=ref[6] if ref else None,
    )


TABLE_COLUMNS = (
    ("geometry", "geometry"), ("n", "n_orbitals"), ("2^n", "hilbert_dim"), ("qubits", "qubits"),
    ("correlators", "correlators"), ("c-SQG tune", "csqg_to_tune"), ("c-iSWAP tune", "iswap_to_tune"),
    ("hop/step", "hopping_gates_per_step"), ("hop/step double", "hopping_gates_per_step_double_core"),
    ("reference", "reference_hopping"), ("flag", "hopping_flag"),
)


def format_table(reports: list[ResourceReport]) -> str:
    rows = [[h for h, _ in TABLE_COLUMNS]]
    for r in reports:
        d = r.to_dict()
        rows.append(["" if d[k] is None else str(d[k]) for _, k in TABLE_COLUMNS])
    widths = [max(len(row[c]) for row in rows) for c in range(len(TABLE_COLUMNS))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows)

"""Lowering of controlled block exponentials into the restricted gate set.

Gate set: uncontrolled single-qubit gates on the probe, controlled
single-qubit gates on system qubits, controlled +-iSWAP on neighbouring
system qubits.

Everything is built from one mechanism: a group of commuting Pauli strings
is conjugated by Clifford pre-gates until each string is a single-qubit
letter, the rotations are emitted, and the pre-gates are undone. The Pauli
frame is tracked symbolically, so every emitted circuit is exact by
construction and the dense oracle only has to confirm it.

Two strategies exist for blocks whose terms do not all commute (hopping and
d-wave pairing on clusters where bonds share a site):

``template``
    one pre-gate ladder per bond term; exact only if the bond terms commute,
    otherwise a first-order product. These are the counts used for resource
    tables.
``gaussian``
    the block is quadratic in fermions, so its exponential is a normal-mode
    transform ``W`` (nearest-neighbour Majorana rotations) around diagonal
    phases. Exact for any cluster.

``auto`` picks ``template`` when it is exact and ``gaussian`` otherwise.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .gates import Circuit, Gate, cancel_trivial_pairs
from .hamiltonian import BLOCK_NAMES, ClusterSpec, HamiltonianBlocks, build_blocks, d_wave_sign
from .jordan_wigner import SPINS, OrbitalIndex, Spin, d_local, d_string, hermitian_probe, qubit_index, t_string
from .pauli import PauliSum, PauliTerm, anticommutes, multiply, pauli_decompose

METHODS = ("auto", "template", "gaussian")
TERM_ALIASES = {
    "local": ("local", "af"), "interaction": ("int",), "int": ("int",),
    "hopping": ("kin",), "kin": ("kin",), "spair": ("s_pair",), "s_pair": ("s_pair",),
    "dpair": ("d_pair",), "d_pair": ("d_pair",), "af": ("af",),
}


class CompilationError(RuntimeError):
    """No decomposition found inside the gate set."""


# ---------------------------------------------------------------- Pauli frame

@lru_cache(maxsize=None)
def _conj_table(kind: str, letters: tuple[str, ...]) -> tuple[complex, tuple[str, ...]]:
    g = Gate(kind, tuple(range(len(letters))), controlled=False)
    m = g.matrix()
    term = PauliTerm(1.0, letters)
    from .pauli import kron_dense  # local import keeps the module graph flat
    out = pauli_decompose(m @ kron_dense(term) @ m.conj().T, tol=1e-12).terms
    if len(out) != 1:
        raise CompilationError(f"{kind} is not Clifford on {letters}")
    return out[0].coefficient, out[0].letters


def conjugate(term: PauliTerm, gate: Gate) -> PauliTerm:
    """``G P G^dagger`` for a Clifford gate acting on system qubits."""
    local = tuple(term.letters[q] for q in gate.targets)
    phase, new = _conj_table(gate.kind, local)
    letters = list(term.letters)
    for q, c in zip(gate.targets, new):
        letters[q] = c
    coeff = term.coefficient * phase
    return PauliTerm(coeff, tuple(letters))


@dataclass
class Emitter:
    """Accumulates controlled gates plus the probe phase they owe."""

    n_system: int
    gates: list[Gate] = field(default_factory=list)
    phase: float = 0.0  # compensation angle for rz-n on the probe

    def add(self, gate: Gate):
        self.gates.append(gate)

    def extend(self, gates: Sequence[Gate]):
        self.gates.extend(gates)

    def rotate(self, term: PauliTerm, alpha: float, track_phase: bool = True):
        """Emit ``exp(-i alpha s L)`` for a single-qubit term ``s L``."""
        support = term.support
        if len(support) != 1:
            raise CompilationError(f"rotation needs a single-qubit string, got {term.label}")
        s = term.coefficient
        if abs(s.imag) > 1e-12 or abs(abs(s.real) - 1) > 1e-12:
            raise CompilationError(f"non-Hermitian frame coefficient {s}")
        a = alpha * s.real
        q = support[0]
        letter = term.letters[q]
        if letter == "X":
            self.add(Gate("rx", (q,), True, a))
        elif letter == "Y":
            self.add(Gate("ry", (q,), True, -a))
        else:
            # exp(-i a Z) = e^{-i a} rz-n(-2a)
            self.add(Gate("rz-n", (q,), True, -2 * a))
            if track_phase:
                self.phase += a

    def circuit(self, label: str, dt: float | None, fix_phase: bool = True) -> Circuit:
        gates = list(self.gates)
        if fix_phase and abs(self.phase) > 1e-15:
            gates.append(Gate("rz-n", (self.n_system,), False, self.phase))
        return Circuit(self.n_system, tuple(gates), label, dt)


def _apply_frame(terms: list[PauliTerm], gates: Sequence[Gate]) -> list[PauliTerm]:
    out = []
    for t in terms:
        for g in gates:
            t = conjugate(t, g)
        out.append(t)
    return out


def _is_rotatable(t: PauliTerm, allow_z: bool) -> bool:
    sup = t.support
    return len(sup) == 1 and (allow_z or t.letters[sup[0]] != "Z")


def ladder(a: int, f: int) -> list[Gate]:
    """iSWAPs on (f-1,f), ..., (a+1,a+2) moving the letter at ``f`` down to ``a+1``."""
    gates = []
    sign = "+"
    for k in range(f - 1, a, -1):
        gates.append(Gate("iswap" + sign, (k, k + 1), True))
        sign = "-" if sign == "+" else "+"
    return gates


BASIS = ("h", "j", "jdag")


def _single_core(terms, a):
    """One iSWAP core mapping a commuting pair on (a, a+1) to two single-qubit letters."""
    for b0, b1, s in itertools.product(BASIS, BASIS, ("+", "-")):
        pre = [Gate(b0, (a,), True), Gate(b1, (a + 1,), True), Gate("iswap" + s, (a, a + 1), True)]
        mapped = _apply_frame(terms, pre)
        if all(_is_rotatable(t, False) for t in mapped):
            if len({t.support for t in mapped}) == len(mapped):
                return pre, mapped
    return None


def _double_core(term, a):
    """Basis change on ``a`` then one iSWAP, mapping one string to a letter on ``a``."""
    for b, s in itertools.product(BASIS, ("-", "+")):
        pre = [Gate(b, (a,), True), Gate("iswap" + s, (a, a + 1), True)]
        (mapped,) = _apply_frame([term], pre)
        if _is_rotatable(mapped, False) and mapped.support == (a,):
            return pre, mapped
    for b, s in itertools.product(BASIS, ("-", "+")):
        pre = [Gate(b, (a + 1,), True), Gate("iswap" + s, (a, a + 1), True)]
        (mapped,) = _apply_frame([term], pre)
        if _is_rotatable(mapped, False):
            return pre, mapped
    return None


def _inverse(gates: Sequence[Gate]) -> list[Gate]:
    return [g.inverse() for g in reversed(gates)]


def emit_string_group(em: Emitter, terms: Sequence[PauliTerm], dt: float, style: str = "single",
                      track_phase: bool = True) -> None:
    """Emit ``prod_k exp(-i dt c_k P_k)`` for commuting strings sharing endpoints.

    ``terms`` carry real coefficients ``c_k``. ``style`` selects one shared
    iSWAP core (``single``) or one core per string (``double``).
    """
    terms = [t for t in terms if abs(t.coefficient) > 1e-15]
    if not terms:
        return
    for x, y in itertools.combinations(terms, 2):
        if anticommutes(x, y):
            raise CompilationError("string group must commute")
    unit = [PauliTerm(1.0, t.letters) for t in terms]
    alphas = [dt * t.coefficient.real for t in terms]
    lo = min(min(t.support) for t in unit)
    hi = max(max(t.support) for t in unit)
    if lo == hi:
        for u, al in zip(unit, alphas):
            em.rotate(u, al, track_phase)
        return
    lad = ladder(lo, hi)
    framed = _apply_frame(unit, lad)
    em.extend(lad)
    if style == "single" and len(framed) == 2:
        found = _single_core(framed, lo)
        if found is None:
            raise CompilationError("no single-core decomposition")
        pre, mapped = found
        em.extend(pre)
        for m, al in zip(mapped, alphas):
            em.rotate(m, al, track_phase)
        em.extend(_inverse(pre))
    else:
        for f, al in zip(framed, alphas):
            if _is_rotatable(f, True):
                em.rotate(f, al, track_phase)
                continue
            found = _double_core(f, lo)
            if found is None:
                raise CompilationError(f"no core for {f.label}")
            pre, mapped = found
            em.extend(pre)
            em.rotate(mapped, al, track_phase)
            em.extend(_inverse(pre))
    em.extend(_inverse(lad))


def _terms_of(op: PauliSum) -> list[PauliTerm]:
    out = op.terms
    for t in out:
        if abs(t.coefficient.imag) > 1e-12:
            raise CompilationError(f"non-Hermitian term {t.label}")
    return [PauliTerm(t.coefficient.real, t.letters) for t in out]


# ---------------------------------------------------------------- block templates

def compile_local_af(spec: ClusterSpec, dt: float, which: tuple[str, ...] = ("local", "af")) -> Circuit:
    """One controlled ``rz-n`` per orbital with the checkerboard angle."""
    gates = []
    for i in range(1, spec.L_c + 1):
        for s in SPINS:
            sign = 1 if s is Spin.UP else -1
            energy = 0.0
            if "local" in which:
                energy += spec.mu_p
            if "af" in which:
                energy += spec.M_p * spec.af_sign(i) * sign
            gates.append(Gate("rz-n", (qubit_index(i, s),), True, -dt * energy))
    label = "+".join(which)
    return Circuit(spec.n_qubits, tuple(gates), label, dt)


@lru_cache(maxsize=None)
def _interaction_core() -> tuple[tuple[Gate, ...], int]:
    """Pre-gates mapping ``Z_up Z_down`` to ``-Y_up`` on the local pair (0, 1)."""
    zz = PauliTerm(1.0, ("Z", "Z"))
    for b, s in itertools.product(BASIS, ("-", "+")):
        pre = (Gate(b, (1,), True), Gate("iswap" + s, (0, 1), True))
        (m,) = _apply_frame([zz], pre)
        if m.letters == ("Y", "I") and abs(m.coefficient + 1) < 1e-12:
            return pre, 0
    raise CompilationError("no interaction core")


def compile_interaction(spec: ClusterSpec, dt: float, fuse_local: bool = False) -> Circuit:
    """Per site: ``rz-n`` on both orbitals, basis change, iSWAP, ``ru``, undo."""
    theta = spec.U * dt
    pre, _ = _interaction_core()
    loc = compile_local_af(spec, dt) if fuse_local else None
    gates = []
    for i in range(1, spec.L_c + 1):
        qu, qd = qubit_index(i, Spin.UP), qubit_index(i, Spin.DOWN)
        au = ad = theta / 2
        if loc is not None:
            au += loc.gates[qu].theta
            ad += loc.gates[qd].theta
        gates.append(Gate("rz-n", (qu,), True, au))
        gates.append(Gate("rz-n", (qd,), True, ad))
        shift = [Gate(g.kind, tuple(qu + t for t in g.targets), True) for g in pre]
        gates.extend(shift)
        gates.append(Gate("ru", (qu,), True, theta / 2))
        gates.extend(_inverse(shift))
    label = "int+local+af" if fuse_local else "int"
    return Circuit(spec.n_qubits, tuple(gates), label, dt)


def _group_circuit(spec, dt, groups, label, style) -> Circuit:
    em = Emitter(spec.n_qubits)
    for op in groups:
        emit_string_group(em, _terms_of(op), dt, style)
    return em.circuit(label, dt)


def hopping_groups(spec: ClusterSpec) -> list[PauliSum]:
    """Signed per-bond, per-spin generators whose sum is the hopping block."""
    return [(-spec.t) * t_string(b.i, b.j, s, spec.L_c) for b in spec.bonds for s in SPINS]


def s_pair_groups(spec: ClusterSpec) -> list[PauliSum]:
    return [(-spec.delta_s) * d_local(i, spec.L_c) for i in range(1, spec.L_c + 1)]


def d_pair_groups(spec: ClusterSpec) -> list[PauliSum]:
    if spec.dims != 2:
        from .hamiltonian import UnsupportedGeometryError
        raise UnsupportedGeometryError("d-wave pairing is defined only for 2D clusters")
    out = []
    for b in spec.bonds:
        w = -spec.delta_d * d_wave_sign(b) / 2
        out.append(w * d_string(b.i, b.j, Spin.UP, spec.L_c))
        out.append((-w) * d_string(b.i, b.j, Spin.DOWN, spec.L_c))
    return out


def _groups_commute(groups: Sequence[PauliSum]) -> bool:
    flat = [(gi, t) for gi, g in enumerate(groups) for t in g.terms]
    for (ga, a), (gb, b) in itertools.combinations(flat, 2):
        if ga != gb and anticommutes(a, b):
            return False
    return True


def template_is_exact(spec: ClusterSpec, block: str) -> bool:
    if block == "kin":
        return _groups_commute(hopping_groups(spec))
    if block == "d_pair":
        return spec.dims != 2 or _groups_commute(d_pair_groups(spec))
    return True


def _resolve(method: str, spec: ClusterSpec, block: str) -> str:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if method == "auto":
        return "template" if template_is_exact(spec, block) else "gaussian"
    return method


def compile_hopping(spec: ClusterSpec, dt: float, method: str = "auto", style: str = "single") -> Circuit:
    """Controlled ``exp(-i dt H_kin)``."""
    if _resolve(method, spec, "kin") == "gaussian":
        return compile_quadratic(build_blocks(spec).kin, dt, "kin")
    return _group_circuit(spec, dt, hopping_groups(spec), "kin", style)


def compile_s_pair(spec: ClusterSpec, dt: float, style: str = "double") -> Circuit:
    """Controlled ``exp(+i dt H_s)``; on-site terms always commute."""
    return _group_circuit(spec, dt, s_pair_groups(spec), "s_pair", style)


def compile_d_pair(spec: ClusterSpec, dt: float, method: str = "auto", style: str = "double") -> Circuit:
    """Controlled ``exp(+i dt H_d)`` (two-dimensional clusters only)."""
    groups = d_pair_groups(spec)
    if _resolve(method, spec, "d_pair") == "gaussian":
        return compile_quadratic(-1 * build_blocks(spec).d_pair, dt, "d_pair")
    return _group_circuit(spec, dt, groups, "d_pair", style)


def compile_block(spec: ClusterSpec, block: str, dt: float, method: str = "auto",
                  optimize: bool = False) -> Circuit:
    """Controlled ``exp(-i dt s_B B)`` where ``s_B`` is the block's sign in the cluster Hamiltonian."""
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    if block in ("local", "af"):
        circ = compile_local_af(spec, dt, (block,))
    elif block == "int":
        circ = compile_interaction(spec, dt)
    elif block == "kin":
        circ = compile_hopping(spec, dt, method)
    elif block == "s_pair":
        circ = compile_s_pair(spec, dt)
    elif block == "d_pair":
        circ = compile_d_pair(spec, dt, method)
    else:
        raise KeyError(f"unknown block {block!r}; expected one of {BLOCK_NAMES}")
    circ = circ.relabel(block)
    return cancel_trivial_pairs(circ) if optimize else circ


def compile_term(spec: ClusterSpec, term: str, dt: float, method: str = "auto") -> list[Circuit]:
    """CLI-level term names to block circuits (``local`` covers both diagonal fields)."""
    if term == "all":
        names = [b for b in BLOCK_NAMES if not (b == "d_pair" and spec.dims != 2)]
        return [compile_block(spec, b, dt, method) for b in names]
    if term not in TERM_ALIASES:
        raise KeyError(f"unknown term {term!r}")
    if term == "local":
        return [compile_local_af(spec, dt).relabel("local+af")]
    return [compile_block(spec, b, dt, method) for b in TERM_ALIASES[term]]


def compile_group(spec: ClusterSpec, group: str, dt: float) -> Circuit:
    """Exact controlled circuit for one splitting group ``Z``, ``KD`` or ``S``.

    ``dt`` may be negative (splitting schemes use negative sub-steps).
    """
    if group == "Z":
        circ = compile_local_af(spec, dt) + compile_interaction(spec, dt)
    elif group == "KD":
        blocks = build_blocks(spec)
        if spec.dims == 2 or not template_is_exact(spec, "kin"):
            circ = compile_quadratic(blocks.kd_block, dt, "KD")
        else:
            circ = compile_hopping(spec, dt, "template")
    elif group == "S":
        circ = compile_s_pair(spec, dt)
    else:
        raise KeyError(f"unknown group {group!r}")
    return circ.relabel(group)


# ---------------------------------------------------------------- quadratic synthesis

def majorana(k: int, n_qubits: int) -> PauliTerm:
    """``gamma_{2q} = X`` probe and ``gamma_{2q+1} = Y`` probe of orbital ``q``."""
    from .jordan_wigner import orbital_of_qubit
    orb = orbital_of_qubit(k // 2)
    return hermitian_probe(orb, "X" if k % 2 == 0 else "Y", n_qubits // 2)


def majorana_form(op: PauliSum) -> tuple[np.ndarray, float]:
    """Real antisymmetric ``A`` and offset ``c`` with ``op = (i/4) g^T A g + c``."""
    n = op.n_qubits
    m = 2 * n
    gam = [majorana(k, n) for k in range(m)]
    A = np.zeros((m, m))
    for k in range(m):
        for l in range(k + 1, m):
            prod = multiply(gam[l], gam[k])
            # Tr(op g_l g_k)/d equals the matching coefficient times the phase
            cval = op.coefficient(prod.label)
            A[k, l] = (-2j * cval * prod.coefficient).real
            A[l, k] = -A[k, l]
    offset = op.coefficient("I" * n).real
    rebuilt = PauliSum.identity(n, offset)
    for k in range(m):
        for l in range(k + 1, m):
            if A[k, l]:
                rebuilt = rebuilt + (0.5j * A[k, l]) * multiply(gam[k], gam[l]).to_sum()
    if not rebuilt.allclose(op, 1e-10):
        raise CompilationError("operator is not quadratic in fermions")
    return A, offset


def canonical_modes(A: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal ``Q`` (det +1) and energies ``eps`` with ``Q A Q^T`` block-canonical.

    Block ``k`` of ``Q A Q^T`` is ``[[0, eps_k], [-eps_k, 0]]``. Built from the
    eigenvectors of the Hermitian matrix ``iA``: each positive eigenvector
    ``v`` supplies the real pair ``sqrt(2) (Re v, Im v)``.
    """
    m = A.shape[0]
    w, V = np.linalg.eigh(1j * A)
    rows = []
    pos = [k for k in range(m) if w[k] > tol]
    for k in pos:
        v = V[:, k]
        rows.append(np.sqrt(2) * v.real)
        rows.append(np.sqrt(2) * v.imag)
    null = [k for k in range(m) if abs(w[k]) <= tol]
    if null:
        span = np.concatenate([V[:, null].real, V[:, null].imag], axis=1)
        u, sv, _ = np.linalg.svd(span)
        basis = u[:, : len(null)]
        rows.extend(basis.T)
    Q = np.array(rows)
    if len(null) % 2:
        raise CompilationError("odd null space in antisymmetric matrix")
    if np.linalg.det(Q) < 0:
        Q[0] *= -1
    T = Q @ A @ Q.T
    eps = np.array([T[2 * k, 2 * k + 1] for k in range(m // 2)])
    return Q, eps


def givens_nearest(Q: np.ndarray, tol: float = 1e-15) -> list[tuple[int, float]]:
    """Nearest-neighbour plane rotations ``(a, theta)`` with ``Q = R_1 R_2 ... R_K`` (list order).

    ``R(a, theta)`` acts on rows ``(a, a+1)`` as ``[[c, -s], [s, c]]``.
    """
    M = Q.copy()
    m = M.shape[0]
    applied: list[tuple[int, float]] = []
    for col in range(m - 1):
        for row in range(m - 1, col, -1):
            x, y = M[row - 1, col], M[row, col]
            if abs(y) <= tol and (row - 1 > col or x >= 0):
                continue
            theta = np.arctan2(y, x)
            # rotation G with G[[x],[y]] = [[r],[0]]
            c, s = np.cos(theta), np.sin(theta)
            G = np.array([[c, s], [-s, c]])
            M[[row - 1, row], :] = G @ M[[row - 1, row], :]
            applied.append((row - 1, theta))
    if not np.allclose(M, np.eye(m), atol=1e-10):
        raise CompilationError("Givens elimination did not reach the identity")
    # G_K ... G_1 Q = I with G_k^T = R(a_k, theta_k), so Q = R_1 R_2 ... R_K
    return applied


def rotation_matrix_plane(m: int, a: int, theta: float) -> np.ndarray:
    R = np.eye(m)
    c, s = np.cos(theta), np.sin(theta)
    R[a, a], R[a, a + 1], R[a + 1, a], R[a + 1, a + 1] = c, -s, s, c
    return R


def compile_quadratic(op: PauliSum, dt: float, label: str = "quadratic") -> Circuit:
    """Exact controlled ``exp(-i dt op)`` for an operator quadratic in fermions.

    ``op = W H_diag W^dagger`` with ``W g W^dagger = Q g``; ``W`` is a product
    of nearest-neighbour Majorana rotations ``exp(theta/2 g_a g_{a+1})``,
    each a one- or two-qubit string.
    """
    n = op.n_qubits
    A, offset = majorana_form(op)
    Q, eps = canonical_modes(A)
    rotations = givens_nearest(Q)
    # Q = R(a_1, t_1) R(a_2, t_2) ... in list order; W = G_K ... G_1 as operators
    w_gates = Emitter(n)
    for a, theta in rotations:
        _emit_majorana_rotation(w_gates, a, theta, n)
    w_list = w_gates.gates  # circuit order realises W
    em = Emitter(n)
    em.extend(_inverse(w_list))
    for q in range(n):
        if abs(eps[q]) > 1e-15:
            em.add(Gate("rz-n", (q,), True, -eps[q] * dt))
    em.extend(w_list)
    em.phase += dt * (offset + eps.sum() / 2)
    return em.circuit(label, dt)


def _emit_majorana_rotation(em: Emitter, a: int, theta: float, n: int):
    """``exp(theta/2 g_a g_{a+1})`` up to a global phase."""
    prod = multiply(majorana(a, n), majorana(a + 1, n))
    # g_a g_{a+1} = w P with w = +-i, so the rotation is exp(-i alpha P)
    alpha = (0.5j * theta * prod.coefficient).real
    term = PauliTerm(1.0, prod.letters)
    emit_string_group(em, [term * alpha], 1.0, "double", track_phase=False)


# ---------------------------------------------------------------- probes

def compile_controlled_probe(orb: OrbitalIndex, kind: str, L_c: int) -> Circuit:
    """Controlled ``X`` or ``Y`` probe: ladder to qubit 0, one rotation, probe phase."""
    probe = hermitian_probe(orb, kind, L_c)
    n = 2 * L_c
    q = orb.qubit
    lad = ladder(-1, q)
    (mapped,) = _apply_frame([PauliTerm(1.0, probe.letters)], lad)
    s = mapped.coefficient * probe.coefficient
    letter = mapped.letters[0]
    if mapped.support != (0,) or letter == "Z":
        raise CompilationError("probe ladder failed")
    # rx(pi/2) = -iX and ry(-pi/2) = -iY, so s L = (s i) * rotation
    core = Gate("rx", (0,), True, np.pi / 2) if letter == "X" else Gate("ry", (0,), True, -np.pi / 2)
    phase = -np.angle(s * 1j)
    gates = lad + [core] + _inverse(lad)
    if abs(phase) > 1e-15:
        gates.append(Gate("rz-n", (n,), False, phase))
    return Circuit(n, tuple(gates), f"probe-{kind}{orb}", None)


def signed_generator(spec: ClusterSpec, label: str) -> PauliSum:
    """Operator ``G`` such that the circuit labelled ``label`` implements controlled ``exp(-i dt G)``."""
    blocks = build_blocks(spec)
    if label in BLOCK_NAMES:
        return blocks.signed(label)
    if label == "local+af":
        return blocks.signed("local") + blocks.signed("af")
    groups = {"Z": blocks.z_block, "KD": blocks.kd_block, "S": blocks.s_block}
    if label in groups:
        return groups[label]
    raise KeyError(f"no generator for circuit label {label!r}")

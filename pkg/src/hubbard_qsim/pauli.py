"""Weighted Pauli strings and sums.

Letters are stored per qubit with index 0 the least-significant qubit, so
``letters[q]`` acts on bit ``q`` of a computational-basis index. Printing goes
the other way round (most-significant qubit leftmost), matching the usual
tensor-product notation.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

LETTERS = ("I", "X", "Y", "Z")
CANONICAL_TOL = 1e-14
DEFAULT_DENSE_LIMIT = 14

MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products: (a, b) -> (phase, letter) with a.b = phase * letter
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


class DimensionError(ValueError):
    """Operands act on different qubit counts."""


class DenseLimitError(ValueError):
    """Requested dense matrix exceeds the configured qubit ceiling."""


def dense_limit() -> int:
    """Largest qubit count materialized densely (env ``HUBBARD_QSIM_DENSE_LIMIT``)."""
    raw = os.environ.get("HUBBARD_QSIM_DENSE_LIMIT")
    return int(raw) if raw else DEFAULT_DENSE_LIMIT


@dataclass(frozen=True)
class PauliTerm:
    coefficient: complex
    letters: tuple[str, ...]

    def __post_init__(self):
        letters = tuple(self.letters)
        bad = [c for c in letters if c not in LETTERS]
        if bad:
            raise ValueError(f"invalid Pauli letters {bad}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @classmethod
    def from_label(cls, label: str, coefficient: complex = 1.0) -> "PauliTerm":
        """Build from a printed label, most-significant qubit first (``"ZXI"``)."""
        return cls(coefficient, tuple(reversed(label)))

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, coefficient: complex = 1.0) -> "PauliTerm":
        letters = ["I"] * n
        letters[qubit] = letter
        return cls(coefficient, tuple(letters))

    @classmethod
    def identity(cls, n: int, coefficient: complex = 1.0) -> "PauliTerm":
        return cls(coefficient, ("I",) * n)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def label(self) -> str:
        return "".join(reversed(self.letters))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.letters) if c != "I")

    def with_coefficient(self, coefficient: complex) -> "PauliTerm":
        return PauliTerm(coefficient, self.letters)

    def to_sum(self) -> "PauliSum":
        return PauliSum([self], n_qubits=self.n_qubits)

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            return multiply(self, other)
        return PauliTerm(self.coefficient * other, self.letters)

    __rmul__ = __mul__

    def __neg__(self):
        return PauliTerm(-self.coefficient, self.letters)


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product ``a.b`` of two Pauli terms, accumulating the single-qubit phases."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    phase = 1 + 0j
    out = []
    for x, y in zip(a.letters, b.letters):
        p, c = _PRODUCT[x, y]
        phase *= p
        out.append(c)
    return PauliTerm(a.coefficient * b.coefficient * phase, tuple(out))


def anticommutes(a: PauliTerm, b: PauliTerm) -> bool:
    n = sum(1 for x, y in zip(a.letters, b.letters) if x != "I" and y != "I" and x != y)
    return n % 2 == 1


class PauliSum:
    """Canonical sum of Pauli terms on a fixed number of qubits.

    Terms sharing a letter string are merged and coefficients with modulus
    below ``CANONICAL_TOL`` are dropped. Instances are treated as immutable.
    """

    __slots__ = ("_terms", "n_qubits")

    def __init__(self, terms: Iterable[PauliTerm] = (), n_qubits: int | None = None):
        terms = list(terms)
        if n_qubits is None:
            if not terms:
                raise ValueError("n_qubits required for an empty PauliSum")
            n_qubits = terms[0].n_qubits
        acc: dict[tuple[str, ...], complex] = {}
        for t in terms:
            if t.n_qubits != n_qubits:
                raise DimensionError(f"term on {t.n_qubits} qubits in a {n_qubits}-qubit sum")
            acc[t.letters] = acc.get(t.letters, 0) + t.coefficient
        self._terms = {k: v for k, v in sorted(acc.items()) if abs(v) > CANONICAL_TOL}
        self.n_qubits = n_qubits

    @classmethod
    def zero(cls, n: int) -> "PauliSum":
        return cls((), n_qubits=n)

    @classmethod
    def identity(cls, n: int, coefficient: complex = 1.0) -> "PauliSum":
        return cls([PauliTerm.identity(n, coefficient)], n_qubits=n)

    @classmethod
    def from_dict(cls, mapping: Mapping[str, complex], n_qubits: int | None = None) -> "PauliSum":
        """From ``{label: coeff}`` with labels printed most-significant first."""
        terms = [PauliTerm.from_label(k, v) for k, v in mapping.items()]
        return cls(terms, n_qubits=n_qubits)

    @property
    def terms(self) -> list[PauliTerm]:
        return [PauliTerm(c, k) for k, c in self._terms.items()]

    def coefficient(self, label: str) -> complex:
        return self._terms.get(tuple(reversed(label)), 0j)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _check(self, other: "PauliSum"):
        if self.n_qubits != other.n_qubits:
            raise DimensionError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other):
        if isinstance(other, PauliTerm):
            other = other.to_sum()
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        return PauliSum(self.terms + other.terms, n_qubits=self.n_qubits)

    def __sub__(self, other):
        if isinstance(other, PauliTerm):
            other = other.to_sum()
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            other = other.to_sum()
        if isinstance(other, PauliSum):
            self._check(other)
            return PauliSum(
                [multiply(a, b) for a in self.terms for b in other.terms], n_qubits=self.n_qubits
            )
        return PauliSum([t * other for t in self.terms], n_qubits=self.n_qubits)

    def __rmul__(self, other):
        if isinstance(other, (PauliSum, PauliTerm)):
            return NotImplemented
        return self * other

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __hash__(self):
        return hash((self.n_qubits, tuple(self._terms.items())))

    def adjoint(self) -> "PauliSum":
        return PauliSum([t.with_coefficient(np.conj(t.coefficient)) for t in self.terms],
                        n_qubits=self.n_qubits)

    def is_hermitian(self, tol: float = CANONICAL_TOL) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def allclose(self, other: "PauliSum", atol: float = 1e-12) -> bool:
        self._check(other)
        return all(abs(t.coefficient) <= atol for t in (self - other).terms)

    def norm1(self) -> float:
        return float(sum(abs(c) for c in self._terms.values()))

    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def serialize(self) -> str:
        """Debug text form, one ``coeff  letters`` line per term."""
        lines = []
        for t in self.terms:
            c = t.coefficient
            sign = "+" if c.imag >= 0 else "-"
            lines.append(f"{c.real:.12g}{sign}{abs(c.imag):.12g}i  {t.label}")
        return "\n".join(lines)

    def __repr__(self):
        body = ", ".join(f"{c:.4g}*{''.join(reversed(k))}" for k, c in self._terms.items())
        return f"PauliSum(n={self.n_qubits}, [{body}])"


def as_sum(op: PauliSum | PauliTerm) -> PauliSum:
    return op.to_sum() if isinstance(op, PauliTerm) else op


def commutator(a: PauliSum | PauliTerm, b: PauliSum | PauliTerm) -> PauliSum:
    """Canonical ``a.b - b.a``."""
    a, b = as_sum(a), as_sum(b)
    a._check(b)
    terms = []
    for x in a.terms:
        for y in b.terms:
            if anticommutes(x, y):
                terms.append(2 * multiply(x, y))
    return PauliSum(terms, n_qubits=a.n_qubits)


def anticommutator(a: PauliSum | PauliTerm, b: PauliSum | PauliTerm) -> PauliSum:
    a, b = as_sum(a), as_sum(b)
    a._check(b)
    terms = []
    for x in a.terms:
        for y in b.terms:
            if not anticommutes(x, y):
                terms.append(2 * multiply(x, y))
    return PauliSum(terms, n_qubits=a.n_qubits)


def _masks(letters: Sequence[str]) -> tuple[int, int, int]:
    xmask = zmask = ny = 0
    for q, c in enumerate(letters):
        if c in "XY":
            xmask |= 1 << q
        if c in "ZY":
            zmask |= 1 << q
        if c == "Y":
            ny += 1
    return xmask, zmask, ny


def _parity(values: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values)
    v = values.copy()
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out


def to_dense(op: PauliSum | PauliTerm, limit: int | None = None) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli sum.

    Each string acts as ``i^{#Y} X^x Z^z`` so column ``b`` has a single entry at
    row ``b ^ xmask`` with sign ``(-1)^{|b & zmask|}``.
    """
    op = as_sum(op)
    n = op.n_qubits
    limit = dense_limit() if limit is None else limit
    if n > limit:
        raise DenseLimitError(f"{n} qubits exceeds dense limit {limit}")
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    out = np.zeros((dim, dim), dtype=complex)
    for t in op.terms:
        xmask, zmask, ny = _masks(t.letters)
        sign = 1 - 2 * _parity(cols & zmask)
        out[cols ^ xmask, cols] += t.coefficient * (1j ** ny) * sign
    return out


def kron_dense(term: PauliTerm) -> np.ndarray:
    """Reference Kronecker-product materialization of one term (slow path)."""
    mats = [MATRICES[c] for c in reversed(term.letters)]
    return term.coefficient * reduce(np.kron, mats, np.eye(1, dtype=complex))


def pauli_decompose(matrix: np.ndarray, tol: float = CANONICAL_TOL) -> PauliSum:
    """Expand a small dense matrix in the Pauli basis via trace projections."""
    matrix = np.asarray(matrix, dtype=complex)
    dim = matrix.shape[0]
    n = dim.bit_length() - 1
    if matrix.shape != (dim, dim) or 1 << n != dim:
        raise DimensionError(f"expected a 2^n square matrix, got {matrix.shape}")
    cols = np.arange(dim, dtype=np.int64)
    terms = []
    for idx in range(4 ** n):
        letters = tuple(LETTERS[(idx >> (2 * q)) & 3] for q in range(n))
        xmask, zmask, ny = _masks(letters)
        sign = 1 - 2 * _parity(cols & zmask)
        # Tr(P^dag M) with P[b^x, b] = i^ny sign(b)
        coeff = np.sum(np.conj((1j ** ny) * sign) * matrix[cols ^ xmask, cols]) / dim
        if abs(coeff) > tol:
            terms.append(PauliTerm(coeff, letters))
    return PauliSum(terms, n_qubits=n)

"""Jordan-Wigner encoding of spinful fermions on a cluster.

Orbitals are laid out site-major, ``(1up, 1down, 2up, 2down, ...)``, and an
occupied orbital is the qubit state ``|1>``. The parity tail uses
``sigma_z = 2 n - I`` (that is ``-Z`` in the standard Pauli basis) on every
lower qubit. All composite strings are products of creation/annihilation
operators, never transcribed by hand.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .pauli import PauliSum, PauliTerm, multiply


class Spin(str, Enum):
    UP = "up"
    DOWN = "down"

    @classmethod
    def parse(cls, value: "Spin | str") -> "Spin":
        if isinstance(value, Spin):
            return value
        key = str(value).strip().lower()
        aliases = {"up": cls.UP, "u": cls.UP, "↑": cls.UP, "dn": cls.DOWN,
                   "down": cls.DOWN, "d": cls.DOWN, "↓": cls.DOWN}
        if key not in aliases:
            raise ValueError(f"unknown spin {value!r}")
        return aliases[key]

    @property
    def symbol(self) -> str:
        return "↑" if self is Spin.UP else "↓"


SPINS = (Spin.UP, Spin.DOWN)


@dataclass(frozen=True, order=True)
class OrbitalIndex:
    site: int
    spin: Spin

    def __post_init__(self):
        if self.site < 1:
            raise ValueError(f"site must be >= 1, got {self.site}")
        object.__setattr__(self, "spin", Spin.parse(self.spin))

    @property
    def qubit(self) -> int:
        return qubit_index(self.site, self.spin)

    def __str__(self):
        return f"{self.site}{self.spin.symbol}"


def qubit_index(site: int, spin: Spin | str) -> int:
    return 2 * (site - 1) + (1 if Spin.parse(spin) is Spin.DOWN else 0)


def orbital_of_qubit(q: int) -> OrbitalIndex:
    return OrbitalIndex(q // 2 + 1, Spin.DOWN if q % 2 else Spin.UP)


def all_orbitals(L_c: int) -> list[OrbitalIndex]:
    return [orbital_of_qubit(q) for q in range(2 * L_c)]


def _check_site(site: int, L_c: int):
    if not 1 <= site <= L_c:
        raise ValueError(f"site {site} outside 1..{L_c}")


def _orb(site_or_orb, spin=None) -> OrbitalIndex:
    if isinstance(site_or_orb, OrbitalIndex):
        return site_or_orb
    return OrbitalIndex(site_or_orb, Spin.parse(spin))


def _tail_sign(q: int) -> int:
    # occupation-frame sigma_z = -Z on each of the q lower qubits
    return -1 if q % 2 else 1


def _string(n: int, q: int, letter: str, coeff: complex) -> PauliTerm:
    letters = ["I"] * n
    for k in range(q):
        letters[k] = "Z"
    letters[q] = letter
    return PauliTerm(coeff * _tail_sign(q), tuple(letters))


@lru_cache(maxsize=None)
def _creation(q: int, n: int) -> PauliSum:
    # sigma_+ = |1><0| = (X - iY)/2
    return PauliSum([_string(n, q, "X", 0.5), _string(n, q, "Y", -0.5j)], n_qubits=n)


def creation_op(orb: OrbitalIndex, L_c: int) -> PauliSum:
    """``c^dagger`` for one spin orbital on a ``2 L_c`` qubit register."""
    _check_site(orb.site, L_c)
    return _creation(orb.qubit, 2 * L_c)


def annihilation_op(orb: OrbitalIndex, L_c: int) -> PauliSum:
    return creation_op(orb, L_c).adjoint()


def number_op(orb: OrbitalIndex, L_c: int) -> PauliSum:
    return creation_op(orb, L_c) * annihilation_op(orb, L_c)


def hermitian_probe(orb: OrbitalIndex, kind: str, L_c: int) -> PauliTerm:
    """``X = c + c^dagger`` or ``Y = i(c - c^dagger)`` as a single Pauli string."""
    _check_site(orb.site, L_c)
    kind = kind.upper()
    n, q = 2 * L_c, orb.qubit
    if kind == "X":
        return _string(n, q, "X", 1.0)
    if kind == "Y":
        # i(sigma_- - sigma_+) = -Y in the standard basis
        return _string(n, q, "Y", -1.0)
    raise ValueError(f"probe kind must be X or Y, got {kind!r}")


def _ordered(i: int, j: int, L_c: int):
    _check_site(i, L_c)
    _check_site(j, L_c)
    if i >= j:
        raise ValueError(f"expected i < j, got i={i}, j={j}")


def t_string(i: int, j: int, spin: Spin | str, L_c: int) -> PauliSum:
    """Hopping string ``c_i^dag c_j + c_j^dag c_i`` for one spin species."""
    _ordered(i, j, L_c)
    a, b = OrbitalIndex(i, spin), OrbitalIndex(j, spin)
    fwd = creation_op(a, L_c) * annihilation_op(b, L_c)
    return fwd + fwd.adjoint()


def t_local(i: int, spin: Spin | str, L_c: int) -> PauliSum:
    return number_op(OrbitalIndex(i, spin), L_c)


def d_string(i: int, j: int, spin: Spin | str, L_c: int) -> PauliSum:
    """Inter-site pairing string.

    For ``spin`` up this pairs ``i up`` with ``j down``; for down it pairs
    ``i down`` with ``j up``: ``c^dag_{i s} c^dag_{j s'} + h.c.``.
    """
    _ordered(i, j, L_c)
    spin = Spin.parse(spin)
    other = Spin.DOWN if spin is Spin.UP else Spin.UP
    pair = creation_op(OrbitalIndex(i, spin), L_c) * creation_op(OrbitalIndex(j, other), L_c)
    return pair + pair.adjoint()


def d_local(i: int, L_c: int) -> PauliSum:
    """On-site pairing ``c^dag_{i up} c^dag_{i down} + h.c.``."""
    pair = creation_op(OrbitalIndex(i, Spin.UP), L_c) * creation_op(OrbitalIndex(i, Spin.DOWN), L_c)
    return pair + pair.adjoint()


def total_number(L_c: int) -> PauliSum:
    n = 2 * L_c
    out = PauliSum.zero(n)
    for orb in all_orbitals(L_c):
        out = out + number_op(orb, L_c)
    return out


def jw_string_length(a: OrbitalIndex, b: OrbitalIndex) -> int:
    """Qubit span between two orbitals (number of Z letters plus one)."""
    return abs(a.qubit - b.qubit)


__all__ = [
    "Spin", "SPINS", "OrbitalIndex", "qubit_index", "orbital_of_qubit", "all_orbitals",
    "creation_op", "annihilation_op", "number_op", "hermitian_probe", "t_string", "t_local",
    "d_string", "d_local", "total_number", "jw_string_length", "multiply",
]

"""Pauli strings over F2 bitmasks and graph-state stabilizer products.

A :class:`PauliString` stores ``i**phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}`` where each
``P_k`` is the Hermitian Pauli selected by bit ``k`` of ``x`` and ``z``
(``Y`` when both are set).  Qubit 0 is the leftmost tensor factor and the
leftmost character of the text form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Graph, mask_of, members

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PHASE = {"": 0, "+": 0, "+i": 1, "-": 2, "-i": 3}
_TEXT_RE = re.compile(r"^(\+i|-i|\+|-)?([IXYZ]*)$")

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}


class PauliError(ValueError):
    pass


def _letter(x: int, z: int) -> str:
    return "IZXY"[2 * x + z]


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int
    phase: int = 0  # exponent of i, mod 4

    def __post_init__(self) -> None:
        full = (1 << self.n) - 1
        if self.n <= 0 or self.x & ~full or self.z & ~full:
            raise PauliError("masks exceed qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_letters(cls, letters: dict[int, str] | str, n: int | None = None, phase: int = 0) -> "PauliString":
        if isinstance(letters, str):
            letters = dict(enumerate(letters))
            n = len(letters) if n is None else n
        if n is None:
            raise PauliError("qubit count required")
        x = z = 0
        for q, c in letters.items():
            if c not in "IXYZ" or len(c) != 1:
                raise PauliError(f"bad Pauli letter {c!r}")
            if c in "XY":
                x |= 1 << q
            if c in "ZY":
                z |= 1 << q
        return cls(n, x, z, phase)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        m = _TEXT_RE.match(text.strip())
        if not m or not m.group(2):
            raise PauliError(f"cannot parse Pauli string {text!r}")
        return cls.from_letters(m.group(2), phase=_TEXT_PHASE[m.group(1) or ""])

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    def letter(self, q: int) -> str:
        return _letter(self.x >> q & 1, self.z >> q & 1)

    @property
    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def __str__(self) -> str:
        return _PHASE_TEXT[self.phase] + self.letters

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def to_matrix(self) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for q in range(self.n):
            out = np.kron(out, PAULI_MATRICES[self.letter(q)])
        return (1j**self.phase) * out

    def apply(self, arr: np.ndarray) -> np.ndarray:
        """Left-multiply a state vector (or the rows of a matrix) by this operator."""
        dim = 1 << self.n
        if arr.shape[0] != dim:
            raise PauliError(f"operand has leading dimension {arr.shape[0]}, expected {dim}")
        xb = _big_endian(self.x, self.n)
        zb = _big_endian(self.z, self.n)
        idx = np.arange(dim, dtype=np.int64)
        signs = 1 - 2 * (np.bitwise_count(idx & zb) & 1).astype(np.int64)
        # Y = i X Z on each qubit, hence the extra i**popcount(x & z).
        coeff = (1j ** ((self.phase + (self.x & self.z).bit_count()) % 4)) * signs
        out = np.empty(arr.shape, dtype=complex)
        shape = (dim,) + (1,) * (arr.ndim - 1)
        out[idx ^ xb] = coeff.reshape(shape) * arr
        return out


def _big_endian(mask: int, n: int) -> int:
    out = 0
    for q in members(mask):
        out |= 1 << (n - 1 - q)
    return out


def _check_sizes(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise PauliError(f"size mismatch: {p.n} vs {q.n} qubits")


def multiply(p: PauliString, q: PauliString) -> PauliString:
    _check_sizes(p, q)
    # With P = i^{x.z} X^x Z^z per qubit, Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1.
    x = p.x ^ q.x
    z = p.z ^ q.z
    e = (
        p.phase
        + q.phase
        + (p.x & p.z).bit_count()
        + (q.x & q.z).bit_count()
        - (x & z).bit_count()
        + 2 * (p.z & q.x).bit_count()
    )
    return PauliString(p.n, x, z, e)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_sizes(p, q)
    return ((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) % 2 == 0


@dataclass(frozen=True)
class SupportPartition:
    """X-, identity-, Y- and Z-sites of a stabilizer, as bitmasks."""

    s1: int
    s2: int
    s3: int
    s4: int

    @classmethod
    def of(cls, p: PauliString) -> "SupportPartition":
        full = (1 << p.n) - 1
        return cls(p.x & ~p.z, full & ~(p.x | p.z), p.x & p.z, p.z & ~p.x)

    @property
    def support_size(self) -> int:
        return (self.s1 | self.s3 | self.s4).bit_count()

    def as_lists(self) -> dict[str, list[int]]:
        return {"S1": members(self.s1), "S2": members(self.s2), "S3": members(self.s3), "S4": members(self.s4)}


def vertex_stabilizer(g: Graph, i: int) -> PauliString:
    g._check_vertex(i)
    return PauliString(g.n, 1 << i, g.adjacency[i])


def stabilizer_element(g: Graph, alpha: Iterable[int] | int) -> tuple[PauliString, SupportPartition]:
    """Product of the vertex stabilizers over ``alpha`` (ascending order).

    ``alpha`` may be a bitmask or an iterable of vertices.
    """
    amask = alpha if isinstance(alpha, int) else mask_of(alpha)
    if amask == 0:
        raise PauliError("alpha must be nonempty")
    if amask & ~g.vertex_mask:
        raise PauliError("alpha contains vertices outside the graph")
    p = PauliString.identity(g.n)
    for i in members(amask):
        p = multiply(p, vertex_stabilizer(g, i))
    return p, SupportPartition.of(p)


def stabilizes(p: PauliString, state, tol: float = 1e-10) -> bool:
    """True iff ``p`` fixes every vector in the support of ``state``.

    ``state`` is a :class:`~stabmetro.oracle.DenseState`.  For a density
    matrix this is ``P rho == rho``.
    """
    if state.n != p.n:
        raise PauliError(f"state has {state.n} qubits, operator {p.n}")
    data = state.data
    return bool(np.max(np.abs(p.apply(data) - data)) <= tol)

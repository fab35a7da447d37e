"""Partition-defined GHZ-like subspaces and their QFI.

A partition ``K_1 | K_2 | ... | K_{m+1}`` of the qubits (blocks of size >= 2)
defines a ``2**m``-dimensional subspace stabilized by ``Z_V`` and the
intra-block ``X X`` pairs.  It is spanned by the states ``|d_lambda>``: the
X-basis GHZ state with ``Z`` applied to every block ``K_{w+1}`` whose bit
``lambda_w`` is set.  Block ``K_1`` is never flipped.

Under ``H = sum_j X_j`` each ``|d_lambda>`` has QFI ``h_lambda**2`` with
``h_lambda = n - 2 sum_w lambda_w |K_{w+1}|``, and the QFI of any state in the
subspace only sees the diagonal weights.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .graph import mask_of
from .oracle import PURE_LIMIT, TOL, DenseState, OracleError, _check_limit, ghz_state
from .pauli import PauliString

CANDIDATE_LIMIT = 20000


class SubspaceError(ValueError):
    pass


@dataclass(frozen=True)
class SubspaceSpec:
    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        blocks = tuple(tuple(int(v) for v in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if len(blocks) < 2:
            raise SubspaceError("need at least two blocks (m >= 1)")
        flat = [v for b in blocks for v in b]
        if sorted(flat) != list(range(self.n)):
            raise SubspaceError("blocks must partition the qubits 0..n-1 exactly")
        for b in blocks:
            if len(b) < 2:
                raise SubspaceError(f"block {list(b)} has fewer than 2 qubits")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "SubspaceSpec":
        """Consecutive blocks of the given sizes."""
        blocks, start = [], 0
        for s in sizes:
            blocks.append(tuple(range(start, start + s)))
            start += s
        return cls(start, tuple(blocks))

    @classmethod
    def from_json(cls, data: dict) -> "SubspaceSpec":
        if not isinstance(data, dict) or "n" not in data or "blocks" not in data:
            raise SubspaceError("partition JSON needs 'n' and 'blocks'")
        return cls(int(data["n"]), tuple(tuple(b) for b in data["blocks"]))

    def to_json(self) -> dict:
        return {"n": self.n, "blocks": [list(b) for b in self.blocks]}

    @property
    def m(self) -> int:
        return len(self.blocks) - 1

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(len(b) / self.n for b in self.blocks)

    def lambdas(self) -> list[tuple[int, ...]]:
        """All lambda vectors; index ``k`` has bit ``w`` of ``k`` as ``lambda_w``."""
        return [tuple(k >> w & 1 for w in range(self.m)) for k in range(1 << self.m)]

    def flip_mask(self, lam: Sequence[int]) -> int:
        out = 0
        for w, bit in enumerate(lam):
            if bit:
                out |= mask_of(self.blocks[w + 1])
        return out

    def h_values(self) -> np.ndarray:
        """``h_lambda`` for every lambda, in :meth:`lambdas` order."""
        sizes = self.sizes[1:]
        return np.array([self.n - 2 * sum(b * s for b, s in zip(lam, sizes)) for lam in self.lambdas()], dtype=float)


@dataclass(frozen=True)
class SubspaceState:
    """Coefficient matrix of a state in the ``|d_lambda>`` basis."""

    spec: SubspaceSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        d = 1 << self.spec.m
        if c.shape != (d, d):
            raise SubspaceError(f"coefficient matrix must be {d}x{d}")
        if np.max(np.abs(c - c.conj().T)) > 1e-10:
            raise SubspaceError("coefficient matrix is not Hermitian")
        if abs(np.trace(c).real - 1) > 1e-10:
            raise SubspaceError("coefficient matrix trace is not 1")
        if np.linalg.eigvalsh(c)[0] < -1e-10:
            raise SubspaceError("coefficient matrix is not positive semidefinite")

    @classmethod
    def pure(cls, spec: SubspaceSpec, amplitudes: Sequence[complex]) -> "SubspaceState":
        a = np.asarray(amplitudes, dtype=complex)
        a = a / np.linalg.norm(a)
        return cls(spec, np.outer(a, a.conj()))

    @classmethod
    def basis(cls, spec: SubspaceSpec, index: int) -> "SubspaceState":
        a = np.zeros(1 << spec.m, dtype=complex)
        a[index] = 1
        return cls.pure(spec, a)

    @classmethod
    def diagonal(cls, spec: SubspaceSpec, weights: Sequence[float]) -> "SubspaceState":
        w = np.asarray(weights, dtype=float)
        return cls(spec, np.diag(w / w.sum()).astype(complex))

    def to_dense(self, limit: int = PURE_LIMIT) -> DenseState:
        d = basis_matrix(self.spec, limit)
        return DenseState(self.spec.n, d @ self.coeffs @ d.conj().T)


def subspace_generators(spec: SubspaceSpec) -> list[PauliString]:
    """``Z_V`` plus ``X_first X_j`` for every other qubit ``j`` of each block."""
    n = spec.n
    gens = [PauliString(n, 0, (1 << n) - 1)]
    for b in spec.blocks:
        for j in b[1:]:
            gens.append(PauliString(n, 1 << b[0] | 1 << j, 0))
    return gens


def basis_state(spec: SubspaceSpec, lam: Sequence[int], limit: int = PURE_LIMIT) -> DenseState:
    if len(lam) != spec.m:
        raise SubspaceError(f"lambda must have {spec.m} entries")
    ghz = ghz_state(spec.n, limit)
    flip = spec.flip_mask(lam)
    if not flip:
        return ghz
    return DenseState(spec.n, PauliString(spec.n, 0, flip).apply(ghz.data))


def basis_matrix(spec: SubspaceSpec, limit: int = PURE_LIMIT) -> np.ndarray:
    """``2**n x 2**m`` matrix whose columns are the ``|d_lambda>``."""
    _check_limit(spec.n, limit)
    return np.stack([basis_state(spec, lam, limit).data for lam in spec.lambdas()], axis=1)


def qfi_subspace(state: SubspaceState) -> float:
    """Diagonal-weighted sum of ``h_lambda**2``."""
    diag = np.real(np.diag(state.coeffs))
    return float(np.dot(diag, state.spec.h_values() ** 2))


@dataclass(frozen=True)
class Extremes:
    max: float
    min: float
    r_min: float
    argmin: tuple[int, ...]


def extremal_qfi(spec: SubspaceSpec) -> Extremes:
    h = spec.h_values()
    k = int(np.argmin(h**2))
    r = float((h[k] / spec.n) ** 2)
    return Extremes(float(spec.n**2), spec.n**2 * r, r, spec.lambdas()[k])


def r_min(spec: SubspaceSpec) -> float:
    return extremal_qfi(spec).r_min


def tolerance(spec: SubspaceSpec) -> float:
    """``-log(r_min) / log(n)``; ``math.inf`` when ``r_min`` is zero."""
    r = r_min(spec)
    if r <= 1e-15:
        return math.inf
    return -math.log(r) / math.log(spec.n)


def in_tolerance_class(spec: SubspaceSpec, eps: float) -> bool:
    """Whether every state of the subspace has QFI in ``[n**(2-eps), n**2]``."""
    return r_min(spec) >= spec.n ** (-eps) * (1 - 1e-12)


def family_partition(kind: str, n: int, **params) -> SubspaceSpec:
    """Partitions from the three tolerance families.

    * ``"i"``: ``big`` qubits in ``K_1`` and the rest in blocks of two (the
      last one takes three if the remainder is odd).  Optional ``delta`` is
      checked against ``(1 + delta)/2 < big/n < 1``.
    * ``"ii"``: ``m`` even, ``m + 1`` equal blocks.
    * ``"iii"``: ``m`` odd, ``K_1`` of size ``first`` with
      ``first/n < 1/(2m)``, ``K_2`` of size ``n/m - first`` and ``m - 1``
      blocks of ``n/m``.
    """
    if kind == "i":
        big = params["big"]
        rest = n - big
        if big < 2 or rest < 2:
            raise SubspaceError("family (i) needs a big block and at least two other qubits")
        xi = big / n
        if xi <= 0.5:
            raise SubspaceError("family (i) needs the big block to hold more than half the qubits")
        delta = params.get("delta")
        if delta is not None and not (0 < delta < 1 and (1 + delta) / 2 < xi < 1):
            raise SubspaceError(f"family (i) needs (1+delta)/2 < {xi:.4g} < 1 for delta={delta}")
        sizes = [big] + [2] * (rest // 2)
        if rest % 2:
            sizes[-1] += 1
        return SubspaceSpec.from_sizes(sizes)
    if kind == "ii":
        m = params["m"]
        if m < 2 or m % 2:
            raise SubspaceError("family (ii) needs an even m >= 2")
        if n % (m + 1):
            raise SubspaceError(f"{n} qubits do not split into {m + 1} equal blocks")
        size = n // (m + 1)
        if size < 2:
            raise SubspaceError("family (ii) blocks would have fewer than 2 qubits")
        return SubspaceSpec.from_sizes([size] * (m + 1))
    if kind == "iii":
        m, first = params["m"], params["first"]
        if m < 1 or m % 2 == 0:
            raise SubspaceError("family (iii) needs an odd m")
        if n % m:
            raise SubspaceError(f"{n} qubits do not split into blocks of n/m")
        size = n // m
        if first < 2 or size - first < 2 or size < 2:
            raise SubspaceError("family (iii) block sizes would fall below 2")
        if not first / n < 1 / (2 * m):
            raise SubspaceError("family (iii) needs first/n < 1/(2m)")
        return SubspaceSpec.from_sizes([first, size - first] + [size] * (m - 1))
    raise SubspaceError(f"unknown family {kind!r}")


def family_tolerance_bound(kind: str, spec: SubspaceSpec, **params) -> float:
    """Closed-form tolerance each family guarantees for its partitions.

    (i) ``-2 log(delta)/log n`` with ``delta = 2 big/n - 1`` unless given;
    (ii) ``2 log(m+1)/log n``; (iii) ``-2 log(1/m - 2 first/n)/log n``.
    """
    n, logn = spec.n, math.log(spec.n)
    if kind == "i":
        delta = params.get("delta")
        if delta is None:
            delta = 2 * max(spec.sizes) / n - 1
        return -2 * math.log(delta) / logn
    if kind == "ii":
        return 2 * math.log(spec.m + 1) / logn
    if kind == "iii":
        return -2 * math.log(1 / spec.m - 2 * spec.sizes[0] / n) / logn
    raise SubspaceError(f"unknown family {kind!r}")


def membership_check(state: DenseState, spec: SubspaceSpec, tol: float = TOL) -> bool:
    if state.n != spec.n:
        raise OracleError(f"state has {state.n} qubits, partition {spec.n}")
    data = state.data
    return all(np.max(np.abs(g.apply(data) - data)) <= tol for g in subspace_generators(spec))


def coefficients_in(spec: SubspaceSpec, state: DenseState) -> np.ndarray:
    """Coefficient matrix of a (member) state in the ``|d_lambda>`` basis."""
    d = basis_matrix(spec)
    if state.kind == "pure":
        a = d.conj().T @ state.data
        return np.outer(a, a.conj())
    return d.conj().T @ state.data @ d


def set_partitions(n: int, min_block: int = 2) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Partitions of ``range(n)`` into blocks of at least ``min_block``.

    Blocks are ordered by their smallest element.
    """

    def rec(remaining: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
        if not remaining:
            yield []
            return
        head, rest = remaining[0], remaining[1:]
        for k in range(min_block - 1, len(rest) + 1):
            for others in itertools.combinations(rest, k):
                left = tuple(v for v in rest if v not in others)
                for tail in rec(left):
                    yield [(head,) + others] + tail

    for p in rec(tuple(range(n))):
        yield tuple(p)


@dataclass(frozen=True)
class RobustnessReport:
    robust: bool
    spec: SubspaceSpec | None
    qfi: float | None
    lower: float
    upper: float
    candidates_checked: int


def scaling_robustness_check(
    state: SubspaceState,
    channel: Callable[[np.ndarray], np.ndarray],
    eps: float,
    candidate_limit: int = CANDIDATE_LIMIT,
    tol: float = 1e-9,
) -> RobustnessReport:
    """Apply ``channel`` to the dense state and look for a subspace in the eps-class that holds it.

    The original partition is tried first, then all partitions into blocks
    of size >= 2 up to ``candidate_limit``.  A partition qualifies when the
    channel output lies in its subspace, the partition's worst case stays
    above ``n**(2-eps)`` and the output's QFI lies in ``[n**(2-eps), n**2]``.
    """
    n = state.spec.n
    rho = np.asarray(channel(state.to_dense().density_matrix()), dtype=complex)
    out = DenseState(n, rho)
    lower, upper = float(n ** (2 - eps)), float(n**2)
    zv = PauliString(n, 0, (1 << n) - 1)
    if np.max(np.abs(zv.apply(rho) - rho)) > tol:
        return RobustnessReport(False, None, None, lower, upper, 0)
    # X_a X_b fixing rho is an equivalence relation on qubits; any admissible
    # partition must refine its classes, so check pairs once.
    linked = [[False] * n for _ in range(n)]
    for a in range(n):
        linked[a][a] = True
        for b in range(a + 1, n):
            xx = PauliString(n, 1 << a | 1 << b, 0)
            linked[a][b] = linked[b][a] = bool(np.max(np.abs(xx.apply(rho) - rho)) <= tol)

    def admissible(blocks) -> bool:
        return all(linked[b[0]][j] for b in blocks for j in b[1:])

    checked = 0

    def candidates():
        yield state.spec.blocks
        for p in set_partitions(n):
            if p != state.spec.blocks:
                yield p

    for blocks in candidates():
        if checked >= candidate_limit:
            break
        checked += 1
        if not admissible(blocks):
            continue
        spec = SubspaceSpec(n, blocks)
        if not in_tolerance_class(spec, eps):
            continue
        q = qfi_subspace(SubspaceState(spec, coefficients_in(spec, out)))
        if lower * (1 - 1e-12) <= q <= upper * (1 + 1e-12):
            return RobustnessReport(True, spec, q, lower, upper, checked)
    return RobustnessReport(False, None, None, lower, upper, checked)


def dephase_coefficients(state: SubspaceState) -> SubspaceState:
    """Drop the off-diagonal coefficients (classical dephasing in the d-basis)."""
    return SubspaceState(state.spec, np.diag(np.diag(state.coeffs)))


def random_subspace_state(spec: SubspaceSpec, rng: np.random.Generator, rank: int | None = None) -> SubspaceState:
    d = 1 << spec.m
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    c = a @ a.conj().T
    return SubspaceState(spec, c / np.trace(c).real)

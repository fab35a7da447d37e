"""Dense state-vector / density-matrix ground truth for the closed forms.

Everything here is brute force on ``2**n`` arrays: graph states, quantum and
classical Fisher information of local phase-estimation models, and numerical
checks of the four stabilizer conditions that make a local measurement optimal.

Conventions
-----------
* Qubit 0 is the most significant bit of a basis index (leftmost kron factor).
* The encoding is ``rho_theta = exp(-i theta H / 2) rho exp(i theta H / 2)``, so
  the pure-state QFI is ``Var(H)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .graph import Graph
from .pauli import PAULI_MATRICES, PauliString

PURE_LIMIT = 16
MIXED_LIMIT = 10
TOL = 1e-10
EIG_CUTOFF = 1e-12
PROB_CUTOFF = 1e-14


class OracleError(ValueError):
    pass


class OracleLimitError(OracleError):
    pass


@dataclass(frozen=True)
class DenseState:
    """A pure state vector or a density matrix on ``n`` qubits."""

    n: int
    data: np.ndarray

    def __post_init__(self) -> None:
        dim = 1 << self.n
        if self.data.shape not in ((dim,), (dim, dim)):
            raise OracleError(f"array shape {self.data.shape} does not fit {self.n} qubits")

    @property
    def kind(self) -> str:
        return "pure" if self.data.ndim == 1 else "mixed"

    @classmethod
    def pure(cls, vec: np.ndarray, limit: int = PURE_LIMIT) -> "DenseState":
        vec = np.asarray(vec, dtype=complex)
        n = _qubits(vec.shape[0])
        _check_limit(n, limit)
        norm = np.linalg.norm(vec)
        if abs(norm - 1) > 1e-8:
            raise OracleError(f"state vector norm {norm} is not 1")
        return cls(n, vec)

    @classmethod
    def mixed(cls, rho: np.ndarray, limit: int = MIXED_LIMIT) -> "DenseState":
        rho = np.asarray(rho, dtype=complex)
        n = _qubits(rho.shape[0])
        _check_limit(n, limit)
        if rho.shape != (1 << n, 1 << n):
            raise OracleError("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise OracleError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1) > 1e-10:
            raise OracleError("density matrix trace is not 1")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise OracleError("density matrix is not positive semidefinite")
        return cls(n, rho)

    def density_matrix(self) -> np.ndarray:
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return self.data

    def as_mixed(self) -> "DenseState":
        return DenseState(self.n, self.density_matrix())

    def support_vectors(self, tol: float = EIG_CUTOFF) -> np.ndarray:
        """Columns spanning the support (eigenvectors with eigenvalue > tol)."""
        if self.kind == "pure":
            return self.data[:, None]
        w, v = np.linalg.eigh(self.data)
        return v[:, w > tol]

    def expectation(self, op: np.ndarray | PauliString) -> float:
        if isinstance(op, PauliString):
            applied = op.apply(self.data)
        else:
            applied = op @ self.data
        if self.kind == "pure":
            return complex(np.vdot(self.data, applied)).real
        return complex(np.trace(applied)).real


def _qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim <= 0 or 1 << n != dim:
        raise OracleError(f"dimension {dim} is not a power of two")
    return n


def _check_limit(n: int, limit: int) -> None:
    if n > limit:
        raise OracleLimitError(f"{n} qubits exceeds the oracle limit of {limit}")


# --- single-qubit tensor helpers -------------------------------------------


def apply_1q(arr: np.ndarray, op: np.ndarray, qubit: int, n: int, side: str = "left") -> np.ndarray:
    """Apply a 2x2 ``op`` to one qubit of a vector or (the rows of) a matrix.

    ``side="right"`` multiplies a matrix from the right instead (``arr @ op``
    on that qubit's column index).
    """
    if side == "left":
        rest = arr.shape[1:]
        t = arr.reshape((2,) * n + rest)
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [qubit])), 0, qubit)
        return t.reshape(arr.shape)
    t = arr.reshape((arr.shape[0],) + (2,) * n)
    t = np.moveaxis(np.tensordot(t, op, axes=([1 + qubit], [0])), -1, 1 + qubit)
    return t.reshape(arr.shape)


def apply_product(arr: np.ndarray, ops: Sequence[np.ndarray | None], n: int) -> np.ndarray:
    for q, op in enumerate(ops):
        if op is not None:
            arr = apply_1q(arr, op, q, n)
    return arr


def apply_hamiltonian(arr: np.ndarray, h_terms: Sequence[tuple[int, np.ndarray]], n: int) -> np.ndarray:
    out = np.zeros(arr.shape, dtype=complex)
    for q, op in h_terms:
        out += apply_1q(arr, op, q, n)
    return out


def embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return apply_1q(np.eye(1 << n, dtype=complex), op, qubit, n)


def hamiltonian_matrix(h_terms: Sequence[tuple[int, np.ndarray]], n: int) -> np.ndarray:
    return apply_hamiltonian(np.eye(1 << n, dtype=complex), h_terms, n)


def _check_terms(h_terms, n: int) -> list[tuple[int, np.ndarray]]:
    out = []
    for q, op in h_terms:
        op = np.asarray(op, dtype=complex)
        if op.shape != (2, 2):
            raise OracleError("Hamiltonian terms must be 2x2")
        if np.max(np.abs(op - op.conj().T)) > 1e-12:
            raise OracleError(f"Hamiltonian term on qubit {q} is not Hermitian")
        if not 0 <= q < n:
            raise OracleError(f"Hamiltonian term on qubit {q} out of range")
        out.append((int(q), op))
    return out


def pauli_terms(terms: Sequence[tuple[str, int]]) -> list[tuple[int, np.ndarray]]:
    """``[("X", 0), ...]`` to ``[(0, X2), ...]``."""
    return [(q, PAULI_MATRICES[letter]) for letter, q in terms]


# --- states ----------------------------------------------------------------


def graph_state(g: Graph, limit: int = PURE_LIMIT) -> DenseState:
    """CZ on every edge applied to ``|+>^n``."""
    _check_limit(g.n, limit)
    dim = 1 << g.n
    idx = np.arange(dim, dtype=np.int64)
    parity = np.zeros(dim, dtype=np.int64)
    for i, j in g.edges():
        bi = (idx >> (g.n - 1 - i)) & 1
        bj = (idx >> (g.n - 1 - j)) & 1
        parity ^= bi & bj
    vec = (1 - 2 * parity).astype(complex) / np.sqrt(dim)
    return DenseState(g.n, vec)


def ghz_state(n: int, limit: int = PURE_LIMIT) -> DenseState:
    """``(|+>^n + |->^n)/sqrt 2``, the X-basis GHZ state (even-parity Z strings)."""
    _check_limit(n, limit)
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    even = (np.bitwise_count(idx) & 1) == 0
    vec = np.where(even, 1.0, 0.0).astype(complex) * np.sqrt(2.0 / dim)
    if n == 0:
        vec = np.ones(1, dtype=complex)
    return DenseState(n, vec)


def product_state(single: np.ndarray, n: int, limit: int = PURE_LIMIT) -> DenseState:
    _check_limit(n, limit)
    vec = np.array([1.0 + 0j])
    for _ in range(n):
        vec = np.kron(vec, single)
    return DenseState.pure(vec, limit)


def zero_state(n: int, limit: int = PURE_LIMIT) -> DenseState:
    return product_state(np.array([1, 0], dtype=complex), n, limit)


# --- Fisher information ----------------------------------------------------


def qfi_from_derivative(rho: np.ndarray, drho: np.ndarray, cutoff: float = EIG_CUTOFF) -> float:
    """Spectral SLD formula ``2 sum |<j|drho|k>|^2 / (l_j + l_k)``."""
    w, v = np.linalg.eigh(rho)
    d = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    keep = denom > cutoff
    return float(2 * np.sum(np.abs(d[keep]) ** 2 / denom[keep]))


def qfi(state: DenseState, h_terms) -> float:
    """QFI of ``exp(-i theta H/2) rho exp(i theta H/2)`` with ``H = sum h_terms``."""
    h_terms = _check_terms(h_terms, state.n)
    if state.kind == "pure":
        hpsi = apply_hamiltonian(state.data, h_terms, state.n)
        mean = np.vdot(state.data, hpsi).real
        return float(max(np.vdot(hpsi, hpsi).real - mean**2, 0.0))
    rho = state.data
    _check_limit(state.n, MIXED_LIMIT)
    h = hamiltonian_matrix(h_terms, state.n)
    drho = -0.5j * (h @ rho - rho @ h)
    return qfi_from_derivative(rho, drho)


@dataclass
class LocalModel:
    """Probe, strictly local Hamiltonian, per-qubit observables and phase.

    ``measurement`` holds one Hermitian 2x2 observable per qubit; the measured
    observable is the product rotated by the encoding at ``theta``.
    """

    probe: DenseState
    h_terms: list[tuple[int, np.ndarray]]
    measurement: list[np.ndarray]
    theta: float = 0.0
    labels: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.h_terms = _check_terms(self.h_terms, self.probe.n)
        qubits = [q for q, _ in self.h_terms]
        if len(set(qubits)) != len(qubits):
            raise OracleError("at most one Hamiltonian term per qubit")
        if len(self.measurement) != self.probe.n:
            raise OracleError("need one observable per qubit")
        self.measurement = [np.asarray(m, dtype=complex) for m in self.measurement]
        for q, m in enumerate(self.measurement):
            if m.shape != (2, 2) or np.max(np.abs(m - m.conj().T)) > 1e-12:
                raise OracleError(f"observable on qubit {q} is not a Hermitian 2x2")

    @property
    def n(self) -> int:
        return self.probe.n

    def h_on(self, q: int) -> np.ndarray | None:
        for k, op in self.h_terms:
            if k == q:
                return op
        return None

    def at(self, theta: float) -> "LocalModel":
        return LocalModel(self.probe, self.h_terms, self.measurement, theta, self.labels)


def _encoding_unitaries(model: LocalModel, theta: float) -> list[np.ndarray | None]:
    return [None if h is None else expm(-0.5j * theta * h) for h in (model.h_on(q) for q in range(model.n))]


def measurement_basis(model: LocalModel, theta: float) -> list[np.ndarray]:
    """Per-qubit unitary whose columns are the eigenvectors of the rotated observable."""
    out = []
    for q, (m, u) in enumerate(zip(model.measurement, _encoding_unitaries(model, theta))):
        w, v = np.linalg.eigh(m)
        if abs(w[1] - w[0]) < 1e-12:
            raise OracleError(f"observable on qubit {q} is degenerate")
        out.append(v if u is None else u @ v)
    return out


def _encoded(model: LocalModel, theta: float) -> np.ndarray:
    us = _encoding_unitaries(model, theta)
    data = apply_product(model.probe.data, us, model.n)
    if model.probe.kind == "mixed":
        # rho -> U rho U^dag: apply U to rows, then to columns via the conjugate.
        data = apply_product(data.conj().T, us, model.n).conj().T
    return data


def outcome_distribution(model: LocalModel, theta: float, measure_at: float | None = None):
    """Probabilities and their first two theta-derivatives for every outcome.

    The measurement is fixed at ``measure_at`` (default ``theta``); only the
    state carries the theta dependence.  Returns ``(p, dp, d2p)`` over the
    ``2**n`` joint outcomes in basis-index order.
    """
    n = model.n
    basis = measurement_basis(model, theta if measure_at is None else measure_at)
    adj = [b.conj().T for b in basis]
    state = _encoded(model, theta)
    if model.probe.kind == "pure":
        h1 = -0.5j * apply_hamiltonian(state, model.h_terms, n)
        h2 = -0.5j * apply_hamiltonian(h1, model.h_terms, n)
        a, da, dda = (apply_product(v, adj, n) for v in (state, h1, h2))
        p = np.abs(a) ** 2
        dp = 2 * np.real(np.conj(a) * da)
        d2p = 2 * np.abs(da) ** 2 + 2 * np.real(np.conj(a) * dda)
        return p, dp, d2p
    h = hamiltonian_matrix(model.h_terms, n)
    d1 = -0.5j * (h @ state - state @ h)
    d2 = -0.5j * (h @ d1 - d1 @ h)
    diags = []
    for mat in (state, d1, d2):
        t = apply_product(mat, adj, n)
        t = apply_product(t.conj().T, adj, n).conj().T
        diags.append(np.real(np.diag(t)))
    return tuple(diags)


def cfi_local(model: LocalModel, theta: float | None = None) -> float:
    """Classical Fisher information of the rotated local measurement.

    Outcomes with ``p < 1e-14`` sit at a minimum of ``p(theta)``; there
    ``dp = 0`` and ``dp**2 / p`` tends to ``2 d2p``, which is what they
    contribute.
    """
    theta = model.theta if theta is None else theta
    p, dp, d2p = outcome_distribution(model, theta)
    live = p >= PROB_CUTOFF
    return float(np.sum(dp[live] ** 2 / p[live]) + 2 * np.sum(np.clip(d2p[~live], 0, None)))


def qfi_model(model: LocalModel) -> float:
    return qfi(model.probe, model.h_terms)


@dataclass(frozen=True)
class TheoremCheck:
    stabilizes: bool
    anticommutes_local: bool
    measurement_commutes: bool
    anticommutes_collective: bool

    @property
    def all(self) -> bool:
        return self.stabilizes and self.anticommutes_local and self.measurement_commutes and self.anticommutes_collective

    def as_dict(self) -> dict[str, bool]:
        return {
            "i_stabilizes": self.stabilizes,
            "ii_measurement_anticommutes_h": self.anticommutes_local,
            "iii_measurement_commutes_k": self.measurement_commutes,
            "iv_k_anticommutes_h": self.anticommutes_collective,
        }


def theorem_check(model: LocalModel, k: PauliString | np.ndarray, tol: float = TOL) -> TheoremCheck:
    n = model.n
    kmat = k.to_matrix() if isinstance(k, PauliString) else np.asarray(k, dtype=complex)
    if kmat.shape != (1 << n, 1 << n):
        raise OracleError("collective observable has the wrong dimension")
    support = model.probe.support_vectors()
    cond1 = np.max(np.abs(kmat @ support - support)) <= tol
    cond2 = all(
        np.max(np.abs(m @ h + h @ m)) <= tol
        for m, h in ((model.measurement[q], model.h_on(q)) for q in range(n))
        if h is not None and np.max(np.abs(h)) > 0
    )
    cond3 = True
    for q in range(n):
        om = embed(model.measurement[q], q, n)
        if np.max(np.abs(om @ kmat - kmat @ om)) > tol:
            cond3 = False
            break
    cond4 = True
    for q, h in model.h_terms:
        if np.max(np.abs(h)) == 0:
            continue
        hm = embed(h, q, n)
        if np.max(np.abs(hm @ kmat + kmat @ hm)) > tol:
            cond4 = False
            break
    return TheoremCheck(bool(cond1), bool(cond2), bool(cond3), bool(cond4))


_NEXT_LETTER = {"X": "Y", "Y": "Z", "Z": "X"}


def corollary_protocol(k: PauliString, probe: DenseState, sites: Sequence[int] | None = None, theta: float = 0.0) -> LocalModel:
    """Local model built from a stabilizer with traceless local factors.

    Each requested site measures the letter of ``k`` there and gets the
    cyclically next Pauli (X->Y->Z->X) as its Hamiltonian term.  Sites outside
    the request measure ``Z`` and carry no term.
    """
    if k.n != probe.n:
        raise OracleError("stabilizer and probe sizes differ")
    sites = list(range(k.n)) if sites is None else list(sites)
    h_terms = []
    meas = [PAULI_MATRICES["Z"]] * k.n
    for q in sites:
        letter = k.letter(q)
        if letter == "I":
            raise OracleError(f"stabilizer has an identity factor on requested site {q}")
        meas[q] = PAULI_MATRICES[letter]
        h_terms.append((q, PAULI_MATRICES[_NEXT_LETTER[letter]]))
    return LocalModel(probe, h_terms, list(meas), theta)


@dataclass(frozen=True)
class SaturationRow:
    theta: float
    qfi: float
    cfi: float

    @property
    def gap(self) -> float:
        return self.qfi - self.cfi


def saturation_report(model: LocalModel, thetas: Sequence[float], flag_above: float = 1e-7) -> tuple[list[SaturationRow], list[float]]:
    """Per-theta QFI/CFI table and the thetas whose gap exceeds ``flag_above``."""
    q = qfi_model(model)
    rows = [SaturationRow(float(t), q, cfi_local(model, t)) for t in thetas]
    return rows, [r.theta for r in rows if r.gap > flag_above]


def dump_probabilities(model: LocalModel, theta: float, path: str | Path) -> None:
    p, dp, _ = outcome_distribution(model, theta)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["outcome", "p", "dp_dtheta"])
        for idx in range(p.size):
            w.writerow([format(idx, f"0{model.n}b"), repr(float(p[idx])), repr(float(dp[idx]))])

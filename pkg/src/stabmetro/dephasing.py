"""I.i.d. X-dephasing during phase encoding and the QFI it leaves behind.

Each qubit undergoes ``rho -> (1-p) U rho U^dag + p X U rho U^dag X`` with
``U = exp(-i theta X / 2)``.  Because the flip commutes with the rotation, the
encoded family is a unitary orbit of the dephased probe and its QFI is
computed from ``d rho / d theta = -(i/2) [H, rho]``.

Subspace states get an exact reduced treatment: in the X eigenbasis the
channel multiplies a coherence ``|a><b|`` by ``(1-2p)**hamming(a, b)`` and
``H = sum X_j`` is diagonal, while a subspace state only touches the
``2**(m+1)`` strings ``b_lambda`` and their complements.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .oracle import (
    MIXED_LIMIT,
    DenseState,
    OracleError,
    _check_limit,
    apply_1q,
    ghz_state,
    hamiltonian_matrix,
    qfi_from_derivative,
    zero_state,
)
from .pauli import X2
from .protocol2 import SubspaceSpec, SubspaceState

DEFAULT_THETA = 0.3
RESTARTS = 16


@dataclass(frozen=True)
class DephasingModel:
    p: float
    theta: float
    n: int

    def __post_init__(self) -> None:
        if not 0 <= self.p <= 1:
            raise ValueError(f"dephasing probability {self.p} outside [0, 1]")


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def apply_dephasing_encoding(rho: DenseState, model: DephasingModel, limit: int = MIXED_LIMIT) -> DenseState:
    """Apply the encoding-with-dephasing channel qubit by qubit."""
    if rho.n != model.n:
        raise OracleError(f"state has {rho.n} qubits, model {model.n}")
    _check_limit(rho.n, limit)
    n = rho.n
    u = _rotation(model.theta)
    data = rho.density_matrix()
    for q in range(n):
        data = _conjugate(data, u, q, n)
        flipped = _conjugate(data, X2, q, n)
        data = (1 - model.p) * data + model.p * flipped
    return DenseState(n, data)


def _conjugate(rho: np.ndarray, op: np.ndarray, q: int, n: int) -> np.ndarray:
    left = apply_1q(rho, op, q, n)
    return apply_1q(left.conj().T, op, q, n).conj().T


def ghz_dephasing_qfi(n: int, p: float) -> float:
    return float(n**2 * (1 - 2 * p) ** (2 * n))


def separable_dephasing_qfi(n: int, p: float) -> float:
    """``|0...0>`` probe: each qubit keeps a Bloch vector of length ``1-2p`` orthogonal to X."""
    return float(n * (1 - 2 * p) ** 2)


def _dense_fdap(state: DenseState, p: float, theta: float) -> float:
    n = state.n
    out = apply_dephasing_encoding(state, DephasingModel(p, theta, n)).data
    h = hamiltonian_matrix([(q, X2) for q in range(n)], n)
    drho = -0.5j * (h @ out - out @ h)
    return qfi_from_derivative(out, drho)


def reduced_encoded(state: SubspaceState, p: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Dephased encoded state and its generator eigenvalues on the X-basis strings.

    Row order: ``b_lambda`` for every lambda, then their complements.
    """
    spec = state.spec
    n = spec.n
    d = 1 << spec.m
    strings = [spec.flip_mask(lam) for lam in spec.lambdas()]
    full = (1 << n) - 1
    strings = strings + [full ^ s for s in strings]
    v = np.zeros((2 * d, d))
    v[np.arange(d), np.arange(d)] = v[d + np.arange(d), np.arange(d)] = 1 / np.sqrt(2)
    rho = v @ state.coeffs @ v.T
    ham = np.array([[(a ^ b).bit_count() for b in strings] for a in strings])
    rho = rho * (1 - 2 * p) ** ham
    h = np.array([n - 2 * s.bit_count() for s in strings], dtype=float)
    phase = np.exp(-0.5j * theta * h)
    rho = phase[:, None] * rho * phase.conj()[None, :]
    return rho, h


def _reduced_fdap(state: SubspaceState, p: float, theta: float) -> float:
    rho, h = reduced_encoded(state, p, theta)
    drho = -0.5j * (h[:, None] - h[None, :]) * rho
    return qfi_from_derivative(rho, drho)


def f_dap(rho: DenseState | SubspaceState, p: float, theta: float = DEFAULT_THETA, method: str = "auto") -> float:
    """QFI of the dephased encoded family at ``theta``.

    ``method="oracle"`` forces the dense route for subspace states;
    ``"reduced"`` (the ``auto`` choice for them) uses the X-basis reduction.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"dephasing probability {p} outside [0, 1]")
    if isinstance(rho, SubspaceState):
        if method == "oracle":
            return _dense_fdap(rho.to_dense(), p, theta)
        return _reduced_fdap(rho, p, theta)
    if method == "reduced":
        raise ValueError("reduced method needs a subspace state")
    return _dense_fdap(rho, p, theta)


def _unpack(x: np.ndarray) -> np.ndarray:
    d = x.size // 2
    a = x[:d] + 1j * x[d:]
    return a / np.linalg.norm(a)


def optimize_robust_state(
    spec: SubspaceSpec,
    p: float,
    theta: float = DEFAULT_THETA,
    budget: int = RESTARTS,
    seed: int = 0,
    tol: float = 1e-6,
) -> tuple[SubspaceState, float]:
    """Best pure subspace state found for ``f_dap`` at dephasing ``p``.

    Candidates are the ``2**m`` basis states plus ``budget`` Nelder-Mead runs
    from seeded random unit vectors.  No global-optimality claim.
    """
    d = 1 << spec.m
    best_state = SubspaceState.basis(spec, 0)
    best = f_dap(best_state, p, theta)
    for k in range(1, d):
        cand = SubspaceState.basis(spec, k)
        val = f_dap(cand, p, theta)
        if val > best:
            best_state, best = cand, val
    rng = np.random.default_rng(seed)

    def objective(x: np.ndarray) -> float:
        if not np.any(x):
            return 0.0
        return -f_dap(SubspaceState.pure(spec, _unpack(x)), p, theta)

    for _ in range(budget):
        x0 = rng.normal(size=2 * d)
        res = minimize(objective, x0, method="Nelder-Mead", options={"xatol": tol, "fatol": tol, "maxiter": 4000 * d, "maxfev": 4000 * d})
        if -res.fun > best:
            best_state = SubspaceState.pure(spec, _unpack(res.x))
            best = -res.fun
    return best_state, float(best)


def half_split(n: int) -> SubspaceSpec:
    return SubspaceSpec.from_sizes([n // 2, n - n // 2])


@dataclass(frozen=True)
class Probe:
    """A named probe family evaluated per ``(n, p)``."""

    probe_id: str
    evaluate: Callable[[int, float, float], tuple[float, str]]


def ghz_probe(oracle_max: int = 8) -> Probe:
    def ev(n: int, p: float, theta: float) -> tuple[float, str]:
        if n <= oracle_max:
            return f_dap(ghz_state(n), p, theta), "oracle"
        return ghz_dephasing_qfi(n, p), "closed_form"

    return Probe("ghz", ev)


def ghz_closed_probe() -> Probe:
    return Probe("ghz_closed", lambda n, p, theta: (ghz_dephasing_qfi(n, p), "closed_form"))


def separable_probe(oracle_max: int = 8) -> Probe:
    def ev(n: int, p: float, theta: float) -> tuple[float, str]:
        if n <= oracle_max:
            return f_dap(zero_state(n), p, theta), "oracle"
        return separable_dephasing_qfi(n, p), "closed_form"

    return Probe("sep", ev)


def sql_probe() -> Probe:
    """Noiseless standard-quantum-limit reference ``F = n``."""
    return Probe("sql", lambda n, p, theta: (float(n), "reference"))


def subspace_probe(probe_id: str, spec_for: Callable[[int], SubspaceSpec], state_for: Callable[[SubspaceSpec, float, float], SubspaceState]) -> Probe:
    def ev(n: int, p: float, theta: float) -> tuple[float, str]:
        spec = spec_for(n)
        return f_dap(state_for(spec, p, theta), p, theta), "reduced"

    return Probe(probe_id, ev)


def optimized_probe(probe_id: str, spec_for: Callable[[int], SubspaceSpec], budget: int = 4, seed: int = 0, at_p: float | None = None) -> Probe:
    """Optimized pure subspace state; ``at_p`` fixes the optimization point."""

    def ev(n: int, p: float, theta: float) -> tuple[float, str]:
        spec = spec_for(n)
        state, val = optimize_robust_state(spec, p if at_p is None else at_p, theta, budget, seed)
        if at_p is not None:
            val = f_dap(state, p, theta)
        return val, "reduced"

    return Probe(probe_id, ev)


FIELDS = ["probe_id", "n", "p", "theta", "f_dap", "method"]


def noise_sweep(probes: Sequence[Probe], p_grid: Sequence[float], n_grid: Sequence[int], theta: float = DEFAULT_THETA) -> list[dict]:
    for p in p_grid:
        if not 0 <= p <= 1:
            raise ValueError(f"dephasing probability {p} outside [0, 1]")
    rows = []
    for probe in probes:
        for n in n_grid:
            for p in p_grid:
                val, method = probe.evaluate(n, p, theta)
                rows.append({"probe_id": probe.probe_id, "n": int(n), "p": float(p), "theta": float(theta), "f_dap": float(val), "method": method})
    return rows


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def rows_to_json(rows: Sequence[dict]) -> str:
    return json.dumps(rows, indent=2)


def ghz_separable_crossover(p: float, n_max: int = 200) -> int:
    """Largest ``n`` at which the dephased GHZ probe still beats ``|0...0>``."""
    last = 0
    for n in range(1, n_max + 1):
        if ghz_dephasing_qfi(n, p) > separable_dephasing_qfi(n, p):
            last = n
    return last

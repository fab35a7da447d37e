"""Closed-form QFI of graph-state local protocols and search over stabilizers.

For a graph state and a nonempty vertex subset ``alpha`` the stabilizer
``S_alpha`` fixes a local Hamiltonian and local measurement whose QFI depends
only on how ``S_alpha``'s support partition meets the twin classes and leaves.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Graph, GraphError, TwinsStructure, is_connected, mask_of, members, twins_structure
from .oracle import PURE_LIMIT, LocalModel, graph_state, pauli_terms
from .pauli import PAULI_MATRICES, SupportPartition, stabilizer_element

EXHAUSTIVE_LIMIT = 20
GREEDY_RESTARTS = 32


class SearchLimitError(ValueError):
    pass


class _Evaluator:
    """Precomputed structure for fast repeated evaluation of the QFI formula."""

    def __init__(self, g: Graph):
        if g.n < 3:
            raise GraphError("protocols need at least 3 vertices")
        if not is_connected(g):
            raise GraphError("protocols need a connected graph")
        self.g = g
        self.ts = twins_structure(g)
        self.twins = [c for c in self.ts.twins_classes if c.bit_count() > 1]
        self.true_twins = [c for c in self.ts.true_twins_classes if c.bit_count() > 1]
        self.adj = g.adjacency

    def z_mask(self, alpha: int) -> int:
        z = 0
        for v in members(alpha):
            z ^= self.adj[v]
        return z

    def value(self, alpha: int, z: int | None = None) -> int:
        if z is None:
            z = self.z_mask(alpha)
        s34 = z  # Y- and Z-sites are exactly the sites with a Z component
        s14 = alpha ^ z
        f = (alpha | z).bit_count()
        for c in self.twins:
            k = (c & s34).bit_count()
            f += k * (k - 1)
        for c in self.true_twins:
            k = (c & s14).bit_count()
            f += k * (k - 1)
        f += 2 * (self.ts.leaves & s34).bit_count()
        return f

    def bound(self) -> int:
        f = self.g.n + 2 * self.ts.leaves.bit_count()
        for c in self.twins + self.true_twins:
            k = c.bit_count()
            f += k * (k - 1)
        return f


def _alpha_mask(g: Graph, alpha: Iterable[int | str] | int) -> int:
    if isinstance(alpha, int):
        amask = alpha
    else:
        amask = mask_of(g.vertex(v) for v in alpha)
    if amask == 0:
        raise ValueError("alpha must be nonempty")
    if amask & ~g.vertex_mask:
        raise ValueError("alpha contains vertices outside the graph")
    return amask


def qfi_alpha(g: Graph, alpha: Iterable[int | str] | int) -> int:
    """QFI of the protocol attached to ``S_alpha`` on the graph state of ``g``.

    support size + 2 (twin pairs in S3+S4) + 2 (true-twin pairs in S1+S4)
    + 2 (leaves in S3+S4).
    """
    return _Evaluator(g).value(_alpha_mask(g, alpha))


def qfi_upper_bound(g: Graph) -> int:
    """``n + 2 sum C(|V_m|,2) + 2 sum C(|U_m|,2) + 2|L|``."""
    return _Evaluator(g).bound()


def attainable(g: Graph, alpha: Iterable[int | str] | int) -> bool:
    """Whether ``S_alpha`` meets the conditions for equality with the bound."""
    ev = _Evaluator(g)
    _, part = stabilizer_element(g, _alpha_mask(g, alpha))
    s34 = part.s3 | part.s4
    s14 = part.s1 | part.s4
    return (
        part.s2 == 0
        and all(c & s14 == c for c in ev.true_twins)
        and all(c & s34 == c for c in ev.twins)
        and ev.ts.leaves & s34 == ev.ts.leaves
    )


@dataclass(frozen=True)
class SearchResult:
    alpha: int
    qfi: int
    bound: int

    @property
    def attains_bound(self) -> bool:
        return self.qfi == self.bound

    @property
    def alpha_list(self) -> list[int]:
        return members(self.alpha)


def _scan(g: Graph, lo: int, hi: int) -> tuple[int, int]:
    """Best (qfi, mask) over masks in [lo, hi), smallest mask on ties."""
    ev = _Evaluator(g)
    bound = ev.bound()
    best_f, best_a = -1, 0
    for a in range(lo, hi):
        f = ev.value(a)
        if f > best_f:
            best_f, best_a = f, a
            if f == bound:
                break
    return best_f, best_a


def search_optimal_alpha(
    g: Graph,
    mode: str = "exhaustive",
    *,
    limit: int = EXHAUSTIVE_LIMIT,
    restarts: int = GREEDY_RESTARTS,
    seed: int = 0,
    workers: int = 1,
) -> SearchResult:
    """Maximize the closed-form QFI over nonempty ``alpha``.

    ``exhaustive`` scans every bitmask and stops at the first one reaching the
    structural bound; ties go to the smallest bitmask.  ``greedy`` runs
    steepest-ascent single-vertex flips from random starts and makes no
    optimality claim.
    """
    ev = _Evaluator(g)
    bound = ev.bound()
    if mode == "exhaustive":
        if g.n > limit:
            raise SearchLimitError(f"exhaustive search limited to n <= {limit}, got {g.n}")
        total = 1 << g.n
        if workers <= 1:
            f, a = _scan(g, 1, total)
        else:
            edges = np.linspace(1, total, workers + 1).astype(int)
            with ProcessPoolExecutor(workers) as pool:
                parts = list(pool.map(_scan, [g] * workers, edges[:-1].tolist(), edges[1:].tolist()))
            f, a = max(parts, key=lambda fa: (fa[0], -fa[1]))
        return SearchResult(a, f, bound)
    if mode == "greedy":
        return _greedy(ev, restarts, seed)
    raise ValueError(f"unknown search mode {mode!r}")


def _greedy(ev: _Evaluator, restarts: int, seed: int) -> SearchResult:
    g = ev.g
    rng = np.random.default_rng(seed)
    bound = ev.bound()
    best_f, best_a = -1, 0
    for _ in range(restarts):
        alpha = 0
        while alpha == 0:
            bits = rng.integers(0, 2, size=g.n)
            alpha = mask_of(int(v) for v in np.flatnonzero(bits))
        z = ev.z_mask(alpha)
        f = ev.value(alpha, z)
        while True:
            step_f, step_v = f, -1
            for v in range(g.n):
                cand = alpha ^ (1 << v)
                if cand == 0:
                    continue
                cf = ev.value(cand, z ^ ev.adj[v])
                if cf > step_f:
                    step_f, step_v = cf, v
            if step_v < 0:
                break
            alpha ^= 1 << step_v
            z ^= ev.adj[step_v]
            f = step_f
        if f > best_f or (f == best_f and alpha < best_a):
            best_f, best_a = f, alpha
        if best_f == bound:
            break
    return SearchResult(best_a, best_f, bound)


@dataclass(frozen=True)
class Protocol1Model:
    graph: Graph
    alpha: int
    partition: SupportPartition
    hamiltonian: tuple[tuple[str, int], ...]
    measurement: tuple[str, ...]
    qfi_closed_form: int
    bound: int

    @property
    def attainable(self) -> bool:
        return self.qfi_closed_form == self.bound

    def to_json(self) -> dict:
        return {
            "alpha": members(self.alpha),
            "partition": self.partition.as_lists(),
            "qfi": self.qfi_closed_form,
            "bound": self.bound,
            "attainable": self.attainable,
            "hamiltonian": [[letter, q] for letter, q in self.hamiltonian],
            "measurement": list(self.measurement),
        }


def protocol1_model(g: Graph, alpha: Iterable[int | str] | int) -> Protocol1Model:
    """Hamiltonian, measurement letters and closed-form QFI for ``S_alpha``.

    Roots in S1+S3 get Z; non-root S1 sites and S4 true twins get Y; non-root
    S3 sites and the remaining S4 sites get X.  Each qubit measures the letter
    of ``S_alpha`` there, and ``Z`` on identity sites.
    """
    ev = _Evaluator(g)
    amask = _alpha_mask(g, alpha)
    _, part = stabilizer_element(g, amask)
    roots, ubar = ev.ts.roots, ev.ts.u_bar
    terms: dict[int, str] = {}
    for v in members((part.s1 | part.s3) & roots):
        terms[v] = "Z"
    for v in members((part.s1 & ~roots) | (part.s4 & ubar)):
        terms[v] = "Y"
    for v in members((part.s3 & ~roots) | (part.s4 & ~ubar)):
        terms[v] = "X"
    meas = []
    for v in range(g.n):
        bit = 1 << v
        meas.append("X" if part.s1 & bit else "Y" if part.s3 & bit else "Z")
    ham = tuple((terms[v], v) for v in sorted(terms))
    return Protocol1Model(g, amask, part, ham, tuple(meas), ev.value(amask), ev.bound())


def oracle_model(g: Graph, alpha: Iterable[int | str] | int, theta: float = 0.0, limit: int = PURE_LIMIT) -> LocalModel:
    """Dense :class:`LocalModel` for the ``S_alpha`` protocol on the graph state."""
    model = protocol1_model(g, alpha)
    return LocalModel(
        graph_state(g, limit),
        pauli_terms(model.hamiltonian),
        [PAULI_MATRICES[c] for c in model.measurement],
        theta,
    )


def lc_qfi_multiset(g: Graph, limit: int = EXHAUSTIVE_LIMIT) -> Counter:
    """Counter of closed-form QFI values over every nonempty ``alpha``."""
    if g.n > limit:
        raise SearchLimitError(f"multiset enumeration limited to n <= {limit}, got {g.n}")
    ev = _Evaluator(g)
    return Counter(ev.value(a) for a in range(1, 1 << g.n))


def structure_report(g: Graph) -> dict:
    ts: TwinsStructure = twins_structure(g)
    name = g.name
    return {
        "n": g.n,
        "twins_classes": [[name(v) for v in members(c)] for c in ts.twins_classes],
        "true_twins_classes": [[name(v) for v in members(c)] for c in ts.true_twins_classes],
        "leaves": [name(v) for v in members(ts.leaves)],
        "roots": [name(v) for v in members(ts.roots)],
        "U": [name(v) for v in members(ts.u_set)],
        "U_bar": [name(v) for v in members(ts.u_bar)],
        "connected": is_connected(g),
        "bound": qfi_upper_bound(g) if is_connected(g) and g.n >= 3 else None,
    }

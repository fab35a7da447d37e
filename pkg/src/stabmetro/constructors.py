"""Subgraph fragments and A-/B-type "subgraph concatenation" families.

Fragments:

* ``s1`` complete graph ``K_m`` (one true-twins class, no twins),
* ``s2`` star ``S_m`` (leaf twins around one center),
* ``s3`` complete bipartite ``K_{2,m-2}`` (twins with two common neighbors),
* ``s4`` ``m`` isolated vertices.

A-type composites bridge fragments with one edge per meta-edge between port
vertices; B-type composites fully join neighboring fragments, and their
placement must agree with a stabilizer of the meta-graph.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Sequence

import numpy as np

from .graph import Graph, GraphError, complete, complete_bipartite, cycle, empty, is_connected, members, star, twins_structure
from .pauli import PauliString, stabilizer_element
from .protocol1 import search_optimal_alpha

KINDS = ("s1", "s2", "s3", "s4")
_MIN_SIZE = {"s1": 2, "s2": 3, "s3": 4, "s4": 1}


class ConstructionError(ValueError):
    pass


class RuleViolation(ConstructionError):
    pass


@dataclass(frozen=True)
class SubgraphKind:
    kind: str
    size: int

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConstructionError(f"unknown fragment kind {self.kind!r}")
        if not isinstance(self.size, int) or self.size < _MIN_SIZE[self.kind]:
            raise ConstructionError(f"{self.kind} needs size >= {_MIN_SIZE[self.kind]}, got {self.size!r}")


def build_fragment(kind: SubgraphKind) -> Graph:
    m = kind.size
    if kind.kind == "s1":
        return complete(m)
    if kind.kind == "s2":
        return star(m)
    if kind.kind == "s3":
        return complete_bipartite(2, m - 2)
    return empty(m)


@dataclass(frozen=True)
class MetaGraph:
    k: int
    meta_edges: tuple[tuple[int, int], ...]
    assignment: tuple[SubgraphKind, ...]
    join_mode: str = "bridge"
    meta_stabilizer: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "meta_edges", tuple((int(a), int(b)) for a, b in self.meta_edges))
        object.__setattr__(self, "assignment", tuple(self.assignment))
        if len(self.assignment) != self.k:
            raise ConstructionError("assignment length must equal the number of meta-vertices")
        if self.join_mode not in ("bridge", "full_join"):
            raise ConstructionError(f"unknown join mode {self.join_mode!r}")

    def graph(self) -> Graph:
        try:
            return Graph.from_edges(self.k, self.meta_edges)
        except GraphError as exc:
            raise ConstructionError(f"invalid meta-graph: {exc}") from None

    @classmethod
    def from_json(cls, data: dict) -> "MetaGraph":
        kind = data.get("type")
        if kind not in ("A", "B"):
            raise ConstructionError("preset 'type' must be 'A' or 'B'")
        assignment = tuple(SubgraphKind(a["kind"], a["size"]) for a in data["assignment"])
        return cls(
            len(assignment),
            tuple(tuple(e) for e in data.get("meta_edges", [])),
            assignment,
            "bridge" if kind == "A" else "full_join",
            data.get("meta_stabilizer"),
        )


def _offsets(meta: MetaGraph) -> list[int]:
    out, acc = [], 0
    for a in meta.assignment:
        out.append(acc)
        acc += a.size
    return out


def port_vertex(frag: Graph) -> int:
    """Lowest-index non-leaf vertex (vertex 0 if every vertex is a leaf)."""
    for v in range(frag.n):
        if frag.adjacency[v].bit_count() != 1:
            return v
    return 0


def build_a_type(meta: MetaGraph) -> Graph:
    if meta.join_mode != "bridge":
        raise ConstructionError("A-type composites use bridge joins")
    for a in meta.assignment:
        if a.kind == "s4":
            raise ConstructionError("A-type fragments are drawn from s1, s2, s3")
    if not is_connected(meta.graph()):
        raise ConstructionError("A-type meta-graph must be connected")
    frags = [build_fragment(a) for a in meta.assignment]
    offs = _offsets(meta)
    edges = [(o + i, o + j) for f, o in zip(frags, offs) for i, j in f.edges()]
    ports = [o + port_vertex(f) for f, o in zip(frags, offs)]
    edges += [(ports[a], ports[b]) for a, b in meta.meta_edges]
    return Graph.from_edges(sum(a.size for a in meta.assignment), edges)


def _load_default_rules() -> dict[str, dict[str, bool]]:
    text = resources.files("stabmetro").joinpath("data/b_type_rules.json").read_text()
    return json.loads(text)["rules"]


DEFAULT_RULES = _load_default_rules()


def check_rules(meta: MetaGraph, rules: dict[str, dict[str, bool]] | None = None) -> list[str]:
    """Validate fragment placement against the letter rule table.

    Raises :class:`RuleViolation` on a prohibited cell; returns a note for
    every placement whose cell the table leaves open.
    """
    rules = DEFAULT_RULES if rules is None else rules
    if meta.meta_stabilizer is None or len(meta.meta_stabilizer) != meta.k:
        raise ConstructionError("B-type needs a meta-stabilizer with one letter per meta-vertex")
    flags = []
    for pos, (letter, frag) in enumerate(zip(meta.meta_stabilizer, meta.assignment)):
        allowed = rules.get(letter, {}).get(frag.kind)
        if allowed is False:
            raise RuleViolation(f"{frag.kind} is not allowed at a {letter} position (meta-vertex {pos})")
        if allowed is None:
            flags.append(f"meta-vertex {pos}: {frag.kind} under {letter} is not covered by the rule table")
    return flags


def check_meta_stabilizer(meta: MetaGraph) -> None:
    """Require a full-weight stabilizer of the meta-graph state (up to sign)."""
    letters = meta.meta_stabilizer or ""
    if len(letters) != meta.k or any(c not in "XYZ" for c in letters):
        raise ConstructionError(f"meta-stabilizer {letters!r} must have one X/Y/Z letter per meta-vertex")
    target = PauliString.from_letters(letters)
    alpha = target.x
    if alpha == 0:
        raise ConstructionError(f"meta-stabilizer {letters!r} is not a stabilizer of the meta-graph state")
    elem, _ = stabilizer_element(meta.graph(), alpha)
    if elem.letters != letters:
        raise ConstructionError(f"meta-stabilizer {letters!r} is not a stabilizer of the meta-graph state")


def build_b_type(meta: MetaGraph, rules: dict[str, dict[str, bool]] | None = None) -> Graph:
    if meta.join_mode != "full_join":
        raise ConstructionError("B-type composites use full joins")
    check_meta_stabilizer(meta)
    check_rules(meta, rules)
    frags = [build_fragment(a) for a in meta.assignment]
    offs = _offsets(meta)
    edges = [(o + i, o + j) for f, o in zip(frags, offs) for i, j in f.edges()]
    for a, b in meta.meta_edges:
        edges += [(offs[a] + i, offs[b] + j) for i in range(frags[a].n) for j in range(frags[b].n)]
    g = Graph.from_edges(sum(a.size for a in meta.assignment), edges)
    if not is_connected(g):
        raise ConstructionError("B-type composite is disconnected")
    return g


def build(meta: MetaGraph, rules=None) -> Graph:
    return build_a_type(meta) if meta.join_mode == "bridge" else build_b_type(meta, rules)


def fragment_bound(kind: SubgraphKind) -> int:
    """Structural QFI bound of an isolated fragment (s4 contributes its size)."""
    g = build_fragment(kind)
    ts = twins_structure(g)
    f = g.n + 2 * ts.leaves.bit_count()
    for c in ts.twins_classes + ts.true_twins_classes:
        k = c.bit_count()
        f += k * (k - 1)
    return f


# --- scaling experiments ---------------------------------------------------


def a_cluster(n: int, kind: str = "s2") -> Graph:
    """``round(n**(1/3))`` fragments of near-equal size chained into a path."""
    k = max(1, round(n ** (1 / 3)))
    base, extra = divmod(n, k)
    sizes = [base + (1 if i < extra else 0) for i in range(k)]
    meta = MetaGraph(k, tuple((i, i + 1) for i in range(k - 1)), tuple(SubgraphKind(kind, s) for s in sizes))
    return build_a_type(meta)


FAMILIES: dict[str, Callable[[int], Graph]] = {
    "a_cluster": a_cluster,
    "star": star,
    "cycle": cycle,
    "complete": complete,
}


@dataclass
class ScalingResult:
    rows: list[dict] = field(default_factory=list)
    exponent: float = math.nan

    def to_json(self) -> dict:
        return {"rows": self.rows, "exponent": self.exponent}


def fit_exponent(ns: Sequence[float], fs: Sequence[float]) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(fs, float)), 1)
    return float(slope)


def scaling_experiment(family: str | Callable[[int], Graph], n_values: Sequence[int], search_mode: str = "greedy", seed: int = 0) -> ScalingResult:
    """Best-found QFI and structural bound per size, plus the log-log slope."""
    if len(set(n_values)) < 3:
        raise ConstructionError("need >= 3 distinct N values for an exponent fit")
    builder = FAMILIES[family] if isinstance(family, str) else family
    result = ScalingResult()
    for n in sorted(set(n_values)):
        g = builder(n)
        found = search_optimal_alpha(g, search_mode, seed=seed)
        result.rows.append({"n": g.n, "qfi": found.qfi, "bound": found.bound, "alpha": members(found.alpha)})
    result.exponent = fit_exponent([r["n"] for r in result.rows], [r["qfi"] for r in result.rows])
    return result

"""Undirected simple graphs on 0-indexed vertices and their twin structure.

Adjacency is stored as one Python ``int`` bitset per vertex, so neighborhood
algebra (XOR of neighborhoods, intersections with vertex sets) stays cheap even
for the thousand-vertex graphs used in scaling experiments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def members(mask: int) -> list[int]:
    """Vertices set in ``mask``, ascending."""
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


class GraphError(ValueError):
    """Invalid graph construction or an operation on an unsuitable graph."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with per-vertex adjacency bitsets.

    Use :meth:`from_edges` rather than building ``adjacency`` by hand; the
    constructor validates symmetry and the absence of self-loops.
    """

    n: int
    adjacency: tuple[int, ...]
    labels: Mapping[str, int] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise GraphError(f"vertex count must be positive, got {self.n}")
        if len(self.adjacency) != self.n:
            raise GraphError("adjacency length does not match n")
        full = (1 << self.n) - 1
        for v, adj in enumerate(self.adjacency):
            if adj & ~full:
                raise GraphError(f"vertex {v} has a neighbor out of range")
            if adj >> v & 1:
                raise GraphError(f"self-loop at vertex {v}")
            for u in members(adj):
                if not self.adjacency[u] >> v & 1:
                    raise GraphError(f"asymmetric adjacency between {v} and {u}")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Sequence[int]],
        labels: Mapping[str, int] | None = None,
    ) -> "Graph":
        if n <= 0:
            raise GraphError(f"vertex count must be positive, got {n}")
        adj = [0] * n
        for e in edges:
            if len(e) != 2:
                raise GraphError(f"edge {list(e)} must have two endpoints")
            i, j = int(e[0]), int(e[1])
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge {[i, j]} has an endpoint out of range")
            if i == j:
                raise GraphError(f"self-loop edge {[i, j]}")
            if adj[i] >> j & 1:
                raise GraphError(f"duplicate edge {[i, j]}")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(n, tuple(adj), dict(labels or {}))

    @property
    def vertex_mask(self) -> int:
        return (1 << self.n) - 1

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in members(self.adjacency[i]) if i < j]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return self.adjacency[v].bit_count()

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i] >> j & 1)

    def vertex(self, key: int | str) -> int:
        """Resolve a vertex index or a label."""
        if isinstance(key, str):
            if key in self.labels:
                return self.labels[key]
            if key.lstrip("-").isdigit():
                key = int(key)
            else:
                raise GraphError(f"unknown vertex label {key!r}")
        self._check_vertex(key)
        return key

    def name(self, v: int) -> str:
        for label, idx in self.labels.items():
            if idx == v:
                return label
        return str(v)

    def _check_vertex(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < self.n:
            raise GraphError(f"vertex {v!r} out of range for n={self.n}")

    def to_json(self) -> dict:
        out: dict = {"n": self.n, "edges": [list(e) for e in self.edges()]}
        if self.labels:
            out["labels"] = dict(self.labels)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Graph":
        if not isinstance(data, Mapping):
            raise GraphError("graph JSON must be an object")
        if "n" not in data or "edges" not in data:
            raise GraphError("graph JSON needs 'n' and 'edges'")
        n = data["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise GraphError("'n' must be an integer")
        labels = data.get("labels") or {}
        for name, idx in labels.items():
            if not isinstance(idx, int) or not 0 <= idx < n:
                raise GraphError(f"label {name!r} points to invalid vertex {idx!r}")
        return cls.from_edges(n, data["edges"], labels)


def load_graph(path: str | Path) -> Graph:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return Graph.from_json(data)


def neighborhood(g: Graph, v: int) -> set[int]:
    g._check_vertex(v)
    return set(members(g.adjacency[v]))


@dataclass(frozen=True)
class TwinsStructure:
    """Twin partitions plus leaves, roots and the non-true-twin set ``U``.

    All vertex sets are bitmasks; classes are ordered by their smallest vertex.
    """

    twins_classes: tuple[int, ...]
    true_twins_classes: tuple[int, ...]
    leaves: int
    roots: int
    u_set: int
    u_bar: int

    def twins_pairs(self, within: int) -> int:
        return sum(_pairs((c & within).bit_count()) for c in self.twins_classes)

    def true_twins_pairs(self, within: int) -> int:
        return sum(_pairs((c & within).bit_count()) for c in self.true_twins_classes)


def _pairs(k: int) -> int:
    return k * (k - 1) // 2


def _classes_by_key(keys: Sequence[int]) -> tuple[int, ...]:
    groups: dict[int, int] = {}
    for v, key in enumerate(keys):
        groups[key] = groups.get(key, 0) | 1 << v
    return tuple(sorted(groups.values(), key=lambda m: (m & -m)))


def twins_structure(g: Graph) -> TwinsStructure:
    # Twins share open neighborhoods, true twins share closed ones; both are
    # equality relations, so grouping by the neighborhood mask gives the classes.
    twins = _classes_by_key(g.adjacency)
    true_twins = _classes_by_key([a | 1 << v for v, a in enumerate(g.adjacency)])
    leaves = 0
    roots = 0
    for v, a in enumerate(g.adjacency):
        if a.bit_count() == 1:
            leaves |= 1 << v
            roots |= a
    u_set = 0
    for c in true_twins:
        if c.bit_count() == 1:
            u_set |= c
    return TwinsStructure(twins, true_twins, leaves, roots, u_set, g.vertex_mask & ~u_set)


def local_complement(g: Graph, v: int) -> Graph:
    """Toggle every edge inside the neighborhood of ``v``."""
    g._check_vertex(v)
    nb = g.adjacency[v]
    adj = list(g.adjacency)
    for u in members(nb):
        adj[u] ^= nb & ~(1 << u)
    return Graph(g.n, tuple(adj), g.labels)


def is_connected(g: Graph) -> bool:
    seen = 1
    frontier = 1
    while frontier:
        nxt = 0
        for u in members(frontier):
            nxt |= g.adjacency[u]
        frontier = nxt & ~seen
        seen |= nxt
    return seen == g.vertex_mask


def require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise GraphError("operation requires a connected graph")


def star(n: int) -> Graph:
    """Star on ``n`` vertices with center 0."""
    _check_size(n, 2, "star")
    return Graph.from_edges(n, [(0, k) for k in range(1, n)])


def cycle(n: int) -> Graph:
    _check_size(n, 3, "cycle")
    return Graph.from_edges(n, [(k, (k + 1) % n) for k in range(n)])


def path(n: int) -> Graph:
    _check_size(n, 1, "path")
    return Graph.from_edges(n, [(k, k + 1) for k in range(n - 1)])


def complete(n: int) -> Graph:
    _check_size(n, 1, "complete")
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> Graph:
    """K_{a,b}; vertices ``0..a-1`` form the first side."""
    _check_size(a, 1, "complete_bipartite")
    _check_size(b, 1, "complete_bipartite")
    return Graph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def empty(n: int) -> Graph:
    _check_size(n, 1, "empty")
    return Graph(n, (0,) * n)


def _check_size(n: int, minimum: int, kind: str) -> None:
    if not isinstance(n, int) or n < minimum:
        raise GraphError(f"{kind} needs size >= {minimum}, got {n!r}")


_STANDARD = {
    "star": star,
    "cycle": cycle,
    "path": path,
    "complete": complete,
    "complete_bipartite": complete_bipartite,
    "empty": empty,
}


def standard_graph(kind: str, *sizes: int) -> Graph:
    try:
        builder = _STANDARD[kind]
    except KeyError:
        raise GraphError(f"unknown graph kind {kind!r}") from None
    return builder(*sizes)

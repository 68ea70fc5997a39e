"""Finite rooted graphs, tail attachment and the plain-text edge-list format.

Vertices are labeled ``1..n``. When a tail is attached its sites are
labeled ``n+1, n+2, ...`` and the first of them is joined to the root.

File format::

    # comment
    n m
    u v            (m lines)
    loop u weight  (optional, any number)
    root r
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .errors import GraphError, GraphParseError


@dataclass(frozen=True)
class FiniteGraph:
    """Simple undirected connected graph with optional weighted self-loops."""

    n: int
    edges: frozenset = field(default_factory=frozenset)
    loops: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise GraphError(f"vertex count must be a positive integer, got {self.n!r}")
        normalized = set()
        for edge in self.edges:
            u, v = (int(x) for x in edge)
            if u == v:
                raise GraphError(f"edge ({u},{v}) is a self-loop; use loops instead")
            for x in (u, v):
                if not 1 <= x <= self.n:
                    raise GraphError(f"edge endpoint {x} outside 1..{self.n}")
            pair = (min(u, v), max(u, v))
            if pair in normalized:
                raise GraphError(f"duplicate edge {pair}")
            normalized.add(pair)
        loops = {}
        for u, weight in dict(self.loops).items():
            u, weight = int(u), float(weight)
            if not 1 <= u <= self.n:
                raise GraphError(f"loop vertex {u} outside 1..{self.n}")
            if not math.isfinite(weight):
                raise GraphError(f"loop weight at {u} is not finite")
            loops[u] = weight
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", frozenset(normalized))
        object.__setattr__(self, "loops", dict(sorted(loops.items())))
        if not self.is_connected():
            raise GraphError("graph is not connected")

    def neighbors(self, u: int) -> list[int]:
        return sorted(v for e in self.edges if u in e for v in e if v != u)

    def degrees(self) -> np.ndarray:
        """Degree of each vertex (index 0 holds vertex 1); loops not counted."""
        deg = np.zeros(self.n, dtype=int)
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return deg

    def degree(self, u: int) -> int:
        return int(self.degrees()[u - 1])

    def regular_degree(self) -> int | None:
        """Common degree if the graph is regular, else ``None``."""
        deg = self.degrees()
        return int(deg[0]) if np.all(deg == deg[0]) else None

    def adjacency(self) -> np.ndarray:
        """Dense symmetric adjacency matrix, loop weights on the diagonal."""
        A = np.zeros((self.n, self.n))
        if self.edges:
            idx = np.array(sorted(self.edges)) - 1
            A[idx[:, 0], idx[:, 1]] = 1.0
            A[idx[:, 1], idx[:, 0]] = 1.0
        for u, weight in self.loops.items():
            A[u - 1, u - 1] = weight
        return A

    def is_connected(self) -> bool:
        adj: dict[int, list[int]] = {u: [] for u in range(1, self.n + 1)}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {1}
        queue = deque([1])
        while queue:
            for v in adj[queue.popleft()]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == self.n


@dataclass(frozen=True)
class RootedGraph:
    graph: FiniteGraph
    root: int | None = None

    def __post_init__(self):
        root = self.graph.n if self.root is None else int(self.root)
        if not 1 <= root <= self.graph.n:
            raise GraphError(f"root {root} outside 1..{self.graph.n}")
        object.__setattr__(self, "root", root)

    @property
    def n(self) -> int:
        return self.graph.n


@dataclass(frozen=True)
class TailedSystem:
    """A rooted graph, optionally with a semi-infinite path hanging off the root."""

    rooted: RootedGraph
    tail_present: bool = True

    @property
    def graph(self) -> FiniteGraph:
        return self.rooted.graph

    @property
    def n(self) -> int:
        return self.rooted.graph.n

    @property
    def root(self) -> int:
        return self.rooted.root


@dataclass(frozen=True)
class OracleSpec:
    """Marked vertex ``w`` carrying an extra self-loop of weight ``gamma``."""

    w: int
    gamma: float

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise GraphError(f"oracle weight must be finite and >= 0, got {self.gamma}")
        object.__setattr__(self, "w", int(self.w))
        object.__setattr__(self, "gamma", float(self.gamma))

    def check(self, n: int) -> None:
        if not 1 <= self.w <= n:
            raise GraphError(f"oracle vertex {self.w} outside 1..{n}")


def make_complete(n: int) -> FiniteGraph:
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    return FiniteGraph(n, frozenset(combinations(range(1, n + 1), 2)))


def make_cycle(n: int) -> FiniteGraph:
    if n < 3:
        raise GraphError(f"cycle needs n >= 3, got {n}")
    return FiniteGraph(n, frozenset((k, k % n + 1) for k in range(1, n + 1)))


def make_path(n: int) -> FiniteGraph:
    return FiniteGraph(n, frozenset((k, k + 1) for k in range(1, n)))


def make_star(leaves: int) -> FiniteGraph:
    """K_{1,leaves} with the center labeled ``leaves + 1``."""
    center = leaves + 1
    return FiniteGraph(center, frozenset((k, center) for k in range(1, center)))


def make_cone(g: FiniteGraph) -> RootedGraph:
    """Join a new conical vertex ``n+1`` to every vertex of ``g``; it becomes the root."""
    apex = g.n + 1
    edges = set(g.edges) | {(u, apex) for u in range(1, apex)}
    return RootedGraph(FiniteGraph(apex, frozenset(edges), g.loops), root=apex)


def attach_tail(rooted: RootedGraph) -> TailedSystem:
    return TailedSystem(rooted, tail_present=True)


def without_tail(rooted: RootedGraph) -> TailedSystem:
    return TailedSystem(rooted, tail_present=False)


def lollipop(n: int) -> TailedSystem:
    """K_n with the tail attached at vertex ``n``."""
    return attach_tail(RootedGraph(make_complete(n)))


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_graph(text: str) -> RootedGraph:
    lines = [(num, _strip(raw)) for num, raw in enumerate(text.splitlines(), start=1)]
    lines = [(num, body) for num, body in lines if body]
    if not lines:
        raise GraphParseError(1, "empty graph file")

    header_line, header = lines[0]
    try:
        n, m = (int(tok) for tok in header.split())
    except ValueError:
        raise GraphParseError(header_line, f"expected 'n m', got {header!r}") from None
    if n < 1 or m < 0:
        raise GraphParseError(header_line, "n must be positive and m non-negative")

    def vertex(tok: str, num: int) -> int:
        try:
            u = int(tok)
        except ValueError:
            raise GraphParseError(num, f"vertex {tok!r} is not an integer") from None
        if not 1 <= u <= n:
            raise GraphParseError(num, f"vertex {u} outside 1..{n}")
        return u

    edges: set[tuple[int, int]] = set()
    loops: dict[int, float] = {}
    root = None
    body = lines[1:]
    for pos, (num, text_line) in enumerate(body):
        tokens = text_line.split()
        if root is not None:
            raise GraphParseError(num, "content after the root line")
        if tokens[0] == "root":
            if len(tokens) != 2:
                raise GraphParseError(num, "expected 'root r'")
            root = vertex(tokens[1], num)
            root_line = num
        elif tokens[0] == "loop":
            if len(tokens) != 3:
                raise GraphParseError(num, "expected 'loop u weight'")
            u = vertex(tokens[1], num)
            try:
                weight = float(tokens[2])
            except ValueError:
                raise GraphParseError(num, f"loop weight {tokens[2]!r} is not a number") from None
            if not math.isfinite(weight):
                raise GraphParseError(num, "loop weight must be finite")
            if u in loops:
                raise GraphParseError(num, f"second loop on vertex {u}")
            loops[u] = weight
        else:
            if len(tokens) != 2:
                raise GraphParseError(num, f"expected 'u v', got {text_line!r}")
            u, v = vertex(tokens[0], num), vertex(tokens[1], num)
            if u == v:
                raise GraphParseError(num, "self-edge; use 'loop u weight'")
            pair = (min(u, v), max(u, v))
            if pair in edges:
                raise GraphParseError(num, f"duplicate edge {pair}")
            edges.add(pair)
    if root is None:
        raise GraphParseError(lines[-1][0], "missing 'root r' line")
    if len(edges) != m:
        raise GraphParseError(header_line, f"header declares {m} edges, found {len(edges)}")
    try:
        graph = FiniteGraph(n, frozenset(edges), loops)
    except GraphError as exc:
        raise GraphParseError(header_line, str(exc)) from None
    return RootedGraph(graph, root)


def serialize_graph(rooted: RootedGraph) -> str:
    g = rooted.graph
    out = [f"{g.n} {len(g.edges)}"]
    out += [f"{u} {v}" for u, v in sorted(g.edges)]
    out += [f"loop {u} {weight!r}" for u, weight in g.loops.items()]
    out.append(f"root {rooted.root}")
    return "\n".join(out) + "\n"


def graph_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> FiniteGraph:
    return FiniteGraph(n, frozenset(tuple(e) for e in edges))

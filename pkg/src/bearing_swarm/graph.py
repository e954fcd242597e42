"""Interaction topology: undirected graph with anchors and its oriented incidence matrix.

Vertex ids are 1-based everywhere in the public API. Each undirected edge is
stored once as ``(i, j)`` with ``i < j``; the smaller id is the tail.
"""

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidGraph

# Reconstruction of the 7-agent interaction topology: a triangulation of the
# hexagon-like formation, containing edge (2, 4). Anchors are agents 1 and 7.
DEFAULT_EDGES = (
    (1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (2, 5),
    (4, 5), (3, 6), (4, 6), (5, 6), (5, 7), (6, 7),
)
DEFAULT_ANCHORS = (1, 7)


@dataclass(frozen=True)
class FormationGraph:
    """Undirected graph on vertices ``1..n`` with a nonempty anchor subset.

    ``require_connected=False`` skips the connectivity check; it exists so
    tests can build degenerate graphs (e.g. no edges, every agent anchored).
    """

    n: int
    edges: tuple
    anchors: tuple
    require_connected: bool = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidGraph(f"vertex count must be an integer >= 2, got {self.n}")
        edges = []
        seen = set()
        for e in self.edges:
            if len(e) != 2:
                raise InvalidGraph(f"edge {e!r} is not a pair")
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise InvalidGraph(f"self-loop at vertex {i}")
            for v in (i, j):
                if not 1 <= v <= self.n:
                    raise InvalidGraph(f"edge ({i}, {j}) references vertex outside 1..{self.n}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InvalidGraph(f"duplicate edge {key}")
            seen.add(key)
            edges.append(key)
        anchors = tuple(sorted({int(a) for a in self.anchors}))
        if not anchors:
            raise InvalidGraph("anchor set must be nonempty")
        for a in anchors:
            if not 1 <= a <= self.n:
                raise InvalidGraph(f"anchor {a} outside 1..{self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "anchors", anchors)
        if self.require_connected and not is_connected(self):
            raise InvalidGraph("graph is not connected")

    @property
    def m(self):
        return len(self.edges)

    def neighbors(self, i):
        return neighbors(self, i)

    def incidence_matrix(self):
        return incidence_matrix(self)

    def is_anchor(self, i):
        return i in self.anchors

    def edge_index_arrays(self):
        """0-based (tail, head) index arrays, one entry per edge."""
        return self._tail_head

    @cached_property
    def _tail_head(self):
        if not self.edges:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
        arr = np.asarray(self.edges, dtype=int) - 1
        return arr[:, 0], arr[:, 1]

    @cached_property
    def incidence_T(self):
        """Transposed incidence matrix, cached for the simulator's hot path."""
        return incidence_matrix(self).T

    @cached_property
    def anchor_index(self):
        return np.asarray(self.anchors, dtype=int) - 1


def default_topology():
    return FormationGraph(7, DEFAULT_EDGES, DEFAULT_ANCHORS)


def _check_vertex(g, i):
    if int(i) != i or not 1 <= i <= g.n:
        raise IndexError(f"vertex id {i} outside 1..{g.n}")


def neighbors(g, i):
    _check_vertex(g, i)
    out = set()
    for a, b in g.edges:
        if a == i:
            out.add(b)
        elif b == i:
            out.add(a)
    return sorted(out)


def incidence_matrix(g):
    """m x n matrix with -1 at the tail and +1 at the head of each edge."""
    H = np.zeros((g.m, g.n))
    for k, (i, j) in enumerate(g.edges):
        H[k, i - 1] = -1.0
        H[k, j - 1] = 1.0
    return H


def is_connected(g):
    adj = {v: [] for v in range(1, g.n + 1)}
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {1}
    queue = deque([1])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == g.n

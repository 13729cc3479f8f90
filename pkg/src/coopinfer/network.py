"""
Agent graphs, mixing matrices and the consensus deviation bound.

Agents are indexed from 0 internally. Edge-list files and all
human-readable messages use 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ROW_TOL = 1e-12
PRODUCT_TOL = 1e-10


class DisconnectedGraphError(ValueError):
    """Raised when an operation needs a connected graph and gets one that is not."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on ``n`` agents.

    Parameters
    ----------
    n : int
        Number of agents.
    edges : iterable of (int, int)
        Unordered 0-based pairs. Stored normalised as ``(min, max)``.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"agent count must be a positive integer, got {self.n!r}")
        normed = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ValueError(f"self-loop at agent {i + 1}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i + 1}, {j + 1}) has an endpoint outside 1..{self.n}")
            normed.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(normed))

    @classmethod
    def from_edges(cls, n, edges, one_indexed=False):
        shift = 1 if one_indexed else 0
        return cls(n, frozenset((i - shift, j - shift) for i, j in edges))

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = True
        return adj

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def components(self) -> list[list[int]]:
        """Connected components as sorted lists of 0-based agents."""
        adj = self.adjacency()
        seen = np.zeros(self.n, dtype=bool)
        comps = []
        for start in range(self.n):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in np.flatnonzero(adj[u] & ~seen):
                    seen[v] = True
                    stack.append(int(v))
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1


def cycle_graph(n):
    if n < 3:
        return path_graph(n)
    return Graph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def path_graph(n):
    return Graph(n, frozenset((i, i + 1) for i in range(n - 1)))


def complete_graph(n):
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


def star_graph(n):
    """Agent 1 at the hub, joined to every other agent."""
    return Graph(n, frozenset((0, j) for j in range(1, n)))


GENERATORS = {
    "cycle": cycle_graph,
    "path": path_graph,
    "complete": complete_graph,
    "star": star_graph,
}


def load_edge_list(path) -> Graph:
    """Read a graph from a text file: first line ``n``, then ``i j`` per line (1-based)."""
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty edge-list file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValueError(f"{path}: first line must be the agent count, got {lines[0]!r}") from None
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: line {lineno}: expected 'i j', got {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Graph.from_edges(n, edges, one_indexed=True)


def write_edge_list(graph: Graph, path) -> None:
    rows = [str(graph.n)] + [f"{i + 1} {j + 1}" for i, j in sorted(graph.edges)]
    Path(path).write_text("\n".join(rows) + "\n")


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Weight matrix ``A`` used for geometric pooling of neighbour beliefs.

    The array is copied and made read-only. Only shape and entry range are
    checked here; use :func:`validate_mixing` for the graph assumptions.
    """

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"mixing matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("mixing matrix has non-finite entries")
        if np.any(a < 0) or np.any(a > 1):
            raise ValueError("mixing weights must lie in [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def eta(self) -> float:
        """Smallest strictly positive entry."""
        return float(self.a[self.a > 0].min())

    def contraction(self, scale=4.0) -> float:
        """``1 - eta / (scale * n**2)``.

        ``scale=4`` is the consensus-lemma constant and the default
        everywhere; ``scale=1`` gives the form printed in the theorem
        statements.
        """
        return 1.0 - self.eta / (scale * self.n**2)

    @property
    def delta(self) -> float:
        return self.contraction()

    def __eq__(self, other):
        return isinstance(other, MixingMatrix) and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash(self.a.tobytes())


def build_lazy_metropolis(g: Graph) -> MixingMatrix:
    """Lazy Metropolis weights ``1 / (2 max(d_i + 1, d_j + 1))`` on each edge.

    The diagonal absorbs the remaining row mass.

    Raises
    ------
    DisconnectedGraphError
        If ``g`` has more than one connected component.
    """
    comps = g.components()
    if len(comps) > 1:
        shown = ", ".join("{" + ", ".join(str(v + 1) for v in c) + "}" for c in comps)
        raise DisconnectedGraphError(
            f"graph is disconnected: {len(comps)} components {shown}"
        )
    deg = g.degrees()
    a = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w = 1.0 / (2.0 * max(deg[i] + 1, deg[j] + 1))
        a[i, j] = a[j, i] = w
    a[np.diag_indices(g.n)] = 1.0 - a.sum(axis=1)
    return MixingMatrix(a)


@dataclass(frozen=True)
class Violation:
    clause: str
    message: str
    indices: tuple = ()

    def __str__(self):
        return f"[{self.clause}] {self.message}"


def validate_mixing(a: MixingMatrix, g: Graph, tol=ROW_TOL) -> list[Violation]:
    """Check double stochasticity, positive diagonal, sparsity and connectivity.

    Returns an empty list when every clause holds. Each violation names the
    clause and the offending (1-based) indices.
    """
    if a.n != g.n:
        raise ValueError(f"dimension mismatch: matrix is {a.n}x{a.n}, graph has {g.n} agents")
    out = []
    m = a.a
    for i, s in enumerate(m.sum(axis=1)):
        if abs(s - 1.0) > tol:
            out.append(Violation("1(a) row sums", f"row {i + 1} sums to {float(s)!r}", (i + 1,)))
    for j, s in enumerate(m.sum(axis=0)):
        if abs(s - 1.0) > tol:
            out.append(Violation("1(a) column sums", f"column {j + 1} sums to {float(s)!r}", (j + 1,)))
    adj = g.adjacency()
    for i in range(g.n):
        for j in range(g.n):
            if i == j:
                continue
            if adj[i, j] and m[i, j] <= 0:
                out.append(Violation(
                    "1(a) sparsity",
                    f"a_{i + 1}{j + 1} = 0 but ({i + 1},{j + 1}) is an edge",
                    (i + 1, j + 1),
                ))
            elif not adj[i, j] and m[i, j] > 0:
                out.append(Violation(
                    "1(a) sparsity",
                    f"a_{i + 1}{j + 1} = {float(m[i, j])!r} > 0 but ({i + 1},{j + 1}) is not an edge",
                    (i + 1, j + 1),
                ))
    for i in range(g.n):
        if m[i, i] <= 0:
            out.append(Violation("1(b) diagonal", f"a_{i + 1}{i + 1} = {float(m[i, i])!r}", (i + 1,)))
    comps = g.components()
    if len(comps) > 1:
        out.append(Violation(
            "1(c) connectivity",
            f"graph has {len(comps)} components",
            tuple(tuple(v + 1 for v in c) for c in comps),
        ))
    return out


def backward_products(a: MixingMatrix, k: int) -> np.ndarray:
    """Stack of ``A^(k-t)`` for ``t = 1..k``, shape ``(k, n, n)``.

    The first slice is ``A^(k-1)``, the last the identity.
    """
    if k < 1:
        raise ValueError(f"horizon must be >= 1, got {k}")
    out = np.empty((k, a.n, a.n))
    p = np.eye(a.n)
    for t in range(k - 1, -1, -1):
        out[t] = p
        p = p @ a.a
    return out


def consensus_deviation(a: MixingMatrix, k: int) -> np.ndarray:
    """Per-row ``sum_t sum_j |[A^(k-t)]_ij - 1/n|`` by direct summation."""
    n = a.n
    total = np.zeros(n)
    p = np.eye(n)
    for _ in range(k):
        total += np.abs(p - 1.0 / n).sum(axis=1)
        p = p @ a.a
    return total


def deviation_bound(a: MixingMatrix, scale=4.0) -> float:
    """Upper bound ``4 log(n) / (1 - delta)`` on :func:`consensus_deviation`."""
    if a.n == 1:
        return 0.0
    return 4.0 * np.log(a.n) / (1.0 - a.contraction(scale))

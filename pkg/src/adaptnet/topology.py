"""Undirected graphs on which filtering and strategy evolution run.

Degrees follow the self-inclusive convention used throughout the package:
``degree(i)`` counts node ``i`` itself, so an isolated node has degree 1 and
every node on a ring has degree 3.  ``neighbors(i)`` excludes ``i``;
``neighborhood(i)`` includes it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform


class TopologyError(ValueError):
    """Raised for invalid graph parameters or graphs that fail validation."""


@dataclass(frozen=True)
class Topology:
    node_count: int
    edges: tuple[tuple[int, int], ...]
    name: str = field(default="graph", compare=False)

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise TopologyError(f"node_count must be positive, got {self.node_count}")
        canon = set()
        for a, b in self.edges:
            if a == b:
                raise TopologyError(f"self-loop on node {a}")
            if not (0 <= a < self.node_count and 0 <= b < self.node_count):
                raise TopologyError(f"edge ({a}, {b}) out of range for N={self.node_count}")
            canon.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]], name: str = "graph",
                   require_connected: bool = True) -> "Topology":
        topo = cls(int(node_count), tuple((int(a), int(b)) for a, b in edges), name=name)
        if require_connected and not topo.is_connected():
            raise TopologyError(f"{name}: graph with N={node_count} is not connected")
        return topo

    @cached_property
    def _adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(nb)) for nb in adj)

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Adjacent nodes of ``i``, excluding ``i``."""
        return self._adjacency[i]

    def neighborhood(self, i: int) -> tuple[int, ...]:
        """N_i: the neighbors of ``i`` together with ``i`` itself, sorted."""
        return tuple(sorted(self._adjacency[i] + (i,)))

    def degree(self, i: int) -> int:
        """Self-inclusive degree n_i = |N_i|."""
        return len(self._adjacency[i]) + 1

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([self.degree(i) for i in range(self.node_count)], dtype=np.int64)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    @property
    def is_regular(self) -> bool:
        return bool(self.degrees.min() == self.degrees.max())

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) neighbor lists, self excluded, for compiled kernels."""
        counts = np.array([len(nb) for nb in self._adjacency], dtype=np.int64)
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = np.fromiter((j for nb in self._adjacency for j in nb), dtype=np.int64,
                              count=int(indptr[-1]))
        return indptr, indices

    @cached_property
    def support(self) -> np.ndarray:
        """Boolean N x N mask of closed neighborhoods (adjacency plus diagonal)."""
        mask = self.adjacency_matrix(self_loops=True)
        mask.flags.writeable = False
        return mask

    def adjacency_matrix(self, self_loops: bool = False) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        if self_loops:
            np.fill_diagonal(a, True)
        return a

    def is_connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            cur = queue.popleft()
            for nb in self._adjacency[cur]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        return len(seen) == self.node_count

    def write_edgelist(self, path: str | Path) -> None:
        lines = [str(self.node_count)] + [f"{a} {b}" for a, b in self.edges]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def read_edgelist(cls, path: str | Path, name: str | None = None) -> "Topology":
        """Load the ``N`` / ``i j`` text format; the result must be connected."""
        text = Path(path).read_text(encoding="utf-8").splitlines()
        rows = [(k, ln.split()) for k, ln in enumerate(text, start=1)]
        rows = [(k, r) for k, r in rows if r and not r[0].startswith("#")]
        if not rows or len(rows[0][1]) != 1:
            raise TopologyError(f"{path}: first line must hold the node count")
        n = int(rows[0][1][0])
        edges = []
        for lineno, r in rows[1:]:
            if len(r) != 2:
                raise TopologyError(f"{path}:{lineno}: expected 'i j', got {' '.join(r)!r}")
            a, b = int(r[0]), int(r[1])
            if a >= b:
                raise TopologyError(f"{path}:{lineno}: edges must be written with i < j")
            edges.append((a, b))
        return cls.from_edges(n, edges, name=name or Path(path).stem)


def regular_circulant(N: int, offsets: Sequence[int]) -> Topology:
    """Circulant graph: node i links to i +/- k (mod N) for every k in ``offsets``.

    An offset of exactly N/2 (N even) adds a single antipodal neighbor.
    """
    if N < 3:
        raise TopologyError(f"circulant graph needs N >= 3, got {N}")
    offs = [int(k) for k in offsets]
    if not offs:
        raise TopologyError("at least one offset is required")
    if len(set(offs)) != len(offs):
        raise TopologyError(f"duplicate offsets in {offs}")
    for k in offs:
        if k <= 0 or 2 * k > N:
            raise TopologyError(f"offset {k} outside 1..N/2 for N={N}")
    if math.gcd(N, *offs) != 1:
        raise TopologyError(f"offsets {offs} with N={N} give a disconnected graph")
    edges = {(min(i, (i + k) % N), max(i, (i + k) % N)) for i in range(N) for k in offs}
    return Topology.from_edges(N, edges, name=f"circulant_N{N}_" + "_".join(map(str, offs)))


def complete_graph(N: int) -> Topology:
    if N < 2:
        raise TopologyError(f"complete graph needs N >= 2, got {N}")
    edges = [(i, j) for i in range(N) for j in range(i + 1, N)]
    return Topology.from_edges(N, edges, name=f"complete_N{N}")


def grid_torus(rows: int, cols: int) -> Topology:
    """rows x cols lattice with wraparound; every node has 4 neighbors."""
    if rows < 3 or cols < 3:
        raise TopologyError(f"torus needs rows, cols >= 3, got {rows}x{cols}")

    def idx(r: int, c: int) -> int:
        return (r % rows) * cols + (c % cols)

    edges = set()
    for r in range(rows):
        for c in range(cols):
            here = idx(r, c)
            for other in (idx(r + 1, c), idx(r, c + 1)):
                edges.add((min(here, other), max(here, other)))
    return Topology.from_edges(rows * cols, edges, name=f"torus_{rows}x{cols}")


def random_geometric(N: int, radius: float, seed: int, max_retries: int = 1000) -> Topology:
    """Uniform points in the unit square, linked when within ``radius``.

    Point sets are redrawn from the same seeded stream until the graph is
    connected, so a given (N, radius, seed) always yields the same edges.
    """
    if not 0 < radius <= math.sqrt(2):
        raise TopologyError(f"radius must lie in (0, sqrt(2)], got {radius}")
    if N < 1:
        raise TopologyError(f"N must be positive, got {N}")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        pts = rng.random((N, 2))
        if N == 1:
            return Topology.from_edges(1, [], name=f"rgg_N1_seed{seed}")
        close = squareform(pdist(pts)) <= radius
        edges = [(i, j) for i in range(N) for j in range(i + 1, N) if close[i, j]]
        topo = Topology.from_edges(N, edges, name=f"rgg_N{N}_r{radius:g}_seed{seed}",
                                   require_connected=False)
        if topo.is_connected():
            return topo
    raise TopologyError(f"no connected geometric graph with N={N}, radius={radius} "
                        f"after {max_retries} draws")

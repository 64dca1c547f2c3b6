"""Explicit constructions of hierarchical graphs H(n, k) and Sierpinski graphs S(n, k).

Both families have ``k**n`` vertices and ``(k**(n+1) - k) // 2`` edges.
Edge lists are stored as an ``(E, 2)`` integer array with ``u < v`` in every
row, sorted lexicographically, so two builds of the same spec are identical.
"""

from __future__ import annotations

import enum
import json
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import BudgetExceededError

__all__ = [
    "DEFAULT_DENSE_BUDGET",
    "DEFAULT_VERTEX_BUDGET",
    "Family",
    "Graph",
    "GraphSpec",
    "bfs_diameter",
    "build_graph",
    "build_hierarchical",
    "build_sierpinski",
    "degree_histogram",
    "hierarchical_degree_counts",
    "is_connected",
    "laplacian_dense",
    "laplacian_sparse",
    "read_edgelist",
    "read_json",
    "write_edgelist",
    "write_json",
]

DEFAULT_VERTEX_BUDGET = 2_000_000
DEFAULT_DENSE_BUDGET = 3_000
# all-pairs BFS is O(N * E); keep it to oracle-scale graphs
DIAMETER_BUDGET = 20_000


class Family(str, enum.Enum):
    HIERARCHICAL = "hierarchical"
    SIERPINSKI = "sierpinski"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        key = str(value).strip().lower()
        aliases = {
            "h": cls.HIERARCHICAL,
            "hier": cls.HIERARCHICAL,
            "hierarchical": cls.HIERARCHICAL,
            "s": cls.SIERPINSKI,
            "sier": cls.SIERPINSKI,
            "sierpinski": cls.SIERPINSKI,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown graph family {value!r}") from None

    @property
    def short(self) -> str:
        return "hier" if self is Family.HIERARCHICAL else "sier"


@dataclass(frozen=True)
class GraphSpec:
    """Which family, generation ``n`` and branching ``k``."""

    family: Family
    n: int
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family.parse(self.family))
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"generation n must be an integer >= 1, got {self.n!r}")
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 3:
            raise ValueError(f"branching k must be an integer >= 3, got {self.k!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))

    @property
    def num_vertices(self) -> int:
        return self.k**self.n

    @property
    def num_edges(self) -> int:
        return (self.k ** (self.n + 1) - self.k) // 2

    def check_budget(self, budget: int = DEFAULT_VERTEX_BUDGET) -> None:
        if self.num_vertices > budget:
            raise BudgetExceededError(
                f"{self.family.value}(n={self.n}, k={self.k}) has {self.num_vertices} "
                f"vertices, budget is {budget}"
            )

    def to_dict(self) -> dict:
        return {"family": self.family.value, "n": self.n, "k": self.k}

    def __str__(self) -> str:
        return f"{self.family.short}(n={self.n}, k={self.k})"


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices ``0 .. num_vertices - 1``.

    Attributes
    ----------
    spec : GraphSpec
        Descriptor the graph was built from.
    num_vertices : int
    edges : ndarray of shape (E, 2)
        Canonical edge list, ``edges[:, 0] < edges[:, 1]``, lexicographically sorted.
    degrees : ndarray of shape (N,)
    """

    spec: GraphSpec
    num_vertices: int
    edges: np.ndarray
    degrees: np.ndarray

    @classmethod
    def from_edges(cls, spec: GraphSpec, num_vertices: int, edges) -> "Graph":
        """Canonicalise an arbitrary edge list (no validation of family invariants)."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        e = np.sort(e, axis=1)
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
        degrees = np.bincount(e.ravel(), minlength=num_vertices).astype(np.int64)
        e.setflags(write=False)
        degrees.setflags(write=False)
        return cls(spec, int(num_vertices), e, degrees)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def labels(self) -> np.ndarray:
        """Per-vertex labels.

        Sierpinski vertices get their n-tuple over ``{1..k}`` (one row per
        vertex, most significant symbol first); hierarchical vertices are
        labelled by construction order, i.e. the vertex index itself.
        """
        n, k = self.spec.n, self.spec.k
        idx = np.arange(self.num_vertices, dtype=np.int64)
        if self.spec.family is Family.HIERARCHICAL:
            return idx
        powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
        return (idx[:, None] // powers[None, :]) % k + 1

    def neighbors(self) -> list[np.ndarray]:
        csr = self.adjacency()
        return [csr.indices[csr.indptr[v] : csr.indptr[v + 1]] for v in range(self.num_vertices)]

    def adjacency(self) -> sp.csr_matrix:
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(u), dtype=np.float64)
        a = sp.coo_matrix(
            (data, (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(self.num_vertices, self.num_vertices),
        )
        return a.tocsr()

    def validate(self) -> None:
        """Check the structural invariants shared by both families."""
        e = self.edges
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("graph has a self-loop")
        # rows are sorted, so duplicates are adjacent
        if len(e) > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise ValueError("graph has duplicate edges")
        if self.num_vertices != self.spec.num_vertices:
            raise ValueError("vertex count differs from k**n")
        if self.num_edges != self.spec.num_edges:
            raise ValueError("edge count differs from (k**(n+1) - k) / 2")
        if int(self.degrees.sum()) != 2 * self.num_edges:
            raise ValueError("degree sum differs from twice the edge count")
        if not is_connected(self):
            raise ValueError("graph is not connected")


def build_hierarchical(spec: GraphSpec, budget: int = DEFAULT_VERTEX_BUDGET) -> Graph:
    """Build H(n, k) by iterative vertex expansion.

    ``H(1, k)`` is the clique ``K_k`` on vertices ``0..k-1``.  Each further
    generation gives every existing vertex ``m`` a fresh ``K_{k-1}`` whose
    vertices are all joined to ``m``.  The new vertices of mother ``m`` get
    indices ``old + m*(k-1) + j`` for ``j < k-1``, so the generation-1 clique
    vertices are the hubs.
    """
    if spec.family is not Family.HIERARCHICAL:
        raise ValueError(f"build_hierarchical needs a hierarchical spec, got {spec}")
    spec.check_budget(budget)
    n, k = spec.n, spec.k

    a, b = np.triu_indices(k, 1)
    chunks = [np.stack([a, b], axis=1)]
    ca, cb = np.triu_indices(k - 1, 1)
    old = k
    for _ in range(2, n + 1):
        mothers = np.arange(old, dtype=np.int64)
        base = old + mothers * (k - 1)
        kids = base[:, None] + np.arange(k - 1, dtype=np.int64)[None, :]
        spokes = np.stack([np.repeat(mothers, k - 1), kids.ravel()], axis=1)
        clique = np.stack([(base[:, None] + ca).ravel(), (base[:, None] + cb).ravel()], axis=1)
        chunks += [spokes, clique]
        old *= k
    return Graph.from_edges(spec, old, np.concatenate(chunks))


def build_sierpinski(spec: GraphSpec, budget: int = DEFAULT_VERTEX_BUDGET) -> Graph:
    """Build S(n, k) on the n-tuples over ``{1..k}``.

    ``p`` and ``q`` are adjacent iff for some position ``h``: they agree before
    ``h``, differ at ``h``, and every later symbol of ``p`` equals ``q[h]``
    while every later symbol of ``q`` equals ``p[h]``.  Rather than test all
    pairs, the edges are generated directly from that shape: prefix, then
    ``i j j ... j`` against ``j i i ... i``.

    Vertex index is the base-k value of the 0-based tuple, first symbol most
    significant.
    """
    if spec.family is not Family.SIERPINSKI:
        raise ValueError(f"build_sierpinski needs a Sierpinski spec, got {spec}")
    spec.check_budget(budget)
    n, k = spec.n, spec.k

    pi, qi = np.triu_indices(k, 1)
    chunks = []
    for t in range(n):  # t = number of shared leading symbols
        rest = n - t - 1
        head = k ** (rest + 1)
        lead = k**rest
        repunit = (k**rest - 1) // (k - 1)
        prefixes = np.arange(k**t, dtype=np.int64)[:, None] * head
        u = prefixes + pi * lead + qi * repunit
        v = prefixes + qi * lead + pi * repunit
        chunks.append(np.stack([u.ravel(), v.ravel()], axis=1))
    return Graph.from_edges(spec, k**n, np.concatenate(chunks))


def build_graph(spec: GraphSpec, budget: int = DEFAULT_VERTEX_BUDGET) -> Graph:
    if spec.family is Family.HIERARCHICAL:
        return build_hierarchical(spec, budget)
    return build_sierpinski(spec, budget)


def degree_histogram(g: Graph) -> dict[int, int]:
    values, counts = np.unique(g.degrees, return_counts=True)
    return {int(d): int(c) for d, c in zip(values, counts)}


def _bfs_distances(neigh: list[np.ndarray], source: int, n: int) -> np.ndarray:
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in neigh[u]:
            if dist[w] < 0:
                dist[w] = du
                queue.append(w)
    return dist


def is_connected(g: Graph) -> bool:
    if g.num_vertices == 0:
        return True
    ncomp, _ = connected_components(g.adjacency(), directed=False)
    return ncomp == 1


def bfs_diameter(g: Graph, budget: int = DIAMETER_BUDGET) -> int:
    """Exact diameter by a BFS from every vertex."""
    if g.num_vertices > budget:
        raise BudgetExceededError(
            f"all-pairs BFS on {g.num_vertices} vertices exceeds budget {budget}"
        )
    neigh = g.neighbors()
    best = 0
    for s in range(g.num_vertices):
        dist = _bfs_distances(neigh, s, g.num_vertices)
        if np.any(dist < 0):
            raise ValueError("diameter of a disconnected graph is undefined")
        best = max(best, int(dist.max()))
    return best


def laplacian_dense(g: Graph, budget: int = DEFAULT_DENSE_BUDGET) -> np.ndarray:
    """``L = D - A`` as a dense float64 matrix."""
    if g.num_vertices > budget:
        raise BudgetExceededError(
            f"dense Laplacian of {g.num_vertices} vertices exceeds budget {budget}"
        )
    lap = np.zeros((g.num_vertices, g.num_vertices))
    u, v = g.edges[:, 0], g.edges[:, 1]
    lap[u, v] = -1.0
    lap[v, u] = -1.0
    lap[np.diag_indices_from(lap)] = g.degrees
    return lap


def laplacian_sparse(g: Graph) -> sp.csr_matrix:
    return (sp.diags(g.degrees.astype(np.float64)) - g.adjacency()).tocsr()


# -- file formats -------------------------------------------------------------

def _header(g: Graph) -> str:
    s = g.spec
    return (
        f"# family={s.family.value} n={s.n} k={s.k} "
        f"num_vertices={g.num_vertices} num_edges={g.num_edges}"
    )


def write_edgelist(g: Graph, path) -> None:
    """One ``u v`` pair per line (0-based), after a one-line header comment."""
    lines = [_header(g)]
    lines.extend(f"{u} {v}" for u, v in g.edges.tolist())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edgelist(path) -> Graph:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError("edge-list file lacks its header comment")
    fields = dict(item.split("=", 1) for item in text[0][1:].split())
    spec = GraphSpec(fields["family"], int(fields["n"]), int(fields["k"]))
    rows = [line.split() for line in text[1:] if line.strip() and not line.startswith("#")]
    edges = np.array(rows, dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(spec, int(fields["num_vertices"]), edges)


def to_json_dict(g: Graph) -> dict:
    return {
        "spec": g.spec.to_dict(),
        "num_vertices": g.num_vertices,
        "edges": g.edges.tolist(),
    }


def write_json(g: Graph, path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(g)) + "\n", encoding="utf-8")


def read_json(path) -> Graph:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    s = payload["spec"]
    spec = GraphSpec(s["family"], s["n"], s["k"])
    return Graph.from_edges(spec, payload["num_vertices"], payload["edges"])


def hierarchical_degree_counts(n: int, k: int) -> dict[int, int]:
    """Degree histogram of H(n, k) in closed form.

    ``k`` hubs of degree ``n(k-1)``, then ``(k-1) k**j`` vertices of degree
    ``(n-j)(k-1)`` for ``j = 1 .. n-1``.
    """
    counts = Counter({n * (k - 1): k})
    for j in range(1, n):
        counts[(n - j) * (k - 1)] += (k - 1) * k**j
    return dict(counts)

"""Directed communication graphs and the row/column-stochastic weight pair.

Nodes are labeled 1..n.  An edge (j, i) means "i receives from j".  Every
node always has an implicit self-loop; self-loops are never stored in the
edge set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionError, ConfigurationError, NumericalError

POWER_ITER_TOL = 1e-13
POWER_ITER_MAX = 100_000


@dataclass(frozen=True)
class DirectedGraph:
    """Directed graph on nodes 1..n with implicit self-loops.

    ``edges`` holds ordered pairs (j, i), j -> i, excluding self-loops.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"node count must be >= 1, got {self.n}")
        object.__setattr__(self, "edges", frozenset(self.edges))
        for j, i in self.edges:
            if not (1 <= j <= self.n and 1 <= i <= self.n):
                raise ConfigurationError(f"edge ({j}, {i}) out of range [1, {self.n}]")
            if j == i:
                raise ConfigurationError("self-loops are implicit; do not list them")

    def in_neighbors(self, i):
        """Nodes j with an edge j -> i, including i itself."""
        return sorted({j for j, t in self.edges if t == i} | {i})

    def reachable_from(self, r):
        """Set of nodes reachable from r along edge direction j -> i."""
        out = {}
        for j, i in self.edges:
            out.setdefault(j, []).append(i)
        seen = {r}
        stack = [r]
        while stack:
            v = stack.pop()
            for w in out.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def roots(self):
        """Nodes that reach every other node (spanning-tree roots)."""
        all_nodes = set(range(1, self.n + 1))
        return {r for r in all_nodes if self.reachable_from(r) == all_nodes}

    def reversed(self):
        return DirectedGraph(self.n, frozenset((i, j) for j, i in self.edges))

    def to_edge_list(self):
        """Serialize: first line n, then one 'j i' line per edge."""
        lines = [str(self.n)]
        lines += [f"{j} {i}" for j, i in sorted(self.edges)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text):
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ConfigurationError("empty edge-list")
        n = int(lines[0])
        edges = set()
        for ln in lines[1:]:
            j, i = (int(t) for t in ln.split())
            if (j, i) in edges:
                raise ConfigurationError(f"duplicate edge ({j}, {i})")
            edges.add((j, i))
        return cls(n, frozenset(edges))


@dataclass(frozen=True)
class WeightPair:
    """Row-stochastic A, column-stochastic B, Perron vectors and contraction factors."""

    A: np.ndarray
    B: np.ndarray
    u: np.ndarray  # left Perron vector of A, u^T 1 = n
    v: np.ndarray  # right Perron vector of B, 1^T v = n
    tau_A: float
    tau_B: float

    @property
    def n(self):
        return self.A.shape[0]


def generate_ring_plus_random(n, extra, seed):
    """Directed ring i -> i+1 (mod n) plus `extra` distinct random non-ring edges."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if extra < 0:
        raise ConfigurationError(f"extra must be >= 0, got {extra}")
    ring = {(i, i % n + 1) for i in range(1, n + 1) if i != i % n + 1}
    candidates = sorted(
        (j, i)
        for j in range(1, n + 1)
        for i in range(1, n + 1)
        if j != i and (j, i) not in ring
    )
    if extra > len(candidates):
        raise ConfigurationError(
            f"extra={extra} exceeds the {len(candidates)} available non-ring edges"
        )
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(candidates), size=extra, replace=False) if extra else []
    edges = ring | {candidates[int(c)] for c in picked}
    return DirectedGraph(n, frozenset(edges))


def check_assumption2(gA, gBt):
    """True iff both graphs have a spanning tree and their root sets intersect."""
    if gA.n != gBt.n:
        raise ConfigurationError("graphs must share the same node set")
    return bool(gA.roots() & gBt.roots())


def _perron_left(A):
    """Left eigenvector of A at eigenvalue 1, normalized u^T 1 = n."""
    n = A.shape[0]
    u = np.ones(n)
    for _ in range(POWER_ITER_MAX):
        nxt = A.T @ u
        s = nxt.sum()
        if s <= 0:
            raise NumericalError("power iteration collapsed to zero vector")
        nxt *= n / s
        if np.max(np.abs(nxt - u)) < POWER_ITER_TOL:
            u = nxt
            break
        u = nxt
    else:
        raise NumericalError(
            f"Perron power iteration did not converge in {POWER_ITER_MAX} steps"
        )
    if np.any(u < -1e-9):
        raise NumericalError(f"Perron vector has negative entry {u.min():.3e}")
    u = np.where(u < 0, 0.0, u)
    return u


def contraction_factor(M, centering):
    """Spectral radius of M - centering.

    A value < 1 certifies geometric contraction of the consensus dynamics in
    some induced norm.  The matrices here are small and dense, and the
    centered matrix generally has complex spectrum, so the radius is taken
    from the full eigenvalue set rather than a power iteration.
    """
    C = np.asarray(M, dtype=float) - np.asarray(centering, dtype=float)
    ev = np.linalg.eigvals(C)
    if not np.all(np.isfinite(ev.real)) or not np.all(np.isfinite(ev.imag)):
        raise NumericalError("eigenvalue computation produced non-finite values")
    return float(np.max(np.abs(ev))) if ev.size else 0.0


def build_weight_pair(gA, gBt):
    """Uniform-weight A on gA and B on gBt, with Perron vectors and tau factors.

    A_ij = 1/|in-neighbors of i in gA, incl. self| on in-edges of i.
    B_ij = 1/|in-edges of j in gBt, incl. self| whenever (i -> j) is in gBt
    (equivalently: uniform out-neighbor weights on the reversed graph G_B).
    """
    if gA.n != gBt.n:
        raise ConfigurationError("graphs must share the same node set")
    n = gA.n
    if not gA.roots():
        raise AssumptionError("graph for A contains no spanning tree")
    if not gBt.roots():
        raise AssumptionError("graph for B^T contains no spanning tree")
    if not (gA.roots() & gBt.roots()):
        raise AssumptionError("root sets of the two graphs are disjoint")

    A = np.zeros((n, n))
    for i in range(1, n + 1):
        nbrs = gA.in_neighbors(i)
        for j in nbrs:
            A[i - 1, j - 1] = 1.0 / len(nbrs)
    B = np.zeros((n, n))
    for j in range(1, n + 1):
        nbrs = gBt.in_neighbors(j)  # i with (i -> j) in gBt, incl. j
        for i in nbrs:
            B[i - 1, j - 1] = 1.0 / len(nbrs)

    u = _perron_left(A)
    v = _perron_left(B.T)
    tau_A = contraction_factor(A, np.outer(np.ones(n), u) / n)
    tau_B = contraction_factor(B, np.outer(v, np.ones(n)) / n)
    return WeightPair(A=A, B=B, u=u, v=v, tau_A=tau_A, tau_B=tau_B)


def underlying_metropolis(g):
    """Metropolis-Hastings weights on the symmetrized (underlying) graph.

    W_ij = 1/(1 + max(deg_i, deg_j)) for undirected neighbors i != j,
    W_ii = 1 - sum_j W_ij.  Symmetric and doubly stochastic.
    """
    n = g.n
    und = {frozenset(e) for e in g.edges}
    nbrs = {i: set() for i in range(1, n + 1)}
    for e in und:
        a, b = sorted(e)
        nbrs[a].add(b)
        nbrs[b].add(a)
    deg = {i: len(nbrs[i]) for i in nbrs}
    W = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in nbrs[i]:
            W[i - 1, j - 1] = 1.0 / (1.0 + max(deg[i], deg[j]))
    for i in range(n):
        W[i, i] = 1.0 - W[i].sum()
    return W

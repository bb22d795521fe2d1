"""Independence models: partial orthogonality over an embedding table and
separation in an undirected graph, plus a randomized/exhaustive checker for
the graphoid axioms A1-A6.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, ParseError
from .geometry import DEFAULT_TOL, Tolerance, orthonormal_basis, residual

__all__ = [
    "EmbeddingTable",
    "UndirectedGraph",
    "IndependenceTriple",
    "PartialOrthogonality",
    "GraphSeparation",
    "partially_orthogonal",
    "set_partially_orthogonal",
    "graph_separated",
    "AxiomViolation",
    "AxiomReport",
    "check_axioms",
    "AXIOMS",
    "read_graph",
    "write_graph",
]


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Labeled finite set of vectors, one row per label."""

    labels: tuple
    vectors: np.ndarray

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=float)
        if vecs.ndim != 2 or vecs.shape[1] < 1:
            raise InvalidInputError(f"vectors must be an (n, d) array with d >= 1, got shape {vecs.shape}")
        labels = tuple(str(x) for x in self.labels)
        if len(labels) != vecs.shape[0]:
            raise InvalidInputError(f"{len(labels)} labels for {vecs.shape[0]} vectors")
        seen = set()
        for label in labels:
            if label in seen:
                raise InvalidInputError(f"duplicate label {label!r}")
            seen.add(label)
        if not np.all(np.isfinite(vecs)):
            bad = int(np.where(~np.all(np.isfinite(vecs), axis=1))[0][0])
            raise InvalidInputError(f"record {labels[bad]!r} has non-finite coordinates")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_vectors(cls, vectors, labels: Optional[Sequence[str]] = None) -> "EmbeddingTable":
        vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
        if labels is None:
            labels = [f"v{i}" for i in range(vecs.shape[0])]
        return cls(tuple(labels), vecs)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidInputError(f"unknown label {label!r}") from None

    def indices(self, labels: Iterable[str]) -> list[int]:
        return [self.index(x) for x in labels]

    def subset(self, keep: Sequence[int]) -> "EmbeddingTable":
        keep = list(keep)
        return EmbeddingTable(tuple(self.labels[i] for i in keep), self.vectors[keep])

    def normalized(self) -> "EmbeddingTable":
        norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
        safe = np.where(norms > 0, norms, 1.0)
        return EmbeddingTable(self.labels, self.vectors / safe)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class UndirectedGraph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInputError("vertex count must be >= 0")
        clean = set()
        for e in self.edges:
            i, j = (int(x) for x in e)
            if i == j:
                raise InvalidInputError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidInputError(f"edge ({i}, {j}) out of range for n={self.n}")
            clean.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(clean))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "UndirectedGraph":
        edges = list(edges)
        normalized = [(min(i, j), max(i, j)) for i, j in edges]
        if len(set(normalized)) != len(normalized):
            raise InvalidInputError("duplicate edge")
        return cls(n, frozenset(normalized))

    @classmethod
    def path(cls, n: int) -> "UndirectedGraph":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def complete(cls, n: int) -> "UndirectedGraph":
        return cls(n, frozenset(itertools.combinations(range(n), 2)))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def neighbors(self, v: int) -> frozenset:
        return frozenset(j if i == v else i for i, j in self.edges if v in (i, j))

    def neighbor_lists(self) -> list[list[int]]:
        nbrs = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def max_degree(self) -> int:
        return max((len(x) for x in self.neighbor_lists()), default=0)


@dataclass(frozen=True)
class IndependenceTriple:
    A: frozenset
    B: frozenset
    C: frozenset = frozenset()

    def __post_init__(self):
        for name in "ABC":
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if not self.A or not self.B:
            raise InvalidInputError("A and B must be nonempty")
        _require_disjoint(self.A, self.B, self.C)


def _require_disjoint(*sets) -> None:
    seen = set()
    for s in sets:
        s = set(s)
        if seen & s:
            raise InvalidInputError(f"index sets overlap on {sorted(seen & s)}")
        seen |= s


def _check_index(table: EmbeddingTable, *indices) -> None:
    for i in indices:
        if not 0 <= int(i) < table.n:
            raise InvalidInputError(f"index {i} out of range for table of size {table.n}")


def partially_orthogonal(table: EmbeddingTable, a: int, b: int, C: Iterable[int] = (),
                         tol: Tolerance = DEFAULT_TOL) -> bool:
    """``a`` and ``b`` have orthogonal residuals after projecting out ``span(C)``.

    A residual with norm at most ``tol.zero_tol`` is orthogonal to everything.
    """
    C = sorted(set(C))
    _check_index(table, a, b, *C)
    if a == b:
        raise InvalidInputError("a and b must differ")
    if a in C or b in C:
        raise InvalidInputError("a and b must not be in the conditioning set")
    span = orthonormal_basis(table.vectors[C], tol, ambient_dim=table.dim)
    ra = residual(table.vectors[a], span)
    rb = residual(table.vectors[b], span)
    if np.linalg.norm(ra) <= tol.zero_tol or np.linalg.norm(rb) <= tol.zero_tol:
        return True
    return abs(float(ra @ rb)) <= tol.ortho_tol


class PartialOrthogonality:
    """Partial orthogonality as a ternary relation over index sets of a table.

    The residual Gram matrix is cached per conditioning set, so repeated queries
    (axiom checks, blanket enumeration) cost one SVD per distinct ``C``.
    """

    def __init__(self, table: EmbeddingTable, tol: Tolerance = DEFAULT_TOL):
        self.table = table
        self.tol = tol
        self._cache: dict[frozenset, tuple[np.ndarray, np.ndarray]] = {}

    def residual_gram(self, C: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(gram, degenerate)`` for residuals given ``C``."""
        key = frozenset(C)
        hit = self._cache.get(key)
        if hit is None:
            vecs = self.table.vectors
            idx = sorted(key)
            span = orthonormal_basis(vecs[idx], self.tol, ambient_dim=self.table.dim)
            res = vecs - (vecs @ span.basis) @ span.basis.T if span.rank else vecs
            gram = res @ res.T
            degenerate = np.sqrt(np.clip(np.diag(gram), 0.0, None)) <= self.tol.zero_tol
            hit = (gram, degenerate)
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def __call__(self, A, B, C=()) -> bool:
        A = sorted(set(A))
        B = sorted(set(B))
        if not A or not B:
            return True
        gram, degenerate = self.residual_gram(C)
        block = np.abs(gram[np.ix_(A, B)]) <= self.tol.ortho_tol
        block |= degenerate[A][:, None] | degenerate[B][None, :]
        return bool(block.all())


def set_partially_orthogonal(table: EmbeddingTable, A: Iterable[int], B: Iterable[int],
                             C: Iterable[int] = (), tol: Tolerance = DEFAULT_TOL) -> bool:
    """Elementwise partial orthogonality of every pair in ``A x B`` given ``C``."""
    A, B, C = set(A), set(B), set(C)
    _require_disjoint(A, B, C)
    _check_index(table, *A, *B, *C)
    return PartialOrthogonality(table, tol)(A, B, C)


def graph_separated(g: UndirectedGraph, A: Iterable[int], B: Iterable[int],
                    C: Iterable[int] = ()) -> bool:
    """True iff every path from ``A`` to ``B`` passes through ``C`` (BFS with ``C`` removed)."""
    A, B, C = set(A), set(B), set(C)
    _require_disjoint(A, B, C)
    for v in A | B | C:
        if not 0 <= v < g.n:
            raise InvalidInputError(f"vertex {v} out of range for n={g.n}")
    if not A or not B:
        return True
    nbrs = g.neighbor_lists()
    seen = set(A)
    queue = deque(sorted(A))
    while queue:
        u = queue.popleft()
        for w in nbrs[u]:
            if w in C or w in seen:
                continue
            if w in B:
                return False
            seen.add(w)
            queue.append(w)
    return True


class GraphSeparation:
    """Graph separation wrapped as a ternary relation for :func:`check_axioms`."""

    def __init__(self, g: UndirectedGraph):
        self.graph = g

    def __call__(self, A, B, C=()) -> bool:
        return graph_separated(self.graph, A, B, C)


# ---------------------------------------------------------------------------
# axioms

Relation = Callable[[frozenset, frozenset, frozenset], bool]


def _symmetry(rel, A, B, C, D):
    return not rel(A, B, C) or rel(B, A, C)


def _decomposition(rel, A, B, C, D):
    return not rel(A, B | D, C) or (rel(A, B, C) and rel(A, D, C))


def _weak_union(rel, A, B, C, D):
    return not rel(A, B | D, C) or rel(A, B, C | D)


def _contraction(rel, A, B, C, D):
    return not (rel(A, B, C) and rel(A, D, B | C)) or rel(A, B | D, C)


def _intersection(rel, A, B, C, D):
    return not (rel(A, B, C | D) and rel(A, C, B | D)) or rel(A, B | C, D)


def _composition(rel, A, B, C, D):
    return not (rel(A, B, C) and rel(A, D, C)) or rel(A, B | D, C)


AXIOMS: dict[str, Callable] = {
    "A1": _symmetry,
    "A2": _decomposition,
    "A3": _weak_union,
    "A4": _contraction,
    "A5": _intersection,
    "A6": _composition,
}


@dataclass(frozen=True)
class AxiomViolation:
    trial: int
    axiom: str
    A: tuple
    B: tuple
    C: tuple
    D: tuple


@dataclass
class AxiomReport:
    axioms: tuple
    trials: int
    exhaustive: bool
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, axiom: str) -> int:
        return sum(1 for v in self.violations if v.axiom == axiom)


def _assignments(universe: Sequence[int], trials: int, seed, exhaustive: bool):
    """Yield disjoint (A, B, C, D) with A, B nonempty; bins are A, B, C, D, unused."""
    if exhaustive:
        for bins in itertools.product(range(5), repeat=len(universe)):
            yield bins
        return
    rng = np.random.default_rng(seed)
    produced = 0
    while produced < trials:
        bins = rng.integers(0, 5, size=len(universe))
        if not ((bins == 0).any() and (bins == 1).any()):
            continue
        produced += 1
        yield tuple(int(b) for b in bins)


def check_axioms(model: Relation, universe: Iterable[int], axioms: Iterable[str] = tuple(AXIOMS),
                 trials: int = 1000, seed=0, exhaustive: Optional[bool] = None) -> AxiomReport:
    """Search for counterexamples to the requested graphoid axioms.

    Tuples are sampled with a seeded generator; when ``exhaustive`` is ``None`` every
    disjoint tuple is enumerated instead if there are at most ``trials`` of them.
    """
    universe = sorted(set(universe))
    axioms = tuple(axioms)
    unknown = [a for a in axioms if a not in AXIOMS]
    if unknown:
        raise InvalidInputError(f"unknown axioms {unknown}; choose from {list(AXIOMS)}")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    if len(universe) < 2:
        raise InvalidInputError("universe needs at least two elements")
    if exhaustive is None:
        exhaustive = 5 ** len(universe) <= trials
    report = AxiomReport(axioms=axioms, trials=0, exhaustive=exhaustive)
    for trial, bins in enumerate(_assignments(universe, trials, seed, exhaustive)):
        parts = [frozenset(u for u, b in zip(universe, bins) if b == k) for k in range(4)]
        A, B, C, D = parts
        if not A or not B:
            continue
        report.trials += 1
        for name in axioms:
            if not AXIOMS[name](model, A, B, C, D):
                report.violations.append(
                    AxiomViolation(trial, name, *(tuple(sorted(p)) for p in parts)))
    return report


# ---------------------------------------------------------------------------
# graph file format


def read_graph(path) -> UndirectedGraph:
    """Parse the graph text format: vertex count, then one ``i j`` edge per line."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_graph(text)


def parse_graph(text: str) -> UndirectedGraph:
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise ParseError(f"line {lineno}: expected integers, got {line!r}") from None
        if n is None:
            if len(values) != 1 or values[0] < 0:
                raise ParseError(f"line {lineno}: expected a vertex count")
            n = values[0]
            continue
        if len(values) != 2:
            raise ParseError(f"line {lineno}: expected two vertex indices")
        edges.append(tuple(values))
    if n is None:
        raise ParseError("graph file is empty")
    try:
        return UndirectedGraph.from_edges(n, edges)
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from None


def write_graph(g: UndirectedGraph, path) -> None:
    lines = [str(g.n)] + [f"{i} {j}" for i, j in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

"""Independence-preserving embeddings built from undirected graphs.

The construction inverts the adjusted adjacency ``I + eps * A(G)`` and factors the
inverse as ``U diag(s) U^T``; row ``i`` of ``U diag(s)^{1/2}`` embeds vertex ``i``.
When ``eps`` is a perfect perturbation factor, partial orthogonality among the rows
coincides with separation in the graph. Random Gaussian projections then shrink the
embedding while keeping post-boundary residual inner products small.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConstructionError, GuardRefusal, InvalidInputError, NotFoundError
from .geometry import DEFAULT_TOL, Tolerance, orthonormal_basis
from .independence import EmbeddingTable, PartialOrthogonality, UndirectedGraph, graph_separated

__all__ = [
    "AdjustedAdjacency",
    "IpeMap",
    "ReductionPlan",
    "PerfectnessResult",
    "IpeReport",
    "ReductionReport",
    "adjusted_adjacency",
    "is_perfect_perturbation",
    "default_epsilon_candidates",
    "find_perfect_epsilon",
    "construct_ipe",
    "verify_ipe",
    "imap_from_precision",
    "jl_dimension",
    "reduction_plan",
    "jl_matrix",
    "jl_project",
    "verify_reduced_orthogonality",
]

PERFECTNESS_GUARD = 14
VERIFY_GUARD = 10


@dataclass(frozen=True, eq=False)
class AdjustedAdjacency:
    graph: UndirectedGraph
    epsilon: float
    matrix: np.ndarray


def adjusted_adjacency(g: UndirectedGraph, epsilon: float) -> AdjustedAdjacency:
    return AdjustedAdjacency(g, float(epsilon), np.eye(g.n) + float(epsilon) * g.adjacency())


def _components(n_vertices: int, vertices: Sequence[int], nbrs: list[list[int]]) -> dict[int, int]:
    """Connected-component label of each vertex in the induced subgraph."""
    inside = set(vertices)
    label: dict[int, int] = {}
    for start in vertices:
        if start in label:
            continue
        label[start] = start
        stack = [start]
        while stack:
            u = stack.pop()
            for w in nbrs[u]:
                if w in inside and w not in label:
                    label[w] = start
                    stack.append(w)
    return label


@dataclass(frozen=True)
class PerfectnessResult:
    perfect: bool
    witness: Optional[tuple] = None  # (subset, i, j) or (subset, None, None) for a singular block
    reason: str = ""
    probabilistic: bool = False

    def __bool__(self):
        return self.perfect


def is_perfect_perturbation(g: UndirectedGraph, epsilon: float, tol: float = 1e-10,
                            max_n_exhaustive: int = PERFECTNESS_GUARD,
                            sampled: Optional[int] = None, seed: int = 0) -> PerfectnessResult:
    """Check that ``epsilon`` is a perfect perturbation factor for ``g``.

    For every vertex subset ``I`` the principal block ``A_eps[I]`` must be invertible
    and entry ``(a, b)`` of its inverse must vanish (``<= tol``) exactly when ``I[a]``
    and ``I[b]`` are separated by the vertices outside ``I``. Subsets are visited in
    increasing bitmask order and the first failure is returned as the witness.

    Graphs above ``max_n_exhaustive`` vertices are refused unless ``sampled`` gives a
    number of random subsets to check; such results are flagged probabilistic.
    """
    n = g.n
    mat = adjusted_adjacency(g, epsilon).matrix
    if n > max_n_exhaustive and sampled is None:
        raise GuardRefusal(f"exhaustive perfectness check limited to n <= {max_n_exhaustive} (graph has {n})")
    eig = np.linalg.eigvalsh(mat) if n else np.zeros(0)
    if n and np.min(np.abs(eig)) <= tol:
        return PerfectnessResult(False, (tuple(range(n)), None, None),
                                 f"adjusted adjacency is singular (eigenvalue {eig[np.argmin(np.abs(eig))]:.3g})")
    nbrs = g.neighbor_lists()
    if sampled is None:
        masks = range(1, 2 ** n)
    else:
        rng = np.random.default_rng(seed)
        masks = sorted({int(x) for x in rng.integers(1, 2 ** n, size=sampled)})
    for mask in masks:
        subset = [i for i in range(n) if mask >> i & 1]
        block = mat[np.ix_(subset, subset)]
        if len(subset) == 1:
            if abs(block[0, 0]) <= tol:
                return PerfectnessResult(False, (tuple(subset), None, None), "singular principal block",
                                         sampled is not None)
            continue
        if np.min(np.abs(np.linalg.eigvalsh(block))) <= tol:
            return PerfectnessResult(False, (tuple(subset), None, None), "singular principal block",
                                     sampled is not None)
        inv = np.linalg.inv(block)
        comp = _components(n, subset, nbrs)
        for a, b in itertools.combinations(range(len(subset)), 2):
            separated = comp[subset[a]] != comp[subset[b]]
            zero = abs(inv[a, b]) <= tol
            if zero != separated:
                why = "zero inverse entry for connected pair" if zero else "nonzero inverse entry for separated pair"
                return PerfectnessResult(False, (tuple(subset), subset[a], subset[b]), why, sampled is not None)
    return PerfectnessResult(True, None, "", sampled is not None)


def default_epsilon_candidates(g: UndirectedGraph) -> list[float]:
    base = 0.5 / (g.max_degree() + 1)
    factors = [1.0, 0.9, 1.1, 0.8, 1.2, 0.7, 1.3, 0.6, 1.4, 0.5]
    return [base * f for f in factors]


def find_perfect_epsilon(g: UndirectedGraph, candidates: Optional[Sequence[float]] = None,
                         tol: float = 1e-10, max_n_exhaustive: int = PERFECTNESS_GUARD) -> float:
    """First candidate that is a perfect perturbation factor for ``g``."""
    if candidates is None:
        candidates = default_epsilon_candidates(g)
    candidates = list(candidates)
    if not candidates:
        raise InvalidInputError("candidate list is empty")
    failures = []
    for eps in candidates:
        result = is_perfect_perturbation(g, eps, tol, max_n_exhaustive)
        if result.perfect:
            return float(eps)
        failures.append(f"eps={eps:g}: {result.reason} at {result.witness}")
    raise NotFoundError("no perfect perturbation factor among candidates; " + "; ".join(failures))


@dataclass(frozen=True, eq=False)
class IpeMap:
    graph: UndirectedGraph
    epsilon: float
    rows: np.ndarray
    gram: np.ndarray
    normalized: bool = False

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def table(self) -> EmbeddingTable:
        return EmbeddingTable(tuple(f"v{i}" for i in range(self.n)), self.rows)

    def unit_normalized(self) -> "IpeMap":
        rows = self.rows / np.linalg.norm(self.rows, axis=1, keepdims=True)
        return IpeMap(self.graph, self.epsilon, rows, rows @ rows.T, True)


def construct_ipe(g: UndirectedGraph, epsilon: float, normalize: bool = False) -> IpeMap:
    """Embed the vertices of ``g`` so that the Gram matrix is ``(I + eps*A)^{-1}``.

    Raises :class:`ConstructionError` unless the adjusted adjacency is positive definite.
    """
    adj = adjusted_adjacency(g, epsilon).matrix
    eig = np.linalg.eigvalsh(adj) if g.n else np.zeros(0)
    # eigenvalues within rounding of zero count as singular
    if g.n and eig[0] <= g.n * np.finfo(float).eps * max(1.0, float(np.abs(eig).max())):
        raise ConstructionError(
            f"adjusted adjacency with eps={epsilon:g} is not positive definite (smallest eigenvalue {eig[0]:.6g})")
    target = np.linalg.inv(adj) if g.n else np.zeros((0, 0))
    target = (target + target.T) / 2
    s, u = np.linalg.eigh(target)
    rows = u * np.sqrt(s)
    ipe = IpeMap(g, float(epsilon), rows, rows @ rows.T)
    return ipe.unit_normalized() if normalize else ipe


@dataclass
class IpeReport:
    checked: int
    mismatches: list = field(default_factory=list)  # (i, j, C, orthogonal, separated)

    @property
    def faithful(self) -> bool:
        return not self.mismatches


def verify_ipe(ipe, g: UndirectedGraph, tol: Tolerance = DEFAULT_TOL,
               max_n: int = VERIFY_GUARD) -> IpeReport:
    """Compare partial orthogonality of the rows with separation in ``g``.

    Every pair ``i < j`` is checked against every conditioning set drawn from the
    remaining vertices. ``ipe`` may be an :class:`IpeMap` or an ``(n, d)`` array.
    """
    rows = ipe.rows if isinstance(ipe, IpeMap) else np.asarray(ipe, dtype=float)
    n = rows.shape[0]
    if n != g.n:
        raise InvalidInputError(f"map has {n} rows but graph has {g.n} vertices")
    if n > max_n:
        raise GuardRefusal(f"exhaustive IPE verification limited to n <= {max_n} (map has {n})")
    relation = PartialOrthogonality(EmbeddingTable.from_vectors(rows), tol)
    report = IpeReport(checked=0)
    for i, j in itertools.combinations(range(n), 2):
        rest = [k for k in range(n) if k not in (i, j)]
        for size in range(len(rest) + 1):
            for C in itertools.combinations(rest, size):
                ortho = relation([i], [j], C)
                sep = graph_separated(g, [i], [j], C)
                report.checked += 1
                if ortho != sep:
                    report.mismatches.append((i, j, C, ortho, sep))
    return report


def imap_from_precision(precision, tol: float = 1e-10) -> UndirectedGraph:
    """Pairwise Markov graph of a Gaussian: an edge wherever the precision entry is nonzero."""
    p = np.asarray(precision, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise InvalidInputError(f"precision must be square, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("precision has non-finite entries")
    if np.max(np.abs(p - p.T), initial=0.0) > tol:
        raise InvalidInputError("precision matrix is not symmetric")
    if p.size and np.linalg.eigvalsh((p + p.T) / 2)[0] <= tol:
        raise InvalidInputError("precision matrix is not positive definite")
    n = p.shape[0]
    return UndirectedGraph(n, frozenset((i, j) for i, j in itertools.combinations(range(n), 2)
                                        if abs(p[i, j]) > tol))


# ---------------------------------------------------------------------------
# dimension reduction


def jl_dimension(n: int, epsilon_prime: float) -> int:
    """``ceil(20 ln(2n) / eps'^2)``."""
    if n < 1 or not epsilon_prime > 0:
        raise InvalidInputError("need n >= 1 and epsilon_prime > 0")
    return math.ceil(20.0 * math.log(2 * n) / epsilon_prime ** 2)


@dataclass(frozen=True)
class ReductionPlan:
    n: int
    k: int
    epsilon: float
    epsilon_prime: float
    lambda_min: float
    lambda_max: float
    r: int
    C: float
    seed: int = 0


def reduction_plan(ipe, epsilon: float, boundary_sizes: Sequence[int], seed: int = 0) -> ReductionPlan:
    """Target dimension guaranteeing post-boundary residual inner products within ``epsilon``.

    Rows are unit-normalized first. With ``r`` the largest boundary size,
    ``C = (r+1)^3 ((2 lmax + 2 (r+1)^2) / lmin)^r`` and
    ``eps' = min(1/2, epsilon / C, lmin / (2 r^2))`` (last term dropped when ``r = 0``).
    """
    rows = ipe.rows if isinstance(ipe, IpeMap) else np.asarray(ipe, dtype=float)
    if not 0 < epsilon < 1:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    n = rows.shape[0]
    if len(boundary_sizes) != n:
        raise InvalidInputError(f"need one boundary size per row ({n}), got {len(boundary_sizes)}")
    unit = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    eig = np.linalg.eigvalsh(unit @ unit.T)
    lmin, lmax = float(eig[0]), float(eig[-1])
    if lmin <= 0:
        raise InvalidInputError(f"Gram matrix is singular (smallest eigenvalue {lmin:.3g})")
    r = int(max(boundary_sizes, default=0))
    C = (r + 1) ** 3 * ((2 * lmax + 2 * (r + 1) ** 2) / lmin) ** r
    terms = [0.5, epsilon / C]
    if r > 0:
        terms.append(lmin / (2 * r * r))
    eps_prime = min(terms)
    return ReductionPlan(n, jl_dimension(n, eps_prime), float(epsilon), float(eps_prime),
                         lmin, lmax, r, float(C), seed)


def jl_matrix(n: int, k: int, seed: int = 0) -> np.ndarray:
    """``(k, n)`` Gaussian matrix scaled by ``1/sqrt(k)``."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    return np.random.default_rng(seed).standard_normal((k, n)) / math.sqrt(k)


def jl_project(vectors, k: int, seed: int = 0) -> np.ndarray:
    """Map each row of ``vectors`` through the same seeded Gaussian projection."""
    x = np.atleast_2d(np.asarray(vectors, dtype=float))
    return x @ jl_matrix(x.shape[1], k, seed).T


@dataclass
class ReductionReport:
    epsilon: float
    max_value: float
    checked: int
    violations: list = field(default_factory=list)  # (i, j, value)

    @property
    def bound_holds(self) -> bool:
        return not self.violations


def verify_reduced_orthogonality(original, reduced, boundaries: Sequence[Sequence[int]],
                                 epsilon: float, tol: Tolerance = DEFAULT_TOL) -> ReductionReport:
    """Residual inner products in the reduced space outside each row's boundary.

    For row ``i`` with boundary ``M_i`` and every ``j`` outside ``M_i + {i}``, the
    residuals of ``g(u_i)`` and ``g(u_j)`` after projecting out ``span(g(M_i))`` are
    compared against ``epsilon``.
    """
    rows = original.rows if isinstance(original, IpeMap) else np.asarray(original, dtype=float)
    red = np.atleast_2d(np.asarray(reduced, dtype=float))
    n = rows.shape[0]
    if red.shape[0] != n or len(boundaries) != n:
        raise InvalidInputError("reduced vectors and boundaries must have one entry per original row")
    report = ReductionReport(float(epsilon), 0.0, 0)
    for i in range(n):
        members = sorted(set(boundaries[i]))
        span = orthonormal_basis(red[members], tol, ambient_dim=red.shape[1])
        res = red - (red @ span.basis) @ span.basis.T if span.rank else red
        for j in range(n):
            if j == i or j in members:
                continue
            value = abs(float(res[i] @ res[j]))
            report.checked += 1
            report.max_value = max(report.max_value, value)
            if value > epsilon:
                report.violations.append((i, j, value))
    return report

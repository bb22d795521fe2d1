"""Exact Markov blankets and boundaries under partial orthogonality, the
generalized-boundary score (mean post-projection cosine), and the randomized
candidate search that approximates a generalized boundary.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import GuardRefusal, InvalidInputError
from .geometry import DEFAULT_TOL, Tolerance, orthonormal_basis
from .independence import EmbeddingTable, PartialOrthogonality

__all__ = [
    "BoundarySet",
    "GmbResult",
    "is_markov_blanket",
    "enumerate_markov_boundaries",
    "gmb_score",
    "subspace_rng",
    "random_subspace_scores",
    "find_generalized_mb",
    "sweep_candidate_sizes",
    "DEFAULT_GMB_TOL",
]

DEFAULT_GMB_TOL = 0.02
ENUMERATION_GUARD = 20
SUBSET_SEARCH_GUARD = 20


@dataclass(frozen=True, eq=False)
class BoundarySet:
    target: int
    members: tuple
    projection_of_target: np.ndarray


@dataclass(frozen=True)
class GmbResult:
    target: int
    members: tuple
    cbar: float
    excluded: int
    candidate_pool: tuple  # ((index, aggregate score), ...) best first
    params: dict
    best_abs_cbar: float  # smallest |cbar| over every candidate subset
    subsets_searched: int


def _check_target(table: EmbeddingTable, v: int, M: Iterable[int]) -> list[int]:
    if not 0 <= v < table.n:
        raise InvalidInputError(f"target index {v} out of range for table of size {table.n}")
    M = sorted(set(int(m) for m in M))
    for m in M:
        if not 0 <= m < table.n:
            raise InvalidInputError(f"index {m} out of range for table of size {table.n}")
    if v in M:
        raise InvalidInputError("target must not belong to its own blanket")
    return M


def _residuals(vectors: np.ndarray, members: Sequence[int], tol: Tolerance) -> np.ndarray:
    span = orthonormal_basis(vectors[list(members)], tol, ambient_dim=vectors.shape[1])
    if span.rank == 0:
        return vectors
    return vectors - (vectors @ span.basis) @ span.basis.T


def _blanket_holds(vectors: np.ndarray, v: int, members: Sequence[int], tol: Tolerance):
    """Return (is_blanket, projection of the target) for one candidate set."""
    res = _residuals(vectors, members, tol)
    rv = res[v]
    proj = vectors[v] - rv
    if np.linalg.norm(rv) <= tol.zero_tol:
        return True, proj
    rest = [u for u in range(vectors.shape[0]) if u != v and u not in members]
    if not rest:
        return True, proj
    r_rest = res[rest]
    inner = np.abs(r_rest @ rv)
    degenerate = np.linalg.norm(r_rest, axis=1) <= tol.zero_tol
    return bool(np.all((inner <= tol.ortho_tol) | degenerate)), proj


def is_markov_blanket(table: EmbeddingTable, v: int, M: Iterable[int],
                      tol: Tolerance = DEFAULT_TOL) -> bool:
    """``v`` is partially orthogonal to every vector outside ``M`` given ``M``."""
    M = _check_target(table, v, M)
    rest = [u for u in range(table.n) if u != v and u not in M]
    return PartialOrthogonality(table, tol)([v], rest, M)


def enumerate_markov_boundaries(table: EmbeddingTable, v: int, tol: Tolerance = DEFAULT_TOL,
                                max_size: Optional[int] = None,
                                guard: int = ENUMERATION_GUARD) -> list[BoundarySet]:
    """All inclusion-minimal Markov blankets of ``v`` with at most ``max_size`` members.

    Subsets are visited by nondecreasing size in lexicographic order; supersets of a
    boundary already found are skipped. Refuses tables larger than ``guard``.
    """
    _check_target(table, v, ())
    if table.n > guard:
        raise GuardRefusal(f"exact boundary enumeration limited to n <= {guard} (table has {table.n})")
    others = [u for u in range(table.n) if u != v]
    if max_size is None:
        max_size = len(others)
    found: list[BoundarySet] = []
    found_sets: list[frozenset] = []
    for size in range(0, min(max_size, len(others)) + 1):
        for members in itertools.combinations(others, size):
            mset = frozenset(members)
            if any(f <= mset for f in found_sets):
                continue
            ok, proj = _blanket_holds(table.vectors, v, members, tol)
            if ok:
                found.append(BoundarySet(v, tuple(members), proj))
                found_sets.append(mset)
    return found


def gmb_score(table: EmbeddingTable, v: int, M: Iterable[int],
              tol: Tolerance = DEFAULT_TOL) -> tuple[float, int]:
    """Mean cosine between the target's residual and every test residual given ``span(M)``.

    Test vectors are all rows outside ``M`` and the target. Degenerate residuals are
    left out of the mean and counted in the second return value; a degenerate target
    residual gives ``(0.0, number of test vectors)``.
    """
    M = _check_target(table, v, M)
    return _gmb_score(table.vectors, v, M, tol)


def _gmb_score(vectors: np.ndarray, v: int, M: Sequence[int], tol: Tolerance) -> tuple[float, int]:
    members = set(M)
    tests = [u for u in range(vectors.shape[0]) if u != v and u not in members]
    if not tests:
        raise InvalidInputError("no test vectors outside the target and conditioning set")
    res = _residuals(vectors, M, tol)
    rv = res[v]
    nv = float(np.linalg.norm(rv))
    if nv <= tol.zero_tol:
        return 0.0, len(tests)
    r_tests = res[tests]
    norms = np.linalg.norm(r_tests, axis=1)
    dots = r_tests @ rv
    total = 0.0
    kept = 0
    for dot, nu in zip(dots.tolist(), norms.tolist()):
        if nu <= tol.zero_tol:
            continue
        total += min(1.0, max(-1.0, dot / (nv * nu)))
        kept += 1
    excluded = len(tests) - kept
    if kept == 0:
        return 0.0, excluded
    return total / kept, excluded


def subspace_rng(seed: int, round_index: int) -> np.random.Generator:
    """Counter-based generator for one sampling round, keyed by ``(seed, round)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(round_index)])))


def random_subspace_scores(table: EmbeddingTable, v: int, n_r: int, d_r: int, seed: int = 0,
                           tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Sum over ``n_r`` random conditioning sets of the post-projection cosine with ``v``.

    Each set holds ``d_r`` rows drawn without replacement from everything but the
    target. Entry ``v`` of the result is ``nan``; degenerate cosines count as 0.
    """
    _check_target(table, v, ())
    others = np.array([u for u in range(table.n) if u != v])
    if n_r < 1:
        raise InvalidInputError("n_r must be >= 1")
    if not 0 <= d_r <= len(others):
        raise InvalidInputError(f"d_r must lie in [0, {len(others)}], got {d_r}")
    vecs = table.vectors
    agg = np.zeros(table.n)
    for i in range(n_r):
        sample = np.sort(subspace_rng(seed, i).choice(others, size=d_r, replace=False)) if d_r else []
        res = _residuals(vecs, [int(x) for x in sample], tol)
        rv = res[v]
        nv = float(np.linalg.norm(rv))
        if nv <= tol.zero_tol:
            continue
        norms = np.linalg.norm(res, axis=1)
        ok = norms > tol.zero_tol
        cos = np.zeros(table.n)
        cos[ok] = np.clip((res[ok] @ rv) / (norms[ok] * nv), -1.0, 1.0)
        agg += cos
    agg[v] = np.nan
    return agg


def _rank_candidates(scores: np.ndarray, v: int, K: int) -> list[tuple[int, float]]:
    order = sorted((u for u in range(len(scores)) if u != v), key=lambda u: (-scores[u], u))
    return [(u, float(scores[u])) for u in order[:K]]


def _subset_scores(vectors, v, candidates, masks, tol):
    out = []
    for mask in masks:
        members = sorted(candidates[b] for b in range(len(candidates)) if mask >> b & 1)
        cbar, excluded = _gmb_score(vectors, v, members, tol)
        out.append((mask, tuple(members), cbar, excluded))
    return out


def _score_all_subsets(vectors, v, candidates, tol, workers=1):
    masks = range(1, 2 ** len(candidates))
    if len(candidates) == vectors.shape[0] - 1:
        # the full candidate set leaves no test vectors
        masks = masks[:-1]
    if workers <= 1 or len(masks) < 64:
        return _subset_scores(vectors, v, candidates, masks, tol)
    chunk = -(-len(masks) // workers)
    ranges = [masks[i:i + chunk] for i in range(0, len(masks), chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda r: _subset_scores(vectors, v, candidates, r, tol), ranges)
        return [row for part in parts for row in part]


def _select(rows, gmb_tol: float):
    """Two-tier choice: smallest passing set if any pass ``gmb_tol``, else smallest |cbar|."""
    passing = [r for r in rows if abs(r[2]) <= gmb_tol]
    if passing:
        return min(passing, key=lambda r: (len(r[1]), abs(r[2]), r[1]))
    return min(rows, key=lambda r: (abs(r[2]), len(r[1]), r[1]))


def find_generalized_mb(table: EmbeddingTable, v: int, n_r: int = 10, d_r: int = 50, K: int = 10,
                        seed: int = 0, tol: Tolerance = DEFAULT_TOL,
                        gmb_tol: float = DEFAULT_GMB_TOL, workers: int = 1) -> GmbResult:
    """Randomized search for a generalized Markov boundary of row ``v``.

    Rows are ranked by :func:`random_subspace_scores`; the top ``K`` become
    candidates and all ``2**K - 1`` nonempty candidate subsets are scored with
    :func:`gmb_score`. Among subsets with ``|cbar| <= gmb_tol`` the smallest wins
    (then smaller ``|cbar|``, then lower indices); if none pass, the smallest
    ``|cbar|`` wins.
    """
    _check_target(table, v, ())
    if not 1 <= K <= table.n - 1:
        raise InvalidInputError(f"K must lie in [1, {table.n - 1}], got {K}")
    if K > SUBSET_SEARCH_GUARD:
        raise GuardRefusal(f"subset search over 2^K candidates limited to K <= {SUBSET_SEARCH_GUARD}")
    scores = random_subspace_scores(table, v, n_r, d_r, seed, tol)
    pool = _rank_candidates(scores, v, K)
    candidates = [u for u, _ in pool]
    rows = _score_all_subsets(table.vectors, v, candidates, tol, workers)
    if not rows:
        raise InvalidInputError("a two-row table leaves no candidate subset to score")
    _, members, cbar, excluded = _select(rows, gmb_tol)
    return GmbResult(
        target=v,
        members=members,
        cbar=float(cbar),
        excluded=int(excluded),
        candidate_pool=tuple(pool),
        params={"n_r": n_r, "d_r": d_r, "K": K, "seed": seed, "gmb_tol": gmb_tol},
        best_abs_cbar=float(min(abs(r[2]) for r in rows)),
        subsets_searched=len(rows),
    )


@dataclass
class SweepRow:
    K: int
    members: tuple
    cbar: float
    best_abs_cbar: float


def sweep_candidate_sizes(table: EmbeddingTable, v: int, ks: Sequence[int], n_r: int = 10,
                          d_r: int = 50, seed: int = 0, tol: Tolerance = DEFAULT_TOL,
                          gmb_tol: float = DEFAULT_GMB_TOL) -> list[SweepRow]:
    """Run the subset search for several ``K`` sharing one set of random subspaces."""
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1 or ks[-1] > min(table.n - 2, SUBSET_SEARCH_GUARD):
        raise InvalidInputError(f"K values must lie in [1, {min(table.n - 2, SUBSET_SEARCH_GUARD)}]")
    scores = random_subspace_scores(table, v, n_r, d_r, seed, tol)
    candidates = [u for u, _ in _rank_candidates(scores, v, ks[-1])]
    rows = _score_all_subsets(table.vectors, v, candidates, tol)
    out = []
    for k in ks:
        sub = [r for r in rows if r[0] < 2 ** k]
        _, members, cbar, _ = _select(sub, gmb_tol)
        out.append(SweepRow(k, members, float(cbar), float(min(abs(r[2]) for r in sub))))
    return out

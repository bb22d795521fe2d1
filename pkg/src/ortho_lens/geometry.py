"""Linear-algebra primitives: spans, projections, residuals, cosines and principal angles.

Vectors are 1-D float arrays. A :class:`Subspace` stores an orthonormal basis as the
columns of a ``(ambient_dim, rank)`` matrix. Exact zeros become thresholds in floating
point; the thresholds live in :class:`Tolerance`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "Tolerance",
    "Subspace",
    "as_vector",
    "orthonormal_basis",
    "project",
    "residual",
    "cosine",
    "projected_cosine",
    "principal_angles",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds.

    rank_tol: singular-value cutoff when building a span; ``None`` selects the
        relative default ``max(m, n) * eps * s_max``.
    ortho_tol: an inner product with magnitude at most this counts as zero.
    zero_tol: a residual with norm at most this counts as the zero vector.
    """

    rank_tol: Optional[float] = None
    ortho_tol: float = 1e-8
    zero_tol: float = 1e-10

    def __post_init__(self):
        for name in ("rank_tol", "ortho_tol", "zero_tol"):
            value = getattr(self, name)
            if value is not None and not value >= 0:
                raise InvalidInputError(f"{name} must be >= 0, got {value!r}")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True, eq=False)
class Subspace:
    basis: np.ndarray  # (ambient_dim, rank), orthonormal columns
    ambient_dim: int

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def empty(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)), ambient_dim)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def contains(self, v, tol: Tolerance = DEFAULT_TOL) -> bool:
        return float(np.linalg.norm(residual(v, self))) <= tol.zero_tol * max(1.0, float(np.linalg.norm(v)))


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("vector has non-finite coordinates")
    return arr


def _as_matrix(vectors, ambient_dim: Optional[int] = None) -> np.ndarray:
    """Stack a sequence of vectors as columns of a (d, m) matrix."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        mat = np.asarray(vectors, dtype=float).T
    else:
        vectors = list(vectors)
        if not vectors:
            if ambient_dim is None:
                return np.zeros((0, 0))
            return np.zeros((ambient_dim, 0))
        dims = {np.asarray(v).shape for v in vectors}
        if len(dims) != 1:
            raise InvalidInputError(f"vectors have mismatched shapes: {sorted(dims)}")
        mat = np.column_stack([as_vector(v) for v in vectors])
    if ambient_dim is not None and mat.shape[0] != ambient_dim and mat.shape[1] > 0:
        raise InvalidInputError(f"vectors have dimension {mat.shape[0]}, expected {ambient_dim}")
    return mat


def orthonormal_basis(vectors: Sequence, tol: Tolerance = DEFAULT_TOL,
                      ambient_dim: Optional[int] = None) -> Subspace:
    """Orthonormal basis of ``span(vectors)`` via a thin SVD.

    ``vectors`` is a sequence of 1-D vectors or a 2-D array with one vector per row.
    The rank is the number of singular values above ``tol.rank_tol`` (relative
    default when unset). ``ambient_dim`` is only needed for an empty sequence.
    """
    mat = _as_matrix(vectors, ambient_dim)
    d, m = mat.shape
    if m == 0:
        return Subspace.empty(d if ambient_dim is None else ambient_dim)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if tol.rank_tol is None:
        cutoff = max(d, m) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    else:
        cutoff = tol.rank_tol
    rank = int(np.sum(s > cutoff))
    return Subspace(np.ascontiguousarray(u[:, :rank]), d)


def _check_dim(v: np.ndarray, s: Subspace) -> None:
    if v.shape[-1] != s.ambient_dim:
        raise InvalidInputError(f"vector dimension {v.shape[-1]} does not match subspace dimension {s.ambient_dim}")


def project(v, s: Subspace) -> np.ndarray:
    """Orthogonal projection of ``v`` onto ``s``."""
    v = as_vector(v)
    _check_dim(v, s)
    if s.rank == 0:
        return np.zeros_like(v)
    return s.basis @ (s.basis.T @ v)


def residual(v, s: Subspace) -> np.ndarray:
    """Component of ``v`` orthogonal to ``s``."""
    v = as_vector(v)
    return v - project(v, s)


def cosine(u, v, tol: Tolerance = DEFAULT_TOL) -> tuple[float, bool]:
    """Cosine similarity and a degeneracy flag.

    Returns ``(0.0, True)`` when either norm is at most ``tol.zero_tol``.
    """
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise InvalidInputError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu <= tol.zero_tol or nv <= tol.zero_tol:
        return 0.0, True
    c = float(np.dot(u, v)) / (nu * nv)
    return float(np.clip(c, -1.0, 1.0)), False


def projected_cosine(v, u, m: Subspace, tol: Tolerance = DEFAULT_TOL) -> tuple[float, bool]:
    """Cosine between the residuals of ``v`` and ``u`` after projecting out ``m``."""
    return cosine(residual(v, m), residual(u, m), tol)


def principal_angles(s1: Subspace, s2: Subspace) -> np.ndarray:
    """Principal angles (radians, nondecreasing) between two subspaces."""
    if s1.ambient_dim != s2.ambient_dim:
        raise InvalidInputError(f"ambient dimensions differ: {s1.ambient_dim} vs {s2.ambient_dim}")
    if s1.rank == 0 or s2.rank == 0:
        raise InvalidInputError("principal angles need subspaces of rank >= 1")
    cos = np.clip(np.linalg.svd(s1.basis.T @ s2.basis, compute_uv=False), 0.0, 1.0)
    from_cos = np.sort(np.arccos(cos))
    # arccos loses precision near 0; take small angles from the sines instead
    small, big = (s1, s2) if s1.rank <= s2.rank else (s2, s1)
    res = small.basis - big.basis @ (big.basis.T @ small.basis)
    sin = np.clip(np.linalg.svd(res, compute_uv=False), 0.0, 1.0)
    from_sin = np.sort(np.arcsin(sin))
    return np.where(from_sin < np.pi / 4, from_sin, from_cos)

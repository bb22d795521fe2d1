"""Seeded synthetic instances with known ground truth.

Each generator returns plain data (an :class:`EmbeddingTable` plus the labels that
make up the answer) so both the tests and the command line can use them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .independence import EmbeddingTable, UndirectedGraph

__all__ = [
    "PlantedGmb",
    "planted_gmb",
    "clustered_categories",
    "noise_subspace_ranking",
    "angle_probe",
    "sparse_integer_table",
    "random_graph",
    "random_tree",
]


@dataclass(frozen=True)
class PlantedGmb:
    table: EmbeddingTable
    target: str
    planted: tuple


def _orthonormal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def planted_gmb(seed: int = 7, dim: int = 48, n_distractors: int = 60,
                planted_weight: float = 0.4, shared_weight: float = 0.1) -> PlantedGmb:
    """Target whose generalized Markov boundary is three planted vectors.

    The target is ``0.8 w + 0.6 q`` with ``w`` a positive combination of the
    orthonormal planted vectors and ``q`` a unit vector orthogonal to them. Each
    distractor leans on one planted vector (``planted_weight``), carries
    ``+/- shared_weight`` of ``q`` with balanced signs and is otherwise isotropic noise
    orthogonal to the planted span and ``q``. Conditioning on the planted set leaves
    residual cosines that cancel exactly; any proper subset leaves a third of the
    distractors correlated with the target.
    """
    rng = np.random.default_rng(seed)
    basis = _orthonormal(rng, dim)
    planted = basis[:, :3].T
    q = basis[:, 3]
    rest = basis[:, 4:]
    weights = rng.uniform(0.5, 1.0, 3)
    w = weights @ planted
    w /= np.linalg.norm(w)
    target = 0.8 * w + 0.6 * q
    noise_weight = np.sqrt(1.0 - planted_weight ** 2 - shared_weight ** 2)
    signs = np.resize([1.0, -1.0], n_distractors)
    rng.shuffle(signs)
    distractors = []
    for j in range(n_distractors):
        noise = rest @ rng.standard_normal(rest.shape[1])
        noise /= np.linalg.norm(noise)
        distractors.append(planted_weight * planted[j % 3] + shared_weight * signs[j] * q
                           + noise_weight * noise)
    vectors = np.vstack([target, planted, distractors])
    perm = rng.permutation(len(vectors))
    names = ["target", "planted0", "planted1", "planted2"] + [f"distractor{j}" for j in range(n_distractors)]
    labels = tuple(names[i] for i in perm)
    return PlantedGmb(EmbeddingTable(labels, vectors[perm]), "target", ("planted0", "planted1", "planted2"))


def clustered_categories(seed: int = 7, n_categories: int = 4, members: int = 6, dim: int = 32,
                         noise: float = 0.35, n_filler: int = 40):
    """Category words at orthonormal centers, members scattered around their center.

    Returns ``(table, categories)`` where ``categories`` maps each category label
    (itself a row of the table) to its member labels.
    """
    rng = np.random.default_rng(seed)
    centers = _orthonormal(rng, dim)[:, :n_categories].T
    labels, rows = [], []
    categories = {}
    for c in range(n_categories):
        name = f"cat{c}"
        labels.append(name)
        rows.append(centers[c])
        names = []
        for m in range(members):
            vec = centers[c] + noise * rng.standard_normal(dim) / np.sqrt(dim)
            labels.append(f"{name}_m{m}")
            rows.append(vec / np.linalg.norm(vec))
            names.append(f"{name}_m{m}")
        categories[name] = names
    for i in range(n_filler):
        vec = rng.standard_normal(dim)
        labels.append(f"filler{i}")
        rows.append(vec / np.linalg.norm(vec))
    return EmbeddingTable(tuple(labels), np.vstack(rows)), categories


def noise_subspace_ranking(seed: int = 7, dim: int = 40, noise_rank: int = 3, n_noise: int = 45,
                           n_filler: int = 15):
    """Target whose raw nearest neighbour lives in a heavily populated noise subspace.

    Returns ``(table, target, tied, decoy)``: ``decoy`` has the highest raw cosine with
    the target but lies almost entirely in the noise subspace, while ``tied`` shares
    the target's direction outside it. Random conditioning sets usually contain
    enough noise vectors to project the subspace away, after which ``tied`` ranks first.
    """
    rng = np.random.default_rng(seed)
    basis = _orthonormal(rng, dim)
    noise_dirs = basis[:, :noise_rank]
    semantic = basis[:, noise_rank]
    outside = basis[:, noise_rank + 1:]

    def unit(x):
        return x / np.linalg.norm(x)

    def random_outside():
        return unit(outside @ rng.standard_normal(outside.shape[1]))

    n1 = noise_dirs[:, 0]
    rows = {
        "target": unit(0.75 * n1 + 0.66 * semantic),
        "decoy": unit(0.97 * n1 + 0.24 * random_outside()),
        "tied": unit(0.9 * semantic + 0.44 * random_outside()),
    }
    for i in range(n_noise):
        rows[f"noise{i}"] = unit(0.95 * unit(noise_dirs @ rng.standard_normal(noise_rank))
                                 + 0.31 * random_outside())
    for i in range(n_filler):
        rows[f"filler{i}"] = unit(rng.standard_normal(dim))
    labels = tuple(rows)
    return EmbeddingTable(labels, np.vstack([rows[k] for k in labels])), "target", "tied", "decoy"


def angle_probe(seed: int = 7, dim: int = 32, noise: float = 0.05, n_filler: int = 60):
    """Two orthonormal centers, a probe near the first, and isotropic filler rows.

    Returns ``(table, boundary, reference)`` with ``boundary = ["center0", "center1"]``
    and ``reference = ["probe"]``.
    """
    rng = np.random.default_rng(seed)
    centers = _orthonormal(rng, dim)[:, :2].T
    probe = centers[0] + noise * rng.standard_normal(dim) / np.sqrt(dim)
    rows = [centers[0], centers[1], probe / np.linalg.norm(probe)]
    labels = ["center0", "center1", "probe"]
    for i in range(n_filler):
        vec = rng.standard_normal(dim)
        rows.append(vec / np.linalg.norm(vec))
        labels.append(f"filler{i}")
    return EmbeddingTable(tuple(labels), np.vstack(rows)), ["center0", "center1"], ["probe"]


def sparse_integer_table(rng: np.random.Generator, n: int, d: int, density: float = 0.4,
                         values=(-2, -1, 1, 2), independent: bool = False) -> EmbeddingTable:
    """Small-integer vectors: exact orthogonalities are common and well separated from noise."""
    for _ in range(1000):
        mask = rng.random((n, d)) < density
        vals = rng.choice(values, size=(n, d))
        vecs = np.where(mask, vals, 0).astype(float)
        empty = ~vecs.any(axis=1)
        vecs[empty, rng.integers(0, d, size=int(empty.sum()))] = 1.0
        if not independent or np.linalg.matrix_rank(vecs) == n:
            return EmbeddingTable.from_vectors(vecs)
    raise RuntimeError("could not draw a linearly independent table")


def random_graph(rng: np.random.Generator, n: int, p: float = 0.4) -> UndirectedGraph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return UndirectedGraph(n, frozenset(edges))


def random_tree(rng: np.random.Generator, n: int) -> UndirectedGraph:
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    return UndirectedGraph(n, frozenset(edges))

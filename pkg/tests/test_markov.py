import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ortho_lens.errors import GuardRefusal, InvalidInputError
from ortho_lens.independence import EmbeddingTable, partially_orthogonal
from ortho_lens.markov import (
    enumerate_markov_boundaries,
    find_generalized_mb,
    gmb_score,
    is_markov_blanket,
    random_subspace_scores,
    sweep_candidate_sizes,
)
from ortho_lens.synthetic import planted_gmb, sparse_integer_table

E1, E2, E3 = np.eye(3)


def blanket_oracle(table, v, M):
    return all(partially_orthogonal(table, v, u, M) for u in range(table.n) if u != v and u not in M)


def boundaries_oracle(table, v):
    """Every subset, then keep the inclusion-minimal blankets."""
    others = [u for u in range(table.n) if u != v]
    blankets = [frozenset(s) for k in range(len(others) + 1)
                for s in itertools.combinations(others, k) if blanket_oracle(table, v, list(s))]
    return {b for b in blankets if not any(o < b for o in blankets)}


def test_blanket_examples():
    t = EmbeddingTable.from_vectors([E1, E2, E1 + E2, E3])
    assert is_markov_blanket(t, 0, [1, 2, 3])
    assert is_markov_blanket(t, 0, [1, 2])
    assert not is_markov_blanket(t, 0, [1])
    with pytest.raises(InvalidInputError):
        is_markov_blanket(t, 0, [0, 1])


def test_boundary_of_isolated_vector_is_empty():
    t = EmbeddingTable.from_vectors([E1, E2, E3, E2 + E3])
    found = enumerate_markov_boundaries(t, 0)
    assert [b.members for b in found] == [()]


def test_three_boundaries_same_projection():
    a, b, c = E1 + E2, E1 - E2, E2
    t = EmbeddingTable.from_vectors([a, b, c, E1])
    found = enumerate_markov_boundaries(t, 3)
    assert {b.members for b in found} == {(0, 1), (0, 2), (1, 2)}
    for bset in found:
        np.testing.assert_allclose(bset.projection_of_target, E1, atol=1e-12)


def test_unique_boundary_example():
    t = EmbeddingTable.from_vectors([E1, E2, E1 + E2, E3])
    assert [b.members for b in enumerate_markov_boundaries(t, 0)] == [(1, 2)]


def test_enumeration_guard():
    t = EmbeddingTable.from_vectors(np.eye(21))
    with pytest.raises(GuardRefusal, match="20"):
        enumerate_markov_boundaries(t, 0)


def test_max_size_limits_search():
    t = EmbeddingTable.from_vectors([E1 + E2, E1 - E2, E2, E1])
    assert enumerate_markov_boundaries(t, 3, max_size=1) == []


@given(st.integers(0, 100_000))
def test_enumeration_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(2, 8)), int(rng.integers(2, 5))
    t = sparse_integer_table(rng, n, d)
    v = int(rng.integers(0, n))
    got = {frozenset(b.members) for b in enumerate_markov_boundaries(t, v)}
    assert got == boundaries_oracle(t, v)


def test_gmb_score_hand_example():
    t = EmbeddingTable.from_vectors([E1, E2, np.array([1, 1, 0]) / math.sqrt(2)])
    cbar, excluded = gmb_score(t, 0, [])
    assert cbar == pytest.approx((0 + 1 / math.sqrt(2)) / 2, abs=1e-12)
    assert cbar == pytest.approx(0.35355, abs=1e-5)
    assert excluded == 0


def test_gmb_score_exact_blanket_and_degenerate_target():
    t = EmbeddingTable.from_vectors([E1, E2, E1 + E2, E3])
    cbar, _ = gmb_score(t, 0, [1, 2])
    assert abs(cbar) <= 1e-8
    t = EmbeddingTable.from_vectors([2 * E1, E1, E2, E3])
    assert gmb_score(t, 0, [1]) == (0.0, 2)
    with pytest.raises(InvalidInputError):
        gmb_score(t, 0, [1, 2, 3])


def test_gmb_score_excludes_degenerate_tests():
    t = EmbeddingTable.from_vectors([E1 + E2, E1, 2 * E1, E2])
    # given e1: residual of 2e1 is zero and is left out
    cbar, excluded = gmb_score(t, 0, [1])
    assert excluded == 1
    assert cbar == pytest.approx(1.0)


def select_oracle(rows, gmb_tol=0.02):
    passing = [r for r in rows if abs(r[1]) <= gmb_tol]
    if passing:
        return min(passing, key=lambda r: (len(r[0]), abs(r[1]), r[0]))[0]
    return min(rows, key=lambda r: (abs(r[1]), len(r[0]), r[0]))[0]


@given(st.integers(0, 100_000))
def test_all_candidates_equals_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(3, 8)), int(rng.integers(2, 6))
    t = EmbeddingTable.from_vectors(rng.standard_normal((n, d)))
    v = int(rng.integers(0, n))
    others = [u for u in range(n) if u != v]
    rows = [(s, gmb_score(t, v, s)[0]) for k in range(1, len(others))
            for s in itertools.combinations(others, k)]
    res = find_generalized_mb(t, v, n_r=2, d_r=1, K=n - 1, seed=seed)
    assert res.members == select_oracle(rows)
    assert res.cbar == pytest.approx(gmb_score(t, v, res.members)[0], abs=1e-9)


def test_parameter_checks():
    t = EmbeddingTable.from_vectors(np.random.default_rng(0).standard_normal((25, 4)))
    with pytest.raises(InvalidInputError):
        find_generalized_mb(t, 0, n_r=0, d_r=2, K=3)
    with pytest.raises(InvalidInputError):
        find_generalized_mb(t, 0, n_r=1, d_r=30, K=3)
    with pytest.raises(InvalidInputError):
        find_generalized_mb(t, 0, n_r=1, d_r=2, K=25)
    with pytest.raises(GuardRefusal):
        find_generalized_mb(t, 0, n_r=1, d_r=2, K=21)


def test_random_subspace_scores_zero_dim_is_plain_cosine():
    rng = np.random.default_rng(1)
    t = EmbeddingTable.from_vectors(rng.standard_normal((10, 5))).normalized()
    scores = random_subspace_scores(t, 0, n_r=1, d_r=0)
    np.testing.assert_allclose(scores[1:], t.vectors[1:] @ t.vectors[0], atol=1e-12)
    assert np.isnan(scores[0])


def test_candidate_ties_broken_by_index():
    # three identical rows tie exactly
    t = EmbeddingTable.from_vectors([E1, E1 + E2, E1 + E2, E1 + E2, E3])
    res = find_generalized_mb(t, 0, n_r=1, d_r=0, K=2)
    assert [u for u, _ in res.candidate_pool] == [1, 2]


def test_result_invariants_and_determinism():
    inst = planted_gmb(seed=3)
    t = inst.table
    v = t.index(inst.target)
    a = find_generalized_mb(t, v, n_r=10, d_r=5, K=8, seed=11)
    b = find_generalized_mb(t, v, n_r=10, d_r=5, K=8, seed=11)
    c = find_generalized_mb(t, v, n_r=10, d_r=5, K=8, seed=11, workers=4)
    assert a == b == c
    assert len(a.members) <= 8
    assert a.cbar == pytest.approx(gmb_score(t, v, a.members)[0], abs=1e-9)
    assert a.params == {"n_r": 10, "d_r": 5, "K": 8, "seed": 11, "gmb_tol": 0.02}


def test_planted_recovery_small_sample():
    hits = 0
    for seed in range(10):
        inst = planted_gmb(seed=seed)
        t = inst.table
        res = find_generalized_mb(t, t.index(inst.target), n_r=10, d_r=5, K=10, seed=seed)
        hits += {t.labels[i] for i in res.members} <= set(inst.planted)
    assert hits >= 7


def test_sweep_is_monotone_and_matches_direct_search():
    inst = planted_gmb(seed=1)
    t = inst.table
    v = t.index(inst.target)
    rows = sweep_candidate_sizes(t, v, range(1, 8), n_r=10, d_r=5, seed=1)
    best = [r.best_abs_cbar for r in rows]
    assert all(x >= y for x, y in zip(best, best[1:]))
    for r in rows:
        direct = find_generalized_mb(t, v, n_r=10, d_r=5, K=r.K, seed=1)
        assert direct.members == r.members
        assert direct.best_abs_cbar == r.best_abs_cbar

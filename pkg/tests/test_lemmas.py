from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trimono import (
    BipartiteHost,
    SimpleGraph,
    VertexSet,
    kst_bipartite,
    kst_dense,
    verify_bipartite_witness,
    verify_dense_witness,
)
from trimono.errors import PreconditionViolated, SearchBudgetExceeded
from trimono.lemmas import (
    best_covering_subset,
    binomial_real,
    superset_counts,
)
from trimono.prng import words_at


def seeded_biadjacency(b_size: int, m: int, seed: int, threshold: float) -> np.ndarray:
    words = words_at(seed, np.arange(b_size * m, dtype=np.int64))
    return (words < np.uint64(int(threshold * 2**64))).reshape(b_size, m)


def coverage_oracle(host: BipartiteHost, a: int) -> tuple[int, tuple[int, ...]]:
    """Exhaustive oracle: best size-a subset by direct subset enumeration."""
    m = len(host.side_a)
    sigs = [int(s) for s in host.signatures]
    best_count, best_subset = -1, None
    for subset in combinations(range(m), a):
        mask = sum(1 << p for p in subset)
        count = sum(1 for s in sigs if s & mask == mask)
        if count > best_count:
            best_count, best_subset = count, subset
    return best_count, best_subset


def test_superset_counts_small():
    counts = np.array([1, 2, 3, 4], dtype=np.int64)  # subsets of {0,1}
    out = superset_counts(counts, 2)
    assert list(out) == [10, 6, 7, 4]


def test_best_covering_subset_tie_breaks_lexicographically():
    # {0,3} and {1,2} tie; (0,3) < (1,2) as position tuples.
    counts = np.zeros(16, dtype=np.int64)
    counts[0b1001] = 5
    counts[0b0110] = 5
    mask, cov = best_covering_subset(counts, 4, 2)
    assert cov == 5
    assert mask == 0b1001


def test_kst_bipartite_complete_host():
    host = BipartiteHost.from_bool(VertexSet((0, 1)), np.ones((4, 2), dtype=bool))
    witness = kst_bipartite(host, 2)
    assert witness.a_side == (0,)
    assert len(witness.b_side) == 4
    assert verify_bipartite_witness(host, witness)


def test_kst_bipartite_paper_guarantee_sizes():
    # |A| = 10, |B| = 1024, >= 5120 edges at l = 2: |A'| = 5, |B'| >= 1.
    rng_bia = seeded_biadjacency(1024, 10, 42, 0.55)
    host = BipartiteHost.from_bool(VertexSet(tuple(range(10))), rng_bia)
    if host.edge_count < 5120:
        pytest.skip("seeded host unexpectedly sparse")
    witness = kst_bipartite(host, 2)
    assert len(witness.a_side) == 5
    assert len(witness.b_side) >= -(-1024 // 2**10) == 1
    assert verify_bipartite_witness(host, witness)


def test_kst_bipartite_matches_exhaustive_oracle():
    # |A| = 8, |B| = 256, p = 0.6, l = 2: |B'| equals the max over all
    # C(8,4) subsets of the number of covering B-elements.
    side_a = VertexSet(tuple(range(8)))
    bia = seeded_biadjacency(256, 8, 7, 0.6)
    host = BipartiteHost.from_bool(side_a, bia)
    assert host.edge_count * 2 >= 8 * 256
    witness = kst_bipartite(host, 2)
    oracle_count, oracle_subset = coverage_oracle(host, 4)
    assert len(witness.b_side) == oracle_count
    assert witness.a_side == oracle_subset
    assert verify_bipartite_witness(host, witness)


def test_kst_bipartite_preconditions():
    sparse = BipartiteHost.from_bool(
        VertexSet((0, 1, 2, 3)), np.zeros((8, 4), dtype=bool)
    )
    with pytest.raises(PreconditionViolated):
        kst_bipartite(sparse, 2)
    tiny = BipartiteHost.from_bool(VertexSet((0,)), np.ones((4, 1), dtype=bool))
    with pytest.raises(PreconditionViolated):
        kst_bipartite(tiny, 2)  # a = floor(1/2) = 0


def test_kst_bipartite_explicit_a_size():
    host = BipartiteHost.from_bool(VertexSet((0, 1, 2)), np.ones((5, 3), dtype=bool))
    witness = kst_bipartite(host, 2, a_size=3)
    assert witness.a_side == (0, 1, 2)
    assert len(witness.b_side) == 5
    with pytest.raises(PreconditionViolated):
        kst_bipartite(host, 2, a_size=4)


def test_kst_bipartite_monotone_under_edge_addition():
    # Adding edges never decreases |B'|: nested seeded hosts.
    side_a = VertexSet(tuple(range(6)))
    base = seeded_biadjacency(128, 6, 11, 0.5)
    prev = None
    for extra in (0.0, 0.15, 0.3):
        grown = base | seeded_biadjacency(128, 6, 13, extra) if extra else base
        host = BipartiteHost.from_bool(side_a, grown)
        if host.edge_count * 2 < 6 * 128:
            continue
        size = len(kst_bipartite(host, 2).b_side)
        if prev is not None:
            assert size >= prev
        prev = size


@given(
    st.integers(1, 6),
    st.lists(st.integers(0, 12), min_size=4, max_size=40),
)
@settings(max_examples=200)
def test_convexity_counting_identity(a, degrees):
    # sum_v C(d(v), a) >= |B| * C(avg, a) whenever avg >= a (Jensen).
    avg = sum(degrees) / len(degrees)
    if avg < a:
        return
    lhs = sum(comb(d, a) for d in degrees)
    rhs = len(degrees) * binomial_real(avg, a)
    assert lhs >= rhs - 1e-9 * max(1.0, abs(rhs))


def dense_oracle(graph: SimpleGraph, t: int) -> int:
    """Pair/triple-enumeration oracle using Python sets, not bitsets."""
    neighbors = [
        {q for q in range(graph.n) if graph.has_edge(p, q)} for p in range(graph.n)
    ]
    best = -1
    for subset in combinations(range(graph.n), t):
        common = set.intersection(*(neighbors[p] for p in subset))
        best = max(best, len(common - set(subset)))
    return best


def seeded_graph(n: int, seed: int, threshold: float) -> SimpleGraph:
    words = words_at(seed, np.arange(n * n, dtype=np.int64)).reshape(n, n)
    upper = np.triu(words < np.uint64(int(threshold * 2**64)), k=1)
    return SimpleGraph.from_bool(VertexSet(tuple(range(n))), upper | upper.T)


def test_kst_dense_complete_graph_example():
    g = SimpleGraph.complete(VertexSet(tuple(range(6))))
    witness = kst_dense(g, 2)
    assert len(witness.a_side) == 2
    assert len(witness.b_side) == 4
    # eps = 15/36; guarantee ceil(eps^2 * 6) - 2 = 0.
    assert len(witness.b_side) >= 0
    assert verify_dense_witness(g, witness)
    assert not set(witness.a_side) & set(witness.b_side)


def test_kst_dense_exhaustive_matches_pair_enumeration_oracle():
    g = seeded_graph(32, 5, 0.5)
    witness = kst_dense(g, 2, search_mode="exhaustive")
    assert len(witness.b_side) == dense_oracle(g, 2)
    assert verify_dense_witness(g, witness)


def test_kst_dense_guarantee_on_seeded_graphs():
    # n = 64-ish dense graphs: |W| >= ceil(eps^t n) - t in exhaustive mode.
    for seed, t in [(1, 1), (2, 2), (3, 3)]:
        g = seeded_graph(40, seed, 0.6)
        eps = g.edge_count / g.n**2
        if t >= eps * g.n:
            continue
        witness = kst_dense(g, t, search_mode="exhaustive")
        bound = -(-(g.edge_count**t) // g.n ** (2 * t - 1)) - t
        assert len(witness.b_side) >= bound
        assert verify_dense_witness(g, witness)


def test_kst_dense_preconditions():
    g = seeded_graph(20, 9, 0.3)
    with pytest.raises(PreconditionViolated):
        kst_dense(g, 0)
    with pytest.raises(PreconditionViolated):
        kst_dense(g, g.n + 1)
    eps_n = g.edge_count / g.n
    with pytest.raises(PreconditionViolated):
        kst_dense(g, int(eps_n) + 1)


def test_kst_dense_exhaustive_dominates_greedy():
    for seed in range(6):
        g = seeded_graph(24, 100 + seed, 0.55)
        if 2 * g.n >= g.edge_count:
            continue
        exact = kst_dense(g, 2, search_mode="exhaustive")
        greedy = kst_dense(g, 2, search_mode="greedy-restarts")
        assert len(exact.b_side) >= len(greedy.b_side)
        assert verify_dense_witness(g, greedy)


def test_kst_dense_greedy_budget_exceeded_carries_witness():
    g = seeded_graph(30, 3, 0.6)
    with pytest.raises(SearchBudgetExceeded) as err:
        kst_dense(g, 3, search_mode="greedy-restarts", budget=35)
    witness = err.value.witness
    assert witness is not None
    assert verify_dense_witness(g, witness)


def test_kst_dense_deterministic():
    g = seeded_graph(64, 8, 0.5)
    a = kst_dense(g, 2, search_mode="greedy-restarts")
    b = kst_dense(g, 2, search_mode="greedy-restarts")
    assert a == b


def test_kst_dense_auto_mode_selects_exhaustive_for_small():
    g = seeded_graph(16, 4, 0.7)
    auto = kst_dense(g, 2, search_mode="auto")
    exact = kst_dense(g, 2, search_mode="exhaustive")
    assert auto == exact


def test_biclique_verifiers_reject_fakes():
    g = seeded_graph(12, 6, 0.4)
    fake = kst_dense(g, 1, search_mode="exhaustive")
    tampered = type(fake)(fake.host_kind, fake.a_side, fake.a_side)  # overlap
    assert not verify_dense_witness(g, tampered)
    host = BipartiteHost.from_bool(VertexSet((0, 1)), np.eye(2, dtype=bool))
    from trimono import BicliqueWitness

    assert not verify_bipartite_witness(host, BicliqueWitness("bipartite", (0, 1), (0,)))

"""Complete-bipartite extraction by double counting and pigeonhole.

Two standalone operations:

* `kst_bipartite` — from a bipartite host with at least |A||B|/l edges, pull
  a complete bipartite pair (A', B') with |A'| = floor(|A|/l) and
  |B'| >= ceil(2^{-|A|} |B|). Computed exactly: B-elements are bucketed by
  their adjacency signature over A, a superset-sum (zeta) transform
  aggregates bucket counts onto every subset of A, and the best size-a
  subset wins. Cost O(2^{|A|} |A|), which the |A| <= 30 cap keeps honest.

* `kst_dense` — from a graph with e = eps*n^2 edges and t < eps*n, pull a
  complete bipartite K_{s,t} with U of size t and W its common neighborhood,
  s >= ceil(eps^t n) - t. Exhaustive mode enumerates all t-subsets and is
  exactly optimal; greedy-restarts mode is best-effort but its witness is
  still complete by construction.

Witness sides are always disjoint and every returned witness verifies by
direct enumeration. All functions are pure; safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from . import _bits
from .errors import PreconditionViolated, SearchBudgetExceeded
from .model import SimpleGraph, VertexSet
from .prng import mix64, randbelow

MAX_SIDE_A = 30
EXHAUSTIVE_SUBSET_BUDGET = 10**6
DEFAULT_RESTARTS = 32
_GREEDY_SEED_TAG = 0x6B73746772656479


@dataclass(frozen=True)
class BipartiteHost:
    """Bipartite graph with a small side A and B-side adjacency signatures.

    `signatures[b]` has bit p set iff B-element b is adjacent to
    `side_a.ids[p]`.
    """

    side_a: VertexSet
    side_b_size: int
    signatures: np.ndarray
    edge_count: int

    def __post_init__(self):
        m = len(self.side_a)
        if m == 0 or m > MAX_SIDE_A:
            raise ValueError(f"|A| must be in [1, {MAX_SIDE_A}]")
        if self.signatures.shape != (self.side_b_size,):
            raise ValueError("one signature per B-element required")
        if self.side_b_size and int(self.signatures.max()) >= (1 << m):
            raise ValueError("signature wider than |A|")
        if self.edge_count != _bits.popcount(self.signatures.astype(np.uint64)):
            raise ValueError("edge_count must equal total signature popcount")

    @classmethod
    def from_bool(cls, side_a: VertexSet, biadjacency: np.ndarray) -> "BipartiteHost":
        """Build from a (|B|, |A|) boolean matrix."""
        b_size, m = biadjacency.shape
        if m != len(side_a):
            raise ValueError("biadjacency width must equal |A|")
        weights = np.uint64(1) << np.arange(m, dtype=np.uint64)
        sigs = (biadjacency.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
        return cls(side_a, b_size, sigs, int(biadjacency.sum()))

    def is_edge(self, a_pos: int, b_index: int) -> bool:
        return bool((int(self.signatures[b_index]) >> a_pos) & 1)


@dataclass(frozen=True)
class BicliqueWitness:
    """A verified complete bipartite certificate.

    For `host_kind == "bipartite"`, a_side holds vertex ids from A and b_side
    holds B-element indices. For `host_kind == "dense-graph"`, both sides
    hold vertex ids of the host graph and are disjoint.
    """

    host_kind: str
    a_side: tuple[int, ...]
    b_side: tuple[int, ...]


def superset_counts(bucket_counts: np.ndarray, m: int) -> np.ndarray:
    """Zeta transform: out[T] = sum of bucket_counts[S] over S superset of T."""
    if bucket_counts.shape != (1 << m,):
        raise ValueError("bucket_counts must have length 2^m")
    out = bucket_counts.astype(np.int64, copy=True)
    for bit in range(m):
        view = out.reshape(-1, 2, 1 << bit)
        view[:, 0, :] += view[:, 1, :]
    return out


def _mask_to_positions(mask: int) -> tuple[int, ...]:
    return tuple(_bits.int_to_positions(mask))


def best_covering_subset(
    bucket_counts: np.ndarray, m: int, a: int
) -> tuple[int, int]:
    """Best size-a subset of [0, m) by covered-element count.

    Returns (mask, count) where count = number of elements whose signature
    contains the mask; ties broken toward the lexicographically smallest
    position tuple.
    """
    if not 1 <= a <= m:
        raise ValueError("subset size a must be in [1, m]")
    coverage = superset_counts(bucket_counts, m)
    masks = np.arange(1 << m, dtype=np.uint32)
    candidates = np.nonzero(np.bitwise_count(masks) == a)[0]
    best = int(coverage[candidates].max())
    tied = candidates[coverage[candidates] == best]
    mask = min((_mask_to_positions(int(t)) for t in tied))
    mask_int = 0
    for p in mask:
        mask_int |= 1 << p
    return mask_int, best


def kst_bipartite(
    host: BipartiteHost, n_colors: int, a_size: int | None = None
) -> BicliqueWitness:
    """Extract (A', B') with A' covering the most B-elements.

    With the default a_size = floor(|A| / n_colors) the host must carry at
    least |A||B|/n_colors edges, and then |B'| >= ceil(2^{-|A|} |B|) by the
    counting argument. An explicit a_size skips the edge precondition and is
    best-effort.
    """
    m = len(host.side_a)
    b = host.side_b_size
    if a_size is None:
        if host.edge_count * n_colors < m * b:
            raise PreconditionViolated(
                f"edge deficit: {host.edge_count} < |A||B|/l = {m * b}/{n_colors}"
            )
        a_size = m // n_colors
        if a_size < 1:
            raise PreconditionViolated(f"|A|={m} shrinks to zero at l={n_colors}")
        guaranteed = -(-b // (1 << m))
    else:
        if not 1 <= a_size <= m:
            raise PreconditionViolated("a_size must be in [1, |A|]")
        guaranteed = 0
    buckets = np.bincount(host.signatures.astype(np.int64), minlength=1 << m)
    mask, count = best_covering_subset(buckets, m, a_size)
    assert count >= guaranteed, "pigeonhole bound violated: implementation bug"
    b_indices = np.nonzero((host.signatures & np.uint64(mask)) == np.uint64(mask))[0]
    a_ids = tuple(host.side_a.ids[p] for p in _bits.int_to_positions(mask))
    return BicliqueWitness("bipartite", a_ids, tuple(int(x) for x in b_indices))


def verify_bipartite_witness(host: BipartiteHost, witness: BicliqueWitness) -> bool:
    """Check every (a, b) pair of the witness is a host edge, by enumeration."""
    if witness.host_kind != "bipartite":
        return False
    positions = []
    for v in witness.a_side:
        try:
            positions.append(host.side_a.ids.index(v))
        except ValueError:
            return False
    for b in witness.b_side:
        if not 0 <= b < host.side_b_size:
            return False
        for p in positions:
            if not host.is_edge(p, b):
                return False
    return True


def binomial_real(x: float, a: int) -> float:
    """Generalized binomial coefficient C(x, a) for real x >= a - 1."""
    out = 1.0
    for i in range(a):
        out *= (x - i) / (a - i)
    return out


def _dense_guarantee(edge_count: int, n: int, t: int) -> int:
    """ceil(eps^t * n) - t with eps = e/n^2, in exact integer arithmetic."""
    num = edge_count**t
    den = n ** (2 * t - 1)
    return -(-num // den) - t


def _check_dense_preconditions(graph: SimpleGraph, t: int):
    n = graph.n
    if t < 1:
        raise PreconditionViolated("t must be at least 1")
    if t > n:
        raise PreconditionViolated(f"t={t} exceeds graph order {n}")
    # t < eps*n  <=>  t*n < e, exactly.
    if t * n >= graph.edge_count:
        raise PreconditionViolated(
            f"t={t} >= eps*n = {graph.edge_count}/{n}; the counting bound is void"
        )


def _witness_from_positions(graph: SimpleGraph, u_pos, w_pos) -> BicliqueWitness:
    ids = graph.universe.ids
    u_ids = tuple(sorted(ids[p] for p in u_pos))
    w_ids = tuple(ids[int(p)] for p in w_pos)
    return BicliqueWitness("dense-graph", u_ids, w_ids)


def _packed_row_positions(row: np.ndarray, n: int) -> np.ndarray:
    return np.nonzero(_bits.unpack_rows(row[None, :], n)[0])[0]


def _exhaustive_dense(graph: SimpleGraph, t: int) -> BicliqueWitness:
    n = graph.n
    if t == 1:
        degrees = graph.degrees()
        best = int(np.argmax(degrees))
        witness = _witness_from_positions(
            graph, (best,), _packed_row_positions(graph.adj[best], n)
        )
    else:
        rows = [graph.row_int(p) for p in range(n)]
        best_count = -1
        best_u: tuple[int, ...] = ()
        best_bits = 0
        for u in combinations(range(n), t):
            common = rows[u[0]]
            for p in u[1:]:
                common &= rows[p]
                if not common:
                    break
            count = common.bit_count()
            if count > best_count:
                best_count, best_u, best_bits = count, u, common
        witness = _witness_from_positions(graph, best_u, _bits.int_to_positions(best_bits))
    bound = _dense_guarantee(graph.edge_count, n, t)
    assert len(witness.b_side) >= bound, "dense counting bound violated: implementation bug"
    return witness


def _greedy_dense(
    graph: SimpleGraph, t: int, restarts: int, seed: int, budget: int | None
) -> BicliqueWitness:
    n = graph.n
    adj = graph.adj
    degrees = graph.degrees()
    evals = 0
    best_count = -1
    best_u: tuple[int, ...] = ()
    best_w: np.ndarray | None = None
    key = mix64(seed ^ _GREEDY_SEED_TAG)
    for restart in range(restarts):
        if restart == 0:
            start = int(np.argmax(degrees))
        else:
            start = randbelow(key, restart, n)
        u = [start]
        common = adj[start].copy()
        while len(u) < t:
            counts = _bits.row_popcounts(adj & common[None, :])
            counts[u] = -1
            evals += n
            if budget is not None and evals > budget:
                if best_w is None:
                    best_u, best_w = tuple(u), common
                raise SearchBudgetExceeded(
                    f"greedy search exceeded {budget} candidate evaluations",
                    witness=_witness_from_positions(
                        graph, best_u, _packed_row_positions(best_w, n)
                    ),
                )
            nxt = int(np.argmax(counts))
            u.append(nxt)
            common &= adj[nxt]
        count = _bits.popcount(common)
        if count > best_count:
            best_count, best_u, best_w = count, tuple(u), common
    return _witness_from_positions(graph, best_u, _packed_row_positions(best_w, n))


def kst_dense(
    graph: SimpleGraph,
    t: int,
    search_mode: str = "auto",
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    budget: int | None = None,
) -> BicliqueWitness:
    """Find U (|U| = t) with a large common neighborhood W, U and W disjoint.

    Modes: "exhaustive" enumerates all C(n, t) subsets and returns the exact
    optimum (lexicographically least maximizer); "greedy-restarts" grows U
    one vertex at a time under `restarts` seeded restarts; "auto" picks
    exhaustive iff C(n, t) <= 10^6.
    """
    _check_dense_preconditions(graph, t)
    if search_mode == "auto":
        search_mode = (
            "exhaustive" if comb(graph.n, t) <= EXHAUSTIVE_SUBSET_BUDGET else "greedy-restarts"
        )
    if search_mode == "exhaustive":
        return _exhaustive_dense(graph, t)
    if search_mode == "greedy-restarts":
        return _greedy_dense(graph, t, restarts, seed, budget)
    raise ValueError(f"unknown search mode {search_mode!r}")


def verify_dense_witness(graph: SimpleGraph, witness: BicliqueWitness) -> bool:
    """Check disjointness and all t*|W| adjacencies by enumeration."""
    if witness.host_kind != "dense-graph":
        return False
    if set(witness.a_side) & set(witness.b_side):
        return False
    try:
        u_pos = [graph.universe.ids.index(v) for v in witness.a_side]
        w_pos = [graph.universe.ids.index(v) for v in witness.b_side]
    except ValueError:
        return False
    return all(graph.has_edge(u, w) for u in u_pos for w in w_pos)

"""Core data types: triple colorings, vertex sets, graphs, censuses.

Triples are indexed colexicographically: the sorted triple i < j < k has rank
C(k,3) + C(j,2) + i, a bijection between [0, C(N,3)) and sorted triples that
is O(1) both ways and stable when N grows.

All types here are immutable after construction and safe to share across
threads; implicit color evaluation is pure and reentrant.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator

import numpy as np

from . import _bits

MAX_COLORS = 16
# Keeps k*(k-1)*(k-2) within signed 64-bit range for vectorized rank math.
MAX_VERTICES = 2_000_000


def triple_count(n: int) -> int:
    return math.comb(n, 3)


def colex_rank(i: int, j: int, k: int) -> int:
    """Rank of the sorted triple i < j < k in colexicographic order."""
    if not 0 <= i < j < k:
        raise ValueError(f"triple must satisfy 0 <= i < j < k, got ({i}, {j}, {k})")
    return math.comb(k, 3) + math.comb(j, 2) + i


def colex_unrank(rank: int) -> tuple[int, int, int]:
    """Inverse of colex_rank."""
    if rank < 0:
        raise ValueError("rank must be non-negative")
    k = max(2, int(round((6 * rank) ** (1 / 3))))
    while math.comb(k + 1, 3) <= rank:
        k += 1
    while math.comb(k, 3) > rank:
        k -= 1
    rem = rank - math.comb(k, 3)
    j = max(1, int(math.isqrt(2 * rem)))
    while math.comb(j + 1, 2) <= rem:
        j += 1
    while math.comb(j, 2) > rem:
        j -= 1
    i = rem - math.comb(j, 2)
    return i, j, k


def colex_rank_array(i: np.ndarray, j: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Vectorized colex_rank over int64 arrays of sorted triples."""
    i = i.astype(np.int64, copy=False)
    j = j.astype(np.int64, copy=False)
    k = k.astype(np.int64, copy=False)
    return (k * (k - 1) * (k - 2)) // 6 + (j * (j - 1)) // 2 + i


def sort3_arrays(a: np.ndarray, b: np.ndarray, c: np.ndarray):
    """Sort three parallel int64 arrays elementwise into lo <= mid <= hi."""
    lo = np.minimum(np.minimum(a, b), c)
    hi = np.maximum(np.maximum(a, b), c)
    mid = a + b + c - lo - hi
    return lo, mid, hi


@dataclass(frozen=True)
class VertexSet:
    """A sorted set of distinct vertex ids."""

    ids: tuple[int, ...]

    def __post_init__(self):
        prev = -1
        for v in self.ids:
            if v <= prev:
                raise ValueError("vertex ids must be strictly increasing")
            prev = v
        if self.ids and self.ids[0] < 0:
            raise ValueError("vertex ids must be non-negative")

    @classmethod
    def from_iterable(cls, it: Iterable[int]) -> "VertexSet":
        return cls(tuple(sorted(int(v) for v in it)))

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[int]:
        return iter(self.ids)

    def __contains__(self, v: int) -> bool:
        pos = bisect_left(self.ids, v)
        return pos < len(self.ids) and self.ids[pos] == v

    def as_array(self) -> np.ndarray:
        return np.asarray(self.ids, dtype=np.int64)

    def take_first(self, n: int) -> "VertexSet":
        if n > len(self.ids):
            raise ValueError("cannot take more vertices than the set holds")
        return VertexSet(self.ids[:n])

    def is_disjoint_from(self, other: "VertexSet") -> bool:
        return not set(self.ids) & set(other.ids)


@dataclass(frozen=True)
class ColorCensus:
    """Per-color triple counts over some subset, plus the triple total."""

    counts: tuple[int, ...]
    total: int

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("census counts must be non-negative")
        if sum(self.counts) != self.total:
            raise ValueError("census counts must sum to the triple total")

    @property
    def majority_color(self) -> int:
        return max(range(len(self.counts)), key=lambda c: (self.counts[c], -c))

    @property
    def majority_count(self) -> int:
        return self.counts[self.majority_color]

    @property
    def majority_density(self) -> float:
        if self.total == 0:
            return 1.0
        return self.majority_count / self.total


def _bits_per_color(n_colors: int) -> int:
    # Power-of-two widths only, so a color never straddles a byte.
    if n_colors <= 2:
        return 1
    if n_colors <= 4:
        return 2
    return 4


class ExplicitBacking:
    """All C(N,3) colors stored packed, indexed by colex rank."""

    kind = "explicit"

    def __init__(self, packed: np.ndarray, bits_per_color: int, n_triples: int):
        self.packed = packed
        self.bits_per_color = bits_per_color
        self.n_triples = n_triples

    @classmethod
    def from_colors(cls, colors: np.ndarray, n_colors: int) -> "ExplicitBacking":
        bits = _bits_per_color(n_colors)
        per_byte = 8 // bits
        n = len(colors)
        padded = np.zeros(((n + per_byte - 1) // per_byte) * per_byte, dtype=np.uint16)
        padded[:n] = colors
        shifts = (np.arange(per_byte, dtype=np.uint16) * bits).astype(np.uint16)
        packed = (padded.reshape(-1, per_byte) << shifts).sum(axis=1).astype(np.uint8)
        return cls(packed, bits, n)

    def colors_at(self, ranks: np.ndarray) -> np.ndarray:
        bits = self.bits_per_color
        per_byte = 8 // bits
        byte_idx = ranks // per_byte
        shift = ((ranks % per_byte) * bits).astype(np.uint8)
        mask = np.uint8((1 << bits) - 1)
        return (self.packed[byte_idx] >> shift) & mask

    def sorted_triple_colors(self, i: np.ndarray, j: np.ndarray, k: np.ndarray) -> np.ndarray:
        return self.colors_at(colex_rank_array(i, j, k))

    def header_fields(self):
        return None


@dataclass(frozen=True)
class TripleColoring:
    """An assignment of one of `n_colors` colors to every triple of [0, N).

    The backing is either explicit (stored colors, rank-indexed) or implicit
    (a pure deterministic function of the triple). Implicit backings make
    large N usable without C(N,3) storage.
    """

    n_vertices: int
    n_colors: int
    backing: object

    def __post_init__(self):
        if not 3 <= self.n_vertices <= MAX_VERTICES:
            raise ValueError(f"n_vertices must be in [3, {MAX_VERTICES}]")
        if not 1 <= self.n_colors <= MAX_COLORS:
            raise ValueError(f"n_colors must be in [1, {MAX_COLORS}]")

    @property
    def is_explicit(self) -> bool:
        return isinstance(self.backing, ExplicitBacking)

    def color_of(self, i: int, j: int, k: int) -> int:
        """Color of the triple {i, j, k}; order-insensitive."""
        if len({i, j, k}) != 3:
            raise ValueError(f"triple vertices must be distinct, got ({i}, {j}, {k})")
        lo, mid, hi = sorted((i, j, k))
        if lo < 0 or hi >= self.n_vertices:
            raise ValueError(f"vertex out of range [0, {self.n_vertices})")
        out = self.backing.sorted_triple_colors(
            np.array([lo], dtype=np.int64),
            np.array([mid], dtype=np.int64),
            np.array([hi], dtype=np.int64),
        )
        return int(out[0])

    def colors_of(
        self, i: np.ndarray, j: np.ndarray, k: np.ndarray, validate: bool = False
    ) -> np.ndarray:
        """Vectorized color lookup; sorts each triple internally."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        k = np.asarray(k, dtype=np.int64)
        lo, mid, hi = sort3_arrays(i, j, k)
        if validate:
            if lo.size and (int(lo.min()) < 0 or int(hi.max()) >= self.n_vertices):
                raise ValueError("vertex out of range")
            if np.any(lo == mid) or np.any(mid == hi):
                raise ValueError("triple vertices must be distinct")
        return self.backing.sorted_triple_colors(lo, mid, hi)

    def materialize(self, chunk_triples: int = 1 << 22) -> "TripleColoring":
        """Explicit copy of this coloring (evaluates all C(N,3) triples)."""
        n = self.n_vertices
        total = triple_count(n)
        colors = np.empty(total, dtype=np.uint8)
        pos = 0
        for lo, mid, hi in iter_colex_triples(n, chunk_triples):
            out = self.backing.sorted_triple_colors(lo, mid, hi)
            colors[pos : pos + len(out)] = out
            pos += len(out)
        backing = ExplicitBacking.from_colors(colors, self.n_colors)
        return TripleColoring(self.n_vertices, self.n_colors, backing)


def iter_colex_triples(n: int, chunk: int = 1 << 22):
    """Yield (i, j, k) int64 arrays covering all sorted triples in colex order."""
    buf_i, buf_j, buf_k = [], [], []
    size = 0
    for k in range(2, n):
        j = np.repeat(np.arange(1, k, dtype=np.int64), np.arange(1, k))
        i = np.concatenate([np.arange(jj, dtype=np.int64) for jj in range(1, k)])
        buf_i.append(i)
        buf_j.append(j)
        buf_k.append(np.full(len(i), k, dtype=np.int64))
        size += len(i)
        if size >= chunk:
            yield np.concatenate(buf_i), np.concatenate(buf_j), np.concatenate(buf_k)
            buf_i, buf_j, buf_k = [], [], []
            size = 0
    if size:
        yield np.concatenate(buf_i), np.concatenate(buf_j), np.concatenate(buf_k)


@lru_cache(maxsize=32)
def _triple_index_template(s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    idx = np.array(list(combinations(range(s), 3)), dtype=np.int64)
    return idx[:, 0], idx[:, 1], idx[:, 2]


def color_census(coloring: TripleColoring, subset: VertexSet) -> ColorCensus:
    """Exact per-color triple counts over `subset`."""
    s = len(subset)
    if subset.ids and subset.ids[-1] >= coloring.n_vertices:
        raise ValueError("subset vertex out of range")
    if s < 3:
        return ColorCensus(tuple([0] * coloring.n_colors), 0)
    ids = subset.as_array()
    counts = np.zeros(coloring.n_colors, dtype=np.int64)
    if s <= 64:
        ti, tj, tk = _triple_index_template(s)
        cols = coloring.colors_of(ids[ti], ids[tj], ids[tk])
        counts += np.bincount(cols, minlength=coloring.n_colors)
    else:
        for lo, mid, hi in iter_colex_triples(s):
            cols = coloring.colors_of(ids[lo], ids[mid], ids[hi])
            counts += np.bincount(cols, minlength=coloring.n_colors)
    return ColorCensus(tuple(int(c) for c in counts), triple_count(s))


class SimpleGraph:
    """Undirected loop-free graph over a vertex universe, packed adjacency.

    Adjacency is indexed by *position* within the universe (0..n-1); use
    `universe.ids` to translate back to vertex ids.
    """

    def __init__(
        self,
        universe: VertexSet,
        adj: np.ndarray,
        edge_count: int,
        validate: bool | None = None,
    ):
        self.universe = universe
        self.adj = adj
        self.edge_count = edge_count
        n = len(universe)
        if adj.shape != (n, _bits.words_for(n)):
            raise ValueError("adjacency shape does not match universe")
        if validate is None:
            validate = n <= 2048
        if validate:
            self._validate()

    def _validate(self):
        n = self.n
        if _bits.popcount(self.adj) != 2 * self.edge_count:
            raise ValueError("edge_count does not match adjacency popcount")
        pad = self.adj.shape[1] * 64 - n
        if pad and int((self.adj[:, -1] >> np.uint64(64 - pad)).max(initial=0)) != 0:
            raise ValueError("padding bits must be zero")
        rows = np.arange(n)
        diag = (self.adj[rows, rows >> 6] >> (rows & 63).astype(np.uint64)) & np.uint64(1)
        if diag.any():
            raise ValueError("graph must be irreflexive")
        if not np.array_equal(self.adj, _bits.transpose_packed(self.adj, n)):
            raise ValueError("adjacency must be symmetric")

    @property
    def n(self) -> int:
        return len(self.universe)

    @classmethod
    def complete(cls, universe: VertexSet) -> "SimpleGraph":
        n = len(universe)
        return cls(universe, _bits.complete_adjacency(n), n * (n - 1) // 2, validate=False)

    @classmethod
    def from_bool(cls, universe: VertexSet, dense: np.ndarray) -> "SimpleGraph":
        n = len(universe)
        if dense.shape != (n, n):
            raise ValueError("dense matrix shape mismatch")
        packed = _bits.pack_bool_rows(dense, _bits.words_for(n))
        return cls(universe, packed, int(dense.sum()) // 2)

    @classmethod
    def from_upper_packed(
        cls, universe: VertexSet, upper: np.ndarray, edge_count: int
    ) -> "SimpleGraph":
        n = len(universe)
        return cls(universe, _bits.symmetrize_upper(upper, n), edge_count, validate=n <= 2048)

    def degrees(self) -> np.ndarray:
        return _bits.row_popcounts(self.adj)

    def has_edge(self, p: int, q: int) -> bool:
        return bool((self.adj[p, q >> 6] >> np.uint64(q & 63)) & np.uint64(1))

    def row_int(self, p: int) -> int:
        return _bits.row_to_int(self.adj[p])

    def to_bool(self) -> np.ndarray:
        return _bits.unpack_rows(self.adj, self.n)

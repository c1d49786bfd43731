"""Round-based extraction of monochromatic complete multipartite structure.

State after round i: disjoint parts V_1..V_i, a reservoir S_i, and a pair
coloring chi on round indices such that every triple spanning V_a, V_b and
any later part or the reservoir (a < b) has color chi(a, b).

Round i+1 runs i refine steps then a close:

* refine step j+1 takes the majority color over all triples made of a vertex
  of V_{j+1} and an edge of the current work graph on S_i, then keeps the
  part subset covering the most edges and the edges covered by all of it
  (the bipartite extraction, computed by signature bucketing + zeta
  transform without materializing the host);
* close applies the dense-graph extraction to the final work graph, yielding
  the new part V_{i+1} and the next reservoir S_{i+1}.

A monochromatic (d-1)-clique in chi plus one reservoir part assembles a
monochromatic complete d-partite triple system.

Two modes: `strict` follows the floor-of-schedule sizes (part i has
floor(l^-i sqrt(log2 N)) vertices) and asserts the bookkeeping bounds,
failing fast with structured errors; `adaptive` aims directly at the
requested d and n, keeps parts at size n, and stops as soon as chi contains
a monochromatic (d-1)-clique.

A single run is sequential; runs on shared colorings may proceed in
parallel. Identical (coloring, request) pairs produce identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _bits
from .errors import (
    CliqueNotFound,
    PreconditionViolated,
    ReservoirExhausted,
    StrictBoundMissed,
    StrictSizeUnderflow,
)
from .lemmas import best_covering_subset, kst_dense
from .model import SimpleGraph, TripleColoring, VertexSet, sort3_arrays
from .oracle import r2_upper_bound

DEFAULT_RESERVOIR_CAP = 65536
_EDGE_CHUNK = 1 << 23
_CACHE_BUDGET_BYTES = 1 << 28
_CLOSE_SEED_TAG = 0x636C6F7365726E64


@dataclass(frozen=True)
class ExtractionRequest:
    """Target shape and mode for one extraction run."""

    d: int
    n: int
    mode: str = "adaptive"
    r_cap: int | None = None
    reservoir_cap: int = DEFAULT_RESERVOIR_CAP

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("d must be at least 3")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.mode not in ("strict", "adaptive"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.r_cap is not None and self.r_cap < self.d - 1:
            raise ValueError("r_cap must be at least d - 1")
        if self.reservoir_cap < 3:
            raise ValueError("reservoir_cap must be at least 3")

    def effective_r_cap(self) -> int:
        if self.r_cap is not None:
            return self.r_cap
        return max(2 * (self.d - 1), 8)


@dataclass(frozen=True)
class PairColorMatrix:
    """Colors chi(a, b) on pairs of round indices 1 <= a < b <= order."""

    order: int
    entries: dict

    @classmethod
    def empty(cls) -> "PairColorMatrix":
        return cls(1, {})

    def color(self, a: int, b: int) -> int:
        if not 1 <= a < b <= self.order:
            raise ValueError(f"pair ({a}, {b}) outside order {self.order}")
        return self.entries[(a, b)]

    def with_entry(self, a: int, b: int, color: int) -> "PairColorMatrix":
        if not 1 <= a < b:
            raise ValueError("need a < b")
        merged = dict(self.entries)
        merged[(a, b)] = color
        return PairColorMatrix(self.order, merged)

    def with_order(self, order: int) -> "PairColorMatrix":
        return PairColorMatrix(order, dict(self.entries))

    def colors_present(self) -> set[int]:
        return set(self.entries.values())

    def as_json_dict(self) -> dict:
        return {f"{a},{b}": c for (a, b), c in sorted(self.entries.items())}


@dataclass
class ExtractionTrace:
    """Per-step record of an extraction run, JSON-serializable."""

    n_vertices: int
    n_colors: int
    mode: str
    records: list = field(default_factory=list)
    achieved_n: int | None = None
    achieved_rounds: int | None = None
    achieved_c: float | None = None

    def add(self, record: dict) -> None:
        self.records.append(record)

    def as_json_dict(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "n_colors": self.n_colors,
            "mode": self.mode,
            "records": self.records,
            "achieved_n": self.achieved_n,
            "achieved_rounds": self.achieved_rounds,
            "achieved_c": self.achieved_c,
        }


@dataclass(frozen=True)
class PartitionState:
    """Live engine state: parts, reservoir, chi, current work graph.

    `step` counts refine steps finished inside the round currently being
    built (round `round + 1`); `work_graph is None` means no refine step has
    run yet, in which case the work graph is the complete graph on the
    reservoir.
    """

    round: int
    parts: tuple[VertexSet, ...]
    reservoir: VertexSet
    chi: PairColorMatrix
    work_graph: SimpleGraph | None
    step: int
    request: ExtractionRequest
    trace: ExtractionTrace

    def part_sizes(self) -> list[int]:
        return [len(p) for p in self.parts]


@dataclass(frozen=True)
class MultipartiteEmbedding:
    """d disjoint n-sets whose crossing triples all share one color."""

    parts: tuple[VertexSet, ...]
    color: int

    @property
    def d(self) -> int:
        return len(self.parts)

    @property
    def part_size(self) -> int:
        return len(self.parts[0])

    def vertex_union(self) -> VertexSet:
        return VertexSet.from_iterable(v for p in self.parts for v in p)

    def as_json_dict(self) -> dict:
        return {
            "color": self.color,
            "parts": [list(p.ids) for p in self.parts],
        }


@dataclass(frozen=True)
class EmbeddingCheck:
    ok: bool
    first_violation: tuple[int, int, int] | None
    triples_checked: int
    reason: str | None = None


def _sqrt_log2(n_vertices: int) -> float:
    return math.sqrt(math.log2(n_vertices))


def strict_part_size(n_vertices: int, n_colors: int, round_index: int) -> int:
    """Floor of l^-i sqrt(log2 N), the scheduled size of parts after round i."""
    return int(_sqrt_log2(n_vertices) / n_colors**round_index)


def init_round(coloring: TripleColoring, req: ExtractionRequest) -> PartitionState:
    """Round 1: pick the first part and the reservoir.

    Strict mode takes the first floor(l^-1 sqrt(log2 N)) vertices; adaptive
    takes the first req.n. The reservoir is what remains, truncated to
    req.reservoir_cap keeping the lexicographically smallest vertices.
    """
    n_vertices = coloring.n_vertices
    trace = ExtractionTrace(n_vertices, coloring.n_colors, req.mode)
    if req.mode == "strict":
        size = strict_part_size(n_vertices, coloring.n_colors, 1)
        if size < 1:
            raise StrictSizeUnderflow(
                f"floor(l^-1 sqrt(log2 N)) = 0 at N={n_vertices}, l={coloring.n_colors}",
                trace=trace,
            )
    else:
        size = req.n
    if n_vertices - size < 2:
        raise PreconditionViolated(
            f"first part of size {size} leaves no usable reservoir at N={n_vertices}"
        )
    part = VertexSet(tuple(range(size)))
    reservoir = VertexSet(tuple(range(size, min(n_vertices, size + req.reservoir_cap))))
    state = PartitionState(
        round=1,
        parts=(part,),
        reservoir=reservoir,
        chi=PairColorMatrix.empty(),
        work_graph=None,
        step=0,
        request=req,
        trace=trace,
    )
    trace.add(
        {
            "kind": "init",
            "round": 1,
            "part_sizes": state.part_sizes(),
            "reservoir": len(reservoir),
        }
    )
    if req.mode == "strict":
        _assert_reservoir_bound(state, 1)
    return state


def _iter_edge_chunks(work: SimpleGraph | None, n: int):
    """Yield (r0, r1, w_rel, wp) int32 edge chunks with w = r0 + w_rel < wp.

    `work is None` means the complete graph on n vertices, whose pairs are
    generated directly; otherwise edges come from the packed adjacency,
    upper triangle only.
    """
    rows_per_block = max(1, _EDGE_CHUNK // max(n, 1))
    if work is None:
        tile = np.arange(n, dtype=np.int32)
        for r0 in range(0, n, rows_per_block):
            r1 = min(n, r0 + rows_per_block)
            sizes = (n - 1) - tile[r0:r1]
            w_rel = np.repeat(np.arange(r1 - r0, dtype=np.int32), sizes)
            if len(w_rel):
                wp = np.concatenate([tile[r + 1 :] for r in range(r0, r1)])
                yield r0, r1, w_rel, wp
        return
    col_idx = np.arange(n, dtype=np.int32)
    for r0 in range(0, n, rows_per_block):
        r1 = min(n, r0 + rows_per_block)
        mask = _bits.unpack_rows(work.adj[r0:r1], n)
        mask &= col_idx[None, :] > np.arange(r0, r1, dtype=np.int32)[:, None]
        w_rel, wp = np.nonzero(mask)
        if len(w_rel):
            yield r0, r1, w_rel.astype(np.int32), wp.astype(np.int32)


class _RefineOutcome:
    __slots__ = (
        "majority_color",
        "color_counts",
        "chosen_ids",
        "coverage",
        "host_pairs",
        "graph",
    )

    def __init__(self, majority_color, color_counts, chosen_ids, coverage, host_pairs, graph):
        self.majority_color = majority_color
        self.color_counts = color_counts
        self.chosen_ids = chosen_ids
        self.coverage = coverage
        self.host_pairs = host_pairs
        self.graph = graph


_JOINT_CODE_BUDGET = 1 << 22


def _refine_core(
    coloring: TripleColoring,
    part_ids: tuple[int, ...],
    s_ids: np.ndarray,
    work: SimpleGraph | None,
    a_size: int,
) -> _RefineOutcome:
    """One refinement against the reservoir work graph, streamed in chunks.

    Colors are evaluated chunk by chunk so the (part x edges) host is never
    materialized. When l^m joint color codes fit a budget, one sweep serves
    both the majority count and the signature buckets; when the run is small
    enough, per-chunk endpoint and color arrays are cached so later passes
    replay instead of re-evaluating.
    """
    n = len(s_ids)
    m = len(part_ids)
    n_colors = coloring.n_colors
    total_edges = n * (n - 1) // 2 if work is None else work.edge_count
    if total_edges == 0:
        raise PreconditionViolated("work graph has no edges")
    part_vals = [int(v) for v in part_ids]
    backing = coloring.backing
    base = int(s_ids[0])
    contiguous = bool(np.array_equal(s_ids, base + np.arange(n, dtype=np.int64)))
    cache = [] if total_edges * (8 + m) <= _CACHE_BUDGET_BYTES else None

    def endpoint_ids(r0, w_rel, wp):
        if contiguous:
            return w_rel.astype(np.int64) + (r0 + base), wp.astype(np.int64) + base
        return s_ids[w_rel + r0], s_ids[wp]

    def vertex_colors(v: int, wi, wj):
        # wi < wj elementwise and v is outside the reservoir, so the sorted
        # triple is (min, clip, max) -- cheaper than a full 3-way sort.
        return backing.sorted_triple_colors(
            np.minimum(wi, v), np.clip(v, wi, wj), np.maximum(wj, v)
        )

    def replay(parts_sel: list[int]):
        """Yield (r0, r1, w_rel, wp, colors[len(parts_sel), chunk])."""
        if cache is not None:
            for r0, r1, w_rel, wp, cols in cache:
                yield r0, r1, w_rel, wp, cols[parts_sel]
            return
        for r0, r1, w_rel, wp in _iter_edge_chunks(work, n):
            wi, wj = endpoint_ids(r0, w_rel, wp)
            cols = np.empty((len(parts_sel), len(w_rel)), dtype=np.uint8)
            for row, p in enumerate(parts_sel):
                cols[row] = vertex_colors(part_vals[p], wi, wj)
            yield r0, r1, w_rel, wp, cols

    n_codes = n_colors**m
    joint = n_codes <= _JOINT_CODE_BUDGET
    counts = np.zeros(n_colors, dtype=np.int64)
    code_counts = np.zeros(n_codes, dtype=np.int64) if joint else None

    # Pass 1: one sweep computing all part-vertex colors per chunk.
    for r0, r1, w_rel, wp in _iter_edge_chunks(work, n):
        wi, wj = endpoint_ids(r0, w_rel, wp)
        cols = np.empty((m, len(w_rel)), dtype=np.uint8)
        for row in range(m):
            cols[row] = vertex_colors(part_vals[row], wi, wj)
            if not joint:
                counts += np.bincount(cols[row], minlength=n_colors)
        if joint:
            code = cols[0].astype(np.int32)
            mult = n_colors
            for row in range(1, m):
                code += cols[row].astype(np.int32) * np.int32(mult)
                mult *= n_colors
            code_counts += np.bincount(code, minlength=n_codes)
        if cache is not None:
            cache.append((r0, r1, w_rel, wp, cols))

    buckets = np.zeros(1 << m, dtype=np.int64)
    if joint:
        # Derive per-color counts and majority-signature buckets from the
        # joint code distribution instead of a second sweep.
        digits = np.empty((m, n_codes), dtype=np.int64)
        tmp = np.arange(n_codes, dtype=np.int64)
        for row in range(m):
            digits[row] = tmp % n_colors
            tmp //= n_colors
        for c in range(n_colors):
            counts[c] = int(((digits == c).sum(axis=0) * code_counts).sum())
        majority = int(np.argmax(counts))  # first max = smallest color id
        sig_of_code = np.zeros(n_codes, dtype=np.int64)
        for row in range(m):
            sig_of_code |= (digits[row] == majority).astype(np.int64) << row
        np.add.at(buckets, sig_of_code, code_counts)
    else:
        majority = int(np.argmax(counts))
        for _r0, _r1, _w, _wp, cols in replay(list(range(m))):
            sig = np.zeros(cols.shape[1], dtype=np.int64)
            for row in range(m):
                sig |= (cols[row] == majority).astype(np.int64) << row
            buckets += np.bincount(sig, minlength=1 << m)

    mask, coverage = best_covering_subset(buckets, m, a_size)
    chosen_pos = _bits.int_to_positions(mask)
    chosen_ids = tuple(part_vals[p] for p in chosen_pos)
    universe = VertexSet(tuple(int(v) for v in s_ids))

    # Final pass: edges covered by every chosen part vertex form the next
    # work graph. Full and empty coverage skip the sweep entirely.
    if coverage == total_edges:
        adj = _bits.complete_adjacency(n) if work is None else work.adj
        graph = SimpleGraph(universe, adj, total_edges, validate=False)
        return _RefineOutcome(majority, counts, chosen_ids, coverage, total_edges, graph)
    n_words = _bits.words_for(n)
    upper = np.zeros((n, n_words), dtype=np.uint64)
    if coverage > 0:
        for r0, r1, w_rel, wp, cols in replay(chosen_pos):
            keep = cols[0] == majority
            for row in range(1, cols.shape[0]):
                keep &= cols[row] == majority
            if keep.any():
                block = np.zeros((r1 - r0, n), dtype=bool)
                block[w_rel[keep], wp[keep]] = True
                upper[r0:r1] |= _bits.pack_bool_rows(block, n_words)
        graph = SimpleGraph.from_upper_packed(universe, upper, coverage)
    else:
        graph = SimpleGraph(universe, upper, 0, validate=False)
    return _RefineOutcome(majority, counts, chosen_ids, coverage, total_edges, graph)


def _strict_edge_bound_log2(state: PartitionState, coloring: TripleColoring) -> float:
    """log2 of the scheduled edge floor for the work graph after this step."""
    i, j = state.round, state.step
    sqrt_log = _sqrt_log2(coloring.n_vertices)
    s_size = len(state.reservoir)
    return -2.0 - (j + 1) * sqrt_log / coloring.n_colors**i + 2.0 * math.log2(s_size)


def refine_step(state: PartitionState, coloring: TripleColoring) -> PartitionState:
    """Refine part V_{j+1} against the work graph; fixes chi(j+1, i+1)."""
    i, j = state.round, state.step
    if j >= i:
        raise PreconditionViolated(f"round {i + 1} has only {i} refine steps")
    strict = state.request.mode == "strict"
    part = state.parts[j]
    if strict:
        a_size = len(part) // coloring.n_colors
        if a_size < 1:
            raise PreconditionViolated(
                f"|A|={len(part)} shrinks to zero at l={coloring.n_colors}"
            )
    else:
        a_size = min(len(part), state.request.n)
    outcome = _refine_core(
        coloring, part.ids, state.reservoir.as_array(), state.work_graph, a_size
    )
    record = {
        "kind": "refine",
        "round": i + 1,
        "step": j + 1,
        "color": outcome.majority_color,
        "host_pairs": outcome.host_pairs,
        "work_edges": outcome.coverage,
        "part_sizes": None,  # filled below
        "reservoir": len(state.reservoir),
    }
    if strict:
        bound_log2 = _strict_edge_bound_log2(state, coloring)
        ok = outcome.coverage > 0 and math.log2(outcome.coverage) >= bound_log2 - 1e-9
        record["edge_floor_log2"] = bound_log2
        record["edge_floor_ok"] = ok
        if not ok:
            state.trace.add(record)
            raise StrictBoundMissed(
                f"e(G) = {outcome.coverage} under scheduled floor 2^{bound_log2:.3f}",
                trace=state.trace,
            )
    parts = list(state.parts)
    parts[j] = VertexSet(outcome.chosen_ids)
    new_state = replace(
        state,
        parts=tuple(parts),
        chi=state.chi.with_entry(j + 1, i + 1, outcome.majority_color),
        work_graph=outcome.graph,
        step=j + 1,
    )
    record["part_sizes"] = new_state.part_sizes()
    state.trace.add(record)
    return new_state


def _assert_reservoir_bound(state: PartitionState, round_index: int) -> None:
    """Exact check of |S_i| >= N^(1/4 + 2^-i) via integer powers.

    A reservoir truncated to reservoir_cap saturates the floor at the cap:
    the memory ceiling is an explicit request and overrides the schedule.
    """
    s = len(state.reservoir)
    if s >= state.request.reservoir_cap:
        return
    n = state.trace.n_vertices
    i = round_index
    # (1/4 + 2^-i) * 4 * 2^i = 2^i + 4
    if s ** (4 * 2**i) < n ** (2**i + 4):
        raise StrictBoundMissed(
            f"|S_{i}| = {s} under scheduled floor N^(1/4 + 2^-{i})",
            trace=state.trace,
        )


def close_round(state: PartitionState, coloring: TripleColoring) -> PartitionState:
    """Split the work graph into the next part and the next reservoir."""
    i = state.round
    if state.step != i:
        raise PreconditionViolated(
            f"close needs all {i} refine steps done, only {state.step} ran"
        )
    if state.work_graph is None:
        raise PreconditionViolated("no work graph; run the refine steps first")
    strict = state.request.mode == "strict"
    t = len(state.parts[0]) if strict else state.request.n
    witness = kst_dense(
        state.work_graph,
        t,
        search_mode="auto",
        seed=_CLOSE_SEED_TAG + i,
    )
    new_part = VertexSet.from_iterable(witness.a_side)
    w_sorted = sorted(witness.b_side)
    reservoir = VertexSet(tuple(w_sorted[: state.request.reservoir_cap]))
    closed = replace(
        state,
        round=i + 1,
        parts=state.parts + (new_part,),
        reservoir=reservoir,
        chi=state.chi.with_order(i + 1),
        work_graph=None,
        step=0,
    )
    record = {
        "kind": "close",
        "round": i + 1,
        "part_sizes": closed.part_sizes(),
        "reservoir": len(reservoir),
        "closed_work_edges": state.work_graph.edge_count,
    }
    state.trace.add(record)
    if len(reservoir) < state.request.n:
        raise ReservoirExhausted(
            f"reservoir fell to {len(reservoir)} < n = {state.request.n}",
            trace=state.trace,
        )
    if strict:
        _assert_reservoir_bound(closed, i + 1)
    return closed


def find_mono_clique(chi: PairColorMatrix, size: int) -> VertexSet | None:
    """Lexicographically least index set of `size` with all pairs one color.

    Exact branch-and-bound search per color class over the round indices
    1..order; returns None when no such clique exists.
    """
    if size < 1:
        raise ValueError("clique size must be at least 1")
    order = chi.order
    if size == 1:
        return VertexSet((1,)) if order >= 1 else None
    if size > order:
        return None
    best: tuple[int, ...] | None = None
    for color in sorted(chi.colors_present()):
        found = _lex_clique_in_color(chi, color, size)
        if found is not None and (best is None or found < best):
            best = found
    return VertexSet(best) if best is not None else None


def _lex_clique_in_color(chi: PairColorMatrix, color: int, size: int) -> tuple[int, ...] | None:
    order = chi.order
    adj = {v: set() for v in range(1, order + 1)}
    for (a, b), c in chi.entries.items():
        if c == color and b <= order:
            adj[a].add(b)
            adj[b].add(a)

    def extend(current: list[int], candidates: list[int]) -> tuple[int, ...] | None:
        if len(current) == size:
            return tuple(current)
        for idx, v in enumerate(candidates):
            if len(current) + len(candidates) - idx < size:
                return None
            nxt = [w for w in candidates[idx + 1 :] if w in adj[v]]
            if len(current) + 1 + len(nxt) >= size:
                out = extend(current + [v], nxt)
                if out is not None:
                    return out
        return None

    return extend([], list(range(1, order + 1)))


def crossing_triples(parts: tuple[VertexSet, ...]):
    """All triples meeting three distinct parts, as sorted int64 arrays."""
    from itertools import combinations as _comb

    chunks_i, chunks_j, chunks_k = [], [], []
    for pa, pb, pc in _comb(parts, 3):
        a, b, c = np.meshgrid(pa.as_array(), pb.as_array(), pc.as_array(), indexing="ij")
        lo, mid, hi = sort3_arrays(a.ravel(), b.ravel(), c.ravel())
        chunks_i.append(lo)
        chunks_j.append(mid)
        chunks_k.append(hi)
    if not chunks_i:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty
    return (
        np.concatenate(chunks_i),
        np.concatenate(chunks_j),
        np.concatenate(chunks_k),
    )


def verify_embedding(coloring: TripleColoring, emb: MultipartiteEmbedding) -> EmbeddingCheck:
    """Re-check an embedding against the coloring, reporting the first
    offending crossing triple in colex order."""
    parts = emb.parts
    if len(parts) < 3:
        return EmbeddingCheck(False, None, 0, "need at least 3 parts")
    sizes = {len(p) for p in parts}
    if len(sizes) != 1 or 0 in sizes:
        return EmbeddingCheck(False, None, 0, "parts must share one positive size")
    seen: set[int] = set()
    for p in parts:
        if p.ids and (p.ids[0] < 0 or p.ids[-1] >= coloring.n_vertices):
            return EmbeddingCheck(False, None, 0, "part vertex out of range")
        ids = set(p.ids)
        if seen & ids:
            return EmbeddingCheck(False, None, 0, "parts must be disjoint")
        seen |= ids
    if not 0 <= emb.color < coloring.n_colors:
        return EmbeddingCheck(False, None, 0, "embedding color out of range")
    lo, mid, hi = crossing_triples(parts)
    ranks = (hi * (hi - 1) * (hi - 2)) // 6 + (mid * (mid - 1)) // 2 + lo
    order = np.argsort(ranks, kind="stable")
    colors = coloring.colors_of(lo[order], mid[order], hi[order])
    bad = colors != emb.color
    total = len(lo)
    if bad.any():
        pos = int(np.argmax(bad))
        src = order[pos]
        return EmbeddingCheck(
            False, (int(lo[src]), int(mid[src]), int(hi[src])), total, "triple color mismatch"
        )
    return EmbeddingCheck(True, None, total, None)


def check_round_invariant(state: PartitionState, coloring: TripleColoring):
    """Full-enumeration check of the round invariant; None if it holds.

    For every pair a < b <= round, all triples in V_a x V_b x V_c (b < c)
    and in V_a x V_b x S must have color chi(a, b). Returns the first
    violating (a, b, triple, color) otherwise. Intended for test builds.
    """
    i = state.round
    s_arr = state.reservoir.as_array()
    for a in range(1, i + 1):
        for b in range(a + 1, i + 1):
            expected = state.chi.color(a, b)
            pa = state.parts[a - 1].as_array()
            pb = state.parts[b - 1].as_array()
            others = [state.parts[c - 1].as_array() for c in range(b + 1, i + 1)]
            others.append(s_arr)
            for third in others:
                if not len(third):
                    continue
                x, y, z = np.meshgrid(pa, pb, third, indexing="ij")
                colors = coloring.colors_of(x.ravel(), y.ravel(), z.ravel())
                bad = colors != expected
                if bad.any():
                    pos = int(np.argmax(bad))
                    triple = (int(x.ravel()[pos]), int(y.ravel()[pos]), int(z.ravel()[pos]))
                    return (a, b, triple, int(colors[pos]))
    return None


def _assemble(
    state: PartitionState,
    coloring: TripleColoring,
    clique: VertexSet,
    n_final: int,
) -> MultipartiteEmbedding:
    colors = {state.chi.color(a, b) for a in clique for b in clique if a < b}
    assert len(colors) == 1, "clique is not monochromatic: implementation bug"
    parts = [state.parts[q - 1].take_first(n_final) for q in clique]
    parts.append(state.reservoir.take_first(n_final))
    emb = MultipartiteEmbedding(tuple(parts), colors.pop())
    check = verify_embedding(coloring, emb)
    assert check.ok, f"assembled embedding failed verification: {check}"
    state.trace.achieved_n = n_final
    state.trace.achieved_rounds = state.round
    state.trace.achieved_c = (
        emb.d * n_final / _sqrt_log2(coloring.n_vertices)
    )
    return emb


def _run_one_round(state: PartitionState, coloring: TripleColoring) -> PartitionState:
    for _ in range(state.round):
        state = refine_step(state, coloring)
    return close_round(state, coloring)


def _run_one_round_traced(state: PartitionState, coloring: TripleColoring) -> PartitionState:
    """Round driver for full extractions: stalls keep their trace attached."""
    try:
        return _run_one_round(state, coloring)
    except PreconditionViolated as exc:
        raise ReservoirExhausted(
            f"extraction stalled in round {state.round + 1}: {exc}",
            trace=state.trace,
        ) from exc


def extract_multipartite(
    coloring: TripleColoring, req: ExtractionRequest
) -> tuple[MultipartiteEmbedding, ExtractionTrace]:
    """Drive rounds until a monochromatic K_d(3)(n) can be assembled.

    Returns a verified embedding plus the run trace. Failures raise
    structured errors carrying the trace so far.
    """
    l = coloring.n_colors
    if req.mode == "strict":
        bound = r2_upper_bound(req.d - 1, l)
        if bound.saturated:
            raise PreconditionViolated(
                f"r2 bound for ({req.d - 1}, {l}) overflows; strict mode unusable"
            )
        r = bound.value
        log_n = math.log2(coloring.n_vertices)
        if l ** (2 * r) * req.n**2 > log_n:
            raise StrictSizeUnderflow(
                f"strict mode needs log2 N >= l^(2r) n^2 = {l ** (2 * r) * req.n ** 2},"
                f" got {log_n:.3f}",
                trace=None,
            )
        n_final = strict_part_size(coloring.n_vertices, l, r)
        if n_final < 1:
            raise StrictSizeUnderflow(
                f"floor(l^-r sqrt(log2 N)) = 0 at N={coloring.n_vertices}, l={l}, r={r}",
                trace=None,
            )
        state = init_round(coloring, req)
        while state.round < r:
            state = _run_one_round_traced(state, coloring)
        clique = find_mono_clique(state.chi, req.d - 1)
        assert clique is not None, "no monochromatic clique within r2 rounds: bug"
        if len(state.reservoir) < n_final:
            raise ReservoirExhausted(
                f"final reservoir {len(state.reservoir)} < n = {n_final}",
                trace=state.trace,
            )
        emb = _assemble(state, coloring, clique, n_final)
        return emb, state.trace

    state = init_round(coloring, req)
    r_cap = req.effective_r_cap()
    while True:
        clique = find_mono_clique(state.chi, req.d - 1)
        if clique is not None and len(state.reservoir) >= req.n:
            emb = _assemble(state, coloring, clique, req.n)
            return emb, state.trace
        if state.round >= r_cap:
            raise CliqueNotFound(
                f"no monochromatic {req.d - 1}-clique within {r_cap} rounds",
                trace=state.trace,
            )
        state = _run_one_round_traced(state, coloring)

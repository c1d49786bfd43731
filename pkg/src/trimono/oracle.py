"""Brute-force ground truth at desk scale.

* `brute_max_almost_mono` — exhaustive search for the largest subset where
  one color holds at least a (1 - eps) fraction of the triples. Two
  independently coded enumeration paths exist so each can audit the other:
  the primary walks sizes descending with lexicographic subsets and
  vectorized censuses; the cross-check walks bitmasks ascending with scalar
  recounts.

* `r2_exact_small` — exact two-uniform Ramsey numbers by exhaustive
  enumeration of colorings with color-symmetry pruning, emitting a witness
  coloring for m - 1.

* `r2_upper_bound` — the exact value where the exhaustive search is cheap,
  else the l^(k*l) formula bound, saturated with a flag if it leaves the
  signed 64-bit range.

Threshold comparisons are exact: eps is read as its decimal literal, so
count >= (1 - eps) * C(s,3) is decided in integer arithmetic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

from .errors import BudgetExceeded
from .model import ColorCensus, TripleColoring, VertexSet, color_census

INT64_MAX = (1 << 63) - 1
_DEFAULT_EXACT_BUDGET_COLORINGS = 1 << 17


@dataclass(frozen=True)
class OracleBudget:
    max_subsets: int = 1 << 22
    time_limit: float = 60.0

    def __post_init__(self):
        if self.max_subsets <= 0 or self.time_limit <= 0:
            raise ValueError("budget fields must be positive")


def eps_fraction(eps) -> Fraction:
    """Exact threshold value of eps: floats go through their decimal literal."""
    if isinstance(eps, Fraction):
        return eps
    if isinstance(eps, int):
        return Fraction(eps)
    return Fraction(str(eps))


def qualifies(count: int, total: int, eps: Fraction) -> bool:
    """count >= (1 - eps) * total, exactly."""
    return count * eps.denominator >= (eps.denominator - eps.numerator) * total


@dataclass(frozen=True)
class BruteResult:
    size: int
    subset: VertexSet
    census: ColorCensus


def brute_max_almost_mono(
    coloring: TripleColoring, eps, budget: OracleBudget | None = None
) -> BruteResult:
    """Largest s with an s-subset one of whose colors covers >= (1-eps)C(s,3).

    Deterministic: sizes descend, subsets of each size run lexicographically,
    and the first qualifying subset at the winning size is returned, which is
    the lexicographically least witness.
    """
    if budget is None:
        budget = OracleBudget()
    n = coloring.n_vertices
    eps_fr = eps_fraction(eps)
    if eps_fr < 0:
        raise ValueError("eps must be non-negative")
    if (1 << n) > budget.max_subsets:
        raise BudgetExceeded(f"2^{n} subsets exceed max_subsets={budget.max_subsets}")
    deadline = time.monotonic() + budget.time_limit
    examined = 0
    for size in range(n, 2, -1):
        threshold_total = comb(size, 3)
        for combo in combinations(range(n), size):
            examined += 1
            if examined % 1024 == 0 and time.monotonic() > deadline:
                raise BudgetExceeded(f"time limit {budget.time_limit}s exceeded")
            census = color_census(coloring, VertexSet(combo))
            if qualifies(census.majority_count, threshold_total, eps_fr):
                return BruteResult(size, VertexSet(combo), census)
    raise AssertionError("unreachable: any single triple qualifies at size 3")


def brute_max_almost_mono_bitmask(coloring: TripleColoring, eps) -> BruteResult:
    """Independent cross-check path: ascending bitmask enumeration with a
    scalar recount per subset; agrees exactly with brute_max_almost_mono."""
    n = coloring.n_vertices
    eps_fr = eps_fraction(eps)
    best: tuple[int, tuple[int, ...], ColorCensus] | None = None
    for mask in range(1 << n):
        members = [v for v in range(n) if (mask >> v) & 1]
        size = len(members)
        if size < 3:
            continue
        counts = [0] * coloring.n_colors
        for a, b, c in combinations(members, 3):
            counts[coloring.color_of(a, b, c)] += 1
        top = max(counts)
        if not qualifies(top, comb(size, 3), eps_fr):
            continue
        key = (size, tuple(members))
        if best is None or size > best[0] or (size == best[0] and key[1] < best[1]):
            best = (size, tuple(members), ColorCensus(tuple(counts), comb(size, 3)))
    assert best is not None, "unreachable for N >= 3"
    return BruteResult(best[0], VertexSet(best[1]), best[2])


@dataclass(frozen=True)
class R2Exact:
    value: int
    witness_m: int
    witness_colors: tuple[int, ...]  # colors of the pairs of [witness_m], lex order

    def witness_as_dict(self) -> dict[tuple[int, int], int]:
        pairs = list(combinations(range(self.witness_m), 2))
        return dict(zip(pairs, self.witness_colors))


def _has_mono_clique(edge_colors: dict, m: int, k: int) -> bool:
    for verts in combinations(range(m), k):
        colors = {edge_colors[p] for p in combinations(verts, 2)}
        if len(colors) == 1:
            return True
    return False


def _find_counterexample(m: int, k: int, n_colors: int, state: dict) -> tuple[int, ...] | None:
    """A coloring of the pairs of [m] with no monochromatic k-clique, or None.

    Enumerates colorings as base-l digit vectors over the lex-ordered pair
    list, with the first pair pinned to color 0 (color symmetry: permuting
    colors preserves counterexamples). Counts enumerated colorings against
    the budget.
    """
    pairs = list(combinations(range(m), 2))
    n_edges = len(pairs)
    if n_edges == 0:
        return None if k <= 1 else ()
    cliques = []
    for verts in combinations(range(m), k):
        idx = [pairs.index(p) for p in combinations(verts, 2)]
        cliques.append(idx)
    digits = [0] * n_edges
    total = n_colors ** max(0, n_edges - (1 if n_colors > 1 else 0))
    if state["examined"] + total > state["budget"].max_subsets:
        raise BudgetExceeded(
            f"{total} colorings of K_{m} exceed max_subsets={state['budget'].max_subsets}"
        )
    deadline = state["deadline"]

    def mono_somewhere() -> bool:
        for idx in cliques:
            first = digits[idx[0]]
            if all(digits[e] == first for e in idx[1:]):
                return True
        return False

    while True:
        state["examined"] += 1
        if state["examined"] % 4096 == 0 and time.monotonic() > deadline:
            raise BudgetExceeded(f"time limit exceeded after {state['examined']} colorings")
        if not mono_somewhere():
            return tuple(digits)
        # odometer over the free digits; the first stays pinned to color 0
        pos = n_edges - 1
        while pos >= (1 if n_colors > 1 else 0):
            digits[pos] += 1
            if digits[pos] < n_colors:
                break
            digits[pos] = 0
            pos -= 1
        else:
            return None


def r2_exact_small(k: int, n_colors: int, budget: OracleBudget | None = None) -> R2Exact:
    """Least m such that every coloring of the pairs of [m] has a
    monochromatic k-clique, by exhaustive enumeration with color-symmetry
    pruning; also returns a witness coloring on m - 1 vertices."""
    if k < 1 or n_colors < 1:
        raise ValueError("k and n_colors must be positive")
    if budget is None:
        budget = OracleBudget(max_subsets=_DEFAULT_EXACT_BUDGET_COLORINGS, time_limit=60.0)
    if k == 1:
        return R2Exact(1, 0, ())
    state = {
        "examined": 0,
        "budget": budget,
        "deadline": time.monotonic() + budget.time_limit,
    }
    m = k
    witness: tuple[int, ...] | None = None
    witness_m = k - 1
    while True:
        found = _find_counterexample(m, k, n_colors, state)
        if found is None:
            return R2Exact(m, witness_m, witness if witness is not None else ())
        witness, witness_m = found, m
        m += 1


@dataclass(frozen=True)
class R2Bound:
    value: int
    source: str  # "exact" | "formula"
    saturated: bool


_r2_cache: dict[tuple[int, int], R2Bound] = {}


def r2_upper_bound(k: int, n_colors: int) -> R2Bound:
    """Exact small Ramsey value where exhaustively verifiable, else the
    l^(k*l) formula bound; never less than the true Ramsey number."""
    if k < 1 or n_colors < 1:
        raise ValueError("k and n_colors must be positive")
    key = (k, n_colors)
    if key in _r2_cache:
        return _r2_cache[key]
    try:
        exact = r2_exact_small(k, n_colors)
        bound = R2Bound(exact.value, "exact", False)
    except BudgetExceeded:
        value = n_colors ** (k * n_colors)
        if value > INT64_MAX:
            bound = R2Bound(INT64_MAX, "formula", True)
        else:
            bound = R2Bound(value, "formula", False)
    _r2_cache[key] = bound
    return bound


def write_r2_table(path, entries: dict[tuple[int, int], int]) -> None:
    """Write exact entries as `r2 k=<int> l=<int> value=<int> proof=...` lines."""
    with open(path, "w", encoding="ascii") as fh:
        for (k, l), value in sorted(entries.items()):
            fh.write(f"r2 k={k} l={l} value={value} proof=exhaustive seed-independent\n")


def read_r2_table(path) -> dict[tuple[int, int], int]:
    entries = {}
    with open(path, encoding="ascii") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(" ")
            if len(tokens) != 6 or tokens[0] != "r2":
                raise ValueError(f"bad r2 table line {line_no}: {line!r}")
            fields = {}
            for token in tokens[1:4]:
                name, sep, value = token.partition("=")
                if not sep:
                    raise ValueError(f"bad r2 table line {line_no}: {line!r}")
                fields[name] = int(value)
            entries[(fields["k"], fields["l"])] = fields["value"]
    return entries

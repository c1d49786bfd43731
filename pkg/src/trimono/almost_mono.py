"""Almost-monochromatic subsets via multipartite extraction.

A complete d-partite triple system on d parts of size n has C(d,3) n^3
crossing triples out of C(dn,3), a fraction above 1 - 3/d. So extracting a
monochromatic one with d = max(3, ceil(3/eps)) yields a vertex subset whose
majority color covers at least a (1 - eps) fraction of its triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import ExtractionRequest, ExtractionTrace, extract_multipartite
from .errors import ExtractionError, PreconditionViolated
from .model import ColorCensus, TripleColoring, VertexSet, color_census
from .oracle import eps_fraction, qualifies


@dataclass(frozen=True)
class AlmostMonoResult:
    """A subset with its recomputed census and majority-color density."""

    subset: VertexSet
    majority_color: int
    census: ColorCensus
    epsilon: float
    achieved_density: float

    def as_json_dict(self) -> dict:
        return {
            "subset": list(self.subset.ids),
            "majority_color": self.majority_color,
            "census_counts": list(self.census.counts),
            "census_total": self.census.total,
            "epsilon": self.epsilon,
            "achieved_density": self.achieved_density,
        }


def choose_d(eps) -> int:
    """Least part count whose crossing-triple density exceeds 1 - eps.

    d = max(3, ceil(3/eps)); eps >= 1 degenerates to d = 3, which is allowed
    as a smoke-test path. The ceiling is taken exactly over the decimal
    literal of eps.
    """
    fr = eps_fraction(eps)
    if fr <= 0:
        raise ValueError("eps must be positive")
    return max(3, math.ceil(3 / fr))


def _density_chain_holds(census: ColorCensus, d: int, n: int, eps) -> bool:
    fr = eps_fraction(eps)
    crossing = math.comb(d, 3) * n**3
    total = math.comb(d * n, 3)
    return (
        census.majority_count >= crossing
        and crossing * d > (d - 3) * total
        and 3 * fr.denominator <= fr.numerator * d
    )


def almost_mono_subset(
    coloring: TripleColoring,
    eps,
    mode: str = "adaptive",
    n_start: int | None = None,
    r_cap: int | None = None,
    reservoir_cap: int | None = None,
) -> tuple[AlmostMonoResult, ExtractionTrace]:
    """Extract a subset whose majority color covers >= (1 - eps) of triples.

    Runs the multipartite engine with d = choose_d(eps) and the largest
    feasible n: strict mode derives n from the schedule, adaptive mode tries
    n from `n_start` (default floor(sqrt(log2 N))) downward until a run
    succeeds. At this d the density guarantee is structural. When every
    attempt at that d fails (small hosts cannot carry ceil(3/eps) parts),
    adaptive mode falls back to smaller part counts and accepts a result
    only if its recomputed census still meets the exact (1 - eps) threshold.
    Otherwise the first engine failure propagates with its trace attached.
    """
    d = choose_d(eps)
    fr = eps_fraction(eps)
    kwargs = {}
    if r_cap is not None:
        kwargs["r_cap"] = r_cap
    if reservoir_cap is not None:
        kwargs["reservoir_cap"] = reservoir_cap
    if mode == "strict":
        d_ladder = [d]
        n_ladder = [1]  # strict derives its own n from the schedule
    else:
        if n_start is None:
            n_start = max(1, math.isqrt(int(math.log2(coloring.n_vertices))))
        n_ladder = list(range(n_start, 0, -1))
        d_ladder = [d] + [dd for dd in range(d - 1, 2, -1) if dd * 1 + 2 <= coloring.n_vertices]
    primary_error: ExtractionError | PreconditionViolated | None = None
    for d_try in d_ladder:
        for n in n_ladder:
            if mode != "strict" and d_try * n > coloring.n_vertices:
                continue
            req = ExtractionRequest(d=d_try, n=n, mode=mode, **kwargs)
            try:
                emb, trace = extract_multipartite(coloring, req)
            except (ExtractionError, PreconditionViolated) as exc:
                if primary_error is None:
                    primary_error = exc
                continue
            subset = emb.vertex_union()
            census = color_census(coloring, subset)
            if d_try == d:
                assert qualifies(census.majority_count, census.total, fr), (
                    "density guarantee violated: implementation bug"
                )
                assert _density_chain_holds(census, d, emb.part_size, eps), (
                    "density chain violated: implementation bug"
                )
            elif not qualifies(census.majority_count, census.total, fr):
                continue  # fallback structure too dilute; keep looking
            result = AlmostMonoResult(
                subset=subset,
                majority_color=census.majority_color,
                census=census,
                epsilon=float(eps),
                achieved_density=census.majority_density,
            )
            return result, trace
    assert primary_error is not None
    raise primary_error

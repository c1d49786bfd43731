"""Constructive search for monochromatic multipartite structure and
almost-monochromatic subsets in colorings of triples."""

from .almost_mono import AlmostMonoResult, almost_mono_subset, choose_d
from .engine import (
    ExtractionRequest,
    ExtractionTrace,
    MultipartiteEmbedding,
    PairColorMatrix,
    PartitionState,
    check_round_invariant,
    close_round,
    extract_multipartite,
    find_mono_clique,
    init_round,
    refine_step,
    verify_embedding,
)
from .gen_io import (
    GeneratorSpec,
    gen_blockmix,
    gen_constant,
    gen_uniform,
    read_coloring,
    write_coloring,
)
from .lemmas import (
    BicliqueWitness,
    BipartiteHost,
    kst_bipartite,
    kst_dense,
    verify_bipartite_witness,
    verify_dense_witness,
)
from .model import (
    ColorCensus,
    SimpleGraph,
    TripleColoring,
    VertexSet,
    colex_rank,
    colex_unrank,
    color_census,
    triple_count,
)
from .oracle import (
    OracleBudget,
    brute_max_almost_mono,
    brute_max_almost_mono_bitmask,
    r2_exact_small,
    r2_upper_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AlmostMonoResult",
    "BicliqueWitness",
    "BipartiteHost",
    "ColorCensus",
    "ExtractionRequest",
    "ExtractionTrace",
    "GeneratorSpec",
    "MultipartiteEmbedding",
    "OracleBudget",
    "PairColorMatrix",
    "PartitionState",
    "SimpleGraph",
    "TripleColoring",
    "VertexSet",
    "almost_mono_subset",
    "brute_max_almost_mono",
    "brute_max_almost_mono_bitmask",
    "check_round_invariant",
    "choose_d",
    "close_round",
    "colex_rank",
    "colex_unrank",
    "color_census",
    "extract_multipartite",
    "find_mono_clique",
    "gen_blockmix",
    "gen_constant",
    "gen_uniform",
    "init_round",
    "kst_bipartite",
    "kst_dense",
    "r2_exact_small",
    "r2_upper_bound",
    "read_coloring",
    "refine_step",
    "triple_count",
    "verify_bipartite_witness",
    "verify_dense_witness",
    "verify_embedding",
    "write_coloring",
]

"""Batch front door: generate, extract, verify, oracles, experiments.

Exit codes: 0 success; 2 precondition/config error; 3 structured run
failure (extraction, oracle budget); 4 verification failure.

Reports are JSON with stable field order. Identical command lines produce
byte-identical reports except for the wall_time_s and peak_rss_kb fields.
All randomness flows from explicit --seed flags.
"""

from __future__ import annotations

import argparse
import json
import math
import resource
import sys
import time
from itertools import combinations

import numpy as np

from .almost_mono import almost_mono_subset
from .engine import (
    ExtractionRequest,
    MultipartiteEmbedding,
    extract_multipartite,
    verify_embedding,
)
from .errors import (
    BudgetExceeded,
    ColoringFileError,
    ExtractionError,
    PreconditionViolated,
    SearchBudgetExceeded,
    TrimonoError,
)
from .gen_io import GeneratorSpec, read_coloring, write_coloring
from .model import TripleColoring, VertexSet, color_census
from .oracle import (
    OracleBudget,
    brute_max_almost_mono,
    eps_fraction,
    qualifies,
    r2_exact_small,
    r2_upper_bound,
    write_r2_table,
)
from .prng import mix64, randbelow, word_at

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUN_FAILURE = 3
EXIT_VERIFY_FAILURE = 4

_SAMPLE_TAG = 0x646973637265700A


def _add_input_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--in", dest="in_path", help="tc3 coloring file")
    parser.add_argument(
        "--gen", choices=["uniform", "constant", "blockmix"], help="generate the input instead"
    )
    parser.add_argument("--n-vertices", type=int, help="vertex count for --gen")
    parser.add_argument("--colors", type=int, help="color count for --gen")
    parser.add_argument("--seed", type=int, default=0, help="seed for --gen")
    parser.add_argument("--color", type=int, default=0, help="constant generator color")
    parser.add_argument("--blocks", type=int, help="blockmix block count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trimono",
        description="Monochromatic multipartite extraction from colorings of triples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a coloring file")
    gen.add_argument(
        "--gen", required=True, choices=["uniform", "constant", "blockmix"], dest="gen"
    )
    gen.add_argument("--n-vertices", type=int, required=True)
    gen.add_argument("--colors", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--color", type=int, default=0, help="constant generator color")
    gen.add_argument("--blocks", type=int, help="blockmix block count")
    gen.add_argument(
        "--explicit", action="store_true", help="materialize all C(N,3) colors into the file"
    )
    gen.add_argument("--out", required=True)

    ext = sub.add_parser("extract", help="run the multipartite extraction engine")
    _add_input_flags(ext)
    ext.add_argument("--d", type=int, required=True, help="part count target")
    ext.add_argument("--part-size", type=int, required=True, help="part size target n")
    ext.add_argument("--mode", choices=["strict", "adaptive"], default="adaptive")
    ext.add_argument("--r-cap", type=int)
    ext.add_argument("--reservoir-cap", type=int, default=65536)
    ext.add_argument("--report", help="write the JSON report here")
    ext.add_argument("--witness", help="write the witness JSON here")

    am = sub.add_parser("almost-mono", help="extract an almost-monochromatic subset")
    _add_input_flags(am)
    am.add_argument("--epsilon", type=float, required=True)
    am.add_argument("--mode", choices=["strict", "adaptive"], default="adaptive")
    am.add_argument("--n-start", type=int)
    am.add_argument("--r-cap", type=int)
    am.add_argument("--report")
    am.add_argument("--witness")

    ver = sub.add_parser("verify", help="re-verify a witness file against a coloring")
    ver.add_argument("--in", dest="in_path", required=True)
    ver.add_argument("--witness", required=True)
    ver.add_argument("--report")

    orc = sub.add_parser("oracle", help="run brute-force oracles")
    orc_sub = orc.add_subparsers(dest="oracle_command", required=True)
    omam = orc_sub.add_parser("max-almost-mono", help="exhaustive best subset")
    _add_input_flags(omam)
    omam.add_argument("--epsilon", type=float, required=True)
    omam.add_argument("--max-subsets", type=int, default=1 << 22)
    omam.add_argument("--time-limit", type=float, default=60.0)
    omam.add_argument("--report")
    or2 = orc_sub.add_parser("r2", help="two-uniform Ramsey bounds")
    or2.add_argument("--k", type=int, required=True)
    or2.add_argument("--colors", type=int, required=True)
    or2.add_argument("--exact", action="store_true", help="exhaustive exact value")
    or2.add_argument("--max-colorings", type=int, default=1 << 17)
    or2.add_argument("--time-limit", type=float, default=60.0)
    or2.add_argument("--table-out", help="append the exact value to a table file")
    or2.add_argument("--report")

    exp = sub.add_parser("experiment", help="statistical experiments")
    exp_sub = exp.add_subparsers(dest="experiment_command", required=True)
    disc = exp_sub.add_parser(
        "discrepancy", help="color balance of random subsets of a uniform coloring"
    )
    disc.add_argument("--n-vertices", type=int, required=True)
    disc.add_argument("--colors", type=int, required=True)
    disc.add_argument("--subset-size", type=int, required=True)
    disc.add_argument("--samples", type=int, required=True)
    disc.add_argument("--seed", type=int, default=0)
    disc.add_argument("--report")

    return parser


def _load_input(args) -> TripleColoring:
    if args.in_path and args.gen:
        raise _ConfigError("--in and --gen are mutually exclusive")
    if args.in_path:
        return read_coloring(args.in_path)
    if not args.gen:
        raise _ConfigError("one of --in or --gen is required")
    if args.n_vertices is None or args.colors is None:
        raise _ConfigError("--gen needs --n-vertices and --colors")
    return _build_generator(args).build(args.n_vertices, args.colors)


def _build_generator(args) -> GeneratorSpec:
    if args.gen == "uniform":
        return GeneratorSpec("uniform", args.seed, {})
    if args.gen == "constant":
        return GeneratorSpec("constant", args.seed, {"color": args.color})
    if args.gen == "blockmix":
        if args.blocks is None:
            raise _ConfigError("blockmix needs --blocks")
        return GeneratorSpec("blockmix", args.seed, {"m": args.blocks})
    raise _ConfigError(f"unknown generator {args.gen!r}")


class _ConfigError(Exception):
    pass


def _coloring_config(coloring: TripleColoring) -> dict:
    fields = coloring.backing.header_fields()
    cfg = {"n_vertices": coloring.n_vertices, "n_colors": coloring.n_colors}
    if fields is None:
        cfg["backing"] = "explicit"
    else:
        cfg["backing"] = "implicit"
        cfg["generator"] = fields
    return cfg


def _embedding_witness_dict(coloring: TripleColoring, emb: MultipartiteEmbedding) -> dict:
    return {
        "kind": "multipartite_embedding",
        "n_vertices": coloring.n_vertices,
        "n_colors": coloring.n_colors,
        "color": emb.color,
        "parts": [list(p.ids) for p in emb.parts],
    }


def _finish(report: dict, args, started: float, code: int) -> int:
    report["wall_time_s"] = round(time.monotonic() - started, 6)
    report["peak_rss_kb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    text = json.dumps(report, indent=2)
    report_path = getattr(args, "report", None)
    if report_path:
        with open(report_path, "w", encoding="ascii") as fh:
            fh.write(text + "\n")
        print(f"report written to {report_path} (outcome: {report['outcome']['status']})")
    else:
        print(text)
    return code


def _failure_outcome(exc: Exception) -> dict:
    out = {"status": "failure", "kind": type(exc).__name__, "message": str(exc)}
    trace = getattr(exc, "trace", None)
    if trace is not None:
        out["trace"] = trace.as_json_dict()
    return out


def _cmd_gen(args, report, started) -> int:
    spec = _build_generator(args)
    coloring = spec.build(args.n_vertices, args.colors)
    if args.explicit:
        coloring = coloring.materialize()
    write_coloring(coloring, args.out)
    report["config"] = _coloring_config(coloring)
    report["outcome"] = {"status": "success"}
    report["result"] = {"path": args.out}
    return _finish(report, args, started, EXIT_OK)


def _cmd_extract(args, report, started) -> int:
    coloring = _load_input(args)
    req = ExtractionRequest(
        d=args.d,
        n=args.part_size,
        mode=args.mode,
        r_cap=args.r_cap,
        reservoir_cap=args.reservoir_cap,
    )
    report["config"] = {
        "coloring": _coloring_config(coloring),
        "d": req.d,
        "n": req.n,
        "mode": req.mode,
        "r_cap": req.r_cap,
        "reservoir_cap": req.reservoir_cap,
    }
    try:
        emb, trace = extract_multipartite(coloring, req)
    except (ExtractionError, PreconditionViolated) as exc:
        report["outcome"] = _failure_outcome(exc)
        return _finish(report, args, started, EXIT_RUN_FAILURE)
    witness = _embedding_witness_dict(coloring, emb)
    census = color_census(coloring, emb.vertex_union())
    report["outcome"] = {"status": "success"}
    report["result"] = witness
    report["trace"] = trace.as_json_dict()
    report["census"] = {"counts": list(census.counts), "total": census.total}
    if args.witness:
        with open(args.witness, "w", encoding="ascii") as fh:
            json.dump(witness, fh, indent=2)
            fh.write("\n")
    return _finish(report, args, started, EXIT_OK)


def _cmd_almost_mono(args, report, started) -> int:
    coloring = _load_input(args)
    report["config"] = {
        "coloring": _coloring_config(coloring),
        "epsilon": args.epsilon,
        "mode": args.mode,
        "n_start": args.n_start,
        "r_cap": args.r_cap,
    }
    try:
        result, trace = almost_mono_subset(
            coloring, args.epsilon, mode=args.mode, n_start=args.n_start, r_cap=args.r_cap
        )
    except (ExtractionError, PreconditionViolated) as exc:
        report["outcome"] = _failure_outcome(exc)
        return _finish(report, args, started, EXIT_RUN_FAILURE)
    witness = dict(result.as_json_dict())
    witness_file = {
        "kind": "almost_mono_subset",
        "n_vertices": coloring.n_vertices,
        "n_colors": coloring.n_colors,
        **witness,
    }
    report["outcome"] = {"status": "success"}
    report["result"] = witness_file
    report["trace"] = trace.as_json_dict()
    report["census"] = {"counts": list(result.census.counts), "total": result.census.total}
    if args.witness:
        with open(args.witness, "w", encoding="ascii") as fh:
            json.dump(witness_file, fh, indent=2)
            fh.write("\n")
    return _finish(report, args, started, EXIT_OK)


def _cmd_verify(args, report, started) -> int:
    coloring = read_coloring(args.in_path)
    with open(args.witness, encoding="ascii") as fh:
        witness = json.load(fh)
    kind = witness.get("kind")
    report["config"] = {
        "coloring": _coloring_config(coloring),
        "witness_kind": kind,
        "witness_path": args.witness,
    }
    if witness.get("n_vertices") != coloring.n_vertices or witness.get(
        "n_colors"
    ) != coloring.n_colors:
        raise _ConfigError("witness shape does not match the coloring file")
    if kind == "multipartite_embedding":
        emb = MultipartiteEmbedding(
            tuple(VertexSet(tuple(p)) for p in witness["parts"]), witness["color"]
        )
        check = verify_embedding(coloring, emb)
        if check.ok:
            report["outcome"] = {"status": "success"}
            report["result"] = {"triples_checked": check.triples_checked}
            return _finish(report, args, started, EXIT_OK)
        report["outcome"] = {
            "status": "failure",
            "kind": "VerificationFailed",
            "message": check.reason,
            "first_violation": check.first_violation,
        }
        if check.first_violation is not None:
            i, j, k = check.first_violation
            print(
                f"verification failed: triple ({i}, {j}, {k}) has color "
                f"{coloring.color_of(i, j, k)}, expected {emb.color}"
            )
        else:
            print(f"verification failed: {check.reason}")
        return _finish(report, args, started, EXIT_VERIFY_FAILURE)
    if kind == "almost_mono_subset":
        subset = VertexSet(tuple(witness["subset"]))
        census = color_census(coloring, subset)
        eps = eps_fraction(witness["epsilon"])
        ok = (
            list(census.counts) == witness["census_counts"]
            and census.total == witness["census_total"]
            and census.majority_color == witness["majority_color"]
            and qualifies(census.majority_count, census.total, eps)
        )
        report["result"] = {"recount": list(census.counts), "total": census.total}
        if ok:
            report["outcome"] = {"status": "success"}
            return _finish(report, args, started, EXIT_OK)
        report["outcome"] = {
            "status": "failure",
            "kind": "VerificationFailed",
            "message": "census recount disagrees or density threshold unmet",
        }
        print("verification failed: census recount disagrees with the witness")
        return _finish(report, args, started, EXIT_VERIFY_FAILURE)
    raise _ConfigError(f"unknown witness kind {kind!r}")


def _cmd_oracle_max_almost_mono(args, report, started) -> int:
    coloring = _load_input(args)
    budget = OracleBudget(max_subsets=args.max_subsets, time_limit=args.time_limit)
    report["config"] = {
        "coloring": _coloring_config(coloring),
        "epsilon": args.epsilon,
        "max_subsets": budget.max_subsets,
        "time_limit": budget.time_limit,
    }
    try:
        result = brute_max_almost_mono(coloring, args.epsilon, budget)
    except BudgetExceeded as exc:
        report["outcome"] = _failure_outcome(exc)
        return _finish(report, args, started, EXIT_RUN_FAILURE)
    report["outcome"] = {"status": "success"}
    report["result"] = {
        "size": result.size,
        "subset": list(result.subset.ids),
        "census_counts": list(result.census.counts),
        "census_total": result.census.total,
    }
    return _finish(report, args, started, EXIT_OK)


def _cmd_oracle_r2(args, report, started) -> int:
    report["config"] = {
        "k": args.k,
        "colors": args.colors,
        "exact": args.exact,
        "max_colorings": args.max_colorings,
    }
    try:
        if args.exact:
            budget = OracleBudget(max_subsets=args.max_colorings, time_limit=args.time_limit)
            exact = r2_exact_small(args.k, args.colors, budget)
            result = {
                "value": exact.value,
                "source": "exact",
                "witness_m": exact.witness_m,
                "witness_colors": list(exact.witness_colors),
            }
            if args.table_out:
                write_r2_table(args.table_out, {(args.k, args.colors): exact.value})
        else:
            bound = r2_upper_bound(args.k, args.colors)
            result = {"value": bound.value, "source": bound.source, "saturated": bound.saturated}
    except BudgetExceeded as exc:
        report["outcome"] = _failure_outcome(exc)
        return _finish(report, args, started, EXIT_RUN_FAILURE)
    report["outcome"] = {"status": "success"}
    report["result"] = result
    return _finish(report, args, started, EXIT_OK)


def sample_subset(key: int, sample_index: int, n: int, k: int) -> list[int]:
    """Deterministic k-subset of [0, n) for one sample lane."""
    lane = word_at(key, sample_index)
    chosen: set[int] = set()
    counter = 0
    while len(chosen) < k:
        chosen.add(randbelow(lane, counter, n))
        counter += 1
    return sorted(chosen)


def run_discrepancy(
    n_vertices: int, n_colors: int, subset_size: int, samples: int, seed: int
) -> dict:
    """Sample subsets of a seeded uniform coloring; report the worst color
    imbalance seen, as max over samples and colors of |fraction - 1/l|."""
    from .gen_io import gen_uniform

    if subset_size < 3:
        raise _ConfigError("subset size must be at least 3")
    if subset_size > n_vertices:
        raise _ConfigError("subset size exceeds the vertex count")
    coloring = gen_uniform(n_vertices, n_colors, seed)
    key = mix64(seed ^ _SAMPLE_TAG)
    idx = np.array(list(combinations(range(subset_size), 3)), dtype=np.int64)
    ti, tj, tk = idx[:, 0], idx[:, 1], idx[:, 2]
    total = len(idx)
    target = 1.0 / n_colors
    max_dev = 0.0
    worst_sample = 0
    for s in range(samples):
        members = np.array(sample_subset(key, s, n_vertices, subset_size), dtype=np.int64)
        colors = coloring.colors_of(members[ti], members[tj], members[tk])
        counts = np.bincount(colors, minlength=n_colors)
        dev = float(np.abs(counts / total - target).max())
        if dev > max_dev:
            max_dev, worst_sample = dev, s
    return {
        "max_deviation": max_dev,
        "worst_sample": worst_sample,
        "triples_per_subset": total,
        "samples": samples,
    }


def _cmd_experiment_discrepancy(args, report, started) -> int:
    report["config"] = {
        "n_vertices": args.n_vertices,
        "colors": args.colors,
        "subset_size": args.subset_size,
        "samples": args.samples,
        "seed": args.seed,
    }
    result = run_discrepancy(
        args.n_vertices, args.colors, args.subset_size, args.samples, args.seed
    )
    report["outcome"] = {"status": "success"}
    report["result"] = result
    return _finish(report, args, started, EXIT_OK)


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.monotonic()
    echo = list(argv) if argv is not None else sys.argv[1:]
    report: dict = {"command": echo}
    try:
        if args.command == "gen":
            return _cmd_gen(args, report, started)
        if args.command == "extract":
            return _cmd_extract(args, report, started)
        if args.command == "almost-mono":
            return _cmd_almost_mono(args, report, started)
        if args.command == "verify":
            return _cmd_verify(args, report, started)
        if args.command == "oracle":
            if args.oracle_command == "max-almost-mono":
                return _cmd_oracle_max_almost_mono(args, report, started)
            return _cmd_oracle_r2(args, report, started)
        if args.command == "experiment":
            return _cmd_experiment_discrepancy(args, report, started)
        raise _ConfigError(f"unknown command {args.command!r}")
    except (_ConfigError, ColoringFileError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SearchBudgetExceeded, TrimonoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILURE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

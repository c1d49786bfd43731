"""Coloring generators and the versioned `tc3` text format.

Generators are implicit backings: pure deterministic functions of
(seed, triple), so two processes always agree. Files are bit-exact: writing
the same coloring twice produces byte-identical output.

Format, version 1:
    line 1, explicit:  tc3 1 explicit N=<int> l=<int>
    line 1, implicit:  tc3 1 implicit N=<int> l=<int> gen=<name> seed=<u64> params=<key:val,...>
    explicit payload:  colors as lowercase base-16 digits in colex rank order,
                       64 per line, every line newline-terminated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MalformedHeader,
    PayloadError,
    TruncatedPayload,
    VersionMismatch,
)
from .model import (
    ExplicitBacking,
    TripleColoring,
    colex_rank_array,
    triple_count,
)
from .prng import colors_from_words, mix64, words_at

# Domain-separation tags so independent uses of one seed draw distinct streams.
_TAG_UNIFORM = 0x746333756E696601
_TAG_CROSS = 0x7463336372737302
_TAG_BLOCK = 0x746333626C6B0003

MAX_SEED = (1 << 64) - 1


class UniformBacking:
    """Each sorted triple gets an independent uniform color keyed by its rank."""

    kind = "uniform"

    def __init__(self, seed: int, n_colors: int):
        self.seed = seed
        self.n_colors = n_colors
        self._key = mix64(seed ^ _TAG_UNIFORM)

    def sorted_triple_colors(self, i, j, k):
        ranks = colex_rank_array(i, j, k)
        return colors_from_words(words_at(self._key, ranks), self.n_colors)

    def header_fields(self):
        return {"gen": "uniform", "seed": self.seed, "params": {}}


class ConstantBacking:
    """Every triple gets one fixed color."""

    kind = "constant"

    def __init__(self, color: int):
        self.color = color

    def sorted_triple_colors(self, i, j, k):
        return np.full(i.shape, self.color, dtype=np.uint8)

    def header_fields(self):
        return {"gen": "constant", "seed": 0, "params": {"color": self.color}}


class BlockmixBacking:
    """Monochromatic pockets plus noise.

    Vertices are assigned to m blocks through a seeded permutation of [0, N)
    taken modulo m, so blocks are near-balanced and at m = N every vertex sits
    alone. Triples inside one block get color 0; crossing triples get a seeded
    uniform color.
    """

    kind = "blockmix"

    def __init__(self, seed: int, n_colors: int, n_vertices: int, m: int):
        self.seed = seed
        self.n_colors = n_colors
        self.m = m
        self._cross_key = mix64(seed ^ _TAG_CROSS)
        keys = words_at(mix64(seed ^ _TAG_BLOCK), np.arange(n_vertices, dtype=np.int64))
        order = np.lexsort((np.arange(n_vertices), keys))
        positions = np.empty(n_vertices, dtype=np.int64)
        positions[order] = np.arange(n_vertices)
        self._block = positions % m

    def sorted_triple_colors(self, i, j, k):
        bi, bj, bk = self._block[i], self._block[j], self._block[k]
        within = (bi == bj) & (bj == bk)
        ranks = colex_rank_array(i, j, k)
        out = colors_from_words(words_at(self._cross_key, ranks), self.n_colors)
        out[within] = 0
        return out

    def header_fields(self):
        return {"gen": "blockmix", "seed": self.seed, "params": {"m": self.m}}


def _check_ranges(n_vertices: int, n_colors: int, seed: int = 0):
    if n_vertices < 3:
        raise ValueError("n_vertices must be at least 3")
    if not 1 <= n_colors <= 16:
        raise ValueError("n_colors must be in [1, 16]")
    if not 0 <= seed <= MAX_SEED:
        raise ValueError("seed must fit in 64 bits")


def gen_uniform(n_vertices: int, n_colors: int, seed: int) -> TripleColoring:
    _check_ranges(n_vertices, n_colors, seed)
    return TripleColoring(n_vertices, n_colors, UniformBacking(seed, n_colors))


def gen_constant(n_vertices: int, n_colors: int, color: int) -> TripleColoring:
    _check_ranges(n_vertices, n_colors)
    if not 0 <= color < n_colors:
        raise ValueError(f"color {color} out of range [0, {n_colors})")
    return TripleColoring(n_vertices, n_colors, ConstantBacking(color))


def gen_blockmix(n_vertices: int, n_colors: int, seed: int, m: int) -> TripleColoring:
    _check_ranges(n_vertices, n_colors, seed)
    if not 1 <= m <= n_vertices:
        raise ValueError("block count m must be in [1, n_vertices]")
    return TripleColoring(
        n_vertices, n_colors, BlockmixBacking(seed, n_colors, n_vertices, m)
    )


@dataclass(frozen=True)
class GeneratorSpec:
    """A named implicit generator plus its seed and parameters."""

    name: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def build(self, n_vertices: int, n_colors: int) -> TripleColoring:
        if self.name == "uniform":
            if self.params:
                raise ValueError("uniform generator takes no parameters")
            return gen_uniform(n_vertices, n_colors, self.seed)
        if self.name == "constant":
            if set(self.params) != {"color"}:
                raise ValueError("constant generator needs exactly the 'color' parameter")
            return gen_constant(n_vertices, n_colors, self.params["color"])
        if self.name == "blockmix":
            if set(self.params) != {"m"}:
                raise ValueError("blockmix generator needs exactly the 'm' parameter")
            return gen_blockmix(n_vertices, n_colors, self.seed, self.params["m"])
        raise ValueError(f"unknown generator {self.name!r}")


_DIGITS = b"0123456789abcdef"
_DIGIT_VALUE = np.full(256, -1, dtype=np.int16)
for _pos, _ch in enumerate(_DIGITS):
    _DIGIT_VALUE[_ch] = _pos

_PAYLOAD_WIDTH = 64


def _header_line(coloring: TripleColoring) -> str:
    fields = coloring.backing.header_fields()
    n, l = coloring.n_vertices, coloring.n_colors
    if fields is None:
        return f"tc3 1 explicit N={n} l={l}\n"
    params = ",".join(f"{k}:{v}" for k, v in sorted(fields["params"].items()))
    return f"tc3 1 implicit N={n} l={l} gen={fields['gen']} seed={fields['seed']} params={params}\n"


def write_coloring(coloring: TripleColoring, path) -> None:
    """Write a coloring; implicit backings round-trip as header-only specs."""
    with open(path, "wb") as fh:
        fh.write(_header_line(coloring).encode("ascii"))
        if coloring.is_explicit:
            backing: ExplicitBacking = coloring.backing
            total = backing.n_triples
            digits = np.frombuffer(_DIGITS, dtype=np.uint8)
            chunk = _PAYLOAD_WIDTH * (1 << 16)
            for start in range(0, total, chunk):
                ranks = np.arange(start, min(total, start + chunk), dtype=np.int64)
                block = digits[backing.colors_at(ranks)]
                full_rows = len(block) // _PAYLOAD_WIDTH
                if full_rows:
                    grid = np.empty((full_rows, _PAYLOAD_WIDTH + 1), dtype=np.uint8)
                    grid[:, :_PAYLOAD_WIDTH] = block[: full_rows * _PAYLOAD_WIDTH].reshape(
                        full_rows, _PAYLOAD_WIDTH
                    )
                    grid[:, _PAYLOAD_WIDTH] = ord("\n")
                    fh.write(grid.tobytes())
                tail = block[full_rows * _PAYLOAD_WIDTH :]
                if len(tail):
                    fh.write(tail.tobytes() + b"\n")


def _parse_int_field(token: str, name: str, header: str) -> int:
    prefix = name + "="
    if not token.startswith(prefix):
        raise MalformedHeader(f"expected field {name}= in header: {header!r}")
    try:
        return int(token[len(prefix) :])
    except ValueError as exc:
        raise MalformedHeader(f"field {name} is not an integer in header: {header!r}") from exc


def read_coloring(path) -> TripleColoring:
    """Read a tc3 file; errors pinpoint the malformed byte where applicable."""
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise MalformedHeader("missing header line")
    try:
        header = raw[:nl].decode("ascii")
    except UnicodeDecodeError as exc:
        raise MalformedHeader("header is not ASCII") from exc
    tokens = header.split(" ")
    if len(tokens) < 3 or tokens[0] != "tc3":
        raise MalformedHeader(f"not a tc3 file: {header!r}")
    if tokens[1] != "1":
        raise VersionMismatch(f"unsupported tc3 version {tokens[1]!r}")
    mode = tokens[2]
    if mode == "explicit":
        if len(tokens) != 5:
            raise MalformedHeader(f"explicit header needs N= and l=: {header!r}")
        n = _parse_int_field(tokens[3], "N", header)
        l = _parse_int_field(tokens[4], "l", header)
        return _read_explicit_payload(raw, nl + 1, n, l)
    if mode == "implicit":
        if len(tokens) != 8:
            raise MalformedHeader(f"implicit header needs 8 fields: {header!r}")
        n = _parse_int_field(tokens[3], "N", header)
        l = _parse_int_field(tokens[4], "l", header)
        if not tokens[5].startswith("gen="):
            raise MalformedHeader(f"expected gen= field: {header!r}")
        gen = tokens[5][4:]
        seed = _parse_int_field(tokens[6], "seed", header)
        if not tokens[7].startswith("params="):
            raise MalformedHeader(f"expected params= field: {header!r}")
        params_text = tokens[7][len("params=") :]
        params = {}
        if params_text:
            for item in params_text.split(","):
                key, sep, value = item.partition(":")
                if not sep or not key:
                    raise MalformedHeader(f"bad params item {item!r}")
                try:
                    params[key] = int(value)
                except ValueError as exc:
                    raise MalformedHeader(f"non-integer param {item!r}") from exc
        try:
            return GeneratorSpec(gen, seed, params).build(n, l)
        except ValueError as exc:
            raise MalformedHeader(str(exc)) from exc
    raise MalformedHeader(f"unknown backing mode {mode!r}")


def _read_explicit_payload(raw: bytes, offset: int, n: int, l: int) -> TripleColoring:
    expected = triple_count(n)
    payload = np.frombuffer(raw, dtype=np.uint8, offset=offset)
    values = _DIGIT_VALUE[payload]
    is_newline = payload == ord("\n")
    bad = (values < 0) & ~is_newline
    if bad.any():
        pos = int(np.argmax(bad))
        raise PayloadError(f"invalid payload byte {bytes([payload[pos]])!r}", offset + pos)
    digit_mask = ~is_newline
    count = int(digit_mask.sum())
    if count < expected:
        raise TruncatedPayload(f"payload holds {count} colors, expected {expected}")
    digit_positions = np.nonzero(digit_mask)[0]
    if count > expected:
        extra = int(digit_positions[expected])
        raise PayloadError("payload has more colors than C(N,3)", offset + extra)
    colors = values[digit_positions].astype(np.uint8)
    too_big = colors >= l
    if too_big.any():
        pos = int(digit_positions[int(np.argmax(too_big))])
        raise PayloadError(f"color digit out of range [0, {l})", offset + pos)
    backing = ExplicitBacking.from_colors(colors, l)
    return TripleColoring(n, l, backing)

"""Packed-bit matrix helpers.

Adjacency matrices are stored as rows of uint64 words, little-endian within
each word and across words: column j lives in word j >> 6 at bit j & 63. The
uint8 views used for packing assume a little-endian host, which matches every
platform this library targets.
"""

from __future__ import annotations

import numpy as np

WORD_BITS = 64


def words_for(n_cols: int) -> int:
    return (n_cols + WORD_BITS - 1) // WORD_BITS


def popcount(arr: np.ndarray) -> int:
    """Total number of set bits in a uint64 array."""
    return int(np.bitwise_count(arr).sum(dtype=np.int64))


def row_popcounts(packed: np.ndarray) -> np.ndarray:
    """Per-row set-bit counts of a (rows, words) uint64 matrix."""
    return np.bitwise_count(packed).sum(axis=1, dtype=np.int64)


def unpack_rows(packed: np.ndarray, n_cols: int) -> np.ndarray:
    """Expand (rows, words) uint64 to a (rows, n_cols) bool matrix."""
    rows = packed.shape[0]
    bits = np.unpackbits(
        packed.reshape(rows, -1).view(np.uint8), axis=1, count=n_cols, bitorder="little"
    )
    return bits.view(np.bool_)


def pack_bool_rows(bools: np.ndarray, n_words: int) -> np.ndarray:
    """Pack a (rows, n_cols) bool matrix into (rows, n_words) uint64."""
    rows = bools.shape[0]
    packed_bytes = np.packbits(bools, axis=1, bitorder="little")
    out = np.zeros((rows, n_words), dtype=np.uint64)
    out.view(np.uint8).reshape(rows, n_words * 8)[:, : packed_bytes.shape[1]] = packed_bytes
    return out


def transpose_packed(packed: np.ndarray, n: int, strip_rows: int = 1024) -> np.ndarray:
    """Transpose an n-by-n packed bit matrix without unpacking it whole."""
    n_words = packed.shape[1]
    out = np.zeros_like(packed)
    out_bytes = out.view(np.uint8).reshape(n, n_words * 8)
    for r0 in range(0, n, strip_rows):
        r1 = min(n, r0 + strip_rows)
        strip = unpack_rows(packed[r0:r1], n)
        cols = np.packbits(strip.T, axis=1, bitorder="little")
        out_bytes[:, r0 // 8 : r0 // 8 + cols.shape[1]] |= cols
    return out


def symmetrize_upper(upper: np.ndarray, n: int) -> np.ndarray:
    """OR an upper-triangular packed matrix with its transpose."""
    return upper | transpose_packed(upper, n)


def complete_adjacency(n: int) -> np.ndarray:
    """Packed adjacency of the complete graph on n vertices (no loops)."""
    n_words = words_for(n)
    adj = np.full((n, n_words), np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    pad = n_words * WORD_BITS - n
    if pad:
        adj[:, -1] &= np.uint64((1 << (WORD_BITS - pad)) - 1)
    rows = np.arange(n)
    adj[rows, rows >> 6] &= ~(np.uint64(1) << (rows & 63).astype(np.uint64))
    return adj


def row_to_int(packed_row: np.ndarray) -> int:
    """One packed row as a Python int bitset."""
    return int.from_bytes(packed_row.tobytes(), "little")


def int_to_positions(bits: int) -> list[int]:
    """Sorted positions of the set bits of a Python int."""
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out

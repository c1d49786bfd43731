"""Counter-based deterministic pseudorandom primitives.

Every random-looking value in this library is a pure function of an explicit
64-bit key and a counter, computed with a SplitMix64-style finalizer over
wrapping 64-bit arithmetic. The same (key, counter) therefore yields the same
value in every process and on every platform, which is what makes colorings
reproducible without storing them.

Colors and bounded draws take the top bits of the 64-bit word and use
rejection sampling (re-mixing the word on rejection) so no modulo bias enters
statistical acceptance tests.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4B0C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a fixed permutation of 64-bit words."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX1) & MASK64
    z ^= z >> 27
    z = (z * _MIX2) & MASK64
    z ^= z >> 31
    return z


def word_at(key: int, counter: int) -> int:
    """The counter-th word of the stream keyed by `key`."""
    return mix64((key + ((counter + 1) * GOLDEN)) & MASK64)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vector mix64 over a uint64 array; matches the scalar bit for bit."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def words_at(key: int, counters: np.ndarray) -> np.ndarray:
    c = counters.astype(np.uint64, copy=False)
    return mix64_array(np.uint64(key & MASK64) + (c + np.uint64(1)) * np.uint64(GOLDEN))


def color_from_word(word: int, n_colors: int) -> int:
    """Reduce one word to a color in [0, n_colors) from its top bits."""
    if n_colors == 1:
        return 0
    k = (n_colors - 1).bit_length()
    while True:
        value = word >> (64 - k)
        if value < n_colors:
            return value
        word = mix64((word + GOLDEN) & MASK64)


def colors_from_words(words: np.ndarray, n_colors: int) -> np.ndarray:
    """Vector variant of color_from_word; returns uint8."""
    if n_colors == 1:
        return np.zeros(words.shape, dtype=np.uint8)
    k = (n_colors - 1).bit_length()
    shift = np.uint64(64 - k)
    w = words.astype(np.uint64, copy=True)
    values = (w >> shift).astype(np.uint8)
    bad = values >= n_colors
    while bad.any():
        w[bad] = mix64_array(w[bad] + np.uint64(GOLDEN))
        values = (w >> shift).astype(np.uint8)
        bad = values >= n_colors
    return values


def randbelow(key: int, counter: int, bound: int) -> int:
    """Deterministic draw from [0, bound) at the given stream position."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound == 1:
        return 0
    k = (bound - 1).bit_length()
    word = word_at(key, counter)
    while True:
        value = word >> (64 - k)
        if value < bound:
            return value
        word = mix64((word + GOLDEN) & MASK64)

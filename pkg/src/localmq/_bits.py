"""Bitmask helpers.

Subsets of [n] and points of the n-cube are both encoded as integer
bitmasks (bit i = variable i, 0-based). Enumeration order is ascending
numeric mask everywhere a family of sets is walked, which fixes
iteration order for deterministic runs.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

MAX_BITS = 48  # masks stay well inside int64


def popcount(masks):
    """Number of set bits; works on python ints and numpy arrays."""
    if isinstance(masks, (int, np.integer)):
        return int(masks).bit_count()
    return np.bitwise_count(np.asarray(masks, dtype=np.int64)).astype(np.int64)


def parity_sign(masks):
    """(-1)**popcount as an int array (+1 for even parity)."""
    return 1 - 2 * (popcount(masks) & 1)


def bits_of(mask: int) -> list[int]:
    """Sorted list of set bit positions."""
    out = []
    i = 0
    m = mask
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return out


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        if m >> i & 1:
            raise ValueError(f"repeated index {i}")
        m |= 1 << i
    return m


def submasks(mask: int) -> Iterator[int]:
    """All subsets of `mask`, ascending numeric order."""
    subs = [0]
    for i in bits_of(mask):
        subs += [s | (1 << i) for s in subs]
    return iter(sorted(subs))


def expand_bits(y: int, positions: list[int]) -> int:
    """Place bit j of y at positions[j]; inverse of compress_bits."""
    m = 0
    for j, pos in enumerate(positions):
        if y >> j & 1:
            m |= 1 << pos
    return m


def compress_bits(mask: int, positions: list[int]) -> int:
    """Gather the bits of `mask` at `positions` into a compact mask."""
    y = 0
    for j, pos in enumerate(positions):
        if mask >> pos & 1:
            y |= 1 << j
    return y


def all_masks(n: int) -> np.ndarray:
    if n > 25:
        raise ValueError(f"refusing to enumerate 2**{n} masks")
    return np.arange(1 << n, dtype=np.int64)


def mask_to_bitstring(mask: int, n: int) -> str:
    """Variable 0 first (leftmost)."""
    return "".join("1" if mask >> i & 1 else "0" for i in range(n))


def bitstring_to_mask(s: str) -> int:
    m = 0
    for i, ch in enumerate(s):
        if ch == "1":
            m |= 1 << i
        elif ch != "0":
            raise ValueError(f"bad bitstring character {ch!r}")
    return m

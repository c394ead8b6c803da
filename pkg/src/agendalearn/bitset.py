"""Index-set helpers over plain-int bitmasks.

Object sets and feature sets are represented throughout the package as
arbitrary-precision Python ints: bit ``i`` set means index ``i`` is a
member.  All set algebra then reduces to ``&``, ``|``, ``~`` (bounded by a
universe mask) and ``==``.
"""

from __future__ import annotations

from typing import Iterable, Iterator


def from_indices(indices: Iterable[int], size: int) -> int:
    """Build a mask from indices, validating bounds against the universe size."""
    mask = 0
    for i in indices:
        if not 0 <= i < size:
            raise IndexError(f"index {i} out of range for universe of size {size}")
        mask |= 1 << i
    return mask


def to_indices(mask: int) -> tuple[int, ...]:
    """Members of a mask in ascending index order."""
    return tuple(iter_bits(mask))


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def full_mask(size: int) -> int:
    return (1 << size) - 1


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def popcount(mask: int) -> int:
    return mask.bit_count()

"""Formal contexts and their derivation operators.

A context is a triple of objects, features and a binary incidence relation.
It is stored twice: one bitmask per object over features (``rows``) and one
per feature over objects (``cols``), so both derivation directions are a
chain of ``&`` operations.  Contexts are immutable and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bitset import from_indices, full_mask, to_indices


class ContextError(ValueError):
    """Invalid context construction or out-of-range set."""


@dataclass(frozen=True)
class FormalContext:
    objects: tuple[str, ...]
    features: tuple[str, ...]
    rows: tuple[int, ...] = field(repr=False)  # per-object feature mask
    cols: tuple[int, ...] = field(repr=False)  # per-feature object mask

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def all_objects(self) -> int:
        return full_mask(len(self.objects))

    @property
    def all_features(self) -> int:
        return full_mask(len(self.features))

    def object_set(self, ids: Iterable[str]) -> int:
        index = {name: i for i, name in enumerate(self.objects)}
        return from_indices((index[x] for x in ids), self.n_objects)

    def feature_set(self, names: Iterable[str]) -> int:
        index = {name: j for j, name in enumerate(self.features)}
        return from_indices((index[x] for x in names), self.n_features)

    def object_names(self, mask: int) -> tuple[str, ...]:
        return tuple(self.objects[i] for i in to_indices(mask))

    def feature_names(self, mask: int) -> tuple[str, ...]:
        return tuple(self.features[j] for j in to_indices(mask))

    def _check_objects(self, mask: int) -> None:
        if mask < 0 or mask >> self.n_objects:
            raise ContextError(f"object set {bin(mask)} out of bounds")

    def _check_features(self, mask: int) -> None:
        if mask < 0 or mask >> self.n_features:
            raise ContextError(f"feature set {bin(mask)} out of bounds")

    def derive_intent(self, objects: int) -> int:
        """Features common to every object in the set (all features for the empty set)."""
        self._check_objects(objects)
        intent = self.all_features
        rest = objects
        while rest:
            low = rest & -rest
            intent &= self.rows[low.bit_length() - 1]
            rest ^= low
        return intent

    def derive_extent(self, features: int) -> int:
        """Objects carrying every feature in the set (all objects for the empty set)."""
        self._check_features(features)
        extent = self.all_objects
        rest = features
        while rest:
            low = rest & -rest
            extent &= self.cols[low.bit_length() - 1]
            rest ^= low
        return extent

    def closure_objects(self, objects: int) -> int:
        return self.derive_extent(self.derive_intent(objects))

    def closure_features(self, features: int) -> int:
        return self.derive_intent(self.derive_extent(features))

    def induce_subcontext(self, features: int) -> "FormalContext":
        """Context restricted to the given feature set (agenda).

        Objects are unchanged; feature identifiers are inherited from the
        parent so agendas stay comparable across induced contexts.  The
        empty agenda yields the degenerate context whose single concept
        pairs all objects with no features.
        """
        self._check_features(features)
        keep = to_indices(features)
        sub_features = tuple(self.features[j] for j in keep)
        sub_rows = []
        for row in self.rows:
            packed = 0
            for local, j in enumerate(keep):
                if row >> j & 1:
                    packed |= 1 << local
            sub_rows.append(packed)
        sub_cols = tuple(self.cols[j] for j in keep)
        return FormalContext(self.objects, sub_features, tuple(sub_rows), sub_cols)


def new_context(
    objects: Sequence[str],
    features: Sequence[str],
    incidence_pairs: Iterable[tuple[int, int]],
) -> FormalContext:
    """Build a context from identifier lists and (object, feature) index pairs."""
    if not objects:
        raise ContextError("object list is empty")
    if not features:
        raise ContextError("feature list is empty")
    for kind, ids in (("object", objects), ("feature", features)):
        seen = set()
        for name in ids:
            if name in seen:
                raise ContextError(f"duplicate {kind} identifier {name!r}")
            seen.add(name)
    n, m = len(objects), len(features)
    rows = [0] * n
    cols = [0] * m
    for i, j in incidence_pairs:
        if not (0 <= i < n and 0 <= j < m):
            raise ContextError(f"incidence pair ({i}, {j}) out of range for {n}x{m} context")
        rows[i] |= 1 << j
        cols[j] |= 1 << i
    return FormalContext(tuple(objects), tuple(features), tuple(rows), tuple(cols))

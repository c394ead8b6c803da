"""Concept enumeration and the concept order.

Concepts are enumerated with a Close-by-One depth-first search over object
sets: each closed object set is generated exactly once, guarded by the
canonicity test that closing ``B + {j}`` adds no object below ``j``.  The
concept count is worst-case exponential, so enumeration is bounded by a
configurable cap and fails loudly when it is exceeded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bitset import is_subset, to_indices
from .context import FormalContext

DEFAULT_CONCEPT_CAP = 1_000_000


class ConceptCapExceeded(RuntimeError):
    """Enumeration hit the concept cap; carries the partial count."""

    def __init__(self, cap: int):
        super().__init__(f"concept count exceeded cap of {cap}")
        self.cap = cap
        self.partial_count = cap


@dataclass(frozen=True)
class Concept:
    extent: int
    intent: int


@dataclass(frozen=True)
class ConceptLattice:
    context: FormalContext
    concepts: tuple[Concept, ...] = field(repr=False)
    agenda: tuple[str, ...] | None = None  # feature names that induced this lattice

    def __len__(self) -> int:
        return len(self.concepts)

    @property
    def top(self) -> Concept:
        full = self.context.all_objects
        for c in self.concepts:
            if c.extent == full:
                return c
        raise AssertionError("lattice lacks a top concept")

    @property
    def bottom(self) -> Concept:
        full = self.context.all_features
        extent = self.context.derive_extent(full)
        for c in self.concepts:
            if c.extent == extent:
                return c
        raise AssertionError("lattice lacks a bottom concept")


def enumerate_concepts(
    ctx: FormalContext,
    max_concepts: int = DEFAULT_CONCEPT_CAP,
    agenda: tuple[str, ...] | None = None,
) -> ConceptLattice:
    """All formal concepts of a context, ordered lexicographically by extent."""
    n = ctx.n_objects
    found: list[Concept] = []

    def visit(extent: int, intent: int, min_obj: int) -> None:
        if len(found) >= max_concepts:
            raise ConceptCapExceeded(max_concepts)
        found.append(Concept(extent, intent))
        for j in range(min_obj, n):
            if extent >> j & 1:
                continue
            new_intent = intent & ctx.rows[j]
            new_extent = ctx.derive_extent(new_intent)
            # canonicity: no object below j may join the closure
            below = (1 << j) - 1
            if new_extent & below == extent & below:
                visit(new_extent, new_intent, j + 1)

    # seed with the minimum closed object set Cl(0) = extent of the full feature set
    start_intent = ctx.all_features
    visit(ctx.derive_extent(start_intent), start_intent, 0)
    found.sort(key=lambda c: to_indices(c.extent))
    return ConceptLattice(ctx, tuple(found), agenda)


def concept_leq(c: Concept, d: Concept) -> bool:
    """Concept order: c <= d iff extent(c) is contained in extent(d)."""
    return is_subset(c.extent, d.extent)


def is_concept(ctx: FormalContext, extent: int, intent: int) -> bool:
    """Check both fixed-point equalities defining a formal concept."""
    return ctx.derive_intent(extent) == intent and ctx.derive_extent(intent) == extent

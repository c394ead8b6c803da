"""Agenda algebra: weighted feature-set bases, mass functions and transforms.

An agenda is a feature subset; a basis is the ordered family of agendas
whose induced lattices the ensemble runs on.  Learned real weights over a
basis normalize (clipping negatives) into a mass function over feature
sets, which Dempster's rule can combine and the pignistic / plausibility
transforms flatten into per-feature importances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .bitset import is_subset, to_indices
from .scaling import AttributeGroups

MASS_TOL = 1e-9


class AgendaError(ValueError):
    """Invalid basis, weights, or mass arithmetic."""


class TotalConflict(AgendaError):
    """Dempster combination of fully contradictory masses."""


@dataclass(frozen=True)
class MassFunction:
    """Masses over feature subsets keyed by sorted index tuples; sums to 1."""

    assignments: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        total = 0.0
        seen = set()
        for focal, mass in self.assignments:
            if focal in seen:
                raise AgendaError(f"duplicate focal set {focal}")
            seen.add(focal)
            if mass < 0:
                raise AgendaError(f"negative mass {mass} on {focal}")
            total += mass
        if abs(total - 1.0) > MASS_TOL:
            raise AgendaError(f"masses sum to {total}, not 1")

    def mass(self, focal: tuple[int, ...]) -> float:
        for key, value in self.assignments:
            if key == focal:
                return value
        return 0.0

    def items(self) -> tuple[tuple[tuple[int, ...], float], ...]:
        return self.assignments


@dataclass(frozen=True)
class AgendaWeights:
    """Real weights over an ordered basis of agendas (feature masks)."""

    basis: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.basis) != len(self.weights):
            raise AgendaError("basis and weights lengths differ")
        if len(set(self.basis)) != len(self.basis):
            raise AgendaError("basis agendas must be distinct")
        for w in self.weights:
            if not math.isfinite(w):
                raise AgendaError(f"non-finite weight {w}")


def normalize_to_mass(weights: AgendaWeights, clip: bool = True) -> MassFunction:
    """Weights into a mass function; ``clip`` zeroes negatives first."""
    values = list(weights.weights)
    if clip:
        values = [max(w, 0.0) for w in values]
    elif any(w < 0 for w in values):
        raise AgendaError("negative weights require clip=True")
    total = sum(values)
    if total <= 0:
        raise AgendaError("no mass: weights are all non-positive")
    return MassFunction(tuple(
        (to_indices(agenda), w / total) for agenda, w in zip(weights.basis, values)
    ))


def dempster_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Dempster's rule: intersect focal sets, drop conflict, renormalize."""
    combined: dict[tuple[int, ...], float] = {}
    conflict = 0.0
    for f1, v1 in m1.items():
        s1 = set(f1)
        for f2, v2 in m2.items():
            product = v1 * v2
            if product == 0.0:
                continue
            meet = tuple(sorted(s1.intersection(f2)))
            if meet:
                combined[meet] = combined.get(meet, 0.0) + product
            else:
                conflict += product
    if not combined or 1.0 - conflict <= 0.0:
        raise TotalConflict("total conflict: all focal intersections are empty")
    scale = 1.0 - conflict
    return MassFunction(tuple(sorted((f, v / scale) for f, v in combined.items())))


def pignistic(m: MassFunction) -> dict[int, float]:
    """Split each focal set's mass equally among its features."""
    out: dict[int, float] = {}
    for focal, mass in m.items():
        if not focal:
            if mass > 0:
                raise AgendaError("pignistic transform undefined with mass on the empty set")
            continue
        share = mass / len(focal)
        for x in focal:
            out[x] = out.get(x, 0.0) + share
    return dict(sorted(out.items()))


def plausibility_transform(m: MassFunction) -> dict[int, float]:
    """Per-feature plausibilities, normalized to a probability."""
    pl: dict[int, float] = {}
    for focal, mass in m.items():
        for x in focal:
            pl[x] = pl.get(x, 0.0) + mass
    total = sum(pl.values())
    if total <= 0:
        raise AgendaError("all singleton plausibilities are zero")
    return {x: v / total for x, v in sorted(pl.items())}


def basis_bounded(groups: AttributeGroups, alpha: int, include_full: bool = False) -> list[int]:
    """All unions of up to ``alpha`` attribute blocks, optionally plus the
    full feature set."""
    names = groups.names
    if not 1 <= alpha <= len(names):
        raise AgendaError(f"alpha must be in 1..{len(names)}")
    agendas: list[int] = []
    for size in range(1, alpha + 1):
        for combo in itertools.combinations(names, size):
            mask = 0
            for name in combo:
                mask |= groups.block_mask(name)
            agendas.append(mask)
    if include_full:
        full = 0
        for name in names:
            full |= groups.block_mask(name)
        if full not in agendas:
            agendas.append(full)
    return agendas


def basis_expert(agendas: Sequence[Sequence[str]], groups: AttributeGroups) -> list[int]:
    """Validate attribute-named agendas; deduplicate and order canonically."""
    if not agendas:
        raise AgendaError("expert basis is empty")
    masks = []
    for agenda in agendas:
        if not agenda:
            raise AgendaError("empty expert agenda")
        mask = 0
        for name in agenda:
            if name not in groups.names:
                raise AgendaError(f"unknown attribute {name!r} in expert agenda")
            mask |= groups.block_mask(name)
        if mask not in masks:
            masks.append(mask)
    return sorted(masks, key=to_indices)


@dataclass(frozen=True)
class AdaptiveConfig:
    alpha0: int = 1
    tau: float = 0.05
    max_rounds: int = 8
    size_cap: int | None = None  # max blocks per candidate; default previous-max + 1

    def __post_init__(self):
        if self.alpha0 < 1:
            raise AgendaError("alpha0 must be >= 1")
        if not self.tau < 1:
            raise AgendaError("tau must be below 1")
        if self.max_rounds < 1:
            raise AgendaError("max_rounds must be >= 1")


def basis_adaptive(
    train_callback: Callable[[list[int]], AgendaWeights],
    groups: AttributeGroups,
    config: AdaptiveConfig = AdaptiveConfig(),
) -> tuple[list[int], AgendaWeights]:
    """Grow a basis by alternating training and low-mass pruning.

    Starts from all agendas of at most ``alpha0`` blocks.  Each round trains
    weights for the current basis, drops agendas whose clip-normalized mass
    falls below ``tau``, then proposes every union of survivor blocks that
    stays within the block cap and was neither tried-and-dropped nor already
    present.  Stops when nothing new survives a round, nothing new can be
    proposed, the full feature set has been tried, or rounds run out.
    """
    block_masks = {name: groups.block_mask(name) for name in groups.names}
    full = 0
    for mask in block_masks.values():
        full |= mask

    def block_count(mask: int) -> int:
        return sum(1 for bm in block_masks.values() if bm & mask)

    basis = basis_bounded(groups, config.alpha0)
    newly_added = set(basis)
    dropped_ever: set[int] = set()
    survivors: list[int] = []
    weights = None
    for round_no in range(1, config.max_rounds + 1):
        weights = train_callback(basis)
        if tuple(weights.basis) != tuple(basis):
            raise AgendaError("trainer callback returned weights for a different basis")
        clipped = [max(w, 0.0) for w in weights.weights]
        total = sum(clipped)
        if total <= 0:
            raise AgendaError("no surviving agenda")
        by_agenda = dict(zip(weights.basis, (c / total for c in clipped)))
        survivors = [a for a in basis if by_agenda[a] >= config.tau]
        dropped_ever.update(a for a in basis if a not in survivors)
        if not survivors:
            raise AgendaError("no surviving agenda")
        if round_no > 1 and not any(a in newly_added for a in survivors):
            break
        union = 0
        for a in survivors:
            union |= a
        cap = config.size_cap or (max(block_count(a) for a in basis) + 1)
        member_blocks = [name for name, bm in block_masks.items() if is_subset(bm, union)]
        candidates = []
        for size in range(1, min(cap, len(member_blocks)) + 1):
            for combo in itertools.combinations(member_blocks, size):
                mask = 0
                for name in combo:
                    mask |= block_masks[name]
                if mask not in survivors and mask not in dropped_ever and mask not in candidates:
                    candidates.append(mask)
        if not candidates or full in survivors:
            break
        newly_added = set(candidates)
        basis = survivors + candidates
    kept = [(a, w) for a, w in zip(weights.basis, weights.weights) if a in survivors]
    final = AgendaWeights(tuple(a for a, _ in kept), tuple(w for _, w in kept))
    return survivors, final

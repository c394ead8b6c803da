"""Per-lattice base learners: JSM hypothesis classification and outlier scoring.

The JSM classifier mines hypothesis feature sets from a labeled split of the
context's objects and classifies a query by which hypotheses its intent
contains.  Two outlier scorers are provided: one from the size of an
object's closure, one from the number of concepts compatible with it.

All query-facing entry points work from an intent (feature mask local to
the learner's context), which makes them applicable to objects that were
never part of the training context.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .bitset import is_subset, popcount, to_indices
from .context import FormalContext
from .lattice import ConceptLattice

STRICT = "strict"
CLASSIC = "classic"


class Verdict(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNDETERMINED = "undetermined"
    CONFLICT = "conflict"


@dataclass(frozen=True)
class LabeledSplit:
    """Disjoint positive / negative / unlabeled object masks."""

    positives: int
    negatives: int
    unlabeled: int = 0

    def __post_init__(self):
        if self.positives & self.negatives or self.positives & self.unlabeled or self.negatives & self.unlabeled:
            raise ValueError("split sets must be pairwise disjoint")


def _hypotheses(lattice: ConceptLattice, own: int, other: int, mode: str) -> list[int]:
    """Intents whose extent avoids ``other``; classic mode also requires that
    the extent meets ``own``.

    For a closed H, "H is contained in no row of ``other``" is exactly
    "extent(H) avoids ``other``", so both modes reduce to extent tests.
    """
    if mode not in (STRICT, CLASSIC):
        raise ValueError(f"unknown hypothesis mode {mode!r}")
    out = []
    for c in lattice.concepts:
        if c.extent == 0 or c.extent & other:
            continue
        if mode == CLASSIC and not c.extent & own:
            continue
        out.append(c.intent)
    return out


def positive_hypotheses(lattice: ConceptLattice, split: LabeledSplit, mode: str = STRICT) -> list[int]:
    return _hypotheses(lattice, split.positives, split.negatives, mode)


def negative_hypotheses(lattice: ConceptLattice, split: LabeledSplit, mode: str = STRICT) -> list[int]:
    return _hypotheses(lattice, split.negatives, split.positives, mode)


def classify_jsm(
    lattice: ConceptLattice,
    split: LabeledSplit,
    query_intent: int,
    mode: str = STRICT,
) -> tuple[Verdict, tuple[float, float]]:
    """Binary JSM verdict for a query intent, with its membership encoding.

    Positive iff at least one positive and no negative hypothesis is
    contained in the intent; negative dually; both kinds contained is a
    conflict, neither leaves the query undetermined.  The two abstaining
    verdicts encode as the uniform vector so weighted averaging treats them
    as non-votes.
    """
    pos = positive_hypotheses(lattice, split, mode)
    neg = negative_hypotheses(lattice, split, mode)
    has_pos = any(is_subset(h, query_intent) for h in pos)
    has_neg = any(is_subset(h, query_intent) for h in neg)
    if has_pos and not has_neg:
        return Verdict.POSITIVE, (1.0, 0.0)
    if has_neg and not has_pos:
        return Verdict.NEGATIVE, (0.0, 1.0)
    if has_pos:
        return Verdict.CONFLICT, (0.5, 0.5)
    return Verdict.UNDETERMINED, (0.5, 0.5)


class JsmClassifier:
    """Multi-class JSM over one lattice via one-vs-rest splits.

    Hypotheses are mined once per class at construction; queries are a
    handful of containment tests.  Component k of the membership vector is
    1.0 / 0.0 / 0.5 for a positive / negative / abstaining class-k verdict.
    """

    def __init__(self, lattice: ConceptLattice, class_masks: list[int], mode: str = STRICT):
        self.lattice = lattice
        self.mode = mode
        self.n_classes = len(class_masks)
        labeled = 0
        for mask in class_masks:
            labeled |= mask
        self._hyps = []
        for mask in class_masks:
            split = LabeledSplit(mask, labeled & ~mask)
            self._hyps.append((
                positive_hypotheses(lattice, split, mode),
                negative_hypotheses(lattice, split, mode),
            ))

    def memberships(self, query_intent: int) -> list[float]:
        out = []
        for pos, neg in self._hyps:
            has_pos = any(is_subset(h, query_intent) for h in pos)
            has_neg = any(is_subset(h, query_intent) for h in neg)
            if has_pos and not has_neg:
                out.append(1.0)
            elif has_neg and not has_pos:
                out.append(0.0)
            else:
                out.append(0.5)
        return out

    def abstains(self, query_intent: int) -> bool:
        return all(m == 0.5 for m in self.memberships(query_intent))


def closure_outlier_degree(ctx: FormalContext, obj: int) -> float:
    """1 - |Cl({a})| / |A|: how few objects share all of a's features."""
    if not 0 <= obj < ctx.n_objects:
        raise ValueError(f"object index {obj} out of range")
    closure = ctx.closure_objects(1 << obj)
    return 1.0 - popcount(closure) / ctx.n_objects


def closure_degree_from_intent(ctx: FormalContext, intent: int) -> float:
    """Closure-size degree for an arbitrary intent (new objects included).

    For an object of the context this equals ``closure_outlier_degree``;
    an intent matched by no object scores 1.
    """
    return 1.0 - popcount(ctx.derive_extent(intent)) / ctx.n_objects


def sugiyama_q(lattice: ConceptLattice, objects: int) -> int:
    """Number of concepts whose extent contains the object set or whose
    intent contains the set's intent."""
    intent = lattice.context.derive_intent(objects)
    count = 0
    for c in lattice.concepts:
        if is_subset(objects, c.extent) or is_subset(intent, c.intent):
            count += 1
    return count


def sugiyama_q_from_intent(lattice: ConceptLattice, intent: int) -> int:
    """Intent-only form of the concept-count score.

    ``B`` is contained in a closed extent exactly when that concept's intent
    is contained in ``I1[B]``, so the score is a pure containment count over
    intents and extends to objects outside the context.
    """
    count = 0
    for c in lattice.concepts:
        if is_subset(c.intent, intent) or is_subset(intent, c.intent):
            count += 1
    return count


def sugiyama_outlier_degree(lattice: ConceptLattice, obj: int) -> float:
    """1 - q({a}) / |concepts|: fewer compatible concepts means more outlying."""
    if not 0 <= obj < lattice.context.n_objects:
        raise ValueError(f"object index {obj} out of range")
    return 1.0 - sugiyama_q(lattice, 1 << obj) / len(lattice.concepts)


class ClosureOutlierScorer:
    """Per-lattice closure-size degree, evaluated from intents."""

    def __init__(self, lattice: ConceptLattice):
        self.lattice = lattice

    def degree(self, query_intent: int) -> float:
        return closure_degree_from_intent(self.lattice.context, query_intent)


class SugiyamaOutlierScorer:
    """Per-lattice concept-count degree, evaluated from intents."""

    def __init__(self, lattice: ConceptLattice):
        self.lattice = lattice

    def degree(self, query_intent: int) -> float:
        return 1.0 - sugiyama_q_from_intent(self.lattice, query_intent) / len(self.lattice.concepts)

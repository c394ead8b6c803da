"""Ensemble training over basis lattices.

One base learner runs per basis agenda; the ensemble output for an object
is the weighted average of the per-lattice results,

    out_k(a, w) = sum_L w(L) * Alg_k(a, L) / sum_L w(L),

which is invariant under rescaling of the whole weight vector.  Training is
full-batch gradient descent on the least-squares objective (or clamped
cross-entropy): per-lattice outputs on the training objects are computed
once up front, then each epoch takes one analytic gradient step and
renormalizes the weights so their sum is 1, which the scale invariance
makes prediction-neutral.  A small denominator guard |sum w| >= delta is
enforced by retrying violating steps at halved learning rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bitset import to_indices
from .context import FormalContext
from .lattice import ConceptCapExceeded, ConceptLattice, DEFAULT_CONCEPT_CAP, enumerate_concepts
from .learners import (
    CLASSIC,
    STRICT,
    ClosureOutlierScorer,
    JsmClassifier,
    SugiyamaOutlierScorer,
)
from . import agenda as agenda_ops
from .scaling import AttributeGroups, ScalingSpec, scale_object

CLASSIFIERS = ("jsm-strict", "jsm-classic")
OUTLIER_SCORERS = ("closure", "sugiyama")


class TrainingError(ValueError):
    """Invalid training inputs or degenerate weight state."""


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 500
    learning_rate: float = 0.1
    seed: int = 0
    loss: str = "mse"  # "mse" | "cross-entropy"
    guard: float = 1e-3
    init_range: float = 0.5

    def __post_init__(self):
        if self.epochs < 1:
            raise TrainingError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise TrainingError("learning rate must be positive")
        if self.guard <= 0:
            raise TrainingError("denominator guard must be positive")
        if self.loss not in ("mse", "cross-entropy"):
            raise TrainingError(f"unknown loss kind {self.loss!r}")


@dataclass(frozen=True)
class Prediction:
    memberships: tuple[float, ...]
    decided: int | None  # class index, or None when every lattice abstained


@dataclass
class TrainedModel:
    task: str  # "classify" | "outlier"
    learner: str
    context: FormalContext
    basis: tuple[int, ...]
    weights: tuple[float, ...]
    class_labels: tuple[str, ...]
    label_indices: tuple[int, ...]
    config: TrainingConfig
    loss_curve: tuple[float, ...]
    skipped_epochs: tuple[int, ...] = ()
    scaling: ScalingSpec | None = None
    groups: AttributeGroups | None = None
    max_concepts: int = DEFAULT_CONCEPT_CAP
    _members: list | None = field(default=None, repr=False, compare=False)

    @property
    def final_loss(self) -> float:
        return self.loss_curve[-1]

    def members(self) -> list:
        if self._members is None:
            self._members = _build_members(
                self.context, self.basis, self.task, self.learner,
                self.label_indices, len(self.class_labels), self.max_concepts,
            )
        return self._members


class _Member:
    """One basis lattice with its learner and parent-to-local index map."""

    def __init__(self, lattice: ConceptLattice, agenda_mask: int, evaluator):
        self.lattice = lattice
        self.agenda_mask = agenda_mask
        self._positions = to_indices(agenda_mask)
        self.evaluator = evaluator

    def local_intent(self, parent_mask: int) -> int:
        local = 0
        for pos, j in enumerate(self._positions):
            if parent_mask >> j & 1:
                local |= 1 << pos
        return local


def _build_lattice(ctx: FormalContext, agenda_mask: int, max_concepts: int) -> ConceptLattice:
    sub = ctx.induce_subcontext(agenda_mask)
    try:
        return enumerate_concepts(sub, max_concepts, agenda=sub.features)
    except ConceptCapExceeded as exc:
        exc.agenda = sub.features
        raise


def _build_members(ctx, basis, task, learner, label_indices, n_classes, max_concepts):
    members = []
    for mask in basis:
        lattice = _build_lattice(ctx, mask, max_concepts)
        if task == "classify":
            class_masks = []
            for k in range(n_classes):
                m = 0
                for i, lab in enumerate(label_indices):
                    if lab == k:
                        m |= 1 << i
                class_masks.append(m)
            mode = STRICT if learner == "jsm-strict" else CLASSIC
            evaluator = JsmClassifier(lattice, class_masks, mode)
        elif learner == "closure":
            evaluator = ClosureOutlierScorer(lattice)
        else:
            evaluator = SugiyamaOutlierScorer(lattice)
        members.append(_Member(lattice, mask, evaluator))
    return members


def _alg_matrix(members: list, ctx: FormalContext, n_classes: int, task: str) -> np.ndarray:
    """Per-lattice outputs for every training object, computed exactly once."""
    n = ctx.n_objects
    width = n_classes if task == "classify" else 1
    P = np.empty((n, len(members), width), dtype=float)
    for l, member in enumerate(members):
        sub_rows = member.lattice.context.rows
        for i in range(n):
            if task == "classify":
                P[i, l, :] = member.evaluator.memberships(sub_rows[i])
            else:
                P[i, l, 0] = member.evaluator.degree(sub_rows[i])
    return P


def ensemble_output(
    weights: Sequence[float],
    alg_matrix: Sequence[Sequence[float]],
    guard: float = 1e-3,
) -> Prediction:
    """Weighted-average prediction for one object from its per-lattice outputs.

    If every lattice abstained (all rows uniform at 0.5) the membership
    vector is the exact uniform vector and no class is decided.
    """
    w = np.asarray(weights, dtype=float)
    P = np.asarray(alg_matrix, dtype=float)
    total = w.sum()
    if abs(total) < guard:
        raise TrainingError(f"weight sum {total} below denominator guard {guard}")
    if P.size and np.all(P == 0.5):
        return Prediction(tuple([0.5] * P.shape[1]), None)
    out = P.T @ w / total
    return Prediction(tuple(float(v) for v in out), int(np.argmax(out)))


def loss_value(predictions: np.ndarray, targets: np.ndarray, kind: str = "mse") -> float:
    """Reported loss: plain mean squared error over (object, class) cells, or
    mean clamped binary cross-entropy."""
    out = np.asarray(predictions, dtype=float)
    y = np.asarray(targets, dtype=float)
    if kind == "mse":
        return float(np.mean((out - y) ** 2))
    if kind == "cross-entropy":
        o = np.clip(out, 1e-7, 1.0 - 1e-7)
        return float(np.mean(-(y * np.log(o) + (1.0 - y) * np.log(1.0 - o))))
    raise TrainingError(f"unknown loss kind {kind!r}")


def objective_value(predictions: np.ndarray, targets: np.ndarray, kind: str = "mse") -> float:
    """The quantity gradient descent actually minimizes.

    For squared error this is the conventional least-squares objective
    (half the reported mse); for cross-entropy it equals the reported loss.
    """
    if kind == "mse":
        return 0.5 * loss_value(predictions, targets, kind)
    return loss_value(predictions, targets, kind)


def _objective_grad_wrt_out(out: np.ndarray, y: np.ndarray, kind: str) -> np.ndarray:
    if kind == "mse":
        return (out - y) / out.size
    o = np.clip(out, 1e-7, 1.0 - 1e-7)
    grad = (o - y) / (o * (1.0 - o)) / out.size
    grad[(out < 1e-7) | (out > 1.0 - 1e-7)] = 0.0  # clamp is flat outside
    return grad


def grad_weights(
    weights: Sequence[float],
    alg_outputs: np.ndarray,
    targets: np.ndarray,
    kind: str = "mse",
    guard: float = 1e-3,
) -> np.ndarray:
    """Analytic objective gradient over the basis weights.

    Uses d out_k / d w(L) = (Alg_k(a, L) - out_k(a, w)) / sum(w), chained
    through the objective; matches central finite differences of
    ``objective_value``.
    """
    w = np.asarray(weights, dtype=float)
    P = np.asarray(alg_outputs, dtype=float)
    y = np.asarray(targets, dtype=float)
    total = w.sum()
    if abs(total) < guard:
        raise TrainingError(f"weight sum {total} below denominator guard {guard}")
    out = np.tensordot(w, P, axes=([0], [1])) / total
    dld = _objective_grad_wrt_out(out, y, kind)
    return np.einsum("ik,ilk->l", dld, P - out[:, None, :]) / total


def _descend(P: np.ndarray, Y: np.ndarray, config: TrainingConfig):
    """The training loop shared by the classification and outlier paths."""
    n_lattices = P.shape[1]
    rng = np.random.default_rng(config.seed)
    w = rng.uniform(-config.init_range, config.init_range, n_lattices)
    while abs(w.sum()) < config.guard:
        w = rng.uniform(-config.init_range, config.init_range, n_lattices)
    curve = []
    skipped = []
    for epoch in range(config.epochs):
        total = w.sum()
        out = np.tensordot(w, P, axes=([0], [1])) / total
        curve.append(loss_value(out, Y, config.loss))
        dld = _objective_grad_wrt_out(out, Y, config.loss)
        grad = np.einsum("ik,ilk->l", dld, P - out[:, None, :]) / total
        step = config.learning_rate
        for _ in range(21):  # first try plus 20 halvings
            candidate = w - step * grad
            candidate_sum = candidate.sum()
            if abs(candidate_sum) >= config.guard:
                w = candidate / candidate_sum
                break
            step *= 0.5
        else:
            skipped.append(epoch)
    out = np.tensordot(w, P, axes=([0], [1])) / w.sum()
    curve.append(loss_value(out, Y, config.loss))
    return w, curve, skipped


def train(
    ctx: FormalContext,
    labels: Sequence[str],
    basis: Sequence[int],
    learner: str = "jsm-strict",
    config: TrainingConfig = TrainingConfig(),
    scaling: ScalingSpec | None = None,
    groups: AttributeGroups | None = None,
    class_labels: Sequence[str] | None = None,
    max_concepts: int = DEFAULT_CONCEPT_CAP,
) -> TrainedModel:
    """Learn basis weights for a classification ensemble."""
    if learner not in CLASSIFIERS:
        raise TrainingError(f"unknown classifier {learner!r}")
    if not basis:
        raise TrainingError("basis is empty")
    if len(labels) != ctx.n_objects or not labels:
        raise TrainingError("every training object needs a label")
    classes = tuple(class_labels) if class_labels else tuple(sorted(set(labels)))
    index = {c: k for k, c in enumerate(classes)}
    try:
        label_indices = tuple(index[lab] for lab in labels)
    except KeyError as exc:
        raise TrainingError(f"label {exc.args[0]!r} not among class labels {classes}") from None

    members = _build_members(ctx, tuple(basis), "classify", learner, label_indices,
                             len(classes), max_concepts)
    P = _alg_matrix(members, ctx, len(classes), "classify")
    Y = np.zeros((ctx.n_objects, len(classes)))
    Y[np.arange(ctx.n_objects), label_indices] = 1.0
    w, curve, skipped = _descend(P, Y, config)
    model = TrainedModel(
        task="classify", learner=learner, context=ctx, basis=tuple(basis),
        weights=tuple(float(x) for x in w), class_labels=classes,
        label_indices=label_indices, config=config, loss_curve=tuple(curve),
        skipped_epochs=tuple(skipped), scaling=scaling, groups=groups,
        max_concepts=max_concepts,
    )
    model._members = members
    return model


def train_outlier(
    ctx: FormalContext,
    outlier_flags: Sequence[int],
    basis: Sequence[int],
    scorer: str = "closure",
    config: TrainingConfig = TrainingConfig(),
    scaling: ScalingSpec | None = None,
    groups: AttributeGroups | None = None,
    max_concepts: int = DEFAULT_CONCEPT_CAP,
) -> TrainedModel:
    """Learn basis weights for an outlier-degree ensemble (0/1 targets)."""
    if scorer not in OUTLIER_SCORERS:
        raise TrainingError(f"unknown outlier scorer {scorer!r}")
    if not basis:
        raise TrainingError("basis is empty")
    if len(outlier_flags) != ctx.n_objects or not len(outlier_flags):
        raise TrainingError("every training object needs a 0/1 outlier flag")
    flags = tuple(int(f) for f in outlier_flags)
    if any(f not in (0, 1) for f in flags):
        raise TrainingError("outlier flags must be 0 or 1")

    members = _build_members(ctx, tuple(basis), "outlier", scorer, flags, 1, max_concepts)
    P = _alg_matrix(members, ctx, 1, "outlier")
    Y = np.asarray(flags, dtype=float).reshape(-1, 1)
    w, curve, skipped = _descend(P, Y, config)
    model = TrainedModel(
        task="outlier", learner=scorer, context=ctx, basis=tuple(basis),
        weights=tuple(float(x) for x in w), class_labels=(),
        label_indices=flags, config=config, loss_curve=tuple(curve),
        skipped_epochs=tuple(skipped), scaling=scaling, groups=groups,
        max_concepts=max_concepts,
    )
    model._members = members
    return model


def predict_mask(model: TrainedModel, feature_mask: int) -> Prediction:
    """Classify an object given as a feature mask over the model's context."""
    if model.task != "classify":
        raise TrainingError("model was trained for outlier scoring, not classification")
    rows = [m.evaluator.memberships(m.local_intent(feature_mask)) for m in model.members()]
    return ensemble_output(model.weights, rows, model.config.guard)


def predict(model: TrainedModel, raw_row: Mapping[str, object]) -> Prediction:
    """Scale a raw object with the model's spec, then classify it."""
    if model.scaling is None:
        raise TrainingError("model has no scaling spec; use predict_mask")
    return predict_mask(model, scale_object(model.scaling, raw_row))


def score_mask(model: TrainedModel, feature_mask: int) -> float:
    """Ensemble outlier degree for a feature mask."""
    if model.task != "outlier":
        raise TrainingError("model was trained for classification, not outlier scoring")
    degrees = [m.evaluator.degree(m.local_intent(feature_mask)) for m in model.members()]
    w = np.asarray(model.weights)
    total = w.sum()
    if abs(total) < model.config.guard:
        raise TrainingError("weight sum below denominator guard")
    return float(np.dot(w, degrees) / total)


def score_outlier(model: TrainedModel, raw_row: Mapping[str, object]) -> float:
    if model.scaling is None:
        raise TrainingError("model has no scaling spec; use score_mask")
    return score_mask(model, scale_object(model.scaling, raw_row))


@dataclass(frozen=True)
class ExplanationEntry:
    agenda: tuple[str, ...]  # feature names
    weight: float
    mass: float
    negative: bool


@dataclass(frozen=True)
class ExplanationReport:
    entries: tuple[ExplanationEntry, ...]
    pignistic: tuple[tuple[str, float], ...]
    plausibility: tuple[tuple[str, float], ...]
    has_negative_weights: bool

    NEGATIVE_NOTE = ("negative weight: this agenda's categorization runs opposite "
                     "to the learned task")


def build_explanation(model: TrainedModel) -> ExplanationReport:
    """Weights, clip-normalized masses and per-feature importances.

    Entries are ordered by descending weight, ties by agenda names.
    """
    weights = agenda_ops.AgendaWeights(model.basis, model.weights)
    mass = agenda_ops.normalize_to_mass(weights, clip=True)
    names = model.context.features
    mass_by_agenda = dict(mass.items())
    entries = []
    for agenda_mask, w in zip(model.basis, model.weights):
        key = to_indices(agenda_mask)
        entries.append(ExplanationEntry(
            agenda=tuple(names[j] for j in key),
            weight=w,
            mass=mass_by_agenda[key],
            negative=w < 0,
        ))
    entries.sort(key=lambda e: (-e.weight, e.agenda))
    pig = agenda_ops.pignistic(mass)
    pl = agenda_ops.plausibility_transform(mass)
    return ExplanationReport(
        entries=tuple(entries),
        pignistic=tuple((names[j], p) for j, p in pig.items()),
        plausibility=tuple((names[j], p) for j, p in pl.items()),
        has_negative_weights=any(w < 0 for w in model.weights),
    )

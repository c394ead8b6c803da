"""Model persistence: canonical JSON with full-precision numbers.

The file stores the scaling spec, the scaled training incidence and labels,
the basis agendas (as sorted feature-name lists) and the learned weights
(as round-trip decimal strings).  Lattices are derived data and are
recomputed on load, so save -> load -> save is byte-identical and a loaded
model predicts exactly like the in-memory one.
"""

from __future__ import annotations

import json
from pathlib import Path

from .bitset import from_indices, to_indices
from .context import FormalContext, new_context
from .lattice import DEFAULT_CONCEPT_CAP
from .scaling import AttributeGroups, AttributeScale, ScalingSpec
from .training import TrainedModel, TrainingConfig

FORMAT_VERSION = 1


class ModelFileError(ValueError):
    """Unreadable, mismatched or invariant-violating model file."""


def _scaling_to_doc(spec: ScalingSpec | None) -> dict | None:
    if spec is None:
        return None
    attributes = []
    for s in spec.scales:
        entry = {"name": s.name, "kind": s.kind}
        if s.kind == "nominal":
            entry["values"] = list(s.values)
        else:
            entry["labels"] = list(s.labels)
            entry["cuts"] = [repr(c) for c in s.cuts]
        attributes.append(entry)
    return {"attributes": attributes, "warnings": list(spec.warnings)}


def _scaling_from_doc(doc: dict | None) -> ScalingSpec | None:
    if doc is None:
        return None
    scales = []
    for entry in doc["attributes"]:
        if entry["kind"] == "nominal":
            scales.append(AttributeScale(entry["name"], "nominal", values=tuple(entry["values"])))
        else:
            scales.append(AttributeScale(
                entry["name"], "ordinal",
                labels=tuple(entry["labels"]),
                cuts=tuple(float(c) for c in entry["cuts"]),
            ))
    return ScalingSpec(tuple(scales), tuple(doc.get("warnings", ())))


def to_document(model: TrainedModel) -> dict:
    ctx = model.context
    doc = {
        "format_version": FORMAT_VERSION,
        "task": model.task,
        "learner": model.learner,
        "class_labels": list(model.class_labels),
        "feature_names": list(ctx.features),
        "scaling": _scaling_to_doc(model.scaling),
        "attribute_groups": (
            {name: [start, stop] for name, start, stop in model.groups.blocks}
            if model.groups is not None else None
        ),
        "basis": [sorted(ctx.features[j] for j in to_indices(mask)) for mask in model.basis],
        "weights": [repr(w) for w in model.weights],
        "training_data": {
            "objects": list(ctx.objects),
            "rows": [list(to_indices(row)) for row in ctx.rows],
            "labels": list(model.label_indices),
        },
        "training": {
            "seed": model.config.seed,
            "epochs": model.config.epochs,
            "learning_rate": repr(model.config.learning_rate),
            "loss": model.config.loss,
            "guard": repr(model.config.guard),
            "init_range": repr(model.config.init_range),
            "final_loss": repr(model.final_loss),
            "loss_curve_length": len(model.loss_curve),
            "skipped_epochs": list(model.skipped_epochs),
            "max_concepts": model.max_concepts,
        },
    }
    return doc


def from_document(doc: dict) -> TrainedModel:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model format version {version!r}")
    try:
        feature_names = list(doc["feature_names"])
        data = doc["training_data"]
        objects = list(data["objects"])
        rows = data["rows"]
        labels = tuple(int(x) for x in data["labels"])
        pairs = [(i, j) for i, row in enumerate(rows) for j in row]
        ctx = new_context(objects, feature_names, pairs)
        name_index = {name: j for j, name in enumerate(feature_names)}
        basis = tuple(
            from_indices((name_index[n] for n in agenda), len(feature_names))
            for agenda in doc["basis"]
        )
        weights = tuple(float(w) for w in doc["weights"])
        training = doc["training"]
        config = TrainingConfig(
            epochs=int(training["epochs"]),
            learning_rate=float(training["learning_rate"]),
            seed=int(training["seed"]),
            loss=training["loss"],
            guard=float(training["guard"]),
            init_range=float(training["init_range"]),
        )
        groups_doc = doc.get("attribute_groups")
        groups = (
            AttributeGroups(tuple((name, start, stop) for name, (start, stop) in groups_doc.items()))
            if groups_doc else None
        )
        model = TrainedModel(
            task=doc["task"],
            learner=doc["learner"],
            context=ctx,
            basis=basis,
            weights=weights,
            class_labels=tuple(doc["class_labels"]),
            label_indices=labels,
            config=config,
            loss_curve=(float(training["final_loss"]),),
            skipped_epochs=tuple(training.get("skipped_epochs", ())),
            scaling=_scaling_from_doc(doc.get("scaling")),
            groups=groups,
            max_concepts=int(training.get("max_concepts", DEFAULT_CONCEPT_CAP)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFileError):
            raise
        raise ModelFileError(f"malformed model document: {exc}") from exc
    _validate(model)
    return model


def _validate(model: TrainedModel) -> None:
    if model.task not in ("classify", "outlier"):
        raise ModelFileError(f"unknown task {model.task!r}")
    if not model.basis:
        raise ModelFileError("model basis is empty")
    if len(model.basis) != len(model.weights):
        raise ModelFileError("basis and weights lengths differ")
    total = sum(model.weights)
    if abs(total) < model.config.guard:
        raise ModelFileError("weight sum below the denominator guard")
    if model.task == "classify" and not model.class_labels:
        raise ModelFileError("classification model without class labels")
    if model.groups is not None:
        stops = [0]
        for _, start, stop in model.groups.blocks:
            if start != stops[-1] or stop <= start:
                raise ModelFileError("attribute groups must partition the feature range")
            stops.append(stop)
        if stops[-1] != model.context.n_features:
            raise ModelFileError("attribute groups do not cover all features")


def dumps(model: TrainedModel) -> str:
    return json.dumps(to_document(model), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(f"cannot read model file: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"model file is not valid JSON: {exc}") from exc
    return from_document(doc)

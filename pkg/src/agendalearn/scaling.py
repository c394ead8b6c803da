"""Conceptual scaling: many-valued tables into binary feature contexts.

Categorical attributes scale nominally (one feature per distinct value);
numeric ones are binned by ordered cut points, by default at the empirical
1/3 and 2/3 quantiles.  Each source attribute owns a contiguous block of
feature indices, and every scaled object hits exactly one feature per block.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .context import FormalContext, new_context

CATEGORICAL = "categorical"
NUMERIC = "numeric"


class ScalingError(ValueError):
    """Malformed table, spec mismatch, or unscalable value."""


@dataclass(frozen=True)
class ManyValuedContext:
    objects: tuple[str, ...]
    attributes: tuple[tuple[str, str], ...]  # (name, kind)
    cells: tuple[tuple[object, ...], ...]    # per object, aligned with attributes

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.attributes)


@dataclass(frozen=True)
class AttributeScale:
    """How one attribute turns into features.

    ``nominal``: one feature per entry of ``values``.
    ``ordinal``: len(cuts)+1 features labelled by ``labels``; bins are
    right-closed except the last, i.e. value v lands in the first bin with
    v <= cut, else the last bin.
    """

    name: str
    kind: str  # "nominal" | "ordinal"
    values: tuple[str, ...] = ()
    labels: tuple[str, ...] = ()
    cuts: tuple[float, ...] = ()

    def feature_labels(self) -> tuple[str, ...]:
        return self.values if self.kind == "nominal" else self.labels

    def bin_of(self, value: object) -> str:
        if self.kind == "nominal":
            text = str(value)
            if text not in self.values:
                raise ScalingError(f"unknown value {text!r} for attribute {self.name!r}")
            return text
        v = _as_number(value, self.name)
        for cut, label in zip(self.cuts, self.labels):
            if v <= cut:
                return label
        return self.labels[-1]


@dataclass(frozen=True)
class ScalingSpec:
    scales: tuple[AttributeScale, ...]
    warnings: tuple[str, ...] = ()

    def scale_for(self, name: str) -> AttributeScale:
        for scale in self.scales:
            if scale.name == name:
                return scale
        raise ScalingError(f"no scaling for attribute {name!r}")


@dataclass(frozen=True)
class AttributeGroups:
    """Attribute name -> contiguous [start, stop) feature index block."""

    blocks: tuple[tuple[str, int, int], ...]

    def block(self, name: str) -> tuple[int, int]:
        for block_name, start, stop in self.blocks:
            if block_name == name:
                return start, stop
        raise KeyError(name)

    def block_mask(self, name: str) -> int:
        start, stop = self.block(name)
        return ((1 << (stop - start)) - 1) << start

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.blocks)


def _as_number(value: object, attr: str) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    if not text:
        raise ScalingError(f"missing numeric value for attribute {attr!r}")
    try:
        return float(text)
    except ValueError:
        raise ScalingError(f"non-numeric value {text!r} for attribute {attr!r}") from None


def _looks_numeric(raw: Sequence[object]) -> bool:
    seen = False
    for value in raw:
        text = str(value).strip()
        if not text:
            continue
        seen = True
        try:
            float(text)
        except ValueError:
            return False
    return seen


def parse_table(
    text: str | io.TextIOBase,
    label_column: str | None = None,
    kinds: Mapping[str, str] | None = None,
) -> tuple[ManyValuedContext, list[str] | None]:
    """Read a CSV table into a many-valued context.

    First row is the header, first column holds object identifiers.  A
    designated label column is split off and returned separately.  Attribute
    kinds are inferred (numeric iff every non-empty cell parses as a number)
    unless overridden through ``kinds``.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ScalingError("empty table") from None
    if len(header) < 2:
        raise ScalingError("table needs an identifier column and at least one attribute")
    attr_names = header[1:]
    if len(set(attr_names)) != len(attr_names):
        raise ScalingError("duplicate attribute names in header")
    label_idx = None
    if label_column is not None:
        if label_column not in attr_names:
            raise ScalingError(f"label column {label_column!r} not in header")
        label_idx = attr_names.index(label_column)
        attr_names = attr_names[:label_idx] + attr_names[label_idx + 1:]

    objects: list[str] = []
    labels: list[str] = [] if label_idx is not None else None
    cells: list[tuple[str, ...]] = []
    seen = set()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ScalingError(f"ragged row at line {lineno}: expected {len(header)} cells, got {len(row)}")
        obj = row[0]
        if obj in seen:
            raise ScalingError(f"duplicate object id {obj!r}")
        seen.add(obj)
        objects.append(obj)
        values = row[1:]
        if label_idx is not None:
            labels.append(values[label_idx])
            values = values[:label_idx] + values[label_idx + 1:]
        cells.append(tuple(values))
    if not objects:
        raise ScalingError("empty table")

    kinds = dict(kinds or {})
    attributes = []
    for j, name in enumerate(attr_names):
        kind = kinds.get(name)
        if kind is None:
            kind = NUMERIC if _looks_numeric([row[j] for row in cells]) else CATEGORICAL
        elif kind not in (NUMERIC, CATEGORICAL):
            raise ScalingError(f"unknown attribute kind {kind!r}")
        attributes.append((name, kind))
    mv = ManyValuedContext(tuple(objects), tuple(attributes), tuple(cells))
    return mv, labels


def _default_labels(n_bins: int) -> tuple[str, ...]:
    if n_bins == 2:
        return ("Low", "High")
    if n_bins == 3:
        return ("Low", "Medium", "High")
    return tuple(f"bin{i + 1}" for i in range(n_bins))


def build_scaling_spec(
    mv: ManyValuedContext,
    strategy: str = "terciles",
    explicit_cuts: Mapping[str, Sequence[float]] | None = None,
) -> ScalingSpec:
    """Decide how every attribute scales.

    ``nominal-only`` treats everything as categorical.  ``terciles`` bins
    numeric attributes at the 1/3 and 2/3 quantiles (linear interpolation on
    the sorted sample) into Low/Medium/High; numeric attributes with fewer
    than three distinct values fall back to nominal with a warning.
    ``explicit`` uses user-provided cut points where given.
    """
    if strategy not in ("nominal-only", "terciles", "explicit"):
        raise ScalingError(f"unknown scaling strategy {strategy!r}")
    if strategy == "explicit" and not explicit_cuts:
        raise ScalingError("explicit strategy requires cut points")
    explicit_cuts = dict(explicit_cuts or {})

    scales = []
    warnings = []
    for j, (name, kind) in enumerate(mv.attributes):
        column = [row[j] for row in mv.cells]
        if kind == CATEGORICAL or strategy == "nominal-only":
            scales.append(_nominal_scale(name, column))
            continue
        if strategy == "explicit" and name in explicit_cuts:
            cuts = tuple(float(c) for c in explicit_cuts[name])
            if not cuts:
                raise ScalingError(f"no cut points for attribute {name!r}")
            if any(b <= a for a, b in zip(cuts, cuts[1:])):
                raise ScalingError(f"cut points for {name!r} must be strictly increasing")
            labels = _default_labels(len(cuts) + 1)
            scales.append(AttributeScale(name, "ordinal", labels=labels, cuts=cuts))
            continue
        numbers = [_as_number(v, name) for v in column]
        if len(set(numbers)) < 3:
            warnings.append(f"attribute {name!r} has fewer than 3 distinct values; scaled nominally")
            scales.append(_nominal_scale(name, column))
            continue
        lo, hi = np.quantile(np.sort(np.asarray(numbers)), [1 / 3, 2 / 3])
        if lo == hi:
            warnings.append(f"attribute {name!r} has coincident tercile cuts; scaled nominally")
            scales.append(_nominal_scale(name, column))
            continue
        scales.append(AttributeScale(
            name, "ordinal", labels=("Low", "Medium", "High"), cuts=(float(lo), float(hi)),
        ))
    return ScalingSpec(tuple(scales), tuple(warnings))


def _nominal_scale(name: str, column: Iterable[object]) -> AttributeScale:
    values = tuple(sorted({str(v) for v in column}))
    if not values:
        raise ScalingError(f"attribute {name!r} has no values")
    return AttributeScale(name, "nominal", values=values)


def feature_layout(spec: ScalingSpec) -> tuple[tuple[str, ...], AttributeGroups]:
    """Feature names ("Attr=Value") and the per-attribute index blocks."""
    names: list[str] = []
    blocks = []
    for scale in spec.scales:
        start = len(names)
        for label in scale.feature_labels():
            names.append(f"{scale.name}={label}")
        blocks.append((scale.name, start, len(names)))
    return tuple(names), AttributeGroups(tuple(blocks))


def apply_scaling(mv: ManyValuedContext, spec: ScalingSpec) -> tuple[FormalContext, AttributeGroups]:
    """Scale a whole table; every object gets exactly one feature per block."""
    spec_names = [s.name for s in spec.scales]
    if spec_names != list(mv.attribute_names):
        raise ScalingError("scaling spec does not cover the table's attributes")
    names, groups = feature_layout(spec)
    pairs = []
    for i, row in enumerate(mv.cells):
        for scale, value in zip(spec.scales, row):
            start, _ = groups.block(scale.name)
            pairs.append((i, start + scale.feature_labels().index(scale.bin_of(value))))
    return new_context(mv.objects, names, pairs), groups


def scale_object(spec: ScalingSpec, raw_row: Mapping[str, object]) -> int:
    """Feature mask for one raw object; requires a value for every attribute."""
    _, groups = feature_layout(spec)
    mask = 0
    for scale in spec.scales:
        if scale.name not in raw_row:
            raise ScalingError(f"missing attribute {scale.name!r}")
        start, _ = groups.block(scale.name)
        mask |= 1 << (start + scale.feature_labels().index(scale.bin_of(raw_row[scale.name])))
    return mask

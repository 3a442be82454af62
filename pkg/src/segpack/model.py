"""Domain types for boxes, placements, packings, and a strict geometric validator.

All coordinates and sizes are exact rationals (``fractions.Fraction``).
Floats passed in are converted to their exact binary value; JSON number
literals are read with decimal semantics ("0.1" means 1/10).  The strip
occupies [0,1] x [0,1] x [0, inf): x is length, y is width, z is height.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, StructureError

Rational = Union[Fraction, int, str, float]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value: Rational) -> Fraction:
    """Coerce a size or coordinate to an exact Fraction.

    Strings accept both decimal ("0.5") and fraction ("3/5") forms.  Floats
    convert via their repr so that JSON-loaded numbers keep decimal meaning.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"boolean is not a size: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse rational from {value!r}") from exc
    if isinstance(value, float):
        return Fraction(repr(value))
    raise DomainError(f"cannot parse rational from {value!r}")


def format_fraction(value: Fraction) -> str:
    return str(value)


@dataclass(frozen=True)
class Box3:
    """An item with length (x), width (y), height (z), all in (0,1]."""

    length: Fraction
    width: Fraction
    height: Fraction
    id: int

    def __post_init__(self):
        for name in ("length", "width", "height"):
            v = getattr(self, name)
            if not isinstance(v, Fraction):
                object.__setattr__(self, name, as_fraction(v))
                v = getattr(self, name)
            if not (ZERO < v <= ONE):
                raise DomainError(f"box {self.id}: {name}={v} outside (0, 1]")

    @property
    def volume(self) -> Fraction:
        return self.length * self.width * self.height


@dataclass(frozen=True)
class Instance:
    """An ordered list of boxes to pack; ids must be unique."""

    boxes: tuple[Box3, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        ids = [b.id for b in self.boxes]
        if len(set(ids)) != len(ids):
            raise StructureError("duplicate box ids in instance")

    def __len__(self) -> int:
        return len(self.boxes)

    @property
    def square_base(self) -> bool:
        return all(b.length == b.width for b in self.boxes)

    def box(self, box_id: int) -> Box3:
        for b in self.boxes:
            if b.id == box_id:
                return b
        raise StructureError(f"unknown box id {box_id}")

    @staticmethod
    def from_sizes(sizes: Iterable[tuple[Rational, Rational, Rational]],
                   meta: dict | None = None) -> "Instance":
        boxes = tuple(
            Box3(as_fraction(l), as_fraction(w), as_fraction(h), i)
            for i, (l, w, h) in enumerate(sizes)
        )
        return Instance(boxes, meta or {})


@dataclass(frozen=True)
class Placement:
    """Min-corner position of one box inside the strip."""

    box_id: int
    x: Fraction
    y: Fraction
    z: Fraction

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = getattr(self, name)
            if not isinstance(v, Fraction):
                object.__setattr__(self, name, as_fraction(v))


@dataclass(frozen=True)
class Packing:
    """A full placement of an instance; height is the max top coordinate."""

    placements: tuple[Placement, ...]
    height: Fraction

    def __post_init__(self):
        object.__setattr__(self, "placements", tuple(self.placements))
        if not isinstance(self.height, Fraction):
            object.__setattr__(self, "height", as_fraction(self.height))

    @staticmethod
    def of(instance: Instance, placements: Sequence[Placement]) -> "Packing":
        return Packing(tuple(placements), packing_height(instance, placements))


def packing_height(instance: Instance,
                   placements: Sequence[Placement] | Packing) -> Fraction:
    """Max over placements of z + box height; 0 for an empty packing."""
    if isinstance(placements, Packing):
        placements = placements.placements
    by_id = {b.id: b for b in instance.boxes}
    top = ZERO
    for p in placements:
        try:
            h = by_id[p.box_id].height
        except KeyError:
            raise StructureError(f"placement references unknown box id {p.box_id}")
        t = p.z + h
        if t > top:
            top = t
    return top


def total_volume(instance: Instance) -> Fraction:
    """Sum of box volumes; a lower bound on strip height (base area is 1)."""
    return sum((b.volume for b in instance.boxes), ZERO)


@dataclass(frozen=True)
class Violation:
    kind: str          # "out_of_bounds" | "overlap" | "height_mismatch"
    box_ids: tuple[int, ...]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    def __bool__(self) -> bool:
        return self.ok


def _overlap_candidates(lo: np.ndarray, hi: np.ndarray, margin: float):
    """Index pairs whose float intervals overlap in all three axes.

    Converted rationals are within ~1e-13 of their float images at the
    coordinate scales in play, so a 1e-9 margin cannot miss a true overlap.
    """
    n = lo.shape[0]
    pairs = []
    block = 256
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        # each i in [i0,i1) against all j > i
        for i in range(i0, i1):
            j = np.arange(i + 1, n)
            if j.size == 0:
                continue
            ov = np.minimum(hi[i], hi[i + 1:]) - np.maximum(lo[i], lo[i + 1:])
            mask = (ov > -margin).all(axis=1)
            for jj in j[mask]:
                pairs.append((i, int(jj)))
    return pairs


def validate_packing(instance: Instance, packing: Packing,
                     tol: Fraction | None = None) -> ValidationReport:
    """Check a packing against the instance.

    Structural problems (unknown, duplicate, or missing box ids) raise
    StructureError.  Geometric problems are returned in the report: every
    out-of-bounds placement and every pair of boxes whose open interiors
    intersect.  With tol=None comparisons are exact; passing a positive tol
    forgives violations up to that amount (for data that came from floats).
    """
    by_id = {b.id: b for b in instance.boxes}
    seen: set[int] = set()
    for p in packing.placements:
        if p.box_id not in by_id:
            raise StructureError(f"placement references unknown box id {p.box_id}")
        if p.box_id in seen:
            raise StructureError(f"box id {p.box_id} placed more than once")
        seen.add(p.box_id)
    missing = set(by_id) - seen
    if missing:
        raise StructureError(f"boxes never placed: {sorted(missing)}")

    slack = Fraction(0) if tol is None else as_fraction(tol)
    violations: list[Violation] = []

    placements = sorted(packing.placements, key=lambda p: p.box_id)
    for p in placements:
        b = by_id[p.box_id]
        if p.x < -slack or p.y < -slack or p.z < -slack \
                or p.x + b.length > ONE + slack or p.y + b.width > ONE + slack:
            violations.append(Violation(
                "out_of_bounds", (p.box_id,),
                f"box {p.box_id} at ({p.x},{p.y},{p.z}) leaves the strip "
                f"(x+l={p.x + b.length}, y+w={p.y + b.width})"))

    n = len(placements)
    if n > 1:
        lo = np.empty((n, 3))
        hi = np.empty((n, 3))
        for i, p in enumerate(placements):
            b = by_id[p.box_id]
            lo[i] = (float(p.x), float(p.y), float(p.z))
            hi[i] = (float(p.x + b.length), float(p.y + b.width),
                     float(p.z + b.height))
        for i, j in _overlap_candidates(lo, hi, max(1e-9, float(slack))):
            pi, pj = placements[i], placements[j]
            bi, bj = by_id[pi.box_id], by_id[pj.box_id]
            ox = min(pi.x + bi.length, pj.x + bj.length) - max(pi.x, pj.x)
            oy = min(pi.y + bi.width, pj.y + bj.width) - max(pi.y, pj.y)
            oz = min(pi.z + bi.height, pj.z + bj.height) - max(pi.z, pj.z)
            if ox > slack and oy > slack and oz > slack:
                violations.append(Violation(
                    "overlap", (pi.box_id, pj.box_id),
                    f"boxes {pi.box_id} and {pj.box_id} overlap by "
                    f"({ox},{oy},{oz})"))

    actual = packing_height(instance, packing)
    if abs(actual - packing.height) > slack:
        violations.append(Violation(
            "height_mismatch", (),
            f"stored height {packing.height} != max top {actual}"))

    return ValidationReport(not violations, tuple(violations))


# ---------------------------------------------------------------------------
# JSON formats
#
# Instance:  {"boxes": [{"l": "3/5", "w": "0.5", "h": "0.25"}, ...],
#             "meta": {...}}                       (meta optional)
# Packing:   {"height": "5/2",
#             "placements": [{"id": 0, "x": "0", "y": "0", "z": "0"}, ...]}
# Values are written as exact fraction strings and accepted as strings or
# numbers on input.
# ---------------------------------------------------------------------------

def instance_to_json(instance: Instance) -> str:
    doc = {"boxes": [{"l": format_fraction(b.length),
                      "w": format_fraction(b.width),
                      "h": format_fraction(b.height)}
                     for b in instance.boxes]}
    if instance.meta:
        doc["meta"] = instance.meta
    return json.dumps(doc, indent=2)


def instance_from_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
        boxes = doc["boxes"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise StructureError(f"malformed instance JSON: {exc}") from exc
    sizes = []
    for entry in boxes:
        try:
            sizes.append((entry["l"], entry["w"], entry["h"]))
        except (KeyError, TypeError) as exc:
            raise StructureError(f"malformed box entry {entry!r}") from exc
    return Instance.from_sizes(sizes, doc.get("meta") or {})


def packing_to_json(packing: Packing) -> str:
    return json.dumps({
        "height": format_fraction(packing.height),
        "placements": [{"id": p.box_id,
                        "x": format_fraction(p.x),
                        "y": format_fraction(p.y),
                        "z": format_fraction(p.z)}
                       for p in packing.placements],
    }, indent=2)


def packing_from_json(text: str) -> Packing:
    try:
        doc = json.loads(text)
        placements = tuple(
            Placement(int(e["id"]), as_fraction(e["x"]),
                      as_fraction(e["y"]), as_fraction(e["z"]))
            for e in doc["placements"])
        return Packing(placements, as_fraction(doc["height"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"malformed packing JSON: {exc}") from exc

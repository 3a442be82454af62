"""Exact solvers at desk scale.

Optimal 3D strip packing for tiny instances and exact square-in-unit-square
feasibility, both by branch and bound over normal positions (candidate
coordinates are subset sums of item extents; some optimal packing always
exists on that grid, since boxes can be pushed down/left/back until each
coordinate is a sum of other boxes' extents).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceededError
from .model import Box3, Instance, Packing, Placement, total_volume

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int = 2_000_000
    max_boxes: int = 5
    max_squares: int = 12


def _subset_sums(values: list[Fraction], cap: Fraction) -> list[Fraction]:
    sums = {ZERO}
    for v in values:
        sums |= {s + v for s in sums if s + v <= cap}
    return sorted(sums)


class _NodeCounter:
    __slots__ = ("nodes", "limit")

    def __init__(self, limit: int):
        self.nodes = 0
        self.limit = limit

    def tick(self):
        self.nodes += 1
        if self.nodes > self.limit:
            raise BudgetExceededError(
                f"search budget exceeded after {self.nodes} nodes",
                nodes=self.nodes)


def _boxes_overlap(p1, b1: Box3, p2, b2: Box3) -> bool:
    x1, y1, z1 = p1
    x2, y2, z2 = p2
    return (min(x1 + b1.length, x2 + b2.length) > max(x1, x2)
            and min(y1 + b1.width, y2 + b2.width) > max(y1, y2)
            and min(z1 + b1.height, z2 + b2.height) > max(z1, z2))


def _fits_in_strip(boxes: list[Box3], H: Fraction,
                   counter: _NodeCounter) -> list[tuple] | None:
    """DFS over normal positions; returns positions aligned to `boxes`."""
    n = len(boxes)
    xs_all = _subset_sums([b.length for b in boxes], ONE)
    ys_all = _subset_sums([b.width for b in boxes], ONE)
    zs_all = _subset_sums([b.height for b in boxes], H)
    positions: list[tuple] = [None] * n

    def dfs(i: int) -> bool:
        if i == n:
            return True
        b = boxes[i]
        same_as_prev = (i > 0 and boxes[i - 1].length == b.length
                        and boxes[i - 1].width == b.width
                        and boxes[i - 1].height == b.height)
        floor_pos = positions[i - 1] if same_as_prev else None
        for z in zs_all:
            if z + b.height > H:
                continue
            for y in ys_all:
                if y + b.width > ONE:
                    continue
                for x in xs_all:
                    if x + b.length > ONE:
                        continue
                    cand = (x, y, z)
                    # identical boxes placed in nondecreasing (z, y, x) order
                    if floor_pos is not None and (z, y, x) < (
                            floor_pos[2], floor_pos[1], floor_pos[0]):
                        continue
                    counter.tick()
                    if any(_boxes_overlap(cand, b, positions[j], boxes[j])
                           for j in range(i)):
                        continue
                    positions[i] = cand
                    if dfs(i + 1):
                        return True
                    positions[i] = None
        return False

    return list(positions) if dfs(0) else None


def exact_strip_opt(instance: Instance,
                    budget: SearchBudget | None = None) -> tuple[Fraction, Packing]:
    """Exact minimum strip height with an attaining witness packing."""
    budget = budget or SearchBudget()
    boxes = list(instance.boxes)
    if len(boxes) > budget.max_boxes:
        raise BudgetExceededError(
            f"exact strip oracle limited to {budget.max_boxes} boxes, "
            f"got {len(boxes)}")
    if not boxes:
        return ZERO, Packing((), ZERO)
    order = sorted(boxes, key=lambda b: (-b.volume, b.id))
    counter = _NodeCounter(budget.max_nodes)

    floor_h = max(max(b.height for b in boxes), total_volume(instance))
    candidates = [h for h in _subset_sums([b.height for b in boxes],
                                          sum((b.height for b in boxes), ZERO))
                  if h >= floor_h]
    # binary search the smallest feasible candidate height
    lo, hi = 0, len(candidates) - 1
    best_positions = None
    while lo <= hi:
        mid = (lo + hi) // 2
        pos = _fits_in_strip(order, candidates[mid], counter)
        if pos is not None:
            best_positions = (candidates[mid], pos)
            hi = mid - 1
        else:
            lo = mid + 1
    if best_positions is None:
        raise BudgetExceededError("no feasible height found (cannot happen "
                                  "for valid boxes)")
    opt, pos = best_positions
    placements = tuple(Placement(b.id, x, y, z)
                       for b, (x, y, z) in zip(order, pos))
    return opt, Packing(placements, opt)


def _shelf_fits(sides: list[Fraction]) -> list[tuple] | None:
    """Cheap sufficiency: shelf-pack sides (desc) and accept if height <= 1."""
    order = sorted(range(len(sides)), key=lambda i: (-sides[i], i))
    pos: list[tuple] = [None] * len(sides)
    y = ZERO
    row_h = ZERO
    x = ZERO
    for i in order:
        s = sides[i]
        if x + s > ONE:
            y += row_h
            x = ZERO
            row_h = ZERO
        if y + s > ONE:
            return None
        pos[i] = (x, y)
        row_h = max(row_h, s)
        x += s
    return pos


def square_fit(sides, budget: SearchBudget | None = None
               ) -> tuple[bool, list[tuple] | None]:
    """Exact decision: do the given squares pack into the unit square?

    Returns (feasible, witness) with witness positions aligned to the input
    order.  Raises BudgetExceededError when the node budget runs out.
    """
    budget = budget or SearchBudget()
    sides = [s if isinstance(s, Fraction) else Fraction(s) for s in sides]
    if len(sides) > budget.max_squares:
        raise BudgetExceededError(
            f"square oracle limited to {budget.max_squares} squares, "
            f"got {len(sides)}")
    if not sides:
        return True, []
    if any(s > ONE for s in sides):
        return False, None
    if sum((s * s for s in sides), ZERO) > ONE:
        return False, None
    shelf = _shelf_fits(sides)
    if shelf is not None:
        return True, shelf

    # more than one square wider than 1/2 cannot be disjoint on either axis
    if sum(1 for s in sides if s > Fraction(1, 2)) > 1:
        return False, None

    order = sorted(range(len(sides)), key=lambda i: (-sides[i], i))
    srt = [sides[i] for i in order]
    counter = _NodeCounter(budget.max_nodes)
    n = len(srt)
    placed: list[tuple] = [None] * n

    def dfs(i: int) -> bool:
        if i == n:
            return True
        s = srt[i]
        prev = placed[i - 1] if i > 0 and srt[i - 1] == s else None
        # any packing normalizes so each square rests on x = 0 or another's
        # right edge, and y = 0 or another's top edge
        xs = sorted({ZERO} | {placed[j][0] + srt[j] for j in range(i)})
        ys = sorted({ZERO} | {placed[j][1] + srt[j] for j in range(i)})
        for y in ys:
            if y + s > ONE:
                continue
            for x in xs:
                if x + s > ONE:
                    continue
                if prev is not None and (y, x) < (prev[1], prev[0]):
                    continue
                counter.tick()
                ok = True
                for j in range(i):
                    px, py = placed[j]
                    if (min(x + s, px + srt[j]) > max(x, px)
                            and min(y + s, py + srt[j]) > max(y, py)):
                        ok = False
                        break
                if ok:
                    placed[i] = (x, y)
                    if dfs(i + 1):
                        return True
                    placed[i] = None
        return False

    if dfs(0):
        witness: list[tuple] = [None] * n
        for rank, i in enumerate(order):
            witness[i] = placed[rank]
        return True, witness
    return False, None

"""Accuracy-parameterized scheme for boxes with square bases.

Pipeline: pick a width gap whose middle band has negligible volume, round
the large items to a constant number of base sizes by stacking and
threshold grouping, solve the pattern LP for the restricted problem and
realize its solution as height bands of base columns, then reuse leftover
cuboid space (column tops plus free full-depth strips of each band) for
the small items via layered shelf packing, and put whatever remains on top.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from .errors import BudgetExceededError, ContractError, DomainError
from .lp import LinearProgram, basic_support, solve_lp
from .model import (Box3, Instance, Packing, Placement, Rational, as_fraction,
                    packing_height, total_volume)
from .oracle import SearchBudget, square_fit

ZERO = Fraction(0)
ONE = Fraction(1)

MAX_ITEMS_PER_PATTERN = 36
MAX_PATTERN_VECTORS = 10 ** 6
BAND_PAD = Fraction(1, 10 ** 6)   # absorbs float error in LP band heights


@dataclass(frozen=True)
class GapGrouping:
    index: int
    delta: Fraction
    large: tuple[Box3, ...]
    medium: tuple[Box3, ...]
    small: tuple[Box3, ...]


def select_gap(instance: Instance, epsilon: Rational) -> GapGrouping:
    """Choose the smallest band index whose width band carries at most an
    epsilon fraction of the total volume; the bands are disjoint, so one of
    the first ceil(1/eps) must qualify."""
    eps = as_fraction(epsilon)
    if not (ZERO < eps <= Fraction(1, 12)):
        raise DomainError(f"epsilon {eps} outside (0, 1/12]")
    if not instance.square_base:
        raise ContractError("gap selection requires a square-base instance")
    r = ceil(ONE / eps)
    vol = total_volume(instance)
    thresholds = [eps ** (2 ** i - 1) for i in range(1, r + 2)]
    for i in range(1, r + 1):
        hi = thresholds[i - 1]
        lo = thresholds[i]
        band = [b for b in instance.boxes if lo <= b.width < hi]
        band_vol = sum((b.volume for b in band), ZERO)
        if band_vol <= eps * vol:
            large = tuple(b for b in instance.boxes if b.width >= hi)
            small = tuple(b for b in instance.boxes if b.width < lo)
            return GapGrouping(i, hi, large, tuple(band), small)
    raise ContractError("no admissible band found (cannot happen)")


@dataclass
class RestrictedClass:
    size: Fraction            # rounded base side
    height: Fraction          # cumulative height of the class's boxes
    boxes: tuple[Box3, ...]


@dataclass
class RestrictedInstance:
    """Constant number of distinct base sizes, all at least delta."""

    classes: list[RestrictedClass]
    thresholds: tuple[Box3, ...]
    delta: Fraction

    @property
    def sizes(self) -> tuple[Fraction, ...]:
        return tuple(c.size for c in self.classes)

    @property
    def heights(self) -> tuple[Fraction, ...]:
        return tuple(c.height for c in self.classes)

    @staticmethod
    def from_classes(pairs, delta, thresholds=()) -> "RestrictedInstance":
        classes = []
        for size, boxes in pairs:
            boxes = tuple(boxes)
            h = sum((b.height for b in boxes), ZERO)
            classes.append(RestrictedClass(as_fraction(size), h, boxes))
        classes.sort(key=lambda c: -c.size)
        return RestrictedInstance(classes, tuple(thresholds),
                                  as_fraction(delta))


def stack_group_round(large: list[Box3], K: int,
                      delta: Fraction) -> RestrictedInstance:
    """Stack boxes by nonincreasing base, mark the boxes hit by the K-1
    equal-height cutting planes as thresholds, and round each remaining
    group's bases up (group 1 to 1, later groups to the base of the
    threshold box below them)."""
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    order = sorted(large, key=lambda b: (-b.width, b.id))
    if not order:
        return RestrictedInstance([], (), delta)
    starts = []
    z = ZERO
    for b in order:
        starts.append(z)
        z += b.height
    H = z
    planes = [Fraction(i) * H / K for i in range(1, K)]
    threshold_ids: dict[int, Box3] = {}
    plane_base: list[Fraction] = []
    for plane in planes:
        hit = None
        for b, z0 in zip(order, starts):
            if z0 <= plane < z0 + b.height:
                hit = b
                break
        if hit is None:
            raise ContractError("cutting plane missed the stack")
        threshold_ids[hit.id] = hit
        plane_base.append(hit.width)

    group_pairs: dict[Fraction, list[Box3]] = {}
    for b, z0 in zip(order, starts):
        if b.id in threshold_ids:
            continue
        g = int(z0 * K / H)  # 0-based: strictly between planes g and g+1
        rounded = ONE if g == 0 else plane_base[g - 1]
        group_pairs.setdefault(rounded, []).append(b)
    classes = [RestrictedClass(size,
                               sum((b.height for b in boxes), ZERO),
                               tuple(boxes))
               for size, boxes in group_pairs.items()]
    classes.sort(key=lambda c: -c.size)
    thresholds = tuple(sorted(threshold_ids.values(), key=lambda b: b.id))
    return RestrictedInstance(classes, thresholds, delta)


def enumerate_patterns(sizes, budget: SearchBudget | None = None,
                       max_items: int = MAX_ITEMS_PER_PATTERN
                       ) -> list[tuple[int, ...]]:
    """All maximal count vectors of the given square sizes that fit in the
    unit square, certified by the exact oracle; dominated vectors removed.

    Refuses honestly when the smallest size would allow more than
    `max_items` squares per bin or the vector space is too large.
    """
    sizes = [as_fraction(s) for s in sizes]
    if any(not (ZERO < s <= ONE) for s in sizes):
        raise DomainError("pattern sizes must lie in (0, 1]")
    if not sizes:
        return []
    budget = budget or SearchBudget(max_squares=max_items)
    smallest = min(sizes)
    per_bin = int(ONE / smallest) ** 2
    if per_bin > max_items:
        raise BudgetExceededError(
            f"up to {per_bin} squares of side {smallest} fit one bin, over "
            f"the {max_items}-item enumeration guard")
    caps = [int(ONE / s) ** 2 for s in sizes]
    space = 1
    for u in caps:
        space *= u + 1
        if space > MAX_PATTERN_VECTORS:
            raise BudgetExceededError(
                f"pattern vector space exceeds {MAX_PATTERN_VECTORS}")

    K = len(sizes)
    feasible: list[tuple[int, ...]] = []
    cache: dict[tuple[int, ...], bool] = {}

    def fits(counts: tuple[int, ...]) -> bool:
        if counts in cache:
            return cache[counts]
        expanded = [s for s, c in zip(sizes, counts) for _ in range(c)]
        ok, _ = square_fit(expanded, budget)
        cache[counts] = ok
        return ok

    def dfs(i: int, counts: list[int], area: Fraction):
        if i == K:
            feasible.append(tuple(counts))
            return
        s2 = sizes[i] * sizes[i]
        cnt = 0
        while True:
            counts[i] = cnt
            if cnt > 0 and (cnt > caps[i] or area + cnt * s2 > ONE
                            or not fits(tuple(counts[:i + 1]) + (0,) * (K - i - 1))):
                break
            dfs(i + 1, counts, area + cnt * s2)
            cnt += 1
        counts[i] = 0

    dfs(0, [0] * K, ZERO)
    feasible = [v for v in feasible if any(v)]
    maximal = []
    for v in feasible:
        if not any(u != v and all(a >= b for a, b in zip(u, v))
                   for u in feasible):
            maximal.append(v)
    maximal.sort(reverse=True)
    return maximal


def _pattern_lp(sizes, heights, budget=None):
    patterns = enumerate_patterns(sizes, budget=budget)
    if not patterns:
        raise ContractError("no patterns for a nonempty restricted instance")
    A = np.array(patterns, dtype=float).T
    b = np.array([float(h) for h in heights])
    sol = solve_lp(LinearProgram(np.ones(len(patterns)), A, b))
    if sol.status != "optimal":
        raise ContractError(f"restricted pattern LP came back {sol.status}")
    return patterns, sol


def restricted_lp_value(sizes, heights, budget=None) -> float:
    """LP height lower bound for a restricted profile (sizes desc, heights)."""
    keep = [(s, h) for s, h in zip(sizes, heights) if h > 0 and s > 0]
    if not keep:
        return 0.0
    _, sol = _pattern_lp([s for s, _ in keep], [h for _, h in keep],
                         budget=budget)
    return sol.objective


def stack_sandwich_profiles(large: list[Box3], K: int):
    """Two bracketing restricted profiles derived from the base-sorted stack.

    The stack is sliced into K groups of cumulative height exactly H/K
    (boxes straddling a plane are cut).  The upper profile rounds each
    group's bases up to the group maximum (group 1 up to 1); the lower
    profile rounds down to the next group's maximum (last group drops to 0).
    Returns (lower_profile, upper_profile, H) with profiles as
    [(size, height)] lists; the two LP values bracket the original's and
    differ by at most H/K.
    """
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    order = sorted(large, key=lambda b: (-b.width, b.id))
    H = sum((b.height for b in order), ZERO)
    if H == 0:
        return [], [], ZERO
    step = H / K
    # group g (0-based) covers stack heights [g*step, (g+1)*step)
    groups: list[list[tuple[Fraction, Fraction]]] = [[] for _ in range(K)]
    z = ZERO
    for b in order:
        lo = z
        hi = z + b.height
        z = hi
        g = int(lo / step)
        while lo < hi:
            cut = min(hi, (g + 1) * step)
            groups[g].append((b.width, cut - lo))
            lo = cut
            g += 1
    sup: list[tuple[Fraction, Fraction]] = []
    inf: list[tuple[Fraction, Fraction]] = []
    maxima = [max((s for s, _ in grp), default=ZERO) for grp in groups]
    for g, grp in enumerate(groups):
        h = sum((hh for _, hh in grp), ZERO)
        if h == 0:
            continue
        sup_size = ONE if g == 0 else maxima[g]
        sup.append((sup_size, h))
        inf_size = maxima[g + 1] if g + 1 < K else ZERO
        if inf_size > 0:
            inf.append((inf_size, h))
    return _merge_profile(inf), _merge_profile(sup), H


def _merge_profile(pairs):
    merged: dict[Fraction, Fraction] = {}
    for s, h in pairs:
        merged[s] = merged.get(s, ZERO) + h
    return sorted(merged.items(), key=lambda t: -t[0])


@dataclass
class Column:
    x: Fraction
    y: Fraction
    side: Fraction
    fill: Fraction     # occupied height from the band floor


@dataclass
class Band:
    z0: Fraction
    z1: Fraction
    columns: list[Column]


@dataclass
class RestrictedSolution:
    placements: list[Placement]
    lin: float
    bands: list[Band]
    patterns: list[tuple[int, ...]]
    support: list[int]
    height: Fraction


def solve_restricted(ri: RestrictedInstance,
                     budget: SearchBudget | None = None) -> RestrictedSolution:
    """Solve the pattern LP and realize its vertex solution as height bands.

    Each supported pattern becomes a band of height x*+1; the pattern's
    witness placement provides the base columns, which are filled greedily
    with that class's boxes.  Threshold boxes get one unit-height band each.
    """
    if not ri.classes and not ri.thresholds:
        return RestrictedSolution([], 0.0, [], [], [], ZERO)
    budget = budget or SearchBudget(max_squares=MAX_ITEMS_PER_PATTERN)
    placements: list[Placement] = []
    bands: list[Band] = []
    z = ZERO
    lin = 0.0
    patterns: list[tuple[int, ...]] = []
    support: list[int] = []
    if ri.classes:
        patterns, sol = _pattern_lp(ri.sizes, ri.heights, budget=budget)
        lin = sol.objective
        support = basic_support(sol)
        if len(support) > len(ri.classes):
            raise ContractError(
                f"vertex support {len(support)} exceeds class count")
        queues = [list(c.boxes) for c in ri.classes]
        for pi in support:
            counts = patterns[pi]
            x_rat = Fraction(float(sol.primal[pi])) + BAND_PAD
            band_h = x_rat + 1
            expanded = [s for s, c in zip(ri.sizes, counts) for _ in range(c)]
            ok, witness = square_fit(expanded, budget)
            if not ok:
                raise ContractError("supported pattern lost feasibility")
            band = Band(z, z + band_h, [])
            slot = 0
            for j, cnt in enumerate(counts):
                for _ in range(cnt):
                    wx, wy = witness[slot]
                    slot += 1
                    fill = ZERO
                    while queues[j] and fill + queues[j][0].height <= band_h:
                        box = queues[j].pop(0)
                        placements.append(Placement(box.id, wx, wy, z + fill))
                        fill += box.height
                    band.columns.append(Column(wx, wy, ri.sizes[j], fill))
            bands.append(band)
            z += band_h
        if any(queues):
            raise ContractError("band columns ran out before the boxes did")
    for box in ri.thresholds:
        band = Band(z, z + 1, [])
        placements.append(Placement(box.id, ZERO, ZERO, z))
        band.columns.append(Column(ZERO, ZERO, box.width, box.height))
        bands.append(band)
        z += 1
    return RestrictedSolution(placements, lin, bands, patterns, support, z)


@dataclass
class PackLargeResult:
    placements: list[Placement]
    lin: float
    K: int
    delta_eff: Fraction
    bands: list[Band]
    restricted: RestrictedInstance
    height: Fraction


def pack_large(large: list[Box3], epsilon: Rational, delta: Rational,
               budget: SearchBudget | None = None) -> PackLargeResult:
    """Round the large items to K = ceil(1/(eps*delta^2)) sizes and pack via
    the restricted solver.  delta is raised to the actual smallest base in
    the input when that is larger, which only shrinks K."""
    eps = as_fraction(epsilon)
    delta = as_fraction(delta)
    if not large:
        return PackLargeResult([], 0.0, 0, delta, [],
                               RestrictedInstance([], (), delta), ZERO)
    min_base = min(b.width for b in large)
    if min_base < delta:
        raise ContractError(f"large item base {min_base} below delta {delta}")
    delta_eff = max(delta, min_base)
    K = ceil(ONE / (eps * delta_eff * delta_eff))
    ri = stack_group_round(large, K, delta_eff)
    sol = solve_restricted(ri, budget=budget)
    return PackLargeResult(sol.placements, sol.lin, K, delta_eff, sol.bands,
                           ri, sol.height)


def _rows_fit(bases: list[tuple[Fraction, Fraction]], a: Fraction,
              b: Fraction) -> list[tuple[Fraction, Fraction]] | None:
    """2D shelf check for (length, width) bases sorted by width desc inside
    an a-by-b rectangle; returns local (x, y) positions or None."""
    pos: list[tuple[Fraction, Fraction]] = []
    y = ZERO
    row_depth = ZERO
    x = ZERO
    for l, w in bases:
        if x + l > a:
            y += row_depth
            x = ZERO
            row_depth = w
        if not pos:
            row_depth = w
        if y + w > b or x + l > a:
            return None
        pos.append((x, y))
        x += l
    return pos


def mnfdh_pack(items: list[Box3], region: tuple, origin: tuple = (ZERO, ZERO, ZERO)
               ) -> tuple[list[Placement], list[Box3]]:
    """Layered shelf packing of small-base boxes into a cuboid region.

    Sorts by nonincreasing height; a layer accepts a box while the 2D shelf
    packing of the layer's bases (widths desc, rows along y, next fit on x)
    still fits the region base; layers stack until the next would overrun
    the region height.  Returns the placements and the unpacked leftovers.
    When leftovers exist, the packed volume is checked against
    (a - delta) * (b - delta) * (c - 1) with delta the largest base side.
    """
    a, b, c_r = (as_fraction(region[0]), as_fraction(region[1]),
                 None if region[2] is None else as_fraction(region[2]))
    x0, y0, z0 = (as_fraction(origin[0]), as_fraction(origin[1]),
                  as_fraction(origin[2]))
    if not items:
        return [], []
    delta = max(max(bx.length, bx.width) for bx in items)
    if delta > min(a, b):
        raise DomainError(
            f"region base {a} x {b} is smaller than the largest item base "
            f"{delta}")
    order = sorted(items, key=lambda bx: (-bx.height, bx.id))
    placements: list[Placement] = []
    leftovers: list[Box3] = []
    z = ZERO
    layer: list[Box3] = []
    layer_h = ZERO

    def flush_layer():
        srt = sorted(layer, key=lambda bx: (-bx.width, bx.id))
        pos = _rows_fit([(bx.length, bx.width) for bx in srt], a, b)
        if pos is None:
            raise ContractError("accepted layer failed its shelf re-check")
        for bx, (lx, ly) in zip(srt, pos):
            placements.append(Placement(bx.id, x0 + lx, y0 + ly, z0 + z))

    idx = 0
    while idx < len(order):
        box = order[idx]
        if not layer:
            if c_r is not None and z + box.height > c_r:
                leftovers = order[idx:]
                break
            layer = [box]
            layer_h = box.height
            idx += 1
            continue
        trial = sorted(layer + [box], key=lambda bx: (-bx.width, bx.id))
        if _rows_fit([(bx.length, bx.width) for bx in trial], a, b) is not None:
            layer.append(box)
            idx += 1
        else:
            flush_layer()
            z += layer_h
            layer = []
    if layer:
        flush_layer()
        z += layer_h
        layer = []

    if leftovers and c_r is not None:
        packed = sum((bx.volume for bx in order[:idx]), ZERO)
        bound = (a - delta) * (b - delta) * (c_r - 1)
        if bound > 0 and packed < bound:
            raise ContractError(
                f"packed volume {packed} below guarantee {bound}")
    return placements, leftovers


def harvest_regions(bands: list[Band]) -> list[tuple]:
    """Cuboid regions of unused space: each column's top slab plus the free
    full-depth strips of each band found by a sweep along x.

    Returns (a, b, c, origin) tuples, deterministic order.
    """
    regions: list[tuple] = []
    for band in sorted(bands, key=lambda bd: bd.z0):
        band_h = band.z1 - band.z0
        for col in sorted(band.columns, key=lambda cc: (cc.x, cc.y)):
            top = band_h - col.fill
            if top > 0:
                regions.append((col.side, col.side, top,
                                (col.x, col.y, band.z0 + col.fill)))
        intervals = sorted((col.x, col.x + col.side) for col in band.columns)
        cursor = ZERO
        for lo, hi in intervals:
            if lo > cursor:
                regions.append((lo - cursor, ONE, band_h,
                                (cursor, ZERO, band.z0)))
            cursor = max(cursor, hi)
        if cursor < ONE:
            regions.append((ONE - cursor, ONE, band_h,
                            (cursor, ZERO, band.z0)))
    return regions


@dataclass
class AptasResult:
    packing: Packing
    report: dict
    gap: GapGrouping
    large: PackLargeResult
    small_leftover: tuple[Box3, ...]


def run_square_aptas(instance: Instance, epsilon: Rational,
                     budget: SearchBudget | None = None) -> AptasResult:
    """Full square-base pipeline; see the module docstring for the steps."""
    eps = as_fraction(epsilon)
    gap = select_gap(instance, eps)
    large = pack_large(list(gap.large), eps, gap.delta, budget=budget)
    placements = list(large.placements)

    remaining = sorted(gap.small, key=lambda bx: (-bx.height, bx.id))
    for a, b, c_r, origin in harvest_regions(large.bands):
        if not remaining:
            break
        limit = min(a, b)
        eligible = [bx for bx in remaining
                    if max(bx.length, bx.width) <= limit]
        if not eligible:
            continue
        placed, leftover = mnfdh_pack(eligible, (a, b, c_r), origin)
        placements.extend(placed)
        leftover_ids = {bx.id for bx in leftover}
        remaining = [bx for bx in remaining
                     if bx.id in leftover_ids
                     or max(bx.length, bx.width) > limit]
    s_prime = tuple(remaining)

    top_items = list(gap.medium) + list(s_prime)
    top_start = large.height
    if top_items:
        placed, leftover = mnfdh_pack(top_items, (ONE, ONE, None),
                                      (ZERO, ZERO, top_start))
        if leftover:
            raise ContractError("unbounded top region refused boxes")
        placements.extend(placed)

    packing = Packing.of(instance, placements)
    vol = total_volume(instance)
    report = {
        "branch": "case1" if s_prime else "case2",
        "K": large.K,
        "delta": str(large.delta_eff),
        "i": gap.index,
        "height": float(packing.height),
        "lb_volume": float(vol),
        "lin": large.lin,
        "large_height": float(large.height),
        "small_unplaced_in_gaps": len(s_prime),
        "region_partition": "column-tops+x-sweep-strips",
        "epsilon": str(eps),
    }
    return AptasResult(packing, report, gap, large, s_prime)

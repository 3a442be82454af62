"""The segment strip-packing algorithm and its certificate.

Boxes are grouped by length into harmonic classes, each class is packed
into fixed-height segments (slips for wide classes, shelf levels for the
narrowest class), segment widths are bin-packed one-dimensionally, and
each 1D bin becomes a horizontal layer of the strip.  The certificate
evaluates the weighted-volume accounting of the construction on the
actual run: the per-segment inequality, the aggregate slack, and the
resulting lower bound on the optimal height.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import binpack
from .errors import ContractError, DomainError
from .harmonic import (DualFeasibleFn, T_k, make_g, modified_volume, step_fn,
                       total_modified_volume)
from .model import (Box3, Instance, Packing, Placement, Rational, as_fraction)

ZERO = Fraction(0)
ONE = Fraction(1)

# parametric asymptotic ratios by upper bound on the bounded side
PARAMETRIC_ROWS = (
    (Fraction(1, 2), ONE, 1.691),
    (Fraction(1, 3), Fraction(1, 2), 1.423),
    (Fraction(1, 4), Fraction(1, 3), 1.302),
    (Fraction(1, 5), Fraction(1, 4), 1.234),
)


@dataclass(frozen=True)
class SspConfig:
    k: int = 12
    c: Fraction = Fraction(16)
    epsilon: Fraction = Fraction(1, 10)
    backend: str = "ffd"

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        if self.k < 2:
            raise DomainError(f"k must be >= 2, got {self.k}")
        if self.c <= 1:
            raise DomainError(f"segment height c must exceed 1, got {self.c}")
        if not (ZERO < self.epsilon <= Fraction(1, 2)):
            raise DomainError(f"epsilon {self.epsilon} outside (0, 1/2]")
        if self.backend not in ("ffd", "aptas"):
            raise DomainError(f"backend must be ffd or aptas, got {self.backend!r}")

    def to_json_dict(self) -> dict:
        return {"k": self.k, "c": str(self.c), "epsilon": str(self.epsilon),
                "backend": self.backend}


@dataclass
class Level:
    height: Fraction
    used_length: Fraction
    boxes: list[Box3]


@dataclass
class Segment:
    """A 1 x width x c container holding one class's boxes."""

    qtype: int
    width: Fraction
    height: Fraction
    slips: list[list[Box3]] | None = None   # classes below k
    levels: list[Level] | None = None       # class k
    layer: int | None = None                # set during realization
    y_offset: Fraction | None = None

    @property
    def boxes(self) -> list[Box3]:
        if self.slips is not None:
            return [b for slip in self.slips for b in slip]
        return [b for lv in self.levels for b in lv.boxes]


def group_by_length(instance: Instance, k: int) -> list[list[Box3]]:
    """Partition boxes into k classes by length; class i < k holds lengths in
    (1/(i+1), 1/i], class k holds lengths <= 1/k.  Each class comes back
    sorted by nonincreasing width, ties by id."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    groups: list[list[Box3]] = [[] for _ in range(k)]
    for b in instance.boxes:
        t = (ONE / b.length).__floor__()
        groups[min(t, k) - 1].append(b)
    for g in groups:
        g.sort(key=lambda b: (-b.width, b.id))
    return groups


def gnf_pack(group: list[Box3], q: int, c: Rational) -> list[Segment]:
    """Pack one class (width-sorted) into segments of q slips by Next Fit on
    heights.  A segment's width is the width of its first (widest) box; a
    new segment opens only when the q-th slip overflows."""
    c = as_fraction(c)
    lo, hi = Fraction(1, q + 1), Fraction(1, q)
    for b in group:
        if not (lo < b.length <= hi):
            raise ContractError(
                f"box {b.id} length {b.length} outside ({lo}, {hi}]")
    segments: list[Segment] = []
    i = 0
    n = len(group)
    while i < n:
        slips: list[list[Box3]] = [[]]
        heights = [ZERO]
        seg = Segment(q, group[i].width, c, slips=slips)
        while i < n:
            b = group[i]
            if heights[-1] + b.height <= c:
                slips[-1].append(b)
                heights[-1] += b.height
            elif len(slips) < q:
                slips.append([b])
                heights.append(b.height)
            else:
                break
            i += 1
        segments.append(seg)
    return segments


def _nfdh_levels(boxes: list[Box3]) -> list[Level]:
    """Shelf levels for a height-sorted list; levels close on length overflow."""
    levels: list[Level] = []
    for b in boxes:
        if levels and levels[-1].used_length + b.length <= ONE:
            levels[-1].boxes.append(b)
            levels[-1].used_length += b.length
        else:
            levels.append(Level(b.height, b.length, [b]))
    return levels


def _nfdh_fits(prefix: list[Box3], c: Fraction) -> tuple[bool, list[Level]]:
    srt = sorted(prefix, key=lambda b: (-b.height, b.id))
    levels = _nfdh_levels(srt)
    total = sum((lv.height for lv in levels), ZERO)
    return total <= c, levels


def gnfdh_pack(group: list[Box3], k: int, c: Rational) -> list[Segment]:
    """Pack the narrowest class into segments by shelf levels.

    Per segment, the largest prefix of the remaining (width-sorted) boxes
    that fits within height c when shelf-packed by nonincreasing height is
    taken: fits(j) holds and fits(j+1) fails at the cut.
    """
    c = as_fraction(c)
    cap = Fraction(1, k)
    for b in group:
        if b.length > cap:
            raise ContractError(f"box {b.id} length {b.length} exceeds 1/{k}")
    segments: list[Segment] = []
    pos = 0
    n = len(group)
    while pos < n:
        remaining = group[pos:]
        # exponential probe then bisection; fits(1) always holds (h <= 1 < c)
        lo = 1
        ok, lo_levels = _nfdh_fits(remaining[:1], c)
        if not ok:
            raise ContractError("single box must fit a fresh segment")
        hi = None
        probe = 2
        while probe <= len(remaining):
            ok, levels = _nfdh_fits(remaining[:probe], c)
            if ok:
                lo, lo_levels = probe, levels
                probe *= 2
            else:
                hi = probe
                break
        if hi is None and lo < len(remaining):
            ok, levels = _nfdh_fits(remaining, c)
            if ok:
                lo, lo_levels = len(remaining), levels
            else:
                hi = len(remaining)
        while hi is not None and hi - lo > 1:
            mid = (lo + hi) // 2
            ok, levels = _nfdh_fits(remaining[:mid], c)
            if ok:
                lo, lo_levels = mid, levels
            else:
                hi = mid
        segments.append(Segment(k, remaining[0].width, c, levels=lo_levels))
        pos += lo
    return segments


def realize_layers(segments: list[Segment], bins: list[list[int]],
                   c: Rational) -> list[Placement]:
    """Turn 1D bins of segments into strip layers of height c each.

    Bin b becomes the layer z in [b*c, (b+1)*c); its segments sit at
    consecutive y offsets; slips sit at x = j/q and stack boxes upward,
    levels stack upward with boxes at consecutive x offsets.
    """
    c = as_fraction(c)
    placements: list[Placement] = []
    for layer, content in enumerate(bins):
        z0 = layer * c
        y = ZERO
        for si in content:
            seg = segments[si]
            seg.layer = layer
            seg.y_offset = y
            if seg.slips is not None:
                q = seg.qtype
                for j, slip in enumerate(seg.slips):
                    x = Fraction(j, q)
                    z = z0
                    for b in slip:
                        placements.append(Placement(b.id, x, y, z))
                        z += b.height
            else:
                z = z0
                for lv in seg.levels:
                    x = ZERO
                    for b in lv.boxes:
                        placements.append(Placement(b.id, x, y, z))
                        x += b.length
                    z += lv.height
            y += seg.width
        if y > ONE:
            raise ContractError(f"layer {layer} width overflow: {y} > 1")
    return placements


@dataclass
class SegmentCheck:
    """One per-segment certificate inequality, evaluated on the run."""

    qtype: int
    index: int
    weighted_volume: Fraction
    bound: Fraction

    @property
    def slack(self) -> Fraction:
        return self.weighted_volume - self.bound


@dataclass
class Certificate:
    height: Fraction                  # nominal cost: c * layers used
    packing_height: Fraction          # exact max top coordinate (<= height)
    lb_volume: Fraction
    lb_modified: Fraction
    total_weight: Fraction            # W(L)
    group_weights: list[Fraction]     # G^q per class
    fbp_objective: float
    slack: Fraction                   # W - ((c-1) * sum G - c * k)
    config: SspConfig
    segment_counts: list[int]
    bins_used: int
    parametric: dict | None = None

    @property
    def lower_bound(self) -> Fraction:
        return max(self.lb_volume, self.lb_modified)

    def to_json_dict(self) -> dict:
        doc = {
            "height": float(self.height),
            "packing_height": float(self.packing_height),
            "lb_volume": float(self.lb_volume),
            "lb_modified": float(self.lb_modified),
            "W": float(self.total_weight),
            "G": [float(g) for g in self.group_weights],
            "fbp": self.fbp_objective,
            "lemma6_slack": float(self.slack),
            "config": self.config.to_json_dict(),
            "segment_counts": self.segment_counts,
            "bins_used": self.bins_used,
        }
        if self.parametric is not None:
            doc["parametric"] = self.parametric
        return doc


@dataclass
class SspResult:
    packing: Packing
    certificate: Certificate
    segments: list[Segment]
    segments_by_type: list[list[Segment]]
    g: DualFeasibleFn
    fbp: binpack.FbpSolution | None
    bins: list[list[int]]
    segment_checks: list[SegmentCheck]


def _parametric_row(instance: Instance) -> dict | None:
    if not instance.boxes:
        return None
    max_w = max(b.width for b in instance.boxes)
    max_l = max(b.length for b in instance.boxes)
    alpha = min(max_w, max_l)
    for lo, hi, ratio in PARAMETRIC_ROWS:
        if lo < alpha <= hi:
            return {"alpha": float(alpha), "bucket": f"({lo}, {hi}]",
                    "asymptotic_ratio": ratio}
    return None


def run_3ssp(instance: Instance, config: SspConfig | None = None) -> SspResult:
    """Full pipeline: group, pack segments, 1D-pack widths, realize layers,
    and evaluate the certificate arithmetic on the run."""
    config = config or SspConfig()
    k, c = config.k, config.c

    groups = group_by_length(instance, k)
    segments_by_type: list[list[Segment]] = []
    for q in range(1, k):
        segments_by_type.append(gnf_pack(groups[q - 1], q, c))
    segments_by_type.append(gnfdh_pack(groups[k - 1], k, c))
    segments = [s for per_type in segments_by_type for s in per_type]

    if segments:
        widths = [s.width for s in segments]
        profile = binpack.SizeProfile.from_sizes(widths)
        fbp = binpack.solve_fbp(profile)
        g = make_g(fbp.dual)
        if config.backend == "ffd":
            bins = binpack.first_fit_decreasing(widths)
        else:
            bins = binpack.aptas_bp(widths, config.epsilon)
        placements = realize_layers(segments, bins, c)
        fbp_obj = fbp.objective
    else:
        fbp = None
        g = step_fn((), ())
        bins = []
        placements = []
        fbp_obj = 0.0

    height = c * len(bins)          # nominal cost: every layer counts in full
    packing = Packing.of(instance, placements)

    W = total_modified_volume(instance.boxes, k, g)
    group_weights = [sum((g(s.width) for s in per_type), ZERO)
                     for per_type in segments_by_type]
    sum_g = sum(group_weights, ZERO)
    slack = W - ((c - 1) * sum_g - c * k)
    if slack <= 0:
        raise ContractError(f"certificate slack {slack} must be positive")

    checks: list[SegmentCheck] = []
    for q, per_type in enumerate(segments_by_type, start=1):
        for i, seg in enumerate(per_type):
            nxt = per_type[i + 1].width if i + 1 < len(per_type) else None
            bound = (c - 1) * g(nxt) if nxt is not None else ZERO
            wv = total_modified_volume(seg.boxes, k, g)
            checks.append(SegmentCheck(q, i, wv, bound))
            if wv < bound:
                raise ContractError(
                    f"segment (type {q}, index {i}) weighted volume {wv} "
                    f"below bound {bound}")

    if fbp is not None:
        dual_obj = float(fbp.dual.objective(fbp.profile.counts))
        if abs(dual_obj - fbp_obj) > 1e-6 * (1.0 + abs(fbp_obj)):
            raise ContractError(
                f"dual objective {dual_obj} drifted from LP value {fbp_obj}")

    lb_modified = W / T_k(k)
    cert = Certificate(
        height=height,
        packing_height=packing.height,
        lb_volume=sum((b.volume for b in instance.boxes), ZERO),
        lb_modified=lb_modified,
        total_weight=W,
        group_weights=group_weights,
        fbp_objective=fbp_obj,
        slack=slack,
        config=config,
        segment_counts=[len(t) for t in segments_by_type],
        bins_used=len(bins),
        parametric=_parametric_row(instance),
    )
    if lb_modified > packing.height:
        raise ContractError(
            f"lower bound {lb_modified} exceeds achieved height "
            f"{packing.height}")
    return SspResult(packing, cert, segments, segments_by_type, g, fbp, bins,
                     checks)

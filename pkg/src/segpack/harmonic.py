"""Harmonic size classes, the weighting function and its constants, and
dual-feasible step functions built from bin-packing dual prices.

A dual-feasible function f satisfies sum f(x_i) <= 1 for every finite set
with sum x_i <= 1.  Three kinds are provided: the identity, the scaled
harmonic weight, and the right-open step function induced by ordered dual
prices.  The product of two dual-feasible functions bounds weighted sums
over any set of rectangles that fits in the unit square, which is what the
certificate arithmetic rests on.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ContractError, DomainError
from .model import Rational, as_fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def t_sequence(count: int) -> list[int]:
    """First `count` terms of t_1=1, t_{i+1} = t_i(t_i+1): 1, 2, 6, 42, 1806, ..."""
    seq = []
    t = 1
    for _ in range(count):
        seq.append(t)
        t = t * (t + 1)
    return seq


def m_of_k(k: int) -> int:
    """The index m with t_m < k <= t_{m+1}."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    m = 0
    t = 1
    while t < k:
        m += 1
        t = t * (t + 1)
    return m


@dataclass(frozen=True)
class HarmonicParams:
    k: int
    m_k: int

    @staticmethod
    def for_k(k: int) -> "HarmonicParams":
        return HarmonicParams(k, m_of_k(k))


def harmonic_type(x: Rational, k: int) -> int:
    """Type index t in 1..k: t < k iff 1/(t+1) < x <= 1/t; type k iff x <= 1/k."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    x = as_fraction(x)
    if not (ZERO < x <= ONE):
        raise DomainError(f"size {x} outside (0, 1]")
    # 1/(t+1) < x <= 1/t  <=>  t <= 1/x < t+1  <=>  t = floor(1/x)
    t = (ONE / x).__floor__()
    return t if t < k else k


def f_k(x: Rational, k: int) -> Fraction:
    """Harmonic weight: 1/t on type t < k, and k*x/(k-1) for x <= 1/k."""
    x = as_fraction(x)
    t = harmonic_type(x, k)
    if t < k:
        return Fraction(1, t)
    return Fraction(k, k - 1) * x


def T_k(k: int) -> Fraction:
    """Worst-case weight of a unit-sum sequence under f_k, as an exact rational.

    T_k = sum_{i<=m(k)} 1/t_i + (1/t_{m(k)+1}) * k/(k-1), decreasing toward
    ~1.69103 as k grows through the gaps of the t-sequence.
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    m = m_of_k(k)
    ts = t_sequence(m + 1)
    total = sum((Fraction(1, t) for t in ts[:m]), ZERO)
    return total + Fraction(1, ts[m]) * Fraction(k, k - 1)


@dataclass(frozen=True)
class DualFeasibleFn:
    """A dual-feasible function: identity, scaled harmonic, or a step function.

    Step functions take ordered dual prices pi_1 >= ... >= pi_p >= 0 over
    strictly decreasing breakpoints s_1 > ... > s_p and evaluate as
    g(0) = 0, g(x) = pi_j for x in [s_j, s_{j-1}) with s_0 = 1, and
    g(x) = pi_1 on [s_1, 1].
    """

    kind: str
    k: int | None = None
    breakpoints: tuple[Fraction, ...] = ()
    prices: tuple[Fraction, ...] = ()
    _asc: tuple[Fraction, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("identity", "harmonic_scaled", "step_from_dual"):
            raise ContractError(f"unknown dual-feasible kind {self.kind!r}")
        if self.kind == "harmonic_scaled" and (self.k is None or self.k < 2):
            raise DomainError("harmonic_scaled needs k >= 2")
        if self.kind == "step_from_dual":
            bps = tuple(as_fraction(b) for b in self.breakpoints)
            prs = tuple(as_fraction(p) for p in self.prices)
            if len(bps) != len(prs):
                raise ContractError("breakpoints and prices differ in length")
            if any(b2 >= b1 for b1, b2 in zip(bps, bps[1:])):
                raise ContractError("breakpoints must be strictly decreasing")
            if any(p2 > p1 for p1, p2 in zip(prs, prs[1:])):
                raise ContractError("prices must be nonincreasing")
            if prs and prs[-1] < 0:
                raise ContractError("prices must be nonnegative")
            if bps and not (ZERO < bps[-1] and bps[0] <= ONE):
                raise ContractError("breakpoints must lie in (0, 1]")
            object.__setattr__(self, "breakpoints", bps)
            object.__setattr__(self, "prices", prs)
            object.__setattr__(self, "_asc", tuple(reversed(bps)))

    def __call__(self, x: Rational) -> Fraction:
        x = as_fraction(x)
        if not (ZERO <= x <= ONE):
            raise DomainError(f"argument {x} outside [0, 1]")
        if self.kind == "identity":
            return x
        if self.kind == "harmonic_scaled":
            if x == 0:
                return ZERO
            return f_k(x, self.k) / T_k(self.k)
        if x == 0 or not self.breakpoints:
            return ZERO
        # largest breakpoint <= x decides the price; below all of them g = 0
        pos = bisect_right(self._asc, x) - 1
        if pos < 0:
            return ZERO
        return self.prices[len(self.prices) - 1 - pos]


def identity_fn() -> DualFeasibleFn:
    return DualFeasibleFn("identity")


def harmonic_scaled_fn(k: int) -> DualFeasibleFn:
    return DualFeasibleFn("harmonic_scaled", k=k)


def step_fn(breakpoints, prices) -> DualFeasibleFn:
    return DualFeasibleFn("step_from_dual", breakpoints=tuple(breakpoints),
                          prices=tuple(prices))


def make_g(dual) -> DualFeasibleFn:
    """Step function from a dual solution (any object with .sizes and .prices)."""
    return step_fn(dual.sizes, dual.prices)


def modified_volume(box, k: int, g: DualFeasibleFn) -> Fraction:
    """Weighted volume f_k(length) * g(width) * height of one box."""
    return f_k(box.length, k) * g(box.width) * box.height


def total_modified_volume(boxes, k: int, g: DualFeasibleFn) -> Fraction:
    return sum((modified_volume(b, k, g) for b in boxes), ZERO)

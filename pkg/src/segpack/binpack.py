"""One-dimensional bin packing: Next Fit, First Fit Decreasing, an exact
branch-and-bound solver for small instances, the pattern-LP relaxation
solved by column generation, and an accuracy-parameterized wrapper that
rounds sizes by linear grouping.

The relaxation's dual prices come back reordered (largest size gets the
largest price) and exactly rationalized: after the float LP converges, the
prices are scaled down by the exact maximum pattern value so that every
feasible pattern prices to at most 1 in rational arithmetic.  That makes
the step function built from them safe to use in exact certificates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from .errors import ContractError, DomainError
from .lp import LinearProgram, SimplexTableau, solve_lp
from .model import Rational, as_fraction

ZERO = Fraction(0)
ONE = Fraction(1)

PRICE_TOL = 1e-9


def _check_sizes(sizes) -> list[Fraction]:
    out = []
    for s in sizes:
        f = as_fraction(s)
        if not (ZERO < f <= ONE):
            raise DomainError(f"size {f} outside (0, 1]")
        out.append(f)
    return out


def next_fit(sizes) -> list[list[int]]:
    """Classic Next Fit; returns bins as lists of item indices, in order."""
    sizes = _check_sizes(sizes)
    bins: list[list[int]] = []
    load = ONE  # forces a first bin
    for i, s in enumerate(sizes):
        if load + s > ONE:
            bins.append([])
            load = ZERO
        bins[-1].append(i)
        load += s
    return bins


def first_fit_decreasing(sizes) -> list[list[int]]:
    """FFD with ties broken by original index; deterministic."""
    sizes = _check_sizes(sizes)
    order = sorted(range(len(sizes)), key=lambda i: (-sizes[i], i))
    bins: list[list[int]] = []
    loads: list[Fraction] = []
    for i in order:
        s = sizes[i]
        for b, load in enumerate(loads):
            if load + s <= ONE:
                bins[b].append(i)
                loads[b] = load + s
                break
        else:
            bins.append([i])
            loads.append(s)
    return bins


@dataclass(frozen=True)
class SizeProfile:
    """Distinct sizes in strictly decreasing order with multiplicities."""

    sizes: tuple[Fraction, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if any(s2 >= s1 for s1, s2 in zip(self.sizes, self.sizes[1:])):
            raise ContractError("profile sizes must be strictly decreasing")
        if any(n < 1 for n in self.counts):
            raise ContractError("profile counts must be >= 1")

    @staticmethod
    def from_sizes(sizes) -> "SizeProfile":
        sizes = _check_sizes(sizes)
        tally: dict[Fraction, int] = {}
        for s in sizes:
            tally[s] = tally.get(s, 0) + 1
        keys = sorted(tally, reverse=True)
        return SizeProfile(tuple(keys), tuple(tally[k] for k in keys))

    @property
    def total_items(self) -> int:
        return sum(self.counts)

    def expand(self) -> list[Fraction]:
        out = []
        for s, n in zip(self.sizes, self.counts):
            out.extend([s] * n)
        return out


def pattern_is_feasible(profile: SizeProfile, counts) -> bool:
    return sum((c * s for c, s in zip(counts, profile.sizes)), ZERO) <= ONE


@dataclass(frozen=True)
class DualSolution:
    """Ordered prices over the profile sizes, exactly rationalized.

    prices[0] >= prices[1] >= ... >= 0, and for every feasible pattern v,
    sum v_j * prices[j] <= 1 holds in exact arithmetic.
    """

    sizes: tuple[Fraction, ...]
    prices: tuple[Fraction, ...]

    def objective(self, counts) -> Fraction:
        return sum((n * p for n, p in zip(counts, self.prices)), ZERO)


def max_pattern_value(sizes: list[Fraction], values, capacity=ONE):
    """Exact bounded knapsack: maximize sum v_j*values_j with sum v_j*sizes_j
    <= capacity and v_j <= floor(capacity_0/size_j).  Returns (value, counts).

    Values may be floats or Fractions; sizes and capacity stay rational so
    feasibility is exact.  Branch and bound over density-ordered classes
    with a fractional bound.
    """
    p = len(sizes)
    vals = list(values)
    order = sorted(range(p), key=lambda j: (-(vals[j] / sizes[j]), j))
    zero = vals[0] * 0 if p else 0
    best_val = zero
    best_counts = [0] * p

    def bound(idx, cap, val):
        for oj in range(idx, p):
            j = order[oj]
            if vals[j] <= 0:
                break
            take = cap / sizes[j]
            umax = int(ONE / sizes[j])
            if take >= umax:
                val = val + umax * vals[j]
                cap = cap - umax * sizes[j]
            else:
                return val + take * vals[j]
        return val

    def dfs(idx, cap, val, counts):
        nonlocal best_val, best_counts
        if val > best_val:
            best_val = val
            best_counts = counts.copy()
        if idx == p:
            return
        if bound(idx, cap, val) <= best_val:
            return
        j = order[idx]
        if vals[j] <= 0:
            return
        cmax = min(int(ONE / sizes[j]), int(cap / sizes[j]))
        for cnt in range(cmax, -1, -1):
            counts[j] = cnt
            dfs(idx + 1, cap - cnt * sizes[j], val + cnt * vals[j], counts)
            counts[j] = 0

    dfs(0, capacity, zero, [0] * p)
    return best_val, tuple(best_counts)


@dataclass
class FbpSolution:
    objective: float
    dual: DualSolution
    patterns: list[tuple[int, ...]]
    pattern_use: np.ndarray
    profile: SizeProfile


def _ordered_dual(profile: SizeProfile, patterns: list[tuple[int, ...]],
                  target: float) -> tuple[DualSolution, list[tuple[int, ...]]]:
    """Ordered optimal dual prices, certified against all patterns.

    Maximizes the dual objective subject to the known pattern constraints
    plus the ordering chain, then separates with an exact knapsack; any
    pattern worth more than 1 becomes a new constraint.  Terminates because
    the pattern set is finite.  Finally the float prices are rationalized
    and, if needed, scaled down by the exact maximum pattern value.
    """
    p = len(profile.sizes)
    sizes = list(profile.sizes)
    counts = np.array(profile.counts, dtype=float)
    patterns = list(patterns)
    while True:
        rows = []
        rhs = []
        for v in patterns:
            rows.append([-float(x) for x in v])
            rhs.append(-1.0)
        for j in range(p - 1):
            row = [0.0] * p
            row[j] = 1.0
            row[j + 1] = -1.0
            rows.append(row)
            rhs.append(0.0)
        sol = solve_lp(LinearProgram(-counts, np.array(rows), np.array(rhs)))
        if sol.status != "optimal":
            raise ContractError(f"ordered dual LP came back {sol.status}")
        pi = [Fraction(max(float(v), 0.0)) for v in sol.primal]
        # enforce the chain exactly (floats can be off by ~1e-12)
        for j in range(1, p):
            if pi[j] > pi[j - 1]:
                pi[j] = pi[j - 1]
        val, argmax = max_pattern_value(sizes, pi)
        if float(val) <= 1.0 + PRICE_TOL:
            if val > 1:
                pi = [x / val for x in pi]
            dual = DualSolution(tuple(profile.sizes), tuple(pi))
            got = float(dual.objective(profile.counts))
            if abs(got - target) > 1e-6 * (1.0 + abs(target)):
                raise ContractError(
                    f"ordered dual objective {got} drifted from LP value {target}")
            return dual, patterns
        if argmax in patterns:
            raise ContractError("dual separation repeated a pattern")
        patterns.append(argmax)


def solve_fbp(profile: SizeProfile) -> FbpSolution:
    """Pattern-LP relaxation by column generation with exact pricing."""
    p = len(profile.sizes)
    if p == 0:
        return FbpSolution(0.0, DualSolution((), ()), [], np.zeros(0),
                           profile)
    sizes = list(profile.sizes)
    counts = np.array(profile.counts, dtype=float)
    patterns: list[tuple[int, ...]] = []
    for j, s in enumerate(sizes):
        v = [0] * p
        v[j] = int(ONE / s)
        patterns.append(tuple(v))
    A = np.array(patterns, dtype=float).T
    tab = SimplexTableau(LinearProgram(np.ones(len(patterns)), A, counts))
    if tab.solve() != "optimal":
        raise ContractError("pattern LP master must be feasible")
    seen = set(patterns)
    while True:
        prices = np.maximum(tab.dual(), 0.0)
        val, v = max_pattern_value(sizes, [float(x) for x in prices])
        if val <= 1.0 + PRICE_TOL:
            break
        if v in seen:
            break  # numerically stalled; current value is optimal within tol
        seen.add(v)
        patterns.append(v)
        tab.add_column(np.array(v, dtype=float), 1.0)
        if tab.resume() != "optimal":
            raise ContractError("pattern LP master became unbounded")
    objective = tab.objective()
    x = tab.primal()
    dual, all_patterns = _ordered_dual(profile, patterns, objective)
    use = np.zeros(len(all_patterns))
    use[:len(x)] = x
    return FbpSolution(objective, dual, all_patterns, use, profile)


def exact_bp(profile: SizeProfile, max_items: int = 20) -> int:
    """Exact bin count by branch and bound; refuses large instances."""
    n = profile.total_items
    if n > max_items:
        raise DomainError(f"exact solver limited to {max_items} items, got {n}")
    if n == 0:
        return 0
    items = sorted(profile.expand(), reverse=True)
    ffd = len(first_fit_decreasing(items))
    volume_lb = ceil(sum(items))
    fbp_lb = ceil(solve_fbp(profile).objective - 1e-9)
    root_lb = max(volume_lb, fbp_lb, 1)
    if ffd <= root_lb:
        return ffd
    best = ffd
    seen: set[tuple] = set()
    suffix = [ZERO] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + items[i]

    def lower_bound(idx, loads):
        free = sum((ONE - l for l in loads), ZERO)
        extra = suffix[idx] - free
        need = ceil(extra) if extra > 0 else 0
        return len(loads) + need

    def dfs(idx, loads):
        nonlocal best
        if idx == n:
            best = min(best, len(loads))
            return
        if lower_bound(idx, loads) >= best:
            return
        key = (idx, tuple(sorted(loads)))
        if key in seen:
            return
        seen.add(key)
        s = items[idx]
        tried: set[Fraction] = set()
        for b, load in enumerate(loads):
            if load + s <= ONE and load not in tried:
                tried.add(load)
                loads[b] = load + s
                dfs(idx + 1, loads)
                loads[b] = load
        if len(loads) + 1 < best:
            loads.append(s)
            dfs(idx + 1, loads)
            loads.pop()

    dfs(0, [])
    return best


def aptas_bp(sizes, epsilon: Rational) -> list[list[int]]:
    """Accuracy-parameterized packing: linear grouping with round-up, the
    pattern LP on the rounded profile, integer round-up of the LP solution,
    then small items (<= epsilon) added by first fit."""
    eps = as_fraction(epsilon)
    if not (ZERO < eps <= Fraction(1, 2)):
        raise DomainError(f"epsilon {eps} outside (0, 1/2]")
    sizes = _check_sizes(sizes)
    if not sizes:
        return []
    large = [i for i in range(len(sizes)) if sizes[i] > eps]
    small = [i for i in range(len(sizes)) if sizes[i] <= eps]

    bins: list[list[int]] = []
    loads: list[Fraction] = []
    if large:
        large.sort(key=lambda i: (-sizes[i], i))
        group = max(1, ceil(len(large) * eps * eps))
        rounded: dict[Fraction, list[int]] = {}
        for start in range(0, len(large), group):
            chunk = large[start:start + group]
            up = sizes[chunk[0]]
            rounded.setdefault(up, []).extend(chunk)
        profile = SizeProfile(
            tuple(sorted(rounded, reverse=True)),
            tuple(len(rounded[s]) for s in sorted(rounded, reverse=True)))
        fbp = solve_fbp(profile)
        remaining = {s: list(rounded[s]) for s in profile.sizes}
        for pat, use in zip(fbp.patterns, fbp.pattern_use):
            copies = ceil(float(use) - 1e-9)
            for _ in range(max(copies, 0)):
                content: list[int] = []
                load = ZERO
                for j, cnt in enumerate(pat):
                    cls = remaining[profile.sizes[j]]
                    for _ in range(cnt):
                        if not cls:
                            break
                        i = cls.pop()
                        content.append(i)
                        load += sizes[i]
                if content:
                    bins.append(content)
                    loads.append(load)
        leftovers = [i for cls in remaining.values() for i in cls]
        if leftovers:
            raise ContractError("rounded LP left items unassigned")

    for i in small:
        s = sizes[i]
        for b, load in enumerate(loads):
            if load + s <= ONE:
                bins[b].append(i)
                loads[b] = load + s
                break
        else:
            bins.append([i])
            loads.append(s)
    return bins

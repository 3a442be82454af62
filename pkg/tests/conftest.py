"""Shared test helpers: generators with exact rational output and a
validity assertion used by every suite that emits a packing."""

import random
from fractions import Fraction

import pytest

from segpack.model import Instance, validate_packing

ZERO = Fraction(0)
ONE = Fraction(1)


def assert_valid(instance, packing):
    report = validate_packing(instance, packing)
    assert report.ok, [v.message for v in report.violations[:5]]
    return report


def stick_break(rng: random.Random, max_parts: int = 12,
                denom: int = 720) -> list[Fraction]:
    """Sizes with an exact-sum guarantee: repeatedly break off a random
    rational share of what is left of the unit interval, so the pieces sum
    to at most 1 by construction."""
    remaining = ONE
    parts = []
    for _ in range(rng.randint(1, max_parts)):
        share = Fraction(rng.randint(1, denom), denom)
        piece = remaining * share
        if piece == 0:
            break
        parts.append(piece)
        remaining -= piece
        if remaining == 0:
            break
    return parts


def guillotine_rectangles(rng: random.Random, cuts: int = 8,
                          grid: int = 32) -> list[tuple[Fraction, Fraction]]:
    """(length, width) pairs that tile the unit square: start from the full
    square and repeatedly cut one rectangle at a lattice coordinate, so the
    result is packable into the unit square by construction."""
    g = Fraction(1, grid)
    rects = [(ZERO, ZERO, ONE, ONE)]  # (x0, y0, l, w)
    for _ in range(cuts):
        idx = rng.randrange(len(rects))
        x0, y0, l, w = rects[idx]
        axis = rng.randrange(2)
        start, extent = (x0, l) if axis == 0 else (y0, w)
        lo = int(start / g) + 1
        hi = int((start + extent) / g)
        if (start + extent) % g == 0:
            hi -= 1
        if lo > hi:
            continue
        cut = Fraction(rng.randint(lo, hi), grid)
        first = cut - start
        if axis == 0:
            rects[idx] = (x0, y0, first, w)
            rects.append((cut, y0, l - first, w))
        else:
            rects[idx] = (x0, y0, l, first)
            rects.append((x0, cut, l, w - first))
    return [(l, w) for (_, _, l, w) in rects]


@pytest.fixture
def rng():
    return random.Random(20260810)
